use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wpcn_noma::cli::{
    run_eval, run_fig_min_vs_l, run_fig_rate_vs_rank, run_sweep, run_validate, CliError,
    ConfigOverrides, MethodArg, RunContext, SweepParameter, SweepSpec,
};
use wpcn_noma::{McOptions, NetworkConfig, Scheme};

#[derive(Parser)]
#[command(
    name = "wpcn-noma",
    version,
    about = "Fairness-aware NOMA in wireless powered networks"
)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: ConfigOverrides,
    /// Monte Carlo seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials.
    #[arg(long, global = true)]
    trials: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = MethodArg::Exact)]
    method: MethodArg,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fairness metrics for each scheme.
    Eval {
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<Scheme>>,
    },
    /// Worst interfered and non-interfered rate against l.
    FigMinVsL,
    /// Per-rank rates for several group sizes.
    FigRateVsRank {
        #[arg(long, value_delimiter = ',')]
        l: Vec<usize>,
    },
    /// Fairness metrics across a parameter grid.
    Sweep {
        #[arg(long, value_enum)]
        parameter: SweepParameter,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<Scheme>>,
    },
    /// Analytical rates against Monte Carlo simulation.
    Validate {
        #[arg(long, default_value_t = 4.0)]
        sigmas: f64,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let base = match &cli.config {
        Some(path) => NetworkConfig::load(path)?,
        None => NetworkConfig::default(),
    };
    let cfg = cli.overrides.apply(base);
    cfg.validate()?;
    let mut mc = McOptions::default();
    if let Some(s) = cli.seed {
        mc.seed = s;
    }
    if let Some(t) = cli.trials {
        mc.trials = t;
    }
    let ctx = RunContext::new(cfg.clone(), cli.method.to_method(mc), mc);

    let mut out: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let mut ok = true;
    match cli.command {
        Command::Eval { schemes } => {
            run_eval(&ctx, &schemes.unwrap_or(Scheme::ALL.to_vec()), &mut out)?;
        }
        Command::FigMinVsL => {
            run_fig_min_vs_l(&ctx, &mut out)?;
        }
        Command::FigRateVsRank { l } => {
            run_fig_rate_vs_rank(&ctx, &l, &mut out)?;
        }
        Command::Sweep {
            parameter,
            values,
            schemes,
        } => {
            let values = values.unwrap_or_else(|| parameter.default_values(&cfg));
            let spec = SweepSpec::new(
                parameter,
                values,
                schemes.unwrap_or(Scheme::ALL.to_vec()),
                ctx.method,
                &cfg,
            )?;
            run_sweep(&spec, &ctx, &mut out)?;
        }
        Command::Validate { sigmas } => {
            ok = run_validate(&ctx, sigmas, &mut out)?
                .iter()
                .all(|c| c.passed);
        }
    }
    out.flush()?;
    Ok(ok)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
