//! Experiment drivers behind the `wpcn-noma` binary.
//!
//! Every driver writes a CSV table to any [`Write`] sink. Tables start with a
//! `#`-prefixed metadata block (version, command, method, seed, generator and
//! the full configuration) followed by a header row. Output is a pure
//! function of the inputs, so re-running a command reproduces the file byte
//! for byte.

use std::io::Write;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{derive_constants, ConfigError, InterferenceConvention, NetworkConfig};
use crate::grouping::{
    evaluate_scheme, evaluate_scheme_at, group_minima_with, optimal_group_size, FairnessReport,
    GroupingError, Scheme,
};
use crate::montecarlo::{self, McOptions, GENERATOR};
use crate::orderstats::{expected_log_distance, OrderStatSpec};
use crate::rates::{rate_profile, MethodKind, RateError, RateMethod};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid sweep: {0}")]
    Sweep(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv output failure: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 1 invalid config, 2 numerical failure, 3 I/O failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::Io { .. }) => 3,
            CliError::Config(_) | CliError::Sweep(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) | CliError::Csv(_) => 3,
        }
    }
}

impl From<RateError> for CliError {
    fn from(e: RateError) -> Self {
        match e {
            RateError::Config(c) => CliError::Config(c),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<GroupingError> for CliError {
    fn from(e: GroupingError) -> Self {
        match e {
            GroupingError::Rate(r) => r.into(),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Asymptotic,
    Mc,
}

impl MethodArg {
    pub fn to_method(self, mc: McOptions) -> RateMethod {
        match self {
            MethodArg::Exact => RateMethod::Exact,
            MethodArg::Asymptotic => RateMethod::Asymptotic,
            MethodArg::Mc => RateMethod::MonteCarlo(mc),
        }
    }
}

/// One flag per [`NetworkConfig`] field; set flags override the file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigOverrides {
    #[arg(long, global = true)]
    pub n_users: Option<usize>,
    #[arg(long, global = true)]
    pub dist_ps_ap: Option<f64>,
    #[arg(long, global = true)]
    pub wet_radius: Option<f64>,
    #[arg(long, global = true)]
    pub ps_power: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub noise_power_dbm: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub interference_power_dbm: Option<f64>,
    #[arg(long, global = true, value_parser = parse_convention)]
    pub interference_convention: Option<InterferenceConvention>,
    #[arg(long, global = true)]
    pub path_loss_ref: Option<f64>,
    #[arg(long, global = true)]
    pub ref_distance: Option<f64>,
    #[arg(long, global = true)]
    pub path_loss_exp: Option<f64>,
    #[arg(long, global = true)]
    pub energy_efficiency: Option<f64>,
    #[arg(long, global = true)]
    pub tau0: Option<f64>,
    #[arg(long, global = true)]
    pub fading_gain_wet: Option<f64>,
    #[arg(long, global = true)]
    pub fading_gain_wit: Option<f64>,
    #[arg(long, global = true)]
    pub inter_user_gain: Option<f64>,
}

fn parse_convention(s: &str) -> Result<InterferenceConvention, String> {
    match s {
        "received-power-dbm" => Ok(InterferenceConvention::ReceivedPowerDbm),
        "channel-gain-db" => Ok(InterferenceConvention::ChannelGainDb),
        other => Err(format!(
            "unknown convention {other:?} (expected received-power-dbm or channel-gain-db)"
        )),
    }
}

impl ConfigOverrides {
    pub fn apply(&self, mut cfg: NetworkConfig) -> NetworkConfig {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        set!(
            n_users,
            dist_ps_ap,
            wet_radius,
            ps_power,
            noise_power_dbm,
            interference_power_dbm,
            interference_convention,
            path_loss_ref,
            ref_distance,
            path_loss_exp,
            energy_efficiency,
            fading_gain_wet,
            fading_gain_wit
        );
        if self.tau0.is_some() {
            cfg.tau0 = self.tau0;
        }
        if self.inter_user_gain.is_some() {
            cfg.inter_user_gain = self.inter_user_gain;
        }
        cfg
    }
}

/// Everything recorded in a table's comment block.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub cfg: NetworkConfig,
    pub method: RateMethod,
    /// Options for Monte Carlo parts that run regardless of `method`
    /// (random-grouping subsets, validation).
    pub mc: McOptions,
}

impl RunContext {
    pub fn new(cfg: NetworkConfig, method: RateMethod, mc: McOptions) -> Self {
        RunContext { cfg, method, mc }
    }

    fn write_header(&self, out: &mut dyn Write, command: &str) -> Result<(), CliError> {
        writeln!(out, "# wpcn-noma {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(out, "# command: {command}")?;
        writeln!(out, "# method: {}", self.method.kind())?;
        writeln!(out, "# seed: {}", self.mc.seed)?;
        writeln!(out, "# trials: {}", self.mc.trials)?;
        writeln!(out, "# generator: {GENERATOR}")?;
        writeln!(
            out,
            "# interference_convention: {}",
            self.cfg.interference_convention
        )?;
        writeln!(out, "# effective_tau0: {}", self.cfg.tau0())?;
        for line in self.cfg.to_toml_string().lines() {
            writeln!(out, "# config: {line}")?;
        }
        Ok(())
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinVsLRow {
    pub l: usize,
    pub min_interfered: Option<f64>,
    pub min_noninterfered: Option<f64>,
    pub overall_min: f64,
}

/// Worst interfered and worst non-interfered rate for every `l = 0..=N`.
/// Returns the rows and the max-min fair `l`.
pub fn run_fig_min_vs_l(
    ctx: &RunContext,
    out: &mut dyn Write,
) -> Result<(Vec<MinVsLRow>, usize), CliError> {
    let cfg = &ctx.cfg;
    let dc = derive_constants(cfg)?;
    let rows: Vec<MinVsLRow> = (0..=cfg.n_users)
        .into_par_iter()
        .map(|l| {
            let (a, b) = group_minima_with(l, cfg, &dc, &ctx.method)?;
            let overall = a.unwrap_or(f64::INFINITY).min(b.unwrap_or(f64::INFINITY));
            Ok(MinVsLRow {
                l,
                min_interfered: a,
                min_noninterfered: b,
                overall_min: overall,
            })
        })
        .collect::<Result<_, RateError>>()?;
    let l_star = optimal_group_size(cfg, &dc, &ctx.method)?;

    ctx.write_header(out, "fig-min-vs-l")?;
    writeln!(out, "# l_star: {l_star}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "l",
        "min_interfered",
        "min_noninterfered",
        "overall_min",
        "is_l_star",
    ])?;
    for r in &rows {
        w.write_record([
            r.l.to_string(),
            fmt_opt(r.min_interfered),
            fmt_opt(r.min_noninterfered),
            r.overall_min.to_string(),
            (r.l == l_star).to_string(),
        ])?;
    }
    w.flush()?;
    Ok((rows, l_star))
}

/// Per-rank rates for each requested `l`. `l = 0` and `l*` are always
/// included. Returns the `l` values used (ascending) and one rate column per
/// value.
pub fn run_fig_rate_vs_rank(
    ctx: &RunContext,
    l_values: &[usize],
    out: &mut dyn Write,
) -> Result<(Vec<usize>, Vec<Vec<f64>>), CliError> {
    let cfg = &ctx.cfg;
    let dc = derive_constants(cfg)?;
    if let Some(&bad) = l_values.iter().find(|&&l| l > cfg.n_users) {
        return Err(CliError::Sweep(format!(
            "l = {bad} exceeds n_users = {}",
            cfg.n_users
        )));
    }
    let l_star = optimal_group_size(cfg, &dc, &ctx.method)?;
    let mut ls: Vec<usize> = l_values.iter().copied().chain([0, l_star]).collect();
    ls.sort_unstable();
    ls.dedup();

    let columns: Vec<Vec<f64>> = ls
        .par_iter()
        .map(|&l| rate_profile(l, cfg, &dc, &ctx.method).map(|p| p.rates))
        .collect::<Result<_, _>>()?;

    ctx.write_header(out, "fig-rate-vs-rank")?;
    writeln!(out, "# l_star: {l_star}")?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["n".to_string()];
    header.extend(ls.iter().map(|l| format!("rate_l{l}")));
    w.write_record(&header)?;
    for n in 0..cfg.n_users {
        let mut rec = vec![(n + 1).to_string()];
        rec.extend(columns.iter().map(|c| c[n].to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok((ls, columns))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParameter {
    /// Fixed interference-group size.
    #[value(name = "l")]
    GroupSizeL,
    Tau0,
    #[value(name = "n-users")]
    NumUsers,
}

impl SweepParameter {
    fn name(&self) -> &'static str {
        match self {
            SweepParameter::GroupSizeL => "l",
            SweepParameter::Tau0 => "tau0",
            SweepParameter::NumUsers => "n_users",
        }
    }

    /// Grid used when none is given on the command line.
    pub fn default_values(&self, cfg: &NetworkConfig) -> Vec<f64> {
        match self {
            SweepParameter::GroupSizeL => (0..=cfg.n_users).map(|l| l as f64).collect(),
            SweepParameter::Tau0 => (0..=15).map(|i| i as f64 * 0.02).collect(),
            SweepParameter::NumUsers => [5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100]
                .iter()
                .map(|&n| n as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub method: RateMethod,
}

impl SweepSpec {
    pub fn new(
        parameter: SweepParameter,
        values: Vec<f64>,
        schemes: Vec<Scheme>,
        method: RateMethod,
        cfg: &NetworkConfig,
    ) -> Result<Self, CliError> {
        if values.is_empty() {
            return Err(CliError::Sweep("no sweep values".into()));
        }
        if schemes.is_empty() {
            return Err(CliError::Sweep("no schemes selected".into()));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(CliError::Sweep(format!(
                "values must be strictly increasing: {values:?}"
            )));
        }
        for &v in &values {
            let ok = match parameter {
                SweepParameter::GroupSizeL => {
                    v.fract() == 0.0 && v >= 0.0 && v <= cfg.n_users as f64
                }
                SweepParameter::Tau0 => (0.0..1.0).contains(&v),
                SweepParameter::NumUsers => v.fract() == 0.0 && v >= 1.0,
            };
            if !ok {
                return Err(CliError::Sweep(format!(
                    "{} = {v} is out of range",
                    parameter.name()
                )));
            }
        }
        Ok(SweepSpec {
            parameter,
            values,
            schemes,
            method,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub scheme: Scheme,
    /// `Err` carries the message written into the row's status column.
    pub report: Result<FairnessReport, String>,
}

fn sweep_point(
    spec: &SweepSpec,
    value: f64,
    scheme: Scheme,
    ctx: &RunContext,
) -> Result<FairnessReport, CliError> {
    let mut cfg = ctx.cfg.clone();
    match spec.parameter {
        SweepParameter::Tau0 => cfg.tau0 = Some(value),
        SweepParameter::NumUsers => cfg.n_users = value as usize,
        SweepParameter::GroupSizeL => {}
    }
    let dc = derive_constants(&cfg)?;
    let report = match spec.parameter {
        SweepParameter::GroupSizeL => {
            evaluate_scheme_at(scheme, value as usize, &cfg, &dc, &spec.method, &ctx.mc)?
        }
        _ => evaluate_scheme(scheme, &cfg, &dc, &spec.method, Some(&ctx.mc))?,
    };
    Ok(report)
}

/// One row per (sweep value, scheme), in sweep order. A failing point
/// yields an `error` row instead of aborting the sweep.
pub fn run_sweep(
    spec: &SweepSpec,
    ctx: &RunContext,
    out: &mut dyn Write,
) -> Result<Vec<SweepRow>, CliError> {
    let jobs: Vec<(f64, Scheme)> = spec
        .values
        .iter()
        .flat_map(|&v| spec.schemes.iter().map(move |&s| (v, s)))
        .collect();
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(value, scheme)| SweepRow {
            value,
            scheme,
            report: sweep_point(spec, value, scheme, ctx).map_err(|e| e.to_string()),
        })
        .collect();

    let ctx = RunContext {
        method: spec.method,
        ..ctx.clone()
    };
    ctx.write_header(out, &format!("sweep {}", spec.parameter.name()))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        spec.parameter.name(),
        "scheme",
        "min_rate",
        "jain_index",
        "sum_rate",
        "l_star",
        "status",
    ])?;
    for row in &rows {
        let mut rec = vec![row.value.to_string(), row.scheme.to_string()];
        match &row.report {
            Ok(r) => rec.extend([
                r.min_rate.to_string(),
                fmt_opt(r.jain_index),
                r.sum_rate.to_string(),
                r.l_star.to_string(),
                "ok".to_string(),
            ]),
            Err(msg) => rec.extend([
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                format!("error: {msg}"),
            ]),
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(rows)
}

/// Fairness reports for the given schemes under the context's configuration.
pub fn run_eval(
    ctx: &RunContext,
    schemes: &[Scheme],
    out: &mut dyn Write,
) -> Result<Vec<FairnessReport>, CliError> {
    let dc = derive_constants(&ctx.cfg)?;
    let reports: Vec<FairnessReport> = schemes
        .iter()
        .map(|&s| evaluate_scheme(s, &ctx.cfg, &dc, &ctx.method, Some(&ctx.mc)))
        .collect::<Result<_, _>>()?;
    ctx.write_header(out, "eval")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scheme", "l_star", "min_rate", "jain_index", "sum_rate"])?;
    for r in &reports {
        w.write_record([
            r.scheme.to_string(),
            r.l_star.to_string(),
            r.min_rate.to_string(),
            fmt_opt(r.jain_index),
            r.sum_rate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Analytical values against the Monte Carlo simulation, within `sigmas`
/// standard errors: `E[ln R_(n)]` for a few ranks, then every rank's exact
/// rate and the sum rate for `l` in `{0, l*, N}`.
pub fn run_validate(
    ctx: &RunContext,
    sigmas: f64,
    out: &mut dyn Write,
) -> Result<Vec<Check>, CliError> {
    let cfg = &ctx.cfg;
    let dc = derive_constants(cfg)?;
    let big = cfg.n_users;
    let mut checks = Vec::new();

    let mut ranks = vec![1, big.div_ceil(2), big];
    ranks.dedup();
    for n in ranks {
        let spec = OrderStatSpec::new(n, big).expect("rank in range");
        let closed = expected_log_distance(spec, cfg.wet_radius)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        let est = montecarlo::estimate_log_order_distance(n, cfg, &ctx.mc);
        let z = (est.mean - closed) / est.stderr;
        checks.push(Check {
            name: format!("E[ln R_({n})]"),
            passed: z.abs() <= sigmas,
            detail: format!("closed {closed:.6} mc {:.6} z {z:+.2}", est.mean),
        });
    }

    let l_star = optimal_group_size(cfg, &dc, &RateMethod::Exact)?;
    let mut ls = vec![0, l_star, big];
    ls.dedup();
    for l in ls {
        let exact = rate_profile(l, cfg, &dc, &RateMethod::Exact)?;
        let sim = montecarlo::simulate(l, cfg, &ctx.mc);
        let (worst_rank, worst_z) = exact
            .rates
            .iter()
            .zip(&sim.per_rank)
            .enumerate()
            .map(|(i, (r, e))| {
                (
                    i + 1,
                    if e.stderr > 0.0 {
                        (e.mean - r) / e.stderr
                    } else {
                        0.0
                    },
                )
            })
            .fold(
                (0, 0.0f64),
                |acc, x| if x.1.abs() > acc.1.abs() { x } else { acc },
            );
        checks.push(Check {
            name: format!("per-rank rates, l = {l}"),
            passed: worst_z.abs() <= sigmas,
            detail: format!("worst rank {worst_rank} z {worst_z:+.2}"),
        });
        let exact_sum: f64 = exact.rates.iter().sum();
        let z = (sim.sum_rate.mean - exact_sum) / sim.sum_rate.stderr;
        checks.push(Check {
            name: format!("sum rate, l = {l}"),
            passed: z.abs() <= sigmas,
            detail: format!("exact {exact_sum:.6} mc {:.6} z {z:+.2}", sim.sum_rate.mean),
        });
    }

    for c in &checks {
        writeln!(
            out,
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        )?;
    }
    Ok(checks)
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| format!("unknown scheme {s:?}"))
    }
}

impl From<MethodKind> for MethodArg {
    fn from(k: MethodKind) -> Self {
        match k {
            MethodKind::Exact => MethodArg::Exact,
            MethodKind::Asymptotic => MethodArg::Asymptotic,
            MethodKind::MonteCarlo => MethodArg::Mc,
        }
    }
}
