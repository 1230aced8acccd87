//! Minimum rate of each scheme as the dedicated charging time grows.

use wpcn_noma::cli::{run_sweep, RunContext, SweepParameter, SweepSpec};
use wpcn_noma::{McOptions, NetworkConfig, RateMethod, Scheme};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = NetworkConfig::default();
    let mc = McOptions::with_trials(20_000, 7);
    let ctx = RunContext::new(cfg.clone(), RateMethod::Exact, mc);
    let spec = SweepSpec::new(
        SweepParameter::Tau0,
        SweepParameter::Tau0.default_values(&cfg),
        Scheme::ALL.to_vec(),
        RateMethod::Exact,
        &cfg,
    )?;
    run_sweep(&spec, &ctx, &mut std::io::stdout().lock())?;
    Ok(())
}
