//! Load a flat `key = value` configuration, override one field, and write the
//! per-group minima table with its metadata header.

use wpcn_noma::cli::{run_fig_min_vs_l, RunContext};
use wpcn_noma::{McOptions, NetworkConfig, RateMethod};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = "\
n_users = 12
wet_radius = 15.0
interference_convention = \"received-power-dbm\"
";
    let mut cfg = NetworkConfig::from_toml_str(text)?;
    cfg.tau0 = Some(0.1);
    cfg.validate()?;
    let ctx = RunContext::new(cfg, RateMethod::Exact, McOptions::default());
    let (_, l_star) = run_fig_min_vs_l(&ctx, &mut std::io::stdout().lock())?;
    eprintln!("l* = {l_star}");
    Ok(())
}
