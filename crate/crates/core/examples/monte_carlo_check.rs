//! Exact per-rank rates against a seeded simulation of the physical
//! charge-then-transmit pipeline.

use wpcn_noma::montecarlo::simulate;
use wpcn_noma::{derive_constants, rate_profile, McOptions, NetworkConfig, RateMethod};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = NetworkConfig::default();
    let dc = derive_constants(&cfg)?;
    let opts = McOptions::with_trials(200_000, 2019);
    let l = 8;
    let exact = rate_profile(l, &cfg, &dc, &RateMethod::Exact)?;
    let sim = simulate(l, &cfg, &opts);
    println!(" n   exact     simulated  stderr     z");
    for (i, (r, e)) in exact.rates.iter().zip(&sim.per_rank).enumerate() {
        println!(
            "{:2}  {r:.6}  {:.6}   {:.2e}  {:+.2}",
            i + 1,
            e.mean,
            e.stderr,
            (e.mean - r) / e.stderr
        );
    }
    Ok(())
}
