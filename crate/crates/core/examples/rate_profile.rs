//! Per-rank rates for TDMA (`l = 0`) and for the max-min fair group size.

use wpcn_noma::{derive_constants, optimal_group_size, rate_profile, NetworkConfig, RateMethod};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = NetworkConfig::default();
    let dc = derive_constants(&cfg)?;
    let l_star = optimal_group_size(&cfg, &dc, &RateMethod::Exact)?;
    let tdma = rate_profile(0, &cfg, &dc, &RateMethod::Exact)?;
    let noma = rate_profile(l_star, &cfg, &dc, &RateMethod::Exact)?;

    println!(" n   tdma      l={l_star}");
    for n in 1..=cfg.n_users {
        println!("{n:2}  {:.5}  {:.5}", tdma.rate(n), noma.rate(n));
    }
    println!(
        "nearest/farthest under TDMA: {:.1}x",
        tdma.rate(1) / tdma.rate(cfg.n_users)
    );
    Ok(())
}
