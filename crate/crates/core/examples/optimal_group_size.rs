//! Max-min fair group size under the default network, with the worst rate
//! of each group around the optimum.

use wpcn_noma::{derive_constants, group_minima, optimal_l, NetworkConfig, RateMethod};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = NetworkConfig::default();
    let dc = derive_constants(&cfg)?;
    let report = optimal_l(&cfg, &dc, &RateMethod::Exact)?;
    println!("l* = {}", report.l_star);
    println!("min rate = {:.5} bits/block", report.min_rate);
    println!("Jain index = {:.4}", report.jain_index.unwrap_or(f64::NAN));
    println!("sum rate = {:.4} bits/block", report.sum_rate);

    println!("\n l  worst interfered  worst non-interfered");
    let lo = report.l_star.saturating_sub(2);
    let hi = (report.l_star + 2).min(cfg.n_users);
    for l in lo..=hi {
        let (a, b) = group_minima(l, &cfg, &dc)?;
        let show = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.5}"));
        println!("{l:2}  {:>16}  {:>20}", show(a), show(b));
    }
    Ok(())
}
