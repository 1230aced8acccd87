//! Fairness and throughput of each scheme as the number of users grows.

use wpcn_noma::{derive_constants, evaluate_scheme, McOptions, NetworkConfig, RateMethod, Scheme};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mc = McOptions::with_trials(20_000, 11);
    println!("  N  scheme                 l*   min rate  Jain    sum rate");
    for n_users in [5, 10, 20, 50] {
        let cfg = NetworkConfig {
            n_users,
            ..Default::default()
        };
        let dc = derive_constants(&cfg)?;
        for scheme in Scheme::ALL {
            let r = evaluate_scheme(scheme, &cfg, &dc, &RateMethod::Exact, Some(&mc))?;
            println!(
                "{n_users:3}  {:<21} {:3}  {:.5}   {:.4}  {:.4}",
                scheme.to_string(),
                r.l_star,
                r.min_rate,
                r.jain_index.unwrap_or(f64::NAN),
                r.sum_rate
            );
        }
    }
    Ok(())
}
