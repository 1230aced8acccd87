//! Worst relative error of the closed-form rate as the access point moves
//! away relative to the charging radius (`r_d = 50` m fixed, `r_e` shrinks).

use wpcn_noma::{derive_constants, rate_asymptotic, rate_exact, NetworkConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("r_d/r_e  worst relative error");
    for ratio in [2.5, 10.0, 50.0, 250.0] {
        let cfg = NetworkConfig {
            wet_radius: 50.0 / ratio,
            ..Default::default()
        };
        let dc = derive_constants(&cfg)?;
        let mut worst = 0.0f64;
        for l in 0..=cfg.n_users {
            for n in 1..=cfg.n_users {
                let exact = rate_exact(n, l, &cfg, &dc)?;
                if exact > 0.0 {
                    let approx = rate_asymptotic(n, l, &cfg, &dc)?;
                    worst = worst.max((approx - exact).abs() / exact);
                }
            }
        }
        println!("{ratio:7}  {worst:.3e}");
    }
    Ok(())
}
