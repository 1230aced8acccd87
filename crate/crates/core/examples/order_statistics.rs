//! Distance order statistics of users placed uniformly in a disc's radius:
//! closed-form mean log distance, CDF in two forms, and density values.

use wpcn_noma::orderstats::{
    expected_log_distance, order_cdf, order_cdf_beta, order_pdf_uniform, OrderStatSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (total, r_e) = (20, 20.0);
    println!(" n  E[ln R_(n)]  P(R_(n) <= r_e/2)  beta form          pdf at r_e/2");
    for n in [1, 5, 10, 15, 20] {
        let spec = OrderStatSpec::new(n, total)?;
        println!(
            "{n:2}  {:11.6}  {:17.12}  {:17.12}  {:.6}",
            expected_log_distance(spec, r_e)?,
            order_cdf(spec, 0.5)?,
            order_cdf_beta(spec, 0.5)?,
            order_pdf_uniform(spec, r_e / 2.0, r_e)?
        );
    }
    Ok(())
}
