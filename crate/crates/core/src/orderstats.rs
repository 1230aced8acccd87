//! Order statistics of i.i.d. uniform user placements, plus the special
//! functions their closed forms need.

use statrs::function::gamma::ln_gamma;
use thiserror::Error;

/// Euler–Mascheroni constant, 20 significant digits.
pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_860_61;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrderStatError {
    #[error("domain error: {0}")]
    Domain(String),
}

/// Rank `n` (1-based) among `total` i.i.d. draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrderStatSpec {
    n: usize,
    total: usize,
}

impl OrderStatSpec {
    pub fn new(n: usize, total: usize) -> Result<Self, OrderStatError> {
        if n < 1 || n > total {
            return Err(OrderStatError::Domain(format!(
                "rank {n} outside 1..={total}"
            )));
        }
        Ok(OrderStatSpec { n, total })
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// `ln( N! / ((n-1)! (N-n)!) )`, the normalizer of the rank-`n` density
    /// on the unit interval.
    pub fn ln_density_coefficient(&self) -> f64 {
        let (n, big) = (self.n as f64, self.total as f64);
        ln_gamma(big + 1.0) - ln_gamma(n) - ln_gamma(big - n + 1.0)
    }

    /// Density of the rank-`n` statistic of `total` standard uniforms at
    /// `x ∈ [0, 1]`, i.e. the Beta(n, N - n + 1) density.
    pub fn unit_density(&self, x: f64) -> f64 {
        let lower = (self.n - 1) as i32;
        let upper = (self.total - self.n) as i32;
        self.ln_density_coefficient().exp() * x.powi(lower) * (1.0 - x).powi(upper)
    }
}

/// `psi(n) = -gamma + sum_{k=1}^{n-1} 1/k` for integer `n >= 1`.
pub fn digamma_int(n: u64) -> Result<f64, OrderStatError> {
    if n < 1 {
        return Err(OrderStatError::Domain("digamma_int needs n >= 1".into()));
    }
    // smallest terms first
    let harmonic: f64 = (1..n).rev().map(|k| 1.0 / k as f64).sum();
    Ok(harmonic - EULER_MASCHERONI)
}

fn check_probability(u: f64) -> Result<(), OrderStatError> {
    if (0.0..=1.0).contains(&u) {
        Ok(())
    } else {
        Err(OrderStatError::Domain(format!(
            "probability {u} outside [0, 1]"
        )))
    }
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

// Exact in f64 while C(n, k) < 2^53, which covers n <= 56.
const EXACT_BINOMIAL_MAX_N: usize = 56;

fn binomial(n: usize, k: usize) -> f64 {
    if n > EXACT_BINOMIAL_MAX_N {
        return ln_binomial(n, k).exp();
    }
    let k = k.min(n - k);
    (1..=k).fold(1.0, |c, i| c * (n - k + i) as f64 / i as f64)
}

/// CDF of the rank-`n` statistic given the parent CDF value `u`, as the
/// binomial tail `sum_{i=n}^{N} C(N,i) u^i (1-u)^(N-i)`. Sums whichever
/// tail lies away from the binomial mean.
pub fn order_cdf(spec: OrderStatSpec, u: f64) -> Result<f64, OrderStatError> {
    check_probability(u)?;
    let big = spec.total;
    let term = |i: usize| binomial(big, i) * u.powi(i as i32) * (1.0 - u).powi((big - i) as i32);
    let value = if spec.n as f64 > big as f64 * u {
        (spec.n..=big).rev().map(term).sum::<f64>()
    } else {
        1.0 - (0..spec.n).map(term).sum::<f64>()
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Same CDF through the regularized incomplete beta `I_u(n, N - n + 1)`.
pub fn order_cdf_beta(spec: OrderStatSpec, u: f64) -> Result<f64, OrderStatError> {
    check_probability(u)?;
    regularized_incomplete_beta(u, spec.n as f64, (spec.total - spec.n + 1) as f64)
}

/// Regularized incomplete beta `I_x(a, b)` via the modified Lentz
/// evaluation of its continued fraction.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64, OrderStatError> {
    check_probability(x)?;
    if !(a > 0.0 && b > 0.0) {
        return Err(OrderStatError::Domain(format!(
            "incomplete beta needs a, b > 0 (got {a}, {b})"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b);
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_continued_fraction(x, a, b) / a)
    } else {
        Ok(1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b)
    }
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Density of the rank-`n` distance when `N` distances are uniform on
/// `[0, r_e]`.
pub fn order_pdf_uniform(spec: OrderStatSpec, r: f64, r_e: f64) -> Result<f64, OrderStatError> {
    if !(r_e > 0.0) {
        return Err(OrderStatError::Domain(format!("radius {r_e} must be > 0")));
    }
    if !(0.0..=r_e).contains(&r) {
        return Err(OrderStatError::Domain(format!(
            "distance {r} outside [0, {r_e}]"
        )));
    }
    Ok(spec.unit_density(r / r_e) / r_e)
}

/// `E[ln R_(n)] = ln(r_e) + psi(n) - psi(N + 1)`.
pub fn expected_log_distance(spec: OrderStatSpec, r_e: f64) -> Result<f64, OrderStatError> {
    if !(r_e > 0.0) {
        return Err(OrderStatError::Domain(format!("radius {r_e} must be > 0")));
    }
    Ok(r_e.ln() + digamma_int(spec.n as u64)? - digamma_int(spec.total as u64 + 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_with_breakpoints, Tolerance};
    use proptest::prelude::*;

    #[test]
    fn digamma_values() {
        assert!((digamma_int(1).unwrap() + 0.577_215_664_9).abs() < 1e-10);
        assert!((digamma_int(2).unwrap() - 0.422_784_335_1).abs() < 1e-10);
        // H_9 - gamma
        let h9: f64 = (1..=9).map(|k| 1.0 / k as f64).sum();
        assert!((digamma_int(10).unwrap() - (h9 - EULER_MASCHERONI)).abs() < 1e-15);
        assert!((digamma_int(10).unwrap() - 2.251_752_589_1).abs() < 1e-10);
        assert!(digamma_int(0).is_err());
    }

    #[test]
    fn digamma_recurrence() {
        for n in [1u64, 2, 3, 10, 100, 1_000, 100_000, 1_000_000] {
            let diff = digamma_int(n + 1).unwrap() - digamma_int(n).unwrap();
            let psi = digamma_int(n + 1).unwrap();
            // a few ulps of the larger operand
            let ulp = psi.abs() * f64::EPSILON;
            assert!(
                (diff - 1.0 / n as f64).abs() <= 8.0 * ulp.max(f64::EPSILON),
                "n={n}"
            );
        }
    }

    #[test]
    fn cdf_extremes() {
        let u = 0.37;
        let max = OrderStatSpec::new(7, 7).unwrap();
        assert!((order_cdf(max, u).unwrap() - u.powi(7)).abs() < 1e-15);
        let min = OrderStatSpec::new(1, 7).unwrap();
        assert!((order_cdf(min, u).unwrap() - (1.0 - (1.0 - u).powi(7))).abs() < 1e-14);
        let median = OrderStatSpec::new(3, 5).unwrap();
        assert!((order_cdf(median, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((order_cdf_beta(median, 0.5).unwrap() - 0.5).abs() < 1e-14);
        assert!(order_cdf(median, 1.2).is_err());
        assert!(order_cdf_beta(median, -0.1).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(OrderStatSpec::new(0, 3).is_err());
        assert!(OrderStatSpec::new(4, 3).is_err());
        assert!(OrderStatSpec::new(3, 3).is_ok());
    }

    #[test]
    fn pdf_values() {
        let one = OrderStatSpec::new(1, 1).unwrap();
        for r in [0.0, 3.0, 20.0] {
            assert!((order_pdf_uniform(one, r, 20.0).unwrap() - 0.05).abs() < 1e-15);
        }
        assert!(order_pdf_uniform(one, 20.5, 20.0).is_err());
        assert!(order_pdf_uniform(one, -0.5, 20.0).is_err());

        let spec = OrderStatSpec::new(7, 20).unwrap();
        let tol = Tolerance {
            rel: 1e-12,
            abs: 1e-15,
            ..Default::default()
        };
        let total = integrate_with_breakpoints(
            |r| order_pdf_uniform(spec, r, 20.0).unwrap(),
            &[0.0, 20.0],
            &tol,
        )
        .unwrap();
        assert!((total.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pdf_mode() {
        let spec = OrderStatSpec::new(10, 20).unwrap();
        let mode = 20.0 * 9.0 / 19.0;
        let at = |r| order_pdf_uniform(spec, r, 20.0).unwrap();
        let h = 1e-3;
        assert!(at(mode) > at(mode - h) && at(mode) > at(mode + h));
        // central difference of the density vanishes at the mode
        let slope = (at(mode + 1e-6) - at(mode - 1e-6)) / 2e-6;
        assert!(slope.abs() < 1e-6, "slope {slope}");
    }

    #[test]
    fn expected_log_values() {
        let one = OrderStatSpec::new(1, 1).unwrap();
        assert!((expected_log_distance(one, 1.0).unwrap() + 1.0).abs() < 1e-15);
        let top = OrderStatSpec::new(20, 20).unwrap();
        let want = 20f64.ln() - 1.0 / 20.0;
        assert!((expected_log_distance(top, 20.0).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn expected_log_matches_quadrature() {
        let tol = Tolerance {
            rel: 1e-12,
            abs: 1e-15,
            ..Default::default()
        };
        for (n, big) in [(1, 1), (1, 5), (3, 5), (10, 20), (20, 20)] {
            let spec = OrderStatSpec::new(n, big).unwrap();
            let q = integrate_with_breakpoints(
                |x: f64| spec.unit_density(x) * (20.0 * x).ln(),
                &[0.0, 1e-6, 0.5, 1.0],
                &tol,
            )
            .unwrap();
            let closed = expected_log_distance(spec, 20.0).unwrap();
            assert!(
                (q.value - closed).abs() < 1e-9,
                "n={n} N={big}: {} vs {closed}",
                q.value
            );
        }
    }

    proptest! {
        #[test]
        fn cdf_monotone_with_fixed_ends(big in 1usize..40, frac in 0.0f64..1.0, u in 0.0f64..1.0, du in 0.0f64..0.5) {
            let n = 1 + ((big - 1) as f64 * frac) as usize;
            let spec = OrderStatSpec::new(n, big).unwrap();
            prop_assert_eq!(order_cdf(spec, 0.0).unwrap(), 0.0);
            prop_assert!((order_cdf(spec, 1.0).unwrap() - 1.0).abs() < 1e-14);
            let v = (u + du).min(1.0);
            prop_assert!(order_cdf(spec, v).unwrap() + 1e-15 >= order_cdf(spec, u).unwrap());
        }

        #[test]
        fn expected_log_increases_with_rank(big in 2usize..60, r_e in 0.5f64..100.0) {
            let mut prev = f64::NEG_INFINITY;
            for n in 1..=big {
                let v = expected_log_distance(OrderStatSpec::new(n, big).unwrap(), r_e).unwrap();
                prop_assert!(v > prev);
                prev = v;
            }
        }
    }
}
