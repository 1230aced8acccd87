//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpcn_noma::cli::RunContext;
use wpcn_noma::montecarlo::{estimate_log_order_distance, simulate};
use wpcn_noma::orderstats::{order_cdf, order_cdf_beta, order_pdf_uniform};
use wpcn_noma::{
    derive_constants, evaluate_scheme, group_minima, optimal_l, rate_asymptotic, rate_exact,
    rate_profile, InterferenceConvention, McOptions, NetworkConfig, OrderStatSpec, RateMethod,
    Scheme,
};

const ACCEPTANCE_TRIALS: u64 = 1_000_000;
const SEED: u64 = 0x5EED_2019;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn defaults() -> NetworkConfig {
    NetworkConfig::default()
}

/// `psi(n) = -gamma + sum_{k<n} 1/k`, summed smallest terms first.
fn digamma_oracle(n: usize) -> f64 {
    let gamma = 0.577_215_664_901_532_9_f64;
    (1..n).rev().map(|k| 1.0 / k as f64).sum::<f64>() - gamma
}

/// Gauss-Legendre nodes and weights on [-1, 1] via Newton iteration.
fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    (1..=m)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=m {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn c1_optimal_group_size() -> Outcome {
    let cfg = defaults();
    let dc = derive_constants(&cfg).unwrap();
    let report = optimal_l(&cfg, &dc, &RateMethod::Exact).unwrap();
    let ctx = RunContext::new(cfg.clone(), RateMethod::Exact, McOptions::default());
    let mut buf = Vec::new();
    wpcn_noma::cli::run_eval(&ctx, &[Scheme::FairnessAwareNoma], &mut buf).unwrap();
    let recorded = String::from_utf8(buf)
        .unwrap()
        .contains("# interference_convention: received-power-dbm");
    outcome(
        (7..=9).contains(&report.l_star)
            && recorded
            && cfg.interference_convention == InterferenceConvention::ReceivedPowerDbm,
        format!(
            "l* = {} (target 8 +/- 1), convention recorded: {recorded}",
            report.l_star
        ),
    )
}

fn c2_rate_spread() -> Outcome {
    let cfg = defaults();
    let dc = derive_constants(&cfg).unwrap();
    let ratio = rate_exact(1, 0, &cfg, &dc).unwrap() / rate_exact(20, 0, &cfg, &dc).unwrap();
    outcome(
        (8.0..=12.0).contains(&ratio),
        format!("rate(1,0)/rate(20,0) = {ratio:.3} (target [8, 12])"),
    )
}

fn c3_monotone_minima() -> Outcome {
    let cfg = defaults();
    let dc = derive_constants(&cfg).unwrap();
    let minima: Vec<_> = (0..=20)
        .map(|l| group_minima(l, &cfg, &dc).unwrap())
        .collect();
    let mut bad = Vec::new();
    for l in 1..20 {
        if minima[l + 1].0.unwrap() > minima[l].0.unwrap() {
            bad.push(format!("interfered rises {l}->{}", l + 1));
        }
    }
    for l in 0..19 {
        if minima[l + 1].1.unwrap() < minima[l].1.unwrap() {
            bad.push(format!("non-interfered falls {l}->{}", l + 1));
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            "all adjacent pairs monotone".into()
        } else {
            bad.join(", ")
        },
    )
}

fn c4_log_order_closed_form() -> Outcome {
    let cfg = defaults();
    let opts = McOptions::with_trials(ACCEPTANCE_TRIALS, SEED);
    let mut worst = 0.0f64;
    for n in [1, 5, 10, 15, 20] {
        let closed = cfg.wet_radius.ln() + digamma_oracle(n) - digamma_oracle(21);
        let est = estimate_log_order_distance(n, &cfg, &opts);
        worst = worst.max(((est.mean - closed) / est.stderr).abs());
    }
    outcome(
        worst <= 3.0,
        format!("max |z| = {worst:.2} over n in {{1,5,10,15,20}}"),
    )
}

fn c5_exact_vs_simulation() -> Outcome {
    let cfg = defaults();
    let dc = derive_constants(&cfg).unwrap();
    let opts = McOptions::with_trials(ACCEPTANCE_TRIALS, SEED);
    let mut worst = (0.0f64, 0, 0);
    for l in [0, 8, 20] {
        let sim = simulate(l, &cfg, &opts);
        for n in 1..=20 {
            let exact = rate_exact(n, l, &cfg, &dc).unwrap();
            let e = &sim.per_rank[n - 1];
            let z = ((e.mean - exact) / e.stderr).abs();
            if z > worst.0 {
                worst = (z, n, l);
            }
        }
    }
    outcome(
        worst.0 <= 3.0,
        format!(
            "max |z| = {:.2} at n = {}, l = {}",
            worst.0, worst.1, worst.2
        ),
    )
}

fn c6_asymptotic_regime() -> Outcome {
    let mut errors = Vec::new();
    for ratio in [2.5, 10.0, 50.0, 250.0] {
        let cfg = NetworkConfig {
            wet_radius: defaults().dist_ps_ap / ratio,
            ..defaults()
        };
        let dc = derive_constants(&cfg).unwrap();
        let mut worst = 0.0f64;
        for l in 0..=cfg.n_users {
            for n in 1..=cfg.n_users {
                let exact = rate_exact(n, l, &cfg, &dc).unwrap();
                if exact > 0.0 {
                    let approx = rate_asymptotic(n, l, &cfg, &dc).unwrap();
                    worst = worst.max((approx - exact).abs() / exact);
                }
            }
        }
        errors.push(worst);
    }
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    outcome(
        decreasing && errors[3] < 0.02,
        format!(
            "max rel. error at r_d/r_e = 2.5, 10, 50, 250: {:.3e}, {:.3e}, {:.3e}, {:.3e}",
            errors[0], errors[1], errors[2], errors[3]
        ),
    )
}

fn c7_tdma_degeneracy() -> Outcome {
    let cfg = defaults();
    let dc = derive_constants(&cfg).unwrap();
    let profile = rate_profile(0, &cfg, &dc, &RateMethod::Exact).unwrap();
    let tdma = evaluate_scheme(Scheme::Tdma, &cfg, &dc, &RateMethod::Exact, None).unwrap();
    let bit_exact = profile
        .rates
        .iter()
        .zip(&tdma.rates)
        .all(|(a, b)| a.to_bits() == b.to_bits());

    let cfg0 = NetworkConfig {
        tau0: Some(0.0),
        ..defaults()
    };
    let dc0 = derive_constants(&cfg0).unwrap();
    let tdma0 = evaluate_scheme(Scheme::Tdma, &cfg0, &dc0, &RateMethod::Exact, None).unwrap();
    let fa0 = evaluate_scheme(
        Scheme::FairnessAwareNoma,
        &cfg0,
        &dc0,
        &RateMethod::Exact,
        None,
    )
    .unwrap();
    outcome(
        bit_exact && tdma0.min_rate == 0.0 && fa0.min_rate > 0.0,
        format!(
            "bit-exact: {bit_exact}, tau0 = 0: tdma min = {}, fairness-aware min = {:.5}",
            tdma0.min_rate, fa0.min_rate
        ),
    )
}

fn random_config(rng: &mut ChaCha8Rng) -> NetworkConfig {
    let wet_radius = rng.random_range(2.0..40.0);
    NetworkConfig {
        n_users: rng.random_range(1..=30),
        wet_radius,
        dist_ps_ap: wet_radius * rng.random_range(2.0..8.0),
        ps_power: 10f64.powf(rng.random_range(-1.0..1.0)),
        noise_power_dbm: rng.random_range(-90.0..-60.0),
        interference_power_dbm: rng.random_range(-80.0..-50.0),
        path_loss_ref: rng.random_range(0.01..0.5),
        path_loss_exp: rng.random_range(2.1..4.0),
        energy_efficiency: rng.random_range(0.1..1.0),
        tau0: if rng.random_bool(0.5) {
            None
        } else {
            Some(rng.random_range(0.0..0.4))
        },
        ..defaults()
    }
}

fn c8_bisection_matches_scan() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut mismatches = Vec::new();
    for case in 0..200 {
        let cfg = random_config(&mut rng);
        let dc = derive_constants(&cfg).unwrap();
        let got = optimal_l(&cfg, &dc, &RateMethod::Exact).unwrap().l_star;
        let mut best = (0, f64::NEG_INFINITY);
        for l in 0..=cfg.n_users {
            let p = rate_profile(l, &cfg, &dc, &RateMethod::Exact).unwrap();
            let m = p.rates.iter().copied().fold(f64::INFINITY, f64::min);
            if m > best.1 {
                best = (l, m);
            }
        }
        if got != best.0 {
            mismatches.push(format!("case {case}: {got} vs {}", best.0));
        }
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            "200/200 configs agree".into()
        } else {
            mismatches.join(", ")
        },
    )
}

fn c9_order_statistics() -> Outcome {
    let r_e = 20.0;
    let nodes = gauss_legendre(40);
    let mut worst_norm = 0.0f64;
    let mut worst_cdf = 0.0f64;
    let grid: Vec<f64> = [1e-3, 0.01, 0.05]
        .into_iter()
        .chain((1..20).map(|i| i as f64 * 0.05))
        .chain([0.99, 0.999])
        .collect();
    for total in 1..=50 {
        for n in 1..=total {
            let spec = OrderStatSpec::new(n, total).unwrap();
            let mass: f64 = nodes
                .iter()
                .map(|&(x, w)| {
                    w * 0.5 * r_e * order_pdf_uniform(spec, 0.5 * r_e * (x + 1.0), r_e).unwrap()
                })
                .sum();
            worst_norm = worst_norm.max((mass - 1.0).abs());
            for &u in &grid {
                let d = (order_cdf(spec, u).unwrap() - order_cdf_beta(spec, u).unwrap()).abs();
                worst_cdf = worst_cdf.max(d);
            }
        }
    }
    outcome(
        worst_norm <= 1e-9 && worst_cdf <= 1e-12,
        format!("max |mass - 1| = {worst_norm:.2e}, max CDF gap = {worst_cdf:.2e} (N <= 50)"),
    )
}

fn c10_scheme_ordering() -> Outcome {
    let opts = McOptions::with_trials(ACCEPTANCE_TRIALS, SEED);
    let mut bad = Vec::new();
    let mut summary = Vec::new();
    for n_users in [5, 20, 50, 100] {
        let cfg = NetworkConfig {
            n_users,
            ..defaults()
        };
        let dc = derive_constants(&cfg).unwrap();
        let eval = |s| evaluate_scheme(s, &cfg, &dc, &RateMethod::Exact, Some(&opts)).unwrap();
        let fa = eval(Scheme::FairnessAwareNoma);
        let rg = eval(Scheme::RandomGroupingNoma);
        let td = eval(Scheme::Tdma);
        let j = |r: &wpcn_noma::FairnessReport| r.jain_index.unwrap_or(0.0);
        if !(fa.min_rate >= rg.min_rate && rg.min_rate >= td.min_rate) {
            bad.push(format!("N={n_users} min-rate order"));
        }
        if !(j(&fa) >= j(&rg) && j(&rg) >= j(&td)) {
            bad.push(format!("N={n_users} Jain order"));
        }
        if !(fa.sum_rate > td.sum_rate) {
            bad.push(format!(
                "N={n_users} fairness-aware sum {:.5} <= tdma {:.5}",
                fa.sum_rate, td.sum_rate
            ));
        }
        if !(rg.sum_rate > td.sum_rate) {
            bad.push(format!(
                "N={n_users} random-grouping sum {:.5} <= tdma {:.5}",
                rg.sum_rate, td.sum_rate
            ));
        }
        summary.push(format!(
            "N={n_users}: min {:.4}/{:.4}/{:.4}",
            fa.min_rate, rg.min_rate, td.min_rate
        ));
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            summary.join("; ")
        } else {
            bad.join("; ")
        },
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome, Duration);
    let criteria: [Criterion; 10] = [
        (
            "optimal group size",
            c1_optimal_group_size,
            Duration::from_secs(10),
        ),
        ("rate spread", c2_rate_spread, Duration::from_secs(5)),
        (
            "monotone group minima",
            c3_monotone_minima,
            Duration::from_secs(30),
        ),
        (
            "log order statistic closed form",
            c4_log_order_closed_form,
            Duration::from_secs(60),
        ),
        (
            "exact vs simulation",
            c5_exact_vs_simulation,
            Duration::from_secs(300),
        ),
        (
            "asymptotic regime convergence",
            c6_asymptotic_regime,
            Duration::from_secs(120),
        ),
        (
            "tdma degeneracy",
            c7_tdma_degeneracy,
            Duration::from_secs(10),
        ),
        (
            "bisection vs scan",
            c8_bisection_matches_scan,
            Duration::from_secs(300),
        ),
        (
            "order statistic normalization",
            c9_order_statistics,
            Duration::from_secs(30),
        ),
        (
            "scheme ordering over N",
            c10_scheme_ordering,
            Duration::from_secs(600),
        ),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= *budget;
        let passed = result.passed && in_budget;
        if !passed {
            failures += 1;
        }
        println!(
            "{} criterion {:2} ({name}): {} [{:.1} s, budget {} s{}]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_budget { "" } else { ", over budget" }
        );
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
