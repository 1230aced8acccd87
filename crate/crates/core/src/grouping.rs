//! Choosing the interference-group size for max-min fairness, and the
//! fairness metrics used to compare scheduling schemes.
//!
//! The worst interfered user is rank `l` and the worst non-interfered user is
//! rank `N`, so the max-min objective for group size `l` is
//! `min(r_(l)^l, r_(N)^l)`. In the high-SNR regime the first term falls and
//! the second rises with `l`, which lets [`optimal_l`] bisect on their
//! difference instead of scanning every `l`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use rand::seq::index::sample;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{DerivedConstants, NetworkConfig};
use crate::montecarlo::{self, McOptions};
use crate::quadrature::Tolerance;
use crate::rates::{
    asymptotic_for_multiplier, rate_asymptotic, rate_for_multiplier, rate_profile, sum_rate,
    RateError, RateMethod,
};

#[derive(Debug, Error)]
pub enum GroupingError {
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error("Jain's index is undefined when every rate is zero")]
    UndefinedIndex,
    #[error("random grouping needs Monte Carlo options")]
    MissingMcOptions,
    #[error("subset sampling reached relative stderr {achieved:e}, target {target:e}")]
    McBudgetExceeded { achieved: f64, target: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Interference group is the `l*` users with the smallest equivalent
    /// distance.
    FairnessAwareNoma,
    /// Interference group is a uniformly random subset of size `l`.
    RandomGroupingNoma,
    /// No concurrent charging (`l = 0`).
    Tdma,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [
        Scheme::FairnessAwareNoma,
        Scheme::RandomGroupingNoma,
        Scheme::Tdma,
    ];
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::FairnessAwareNoma => "fairness-aware-noma",
            Scheme::RandomGroupingNoma => "random-grouping-noma",
            Scheme::Tdma => "tdma",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FairnessReport {
    pub scheme: Scheme,
    pub l_star: usize,
    pub min_rate: f64,
    /// `None` when every rate is zero.
    pub jain_index: Option<f64>,
    pub sum_rate: f64,
    /// Per-rank rates behind the report (expected over subsets for random
    /// grouping).
    pub rates: Vec<f64>,
    /// Monte Carlo standard error of `min_rate`, when it is an estimate.
    pub min_rate_stderr: Option<f64>,
}

/// `(sum r)^2 / (N sum r^2)`.
pub fn jain_index(rates: &[f64]) -> Result<f64, GroupingError> {
    let sum: f64 = rates.iter().sum();
    let sq: f64 = rates.iter().map(|r| r * r).sum();
    if rates.is_empty() || sq == 0.0 {
        return Err(GroupingError::UndefinedIndex);
    }
    Ok((sum * sum / (rates.len() as f64 * sq)).min(1.0))
}

/// Memoized rank rates for one configuration and method.
struct RateTable<'a> {
    cfg: &'a NetworkConfig,
    dc: &'a DerivedConstants,
    method: &'a RateMethod,
    cache: RefCell<HashMap<(usize, usize), f64>>,
}

impl<'a> RateTable<'a> {
    fn new(cfg: &'a NetworkConfig, dc: &'a DerivedConstants, method: &'a RateMethod) -> Self {
        RateTable {
            cfg,
            dc,
            method,
            cache: RefCell::new(HashMap::new()),
        }
    }

    fn rate(&self, n: usize, l: usize) -> Result<f64, RateError> {
        if let Some(&r) = self.cache.borrow().get(&(n, l)) {
            return Ok(r);
        }
        let r = match self.method {
            RateMethod::Exact => crate::rates::rate_exact(n, l, self.cfg, self.dc)?,
            RateMethod::Asymptotic => rate_asymptotic(n, l, self.cfg, self.dc)?,
            RateMethod::MonteCarlo(opts) => {
                // one simulation yields every rank for this l
                let est = montecarlo::simulate_rates(l, self.cfg, opts);
                let mut cache = self.cache.borrow_mut();
                for (i, e) in est.iter().enumerate() {
                    cache.insert((i + 1, l), e.mean);
                }
                est[n - 1].mean
            }
        };
        self.cache.borrow_mut().insert((n, l), r);
        Ok(r)
    }

    fn minima(&self, l: usize) -> Result<(Option<f64>, Option<f64>), RateError> {
        let big = self.cfg.n_users;
        let interfered = if l >= 1 { Some(self.rate(l, l)?) } else { None };
        let rest = if l < big {
            Some(self.rate(big, l)?)
        } else {
            None
        };
        Ok((interfered, rest))
    }

    fn objective(&self, l: usize) -> Result<f64, RateError> {
        let (a, b) = self.minima(l)?;
        Ok(match (a, b) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => unreachable!("N >= 1"),
        })
    }

    /// `r_(l)^l - r_(N)^l` for `1 <= l < N`.
    fn gap(&self, l: usize) -> Result<f64, RateError> {
        Ok(self.rate(l, l)? - self.rate(self.cfg.n_users, l)?)
    }
}

/// Minimum rate of each group for size `l` with exact rates:
/// `(r_(l)^l, r_(N)^l)`, `None` for an empty group.
pub fn group_minima(
    l: usize,
    cfg: &NetworkConfig,
    dc: &DerivedConstants,
) -> Result<(Option<f64>, Option<f64>), RateError> {
    group_minima_with(l, cfg, dc, &RateMethod::Exact)
}

pub fn group_minima_with(
    l: usize,
    cfg: &NetworkConfig,
    dc: &DerivedConstants,
    method: &RateMethod,
) -> Result<(Option<f64>, Option<f64>), RateError> {
    if l > cfg.n_users {
        return Err(RateError::GroupSize {
            l,
            total: cfg.n_users,
        });
    }
    RateTable::new(cfg, dc, method).minima(l)
}

// Smallest maximizer of the objective among `candidates`.
fn best_of(table: &RateTable<'_>, candidates: &[usize]) -> Result<(usize, f64), RateError> {
    let mut best: Option<(usize, f64)> = None;
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for l in sorted {
        let v = table.objective(l)?;
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((l, v));
        }
    }
    Ok(best.expect("at least one candidate"))
}

/// Whether the high-SNR step `ln(1 + 1/(l-1+kappa)) - alpha/l` is negative for
/// every `l`, i.e. the worst interfered rate provably falls with `l`.
fn interfered_min_decreasing(cfg: &NetworkConfig, dc: &DerivedConstants) -> bool {
    (1..cfg.n_users).all(|l| {
        let base = l as f64 - 1.0 + dc.kappa;
        base > 0.0 && (1.0 / base).ln_1p() < cfg.path_loss_exp / l as f64
    })
}

/// Group size maximizing the minimum rate; ties go to the smaller `l`.
pub fn optimal_group_size(
    cfg: &NetworkConfig,
    dc: &DerivedConstants,
    method: &RateMethod,
) -> Result<usize, RateError> {
    let table = RateTable::new(cfg, dc, method);
    let big = cfg.n_users;
    let scan = |table: &RateTable<'_>| -> Result<usize, RateError> {
        Ok(best_of(table, &(0..=big).collect::<Vec<_>>())?.0)
    };

    if big == 1 || !interfered_min_decreasing(cfg, dc) {
        return scan(&table);
    }

    // bracket the sign change of r_(l)^l - r_(N)^l on 1..N-1
    let bracket = if table.gap(1)? <= 0.0 {
        [0, 1]
    } else if table.gap(big - 1)? > 0.0 {
        [big - 1, big]
    } else {
        let (mut lo, mut hi) = (1, big - 1);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if table.gap(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        [lo, hi]
    };
    let (best, value) = best_of(&table, &[0, bracket[0], bracket[1]])?;

    // outside the high-SNR regime the structure is not guaranteed
    for nb in [best.checked_sub(1), Some(best + 1)].into_iter().flatten() {
        if nb <= big {
            let v = table.objective(nb)?;
            if v > value || (v == value && nb < best) {
                return scan(&table);
            }
        }
    }
    Ok(best)
}

fn report_from_rates(scheme: Scheme, l_star: usize, rates: Vec<f64>) -> FairnessReport {
    let min_rate = rates.iter().copied().fold(f64::INFINITY, f64::min);
    FairnessReport {
        scheme,
        l_star,
        min_rate,
        jain_index: jain_index(&rates).ok(),
        sum_rate: rates.iter().sum(),
        rates,
        min_rate_stderr: None,
    }
}

/// Max-min fair group size together with the fairness metrics at that size.
pub fn optimal_l(
    cfg: &NetworkConfig,
    dc: &DerivedConstants,
    method: &RateMethod,
) -> Result<FairnessReport, RateError> {
    let l_star = optimal_group_size(cfg, dc, method)?;
    let profile = rate_profile(l_star, cfg, dc, method)?;
    let mut report = report_from_rates(Scheme::FairnessAwareNoma, l_star, profile.rates.clone());
    report.sum_rate = sum_rate(&profile);
    Ok(report)
}

/// Evaluate one scheduling scheme. Random grouping draws `mc_opts.trials`
/// interference subsets per candidate `l` and keeps the `l` with the largest
/// expected minimum rate.
pub fn evaluate_scheme(
    scheme: Scheme,
    cfg: &NetworkConfig,
    dc: &DerivedConstants,
    method: &RateMethod,
    mc_opts: Option<&McOptions>,
) -> Result<FairnessReport, GroupingError> {
    match scheme {
        Scheme::Tdma => {
            let profile = rate_profile(0, cfg, dc, method)?;
            Ok(report_from_rates(Scheme::Tdma, 0, profile.rates))
        }
        Scheme::FairnessAwareNoma => Ok(optimal_l(cfg, dc, method)?),
        Scheme::RandomGroupingNoma => {
            let opts = mc_opts.ok_or(GroupingError::MissingMcOptions)?;
            random_grouping(cfg, dc, method, opts)
        }
    }
}

/// Evaluate one scheme at a fixed group size `l`. TDMA ignores `l`.
pub fn evaluate_scheme_at(
    scheme: Scheme,
    l: usize,
    cfg: &NetworkConfig,
    dc: &DerivedConstants,
    method: &RateMethod,
    mc_opts: &McOptions,
) -> Result<FairnessReport, GroupingError> {
    if l > cfg.n_users {
        return Err(RateError::GroupSize {
            l,
            total: cfg.n_users,
        }
        .into());
    }
    match scheme {
        Scheme::Tdma => evaluate_scheme(scheme, cfg, dc, method, None),
        Scheme::FairnessAwareNoma => {
            let profile = rate_profile(l, cfg, dc, method)?;
            let mut report = report_from_rates(scheme, l, profile.rates.clone());
            report.sum_rate = sum_rate(&profile);
            Ok(report)
        }
        Scheme::RandomGroupingNoma => {
            let p = random_grouping_point(l, cfg, dc, method, mc_opts)?;
            Ok(FairnessReport {
                scheme,
                l_star: p.l,
                min_rate: p.min_rate,
                jain_index: p.jain,
                sum_rate: p.sum_rate,
                rates: p.rates,
                min_rate_stderr: Some(p.min_stderr),
            })
        }
    }
}

/// Per-rank rates inside and outside an interference group of size `l`.
fn split_rates(
    l: usize,
    cfg: &NetworkConfig,
    dc: &DerivedConstants,
    method: &RateMethod,
) -> Result<(Vec<f64>, Vec<f64>), RateError> {
    let big = cfg.n_users;
    let inside_mult = (l as f64 - 1.0 + dc.kappa) / dc.b;
    let outside_mult = l as f64 + dc.kappa;
    match method {
        RateMethod::Exact => {
            let tol = Tolerance::default();
            let one = |n: usize, m: f64| {
                rate_for_multiplier(n, m, cfg, dc, &tol)
                    .map(|r| r.value)
                    .map_err(|source| RateError::Quadrature { n, l, source })
            };
            let inside = if l >= 1 {
                (1..=big)
                    .map(|n| one(n, inside_mult))
                    .collect::<Result<_, _>>()?
            } else {
                vec![0.0; big]
            };
            let outside = if l < big {
                (1..=big)
                    .map(|n| one(n, outside_mult))
                    .collect::<Result<_, _>>()?
            } else {
                vec![0.0; big]
            };
            Ok((inside, outside))
        }
        RateMethod::Asymptotic => {
            let one = |n: usize, m: f64| asymptotic_for_multiplier(n, m, cfg, dc).value;
            let inside = (1..=big)
                .map(|n| if l >= 1 { one(n, inside_mult) } else { 0.0 })
                .collect();
            let outside = (1..=big)
                .map(|n| if l < big { one(n, outside_mult) } else { 0.0 })
                .collect();
            Ok((inside, outside))
        }
        RateMethod::MonteCarlo(opts) => {
            let (inside, outside) = montecarlo::simulate_group_rates(l, cfg, opts);
            Ok((
                inside.iter().map(|e| e.mean).collect(),
                outside.iter().map(|e| e.mean).collect(),
            ))
        }
    }
}

struct RandomGroupingPoint {
    l: usize,
    min_rate: f64,
    min_stderr: f64,
    jain: Option<f64>,
    sum_rate: f64,
    rates: Vec<f64>,
}

fn random_grouping_point(
    l: usize,
    cfg: &NetworkConfig,
    dc: &DerivedConstants,
    method: &RateMethod,
    opts: &McOptions,
) -> Result<RandomGroupingPoint, RateError> {
    let big = cfg.n_users;
    let (inside, outside) = split_rates(l, cfg, dc, method)?;
    let all_zero = (l == 0 && outside.iter().all(|&r| r == 0.0))
        || (l == big && inside.iter().all(|&r| r == 0.0));
    let opts_l = McOptions {
        seed: opts.seed ^ (l as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        ..*opts
    };
    let est = montecarlo::estimate_many(&opts_l, 3 + big, |rng, out| {
        let (stats, per_rank) = out.split_at_mut(3);
        per_rank.copy_from_slice(&outside);
        for i in sample(rng, big, l).iter() {
            per_rank[i] = inside[i];
        }
        stats[0] = per_rank.iter().copied().fold(f64::INFINITY, f64::min);
        stats[1] = jain_index(per_rank).unwrap_or(0.0);
        stats[2] = per_rank.iter().sum();
    });
    Ok(RandomGroupingPoint {
        l,
        min_rate: est[0].mean,
        min_stderr: est[0].stderr,
        jain: if all_zero { None } else { Some(est[1].mean) },
        sum_rate: est[2].mean,
        rates: est[3..].iter().map(|e| e.mean).collect(),
    })
}

fn random_grouping(
    cfg: &NetworkConfig,
    dc: &DerivedConstants,
    method: &RateMethod,
    opts: &McOptions,
) -> Result<FairnessReport, GroupingError> {
    let points: Vec<RandomGroupingPoint> = (0..=cfg.n_users)
        .into_par_iter()
        .map(|l| random_grouping_point(l, cfg, dc, method, opts))
        .collect::<Result<_, _>>()?;
    let mut best = &points[0];
    for p in &points[1..] {
        if p.min_rate > best.min_rate {
            best = p;
        }
    }
    if let Some(target) = opts.target_stderr {
        let achieved = if best.min_rate > 0.0 {
            best.min_stderr / best.min_rate
        } else {
            0.0
        };
        if achieved > target {
            return Err(GroupingError::McBudgetExceeded { achieved, target });
        }
    }
    Ok(FairnessReport {
        scheme: Scheme::RandomGroupingNoma,
        l_star: best.l,
        min_rate: best.min_rate,
        jain_index: best.jain,
        sum_rate: best.sum_rate,
        rates: best.rates.clone(),
        min_rate_stderr: Some(best.min_stderr),
    })
}
