//! Achievable rate of each ordered user.
//!
//! Ranks are by ascending equivalent distance; ranks `1..=l` form the
//! interference group. Two evaluators are provided: the exact beta-weighted
//! integral over the rank's distance distribution, and the high-SNR,
//! far-access-point closed form built on the digamma function.

use std::f64::consts::LN_2;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, DerivedConstants, NetworkConfig};
use crate::montecarlo::{self, McOptions};
use crate::orderstats::{digamma_int, OrderStatSpec};
use crate::quadrature::{integrate_with_breakpoints, QuadError, Tolerance};

#[derive(Debug, Error)]
pub enum RateError {
    #[error("rank {n} outside 1..={total}")]
    Rank { n: usize, total: usize },
    #[error("group size {l} outside 0..={total}")]
    GroupSize { l: usize, total: usize },
    #[error("rate integral for rank {n}, l = {l}: {source}")]
    Quadrature {
        n: usize,
        l: usize,
        #[source]
        source: QuadError,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    Interference,
    NonInterference,
}

impl Group {
    pub fn of(n: usize, l: usize) -> Group {
        if n <= l {
            Group::Interference
        } else {
            Group::NonInterference
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodKind {
    Exact,
    Asymptotic,
    MonteCarlo,
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodKind::Exact => "exact",
            MethodKind::Asymptotic => "asymptotic",
            MethodKind::MonteCarlo => "mc",
        })
    }
}

/// How per-rank rates are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateMethod {
    Exact,
    Asymptotic,
    MonteCarlo(McOptions),
}

impl RateMethod {
    pub fn kind(&self) -> MethodKind {
        match self {
            RateMethod::Exact => MethodKind::Exact,
            RateMethod::Asymptotic => MethodKind::Asymptotic,
            RateMethod::MonteCarlo(_) => MethodKind::MonteCarlo,
        }
    }
}

/// Why a rank's rate was pinned to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateNote {
    /// The transmit-energy multiplier is zero (no dedicated charging time and
    /// no other charging slot), so the user cannot transmit.
    ZeroEnergy { rank: usize },
    /// The high-SNR closed form went negative and was clamped to zero.
    ClampedAsymptotic { rank: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateProfile {
    pub l: usize,
    /// Bits per block, index `n - 1` for rank `n`.
    pub rates: Vec<f64>,
    pub group_of: Vec<Group>,
    pub method: MethodKind,
    /// Quadrature error estimates (exact) or standard errors (Monte Carlo).
    pub uncertainty: Option<Vec<f64>>,
    pub notes: Vec<RateNote>,
}

impl RateProfile {
    pub fn n_users(&self) -> usize {
        self.rates.len()
    }

    /// Rate of rank `n` (1-based).
    pub fn rate(&self, n: usize) -> f64 {
        self.rates[n - 1]
    }

    pub fn min_rate(&self) -> f64 {
        self.rates.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Energy multiplier in front of `a / X^alpha`: `(l - 1 + kappa) / b` inside
/// the interference group, `l + kappa` outside.
pub fn snr_multiplier(n: usize, l: usize, dc: &DerivedConstants) -> f64 {
    match Group::of(n, l) {
        Group::Interference => (l as f64 - 1.0 + dc.kappa) / dc.b,
        Group::NonInterference => l as f64 + dc.kappa,
    }
}

fn check_indices(n: usize, l: usize, total: usize) -> Result<(), RateError> {
    if n < 1 || n > total {
        return Err(RateError::Rank { n, total });
    }
    if l > total {
        return Err(RateError::GroupSize { l, total });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub value: f64,
    pub abs_error: f64,
    /// Set when the energy multiplier is zero and the rate is 0 by definition.
    pub zero_energy: bool,
}

// ln(1 + e^t) without overflow
fn softplus(t: f64) -> f64 {
    if t > 36.0 {
        t + (-t).exp()
    } else if t < -36.0 {
        t.exp()
    } else {
        t.exp().ln_1p()
    }
}

/// Expected rate of rank `n` when its received SNR is
/// `multiplier * a / X_(n)^alpha`, by adaptive quadrature over the rank's
/// normalized distance `x = R / r_e`.
pub fn rate_for_multiplier(
    n: usize,
    multiplier: f64,
    cfg: &NetworkConfig,
    dc: &DerivedConstants,
    tol: &Tolerance,
) -> Result<RateEstimate, QuadError> {
    let total = cfg.n_users;
    let scale = (1.0 - dc.tau0) / total as f64;
    if multiplier <= 0.0 {
        return Ok(RateEstimate {
            value: 0.0,
            abs_error: 0.0,
            zero_energy: true,
        });
    }
    let spec = OrderStatSpec::new(n, total).expect("rank checked by caller");
    let alpha = cfg.path_loss_exp;
    let ratio = cfg.dist_ps_ap / cfg.wet_radius;
    // ln of the SNR numerator c = multiplier * a * r_e^(-2 alpha)
    let ln_c = (multiplier * dc.a).ln() - 2.0 * alpha * cfg.wet_radius.ln();
    let integrand = |x: f64| {
        let t = ln_c - alpha * (x * (ratio - x)).ln();
        spec.unit_density(x) * softplus(t) / LN_2
    };

    const EDGE: f64 = 1e-6;
    let mut points = vec![0.0, EDGE];
    if total > 1 {
        let mode = (n - 1) as f64 / (total - 1) as f64;
        if mode > 2.0 * EDGE && mode < 1.0 - 2.0 * EDGE {
            points.push(mode);
        }
    }
    points.extend([1.0 - EDGE, 1.0]);

    let q = integrate_with_breakpoints(integrand, &points, tol)?;
    Ok(RateEstimate {
        value: scale * q.value,
        abs_error: scale * q.abs_error,
        zero_energy: false,
    })
}

/// Exact rate of rank `n` with quadrature error estimate.
pub fn rate_exact_detailed(
    n: usize,
    l: usize,
    cfg: &NetworkConfig,
    dc: &DerivedConstants,
) -> Result<RateEstimate, RateError> {
    check_indices(n, l, cfg.n_users)?;
    rate_for_multiplier(n, snr_multiplier(n, l, dc), cfg, dc, &Tolerance::default())
        .map_err(|source| RateError::Quadrature { n, l, source })
}

/// Exact expected rate (bits per block) of rank `n` for group size `l`.
pub fn rate_exact(
    n: usize,
    l: usize,
    cfg: &NetworkConfig,
    dc: &DerivedConstants,
) -> Result<f64, RateError> {
    rate_exact_detailed(n, l, cfg, dc).map(|r| r.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticRate {
    pub value: f64,
    /// Closed form was negative (SNR too low for the approximation).
    pub clamped: bool,
    pub zero_energy: bool,
}

/// Closed-form rate for `r_d >> 2 r_e` and high SNR, without clamping.
fn asymptotic_raw(n: usize, multiplier: f64, cfg: &NetworkConfig, dc: &DerivedConstants) -> f64 {
    let total = cfg.n_users;
    let alpha = cfg.path_loss_exp;
    let psi_n = digamma_int(n as u64).expect("n >= 1");
    let psi_big = digamma_int(total as u64 + 1).expect("N >= 1");
    let distance_term = (cfg.wet_radius * cfg.dist_ps_ap).ln() + psi_n - psi_big;
    (1.0 - dc.tau0) / (total as f64 * LN_2) * ((dc.a * multiplier).ln() - alpha * distance_term)
}

/// Closed form for an arbitrary energy multiplier, clamped at zero.
pub fn asymptotic_for_multiplier(
    n: usize,
    multiplier: f64,
    cfg: &NetworkConfig,
    dc: &DerivedConstants,
) -> AsymptoticRate {
    if multiplier <= 0.0 {
        return AsymptoticRate {
            value: 0.0,
            clamped: false,
            zero_energy: true,
        };
    }
    let raw = asymptotic_raw(n, multiplier, cfg, dc);
    AsymptoticRate {
        value: raw.max(0.0),
        clamped: raw < 0.0,
        zero_energy: false,
    }
}

pub fn rate_asymptotic_detailed(
    n: usize,
    l: usize,
    cfg: &NetworkConfig,
    dc: &DerivedConstants,
) -> Result<AsymptoticRate, RateError> {
    check_indices(n, l, cfg.n_users)?;
    Ok(asymptotic_for_multiplier(
        n,
        snr_multiplier(n, l, dc),
        cfg,
        dc,
    ))
}

/// High-SNR closed-form rate of rank `n`, clamped below at zero.
pub fn rate_asymptotic(
    n: usize,
    l: usize,
    cfg: &NetworkConfig,
    dc: &DerivedConstants,
) -> Result<f64, RateError> {
    rate_asymptotic_detailed(n, l, cfg, dc).map(|r| r.value)
}

/// Rates of all ranks for group size `l`.
pub fn rate_profile(
    l: usize,
    cfg: &NetworkConfig,
    dc: &DerivedConstants,
    method: &RateMethod,
) -> Result<RateProfile, RateError> {
    let total = cfg.n_users;
    if l > total {
        return Err(RateError::GroupSize { l, total });
    }
    let group_of = (1..=total).map(|n| Group::of(n, l)).collect();
    let mut notes = Vec::new();

    let (rates, uncertainty) = match method {
        RateMethod::Exact => {
            let per_rank: Vec<RateEstimate> = (1..=total)
                .into_par_iter()
                .map(|n| rate_exact_detailed(n, l, cfg, dc))
                .collect::<Result<_, _>>()?;
            for (i, r) in per_rank.iter().enumerate() {
                if r.zero_energy {
                    notes.push(RateNote::ZeroEnergy { rank: i + 1 });
                }
            }
            (
                per_rank.iter().map(|r| r.value).collect(),
                Some(per_rank.iter().map(|r| r.abs_error).collect()),
            )
        }
        RateMethod::Asymptotic => {
            let mut rates = Vec::with_capacity(total);
            for n in 1..=total {
                let r = rate_asymptotic_detailed(n, l, cfg, dc)?;
                if r.zero_energy {
                    notes.push(RateNote::ZeroEnergy { rank: n });
                }
                if r.clamped {
                    notes.push(RateNote::ClampedAsymptotic { rank: n });
                }
                rates.push(r.value);
            }
            (rates, None)
        }
        RateMethod::MonteCarlo(opts) => {
            let est = montecarlo::simulate_rates(l, cfg, opts);
            (
                est.iter().map(|e| e.mean).collect(),
                Some(est.iter().map(|e| e.stderr).collect()),
            )
        }
    };

    Ok(RateProfile {
        l,
        rates,
        group_of,
        method: method.kind(),
        uncertainty,
        notes,
    })
}

/// Sum of all per-rank rates.
pub fn sum_rate(profile: &RateProfile) -> f64 {
    profile.rates.iter().sum()
}
