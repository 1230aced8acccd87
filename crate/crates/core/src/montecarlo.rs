//! Brute-force simulation of the energy-harvesting / uplink pipeline.
//!
//! Each trial draws a fresh placement, ranks the users by equivalent
//! distance `R (r_d - R)`, works out harvested energy, transmit power, SINR
//! and rate from first principles, and records the per-rank rates. Nothing
//! here uses the closed forms from [`crate::rates`], so it serves as their
//! oracle.
//!
//! Trials are split into fixed-size chunks. Chunk `k` draws from the ChaCha8
//! stream `k` of the configured seed, and chunk statistics are merged in chunk
//! order, so results are bit-identical for any number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::NetworkConfig;

/// Name of the generator and substream layout, recorded in output metadata.
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed), stream = chunk index, 4096 trials per chunk";

const CHUNK: u64 = 4096;
// Chunks evaluated between adaptive-stopping checks.
const CHUNKS_PER_ROUND: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    /// Trial budget (exact trial count when `target_stderr` is `None`).
    pub trials: u64,
    pub seed: u64,
    /// Stop early once every estimate's stderr / |mean| falls below this.
    pub target_stderr: Option<f64>,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            trials: 100_000,
            seed: 0x5EED_2019,
            target_stderr: None,
        }
    }
}

impl McOptions {
    pub fn with_trials(trials: u64, seed: u64) -> Self {
        McOptions {
            trials,
            seed,
            target_stderr: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    pub trials_used: u64,
}

impl McEstimate {
    pub fn relative_stderr(&self) -> f64 {
        if self.mean == 0.0 {
            if self.stderr == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.stderr / self.mean.abs()
        }
    }
}

#[derive(Debug, Clone)]
struct Moments {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(width: usize) -> Self {
        Moments {
            count: 0,
            mean: vec![0.0; width],
            m2: vec![0.0; width],
        }
    }

    fn push(&mut self, xs: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((mean, m2), &x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(xs) {
            let delta = x - *mean;
            *mean += delta / n;
            *m2 += delta * (x - *mean);
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let total = na + nb;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * nb / total;
            self.m2[i] += other.m2[i] + delta * delta * na * nb / total;
        }
        self.count += other.count;
    }

    fn estimates(&self) -> Vec<McEstimate> {
        let n = self.count as f64;
        self.mean
            .iter()
            .zip(&self.m2)
            .map(|(&mean, &m2)| {
                let stderr = if self.count > 1 {
                    (m2 / (n - 1.0) / n).sqrt()
                } else {
                    0.0
                };
                McEstimate {
                    mean,
                    stderr,
                    trials_used: self.count,
                }
            })
            .collect()
    }
}

/// Estimate the means of `width` jointly simulated quantities. `trial` fills
/// one sample of all of them per call.
pub fn estimate_many<F>(opts: &McOptions, width: usize, trial: F) -> Vec<McEstimate>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let trials = opts.trials.max(1);
    let n_chunks = trials.div_ceil(CHUNK);
    let round = if opts.target_stderr.is_some() {
        CHUNKS_PER_ROUND
    } else {
        n_chunks
    };

    let run_chunk = |k: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(k);
        let len = CHUNK.min(trials - k * CHUNK);
        let mut acc = Moments::new(width);
        let mut buf = vec![0.0; width];
        for _ in 0..len {
            trial(&mut rng, &mut buf);
            acc.push(&buf);
        }
        acc
    };

    let mut total = Moments::new(width);
    let mut next = 0;
    while next < n_chunks {
        let end = (next + round).min(n_chunks);
        let parts: Vec<Moments> = (next..end).into_par_iter().map(run_chunk).collect();
        for p in &parts {
            total.merge(p);
        }
        next = end;
        if let Some(target) = opts.target_stderr {
            if total
                .estimates()
                .iter()
                .all(|e| e.relative_stderr() <= target)
            {
                break;
            }
        }
    }
    total.estimates()
}

/// Estimate a single scalar mean.
pub fn estimate<F>(opts: &McOptions, trial: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    estimate_many(opts, 1, |rng, out| out[0] = trial(rng))[0]
}

/// `N` i.i.d. distances to the power station, uniform on `(0, r_e]`.
pub fn sample_placement<R: Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R) -> Vec<f64> {
    (0..cfg.n_users)
        .map(|_| cfg.wet_radius * (1.0 - rng.random::<f64>()))
        .collect()
}

/// Everything computed for one block, indexed by rank (ascending
/// equivalent distance).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOutcome {
    pub distance: Vec<f64>,
    pub equivalent_distance: Vec<f64>,
    pub interfered: Vec<bool>,
    pub harvested_energy: Vec<f64>,
    pub transmit_power: Vec<f64>,
    pub sinr: Vec<f64>,
    /// Bits per block: `tau_n log2(1 + sinr)`.
    pub rate: Vec<f64>,
}

/// Sort a placement by equivalent distance and run one block with the
/// first `l` ranks in the interference group.
pub fn simulate_block(placement: &[f64], l: usize, cfg: &NetworkConfig) -> BlockOutcome {
    let rd = cfg.dist_ps_ap;
    let mut ranked: Vec<(f64, f64)> = placement.iter().map(|&r| (r * (rd - r), r)).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let distance: Vec<f64> = ranked.iter().map(|p| p.1).collect();
    let mask: Vec<bool> = (0..distance.len()).map(|i| i < l).collect();
    let mut out = block_with_mask(&distance, &mask, cfg);
    out.equivalent_distance = ranked.iter().map(|p| p.0).collect();
    out
}

/// One block for users at `distance` (already in rank order) with an
/// arbitrary interference-group membership.
pub fn block_with_mask(distance: &[f64], interfered: &[bool], cfg: &NetworkConfig) -> BlockOutcome {
    let n = distance.len();
    let tau0 = cfg.tau0();
    let slot = (1.0 - tau0) / n as f64;
    let alpha = cfg.path_loss_exp;
    let rd = cfg.dist_ps_ap;
    let pl = cfg.path_loss_ref * cfg.ref_distance.powf(alpha);
    let eta = cfg.energy_efficiency;
    let noise = cfg.noise_power_w();
    let interference = cfg.interference_power_w();
    let l = interfered.iter().filter(|&&b| b).count();

    // Energy harvested from the power station: dedicated slot plus every
    // interference-group slot except the user's own.
    let ps_energy: Vec<f64> = distance
        .iter()
        .zip(interfered)
        .map(|(&r, &own)| {
            let others = if own { l - 1 } else { l };
            let charge_time = tau0 + others as f64 * slot;
            charge_time * eta * cfg.ps_power * pl * cfg.fading_gain_wet / r.powf(alpha)
        })
        .collect();

    let harvested_energy = match cfg.inter_user_gain {
        None => ps_energy,
        Some(g) => {
            // During slot i (interfered) user n != i also picks up eta g P_i tau_i
            // = eta g e_i. Solve the resulting linear system in closed form.
            let c = eta * g;
            let p0: f64 = ps_energy
                .iter()
                .zip(interfered)
                .filter(|(_, &own)| own)
                .map(|(e, _)| e)
                .sum();
            let total = p0 / (1.0 + c * (1.0 - l as f64));
            ps_energy
                .iter()
                .zip(interfered)
                .map(|(&p, &own)| {
                    if own {
                        (p + c * total) / (1.0 + c)
                    } else {
                        p + c * total
                    }
                })
                .collect()
        }
    };

    let transmit_power: Vec<f64> = harvested_energy.iter().map(|e| e / slot).collect();
    let sinr: Vec<f64> = distance
        .iter()
        .zip(interfered)
        .zip(&transmit_power)
        .map(|((&r, &own), &p)| {
            let rx = p * pl * cfg.fading_gain_wit / (rd - r).powf(alpha);
            let floor = if own { interference + noise } else { noise };
            rx / floor
        })
        .collect();
    let rate = sinr
        .iter()
        .map(|g| slot * g.ln_1p() / std::f64::consts::LN_2)
        .collect();

    BlockOutcome {
        distance: distance.to_vec(),
        equivalent_distance: distance.iter().map(|&r| r * (rd - r)).collect(),
        interfered: interfered.to_vec(),
        harvested_energy,
        transmit_power,
        sinr,
        rate,
    }
}

/// Per-rank rates and the sum rate for interference-group size `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct McRates {
    pub per_rank: Vec<McEstimate>,
    pub sum_rate: McEstimate,
}

pub fn simulate(l: usize, cfg: &NetworkConfig, opts: &McOptions) -> McRates {
    let n = cfg.n_users;
    let mut all = estimate_many(opts, n + 1, |rng, out| {
        let placement = sample_placement(cfg, rng);
        let block = simulate_block(&placement, l, cfg);
        out[..n].copy_from_slice(&block.rate);
        out[n] = block.rate.iter().sum();
    });
    let sum_rate = all.pop().expect("width n + 1");
    McRates {
        per_rank: all,
        sum_rate,
    }
}

/// Per-rank expected rates for group size `l`.
pub fn simulate_rates(l: usize, cfg: &NetworkConfig, opts: &McOptions) -> Vec<McEstimate> {
    simulate(l, cfg, opts).per_rank
}

/// For every rank, the expected rate it would get inside and outside an
/// interference group of size `l`. Energy comes from the power station only
/// (the inter-user term has no per-rank decomposition).
pub fn simulate_group_rates(
    l: usize,
    cfg: &NetworkConfig,
    opts: &McOptions,
) -> (Vec<McEstimate>, Vec<McEstimate>) {
    let n = cfg.n_users;
    let cfg = NetworkConfig {
        inter_user_gain: None,
        ..cfg.clone()
    };
    let rd = cfg.dist_ps_ap;
    let mut all = estimate_many(opts, 2 * n, |rng, out| {
        let mut placement = sample_placement(&cfg, rng);
        placement.sort_by(|a, b| (a * (rd - a)).total_cmp(&(b * (rd - b))));
        for (i, &r) in placement.iter().enumerate() {
            // A lone user stands in for rank i with l - 1 / l other slots charging it.
            let as_member = block_with_slots(r, n, l.saturating_sub(1), true, &cfg);
            let as_outsider = block_with_slots(r, n, l, false, &cfg);
            out[i] = if l >= 1 { as_member } else { 0.0 };
            out[n + i] = if l < n { as_outsider } else { 0.0 };
        }
    });
    let outside = all.split_off(n);
    (all, outside)
}

fn block_with_slots(
    r: f64,
    n: usize,
    charging_slots: usize,
    interfered: bool,
    cfg: &NetworkConfig,
) -> f64 {
    let tau0 = cfg.tau0();
    let slot = (1.0 - tau0) / n as f64;
    let alpha = cfg.path_loss_exp;
    let pl = cfg.path_loss_ref * cfg.ref_distance.powf(alpha);
    let energy = (tau0 + charging_slots as f64 * slot)
        * cfg.energy_efficiency
        * cfg.ps_power
        * pl
        * cfg.fading_gain_wet
        / r.powf(alpha);
    let power = energy / slot;
    let rx = power * pl * cfg.fading_gain_wit / (cfg.dist_ps_ap - r).powf(alpha);
    let floor = if interfered {
        cfg.interference_power_w() + cfg.noise_power_w()
    } else {
        cfg.noise_power_w()
    };
    slot * (rx / floor).ln_1p() / std::f64::consts::LN_2
}

/// Sample mean of `ln R_(n)`, the log of the `n`-th smallest distance to the
/// power station.
pub fn estimate_log_order_distance(n: usize, cfg: &NetworkConfig, opts: &McOptions) -> McEstimate {
    assert!(
        n >= 1 && n <= cfg.n_users,
        "rank {n} outside 1..={}",
        cfg.n_users
    );
    estimate(opts, |rng| {
        let mut placement = sample_placement(cfg, rng);
        placement.sort_by(f64::total_cmp);
        placement[n - 1].ln()
    })
}
