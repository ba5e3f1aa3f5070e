//! Monte Carlo outage estimation over an SNR grid.
//!
//! Trial `t` at grid index `k` draws its channel from
//! [`StreamRng::for_trial`]`(seed, k, t)`, and failures are merged as integer
//! counts over fixed-size chunks, so results do not depend on the number of
//! worker threads.

use rayon::prelude::*;

use crate::allocation::policy_one_coefficients;
use crate::analytics::{
    gamma_ratio, user1_outage_policy1, user1_outage_policy2, user2_outage_policy1_exact,
    user2_outage_policy2_bounds,
};
use crate::benchmarks::oma_threshold;
use crate::channel::{build_effective_channel, sample_channel, ChannelPair, StreamRng};
use crate::config::{Detector, Policy, Scheme, SystemConfig};
use crate::error::{Error, Result};
use crate::link::{realize_outcome, DecodeOutcome};
use crate::scalar::Real;

/// Trials per work unit. Fixed so that chunk boundaries never move.
pub const CHUNK_TRIALS: u64 = 4096;
/// Singular draws tolerated within a single trial before giving up.
const MAX_DRAWS_PER_TRIAL: u64 = 64;

/// Empirical outage probability with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub failures: u64,
    pub trials: u64,
    pub p_hat: f64,
    /// `sqrt(p_hat (1 - p_hat) / trials)`
    pub std_err: f64,
}

impl OutageEstimate {
    pub fn from_counts(failures: u64, trials: u64) -> Self {
        let p_hat = if trials == 0 {
            0.0
        } else {
            failures as f64 / trials as f64
        };
        let std_err = if trials == 0 {
            0.0
        } else {
            (p_hat * (1.0 - p_hat) / trials as f64).sqrt()
        };
        Self {
            failures,
            trials,
            p_hat,
            std_err,
        }
    }

    /// Standard deviation used when comparing against a reference value:
    /// the larger of the empirical one and the one implied by the reference.
    ///
    /// The second term keeps a zero-count estimate of a tiny probability
    /// from being declared inconsistent with it.
    pub fn sigma_against(&self, reference: f64) -> f64 {
        let p = reference.clamp(0.0, 1.0);
        let implied = (p * (1.0 - p) / self.trials as f64).sqrt();
        self.std_err.max(implied)
    }

    /// `|p_hat - reference| / sigma`, infinite when sigma is zero and they differ.
    pub fn deviation_in_sigmas(&self, reference: f64) -> f64 {
        let diff = (self.p_hat - reference).abs();
        if diff == 0.0 {
            return 0.0;
        }
        let s = self.sigma_against(reference);
        if s > 0.0 {
            diff / s
        } else {
            f64::INFINITY
        }
    }

    pub fn within_sigmas(&self, reference: f64, k: f64) -> bool {
        self.deviation_in_sigmas(reference) <= k
    }
}

/// Simulated outage at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEstimate {
    pub rho_db: f64,
    /// Per layer; `None` when the scheme does not serve user 1.
    pub user1: Option<Vec<OutageEstimate>>,
    pub user2: Vec<OutageEstimate>,
    /// Rank-deficient draws that were discarded and redrawn.
    pub resampled_singular: u64,
}

#[derive(Debug, Clone, Default)]
struct Counts {
    user1: Option<Vec<u64>>,
    user2: Vec<u64>,
    resampled: u64,
}

impl Counts {
    fn new(n: usize, user1: bool) -> Self {
        Self {
            user1: user1.then(|| vec![0; n]),
            user2: vec![0; n],
            resampled: 0,
        }
    }

    fn record(&mut self, outcome: &DecodeOutcome) {
        if let (Some(acc), Some(ok)) = (self.user1.as_mut(), outcome.user1_ok.as_ref()) {
            for (a, &o) in acc.iter_mut().zip(ok) {
                *a += u64::from(!o);
            }
        }
        for (a, &o) in self.user2.iter_mut().zip(&outcome.user2_ok) {
            *a += u64::from(!o);
        }
    }

    fn merge(mut self, other: Counts) -> Counts {
        if let (Some(a), Some(b)) = (self.user1.as_mut(), other.user1.as_ref()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (x, y) in self.user2.iter_mut().zip(&other.user2) {
            *x += y;
        }
        self.resampled += other.resampled;
        self
    }
}

fn is_degenerate(err: &Error) -> bool {
    matches!(err, Error::Singular { .. } | Error::NotHermitian { .. })
}

/// Draws a channel from `rng` and applies `f`, redrawing from the same stream
/// while the realization is rank-deficient. Returns the value and the number
/// of redraws.
pub fn with_regular_channel<T: Real, R>(
    m: usize,
    n: usize,
    rng: &mut StreamRng,
    mut f: impl FnMut(&ChannelPair<T>) -> Result<R>,
) -> Result<(R, u64)> {
    for redraws in 0..MAX_DRAWS_PER_TRIAL {
        let ch = sample_channel(m, n, rng)?;
        match f(&ch) {
            Ok(v) => return Ok((v, redraws)),
            Err(e) if is_degenerate(&e) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ExcessiveResamples {
        resampled: MAX_DRAWS_PER_TRIAL,
        trials: 1,
    })
}

/// Decode outcome of trial `trial` at grid index `rho_index`, with the number
/// of singular redraws it needed.
pub fn simulate_trial<T: Real>(
    config: &SystemConfig<T>,
    rho_index: usize,
    trial: u64,
) -> Result<(DecodeOutcome, u64)> {
    let rho = config.rho_linear(rho_index);
    let mut rng = StreamRng::for_trial(config.seed, rho_index, trial);
    with_regular_channel(config.m, config.n, &mut rng, |ch| {
        realize_outcome(ch, config, rho)
    })
}

fn chunk_ranges(trials: u64) -> Vec<(u64, u64)> {
    (0..trials.div_ceil(CHUNK_TRIALS))
        .map(|c| (c * CHUNK_TRIALS, ((c + 1) * CHUNK_TRIALS).min(trials)))
        .collect()
}

/// Runs `f` on a pool of `workers` threads (0 picks the default).
fn in_pool<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn check_resamples(resampled: u64, trials: u64) -> Result<()> {
    // more than 0.1 % of draws redrawn means something other than chance
    if resampled * 1000 > trials {
        return Err(Error::ExcessiveResamples { resampled, trials });
    }
    Ok(())
}

/// Estimates outage at one grid point with `config.trials` trials.
pub fn run_point<T: Real>(
    config: &SystemConfig<T>,
    rho_index: usize,
    workers: usize,
) -> Result<PointEstimate> {
    config.validate()?;
    if rho_index >= config.rho_grid_db.len() {
        return Err(Error::DimensionMismatch(format!(
            "grid index {rho_index} beyond {} points",
            config.rho_grid_db.len()
        )));
    }
    let serves_user1 = config.scheme.serves_user1();
    let n = config.n;
    let chunks = chunk_ranges(config.trials);
    let partial = in_pool(workers, || {
        chunks
            .par_iter()
            .map(|&(lo, hi)| {
                let mut counts = Counts::new(n, serves_user1);
                for t in lo..hi {
                    let (outcome, redraws) = simulate_trial(config, rho_index, t)?;
                    counts.resampled += redraws;
                    counts.record(&outcome);
                }
                Ok(counts)
            })
            .collect::<Result<Vec<Counts>>>()
    })??;
    let total = partial
        .into_iter()
        .fold(Counts::new(n, serves_user1), Counts::merge);
    check_resamples(total.resampled, config.trials)?;
    let est = |v: &Vec<u64>| {
        v.iter()
            .map(|&f| OutageEstimate::from_counts(f, config.trials))
            .collect()
    };
    Ok(PointEstimate {
        rho_db: config.rho_grid_db[rho_index],
        user1: total.user1.as_ref().map(est),
        user2: est(&total.user2),
        resampled_singular: total.resampled,
    })
}

/// Closed-form values available for one layer at one SNR.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LayerOverlay {
    pub analytic: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// Closed-form overlays for both users at one SNR, one entry per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct PointOverlay {
    pub user1: Vec<LayerOverlay>,
    pub user2: Vec<LayerOverlay>,
}

/// Closed forms that apply to `config` at grid index `rho_index`.
///
/// User 1 gets the exact outage for the proposed scheme with ZF detection.
/// User 2 gets the exact policy-I outage or the policy-II bounds for the
/// proposed scheme, and the exact OMA outage for MIMO-OMA.
pub fn analytic_overlay<T: Real>(
    config: &SystemConfig<T>,
    rho_index: usize,
) -> Result<PointOverlay> {
    let n = config.n;
    let rho = config.rho_linear(rho_index);
    let rates = &config.rates;
    let mut user1 = vec![LayerOverlay::default(); n];
    let mut user2 = vec![LayerOverlay::default(); n];
    let f = |v: T| Some(v.to_f64_lossy());
    match config.scheme {
        Scheme::ProposedNoma => match &config.policy {
            Policy::One { targets } => {
                let coeffs = policy_one_coefficients(rates, targets, rho)?;
                for i in 0..n {
                    if config.detector_user1 == Detector::ZeroForcing {
                        user1[i].analytic = f(user1_outage_policy1(
                            rates.eps1()[i],
                            rho,
                            coeffs.beta_sq()[i],
                        ));
                    }
                    user2[i].analytic = f(user2_outage_policy1_exact(
                        i, config.m, rates, &coeffs, rho,
                    )?);
                }
            }
            Policy::Two => {
                for i in 0..n {
                    if config.detector_user1 == Detector::ZeroForcing {
                        user1[i].analytic = f(user1_outage_policy2(rates.eps1()[i], rho));
                    }
                    let b = user2_outage_policy2_bounds(i, config.m, rates, rho)?;
                    user2[i].lower = f(b.lower);
                    user2[i].upper = f(b.upper);
                }
            }
        },
        Scheme::MimoOma => {
            for (i, layer) in user2.iter_mut().enumerate() {
                layer.analytic = f(gamma_ratio(
                    config.m - i,
                    oma_threshold(rates.r2()[i]) / rho,
                ));
            }
        }
        Scheme::ZfNoma | Scheme::SaNoma => {}
    }
    Ok(PointOverlay { user1, user2 })
}

/// One grid point of a sweep: simulation plus closed-form overlay.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub estimate: PointEstimate,
    pub overlay: PointOverlay,
}

/// Simulation of every grid point of `config`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub scheme: Scheme,
    pub trials: u64,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Simulated user-2 outage of one layer across the grid.
    pub fn user2_curve(&self, layer: usize) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p.estimate.user2[layer].p_hat)
            .collect()
    }

    /// Simulated user-1 outage of one layer across the grid, if defined.
    pub fn user1_curve(&self, layer: usize) -> Option<Vec<f64>> {
        self.points
            .iter()
            .map(|p| p.estimate.user1.as_ref().map(|u| u[layer].p_hat))
            .collect()
    }

    pub fn rho_linear(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| crate::config::db_to_linear(p.estimate.rho_db))
            .collect()
    }

    pub fn resampled_singular(&self) -> u64 {
        self.points
            .iter()
            .map(|p| p.estimate.resampled_singular)
            .sum()
    }
}

/// Runs every grid point of `config` and attaches the closed-form overlays.
pub fn run_sweep<T: Real>(config: &SystemConfig<T>, workers: usize) -> Result<SweepResult> {
    config.validate()?;
    let points = (0..config.rho_grid_db.len())
        .map(|k| {
            Ok(SweepPoint {
                estimate: run_point(config, k, workers)?,
                overlay: analytic_overlay(config, k)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        scheme: config.scheme,
        trials: config.trials,
        points,
    })
}

/// Sample mean and variance of one gain with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub mean: f64,
    pub mean_std_err: f64,
    pub variance: f64,
    pub variance_std_err: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct PowerSums {
    s1: f64,
    s2: f64,
    s3: f64,
    s4: f64,
}

impl PowerSums {
    fn push(&mut self, v: f64) {
        let v2 = v * v;
        self.s1 += v;
        self.s2 += v2;
        self.s3 += v2 * v;
        self.s4 += v2 * v2;
    }

    fn merge(self, o: PowerSums) -> PowerSums {
        PowerSums {
            s1: self.s1 + o.s1,
            s2: self.s2 + o.s2,
            s3: self.s3 + o.s3,
            s4: self.s4 + o.s4,
        }
    }

    fn moments(&self, n: u64) -> MomentEstimate {
        let nf = n as f64;
        let (e1, e2, e3, e4) = (self.s1 / nf, self.s2 / nf, self.s3 / nf, self.s4 / nf);
        let var = e2 - e1 * e1;
        let m4 = e4 - 4.0 * e3 * e1 + 6.0 * e2 * e1 * e1 - 3.0 * e1.powi(4);
        let variance = var * nf / (nf - 1.0).max(1.0);
        MomentEstimate {
            mean: e1,
            mean_std_err: (var / nf).sqrt(),
            variance,
            variance_std_err: ((m4 - var * var).max(0.0) / nf).sqrt(),
        }
    }
}

/// Empirical moments of the per-layer gains `x_i` and `z_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainStatistics {
    pub samples: u64,
    pub x: Vec<MomentEstimate>,
    pub z: Vec<MomentEstimate>,
    pub resampled_singular: u64,
}

/// Draws `samples` channels and summarizes the effective gains.
///
/// Chunks are summed in chunk order, so the floating-point result is the
/// same for any worker count.
pub fn gain_statistics<T: Real>(
    m: usize,
    n: usize,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<GainStatistics> {
    if n == 0 || m < n {
        return Err(Error::InvalidConfig(format!(
            "antenna counts must satisfy M >= N >= 1, got M = {m}, N = {n}"
        )));
    }
    if samples < 2 || samples >= 1 << 40 {
        return Err(Error::InvalidConfig(
            "sample count must lie in [2, 2^40)".into(),
        ));
    }
    let chunks = chunk_ranges(samples);
    type Acc = (Vec<PowerSums>, Vec<PowerSums>, u64);
    let partial = in_pool(workers, || {
        chunks
            .par_iter()
            .map(|&(lo, hi)| -> Result<Acc> {
                let mut xs = vec![PowerSums::default(); n];
                let mut zs = vec![PowerSums::default(); n];
                let mut redrawn = 0;
                for t in lo..hi {
                    let mut rng = StreamRng::for_trial(seed, 0, t);
                    let (eff, r) =
                        with_regular_channel::<T, _>(m, n, &mut rng, build_effective_channel)?;
                    redrawn += r;
                    for i in 0..n {
                        xs[i].push(eff.x[i].to_f64_lossy());
                        zs[i].push(eff.z[i].to_f64_lossy());
                    }
                }
                Ok((xs, zs, redrawn))
            })
            .collect::<Result<Vec<Acc>>>()
    })??;
    let init: Acc = (
        vec![PowerSums::default(); n],
        vec![PowerSums::default(); n],
        0,
    );
    let (xs, zs, redrawn) = partial.into_iter().fold(init, |mut acc, (x, z, r)| {
        for i in 0..n {
            acc.0[i] = acc.0[i].merge(x[i]);
            acc.1[i] = acc.1[i].merge(z[i]);
        }
        acc.2 += r;
        acc
    });
    check_resamples(redrawn, samples)?;
    Ok(GainStatistics {
        samples,
        x: xs.iter().map(|s| s.moments(samples)).collect(),
        z: zs.iter().map(|s| s.moments(samples)).collect(),
        resampled_singular: redrawn,
    })
}
