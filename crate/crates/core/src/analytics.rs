//! Closed-form outage probabilities, the policy-II bounds for user 2, and
//! log-log diversity slopes.
//!
//! Layer indices are zero-based throughout: layer `i` here carries the
//! chi-square gain with `2(M - i)` degrees of freedom, i.e. a
//! `Gamma(M - i, 1)` law.

use crate::allocation::{PowerCoefficients, RateTargets};
use crate::error::{Error, Result};
use crate::scalar::Real;

const SERIES_MAX_TERMS: usize = 10_000;

/// Regularized lower incomplete gamma `gamma(k, t) / (k-1)!` for integer `k >= 1`.
///
/// For `t >= k` this is the finite complement `1 - e^{-t} sum_{j<k} t^j / j!`.
/// Below that the convergent series `e^{-t} t^k / k! sum_n t^n / ((k+1)...(k+n))`
/// is used instead, so tiny probabilities keep their relative accuracy.
pub fn gamma_ratio<T: Real>(k: usize, t: T) -> T {
    assert!(k >= 1, "gamma_ratio requires a positive integer shape");
    if !(t > T::zero()) {
        return T::zero();
    }
    if t.is_infinite() {
        return T::one();
    }
    if t >= T::from_usize(k).unwrap() {
        return T::one() - poisson_head(k, t);
    }
    let mut prefactor = (-t).exp();
    for j in 1..=k {
        prefactor = prefactor * t / T::from_usize(j).unwrap();
    }
    let mut term = T::one();
    let mut sum = T::one();
    for n in 1..SERIES_MAX_TERMS {
        term = term * t / T::from_usize(k + n).unwrap();
        sum = sum + term;
        if term < T::epsilon() * sum {
            break;
        }
    }
    (prefactor * sum).min(T::one())
}

/// `1 - gamma_ratio(k, t)`, computed without cancellation where it matters.
pub fn gamma_ratio_complement<T: Real>(k: usize, t: T) -> T {
    assert!(k >= 1, "gamma_ratio requires a positive integer shape");
    if !(t > T::zero()) {
        return T::one();
    }
    if t.is_infinite() {
        return T::zero();
    }
    if t >= T::from_usize(k).unwrap() {
        poisson_head(k, t)
    } else {
        T::one() - gamma_ratio(k, t)
    }
}

/// `e^{-t} sum_{j<k} t^j / j!`
fn poisson_head<T: Real>(k: usize, t: T) -> T {
    // start from e^{-t} so huge t underflows to zero instead of 0 * inf
    let mut term = (-t).exp();
    let mut sum = term;
    for j in 1..k {
        term = term * t / T::from_usize(j).unwrap();
        sum = sum + term;
    }
    sum.min(T::one())
}

/// CDF of the unit exponential, `1 - e^{-t}`.
pub fn exp_cdf<T: Real>(t: T) -> T {
    if !(t > T::zero()) {
        T::zero()
    } else {
        -(-t).exp_m1()
    }
}

/// User-1 outage at one layer under policy I with share `beta_sq`.
pub fn user1_outage_policy1<T: Real>(eps1: T, rho: T, beta_sq: T) -> T {
    let margin = (T::one() - beta_sq) - beta_sq * eps1;
    if !(margin > T::zero()) {
        return T::one();
    }
    exp_cdf(eps1 / rho / margin)
}

/// User-1 outage at one layer under policy II: `1 - e^{-eps/rho}`.
pub fn user1_outage_policy2<T: Real>(eps1: T, rho: T) -> T {
    exp_cdf(eps1 / rho)
}

/// Decode thresholds on `x_m` for user 2 under policy I.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerThreshold<T> {
    /// Threshold for removing `s_m`: `(eps1/rho) / (alpha^2 - beta^2 eps1)`.
    pub xi: T,
    /// Threshold for decoding `w_m`: `eps2 / (rho beta^2)`.
    pub own: T,
}

impl<T: Real> LayerThreshold<T> {
    /// Binding threshold `g_m = max(xi_m, own_m)`.
    pub fn binding(&self) -> T {
        self.xi.max(self.own)
    }
}

/// Per-layer user-2 thresholds; infinite where the layer can never succeed.
pub fn policy_one_thresholds<T: Real>(
    rates: &RateTargets<T>,
    coeffs: &PowerCoefficients<T>,
    rho: T,
) -> Vec<LayerThreshold<T>> {
    (0..rates.layers())
        .map(|m| {
            let beta_sq = coeffs.beta_sq()[m];
            let eps1 = rates.eps1()[m];
            let margin = coeffs.alpha_sq(m) - beta_sq * eps1;
            let xi = if margin > T::zero() {
                eps1 / rho / margin
            } else {
                T::infinity()
            };
            let own = if beta_sq > T::zero() {
                rates.eps2()[m] / (rho * beta_sq)
            } else {
                T::infinity()
            };
            LayerThreshold { xi, own }
        })
        .collect()
}

fn check_layer(layer: usize, m_antennas: usize, rates_layers: usize) -> Result<()> {
    if layer >= rates_layers || rates_layers > m_antennas {
        return Err(Error::DimensionMismatch(format!(
            "layer {layer} invalid for {rates_layers} layers and M = {m_antennas}"
        )));
    }
    Ok(())
}

/// Exact user-2 outage at `layer` under policy I.
///
/// Sum over `m <= layer` of the probability that the SIC chain first breaks
/// at layer `m`, using the independence of the `x_m`.
pub fn user2_outage_policy1_exact<T: Real>(
    layer: usize,
    m_antennas: usize,
    rates: &RateTargets<T>,
    coeffs: &PowerCoefficients<T>,
    rho: T,
) -> Result<T> {
    check_layer(layer, m_antennas, rates.layers())?;
    let g = policy_one_thresholds(rates, coeffs, rho);
    let mut survive = T::one();
    let mut total = T::zero();
    for (m, th) in g.iter().enumerate().take(layer + 1) {
        let shape = m_antennas - m;
        total = total + survive * gamma_ratio(shape, th.binding());
        survive = survive * gamma_ratio_complement(shape, th.binding());
    }
    Ok(total.min(T::one()))
}

/// High-SNR dominant term `g_i^{M-i} / (M-i)!` of the user-2 policy-I outage.
pub fn user2_outage_policy1_approx<T: Real>(
    layer: usize,
    m_antennas: usize,
    rates: &RateTargets<T>,
    coeffs: &PowerCoefficients<T>,
    rho: T,
) -> Result<T> {
    check_layer(layer, m_antennas, rates.layers())?;
    let g = policy_one_thresholds(rates, coeffs, rho)[layer].binding();
    let shape = m_antennas - layer;
    let mut value = T::one();
    for j in 1..=shape {
        value = value * g / T::from_usize(j).unwrap();
    }
    Ok(value)
}

/// The six probability pieces of the policy-II upper bound at one layer `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPieces<T> {
    /// `P(z < eps1/rho)` bounding the first piece of the `s_m` failure.
    pub s_fail_z: T,
    /// `P(x_m < eps1/rho)` bounding the second piece of the `s_m` failure.
    pub s_fail_x: T,
    /// `P(z < eps1/rho)` in the `w_m` failure with `z < x`.
    pub w_fail_z_low: T,
    /// `P(z < eps_sum/rho)` in the `w_m` failure with `z < x`.
    pub w_fail_z_sum: T,
    /// `P(x_m < eps1/rho)` in the `w_m` failure with `z > x`.
    pub w_fail_x_low: T,
    /// `P(x_m < eps_sum/rho)` in the `w_m` failure with `z > x`.
    pub w_fail_x_sum: T,
}

impl<T: Real> BoundPieces<T> {
    pub fn total(&self) -> T {
        self.s_fail_z
            + self.s_fail_x
            + self.w_fail_z_low
            + self.w_fail_z_sum
            + self.w_fail_x_low
            + self.w_fail_x_sum
    }
}

/// Lower and upper bounds on the user-2 outage under policy II.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy2Bounds<T> {
    pub lower: T,
    /// Sum of all pieces, capped at one.
    pub upper: T,
    /// One entry per layer `m <= i`.
    pub pieces: Vec<BoundPieces<T>>,
}

/// Bounds on the user-2 outage at `layer` under policy II.
///
/// `eps_sum = eps1 + eps2 + eps1 eps2` is the threshold on the user-1 gain
/// below which the policy-II split starves user 2's own symbol.
pub fn user2_outage_policy2_bounds<T: Real>(
    layer: usize,
    m_antennas: usize,
    rates: &RateTargets<T>,
    rho: T,
) -> Result<Policy2Bounds<T>> {
    check_layer(layer, m_antennas, rates.layers())?;
    let pieces: Vec<BoundPieces<T>> = (0..=layer)
        .map(|m| {
            let (e1, e2) = (rates.eps1()[m], rates.eps2()[m]);
            let e_sum = e1 + e2 + e1 * e2;
            let shape = m_antennas - m;
            BoundPieces {
                s_fail_z: exp_cdf(e1 / rho),
                s_fail_x: gamma_ratio(shape, e1 / rho),
                w_fail_z_low: exp_cdf(e1 / rho),
                w_fail_z_sum: exp_cdf(e_sum / rho),
                w_fail_x_low: gamma_ratio(shape, e1 / rho),
                w_fail_x_sum: gamma_ratio(shape, e_sum / rho),
            }
        })
        .collect();
    let upper = pieces
        .iter()
        .map(BoundPieces::total)
        .sum::<T>()
        .min(T::one());
    let t1 = rates.eps1()[0] / rho;
    let lower = exp_cdf(t1) * gamma_ratio_complement(m_antennas, t1);
    Ok(Policy2Bounds {
        lower,
        upper,
        pieces,
    })
}

/// Per-layer curves over an SNR grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticCurve<T> {
    /// Linear SNRs.
    pub rho_grid: Vec<T>,
    /// `values[layer][point]`.
    pub values: Vec<Vec<T>>,
}

impl<T: Real> AnalyticCurve<T> {
    /// Evaluates `f(layer, rho)` for every layer and grid point.
    pub fn evaluate(
        rho_grid: Vec<T>,
        layers: usize,
        mut f: impl FnMut(usize, T) -> Result<T>,
    ) -> Result<Self> {
        let values = (0..layers)
            .map(|l| {
                rho_grid
                    .iter()
                    .map(|&rho| f(l, rho))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rho_grid, values })
    }

    /// Diversity slope of one layer over a dB window.
    pub fn slope(&self, layer: usize, window_db: (f64, f64)) -> Result<f64> {
        let rho: Vec<f64> = self.rho_grid.iter().map(|r| r.to_f64_lossy()).collect();
        let vals: Vec<f64> = self.values[layer]
            .iter()
            .map(|v| v.to_f64_lossy())
            .collect();
        diversity_slope(&rho, &vals, window_db)
    }
}

/// Negated least-squares slope of `log10(outage)` against `log10(rho)` over
/// the grid points whose SNR in dB falls inside `window_db` (inclusive).
pub fn diversity_slope(rho_linear: &[f64], outage: &[f64], window_db: (f64, f64)) -> Result<f64> {
    if rho_linear.len() != outage.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} SNR points and {} outage values",
            rho_linear.len(),
            outage.len()
        )));
    }
    let (lo, hi) = window_db;
    let mut pts = Vec::new();
    for (&rho, &p) in rho_linear.iter().zip(outage) {
        let db = 10.0 * rho.log10();
        if db < lo - 1e-9 || db > hi + 1e-9 {
            continue;
        }
        if !(p > 0.0) {
            return Err(Error::InsufficientData(format!(
                "zero outage at {db:.3} dB inside the fitting window"
            )));
        }
        pts.push((rho.log10(), p.log10()));
    }
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} grid points inside [{lo}, {hi}] dB, need at least 3",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(-sxy / sxx)
}
