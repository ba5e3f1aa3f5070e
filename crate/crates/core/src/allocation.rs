//! Power split between the two users' superposed streams.
//!
//! Policy I fixes the split per layer from a long-term outage target for
//! user 1; policy II recomputes it per realization so user 1's rate is met
//! whenever the channel allows it. `beta_sq` (user 2's share) is the stored
//! quantity and `alpha_sq = 1 - beta_sq` is always derived from it.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `2^R - 1`, the SINR threshold for rate `R` bits per channel use.
pub fn rate_threshold<T: Real>(rate: T) -> T {
    rate.exp2() - T::one()
}

/// Per-layer target rates of both users with their SINR thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTargets<T> {
    r1: Vec<T>,
    r2: Vec<T>,
    eps1: Vec<T>,
    eps2: Vec<T>,
}

impl<T: Real> RateTargets<T> {
    pub fn new(r1: Vec<T>, r2: Vec<T>) -> Result<Self> {
        if r1.len() != r2.len() || r1.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "rate vectors must be non-empty and equal length, got {} and {}",
                r1.len(),
                r2.len()
            )));
        }
        if let Some(r) = r1
            .iter()
            .chain(&r2)
            .find(|r| !(r.is_finite() && **r > T::zero()))
        {
            return Err(Error::InvalidConfig(format!(
                "target rates must be positive and finite, got {r}"
            )));
        }
        let eps1 = r1.iter().map(|&r| rate_threshold(r)).collect();
        let eps2 = r2.iter().map(|&r| rate_threshold(r)).collect();
        Ok(Self { r1, r2, eps1, eps2 })
    }

    /// Same pair of rates on every one of `layers` layers.
    pub fn uniform(layers: usize, r1: T, r2: T) -> Result<Self> {
        Self::new(vec![r1; layers], vec![r2; layers])
    }

    pub fn layers(&self) -> usize {
        self.r1.len()
    }

    pub fn r1(&self) -> &[T] {
        &self.r1
    }

    pub fn r2(&self) -> &[T] {
        &self.r2
    }

    pub fn eps1(&self) -> &[T] {
        &self.eps1
    }

    pub fn eps2(&self) -> &[T] {
        &self.eps2
    }
}

/// Per-layer power split; `alpha_sq[i] + beta_sq[i] = 1` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCoefficients<T> {
    beta_sq: Vec<T>,
}

impl<T: Real> PowerCoefficients<T> {
    /// Wraps user-2 power shares, each of which must lie in `[0, 1]`.
    pub fn from_beta_sq(beta_sq: Vec<T>) -> Result<Self> {
        if let Some(b) = beta_sq
            .iter()
            .find(|b| !(**b >= T::zero() && **b <= T::one()))
        {
            return Err(Error::InvalidConfig(format!(
                "power share {b} outside [0, 1]"
            )));
        }
        Ok(Self { beta_sq })
    }

    /// All power to user 1 on every layer.
    pub fn user1_only(layers: usize) -> Self {
        Self {
            beta_sq: vec![T::zero(); layers],
        }
    }

    pub fn layers(&self) -> usize {
        self.beta_sq.len()
    }

    pub fn beta_sq(&self) -> &[T] {
        &self.beta_sq
    }

    pub fn alpha_sq(&self, layer: usize) -> T {
        T::one() - self.beta_sq[layer]
    }
}

/// User-1 outage target for one layer under policy I.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutageTarget<T> {
    /// SNR-independent target probability.
    Fixed(T),
    /// `1 - exp(-x eps / rho)` with multiplier `x > 1`.
    SnrCoupled { multiplier: T },
}

impl<T: Real> OutageTarget<T> {
    /// Target probability at linear SNR `rho` for threshold `eps`.
    pub fn value(&self, eps: T, rho: T) -> T {
        match *self {
            OutageTarget::Fixed(p) => p,
            OutageTarget::SnrCoupled { multiplier } => -(-multiplier * eps / rho).exp_m1(),
        }
    }

    /// `ln(1 - target)`, exact for the SNR-coupled form.
    pub fn ln_survival(&self, eps: T, rho: T) -> T {
        match *self {
            OutageTarget::Fixed(p) => (-p).ln_1p(),
            OutageTarget::SnrCoupled { multiplier } => -multiplier * eps / rho,
        }
    }
}

/// Open interval `(1 - exp(-eps/rho), 1)` of admissible policy-I targets.
pub fn feasibility_range<T: Real>(eps1: T, rho: T) -> (T, T) {
    (-(-eps1 / rho).exp_m1(), T::one())
}

/// Policy-I user-2 share for a fixed target probability.
///
/// `beta^2 = (1 + eps / (rho ln(1 - target))) / (1 + eps)`, which makes the
/// user-1 outage exactly equal to `target`.
pub fn policy_one_beta<T: Real>(eps1: T, rho: T, target: T) -> Result<T> {
    policy_one_beta_for(&OutageTarget::Fixed(target), eps1, rho)
}

/// Policy-I user-2 share for any target form.
pub fn policy_one_beta_for<T: Real>(target: &OutageTarget<T>, eps1: T, rho: T) -> Result<T> {
    let p = target.value(eps1, rho);
    let (lower, upper) = feasibility_range(eps1, rho);
    let ln_surv = target.ln_survival(eps1, rho);
    // compare on the log scale, where the SNR-coupled form is exact
    let infeasible_low = match *target {
        OutageTarget::Fixed(_) => !(p > lower),
        OutageTarget::SnrCoupled { multiplier } => !(multiplier > T::one()),
    };
    if !(p < upper) || !p.is_finite() || infeasible_low || !(ln_surv < T::zero()) {
        return Err(Error::InfeasibleTarget {
            target: p.to_f64_lossy(),
            lower: lower.to_f64_lossy(),
            rho: rho.to_f64_lossy(),
        });
    }
    let beta_sq = (T::one() + eps1 / (rho * ln_surv)) / (T::one() + eps1);
    Ok(beta_sq.max(T::zero()))
}

/// Policy-I coefficients for every layer at one SNR.
pub fn policy_one_coefficients<T: Real>(
    rates: &RateTargets<T>,
    targets: &[OutageTarget<T>],
    rho: T,
) -> Result<PowerCoefficients<T>> {
    if targets.len() != rates.layers() {
        return Err(Error::DimensionMismatch(format!(
            "{} outage targets for {} layers",
            targets.len(),
            rates.layers()
        )));
    }
    let beta_sq = targets
        .iter()
        .zip(rates.eps1())
        .map(|(t, &eps)| policy_one_beta_for(t, eps, rho))
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerCoefficients { beta_sq })
}

fn clamped_share<T: Real>(gain: T, eps1: T, rho: T) -> T {
    if !(gain > T::zero()) {
        return T::zero();
    }
    if gain.is_infinite() {
        return (T::one() + eps1).recip();
    }
    ((gain - eps1 / rho) / (gain * (T::one() + eps1))).max(T::zero())
}

/// Policy-II user-2 share for one layer of one realization.
///
/// The smaller of the shares that keep user 1's SINR at its threshold at
/// user 1 (`z`) and at user 2 (`x`), each clamped at zero.
pub fn policy_two_beta<T: Real>(z: T, x: T, eps1: T, rho: T) -> T {
    clamped_share(z, eps1, rho).min(clamped_share(x, eps1, rho))
}

/// Policy-II coefficients for every layer of one realization.
pub fn policy_two_coefficients<T: Real>(
    z: &[T],
    x: &[T],
    rates: &RateTargets<T>,
    rho: T,
) -> PowerCoefficients<T> {
    let beta_sq = z
        .iter()
        .zip(x)
        .zip(rates.eps1())
        .map(|((&z, &x), &eps)| policy_two_beta(z, x, eps, rho))
        .collect();
    PowerCoefficients { beta_sq }
}
