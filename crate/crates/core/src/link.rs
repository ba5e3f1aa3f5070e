//! Per-realization decode decisions for both users.
//!
//! Outage is decided on information rates alone: a layer succeeds when its
//! SINR reaches `2^R - 1`. Comparisons carry a relative slack of
//! [`Real::decision_tolerance`] so that the exact-equality SINR produced by
//! policy II is counted as a success.

use crate::allocation::{
    policy_one_coefficients, policy_two_coefficients, PowerCoefficients, RateTargets,
};
use crate::benchmarks;
use crate::channel::{build_effective_channel, ChannelPair, EffectiveChannel};
use crate::config::{Detector, Policy, Scheme, SystemConfig};
use crate::error::Result;
use crate::matrixkit::{qr_decompose, ComplexMatrix};
use crate::scalar::Real;

/// `value >= threshold` up to the decision tolerance.
#[inline]
pub fn meets_threshold<T: Real>(value: T, threshold: T) -> bool {
    value >= threshold * (T::one() - T::decision_tolerance())
}

/// SINR for decoding the user-1 symbol on a layer with gain `gain`.
///
/// Written as `alpha^2 / (beta^2 + 1/(rho g))` so that infinite and zero
/// gains take their limits instead of producing NaN.
#[inline]
pub fn superposed_sinr<T: Real>(alpha_sq: T, beta_sq: T, gain: T, rho: T) -> T {
    alpha_sq / (beta_sq + (rho * gain).recip())
}

/// SNR for user 2's own symbol once the user-1 symbol is removed.
#[inline]
pub fn own_snr<T: Real>(beta_sq: T, gain: T, rho: T) -> T {
    if beta_sq == T::zero() {
        T::zero()
    } else {
        rho * beta_sq * gain
    }
}

/// Per-layer outcome of one realization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    /// User 1 decoded `s_i`; `None` for schemes that do not serve user 1.
    pub user1_ok: Option<Vec<bool>>,
    /// User 2 decoded `w_i` with every earlier SIC stage succeeding.
    pub user2_ok: Vec<bool>,
}

/// User 2's layered SIC: at layer `m`, decode `s_m` then `w_m`, after all
/// earlier layers. A failure anywhere stops the chain.
pub fn user2_sic_chain<T: Real>(
    x: &[T],
    coeffs: &PowerCoefficients<T>,
    rates: &RateTargets<T>,
    rho: T,
) -> Vec<bool> {
    let mut chain_ok = true;
    (0..x.len())
        .map(|m| {
            let beta_sq = coeffs.beta_sq()[m];
            let sinr = superposed_sinr(coeffs.alpha_sq(m), beta_sq, x[m], rho);
            let snr = own_snr(beta_sq, x[m], rho);
            chain_ok = chain_ok
                && meets_threshold(sinr, rates.eps1()[m])
                && meets_threshold(snr, rates.eps2()[m]);
            chain_ok
        })
        .collect()
}

/// User 1 with zero-forcing detection: layers decouple completely.
pub fn user1_zf_decode<T: Real>(
    z: &[T],
    coeffs: &PowerCoefficients<T>,
    rates: &RateTargets<T>,
    rho: T,
) -> Vec<bool> {
    (0..z.len())
        .map(|i| {
            let sinr = superposed_sinr(coeffs.alpha_sq(i), coeffs.beta_sq()[i], z[i], rho);
            meets_threshold(sinr, rates.eps1()[i])
        })
        .collect()
}

/// User 1 with QR-based successive detection on `H1 V2 = Q1 R1`.
///
/// Layers are detected from `N` down to 1. A correctly detected `s_j` is
/// cancelled; `w_j` is never decoded by user 1 and always interferes, and an
/// undetected `s_j` interferes at full strength.
pub fn user1_qr_decode<T: Real>(
    h1: &ComplexMatrix<T>,
    v2: &ComplexMatrix<T>,
    coeffs: &PowerCoefficients<T>,
    rates: &RateTargets<T>,
    rho: T,
) -> Result<Vec<bool>> {
    let r1 = qr_decompose(&h1.matmul(v2)?)?.r;
    let n = r1.cols();
    let mut decoded = vec![false; n];
    for i in (0..n).rev() {
        let gain = r1[(i, i)].norm_sqr();
        let mut interference = gain * coeffs.beta_sq()[i];
        for j in i + 1..n {
            let residual = if decoded[j] {
                coeffs.beta_sq()[j]
            } else {
                T::one()
            };
            interference = interference + r1[(i, j)].norm_sqr() * residual;
        }
        let sinr = gain * coeffs.alpha_sq(i) / (interference + rho.recip());
        decoded[i] = meets_threshold(sinr, rates.eps1()[i]);
    }
    Ok(decoded)
}

/// Intermediate quantities of one realization, kept for auditing.
#[derive(Debug, Clone)]
pub struct Realization<T> {
    /// Present for the proposed scheme and MIMO-OMA.
    pub effective: Option<EffectiveChannel<T>>,
    /// Present whenever a NOMA power split applies.
    pub coefficients: Option<PowerCoefficients<T>>,
    pub outcome: DecodeOutcome,
}

/// Power split for the proposed scheme given the layer gains.
pub fn coefficients_for<T: Real>(
    policy: &Policy<T>,
    rates: &RateTargets<T>,
    z: &[T],
    x: &[T],
    rho: T,
) -> Result<PowerCoefficients<T>> {
    match policy {
        Policy::One { targets } => policy_one_coefficients(rates, targets, rho),
        Policy::Two => Ok(policy_two_coefficients(z, x, rates, rho)),
    }
}

/// Runs one channel realization through precoding, allocation and decoding.
pub fn realize<T: Real>(
    ch: &ChannelPair<T>,
    config: &SystemConfig<T>,
    rho: T,
) -> Result<Realization<T>> {
    let rates = &config.rates;
    match config.scheme {
        Scheme::ProposedNoma => {
            let eff = build_effective_channel(ch)?;
            let coeffs = coefficients_for(&config.policy, rates, &eff.z, &eff.x, rho)?;
            let user1 = match config.detector_user1 {
                Detector::ZeroForcing => user1_zf_decode(&eff.z, &coeffs, rates, rho),
                Detector::QrLayered => user1_qr_decode(&ch.h1, &eff.v2, &coeffs, rates, rho)?,
            };
            let user2 = user2_sic_chain(&eff.x, &coeffs, rates, rho);
            Ok(Realization {
                effective: Some(eff),
                coefficients: Some(coeffs),
                outcome: DecodeOutcome {
                    user1_ok: Some(user1),
                    user2_ok: user2,
                },
            })
        }
        Scheme::ZfNoma => {
            let layers = benchmarks::zf_noma_layers(ch)?;
            let coeffs = coefficients_for(
                &config.policy,
                rates,
                &layers.user1_gains,
                &layers.user2_gains,
                rho,
            )?;
            let outcome = benchmarks::ordered_noma_outcome(&layers, &coeffs, rates, rho);
            Ok(Realization {
                effective: None,
                coefficients: Some(coeffs),
                outcome,
            })
        }
        Scheme::SaNoma => {
            let layers = benchmarks::sa_noma_detection(ch)?.ordered_layers();
            let coeffs = coefficients_for(
                &config.policy,
                rates,
                &layers.user1_gains,
                &layers.user2_gains,
                rho,
            )?;
            let outcome = benchmarks::ordered_noma_outcome(&layers, &coeffs, rates, rho);
            Ok(Realization {
                effective: None,
                coefficients: Some(coeffs),
                outcome,
            })
        }
        Scheme::MimoOma => {
            let eff = build_effective_channel(ch)?;
            let user2 = benchmarks::mimo_oma_outcome(&eff.x, rates, rho);
            Ok(Realization {
                effective: Some(eff),
                coefficients: None,
                outcome: DecodeOutcome {
                    user1_ok: None,
                    user2_ok: user2,
                },
            })
        }
    }
}

/// Decode outcome of one realization.
pub fn realize_outcome<T: Real>(
    ch: &ChannelPair<T>,
    config: &SystemConfig<T>,
    rho: T,
) -> Result<DecodeOutcome> {
    realize(ch, config, rho).map(|r| r.outcome)
}
