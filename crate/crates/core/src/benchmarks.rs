//! Comparison schemes: ZF-NOMA, SA-NOMA, MIMO-OMA and the user-1-centric
//! zero-forcing precoder.

use std::cmp::Ordering;

use crate::allocation::{PowerCoefficients, RateTargets};
use crate::channel::{zf_gains_direct, ChannelPair};
use crate::error::{Error, Result};
use crate::link::{
    meets_threshold, own_snr, superposed_sinr, user1_zf_decode, user2_sic_chain, DecodeOutcome,
};
use crate::matrixkit::{inverse, qr_decompose, ComplexMatrix};
use crate::scalar::Real;

/// Layer gains of an identity-precoded scheme, sorted by user 2's gain.
#[derive(Debug, Clone)]
pub struct OrderedLayers<T> {
    /// User-2 gains, non-increasing.
    pub user2_gains: Vec<T>,
    /// User-1 gains on the same antennas, in the same order.
    pub user1_gains: Vec<T>,
    /// `order[k]` is the antenna carrying ordered layer `k`.
    pub order: Vec<usize>,
}

impl<T: Real> OrderedLayers<T> {
    fn from_unordered(user1: Vec<T>, user2: Vec<T>) -> Self {
        let mut order: Vec<usize> = (0..user2.len()).collect();
        order.sort_by(|&a, &b| user2[b].partial_cmp(&user2[a]).unwrap_or(Ordering::Equal));
        Self {
            user2_gains: order.iter().map(|&k| user2[k]).collect(),
            user1_gains: order.iter().map(|&k| user1[k]).collect(),
            order,
        }
    }
}

fn require_square_system<T: Real>(ch: &ChannelPair<T>, scheme: &str) -> Result<()> {
    if ch.m() != ch.n() {
        return Err(Error::InvalidConfig(format!(
            "{scheme} is defined here for M = N only, got M = {}, N = {}",
            ch.m(),
            ch.n()
        )));
    }
    Ok(())
}

/// ZF-NOMA with `P = I`: zero-forcing gains `1 / [(H^H H)^{-1}]_{ii}` at both
/// users, layers ordered by user 2's gain.
pub fn zf_noma_layers<T: Real>(ch: &ChannelPair<T>) -> Result<OrderedLayers<T>> {
    require_square_system(ch, "ZF-NOMA")?;
    let user2 = zf_gains_direct(&ch.h2)?;
    let user1 = zf_gains_direct(&ch.h1)?;
    Ok(OrderedLayers::from_unordered(user1, user2))
}

/// Decode outcome for an ordered identity-precoded scheme.
///
/// User 2 runs the same SIC decision rule as the proposed scheme on the
/// ordered gains; power coefficients are applied by ordered layer index.
pub fn ordered_noma_outcome<T: Real>(
    layers: &OrderedLayers<T>,
    coeffs: &PowerCoefficients<T>,
    rates: &RateTargets<T>,
    rho: T,
) -> DecodeOutcome {
    DecodeOutcome {
        user1_ok: Some(user1_zf_decode(&layers.user1_gains, coeffs, rates, rho)),
        user2_ok: user2_sic_chain(&layers.user2_gains, coeffs, rates, rho),
    }
}

/// ZF-NOMA outcome for one realization with given coefficients.
pub fn zf_noma_outcome<T: Real>(
    ch: &ChannelPair<T>,
    coeffs: &PowerCoefficients<T>,
    rates: &RateTargets<T>,
    rho: T,
) -> Result<DecodeOutcome> {
    Ok(ordered_noma_outcome(
        &zf_noma_layers(ch)?,
        coeffs,
        rates,
        rho,
    ))
}

/// Signal-alignment detection matrices and their noise-amplification terms.
#[derive(Debug, Clone)]
pub struct SaNomaDetection<T> {
    pub u1: ComplexMatrix<T>,
    pub u2: ComplexMatrix<T>,
    /// `[(U2 H2)^{-1} U2 U2^H (U2 H2)^{-H}]_{ii}` per layer.
    pub user2_noise: Vec<T>,
    /// Same term for user 1 with `U1`.
    pub user1_noise: Vec<T>,
}

impl<T: Real> SaNomaDetection<T> {
    pub fn user2_sinr(&self, layer: usize, alpha_sq: T, beta_sq: T, rho: T) -> T {
        alpha_sq / (beta_sq + self.user2_noise[layer] / rho)
    }

    pub fn user2_snr(&self, layer: usize, beta_sq: T, rho: T) -> T {
        rho * beta_sq / self.user2_noise[layer]
    }

    /// Effective gains `1 / noise`, ordered like ZF-NOMA.
    pub fn ordered_layers(&self) -> OrderedLayers<T> {
        let inv = |v: &[T]| v.iter().map(|&d| d.recip()).collect::<Vec<_>>();
        OrderedLayers::from_unordered(inv(&self.user1_noise), inv(&self.user2_noise))
    }
}

fn noise_terms<T: Real>(aligned_inv: &ComplexMatrix<T>, u: &ComplexMatrix<T>) -> Result<Vec<T>> {
    let left = aligned_inv.matmul(u)?;
    let cov = left.matmul(&left.hermitian())?;
    Ok((0..cov.rows()).map(|i| cov[(i, i)].re).collect())
}

/// Builds `U1`, `U2` from the null space of `[H1^H, -H2^H]`.
///
/// The basis is read off the trailing columns of the full unitary factor of
/// the stacked matrix's Hermitian; then `U1 H1 = U2 H2` up to rounding.
pub fn sa_noma_detection<T: Real>(ch: &ChannelPair<T>) -> Result<SaNomaDetection<T>> {
    require_square_system(ch, "SA-NOMA")?;
    let (n, m) = (ch.n(), ch.m());
    // [H1; -H2] is the Hermitian of [H1^H, -H2^H]
    let stacked = ComplexMatrix::from_fn(2 * n, m, |i, j| {
        if i < n {
            ch.h1[(i, j)]
        } else {
            -ch.h2[(i - n, j)]
        }
    });
    let qr = qr_decompose(&stacked)?;
    let diag: Vec<T> = (0..m).map(|i| qr.r[(i, i)].re).collect();
    let largest = diag.iter().fold(T::zero(), |a, &d| a.max(d));
    let smallest = diag.iter().fold(T::infinity(), |a, &d| a.min(d));
    if !(smallest > T::singular_threshold() * largest) {
        return Err(Error::Singular {
            ratio: (smallest / largest).to_f64_lossy(),
        });
    }
    let basis = qr.q.block(0, 2 * n, m, 2 * n);
    let u1 = basis.block(0, n, 0, 2 * n - m).hermitian();
    let u2 = basis.block(n, 2 * n, 0, 2 * n - m).hermitian();

    let aligned_inv = inverse(&u2.matmul(&ch.h2)?)?;
    let user2_noise = noise_terms(&aligned_inv, &u2)?;
    let user1_noise = noise_terms(&inverse(&u1.matmul(&ch.h1)?)?, &u1)?;
    Ok(SaNomaDetection {
        u1,
        u2,
        user2_noise,
        user1_noise,
    })
}

/// ZF-NOMA user-2 SINR for decoding `s_i` on an unordered layer with ZF gain `gain`.
pub fn zf_noma_sinr<T: Real>(gain: T, alpha_sq: T, beta_sq: T, rho: T) -> T {
    superposed_sinr(alpha_sq, beta_sq, gain, rho)
}

/// ZF-NOMA user-2 SNR for `w_i` on an unordered layer with ZF gain `gain`.
pub fn zf_noma_snr<T: Real>(gain: T, beta_sq: T, rho: T) -> T {
    own_snr(beta_sq, gain, rho)
}

/// MIMO-OMA with the QR precoder: user 2 alone, half the resources.
///
/// Layer `i` succeeds iff `log2(1 + rho x_i) / 2 >= R_{2,i}`, i.e.
/// `rho x_i >= 2^{2 R_{2,i}} - 1`.
pub fn mimo_oma_outcome<T: Real>(x: &[T], rates: &RateTargets<T>, rho: T) -> Vec<bool> {
    x.iter()
        .zip(rates.r2())
        .map(|(&g, &r)| meets_threshold(rho * g, oma_threshold(r)))
        .collect()
}

/// SNR threshold `2^{2R} - 1` of the half-rate OMA link.
pub fn oma_threshold<T: Real>(rate: T) -> T {
    (rate * T::lit(2.0)).exp2() - T::one()
}

/// User 1 served alone through `P = H1^H (H1 H1^H)^{-1}` with all power.
///
/// Stream `i` sees gain `1 / [(H1 H1^H)^{-1}]_{ii}`.
pub fn zf_precoder_user1_gains<T: Real>(ch: &ChannelPair<T>) -> Result<Vec<T>> {
    zf_gains_direct(&ch.h1.hermitian())
}

/// Outcome per stream for the user-1-centric ZF precoder.
pub fn zf_precoder_user1_outcome<T: Real>(
    ch: &ChannelPair<T>,
    rates: &RateTargets<T>,
    rho: T,
) -> Result<Vec<bool>> {
    Ok(zf_precoder_user1_gains(ch)?
        .into_iter()
        .zip(rates.eps1())
        .map(|(g, &eps)| meets_threshold(rho * g, eps))
        .collect())
}
