//! Rayleigh channel sampling, the QR precoder and per-layer effective gains.

use num_complex::Complex;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::matrixkit::{invert_hermitian_positive, qr_decompose, ComplexMatrix};
use crate::scalar::Real;

/// Deterministic random stream addressed by `(master seed, stream index)`.
///
/// The master seed is expanded with SplitMix64 into a ChaCha8 key; the stream
/// index selects the ChaCha stream. Two generators built from the same pair
/// produce the same sequence on every platform.
#[derive(Clone, Debug)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut state = seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Stream for one Monte Carlo trial at one SNR grid index.
    ///
    /// Grid index and trial index are packed injectively (24 + 40 bits), so
    /// no two trials of a sweep share a stream.
    pub fn for_trial(seed: u64, grid_index: usize, trial: u64) -> Self {
        debug_assert!(grid_index < (1 << 24) && trial < (1 << 40));
        Self::new(seed, ((grid_index as u64) << 40) | trial)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_M53
    }

    /// Circularly-symmetric complex Gaussian with unit total variance.
    ///
    /// Box–Muller on two uniforms: modulus `sqrt(-ln u1)`, phase `2 pi u2`,
    /// with `u1` taken on `(0, 1]`. Each real component has variance 1/2.
    pub fn complex_normal(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (radius * c, radius * s)
    }
}

/// Channel matrices of both users, each `N x M`.
#[derive(Debug, Clone)]
pub struct ChannelPair<T> {
    pub h1: ComplexMatrix<T>,
    pub h2: ComplexMatrix<T>,
}

impl<T: Real> ChannelPair<T> {
    pub fn new(h1: ComplexMatrix<T>, h2: ComplexMatrix<T>) -> Result<Self> {
        if h1.rows() != h2.rows() || h1.cols() != h2.cols() {
            return Err(Error::DimensionMismatch(format!(
                "user channels differ in shape: {}x{} vs {}x{}",
                h1.rows(),
                h1.cols(),
                h2.rows(),
                h2.cols()
            )));
        }
        if h1.cols() < h1.rows() {
            return Err(Error::InvalidConfig(format!(
                "base-station antennas M = {} must be at least user antennas N = {}",
                h1.cols(),
                h1.rows()
            )));
        }
        Ok(Self { h1, h2 })
    }

    /// Base-station antenna count `M`.
    pub fn m(&self) -> usize {
        self.h1.cols()
    }

    /// Per-user antenna count `N`.
    pub fn n(&self) -> usize {
        self.h1.rows()
    }
}

/// Draws an i.i.d. CN(0,1) matrix of the given shape, row by row.
pub fn sample_matrix<T: Real>(rows: usize, cols: usize, rng: &mut StreamRng) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let (re, im) = rng.complex_normal();
        Complex::new(T::lit(re), T::lit(im))
    })
}

/// Samples `H1` then `H2`, both `n x m` with CN(0,1) entries.
pub fn sample_channel<T: Real>(m: usize, n: usize, rng: &mut StreamRng) -> Result<ChannelPair<T>> {
    if n == 0 || m < n {
        return Err(Error::InvalidConfig(format!(
            "antenna counts must satisfy M >= N >= 1, got M = {m}, N = {n}"
        )));
    }
    let h1 = sample_matrix(n, m, rng);
    let h2 = sample_matrix(n, m, rng);
    Ok(ChannelPair { h1, h2 })
}

/// Precoder and layer gains for one channel realization.
#[derive(Debug, Clone)]
pub struct EffectiveChannel<T> {
    /// `M x N` precoder: leading columns of the unitary factor of `H2^H`.
    pub v2: ComplexMatrix<T>,
    /// `N x N` upper-triangular factor with `H2^H = V2 R2`.
    pub r2: ComplexMatrix<T>,
    /// User-2 layer gains `|[R2]_{ii}|^2`.
    pub x: Vec<T>,
    /// User-1 zero-forcing gains `1 / [(V2^H H1^H H1 V2)^{-1}]_{ii}`.
    pub z: Vec<T>,
}

impl<T: Real> EffectiveChannel<T> {
    pub fn layers(&self) -> usize {
        self.x.len()
    }
}

/// Applies the QR precoder `P = V2` and extracts the gains `x_i` and `z_i`.
///
/// A numerically singular Gram matrix at user 1 returns [`Error::Singular`];
/// the simulator treats that as a resample event.
pub fn build_effective_channel<T: Real>(ch: &ChannelPair<T>) -> Result<EffectiveChannel<T>> {
    let (m, n) = (ch.m(), ch.n());
    let qr = qr_decompose(&ch.h2.hermitian())?;
    let v2 = qr.q.block(0, m, 0, n);
    let r2 = qr.r.block(0, n, 0, n);
    let x = (0..n).map(|i| r2[(i, i)].norm_sqr()).collect();

    let z = zf_gains_direct(&ch.h1.matmul(&v2)?)?;
    Ok(EffectiveChannel { v2, r2, x, z })
}

/// Zero-forcing gains `1 / [(H^H H)^{-1}]_{ii}` of a full-column-rank matrix.
///
/// Returned in column order; any ordering is the caller's business.
pub fn zf_gains_direct<T: Real>(h: &ComplexMatrix<T>) -> Result<Vec<T>> {
    if h.rows() < h.cols() {
        return Err(Error::DimensionMismatch(format!(
            "zero-forcing gains need full column rank; a {}x{} matrix cannot have it",
            h.rows(),
            h.cols()
        )));
    }
    let gram = h.hermitian().matmul(h)?;
    let inv = invert_hermitian_positive(&gram)?;
    Ok((0..h.cols())
        .map(|i| {
            let d = inv[(i, i)].re;
            if d > T::zero() {
                d.recip()
            } else {
                T::zero()
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn same_stream_reproduces() {
        let a: ChannelPair<f64> = sample_channel(4, 2, &mut StreamRng::new(42, 7)).unwrap();
        let b: ChannelPair<f64> = sample_channel(4, 2, &mut StreamRng::new(42, 7)).unwrap();
        assert_eq!(a.h1, b.h1);
        assert_eq!(a.h2, b.h2);
        let other: ChannelPair<f64> = sample_channel(4, 2, &mut StreamRng::new(42, 8)).unwrap();
        assert_ne!(a.h1, other.h1);
    }

    #[test]
    fn rejects_more_user_antennas_than_base_station() {
        assert!(matches!(
            sample_channel::<f64>(2, 3, &mut StreamRng::new(0, 0)),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn scalar_channel() {
        let h1 = ComplexMatrix::from_row_major(1, 1, vec![c(3.0, 0.0)]).unwrap();
        let h2 = ComplexMatrix::from_row_major(1, 1, vec![c(2.0, 0.0)]).unwrap();
        let eff = build_effective_channel(&ChannelPair::new(h1, h2).unwrap()).unwrap();
        assert!((eff.v2[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((eff.x[0] - 4.0).abs() < 1e-14);
        assert!((eff.z[0] - 9.0).abs() < 1e-12);
    }

    #[test]
    fn precoder_reconstructs_user2_channel() {
        let mut rng = StreamRng::new(5, 0);
        for _ in 0..50 {
            let ch: ChannelPair<f64> = sample_channel(3, 3, &mut rng).unwrap();
            let eff = build_effective_channel(&ch).unwrap();
            let rec = eff.v2.matmul(&eff.r2).unwrap();
            let h2h = ch.h2.hermitian();
            assert!(rec.sub(&h2h).unwrap().frobenius_norm() < 1e-10 * h2h.frobenius_norm());
            for i in 0..3 {
                assert!((eff.x[i] - eff.r2[(i, i)].norm_sqr()).abs() < 1e-10);
                assert!(eff.x[i] >= 0.0 && eff.z[i] >= 0.0);
            }
        }
    }

    #[test]
    fn tall_precoder_has_orthonormal_columns() {
        let mut rng = StreamRng::new(9, 3);
        let ch: ChannelPair<f64> = sample_channel(6, 3, &mut rng).unwrap();
        let eff = build_effective_channel(&ch).unwrap();
        assert_eq!((eff.v2.rows(), eff.v2.cols()), (6, 3));
        let vhv = eff.v2.hermitian().matmul(&eff.v2).unwrap();
        assert!(
            vhv.sub(&ComplexMatrix::identity(3))
                .unwrap()
                .frobenius_norm()
                < 1e-12
        );
    }

    #[test]
    fn zf_gains_of_scalar_and_diagonal() {
        let h = ComplexMatrix::from_row_major(1, 1, vec![c(2.0, 0.0)]).unwrap();
        assert!((zf_gains_direct(&h).unwrap()[0] - 4.0).abs() < 1e-14);
        let d = ComplexMatrix::from_real_diagonal(&[3.0_f64, 0.5]);
        let g = zf_gains_direct(&d).unwrap();
        assert!((g[0] - 9.0).abs() < 1e-12 && (g[1] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn zf_gains_flag_rank_deficiency() {
        let h = ComplexMatrix::from_row_major(
            2,
            2,
            vec![c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(zf_gains_direct(&h), Err(Error::Singular { .. })));
    }

    #[test]
    fn uniform_stays_in_unit_interval() {
        let mut rng = StreamRng::new(1, 1);
        for _ in 0..10_000 {
            let u = rng.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
