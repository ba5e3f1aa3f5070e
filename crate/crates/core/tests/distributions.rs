//! Statistical laws of the sampled channels and effective gains.

use mimo_noma::channel::{build_effective_channel, sample_channel, sample_matrix, StreamRng};
use mimo_noma::simulator::with_regular_channel;
use mimo_noma::Matrix64;

/// Gamma(k, 1) CDF for integer k from the Poisson tail, written out directly.
fn gamma_cdf(k: usize, t: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..k {
        term *= t / j as f64;
        sum += term;
    }
    1.0 - (-t).exp() * sum
}

fn empirical_cdf(sorted: &[f64], t: f64) -> f64 {
    sorted.partition_point(|&v| v <= t) as f64 / sorted.len() as f64
}

fn deciles(sorted: &[f64]) -> Vec<f64> {
    (1..10).map(|d| sorted[d * sorted.len() / 10]).collect()
}

fn gains(m: usize, n: usize, count: u64, seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut x = vec![Vec::with_capacity(count as usize); n];
    let mut z = vec![Vec::with_capacity(count as usize); n];
    for t in 0..count {
        let mut rng = StreamRng::for_trial(seed, 0, t);
        let (eff, _) =
            with_regular_channel::<f64, _>(m, n, &mut rng, build_effective_channel).unwrap();
        for i in 0..n {
            x[i].push(eff.x[i]);
            z[i].push(eff.z[i]);
        }
    }
    for v in x.iter_mut().chain(z.iter_mut()) {
        v.sort_by(f64::total_cmp);
    }
    (x, z)
}

#[test]
fn entries_are_unit_variance_circular_gaussian() {
    let mut rng = StreamRng::new(11, 0);
    let count = 1_000_000;
    let (mut power, mut re2, mut im2, mut cross, mut mean_re) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let h: Matrix64 = sample_matrix(1000, 1000, &mut rng);
    for z in h.as_slice() {
        power += z.norm_sqr();
        re2 += z.re * z.re;
        im2 += z.im * z.im;
        cross += z.re * z.im;
        mean_re += z.re;
    }
    let n = count as f64;
    assert!((power / n - 1.0).abs() < 0.005, "E|h|^2 = {}", power / n);
    assert!((re2 / n - 0.5).abs() < 0.02);
    assert!((im2 / n - 0.5).abs() < 0.02);
    assert!((cross / n).abs() < 0.02);
    assert!((mean_re / n).abs() < 0.01);
}

#[test]
fn user2_gains_follow_gamma_laws() {
    let (m, n) = (4, 3);
    let (x, _) = gains(m, n, 200_000, 21);
    for (i, xs) in x.iter().enumerate() {
        let k = m - i;
        for t in deciles(xs) {
            let gap = (empirical_cdf(xs, t) - gamma_cdf(k, t)).abs();
            assert!(gap < 0.01, "x_{} at {t}: gap {gap}", i + 1);
        }
    }
}

#[test]
fn user1_gain_is_exponential_for_any_m() {
    let count = 1_000_000;
    let (_, z_square) = gains(3, 3, count, 31);
    let (_, z_tall) = gains(6, 3, count, 32);
    for i in 0..3 {
        for t in deciles(&z_square[i]) {
            let a = empirical_cdf(&z_square[i], t);
            let b = empirical_cdf(&z_tall[i], t);
            assert!((a - b).abs() < 0.01, "layer {} at {t}: {a} vs {b}", i + 1);
            assert!((a - (1.0 - (-t).exp())).abs() < 0.01);
        }
    }
}

#[test]
fn user2_gains_are_uncorrelated() {
    let count = 200_000;
    let mut rng = StreamRng::new(41, 0);
    let mut x = vec![Vec::with_capacity(count); 3];
    for _ in 0..count {
        let ch = sample_channel::<f64>(3, 3, &mut rng).unwrap();
        let eff = build_effective_channel(&ch).unwrap();
        for i in 0..3 {
            x[i].push(eff.x[i]);
        }
    }
    let corr = |a: &[f64], b: &[f64]| {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a
            .iter()
            .zip(b)
            .map(|(p, q)| (p - ma) * (q - mb))
            .sum::<f64>()
            / n;
        let va: f64 = a.iter().map(|p| (p - ma).powi(2)).sum::<f64>() / n;
        let vb: f64 = b.iter().map(|q| (q - mb).powi(2)).sum::<f64>() / n;
        cov / (va * vb).sqrt()
    };
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let r = corr(&x[i], &x[j]);
        assert!(r.abs() < 0.01, "corr(x_{}, x_{}) = {r}", i + 1, j + 1);
    }
}
