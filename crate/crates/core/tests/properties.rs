//! Invariants over randomized inputs.

use mimo_noma::allocation::{
    feasibility_range, policy_one_beta, policy_two_beta, OutageTarget, PowerCoefficients,
    RateTargets,
};
use mimo_noma::analytics::{
    gamma_ratio, gamma_ratio_complement, policy_one_thresholds, user1_outage_policy1,
    user2_outage_policy1_approx, user2_outage_policy1_exact,
};
use mimo_noma::channel::{sample_channel, StreamRng};
use mimo_noma::link::{realize_outcome, superposed_sinr, user2_sic_chain};
use mimo_noma::matrixkit::qr_decompose;
use mimo_noma::simulator::{run_point, simulate_trial, OutageEstimate};
use mimo_noma::{Config64, Matrix64, Policy};
use num_complex::Complex;
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize, entries: &[(f64, f64)]) -> Matrix64 {
    let data = entries
        .iter()
        .take(rows * cols)
        .map(|&(a, b)| Complex::new(a, b))
        .collect();
    Matrix64::from_row_major(rows, cols, data).unwrap()
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Regularized lower incomplete gamma by composite Gauss–Legendre quadrature.
fn gamma_oracle(k: usize, t: f64) -> f64 {
    let rule = gauss_legendre(32);
    let panels = 40;
    let h = t / panels as f64;
    let log_norm: f64 = (1..k).map(|j| (j as f64).ln()).sum();
    let f = |s: f64| {
        if s == 0.0 {
            if k == 1 {
                1.0
            } else {
                0.0
            }
        } else {
            ((k as f64 - 1.0) * s.ln() - s - log_norm).exp()
        }
    };
    (0..panels)
        .map(|p| {
            let (a, b) = (p as f64 * h, (p + 1) as f64 * h);
            rule.iter()
                .map(|&(x, w)| w * f(0.5 * (b - a) * x + 0.5 * (a + b)))
                .sum::<f64>()
                * 0.5
                * (b - a)
        })
        .sum()
}

#[test]
fn gamma_ratio_against_quadrature_grid() {
    for k in 1..=10 {
        for i in 1..=200 {
            let t = i as f64 * 0.1;
            let diff = (gamma_ratio(k, t) - gamma_oracle(k, t)).abs();
            assert!(diff < 1e-10, "k {k} t {t}: {diff}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn qr_invariants(
        rows in 1usize..7,
        extra in 0usize..3,
        entries in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 64),
    ) {
        let cols = rows.saturating_sub(extra).max(1);
        let a = matrix(rows, cols, &entries);
        let qr = qr_decompose(&a).unwrap();
        let qhq = qr.q.hermitian().matmul(&qr.q).unwrap();
        prop_assert!(qhq.sub(&Matrix64::identity(rows)).unwrap().max_abs() < 1e-10);
        prop_assert!(qr.q.matmul(&qr.r).unwrap().sub(&a).unwrap().max_abs() < 1e-10);
        for i in 0..rows {
            for j in 0..cols.min(i) {
                prop_assert_eq!(qr.r[(i, j)], Complex::new(0.0, 0.0));
            }
            if i < cols {
                prop_assert!(qr.r[(i, i)].im == 0.0 && qr.r[(i, i)].re >= 0.0);
            }
        }
    }

    #[test]
    fn gamma_pair_sums_to_one(k in 1usize..12, t in 0.0f64..60.0) {
        let p = gamma_ratio(k, t);
        let q = gamma_ratio_complement(k, t);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((p + q - 1.0).abs() < 1e-12);
        prop_assert!(gamma_ratio(k + 1, t) <= p + 1e-15);
    }

    #[test]
    fn policy_one_share_closes_the_loop(eps in 0.1f64..15.0, rho_db in 0.0f64..50.0, u in 0.001f64..0.999) {
        let rho = 10f64.powf(rho_db / 10.0);
        let (lower, _) = feasibility_range(eps, rho);
        let target = lower + u * (1.0 - lower);
        prop_assume!(target > lower && target < 1.0);
        let b = policy_one_beta(eps, rho, target).unwrap();
        prop_assert!(b >= 0.0 && b < 1.0 / (1.0 + eps));
        let p = user1_outage_policy1(eps, rho, b);
        prop_assert!((p - target).abs() < 1e-9 * target.max(1e-3), "{p} vs {target}");
    }

    #[test]
    fn policy_two_share_is_bounded_and_meets_user1(
        z in 1e-4f64..50.0, x in 1e-4f64..50.0, eps in 0.1f64..15.0, rho_db in 0.0f64..50.0,
    ) {
        let rho = 10f64.powf(rho_db / 10.0);
        let b = policy_two_beta(z, x, eps, rho);
        prop_assert!(b >= 0.0 && b <= 1.0 / (1.0 + eps) + 1e-15);
        // user 1 succeeds exactly when its gain clears eps/rho
        let sinr = superposed_sinr(1.0 - b, b, z, rho);
        if z >= eps / rho * (1.0 + 1e-9) {
            prop_assert!(sinr >= eps * (1.0 - 1e-9));
        } else if z < eps / rho * (1.0 - 1e-9) {
            prop_assert!(sinr < eps);
        }
    }

    #[test]
    fn sic_chain_is_prefix_closed(
        x in prop::collection::vec(1e-5f64..20.0, 1..6),
        beta in 0.0f64..0.5,
        rho_db in 0.0f64..50.0,
    ) {
        let n = x.len();
        let rates = RateTargets::uniform(n, 1.0, 2.0).unwrap();
        let coeffs = PowerCoefficients::from_beta_sq(vec![beta; n]).unwrap();
        let ok = user2_sic_chain(&x, &coeffs, &rates, 10f64.powf(rho_db / 10.0));
        for w in ok.windows(2) {
            prop_assert!(w[0] || !w[1]);
        }
    }

    #[test]
    fn policy_one_user2_thresholds_match_chain(
        x in prop::collection::vec(1e-5f64..5.0, 3),
        rho_db in 0.0f64..40.0,
    ) {
        let rho = 10f64.powf(rho_db / 10.0);
        let rates = RateTargets::uniform(3, 1.0, 2.0).unwrap();
        let coeffs = PowerCoefficients::from_beta_sq(vec![0.25; 3]).unwrap();
        let ok = user2_sic_chain(&x, &coeffs, &rates, rho);
        let g = policy_one_thresholds(&rates, &coeffs, rho);
        let mut chain = true;
        for i in 0..3 {
            let gi = g[i].binding();
            prop_assume!((x[i] - gi).abs() > 1e-7 * gi);
            chain = chain && x[i] > gi;
            prop_assert_eq!(ok[i], chain);
        }
    }

    #[test]
    fn outcomes_improve_with_snr(seed in 0u64..1000, db in 0.0f64..40.0) {
        let cfg = Config64::new(3, 3, 1.0, 2.0, Config64::policy_one_coupled(3, 2.0))
            .unwrap()
            .with_grid(vec![db, db + 5.0]);
        let ch = sample_channel::<f64>(3, 3, &mut StreamRng::new(seed, 9)).unwrap();
        let lo = realize_outcome(&ch, &cfg, cfg.rho_linear(0)).unwrap();
        let hi = realize_outcome(&ch, &cfg, cfg.rho_linear(1)).unwrap();
        for (a, b) in lo.user2_ok.iter().zip(&hi.user2_ok) {
            prop_assert!(!a || *b);
        }
        for (a, b) in lo.user1_ok.unwrap().iter().zip(&hi.user1_ok.unwrap()) {
            prop_assert!(!a || *b);
        }
    }

    #[test]
    fn approximation_tracks_exact_at_small_thresholds(beta in 0.05f64..0.45, rho_db in 20.0f64..50.0, layer in 0usize..3) {
        let rho = 10f64.powf(rho_db / 10.0);
        let rates = RateTargets::uniform(3, 1.0, 2.0).unwrap();
        let coeffs = PowerCoefficients::from_beta_sq(vec![beta; 3]).unwrap();
        let g = policy_one_thresholds(&rates, &coeffs, rho)[layer].binding();
        prop_assume!(g < 0.05);
        let exact = user2_outage_policy1_exact(layer, 3, &rates, &coeffs, rho).unwrap();
        let approx = user2_outage_policy1_approx(layer, 3, &rates, &coeffs, rho).unwrap();
        prop_assert!((approx - exact).abs() / exact < 0.1, "{approx} vs {exact}");
    }
}

#[test]
fn single_trial_point_matches_hand_trace() {
    let cfg = Config64::new(3, 2, 1.0, 2.0, Policy::Two)
        .unwrap()
        .with_grid(vec![10.0])
        .with_trials(1);
    let point = run_point(&cfg, 0, 1).unwrap();
    let (outcome, _) = simulate_trial(&cfg, 0, 0).unwrap();
    let fails: Vec<u64> = outcome.user2_ok.iter().map(|&ok| u64::from(!ok)).collect();
    assert_eq!(
        point.user2.iter().map(|e| e.failures).collect::<Vec<_>>(),
        fails
    );
    let u1: Vec<u64> = outcome
        .user1_ok
        .unwrap()
        .iter()
        .map(|&ok| u64::from(!ok))
        .collect();
    assert_eq!(
        point
            .user1
            .unwrap()
            .iter()
            .map(|e| e.failures)
            .collect::<Vec<_>>(),
        u1
    );
}

#[test]
fn bernoulli_interval_coverage() {
    let (p, n, reps) = (0.05, 10_000u64, 200);
    let mut covered = 0;
    for r in 0..reps {
        let mut rng = StreamRng::new(2024, r);
        let failures = (0..n).filter(|_| rng.uniform() < p).count() as u64;
        let est = OutageEstimate::from_counts(failures, n);
        covered += usize::from((est.p_hat - p).abs() <= 3.0 * est.std_err);
    }
    assert!(
        covered as f64 >= 0.99 * reps as f64,
        "coverage {covered}/{reps}"
    );
}

#[test]
fn snr_coupled_targets_stay_feasible() {
    for db in [0.0, 10.0, 30.0, 50.0] {
        let rho = 10f64.powf(db / 10.0);
        let t = OutageTarget::SnrCoupled { multiplier: 2.0 };
        let (lower, _) = feasibility_range(3.0, rho);
        assert!(t.value(3.0, rho) > lower);
    }
}
