//! The core run at single precision against double precision and the closed forms.

use mimo_noma::analytics::user1_outage_policy2;
use mimo_noma::channel::{sample_matrix, StreamRng};
use mimo_noma::matrixkit::qr_decompose;
use mimo_noma::simulator::{run_point, simulate_trial};
use mimo_noma::{Config32, Config64, Matrix32, Policy};

#[test]
fn single_precision_qr_is_orthonormal() {
    let mut rng = StreamRng::new(3, 0);
    for _ in 0..200 {
        let a: Matrix32 = sample_matrix(4, 3, &mut rng);
        let qr = qr_decompose(&a).unwrap();
        let qhq = qr.q.hermitian().matmul(&qr.q).unwrap();
        assert!(qhq.sub(&Matrix32::identity(4)).unwrap().max_abs() < 1e-5);
        assert!(qr.q.matmul(&qr.r).unwrap().sub(&a).unwrap().max_abs() < 1e-5);
    }
}

#[test]
fn single_and_double_precision_agree_per_trial() {
    let c32 = Config32::new(3, 3, 1.0, 2.0, Policy::Two).unwrap().with_grid(vec![15.0]);
    let c64 = Config64::new(3, 3, 1.0, 2.0, Policy::Two).unwrap().with_grid(vec![15.0]);
    let trials = 20_000;
    let mut differ = 0;
    for t in 0..trials {
        let (a, _) = simulate_trial(&c32, 0, t).unwrap();
        let (b, _) = simulate_trial(&c64, 0, t).unwrap();
        differ += usize::from(a != b);
    }
    // only draws within rounding distance of a threshold may flip
    assert!(differ <= 5, "{differ} of {trials} trials differ");
}

#[test]
fn single_precision_user1_outage_matches_closed_form() {
    let trials = 200_000;
    let cfg = Config32::new(3, 3, 1.0, 2.0, Policy::Two)
        .unwrap()
        .with_grid(vec![10.0])
        .with_trials(trials);
    let point = run_point(&cfg, 0, 0).unwrap();
    let exact = user1_outage_policy2(1.0, 10.0);
    for est in point.user1.unwrap() {
        assert!(est.within_sigmas(exact, 4.0), "{} vs {exact}", est.p_hat);
    }
}
