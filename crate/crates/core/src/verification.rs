//! Named self-checks comparing simulation against closed forms, bounds,
//! diversity orders and numerical invariants.
//!
//! Each group runs at fixed reference parameters; only the trial count, the
//! seed and the worker count come from [`VerifyOptions`]. Sweeps shared by
//! several groups are computed once per [`Verifier`].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::allocation::{policy_one_coefficients, OutageTarget};
use crate::analytics::{
    diversity_slope, gamma_ratio, policy_one_thresholds, user2_outage_policy1_approx,
    user2_outage_policy1_exact, AnalyticCurve,
};
use crate::benchmarks::{sa_noma_detection, zf_noma_sinr, zf_noma_snr};
use crate::channel::{sample_matrix, zf_gains_direct, ChannelPair, StreamRng};
use crate::config::{db_grid, db_to_linear, Detector, Policy, Scheme, SystemConfig};
use crate::error::{Error, Result};
use crate::link::realize;
use crate::matrixkit::{qr_decompose, ComplexMatrix};
use crate::report::{render_outage_csv, User};
use crate::simulator::{
    gain_statistics, run_sweep, with_regular_channel, OutageEstimate, SweepResult,
};

/// Independent groups of checks, selectable by tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckGroup {
    /// Moments of the effective gains against their Gamma and exponential laws.
    Distributions,
    /// Policy-I user-1 outage against its configured target.
    User1Target,
    /// Policy-II user-1 outage against `1 - e^{-eps/rho}`, plus a per-trial audit.
    User1Exact,
    /// Policy-I user-2 outage against the exact formula and its approximation.
    User2Exact,
    /// Log-log slopes over 25–40 dB.
    Diversity,
    /// Policy-II user-2 outage inside its lower and upper bounds.
    Bounds,
    /// SA-NOMA and ZF-NOMA per-realization SINR/SNR agreement.
    Equivalence,
    /// Proposed scheme against ZF-NOMA and MIMO-OMA at 30 dB.
    Ordering,
    /// Error floor of the QR user-1 detector.
    QrFloor,
    /// QR factor invariants and the incomplete gamma function.
    Unit,
    /// Byte-identical CSV across reruns and worker counts.
    Reproducibility,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 11] = [
        CheckGroup::Distributions,
        CheckGroup::User1Target,
        CheckGroup::User1Exact,
        CheckGroup::User2Exact,
        CheckGroup::Diversity,
        CheckGroup::Bounds,
        CheckGroup::Equivalence,
        CheckGroup::Ordering,
        CheckGroup::QrFloor,
        CheckGroup::Unit,
        CheckGroup::Reproducibility,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            CheckGroup::Distributions => "distributions",
            CheckGroup::User1Target => "user1-target",
            CheckGroup::User1Exact => "user1-exact",
            CheckGroup::User2Exact => "user2-exact",
            CheckGroup::Diversity => "diversity",
            CheckGroup::Bounds => "bounds",
            CheckGroup::Equivalence => "equivalence",
            CheckGroup::Ordering => "ordering",
            CheckGroup::QrFloor => "qr-floor",
            CheckGroup::Unit => "unit",
            CheckGroup::Reproducibility => "reproducibility",
        }
    }
}

impl fmt::Display for CheckGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for CheckGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckGroup::ALL
            .into_iter()
            .find(|g| g.tag() == s)
            .ok_or_else(|| {
                let known: Vec<_> = CheckGroup::ALL.iter().map(|g| g.tag()).collect();
                Error::InvalidConfig(format!("unknown check group '{s}' ({})", known.join(", ")))
            })
    }
}

/// Deliberate defects used to confirm that the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Policy-I shares computed with a doubled target multiplier.
    WrongBeta,
}

/// Outcome of a single check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub group: CheckGroup,
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub tolerance: String,
    pub passed: bool,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] {}: expected {}, observed {}, tolerance {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.group,
            self.name,
            self.expected,
            self.observed,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Monte Carlo trials per grid point (and samples for the distribution checks).
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            trials: crate::config::DEFAULT_TRIALS,
            seed: crate::config::DEFAULT_SEED,
            workers: 0,
            fault: None,
        }
    }
}

/// Runs check groups, caching sweeps shared between them.
pub struct Verifier {
    opts: VerifyOptions,
    cache: HashMap<String, SweepResult>,
}

const SIGMAS: f64 = 3.0;
const SLOPE_WINDOW: (f64, f64) = (25.0, 40.0);

fn e(v: f64) -> String {
    format!("{v:.4e}")
}

fn report(
    group: CheckGroup,
    name: String,
    expected: String,
    observed: String,
    tolerance: String,
    passed: bool,
) -> CheckReport {
    CheckReport {
        group,
        name,
        expected,
        observed,
        tolerance,
        passed,
    }
}

fn sigma_check(
    group: CheckGroup,
    name: String,
    est: &OutageEstimate,
    reference: f64,
) -> CheckReport {
    let tol = SIGMAS * est.sigma_against(reference);
    report(
        group,
        name,
        e(reference),
        e(est.p_hat),
        format!("3 sigma = {}", e(tol)),
        est.within_sigmas(reference, SIGMAS),
    )
}

fn policy_one_config(
    m: usize,
    r2: f64,
    multiplier: f64,
    grid: Vec<f64>,
) -> Result<SystemConfig<f64>> {
    Ok(SystemConfig::new(
        m,
        3,
        1.0,
        r2,
        SystemConfig::policy_one_coupled(3, multiplier),
    )?
    .with_grid(grid))
}

fn policy_two_config(m: usize, grid: Vec<f64>) -> Result<SystemConfig<f64>> {
    Ok(SystemConfig::new(m, 3, 1.0, 2.0, Policy::Two)?.with_grid(grid))
}

fn grid_index(cfg: &SystemConfig<f64>, db: f64) -> usize {
    cfg.rho_grid_db
        .iter()
        .position(|&d| (d - db).abs() < 1e-9)
        .expect("grid contains the requested point")
}

impl Verifier {
    pub fn new(opts: VerifyOptions) -> Self {
        Self {
            opts,
            cache: HashMap::new(),
        }
    }

    pub fn options(&self) -> &VerifyOptions {
        &self.opts
    }

    fn sweep(&mut self, cfg: SystemConfig<f64>) -> Result<SweepResult> {
        let cfg = cfg.with_trials(self.opts.trials).with_seed(self.opts.seed);
        let key = format!("{cfg:?}");
        if let Some(s) = self.cache.get(&key) {
            return Ok(s.clone());
        }
        let s = run_sweep(&cfg, self.opts.workers)?;
        self.cache.insert(key, s.clone());
        Ok(s)
    }

    /// Runs the requested groups in order and concatenates their reports.
    pub fn run_groups(&mut self, groups: &[CheckGroup]) -> Result<Vec<CheckReport>> {
        let mut out = Vec::new();
        for &g in groups {
            out.extend(self.run(g)?);
        }
        Ok(out)
    }

    pub fn run(&mut self, group: CheckGroup) -> Result<Vec<CheckReport>> {
        match group {
            CheckGroup::Distributions => self.distributions(),
            CheckGroup::User1Target => self.user1_target(),
            CheckGroup::User1Exact => self.user1_exact(),
            CheckGroup::User2Exact => self.user2_exact(),
            CheckGroup::Diversity => self.diversity(),
            CheckGroup::Bounds => self.bounds(),
            CheckGroup::Equivalence => self.equivalence(),
            CheckGroup::Ordering => self.ordering(),
            CheckGroup::QrFloor => self.qr_floor(),
            CheckGroup::Unit => Ok(self.unit()),
            CheckGroup::Reproducibility => self.reproducibility(),
        }
    }

    fn distributions(&mut self) -> Result<Vec<CheckReport>> {
        let g = CheckGroup::Distributions;
        let mut out = Vec::new();
        for m in [3, 4, 6] {
            let stats = gain_statistics::<f64>(
                m,
                3,
                self.opts.trials.max(2),
                self.opts.seed,
                self.opts.workers,
            )?;
            for i in 0..3 {
                let mut push = |name: String, expected: f64, observed: f64, se: f64| {
                    let tol = SIGMAS * se;
                    out.push(report(
                        g,
                        name,
                        e(expected),
                        e(observed),
                        format!("3 sigma = {}", e(tol)),
                        (observed - expected).abs() <= tol,
                    ));
                };
                let k = (m - i) as f64;
                let x = stats.x[i];
                push(format!("M={m} x_{} mean", i + 1), k, x.mean, x.mean_std_err);
                push(
                    format!("M={m} x_{} variance", i + 1),
                    k,
                    x.variance,
                    x.variance_std_err,
                );
                let z = stats.z[i];
                push(
                    format!("M={m} z_{} mean", i + 1),
                    1.0,
                    z.mean,
                    z.mean_std_err,
                );
                push(
                    format!("M={m} z_{} variance", i + 1),
                    1.0,
                    z.variance,
                    z.variance_std_err,
                );
            }
        }
        Ok(out)
    }

    fn policy_one_sweep(&mut self, multiplier: f64) -> Result<(SystemConfig<f64>, SweepResult)> {
        let cfg = policy_one_config(3, 2.0, multiplier, db_grid(10.0, 40.0, 5.0)?)?;
        let s = self.sweep(cfg.clone())?;
        Ok((cfg, s))
    }

    fn policy_two_sweep(&mut self, m: usize) -> Result<(SystemConfig<f64>, SweepResult)> {
        let grid = if m == 3 {
            db_grid(0.0, 50.0, 5.0)?
        } else {
            db_grid(25.0, 40.0, 5.0)?
        };
        let cfg = policy_two_config(m, grid)?;
        let s = self.sweep(cfg.clone())?;
        Ok((cfg, s))
    }

    fn user1_target(&mut self) -> Result<Vec<CheckReport>> {
        let g = CheckGroup::User1Target;
        let multiplier = 2.0;
        let (cfg, sweep) = match self.opts.fault {
            Some(Fault::WrongBeta) => {
                let cfg = policy_one_config(3, 2.0, 2.0 * multiplier, vec![10.0, 20.0, 30.0])?;
                let s = self.sweep(cfg.clone())?;
                (cfg, s)
            }
            None => self.policy_one_sweep(multiplier)?,
        };
        let mut out = Vec::new();
        for db in [10.0, 20.0, 30.0] {
            let k = grid_index(&cfg, db);
            let rho = db_to_linear(db);
            let est = sweep.points[k]
                .estimate
                .user1
                .as_ref()
                .expect("proposed scheme serves user 1");
            for (i, &eps) in cfg.rates.eps1().iter().enumerate() {
                let target = 1.0 - (-multiplier * eps / rho).exp();
                out.push(sigma_check(
                    g,
                    format!("{db} dB layer {} outage = target", i + 1),
                    &est[i],
                    target,
                ));
            }
        }
        Ok(out)
    }

    fn user1_exact(&mut self) -> Result<Vec<CheckReport>> {
        let g = CheckGroup::User1Exact;
        let (cfg, sweep) = self.policy_two_sweep(3)?;
        let mut out = Vec::new();
        for (k, p) in sweep.points.iter().enumerate() {
            let rho = cfg.rho_linear(k);
            let est = p
                .estimate
                .user1
                .as_ref()
                .expect("proposed scheme serves user 1");
            for (i, &eps) in cfg.rates.eps1().iter().enumerate() {
                let exact = -(-eps / rho).exp_m1();
                out.push(sigma_check(
                    g,
                    format!(
                        "{} dB layer {} outage = 1 - exp(-eps/rho)",
                        p.estimate.rho_db,
                        i + 1
                    ),
                    &est[i],
                    exact,
                ));
            }
        }

        // per-trial audit: failure exactly when z_i < eps / rho
        let audit_cfg = policy_two_config(3, vec![10.0])?.with_seed(self.opts.seed);
        let rho = audit_cfg.rho_linear(0);
        let audited = self.opts.trials.min(100_000);
        let mut mismatches = 0u64;
        for t in 0..audited {
            let mut rng = StreamRng::for_trial(audit_cfg.seed, 0, t);
            let (r, _) = with_regular_channel(3, 3, &mut rng, |ch| realize(ch, &audit_cfg, rho))?;
            let eff = r
                .effective
                .as_ref()
                .expect("proposed scheme keeps the effective channel");
            let ok = r
                .outcome
                .user1_ok
                .as_ref()
                .expect("proposed scheme serves user 1");
            for i in 0..3 {
                let predicted_fail = eff.z[i] < audit_cfg.rates.eps1()[i] / rho;
                mismatches += u64::from(predicted_fail == ok[i]);
            }
        }
        out.push(report(
            g,
            format!("per-trial failure iff z < eps/rho over {audited} trials at 10 dB"),
            "0 mismatches".into(),
            format!("{mismatches} mismatches"),
            "exact".into(),
            mismatches == 0,
        ));
        Ok(out)
    }

    fn user2_exact(&mut self) -> Result<Vec<CheckReport>> {
        let g = CheckGroup::User2Exact;
        let mut out = Vec::new();
        for multiplier in [2.0, 10.0] {
            let (cfg, sweep) = self.policy_one_sweep(multiplier)?;
            let targets = match &cfg.policy {
                Policy::One { targets } => targets.clone(),
                Policy::Two => unreachable!("policy-I sweep"),
            };
            for (k, p) in sweep.points.iter().enumerate() {
                let rho = cfg.rho_linear(k);
                let coeffs = policy_one_coefficients(&cfg.rates, &targets, rho)?;
                let thresholds = policy_one_thresholds(&cfg.rates, &coeffs, rho);
                for i in 0..cfg.n {
                    let exact = user2_outage_policy1_exact(i, cfg.m, &cfg.rates, &coeffs, rho)?;
                    out.push(sigma_check(
                        g,
                        format!(
                            "x={multiplier} {} dB layer {} outage = exact formula",
                            p.estimate.rho_db,
                            i + 1
                        ),
                        &p.estimate.user2[i],
                        exact,
                    ));
                    let gi = thresholds[i].binding();
                    if gi < 0.05 {
                        let approx =
                            user2_outage_policy1_approx(i, cfg.m, &cfg.rates, &coeffs, rho)?;
                        let rel = (approx - exact).abs() / exact;
                        out.push(report(
                            g,
                            format!(
                                "x={multiplier} {} dB layer {} approximation (g = {gi:.3e})",
                                p.estimate.rho_db,
                                i + 1
                            ),
                            e(exact),
                            e(approx),
                            "15% relative".into(),
                            rel <= 0.15,
                        ));
                    }
                }
            }
        }
        Ok(out)
    }

    fn diversity(&mut self) -> Result<Vec<CheckReport>> {
        let g = CheckGroup::Diversity;
        let mut out = Vec::new();
        let slope_report = |name: String, slope: Result<f64>, expected: f64, tol: f64| match slope {
            Ok(s) => report(
                g,
                name,
                format!("{expected}"),
                format!("{s:.3}"),
                format!("+/- {tol}"),
                (s - expected).abs() <= tol,
            ),
            Err(err) => report(
                g,
                name,
                format!("{expected}"),
                format!("unavailable: {err}"),
                format!("+/- {tol}"),
                false,
            ),
        };

        // user 2, policy I, from the exact closed form
        let cfg = policy_one_config(3, 2.0, 2.0, db_grid(25.0, 40.0, 5.0)?)?;
        let targets = vec![OutageTarget::SnrCoupled { multiplier: 2.0 }; 3];
        let grid: Vec<f64> = cfg.rho_grid_db.iter().map(|&d| db_to_linear(d)).collect();
        let curve = AnalyticCurve::evaluate(grid, 3, |l, rho| {
            let coeffs = policy_one_coefficients(&cfg.rates, &targets, rho)?;
            user2_outage_policy1_exact(l, 3, &cfg.rates, &coeffs, rho)
        })?;
        for i in 0..3 {
            out.push(slope_report(
                format!("user 2 policy I layer {} (exact curve, M=3)", i + 1),
                curve.slope(i, SLOPE_WINDOW),
                (3 - i) as f64,
                0.5,
            ));
        }

        let (_, s3) = self.policy_two_sweep(3)?;
        let rho3 = s3.rho_linear();
        for i in 0..3 {
            let u1 = s3.user1_curve(i).expect("proposed scheme serves user 1");
            out.push(slope_report(
                format!("user 1 policy II layer {} (simulated, M=3)", i + 1),
                diversity_slope(&rho3, &u1, SLOPE_WINDOW),
                1.0,
                0.3,
            ));
        }
        for m in [3, 6] {
            let (_, s) = self.policy_two_sweep(m)?;
            let rho = s.rho_linear();
            for i in 0..3 {
                out.push(slope_report(
                    format!("user 2 policy II layer {} (simulated, M={m})", i + 1),
                    diversity_slope(&rho, &s.user2_curve(i), SLOPE_WINDOW),
                    1.0,
                    0.3,
                ));
            }
        }
        Ok(out)
    }

    fn bounds(&mut self) -> Result<Vec<CheckReport>> {
        let g = CheckGroup::Bounds;
        let (_, sweep) = self.policy_two_sweep(3)?;
        let mut out = Vec::new();
        for p in &sweep.points {
            for (i, (est, ov)) in p.estimate.user2.iter().zip(&p.overlay.user2).enumerate() {
                let lower = ov.lower.expect("policy II carries bounds");
                let upper = ov.upper.expect("policy II carries bounds");
                let lo = lower - SIGMAS * est.sigma_against(lower);
                let hi = upper + SIGMAS * est.sigma_against(upper);
                out.push(report(
                    g,
                    format!("{} dB layer {} inside bounds", p.estimate.rho_db, i + 1),
                    format!("[{}, {}]", e(lower), e(upper)),
                    e(est.p_hat),
                    "3 sigma outside each bound".into(),
                    est.p_hat >= lo && est.p_hat <= hi,
                ));
            }
        }
        Ok(out)
    }

    fn equivalence(&mut self) -> Result<Vec<CheckReport>> {
        let g = CheckGroup::Equivalence;
        let (alpha_sq, beta_sq, rho) = (0.75, 0.25, 100.0);
        let (mut sinr_dev, mut snr_dev) = (0.0f64, 0.0f64);
        let realizations = 1000;
        for t in 0..realizations {
            let mut rng = StreamRng::for_trial(self.opts.seed, 0, t);
            let ((sa, zf), _) = with_regular_channel(3, 3, &mut rng, |ch: &ChannelPair<f64>| {
                Ok((sa_noma_detection(ch)?, zf_gains_direct(&ch.h2)?))
            })?;
            for i in 0..3 {
                let a = sa.user2_sinr(i, alpha_sq, beta_sq, rho);
                let b = zf_noma_sinr(zf[i], alpha_sq, beta_sq, rho);
                sinr_dev = sinr_dev.max((a - b).abs() / b);
                let a = sa.user2_snr(i, beta_sq, rho);
                let b = zf_noma_snr(zf[i], beta_sq, rho);
                snr_dev = snr_dev.max((a - b).abs() / b);
            }
        }
        Ok(vec![
            report(
                g,
                format!("max relative SINR deviation over {realizations} channels"),
                "0".into(),
                e(sinr_dev),
                "1e-8".into(),
                sinr_dev < 1e-8,
            ),
            report(
                g,
                format!("max relative SNR deviation over {realizations} channels"),
                "0".into(),
                e(snr_dev),
                "1e-8".into(),
                snr_dev < 1e-8,
            ),
        ])
    }

    fn ordering(&mut self) -> Result<Vec<CheckReport>> {
        let g = CheckGroup::Ordering;
        let mut out = Vec::new();
        for (m, other) in [(3, Scheme::ZfNoma), (6, Scheme::MimoOma)] {
            let base = policy_one_config(m, 4.0, 2.0, vec![30.0])?;
            let noma = self.sweep(base.clone())?;
            let bench = self.sweep(base.with_scheme(other))?;
            for i in 0..3 {
                let a = noma.points[0].estimate.user2[i];
                let b = bench.points[0].estimate.user2[i];
                let sigma = (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
                let gap = b.p_hat - a.p_hat;
                out.push(report(
                    g,
                    format!("M={m} 30 dB layer {} proposed below {other}", i + 1),
                    format!("{other} - proposed > 3 sigma"),
                    format!("{} - {} = {}", e(b.p_hat), e(a.p_hat), e(gap)),
                    format!("3 sigma = {}", e(SIGMAS * sigma)),
                    gap > SIGMAS * sigma,
                ));
            }
        }
        Ok(out)
    }

    fn qr_floor(&mut self) -> Result<Vec<CheckReport>> {
        let g = CheckGroup::QrFloor;
        let base = policy_one_config(3, 2.0, 2.0, vec![30.0, 50.0])?;
        let mut out = Vec::new();
        for (det, limit, below) in [
            (Detector::QrLayered, 3.0, true),
            (Detector::ZeroForcing, 50.0, false),
        ] {
            let s = self.sweep(base.clone().with_detector(det))?;
            let p30 = s.points[0].estimate.user1.as_ref().expect("served")[0].p_hat;
            let p50 = s.points[1].estimate.user1.as_ref().expect("served")[0].p_hat;
            let ratio = if p50 > 0.0 { p30 / p50 } else { f64::INFINITY };
            let passed = if below { ratio < limit } else { ratio > limit };
            out.push(report(
                g,
                format!("{} detector layer 1 outage ratio 30 dB / 50 dB", det.tag()),
                format!("{} {limit}", if below { "<" } else { ">" }),
                format!("{} / {} = {ratio:.3}", e(p30), e(p50)),
                "strict".into(),
                passed,
            ));
        }
        Ok(out)
    }

    fn unit(&self) -> Vec<CheckReport> {
        let g = CheckGroup::Unit;
        let mut rng = StreamRng::new(self.opts.seed, u64::MAX);
        let (mut orth, mut recon, mut shape_ok) = (0.0f64, 0.0f64, true);
        let shapes = [(4, 3), (3, 3), (6, 3), (3, 1)];
        for k in 0..1000 {
            let (rows, cols) = shapes[k % shapes.len()];
            let a: ComplexMatrix<f64> = sample_matrix(rows, cols, &mut rng);
            let qr = match qr_decompose(&a) {
                Ok(qr) => qr,
                Err(_) => {
                    shape_ok = false;
                    continue;
                }
            };
            let qhq = qr.q.hermitian().matmul(&qr.q).expect("square");
            orth = orth.max(
                qhq.sub(&ComplexMatrix::identity(rows))
                    .expect("same shape")
                    .max_abs(),
            );
            recon = recon.max(
                qr.q.matmul(&qr.r)
                    .expect("conformant")
                    .sub(&a)
                    .expect("same shape")
                    .max_abs(),
            );
            for i in 0..rows {
                for j in 0..cols.min(i) {
                    shape_ok &= qr.r[(i, j)].norm() == 0.0;
                }
                if i < cols {
                    shape_ok &= qr.r[(i, i)].im == 0.0 && qr.r[(i, i)].re >= 0.0;
                }
            }
        }
        let mut gamma_dev = 0.0f64;
        for k in 1..=10 {
            for t in [
                1e-3, 0.01, 0.1, 0.5, 1.0, 2.0, 3.5, 5.0, 7.5, 10.0, 15.0, 20.0,
            ] {
                gamma_dev = gamma_dev.max((gamma_ratio(k, t) - gamma_by_quadrature(k, t)).abs());
            }
        }
        vec![
            report(
                g,
                "QR q^H q = I over 1000 matrices".into(),
                "0".into(),
                e(orth),
                "1e-10".into(),
                orth < 1e-10,
            ),
            report(
                g,
                "QR q r = A over 1000 matrices".into(),
                "0".into(),
                e(recon),
                "1e-10".into(),
                recon < 1e-10,
            ),
            report(
                g,
                "QR r upper triangular with real non-negative diagonal".into(),
                "true".into(),
                shape_ok.to_string(),
                "exact".into(),
                shape_ok,
            ),
            report(
                g,
                "regularized gamma vs quadrature, k <= 10, t <= 20".into(),
                "0".into(),
                e(gamma_dev),
                "1e-10".into(),
                gamma_dev < 1e-10,
            ),
        ]
    }

    fn reproducibility(&mut self) -> Result<Vec<CheckReport>> {
        let g = CheckGroup::Reproducibility;
        let cfg = policy_two_config(3, vec![0.0, 10.0, 20.0])?
            .with_trials(self.opts.trials.min(20_000))
            .with_seed(self.opts.seed);
        let render = |workers: usize| -> Result<String> {
            let s = run_sweep(&cfg, workers)?;
            Ok(format!(
                "{}{}",
                render_outage_csv(&s, User::One).unwrap_or_default(),
                render_outage_csv(&s, User::Two).unwrap_or_default()
            ))
        };
        let first = render(1)?;
        let again = render(1)?;
        let wide = render(4)?;
        Ok(vec![
            report(
                g,
                "rerun with identical seed and config".into(),
                "identical bytes".into(),
                if first == again {
                    "identical"
                } else {
                    "different"
                }
                .into(),
                "exact".into(),
                first == again,
            ),
            report(
                g,
                "1 worker vs 4 workers".into(),
                "identical bytes".into(),
                if first == wide {
                    "identical"
                } else {
                    "different"
                }
                .into(),
                "exact".into(),
                first == wide,
            ),
        ])
    }
}

/// `int_0^t s^{k-1} e^{-s} ds / (k-1)!` by adaptive Simpson quadrature.
pub fn gamma_by_quadrature(k: usize, t: f64) -> f64 {
    let norm: f64 = (1..k).map(|j| j as f64).product();
    let f = |s: f64| s.powi(k as i32 - 1) * (-s).exp() / norm;
    adaptive_simpson(&f, 0.0, t, 1e-14, 50)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_matches_exponential() {
        assert!((gamma_by_quadrature(1, 2.0) - (1.0 - (-2.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn group_tags_round_trip() {
        for g in CheckGroup::ALL {
            assert_eq!(g.tag().parse::<CheckGroup>().unwrap(), g);
        }
        assert!("nope".parse::<CheckGroup>().is_err());
    }

    #[test]
    fn unit_group_passes() {
        let v = Verifier::new(VerifyOptions::default());
        for r in v.unit() {
            assert!(r.passed, "{r}");
        }
    }
}
