//! Run configuration shared by the simulator, the analytics overlay and the CLI.

use std::fmt;
use std::str::FromStr;

use crate::allocation::{feasibility_range, OutageTarget, RateTargets};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Power-allocation policy.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy<T> {
    /// Long-term policy: one user-1 outage target per layer.
    One { targets: Vec<OutageTarget<T>> },
    /// Instantaneous policy recomputed per realization.
    Two,
}

/// User-1 detector for the proposed scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    ZeroForcing,
    QrLayered,
}

/// Transmission scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// QR precoding with NOMA superposition on every layer.
    ProposedNoma,
    /// Identity precoder, zero-forcing receivers, ordered user-2 gains.
    ZfNoma,
    /// Signal alignment through the null space of `[H1^H, -H2^H]`.
    SaNoma,
    /// QR precoding, user 2 alone in half the resources.
    MimoOma,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::ProposedNoma,
        Scheme::ZfNoma,
        Scheme::SaNoma,
        Scheme::MimoOma,
    ];

    /// Short tag used on the command line and in file names.
    pub fn tag(self) -> &'static str {
        match self {
            Scheme::ProposedNoma => "noma",
            Scheme::ZfNoma => "zf-noma",
            Scheme::SaNoma => "sa-noma",
            Scheme::MimoOma => "oma",
        }
    }

    /// Whether user 1 has a defined outcome under this scheme.
    pub fn serves_user1(self) -> bool {
        !matches!(self, Scheme::MimoOma)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.tag() == s)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown scheme '{s}' (noma, zf-noma, sa-noma, oma)"
                ))
            })
    }
}

impl Detector {
    pub fn tag(self) -> &'static str {
        match self {
            Detector::ZeroForcing => "zf",
            Detector::QrLayered => "qr",
        }
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zf" => Ok(Detector::ZeroForcing),
            "qr" => Ok(Detector::QrLayered),
            _ => Err(Error::InvalidConfig(format!(
                "unknown user-1 detector '{s}' (zf, qr)"
            ))),
        }
    }
}

/// Linear SNR from decibels.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `start, start + step, ...` up to and including `stop` (within 1e-9 dB).
pub fn db_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::InvalidConfig(format!(
            "SNR grid needs finite start <= stop and step > 0, got {start}:{step}:{stop}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + step * k as f64).collect())
}

/// Everything that determines one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig<T> {
    /// Base-station antennas.
    pub m: usize,
    /// Antennas per user, which is also the number of layers.
    pub n: usize,
    pub rates: RateTargets<T>,
    pub policy: Policy<T>,
    pub rho_grid_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub detector_user1: Detector,
    pub scheme: Scheme,
}

pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 0x5EED_2016;

impl<T: Real> SystemConfig<T> {
    /// Proposed scheme, zero-forcing user 1, uniform rates, 0..50 dB in 5 dB steps.
    pub fn new(m: usize, n: usize, r1: T, r2: T, policy: Policy<T>) -> Result<Self> {
        Ok(Self {
            m,
            n,
            rates: RateTargets::uniform(n, r1, r2)?,
            policy,
            rho_grid_db: db_grid(0.0, 50.0, 5.0)?,
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            detector_user1: Detector::ZeroForcing,
            scheme: Scheme::ProposedNoma,
        })
    }

    /// Policy I with the same SNR-coupled target multiplier on every layer.
    pub fn policy_one_coupled(n: usize, multiplier: T) -> Policy<T> {
        Policy::One {
            targets: vec![OutageTarget::SnrCoupled { multiplier }; n],
        }
    }

    pub fn with_grid(mut self, grid_db: Vec<f64>) -> Self {
        self.rho_grid_db = grid_db;
        self
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_detector(mut self, detector: Detector) -> Self {
        self.detector_user1 = detector;
        self
    }

    pub fn rho_linear(&self, index: usize) -> T {
        T::lit(db_to_linear(self.rho_grid_db[index]))
    }

    /// Checks every structural and feasibility constraint up front.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m < self.n {
            return Err(Error::InvalidConfig(format!(
                "antenna counts must satisfy M >= N >= 1, got M = {}, N = {}",
                self.m, self.n
            )));
        }
        if self.rates.layers() != self.n {
            return Err(Error::InvalidConfig(format!(
                "{} per-layer rates given for N = {} layers",
                self.rates.layers(),
                self.n
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.trials >= 1 << 40 {
            return Err(Error::InvalidConfig("trials must be below 2^40".into()));
        }
        if self.rho_grid_db.is_empty() {
            return Err(Error::InvalidConfig("SNR grid is empty".into()));
        }
        if self.rho_grid_db.len() >= 1 << 24 {
            return Err(Error::InvalidConfig("SNR grid has too many points".into()));
        }
        if self.rho_grid_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "SNR grid contains a non-finite value".into(),
            ));
        }
        if self.rho_grid_db.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig(
                "SNR grid must be strictly increasing".into(),
            ));
        }
        if matches!(self.scheme, Scheme::ZfNoma | Scheme::SaNoma) && self.m != self.n {
            return Err(Error::InvalidConfig(format!(
                "scheme {} requires M = N, got M = {}, N = {}",
                self.scheme, self.m, self.n
            )));
        }
        if self.detector_user1 == Detector::QrLayered && self.scheme != Scheme::ProposedNoma {
            return Err(Error::InvalidConfig(
                "the QR user-1 detector applies to the proposed scheme only".into(),
            ));
        }
        if let Policy::One { targets } = &self.policy {
            if targets.len() != self.n {
                return Err(Error::InvalidConfig(format!(
                    "{} outage targets given for N = {} layers",
                    targets.len(),
                    self.n
                )));
            }
            for (k, &db) in self.rho_grid_db.iter().enumerate() {
                let rho = self.rho_linear(k);
                for (layer, (target, &eps)) in targets.iter().zip(self.rates.eps1()).enumerate() {
                    let p = target.value(eps, rho);
                    let (lower, _) = feasibility_range(eps, rho);
                    let ok = match *target {
                        OutageTarget::Fixed(p) => p > lower && p < T::one(),
                        OutageTarget::SnrCoupled { multiplier } => multiplier > T::one(),
                    };
                    if !ok {
                        return Err(Error::InvalidConfig(format!(
                            "policy-I outage target {p} at layer {} and {db} dB lies outside the \
                             feasible range ({lower}, 1)",
                            layer + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
