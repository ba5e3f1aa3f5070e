//! CSV rendering of sweep results and gain statistics.
//!
//! Every floating-point value is written with nine significant digits in
//! scientific notation; absent values are empty fields. Lines end in `\n`.

use std::fmt::Write as _;

use crate::config::Scheme;
use crate::simulator::{GainStatistics, LayerOverlay, OutageEstimate, SweepResult};

/// Column header of the outage CSV files.
pub const OUTAGE_HEADER: &str = "rho_db,layer,p_sim,std_err,p_analytic,p_lower,p_upper,trials";

/// Column header of the gain-statistics CSV.
pub const GAIN_HEADER: &str =
    "gain,layer,mean,mean_std_err,mean_theory,variance,variance_std_err,variance_theory,samples";

/// Which receiver a curve belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum User {
    One,
    Two,
}

impl User {
    pub fn number(self) -> u8 {
        match self {
            User::One => 1,
            User::Two => 2,
        }
    }
}

/// Nine significant digits, e.g. `1.25000000e-3`.
pub fn format_value(v: f64) -> String {
    format!("{v:.8e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(format_value).unwrap_or_default()
}

/// File name for one (scheme, user) curve, e.g. `zf-noma_user2.csv`.
pub fn outage_file_name(scheme: Scheme, user: User) -> String {
    format!("{}_user{}.csv", scheme.tag(), user.number())
}

fn push_row(out: &mut String, rho_db: f64, layer: usize, est: &OutageEstimate, ov: &LayerOverlay) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        format_value(rho_db),
        layer + 1,
        format_value(est.p_hat),
        format_value(est.std_err),
        opt(ov.analytic),
        opt(ov.lower),
        opt(ov.upper),
        est.trials
    );
}

/// Outage CSV for one user, or `None` if the scheme does not serve that user.
///
/// Rows are ordered by SNR, then layer (1-based).
pub fn render_outage_csv(sweep: &SweepResult, user: User) -> Option<String> {
    let mut out = String::from(OUTAGE_HEADER);
    out.push('\n');
    for p in &sweep.points {
        let (ests, overlays) = match user {
            User::One => (p.estimate.user1.as_ref()?, &p.overlay.user1),
            User::Two => (&p.estimate.user2, &p.overlay.user2),
        };
        for (layer, (est, ov)) in ests.iter().zip(overlays).enumerate() {
            push_row(&mut out, p.estimate.rho_db, layer, est, ov);
        }
    }
    Some(out)
}

/// Gain-statistics CSV: rows `x` then `z`, one per layer, with the
/// Gamma(M - i + 1, 1) and Exp(1) reference moments.
pub fn render_gain_csv(stats: &GainStatistics, m: usize) -> String {
    let mut out = String::from(GAIN_HEADER);
    out.push('\n');
    let rows = stats
        .x
        .iter()
        .enumerate()
        .map(|(i, s)| ("x", i, s, (m - i) as f64))
        .chain(stats.z.iter().enumerate().map(|(i, s)| ("z", i, s, 1.0)));
    for (name, i, s, theory) in rows {
        let _ = writeln!(
            out,
            "{name},{},{},{},{},{},{},{},{}",
            i + 1,
            format_value(s.mean),
            format_value(s.mean_std_err),
            format_value(theory),
            format_value(s.variance),
            format_value(s.variance_std_err),
            format_value(theory),
            stats.samples
        );
    }
    out
}
