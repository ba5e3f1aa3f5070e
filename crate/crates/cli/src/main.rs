//! `mimo-noma`: outage sweeps, self-verification and gain statistics.
//!
//! Exit codes: 0 success, 1 verification or run failure, 2 configuration error.

mod settings;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use mimo_noma::report::{outage_file_name, render_gain_csv, render_outage_csv, User};
use mimo_noma::simulator::{gain_statistics, run_sweep};
use mimo_noma::verification::{CheckGroup, Fault, Verifier, VerifyOptions};
use mimo_noma::{Error, SweepResult};

use settings::{manifest, parse_entries, resolve, Entries, Settings};

#[derive(Parser)]
#[command(
    name = "mimo-noma",
    version,
    about = "Outage simulation for QR-precoded two-user MIMO-NOMA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate outage over an SNR grid and write one CSV per user.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the self-checks and report each one.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated check groups (default: all).
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
    /// Empirical moments of the effective gains x_i and z_i.
    Dist {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        m: Option<String>,
        #[arg(long)]
        n: Option<String>,
        /// Number of channel draws (defaults to the configured trials).
        #[arg(long)]
        samples: Option<String>,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        workers: Option<String>,
        /// Output directory; the CSV goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Flags shared by `sweep` and `verify`; each overrides the config file.
#[derive(Args)]
struct RunArgs {
    /// Key-value configuration file (a previous manifest also works).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    n: Option<String>,
    /// User-1 rates in BPCU: one value for all layers or a comma list.
    #[arg(long)]
    rates_u1: Option<String>,
    /// User-2 rates in BPCU: one value for all layers or a comma list.
    #[arg(long)]
    rates_u2: Option<String>,
    /// Power-allocation policy, 1 or 2.
    #[arg(long)]
    policy: Option<String>,
    /// Policy-I target 1 - exp(-x eps / rho) with this x.
    #[arg(long)]
    target_multiplier: Option<String>,
    /// Policy-I target fixed at this probability.
    #[arg(long)]
    target_fixed: Option<String>,
    #[arg(long)]
    rho_db_start: Option<String>,
    #[arg(long)]
    rho_db_stop: Option<String>,
    #[arg(long)]
    rho_db_step: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// noma, zf-noma, sa-noma or oma.
    #[arg(long)]
    scheme: Option<String>,
    /// zf or qr.
    #[arg(long)]
    detector_u1: Option<String>,
    /// Worker threads (0 = all cores). Does not affect results.
    #[arg(long)]
    workers: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("m", &self.m),
            ("n", &self.n),
            ("rates-u1", &self.rates_u1),
            ("rates-u2", &self.rates_u2),
            ("policy", &self.policy),
            ("target-multiplier", &self.target_multiplier),
            ("target-fixed", &self.target_fixed),
            ("rho-db-start", &self.rho_db_start),
            ("rho-db-stop", &self.rho_db_stop),
            ("rho-db-step", &self.rho_db_step),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("scheme", &self.scheme),
            ("detector-u1", &self.detector_u1),
            ("workers", &self.workers),
        ]
    }
}

enum Failure {
    Config(String),
    Run(String),
    ChecksFailed(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::InfeasibleTarget { .. } => {
                Failure::Config(e.to_string())
            }
            other => Failure::Run(other.to_string()),
        }
    }
}

fn load_entries(
    config: &Option<PathBuf>,
    overrides: &[(&'static str, &Option<String>)],
) -> Result<Entries, Failure> {
    let mut entries = match config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_entries(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
        }
        None => Entries::new(),
    };
    for (key, value) in overrides {
        if let Some(v) = value {
            entries.insert((*key).to_string(), v.clone());
        }
    }
    Ok(entries)
}

fn settings_from(run: &RunArgs) -> Result<Settings, Failure> {
    resolve(load_entries(&run.config, &run.overrides())?).map_err(Failure::Config)
}

fn unix_time() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .map_err(|e| Failure::Run(format!("cannot write {}: {e}", path.display())))
}

fn print_summary(sweep: &SweepResult) {
    for p in &sweep.points {
        let fmt = |v: &[mimo_noma::OutageEstimate]| {
            v.iter()
                .map(|e| format!("{:.3e}", e.p_hat))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let u1 = p
            .estimate
            .user1
            .as_deref()
            .map(fmt)
            .unwrap_or_else(|| "-".into());
        println!(
            "{:>6.1} dB  user1 [{}]  user2 [{}]",
            p.estimate.rho_db,
            u1,
            fmt(&p.estimate.user2)
        );
    }
    if sweep.resampled_singular() > 0 {
        println!("resampled singular draws: {}", sweep.resampled_singular());
    }
}

fn cmd_sweep(run: &RunArgs, out: &Path) -> Result<(), Failure> {
    let settings = settings_from(run)?;
    let sweep = run_sweep(&settings.config, settings.workers)?;
    fs::create_dir_all(out)
        .map_err(|e| Failure::Run(format!("cannot create {}: {e}", out.display())))?;
    let mut outputs = Vec::new();
    for user in [User::One, User::Two] {
        if let Some(csv) = render_outage_csv(&sweep, user) {
            let name = outage_file_name(sweep.scheme, user);
            let path = out.join(&name);
            write_file(&path, &csv)?;
            outputs.push((
                name.trim_end_matches(".csv").to_string(),
                path.display().to_string(),
            ));
        }
    }
    let text = manifest(&settings, "sweep", unix_time(), &outputs);
    write_file(&out.join("manifest.txt"), &text)?;
    print_summary(&sweep);
    for (_, path) in &outputs {
        println!("wrote {path}");
    }
    Ok(())
}

fn cmd_verify(run: &RunArgs, checks: &[String], fault: &Option<String>) -> Result<(), Failure> {
    let settings = settings_from(run)?;
    let groups = if checks.is_empty() {
        CheckGroup::ALL.to_vec()
    } else {
        checks
            .iter()
            .map(|c| c.trim().parse::<CheckGroup>())
            .collect::<Result<Vec<_>, _>>()?
    };
    let fault = match fault.as_deref() {
        None => None,
        Some("wrong-beta") => Some(Fault::WrongBeta),
        Some(other) => return Err(Failure::Config(format!("unknown fault '{other}'"))),
    };
    let mut verifier = Verifier::new(VerifyOptions {
        trials: settings.config.trials,
        seed: settings.config.seed,
        workers: settings.workers,
        fault,
    });
    let mut failed = 0;
    let mut total = 0;
    for g in groups {
        for r in verifier.run(g)? {
            println!("{r}");
            total += 1;
            failed += usize::from(!r.passed);
        }
    }
    println!("{} of {total} checks passed", total - failed);
    if failed > 0 {
        return Err(Failure::ChecksFailed(failed));
    }
    Ok(())
}

fn cmd_dist(
    config: &Option<PathBuf>,
    overrides: &[(&'static str, &Option<String>)],
    samples: &Option<String>,
    out: &Option<PathBuf>,
) -> Result<(), Failure> {
    let settings = resolve(load_entries(config, overrides)?).map_err(Failure::Config)?;
    let c = &settings.config;
    let samples = match samples {
        Some(s) => s
            .parse::<u64>()
            .map_err(|_| Failure::Config(format!("invalid value '{s}' for samples")))?,
        None => c.trials,
    };
    let stats = gain_statistics::<f64>(c.m, c.n, samples, c.seed, settings.workers)?;
    let csv = render_gain_csv(&stats, c.m);
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)
                .map_err(|e| Failure::Run(format!("cannot create {}: {e}", dir.display())))?;
            let path = dir.join("gains.csv");
            write_file(&path, &csv)?;
            let mut text = manifest(
                &settings,
                "dist",
                unix_time(),
                &[("gains".into(), path.display().to_string())],
            );
            text.push_str(&format!("samples = {samples}\n"));
            write_file(&dir.join("manifest.txt"), &text)?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep { run, out } => cmd_sweep(run, out),
        Command::Verify {
            run,
            checks,
            inject_fault,
        } => cmd_verify(run, checks, inject_fault),
        Command::Dist {
            config,
            m,
            n,
            samples,
            seed,
            workers,
            out,
        } => cmd_dist(
            config,
            &[("m", m), ("n", n), ("seed", seed), ("workers", workers)],
            samples,
            out,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::ChecksFailed(n)) => {
            eprintln!("{n} check(s) failed");
            ExitCode::from(1)
        }
    }
}
