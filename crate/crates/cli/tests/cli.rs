use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mimo-noma"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = match fs::read_dir(dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|n| n.ends_with(".csv"))
            .collect(),
        Err(_) => Vec::new(),
    };
    names.sort();
    names
}

const SMALL: [&str; 8] = [
    "--trials",
    "3000",
    "--rho-db-start",
    "0",
    "--rho-db-stop",
    "20",
    "--rho-db-step",
    "10",
];

#[test]
fn malformed_rates_exit_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = run(&["sweep", "--rates-u1", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("positive"), "{}", stderr(&o));
    assert!(csv_files(&out).is_empty());
    assert!(!out.join("manifest.txt").exists());
}

#[test]
fn infeasible_target_names_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "sweep",
        "--target-fixed",
        "0.01",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("feasible range"), "{}", stderr(&o));
    assert!(csv_files(dir.path()).is_empty());
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "antennas = 4\n").unwrap();
    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown key"));
}

#[test]
fn sweep_writes_schema_and_manifest_rerun_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let mut args = vec!["sweep", "--policy", "2", "--out", first.to_str().unwrap()];
    args.extend(SMALL);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(csv_files(&first), vec!["noma_user1.csv", "noma_user2.csv"]);

    let u2 = fs::read_to_string(first.join("noma_user2.csv")).unwrap();
    let mut lines = u2.lines();
    assert_eq!(
        lines.next(),
        Some("rho_db,layer,p_sim,std_err,p_analytic,p_lower,p_upper,trials")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);
    for r in &rows {
        assert_eq!(r.len(), 8);
        assert!(r[4].is_empty(), "no closed form for policy-II user 2");
        assert!(!r[5].is_empty() && !r[6].is_empty());
        assert_eq!(r[7], "3000");
        // nine significant digits: d.dddddddde<exp>
        let mantissa = r[2].split('e').next().unwrap();
        assert_eq!(mantissa.len(), 10, "{}", r[2]);
    }
    assert!(!u2.contains('\r'));

    let manifest = first.join("manifest.txt");
    let text = fs::read_to_string(&manifest).unwrap();
    assert!(
        text.contains("version = ")
            && text.contains("timestamp = ")
            && text.contains("output.noma_user1")
    );

    let second = dir.path().join("second");
    let o = run(&[
        "sweep",
        "--config",
        manifest.to_str().unwrap(),
        "--workers",
        "3",
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in ["noma_user1.csv", "noma_user2.csv"] {
        assert_eq!(
            fs::read(first.join(name)).unwrap(),
            fs::read(second.join(name)).unwrap(),
            "{name} differs on rerun"
        );
    }
}

#[test]
fn oma_sweep_has_no_user1_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "sweep",
        "--scheme",
        "oma",
        "--out",
        dir.path().to_str().unwrap(),
    ];
    args.extend(SMALL);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(csv_files(dir.path()), vec!["oma_user2.csv"]);
    let text = fs::read_to_string(dir.path().join("oma_user2.csv")).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!(!row[4].is_empty(), "OMA has a closed form");
}

#[test]
fn policy_one_user1_tracks_target_with_layer_rates() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "sweep",
        "--rates-u1",
        "1,1.5,2",
        "--target-multiplier",
        "2",
        "--trials",
        "40000",
        "--rho-db-start",
        "10",
        "--rho-db-stop",
        "20",
        "--rho-db-step",
        "10",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("noma_user1.csv")).unwrap();
    for line in text.lines().skip(1) {
        let f: Vec<f64> = line
            .split(',')
            .take(5)
            .map(|v| v.parse().unwrap())
            .collect();
        let (p_sim, p_an) = (f[2], f[4]);
        let sigma = (p_an * (1.0 - p_an) / 40000.0).sqrt();
        assert!((p_sim - p_an).abs() < 4.0 * sigma, "{line}");
    }
}

#[test]
fn dist_is_deterministic_and_matches_gamma_means() {
    let a = run(&[
        "dist",
        "--m",
        "3",
        "--n",
        "3",
        "--samples",
        "100000",
        "--seed",
        "5",
    ]);
    let b = run(&[
        "dist",
        "--m",
        "3",
        "--n",
        "3",
        "--samples",
        "100000",
        "--seed",
        "5",
        "--workers",
        "2",
    ]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let mean: f64 = f[2].parse().unwrap();
        let theory: f64 = f[4].parse().unwrap();
        assert!((mean - theory).abs() < 0.03 * theory.max(1.0), "{line}");
    }
    let xs: Vec<f64> = text
        .lines()
        .filter(|l| l.starts_with("x,"))
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(xs, vec![3.0, 2.0, 1.0]);
}

#[test]
fn dist_writes_file_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "dist",
        "--samples",
        "2000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("gains.csv").exists());
    assert!(dir.path().join("manifest.txt").exists());
}

#[test]
fn verify_filters_by_group() {
    let o = run(&["verify", "--checks=unit,equivalence", "--trials", "1000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    let checks: Vec<&str> = out
        .lines()
        .filter(|l| l.starts_with("PASS") || l.starts_with("FAIL"))
        .collect();
    assert_eq!(checks.len(), 6);
    assert!(checks
        .iter()
        .all(|l| l.contains("[unit]") || l.contains("[equivalence]")));
}

#[test]
fn verify_distributions_only() {
    let o = run(&["verify", "--checks=distributions", "--trials", "20000"]);
    let out = stdout(&o);
    assert!(out
        .lines()
        .filter(|l| l.starts_with("PASS") || l.starts_with("FAIL"))
        .all(|l| l.contains("[distributions]")));
    assert!(out.contains("x_1 mean"));
}

#[test]
fn injected_beta_fault_fails_user1_target() {
    let clean = run(&["verify", "--checks=user1-target", "--trials", "20000"]);
    assert_eq!(clean.status.code(), Some(0), "{}", stdout(&clean));
    let faulty = run(&[
        "verify",
        "--checks=user1-target",
        "--trials",
        "20000",
        "--inject-fault",
        "wrong-beta",
    ]);
    assert_eq!(faulty.status.code(), Some(1));
    assert!(stdout(&faulty).contains("FAIL [user1-target]"));
}

#[test]
fn unknown_check_group_is_a_config_error() {
    let o = run(&["verify", "--checks=everything"]);
    assert_eq!(o.status.code(), Some(2));
}
