use std::path::Path;
use std::process::{Command, Output};

fn fdsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdsc"))
        .args(args)
        .env_remove("OWC_FDSC_THREADS")
        .output()
        .expect("spawn fdsc")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = fdsc(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

const SIM_ARGS: [&str; 13] = [
    "simulate", "--scheme", "fdsc,sm", "--sigma2", "0.5", "--snr-db", "0:10:5", "--max-trials", "20000",
    "--min-errors", "50", "--seed", "9",
];

#[test]
fn farey_sequence_matches_golden() {
    assert_eq!(stdout_ok(&["farey", "--k", "7"]), golden("farey_k7.txt"));
}

#[test]
fn breakpoints_for_four_pam() {
    let text = stdout_ok(&["farey", "--p", "2", "--mode", "breakpoints"]);
    assert_eq!(text, golden("breakpoints_p2.txt"));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert_eq!(*lines.last().unwrap(), "inf");
}

#[test]
fn verify_mode_passes() {
    let text = stdout_ok(&["farey", "--k", "30", "--mode", "verify"]);
    assert_eq!(text.lines().next(), Some("order,check,cases,violations"));
    assert_eq!(text.lines().count(), 1 + 2 * 27);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",0")));
}

#[test]
fn invalid_input_exits_with_two() {
    assert_eq!(fdsc(&["farey", "--k", "0"]).status.code(), Some(2));
    assert_eq!(fdsc(&["farey", "--k", "3", "--mode", "verify"]).status.code(), Some(2));
    assert_eq!(fdsc(&["design", "--p", "5", "--oracle", "1/120"]).status.code(), Some(2));
    assert_eq!(fdsc(&["reproduce", "--figure", "7"]).status.code(), Some(2));
    assert_eq!(fdsc(&["simulate", "--min-errors", "10"]).status.code(), Some(2));
    // Usage errors from the argument parser.
    assert_eq!(fdsc(&["farey", "--k", "3", "--p", "2"]).status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_fdsc"))
        .args(["farey", "--k", "5"])
        .env("OWC_FDSC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn design_report() {
    assert_eq!(stdout_ok(&["design", "--p", "1"]), golden("design_p1.txt"));
    let p3 = stdout_ok(&["design", "--p", "3"]);
    assert!(p3.contains("objective = 1/324 "), "{p3}");
}

#[test]
fn design_oracle_gap() {
    let text = stdout_ok(&["design", "--p", "1", "--oracle", "1/120"]);
    let gap: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("relative gap = "))
        .expect("gap line")
        .parse()
        .unwrap();
    assert!((0.0..=0.05).contains(&gap), "{gap}");
    // Same grid given as a decimal step.
    let dec = stdout_ok(&["design", "--p", "1", "--oracle", "0.0083333333333333333"]);
    assert_eq!(dec, text);
}

fn bound_table(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn siso_bounds_csv() {
    let text = stdout_ok(&["bounds", "--scenario", "siso", "--sigma", "0.5", "--rho-db", "0:80:5"]);
    assert_eq!(
        text.lines().next(),
        Some("rho_db,exact_or_mc,lower,upper_dominant,upper_remainder,in_regime")
    );
    let rows = bound_table(&text);
    assert_eq!(rows.len(), 17);
    let mut in_regime = 0;
    for r in &rows {
        assert_eq!(r.len(), 6);
        if r[5] == "true" {
            in_regime += 1;
            let v: Vec<f64> = r[1..5].iter().map(|x| x.parse().unwrap()).collect();
            assert!(v[1] <= v[0] && v[0] <= v[2] + v[3], "{r:?}");
        } else {
            assert_eq!(r[5], "false");
            assert!(r[2].is_empty() && r[3].is_empty() && r[4].is_empty());
        }
    }
    assert!(in_regime >= 14);

    // Decay of the dominant term steepens with SNR.
    let dominant = |db: &str| -> f64 {
        let r = rows.iter().find(|r| r[0] == db).unwrap();
        r[3].parse::<f64>().unwrap().log10()
    };
    let slope_40 = (dominant("45") - dominant("35")) / 1.0;
    let slope_80 = (dominant("80") - dominant("70")) / 1.0;
    assert!(slope_80 < slope_40, "{slope_40} {slope_80}");
}

#[test]
fn mimo_bounds_schema() {
    let text = stdout_ok(&[
        "bounds", "--scenario", "mimo", "--sigma", "0.5", "--rho-db", "0,30", "--trials", "10000",
    ]);
    let rows = bound_table(&text);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][5], "false");
    assert_eq!(rows[1][5], "true");
    assert!(rows[1][1].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn simulate_matches_golden_and_is_thread_independent() {
    let text = stdout_ok(&SIM_ARGS);
    assert_eq!(text, golden("simulate_small.csv"));
    for threads in ["1", "4"] {
        let out = Command::new(env!("CARGO_BIN_EXE_fdsc"))
            .args(SIM_ARGS)
            .env("OWC_FDSC_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        assert_eq!(String::from_utf8(out.stdout).unwrap(), text);
    }
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 8);
        let (ber, lo, hi): (f64, f64, f64) = (f[3].parse().unwrap(), f[4].parse().unwrap(), f[5].parse().unwrap());
        assert!(0.0 <= lo && lo <= ber && ber <= hi && hi <= 1.0);
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.toml");
    let out = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        format!(
            "command = \"simulate\"\noutput_path = {:?}\nscheme = [\"fdsc\", \"sm\"]\nsigma2 = [0.5]\nsnr_db = [0.0, 5.0, 10.0]\nmax_trials = 20000\nmin_errors = 50\nseed = 3\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let status = fdsc(&["--config", cfg.to_str().unwrap()]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let written = std::fs::read_to_string(&out).unwrap();
    assert!(!written.contains('\r'));

    // Flags win over the file; seed 9 reproduces the golden run.
    let over = dir.path().join("over.csv");
    let status = fdsc(&["--config", cfg.to_str().unwrap(), "-o", over.to_str().unwrap(), "simulate", "--seed", "9"]);
    assert!(status.status.success());
    assert_eq!(std::fs::read_to_string(&over).unwrap(), golden("simulate_small.csv"));

    // A config for another command is refused.
    assert_eq!(fdsc(&["--config", cfg.to_str().unwrap(), "farey", "--k", "3"]).status.code(), Some(2));
}

#[test]
fn reproduce_preset_with_small_budget() {
    let text = stdout_ok(&["reproduce", "--figure", "3", "--max-trials", "10000", "--min-errors", "50"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("scheme,sigma2,snr_db,ber,ci_low,ci_high,errors,trials"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.iter().any(|l| l.starts_with("fdsc,0.01,")));
    assert!(rows.iter().any(|l| l.starts_with("sm,0.5,")));
}
