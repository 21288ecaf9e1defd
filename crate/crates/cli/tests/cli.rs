use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn sprint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sprint"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Value of `key = value` in a report.
fn field(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| {
            let (k, v) = l.split_once('=')?;
            (k.trim() == key).then(|| v.split_whitespace().next().unwrap().parse().unwrap())
        })
        .unwrap_or_else(|| panic!("no `{key}` in:\n{report}"))
}

const YB_135: &str =
    "[preset]\nion = \"yb171\"\nflavor = \"conventional\"\n[cavity]\nkappa_ex_mhz = 0.135\n";

#[test]
fn unoptimized_yb_average() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "yb.toml", YB_135);
    let o = sprint(&["outcome", "--config", &cfg, "--samples", "10000"]);
    assert!(o.status.success());
    let f = field(&stdout(&o), "mean_F");
    assert!((f - 0.75).abs() < 0.03, "{f}");
}

#[test]
fn symmetric_optimum_gives_unit_fidelity_on_both_branches() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "yb.toml",
        &format!("{YB_135}[drive]\nsymmetric_optimum = true\n[sampler]\ncount = 500\n"),
    );
    for branch in ["plus", "minus"] {
        let o = sprint(&["outcome", "--config", &cfg, "--branch", branch]);
        assert!(o.status.success());
        assert!(field(&stdout(&o), "mean_F") > 0.999_999);
    }
}

#[test]
fn lossless_dark_input() {
    let dir = TempDir::new().unwrap();
    let text = "[system]\ng_down_mhz = 2.0\ng_up_mhz = 2.0\ngamma_mhz = 5.0\n\
                [cavity]\nkappa_ex_mhz = 1.0\nkappa_i_mhz = 0.0\n\
                [state]\ntheta = 0.0\ntheta_p = 3.141592653589793\n";
    let cfg = write(&dir, "dark.toml", text);
    let o = sprint(&["outcome", "--config", &cfg]);
    let r = stdout(&o);
    assert!((field(&r, "F") - 1.0).abs() < 1e-12);
    assert!((field(&r, "eta") - 1.0).abs() < 1e-12);

    let o = sprint(&["oracle-check", "--config", &cfg]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn oracle_check_warns_on_large_seed_rate() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "o.toml",
        "[oracle]\ncases = 2\nkappa_s_ratio = 10\ntolerance = 1.0\n",
    );
    let out = dir.path().join("oracle.csv");
    let o = sprint(&[
        "oracle-check",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout(&o).contains("warning"));
    let csv = std::fs::read_to_string(out).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn oracle_check_random_suite() {
    let o = sprint(&["oracle-check", "--samples", "6", "--seed", "11"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(field(&stdout(&o), "max |dP|") < 1e-4);
}

fn sweep_config(dir: &TempDir) -> String {
    write(
        dir,
        "sweep.toml",
        "[preset]\nion = \"ca40\"\nflavor = \"fiber\"\n[sampler]\nmode = \"theta\"\ncount = 400\n\
         [sweep]\nkappa_ex_mhz = [4.0, 8.0]\npoints = 3\n",
    )
}

#[test]
fn sweep_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = sweep_config(&dir);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        assert!(
            sprint(&["sweep", "--config", &cfg, "--out", p.to_str().unwrap()])
                .status
                .success()
        );
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("kappa_ex_MHz,delta_c_opt_MHz"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 3);
    // Fiber preset: field pinned to zero.
    for r in rows {
        assert_eq!(r.split(',').nth(3).unwrap(), "0.00000000e0");
    }

    // Same bytes on stdout.
    let o = sprint(&["sweep", "--config", &cfg]);
    assert_eq!(stdout(&o), text);
}

#[test]
fn haar_seed_changes_output() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "yb.toml", YB_135);
    let run = |seed: &str| {
        stdout(&sprint(&[
            "outcome",
            "--config",
            &cfg,
            "--samples",
            "200",
            "--seed",
            seed,
        ]))
    };
    assert_eq!(run("1"), run("1"));
    assert_ne!(run("1"), run("2"));
}

#[test]
fn single_point_sweep_matches_optimize() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "ca.toml",
        "[preset]\nion = \"ca40\"\nflavor = \"conventional\"\n[cavity]\nkappa_ex_mhz = 0.019\n\
         [sampler]\nmode = \"theta\"\ncount = 400\n[sweep]\nkappa_ex_mhz = [0.019, 0.019]\npoints = 1\n",
    );
    let sweep = stdout(&sprint(&["sweep", "--config", &cfg]));
    let row: Vec<f64> = sweep
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();

    let out = dir.path().join("opt.csv");
    let o = sprint(&["optimize", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let f_opt = field(&stdout(&o), "mean_F");
    assert!((row[4] - f_opt).abs() < 1e-6, "{row:?} vs {f_opt}");
    assert!(f_opt >= field(&stdout(&o), "baseline mean_F"));

    let hist = std::fs::read_to_string(Path::new(&out).with_extension("histogram.csv")).unwrap();
    let lines: Vec<_> = hist.lines().collect();
    assert_eq!(lines[0], "bin_left,bin_right,count");
    assert_eq!(lines.len(), 51);
    let total: u64 = lines[1..]
        .iter()
        .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 400);
}

#[test]
fn tables_report() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("tables.csv");
    let o = sprint(&["tables", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("kappa_ex_III"));
    let csv = std::fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("table,column,quantity,unit,value"));
    assert!(csv.contains("postselection,ba138,eta_ratio"));
}

#[test]
fn preset_output_is_a_valid_config() {
    let dir = TempDir::new().unwrap();
    let text = stdout(&sprint(&["preset", "ca40", "conventional"]));
    let cfg = write(&dir, "ca.toml", &text);
    let o = sprint(&["outcome", "--config", &cfg, "--samples", "100"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let both = write(
        &dir,
        "both.toml",
        "[preset]\nion = \"ca40\"\nflavor = \"fiber\"\n[system]\ng_down_mhz = 1\ng_up_mhz = 1\ngamma_mhz = 1\n",
    );
    let empty = write(
        &dir,
        "empty.toml",
        "[preset]\nion = \"ca40\"\nflavor = \"fiber\"\n[sweep]\nkappa_ex_mhz = [8.0, 4.0]\n",
    );
    let typo = write(
        &dir,
        "typo.toml",
        "[preset]\nion = \"ca40\"\nflavour = \"fiber\"\n",
    );
    for args in [
        vec!["outcome", "--config", both.as_str()],
        vec!["sweep", "--config", empty.as_str()],
        vec!["outcome", "--config", typo.as_str()],
        vec!["outcome", "--config", "/nonexistent.toml"],
        vec!["outcome"],
        vec!["outcome", "--mode", "nope"],
        vec!["frobnicate"],
    ] {
        let o = sprint(&args);
        assert_eq!(
            o.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn numerical_failures_exit_with_two() {
    let dir = TempDir::new().unwrap();
    // Integration grid far beyond the step budget.
    let cfg = write(
        &dir,
        "budget.toml",
        "[system]\ng_down_mhz = 1.0\ng_up_mhz = 1.0\ngamma_mhz = 1.0\n\
         [cavity]\nkappa_ex_mhz = 1.0\nkappa_i_mhz = 0.0\n[oracle]\nsteps_per_rate = 1e9\n",
    );
    let o = sprint(&["oracle-check", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("steps"));

    // Oracle disagreeing with an impossible tolerance.
    let cfg = write(
        &dir,
        "tight.toml",
        "[oracle]\ncases = 1\ntolerance = 1e-30\n",
    );
    let o = sprint(&["oracle-check", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("max |dP|"));
}
