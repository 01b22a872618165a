use std::fs;
use std::process::{Command, Output};

use cascade_core::continuum::ModelParams;
use cascade_core::discrete::{discrete_extinction, DiscretizationParams};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cascade-gamma"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout_ok(args)).unwrap()
}

/// Data rows of a CSV, split into cells.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_owned)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    (header, rows)
}

fn scalar(text: &str, name: &str) -> f64 {
    let (_, rows) = csv_rows(text);
    rows.iter().find(|r| r[0] == name).unwrap()[1]
        .parse()
        .unwrap()
}

#[test]
fn density_grid_and_boundary() {
    let text = stdout_ok(&[
        "density", "--p", "0.4", "--x-min", "1", "--x-max", "10", "--steps", "10",
    ]);
    assert!(!text.contains('\r'));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header[..3], ["x", "density", "asymptotic"]);
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[9][0].parse::<f64>().unwrap(), 10.0);
}

#[test]
fn density_rows_round_trip_library_values() {
    let model = ModelParams::new(0.3).unwrap();
    let text = stdout_ok(&["density", "--p", "0.3", "--x-max", "30", "--steps", "59"]);
    for row in csv_rows(&text).1 {
        let x: f64 = row[0].parse().unwrap();
        let g: f64 = row[1].parse().unwrap();
        assert_eq!(g, model.density(x).unwrap(), "x = {x}");
    }
}

#[test]
fn critical_density_slope() {
    let text = stdout_ok(&[
        "density", "--p", "0.5", "--x-min", "1e3", "--x-max", "1e6", "--steps", "400",
    ]);
    let pts: Vec<(f64, f64)> = csv_rows(&text)
        .1
        .iter()
        .map(|r| {
            (
                r[0].parse::<f64>().unwrap().ln(),
                r[1].parse::<f64>().unwrap().ln(),
            )
        })
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    assert!((num / den + 1.5).abs() < 0.01, "{}", num / den);
}

#[test]
fn pmf_cumulative_mass() {
    let text = stdout_ok(&["pmf", "--p", "0.3", "--m", "10"]);
    let (header, rows) = csv_rows(&text);
    assert_eq!(header[..4], ["n", "pmf", "rescaled_density", "cumulative"]);
    assert_eq!(rows[0][0], "10");
    let last: f64 = rows.last().unwrap()[3].parse().unwrap();
    assert!((last - 1.0).abs() < 1e-8, "{last}");

    // first row is forced: every individual childless
    let d = DiscretizationParams::new(0.3, 10).unwrap();
    let first: f64 = rows[0][1].parse().unwrap();
    let forced = (10.0 * d.r_star() * (0.1f64 / 0.3).ln()).exp();
    assert!((first - forced).abs() <= 1e-14 * forced);

    let v = json(&["pmf", "--p", "0.6", "--m", "100", "--format", "json"]);
    let mass = v["total_mass"].as_f64().unwrap();
    let target = discrete_extinction(&DiscretizationParams::new(0.6, 100).unwrap())
        .unwrap()
        .prob_finite;
    assert!((mass - target).abs() < 1e-8, "{mass} vs {target}");
    assert!((mass - 0.49).abs() < 0.01);
}

#[test]
fn pmf_fixed_range() {
    let text = stdout_ok(&["pmf", "--p", "0.3", "--m", "10", "--n-max", "40"]);
    assert_eq!(csv_rows(&text).1.len(), 31);
    assert_eq!(
        run(&["pmf", "--p", "0.3", "--m", "10", "--n-max", "5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn moments_and_extinction_reports() {
    let text = stdout_ok(&["moments", "--p", "0.25", "--m", "20"]);
    assert_eq!(scalar(&text, "mean"), 2.0);
    assert!((scalar(&text, "quadrature_variance") - 2.0 * 0.0625 / 0.125).abs() < 1e-6);
    assert!((scalar(&text, "lattice_mean") - 2.0).abs() < 1e-12);

    let v = json(&["extinction", "--p", "0.6", "--format", "json"]);
    let pf = v["prob_finite"].as_f64().unwrap();
    assert!((pf - v["root_prob_finite"].as_f64().unwrap()).abs() < 1e-10);
    assert!((pf - 0.4924321843618486).abs() < 1e-12);
}

#[test]
fn verify_reports() {
    let text = stdout_ok(&["verify", "--p", "0.3"]);
    assert!(scalar(&text, "integral_residual") <= 1e-6);

    let v = json(&["verify", "--p", "0.6", "--format", "json"]);
    let integral = v["integral"].as_f64().unwrap();
    let target = v["lambert_target"].as_f64().unwrap();
    assert!((integral - target).abs() <= 1e-6);
    assert_eq!(v["passed"], Value::Bool(true));

    let v = json(&["verify", "--p", "0.5", "--format", "json"]);
    assert_eq!(v["lambert_target"].as_f64().unwrap(), 1.0);
    assert_eq!(v["root_target"].as_f64().unwrap(), 1.0);
}

#[test]
fn verify_failure_writes_report_and_exits_3() {
    let out = run(&["verify", "--p", "0.3", "--abs-tol", "1e-300"]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("passed,false"), "{text}");
}

#[test]
fn simulate_is_reproducible_and_accurate() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();
    let (a, b, ha, hb) = (path("a.json"), path("b.json"), path("a.csv"), path("b.csv"));
    let base = [
        "simulate",
        "--p",
        "0.3",
        "--trials",
        "100000",
        "--seed",
        "42",
        "--workers",
        "2",
    ];
    for (out, hist) in [(&a, &ha), (&b, &hb)] {
        let mut args = base.to_vec();
        args.extend(["--out", out, "--histogram", hist]);
        stdout_ok(&args);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read(&ha).unwrap(), fs::read(&hb).unwrap());

    let v: Value = serde_json::from_str(&fs::read_to_string(&a).unwrap()).unwrap();
    let stats = &v["statistics"];
    let (mean, se) = (
        stats["mean"].as_f64().unwrap(),
        stats["mean_se"].as_f64().unwrap(),
    );
    assert!((mean - 2.5).abs() < 4.0 * se, "{mean} ± {se}");
    assert_eq!(v["n_censored"].as_u64(), Some(0));

    let (header, rows) = csv_rows(&fs::read_to_string(&ha).unwrap());
    assert_eq!(header[..3], ["bin_lo", "bin_hi", "count"]);
    let total: u64 = rows.iter().map(|r| r[2].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 100_000);
}

#[test]
fn simulate_supercritical_fraction() {
    let text = stdout_ok(&[
        "simulate", "--p", "0.6", "--trials", "40000", "--seed", "5", "--format", "csv",
    ]);
    let f = scalar(&text, "finite_fraction");
    let se = scalar(&text, "finite_fraction_se");
    let target = ModelParams::new(0.6).unwrap().extinction().prob_finite;
    assert!((f - target).abs() < 4.0 * se, "{f} ± {se}");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["density", "--p", "0.3", "--bogus", "1"],
        vec!["density", "--p", "-1"],
        vec!["density", "--p", "0.3", "--x-min", "0.5"],
        vec!["density", "--p", "0.3", "--steps", "1"],
        vec!["pmf", "--p", "0.1", "--m", "10"],
        vec!["moments", "--p", "0.6"],
        vec!["simulate", "--p", "0.3", "--mode", "walk"],
        vec!["simulate", "--p", "0.3", "--trials", "0"],
        vec!["verify", "--p", "0.3", "--format", "xml"],
        vec!["density", "--p", "0.3", "--out", "/nonexistent/dir/x.csv"],
        vec![],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn config_file_supplies_flags_and_rejects_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# density grid\np = 0.4\nx-max = 10\nsteps = 10\n").unwrap();
    let conf = conf.to_str().unwrap();
    let via_file = stdout_ok(&["density", "--config", conf]);
    let via_flags = stdout_ok(&["density", "--p", "0.4", "--x-max", "10", "--steps", "10"]);
    assert_eq!(via_file, via_flags);
    assert_eq!(
        run(&["density", "--config", conf, "--p", "0.3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["density", "--config", "/nonexistent.conf"])
            .status
            .code(),
        Some(2)
    );
}
