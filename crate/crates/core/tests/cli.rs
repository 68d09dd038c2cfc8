//! Command-line surface: table formats, reports, determinism, exit codes and
//! file output.

use std::fs;
use std::process::Command as Process;

use sctc::cli::{
    cmd_coupled, cmd_potential, cmd_transfer, cmd_validate, main_with_args, potential_table, threshold_report,
    RunConfig,
};
use sctc::ensembles::{build_system, Ensemble, ScalarSystem};

fn sctc() -> Process {
    Process::new(env!("CARGO_BIN_EXE_sctc"))
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

fn config(pairs: &[(&str, &str)]) -> RunConfig {
    let mut cfg = RunConfig::default();
    for (k, v) in pairs {
        cfg.set(k, v).unwrap();
    }
    cfg.validate().unwrap();
    cfg
}

#[test]
fn transfer_table_corners() {
    let out = cmd_transfer(&config(&[("grid", "5")])).unwrap();
    assert!(out.ok);
    let mut lines = out.main.lines();
    assert_eq!(lines.next(), Some("x,eps,f,g"));
    let table = rows(&out.main);
    assert_eq!(table.len(), 25);
    assert_eq!(table[0], vec![0.0, 0.0, 0.0, 0.0]);
    let last = table.last().unwrap();
    assert_eq!(&last[..3], &[1.0, 1.0, 1.0]);
    // x = 0.5, eps = 0.5 is the rate-1/2 component at (0.25, 0.5)
    let mid = table.iter().find(|r| r[0] == 0.5 && r[1] == 0.5).unwrap();
    let sys = build_system(Ensemble::Pcc, "1,5/7").unwrap();
    assert!((mid[2] - sys.f(0.5, 0.5).unwrap()).abs() < 1e-11);
}

#[test]
fn transfer_rows_have_twelve_digits_at_most() {
    let out = cmd_transfer(&config(&[("grid", "4"), ("ensemble", "scc")])).unwrap();
    for line in out.main.lines().skip(1) {
        for field in line.split(',') {
            let mantissa = field.split('e').next().unwrap();
            let significant = mantissa.trim_start_matches(['-', '0', '.']).replace('.', "");
            assert!(significant.len() <= 12, "{field}");
            assert!(!field.contains(' '));
        }
    }
}

#[test]
fn potential_curves_start_at_zero_and_fall_with_eps() {
    let sys = build_system(Ensemble::Pcc, "1,5/7").unwrap();
    let table = rows(&potential_table(&sys, &[0.5, 0.6428, 0.6554, 0.8], 41).unwrap());
    assert_eq!(table.len(), 4 * 41);
    let curves: Vec<&[Vec<f64>]> = table.chunks(41).collect();
    for c in &curves {
        assert_eq!(c[0][0], 0.0);
        assert_eq!(c[0][2], 0.0);
    }
    for pair in curves.windows(2) {
        for (lo, hi) in pair[0].iter().zip(pair[1]).skip(1) {
            assert!(hi[2] < lo[2], "x = {}: {} vs {}", lo[0], hi[2], lo[2]);
        }
    }
}

#[test]
fn potential_header_and_block_order() {
    let out = cmd_potential(&config(&[("eps", "0.3, 0.9"), ("x_points", "3")])).unwrap();
    let table = rows(&out.main);
    assert!(out.main.starts_with("x,eps,U,Uprime\n"));
    let eps: Vec<f64> = table.iter().map(|r| r[1]).collect();
    assert_eq!(eps, vec![0.3, 0.3, 0.3, 0.9, 0.9, 0.9]);
}

#[test]
fn stub_without_erasures_has_unit_thresholds() {
    let sys = ScalarSystem::custom("zero", |_, _| 0.0, None::<fn(f64) -> f64>);
    let report = threshold_report(&sys, "none", 1e-6).unwrap();
    assert_eq!(report.eps_bp, 1.0);
    assert_eq!(report.eps_star, 1.0);
}

#[test]
fn threshold_report_fields() {
    let sys = build_system(Ensemble::Pcc, "1,5/7").unwrap();
    let report = threshold_report(&sys, "1,5/7", 1e-4).unwrap();
    let json: serde_json::Value = serde_json::to_value(&report).unwrap();
    for key in ["ensemble", "generator", "eps_bp", "eps_star", "tolerances", "bp_trace", "star_trace"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    assert_eq!(json["ensemble"], "pcc");
    assert!((report.eps_bp - 0.6428).abs() < 3e-4);
    assert!((report.eps_star - 0.6554).abs() < 3e-4);
    assert!(report.eps_bp_bracket[1] - report.eps_bp_bracket[0] <= 1e-4);
}

#[test]
fn validation_of_trivial_points_has_zero_scores() {
    let out = cmd_validate(&config(&[("probs", "0,0; 1,1"), ("trials", "20")])).unwrap();
    assert!(out.ok);
    let json: serde_json::Value = serde_json::from_str(&out.main).unwrap();
    let points = json["points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    for p in points {
        assert!(p["z"].as_array().unwrap().iter().all(|z| z.as_f64() == Some(0.0)), "{p}");
        assert_eq!(p["exact"], p["mc"]);
    }
    assert_eq!(json["fraction_within"], 1.0);
}

#[test]
fn coupled_report_and_wave_file() {
    let dir = tempfile::tempdir().unwrap();
    let waves = dir.path().join("waves.csv");
    let cfg = config(&[
        ("length", "8"),
        ("memory", "0,2"),
        ("tol", "1e-3"),
        ("every", "5"),
        ("wave_eps", "0.6"),
        ("waves", waves.to_str().unwrap()),
    ]);
    let out = cmd_coupled(&cfg).unwrap();
    let json: serde_json::Value = serde_json::from_str(&out.main).unwrap();
    let results = json["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    let t0 = results[0]["threshold"].as_f64().unwrap();
    let t2 = results[1]["threshold"].as_f64().unwrap();
    let bp = json["uncoupled_eps_bp"].as_f64().unwrap();
    assert!((t0 - bp).abs() <= 2e-3, "{t0} vs {bp}");
    assert!(t2 >= t0);
    assert_eq!(out.files.len(), 1);
    let (path, csv) = &out.files[0];
    assert_eq!(path, &waves);
    assert!(csv.starts_with("iter,t,x\n"));
    let table = rows(csv);
    assert_eq!(table.len() % 8, 0);
    let iters: Vec<f64> = table.iter().step_by(8).map(|r| r[0]).collect();
    assert!(iters.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(json["waves"]["snapshots"].as_u64().unwrap() as usize, iters.len());
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small table\ngrid = 4\nensemble = bcc\n").unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = sctc()
            .args(["transfer", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        fs::read(out).unwrap()
    };
    let a = run("a.csv");
    let b = run("b.csv");
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 17);
    let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 3, "temporary files left behind: {names:?}");
}

#[test]
fn validation_runs_are_seed_deterministic() {
    let cfg = config(&[("points", "3"), ("trials", "20"), ("seed", "11")]);
    assert_eq!(cmd_validate(&cfg).unwrap().main, cmd_validate(&cfg).unwrap().main);
}

#[test]
fn stdout_is_used_without_out() {
    let out = sctc().args(["transfer", "--set", "grid=2", "--ensemble", "pcc"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "x,eps,f,g\n0,0,0,0\n0,1,0,0\n1,0,0,1\n1,1,1,1\n"
    );
}

#[test]
fn bad_inputs_exit_nonzero() {
    let cases: &[&[&str]] = &[
        &["transfer", "--ensemble", "ldpc"],
        &["transfer", "--gen", "1,9/7"],
        &["transfer", "--ensemble", "bcc", "--gen", "1,5/7"],
        &["potential", "--set", "eps=1.5"],
        &["thresholds", "--tol", "0"],
        &["coupled", "--set", "memory=9", "--set", "length=4"],
        &["transfer", "--config", "/nonexistent/run.cfg"],
        &["transfer", "--set", "colour=blue"],
    ];
    for args in cases {
        let out = sctc().args(*args).output().unwrap();
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(String::from_utf8(out.stderr).unwrap().starts_with("sctc: "), "{args:?}");
    }
    assert_eq!(main_with_args(["sctc", "frobnicate"]), 2);
    assert_eq!(main_with_args(["sctc", "transfer", "--seed", "x"]), 2);
}

#[test]
fn failed_out_write_is_reported() {
    let code = main_with_args(["sctc", "transfer", "--set", "grid=2", "--out", "/nonexistent/dir/t.csv"]);
    assert_eq!(code, 1);
}
