use std::fs;
use std::path::Path;
use std::process::Command;

fn divcurl(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_divcurl"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn validate_reports_the_coupling_violations() {
    let t = tempfile::tempdir().unwrap();
    write(t.path(), "h.toml", "experiment = \"holder_sweep\"\n[norms]\nalpha = 0.5\ntau = 1.9\n");
    write(t.path(), "p.toml", "experiment = \"lp_sweep\"\n[norms]\nalpha = 0.5\np = 5.0\n");
    write(t.path(), "ok.toml", "experiment = \"lp_sweep\"\n");
    let (code, out, _) = divcurl(t.path(), &["validate", "--config", "h.toml"]);
    assert_eq!((code, out.trim()), (1, "norms.tau: τ must equal 2α+1 = 2.0"));
    let (code, out, _) = divcurl(t.path(), &["validate", "--config", "p.toml"]);
    assert_eq!((code, out.trim()), (1, "norms.p: p ≥ 3/(1−α) = 6 required"));
    let (code, out, _) = divcurl(t.path(), &["validate", "--config", "ok.toml"]);
    assert_eq!((code, out.as_str()), (0, ""));
    let (code, _, err) = divcurl(t.path(), &["validate", "--config", "missing.toml"]);
    assert_eq!(code, 1);
    assert!(err.contains("missing.toml"));
}

#[test]
fn defaults_parse_back() {
    let t = tempfile::tempdir().unwrap();
    for e in ["solve", "l2_sweep", "holder_sweep", "lp_sweep", "ck_alpha", "h1_remark", "maxwell_estimate", "convergence"] {
        let (code, out, _) = divcurl(t.path(), &["defaults", e]);
        assert_eq!(code, 0);
        write(t.path(), "d.toml", &out);
        assert_eq!(divcurl(t.path(), &["validate", "--config", "d.toml"]).0, 0, "{e}");
    }
    assert_eq!(divcurl(t.path(), &["defaults", "nope"]).0, 1);
    let (_, out, _) = divcurl(t.path(), &["case-list"]);
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn zero_solve_reports_zero_norm() {
    let t = tempfile::tempdir().unwrap();
    write(t.path(), "z.toml", "experiment = \"solve\"\ncase = \"zero\"\ngrids = [8]\n[output]\nfields = true\n");
    let (code, _, err) = divcurl(t.path(), &["run", "--config", "z.toml", "--out", "o"]);
    assert_eq!(code, 0, "{err}");
    let rows = divcurl::report::read_rows(&t.path().join("o/rows.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].norm_u, 0.0);
    let dump = divcurl::io::FieldDump::read(&t.path().join("o/fields/u_n8_i0.bin")).unwrap();
    assert_eq!((dump.n, dump.components, dump.values.len()), (8, 3, 512 * 3));
}

#[test]
fn sweep_rows_are_deterministic_across_worker_counts() {
    let t = tempfile::tempdir().unwrap();
    write(t.path(), "s.toml", "experiment = \"l2_sweep\"\ngrids = [16, 32]\ninstances = 20\n[checks]\nmax_drift = 0.2\n");
    let (code, _, err) = divcurl(t.path(), &["run", "--config", "s.toml", "--out", "a", "--workers", "1"]);
    assert_eq!(code, 0, "{err}");
    let (code, _, _) = divcurl(t.path(), &["run", "--config", "s.toml", "--out", "b", "--workers", "3"]);
    assert_eq!(code, 0);
    let body = |d: &str| {
        let text = fs::read_to_string(t.path().join(d).join("rows.csv")).unwrap();
        assert!(text.starts_with("# generated"));
        text.lines().skip(1).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(body("a"), body("b"));
    let rows = divcurl::report::read_rows(&t.path().join("a/rows.csv")).unwrap();
    assert_eq!(rows.len(), 40);
    let summary: divcurl::EstimateReport =
        serde_json::from_str(&fs::read_to_string(t.path().join("a/summary.json")).unwrap()).unwrap();
    assert_eq!(summary.per_grid.len(), 2);
    assert!(summary.drift >= 0.0 && summary.drift < 0.2);

    let (_, _, _) = divcurl(t.path(), &["run", "--config", "s.toml", "--out", "c", "--seed", "9"]);
    assert_ne!(body("a"), body("c"));
}

#[test]
fn exit_codes_distinguish_failures() {
    let t = tempfile::tempdir().unwrap();
    write(t.path(), "bad.toml", "experiment = \"solve\"\ngrids = [2]\n");
    assert_eq!(divcurl(t.path(), &["run", "--config", "bad.toml"]).0, 1);
    write(t.path(), "cap.toml", "experiment = \"solve\"\ncase = \"random\"\ngrids = [12]\n[solver]\nmax_iterations = 1\n");
    let (code, _, err) = divcurl(t.path(), &["run", "--config", "cap.toml", "--out", "o"]);
    assert_eq!(code, 2);
    assert!(err.contains("did not converge"), "{err}");
    write(
        t.path(),
        "inv.toml",
        "experiment = \"convergence\"\ngrids = [8, 16]\n[checks]\norder = 3.0\norder_tolerance = 0.1\n",
    );
    let (code, _, err) = divcurl(t.path(), &["run", "--config", "inv.toml", "--out", "o"]);
    assert_eq!(code, 3);
    assert!(err.contains("observed order"), "{err}");
}

#[test]
fn convergence_run_reports_second_order() {
    let cfg = divcurl::ExperimentConfig::defaults(divcurl::Experiment::Convergence);
    let out = divcurl::run(&cfg, 1).unwrap();
    assert!(out.passed(), "{:?}", out.report.violations);
    assert_eq!(out.report.orders.len(), 2);
    for o in &out.report.orders {
        assert!((o - 2.0).abs() <= 0.3, "{o}");
    }
}
