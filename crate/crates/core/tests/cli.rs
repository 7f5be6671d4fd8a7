use std::path::Path;
use std::process::Command;

fn hkbose(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hkbose"))
        .args(args)
        .env_remove("HKBOSE_DIGITS")
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (serde_json::Value, Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let config = lines.next().unwrap().strip_prefix("# ").expect("comment header");
    let config: serde_json::Value = serde_json::from_str(config).unwrap();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (config, header, rows)
}

#[test]
fn norm_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("norm.csv");
    let res = hkbose(&["norm", "--n", "0,2", "--tau-max", "1", "--steps", "4", "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let (config, header, rows) = read_csv(&out);
    assert_eq!(config["command"], "norm");
    assert_eq!(config["digits_source"], "policy");
    assert_eq!(header, ["n", "tau", "modulus_sq"]);
    assert_eq!(rows.len(), 10);
    let at_one: f64 = rows[4][2].parse().unwrap();
    assert!((at_one - 0.535773114535827).abs() < 1e-6);
}

#[test]
fn digits_flag_beats_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let run = |extra: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_hkbose"));
        cmd.args(["gn", "--n", "1", "--tau-max", "0.5", "--steps", "2", "--out", out.to_str().unwrap()]).args(extra);
        match env {
            Some(v) => cmd.env("HKBOSE_DIGITS", v),
            None => cmd.env_remove("HKBOSE_DIGITS"),
        };
        assert!(cmd.output().unwrap().status.success());
        read_csv(&out).0
    };
    assert_eq!(run(&[], Some("45"))["precision"]["working_digits"], 45);
    let flagged = run(&["--digits", "40"], Some("45"));
    assert_eq!(flagged["precision"]["working_digits"], 40);
    assert_eq!(flagged["digits_source"], "flag");
}

#[test]
fn gn_columns_and_exact_method() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let res = hkbose(&["gn", "--n", "3", "--method", "exact", "--tau-max", "1", "--steps", "2", "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    let (_, header, rows) = read_csv(&out);
    assert_eq!(header, ["n", "tau", "re", "im", "modulus_sq", "error_estimate"]);
    // exact: exp(-3 i tau) at tau = 1
    let re: f64 = rows[2][2].parse().unwrap();
    assert!((re - 3f64.cos()).abs() < 1e-15);
}

#[test]
fn phase_writes_slope_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("phase.csv");
    let res = hkbose(&["phase", "--n", "8", "--tau-max", "0.7", "--steps", "60", "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let (_, header, rows) = read_csv(&out);
    assert_eq!(header, ["n", "tau", "phi", "delta_phi", "modulus_sq"]);
    assert!(rows.len() >= 61);
    let (_, side_header, side_rows) = read_csv(&dir.path().join("phase_slopes.csv"));
    assert_eq!(side_header, ["n", "window_lo", "window_hi", "slope", "stderr", "samples"]);
    assert_eq!(side_rows.len(), 1);
    let slope: f64 = side_rows[0][3].parse().unwrap();
    assert!(slope.is_finite());
}

#[test]
fn spectrum_and_json_mirror() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spec.json");
    let res = hkbose(&["spectrum", "--n", "0,1,2", "--U", "0.1", "--format", "json", "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["columns"][1], "e_exact");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
    assert_eq!(doc["rows"][2][1], 2.1);
    assert_eq!(doc["config"]["model"]["interaction"], 0.1);
}

#[test]
fn fga_compare_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fga.csv");
    let res = hkbose(&["fga-compare", "--n", "2", "--tau-max", "0.5", "--steps", "2", "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    let (_, header, rows) = read_csv(&out);
    assert_eq!(header, ["n", "tau", "hk_modulus_sq", "fga_modulus_sq", "analytic_modulus_sq", "closed_form_modulus_sq"]);
    assert_eq!(rows.len(), 3);
}

#[test]
fn wigner_leaves_absent_methods_empty() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.csv");
    let res = hkbose(&["wigner", "--method", "twa", "--grid", "-1,1,-1,1,0.5", "--t", "1", "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    let (_, header, rows) = read_csv(&out);
    assert_eq!(header, ["re_alpha", "im_alpha", "w_exact", "w_hk", "w_twa"]);
    assert_eq!(rows.len(), 25);
    assert!(rows.iter().all(|r| r[2].is_empty() && r[3].is_empty() && !r[4].is_empty()));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = out.to_str().unwrap();
    for args in [
        vec!["gn", "--method", "wkb", "--out", o],
        vec!["norm", "--digits", "12", "--out", o],
        vec!["wigner", "--grid", "1,0,0,1,0.1", "--out", o],
        vec!["norm", "--zi", "abc", "--out", o],
        vec!["norm", "--U", "nan", "--out", o],
    ] {
        let res = hkbose(&args);
        assert_eq!(res.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&res.stderr));
        assert!(!out.exists());
    }
}

#[test]
fn non_convergence_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let res = hkbose(&["norm", "--n", "6", "--tau-max", "3", "--steps", "1", "--rel-tol", "1e-15", "--max-subdiv", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(!out.exists());
}
