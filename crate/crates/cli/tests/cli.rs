use std::path::Path;
use std::process::{Command, Output};

fn qsphere(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsphere"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("QSPHERE_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn sample_rows_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = ["sample", "--beta", "4", "--n", "12", "--count", "7", "--seed", "7"];
    assert!(qsphere(&args, &a).status.success());
    assert!(qsphere(&args, &b).status.success());
    let bytes = std::fs::read(a.join("samples.csv")).unwrap();
    assert_eq!(bytes, std::fs::read(b.join("samples.csv")).unwrap());
    let (header, rows) = read_csv(&a.join("samples.csv"));
    assert_eq!(
        header,
        ["draw_index", "eig_index", "re_lambda", "im_lambda", "re_w", "im_w", "sphere_x", "sphere_y", "sphere_z", "is_real"]
    );
    assert_eq!(rows.len(), 12 * 7);
    for r in &rows {
        assert!(num(&r[3]) >= 0.0);
        let (x, y) = (num(&r[4]), num(&r[5]));
        assert!(x * x + y * y <= 1.0 + 1e-9);
        let s: f64 = (6..9).map(|k| num(&r[k]).powi(2)).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}

#[test]
fn real_ensemble_keeps_all_eigenvalues() {
    let dir = tempfile::tempdir().unwrap();
    assert!(qsphere(&["sample", "--beta", "1", "--n", "9", "--count", "20", "--seed", "1"], dir.path()).status.success());
    let (_, rows) = read_csv(&dir.path().join("samples.csv"));
    assert_eq!(rows.len(), 9 * 20);
    assert!(rows.iter().any(|r| num(&r[3]) < 0.0));
    assert!(rows.iter().any(|r| num(&r[3]) > 0.0));
    // odd size: every real matrix has at least one real eigenvalue
    let real: Vec<_> = rows.iter().filter(|r| r[9] == "1").collect();
    assert!(real.len() >= 20);
    assert!(real.iter().all(|r| num(&r[3]) == 0.0));
}

#[test]
fn density_table() {
    let dir = tempfile::tempdir().unwrap();
    assert!(qsphere(&["density", "--n", "1"], dir.path()).status.success());
    let (header, rows) = read_csv(&dir.path().join("density.csv"));
    assert_eq!(header, ["r", "rho", "rho_over_N", "rho_limit_over_N"]);
    assert_eq!(rows.len(), 400);
    for row in &rows {
        let r = num(&row[0]);
        let want = 6.0 / std::f64::consts::PI * (1.0 - r * r).powi(2) / (1.0 + r * r).powi(4);
        assert!((num(&row[1]) - want).abs() < 1e-12);
        let lim = 2.0 / (std::f64::consts::PI * (1.0 + r * r).powi(2));
        assert!((num(&row[3]) - lim).abs() < 1e-15);
    }
    assert_eq!(num(&rows[399][0]), 1.0);
    assert_eq!(num(&rows[399][1]), 0.0);
}

#[test]
fn kernel_table() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["kernel", "--n", "20", "--points", "0.1,0.2;-0.5,0.3;0.7,-0.6"];
    assert!(qsphere(&args, dir.path()).status.success());
    let first = std::fs::read(dir.path().join("kernel.csv")).unwrap();
    let (header, rows) = read_csv(&dir.path().join("kernel.csv"));
    assert_eq!(header[14], "s_rel_delta");
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!(num(&r[14]) <= 1e-8);
        if r[0] == r[1] {
            for k in [8, 9, 10, 11, 15] {
                assert_eq!(num(&r[k]), 0.0, "column {}", header[k]);
            }
        } else {
            assert!(num(&r[15]) > 0.0);
        }
    }
    assert!(qsphere(&args, dir.path()).status.success());
    assert_eq!(first, std::fs::read(dir.path().join("kernel.csv")).unwrap());
}

#[test]
fn verify_single_check_and_mutation() {
    let dir = tempfile::tempdir().unwrap();
    let ok = qsphere(&["verify", "--check", "normalization", "--n", "5"], dir.path());
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["all_passed"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 1);
    assert_eq!(report["checks"][0]["name"], "normalization");

    let bad = qsphere(&["verify", "--check", "normalization", "--n", "5", "--inject-bug", "cn-sign"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("check failed: normalization"));

    let unknown = qsphere(&["verify", "--check", "nonsense"], dir.path());
    assert_eq!(unknown.status.code(), Some(1));
}

#[test]
fn hist_conserves_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsphere(&["hist", "--n", "6", "--count", "150", "--bins", "12", "--seed", "4"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("hist.csv"));
    assert_eq!(header, ["bin_lo", "bin_hi", "count", "empirical_density_over_N", "theory_density_over_N", "z_score"]);
    let total: u64 = rows.iter().map(|r| r[2].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 150 * 6);
    let mass: f64 = rows.iter().map(|r| num(&r[4]) * std::f64::consts::PI * (num(&r[1]).powi(2) - num(&r[0]).powi(2))).sum();
    assert!((mass - 1.0).abs() < 1e-10);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["total_eigs"], 900);
    assert_eq!(report["dof"], 11);
}

#[test]
fn bad_arguments_fail() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!qsphere(&["sample", "--beta", "3", "--n", "2"], dir.path()).status.success());
    assert!(!qsphere(&["sample", "--n", "0"], dir.path()).status.success());
    assert!(!qsphere(&["kernel", "--n", "3", "--points", "0.1"], dir.path()).status.success());
    assert!(!qsphere(&["kernel", "--n", "3", "--points", "1.5,0"], dir.path()).status.success());
    assert!(!qsphere(&["hist", "--beta", "2", "--n", "3", "--count", "5"], dir.path()).status.success());
}

#[test]
fn config_is_logged() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsphere(&["density", "--n", "3", "--grid", "10"], dir.path());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("\"n\":3") && err.contains("\"grid\":10"), "{err}");
}
