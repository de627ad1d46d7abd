use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dgm(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgm"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env_remove("DGM_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn membership_of_geometric_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let o = dgm(&["membership", "--seq", "geometric", "--p", "1", "--r", "1"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("membership: Consistent"));
    let table = rows(&dir.path().join("membership.csv"));
    assert_eq!(table.len(), 36 * 3);
    assert!(dir.path().join("membership.svg").exists());
}

#[test]
fn no_plot_skips_svg() {
    let dir = tempfile::tempdir().unwrap();
    let o = dgm(&["membership", "--no-plot", "--blocks", "2:2,4:4"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("membership.csv").exists());
    assert!(!dir.path().join("membership.svg").exists());
}

#[test]
fn certificate_rows_dominate() {
    let dir = tempfile::tempdir().unwrap();
    let o = dgm(&["counterexample", "certify", "--p", "2", "--n-max", "2000"], dir.path());
    assert_eq!(code(&o), 0);
    let table = rows(&dir.path().join("certificate.csv"));
    assert_eq!(table.len(), 2001);
    for r in &table {
        let s: f64 = r[1].parse().unwrap();
        let l: f64 = r[2].parse().unwrap();
        assert!(s >= l, "row {r:?}");
        assert_eq!(r[3], "true");
    }
}

#[test]
fn certify_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["counterexample", "certify", "--n-max", "3000"];
    assert_eq!(code(&dgm(&args, a.path())), 0);
    assert_eq!(code(&dgm(&args, b.path())), 0);
    let x = fs::read(a.path().join("certificate.csv")).unwrap();
    let y = fs::read(b.path().join("certificate.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn proposition_does_not_converge_near_the_rational_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = dgm(
        &["converge", "--seq", "proposition", "--p", "2", "--nearest", "2.0943951023931953,2.0943951023931953"],
        dir.path(),
    );
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(rows(&dir.path().join("remainder.csv")).len(), 5);
}

#[test]
fn geometric_converges_on_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = dgm(&["converge", "--thresholds", "10,20,30,40", "--cap", "64"], dir.path());
    assert_eq!(code(&o), 0);
    let pts = rows(&dir.path().join("remainder_points.csv"));
    assert_eq!(pts.len(), 36 * 4);
}

#[test]
fn small_r_rational_points_are_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let o = dgm(&["converge", "--grid", "r=2", "--rational", "1,1"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("trivially"));
}

#[test]
fn usage_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["membership", "--family", "nope"][..],
        &["membership", "--lambda", "1"],
        &["converge", "--grid", "r=3,bogus=1"],
        &["decay", "--check", "nothing"],
        &["sbp", "--seq", "separable"],
        &["counterexample", "certify", "--p", "1"],
        &["frobnicate"],
    ] {
        let o = dgm(args, dir.path());
        assert_eq!(code(&o), 3, "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    let o = Command::new(env!("CARGO_BIN_EXE_dgm")).arg("--help").output().unwrap();
    assert_eq!(code(&o), 0);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let out = dir.path().join("from-config");
    fs::write(
        &cfg,
        format!("# certificate run\n[run]\nn_max = 50\np = 3\nout_dir = {}\n", out.display()),
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dgm"))
        .args(["--config"])
        .arg(&cfg)
        .args(["counterexample", "certify"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(rows(&out.join("certificate.csv")).len(), 51);

    let flagged = dir.path().join("flag");
    let o = Command::new(env!("CARGO_BIN_EXE_dgm"))
        .arg("--config")
        .arg(&cfg)
        .args(["counterexample", "certify", "--n-max", "20", "--out-dir"])
        .arg(&flagged)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(rows(&flagged.join("certificate.csv")).len(), 21);

    fs::write(&cfg, "unknown_key = 1\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dgm")).arg("--config").arg(&cfg).arg("log-integral").output().unwrap();
    assert_eq!(code(&o), 3);
}

#[test]
fn table_file_sequences() {
    let dir = tempfile::tempdir().unwrap();
    let single = dir.path().join("a.csv");
    fs::write(&single, "k,re,im\n1,1,0\n2,0.5,0\n3,0.25,0\n").unwrap();
    let o = dgm(
        &["sbp", "--seq", "table-file", "--table", single.to_str().unwrap(), "--n", "1", "--m", "3", "--x", "0.7"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = &rows(&dir.path().join("sbp.csv"))[0];
    let direct: f64 = r[12].parse().unwrap();
    let want = 0.7f64.sin() + 0.5 * 1.4f64.sin() + 0.25 * 2.1f64.sin();
    assert!((direct - want).abs() <= 1e-15);

    let double = dir.path().join("c.csv");
    fs::write(&double, "1,1,1,0\n2,2,0.5,0\n").unwrap();
    let o = dgm(
        &["embedding", "--seq", "table-file", "--table", double.to_str().unwrap(), "--blocks", "1:1,2:2"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
}

#[test]
fn other_commands_report_holds() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["embedding", "--kind", "divisor", "--r", "2", "--r2", "4", "--seq", "random"][..],
        &["kernel-bound", "--x", "2.5", "--r", "3"],
        &["log-integral", "--p", "1,2"],
        &["decay", "--check", "loglog", "--horizon", "4096", "--thresholds", "4,16,64,256"],
        &["decay", "--check", "col-tail", "--m", "3", "--n", "5"],
        &["decay", "--check", "lemma4", "--seq", "power"],
    ] {
        let o = dgm(args, dir.path());
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stdout));
    }
}

#[test]
fn violation_ratio_grows() {
    let dir = tempfile::tempdir().unwrap();
    let o = dgm(&["counterexample", "ratio"], dir.path());
    assert_eq!(code(&o), 1);
    let table = rows(&dir.path().join("ratio.csv"));
    let first: f64 = table[0][2].parse().unwrap();
    let last: f64 = table.last().unwrap()[2].parse().unwrap();
    assert!(last > first);
}
