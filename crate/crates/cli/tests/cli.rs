use std::process::{Command, Output};

fn twistlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twistlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn kloosterman_value() {
    // Σ_{x mod 7} cos(2π(x + x̄)/7)
    let o = twistlab(&["kloosterman", "1", "1", "7"]);
    assert!(o.status.success());
    let re: f64 = stdout(&o).split_whitespace().next().unwrap().parse().unwrap();
    assert!((re - 2.048_917_339_522_305).abs() < 1e-12);
}

#[test]
fn charsum_rejects_non_units() {
    let o = twistlab(&["charsum", "1", "2", "6", "6", "1", "-3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gcd"));
    let o = twistlab(&["charsum", "1", "5", "6", "6", "1", "-3"]);
    assert!(o.status.success());
}

#[test]
fn exponents_table() {
    let o = twistlab(&["exponents", "--beta", "2/3"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("eta* = 2/5  exponent* = 19/20"));
    assert!(s.contains("3beta/2        = 1"));
}

#[test]
fn delta_check_passes() {
    let o = twistlab(&["delta-check", "--L", "30"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("n,value,abs_error\n"));
    assert_eq!(s.lines().filter(|l| l.contains(',')).count(), 62);
    assert!(s.trim_end().ends_with("PASS"));
}

#[test]
fn verify_charsum_small() {
    let o = twistlab(&["verify-charsum", "--qmax", "6", "--n2max", "6"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn stationary_phase_demo() {
    let o = twistlab(&["stationary-phase", "--demo", "fresnel", "--y", "1000"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("order 2"));
}

#[test]
fn voronoi_check_reports_residual() {
    let o = twistlab(&["voronoi-check", "--kind", "tau3", "--q", "1", "--a", "0", "--support", "20", "40"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("residual"));
    // A cut far too short leaves a large residual and a failing exit code.
    let o = twistlab(&["voronoi-check", "--kind", "tau3", "--q", "4", "--a", "1", "--support", "50", "100", "--n2cut", "100"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn twist_sum_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let csv2 = dir.path().join("s2.csv");
    let args = |p: &std::path::Path| {
        vec![
            "twist-sum".to_string(),
            "--beta".into(),
            "2/3".into(),
            "--kind".into(),
            "sym2".into(),
            "--xmin".into(),
            "1e3".into(),
            "--xmax".into(),
            "1e5".into(),
            "--points".into(),
            "9".into(),
            "--out".into(),
            p.display().to_string(),
        ]
    };
    let a: Vec<String> = args(&csv);
    let o = twistlab(&a.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let b: Vec<String> = args(&csv2);
    twistlab(&b.iter().map(String::as_str).collect::<Vec<_>>());
    let (x, y) = (std::fs::read(&csv).unwrap(), std::fs::read(&csv2).unwrap());
    assert_eq!(x, y);
    assert!(String::from_utf8(x).unwrap().starts_with("X,re_S,im_S,abs_S,n_terms,runtime_ms\n"));

    let o = twistlab(&["fit", "--in", csv.to_str().unwrap(), "--beta", "2/3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("slope"));

    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "alpha = 1\nbeta = 2/3\nkind = sym2\nxmin = 1e3\nxmax = 1e5\npoints = 9\n").unwrap();
    let o = twistlab(&["twist-sum", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(o.stdout, std::fs::read(&csv).unwrap());
}

#[test]
fn twist_sum_needs_a_grid() {
    let o = twistlab(&["twist-sum", "--beta", "1/2"]);
    assert_eq!(o.status.code(), Some(2));
}
