//! Acceptance checks. Each test prints one PASS/FAIL line and then asserts it,
//! so `cargo test --test acceptance -- --nocapture` doubles as a report.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twistlab::coefficients::{build_sym2_table, build_tau3_table, ramanujan_average, HeckeKind, HeckeTable};
use twistlab::delta::{build_delta, delta_eval, verify_poisson_dual_sum, PoissonCheck};
use twistlab::exponents::{optimize_eta, Rational};
use twistlab::expsums::{verify_char_sum_lemma, CharSumScan};
use twistlab::numeric::bump::Bump;
use twistlab::oscillatory::*;
use twistlab::twist::{geometric_grid, run, TwistConfig};
use twistlab::voronoi::{suggest_n2_cut, voronoi_residual, TestFunction, VoronoiContext};

fn verdict(n: u32, ok: bool, detail: &str) {
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n}: {detail}");
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

#[test]
fn criterion_1_exponent_reproduction() {
    let start = Instant::now();
    let (lo, hi) = (Rational::new(1, 10), Rational::new(9, 10));
    let mut betas: Vec<Rational> = (1..=60i64)
        .flat_map(|d| (1..d).map(move |n| Rational::new(n, d)))
        .filter(|b| *b >= lo && *b <= hi)
        .collect();
    betas.sort();
    betas.dedup();

    let mut mismatches = Vec::new();
    for &b in &betas {
        let want_eta = b * Rational::new(3, 5);
        let want_exp = Rational::new(3, 4) + b * Rational::new(3, 10);
        match optimize_eta(b) {
            Ok(o) if o.eta == want_eta && o.exponent == want_exp => {}
            _ => mismatches.push(b),
        }
    }
    let at = |n, d| optimize_eta(Rational::new(n, d)).map(|o| o.exponent).ok();
    let two_thirds = at(2, 3) == Some(Rational::new(19, 20));
    let crossover = at(5, 8) == Some(Rational::new(15, 16));
    let elapsed = start.elapsed();

    let shown: Vec<String> = mismatches.iter().take(6).map(|b| b.to_string()).collect();
    let detail = format!(
        "{} of {} β match; first mismatches [{}]; 2/3 → 19/20 {two_thirds}; 5/8 → 15/16 {crossover}; {:.3} s",
        betas.len() - mismatches.len(),
        betas.len(),
        shown.join(", "),
        secs(elapsed),
    );
    verdict(1, mismatches.is_empty() && two_thirds && crossover && elapsed < Duration::from_secs(1), &detail);
}

#[test]
fn criterion_2_voronoi_identity() {
    let case = |table: &HeckeTable, q, a, psi: TestFunction| {
        let start = Instant::now();
        let ctx = VoronoiContext::new(table, q, a, psi).unwrap();
        (voronoi_residual(&ctx).unwrap(), start.elapsed())
    };

    let start = Instant::now();
    let psi = TestFunction::bump(50.0, 100.0).unwrap();
    let cut = suggest_n2_cut(&psi, 4, 1).unwrap();
    let tau3 = build_tau3_table(cut, 200).unwrap();
    let (r_tau3, _) = case(&tau3, 4, 1, psi);
    let t_tau3 = start.elapsed();

    let start = Instant::now();
    let psi = TestFunction::bump(100.0, 200.0).unwrap();
    let cut = suggest_n2_cut(&psi, 3, 1).unwrap();
    let sym2 = build_sym2_table(cut, 400).unwrap();
    let (r_sym2, _) = case(&sym2, 3, 2, psi);
    let t_sym2 = start.elapsed();

    let limit = Duration::from_secs(300);
    let ok = r_tau3 <= 1e-3 && r_sym2 <= 1e-2 && t_tau3 < limit && t_sym2 < limit;
    let detail = format!(
        "τ₃ residual {r_tau3:.2e} ({:.1} s), sym² residual {r_sym2:.2e} ({:.1} s)",
        secs(t_tau3),
        secs(t_sym2)
    );
    verdict(2, ok, &detail);
}

#[test]
fn criterion_3_delta_identity() {
    let start = Instant::now();
    let exp = build_delta(100).unwrap();
    let worst = (-100..=100i64)
        .map(|n| {
            let want = if n == 0 { 1.0 } else { 0.0 };
            (delta_eval(&exp, n).unwrap() - want).abs()
        })
        .fold(0.0f64, f64::max);
    let elapsed = start.elapsed();
    let detail = format!("max error {worst:.2e} over |n| ≤ 100; {:.2} s", secs(elapsed));
    verdict(3, worst <= 1e-10 && elapsed < Duration::from_secs(30), &detail);
}

#[test]
fn criterion_4_character_sum() {
    let start = Instant::now();
    let scan = CharSumScan { q_max: 12, ..CharSumScan::default() };
    let report = verify_char_sum_lemma(&scan).unwrap();
    let elapsed = start.elapsed();
    let ok = report.passed() && report.measured_c0 <= 1.0 + 1e-9 && elapsed < Duration::from_secs(60);
    let detail = format!(
        "{} cases, {} closed-form and {} vanishing violations, C0 = {:.12}; {:.2} s",
        report.cases,
        report.closed_form_violations.len(),
        report.vanishing_violations.len(),
        report.measured_c0,
        secs(elapsed)
    );
    verdict(4, ok, &detail);
}

#[test]
fn criterion_5_stationary_phase() {
    let start = Instant::now();
    let y = 1e3;
    let w = gaussian_amplitude();
    let h = quadratic_phase(y);
    let oracle = osc_quadrature(&w, &h, 1e-12).unwrap().value;
    let rel = |v: Complex64| (v - oracle).norm() / oracle.norm();
    let e0 = rel(stationary_phase_eval(&w, &h, 0).unwrap().value);
    let e2 = rel(stationary_phase_eval(&w, &h, 2).unwrap().value);
    let reference_gap = (oracle - gaussian_reference(y)).norm() / oracle.norm();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let bump = BumpAmplitude { bump: Bump::new(0.0, 16.0), scales: Scales::default() };
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k: f64 = rng.gen_range(30.0..400.0);
        let s: f64 = rng.gen_range(-0.04..0.04);
        let big_a = rng.gen_range(1..=4u32);
        let r = k * (1.0 + (16.0 * s).min(0.0));
        let yy = (k * s.abs()).max(1.0);
        let phase = FnPhase::new(
            move |t: f64| [k * (t + 0.5 * s * t * t), k * (1.0 + s * t), k * s, 0.0, 0.0],
            Scales { y: yy, r, ..Scales::default() },
        );
        let cert = nonstationary_certificate(&bump, &phase, big_a).unwrap();
        let value = osc_quadrature(&bump, &phase, 1e-13).unwrap().value;
        worst = worst.max(value.norm() / cert.err_estimate);
    }
    let elapsed = start.elapsed();

    let ok = reference_gap < 1e-10
        && e0 <= 3.0 / y
        && e2 * 10.0 <= e0
        && worst <= 10.0
        && elapsed < Duration::from_secs(120);
    let detail = format!(
        "order 0 {e0:.2e} (limit {:.1e}), order 2 {e2:.2e}, worst oracle/certificate {worst:.2e}; {:.2} s",
        3.0 / y,
        secs(elapsed)
    );
    verdict(5, ok, &detail);
}

#[test]
fn criterion_6_l2_boundedness() {
    let start = Instant::now();
    let values: Vec<f64> = [1e3, 1e4, 1e5]
        .iter()
        .map(|&x| l2_average_check(&L2Params::stationary(x, 0.5).unwrap()).unwrap())
        .collect();
    let elapsed = start.elapsed();
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    let spread = max / min;
    let ok = min > 0.0 && spread <= 20.0 && elapsed < Duration::from_secs(300);
    let detail = format!("𝓦·X^β = {values:.3?}, spread {spread:.2}; {:.1} s", secs(elapsed));
    verdict(6, ok, &detail);
}

#[test]
fn criterion_7_ramanujan_on_average() {
    let start = Instant::now();
    let tables = [
        ("τ₃", build_tau3_table(320, 100_000).unwrap()),
        ("sym²", build_sym2_table(320, 100_000).unwrap()),
    ];
    let xs: Vec<f64> = (0..=30).map(|i| 10f64.powf(2.0 + 3.0 * i as f64 / 30.0)).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, table) in &tables {
        let (mut worst, mut at) = (0.0f64, 0.0);
        for &x in &xs {
            let r = ramanujan_average(table, x).unwrap() / x.powf(1.05);
            if r > worst {
                worst = r;
                at = x;
            }
        }
        ok &= worst <= 10.0;
        parts.push(format!("{name} max A(x)/x^1.05 = {worst:.3} at x = {at:.0}"));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(30);
    verdict(7, ok, &format!("{}; {:.1} s", parts.join(", "), secs(elapsed)));
}

fn wide_table(kind: HeckeKind) -> &'static HeckeTable {
    static TAU3: OnceLock<HeckeTable> = OnceLock::new();
    static SYM2: OnceLock<HeckeTable> = OnceLock::new();
    match kind {
        HeckeKind::EisensteinTau3 => TAU3.get_or_init(|| build_tau3_table(1, 2_000_001).unwrap()),
        HeckeKind::Sym2Delta => SYM2.get_or_init(|| build_sym2_table(1, 2_000_001).unwrap()),
    }
}

#[test]
fn criterion_8_headline_sum() {
    let grid = geometric_grid(1e3, 1e6, 16).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for kind in [HeckeKind::EisensteinTau3, HeckeKind::Sym2Delta] {
        for (num, den) in [(1.0, 2.0), (2.0, 3.0)] {
            let start = Instant::now();
            let beta = num / den;
            let table = wide_table(kind);
            let config = TwistConfig::new(1.0, beta, kind, grid.clone());
            let first = run(&config, table).unwrap();
            let again = run(&config, table).unwrap();
            let elapsed = start.elapsed();
            let ceiling = 0.75 + 0.3 * beta + 0.10;
            let identical = first.csv == again.csv;
            let line = match &first.fit {
                Some(fit) => {
                    let pass = fit.slope <= ceiling && identical && elapsed < Duration::from_secs(900);
                    ok &= pass;
                    format!(
                        "{kind:?} β={num}/{den}: slope {:.3} ± {:.3} (ceiling {ceiling:.3}), csv identical {identical}, {:.1} s",
                        fit.slope,
                        fit.stderr,
                        secs(elapsed)
                    )
                }
                None => {
                    ok = false;
                    format!("{kind:?} β={num}/{den}: no fit ({:?})", first.fit_error)
                }
            };
            println!("  {line}");
            parts.push(line);
        }
    }
    verdict(8, ok, &parts.join("; "));
}

#[test]
fn criterion_9_poisson_dual_sum() {
    let start = Instant::now();
    let report = verify_poisson_dual_sum(&PoissonCheck::new(1.0, 0.5, 200.0, 3, 1)).unwrap();
    let elapsed = start.elapsed();
    let ok = report.relative_error <= 1e-4 && report.tail_ratio <= 1e-6 && elapsed < Duration::from_secs(120);
    let detail = format!(
        "relative error {:.2e} (limit 1e-4), tail ratio {:.2e} (limit 1e-6) at m_cut {:.1}; {:.2} s",
        report.relative_error,
        report.tail_ratio,
        report.m_cut,
        secs(elapsed)
    );
    verdict(9, ok, &detail);
}
