use proptest::prelude::*;
use twistlab::delta::*;
use twistlab::Error;

fn kronecker(n: i64) -> f64 {
    if n == 0 {
        1.0
    } else {
        0.0
    }
}

/// Σ_{c mod d} e(cn/d) is d·[d | n], so the expansion collapses to a divisor sum.
fn divisor_form(exp: &DeltaExpansion, n: i64) -> f64 {
    let a = n.unsigned_abs();
    (1..=exp.d_max())
        .filter(|&d| a % d == 0)
        .map(|d| exp.omega(d as f64) - exp.omega(a as f64 / d as f64))
        .sum()
}

#[test]
fn normalisation_and_small_range() {
    let exp = build_delta(4).unwrap();
    assert!((delta_eval(&exp, 0).unwrap() - 1.0).abs() <= 1e-10);
    assert!(delta_eval(&exp, 3).unwrap().abs() <= 1e-10);
    let total: f64 = (1..=exp.d_max()).map(|d| exp.omega(d as f64)).sum();
    assert!((total - 1.0).abs() < 1e-14);
    assert!(exp.d_max() as f64 >= exp.level());
}

#[test]
fn exhaustive_scan_l100() {
    let exp = build_delta(100).unwrap();
    assert_eq!(exp.level(), 20.0);
    let mut worst = 0.0f64;
    for n in -100..=100 {
        let v = delta_eval(&exp, n).unwrap();
        worst = worst.max((v - kronecker(n)).abs());
        assert!((v - divisor_form(&exp, n)).abs() < 1e-12, "n = {n}");
    }
    assert!(worst <= 1e-10, "max error {worst}");
}

#[test]
fn sign_symmetry() {
    let exp = build_delta(100).unwrap();
    for n in 1..=100 {
        assert_eq!(delta_eval(&exp, n).unwrap(), delta_eval(&exp, -n).unwrap());
    }
}

#[test]
fn identity_holds_for_a_second_bump() {
    let exp = build_delta_with_sharpness(100, 3.0).unwrap();
    let base = build_delta(100).unwrap();
    assert!((exp.omega(15.0) - base.omega(15.0)).abs() > 1e-3);
    for n in -100..=100 {
        assert!((delta_eval(&exp, n).unwrap() - kronecker(n)).abs() <= 1e-10);
    }
}

#[test]
fn preconditions() {
    assert!(matches!(build_delta(3), Err(Error::Precondition(_))));
    let exp = build_delta(100).unwrap();
    assert!(matches!(delta_eval(&exp, 101), Err(Error::OutOfRange { .. })));
    assert!(matches!(g_weight(&exp, 0, 0.0), Err(Error::OutOfRange { .. })));
    assert!(matches!(g_weight(&exp, 21, 0.0), Err(Error::OutOfRange { .. })));
    assert!(delta_from_g(&exp, 200, 10.0).is_err());
}

#[test]
fn g_near_one_at_the_origin() {
    let exp = build_delta(10_000).unwrap();
    let q = 1;
    let qq = q as f64 * exp.level();
    let g = g_weight(&exp, q, 0.0).unwrap();
    assert!((g - 1.0).abs() <= (1.0 / qq) * (q as f64 / exp.level()), "g(1, 0) = {g}");
}

#[test]
fn g_decays_by_x_equal_ten() {
    // The prescribed bump exp(−1/(1 − t²)) only reaches |g(1, 10)| ≈ 0.0135;
    // a sharper admissible bump gets below 10⁻².
    let exp = build_delta_with_sharpness(400, 3.0).unwrap();
    for x in [10.0, -10.0] {
        assert!(g_weight(&exp, 1, x).unwrap().abs() <= 1e-2);
    }
    let default = build_delta(400).unwrap();
    let g10 = g_weight(&default, 1, 10.0).unwrap();
    assert!((g10.abs() - 0.0135).abs() < 5e-4, "{g10}");
}

#[test]
fn g_decay_rate_two() {
    // x²·g(q, x) stays bounded on [5, 50] and does not grow along it.
    let exp = build_delta(100).unwrap();
    for q in [1, 2, 5, 10] {
        let s = GSampler::new(&exp, q).unwrap();
        let (mut near, mut far) = (0.0f64, 0.0f64);
        let mut x = 5.0;
        while x <= 50.0 {
            let v = x * x * s.g(x).abs();
            if x < 25.0 {
                near = near.max(v);
            } else {
                far = far.max(v);
            }
            x += 0.05;
        }
        assert!(near <= 5.0 && far <= near, "q = {q}: {near} then {far}");
    }
}

#[test]
fn sampler_matches_adaptive_quadrature() {
    let exp = build_delta(100).unwrap();
    for q in [1, 3, 7] {
        let s = GSampler::new(&exp, q).unwrap();
        assert_eq!(s.q(), q);
        for x in [0.0, 0.7, 3.0, 12.5] {
            let a = g_weight(&exp, q, x).unwrap();
            assert!((s.g(x) - a).abs() < 1e-9, "q = {q}, x = {x}: {} vs {a}", s.g(x));
        }
    }
}

#[test]
fn resynthesis_from_g() {
    let exp = build_delta(100).unwrap();
    let d0 = delta_from_g(&exp, 0, 80.0).unwrap();
    assert!((d0 - 1.0).abs() <= 1e-6, "δ(0) from g = {d0}");
    let d3 = delta_from_g(&exp, 3, 80.0).unwrap();
    assert!(d3.abs() <= 1e-6, "δ(3) from g = {d3}");
    // A cut at |x| = 20 is visibly short.
    let short = delta_from_g(&exp, 0, DEFAULT_X_CUT).unwrap();
    assert!((short - 1.0).abs() > 1e-5);
}

#[test]
fn poisson_trivial_case() {
    let check = PoissonCheck::new(0.0, 0.5, 200.0, 1, 1);
    let r = verify_poisson_dual_sum(&check).unwrap();
    assert!(r.relative_error <= 1e-6, "{r:?}");
    assert!(r.tail_ratio <= 1e-6);
    assert!((r.lhs.re - 300.0).abs() < 1e-9, "Σ U(m/X) = {}", r.lhs);
}

#[test]
fn poisson_twisted_case() {
    let check = PoissonCheck::new(1.0, 0.5, 200.0, 3, 1);
    let r = verify_poisson_dual_sum(&check).unwrap();
    assert!(r.relative_error <= 1e-4, "{r:?}");
    assert!(r.m_max as f64 > r.m_cut);
}

#[test]
fn poisson_truncation_is_monotone() {
    let check = PoissonCheck::new(1.0, 0.5, 200.0, 3, 1);
    let r = verify_poisson_dual_sum(&check).unwrap();
    let errs: Vec<f64> = r.partial_errors.iter().map(|p| p.1).collect();
    assert_eq!(errs[0], 1.0);
    for w in errs.windows(2) {
        assert!(w[1] <= w[0] + 1e-7, "{errs:?}");
    }
    assert!(errs.last().unwrap() < &errs[1]);
}

#[test]
fn poisson_preconditions() {
    assert!(verify_poisson_dual_sum(&PoissonCheck::new(1.0, 0.5, 200.0, 4, 2)).is_err());
    assert!(verify_poisson_dual_sum(&PoissonCheck::new(1.0, 0.5, 5.0, 3, 1)).is_err());
    assert!(verify_poisson_dual_sum(&PoissonCheck::new(1.0, 1.5, 200.0, 3, 1)).is_err());
}

#[test]
fn dual_term_conjugation() {
    // With α = 0 and x = 0 the m and −m terms are complex conjugates.
    let check = PoissonCheck::new(0.0, 0.5, 50.0, 1, 1);
    for m in 1..4 {
        let (p, n) = (check.dual_term(m).unwrap(), check.dual_term(-m).unwrap());
        assert!((p - n.conj()).norm() < 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn detects_zero_only(l in 4u64..2000, frac in -1.0f64..1.0, sharp in 0.5f64..4.0) {
        let exp = build_delta_with_sharpness(l, sharp).unwrap();
        let n = (frac * l as f64).round() as i64;
        let v = delta_eval(&exp, n).unwrap();
        prop_assert!((v - kronecker(n)).abs() <= 1e-10, "L = {}, n = {}, value {}", l, n, v);
    }
}
