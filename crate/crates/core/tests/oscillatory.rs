use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twistlab::numeric::bump::{Bump, Plateau};
use twistlab::numeric::quad::{fixed_gauss, gauss_legendre};
use twistlab::numeric::Complex64;
use twistlab::oscillatory::*;
use twistlab::Error;

fn gaussian_weight() -> impl AmplitudeFunction {
    FnAmplitude::new(
        |t: f64| {
            let g = (-t * t).exp();
            [
                g,
                -2.0 * t * g,
                (4.0 * t * t - 2.0) * g,
                (-8.0 * t.powi(3) + 12.0 * t) * g,
                (16.0 * t.powi(4) - 48.0 * t * t + 12.0) * g,
            ]
        },
        (-6.0, 6.0),
        Scales::default(),
    )
}

fn quadratic_phase(y: f64, c: f64) -> impl PhaseFunction {
    FnPhase::new(
        move |t: f64| {
            let s = t - c;
            [y * s * s, 2.0 * y * s, 2.0 * y, 0.0, 0.0]
        },
        Scales { y, ..Scales::default() },
    )
}

/// ∫ e^{−t²} e^{iYt²} dt over the line.
fn gaussian_reference(y: f64) -> Complex64 {
    (Complex64::new(PI, 0.0) / Complex64::new(1.0, -y)).sqrt()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn quadrature_of_flat_phase_is_the_mass() {
    let bump = Bump::new(0.0, 1.0);
    let mass = fixed_gauss(|t| Complex64::new(bump.value(t), 0.0), 0.0, 1.0, 20, 40).re;
    let w = BumpAmplitude { bump: bump.amplitude(1.0 / mass), scales: Scales::default() };
    let h = FnPhase::new(|_| [0.0; 5], Scales::default());
    let r = osc_quadrature(&w, &h, 1e-12).unwrap();
    assert_eq!(r.method, OscMethod::Quadrature);
    assert!((r.value - 1.0).norm() < 1e-12);
}

#[test]
fn quadrature_matches_gaussian_closed_form() {
    let r = osc_quadrature(&gaussian_weight(), &quadratic_phase(10.0, 0.0), 1e-12).unwrap();
    assert!((r.value - gaussian_reference(10.0)).norm() <= 1e-8);
    assert!(r.err_estimate.is_finite());
}

#[test]
fn quadrature_of_pure_oscillation() {
    let k = 50.0;
    let w = FnAmplitude::new(|_| [1.0, 0.0, 0.0, 0.0, 0.0], (0.0, 1.0), Scales::default());
    let h = FnPhase::new(move |t: f64| [TAU * k * t, TAU * k, 0.0, 0.0, 0.0], Scales::default());
    let r = osc_quadrature(&w, &h, 1e-13).unwrap();
    let exact = (Complex64::from_polar(1.0, TAU * k) - 1.0) / Complex64::new(0.0, TAU * k);
    assert!((r.value - exact).norm() <= 1e-10);
}

#[test]
fn quadrature_rejects_bad_tolerance() {
    let w = gaussian_weight();
    let h = quadratic_phase(1.0, 0.0);
    assert!(matches!(osc_quadrature(&w, &h, 1e-15), Err(Error::Precondition(_))));
    assert!(matches!(osc_quadrature(&w, &h, 0.1), Err(Error::Precondition(_))));
}

#[test]
fn stationary_points() {
    let c = 0.37;
    let h = quadratic_phase(100.0, c);
    assert_eq!(find_stationary_point(&h, c - 1.0, c + 1.0).unwrap(), Stationarity::Point(c));

    let (alpha, x, beta, a) = (1.0f64, 1e4f64, 0.5f64, 60.0);
    let h = FnPhase::new(
        move |t: f64| {
            let c = alpha * x.powf(beta);
            [
                c * t.powf(beta) - a * t,
                c * beta * t.powf(beta - 1.0) - a,
                c * beta * (beta - 1.0) * t.powf(beta - 2.0),
                0.0,
                0.0,
            ]
        },
        Scales::default(),
    );
    let expected = (alpha * beta * x.powf(beta) / a).powf(1.0 / (1.0 - beta));
    assert!((expected - (50.0f64 / 60.0).powi(2)).abs() < 1e-15);
    match find_stationary_point(&h, 0.3, 1.5).unwrap() {
        Stationarity::Point(t) => assert!((t - expected).abs() < 1e-12, "{t}"),
        s => panic!("{s:?}"),
    }

    let h = FnPhase::new(|t: f64| [3.0 * t + t * t, 3.0 + 2.0 * t, 2.0, 0.0, 0.0], Scales::default());
    match find_stationary_point(&h, 0.0, 2.0).unwrap() {
        Stationarity::Absent { min_slope } => assert!((min_slope - 3.0).abs() < 1e-9),
        s => panic!("{s:?}"),
    }

    let h = FnPhase::new(|t: f64| [t.sin(), t.cos(), -t.sin(), -t.cos(), t.sin()], Scales::default());
    assert!(matches!(find_stationary_point(&h, 0.0, 10.0), Err(Error::MultipleStationaryPoints(3))));
}

#[test]
fn stationary_phase_on_the_gaussian_reference() {
    let w = gaussian_weight();
    let err = |y: f64, order: usize| {
        let h = quadratic_phase(y, 0.0);
        let oracle = osc_quadrature(&w, &h, 1e-12).unwrap().value;
        assert!((oracle - gaussian_reference(y)).norm() < 1e-12);
        rel(stationary_phase_eval(&w, &h, order).unwrap().value, oracle)
    };
    let e0 = err(1e3, 0);
    let e2 = err(1e3, 2);
    assert!(e0 <= 3.0 / 1e3, "order 0: {e0}");
    assert!(e2 * 10.0 <= e0, "order 2: {e2} vs {e0}");
    let ratio = e0 / err(2e3, 0);
    assert!((1.5..=2.5).contains(&ratio), "{ratio}");

    // Leading term in closed form.
    let h = quadratic_phase(1e3, 0.0);
    let s0 = stationary_phase_eval(&w, &h, 0).unwrap();
    let lead = Complex64::from_polar(TAU.sqrt(), PI / 4.0) / (2e3f64).sqrt();
    assert!((s0.value - lead).norm() < 1e-14);
    assert_eq!(s0.method, OscMethod::StationaryPhase);
}

#[test]
fn stationary_phase_preconditions() {
    let w = gaussian_weight();
    let h = FnPhase::new(|t: f64| [t, 1.0, 0.0, 0.0, 0.0], Scales::default());
    assert!(matches!(stationary_phase_eval(&w, &h, 0), Err(Error::NoStationaryPoint)));
    assert!(matches!(stationary_phase_eval(&w, &quadratic_phase(10.0, 0.0), 3), Err(Error::Precondition(_))));
}

#[test]
fn finite_differences_are_second_order() {
    // G = w·e^{iH} for a cubic perturbation H = κt³.
    let kappa = 3.0;
    let g = |t: f64| Complex64::from_polar((-t * t).exp(), kappa * t.powi(3));
    for k in [2, 4] {
        let r = richardson_ratio(&g, 0.2, k, 0.05);
        assert!((3.5..=4.5).contains(&r), "order {k}: {r}");
    }
    // Analytic oracle at t = 0: G″ = w″ and G⁗ = w⁗ + 4w′·iH‴ + w·iH⁗ = 12 + 0.
    let d2 = fd_derivative(&g, 0.0, 2, 1e-3);
    assert!((d2 - Complex64::new(-2.0, 0.0)).norm() < 1e-5);
    let eps = 0.02;
    let d4 = (fd_derivative(&g, 0.0, 4, eps / 2.0) * 4.0 - fd_derivative(&g, 0.0, 4, eps)) / 3.0;
    assert!((d4 - Complex64::new(12.0, 0.0)).norm() < 1e-3, "{d4}");
}

#[test]
fn conjugation_symmetry() {
    let w = gaussian_weight();
    let h = FnPhase::new(
        |t: f64| [50.0 * t * t + 4.0 * t.powi(3), 100.0 * t + 12.0 * t * t, 100.0 + 24.0 * t, 24.0, 0.0],
        Scales { y: 50.0, ..Scales::default() },
    );
    let neg = Negated(&h);
    for order in 0..=2 {
        let a = stationary_phase_eval(&w, &h, order).unwrap();
        let b = stationary_phase_eval(&w, &neg, order).unwrap();
        assert_eq!(a.value, b.value.conj());
    }
    let a = osc_quadrature(&w, &h, 1e-12).unwrap();
    let b = osc_quadrature(&w, &neg, 1e-12).unwrap();
    assert!((a.value - b.value.conj()).norm() < 1e-15);
}

fn certificate_bump() -> BumpAmplitude {
    BumpAmplitude { bump: Bump::new(0.0, 16.0), scales: Scales::default() }
}

#[test]
fn certificate_for_a_linear_phase() {
    let k = 1e3;
    let w = certificate_bump();
    let h = FnPhase::new(move |t: f64| [k * t, k, 0.0, 0.0, 0.0], Scales { y: 1.0, q: 100.0, r: k, ..Scales::default() });
    let c = nonstationary_certificate(&w, &h, 3).unwrap();
    assert_eq!(c.method, OscMethod::NegligibleCertificate);
    assert_eq!(c.value, Complex64::new(0.0, 0.0));
    assert!((c.err_estimate / (16.0 * 1e-9) - 1.0).abs() < 1e-5, "{}", c.err_estimate);
    let oracle = osc_quadrature(&w, &h, 1e-13).unwrap();
    assert!(oracle.value.norm() <= 10.0 * c.err_estimate);

    let trivial = nonstationary_certificate(&w, &h, 0).unwrap();
    assert!((trivial.err_estimate - 2.0 * 16.0).abs() < 1e-12);

    let h10 = FnPhase::new(move |t: f64| [10.0 * k * t, 10.0 * k, 0.0, 0.0, 0.0], Scales { y: 1.0, q: 100.0, r: 10.0 * k, ..Scales::default() });
    let c10 = nonstationary_certificate(&w, &h10, 3).unwrap();
    assert!((c.err_estimate / c10.err_estimate - 1e3).abs() < 1e-6);
}

#[test]
fn certificate_rejects_overstated_scales() {
    let w = certificate_bump();
    let h = FnPhase::new(|t: f64| [100.0 * t, 100.0, 0.0, 0.0, 0.0], Scales { r: 200.0, ..Scales::default() });
    assert!(matches!(nonstationary_certificate(&w, &h, 2), Err(Error::ScaleInconsistent(_))));
    let h = FnPhase::new(|t: f64| [100.0 * t * t, 200.0 * t, 200.0, 0.0, 0.0], Scales { y: 1.0, r: 1.0, ..Scales::default() });
    assert!(nonstationary_certificate(&w, &h, 2).is_err());
}

#[test]
fn certificate_never_beaten_on_random_phases() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let w = certificate_bump();
    for _ in 0..100 {
        let k: f64 = rng.gen_range(30.0..400.0);
        let s: f64 = rng.gen_range(-0.04..0.04);
        let big_a = rng.gen_range(1..=4u32);
        // h′ = k(1 + s t) stays positive on [0, 16].
        let r = k * (1.0 + (16.0 * s).min(0.0));
        let y = (k * s.abs()).max(1.0);
        let h = FnPhase::new(move |t: f64| [k * (t + 0.5 * s * t * t), k * (1.0 + s * t), k * s, 0.0, 0.0], Scales { y, r, ..Scales::default() });
        let c = nonstationary_certificate(&w, &h, big_a).unwrap();
        let oracle = osc_quadrature(&w, &h, 1e-13).unwrap();
        assert!(oracle.value.norm() <= 10.0 * c.err_estimate, "k {k} s {s} A {big_a}: {} vs {}", oracle.value.norm(), c.err_estimate);
    }
}

#[test]
fn two_dimensional_bound() {
    assert_eq!(bound_2d(1.0, 1.0, 5.0).unwrap(), 5.0);
    assert!((bound_2d(2.0, 6.0, 5.0).unwrap() * 4.0 - bound_2d(1.0, 3.0, 5.0).unwrap()).abs() < 1e-15);
    assert!(bound_2d(0.0, 1.0, 1.0).is_err());

    // g ≡ 1 on [−1, 1]², smoothly extended to [−1.5, 1.5]²; f = Y(x² + y²).
    let y = 1e4f64;
    let phi = Plateau::new(-1.5, -1.0, 1.0, 1.5);
    let var = total_variation(|a, b| phi.value(a) * phi.value(b), (-1.5, 1.5), (-1.5, 1.5), 60);
    assert!((var - 4.0).abs() < 1e-3, "var = {var}");
    let lambda = (2.0 * y).sqrt();
    let bound = bound_2d(lambda, lambda, var).unwrap();
    // Separable oracle: the double integral is the square of a 1-D Fresnel integral.
    let (nodes, weights) = gauss_legendre(16);
    let panels = 200_000;
    let width = 3.0 / panels as f64;
    let mut one_d = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let c = -1.5 + width * (p as f64 + 0.5);
        for (t, wt) in nodes.iter().zip(&weights) {
            let x = c + 0.5 * width * t;
            one_d += Complex64::from_polar(phi.value(x), TAU * y * x * x) * (0.5 * width * wt);
        }
    }
    let fresnel = Complex64::from_polar(1.0, PI / 4.0) / (2.0 * y).sqrt();
    assert!((one_d - fresnel).norm() < 1e-3 * fresnel.norm());
    let double = one_d * one_d;
    assert!(double.norm() <= 10.0 * bound, "{} vs {bound}", double.norm());
}

fn i_params(x: f64, q: f64, m: i64, nn: f64) -> IParams {
    IParams { m, nn, q, u: 0.0, alpha: 1.0, beta: 0.5, x_scale: x, sign: 1.0 }
}

#[test]
fn i_integral_degenerate_is_the_bump_mass() {
    let p = IParams { alpha: 0.0, ..i_params(1e4, 7.0, 0, 0.0) };
    let r = eval_I(&p).unwrap();
    assert!((r.value - 1.5).norm() < 1e-12, "{}", r.value);
}

#[test]
fn i_integral_example_configuration() {
    // X = 10⁴, q = 7, m = 1: the linear term dominates and no stationary point exists.
    let p = i_params(1e4, 7.0, 1, 1e3);
    let a = eval_I(&p).unwrap();
    assert_eq!(a.method, OscMethod::Quadrature);
    let h = p.phase();
    assert!(matches!(find_stationary_point(&h, 0.5, 2.5).unwrap(), Stationarity::Absent { .. }));
    assert!(a.value.norm() <= 1.5);
    assert!(a.value.norm() < 1e-9);
}

#[test]
fn i_integral_stationary_configurations() {
    // q = 2√(1.5X) puts the stationary point at y ≈ 1.5.
    for (x, tol) in [(1e4f64, 3e-3), (1e5, 1e-3)] {
        let q = 2.0 * (1.5 * x).sqrt();
        let p = i_params(x, q, 1, 1e3);
        let sp = eval_I(&p).unwrap();
        assert_eq!(sp.method, OscMethod::StationaryPhase);
        let oracle = eval_I_quadrature(&p).unwrap();
        let r = rel(sp.value, oracle.value);
        assert!(r <= tol, "X = {x}: {r}");
        assert!((sp.value - oracle.value).norm() <= 10.0 * sp.err_estimate);
        assert!(oracle.value.norm() <= 1.5);
    }
}

#[test]
fn i_integral_preconditions() {
    assert!(eval_I(&IParams { beta: 1.0, ..i_params(1e4, 7.0, 1, 0.0) }).is_err());
    assert!(eval_I(&IParams { u: 0.5, ..i_params(1e4, 7.0, 1, 0.0) }).is_err());
    assert!(eval_I(&IParams { sign: 0.0, ..i_params(1e4, 7.0, 1, 0.0) }).is_err());
}

#[test]
fn stationary_phase_agrees_with_quadrature_on_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut draws = 0;
    while draws < 60 {
        let (oracle, sp) = if draws % 2 == 0 {
            let y: f64 = rng.gen_range(200.0..5000.0);
            let c: f64 = rng.gen_range(-0.5..0.5);
            let kappa: f64 = rng.gen_range(-0.3..0.3) * y;
            let h = FnPhase::new(
                move |t: f64| {
                    let s = t - c;
                    [y * s * s + kappa * s.powi(3), 2.0 * y * s + 3.0 * kappa * s * s, 2.0 * y + 6.0 * kappa * s, 6.0 * kappa, 0.0]
                },
                Scales { y, ..Scales::default() },
            );
            let w = BumpAmplitude { bump: Bump::new(-1.0, 1.0).sharpness(0.5), scales: Scales { u: 0.5, ..Scales::default() } };
            let oracle = osc_quadrature(&w, &h, 1e-12).unwrap();
            let sp = stationary_phase_eval(&w, &h, 2).unwrap();
            (oracle, sp)
        } else {
            let x: f64 = rng.gen_range(3e4..2e5);
            let y0: f64 = rng.gen_range(1.3..1.7);
            let p = IParams { sign: if rng.gen_bool(0.5) { 1.0 } else { -1.0 }, ..i_params(x, 2.0 * (y0 * x).sqrt(), 1, rng.gen_range(0.0..1e3)) };
            let sp = eval_I(&p).unwrap();
            if sp.method != OscMethod::StationaryPhase {
                continue;
            }
            (eval_I_quadrature(&p).unwrap(), sp)
        };
        let gap = (sp.value - oracle.value).norm();
        assert!(gap <= 10.0 * sp.err_estimate + 1e-12, "draw {draws}: gap {gap:e}, estimate {:e}", sp.err_estimate);
        draws += 1;
    }
}

fn l2_config(x: f64) -> L2Params {
    // Stationary point near y = 1.5 when w = 1.5, with N₀ = (qK)³/X and K = X^{2β/5}.
    let k = x.powf(0.2);
    let q = x / (0.5 * x.sqrt() / 1.5f64.sqrt() - 1.5 * k / 1.5f64.powf(2.0 / 3.0));
    L2Params::new(1, (q * k).powi(3) / x, q, 1.0, 0.5, x, 0.0)
}

#[test]
fn l2_average_degenerate_case() {
    let p = L2Params::new(0, 0.0, 5.0, 0.0, 0.5, 1e3, 0.0);
    let v = l2_average_check(&p).unwrap();
    let exact = l2_weight_mass((1.0, 2.0)).unwrap() * 1.5 * 1.5 * 1e3f64.sqrt();
    assert!((v - exact).abs() < 1e-9 * exact, "{v} vs {exact}");
}

#[test]
fn l2_average_halving_the_support() {
    let full = l2_config(1e4);
    let half = L2Params { w_support: (1.25, 1.75), ..full };
    let ratio = l2_average_check(&half).unwrap() / l2_average_check(&full).unwrap();
    assert!((ratio - 0.5).abs() <= 0.3 * 0.5, "{ratio}");
}

#[test]
fn l2_average_negligible_off_the_stationary_range() {
    // q = 5, m = 1 at X = 10³: Xm/q dwarfs the other frequencies and 𝓘 is negligible.
    let k = 1e3f64.powf(0.2);
    let p = L2Params::new(1, (5.0 * k).powi(3) / 1e3, 5.0, 1.0, 0.5, 1e3, 0.0);
    assert!(l2_average_check(&p).unwrap() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn order_zero_error_scales_like_one_over_y(y in 300.0f64..3000.0) {
        let w = gaussian_weight();
        let h = quadratic_phase(y, 0.0);
        let e = rel(stationary_phase_eval(&w, &h, 0).unwrap().value, gaussian_reference(y));
        // The next term is exactly −1/(2iY)·(leading term) for this pair.
        prop_assert!((e * y - 0.5).abs() < 0.01, "Y {}: Y·err = {}", y, e * y);
    }
}

#[test]
fn library_reference_helpers() {
    for x in [1e3, 1e4, 1e5] {
        let p = L2Params::stationary(x, 0.5).unwrap();
        let q = l2_config(x);
        assert!((p.q / q.q - 1.0).abs() < 1e-13 && (p.n0 / q.n0 - 1.0).abs() < 1e-12);
        assert_eq!((p.m, p.sign), (1, -1.0));
        // The stationary point of 𝓘 at w = 3/2 is y = 3/2.
        let ip = IParams { m: 1, nn: p.n0 * 3.375, q: p.q, u: 0.0, alpha: 1.0, beta: 0.5, x_scale: x, sign: -1.0 };
        let h = ip.phase();
        assert!(h.deriv(1.5, 1).abs() < 1e-9 * h.deriv(1.5, 2).abs().max(1.0));
    }
    let w = gaussian_amplitude();
    let h = twistlab::oscillatory::quadratic_phase(300.0);
    let r = osc_quadrature(&w, &h, 1e-12).unwrap();
    assert!((r.value - twistlab::oscillatory::gaussian_reference(300.0)).norm() < 1e-10);
}
