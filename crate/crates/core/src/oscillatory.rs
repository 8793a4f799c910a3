//! Oscillatory integrals I = ∫ w(t) e^{ih(t)} dt: an adaptive quadrature
//! oracle, the stationary-phase expansion, non-stationary certificates, a
//! two-dimensional second-derivative bound, and the y-integral 𝓘 arising after
//! Voronoi summation together with its L² average.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::numeric::bump::{Bump, Plateau, DYADIC_U};
use crate::numeric::quad::{fixed_gauss, integrate, integrate_complex_panels, QuadOptions};
use crate::numeric::Complex64;

/// Size parameters in the sense of the non-stationary and stationary phase
/// lemmas: |w^{(j)}| ≲ X/U^j and |h^{(j)}| ≲ Y/Q^j, |h′| ≥ R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub q: f64,
    pub r: f64,
}

impl Default for Scales {
    fn default() -> Self {
        Scales { x: 1.0, y: 1.0, u: 1.0, q: 1.0, r: 0.0 }
    }
}

pub trait PhaseFunction: Sync {
    /// h^{(k)}(t) for k ≤ 4.
    fn deriv(&self, t: f64, k: usize) -> f64;
    fn scales(&self) -> Scales;

    fn value(&self, t: f64) -> f64 {
        self.deriv(t, 0)
    }
}

pub trait AmplitudeFunction: Sync {
    /// w^{(k)}(t) for k ≤ 4; zero outside the support.
    fn deriv(&self, t: f64, k: usize) -> f64;
    fn support(&self) -> (f64, f64);
    fn scales(&self) -> Scales;

    fn value(&self, t: f64) -> f64 {
        self.deriv(t, 0)
    }
}

/// A phase given by a closure returning (h, h′, h″, h‴, h⁗).
pub struct FnPhase<F> {
    f: F,
    scales: Scales,
}

impl<F: Fn(f64) -> [f64; 5] + Sync> FnPhase<F> {
    pub fn new(f: F, scales: Scales) -> Self {
        FnPhase { f, scales }
    }
}

impl<F: Fn(f64) -> [f64; 5] + Sync> PhaseFunction for FnPhase<F> {
    fn deriv(&self, t: f64, k: usize) -> f64 {
        (self.f)(t)[k]
    }
    fn scales(&self) -> Scales {
        self.scales
    }
}

/// An amplitude given by a closure returning (w, w′, …, w⁗) on `support`.
pub struct FnAmplitude<F> {
    f: F,
    support: (f64, f64),
    scales: Scales,
}

impl<F: Fn(f64) -> [f64; 5] + Sync> FnAmplitude<F> {
    pub fn new(f: F, support: (f64, f64), scales: Scales) -> Self {
        FnAmplitude { f, support, scales }
    }
}

impl<F: Fn(f64) -> [f64; 5] + Sync> AmplitudeFunction for FnAmplitude<F> {
    fn deriv(&self, t: f64, k: usize) -> f64 {
        if t < self.support.0 || t > self.support.1 {
            return 0.0;
        }
        (self.f)(t)[k]
    }
    fn support(&self) -> (f64, f64) {
        self.support
    }
    fn scales(&self) -> Scales {
        self.scales
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BumpAmplitude {
    pub bump: Bump,
    pub scales: Scales,
}

impl AmplitudeFunction for BumpAmplitude {
    fn deriv(&self, t: f64, k: usize) -> f64 {
        self.bump.deriv(t, k)
    }
    fn support(&self) -> (f64, f64) {
        self.bump.support()
    }
    fn scales(&self) -> Scales {
        self.scales
    }
}

/// The plateau weight; its derivatives are taken by central differences.
#[derive(Debug, Clone, Copy)]
pub struct PlateauAmplitude {
    pub plateau: Plateau,
    pub scales: Scales,
}

impl AmplitudeFunction for PlateauAmplitude {
    fn deriv(&self, t: f64, k: usize) -> f64 {
        let f = |x: f64| Complex64::new(self.plateau.value(x), 0.0);
        if k == 0 {
            return self.plateau.value(t);
        }
        let h = 2e-3 * (self.plateau.flat_lo - self.plateau.lo).min(self.plateau.hi - self.plateau.flat_hi);
        fd_derivative(&f, t, k, h).re
    }
    fn support(&self) -> (f64, f64) {
        (self.plateau.lo, self.plateau.hi)
    }
    fn scales(&self) -> Scales {
        self.scales
    }
}

/// h ↦ −h.
pub struct Negated<'a, P: ?Sized>(pub &'a P);

impl<P: PhaseFunction + ?Sized> PhaseFunction for Negated<'_, P> {
    fn deriv(&self, t: f64, k: usize) -> f64 {
        -self.0.deriv(t, k)
    }
    fn scales(&self) -> Scales {
        self.0.scales()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscMethod {
    Quadrature,
    StationaryPhase,
    NegligibleCertificate,
}

#[derive(Debug, Clone)]
pub struct OscResult {
    pub value: Complex64,
    pub err_estimate: f64,
    pub method: OscMethod,
    /// Hypotheses of the stationary-phase lemma that the inputs do not meet.
    pub warnings: Vec<String>,
}

impl OscResult {
    pub fn conj(mut self) -> Self {
        self.value = self.value.conj();
        self
    }
}

/// Panels no wider than one local oscillation 2π/max(1, |h′|).
fn oscillation_breaks<P: PhaseFunction + ?Sized>(h: &P, a: f64, b: f64) -> Result<Vec<f64>> {
    let mut breaks = vec![a];
    let mut t = a;
    let min_step = (b - a) * 1e-9;
    while t < b {
        let mut step = TAU / h.deriv(t, 1).abs().max(1.0);
        let ahead = (t + step).min(b);
        step = step.min(TAU / h.deriv(ahead, 1).abs().max(1.0));
        let mid = (t + 0.5 * step).min(b);
        step = step.min(TAU / h.deriv(mid, 1).abs().max(1.0)).max(min_step);
        t = (t + step).min(b);
        breaks.push(t);
        if breaks.len() > 20_000_000 {
            return Err(Error::Quadrature("phase oscillates too fast to partition".into()));
        }
    }
    Ok(breaks)
}

/// ∫ w e^{ih} over the support of w, to absolute accuracy tol·∫|w|.
pub fn osc_quadrature<A, P>(w: &A, h: &P, tol: f64) -> Result<OscResult>
where
    A: AmplitudeFunction + ?Sized,
    P: PhaseFunction + ?Sized,
{
    if !(tol > 1e-14 && tol < 1e-2) {
        return Err(Error::Precondition(format!("tolerance {tol} outside (1e-14, 1e-2)")));
    }
    let (a, b) = w.support();
    let breaks = oscillation_breaks(h, a, b)?;
    let mass = fixed_gauss(|t| Complex64::new(w.value(t).abs(), 0.0), a, b, 20, 64).re;
    let opts = QuadOptions {
        abs_tol: tol * mass.max(f64::MIN_POSITIVE),
        rel_tol: 0.0,
        max_subdivisions: (breaks.len() * 64).max(200_000),
        max_panel: None,
    };
    let out = integrate_complex_panels(|t| Complex64::from_polar(w.value(t), h.value(t)), &breaks, opts)?;
    Ok(OscResult { value: out.value, err_estimate: out.error, method: OscMethod::Quadrature, warnings: Vec::new() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stationarity {
    Point(f64),
    /// No zero of h′; `min_slope` is the smallest |h′| found.
    Absent { min_slope: f64 },
}

const GRID: usize = 256;

/// Locates the unique zero of h′ in [a, b].
pub fn find_stationary_point<P: PhaseFunction + ?Sized>(h: &P, a: f64, b: f64) -> Result<Stationarity> {
    if !(b > a) {
        return Err(Error::Precondition(format!("empty interval [{a}, {b}]")));
    }
    let ts: Vec<f64> = (0..=GRID).map(|i| a + (b - a) * i as f64 / GRID as f64).collect();
    let d: Vec<f64> = ts.iter().map(|&t| h.deriv(t, 1)).collect();
    let mut brackets = Vec::new();
    for i in 0..GRID {
        if d[i] == 0.0 {
            if i == 0 || d[i - 1] != 0.0 {
                brackets.push((ts[i], ts[i]));
            }
        } else if d[i] * d[i + 1] < 0.0 {
            brackets.push((ts[i], ts[i + 1]));
        }
    }
    if d[GRID] == 0.0 && d[GRID - 1] != 0.0 {
        brackets.push((ts[GRID], ts[GRID]));
    }
    if d.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate("h′ vanishes identically".into()));
    }
    match brackets.len() {
        0 => {
            let (i, _) = d
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
                .expect("non-empty grid");
            // golden-section refinement of |h′| around the grid minimum
            let (mut lo, mut hi) = (ts[i.saturating_sub(1)], ts[(i + 1).min(GRID)]);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                let m1 = hi - g * (hi - lo);
                let m2 = lo + g * (hi - lo);
                if h.deriv(m1, 1).abs() < h.deriv(m2, 1).abs() {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let min_slope = d[i].abs().min(h.deriv(0.5 * (lo + hi), 1).abs());
            Ok(Stationarity::Absent { min_slope })
        }
        1 => {
            let (mut lo, mut hi) = brackets[0];
            if lo == hi {
                return Ok(Stationarity::Point(lo));
            }
            let flo = h.deriv(lo, 1);
            let mut t = 0.5 * (lo + hi);
            for _ in 0..200 {
                let f = h.deriv(t, 1);
                if f == 0.0 {
                    break;
                }
                if (f < 0.0) == (flo < 0.0) {
                    lo = t;
                } else {
                    hi = t;
                }
                let f2 = h.deriv(t, 2);
                let newton = t - f / f2;
                t = if f2 != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
                if hi - lo < 1e-13 * t.abs().max(1.0) || (f / f2).abs() < 1e-14 * t.abs().max(1.0) {
                    break;
                }
            }
            Ok(Stationarity::Point(t))
        }
        n => Err(Error::MultipleStationaryPoints(n)),
    }
}

/// Central difference for the k-th derivative with step `eps`, O(eps²).
pub fn fd_derivative<F: Fn(f64) -> Complex64 + ?Sized>(g: &F, t: f64, k: usize, eps: f64) -> Complex64 {
    if k == 0 {
        return g(t);
    }
    // even order: symmetric stencil on the integer grid; odd order: half-integer grid
    let mut acc = Complex64::new(0.0, 0.0);
    let mut binom = 1.0f64;
    for j in 0..=k {
        let offset = (k as f64 / 2.0 - j as f64) * eps;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += g(t + offset) * (sign * binom);
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    acc / eps.powi(k as i32)
}

/// Ratio (D(ε) − D(ε/2)) / (D(ε/2) − D(ε/4)); about 4 for an O(ε²) scheme.
pub fn richardson_ratio<F: Fn(f64) -> Complex64 + ?Sized>(g: &F, t: f64, k: usize, eps: f64) -> f64 {
    let d1 = fd_derivative(g, t, k, eps);
    let d2 = fd_derivative(g, t, k, eps / 2.0);
    let d3 = fd_derivative(g, t, k, eps / 4.0);
    (d1 - d2).norm() / (d2 - d3).norm()
}

fn extrapolated_derivative<F: Fn(f64) -> Complex64 + ?Sized>(g: &F, t: f64, k: usize, eps: f64) -> Complex64 {
    let d2 = fd_derivative(g, t, k, eps / 2.0);
    let d3 = fd_derivative(g, t, k, eps / 4.0);
    (d3 * 4.0 - d2) / 3.0
}

fn sp_warnings<A, P>(w: &A, h: &P, t0: f64, h2: f64) -> Vec<String>
where
    A: AmplitudeFunction + ?Sized,
    P: PhaseFunction + ?Sized,
{
    let mut out = Vec::new();
    let (a, b) = w.support();
    let sw = w.scales();
    let sh = h.scales();
    let delta = 0.09;
    let z = sh.q + sw.x + sh.y + (b - a) + 1.0;
    if sh.y < z.powf(3.0 * delta) {
        out.push(format!("Y = {} below Z^(3δ) = {:.3}", sh.y, z.powf(3.0 * delta)));
    }
    let u_floor = sh.q * z.powf(delta / 2.0) / sh.y.sqrt();
    if !(b - a >= sw.u && sw.u >= u_floor) {
        out.push(format!("need b − a ≥ U ≥ QZ^(δ/2)/√Y = {u_floor:.3e}, have U = {}", sw.u));
    }
    if h2.abs() < 0.1 * sh.y / (sh.q * sh.q) {
        out.push(format!("|h″(t₀)| = {:.3e} small against Y/Q² at t₀ = {t0}", h2.abs()));
    }
    out
}

/// Stationary-phase value e^{ih(t₀)}/√h″(t₀) · Σ_{n ≤ order} p_n(t₀), with
/// G^{(2n)}(t₀) from extrapolated central differences.
pub fn stationary_phase_eval<A, P>(w: &A, h: &P, order: usize) -> Result<OscResult>
where
    A: AmplitudeFunction,
    P: PhaseFunction,
{
    stationary_phase_dyn(w, h, order)
}

fn stationary_phase_dyn(w: &dyn AmplitudeFunction, h: &dyn PhaseFunction, order: usize) -> Result<OscResult> {
    if order > 2 {
        return Err(Error::Precondition(format!("expansion order {order} exceeds 2")));
    }
    let (a, b) = w.support();
    let t0 = match find_stationary_point(h, a, b)? {
        Stationarity::Point(t) => t,
        Stationarity::Absent { .. } => return Err(Error::NoStationaryPoint),
    };
    let h2 = h.deriv(t0, 2);
    if h2 < 0.0 {
        return stationary_phase_dyn(w, &Negated(h), order).map(OscResult::conj);
    }
    if !(h2 > 0.0) {
        return Err(Error::Degenerate(format!("h″(t₀) = {h2} at t₀ = {t0}")));
    }
    let h0 = h.value(t0);
    let g = |t: f64| {
        let s = t - t0;
        let big_h = h.value(t) - h0 - 0.5 * h2 * s * s;
        Complex64::from_polar(w.value(t), big_h)
    };
    let h3 = h.deriv(t0, 3).abs();
    let h4 = h.deriv(t0, 4).abs();
    let mut eps = 0.5 * w.scales().u.min(b - a);
    if h3 > 0.0 {
        eps = eps.min(h3.powf(-1.0 / 3.0));
    }
    if h4 > 0.0 {
        eps = eps.min(h4.powf(-0.25));
    }
    eps = eps.min(h2.powf(-0.5)).max(1e-6 * t0.abs().max(1.0));
    let lead = Complex64::from_polar(1.0, h0) / h2.sqrt();
    let base = (TAU).sqrt() * Complex64::from_polar(1.0, PI / 4.0);
    let factor = Complex64::new(0.0, 1.0 / (2.0 * h2));
    let mut sum = Complex64::new(0.0, 0.0);
    let mut next = Complex64::new(0.0, 0.0);
    let mut fact = 1.0;
    let mut pow = Complex64::new(1.0, 0.0);
    for n in 0..=order + 1 {
        if n > 0 {
            fact *= n as f64;
            pow *= factor;
        }
        let gd = if n == 0 { g(t0) } else { extrapolated_derivative(&g, t0, 2 * n, eps) };
        let p = base / fact * pow * gd;
        if n <= order {
            sum += p;
        } else {
            next = p;
        }
    }
    Ok(OscResult {
        value: lead * sum,
        err_estimate: (lead * next).norm(),
        method: OscMethod::StationaryPhase,
        warnings: sp_warnings(w, h, t0, h2),
    })
}

fn sample_points(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * (i as f64 + 0.5) / n as f64)
}

/// Checks |h^{(j)}| ≤ 10·Y/Q^j (j = 2, 3, 4) on a sample grid.
pub fn check_phase_scales<P: PhaseFunction + ?Sized>(h: &P, a: f64, b: f64) -> Result<()> {
    let s = h.scales();
    for t in sample_points(a, b, 200) {
        for j in 2..=4 {
            let v = h.deriv(t, j).abs();
            let cap = 10.0 * s.y / s.q.powi(j as i32);
            if v > cap * (1.0 + 1e-12) {
                return Err(Error::ScaleInconsistent(format!("|h^({j})({t})| = {v:.3e} exceeds 10·Y/Q^{j} = {cap:.3e}")));
            }
        }
    }
    Ok(())
}

/// Checks |w^{(j)}| ≤ 10·X/U^j (j ≤ 4) on a sample grid.
pub fn check_amplitude_scales<A: AmplitudeFunction + ?Sized>(w: &A) -> Result<()> {
    let s = w.scales();
    let (a, b) = w.support();
    for t in sample_points(a, b, 200) {
        for j in 0..=4 {
            let v = w.deriv(t, j).abs();
            let cap = 10.0 * s.x / s.u.powi(j as i32);
            if v > cap * (1.0 + 1e-12) {
                return Err(Error::ScaleInconsistent(format!("|w^({j})({t})| = {v:.3e} exceeds 10·X/U^{j} = {cap:.3e}")));
            }
        }
    }
    Ok(())
}

/// Certificate (b − a)·X·((QR/√Y)^{−A} + (RU)^{−A}) for a phase without
/// stationary points; the value is reported as 0.
pub fn nonstationary_certificate<A, P>(w: &A, h: &P, big_a: u32) -> Result<OscResult>
where
    A: AmplitudeFunction + ?Sized,
    P: PhaseFunction + ?Sized,
{
    let (a, b) = w.support();
    check_amplitude_scales(w)?;
    check_phase_scales(h, a, b)?;
    let sh = h.scales();
    let sw = w.scales();
    match find_stationary_point(h, a, b)? {
        Stationarity::Point(t) => {
            return Err(Error::Precondition(format!("h′ vanishes at {t}; no certificate")));
        }
        Stationarity::Absent { min_slope } => {
            if min_slope < sh.r * (1.0 - 1e-9) {
                return Err(Error::ScaleInconsistent(format!(
                    "declared R = {} exceeds the measured min |h′| = {min_slope}",
                    sh.r
                )));
            }
        }
    }
    let r = sh.r;
    let first = (sh.q * r / sh.y.sqrt()).powi(-(big_a as i32));
    let second = (r * sw.u).powi(-(big_a as i32));
    let bound = (b - a) * sw.x * (first + second);
    Ok(OscResult {
        value: Complex64::new(0.0, 0.0),
        err_estimate: bound,
        method: OscMethod::NegligibleCertificate,
        warnings: Vec::new(),
    })
}

/// var(g)/(Λ₁Λ₂).
pub fn bound_2d(lambda1: f64, lambda2: f64, g_var: f64) -> Result<f64> {
    if !(lambda1 > 0.0 && lambda2 > 0.0) {
        return Err(Error::Precondition("Λ₁, Λ₂ must be positive".into()));
    }
    Ok(g_var / (lambda1 * lambda2))
}

/// ∬ |∂²g/∂x∂y| over [x0, x1] × [y0, y1] (tensor Gauss rule, mixed partial by
/// central differences).
pub fn total_variation<G: Fn(f64, f64) -> f64>(g: G, xr: (f64, f64), yr: (f64, f64), panels: usize) -> f64 {
    let (nodes, weights) = crate::numeric::quad::gauss_legendre(10);
    let hx = 1e-4 * (xr.1 - xr.0);
    let hy = 1e-4 * (yr.1 - yr.0);
    let mixed = |x: f64, y: f64| {
        (g(x + hx, y + hy) - g(x + hx, y - hy) - g(x - hx, y + hy) + g(x - hx, y - hy)) / (4.0 * hx * hy)
    };
    let cells = |r: (f64, f64)| {
        let w = (r.1 - r.0) / panels as f64;
        let mut pts = Vec::with_capacity(panels * nodes.len());
        for p in 0..panels {
            let c = r.0 + w * (p as f64 + 0.5);
            for (n, wt) in nodes.iter().zip(&weights) {
                pts.push((c + 0.5 * w * n, 0.5 * w * wt));
            }
        }
        pts
    };
    let xs = cells(xr);
    let ys = cells(yr);
    let mut acc = 0.0;
    for &(x, wx) in &xs {
        for &(y, wy) in &ys {
            acc += wx * wy * mixed(x, y).abs();
        }
    }
    acc
}

/// Parameters of 𝓘(m, nn, q) = ∫ U(y) e(α(Xy)^β − Xmy/q ± 3(X·nn·(y+u))^{1/3}/q) dy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IParams {
    pub m: i64,
    pub nn: f64,
    pub q: f64,
    pub u: f64,
    pub alpha: f64,
    pub beta: f64,
    pub x_scale: f64,
    /// +1 or −1, the sign in front of the cube-root term.
    pub sign: f64,
}

impl IParams {
    fn validate(&self) -> Result<()> {
        if !(self.q >= 1.0) || !(self.x_scale > 0.0) || !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Precondition("need q ≥ 1, X > 0 and 0 < β < 1".into()));
        }
        if self.u.abs() >= 0.25 {
            return Err(Error::Precondition(format!("shift u = {} is not small", self.u)));
        }
        if self.nn < 0.0 || (self.sign != 1.0 && self.sign != -1.0) {
            return Err(Error::Precondition("need nn ≥ 0 and sign ±1".into()));
        }
        Ok(())
    }

    /// The phase 2π·f(y) with analytic derivatives.
    pub fn phase(&self) -> impl PhaseFunction + '_ {
        let p = *self;
        let c1 = p.alpha * p.x_scale.powf(p.beta);
        let c2 = p.x_scale * p.m as f64 / p.q;
        let c3 = p.sign * 3.0 * (p.x_scale * p.nn).cbrt() / p.q;
        let y_scale = c1.abs() + c2.abs() + c3.abs();
        let scales = Scales { x: 1.0, y: TAU * y_scale.max(1.0), u: 0.5, q: 1.0, r: 0.0 };
        FnPhase::new(
            move |y: f64| {
                let mut out = [0.0; 5];
                // y^β and (y+u)^{1/3} with their derivatives
                let mut pb = y.powf(p.beta);
                let z = y + p.u;
                let mut pc = z.cbrt();
                let (mut eb, mut ec) = (p.beta, 1.0 / 3.0);
                for (k, slot) in out.iter_mut().enumerate() {
                    let lin = match k {
                        0 => c2 * y,
                        1 => c2,
                        _ => 0.0,
                    };
                    *slot = TAU * (c1 * pb - lin + c3 * pc);
                    pb *= eb / y;
                    pc *= ec / z;
                    eb -= 1.0;
                    ec -= 1.0;
                }
                out
            },
            scales,
        )
    }
}

fn dyadic_amplitude() -> PlateauAmplitude {
    PlateauAmplitude { plateau: DYADIC_U, scales: Scales { x: 1.0, u: 0.05, ..Scales::default() } }
}

/// 𝓘 by stationary phase (order 2) when h′ has a unique zero on the support
/// of U, otherwise by quadrature.
#[allow(non_snake_case)]
pub fn eval_I(p: &IParams) -> Result<OscResult> {
    p.validate()?;
    let w = dyadic_amplitude();
    let h = p.phase();
    let (a, b) = w.support();
    match find_stationary_point(&h, a, b) {
        Ok(Stationarity::Point(_)) => stationary_phase_eval(&w, &h, 2),
        Ok(Stationarity::Absent { .. }) | Err(Error::MultipleStationaryPoints(_)) | Err(Error::Degenerate(_)) => {
            osc_quadrature(&w, &h, 1e-11)
        }
        Err(e) => Err(e),
    }
}

/// 𝓘 by quadrature only.
#[allow(non_snake_case)]
pub fn eval_I_quadrature(p: &IParams) -> Result<OscResult> {
    p.validate()?;
    osc_quadrature(&dyadic_amplitude(), &p.phase(), 1e-11)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Params {
    pub m: i64,
    pub n0: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub x_scale: f64,
    pub u: f64,
    pub sign: f64,
    /// Support of the bump W.
    pub w_support: (f64, f64),
}

impl L2Params {
    pub fn new(m: i64, n0: f64, q: f64, alpha: f64, beta: f64, x_scale: f64, u: f64) -> Self {
        L2Params { m, n0, q, alpha, beta, x_scale, u, sign: -1.0, w_support: (1.0, 2.0) }
    }
}

/// 𝓦·X^β with 𝓦 = ∫ W(w) |𝓘(m, N₀w³, q)|² dw and W the standard bump.
pub fn l2_average_check(p: &L2Params) -> Result<f64> {
    let bump = Bump::new(p.w_support.0, p.w_support.1);
    let point = |w: f64| -> Result<f64> {
        let ip = IParams {
            m: p.m,
            nn: p.n0 * w * w * w,
            q: p.q,
            u: p.u,
            alpha: p.alpha,
            beta: p.beta,
            x_scale: p.x_scale,
            sign: p.sign,
        };
        Ok(eval_I_quadrature(&ip)?.value.norm_sqr())
    };
    // The w-dependence enters through a phase of size about 3(X·N₀)^{1/3}/q.
    let freq = 3.0 * (p.x_scale * p.n0).cbrt() / p.q * (p.w_support.1 - p.w_support.0);
    let panels = (freq.ceil() as usize).clamp(32, 400);
    let (nodes, weights) = crate::numeric::quad::gauss_legendre(12);
    let width = (p.w_support.1 - p.w_support.0) / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        let c = p.w_support.0 + width * (k as f64 + 0.5);
        for (n, wt) in nodes.iter().zip(&weights) {
            let w = c + 0.5 * width * n;
            acc += 0.5 * width * wt * bump.value(w) * point(w)?;
        }
    }
    Ok(acc * p.x_scale.powf(p.beta))
}

/// ∫ W for the bump used by [`l2_average_check`].
pub fn l2_weight_mass(w_support: (f64, f64)) -> Result<f64> {
    let bump = Bump::new(w_support.0, w_support.1);
    Ok(integrate(|w| bump.value(w), w_support.0, w_support.1, QuadOptions::default())?.value)
}

impl L2Params {
    /// m = 1, sign −, K = X^{2β/5}, N₀ = (qK)³/X, and q chosen so that the
    /// stationary point of 𝓘 sits at y = 3/2 when w = 3/2. Here 𝓦·X^β is of
    /// exact order one.
    pub fn stationary(x_scale: f64, beta: f64) -> Result<Self> {
        let k = x_scale.powf(0.4 * beta);
        // h′(3/2) = 0 with α = 1: αβX^β y^{β−1} = Xm/q − (XN₀w³)^{1/3}/(q y^{2/3}).
        let (y, w) = (1.5f64, 1.5f64);
        let grow = beta * x_scale.powf(beta) * y.powf(beta - 1.0);
        let denom = grow - w * k / y.powf(2.0 / 3.0);
        if !(denom > 0.0) {
            return Err(Error::Precondition(format!("no stationary configuration at X = {x_scale}, β = {beta}")));
        }
        let q = x_scale / denom;
        Ok(L2Params::new(1, (q * k).powi(3) / x_scale, q, 1.0, beta, x_scale, 0.0))
    }
}

/// The Gaussian e^{−t²} on [−6, 6] with its derivatives, for reference runs.
pub fn gaussian_amplitude() -> impl AmplitudeFunction {
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

/// h(t) = Y t².
pub fn quadratic_phase(y: f64) -> impl PhaseFunction {
    FnPhase::new(move |t: f64| [y * t * t, 2.0 * y * t, 2.0 * y, 0.0, 0.0], Scales { y, ..Scales::default() })
}

/// ∫_ℝ e^{−t²} e^{iYt²} dt = √(π/(1 − iY)).
pub fn gaussian_reference(y: f64) -> Complex64 {
    (Complex64::new(PI, 0.0) / Complex64::new(1.0, -y)).sqrt()
}
