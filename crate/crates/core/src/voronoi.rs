//! GL(3) Voronoi summation checked numerically.
//!
//! The transforms
//!
//! Ψ_k(x) = ∫_{(σ)} (π³x)^{−s} G_k(s) ψ̃(−s−k) ds,  k = 0, 1,
//!
//! are computed along a vertical line (ds = i dt, no 1/2πi), with G_k a ratio
//! of three Γ-quotients. The left side Σ λ(m,n) e(an/q) ψ(n) is summed
//! directly; the right side is the Kloosterman-weighted dual sum over n₁ | qm
//! and n₂ plus, for τ₃, the residue at s = 1.
//!
//! Ψ_k(x)·(π³x)^σ/i is a Fourier transform in L = log(π³x) of the sampled
//! integrand, so the dual sum evaluates it on an FFT grid in L and corrects
//! to the exact abscissa with a short Taylor series in the offset.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::arith::{divisors, gcd, mod_inv};
use crate::coefficients::{HeckeKind, HeckeTable};
use crate::error::{Error, Result};
use crate::expsums::kloosterman;
use crate::numeric::bump::Bump;
use crate::numeric::gamma::ln_gamma;
use crate::numeric::quad::gauss_legendre;
use crate::numeric::sum::{ComplexSum, NeumaierSum};
use crate::numeric::zeta::hurwitz_zeta;
use crate::numeric::{e_frac, TAU};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Shortest period in L = log(π³x) of the trapezoid rule in t. As L → −∞ the
/// transform times e^{σL} decays like e^{dL}, d the distance from σ to the
/// nearest pole, and the pole order puts a factor ~L² in front, so the alias one
/// period away is ~L²e^{−dL}. The period doubles until that is below 10⁻¹³.
const L_PERIOD: f64 = 80.0;
const L_PERIOD_MAX: f64 = 1280.0;
const TAYLOR_TERMS: usize = 14;

/// Langlands parameters (α₁, α₂, α₃) of a spherical GL(3) form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParams {
    alpha: [Complex64; 3],
}

impl SpectralParams {
    pub fn new(alpha: [Complex64; 3]) -> Result<Self> {
        let sum = alpha[0] + alpha[1] + alpha[2];
        if !(sum.norm() <= 1e-12) {
            return Err(Error::Precondition(format!("spectral parameters must sum to zero, got {sum}")));
        }
        Ok(SpectralParams { alpha })
    }

    pub fn real(a1: f64, a2: f64, a3: f64) -> Result<Self> {
        Self::new([a1.into(), a2.into(), a3.into()])
    }

    /// From the type (ν₁, ν₂): α = (−ν₁ − 2ν₂ + 1, −ν₁ + ν₂, 2ν₁ + ν₂ − 1).
    pub fn from_type(nu1: Complex64, nu2: Complex64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        SpectralParams {
            alpha: [-nu1 - nu2 * 2.0 + one, -nu1 + nu2, nu1 * 2.0 + nu2 - one],
        }
    }

    /// The minimal-parabolic Eisenstein series with coefficients τ₃.
    pub fn trivial() -> Self {
        SpectralParams { alpha: [Complex64::new(0.0, 0.0); 3] }
    }

    pub fn alpha(&self) -> [Complex64; 3] {
        self.alpha
    }
}

/// Π_i Γ((s + num_i)/2) / Γ((−s + den_i)/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRatio {
    pub num: [Complex64; 3],
    pub den: [Complex64; 3],
}

impl GammaRatio {
    pub fn ln_value(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            acc += ln_gamma((s + self.num[i]) * 0.5) - ln_gamma((-s + self.den[i]) * 0.5);
        }
        acc
    }

    pub fn value(&self, s: Complex64) -> Complex64 {
        self.ln_value(s).exp()
    }

    /// The abscissa on which |G(σ + it)| tends to a constant as |t| → ∞.
    pub fn balanced_sigma(&self) -> f64 {
        -(0..3).map(|i| self.num[i].re - self.den[i].re).sum::<f64>() / 6.0
    }

    /// Real part of the rightmost pole; admissible contours lie to its right.
    pub fn pole_abscissa(&self) -> f64 {
        self.num.iter().map(|c| -c.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Archimedean type of the form, which fixes the Γ-ratios of both parities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Archimedean {
    Spherical(SpectralParams),
    /// Symmetric square of a holomorphic form of even weight w: Γ_R(s+1)Γ_C(s+w−1)
    /// at infinity. Twisting by an odd character turns Γ_R(s+1) into Γ_R(s) and
    /// leaves Γ_C alone; both parities have the same ε-factors as the
    /// spherical case.
    HolomorphicSym2 { weight: u32 },
}

impl Archimedean {
    pub fn for_kind(kind: HeckeKind) -> Self {
        match kind {
            HeckeKind::EisensteinTau3 => Archimedean::Spherical(SpectralParams::trivial()),
            HeckeKind::Sym2Delta => Archimedean::HolomorphicSym2 { weight: 12 },
        }
    }

    /// G_k in the variable s of Ψ_k.
    pub fn ratio(&self, k: u8) -> GammaRatio {
        assert!(k <= 1, "only k = 0, 1 occur");
        let c = |x: f64| Complex64::new(x, 0.0);
        match *self {
            Archimedean::Spherical(p) => {
                let a = p.alpha();
                let shift = 1.0 + 2.0 * k as f64;
                GammaRatio {
                    num: [a[0] + shift, a[1] + shift, a[2] + shift],
                    den: [-a[0], -a[1], -a[2]],
                }
            }
            Archimedean::HolomorphicSym2 { weight } => {
                let w = weight as f64;
                if k == 0 {
                    // Γ_R(s + ν) with ν = (1, w−1, w)
                    GammaRatio { num: [c(2.0), c(w), c(w + 1.0)], den: [c(1.0), c(w - 1.0), c(w)] }
                } else {
                    // ν = (0, w−1, w), written in s = u − 1
                    GammaRatio { num: [c(2.0), c(w + 1.0), c(w + 2.0)], den: [c(-1.0), c(w - 2.0), c(w - 1.0)] }
                }
            }
        }
    }
}

/// A finite sum of bumps, each compactly supported in (0, ∞).
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    parts: Vec<Bump>,
}

impl TestFunction {
    pub fn from_bump(b: Bump) -> Result<Self> {
        if !(b.lo > 0.0 && b.hi > b.lo) {
            return Err(Error::Precondition(format!("test function support [{}, {}] not inside (0, ∞)", b.lo, b.hi)));
        }
        Ok(TestFunction { parts: vec![b] })
    }

    pub fn bump(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Precondition(format!("test function support [{lo}, {hi}] not inside (0, ∞)")));
        }
        Self::from_bump(Bump::new(lo, hi))
    }

    /// The standard bump on [Y, 2Y].
    pub fn dyadic(y: f64) -> Result<Self> {
        Self::bump(y, 2.0 * y)
    }

    pub fn plus(&self, other: &TestFunction) -> TestFunction {
        let mut parts = self.parts.clone();
        parts.extend_from_slice(&other.parts);
        TestFunction { parts }
    }

    pub fn parts(&self) -> &[Bump] {
        &self.parts
    }

    pub fn value(&self, x: f64) -> f64 {
        self.parts.iter().map(|b| b.value(x)).sum()
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.parts.iter().map(|b| b.deriv(x, 1)).sum()
    }

    pub fn support(&self) -> (f64, f64) {
        let lo = self.parts.iter().map(|b| b.lo).fold(f64::INFINITY, f64::min);
        let hi = self.parts.iter().map(|b| b.hi).fold(0.0, f64::max);
        (lo, hi)
    }

    /// ∫|ψ′|.
    pub fn derivative_l1(&self) -> f64 {
        let (lo, hi) = self.support();
        gauss_sum(|y| self.deriv(y).abs(), lo, hi, 24, 400)
    }
}

fn gauss_sum<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, order: usize, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut acc = NeumaierSum::new();
    for p in 0..panels {
        let c = a + width * (p as f64 + 0.5);
        for (xi, wi) in x.iter().zip(&w) {
            acc += f(c + 0.5 * width * xi) * wi * 0.5 * width;
        }
    }
    acc.value()
}

fn gauss_sum_complex<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, order: usize, panels: usize) -> Complex64 {
    let (x, w) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut acc = ComplexSum::new();
    for p in 0..panels {
        let c = a + width * (p as f64 + 0.5);
        for (xi, wi) in x.iter().zip(&w) {
            acc += f(c + 0.5 * width * xi) * (wi * 0.5 * width);
        }
    }
    acc.value()
}

/// ψ̃(s) = ∫ψ(x) x^{s−1} dx, by Gauss–Legendre in u = log x at two orders.
pub fn mellin(psi: &TestFunction, s: Complex64) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for b in psi.parts() {
        let (ul, uh) = (b.lo.ln(), b.hi.ln());
        let panels = (s.im.abs() * (uh - ul) / PI).ceil() as usize + 48;
        let f = |u: f64| (s * u).exp() * b.value(u.exp());
        let coarse = gauss_sum_complex(f, ul, uh, 16, panels);
        let fine = gauss_sum_complex(f, ul, uh, 24, panels);
        let scale = gauss_sum(|u| b.value(u.exp()) * (s.re * u).exp(), ul, uh, 24, 8);
        if (fine - coarse).norm() > 1e-13 * scale {
            return Err(Error::Quadrature(format!(
                "Mellin transform at s = {s} unresolved: orders differ by {:.2e}",
                (fine - coarse).norm()
            )));
        }
        total += fine;
    }
    Ok(total)
}

/// (π³x)^{−s} G_k(s) ψ̃(−s−k), the Ψ_k integrand (without the ds = i dt).
pub fn psi_integrand(x: f64, k: u8, arch: &Archimedean, psi: &TestFunction, s: Complex64) -> Result<Complex64> {
    let g = arch.ratio(k).ln_value(s);
    let m = mellin(psi, -s - k as f64)?;
    Ok((g - s * (PI.powi(3) * x).ln()).exp() * m)
}

/// Samples of G_k(σ+it) ψ̃(−σ−k−it) on the grid t = j·h.
#[derive(Debug, Clone)]
pub struct PsiLine {
    k: u8,
    sigma: f64,
    h: f64,
    /// index of `f[0]`
    j0: i64,
    f: Vec<Complex64>,
    t_cut: f64,
    mass: f64,
}

impl PsiLine {
    pub fn new(arch: &Archimedean, psi: &TestFunction, k: u8, sigma: f64) -> Result<Self> {
        let ratio = arch.ratio(k);
        let dist = sigma - ratio.pole_abscissa();
        if !(dist > 0.0) {
            return Err(Error::Precondition(format!(
                "σ = {sigma} lies left of the pole at {}",
                ratio.pole_abscissa()
            )));
        }
        if dist < 1e-3 {
            return Err(Error::Contour(format!("σ = {sigma} is within {dist:.1e} of a pole")));
        }
        let mut period = L_PERIOD;
        while period * period * (-period * dist).exp() > 1e-16 {
            period *= 2.0;
            if period > L_PERIOD_MAX {
                return Err(Error::Contour(format!(
                    "σ = {sigma} is {dist:.1e} from a pole; the trapezoid aliases cannot be suppressed"
                )));
            }
        }
        let c = -sigma - k as f64;
        let h = TAU / period;
        let (lo, hi) = psi.support();
        let (ul, uh) = (lo.ln(), hi.ln());
        let mut planner = FftPlanner::<f64>::new();
        for log2n in 14..=23u32 {
            let n = 1usize << log2n;
            let du = period / n as f64;
            let p0 = (ul / du).ceil() as i64;
            let p1 = (uh / du).floor() as i64;
            if (p1 - p0 + 1) as usize > n {
                continue;
            }
            // Trapezoid rule in u is spectrally accurate for a compactly
            // supported C^∞ integrand; its aliases sit one period 2π/du away in t.
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            for p in p0..=p1 {
                let u = p as f64 * du;
                buf[(p - p0) as usize] = Complex64::new(psi.value(u.exp()) * (c * u).exp(), 0.0);
            }
            planner.plan_fft_forward(n).process(&mut buf);
            let half = (n / 2) as i64;
            let mellin_at = |j: i64| -> Complex64 {
                let idx = j.rem_euclid(n as i64) as usize;
                buf[idx] * e_frac(-(j % n as i64) * (p0 % n as i64), n as i64) * du
            };
            let peak = (-half..half).map(|j| mellin_at(j).norm()).fold(0.0, f64::max);
            let mut f = Vec::with_capacity(n);
            for j in -half..half {
                let m = mellin_at(j);
                // Below this the samples are rounding noise.
                if m.norm() <= 1e-16 * peak {
                    f.push(Complex64::new(0.0, 0.0));
                    continue;
                }
                let s = Complex64::new(sigma, j as f64 * h);
                f.push(ratio.value(s) * m);
            }
            let mass: f64 = f.iter().map(|z| z.norm()).sum();
            let outer: f64 = f
                .iter()
                .enumerate()
                .filter(|(i, _)| (*i as i64 - half).abs() > half / 2)
                .map(|(_, z)| z.norm())
                .sum();
            if !mass.is_finite() {
                return Err(Error::Contour("non-finite integrand on the contour".into()));
            }
            if outer > 1e-14 * mass {
                continue;
            }
            // Trim to the samples that matter and locate T_cut.
            let mut tail = 0.0;
            let (mut keep, mut t_cut) = (0i64, 0.0);
            for r in (0..half).rev() {
                let a = f[(half + r) as usize].norm() + if r > 0 { f[(half - r) as usize].norm() } else { 0.0 };
                tail += a;
                if tail > 1e-17 * mass && keep == 0 {
                    keep = r + 1;
                }
                if tail > 1e-9 * mass {
                    t_cut = (r + 1) as f64 * h;
                    break;
                }
            }
            let keep = keep.min(half - 1);
            let f: Vec<Complex64> = f[(half - keep) as usize..=(half + keep) as usize].to_vec();
            return Ok(PsiLine { k, sigma, h, j0: -keep, f, t_cut, mass: mass * h });
        }
        Err(Error::Contour("Mellin tail still above 10⁻¹⁴ of the mass at 2²³ samples".into()))
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Height beyond which the integrand carries less than 10⁻⁹ of ∫|integrand|.
    pub fn t_cut(&self) -> f64 {
        self.t_cut
    }

    /// Largest |t| kept in the samples.
    pub fn t_max(&self) -> f64 {
        -self.j0 as f64 * self.h
    }

    /// ∫|G_k ψ̃| dt along the line.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Spacing of the t-grid.
    pub fn step(&self) -> f64 {
        self.h
    }

    /// Stored G_k(σ+it) ψ̃(−σ−k−it) at the grid point nearest `t`; `None` off the kept range.
    pub fn sample(&self, t: f64) -> Option<Complex64> {
        let j = (t / self.h).round() as i64 - self.j0;
        usize::try_from(j).ok().and_then(|j| self.f.get(j).copied())
    }

    /// Ψ_k(x) by the trapezoid rule along the line.
    pub fn eval(&self, x: f64) -> Complex64 {
        let l = (PI.powi(3) * x).ln();
        let step = Complex64::from_polar(1.0, -self.h * l);
        let mut acc = ComplexSum::new();
        let mut rot = Complex64::new(0.0, 0.0);
        for (i, fj) in self.f.iter().enumerate() {
            if i % 64 == 0 {
                rot = Complex64::from_polar(1.0, -((self.j0 + i as i64) as f64 * self.h) * l);
            } else {
                rot *= step;
            }
            acc += fj * rot;
        }
        I * (-self.sigma * l).exp() * acc.value() * self.h
    }

    /// Evaluator on an FFT grid covering x ∈ [x_min, x_max].
    pub fn grid(&self, x_min: f64, x_max: f64) -> Result<PsiGrid> {
        if !(x_min > 0.0 && x_max >= x_min) {
            return Err(Error::Precondition(format!("bad grid range [{x_min}, {x_max}]")));
        }
        let c3 = PI.powi(3);
        let (la, lb) = ((c3 * x_min).ln(), (c3 * x_max).ln());
        let period = TAU / self.h;
        if lb - la > 0.5 * period {
            return Err(Error::OutOfRange { what: "log range of x", value: lb - la, limit: 0.5 * period });
        }
        let jmax = (-self.j0) as usize;
        let n = (8 * (jmax + 1)).next_power_of_two().max(1024);
        let dl = period / n as f64;
        let l0 = la - dl;
        let count = ((lb - l0) / dl).ceil() as usize + 2;
        let t_scale = n as f64 * self.h / 8.0;
        let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
        let mut planes = Vec::with_capacity(TAYLOR_TERMS);
        for r in 0..TAYLOR_TERMS {
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            for (i, fj) in self.f.iter().enumerate() {
                let j = self.j0 + i as i64;
                let t = j as f64 * self.h;
                buf[j.rem_euclid(n as i64) as usize] =
                    fj * (t / t_scale).powi(r as i32) * Complex64::from_polar(1.0, -t * l0);
            }
            fft.process(&mut buf);
            buf.truncate(count);
            for v in buf.iter_mut() {
                *v *= self.h;
            }
            planes.push(buf);
        }
        Ok(PsiGrid { sigma: self.sigma, l0, dl, t_scale, planes })
    }
}

/// Ψ_k on a uniform grid in log(π³x) plus Taylor planes for off-grid points.
#[derive(Debug, Clone)]
pub struct PsiGrid {
    sigma: f64,
    l0: f64,
    dl: f64,
    t_scale: f64,
    planes: Vec<Vec<Complex64>>,
}

impl PsiGrid {
    pub fn eval(&self, x: f64) -> Complex64 {
        let l = (PI.powi(3) * x).ln();
        let pos = (l - self.l0) / self.dl;
        let m = pos.round();
        assert!(m >= 0.0 && (m as usize) < self.planes[0].len(), "x = {x} outside the grid");
        let delta = l - (self.l0 + m * self.dl);
        let z = -I * delta * self.t_scale;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut coef = Complex64::new(1.0, 0.0);
        for (r, plane) in self.planes.iter().enumerate() {
            if r > 0 {
                coef *= z / r as f64;
            }
            acc += coef * plane[m as usize];
        }
        I * (-self.sigma * l).exp() * acc
    }
}

/// Data for one application of the summation formula.
#[derive(Debug, Clone)]
pub struct VoronoiContext<'a> {
    pub table: &'a HeckeTable,
    pub q: i64,
    pub a: i64,
    pub m: i64,
    pub arch: Archimedean,
    pub psi: TestFunction,
    pub n2_cut: usize,
    /// Added to the balanced abscissa of both Γ-ratios.
    pub sigma_offset: f64,
}

impl<'a> VoronoiContext<'a> {
    /// m = 1, the archimedean type of the table, and a suggested n₂ cut.
    pub fn new(table: &'a HeckeTable, q: i64, a: i64, psi: TestFunction) -> Result<Self> {
        let arch = Archimedean::for_kind(table.kind());
        let n2_cut = suggest_n2_cut(&psi, q, 1)?;
        let ctx = VoronoiContext { table, q, a, m: 1, arch, psi, n2_cut, sigma_offset: 0.0 };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 1 || self.m < 1 {
            return Err(Error::Precondition(format!("need q, m ≥ 1, got q = {}, m = {}", self.q, self.m)));
        }
        if gcd(self.a, self.q) != 1 {
            return Err(Error::NotInvertible { a: self.a, modulus: self.q });
        }
        if self.n2_cut < 10 {
            return Err(Error::Precondition("n₂ cut must be at least 10".into()));
        }
        Ok(())
    }

    /// The contour abscissa used for Ψ_k.
    pub fn sigma(&self, k: u8) -> f64 {
        self.arch.ratio(k).balanced_sigma() + self.sigma_offset
    }
}

/// An n₂ cut past which the Mellin transform at the stationary height
/// 2(π³xY)^{1/3} has dropped below 10⁻⁶ of its value at height zero.
pub fn suggest_n2_cut(psi: &TestFunction, q: i64, m: i64) -> Result<usize> {
    let (lo, _) = psi.support();
    let base = mellin(psi, Complex64::new(0.5, 0.0))?.norm();
    let mut t = 50.0;
    while mellin(psi, Complex64::new(0.5, -t))?.norm() > 1e-6 * base {
        t *= 1.25;
        if t > 1e5 {
            return Err(Error::Precondition("test function Mellin transform decays too slowly".into()));
        }
    }
    let x = (t / 2.0).powi(3) / (PI.powi(3) * lo);
    Ok(((x * (q * q * q * m) as f64).ceil() as usize).max(100))
}

/// Σ_n λ(m, n) e(an/q) ψ(n) by direct summation.
pub fn voronoi_lhs(ctx: &VoronoiContext) -> Result<Complex64> {
    Ok(lhs_parts(ctx)?.0)
}

/// (Σ λ e ψ, Σ |λ ψ|)
fn lhs_parts(ctx: &VoronoiContext) -> Result<(Complex64, f64)> {
    ctx.validate()?;
    let (lo, hi) = ctx.psi.support();
    let (n_lo, n_hi) = (lo.ceil().max(1.0) as usize, hi.floor() as usize);
    if n_hi > ctx.table.max_n() {
        return Err(Error::Capacity { requested: n_hi as u64, limit: ctx.table.max_n() as u64 });
    }
    let mut acc = ComplexSum::new();
    let mut mass = NeumaierSum::new();
    for n in n_lo..=n_hi {
        let lam = ctx.table.get(ctx.m as usize, n)?;
        let w = lam * ctx.psi.value(n as f64);
        acc += e_frac((ctx.a as i128 * n as i128 % ctx.q as i128) as i64, ctx.q) * w;
        mass += w.abs();
    }
    Ok((acc.value(), mass.value()))
}

/// The right side of the summation formula, with its pieces.
#[derive(Debug, Clone, Copy)]
pub struct VoronoiRhs {
    pub value: Complex64,
    /// Dual-sum contributions of the + and − branches.
    pub plus: Complex64,
    pub minus: Complex64,
    /// Residue at s = 1 (zero for cusp forms).
    pub polar: Complex64,
    /// |contribution| of n₂ ∈ (n₂_cut/10, n₂_cut].
    pub last_decade: f64,
    pub terms: usize,
    pub t_max: [f64; 2],
}

/// The right side, failing if the last decade of n₂ exceeds 10⁻⁴ of the total.
pub fn voronoi_rhs(ctx: &VoronoiContext) -> Result<VoronoiRhs> {
    let r = voronoi_rhs_truncated(ctx)?;
    if r.last_decade > 1e-4 * r.value.norm() {
        return Err(Error::Precondition(format!(
            "n₂ cut {} too small: last decade contributes {:.2e} of {:.3e}",
            ctx.n2_cut,
            r.last_decade,
            r.value.norm()
        )));
    }
    Ok(r)
}

/// The right side at the given cut, without the tail check.
pub fn voronoi_rhs_truncated(ctx: &VoronoiContext) -> Result<VoronoiRhs> {
    ctx.validate()?;
    let (q, m) = (ctx.q, ctx.m);
    let qm = q * m;
    if ctx.n2_cut > ctx.table.max_m() || qm as usize > ctx.table.max_n() {
        return Err(Error::Capacity {
            requested: ctx.n2_cut.max(qm as usize) as u64,
            limit: ctx.table.max_m().min(ctx.table.max_n()) as u64,
        });
    }
    let abar = mod_inv(ctx.a, q)?;
    let lines = [
        PsiLine::new(&ctx.arch, &ctx.psi, 0, ctx.sigma(0))?,
        PsiLine::new(&ctx.arch, &ctx.psi, 1, ctx.sigma(1))?,
    ];
    let q3m = (q * q * q * m) as f64;
    let x_min = 1.0 / q3m;
    let x_max = (qm * qm) as f64 * ctx.n2_cut as f64 / q3m;
    let grids = [lines[0].grid(x_min, x_max)?, lines[1].grid(x_min, x_max)?];
    let c3 = PI.powi(3);

    let mut branch = [ComplexSum::new(), ComplexSum::new()];
    let mut decade = [ComplexSum::new(), ComplexSum::new()];
    let mut terms = 0;
    for n1 in divisors(qm as u64) {
        let n1 = n1 as i64;
        let modulus = qm / n1;
        if qm % n1 != 0 {
            return Err(Error::Precondition(format!("Kloosterman modulus: {n1} ∤ {qm}")));
        }
        let mut kl = [Vec::with_capacity(modulus as usize), Vec::with_capacity(modulus as usize)];
        for r in 0..modulus {
            kl[0].push(kloosterman(m * abar, r, modulus)?);
            kl[1].push(kloosterman(m * abar, -r, modulus)?);
        }
        for n2 in 1..=ctx.n2_cut {
            let lam = ctx.table.get(n2, n1 as usize)?;
            if lam == 0.0 {
                continue;
            }
            let x = (n1 * n1) as f64 * n2 as f64 / q3m;
            let (p0, p1) = (grids[0].eval(x), grids[1].eval(x));
            let corr = -I * p1 / (c3 * x);
            let coef = lam / (n1 as f64 * n2 as f64);
            let r = n2 % modulus as usize;
            let vals = [kl[0][r] * (p0 + corr) * coef, kl[1][r] * (p0 - corr) * coef];
            for b in 0..2 {
                branch[b] += vals[b];
                if n2 * 10 > ctx.n2_cut {
                    decade[b] += vals[b];
                }
            }
            terms += 1;
        }
    }
    let pref = Complex64::new(0.0, -1.0) * (q as f64 * PI.powf(-2.5) / 4.0);
    let plus = pref * branch[0].value();
    let minus = pref * branch[1].value();
    let polar = polar_term(ctx)?;
    let last_decade = (pref * (decade[0].value() + decade[1].value())).norm();
    Ok(VoronoiRhs {
        value: plus + minus + polar,
        plus,
        minus,
        polar,
        last_decade,
        terms,
        t_max: [lines[0].t_max(), lines[1].t_max()],
    })
}

/// Res_{s=1} ψ̃(s) Σ λ(1,n) e(an/q) n^{−s}; non-zero only for τ₃.
///
/// Σ τ₃(n) e(an/q) n^{−s} = q^{−3s} Σ_{b ∈ [1,q]³} e(a b₁b₂b₃/q) Π ζ(s, b_i/q),
/// and the residue is taken by the trapezoid rule on |s − 1| = 1/2.
pub fn polar_term(ctx: &VoronoiContext) -> Result<Complex64> {
    if ctx.table.kind() != HeckeKind::EisensteinTau3 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if ctx.m != 1 {
        return Err(Error::Precondition("the τ₃ polar term is implemented for m = 1".into()));
    }
    let q = ctx.q;
    let qu = q as usize;
    let (rho, nodes) = (0.5, 64);
    let mut acc = ComplexSum::new();
    for j in 0..nodes {
        let w = Complex64::from_polar(1.0, TAU * j as f64 / nodes as f64);
        let s = 1.0 + w * rho;
        let z: Vec<Complex64> = (1..=qu).map(|b| hurwitz_zeta(s, b as f64 / q as f64)).collect();
        // pair[r] = Σ_{b₁b₂ ≡ r} ζ(s, b₁/q) ζ(s, b₂/q)
        let mut pair = vec![Complex64::new(0.0, 0.0); qu];
        for b1 in 1..=qu {
            for b2 in 1..=qu {
                pair[(b1 * b2) % qu] += z[b1 - 1] * z[b2 - 1];
            }
        }
        let mut d = Complex64::new(0.0, 0.0);
        for (r, pr) in pair.iter().enumerate() {
            for b3 in 1..=qu {
                let ph = (ctx.a as i128 * r as i128 * b3 as i128).rem_euclid(q as i128) as i64;
                d += e_frac(ph, q) * pr * z[b3 - 1];
            }
        }
        d *= (-s * 3.0 * (q as f64).ln()).exp();
        acc += mellin(&ctx.psi, s)? * d * w;
    }
    Ok(acc.value() * (rho / nodes as f64))
}

/// |lhs − rhs| / max(|lhs|, 10⁻³ Σ|λψ|).
pub fn voronoi_residual(ctx: &VoronoiContext) -> Result<f64> {
    let (lhs, mass) = lhs_parts(ctx)?;
    let rhs = voronoi_rhs(ctx)?;
    Ok(relative_residual(lhs, rhs.value, mass))
}

pub fn relative_residual(lhs: Complex64, rhs: Complex64, abs_mass: f64) -> f64 {
    (lhs - rhs).norm() / lhs.norm().max(1e-3 * abs_mass)
}

/// Σ_n |λ(m,n) ψ(n)|, the scale used by [`voronoi_residual`].
pub fn lhs_abs_mass(ctx: &VoronoiContext) -> Result<f64> {
    Ok(lhs_parts(ctx)?.1)
}

/// Ψ_k(x) on the line Re s = σ.
pub fn psi_k(x: f64, k: u8, ctx: &VoronoiContext, sigma: f64) -> Result<Complex64> {
    if !(x > 0.0) {
        return Err(Error::Precondition(format!("x = {x} must be positive")));
    }
    Ok(PsiLine::new(&ctx.arch, &ctx.psi, k, sigma)?.eval(x))
}

fn phase_integral<F: Fn(f64) -> Complex64>(psi: &TestFunction, x: f64, f: F) -> Complex64 {
    let (lo, hi) = psi.support();
    let span = 6.0 * PI * x.cbrt() * (hi.cbrt() - lo.cbrt());
    let panels = (span / PI).ceil() as usize + 16;
    gauss_sum_complex(|y| f(y) * psi.value(y), lo, hi, 20, panels)
}

/// ∫ψ(y) (cos φ, sin φ) (π³xy)^{−j/3} dy with φ = 6π(xy)^{1/3}.
pub fn psi0_basis(x: f64, j: u32, psi: &TestFunction) -> (f64, f64) {
    let v = phase_integral(psi, x, |y| {
        let phi = 6.0 * PI * (x * y).cbrt();
        Complex64::new(phi.cos(), phi.sin()) * (PI.powi(3) * x * y).powf(-(j as f64) / 3.0)
    });
    (v.re, v.im)
}

/// 2π⁴x |∫ψ(y) (π³xy)^{−1/3} e^{iφ} dy|: the size of the leading term after
/// the oscillation in y has cancelled.
pub fn psi0_envelope(x: f64, psi: &TestFunction) -> f64 {
    let (a, b) = psi0_basis(x, 1, psi);
    2.0 * PI.powi(4) * x * a.hypot(b)
}

/// 2π⁴ix ∫ψ(y) Σ_{j ≤ J} (c_j cos φ + d_j sin φ)/(π³xy)^{j/3} dy.
pub fn psi0_asymptotic(x: f64, j_terms: usize, psi: &TestFunction, coeffs: &[(Complex64, Complex64)]) -> Result<Complex64> {
    let (lo, _) = psi.support();
    if !(x * lo >= 10.0) {
        return Err(Error::Precondition(format!("xY = {} below 10", x * lo)));
    }
    if j_terms > coeffs.len() || j_terms == 0 {
        return Err(Error::Precondition(format!("J = {j_terms} with {} coefficient pairs", coeffs.len())));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, &(c, d)) in coeffs.iter().take(j_terms).enumerate() {
        let (bc, bs) = psi0_basis(x, j as u32 + 1, psi);
        acc += c * bc + d * bs;
    }
    Ok(I * 2.0 * PI.powi(4) * x * acc)
}

/// Least-squares (c_j, d_j), j ≤ J, from Ψ₀ values on the line, each sample
/// weighted by 1/[`psi0_envelope`].
pub fn fit_psi0_coefficients(
    line: &PsiLine,
    psi: &TestFunction,
    xs: &[f64],
    j_terms: usize,
) -> Result<Vec<(Complex64, Complex64)>> {
    if line.k() != 0 {
        return Err(Error::Precondition("fit needs the k = 0 line".into()));
    }
    if xs.len() < 2 * j_terms + 2 {
        return Err(Error::Precondition(format!("{} samples for {} unknowns", xs.len(), 2 * j_terms)));
    }
    let cols = 2 * j_terms;
    let mut a = nalgebra::DMatrix::<f64>::zeros(xs.len(), cols);
    let mut b_re = nalgebra::DVector::<f64>::zeros(xs.len());
    let mut b_im = nalgebra::DVector::<f64>::zeros(xs.len());
    for (row, &x) in xs.iter().enumerate() {
        let env = psi0_envelope(x, psi);
        let scale = 2.0 * PI.powi(4) * x / env;
        for j in 0..j_terms {
            let (bc, bs) = psi0_basis(x, j as u32 + 1, psi);
            a[(row, 2 * j)] = bc * scale;
            a[(row, 2 * j + 1)] = bs * scale;
        }
        // Ψ₀/i = 2π⁴x Σ (c A + d B)
        let target = line.eval(x) / I / env;
        b_re[row] = target.re;
        b_im[row] = target.im;
    }
    let svd = a.svd(true, true);
    let re = svd.solve(&b_re, 1e-13).map_err(|e| Error::Degenerate(e.to_string()))?;
    let im = svd.solve(&b_im, 1e-13).map_err(|e| Error::Degenerate(e.to_string()))?;
    Ok((0..j_terms)
        .map(|j| (Complex64::new(re[2 * j], im[2 * j]), Complex64::new(re[2 * j + 1], im[2 * j + 1])))
        .collect())
}
