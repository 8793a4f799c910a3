//! The delta symbol in divisor-sum form,
//!
//! δ(n) = Σ_{d≥1} (1/d) Σ_{c mod d} e(cn/d) (ω(d) − ω(|n|/d)),
//!
//! with ω a bump on [Q/2, Q] normalised so that Σ_d ω(d) = 1. Grouping d = qr
//! by the reduced denominator q of c/d gives δ(n) = Σ_q Σ*_a e(an/q) Δ_q(n),
//! and g(q, x) is the (qQ-scaled) Fourier transform of Δ_q.

use crate::arith::gcd;
use crate::error::{Error, Result};
use crate::numeric::bump::{Bump, Plateau, DYADIC_U};
use crate::numeric::quad::{gauss_legendre, integrate, QuadOptions};
use crate::numeric::sum::ComplexSum;
use crate::numeric::{e, e_frac, Complex64};
use crate::numeric::dd::pow_dd;
use twofloat::TwoFloat;

/// Default truncation |x| ≤ X_CUT used when g is resampled. At L = 100 it
/// leaves ~10⁻⁴ in the round trip; a cut near 80 is needed for 10⁻⁶.
pub const DEFAULT_X_CUT: f64 = 20.0;

#[derive(Debug, Clone)]
pub struct DeltaExpansion {
    l: u64,
    level: f64,
    omega: Bump,
    d_max: u64,
}

impl DeltaExpansion {
    pub fn l(&self) -> u64 {
        self.l
    }

    /// Q = 2√L.
    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn d_max(&self) -> u64 {
        self.d_max
    }

    pub fn omega(&self, t: f64) -> f64 {
        self.omega.value(t)
    }

    /// Δ_q(u) = (1/q) Σ_{r≥1} (ω(qr) − ω(|u|/(qr)))/r.
    pub fn delta_q(&self, q: u64, u: f64) -> f64 {
        let qf = q as f64;
        let (lo, hi) = (self.level / 2.0, self.level);
        let mut acc = 0.0;
        let r_lo = (lo / qf).floor().max(1.0) as u64;
        let r_hi = (hi / qf).ceil() as u64;
        for r in r_lo..=r_hi {
            acc += self.omega(qf * r as f64) / r as f64;
        }
        let a = u.abs();
        if a > 0.0 {
            let r_lo = (a / (qf * hi)).floor().max(1.0) as u64;
            let r_hi = (a / (qf * lo)).ceil() as u64;
            for r in r_lo..=r_hi {
                acc -= self.omega(a / (qf * r as f64)) / r as f64;
            }
        }
        acc / qf
    }
}

pub fn build_delta(l: u64) -> Result<DeltaExpansion> {
    build_delta_with_sharpness(l, 1.0)
}

/// As [`build_delta`] with ω ∝ exp(−c·t²/(1 − t²)); c = 1 is the default
/// shape exp(−1/(1 − t²)) up to a constant.
pub fn build_delta_with_sharpness(l: u64, sharpness: f64) -> Result<DeltaExpansion> {
    if l < 4 {
        return Err(Error::Precondition(format!("detection range L = {l} must be at least 4")));
    }
    if !(sharpness > 0.0) {
        return Err(Error::Precondition("bump sharpness must be positive".into()));
    }
    let level = 2.0 * (l as f64).sqrt();
    let shape = Bump::new(level / 2.0, level).sharpness(sharpness);
    let d_max = level.ceil() as u64;
    let mass: f64 = (1..=d_max).map(|d| shape.value(d as f64)).sum();
    if mass <= 0.0 {
        return Err(Error::Degenerate("ω vanishes at every integer".into()));
    }
    Ok(DeltaExpansion { l, level, omega: shape.amplitude(1.0 / mass), d_max })
}

/// Evaluates the harmonic expansion at n term by term.
pub fn delta_eval(exp: &DeltaExpansion, n: i64) -> Result<f64> {
    if n.unsigned_abs() > exp.l {
        return Err(Error::OutOfRange { what: "n", value: n as f64, limit: exp.l as f64 });
    }
    let a = n.unsigned_abs() as f64;
    let mut acc = ComplexSum::new();
    for d in 1..=exp.d_max {
        let w = exp.omega(d as f64) - exp.omega(a / d as f64);
        if w == 0.0 {
            continue;
        }
        let di = d as i64;
        let mut inner = ComplexSum::new();
        for c in 0..di {
            inner += e_frac(((c as i128 * n as i128).rem_euclid(di as i128)) as i64, di);
        }
        acc += inner.value() * (w / d as f64);
    }
    Ok(acc.value().re)
}

fn check_q(exp: &DeltaExpansion, q: u64) -> Result<()> {
    if q == 0 || q as f64 > exp.level {
        return Err(Error::OutOfRange { what: "q", value: q as f64, limit: exp.level });
    }
    Ok(())
}

/// g(q, x) = ∫ Δ_q(u) W(u/L) e(−ux/(qQ)) du, with W ≡ 1 on [−L, L] and
/// vanishing beyond 2L (only |n| ≤ L is ever detected).
pub fn g_weight(exp: &DeltaExpansion, q: u64, x: f64) -> Result<f64> {
    check_q(exp, q)?;
    let l = exp.l as f64;
    let window = Plateau::new(-2.0 * l, -l, l, 2.0 * l);
    let scale = q as f64 * exp.level;
    let freq = std::f64::consts::TAU * x / scale;
    let panel = (scale / 16.0).min(std::f64::consts::TAU / (4.0 * freq.abs().max(1e-300))).min(l / 8.0);
    let opts = QuadOptions::with_tol(1e-13, 1e-11).max_panel(panel);
    // Δ_q is even, so only the cosine part survives.
    let out = integrate(|u| exp.delta_q(q, u) * window.value(u) * (freq * u).cos(), 0.0, 2.0 * l, opts)?;
    Ok(2.0 * out.value)
}

/// Samples of u ↦ Δ_q(u)W(u/L) on a uniform grid of [0, 2L], from which
/// g(q, ·) can be evaluated at many x by the trapezoid rule (spectrally
/// accurate here, the integrand being smooth, even and compactly supported).
#[derive(Debug, Clone)]
pub struct GSampler {
    q: u64,
    scale: f64,
    step: f64,
    samples: Vec<f64>,
}

impl GSampler {
    pub fn new(exp: &DeltaExpansion, q: u64) -> Result<Self> {
        check_q(exp, q)?;
        let l = exp.l as f64;
        let window = Plateau::new(-2.0 * l, -l, l, 2.0 * l);
        let scale = q as f64 * exp.level;
        let n = ((2.0 * l) / (scale / 400.0).min(l / 200.0)).ceil() as usize;
        let step = 2.0 * l / n as f64;
        let samples = (0..=n)
            .map(|j| {
                let u = j as f64 * step;
                exp.delta_q(q, u) * window.value(u)
            })
            .collect();
        Ok(GSampler { q, scale, step, samples })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn g(&self, x: f64) -> f64 {
        let w = std::f64::consts::TAU * x / self.scale * self.step;
        // cos(jw) by a rotation recurrence, re-seeded every 256 steps
        let mut acc = 0.5 * self.samples[0];
        let (s1, c1) = w.sin_cos();
        let (mut s, mut c) = (0.0f64, 1.0f64);
        for (j, &f) in self.samples.iter().enumerate().skip(1) {
            if j % 256 == 0 {
                let (ss, cc) = (j as f64 * w).sin_cos();
                s = ss;
                c = cc;
            } else {
                let ns = s * c1 + c * s1;
                c = c * c1 - s * s1;
                s = ns;
            }
            acc += f * c;
        }
        2.0 * self.step * acc
    }
}

/// Rebuilds the expansion at n from sampled g:
/// Σ_{q ≤ Q} (1/(qQ)) Σ*_a e(an/q) ∫_{|x| ≤ x_cut} g(q, x) e(nx/(qQ)) dx.
pub fn delta_from_g(exp: &DeltaExpansion, n: i64, x_cut: f64) -> Result<f64> {
    if n.unsigned_abs() > exp.l {
        return Err(Error::OutOfRange { what: "n", value: n as f64, limit: exp.l as f64 });
    }
    let (nodes, weights) = crate::numeric::quad::gauss_legendre(16);
    let panels = (x_cut / 0.5).ceil().max(1.0) as usize;
    let width = x_cut / panels as f64;
    let mut total = 0.0;
    for q in 1..=(exp.level.floor() as u64) {
        let scale = q as f64 * exp.level;
        let ramanujan: f64 = (1..=q as i64)
            .filter(|&a| gcd(a, q as i64) == 1)
            .map(|a| e_frac((a * n).rem_euclid(q as i64), q as i64).re)
            .sum();
        if ramanujan.abs() < 1e-12 {
            continue;
        }
        let sampler = GSampler::new(exp, q)?;
        let freq = std::f64::consts::TAU * n as f64 / scale;
        let mut integral = 0.0;
        for k in 0..panels {
            let c = width * (k as f64 + 0.5);
            for (t, w) in nodes.iter().zip(&weights) {
                let x = c + 0.5 * width * t;
                integral += 0.5 * width * w * sampler.g(x) * (freq * x).cos();
            }
        }
        total += ramanujan * 2.0 * integral / scale;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy)]
pub struct PoissonCheck {
    pub alpha: f64,
    pub beta: f64,
    /// The size X of the summation variable.
    pub x_scale: f64,
    pub q: i64,
    pub a: i64,
    pub v: f64,
    /// The delta-method frequency x.
    pub x: f64,
    /// Delta-method level Q.
    pub level: f64,
}

impl PoissonCheck {
    /// Level √(X/K) with K = X^{2β/5}.
    pub fn new(alpha: f64, beta: f64, x_scale: f64, q: i64, a: i64) -> Self {
        let k = x_scale.powf(0.4 * beta);
        PoissonCheck { alpha, beta, x_scale, q, a, v: 0.0, x: 0.0, level: (x_scale / k).sqrt() }
    }

    /// Effective length of the dual sum, 4·max(qX^{β−1}, 1/Q)·X^{0.05}.
    pub fn m_cut(&self) -> f64 {
        4.0 * (self.q as f64 * self.x_scale.powf(self.beta - 1.0)).max(1.0 / self.level) * self.x_scale.powf(0.05)
    }

    fn validate(&self) -> Result<()> {
        if self.q < 1 || gcd(self.a, self.q) != 1 {
            return Err(Error::Precondition(format!("need gcd(a, q) = 1, got a = {}, q = {}", self.a, self.q)));
        }
        if self.x_scale < 10.0 {
            return Err(Error::Precondition("X must be at least 10".into()));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Precondition("β must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// Σ_m m^{−iv} e(αm^β − am/q − mx/(qQ)) U(m/X).
    pub fn lhs(&self) -> Result<Complex64> {
        self.validate()?;
        let u = DYADIC_U;
        let lo = (u.lo * self.x_scale).floor().max(1.0) as i64;
        let hi = (u.hi * self.x_scale).ceil() as i64;
        let mut acc = ComplexSum::new();
        for m in lo..=hi {
            let w = u.value(m as f64 / self.x_scale);
            if w == 0.0 {
                continue;
            }
            let mf = m as f64;
            let phase = self.alpha * mf.powf(self.beta) - mf * self.x / (self.q as f64 * self.level);
            let twist = e_frac((self.a * m).rem_euclid(self.q), self.q).conj();
            let mellin = Complex64::from_polar(1.0, -self.v * mf.ln());
            acc += mellin * twist * e(phase) * w;
        }
        Ok(acc.value())
    }

    /// One dual term: X^{1−iv} ∫ U(y) y^{−iv} e(α(Xy)^β − Xxy/(qQ) − Xmy/q) dy.
    pub fn dual_term(&self, m: i64) -> Result<Complex64> {
        let u = DYADIC_U;
        let (xs, q) = (self.x_scale, self.q as f64);
        let slope = xs * (self.x / (q * self.level) + m as f64 / q);
        let drift = self.alpha * self.beta * xs.powf(self.beta) * u.lo.powf(self.beta - 1.0);
        let osc = std::f64::consts::TAU * (slope.abs() + drift);
        // About 2.6 panels per oscillation, a ratio kept away from integers so
        // the per-panel rule errors do not add coherently.
        let cycles = (u.hi - u.lo) * osc / std::f64::consts::TAU;
        let panels = ((2.618 * cycles).ceil() as usize + 7).max(200);
        // The phase reaches hundreds of cycles; nodes and phase are carried
        // in double-double and reduced mod 1 so the far dual terms are not
        // swamped by f64 phase noise.
        let slope_dd = TwoFloat::from(xs) * TwoFloat::from(m as f64) / TwoFloat::from(q)
            + TwoFloat::from(xs * self.x) / TwoFloat::from(q * self.level);
        let (alpha, beta) = (TwoFloat::from(self.alpha), TwoFloat::from(self.beta));
        let xs_dd = TwoFloat::from(xs);
        let f = |yd: TwoFloat| {
            let y = yd.hi() + yd.lo();
            let w = u.value(y);
            if w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let mut phase = -(slope_dd * yd);
            if self.alpha != 0.0 {
                phase += alpha * pow_dd(xs_dd * yd, beta);
            }
            let r = phase.fract();
            Complex64::from_polar(w, -self.v * y.ln()) * e(r.hi() + r.lo())
        };
        let coarse = dd_gauss(&f, u.lo, u.hi, 24, panels);
        let fine = dd_gauss(&f, u.lo, u.hi, 32, panels);
        let diff = (fine - coarse).norm();
        if diff > 1e-15 * fine.norm().max(1.0) {
            return Err(Error::Quadrature(format!("dual term m={m}: rules disagree by {diff:.3e}")));
        }
        Ok(Complex64::from_polar(xs, -self.v * xs.ln()) * fine)
    }
}

/// Gauss–Legendre over equal panels with nodes placed in double-double.
fn dd_gauss<F: Fn(TwoFloat) -> Complex64>(f: &F, a: f64, b: f64, order: usize, panels: usize) -> Complex64 {
    let (x, w) = gauss_legendre(order);
    let width = (TwoFloat::from(b) - a) / panels as f64;
    let half = width * 0.5;
    let mut acc = ComplexSum::new();
    for p in 0..panels {
        let c = TwoFloat::from(a) + width * (p as f64 + 0.5);
        for (xi, wi) in x.iter().zip(&w) {
            acc.add(f(c + half * *xi) * (wi * half.hi()));
        }
    }
    acc.value()
}

#[derive(Debug, Clone)]
pub struct PoissonReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub relative_error: f64,
    /// Effective cutoff on |m|.
    pub m_cut: f64,
    /// Largest |m| included on the right.
    pub m_max: i64,
    /// The right-hand side restricted to |m| ≤ m_cut.
    pub truncated: Complex64,
    /// |rhs − truncated| / |rhs|.
    pub tail_ratio: f64,
    /// (|m| bound, relative error of the partial sum) for increasing bounds.
    pub partial_errors: Vec<(i64, f64)>,
}

/// Evaluates both sides of the Poisson step for Σ_m … e(−am/q) U(m/X).
/// The dual sum runs over m ≡ a (mod q), |m| ≤ m_max, where m_max keeps
/// growing until a whole period of residues contributes below 10⁻¹⁵·X.
pub fn verify_poisson_dual_sum(check: &PoissonCheck) -> Result<PoissonReport> {
    check.validate()?;
    let lhs = check.lhs()?;
    let m_cut = check.m_cut();
    let q = check.q;
    let mut terms: Vec<(i64, Complex64)> = Vec::new();
    let floor = 1e-15 * check.x_scale;
    let mut quiet_run = 0;
    let mut block = 0i64;
    // Blocks of one full residue period: (block−1)q < |m| ≤ block·q.
    while quiet_run < 3 {
        block += 1;
        if block * q > 100_000 {
            return Err(Error::Quadrature("dual sum did not settle by |m| = 10^5".into()));
        }
        let mut biggest = 0.0f64;
        let mut members: Vec<i64> = ((block - 1) * q + 1..=block * q).flat_map(|m| [m, -m]).collect();
        if block == 1 {
            members.push(0);
        }
        for m in members {
            if (m - check.a).rem_euclid(q) != 0 {
                continue;
            }
            let t = check.dual_term(m)?;
            biggest = biggest.max(t.norm());
            terms.push((m, t));
        }
        quiet_run = if biggest < floor { quiet_run + 1 } else { 0 };
    }
    terms.sort_by_key(|t| (t.0.abs(), t.0));
    let mut rhs_acc = ComplexSum::new();
    let mut truncated = ComplexSum::new();
    for &(m, t) in &terms {
        rhs_acc += t;
        if (m as f64).abs() <= m_cut {
            truncated += t;
        }
    }
    let rhs = rhs_acc.value();
    let truncated = truncated.value();
    let scale = lhs.norm().max(f64::MIN_POSITIVE);
    let mut partial_errors = Vec::new();
    let mut partial = ComplexSum::new();
    let mut idx = 0;
    let max_abs = terms.iter().map(|t| t.0.abs()).max().unwrap_or(0);
    for b in 0..=max_abs {
        while idx < terms.len() && terms[idx].0.abs() <= b {
            partial += terms[idx].1;
            idx += 1;
        }
        partial_errors.push((b, (partial.value() - lhs).norm() / scale));
    }
    Ok(PoissonReport {
        lhs,
        rhs,
        relative_error: (lhs - rhs).norm() / scale,
        m_cut,
        m_max: max_abs,
        truncated,
        tail_ratio: (rhs - truncated).norm() / rhs.norm().max(f64::MIN_POSITIVE),
        partial_errors,
    })
}
