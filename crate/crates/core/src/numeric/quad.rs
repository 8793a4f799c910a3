//! Adaptive Gauss–Kronrod (7/15) quadrature for complex-valued integrands,
//! plus fixed Gauss–Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Initial panels are no wider than this.
    pub max_panel: Option<f64>,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 200_000,
            max_panel: None,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        QuadOptions {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    pub fn max_panel(mut self, width: f64) -> Self {
        self.max_panel = Some(width);
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOutcome<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).norm())
}

/// Integrates `f` over `[a, b]`. Fails loudly if the tolerance cannot be met.
pub fn integrate_complex<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> Result<QuadOutcome<Complex64>> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadOutcome {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
        });
    }
    if b < a {
        let r = integrate_complex(f, b, a, opts)?;
        return Ok(QuadOutcome {
            value: -r.value,
            ..r
        });
    }
    let n_init = match opts.max_panel {
        Some(w) if w > 0.0 => ((b - a) / w).ceil().max(1.0) as usize,
        _ => 1,
    };
    if n_init > opts.max_subdivisions {
        return Err(Error::Quadrature(format!(
            "{n_init} initial panels exceed the subdivision budget {}",
            opts.max_subdivisions
        )));
    }
    let width = (b - a) / n_init as f64;
    let breaks: Vec<f64> = (0..=n_init)
        .map(|i| if i == n_init { b } else { a + width * i as f64 })
        .collect();
    integrate_complex_panels(f, &breaks, opts)
}

/// Adaptive integration seeded with the panels `breaks[i]..breaks[i+1]`
/// (increasing). The error budget is shared globally across panels.
pub fn integrate_complex_panels<F: Fn(f64) -> Complex64>(
    f: F,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<QuadOutcome<Complex64>> {
    if breaks.len() < 2 {
        return Err(Error::Quadrature("need at least one panel".into()));
    }
    let (a, b) = (breaks[0], breaks[breaks.len() - 1]);
    let n_init = breaks.len() - 1;
    if n_init > opts.max_subdivisions {
        return Err(Error::Quadrature(format!(
            "{n_init} initial panels exceed the subdivision budget {}",
            opts.max_subdivisions
        )));
    }
    let mut heap = BinaryHeap::with_capacity(n_init * 2);
    let mut total = Complex64::new(0.0, 0.0);
    let mut total_err = 0.0;
    let mut evals = 0usize;
    for w in breaks.windows(2) {
        let (pa, pb) = (w[0], w[1]);
        if !(pb > pa) {
            return Err(Error::Quadrature(format!("panel breaks not increasing at {pa}")));
        }
        let (v, err) = gk15(&f, pa, pb);
        evals += 15;
        total += v;
        total_err += err;
        heap.push(Panel { a: pa, b: pb, value: v, error: err });
    }
    let mut panels = n_init;
    loop {
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::Quadrature("integrand produced a non-finite value".into()));
        }
        let target = opts.abs_tol.max(opts.rel_tol * total.norm());
        if total_err <= target {
            break;
        }
        if panels >= opts.max_subdivisions {
            return Err(Error::Quadrature(format!(
                "no convergence after {panels} panels on [{a}, {b}]: error {total_err:.3e} > target {target:.3e}"
            )));
        }
        let worst = heap.pop().expect("heap holds every panel");
        let mid = 0.5 * (worst.a + worst.b);
        if (worst.b - worst.a) < 64.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0) {
            return Err(Error::Quadrature(format!(
                "panel at {mid} collapsed below machine resolution; error {total_err:.3e}"
            )));
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        evals += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
        panels += 1;
    }
    // Re-sum to shed drift from the incremental updates.
    let mut value = crate::numeric::sum::ComplexSum::new();
    let mut err = 0.0;
    for p in heap.iter() {
        value.add(p.value);
        err += p.error;
    }
    Ok(QuadOutcome {
        value: value.value(),
        error: err,
        evaluations: evals,
    })
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadOutcome<f64>> {
    let r = integrate_complex(|x| Complex64::new(f(x), 0.0), a, b, opts)?;
    Ok(QuadOutcome {
        value: r.value.re,
        error: r.error,
        evaluations: r.evaluations,
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, refined in double-double
/// so both are correctly rounded to f64. Coherent sums over many panels would
/// otherwise pick up the weight rounding at the 10⁻¹⁵ level.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    use twofloat::TwoFloat;
    assert!(n >= 1);
    let legendre = |x: TwoFloat| -> (TwoFloat, TwoFloat) {
        let (mut p0, mut p1) = (TwoFloat::from(1.0), x);
        for k in 2..=n {
            let p2 = (x * p1 * ((2 * k - 1) as f64) - p0 * ((k - 1) as f64)) / (k as f64);
            p0 = p1;
            p1 = p2;
        }
        let (pn, pn1) = if n == 1 { (x, TwoFloat::from(1.0)) } else { (p1, p0) };
        (pn, (x * pn - pn1) * (n as f64) / (x * x - 1.0))
    };
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = TwoFloat::from((std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos());
        for _ in 0..100 {
            let (pn, dp) = legendre(x);
            let dx = pn / dp;
            x -= dx;
            if dx.hi().abs() < 1e-30 {
                break;
            }
        }
        let (_, dp) = legendre(x);
        let w = TwoFloat::from(2.0) / ((TwoFloat::from(1.0) - x * x) * dp * dp);
        let (xf, wf) = (x.hi() + x.lo(), w.hi() + w.lo());
        nodes[i] = -xf;
        nodes[n - 1 - i] = xf;
        weights[i] = wf;
        weights[n - 1 - i] = wf;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Fixed-order Gauss–Legendre on `[a, b]` with `panels` equal sub-panels.
pub fn fixed_gauss<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, order: usize, panels: usize) -> Complex64 {
    let (x, w) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut acc = crate::numeric::sum::ComplexSum::new();
    for p in 0..panels {
        let c = a + width * (p as f64 + 0.5);
        for (xi, wi) in x.iter().zip(&w) {
            acc.add(f(c + 0.5 * width * xi) * (wi * 0.5 * width));
        }
    }
    acc.value()
}
