//! The twisted sum S(X) = Σ λ(1,n) e(αn^β) V(n/X) over a grid of X, the
//! growth exponent fitted to it, and the comparison with known bounds.

use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use twofloat::TwoFloat;

use crate::coefficients::{HeckeKind, HeckeTable};
use crate::error::{Error, Result};
use crate::numeric::bump::Bump;
use crate::numeric::dd::pow_dd;
use crate::numeric::quad::fixed_gauss;
use crate::numeric::sum::{ComplexSum, NeumaierSum};
use crate::numeric::{e, TAU};

/// Shape of the weight V on [1, 2]. `sharpness` c gives exp(−c·t²/(1−t²)) in
/// the affine coordinate t ∈ [−1, 1]; c = 4 is exp(−1/((x−1)(2−x)))·e⁴.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VSpec {
    pub sharpness: f64,
}

impl Default for VSpec {
    fn default() -> Self {
        VSpec { sharpness: 4.0 }
    }
}

/// The weight V: C^∞, supported on [1, 2], peak 1 at 3/2.
pub fn smooth_v(spec: VSpec) -> Result<Bump> {
    if !(spec.sharpness > 0.0 && spec.sharpness.is_finite()) {
        return Err(Error::Precondition(format!("bump sharpness must be positive, got {}", spec.sharpness)));
    }
    Ok(Bump::new(1.0, 2.0).sharpness(spec.sharpness))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Standard,
    /// Every grid point is recomputed with double-double phases and sums.
    ExtendedCrosscheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwistConfig {
    pub alpha: f64,
    pub beta: f64,
    pub kind: HeckeKind,
    pub x_grid: Vec<f64>,
    pub v: VSpec,
    pub precision: Precision,
    /// Write measured runtimes into the CSV. Off by default so that reruns are
    /// byte-identical.
    pub record_runtime: bool,
}

/// `points` values from `x_min` to `x_max` in geometric progression.
pub fn geometric_grid(x_min: f64, x_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(x_min > 0.0 && x_max > x_min && points >= 2) {
        return Err(Error::Precondition(format!("bad grid {x_min}..{x_max} with {points} points")));
    }
    let ratio = (x_max / x_min).ln() / (points - 1) as f64;
    let mut g: Vec<f64> = (0..points).map(|i| x_min * (ratio * i as f64).exp()).collect();
    g[points - 1] = x_max;
    Ok(g)
}

impl TwistConfig {
    pub fn new(alpha: f64, beta: f64, kind: HeckeKind, x_grid: Vec<f64>) -> Self {
        TwistConfig {
            alpha,
            beta,
            kind,
            x_grid,
            v: VSpec::default(),
            precision: Precision::Standard,
            record_runtime: false,
        }
    }

    /// Reads `key = value` lines; `#` starts a comment. Keys: alpha, beta,
    /// kind, xmin, xmax, points, sharpness, precision, record_runtime.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut cfg = TwistConfig::new(1.0, f64::NAN, HeckeKind::Sym2Delta, Vec::new());
        let (mut xmin, mut xmax, mut points) = (None, None, None);
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Precondition(format!("line {}: expected key = value", no + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            let num = |v: &str| {
                v.parse::<f64>().map_err(|_| Error::Precondition(format!("line {}: {k} needs a number", no + 1)))
            };
            match k {
                "alpha" => cfg.alpha = num(v)?,
                "beta" => cfg.beta = parse_fraction(v)?,
                "kind" => cfg.kind = v.parse()?,
                "xmin" => xmin = Some(num(v)?),
                "xmax" => xmax = Some(num(v)?),
                "points" => {
                    points = Some(v.parse::<usize>().map_err(|_| Error::Precondition(format!("bad points {v:?}")))?)
                }
                "sharpness" => cfg.v.sharpness = num(v)?,
                "precision" => {
                    cfg.precision = match v {
                        "standard" => Precision::Standard,
                        "extended" | "extended-crosscheck" => Precision::ExtendedCrosscheck,
                        _ => return Err(Error::Precondition(format!("unknown precision {v:?}"))),
                    }
                }
                "record_runtime" => {
                    cfg.record_runtime =
                        v.parse().map_err(|_| Error::Precondition(format!("record_runtime needs true/false")))?
                }
                _ => return Err(Error::Precondition(format!("line {}: unknown key {k:?}", no + 1))),
            }
        }
        match (xmin, xmax, points) {
            (Some(a), Some(b), Some(p)) => cfg.x_grid = geometric_grid(a, b, p)?,
            _ => return Err(Error::Precondition("xmin, xmax and points are required".into())),
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha != 0.0 && self.alpha.is_finite()) {
            return Err(Error::Precondition(format!("α must be a non-zero real, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Precondition(format!("β must lie in (0, 1), got {}", self.beta)));
        }
        if self.x_grid.is_empty() || !self.x_grid.windows(2).all(|w| w[0] < w[1]) || !(self.x_grid[0] > 0.0) {
            return Err(Error::Precondition("X grid must be positive and increasing".into()));
        }
        smooth_v(self.v)?;
        Ok(())
    }

    /// Largest n the grid touches.
    pub fn max_n(&self) -> usize {
        self.x_grid.last().map_or(0, |&x| (2.0 * x).ceil() as usize)
    }
}

/// "p/q" or a decimal.
pub fn parse_fraction(v: &str) -> Result<f64> {
    let bad = || Error::Precondition(format!("cannot read {v:?} as a number"));
    match v.split_once('/') {
        Some((p, q)) => {
            let (p, q): (f64, f64) = (p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?);
            Ok(p / q)
        }
        None => v.trim().parse().map_err(|_| bad()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwistResult {
    pub x: f64,
    pub s: Complex64,
    /// #{n : V(n/X) ≠ 0}
    pub n_terms: usize,
    pub runtime_ms: u64,
    /// Σ V(n/X)
    pub v_mass: f64,
    /// Σ |λ(1,n)| V(n/X)
    pub abs_mass: f64,
    /// |S − S_ext| / max(|S_ext|, 10⁻⁸·abs_mass) when a cross-check ran.
    pub crosscheck: Option<f64>,
}

/// Agreement demanded between the f64 and double-double passes.
pub const CROSSCHECK_TOL: f64 = 1e-8;

/// S(X) by direct compensated summation, cross-checked in double-double when
/// `config.precision` asks for it.
pub fn compute_s(config: &TwistConfig, table: &HeckeTable, x: f64) -> Result<TwistResult> {
    compute_s_with(config, table, x, config.precision == Precision::ExtendedCrosscheck)
}

fn compute_s_with(config: &TwistConfig, table: &HeckeTable, x: f64, crosscheck: bool) -> Result<TwistResult> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Precondition(format!("X must be positive, got {x}")));
    }
    let top = (2.0 * x).ceil() as usize;
    if top > table.max_n() {
        return Err(Error::Capacity { requested: top as u64, limit: table.max_n() as u64 });
    }
    let v = smooth_v(config.v)?;
    let start = Instant::now();
    let row = table.row();
    let lo = (x.floor() as usize + 1).max(1);
    let (alpha, beta) = (config.alpha, config.beta);
    let mut acc = ComplexSum::new();
    let (mut v_mass, mut abs_mass) = (NeumaierSum::new(), NeumaierSum::new());
    let mut n_terms = 0usize;
    let mut weights = Vec::new();
    for n in lo..top {
        let w = v.value(n as f64 / x);
        if w == 0.0 {
            continue;
        }
        n_terms += 1;
        let lw = row[n] * w;
        v_mass.add(w);
        abs_mass.add(lw.abs());
        let ph = alpha * (n as f64).powf(beta);
        acc.add(e(ph - ph.floor()) * lw);
        if crosscheck {
            weights.push((n, lw));
        }
    }
    let s = acc.value();
    let abs_mass = abs_mass.value();
    let crosscheck = if crosscheck {
        let ext = extended_sum(&weights, alpha, beta);
        let dev = (s - ext).norm() / ext.norm().max(1e-8 * abs_mass).max(f64::MIN_POSITIVE);
        if !(dev <= CROSSCHECK_TOL) {
            return Err(Error::Precondition(format!(
                "extended-precision cross-check at X = {x} disagrees by {dev:.2e} relative"
            )));
        }
        Some(dev)
    } else {
        None
    };
    Ok(TwistResult {
        x,
        s,
        n_terms,
        runtime_ms: start.elapsed().as_millis() as u64,
        v_mass: v_mass.value(),
        abs_mass,
        crosscheck,
    })
}

/// Σ w_n e(αn^β) with the phase reduced mod 1 in double-double and the sum
/// carried in double-double.
fn extended_sum(terms: &[(usize, f64)], alpha: f64, beta: f64) -> Complex64 {
    let (a, b) = (TwoFloat::from(alpha), TwoFloat::from(beta));
    let (mut re, mut im) = (TwoFloat::from(0.0), TwoFloat::from(0.0));
    for &(n, w) in terms {
        let ph = a * pow_dd(TwoFloat::from(n as f64), b);
        let frac = ph - ph.hi().floor();
        let (s, c) = (TAU * frac.hi() + TAU * frac.lo()).sin_cos();
        re += TwoFloat::from(c) * w;
        im += TwoFloat::from(s) * w;
    }
    Complex64::new(re.hi() + re.lo(), im.hi() + im.lo())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    /// X values left out because |S| < 10⁻⁸·ΣV.
    pub dropped: Vec<f64>,
}

/// Fraction of ΣV below which |S| counts as cancellation noise.
pub const FIT_DROP_FRACTION: f64 = 1e-8;

/// Least-squares slope of log|S| against log X.
pub fn fit_exponent(results: &[TwistResult]) -> Result<ExponentFit> {
    let mut dropped = Vec::new();
    let mut pts = Vec::new();
    for r in results {
        if !(r.s.norm() > 0.0) {
            return Err(Error::Degenerate(format!("S vanishes at X = {}", r.x)));
        }
        if r.s.norm() < FIT_DROP_FRACTION * r.v_mass {
            dropped.push(r.x);
        } else {
            pts.push((r.x.ln(), r.s.norm().ln()));
        }
    }
    if pts.len() < 8 {
        return Err(Error::Degenerate(format!("{} usable grid points, need at least 8", pts.len())));
    }
    let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    if hi - lo < 2.0 * std::f64::consts::LN_10 * (1.0 - 1e-12) {
        return Err(Error::Degenerate(format!("grid spans {:.2} decades, need 2", (hi - lo) / std::f64::consts::LN_10)));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(ExponentFit { slope, stderr, intercept, dropped })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub beta: f64,
    pub slope: f64,
    pub tolerance: f64,
    /// 3/4 + 3β/10
    pub theorem: f64,
    /// 3β/2
    pub prior: f64,
    pub trivial: f64,
    pub respects_theorem: bool,
    pub respects_prior: bool,
    pub respects_trivial: bool,
}

impl BoundReport {
    /// The new exponent is below the trivial one.
    pub fn power_saving(&self) -> bool {
        self.theorem < self.trivial
    }

    /// The new exponent beats 3β/2 (β > 5/8).
    pub fn improves_on_prior(&self) -> bool {
        self.theorem < self.prior
    }

    /// The smallest of the three exponents.
    pub fn best(&self) -> f64 {
        self.theorem.min(self.prior).min(self.trivial)
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "ok" } else { "EXCEEDED" };
        writeln!(f, "beta            {:.6}", self.beta)?;
        writeln!(f, "measured slope  {:.6}  (tolerance {:.3})", self.slope, self.tolerance)?;
        writeln!(f, "3/4 + 3beta/10  {:.6}  {}", self.theorem, mark(self.respects_theorem))?;
        writeln!(f, "3beta/2         {:.6}  {}", self.prior, mark(self.respects_prior))?;
        writeln!(f, "trivial         {:.6}  {}", self.trivial, mark(self.respects_trivial))?;
        if !self.power_saving() {
            writeln!(f, "3/4 + 3beta/10 >= 1: no power saving at this beta")?;
        } else if self.improves_on_prior() {
            writeln!(f, "3/4 + 3beta/10 is the best of the three")?;
        }
        Ok(())
    }
}

/// Compares a measured slope with the three upper-bound exponents; a bound is
/// respected when slope ≤ exponent + tolerance.
pub fn compare_bounds(slope: f64, beta: f64, tolerance: f64) -> BoundReport {
    let theorem = 0.75 + 0.3 * beta;
    let prior = 1.5 * beta;
    let trivial = 1.0;
    BoundReport {
        beta,
        slope,
        tolerance,
        theorem,
        prior,
        trivial,
        respects_theorem: slope <= theorem + tolerance,
        respects_prior: slope <= prior + tolerance,
        respects_trivial: slope <= trivial + tolerance,
    }
}

/// (1/K)∫V(v/K)(n/m)^{iv}dv with V rescaled to ∫V = 1; equals V̂ at K·log(n/m).
pub fn v_average(v: &Bump, n: f64, m: f64, k: f64) -> Result<Complex64> {
    if !(n > 0.0 && m > 0.0 && k > 0.0) {
        return Err(Error::Precondition(format!("need n, m, K > 0, got {n}, {m}, {k}")));
    }
    let omega = k * (n / m).ln();
    let (lo, hi) = v.support();
    let norm = fixed_gauss(|u| v.value(u).into(), lo, hi, 24, 64).re;
    // A few panels per oscillation, two orders compared.
    let panels = 64 + ((hi - lo) * omega.abs() / 2.0) as usize;
    let f = |u: f64| Complex64::from_polar(v.value(u), omega * u);
    let a = fixed_gauss(f, lo, hi, 20, panels);
    let b = fixed_gauss(f, lo, hi, 28, panels);
    if (a - b).norm() > 1e-14 {
        return Err(Error::Quadrature(format!("v-average at ω = {omega} unresolved: {:.1e}", (a - b).norm())));
    }
    Ok(b / norm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSample {
    pub n: u64,
    pub m: u64,
    /// K·|log(n/m)|
    pub omega: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConductorReport {
    pub x: f64,
    pub k: f64,
    /// Pairs with |n−m| ≤ X/(10K), and the smallest magnitude among them.
    pub near: usize,
    pub near_min: f64,
    /// Pairs with |n−m| ≥ 100(X/K)log X, and the largest magnitude among them.
    pub far: usize,
    pub far_max: f64,
    /// Largest ratio between the envelopes of consecutive ω-bands.
    pub regrowth: f64,
    pub samples: Vec<PairSample>,
}

impl ConductorReport {
    pub fn near_ok(&self) -> bool {
        self.near_min >= 0.5
    }

    pub fn far_ok(&self) -> bool {
        self.far_max <= 1e-6
    }

    pub fn decay_monotone(&self) -> bool {
        self.regrowth <= 1.1
    }

    pub fn passed(&self) -> bool {
        self.near_ok() && self.far_ok() && self.decay_monotone()
    }
}

/// Envelope values below this are quadrature rounding and are not compared.
const ENVELOPE_FLOOR: f64 = 1e-12;

/// Samples pairs X ≤ n, m ≤ 2X (a third close together, the rest with |n−m|
/// log-uniform up to X) and evaluates the v-average for each. The seed is fixed.
pub fn conductor_lowering_check(v: &Bump, x: f64, k: f64, samples: usize) -> Result<ConductorReport> {
    if !(k >= 2.0) {
        return Err(Error::Precondition(format!("K must be at least 2, got {k}")));
    }
    if !(x >= 10.0 && k < x) {
        return Err(Error::Precondition(format!("need 10 ≤ X and K < X, got X = {x}, K = {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a15);
    let (x0, x1) = (x.ceil() as u64, (2.0 * x).floor() as u64);
    let near_gap = x / (10.0 * k);
    let far_gap = 100.0 * x / k * x.ln();
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let gap = if i % 3 == 0 {
            rng.gen_range(0.0..=near_gap).floor() as u64
        } else {
            rng.gen_range(0.0..((x1 - x0) as f64).ln()).exp().floor() as u64
        };
        let gap = gap.min(x1 - x0);
        let m = rng.gen_range(x0..=x1 - gap);
        let n = m + gap;
        let a = v_average(v, n as f64, m as f64, k)?;
        out.push(PairSample { n, m, omega: k * (n as f64 / m as f64).ln(), magnitude: a.norm() });
    }
    let near: Vec<&PairSample> = out.iter().filter(|p| ((p.n - p.m) as f64) <= near_gap).collect();
    let far: Vec<&PairSample> = out.iter().filter(|p| ((p.n - p.m) as f64) >= far_gap).collect();
    // Envelope: the largest magnitude in each band ω ∈ [2^j, 2^{j+1}), with
    // ω < 1 in one band. V̂ itself oscillates through zeros.
    let band = |w: f64| if w < 1.0 { 0 } else { 1 + w.log2().floor() as usize };
    let mut env: Vec<f64> = Vec::new();
    for p in &out {
        let b = band(p.omega.abs());
        if env.len() <= b {
            env.resize(b + 1, f64::NAN);
        }
        env[b] = if env[b].is_nan() { p.magnitude } else { env[b].max(p.magnitude) };
    }
    let filled: Vec<f64> = env.into_iter().filter(|v| !v.is_nan()).collect();
    let regrowth = filled
        .windows(2)
        .filter(|w| w[0] > ENVELOPE_FLOOR)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max);
    Ok(ConductorReport {
        x,
        k,
        near: near.len(),
        near_min: near.iter().map(|p| p.magnitude).fold(f64::INFINITY, f64::min),
        far: far.len(),
        far_max: far.iter().map(|p| p.magnitude).fold(0.0, f64::max),
        regrowth,
        samples: out,
    })
}

pub const CSV_HEADER: &str = "X,re_S,im_S,abs_S,n_terms,runtime_ms";

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// One entry per grid point, in grid order.
    pub results: Vec<std::result::Result<TwistResult, Error>>,
    pub csv: String,
    pub fit: Option<ExponentFit>,
    pub fit_error: Option<Error>,
    pub bounds: Option<BoundReport>,
}

impl RunOutput {
    pub fn failures(&self) -> impl Iterator<Item = (usize, &Error)> {
        self.results.iter().enumerate().filter_map(|(i, r)| r.as_ref().err().map(|e| (i, e)))
    }
}

/// Tolerance on the slope in the bound comparison.
pub const SLOPE_TOLERANCE: f64 = 0.10;

/// S over the whole grid in parallel, then the fit and bound comparison. A
/// failing grid point is recorded and left out of the CSV; the rest go on.
/// In standard precision every tenth point is still cross-checked.
pub fn run(config: &TwistConfig, table: &HeckeTable) -> Result<RunOutput> {
    config.validate()?;
    if table.kind() != config.kind {
        return Err(Error::Precondition(format!(
            "table holds {} coefficients, config asks for {}",
            table.kind().name(),
            config.kind.name()
        )));
    }
    let results: Vec<_> = config
        .x_grid
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let check = config.precision == Precision::ExtendedCrosscheck || i % 10 == 0;
            compute_s_with(config, table, x, check)
        })
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).expect("writing to memory");
    for r in results.iter().flatten() {
        let runtime = if config.record_runtime { r.runtime_ms.to_string() } else { String::new() };
        w.write_record([
            format!("{:e}", r.x),
            format!("{:e}", r.s.re),
            format!("{:e}", r.s.im),
            format!("{:e}", r.s.norm()),
            r.n_terms.to_string(),
            runtime,
        ])
        .expect("writing to memory");
    }
    let csv = String::from_utf8(w.into_inner().expect("flushing to memory")).expect("ascii output");
    let ok: Vec<TwistResult> = results.iter().flatten().cloned().collect();
    let (fit, fit_error) = match fit_exponent(&ok) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e)),
    };
    let bounds = fit.as_ref().map(|f| compare_bounds(f.slope, config.beta, SLOPE_TOLERANCE));
    Ok(RunOutput { results, csv, fit, fit_error, bounds })
}

/// Reads rows written by [`run`]. Only X and the real and imaginary parts are
/// needed to refit; ΣV is recomputed from the default weight.
pub fn read_csv(text: &str, v: VSpec) -> Result<Vec<TwistResult>> {
    let bump = smooth_v(v)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::Precondition(format!("csv header: {e}")))?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::Precondition(format!("unexpected csv header {:?}", headers)));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Precondition(format!("csv row {}: {e}", i + 1)))?;
        let num = |j: usize| -> Result<f64> {
            rec[j].parse().map_err(|_| Error::Precondition(format!("csv row {}: bad field {:?}", i + 1, &rec[j])))
        };
        let x = num(0)?;
        let v_mass: f64 = ((x.floor() as u64 + 1)..(2.0 * x).ceil() as u64).map(|n| bump.value(n as f64 / x)).sum();
        out.push(TwistResult {
            x,
            s: Complex64::new(num(1)?, num(2)?),
            n_terms: rec[4].parse().map_err(|_| Error::Precondition(format!("csv row {}: bad n_terms", i + 1)))?,
            runtime_ms: rec[5].parse().unwrap_or(0),
            v_mass,
            abs_mass: f64::NAN,
            crosscheck: None,
        });
    }
    Ok(out)
}
