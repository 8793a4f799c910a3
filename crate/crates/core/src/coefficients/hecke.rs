//! GL(3) Hecke tables: the symmetric-square lift of Δ and the ternary divisor
//! function τ₃, both built from local Satake data and glued by multiplicativity.

use num_complex::Complex64;

use super::tau::{build_tau_cache, TauCache};
use crate::arith::Sieve;
use crate::error::{Error, Result};
use crate::numeric::sum::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeckeKind {
    Sym2Delta,
    EisensteinTau3,
}

impl HeckeKind {
    pub fn name(self) -> &'static str {
        match self {
            HeckeKind::Sym2Delta => "sym2",
            HeckeKind::EisensteinTau3 => "tau3",
        }
    }
}

impl std::str::FromStr for HeckeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sym2" => Ok(HeckeKind::Sym2Delta),
            "tau3" => Ok(HeckeKind::EisensteinTau3),
            other => Err(Error::Precondition(format!("unknown table kind {other:?}"))),
        }
    }
}

/// λ(m, n) for 1 ≤ m ≤ max_m, 1 ≤ n ≤ max_n.
///
/// The first row is stored densely. Other entries are assembled on demand from
/// the local factors λ(p^a, p^b) = s_{(a+b, a)}(Satake triple), a Schur
/// polynomial evaluated with Jacobi–Trudi.
#[derive(Debug, Clone)]
pub struct HeckeTable {
    kind: HeckeKind,
    max_m: usize,
    max_n: usize,
    sieve: Sieve,
    /// λ_f(p) at primes p (sym² only; zero elsewhere).
    gl2: Vec<f64>,
    row: Vec<f64>,
}

impl HeckeTable {
    pub fn kind(&self) -> HeckeKind {
        self.kind
    }

    pub fn max_m(&self) -> usize {
        self.max_m
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    /// λ(1, n) for n = 0..=max_n (index 0 unused and zero).
    pub fn row(&self) -> &[f64] {
        &self.row
    }

    /// Elementary symmetric functions (e₁, e₂, e₃) of the Satake triple at p.
    pub fn elementary(&self, p: usize) -> Result<[f64; 3]> {
        self.check_prime(p)?;
        Ok(match self.kind {
            HeckeKind::Sym2Delta => {
                let e1 = self.gl2[p] * self.gl2[p] - 1.0;
                [e1, e1, 1.0]
            }
            HeckeKind::EisensteinTau3 => [3.0, 3.0, 1.0],
        })
    }

    /// The Satake triple itself: {α², 1, α⁻²} with α + α⁻¹ = λ_f(p), or {1, 1, 1}.
    pub fn satake(&self, p: usize) -> Result<[Complex64; 3]> {
        self.check_prime(p)?;
        Ok(match self.kind {
            HeckeKind::Sym2Delta => {
                let theta = (self.gl2[p] / 2.0).clamp(-1.0, 1.0).acos();
                let a2 = Complex64::from_polar(1.0, 2.0 * theta);
                [a2, Complex64::new(1.0, 0.0), a2.conj()]
            }
            HeckeKind::EisensteinTau3 => [Complex64::new(1.0, 0.0); 3],
        })
    }

    fn check_prime(&self, p: usize) -> Result<()> {
        if p > self.sieve.limit() {
            return Err(Error::OutOfRange {
                what: "prime",
                value: p as f64,
                limit: self.sieve.limit() as f64,
            });
        }
        if !self.sieve.is_prime(p) {
            return Err(Error::NotPrime(p as u64));
        }
        Ok(())
    }

    fn complete_homogeneous(&self, p: usize, upto: usize) -> Vec<f64> {
        let [e1, e2, e3] = self.elementary(p).expect("prime checked by caller");
        let mut h = vec![0.0; upto + 1];
        h[0] = 1.0;
        for k in 1..=upto {
            let mut v = e1 * h[k - 1];
            if k >= 2 {
                v -= e2 * h[k - 2];
            }
            if k >= 3 {
                v += e3 * h[k - 3];
            }
            h[k] = v;
        }
        h
    }

    /// λ(p^a, p^b).
    pub fn local(&self, p: usize, a: u32, b: u32) -> Result<f64> {
        self.check_prime(p)?;
        let (a, b) = (a as usize, b as usize);
        let h = self.complete_homogeneous(p, a + b + 1);
        let mut v = h[a + b] * h[a];
        if a >= 1 {
            v -= h[a + b + 1] * h[a - 1];
        }
        Ok(v)
    }

    pub fn get(&self, m: usize, n: usize) -> Result<f64> {
        if m == 0 || m > self.max_m {
            return Err(Error::OutOfRange { what: "m", value: m as f64, limit: self.max_m as f64 });
        }
        if n == 0 || n > self.max_n {
            return Err(Error::OutOfRange { what: "n", value: n as f64, limit: self.max_n as f64 });
        }
        if m == 1 {
            return Ok(self.row[n]);
        }
        let fm = self.sieve.factor(m);
        let fn_ = self.sieve.factor(n);
        let (mut i, mut j) = (0, 0);
        let mut value = 1.0;
        while i < fm.len() || j < fn_.len() {
            let pm = fm.get(i).map_or(usize::MAX, |f| f.0);
            let pn = fn_.get(j).map_or(usize::MAX, |f| f.0);
            if pm == pn {
                value *= self.local(pm, fm[i].1, fn_[j].1)?;
                i += 1;
                j += 1;
            } else if pm < pn {
                value *= self.local(pm, fm[i].1, 0)?;
                i += 1;
            } else {
                value *= self.row[pn.pow(fn_[j].1)];
                j += 1;
            }
        }
        Ok(value)
    }

    fn assemble(kind: HeckeKind, max_m: usize, max_n: usize, gl2: Vec<f64>) -> Self {
        let limit = max_m.max(max_n).max(2);
        let sieve = Sieve::new(limit);
        let mut table = HeckeTable { kind, max_m, max_n, sieve, gl2, row: Vec::new() };
        let mut row = vec![0.0; max_n + 1];
        row[1] = 1.0;
        for n in 2..=max_n {
            let p = table.sieve.smallest_factor(n);
            let mut pe = p;
            let mut e = 1;
            while (n / pe) % p == 0 {
                pe *= p;
                e += 1;
            }
            row[n] = if pe == n {
                let [e1, e2, e3] = table.elementary(p).expect("sieve prime");
                let mut v = e1 * row[n / p];
                if e >= 2 {
                    v -= e2 * row[n / (p * p)];
                }
                if e >= 3 {
                    v += e3 * row[n / (p * p * p)];
                }
                v
            } else {
                row[pe] * row[n / pe]
            };
        }
        table.row = row;
        table
    }
}

fn check_dims(max_m: usize, max_n: usize) -> Result<()> {
    if max_m == 0 || max_n == 0 {
        return Err(Error::Precondition("table dimensions must be at least 1".into()));
    }
    Ok(())
}

pub fn build_sym2_table(max_m: usize, max_n: usize) -> Result<HeckeTable> {
    check_dims(max_m, max_n)?;
    let cache = build_tau_cache(max_m.max(max_n).max(2))?;
    build_sym2_table_from(&cache, max_m, max_n)
}

/// As [`build_sym2_table`], reusing an existing τ cache.
pub fn build_sym2_table_from(cache: &TauCache, max_m: usize, max_n: usize) -> Result<HeckeTable> {
    check_dims(max_m, max_n)?;
    let limit = max_m.max(max_n).max(2);
    if cache.max_n() < limit {
        return Err(Error::Capacity { requested: limit as u64, limit: cache.max_n() as u64 });
    }
    let sieve = Sieve::new(limit);
    let mut gl2 = vec![0.0; limit + 1];
    for p in sieve.primes() {
        gl2[p] = super::tau::gl2_eigenvalue(p, cache)?;
    }
    Ok(HeckeTable::assemble(HeckeKind::Sym2Delta, max_m, max_n, gl2))
}

pub fn build_tau3_table(max_m: usize, max_n: usize) -> Result<HeckeTable> {
    check_dims(max_m, max_n)?;
    let limit = max_m.max(max_n).max(2);
    Ok(HeckeTable::assemble(HeckeKind::EisensteinTau3, max_m, max_n, vec![0.0; limit + 1]))
}

pub fn build_table(kind: HeckeKind, max_m: usize, max_n: usize) -> Result<HeckeTable> {
    match kind {
        HeckeKind::Sym2Delta => build_sym2_table(max_m, max_n),
        HeckeKind::EisensteinTau3 => build_tau3_table(max_m, max_n),
    }
}

/// A(x) = Σ_{n₁²n₂ ≤ x} |λ(n₁, n₂)|².
pub fn ramanujan_average(table: &HeckeTable, x: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Ok(0.0);
    }
    let xn = x.floor() as usize;
    let root = (xn as f64).sqrt().floor() as usize;
    let root = if (root + 1) * (root + 1) <= xn { root + 1 } else { root };
    if xn > table.max_n() || root > table.max_m() {
        return Err(Error::Capacity {
            requested: xn as u64,
            limit: table.max_n().min(table.max_m() * table.max_m()) as u64,
        });
    }
    let mut acc = NeumaierSum::new();
    for n1 in 1..=root {
        for n2 in 1..=xn / (n1 * n1) {
            let v = table.get(n1, n2)?;
            acc += v * v;
        }
    }
    Ok(acc.value())
}
