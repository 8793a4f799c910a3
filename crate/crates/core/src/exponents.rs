//! Exact bookkeeping of power-of-X exponents of the form a + bβ + cη.
//!
//! All factors X^ε are dropped, so every comparison here is an exact rational one.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = Rational64;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// const + beta·β + eta·η.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExponentExpr {
    pub constant: Rational,
    pub beta: Rational,
    pub eta: Rational,
}

impl ExponentExpr {
    pub fn new(constant: Rational, beta: Rational, eta: Rational) -> Self {
        ExponentExpr { constant, beta, eta }
    }

    pub fn constant(c: Rational) -> Self {
        ExponentExpr::new(c, Rational::zero(), Rational::zero())
    }

    pub fn beta() -> Self {
        ExponentExpr::new(Rational::zero(), Rational::one(), Rational::zero())
    }

    pub fn eta() -> Self {
        ExponentExpr::new(Rational::zero(), Rational::zero(), Rational::one())
    }

    pub fn eval(&self, beta: Rational, eta: Rational) -> Rational {
        self.constant + self.beta * beta + self.eta * eta
    }
}

impl Add for ExponentExpr {
    type Output = ExponentExpr;
    fn add(self, o: Self) -> Self {
        ExponentExpr::new(self.constant + o.constant, self.beta + o.beta, self.eta + o.eta)
    }
}

impl Sub for ExponentExpr {
    type Output = ExponentExpr;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for ExponentExpr {
    type Output = ExponentExpr;
    fn neg(self) -> Self {
        ExponentExpr::new(-self.constant, -self.beta, -self.eta)
    }
}

impl Mul<Rational> for ExponentExpr {
    type Output = ExponentExpr;
    fn mul(self, k: Rational) -> Self {
        ExponentExpr::new(self.constant * k, self.beta * k, self.eta * k)
    }
}

impl fmt::Display for ExponentExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (c, sym) in [(self.constant, ""), (self.beta, "β"), (self.eta, "η")] {
            if c.is_zero() {
                continue;
            }
            let sign = if c < Rational::zero() { "-" } else { "+" };
            let mag = c.abs();
            if wrote {
                write!(f, " {sign} ")?;
            } else if sign == "-" {
                write!(f, "-")?;
            }
            if sym.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{sym}")?;
            } else {
                write!(f, "{mag}{sym}")?;
            }
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Zero frequency, first term.
    ZeroFreqTerm1,
    /// Zero frequency, second term.
    ZeroFreqTerm2,
    SmallModuli,
    /// Large moduli, small n₂.
    LargeSmallN2,
    /// Large moduli, large n₂.
    LargeLargeN2,
}

impl Regime {
    pub const ALL: [Regime; 5] = [
        Regime::ZeroFreqTerm1,
        Regime::ZeroFreqTerm2,
        Regime::SmallModuli,
        Regime::LargeSmallN2,
        Regime::LargeLargeN2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Regime::ZeroFreqTerm1 => "S0_term1",
            Regime::ZeroFreqTerm2 => "S0_term2",
            Regime::SmallModuli => "S_small",
            Regime::LargeSmallN2 => "S_large_small_n2",
            Regime::LargeLargeN2 => "S_large_large_n2",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegimeCatalog {
    entries: [(Regime, ExponentExpr); 5],
}

impl RegimeCatalog {
    pub fn get(&self, regime: Regime) -> ExponentExpr {
        self.entries.iter().find(|(r, _)| *r == regime).map(|e| e.1).expect("all regimes present")
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Regime, ExponentExpr)> {
        self.entries.iter()
    }
}

pub fn catalog() -> RegimeCatalog {
    let e = ExponentExpr::new;
    RegimeCatalog {
        entries: [
            (Regime::ZeroFreqTerm1, e(r(3, 4), r(3, 4), r(-3, 4))),
            (Regime::ZeroFreqTerm2, e(r(3, 8), r(9, 8), r(-5, 8))),
            (Regime::SmallModuli, e(r(3, 4), r(1, 4), r(-1, 2))),
            (Regime::LargeSmallN2, e(r(5, 6), r(-2, 3), r(2, 3))),
            (Regime::LargeLargeN2, e(r(3, 4), r(0, 1), r(1, 2))),
        ],
    }
}

fn check_beta(beta: Rational) -> Result<()> {
    if beta <= Rational::zero() || beta >= Rational::one() {
        return Err(Error::Precondition(format!("β = {beta} must lie in (0, 1)")));
    }
    Ok(())
}

fn check_domain(beta: Rational, eta: Rational) -> Result<()> {
    check_beta(beta)?;
    if eta <= Rational::zero() || eta >= beta {
        return Err(Error::Precondition(format!("η = {eta} must lie in (0, β) with β = {beta}")));
    }
    Ok(())
}

pub fn total_exponent(beta: Rational, eta: Rational) -> Result<Rational> {
    check_domain(beta, eta)?;
    Ok(max_at(&catalog(), beta, eta))
}

fn max_at(cat: &RegimeCatalog, beta: Rational, eta: Rational) -> Rational {
    cat.iter().map(|(_, e)| e.eval(beta, eta)).max().expect("non-empty catalog")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EtaOptimum {
    pub eta: Rational,
    pub exponent: Rational,
}

/// Minimise the max of the five catalog exponents over η ∈ (0, β).
///
/// The objective is a convex piecewise-linear function of η, so its minimum
/// sits at a pairwise crossing of two entries. The zero-frequency side
/// condition (second term not exceeding the first) is verified at the optimum.
pub fn optimize_eta(beta: Rational) -> Result<EtaOptimum> {
    check_beta(beta)?;
    let cat = catalog();
    let lines: Vec<(Rational, Rational)> = cat
        .iter()
        .map(|(_, e)| (e.constant + e.beta * beta, e.eta))
        .collect();
    let mut candidates = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a1, b1) = lines[i];
            let (a2, b2) = lines[j];
            if b1 != b2 {
                let eta = (a2 - a1) / (b1 - b2);
                if eta > Rational::zero() && eta < beta {
                    candidates.push(eta);
                }
            }
        }
    }
    let best = candidates
        .into_iter()
        .map(|eta| (max_at(&cat, beta, eta), eta))
        .min()
        .ok_or_else(|| Error::Degenerate(format!("no interior optimum for β = {beta}")))?;
    // If the objective only decreases towards an endpoint the infimum is not attained.
    let (value, eta) = best;
    for edge in [Rational::zero(), beta] {
        if max_at(&cat, beta, edge) < value {
            return Err(Error::Degenerate(format!("infimum at the boundary η = {edge} for β = {beta}")));
        }
    }
    let t1 = cat.get(Regime::ZeroFreqTerm1).eval(beta, eta);
    let t2 = cat.get(Regime::ZeroFreqTerm2).eval(beta, eta);
    if t2 > t1 {
        return Err(Error::SideCondition(format!(
            "at β = {beta}, η* = {eta}: second zero-frequency term {t2} exceeds the first {t1}"
        )));
    }
    Ok(EtaOptimum { eta, exponent: value })
}

/// Exponents of the auxiliary scales (K, Q, M₀, N₀, Ñ), all at q = Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivedScales {
    /// Conductor-lowering length K = X^{β−η}.
    pub k: ExponentExpr,
    /// Delta-method level Q = √(X/K).
    pub q: ExponentExpr,
    /// Dual m-range qX^{β−1}.
    pub m0: ExponentExpr,
    /// Dual n-range (qK)³/X.
    pub n0: ExponentExpr,
    /// Dual range √(XK)·C/N₀ of the final Poisson step, at C = Q.
    pub n_tilde: ExponentExpr,
}

impl DerivedScales {
    pub fn symbolic() -> Self {
        let one = ExponentExpr::constant(Rational::one());
        let k = ExponentExpr::beta() - ExponentExpr::eta();
        let q = (one - k) * r(1, 2);
        let m0 = q + ExponentExpr::beta() - one;
        let n0 = (q + k) * r(3, 1) - one;
        let n_tilde = (one + k) * r(1, 2) + q - n0;
        DerivedScales { k, q, m0, n0, n_tilde }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleValues {
    pub k: Rational,
    pub q: Rational,
    pub m0: Rational,
    pub n0: Rational,
    pub n_tilde: Rational,
}

pub fn derived_scales(beta: Rational, eta: Rational) -> Result<ScaleValues> {
    check_domain(beta, eta)?;
    let s = DerivedScales::symbolic();
    Ok(ScaleValues {
        k: s.k.eval(beta, eta),
        q: s.q.eval(beta, eta),
        m0: s.m0.eval(beta, eta),
        n0: s.n0.eval(beta, eta),
        n_tilde: s.n_tilde.eval(beta, eta),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SavingsSketch {
    pub k_exponent: Rational,
    pub window: (Rational, Rational),
    pub k_in_window: bool,
    pub total_saving: Rational,
    pub final_exponent: Rational,
    pub power_saving: bool,
}

/// The heuristic count: diagonal saving √K against off-diagonal X^{1/2}/K^{3/4}·…,
/// balanced at K = X^{2β/5}.
pub fn sketch_savings(beta: Rational) -> Result<SavingsSketch> {
    check_beta(beta)?;
    let k_exponent = beta * r(2, 5);
    let window = (beta - r(1, 2), r(1, 3));
    let total_saving = r(5, 4) - beta * r(3, 10);
    let final_exponent = r(2, 1) - total_saving;
    Ok(SavingsSketch {
        k_exponent,
        window,
        k_in_window: window.0 < k_exponent && k_exponent < window.1,
        total_saving,
        final_exponent,
        power_saving: final_exponent < Rational::one(),
    })
}

/// Target exponent 3/4 + 3β/10 for the twisted sum.
pub fn theorem_exponent(beta: Rational) -> Rational {
    r(3, 4) + beta * r(3, 10)
}

/// The earlier bound 3β/2.
pub fn prior_exponent(beta: Rational) -> Rational {
    beta * r(3, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display() {
        assert_eq!(catalog().get(Regime::ZeroFreqTerm1).to_string(), "3/4 + 3/4β - 3/4η");
        assert_eq!(ExponentExpr::constant(Rational::zero()).to_string(), "0");
        assert_eq!((-ExponentExpr::eta()).to_string(), "-η");
    }
}
