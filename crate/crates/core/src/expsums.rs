//! Kloosterman sums, Ramanujan sums and the four-variable character sum
//! 𝓒(m, m′, q, q′, n₁, n₂) built from a product of two Kloosterman sums.

use rayon::prelude::*;

use crate::arith::{gcd, mod_inv, modulo, totient};
use crate::error::{Error, Result};
use crate::numeric::sum::{ComplexSum, NeumaierSum};
use crate::numeric::{e_frac, Complex64};

/// S(a, b; q) = Σ*_{x mod q} e((ax + b x̄)/q).
pub fn kloosterman(a: i64, b: i64, q: i64) -> Result<Complex64> {
    if q <= 0 {
        return Err(Error::Precondition(format!("Kloosterman modulus must be positive, got {q}")));
    }
    let mut acc = ComplexSum::new();
    for x in 0..q {
        if gcd(x, q) != 1 {
            continue;
        }
        let xb = mod_inv(x, q)?;
        let phase = (modulo(a, q) as i128 * x as i128 + modulo(b, q) as i128 * xb as i128) % q as i128;
        acc += e_frac(phase as i64, q);
    }
    Ok(acc.value())
}

/// c_q(n) = Σ*_{c mod q} e(cn/q), by enumeration.
pub fn ramanujan_sum(n: i64, q: i64) -> Result<f64> {
    if q <= 0 {
        return Err(Error::Precondition(format!("modulus must be positive, got {q}")));
    }
    let mut acc = NeumaierSum::new();
    let n = modulo(n, q);
    for c in 0..q {
        if gcd(c, q) == 1 {
            acc += e_frac(((c as i128 * n as i128) % q as i128) as i64, q).re;
        }
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CharSumParams {
    pub m: i64,
    pub m_prime: i64,
    pub q: i64,
    pub q_prime: i64,
    pub n1: i64,
    pub n2: i64,
}

impl CharSumParams {
    pub fn validate(&self) -> Result<()> {
        if self.q < 1 || self.q_prime < 1 || self.n1 < 1 {
            return Err(Error::Precondition("q, q′ and n₁ must be positive".into()));
        }
        if self.q % self.n1 != 0 || self.q_prime % self.n1 != 0 {
            return Err(Error::Precondition(format!(
                "n₁ = {} must divide q = {} and q′ = {}",
                self.n1, self.q, self.q_prime
            )));
        }
        if gcd(self.m, self.q) != 1 || gcd(self.m_prime, self.q_prime) != 1 {
            return Err(Error::Precondition(format!(
                "need gcd(m, q) = gcd(m′, q′) = 1, got m = {}, m′ = {}",
                self.m, self.m_prime
            )));
        }
        Ok(())
    }

    /// The γ-modulus qq′/n₁².
    pub fn modulus(&self) -> i64 {
        (self.q / self.n1) * (self.q_prime / self.n1)
    }
}

/// 𝓒 = Σ_{γ mod qq′/n₁²} S(m̄, γ; q/n₁) S(m̄′, γ; q′/n₁) e(n₂γ/(qq′/n₁²)).
pub fn char_sum(p: &CharSumParams) -> Result<Complex64> {
    p.validate()?;
    let r1 = p.q / p.n1;
    let r2 = p.q_prime / p.n1;
    let modulus = r1 * r2;
    let mb1 = mod_inv(modulo(p.m, r1), r1)?;
    let mb2 = mod_inv(modulo(p.m_prime, r2), r2)?;
    // Each Kloosterman factor only sees γ modulo its own modulus.
    let k1: Vec<Complex64> = (0..r1).map(|g| kloosterman(mb1, g, r1)).collect::<Result<_>>()?;
    let k2: Vec<Complex64> = (0..r2).map(|g| kloosterman(mb2, g, r2)).collect::<Result<_>>()?;
    let n2 = modulo(p.n2, modulus);
    let mut acc = ComplexSum::new();
    for g in 0..modulus {
        let phase = ((n2 as i128 * g as i128) % modulus as i128) as i64;
        acc += k1[(g % r1) as usize] * k2[(g % r2) as usize] * e_frac(phase, modulus);
    }
    Ok(acc.value())
}

/// Closed form at n₂ = 0, q = q′: (q/n₁)² · c_{q/n₁}(m − m′).
pub fn char_sum_zero_freq(m: i64, m_prime: i64, q: i64, n1: i64) -> Result<Complex64> {
    CharSumParams { m, m_prime, q, q_prime: q, n1, n2: 0 }.validate()?;
    let r = q / n1;
    let c = ramanujan_sum(m - m_prime, r)?;
    Ok(Complex64::new((r * r) as f64 * c, 0.0))
}

#[derive(Debug, Clone, Copy)]
pub struct CharSumScan {
    pub q_max: i64,
    pub n2_max: i64,
    /// How many units m (resp. m′) to try per modulus.
    pub m_samples: usize,
}

impl Default for CharSumScan {
    fn default() -> Self {
        CharSumScan { q_max: 12, n2_max: 20, m_samples: 3 }
    }
}

#[derive(Debug, Clone)]
pub struct CharSumReport {
    pub cases: usize,
    /// max |𝓒| / ((qq′/n₁²)·gcd(q/n₁, q′/n₁, n₂)).
    pub measured_c0: f64,
    pub worst_case: Option<CharSumParams>,
    /// Diagonal zero-frequency cases where the closed form disagrees.
    pub closed_form_violations: Vec<CharSumParams>,
    /// Off-diagonal zero-frequency cases that fail to vanish.
    pub vanishing_violations: Vec<CharSumParams>,
}

impl CharSumReport {
    pub fn passed(&self) -> bool {
        self.closed_form_violations.is_empty() && self.vanishing_violations.is_empty()
    }
}

fn unit_samples(q: i64, count: usize) -> Vec<i64> {
    let units: Vec<i64> = (1..=q.max(1)).filter(|&x| gcd(x, q) == 1).collect();
    if units.len() <= count {
        return units;
    }
    // spread the picks over the unit group
    (0..count).map(|i| units[i * (units.len() - 1) / (count - 1).max(1)]).collect()
}

pub fn verify_char_sum_lemma(scan: &CharSumScan) -> Result<CharSumReport> {
    let pairs: Vec<(i64, i64)> = (1..=scan.q_max).flat_map(|q| (1..=scan.q_max).map(move |qp| (q, qp))).collect();
    let partial: Vec<CharSumReport> = pairs
        .par_iter()
        .map(|&(q, qp)| scan_pair(q, qp, scan))
        .collect::<Result<_>>()?;
    let mut report = CharSumReport {
        cases: 0,
        measured_c0: 0.0,
        worst_case: None,
        closed_form_violations: Vec::new(),
        vanishing_violations: Vec::new(),
    };
    for r in partial {
        report.cases += r.cases;
        if r.measured_c0 > report.measured_c0 {
            report.measured_c0 = r.measured_c0;
            report.worst_case = r.worst_case;
        }
        report.closed_form_violations.extend(r.closed_form_violations);
        report.vanishing_violations.extend(r.vanishing_violations);
    }
    Ok(report)
}

fn scan_pair(q: i64, qp: i64, scan: &CharSumScan) -> Result<CharSumReport> {
    let mut out = CharSumReport {
        cases: 0,
        measured_c0: 0.0,
        worst_case: None,
        closed_form_violations: Vec::new(),
        vanishing_violations: Vec::new(),
    };
    let g = gcd(q, qp);
    for n1 in (1..=g).filter(|d| g % d == 0) {
        for &m in &unit_samples(q, scan.m_samples) {
            for &mp in &unit_samples(qp, scan.m_samples) {
                for n2 in -scan.n2_max..=scan.n2_max {
                    let p = CharSumParams { m, m_prime: mp, q, q_prime: qp, n1, n2 };
                    let value = char_sum(&p)?;
                    let scale = p.modulus() as f64;
                    let bound = scale * gcd(gcd(q / n1, qp / n1), n2) as f64;
                    out.cases += 1;
                    let ratio = value.norm() / bound;
                    if ratio > out.measured_c0 {
                        out.measured_c0 = ratio;
                        out.worst_case = Some(p);
                    }
                    if n2 == 0 {
                        let tol = 1e-9 * scale * totient((q / n1) as u64) as f64;
                        if q == qp {
                            let closed = char_sum_zero_freq(m, mp, q, n1)?;
                            if (value - closed).norm() > tol.max(1e-9) {
                                out.closed_form_violations.push(p);
                            }
                        } else if value.norm() > tol.max(1e-9) {
                            out.vanishing_violations.push(p);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_picks_are_units() {
        assert_eq!(unit_samples(1, 3), vec![1]);
        assert_eq!(unit_samples(12, 3), vec![1, 5, 11]);
        assert_eq!(unit_samples(4, 3), vec![1, 3]);
    }
}
