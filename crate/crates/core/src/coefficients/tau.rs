//! Exact Ramanujan τ(n) from the q-expansion of Δ = q·Π(1 − q^k)^24.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use super::ntt::{Ntt, MAX_LEN, PRIMES};
use crate::arith;
use crate::error::{Error, Result};

/// Default ceiling on `max_n` (memory budget, in coefficients).
pub const DEFAULT_TAU_BUDGET: usize = 1 << 22;

/// Hard ceiling: transforms of length 2·max_n must fit the NTT primes' two-adic order.
pub const MAX_TAU_BUDGET: usize = MAX_LEN / 2;

#[derive(Debug, Clone)]
pub struct TauCache {
    tau: Vec<i128>,
}

impl TauCache {
    pub fn max_n(&self) -> usize {
        self.tau.len() - 1
    }

    pub fn tau(&self, n: usize) -> Result<i128> {
        if n == 0 || n > self.max_n() {
            return Err(Error::OutOfRange {
                what: "n",
                value: n as f64,
                limit: self.max_n() as f64,
            });
        }
        Ok(self.tau[n])
    }

    /// λ_f(n) = τ(n)/n^{11/2}.
    pub fn normalized(&self, n: usize) -> Result<f64> {
        Ok(self.tau(n)? as f64 / (n as f64).powf(5.5))
    }
}

pub fn build_tau_cache(max_n: usize) -> Result<TauCache> {
    build_tau_cache_with_budget(max_n, DEFAULT_TAU_BUDGET)
}

pub fn build_tau_cache_with_budget(max_n: usize, budget: usize) -> Result<TauCache> {
    if max_n == 0 {
        return Err(Error::Precondition("max_n must be at least 1".into()));
    }
    let budget = budget.min(MAX_TAU_BUDGET);
    if max_n > budget {
        return Err(Error::Capacity {
            requested: max_n as u64,
            limit: budget as u64,
        });
    }
    // Δ = q·P^24 with P = Π(1 − q^k); τ(n) is the coefficient of q^{n−1} in P^24.
    let len = max_n;
    let pentagonal = pentagonal_series(len);
    let residues: Vec<Vec<u64>> = PRIMES
        .par_iter()
        .map(|&p| {
            let ntt = Ntt::new(p);
            let base: Vec<u64> = pentagonal.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect();
            let p2 = ntt.mul_truncated(&base, &base, len);
            let p4 = ntt.mul_truncated(&p2, &p2, len);
            let p8 = ntt.mul_truncated(&p4, &p4, len);
            let p16 = ntt.mul_truncated(&p8, &p8, len);
            debug_assert_eq!(ntt.modulus(), p);
            ntt.mul_truncated(&p16, &p8, len)
        })
        .collect();

    let crt = Crt::new(&PRIMES);
    let mut tau = vec![0i128; max_n + 1];
    tau[1..]
        .par_iter_mut()
        .enumerate()
        .try_for_each(|(k, slot)| {
            let digits: Vec<u64> = residues.iter().map(|r| r[k]).collect();
            let v = crt.reconstruct_signed(&digits);
            *slot = v.to_i128().ok_or(Error::Capacity {
                requested: max_n as u64,
                limit: k as u64,
            })?;
            Ok::<(), Error>(())
        })?;
    Ok(TauCache { tau })
}

/// Π_{k≥1}(1 − q^k) to `len` coefficients (Euler's pentagonal theorem).
fn pentagonal_series(len: usize) -> Vec<i64> {
    let mut out = vec![0i64; len];
    out[0] = 1;
    let mut k: i64 = 1;
    loop {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let g1 = (k * (3 * k - 1) / 2) as usize;
        let g2 = (k * (3 * k + 1) / 2) as usize;
        if g1 >= len {
            break;
        }
        out[g1] += sign;
        if g2 < len {
            out[g2] += sign;
        }
        k += 1;
    }
    out
}

struct Crt {
    moduli: Vec<BigInt>,
    // Garner constants: inverse of (m_0 … m_{i-1}) modulo m_i.
    inv_prefix: Vec<u64>,
    primes: Vec<u64>,
    half_product: BigInt,
}

impl Crt {
    fn new(primes: &[u64]) -> Self {
        let mut inv_prefix = Vec::with_capacity(primes.len());
        for (i, &p) in primes.iter().enumerate() {
            let prefix = primes[..i].iter().fold(1u64, |acc, &q| arith::mul_mod(acc as i64, q as i64, p as i64) as u64);
            inv_prefix.push(if i == 0 { 1 } else { arith::mod_inv(prefix as i64, p as i64).expect("coprime moduli") as u64 });
        }
        let product: BigInt = primes.iter().fold(BigInt::one(), |acc, &p| acc * p);
        Crt {
            moduli: primes.iter().map(|&p| BigInt::from(p)).collect(),
            inv_prefix,
            primes: primes.to_vec(),
            half_product: product.div_floor(&BigInt::from(2)),
        }
    }

    fn reconstruct_signed(&self, residues: &[u64]) -> BigInt {
        // Mixed-radix digits via Garner.
        let k = self.primes.len();
        let mut digits = vec![0u64; k];
        for i in 0..k {
            let p = self.primes[i];
            let mut x = residues[i] % p;
            // subtract contribution of previous digits
            let mut prefix = 1u64;
            let mut acc = 0u64;
            for j in 0..i {
                acc = (acc + digits[j] % p * prefix) % p;
                prefix = prefix * (self.primes[j] % p) % p;
            }
            x = (x + p - acc) % p;
            digits[i] = x * self.inv_prefix[i] % p;
        }
        let mut value = BigInt::zero();
        let mut radix = BigInt::one();
        for (d, m) in digits.iter().zip(&self.moduli) {
            value += &radix * d;
            radix *= m;
        }
        if value > self.half_product {
            value -= radix;
        }
        value
    }
}

/// λ_f(p) = τ(p)/p^{11/2} for prime `p`, with the Deligne bound asserted.
pub fn gl2_eigenvalue(p: usize, cache: &TauCache) -> Result<f64> {
    if !arith::is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    let lam = cache.normalized(p)?;
    assert!(lam.abs() <= 2.0 + 1e-12, "Deligne bound violated at p = {p}: {lam}");
    Ok(lam)
}
