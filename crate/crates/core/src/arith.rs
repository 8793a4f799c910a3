//! Elementary integer arithmetic: gcd, modular inverses, sieves.

use crate::error::{Error, Result};

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

/// Returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b)`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (a as i128, b as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (old_r, old_s, old_t) = (-old_r, -old_s, -old_t);
    }
    (old_r as i64, old_s as i64, old_t as i64)
}

/// Least non-negative residue.
#[inline]
pub fn modulo(a: i64, m: i64) -> i64 {
    a.rem_euclid(m)
}

pub fn mod_inv(a: i64, m: i64) -> Result<i64> {
    if m < 1 {
        return Err(Error::Precondition(format!("modulus must be >= 1, got {m}")));
    }
    if m == 1 {
        return Ok(0);
    }
    let (g, x, _) = ext_gcd(modulo(a, m), m);
    if g != 1 {
        return Err(Error::NotInvertible { a, modulus: m });
    }
    Ok(modulo(x, m))
}

pub fn mul_mod(a: i64, b: i64, m: i64) -> i64 {
    ((a as i128 * b as i128).rem_euclid(m as i128)) as i64
}

pub fn totient(n: u64) -> u64 {
    let mut n_rem = n;
    let mut result = n;
    let mut p = 2u64;
    while p * p <= n_rem {
        if n_rem % p == 0 {
            while n_rem % p == 0 {
                n_rem /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n_rem > 1 {
        result -= result / n_rem;
    }
    result
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Smallest-prime-factor sieve on `0..=limit`.
#[derive(Debug, Clone)]
pub struct Sieve {
    spf: Vec<u32>,
}

impl Sieve {
    pub fn new(limit: usize) -> Self {
        let mut spf = vec![0u32; limit + 1];
        for i in 2..=limit {
            if spf[i] == 0 {
                let mut j = i;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Sieve { spf }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    pub fn is_prime(&self, n: usize) -> bool {
        n >= 2 && n <= self.limit() && self.spf[n] as usize == n
    }

    pub fn smallest_factor(&self, n: usize) -> usize {
        self.spf[n] as usize
    }

    pub fn primes(&self) -> impl Iterator<Item = usize> + '_ {
        (2..=self.limit()).filter(|&n| self.spf[n] as usize == n)
    }

    /// Prime factorisation as `(p, exponent)` pairs in increasing order of `p`.
    pub fn factor(&self, mut n: usize) -> Vec<(usize, u32)> {
        assert!(n >= 1 && n <= self.limit(), "{n} outside sieve range");
        let mut out: Vec<(usize, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n] as usize;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }
}

pub fn mobius(n: u64) -> i64 {
    let mut n = n;
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}
