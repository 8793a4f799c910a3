//! Number-theoretic transforms over a handful of NTT-friendly primes, used to
//! multiply integer power series exactly (residues recombined by CRT).

/// Primes of the form c·2^k + 1 with k ≥ 25.
pub(crate) const PRIMES: [u64; 5] = [167772161, 469762049, 1811939329, 2013265921, 2113929217];

/// Largest transform length supported by every prime in [`PRIMES`].
pub(crate) const MAX_LEN: usize = 1 << 25;

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn primitive_root(p: u64) -> u64 {
    let mut factors = Vec::new();
    let mut n = p - 1;
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            factors.push(f);
            while n % f == 0 {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    (2..p)
        .find(|&g| factors.iter().all(|&f| pow_mod(g, (p - 1) / f, p) != 1))
        .expect("a prime has a primitive root")
}

pub(crate) struct Ntt {
    p: u64,
    g: u64,
}

impl Ntt {
    pub(crate) fn new(p: u64) -> Self {
        Ntt { p, g: primitive_root(p) }
    }

    fn transform(&self, a: &mut [u64], invert: bool) {
        let n = a.len();
        let p = self.p;
        let mut j = 0;
        for i in 1..n {
            let mut bit = n >> 1;
            while j & bit != 0 {
                j ^= bit;
                bit >>= 1;
            }
            j ^= bit;
            if i < j {
                a.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let mut w = pow_mod(self.g, (p - 1) / len as u64, p);
            if invert {
                w = pow_mod(w, p - 2, p);
            }
            let half = len / 2;
            let mut roots = Vec::with_capacity(half);
            let mut cur = 1u64;
            for _ in 0..half {
                roots.push(cur);
                cur = cur * w % p;
            }
            for chunk in a.chunks_mut(len) {
                let (lo, hi) = chunk.split_at_mut(half);
                for ((u, v), &r) in lo.iter_mut().zip(hi.iter_mut()).zip(&roots) {
                    let x = *u;
                    let y = *v * r % p;
                    *u = if x + y >= p { x + y - p } else { x + y };
                    *v = if x >= y { x - y } else { x + p - y };
                }
            }
            len <<= 1;
        }
        if invert {
            let inv_n = pow_mod(n as u64, p - 2, p);
            for x in a.iter_mut() {
                *x = *x * inv_n % p;
            }
        }
    }

    /// Product of two series mod p, truncated to `keep` coefficients.
    pub(crate) fn mul_truncated(&self, a: &[u64], b: &[u64], keep: usize) -> Vec<u64> {
        let need = (a.len() + b.len()).saturating_sub(1).min(2 * keep);
        let n = need.next_power_of_two().max(2);
        let mut fa = vec![0u64; n];
        let mut fb = vec![0u64; n];
        fa[..a.len().min(n)].copy_from_slice(&a[..a.len().min(n)]);
        fb[..b.len().min(n)].copy_from_slice(&b[..b.len().min(n)]);
        self.transform(&mut fa, false);
        self.transform(&mut fb, false);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x = *x * y % self.p;
        }
        self.transform(&mut fa, true);
        fa.truncate(keep);
        fa
    }

    pub(crate) fn modulus(&self) -> u64 {
        self.p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolution_matches_schoolbook() {
        let a: Vec<u64> = (0..37).map(|i| (i * i + 3) % 1000).collect();
        let b: Vec<u64> = (0..23).map(|i| (7 * i + 1) % 1000).collect();
        for &p in &PRIMES {
            let ntt = Ntt::new(p);
            let got = ntt.mul_truncated(&a, &b, 50);
            for (k, &g) in got.iter().enumerate() {
                let mut s = 0u64;
                for i in 0..=k {
                    if i < a.len() && k - i < b.len() {
                        s = (s + a[i] * b[k - i]) % p;
                    }
                }
                assert_eq!(g, s, "p = {p}, k = {k}");
            }
        }
    }
}
