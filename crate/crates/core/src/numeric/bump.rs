//! Compactly supported C^∞ weights.

/// `amplitude · exp(-sharpness · t²/(1 - t²))` with `t` the affine image of
/// `[lo, hi]` onto `[-1, 1]`; peak value `amplitude` at the midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub lo: f64,
    pub hi: f64,
    pub sharpness: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(hi > lo, "empty bump support [{lo}, {hi}]");
        Bump {
            lo,
            hi,
            sharpness: 1.0,
            amplitude: 1.0,
        }
    }

    pub fn sharpness(mut self, c: f64) -> Self {
        self.sharpness = c;
        self
    }

    pub fn amplitude(mut self, a: f64) -> Self {
        self.amplitude = a;
        self
    }

    #[inline]
    fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - (self.lo + self.hi)) / (self.hi - self.lo)
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        let t = self.to_unit(x);
        if t <= -1.0 || t >= 1.0 {
            return 0.0;
        }
        let t2 = t * t;
        self.amplitude * (-self.sharpness * t2 / (1.0 - t2)).exp()
    }

    /// Derivatives of order `0..=4`, computed analytically.
    pub fn deriv(&self, x: f64, order: usize) -> f64 {
        assert!(order <= 4, "bump derivatives implemented up to order 4");
        let t = self.to_unit(x);
        if t <= -1.0 || t >= 1.0 {
            return 0.0;
        }
        let v = self.value(x);
        if order == 0 {
            return v;
        }
        // g(t) = -c/(1 - t²) + c; its derivatives coincide with those of -c/(1-t²).
        let c = self.sharpness;
        let (um, up) = (1.0 - t, 1.0 + t);
        let mut fact = 1.0;
        let mut g = [0.0f64; 5];
        for (k, gk) in g.iter_mut().enumerate().skip(1) {
            fact *= k as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *gk = -0.5 * c * fact * (um.powi(-(k as i32 + 1)) + sign * up.powi(-(k as i32 + 1)));
        }
        let d = match order {
            1 => g[1],
            2 => g[2] + g[1] * g[1],
            3 => g[3] + 3.0 * g[1] * g[2] + g[1].powi(3),
            _ => g[4] + 4.0 * g[1] * g[3] + 3.0 * g[2] * g[2] + 6.0 * g[1] * g[1] * g[2] + g[1].powi(4),
        };
        let scale = 2.0 / (self.hi - self.lo);
        v * d * scale.powi(order as i32)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// C^∞ transition: 0 for `t ≤ 0`, 1 for `t ≥ 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let s = |u: f64| (-1.0 / u).exp();
    let a = s(t);
    a / (a + s(1.0 - t))
}

/// Smooth plateau: rises on `[lo, flat_lo]`, equals 1 on `[flat_lo, flat_hi]`,
/// falls on `[flat_hi, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    pub lo: f64,
    pub flat_lo: f64,
    pub flat_hi: f64,
    pub hi: f64,
}

/// The dyadic weight U: support [1/2, 5/2], identically 1 on [1, 2].
pub const DYADIC_U: Plateau = Plateau { lo: 0.5, flat_lo: 1.0, flat_hi: 2.0, hi: 2.5 };

impl Plateau {
    pub fn new(lo: f64, flat_lo: f64, flat_hi: f64, hi: f64) -> Self {
        assert!(lo < flat_lo && flat_lo <= flat_hi && flat_hi < hi);
        Plateau { lo, flat_lo, flat_hi, hi }
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            0.0
        } else if x < self.flat_lo {
            smooth_step((x - self.lo) / (self.flat_lo - self.lo))
        } else if x <= self.flat_hi {
            1.0
        } else {
            smooth_step((self.hi - x) / (self.hi - self.flat_hi))
        }
    }
}
