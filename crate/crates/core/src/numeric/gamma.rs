//! Complex log-gamma via upward recurrence and the Stirling series.
//!
//! The returned value is *a* logarithm of Γ(z); only its exponential and its
//! differences inside exponentials are meaningful, so the branch is whatever
//! the recurrence produces.

use num_complex::Complex64;
use std::f64::consts::PI;

// B_{2k} / (2k (2k-1)) for k = 1..=10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

const SHIFT_MODULUS: f64 = 18.0;

pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Γ(z)Γ(1-z) = π / sin(πz)
        return Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.norm() < SHIFT_MODULUS {
        shift += w.ln();
        w += 1.0;
    }
    stirling(w) - shift
}

fn stirling(z: Complex64) -> Complex64 {
    let half_ln_2pi = 0.5 * (2.0 * PI).ln();
    let mut acc = (z - 0.5) * z.ln() - z + half_ln_2pi;
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut pow = inv;
    for c in STIRLING {
        acc += pow * c;
        pow *= inv2;
    }
    acc
}

/// log(sin(πz)), stable for large |Im z|.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    if z.im.abs() < 1.0 {
        return (z * PI).sin().ln();
    }
    if z.im > 0.0 {
        // sin(πz) = (i/2) e^{-iπz} (1 - e^{2πiz})
        (i * 0.5).ln() - i * PI * z + (Complex64::new(1.0, 0.0) - (i * 2.0 * PI * z).exp()).ln()
    } else {
        // sin(πz) = (-i/2) e^{iπz} (1 - e^{-2πiz})
        (-i * 0.5).ln() + i * PI * z + (Complex64::new(1.0, 0.0) - (-i * 2.0 * PI * z).exp()).ln()
    }
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}
