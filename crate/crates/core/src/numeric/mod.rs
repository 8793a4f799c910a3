//! Shared numerical building blocks.

pub mod bump;
pub mod dd;
pub mod gamma;
pub mod quad;
pub mod sum;
pub mod zeta;

pub use num_complex::Complex64;

pub const TAU: f64 = std::f64::consts::TAU;

/// `e(x) = exp(2πix)`.
#[inline]
pub fn e(x: f64) -> Complex64 {
    let (s, c) = (TAU * x).sin_cos();
    Complex64::new(c, s)
}

/// `e(x)` with the argument first reduced mod 1, for large phases given as
/// an exact rational `num/den`.
#[inline]
pub fn e_frac(num: i64, den: i64) -> Complex64 {
    let r = num.rem_euclid(den);
    e(r as f64 / den as f64)
}
