//! Double-double exp, ln and real powers, accurate to about 10⁻³⁰ relative.
//! (The transcendental functions shipped with `twofloat` are only good to
//! roughly f64 precision, which defeats the purpose of carrying a phase in
//! double-double.)

use twofloat::TwoFloat;

fn ln2() -> TwoFloat {
    TwoFloat::new_add(std::f64::consts::LN_2, 2.319046813846299558e-17)
}

/// exp of a double-double argument.
pub fn exp_dd(x: TwoFloat) -> TwoFloat {
    if x.hi() == 0.0 {
        return TwoFloat::from(1.0) + x.lo();
    }
    let k = (x.hi() / std::f64::consts::LN_2).round();
    // r = x − k·ln2, then scale by 2⁻⁸ so the series converges fast.
    let r = (x - ln2() * k) / 256.0;
    let mut term = TwoFloat::from(1.0);
    let mut sum = TwoFloat::from(1.0);
    for n in 1..=14 {
        term = term * r / n as f64;
        sum += term;
        if term.hi().abs() < 1e-33 {
            break;
        }
    }
    for _ in 0..8 {
        sum = sum * sum;
    }
    let scale = 2f64.powi(k as i32);
    sum * scale
}

/// Natural log of a positive double-double, by Newton's method on exp.
pub fn ln_dd(x: TwoFloat) -> TwoFloat {
    assert!(x.hi() > 0.0, "ln of non-positive value");
    let mut y = TwoFloat::from(x.hi().ln());
    for _ in 0..2 {
        y = y + x * exp_dd(-y) - 1.0;
    }
    y
}

/// x^p for positive double-double x and real p.
pub fn pow_dd(x: TwoFloat, p: TwoFloat) -> TwoFloat {
    exp_dd(p * ln_dd(x))
}
