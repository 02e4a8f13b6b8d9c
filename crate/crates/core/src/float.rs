//! Float helpers that need `libm` on a `no_std` target.

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

pub fn round(x: f64) -> f64 {
    libm::round(x)
}

pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

pub fn exp2(x: f64) -> f64 {
    libm::exp2(x)
}

/// Integer power by repeated squaring; exact for the small exponents used in
/// the economics formulas.
pub fn powi(base: f64, exp: i32) -> f64 {
    let mut e = exp.unsigned_abs();
    let mut b = base;
    let mut acc = 1.0;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    if exp < 0 {
        1.0 / acc
    } else {
        acc
    }
}
