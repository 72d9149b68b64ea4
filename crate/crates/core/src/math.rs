//! Thin wrappers over `libm` plus a few geometric constants.

pub use core::f64::consts::{E, LN_2, PI};

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// Volume of the unit ball in R^d.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    powf(PI, h) / gamma(h + 1.0)
}

/// Surface area of the unit sphere S^{d-1} in R^d (2 for d = 1).
pub fn sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

/// `log(1/r)` clipped at zero.
#[inline]
pub fn log_plus_inv(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        -ln(r)
    }
}

pub fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for (a, b) in x.iter().zip(y) {
        let d = a - b;
        s += d * d;
    }
    sqrt(s)
}

pub fn norm(x: &[f64]) -> f64 {
    sqrt(x.iter().map(|v| v * v).sum())
}
