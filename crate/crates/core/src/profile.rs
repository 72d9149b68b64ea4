//! Functions of a radius: densities of radial measures and heat kernel
//! profiles `Phi`.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math::{exp, log_plus_inv, powf};

#[derive(Clone)]
pub enum Profile {
    /// `c`
    Constant { c: f64 },
    /// `c r^{-gamma}`
    Power { c: f64, gamma: f64 },
    /// `c r^{-gamma} (log+ 1/r)^k`
    PowerLog { c: f64, gamma: f64, k: f64 },
    /// `c exp(-rate r^shape)`
    Exponential { c: f64, rate: f64, shape: f64 },
    /// `min(cap, a r^{-k})`
    CappedPower { cap: f64, a: f64, k: f64 },
    /// Piecewise linear through `(radii[i], values[i])`, constant outside.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
    /// The inner profile on `[0, radius[`, zero beyond.
    Truncated { inner: Box<Profile>, radius: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant { c } => write!(f, "Constant({c})"),
            Profile::Power { c, gamma } => write!(f, "Power({c}, {gamma})"),
            Profile::PowerLog { c, gamma, k } => write!(f, "PowerLog({c}, {gamma}, {k})"),
            Profile::Exponential { c, rate, shape } => write!(f, "Exponential({c}, {rate}, {shape})"),
            Profile::CappedPower { cap, a, k } => write!(f, "CappedPower({cap}, {a}, {k})"),
            Profile::Tabulated { radii, .. } => write!(f, "Tabulated({} knots)", radii.len()),
            Profile::Truncated { inner, radius } => write!(f, "Truncated({inner:?}, {radius})"),
            Profile::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl Profile {
    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Profile::Custom(Arc::new(f))
    }

    pub fn tabulated(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.len() != values.len() {
            return Err(Error::validation("tabulated profile needs equally many radii and values"));
        }
        if radii.windows(2).any(|w| !(w[0] < w[1])) || radii[0] < 0.0 {
            return Err(Error::validation("tabulated radii must be nonnegative and strictly increasing"));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::validation("tabulated values must be finite and nonnegative"));
        }
        Ok(Profile::Tabulated { radii, values })
    }

    pub fn truncated(self, radius: f64) -> Self {
        Profile::Truncated { inner: Box::new(self), radius }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Profile::Constant { c } => *c,
            Profile::Power { c, gamma } => {
                if *gamma == 0.0 {
                    *c
                } else {
                    c * powf(r, -gamma)
                }
            }
            Profile::PowerLog { c, gamma, k } => {
                if r == 0.0 {
                    return if *gamma > 0.0 || *k > 0.0 {
                        f64::INFINITY
                    } else if *k == 0.0 {
                        *c
                    } else {
                        0.0
                    };
                }
                let l = log_plus_inv(r);
                if l == 0.0 {
                    return if *k == 0.0 { c * powf(r, -gamma) } else if *k > 0.0 { 0.0 } else { f64::INFINITY };
                }
                let base = if *gamma == 0.0 { *c } else { c * powf(r, -gamma) };
                base * powf(l, *k)
            }
            Profile::Exponential { c, rate, shape } => c * exp(-rate * powf(r, *shape)),
            Profile::CappedPower { cap, a, k } => {
                if r == 0.0 {
                    *cap
                } else {
                    cap.min(a * powf(r, -k))
                }
            }
            Profile::Tabulated { radii, values } => interpolate(radii, values, r),
            Profile::Truncated { inner, radius } => {
                if r < *radius {
                    inner.eval(r)
                } else {
                    0.0
                }
            }
            Profile::Custom(f) => f(r),
        }
    }

    /// Local blow-up exponent at the origin: `f(r) ~ r^{-h}`.
    pub fn singularity_exponent(&self) -> f64 {
        match self {
            Profile::Power { gamma, .. } | Profile::PowerLog { gamma, .. } => gamma.max(0.0),
            Profile::Truncated { inner, .. } => inner.singularity_exponent(),
            _ => 0.0,
        }
    }

    /// Radius beyond which the profile vanishes (`inf` if none is known).
    pub fn support_radius(&self) -> f64 {
        match self {
            Profile::Truncated { inner, radius } => radius.min(inner.support_radius()),
            Profile::Tabulated { radii, values } if values[values.len() - 1] == 0.0 => {
                let mut i = values.len() - 1;
                while i > 0 && values[i - 1] == 0.0 {
                    i -= 1;
                }
                radii[i]
            }
            Profile::Constant { c } | Profile::Power { c, .. } if *c == 0.0 => 0.0,
            _ => f64::INFINITY,
        }
    }

    /// Radii where the profile has kinks or jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Profile::Truncated { inner, radius } => {
                let mut b = inner.breakpoints();
                b.push(*radius);
                b
            }
            Profile::Tabulated { radii, .. } => radii.clone(),
            Profile::CappedPower { cap, a, k } if *cap > 0.0 => alloc::vec![powf(a / cap, 1.0 / k)],
            Profile::PowerLog { .. } => alloc::vec![1.0],
            _ => Vec::new(),
        }
    }

    /// `|f|^q`, kept symbolic when possible.
    pub fn pow(&self, q: f64) -> Profile {
        match self {
            Profile::Constant { c } => Profile::Constant { c: powf(*c, q) },
            Profile::Power { c, gamma } => Profile::Power { c: powf(*c, q), gamma: gamma * q },
            Profile::PowerLog { c, gamma, k } => Profile::PowerLog { c: powf(*c, q), gamma: gamma * q, k: k * q },
            Profile::Exponential { c, rate, shape } => {
                Profile::Exponential { c: powf(*c, q), rate: rate * q, shape: *shape }
            }
            Profile::Truncated { inner, radius } => inner.pow(q).truncated(*radius),
            other => {
                let inner = other.clone();
                Profile::custom(move |r| powf(inner.eval(r), q))
            }
        }
    }

    /// True when the profile is nonincreasing on a log-spaced grid of `[lo, hi]`.
    pub fn is_decreasing_on(&self, lo: f64, hi: f64, n: usize) -> bool {
        let mut prev = f64::INFINITY;
        for i in 0..n {
            let r = lo * powf(hi / lo, i as f64 / (n - 1) as f64);
            let v = self.eval(r);
            if v > prev * (1.0 + 1e-12) {
                return false;
            }
            prev = v;
        }
        true
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let n = xs.len();
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|&v| v <= x);
    let (x0, x1) = (xs[i - 1], xs[i]);
    let w = (x - x0) / (x1 - x0);
    ys[i - 1] * (1.0 - w) + ys[i] * w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbolic_values() {
        assert_eq!(Profile::Power { c: 2.0, gamma: 1.0 }.eval(0.5), 4.0);
        assert_eq!(Profile::Power { c: 1.0, gamma: 1.0 }.eval(0.0), f64::INFINITY);
        let p = Profile::PowerLog { c: 1.0, gamma: 0.0, k: 2.0 };
        assert!((p.eval(libm::exp(-3.0)) - 9.0).abs() < 1e-12);
        assert_eq!(p.eval(2.0), 0.0);
        let cp = Profile::CappedPower { cap: 1.0, a: 8.0, k: 3.0 };
        assert_eq!(cp.eval(1.0), 1.0);
        assert_eq!(cp.eval(4.0), 0.125);
        assert_eq!(cp.breakpoints(), alloc::vec![2.0]);
    }

    #[test]
    fn tabulated_interpolation_and_support() {
        let p = Profile::tabulated(alloc::vec![0.0, 1.0, 2.0, 3.0], alloc::vec![4.0, 2.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.eval(0.5), 3.0);
        assert_eq!(p.eval(10.0), 0.0);
        assert_eq!(p.support_radius(), 2.0);
        assert!(p.is_decreasing_on(1e-3, 5.0, 50));
        assert!(Profile::tabulated(alloc::vec![1.0, 0.5], alloc::vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn powers_stay_symbolic() {
        match (Profile::Power { c: 2.0, gamma: 1.5 }).pow(2.0) {
            Profile::Power { c, gamma } => {
                assert_eq!(c, 4.0);
                assert_eq!(gamma, 3.0);
            }
            other => panic!("{other:?}"),
        }
        let t = Profile::Constant { c: 3.0 }.truncated(1.0);
        assert_eq!(t.eval(0.99), 3.0);
        assert_eq!(t.eval(1.0), 0.0);
        assert_eq!(t.support_radius(), 1.0);
    }
}
