//! Jump intensity of (relativistic) symmetric stable processes.

use crate::error::{Error, Result};
use crate::math::{exp, gamma, ln, powf, sqrt, PI};
use crate::quadrature::{integrate_from_neg_infinity, integrate_to_infinity, QuadOptions};

/// `A(d, -alpha)`, the normalising constant of the stable jump kernel
/// `A(d,-alpha) |x-y|^{-(d+alpha)}`.
pub fn jump_constant(d: usize, alpha: f64) -> f64 {
    let d = d as f64;
    alpha * powf(2.0, d + alpha) * gamma((d + alpha) / 2.0)
        / (powf(2.0, d + 1.0) * powf(PI, d / 2.0) * gamma(1.0 - alpha / 2.0))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::domain("stable index alpha must lie in ]0,2["));
    }
    Ok(())
}

/// `Psi(r) = I(r)/I(0)` with `I(r) = int_0^inf s^{(d+alpha)/2-1} e^{-s/4-r^2/s} ds`.
///
/// The factor `e^{-r}` is pulled out analytically; the remaining integrand
/// peaks at `s = 2r`, where the range is split.
pub fn psi(d: usize, alpha: f64, r: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::domain("psi needs a finite r >= 0"));
    }
    if r == 0.0 {
        return Ok(1.0);
    }
    let k = (d as f64 + alpha) / 2.0;
    let opts = QuadOptions { rel_tol: 1e-10, abs_tol: 0.0, max_intervals: 400 };
    let shifted = |s: f64| {
        let z = sqrt(s) / 2.0 - r / sqrt(s);
        exp((k - 1.0) * ln(s) - z * z)
    };
    let split = 2.0 * r;
    // Lower piece in log variable s = e^v.
    let low = integrate_from_neg_infinity(|v| {
        let s = exp(v);
        if s == 0.0 {
            0.0
        } else {
            shifted(s) * s
        }
    }, ln(split), &opts);
    let high = integrate_to_infinity(shifted, split, &opts);
    if !(low.converged && high.converged) {
        return Err(Error::Accuracy { best: low.value[0] + high.value[0], error: low.abs_error + high.abs_error });
    }
    let i0 = gamma(k) * powf(4.0, k);
    Ok(exp(-r) * (low.value[0] + high.value[0]) / i0)
}

/// `J_m(r) = A(d,-alpha) Psi(m^{1/alpha} r) / r^{d+alpha}`.
pub fn relativistic_jump_density(d: usize, alpha: f64, m: f64, r: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(r > 0.0) {
        return Err(Error::domain("jump density is singular at r = 0"));
    }
    if !(m >= 0.0) {
        return Err(Error::domain("mass m must be nonnegative"));
    }
    let p = psi(d, alpha, powf(m, 1.0 / alpha) * r)?;
    Ok(jump_constant(d, alpha) * p * powf(r, -(d as f64 + alpha)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_at_origin_and_decreasing() {
        assert_eq!(psi(3, 1.0, 0.0).unwrap(), 1.0);
        let v: [f64; 3] = [1.0, 2.0, 5.0].map(|r| psi(3, 1.0, r).unwrap());
        assert!(1.0 > v[0] && v[0] > v[1] && v[1] > v[2]);
    }

    #[test]
    fn psi_closed_form_d1_alpha1() {
        // k = 1: I(r) = int e^{-s/4 - r^2/s} ds = 4 r K_1(r); check against a
        // direct brute-force sum instead of a Bessel routine.
        let r: f64 = 0.7;
        let n = 2_000_000;
        let h = 200.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let s = (i as f64 + 0.5) * h;
            acc += libm::exp(-s / 4.0 - r * r / s);
        }
        let brute = acc * h / 4.0;
        assert!((psi(1, 1.0, r).unwrap() - brute).abs() < 1e-6);
    }

    #[test]
    fn jump_constant_cauchy_d1() {
        // alpha = 1, d = 1: Cauchy process jump kernel 1/(pi r^2).
        assert!((jump_constant(1, 1.0) - 1.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert!(relativistic_jump_density(3, 1.0, 1.0, 0.0).is_err());
        assert!(psi(3, 2.0, 1.0).is_err());
    }
}
