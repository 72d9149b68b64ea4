use crate::error::{Error, Result};
use crate::estimate::Quantity;
use crate::math::{exp, ln, LN_2};
use crate::quadrature::{integrate, integrate_from_neg_infinity, integrate_to_infinity, QuadOptions};

/// `int_0^t e^{-alpha s} k(s, rho) ds`.
///
/// For `rho > 0` the variable is `w = ln u` with `u = rho/s^{1/beta}`, which
/// stretches the `s -> 0` boundary layer; at `rho = 0` it is `ln s`.
pub(super) fn time_integral<K: Fn(f64, f64) -> f64>(
    kernel: &K,
    nu: f64,
    beta: f64,
    t: f64,
    rho: f64,
    alpha: f64,
    opts: &QuadOptions,
) -> Result<Quantity> {
    if !(rho >= 0.0) {
        return Err(Error::domain("distance must be nonnegative"));
    }
    let q = if rho == 0.0 {
        if nu >= beta {
            return Ok(Quantity::divergent());
        }
        integrate_from_neg_infinity(
            |v| {
                let s = exp(v);
                if s == 0.0 {
                    return 0.0;
                }
                kernel(s, 0.0) * exp(-alpha * s) * s
            },
            ln(t),
            opts,
        )
    } else {
        let lr = ln(rho);
        let w_t = lr - ln(t) / beta;
        integrate_to_infinity(
            |w| {
                let s = exp(beta * (lr - w));
                if s == 0.0 {
                    return 0.0;
                }
                let v = kernel(s, rho);
                if v == 0.0 {
                    0.0
                } else {
                    v * exp(-alpha * s) * beta * s
                }
            },
            w_t,
            opts,
        )
    };
    q.into_quantity("time integral")
}

/// `int_0^inf e^{-alpha s} k(s, rho) ds`, truncated at `T` once the bound
/// `e^{-alpha T} k(T, 0)/alpha` on the tail drops below `1e-12` of the head.
pub(super) fn resolvent<K: Fn(f64, f64) -> f64>(
    kernel: &K,
    nu: f64,
    beta: f64,
    alpha: f64,
    rho: f64,
    opts: &QuadOptions,
) -> Result<Quantity> {
    if rho == 0.0 && nu >= beta {
        return Ok(Quantity::divergent());
    }
    let mut horizon = (12.0 * core::f64::consts::LN_10 / alpha).max(1.0);
    let head = time_integral(kernel, nu, beta, horizon, rho, alpha, opts)?;
    let (mut value, mut error) = (head.value, head.error);
    for _ in 0..80 {
        let bound = exp(-alpha * horizon) * kernel(horizon, 0.0) / alpha;
        if bound <= 1e-12 * value || bound < 1e-300 {
            return Ok(Quantity::finite(value, error + bound));
        }
        // Extend the head over [T, 2T] in the variable ln s.
        let ext = integrate(
            |v| {
                let s = exp(v);
                kernel(s, rho) * exp(-alpha * s) * s
            },
            ln(horizon),
            ln(horizon) + LN_2,
            opts,
        )
        .into_quantity("resolvent")?;
        value += ext.value;
        error += ext.error;
        horizon *= 2.0;
    }
    Err(Error::Accuracy { best: value, error: f64::INFINITY })
}
