use alloc::format;
use alloc::vec::Vec;

use super::{HeatKernelModel, Regime};
use crate::error::{Error, Result};
use crate::math::{exp, ln, powf};
use crate::quadrature::QuadOptions;

/// Constants `C'` (lower) and `C` (upper) of the bounds on
/// `int_0^t p_s ds`, fitted once per model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaConstants {
    pub lower: f64,
    pub upper: f64,
    pub fitted: bool,
}

impl LemmaConstants {
    pub(super) const UNFITTED: LemmaConstants = LemmaConstants { lower: f64::NAN, upper: f64::NAN, fitted: false };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeIntegralBounds {
    /// `None` when the lower-bound regime guard fails.
    pub lower: Option<f64>,
    pub upper: f64,
    pub shape_lower: Option<f64>,
    pub shape_upper: f64,
    pub constants_fitted: bool,
}

const MARGIN: f64 = 1.25;

fn shape(regime: Regime, nu: f64, beta: f64, t: f64, rho: f64) -> f64 {
    match regime {
        Regime::Supercritical => powf(rho, beta - nu),
        Regime::Critical => -ln(rho),
        Regime::Subcritical => powf(t, 1.0 - nu / beta),
    }
}

fn lower_guard(regime: Regime, beta: f64, t: f64, rho: f64) -> Option<&'static str> {
    match regime {
        Regime::Supercritical | Regime::Subcritical if !(powf(rho, beta) < t) => Some("d(x,y)^beta < t"),
        Regime::Critical if !(powf(rho, beta / 2.0) < t && t < 0.5) => Some("d(x,y)^{beta/2} < t < 1/2"),
        _ => None,
    }
}

fn upper_guard(regime: Regime, beta: f64, t: f64, rho: f64) -> Option<&'static str> {
    match regime {
        Regime::Supercritical if rho == 0.0 => Some("d(x,y) > 0"),
        Regime::Critical if !(powf(rho, beta).max(t) < 0.5 && rho > 0.0) => Some("0 < d(x,y)^beta v t < 1/2"),
        _ => None,
    }
}

fn sample_grid(model: &HeatKernelModel) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let regime = model.regime();
    let beta = model.beta();
    let t_top = match regime {
        Regime::Critical => 0.45f64.min(0.9 * model.t0),
        _ => 4.0f64.min(0.9 * model.t0),
    };
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for i in 0..6 {
        let t = t_top * powf(4.0, -(i as f64));
        let scale = powf(t, 1.0 / beta);
        match regime {
            Regime::Supercritical | Regime::Subcritical => {
                for j in 0..7 {
                    lower.push((t, 0.95 * scale * powf(2.0, -(j as f64))));
                }
                for j in -6..5 {
                    upper.push((t, scale * powf(2.0, j as f64)));
                }
                if regime == Regime::Subcritical {
                    lower.push((t, 0.0));
                    upper.push((t, 0.0));
                }
            }
            Regime::Critical => {
                let top = 0.95 * powf(t, 2.0 / beta).min(0.3);
                for j in 0..7 {
                    lower.push((t, top * powf(2.0, -(j as f64))));
                }
                let top = 0.95 * powf(0.5, 1.0 / beta).min(0.3);
                for j in 0..9 {
                    upper.push((t, top * powf(2.0, -(j as f64))));
                }
            }
        }
    }
    (lower, upper)
}

/// Least squares in log-log coordinates with the slope fixed by the bound
/// shape: the intercept is the mean log-ratio and the envelope adds the
/// extreme residual plus a safety margin.
fn envelope(ratios: &[f64], upper: bool) -> f64 {
    let logs: Vec<f64> = ratios.iter().filter(|r| **r > 0.0 && r.is_finite()).map(|r| ln(*r)).collect();
    if logs.is_empty() {
        return f64::NAN;
    }
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    if upper {
        let dev = logs.iter().map(|l| l - mean).fold(f64::NEG_INFINITY, f64::max);
        exp(mean + dev) * MARGIN
    } else {
        let dev = logs.iter().map(|l| l - mean).fold(f64::INFINITY, f64::min);
        exp(mean + dev) / MARGIN
    }
}

pub(super) fn fit(model: &HeatKernelModel) -> LemmaConstants {
    let regime = model.regime();
    let (nu, beta) = (model.nu(), model.beta());
    let opts = QuadOptions::rel(1e-7);
    let (lo_pts, up_pts) = sample_grid(model);
    let ratio = |&(t, rho): &(f64, f64)| -> Option<f64> {
        let q = match model.time_integral_at(t, rho, &opts) {
            Ok(q) => q.value,
            Err(e) => e.best_estimate()?,
        };
        Some(q / shape(regime, nu, beta, t, rho))
    };
    let lo: Vec<f64> = lo_pts.iter().filter_map(ratio).collect();
    let up: Vec<f64> = up_pts.iter().filter_map(ratio).collect();
    let lower = envelope(&lo, false);
    let upper = envelope(&up, true);
    LemmaConstants { lower, upper, fitted: lower.is_finite() && upper.is_finite() }
}

pub(super) fn evaluate(model: &HeatKernelModel, t: f64, rho: f64) -> Result<TimeIntegralBounds> {
    if !(t > 0.0) || !(rho >= 0.0) {
        return Err(Error::domain("need t > 0 and d(x,y) >= 0"));
    }
    if t > model.t0 {
        return Err(Error::domain(format!("bounds hold for t <= t0 = {}", model.t0)));
    }
    let regime = model.regime();
    let (nu, beta) = (model.nu(), model.beta());
    if let Some(g) = upper_guard(regime, beta, t, rho) {
        return Err(Error::domain(format!("regime guard violated: {g}")));
    }
    let s = shape(regime, nu, beta, t, rho);
    let c = model.lemma;
    let shape_lower = if lower_guard(regime, beta, t, rho).is_none() { Some(s) } else { None };
    Ok(TimeIntegralBounds {
        lower: shape_lower.map(|s| c.lower * s),
        upper: c.upper * s,
        shape_lower,
        shape_upper: s,
        constants_fitted: c.fitted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::SpaceModel;
    use crate::profile::Profile;

    #[test]
    fn gaussian_d3_containment() {
        let g = HeatKernelModel::gaussian(3).unwrap();
        let b = g.time_integrated_bounds(0.5, 0.1).unwrap();
        assert!((b.shape_upper - 10.0).abs() < 1e-12);
        let v = g.time_integral_at(0.5, 0.1, &QuadOptions::default()).unwrap().value;
        assert!(b.lower.unwrap() <= v && v <= b.upper, "{b:?} {v}");
        // The upper constant approaches 1/(2 pi) from the closed form.
        let c = g.lemma_constants();
        assert!(c.upper >= 1.0 / (2.0 * crate::math::PI));
    }

    #[test]
    fn subcritical_shape() {
        let space = SpaceModel::new(1, 1.0, 2.0).unwrap();
        let phi = Profile::Exponential { c: 0.4, rate: 0.5, shape: 2.0 };
        let m = HeatKernelModel::custom(space, f64::INFINITY, phi.clone(), phi.clone(), phi).unwrap();
        let b = m.time_integrated_bounds(0.25, 3.0).unwrap();
        assert!((b.shape_upper - 0.5).abs() < 1e-15);
        assert!(b.lower.is_none());
    }

    #[test]
    fn critical_shape_and_guard() {
        let space = SpaceModel::new(2, 2.0, 2.0).unwrap();
        let phi = Profile::Exponential { c: 0.15, rate: 0.5, shape: 2.0 };
        let m = HeatKernelModel::custom(space, 1.0, phi.clone(), phi.clone(), phi).unwrap();
        let b = m.time_integrated_bounds(0.2, 0.1).unwrap();
        assert!((b.shape_upper - libm::log(10.0)).abs() < 1e-14);
        assert!(matches!(m.time_integrated_bounds(0.6, 0.1), Err(Error::Domain(_))));
    }
}
