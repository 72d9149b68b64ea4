//! Rearrangement-based sufficient conditions for potentials `V m` against
//! the Green kernels of stable-like processes on `R^d`.
//!
//! Only radial profiles and distribution functions `t -> m(|V| >= t)` are
//! rearranged; `alpha` below is the stability index (`beta` of the space).

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::{exp, ln, powf, unit_ball_volume, E};
use crate::profile::Profile;
use crate::quadrature::{
    dyadic_tail, integrate_to_infinity, origin_sweep_vec, QuadOptions, SweepParams, TailParams,
};

/// A nonincreasing function on `[0, end]`.
#[derive(Clone)]
pub struct DecreasingFn {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub end: f64,
}

impl fmt::Debug for DecreasingFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DecreasingFn(end={})", self.end)
    }
}

impl DecreasingFn {
    /// Checks monotonicity on a mixed linear and logarithmic sample grid.
    pub fn new<F>(f: F, end: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let out = DecreasingFn { f: Arc::new(f), end };
        out.validate()?;
        Ok(out)
    }

    pub fn from_profile(profile: &Profile) -> Result<Self> {
        let p = profile.clone();
        DecreasingFn::new(move |r| p.eval(r), f64::INFINITY)
    }

    fn validate(&self) -> Result<()> {
        let top = if self.end.is_finite() { self.end } else { 1e8 };
        let mut grid: Vec<f64> = (0..=400).map(|i| top * i as f64 / 400.0).collect();
        grid.extend((0..=400).map(|i| top * powf(10.0, -12.0 + 12.0 * i as f64 / 400.0)));
        grid.sort_by(f64::total_cmp);
        let mut prev = f64::INFINITY;
        for s in grid {
            let v = self.eval(s);
            if v.is_nan() || v < 0.0 {
                return Err(Error::validation(format!("value {v} at {s} is not a nonnegative number")));
            }
            if v > prev * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::validation(format!("function increases near s = {s}")));
            }
            prev = v;
        }
        Ok(())
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s > self.end {
            0.0
        } else {
            (self.f)(s)
        }
    }

    /// `sup{s : f(s) > t}` (0 for an empty set, `inf` if unbounded).
    pub fn inverse_at(&self, t: f64) -> f64 {
        let above = |s: f64| self.eval(s) > t;
        let lo_ok = above(0.0) || above(f64::MIN_POSITIVE);
        if !lo_ok {
            return 0.0;
        }
        let mut hi;
        if self.end.is_finite() {
            if above(self.end) {
                return self.end;
            }
            hi = self.end;
        } else {
            hi = 1.0;
            let mut k = 0;
            while above(hi) {
                hi *= 2.0;
                k += 1;
                if k > 1000 {
                    return f64::INFINITY;
                }
            }
        }
        let mut lo = 0.0;
        for _ in 0..2000 {
            let mid = if lo == 0.0 && hi > 1e-300 { (lo + hi) / 2.0 } else { lo + (hi - lo) / 2.0 };
            if mid <= lo || mid >= hi {
                break;
            }
            if above(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// The right-continuous inverse `t -> sup{s : f(s) > t}`.
pub fn right_continuous_inverse(f: &DecreasingFn) -> DecreasingFn {
    let g = f.clone();
    let top = f.eval(0.0);
    DecreasingFn { f: Arc::new(move |t| g.inverse_at(t)), end: if top.is_finite() { top } else { f64::INFINITY } }
}

/// `sum_i values[i] 1_{]ends[i-1], ends[i]]}` with the first piece closed at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    pub ends: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepFunction {
    pub fn new(ends: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if ends.len() != values.len() || ends.is_empty() {
            return Err(Error::validation("a step function needs equally many ends and values"));
        }
        if ends.windows(2).any(|w| !(w[0] < w[1])) || !(ends[0] > 0.0) {
            return Err(Error::validation("step ends must be positive and increasing"));
        }
        if values.windows(2).any(|w| w[1] > w[0]) || values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::validation("step values must be nonnegative and nonincreasing"));
        }
        Ok(StepFunction { ends, values })
    }

    pub fn eval(&self, s: f64) -> f64 {
        let i = self.ends.partition_point(|&e| e < s);
        self.values.get(i).copied().unwrap_or(0.0)
    }

    /// Exact right-continuous inverse.
    pub fn inverse_at(&self, t: f64) -> f64 {
        self.ends.iter().zip(&self.values).filter(|(_, v)| **v > t).map(|(e, _)| *e).fold(0.0, f64::max)
    }

    pub fn to_decreasing(&self) -> DecreasingFn {
        let s = self.clone();
        let end = *self.ends.last().expect("nonempty");
        DecreasingFn { f: Arc::new(move |x| s.eval(x)), end }
    }
}

/// `t -> m(|V| >= t)`.
#[derive(Clone)]
pub struct DistributionFunction {
    repr: Repr,
}

#[derive(Clone)]
enum Repr {
    Closed(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// Right-continuous steps with a power-law tail beyond the last knot.
    Table { t: Vec<f64>, m: Vec<f64>, tail_exponent: Option<f64> },
}

impl fmt::Debug for DistributionFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Closed(_) => f.write_str("DistributionFunction(closed form)"),
            Repr::Table { t, .. } => write!(f, "DistributionFunction({} knots)", t.len()),
        }
    }
}

/// Pool-adjacent-violators fit of a nonincreasing sequence.
pub fn isotonic_decreasing(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if b <= a {
                break;
            }
            blocks.pop();
            let n = na + nb;
            *blocks.last_mut().unwrap() = ((a * na as f64 + b * nb as f64) / n as f64, n);
        }
    }
    blocks.into_iter().flat_map(|(v, n)| core::iter::repeat_n(v, n)).collect()
}

impl DistributionFunction {
    pub fn closed<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        DistributionFunction { repr: Repr::Closed(Arc::new(f)) }
    }

    /// `V(x) = f(|x|)` with `f` nonincreasing: `m(|V| >= t) = omega_d s(t)^d`.
    pub fn radial(profile: &Profile, d: usize) -> Result<Self> {
        let f = DecreasingFn::from_profile(profile)?;
        let omega = unit_ball_volume(d);
        Ok(DistributionFunction::closed(move |t| {
            // At continuity points {f >= t} and {f > t} have the same measure.
            let s = f.inverse_at(t * (1.0 - 1e-15));
            omega * powf(s, d as f64)
        }))
    }

    /// Tabulated values, made nonincreasing by isotonic regression.
    pub fn tabulated(t: Vec<f64>, m: Vec<f64>) -> Result<Self> {
        if t.len() != m.len() || t.len() < 2 {
            return Err(Error::validation("need at least two (t, m) pairs"));
        }
        if t.windows(2).any(|w| !(w[0] < w[1])) || !(t[0] > 0.0) {
            return Err(Error::validation("thresholds must be positive and increasing"));
        }
        if m.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::validation("masses must be finite and nonnegative"));
        }
        let m = isotonic_decreasing(&m);
        let n = m.len();
        let tail_exponent = if m[n - 1] > 0.0 && n >= 3 && m[n - 3] > m[n - 1] {
            Some((ln(m[n - 3]) - ln(m[n - 1])) / (ln(t[n - 1]) - ln(t[n - 3])))
        } else {
            None
        };
        Ok(DistributionFunction { repr: Repr::Table { t, m, tail_exponent } })
    }

    /// Threshold counting of `v` on `n` uniform points of the ball
    /// `B(center, radius)`, which must contain the support of `v`.
    pub fn monte_carlo<F>(v: F, center: &[f64], radius: f64, thresholds: Vec<f64>, n: usize, seed: u64) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let d = center.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = alloc::vec![0usize; thresholds.len()];
        let mut y = alloc::vec![0.0; d];
        let mut accepted = 0;
        while accepted < n {
            for yi in y.iter_mut() {
                *yi = rng.random_range(-1.0..1.0);
            }
            if y.iter().map(|c| c * c).sum::<f64>() >= 1.0 {
                continue;
            }
            accepted += 1;
            let p: Vec<f64> = y.iter().zip(center).map(|(a, c)| c + radius * a).collect();
            let val = v(&p).abs();
            for (k, t) in thresholds.iter().enumerate() {
                if val >= *t {
                    counts[k] += 1;
                }
            }
        }
        let vol = unit_ball_volume(d) * powf(radius, d as f64);
        let m = counts.iter().map(|c| vol * *c as f64 / n as f64).collect();
        DistributionFunction::tabulated(thresholds, m)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.repr {
            Repr::Closed(f) => f(t),
            Repr::Table { t: ts, m, tail_exponent } => {
                if t < ts[0] {
                    return m[0];
                }
                let i = ts.partition_point(|&x| x <= t) - 1;
                if i + 1 < ts.len() {
                    return m[i];
                }
                match tail_exponent {
                    Some(k) => m[i] * powf(t / ts[i], -k),
                    None => m[i],
                }
            }
        }
    }
}

/// How the Green kernel of the stable-like process on `R^d` behaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StableRegime {
    /// `d > alpha`: `r^{alpha-d}`.
    Transient,
    /// `d = alpha = 1`: `log(1/r)`.
    Logarithmic,
    /// `alpha > d = 1`: bounded.
    Recurrent,
}

pub fn stable_regime(d: usize, alpha: f64) -> Result<StableRegime> {
    let df = d as f64;
    if df > alpha {
        Ok(StableRegime::Transient)
    } else if d == 1 && alpha == 1.0 {
        Ok(StableRegime::Logarithmic)
    } else if d == 1 && alpha > 1.0 {
        Ok(StableRegime::Recurrent)
    } else {
        Err(Error::domain(format!("no Green kernel regime for d = {d}, alpha = {alpha}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionValue {
    pub value: f64,
    pub error: f64,
    pub finite: bool,
    /// Whether finiteness is also necessary (decreasing profile vanishing
    /// at infinity); otherwise only the necessity direction is reported.
    pub converse_applies: bool,
    pub warning: Option<String>,
}

/// `int_0^R r^{d-p(d-alpha)-1} f(r) dr` (or its logarithmic and bounded
/// variants), with divergence detection at the origin.
pub fn radial_criterion(profile: &Profile, d: usize, alpha: f64, p: f64, r: f64) -> Result<CriterionValue> {
    if !(p >= 1.0) || !(r > 0.0) {
        return Err(Error::domain("need p >= 1 and R > 0"));
    }
    let regime = stable_regime(d, alpha)?;
    if regime == StableRegime::Logarithmic && !(r < 1.0 / E) {
        return Err(Error::domain("the logarithmic variant needs R < 1/e"));
    }
    let e = d as f64 - p * (d as f64 - alpha) - 1.0;
    let weight = move |s: f64| match regime {
        StableRegime::Transient => powf(s, e),
        StableRegime::Logarithmic => powf(-ln(s), p),
        StableRegime::Recurrent => 1.0,
    };
    let f = |s: f64| {
        let v = profile.eval(s);
        if v == 0.0 {
            [0.0]
        } else {
            [weight(s) * v]
        }
    };
    let bps: Vec<f64> = profile.breakpoints().into_iter().filter(|b| *b < r).collect();
    let sw = origin_sweep_vec(&f, r, &bps, &QuadOptions::rel(1e-9), &SweepParams::default());
    let decreasing = profile.is_decreasing_on(1e-9, 1e9, 600) && profile.eval(1e9) < 1e-9 * profile.eval(1.0).max(1e-300);
    Ok(CriterionValue {
        value: sw.value[0],
        error: sw.quad_error + sw.extrapolation_error,
        finite: !sw.diverged,
        converse_applies: decreasing,
        warning: None,
    })
}

/// `F(s) = int_0^{s/2} (log+ 1/u)^p du = Gamma(p+1, max(log(2/s), 0))`.
pub fn log_mass_transform(s: f64, p: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let a = ln(2.0 / s).max(0.0);
    integrate_to_infinity(|v| powf(v, p) * exp(-v), a, &QuadOptions::rel(1e-10)).value[0]
}

/// `int_a^inf m(|V| >= t)^{(d-p(d-alpha))/d} dt` (or its `F` and plain
/// variants); a finite value implies membership of `|V| m`.
pub fn layer_cake_criterion(dist: &DistributionFunction, d: usize, alpha: f64, p: f64, a: f64) -> Result<CriterionValue> {
    if !(p >= 1.0) || !(a > 0.0) {
        return Err(Error::domain("need p >= 1 and a > 0"));
    }
    let regime = stable_regime(d, alpha)?;
    let theta = (d as f64 - p * (d as f64 - alpha)) / d as f64;
    if regime == StableRegime::Transient && !(theta > 0.0) {
        return Err(Error::domain(format!("exponent (d-p(d-alpha))/d = {theta} is not positive")));
    }
    let g = |t: f64| {
        let m = dist.eval(t);
        if m == 0.0 {
            return 0.0;
        }
        match regime {
            StableRegime::Transient => powf(m, theta),
            StableRegime::Logarithmic => log_mass_transform(m, p),
            StableRegime::Recurrent => m,
        }
    };
    tail_value(g, a, None)
}

fn tail_value<G: Fn(f64) -> f64>(g: G, a: f64, warning: Option<String>) -> Result<CriterionValue> {
    let tr = dyadic_tail(g, a, &QuadOptions::rel(1e-9), &TailParams::default());
    Ok(CriterionValue {
        value: if tr.diverged { f64::INFINITY } else { tr.value },
        error: tr.error,
        finite: !tr.diverged,
        converse_applies: false,
        warning,
    })
}

/// `int_a^inf G'(s)^{1-d/(p(d-alpha))} ds` for a convex-type `G` with
/// `int G(|V|) dm = moment < inf`.
pub fn g_criterion<F>(g_prime: F, d: usize, alpha: f64, p: f64, a: f64, moment: f64) -> Result<CriterionValue>
where
    F: Fn(f64) -> f64,
{
    if stable_regime(d, alpha)? != StableRegime::Transient {
        return Err(Error::domain("this criterion needs d > alpha"));
    }
    if !(moment.is_finite() && moment >= 0.0) {
        return Err(Error::domain("the moment int G(|V|) dm must be finite"));
    }
    if !(p >= 1.0) || !(a > 0.0) {
        return Err(Error::domain("need p >= 1 and a > 0"));
    }
    let e = 1.0 - d as f64 / (p * (d as f64 - alpha));
    let warning = if e >= 0.0 {
        Some(format!("exponent {e} is nonnegative; the criterion is vacuous"))
    } else {
        None
    };
    tail_value(|s| powf(g_prime(s), e), a, warning)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::PI;

    #[test]
    fn inverse_examples() {
        let f = DecreasingFn::new(|s| exp(-s), f64::INFINITY).unwrap();
        let g = right_continuous_inverse(&f);
        for t in [0.9, 0.5, 0.01] {
            assert!((g.eval(t) + ln(t)).abs() < 1e-12);
        }
        let step = StepFunction::new(alloc::vec![1.0, 3.0], alloc::vec![2.0, 1.0]).unwrap();
        assert_eq!(step.inverse_at(1.5), 1.0);
        assert_eq!(step.inverse_at(0.5), 3.0);
        let num = step.to_decreasing();
        assert!((num.inverse_at(1.5) - 1.0).abs() < 1e-12);
        assert!((num.inverse_at(0.5) - 3.0).abs() < 1e-12);
        let zero = DecreasingFn::new(|_| 0.0, f64::INFINITY).unwrap();
        assert_eq!(zero.inverse_at(0.3), 0.0);
        assert!(DecreasingFn::new(|s| s, 1.0).is_err());
    }

    #[test]
    fn radial_examples() {
        let one = Profile::Power { c: 1.0, gamma: 1.0 };
        assert!(radial_criterion(&one, 3, 2.0, 1.0, 1.0).unwrap().finite);
        let two = Profile::Power { c: 1.0, gamma: 2.0 };
        assert!(!radial_criterion(&two, 3, 2.0, 1.0, 1.0).unwrap().finite);
        let c = radial_criterion(&Profile::Constant { c: 1.0 }, 1, 1.0, 1.0, 0.3).unwrap();
        // int_0^R log(1/r) dr = R (1 + log(1/R)).
        let exact = 0.3 * (1.0 - ln(0.3));
        assert!(c.finite && (c.value - exact).abs() <= c.error && c.error < 1e-4 * exact, "{c:?}");
    }

    #[test]
    fn layer_cake_examples() {
        let m = DistributionFunction::closed(|t| 4.0 * PI / 3.0 * f64::min(1.0, powf(t, -3.0)));
        let r = layer_cake_criterion(&m, 3, 2.0, 1.0, 1.0).unwrap();
        // int_1^inf (4pi/3)^{2/3} t^{-2} dt.
        assert!(r.finite && (r.value - powf(4.0 * PI / 3.0, 2.0 / 3.0)).abs() < 1e-6);
        let radial = DistributionFunction::radial(&Profile::Power { c: 1.0, gamma: 1.0 }.truncated(1.0), 3).unwrap();
        assert!((radial.eval(2.0) - 4.0 * PI / 3.0 / 8.0).abs() < 1e-9);
        let bounded = DistributionFunction::closed(|t| if t < 2.0 { 1.0 } else { 0.0 });
        assert_eq!(layer_cake_criterion(&bounded, 3, 2.0, 1.0, 3.0).unwrap().value, 0.0);
    }

    #[test]
    fn g_examples() {
        let r = g_criterion(|s| 2.0 * s, 3, 2.0, 1.0, 1.0, 1.0).unwrap();
        assert!(r.finite && (r.value - 0.25).abs() < 1e-7);
        assert!(g_criterion(exp, 3, 2.0, 1.0, 1.0, 1.0).unwrap().finite);
        // k = 2 with exponent -2: (k-1) e = -2 < -1.
        let w = g_criterion(|_| 1.0, 3, 1.0, 3.0, 1.0, 1.0).unwrap();
        assert!(w.warning.is_some() && !w.finite);
    }

    #[test]
    fn pav_and_tables() {
        assert_eq!(isotonic_decreasing(&[3.0, 1.0, 2.0, 0.0]), alloc::vec![3.0, 1.5, 1.5, 0.0]);
        let d = DistributionFunction::tabulated(alloc::vec![1.0, 2.0, 4.0], alloc::vec![8.0, 1.0, 0.125]).unwrap();
        assert_eq!(d.eval(1.5), 8.0);
        assert!((d.eval(8.0) - 0.125 / 8.0).abs() < 1e-12);
        let mc = DistributionFunction::monte_carlo(
            |y: &[f64]| if y[0] * y[0] + y[1] * y[1] < 0.25 { 2.0 } else { 0.5 },
            &[0.0, 0.0],
            1.0,
            alloc::vec![1.0, 3.0],
            100_000,
            7,
        )
        .unwrap();
        assert!((mc.eval(1.0) - PI * 0.25).abs() < 0.02);
        assert_eq!(mc.eval(3.0), 0.0);
    }
}
