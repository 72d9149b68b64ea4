//! Membership functionals: Green-kernel (Kato) integrals, time-integrated
//! semigroup integrals and resolvent integrals, each maximized over a finite
//! set of centers.
//!
//! A maximum over finitely many centers is a lower bound for the supremum.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicBool, Ordering};

use crate::error::{Error, Result};
use crate::estimate::{Estimate, Quantity};
use crate::halton::ball_points;
use crate::kernel::{HeatKernelModel, Regime};
use crate::math::{ln, powf, E};
use crate::measures::{IntegrationOptions, Measure, RadialFn, TailPolicy};
use crate::parallel::map_indexed;

/// Green kernel of the space: `r^{beta-nu}`, `log(1/r)` or `1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenKernelSpec {
    pub nu: f64,
    pub beta: f64,
}

impl GreenKernelSpec {
    pub fn new(nu: f64, beta: f64) -> Result<Self> {
        if !(nu > 0.0 && beta > 0.0) {
            return Err(Error::validation("nu and beta must be positive"));
        }
        Ok(GreenKernelSpec { nu, beta })
    }

    pub fn of(model: &HeatKernelModel) -> Self {
        GreenKernelSpec { nu: model.nu(), beta: model.beta() }
    }

    pub fn regime(&self) -> Regime {
        Regime::of(self.nu, self.beta)
    }

    /// Largest admissible radius.
    pub fn max_radius(&self) -> f64 {
        match self.regime() {
            Regime::Critical => 1.0 / E,
            _ => f64::INFINITY,
        }
    }

    /// Blow-up exponent of `G^p` at 0.
    pub fn singularity(&self, p: f64) -> f64 {
        match self.regime() {
            Regime::Supercritical => p * (self.nu - self.beta),
            _ => 0.0,
        }
    }

    pub(crate) fn eval_unchecked(&self, r: f64) -> f64 {
        match self.regime() {
            Regime::Supercritical => powf(r, self.beta - self.nu),
            Regime::Critical => -ln(r),
            Regime::Subcritical => 1.0,
        }
    }
}

pub fn green_value(spec: &GreenKernelSpec, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain("r must be positive"));
    }
    if spec.regime() == Regime::Critical && r >= 1.0 / E {
        return Err(Error::domain("the logarithmic Green kernel needs r < 1/e"));
    }
    Ok(spec.eval_unchecked(r))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalEstimate {
    pub value: f64,
    pub stat_error: f64,
    pub quad_error: f64,
    pub n_centers: usize,
    pub argmax_center: Vec<f64>,
    pub diverged: bool,
}

impl FunctionalEstimate {
    pub fn total_error(&self) -> f64 {
        self.stat_error + self.quad_error
    }
}

/// Centers: a user grid, the measure's adapted points, and `quasi_random`
/// Halton points in a window (default: the support inflated by `2r`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CenterStrategy {
    pub grid: Vec<Vec<f64>>,
    pub adapted: bool,
    pub quasi_random: usize,
    pub window: Option<(Vec<f64>, f64)>,
}

impl CenterStrategy {
    pub fn adapted() -> Self {
        CenterStrategy { adapted: true, ..Default::default() }
    }

    pub fn points(points: Vec<Vec<f64>>) -> Self {
        CenterStrategy { grid: points, ..Default::default() }
    }

    pub fn with_quasi_random(mut self, n: usize) -> Self {
        self.quasi_random = n;
        self
    }

    pub fn with_window(mut self, center: Vec<f64>, radius: f64) -> Self {
        self.window = Some((center, radius));
        self
    }

    /// The finite center set for `mu` at scale `r`, in a fixed order.
    pub fn centers(&self, mu: &Measure, r: f64) -> Result<Vec<Vec<f64>>> {
        let dim = mu.dim();
        let mut out: Vec<Vec<f64>> = self.grid.clone();
        if self.adapted {
            out.extend(mu.adapted_centers());
        }
        if self.quasi_random > 0 {
            let (c, rad) = match &self.window {
                Some(w) => w.clone(),
                None => {
                    let (c, s) = mu.support();
                    let s = if s.is_finite() { s } else { 1.0 };
                    let r = if r.is_finite() { r } else { 1.0 };
                    (c, s + 2.0 * r)
                }
            };
            out.extend(ball_points(&c, rad.max(1e-12), self.quasi_random));
        }
        if let Some(bad) = out.iter().find(|p| p.len() != dim) {
            return Err(Error::Config(format!("center {bad:?} does not have {dim} coordinates")));
        }
        if out.is_empty() {
            return Err(Error::Config(String::from("the center set is empty")));
        }
        Ok(out)
    }
}

/// Maximum of `objective` over `centers`; the lowest index wins ties and a
/// divergent center dominates.
pub fn sup_over_centers<F>(centers: &[Vec<f64>], objective: F) -> Result<FunctionalEstimate>
where
    F: Fn(&[f64]) -> Result<Estimate> + Sync + Send,
{
    if centers.is_empty() {
        return Err(Error::Config(String::from("the center set is empty")));
    }
    let results = map_indexed(centers.len(), |i| objective(&centers[i]));
    let mut best: Option<(usize, Estimate)> = None;
    for (i, r) in results.into_iter().enumerate() {
        let e = r?;
        let better = match &best {
            None => true,
            Some((_, b)) => !b.diverged && (e.diverged || e.value > b.value),
        };
        if better {
            best = Some((i, e));
        }
    }
    let (i, e) = best.expect("nonempty");
    Ok(FunctionalEstimate {
        value: e.value,
        stat_error: e.stat_error,
        quad_error: e.quad_error,
        n_centers: centers.len(),
        argmax_center: centers[i].clone(),
        diverged: e.diverged,
    })
}

fn sup_over_centers_multi<F>(centers: &[Vec<f64>], n: usize, objective: F) -> Result<Vec<FunctionalEstimate>>
where
    F: Fn(&[f64]) -> Result<Vec<Estimate>> + Sync + Send,
{
    if centers.is_empty() {
        return Err(Error::Config(String::from("the center set is empty")));
    }
    let results = map_indexed(centers.len(), |i| objective(&centers[i]));
    let mut rows: Vec<Vec<Estimate>> = Vec::with_capacity(centers.len());
    for r in results {
        rows.push(r?);
    }
    Ok((0..n)
        .map(|k| {
            let mut bi = 0;
            for i in 1..rows.len() {
                let (b, e) = (&rows[bi][k], &rows[i][k]);
                if !b.diverged && (e.diverged || e.value > b.value) {
                    bi = i;
                }
            }
            let e = rows[bi][k];
            FunctionalEstimate {
                value: e.value,
                stat_error: e.stat_error,
                quad_error: e.quad_error,
                n_centers: centers.len(),
                argmax_center: centers[bi].clone(),
                diverged: e.diverged,
            }
        })
        .collect())
}

fn check_inputs(mu: &Measure, dim: usize, p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::domain("p must be a finite real >= 1"));
    }
    if mu.dim() != dim {
        return Err(Error::domain(format!("measure lives in dimension {}, model in {dim}", mu.dim())));
    }
    Ok(())
}

/// `sup_x int_{|x-y|<r} G(|x-y|)^p mu(dy)`.
pub fn kato_functional(
    mu: &Measure,
    spec: &GreenKernelSpec,
    p: f64,
    r: f64,
    centers: &CenterStrategy,
) -> Result<FunctionalEstimate> {
    Ok(kato_sweep(mu, spec, p, &[r], centers)?.remove(0))
}

/// `kato_functional` for several radii, sharing one center set (chosen for
/// the largest radius).
pub fn kato_sweep(
    mu: &Measure,
    spec: &GreenKernelSpec,
    p: f64,
    radii: &[f64],
    centers: &CenterStrategy,
) -> Result<Vec<FunctionalEstimate>> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::domain("p must be a finite real >= 1"));
    }
    if radii.is_empty() {
        return Ok(Vec::new());
    }
    for &r in radii {
        if !(r > 0.0) || r > spec.max_radius() {
            return Err(Error::domain(format!("ball radius {r} is outside the Green kernel domain")));
        }
    }
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let pts = centers.centers(mu, r_max)?;
    let g = |rho: f64| powf(spec.eval_unchecked(rho), p);
    let rf = RadialFn::new(&g).with_hint(spec.singularity(p));
    let opts = IntegrationOptions::default();
    sup_over_centers_multi(&pts, radii.len(), |x| mu.integrate_over_balls(x, radii, &rf, &opts))
}

/// Where a functional integrates: the whole space or balls around the center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    Global,
    Ball(f64),
}

impl Window {
    pub fn from_radius(r: Option<f64>) -> Window {
        r.map_or(Window::Global, Window::Ball)
    }
}

struct KernelPower<'a> {
    model: &'a HeatKernelModel,
    failed: AtomicBool,
    p: f64,
    resolvent: bool,
    param: f64,
}

impl KernelPower<'_> {
    fn eval(&self, rho: f64) -> f64 {
        let opts = self.model.quad.with_rel_tol(self.model.quad.rel_tol / self.p);
        let q = if self.resolvent {
            self.model.resolvent_at(self.param, rho, &opts)
        } else {
            self.model.time_integral_at(self.param, rho, &opts)
        };
        match q {
            Ok(Quantity { diverged: true, .. }) => f64::INFINITY,
            Ok(q) => powf(q.value, self.p),
            Err(_) => {
                self.failed.store(true, Ordering::Relaxed);
                f64::NAN
            }
        }
    }

    fn singularity(&self) -> f64 {
        match self.model.regime() {
            Regime::Supercritical => self.p * (self.model.nu() - self.model.beta()),
            _ => 0.0,
        }
    }

    fn scale(&self) -> f64 {
        let beta = self.model.beta();
        if self.resolvent {
            powf(self.param, -1.0 / beta)
        } else {
            powf(self.param, 1.0 / beta)
        }
    }

    fn integrate(&self, mu: &Measure, x: &[f64], window: Window) -> Result<Estimate> {
        let g = |rho: f64| self.eval(rho);
        let rf = RadialFn::new(&g).with_hint(self.singularity());
        let opts = IntegrationOptions::default();
        let out = match window {
            Window::Ball(r) => mu.integrate_over_ball(x, r, &rf, &opts),
            Window::Global => {
                let tail = TailPolicy { majorant: &g, start_radius: 4.0 * self.scale(), rel_tol: 1e-8 };
                mu.integrate_global(x, &rf, &tail, &opts)
            }
        };
        self.recover(out)
    }

    fn integrate_balls(&self, mu: &Measure, x: &[f64], radii: &[f64]) -> Result<Vec<Estimate>> {
        let g = |rho: f64| self.eval(rho);
        let rf = RadialFn::new(&g).with_hint(self.singularity());
        let out = mu.integrate_over_balls(x, radii, &rf, &IntegrationOptions::default());
        self.recover(out)
    }

    fn recover<T>(&self, out: Result<T>) -> Result<T> {
        if self.failed.load(Ordering::Relaxed) {
            // Recover the underlying error at a representative distance.
            let probe = if self.resolvent {
                self.model.resolvent_at(self.param, self.scale(), &self.model.quad)
            } else {
                self.model.time_integral_at(self.param, self.scale(), &self.model.quad)
            };
            probe?;
            return Err(Error::Accuracy { best: f64::NAN, error: f64::INFINITY });
        }
        out
    }
}

fn kernel_functional(
    mu: &Measure,
    model: &HeatKernelModel,
    p: f64,
    param: f64,
    resolvent: bool,
    centers: &CenterStrategy,
    window: Window,
) -> Result<FunctionalEstimate> {
    check_inputs(mu, model.dim(), p)?;
    let kp = KernelPower { model, failed: AtomicBool::new(false), p, resolvent, param };
    // Validate the parameter before fanning out.
    if resolvent {
        model.resolvent_at(param, 1.0, &model.quad)?;
    } else {
        model.time_integral_at(param, 1.0, &model.quad)?;
    }
    if let Window::Ball(r) = window {
        if !(r > 0.0) {
            return Err(Error::domain("localization radius must be positive"));
        }
    }
    let reach = match window {
        Window::Ball(r) => r,
        Window::Global => 2.0 * kp.scale(),
    };
    let pts = centers.centers(mu, reach)?;
    sup_over_centers(&pts, |x| {
        let local = KernelPower { model, failed: AtomicBool::new(false), p, resolvent, param };
        local.integrate(mu, x, window)
    })
}

/// `sup_x int (int_0^t p_s(x,y) ds)^p mu(dy)`, over the whole space or over
/// `B_r(x)`.
pub fn semigroup_functional(
    mu: &Measure,
    model: &HeatKernelModel,
    p: f64,
    t: f64,
    centers: &CenterStrategy,
    localized_radius: Option<f64>,
) -> Result<FunctionalEstimate> {
    kernel_functional(mu, model, p, t, false, centers, Window::from_radius(localized_radius))
}

/// `sup_x int r_alpha(x,y)^p mu(dy)`, over the whole space or over `B_r(x)`.
pub fn resolvent_functional(
    mu: &Measure,
    model: &HeatKernelModel,
    p: f64,
    alpha: f64,
    centers: &CenterStrategy,
    localized_radius: Option<f64>,
) -> Result<FunctionalEstimate> {
    kernel_functional(mu, model, p, alpha, true, centers, Window::from_radius(localized_radius))
}

fn kernel_local_sweep(
    mu: &Measure,
    model: &HeatKernelModel,
    p: f64,
    param: f64,
    resolvent: bool,
    radii: &[f64],
    centers: &CenterStrategy,
) -> Result<Vec<FunctionalEstimate>> {
    check_inputs(mu, model.dim(), p)?;
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::domain("localization radii must be positive"));
    }
    if resolvent {
        model.resolvent_at(param, 1.0, &model.quad)?;
    } else {
        model.time_integral_at(param, 1.0, &model.quad)?;
    }
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let pts = centers.centers(mu, r_max)?;
    sup_over_centers_multi(&pts, radii.len(), |x| {
        let local = KernelPower { model, failed: AtomicBool::new(false), p, resolvent, param };
        local.integrate_balls(mu, x, radii)
    })
}

/// Localized semigroup functional at fixed `t` for several ball radii.
pub fn semigroup_local_sweep(
    mu: &Measure,
    model: &HeatKernelModel,
    p: f64,
    t: f64,
    radii: &[f64],
    centers: &CenterStrategy,
) -> Result<Vec<FunctionalEstimate>> {
    kernel_local_sweep(mu, model, p, t, false, radii, centers)
}

/// Localized resolvent functional at fixed `alpha` for several ball radii.
pub fn resolvent_local_sweep(
    mu: &Measure,
    model: &HeatKernelModel,
    p: f64,
    alpha: f64,
    radii: &[f64],
    centers: &CenterStrategy,
) -> Result<Vec<FunctionalEstimate>> {
    kernel_local_sweep(mu, model, p, alpha, true, radii, centers)
}

/// `semigroup_functional` over a grid of times.
pub fn semigroup_sweep(
    mu: &Measure,
    model: &HeatKernelModel,
    p: f64,
    times: &[f64],
    centers: &CenterStrategy,
    localized_radius: Option<f64>,
) -> Result<Vec<FunctionalEstimate>> {
    times.iter().map(|&t| semigroup_functional(mu, model, p, t, centers, localized_radius)).collect()
}

/// `resolvent_functional` over a grid of `alpha`.
pub fn resolvent_sweep(
    mu: &Measure,
    model: &HeatKernelModel,
    p: f64,
    alphas: &[f64],
    centers: &CenterStrategy,
    localized_radius: Option<f64>,
) -> Result<Vec<FunctionalEstimate>> {
    alphas.iter().map(|&a| resolvent_functional(mu, model, p, a, centers, localized_radius)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{sqrt, PI};

    #[test]
    fn green_values() {
        assert!((green_value(&GreenKernelSpec::new(3.0, 2.0).unwrap(), 0.1).unwrap() - 10.0).abs() < 1e-12);
        let crit = GreenKernelSpec::new(2.0, 2.0).unwrap();
        assert!((green_value(&crit, libm::exp(-2.0)).unwrap() - 2.0).abs() < 1e-12);
        assert!(green_value(&crit, 0.5).is_err());
        assert_eq!(green_value(&GreenKernelSpec::new(1.0, 2.0).unwrap(), 7.0).unwrap(), 1.0);
    }

    #[test]
    fn kato_lebesgue_d3() {
        let mu = Measure::lebesgue(3);
        let spec = GreenKernelSpec::new(3.0, 2.0).unwrap();
        let c = CenterStrategy::points(alloc::vec![alloc::vec![0.0; 3], alloc::vec![1.0, 2.0, 3.0]]);
        let est = kato_sweep(&mu, &spec, 1.0, &[0.1, 0.5], &c).unwrap();
        for (e, r) in est.iter().zip([0.1, 0.5]) {
            assert!((e.value - 2.0 * PI * r * r).abs() < 1e-6 * r * r, "{e:?}");
        }
        assert!(kato_functional(&mu, &spec, 3.0, 0.1, &c).unwrap().diverged);
        let z = kato_functional(&Measure::zero(3), &spec, 2.0, 0.1, &c).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn semigroup_conservation_d1() {
        let mu = Measure::lebesgue(1);
        let model = HeatKernelModel::gaussian(1).unwrap();
        let c = CenterStrategy::points(alloc::vec![alloc::vec![0.3]]);
        for t in [0.01, 1.0] {
            let e = semigroup_functional(&mu, &model, 1.0, t, &c, None).unwrap();
            assert!((e.value - t).abs() < 1e-5 * t, "{t} {e:?}");
        }
    }

    #[test]
    fn resolvent_of_dirac_d1() {
        let mu = Measure::dirac(alloc::vec![0.0], 1.0).unwrap();
        let model = HeatKernelModel::gaussian(1).unwrap();
        let c = CenterStrategy::points(alloc::vec![alloc::vec![0.0]]);
        let e = resolvent_functional(&mu, &model, 1.0, 2.0, &c, None).unwrap();
        assert!((e.value - 1.0 / sqrt(4.0)).abs() < 1e-6, "{e:?}");
        let far = CenterStrategy::points(alloc::vec![alloc::vec![2.0]]);
        let e = resolvent_functional(&mu, &model, 1.0, 2.0, &far, Some(1.0)).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn dirac_d3_semigroup_diverges_at_atom() {
        let mu = Measure::dirac(alloc::vec![0.0; 3], 1.0).unwrap();
        let model = HeatKernelModel::gaussian(3).unwrap();
        let c = CenterStrategy::points(alloc::vec![alloc::vec![1.0, 0.0, 0.0]]).with_quasi_random(0);
        let c = CenterStrategy { adapted: true, ..c };
        let e = semigroup_functional(&mu, &model, 1.0, 0.5, &c, None).unwrap();
        assert!(e.diverged);
        assert_eq!(e.argmax_center, alloc::vec![0.0; 3]);
    }

    #[test]
    fn ties_keep_lowest_index() {
        let pts = alloc::vec![alloc::vec![0.0], alloc::vec![1.0], alloc::vec![2.0]];
        let e = sup_over_centers(&pts, |_| Ok(Estimate::exact(1.0))).unwrap();
        assert_eq!(e.argmax_center, alloc::vec![0.0]);
        assert!(sup_over_centers(&[], |_| Ok(Estimate::ZERO)).is_err());
    }
}
