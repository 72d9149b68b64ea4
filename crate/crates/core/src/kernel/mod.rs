//! Heat kernel families, their time integrals and resolvents, and the
//! two-sided bounds on `int_0^t p_s ds`.

mod bounds;
mod integrals;
pub mod invariants;
pub mod relativistic;

use alloc::format;
use alloc::sync::Arc;
use core::fmt;

pub use bounds::{LemmaConstants, TimeIntegralBounds};
pub use relativistic::{jump_constant, psi, relativistic_jump_density};

use crate::error::{Error, Result};
use crate::estimate::Quantity;
use crate::math::{euclidean, exp, ln, powf, unit_ball_volume, PI};
use crate::profile::Profile;
use crate::quadrature::QuadOptions;

/// Position of the volume exponent relative to the walk exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `nu < beta`: points are charged, the Green kernel is bounded.
    Subcritical,
    /// `nu = beta`: logarithmic Green kernel.
    Critical,
    /// `nu > beta`: power Green kernel `r^{beta - nu}`.
    Supercritical,
}

impl Regime {
    pub fn of(nu: f64, beta: f64) -> Regime {
        if (nu - beta).abs() <= 1e-12 * nu.max(beta) {
            Regime::Critical
        } else if nu < beta {
            Regime::Subcritical
        } else {
            Regime::Supercritical
        }
    }
}

#[derive(Clone)]
pub enum Metric {
    Euclidean,
    Custom(Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>),
}

#[derive(Clone)]
pub enum VolumeBound {
    /// `V(r) = c r^exponent`
    Power { c: f64, exponent: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

#[derive(Clone)]
pub struct SpaceModel {
    pub ambient_dim: usize,
    pub nu: f64,
    pub beta: f64,
    pub metric: Metric,
    pub volume: VolumeBound,
}

impl fmt::Debug for SpaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpaceModel")
            .field("ambient_dim", &self.ambient_dim)
            .field("nu", &self.nu)
            .field("beta", &self.beta)
            .finish_non_exhaustive()
    }
}

impl SpaceModel {
    /// Euclidean space with `V(r) = r^nu`.
    pub fn new(ambient_dim: usize, nu: f64, beta: f64) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::domain("ambient dimension must be positive"));
        }
        if !(nu > 0.0 && beta > 0.0) || !nu.is_finite() || !beta.is_finite() {
            return Err(Error::domain("nu and beta must be positive"));
        }
        Ok(SpaceModel {
            ambient_dim,
            nu,
            beta,
            metric: Metric::Euclidean,
            volume: VolumeBound::Power { c: 1.0, exponent: nu },
        })
    }

    /// R^d with Lebesgue measure.
    pub fn euclidean(d: usize, beta: f64) -> Result<Self> {
        let mut s = SpaceModel::new(d, d as f64, beta)?;
        s.volume = VolumeBound::Power { c: unit_ball_volume(d), exponent: d as f64 };
        Ok(s)
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn with_volume(mut self, volume: VolumeBound) -> Self {
        self.volume = volume;
        self
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.metric {
            Metric::Euclidean => euclidean(x, y),
            Metric::Custom(d) => d(x, y),
        }
    }

    pub fn volume(&self, r: f64) -> f64 {
        match &self.volume {
            VolumeBound::Power { c, exponent } => c * powf(r, *exponent),
            VolumeBound::Custom(v) => v(r),
        }
    }

    pub fn regime(&self) -> Regime {
        Regime::of(self.nu, self.beta)
    }
}

/// Constants of the stretched-exponential estimate
/// `C3 t^{-d_f/d_w} exp(-C1 u^g) <= p_t <= C4 t^{-d_f/d_w} exp(-C2 u^g)`,
/// `u = d/t^{1/d_w}`, `g = d_w/(d_J - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StretchedParams {
    pub d_f: f64,
    pub d_w: f64,
    pub d_j: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl StretchedParams {
    pub fn exponent(&self) -> f64 {
        self.d_w / (self.d_j - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    Gaussian,
    StableEstimate { alpha: f64 },
    Relativistic { alpha: f64, mass: f64 },
    StretchedExponential(StretchedParams),
    Custom,
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::StableEstimate { .. } => "stable",
            KernelFamily::Relativistic { .. } => "relativistic",
            KernelFamily::StretchedExponential(_) => "stretched",
            KernelFamily::Custom => "custom",
        }
    }
}

#[derive(Clone)]
pub struct HeatKernelModel {
    pub space: SpaceModel,
    pub t0: f64,
    pub family: KernelFamily,
    pub phi_lower: Profile,
    pub phi_upper: Profile,
    /// Evaluator profile for the estimate-only families.
    profile: Profile,
    jump: f64,
    /// Life-time constant of the process; documentation only.
    pub lifetime_gamma: f64,
    pub quad: QuadOptions,
    lemma: LemmaConstants,
}

impl fmt::Debug for HeatKernelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HeatKernelModel")
            .field("family", &self.family)
            .field("space", &self.space)
            .field("t0", &self.t0)
            .field("lemma", &self.lemma)
            .finish_non_exhaustive()
    }
}

impl HeatKernelModel {
    /// Brownian motion on R^d with generator Delta/2.
    pub fn gaussian(d: usize) -> Result<Self> {
        let space = SpaceModel::euclidean(d, 2.0)?;
        let phi = Profile::Exponential { c: powf(2.0 * PI, -(d as f64) / 2.0), rate: 0.5, shape: 2.0 };
        Ok(Self::assemble(space, f64::INFINITY, KernelFamily::Gaussian, phi.clone(), phi.clone(), phi, 0.0))
    }

    /// Symmetric alpha-stable process, evaluated through the estimate
    /// midpoint `t^{-d/alpha} ^ t A |x-y|^{-d-alpha}`.
    pub fn stable(d: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::domain("stable index alpha must lie in ]0,2["));
        }
        let space = SpaceModel::euclidean(d, alpha)?;
        let a = jump_constant(d, alpha);
        let phi = Profile::CappedPower { cap: 1.0, a, k: d as f64 + alpha };
        Ok(Self::assemble(space, f64::INFINITY, KernelFamily::StableEstimate { alpha }, phi.clone(), phi.clone(), phi, a))
    }

    /// Relativistic alpha-stable process with mass `m`; small-time estimate
    /// up to `t0 = 1/m`, Gaussian-type global form beyond.
    pub fn relativistic(d: usize, alpha: f64, mass: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::domain("stable index alpha must lie in ]0,2["));
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::domain("relativistic mass must be positive"));
        }
        let space = SpaceModel::euclidean(d, alpha)?;
        let a = jump_constant(d, alpha);
        let k = d as f64 + alpha;
        let upper = Profile::CappedPower { cap: 1.0, a, k };
        let lower = Profile::custom(move |u| {
            if u == 0.0 {
                return 1.0;
            }
            let p = psi(d, alpha, u).unwrap_or(0.0);
            (a * p * powf(u, -k)).min(1.0)
        });
        let family = KernelFamily::Relativistic { alpha, mass };
        Ok(Self::assemble(space, 1.0 / mass, family, lower, upper.clone(), upper, a))
    }

    /// Stretched-exponential estimate on a space with `V(r) = r^{d_f}`.
    pub fn stretched_exponential(ambient_dim: usize, params: StretchedParams, t0: f64) -> Result<Self> {
        let StretchedParams { d_f, d_w, d_j, c1, c2, c3, c4 } = params;
        if [c1, c2, c3, c4].iter().any(|c| !(*c > 0.0)) {
            return Err(Error::domain("stretched-exponential constants must be positive"));
        }
        if !(d_j > 1.0) {
            return Err(Error::domain("d_J must exceed 1"));
        }
        if !(t0 > 0.0) {
            return Err(Error::domain("t0 must be positive"));
        }
        let space = SpaceModel::new(ambient_dim, d_f, d_w)?;
        let g = params.exponent();
        let lower = Profile::Exponential { c: c3, rate: c1, shape: g };
        let upper = Profile::Exponential { c: c4, rate: c2, shape: g };
        let mid = Profile::Exponential { c: libm::sqrt(c3 * c4), rate: 0.5 * (c1 + c2), shape: g };
        Ok(Self::assemble(space, t0, KernelFamily::StretchedExponential(params), lower, upper, mid, 0.0))
    }

    /// Scaling kernel `p_t = t^{-nu/beta} Phi(d/t^{1/beta})` with a user profile.
    pub fn custom(space: SpaceModel, t0: f64, profile: Profile, phi_lower: Profile, phi_upper: Profile) -> Result<Self> {
        if !(t0 > 0.0) {
            return Err(Error::domain("t0 must be positive"));
        }
        Ok(Self::assemble(space, t0, KernelFamily::Custom, phi_lower, phi_upper, profile, 0.0))
    }

    fn assemble(
        space: SpaceModel,
        t0: f64,
        family: KernelFamily,
        phi_lower: Profile,
        phi_upper: Profile,
        profile: Profile,
        jump: f64,
    ) -> Self {
        let mut model = HeatKernelModel {
            space,
            t0,
            family,
            phi_lower,
            phi_upper,
            profile,
            jump,
            lifetime_gamma: 0.0,
            quad: QuadOptions::default(),
            lemma: LemmaConstants::UNFITTED,
        };
        model.lemma = bounds::fit(&model);
        model
    }

    pub fn with_quadrature(mut self, quad: QuadOptions) -> Self {
        self.quad = quad;
        self
    }

    pub fn nu(&self) -> f64 {
        self.space.nu
    }

    pub fn beta(&self) -> f64 {
        self.space.beta
    }

    pub fn dim(&self) -> usize {
        self.space.ambient_dim
    }

    pub fn regime(&self) -> Regime {
        self.space.regime()
    }

    pub fn lemma_constants(&self) -> LemmaConstants {
        self.lemma
    }

    /// Families whose evaluator is only an estimate valid for `t < t0`.
    pub fn is_estimate_only(&self) -> bool {
        matches!(self.family, KernelFamily::StretchedExponential(_) | KernelFamily::Custom)
    }

    /// Largest time at which the evaluator may be used.
    pub fn time_horizon(&self) -> f64 {
        if self.is_estimate_only() {
            self.t0
        } else {
            f64::INFINITY
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t > 0.0) {
            return Err(Error::domain("time must be positive"));
        }
        if self.is_estimate_only() && t >= self.t0 {
            return Err(Error::domain(format!("t = {t} is not below t0 = {}", self.t0)));
        }
        Ok(())
    }

    /// `p_t` as a function of the distance, without precondition checks.
    pub fn density(&self, t: f64, rho: f64) -> f64 {
        let d = self.space.ambient_dim as f64;
        match &self.family {
            KernelFamily::Gaussian => exp(-d / 2.0 * ln(2.0 * PI * t) - rho * rho / (2.0 * t)),
            KernelFamily::StableEstimate { alpha } => {
                let diag = powf(t, -d / alpha);
                if rho == 0.0 {
                    diag
                } else {
                    diag.min(t * self.jump * powf(rho, -(d + alpha)))
                }
            }
            KernelFamily::Relativistic { alpha, mass } => {
                if t * mass <= 1.0 {
                    let diag = powf(t, -d / alpha);
                    if rho == 0.0 {
                        return diag;
                    }
                    let p = psi(self.space.ambient_dim, *alpha, powf(*mass, 1.0 / alpha) * rho).unwrap_or(0.0);
                    diag.min(t * self.jump * p * powf(rho, -(d + alpha)))
                } else {
                    let a = powf(*mass, 1.0 / alpha) * rho;
                    let b = powf(*mass, 2.0 / alpha - 1.0) * rho * rho / t;
                    powf(*mass, d / alpha - d / 2.0) * powf(t, -d / 2.0) * exp(-a.min(b))
                }
            }
            KernelFamily::StretchedExponential(_) | KernelFamily::Custom => self.scaling_form(&self.profile, t, rho),
        }
    }

    fn scaling_form(&self, phi: &Profile, t: f64, rho: f64) -> f64 {
        let (nu, beta) = (self.space.nu, self.space.beta);
        let f = phi.eval(rho / powf(t, 1.0 / beta));
        if f == 0.0 {
            0.0
        } else {
            exp(ln(f) - nu / beta * ln(t))
        }
    }

    /// `t^{-nu/beta} Phi_1(d/t^{1/beta})`
    pub fn envelope_lower(&self, t: f64, rho: f64) -> f64 {
        self.scaling_form(&self.phi_lower, t, rho)
    }

    /// `t^{-nu/beta} Phi_2(d/t^{1/beta})`
    pub fn envelope_upper(&self, t: f64, rho: f64) -> f64 {
        self.scaling_form(&self.phi_upper, t, rho)
    }

    /// `p_t(x, y)`.
    pub fn eval(&self, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_time(t)?;
        self.check_points(x, y)?;
        let v = self.density(t, self.space.distance(x, y));
        if !v.is_finite() {
            return Err(Error::Overflow("heat kernel"));
        }
        Ok(v)
    }

    fn check_points(&self, x: &[f64], y: &[f64]) -> Result<()> {
        let n = self.space.ambient_dim;
        if x.len() != n || y.len() != n {
            return Err(Error::domain(format!("points must have {n} coordinates")));
        }
        Ok(())
    }

    /// `int_0^t p_s(x, y) ds`.
    pub fn time_integral(&self, t: f64, x: &[f64], y: &[f64]) -> Result<Quantity> {
        self.check_points(x, y)?;
        self.time_integral_at(t, self.space.distance(x, y), &self.quad)
    }

    /// `int_0^t p_s ds` at distance `rho`.
    pub fn time_integral_at(&self, t: f64, rho: f64, opts: &QuadOptions) -> Result<Quantity> {
        self.check_time(t)?;
        integrals::time_integral(&|s, r| self.density(s, r), self.nu(), self.beta(), t, rho, 0.0, opts)
    }

    /// `int_0^t s^{-nu/beta} Phi_2(rho/s^{1/beta}) ds`, a majorant of the
    /// time integral for `t <= t0`.
    pub fn envelope_time_integral(&self, t: f64, rho: f64, opts: &QuadOptions) -> Result<Quantity> {
        if !(t > 0.0) {
            return Err(Error::domain("time must be positive"));
        }
        integrals::time_integral(&|s, r| self.envelope_upper(s, r), self.nu(), self.beta(), t, rho, 0.0, opts)
    }

    /// `r_alpha(x, y)`.
    pub fn resolvent(&self, alpha: f64, x: &[f64], y: &[f64]) -> Result<Quantity> {
        self.check_points(x, y)?;
        self.resolvent_at(alpha, self.space.distance(x, y), &self.quad)
    }

    /// `r_alpha` at distance `rho`.
    pub fn resolvent_at(&self, alpha: f64, rho: f64, opts: &QuadOptions) -> Result<Quantity> {
        if !(alpha > 0.0) {
            return Err(Error::domain("alpha must be positive"));
        }
        if self.time_horizon().is_finite() {
            return Err(Error::domain("resolvent needs the kernel at all times; this family is an estimate below t0 only"));
        }
        integrals::resolvent(&|s, r| self.density(s, r), self.nu(), self.beta(), alpha, rho, opts)
    }

    /// Lemma-type two-sided bounds on `int_0^t p_s ds` at distance `rho`.
    pub fn time_integrated_bounds(&self, t: f64, rho: f64) -> Result<TimeIntegralBounds> {
        bounds::evaluate(self, t, rho)
    }
}
