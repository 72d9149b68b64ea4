//! Positive measures in computable form and integration of radial
//! functions of `|x - y|` against them, over balls and globally.
//!
//! Every representation is reduced to a one-dimensional law of the distance
//! `rho = |x - y|` seen from the center `x`: atoms, a density in `rho`, or,
//! for general densities, batched directional averages.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::estimate::Estimate;
use crate::math::{abs, euclidean, powf, sqrt, sphere_area, unit_ball_volume, PI};
use crate::profile::Profile;
use crate::quadrature::{
    integrate, integrate_pieces_vec, nested_balls_vec, QuadOptions, SweepParams, SweepResult,
};

/// Number of direction batches used for general densities.
pub const BATCHES: usize = 8;
const K_DIR: usize = BATCHES + 1;

/// A nonnegative function of the distance to the center, with an optional
/// blow-up exponent at 0 (`g(rho) ~ rho^{-h}`). `+inf` is the divergence
/// sentinel.
#[derive(Clone, Copy)]
pub struct RadialFn<'a> {
    pub g: &'a (dyn Fn(f64) -> f64 + Sync),
    pub singularity: Option<f64>,
}

impl<'a> RadialFn<'a> {
    pub fn new(g: &'a (dyn Fn(f64) -> f64 + Sync)) -> Self {
        RadialFn { g, singularity: None }
    }

    pub fn with_hint(mut self, h: f64) -> Self {
        self.singularity = Some(h);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub quad: QuadOptions,
    pub sweep: SweepParams,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions { quad: QuadOptions::default(), sweep: SweepParams::default() }
    }
}

/// Tail control for whole-space integrals.
#[derive(Clone, Copy)]
pub struct TailPolicy<'a> {
    /// Decreasing function dominating `g` beyond `start_radius`.
    pub majorant: &'a (dyn Fn(f64) -> f64 + Sync),
    pub start_radius: f64,
    pub rel_tol: f64,
}

#[derive(Clone)]
pub struct DensityMeasure {
    pub dim: usize,
    f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub support_center: Vec<f64>,
    pub support_radius: f64,
    /// Upper bound of the density, needed for global integrals when the
    /// support is unbounded.
    pub sup_bound: Option<f64>,
    directions: Arc<Vec<Vec<f64>>>,
}

impl DensityMeasure {
    pub fn new<F>(dim: usize, f: F, support_center: Vec<f64>, support_radius: f64) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if support_center.len() != dim || dim == 0 {
            return Err(Error::validation("support center must match the dimension"));
        }
        if !(support_radius > 0.0) {
            return Err(Error::validation("support radius must be positive"));
        }
        Ok(DensityMeasure {
            dim,
            f: Arc::new(f),
            support_center,
            support_radius,
            sup_bound: None,
            directions: Arc::new(directions(dim, 16, 0x6b61_746f)),
        })
    }

    pub fn with_sup_bound(mut self, bound: f64) -> Self {
        self.sup_bound = Some(bound);
        self
    }

    /// Re-draws the direction set: `per_batch` directions in each of the
    /// `BATCHES` batches, from the given seed.
    pub fn with_directions(mut self, per_batch: usize, seed: u64) -> Self {
        self.directions = Arc::new(directions(self.dim, per_batch.max(2), seed));
        self
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        (self.f)(y)
    }
}

/// Antithetic pairs of unit vectors, `BATCHES * per_batch` in total.
fn directions(dim: usize, per_batch: usize, seed: u64) -> Vec<Vec<f64>> {
    let per_batch = per_batch + per_batch % 2;
    let mut out = Vec::with_capacity(BATCHES * per_batch);
    if dim == 1 {
        for _ in 0..BATCHES {
            out.push(alloc::vec![1.0]);
            out.push(alloc::vec![-1.0]);
        }
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..BATCHES * per_batch / 2 {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = sqrt(v.iter().map(|c| c * c).sum());
        let u: Vec<f64> = v.iter().map(|c| c / n).collect();
        out.push(u.iter().map(|c| -c).collect());
        out.push(u);
    }
    out
}

#[derive(Debug, Clone)]
pub struct RadialDensity {
    pub dim: usize,
    pub profile: Profile,
    pub origin: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointMasses {
    pub dim: usize,
    pub atoms: Vec<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereSurface {
    pub dim: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    pub total_mass: f64,
}

/// A measure known only through `C1 r^eta <= mu(B_r(x)) <= C2 r^eta`,
/// `r <= r0`, uniformly in `x`; ball masses use `sqrt(C1 C2) r^eta`.
#[derive(Debug, Clone, PartialEq)]
pub struct AhlforsAbstract {
    pub dim: usize,
    pub eta: f64,
    pub c_lower: f64,
    pub c_upper: f64,
    pub r0: f64,
}

impl AhlforsAbstract {
    pub fn constant(&self) -> f64 {
        sqrt(self.c_lower * self.c_upper)
    }
}

#[derive(Clone)]
pub enum Measure {
    Density(DensityMeasure),
    Radial(RadialDensity),
    Atoms(PointMasses),
    Sphere(SphereSurface),
    Ahlfors(AhlforsAbstract),
}

impl fmt::Debug for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Density(d) => write!(f, "Density(dim={}, support_radius={})", d.dim, d.support_radius),
            Measure::Radial(r) => write!(f, "{r:?}"),
            Measure::Atoms(a) => write!(f, "{a:?}"),
            Measure::Sphere(s) => write!(f, "{s:?}"),
            Measure::Ahlfors(a) => write!(f, "{a:?}"),
        }
    }
}

/// Law of the distance to a fixed center.
enum View<'m> {
    Atoms(Vec<(f64, f64)>),
    Continuous(Weight<'m>),
    Directional { density: &'m DensityMeasure, x: Vec<f64> },
}

struct Weight<'m> {
    w: alloc::boxed::Box<dyn Fn(f64) -> f64 + Sync + 'm>,
    lo: f64,
    hi: f64,
    breaks: Vec<f64>,
    /// Radius beyond which the representation is undefined.
    limit: f64,
}

impl Measure {
    pub fn lebesgue(dim: usize) -> Measure {
        Measure::Radial(RadialDensity { dim, profile: Profile::Constant { c: 1.0 }, origin: alloc::vec![0.0; dim] })
    }

    pub fn zero(dim: usize) -> Measure {
        Measure::Atoms(PointMasses { dim, atoms: Vec::new() })
    }

    pub fn dirac(point: Vec<f64>, weight: f64) -> Result<Measure> {
        Measure::atoms(point.len(), alloc::vec![(point, weight)])
    }

    pub fn atoms(dim: usize, atoms: Vec<(Vec<f64>, f64)>) -> Result<Measure> {
        for (p, w) in &atoms {
            if p.len() != dim {
                return Err(Error::validation("atom dimension mismatch"));
            }
            if !(*w >= 0.0) || !w.is_finite() {
                return Err(Error::validation("atom weights must be finite and nonnegative"));
            }
        }
        Ok(Measure::Atoms(PointMasses { dim, atoms }))
    }

    pub fn radial(dim: usize, profile: Profile, origin: Vec<f64>) -> Result<Measure> {
        if origin.len() != dim || dim == 0 {
            return Err(Error::validation("origin must match the dimension"));
        }
        Ok(Measure::Radial(RadialDensity { dim, profile, origin }))
    }

    pub fn sphere(center: Vec<f64>, radius: f64, total_mass: f64) -> Result<Measure> {
        if !(radius > 0.0) || !(total_mass >= 0.0) || center.is_empty() {
            return Err(Error::validation("sphere needs a positive radius and nonnegative mass"));
        }
        Ok(Measure::Sphere(SphereSurface { dim: center.len(), center, radius, total_mass }))
    }

    pub fn ahlfors(dim: usize, eta: f64, c_lower: f64, c_upper: f64, r0: f64) -> Result<Measure> {
        if !(eta > 0.0 && c_lower > 0.0 && c_lower <= c_upper && r0 > 0.0) {
            return Err(Error::validation("need eta > 0, 0 < C1 <= C2 and r0 > 0"));
        }
        Ok(Measure::Ahlfors(AhlforsAbstract { dim, eta, c_lower, c_upper, r0 }))
    }

    pub fn dim(&self) -> usize {
        match self {
            Measure::Density(d) => d.dim,
            Measure::Radial(r) => r.dim,
            Measure::Atoms(a) => a.dim,
            Measure::Sphere(s) => s.dim,
            Measure::Ahlfors(a) => a.dim,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Measure::Atoms(a) => a.atoms.iter().all(|(_, w)| *w == 0.0),
            Measure::Sphere(s) => s.total_mass == 0.0,
            _ => false,
        }
    }

    /// Exponent `eta` of the local ball-mass growth `mu(B_r(x)) ~ r^eta`
    /// near the worst center, when it is known from the representation.
    pub fn ahlfors_exponent(&self) -> Option<f64> {
        match self {
            Measure::Atoms(a) if !a.atoms.is_empty() && !self.is_zero() => Some(0.0),
            Measure::Sphere(s) if s.total_mass > 0.0 => Some(s.dim as f64 - 1.0),
            Measure::Ahlfors(a) => Some(a.eta),
            Measure::Radial(r) => match &r.profile {
                Profile::Constant { c } | Profile::Power { c, .. } if *c == 0.0 => None,
                Profile::Constant { .. } | Profile::Exponential { .. } | Profile::Tabulated { .. } => Some(r.dim as f64),
                Profile::Power { gamma, .. } => Some(r.dim as f64 - gamma.max(0.0)),
                Profile::Truncated { inner, .. } => match inner.as_ref() {
                    Profile::Constant { .. } => Some(r.dim as f64),
                    Profile::Power { gamma, .. } => Some(r.dim as f64 - gamma.max(0.0)),
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        }
    }

    /// Points where the measure concentrates: atoms, sphere poles, origins.
    pub fn adapted_centers(&self) -> Vec<Vec<f64>> {
        match self {
            Measure::Atoms(a) => {
                let pts: Vec<Vec<f64>> = a.atoms.iter().filter(|(_, w)| *w > 0.0).map(|(p, _)| p.clone()).collect();
                if pts.is_empty() {
                    alloc::vec![alloc::vec![0.0; a.dim]]
                } else {
                    pts
                }
            }
            Measure::Sphere(s) => {
                let mut out = Vec::new();
                for i in 0..s.dim {
                    for sign in [1.0, -1.0] {
                        let mut p = s.center.clone();
                        p[i] += sign * s.radius;
                        out.push(p);
                    }
                }
                out
            }
            Measure::Radial(r) => alloc::vec![r.origin.clone()],
            Measure::Density(d) => alloc::vec![d.support_center.clone()],
            Measure::Ahlfors(a) => alloc::vec![alloc::vec![0.0; a.dim]],
        }
    }

    /// A ball containing the support (radius may be infinite).
    pub fn support(&self) -> (Vec<f64>, f64) {
        match self {
            Measure::Atoms(a) => {
                let pts: Vec<&Vec<f64>> = a.atoms.iter().filter(|(_, w)| *w > 0.0).map(|(p, _)| p).collect();
                if pts.is_empty() {
                    return (alloc::vec![0.0; a.dim], 0.0);
                }
                let mut c = alloc::vec![0.0; a.dim];
                for p in &pts {
                    for (ci, pi) in c.iter_mut().zip(p.iter()) {
                        *ci += pi / pts.len() as f64;
                    }
                }
                let r = pts.iter().map(|p| euclidean(p, &c)).fold(0.0, f64::max);
                (c, r)
            }
            Measure::Sphere(s) => (s.center.clone(), s.radius),
            Measure::Radial(r) => (r.origin.clone(), r.profile.support_radius()),
            Measure::Density(d) => (d.support_center.clone(), d.support_radius),
            Measure::Ahlfors(a) => (alloc::vec![0.0; a.dim], f64::INFINITY),
        }
    }

    /// The measure `|f|^q m` for density representations.
    pub fn powered(&self, q: f64) -> Result<Measure> {
        match self {
            Measure::Radial(r) => Ok(Measure::Radial(RadialDensity { profile: r.profile.pow(q), ..r.clone() })),
            Measure::Density(d) => {
                let f = d.f.clone();
                let mut out = d.clone();
                out.f = Arc::new(move |y: &[f64]| powf(abs(f(y)), q));
                out.sup_bound = d.sup_bound.map(|b| powf(b, q));
                Ok(Measure::Density(out))
            }
            _ => Err(Error::Unsupported(String::from("only density measures have L^q norms"))),
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::domain(format!("center must have {} coordinates", self.dim())));
        }
        Ok(())
    }

    fn view(&self, x: &[f64]) -> Result<View<'_>> {
        self.check_point(x)?;
        Ok(match self {
            Measure::Atoms(a) => View::Atoms(
                a.atoms.iter().filter(|(_, w)| *w > 0.0).map(|(p, w)| (euclidean(p, x), *w)).collect(),
            ),
            Measure::Ahlfors(a) => {
                let (c, eta) = (a.constant(), a.eta);
                View::Continuous(Weight {
                    w: alloc::boxed::Box::new(move |rho: f64| c * eta * powf(rho, eta - 1.0)),
                    lo: 0.0,
                    hi: f64::INFINITY,
                    breaks: Vec::new(),
                    limit: a.r0,
                })
            }
            Measure::Sphere(s) => sphere_view(s, x),
            Measure::Radial(r) => radial_view(r, x),
            Measure::Density(d) => View::Directional { density: d, x: x.to_vec() },
        })
    }

    /// `mu(B_r(x))` (open ball).
    pub fn ball_mass(&self, x: &[f64], r: f64) -> Result<Estimate> {
        if !(r > 0.0) {
            return Err(Error::domain("radius must be positive"));
        }
        self.check_point(x)?;
        match self {
            Measure::Ahlfors(a) => Ok(Estimate::exact(a.constant() * powf(r, a.eta))),
            Measure::Radial(rd) if euclidean(x, &rd.origin) == 0.0 => {
                if let Profile::Constant { c } = rd.profile {
                    return Ok(Estimate::exact(c * unit_ball_volume(rd.dim) * powf(r, rd.dim as f64)));
                }
                self.integrate_over_ball(x, r, &RadialFn::new(&|_| 1.0), &IntegrationOptions::default())
            }
            _ => self.integrate_over_ball(x, r, &RadialFn::new(&|_| 1.0), &IntegrationOptions::default()),
        }
    }

    /// `int_{|x-y| < r} g(|x-y|) mu(dy)`.
    pub fn integrate_over_ball(&self, x: &[f64], r: f64, g: &RadialFn<'_>, opts: &IntegrationOptions) -> Result<Estimate> {
        Ok(self.integrate_over_balls(x, &[r], g, opts)?.remove(0))
    }

    /// Ball integrals for several radii at once (radii in any order).
    pub fn integrate_over_balls(
        &self,
        x: &[f64],
        radii: &[f64],
        g: &RadialFn<'_>,
        opts: &IntegrationOptions,
    ) -> Result<Vec<Estimate>> {
        if radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::domain("radii must be positive"));
        }
        let mut order: Vec<usize> = (0..radii.len()).collect();
        order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
        let sorted: Vec<f64> = order.iter().map(|&i| radii[i]).collect();
        let values = match self.view(x)? {
            View::Atoms(atoms) => atoms_balls(&atoms, &sorted, g),
            View::Continuous(w) => {
                if let Some(&r_max) = sorted.last() {
                    if r_max > w.limit {
                        return Err(Error::Unsupported(format!(
                            "ball integrals need r <= {} for this representation",
                            w.limit
                        )));
                    }
                }
                continuous_balls(&w, &sorted, g, opts)?
            }
            View::Directional { density, x } => directional_balls(density, &x, &sorted, g, opts)?,
        };
        let mut out = alloc::vec![Estimate::ZERO; radii.len()];
        for (k, &i) in order.iter().enumerate() {
            out[i] = values[k];
        }
        Ok(out)
    }

    /// Upper bound for `sup_x mu(B_rho(x))`, used to bound tails.
    fn ball_mass_bound(&self) -> Result<alloc::boxed::Box<dyn Fn(f64) -> f64 + Sync + '_>> {
        match self {
            Measure::Radial(r) => {
                let d = r.dim;
                let omega = unit_ball_volume(d);
                if let Profile::Constant { c } = r.profile {
                    return Ok(alloc::boxed::Box::new(move |rho| c * omega * powf(rho, d as f64)));
                }
                if r.profile.is_decreasing_on(1e-6, 1e6, 400) {
                    // Rearrangement: the centered ball carries the most mass.
                    let m1 = self.ball_mass(&r.origin, 1.0)?.value;
                    let f1 = r.profile.eval(1.0);
                    Ok(alloc::boxed::Box::new(move |rho| m1 + f1 * omega * powf(rho, d as f64)))
                } else {
                    let sup = (0..400)
                        .map(|i| r.profile.eval(powf(10.0, -6.0 + 12.0 * i as f64 / 399.0)))
                        .fold(0.0, f64::max);
                    Ok(alloc::boxed::Box::new(move |rho| sup * omega * powf(rho, d as f64)))
                }
            }
            Measure::Density(dm) => {
                let Some(b) = dm.sup_bound else {
                    return Err(Error::Unsupported(String::from(
                        "global integrals of an unbounded-support density need a sup bound",
                    )));
                };
                let omega = unit_ball_volume(dm.dim);
                let d = dm.dim as f64;
                Ok(alloc::boxed::Box::new(move |rho| b * omega * powf(rho, d)))
            }
            _ => Err(Error::Unsupported(String::from("no ball-mass growth bound"))),
        }
    }

    /// `int g(|x-y|) mu(dy)` over the whole space.
    pub fn integrate_global(&self, x: &[f64], g: &RadialFn<'_>, tail: &TailPolicy<'_>, opts: &IntegrationOptions) -> Result<Estimate> {
        self.check_point(x)?;
        if let Measure::Ahlfors(_) = self {
            return Err(Error::Unsupported(String::from(
                "the Ahlfors representation only carries ball masses up to r0",
            )));
        }
        if let Measure::Atoms(_) = self {
            return Ok(self.integrate_over_balls(x, &[f64::INFINITY.min(f64::MAX)], g, opts)?.remove(0));
        }
        let (c, radius) = self.support();
        if radius.is_finite() {
            let reach = euclidean(x, &c) + radius;
            let reach = reach * (1.0 + 1e-12) + 1e-300;
            // The inner radius anchors the cutoff sweep at the kernel scale.
            let radii = if tail.start_radius < reach { alloc::vec![tail.start_radius, reach] } else { alloc::vec![reach] };
            return Ok(self.integrate_over_balls(x, &radii, g, opts)?.pop().unwrap_or(Estimate::ZERO));
        }
        let bound = self.ball_mass_bound()?;
        let mut r = tail.start_radius;
        let mut est = self.integrate_over_balls(x, &[r], g, opts)?.remove(0);
        if est.diverged {
            return Ok(est);
        }
        for _ in 0..64 {
            let tb = majorant_tail(tail.majorant, &bound, r);
            match tb {
                Some(b) if b <= tail.rel_tol * est.value || b <= 1e-300 => {
                    est.quad_error += b;
                    return Ok(est);
                }
                _ => {}
            }
            let shell = self.shell_integral(x, r, 2.0 * r, g, opts)?;
            est = est.add(shell);
            if est.diverged {
                return Ok(est);
            }
            r *= 2.0;
        }
        match majorant_tail(tail.majorant, &bound, r) {
            Some(b) => {
                est.quad_error += b;
                Ok(est)
            }
            None => Ok(Estimate::divergent()),
        }
    }

    fn shell_integral(&self, x: &[f64], a: f64, b: f64, g: &RadialFn<'_>, opts: &IntegrationOptions) -> Result<Estimate> {
        match self.view(x)? {
            View::Continuous(w) => {
                let f = |rho: f64| [weighted(g, &w, rho)];
                let q = integrate_pieces_vec(&f, a, b, &w.breaks, &opts.quad);
                if !q.finite {
                    return Ok(Estimate::divergent());
                }
                Ok(Estimate { value: q.value[0], stat_error: 0.0, quad_error: q.abs_error, diverged: false })
            }
            View::Directional { density, x } => {
                let f = |rho: f64| dir_integrand(density, &x, g, rho);
                let q = integrate_pieces_vec(&f, a, b, &[], &opts.quad);
                if !q.finite {
                    return Ok(Estimate::divergent());
                }
                let mut e = batch_estimate(&q.value);
                e.quad_error = q.abs_error;
                Ok(e)
            }
            View::Atoms(_) => Ok(Estimate::ZERO),
        }
    }
}

/// `sum_k M(R 2^k) U(R 2^{k+1})`, or `None` when the terms stop decaying.
fn majorant_tail(m: &(dyn Fn(f64) -> f64 + Sync), u: &dyn Fn(f64) -> f64, r: f64) -> Option<f64> {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut rising = 0;
    let mut rad = r;
    for _ in 0..400 {
        let term = m(rad) * u(2.0 * rad);
        if !term.is_finite() {
            return None;
        }
        sum += term;
        if term <= 1e-17 * sum || term == 0.0 {
            return Some(sum);
        }
        rising = if term >= prev { rising + 1 } else { 0 };
        if rising >= 8 {
            return None;
        }
        prev = term;
        rad *= 2.0;
    }
    None
}

fn atoms_balls(atoms: &[(f64, f64)], radii: &[f64], g: &RadialFn<'_>) -> Vec<Estimate> {
    radii
        .iter()
        .map(|&r| {
            let mut e = Estimate::ZERO;
            for &(d, w) in atoms {
                if d < r {
                    let v = (g.g)(d);
                    if !v.is_finite() {
                        return Estimate::divergent();
                    }
                    e.value += w * v;
                }
            }
            e
        })
        .collect()
}

#[inline]
fn weighted(g: &RadialFn<'_>, w: &Weight<'_>, rho: f64) -> f64 {
    if rho < w.lo || rho > w.hi {
        return 0.0;
    }
    let m = (w.w)(rho);
    if m == 0.0 {
        0.0
    } else {
        (g.g)(rho) * m
    }
}

fn check_hint(g: &RadialFn<'_>, r: f64, params: &SweepParams) -> Result<()> {
    let Some(h) = g.singularity else { return Ok(()) };
    let e1 = r * powf(2.0, -((params.last.saturating_sub(4)).max(params.first) as f64));
    let e2 = r * powf(2.0, -(params.last as f64));
    let (v1, v2) = ((g.g)(e1), (g.g)(e2));
    if !(v1 > 0.0 && v1.is_finite() && v2.is_finite()) {
        return Ok(());
    }
    let predicted = powf(e1 / e2, h);
    if v2 / v1 > 100.0 * predicted {
        return Err(Error::Diagnostics(format!(
            "integrand grows by {:.3e} over the cutoff sweep, hint r^-{h} predicts {:.3e}",
            v2 / v1,
            predicted
        )));
    }
    Ok(())
}

fn sweep_to_estimate<const K: usize>(s: &SweepResult<K>) -> Estimate {
    if s.diverged {
        return Estimate::divergent();
    }
    let mut e = if K == 1 { Estimate::exact(s.value[0]) } else { batch_estimate(&s.value) };
    e.quad_error = s.quad_error + s.extrapolation_error;
    e
}

fn continuous_balls(w: &Weight<'_>, radii: &[f64], g: &RadialFn<'_>, opts: &IntegrationOptions) -> Result<Vec<Estimate>> {
    if w.lo == 0.0 {
        if let Some(&r) = radii.first() {
            check_hint(g, r.min(w.hi), &opts.sweep)?;
        }
    }
    let clipped: Vec<f64> = radii.iter().map(|r| r.min(w.hi)).collect();
    let f = |rho: f64| [weighted(g, w, rho)];
    let sweeps = nested_balls_vec(&f, &clipped, w.lo, &w.breaks, &opts.quad, &opts.sweep);
    Ok(sweeps.iter().map(sweep_to_estimate).collect())
}

fn dir_integrand(d: &DensityMeasure, x: &[f64], g: &RadialFn<'_>, rho: f64) -> [f64; K_DIR] {
    let mut out = [0.0; K_DIR];
    let per = d.directions.len() / BATCHES;
    let area = sphere_area(d.dim) * powf(rho, d.dim as f64 - 1.0);
    let mut y = alloc::vec![0.0; d.dim];
    let mut any = false;
    for b in 0..BATCHES {
        let mut s = 0.0;
        for dir in &d.directions[b * per..(b + 1) * per] {
            for i in 0..d.dim {
                y[i] = x[i] + rho * dir[i];
            }
            s += d.eval(&y);
        }
        let m = s / per as f64;
        any |= m != 0.0;
        out[b + 1] = area * m;
    }
    if !any {
        return out;
    }
    let gv = (g.g)(rho);
    let mut total = 0.0;
    for v in out[1..].iter_mut() {
        *v *= gv;
        total += *v;
    }
    out[0] = total / BATCHES as f64;
    out
}

fn batch_estimate(v: &[f64]) -> Estimate {
    let b = (v.len() - 1) as f64;
    let mean = v[0];
    let var = v[1..].iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (b - 1.0);
    Estimate { value: mean, stat_error: 2.0 * sqrt(var / b), quad_error: 0.0, diverged: false }
}

fn directional_balls(
    d: &DensityMeasure,
    x: &[f64],
    radii: &[f64],
    g: &RadialFn<'_>,
    opts: &IntegrationOptions,
) -> Result<Vec<Estimate>> {
    let reach = euclidean(x, &d.support_center) + d.support_radius;
    let lo = (euclidean(x, &d.support_center) - d.support_radius).max(0.0);
    if lo == 0.0 {
        if let Some(&r) = radii.first() {
            check_hint(g, r.min(reach), &opts.sweep)?;
        }
    }
    let clipped: Vec<f64> = radii.iter().map(|r| r.min(reach)).collect();
    let f = |rho: f64| dir_integrand(d, x, g, rho);
    let sweeps = nested_balls_vec(&f, &clipped, lo, &[], &opts.quad, &opts.sweep);
    Ok(sweeps.iter().map(sweep_to_estimate).collect())
}

fn sphere_view<'m>(s: &'m SphereSurface, x: &[f64]) -> View<'m> {
    let a = euclidean(x, &s.center);
    let (rr, m, d) = (s.radius, s.total_mass, s.dim);
    if d == 1 {
        let c = s.center[0];
        return View::Atoms(alloc::vec![(abs(x[0] - c - rr), m / 2.0), (abs(x[0] - c + rr), m / 2.0)]);
    }
    if a <= 1e-14 * rr {
        return View::Atoms(alloc::vec![(rr, m)]);
    }
    let k = m * sphere_area(d - 1) / sphere_area(d);
    let w = move |rho: f64| {
        let cos = ((a * a + rr * rr - rho * rho) / (2.0 * a * rr)).clamp(-1.0, 1.0);
        let sin = sqrt(1.0 - cos * cos);
        if sin == 0.0 {
            return 0.0;
        }
        k * powf(sin, d as f64 - 3.0) * rho / (a * rr)
    };
    View::Continuous(Weight {
        w: alloc::boxed::Box::new(w),
        lo: abs(a - rr),
        hi: a + rr,
        breaks: Vec::new(),
        limit: f64::INFINITY,
    })
}

fn radial_view<'m>(r: &'m RadialDensity, x: &[f64]) -> View<'m> {
    let a = euclidean(x, &r.origin);
    let d = r.dim;
    let profile = &r.profile;
    let support = profile.support_radius();
    if a == 0.0 {
        let area = sphere_area(d);
        return View::Continuous(Weight {
            w: alloc::boxed::Box::new(move |rho: f64| area * powf(rho, d as f64 - 1.0) * profile.eval(rho)),
            lo: 0.0,
            hi: support,
            breaks: profile.breakpoints(),
            limit: f64::INFINITY,
        });
    }
    let mut breaks = alloc::vec![a];
    for b in profile.breakpoints() {
        breaks.push(a + b);
        breaks.push(abs(a - b));
    }
    breaks.sort_by(f64::total_cmp);
    let lo = (a - support).max(0.0);
    let hi = a + support;
    let w: alloc::boxed::Box<dyn Fn(f64) -> f64 + Sync + 'm> = match d {
        1 => alloc::boxed::Box::new(move |rho: f64| profile.eval(abs(a + rho)) + profile.eval(abs(a - rho))),
        2 => alloc::boxed::Box::new(move |rho: f64| {
            let opts = QuadOptions { rel_tol: 1e-9, abs_tol: 0.0, max_intervals: 200 };
            let q = integrate(|th| profile.eval(sqrt(a * a + rho * rho + 2.0 * a * rho * crate::math::cos(th))), 0.0, PI, &opts);
            2.0 * rho * q.value[0]
        }),
        _ => {
            // Shell average in the variable s = |y - o|:
            // sin^{d-2}(th) dth = sin^{d-3}(th) s ds / (a rho).
            let area = sphere_area(d - 1);
            let pbreaks = profile.breakpoints();
            alloc::boxed::Box::new(move |rho: f64| {
                let (s0, s1) = (abs(a - rho), a + rho);
                if s0 >= support {
                    return 0.0;
                }
                let opts = QuadOptions { rel_tol: 1e-9, abs_tol: 0.0, max_intervals: 200 };
                let integrand = |s: f64| {
                    let cos = ((s * s - a * a - rho * rho) / (2.0 * a * rho)).clamp(-1.0, 1.0);
                    let sin = sqrt(1.0 - cos * cos);
                    let ang = if d == 3 { 1.0 } else { powf(sin, d as f64 - 3.0) };
                    [profile.eval(s) * ang * s]
                };
                let q = integrate_pieces_vec(&integrand, s0, s1.min(support), &pbreaks, &opts);
                area * powf(rho, d as f64 - 2.0) * q.value[0] / a
            })
        }
    };
    View::Continuous(Weight { w, lo, hi, breaks, limit: f64::INFINITY })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> IntegrationOptions {
        IntegrationOptions { quad: QuadOptions::rel(1e-9), sweep: SweepParams::default() }
    }

    #[test]
    fn ball_mass_examples() {
        let leb = Measure::lebesgue(3);
        assert!((leb.ball_mass(&[0.0; 3], 1.0).unwrap().value - 4.0 * PI / 3.0).abs() < 1e-14);
        let off = leb.ball_mass(&[3.0, -1.0, 2.0], 1.0).unwrap();
        assert!((off.value - 4.0 * PI / 3.0).abs() < 1e-6, "{off:?}");
        let dirac = Measure::dirac(alloc::vec![0.0, 0.0], 2.5).unwrap();
        assert_eq!(dirac.ball_mass(&[0.0, 0.0], 0.1).unwrap().value, 2.5);
        assert_eq!(dirac.ball_mass(&[1.0, 0.0], 0.1).unwrap().value, 0.0);
    }

    #[test]
    fn sphere_ball_mass_d3() {
        let s = Measure::sphere(alloc::vec![0.0; 3], 1.0, 4.0 * PI).unwrap();
        let m = s.ball_mass(&[1.0, 0.0, 0.0], 0.2).unwrap().value;
        assert!((m - PI * 0.04).abs() < 1e-8, "{m}");
        let total = s.ball_mass(&[0.3, 0.2, 0.0], 5.0).unwrap().value;
        assert!((total - 4.0 * PI).abs() < 1e-7);
        let center = s.ball_mass(&[0.0; 3], 1.5).unwrap().value;
        assert!((center - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn singular_integrals_lebesgue() {
        let leb = Measure::lebesgue(3);
        let g = |r: f64| 1.0 / r;
        let e = leb.integrate_over_ball(&[0.0; 3], 1.0, &RadialFn::new(&g).with_hint(1.0), &opts()).unwrap();
        assert!((e.value - 2.0 * PI).abs() < 1e-6);
        let g3 = |r: f64| powf(r, -3.0);
        let e = leb.integrate_over_ball(&[0.0; 3], 1.0, &RadialFn::new(&g3).with_hint(3.0), &opts()).unwrap();
        assert!(e.diverged && e.value == f64::INFINITY);
    }

    #[test]
    fn inconsistent_hint_is_reported() {
        let leb = Measure::lebesgue(3);
        let g3 = |r: f64| powf(r, -3.0);
        let err = leb.integrate_over_ball(&[0.0; 3], 1.0, &RadialFn::new(&g3).with_hint(1.0), &opts());
        assert!(matches!(err, Err(Error::Diagnostics(_))));
    }

    #[test]
    fn zero_measure() {
        let z = Measure::zero(2);
        let g = |r: f64| 1.0 / r;
        let e = z.integrate_over_ball(&[0.0, 0.0], 1.0, &RadialFn::new(&g), &opts()).unwrap();
        assert_eq!(e, Estimate::ZERO);
    }

    #[test]
    fn off_center_radial_density_matches_centered_mass() {
        for d in [1usize, 2, 3, 4] {
            let mu = Measure::radial(d, Profile::Exponential { c: 1.0, rate: 1.0, shape: 2.0 }, alloc::vec![0.0; d]).unwrap();
            let mut x = alloc::vec![0.0; d];
            x[0] = 0.7;
            let total = mu.integrate_over_ball(&x, 30.0, &RadialFn::new(&|_| 1.0), &opts()).unwrap().value;
            // int e^{-|y|^2} dy = pi^{d/2}.
            assert!((total - powf(PI, d as f64 / 2.0)).abs() < 1e-6, "d={d} {total}");
        }
    }

    #[test]
    fn directional_density_indicator() {
        let d = DensityMeasure::new(
            2,
            |y: &[f64]| if y[0].abs() < 1.0 && y[1].abs() < 1.0 { 1.0 } else { 0.0 },
            alloc::vec![0.0, 0.0],
            2.0,
        )
        .unwrap();
        let mu = Measure::Density(d);
        let m = mu.ball_mass(&[0.0, 0.0], 0.5).unwrap();
        assert!((m.value - PI * 0.25).abs() < 1e-6, "{m:?}");
        let m = mu.ball_mass(&[0.0, 0.0], 3.0).unwrap();
        assert!((m.value - 4.0).abs() < 4.0 * m.stat_error.max(0.02), "{m:?}");
    }

    #[test]
    fn ahlfors_limits() {
        let a = Measure::ahlfors(3, 2.0, 1.0, 4.0, 1.0).unwrap();
        assert_eq!(a.ball_mass(&[0.0; 3], 0.5).unwrap().value, 2.0 * 0.25);
        let e = a.integrate_over_ball(&[0.0; 3], 0.5, &RadialFn::new(&|_| 1.0), &opts()).unwrap();
        assert!((e.value - 0.5).abs() < 1e-9);
        assert!(matches!(
            a.integrate_over_ball(&[0.0; 3], 2.0, &RadialFn::new(&|_| 1.0), &opts()),
            Err(Error::Unsupported(_))
        ));
        let m = |_r: f64| 1.0;
        let tail = TailPolicy { majorant: &m, start_radius: 1.0, rel_tol: 1e-8 };
        assert!(a.integrate_global(&[0.0; 3], &RadialFn::new(&|_| 1.0), &tail, &opts()).is_err());
    }

    #[test]
    fn global_gaussian_lebesgue() {
        let leb = Measure::lebesgue(3);
        let g = |r: f64| libm::exp(-r * r);
        let tail = TailPolicy { majorant: &g, start_radius: 1.0, rel_tol: 1e-10 };
        let e = leb.integrate_global(&[0.5, 0.0, 0.0], &RadialFn::new(&g), &tail, &opts()).unwrap();
        assert!((e.value - powf(PI, 1.5)).abs() < 1e-6, "{e:?}");
        // Non-summable tail: g = 1 against Lebesgue.
        let one = |_r: f64| 1.0;
        let tail = TailPolicy { majorant: &one, start_radius: 1.0, rel_tol: 1e-10 };
        let e = leb.integrate_global(&[0.0; 3], &RadialFn::new(&one), &tail, &opts()).unwrap();
        assert!(e.diverged);
    }
}
