//! Path simulation and expected additive functionals
//! `E_x[int_0^t V(X_s) ds]`, as an independent check of the `p = 1`
//! semigroup functional.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::math::{cos, powf, sin, sqrt, PI};
use crate::parallel::map_indexed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Process {
    /// Increments `N(0, dt I)`.
    Brownian,
    /// Isotropic stable with characteristic exponent `|xi|^alpha`.
    Stable { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathConfig {
    pub process: Process,
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub x0: Vec<f64>,
}

impl PathConfig {
    /// `dt = t/1000`.
    pub fn new(process: Process, x0: Vec<f64>, horizon: f64, n_paths: usize, seed: u64) -> Self {
        PathConfig { process, dt: horizon / 1000.0, horizon, n_paths, seed, x0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || !(self.dt > 0.0 && self.dt < self.horizon) {
            return Err(Error::validation("need 0 < dt < t"));
        }
        if self.n_paths < 100 {
            return Err(Error::validation("need at least 100 paths"));
        }
        if self.x0.is_empty() {
            return Err(Error::validation("start point must have at least one coordinate"));
        }
        if let Process::Stable { alpha } = self.process {
            if !(alpha > 0.0 && alpha <= 2.0) {
                return Err(Error::validation("stable index must lie in ]0, 2]"));
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        libm::round(self.horizon / self.dt).max(1.0) as usize
    }

    fn rng(&self, path: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(path as u64);
        rng
    }
}

/// Symmetric stable variable with `E e^{i xi X} = e^{-|xi|^alpha}`.
fn cms_symmetric<R: Rng>(rng: &mut R, alpha: f64) -> f64 {
    let u = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = Exp1.sample(rng);
    if alpha == 1.0 {
        return libm::tan(u);
    }
    sin(alpha * u) / powf(cos(u), 1.0 / alpha) * powf(cos((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha)
}

/// Positive stable variable with `E e^{-l A} = e^{-l^a}`, `0 < a < 1`.
fn positive_stable<R: Rng>(rng: &mut R, a: f64) -> f64 {
    let u = PI * rng.random::<f64>();
    let w: f64 = Exp1.sample(rng);
    sin(a * u) / powf(sin(u), 1.0 / a) * powf(sin((1.0 - a) * u) / w, (1.0 - a) / a)
}

struct Stepper {
    process: Process,
    dim: usize,
    scale: f64,
}

impl Stepper {
    fn new(process: Process, dim: usize, dt: f64) -> Self {
        let scale = match process {
            Process::Brownian => sqrt(dt),
            Process::Stable { alpha } => powf(dt, 1.0 / alpha),
        };
        Stepper { process, dim, scale }
    }

    fn step<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        match self.process {
            Process::Brownian => {
                for o in out.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *o = self.scale * z;
                }
            }
            Process::Stable { alpha } if self.dim == 1 => out[0] = self.scale * cms_symmetric(rng, alpha),
            Process::Stable { alpha } => {
                // Sub-Gaussian construction: sqrt(A) N(0, 2 I).
                let a = if alpha < 2.0 { positive_stable(rng, alpha / 2.0) } else { 1.0 };
                let s = self.scale * sqrt(2.0 * a);
                for o in out.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *o = s * z;
                }
            }
        }
    }
}

/// Paths sampled at `k dt`, `k = 0..=n_steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub dim: usize,
    pub n_steps: usize,
    /// Path-major, then time, then coordinate.
    pub positions: Vec<f64>,
}

impl PathEnsemble {
    pub fn n_paths(&self) -> usize {
        self.positions.len() / ((self.n_steps + 1) * self.dim)
    }

    pub fn position(&self, path: usize, step: usize) -> &[f64] {
        let i = (path * (self.n_steps + 1) + step) * self.dim;
        &self.positions[i..i + self.dim]
    }

    pub fn endpoint(&self, path: usize) -> &[f64] {
        self.position(path, self.n_steps)
    }
}

/// Simulates and stores whole paths; memory grows as paths times steps.
pub fn simulate_paths(config: &PathConfig) -> Result<PathEnsemble> {
    config.validate()?;
    let dim = config.x0.len();
    let n = config.n_steps();
    let stepper = Stepper::new(config.process, dim, config.dt);
    let per_path = map_indexed(config.n_paths, |p| {
        let mut rng = config.rng(p);
        let mut out = Vec::with_capacity((n + 1) * dim);
        let mut x = config.x0.clone();
        let mut inc = alloc::vec![0.0; dim];
        out.extend_from_slice(&x);
        for _ in 0..n {
            stepper.step(&mut rng, &mut inc);
            for (xi, di) in x.iter_mut().zip(&inc) {
                *xi += di;
            }
            out.extend_from_slice(&x);
        }
        out
    });
    Ok(PathEnsemble { dim, n_steps: n, positions: per_path.concat() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    /// Values of `V` above this level are clipped and counted.
    pub clip: f64,
    /// Also run the coupled `dt/2` scheme to estimate the discretization bias.
    pub richardson: bool,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { clip: 1e8, richardson: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub clipped: usize,
    /// Mean difference between the `dt/2` and `dt` schemes.
    pub bias: Option<f64>,
    pub bias_std_error: Option<f64>,
}

impl McEstimate {
    /// Discretization bias below one standard error (true when unchecked).
    pub fn bias_ok(&self) -> bool {
        self.bias.is_none_or(|b| b.abs() < self.std_error.max(1e-300))
    }
}

/// `E_{x0}[int_0^t V(X_s) ds]` by left Riemann sums along simulated paths.
pub fn expected_additive_functional<V>(config: &PathConfig, v: V, opts: &McOptions) -> Result<McEstimate>
where
    V: Fn(&[f64]) -> f64 + Sync + Send,
{
    config.validate()?;
    let dim = config.x0.len();
    let n = config.n_steps();
    let dt = config.dt;
    let fine = Stepper::new(config.process, dim, dt / 2.0);
    let coarse = Stepper::new(config.process, dim, dt);
    let eval = |x: &[f64], clipped: &mut usize| {
        let y = v(x);
        if y > opts.clip || y.is_nan() {
            *clipped += 1;
            opts.clip
        } else {
            y
        }
    };
    let rows = map_indexed(config.n_paths, |p| {
        let mut rng = config.rng(p);
        let mut clipped = 0usize;
        let mut x = config.x0.clone();
        let mut inc = alloc::vec![0.0; dim];
        let mut sum_c = 0.0;
        let mut sum_f = 0.0;
        if opts.richardson {
            let mut inc2 = alloc::vec![0.0; dim];
            for _ in 0..n {
                let vx = eval(&x, &mut clipped);
                sum_c += vx * dt;
                sum_f += vx * dt / 2.0;
                fine.step(&mut rng, &mut inc);
                let mid: Vec<f64> = x.iter().zip(&inc).map(|(a, b)| a + b).collect();
                sum_f += eval(&mid, &mut clipped) * dt / 2.0;
                fine.step(&mut rng, &mut inc2);
                for i in 0..dim {
                    x[i] = mid[i] + inc2[i];
                }
            }
        } else {
            for _ in 0..n {
                sum_c += eval(&x, &mut clipped) * dt;
                coarse.step(&mut rng, &mut inc);
                for (xi, di) in x.iter_mut().zip(&inc) {
                    *xi += di;
                }
            }
        }
        (sum_c, sum_f, clipped)
    });
    let np = rows.len() as f64;
    let mean = rows.iter().map(|r| r.0).sum::<f64>() / np;
    let var = rows.iter().map(|r| (r.0 - mean) * (r.0 - mean)).sum::<f64>() / (np - 1.0);
    let clipped = rows.iter().map(|r| r.2).sum();
    let (bias, bias_se) = if opts.richardson {
        let diffs: Vec<f64> = rows.iter().map(|r| r.1 - r.0).collect();
        let b = diffs.iter().sum::<f64>() / np;
        let bv = diffs.iter().map(|d| (d - b) * (d - b)).sum::<f64>() / (np - 1.0);
        (Some(b), Some(sqrt(bv / np)))
    } else {
        (None, None)
    };
    if !mean.is_finite() {
        return Err(Error::Overflow("additive functional"));
    }
    Ok(McEstimate { mean, std_error: sqrt(var / np), n_paths: rows.len(), clipped, bias, bias_std_error: bias_se })
}

/// Sample variance of the first endpoint coordinate with its standard error.
pub fn endpoint_variance(ens: &PathEnsemble) -> (f64, f64) {
    let n = ens.n_paths();
    let xs: Vec<f64> = (0..n).map(|p| ens.endpoint(p)[0] - ens.position(p, 0)[0]).collect();
    let m = xs.iter().sum::<f64>() / n as f64;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n as f64 - 1.0);
    let m4 = xs.iter().map(|x| powf(x - m, 4.0)).sum::<f64>() / n as f64;
    (v, sqrt(((m4 - v * v) / n as f64).max(0.0)))
}

impl core::fmt::Display for Process {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Process::Brownian => f.write_str("brownian"),
            Process::Stable { alpha } => write!(f, "stable(alpha={alpha})"),
        }
    }
}
