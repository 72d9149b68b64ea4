//! Invariant suite for heat kernel models.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{psi, HeatKernelModel, KernelFamily, Regime};
use crate::math::{exp, ln, powf, sphere_area};
use crate::quadrature::{dyadic_tail, integrate, integrate_to_infinity, QuadOptions, TailParams};

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantRow {
    pub invariant: String,
    pub samples: usize,
    pub failures: usize,
}

impl InvariantRow {
    fn new(name: &str, samples: usize, failures: usize) -> Self {
        InvariantRow { invariant: name.to_string(), samples, failures }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect()
}

/// Point at distance `rho` from `x` in a random coordinate direction.
fn at_distance(rng: &mut ChaCha8Rng, x: &[f64], rho: f64) -> Vec<f64> {
    let mut dir: Vec<f64> = (0..x.len()).map(|_| rng.random::<f64>() - 0.5).collect();
    let n = crate::math::norm(&dir).max(1e-300);
    for v in dir.iter_mut() {
        *v /= n;
    }
    x.iter().zip(&dir).map(|(a, b)| a + rho * b).collect()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    exp(ln(lo) + rng.random::<f64>() * (ln(hi) - ln(lo)))
}

/// Runs every applicable invariant with `triples` random `(t, x, y)` samples.
pub fn check_invariants(model: &HeatKernelModel, seed: u64, triples: usize) -> Vec<InvariantRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = model.dim();
    let (nu, beta) = (model.nu(), model.beta());
    let space = &model.space;
    let mut rows = Vec::new();

    let mut fails = 0;
    for _ in 0..200 {
        let x = random_point(&mut rng, dim, 5.0);
        let y = random_point(&mut rng, dim, 5.0);
        if space.distance(&x, &y) != space.distance(&y, &x) || space.distance(&x, &x) != 0.0 {
            fails += 1;
        }
    }
    rows.push(InvariantRow::new("metric symmetric, zero diagonal", 200, fails));

    // V(r)/r^nu either nondecreasing or bounded on r = 2^k.
    let ratios: Vec<f64> = (-20..=20).map(|k| {
        let r = powf(2.0, k as f64);
        space.volume(r) / powf(r, nu)
    }).collect();
    let increasing = ratios.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let ok = increasing || max.is_finite();
    rows.push(InvariantRow::new("volume growth V(r)/r^nu", ratios.len(), usize::from(!ok)));

    let mut fails = 0;
    let n_u = 400;
    for i in 0..n_u {
        let u = 50.0 * i as f64 / (n_u - 1) as f64;
        let (l, h) = (model.phi_lower.eval(u), model.phi_upper.eval(u));
        if l > h * (1.0 + 1e-12) {
            fails += 1;
        }
    }
    rows.push(InvariantRow::new("phi_lower <= phi_upper", n_u, fails));

    // Condition H(Phi_2): int_1^T (V(t) v t^nu) Phi_2(t)/t dt is Cauchy.
    let tail = dyadic_tail(
        |s| space.volume(s).max(powf(s, nu)) * model.phi_upper.eval(s) / s,
        1.0,
        &QuadOptions::rel(1e-8),
        &TailParams::default(),
    );
    rows.push(InvariantRow::new("condition H(phi_upper)", tail.blocks.len(), usize::from(tail.diverged)));

    let t_hi = model.t0.min(10.0);
    let mut sand = 0;
    let mut sym = 0;
    for _ in 0..triples {
        let t = log_uniform(&mut rng, 1e-3 * t_hi, 0.999 * t_hi);
        let scale = powf(t, 1.0 / beta);
        let rho = log_uniform(&mut rng, 1e-3 * scale, 10.0 * scale);
        let x = random_point(&mut rng, dim, 2.0);
        let y = at_distance(&mut rng, &x, rho);
        let d = space.distance(&x, &y);
        let (p, q) = match (model.eval(t, &x, &y), model.eval(t, &y, &x)) {
            (Ok(p), Ok(q)) => (p, q),
            _ => {
                sand += 1;
                sym += 1;
                continue;
            }
        };
        if p != q {
            sym += 1;
        }
        let lo = model.envelope_lower(t, d);
        let hi = model.envelope_upper(t, d);
        if !(lo <= p * (1.0 + 1e-9) + 1e-300 && p <= hi * (1.0 + 1e-9) + 1e-300) {
            sand += 1;
        }
    }
    rows.push(InvariantRow::new("sandwich phi_lower <= p <= phi_upper", triples, sand));
    rows.push(InvariantRow::new("kernel symmetry", triples, sym));

    let c = model.lemma_constants();
    let opts = QuadOptions::default();
    let mut fails = usize::from(!c.fitted);
    let n_b = 40;
    let t_top = match model.regime() {
        Regime::Critical => 0.45f64.min(0.9 * model.t0),
        _ => 4.0f64.min(0.9 * model.t0),
    };
    for _ in 0..n_b {
        let t = log_uniform(&mut rng, 1e-3 * t_top, t_top);
        let rho = match model.regime() {
            Regime::Critical => log_uniform(&mut rng, 1e-4, powf(t, 2.0 / beta).min(0.3)),
            _ => log_uniform(&mut rng, 1e-3, 1.0) * powf(t, 1.0 / beta),
        };
        let Ok(b) = model.time_integrated_bounds(t, rho) else {
            fails += 1;
            continue;
        };
        let v = match model.time_integral_at(t, rho, &opts) {
            Ok(q) => q.value,
            Err(e) => e.best_estimate().unwrap_or(f64::NAN),
        };
        if !(v <= b.upper && b.lower.map_or(true, |l| l <= v)) {
            fails += 1;
        }
    }
    rows.push(InvariantRow::new("time-integral bounds contain the integral", n_b, fails));

    if model.time_horizon().is_infinite() {
        let mut fails = 0;
        let n_r = 20;
        for _ in 0..n_r {
            let alpha = log_uniform(&mut rng, 0.1, 100.0);
            let t = log_uniform(&mut rng, 0.01, 4.0);
            let rho = log_uniform(&mut rng, 0.01, 2.0);
            let i = model.time_integral_at(t, rho, &opts).map(|q| q.value);
            let r = model.resolvent_at(alpha, rho, &opts).map(|q| q.value);
            match (i, r) {
                (Ok(i), Ok(r)) if i <= exp(alpha * t) * r * (1.0 + 1e-6) => {}
                _ => fails += 1,
            }
        }
        rows.push(InvariantRow::new("int_0^t p_s <= e^{alpha t} r_alpha", n_r, fails));
    }

    match model.family {
        KernelFamily::Gaussian => gaussian_rows(model, &mut rows),
        KernelFamily::Relativistic { alpha, .. } => psi_rows(dim, alpha, &mut rows),
        _ => {}
    }
    rows
}

fn gaussian_rows(model: &HeatKernelModel, rows: &mut Vec<InvariantRow>) {
    let d = model.dim();
    let opts = QuadOptions::rel(1e-10);
    let mut fails = 0;
    let ts = [0.01, 0.1, 1.0, 10.0];
    for &t in &ts {
        let mass = sphere_area(d)
            * integrate_to_infinity(|r| powf(r, d as f64 - 1.0) * model.density(t, r), 0.0, &opts).scalar();
        if (mass - 1.0).abs() > 1e-3 {
            fails += 1;
        }
    }
    rows.push(InvariantRow::new("mass conservation", ts.len(), fails));
    if d == 1 {
        let mut fails = 0;
        let cases: [(f64, f64, f64, f64); 3] = [(0.3, 0.5, 0.0, 1.0), (1.0, 1.0, -0.5, 0.7), (0.1, 2.0, 0.2, 0.2)];
        for &(s, t, x, y) in &cases {
            // Window of 12 standard deviations around both points.
            let w = 12.0 * libm::sqrt(s.max(t));
            let conv = integrate(
                |z| model.density(s, (x - z).abs()) * model.density(t, (z - y).abs()),
                x.min(y) - w,
                x.max(y) + w,
                &opts,
            )
            .scalar();
            if (conv - model.density(s + t, (x - y).abs())).abs() > 1e-4 {
                fails += 1;
            }
        }
        rows.push(InvariantRow::new("chapman-kolmogorov", cases.len(), fails));
    }
}

fn psi_rows(d: usize, alpha: f64, rows: &mut Vec<InvariantRow>) {
    let origin = psi(d, alpha, 0.0).map_or(false, |v| v == 1.0);
    rows.push(InvariantRow::new("psi(0) = 1", 1, usize::from(!origin)));
    let n = 501;
    let mut fails = 0;
    let mut prev = f64::INFINITY;
    for i in 0..n {
        let r = 50.0 * i as f64 / (n - 1) as f64;
        match psi(d, alpha, r) {
            Ok(v) if v < prev || (i == 0 && v <= prev) => prev = v,
            _ => fails += 1,
        }
    }
    rows.push(InvariantRow::new("psi decreasing on [0,50]", n, fails));
    let ratios: Vec<f64> = (0..46)
        .map(|i| 5.0 + i as f64)
        .map(|r| psi(d, alpha, r).unwrap_or(f64::NAN) / (exp(-r) * (1.0 + powf(r, (d as f64 + alpha - 1.0) / 2.0))))
        .collect();
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let ok = lo > 0.0 && hi / lo < 2.0;
    rows.push(InvariantRow::new("psi asymptotic ratio within factor 2 on [5,50]", ratios.len(), usize::from(!ok)));
}
