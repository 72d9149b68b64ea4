//! Verdicts from functional sweeps: limit classification of log-log data,
//! class thresholds, decay orders, and sufficient conditions.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::estimate::Estimate;
use crate::functionals::{
    kato_sweep, resolvent_local_sweep, resolvent_sweep, semigroup_local_sweep, semigroup_sweep, CenterStrategy,
    FunctionalEstimate, GreenKernelSpec,
};
use crate::kernel::{HeatKernelModel, Regime};
use crate::math::{ln, powf, sqrt};
use crate::measures::{IntegrationOptions, Measure, RadialFn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    In,
    Out,
    Undecided,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::In => "in",
            Verdict::Out => "out",
            Verdict::Undecided => "undecided",
        }
    }

    /// Combination for "for any parameter" criteria.
    pub fn worst(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Out, _) | (_, Verdict::Out) => Verdict::Out,
            (Verdict::Undecided, _) | (_, Verdict::Undecided) => Verdict::Undecided,
            _ => Verdict::In,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "in" => Ok(Verdict::In),
            "out" => Ok(Verdict::Out),
            "undecided" => Ok(Verdict::Undecided),
            _ => Err(Error::validation(format!("unknown verdict {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitVerdict {
    TendsToZero,
    Bounded,
    Diverges,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitSample {
    pub scale: f64,
    pub value: f64,
    pub error: f64,
    pub diverged: bool,
}

impl LimitSample {
    pub fn new(scale: f64, value: f64, error: f64) -> Self {
        LimitSample { scale, value, error, diverged: !value.is_finite() }
    }

    pub fn from_estimate(scale: f64, e: &FunctionalEstimate) -> Self {
        LimitSample { scale, value: e.value, error: e.total_error(), diverged: e.diverged }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitParams {
    pub slope_cut: f64,
    pub ratio_guard: f64,
    pub min_samples: usize,
}

impl Default for LimitParams {
    fn default() -> Self {
        LimitParams { slope_cut: 0.05, ratio_guard: 10.0, min_samples: 6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitResult {
    pub verdict: LimitVerdict,
    /// Log-log slope over the finest half; `+inf` when the values vanish,
    /// `-inf` on a divergence sentinel.
    pub slope: f64,
    /// Half-width of the two-sigma interval of the slope.
    pub ci: f64,
    pub ratio: f64,
}

/// Weighted least squares of `y` on `x`; returns (slope, intercept, sd of slope).
fn weighted_fit(x: &[f64], y: &[f64], sigma: &[f64]) -> (f64, f64, f64) {
    let w: Vec<f64> = sigma.iter().map(|s| 1.0 / (s * s)).collect();
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(&w).map(|(a, b)| b * (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).zip(&w).map(|((a, c), b)| b * (a - mx) * (c - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let n = x.len() as f64;
    let chi2: f64 = x.iter().zip(y).zip(&w).map(|((a, c), b)| b * { let e = c - intercept - slope * a; e * e }).sum();
    let scale = if n > 2.0 { (chi2 / (n - 2.0)).max(1.0) } else { 1.0 };
    (slope, intercept, sqrt(scale / sxx))
}

/// Behavior of sampled values as the scale tends to 0.
pub fn classify_limit(samples: &[LimitSample], params: &LimitParams) -> Result<LimitResult> {
    if samples.iter().any(|s| s.diverged) {
        return Ok(LimitResult { verdict: LimitVerdict::Diverges, slope: f64::NEG_INFINITY, ci: 0.0, ratio: f64::INFINITY });
    }
    let finite: Vec<&LimitSample> = samples.iter().filter(|s| s.value.is_finite() && s.error.is_finite()).collect();
    if finite.len() < params.min_samples {
        return Err(Error::InsufficientData(format!(
            "{} finite samples, at least {} needed",
            finite.len(),
            params.min_samples
        )));
    }
    let mut sorted = finite;
    sorted.sort_by(|a, b| a.scale.total_cmp(&b.scale));
    let half = &sorted[..sorted.len().div_ceil(2)];
    let positive: Vec<&&LimitSample> = half.iter().filter(|s| s.value > 0.0).collect();
    if positive.len() < 2 {
        return Ok(LimitResult { verdict: LimitVerdict::TendsToZero, slope: f64::INFINITY, ci: 0.0, ratio: 0.0 });
    }
    let x: Vec<f64> = positive.iter().map(|s| ln(s.scale)).collect();
    let y: Vec<f64> = positive.iter().map(|s| ln(s.value)).collect();
    let sig: Vec<f64> = positive.iter().map(|s| (s.error / s.value).max(1e-3)).collect();
    let (slope, _, sd) = weighted_fit(&x, &y, &sig);
    let ci = 2.0 * sd;
    let vmax = positive.iter().map(|s| s.value).fold(0.0, f64::max);
    let vmin = positive.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
    let ratio = vmax / vmin;
    let cut = params.slope_cut;
    let verdict = if slope - ci < -cut && slope + ci > cut {
        LimitVerdict::Undecided
    } else if slope > cut {
        LimitVerdict::TendsToZero
    } else if slope < -cut {
        LimitVerdict::Diverges
    } else if ratio < params.ratio_guard {
        LimitVerdict::Bounded
    } else if slope < 0.0 {
        LimitVerdict::Diverges
    } else {
        LimitVerdict::TendsToZero
    };
    Ok(LimitResult { verdict, slope, ci, ratio })
}

/// `eta / (nu - beta)` for `nu > beta`, `+inf` otherwise.
pub fn threshold_p_star(eta: f64, nu: f64, beta: f64) -> Result<f64> {
    if !(eta > 0.0) || !(nu > 0.0 && beta > 0.0) {
        return Err(Error::domain("eta, nu and beta must be positive"));
    }
    if eta > nu {
        return Err(Error::domain(format!("eta = {eta} exceeds nu = {nu}")));
    }
    Ok(if nu > beta { eta / (nu - beta) } else { f64::INFINITY })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaFit {
    pub delta: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Decay order `delta` of `F(t)^{1/p} = O(t^delta)` from samples `(t, F(t))`.
/// `None` when a sample diverged.
pub fn fit_order_delta(samples: &[(f64, FunctionalEstimate)], p: f64) -> Result<Option<DeltaFit>> {
    if samples.iter().any(|(_, e)| e.diverged) {
        return Ok(None);
    }
    let pts: Vec<LimitSample> = samples
        .iter()
        .filter(|(_, e)| e.value > 0.0)
        .map(|(t, e)| {
            let v = powf(e.value, 1.0 / p);
            LimitSample::new(*t, v, v * e.total_error() / (p * e.value))
        })
        .collect();
    let params = LimitParams::default();
    if pts.len() < params.min_samples {
        return Err(Error::InsufficientData(format!("{} positive samples, at least 6 needed", pts.len())));
    }
    let r = classify_limit(&pts, &params)?;
    Ok(Some(DeltaFit { delta: r.slope, ci_lo: r.slope - r.ci, ci_hi: r.slope + r.ci }))
}

/// Upper end of the admissible decay orders, `(eta - p(nu-beta)) / (p beta)`.
pub fn delta_bound(eta: f64, nu: f64, beta: f64, p: f64) -> f64 {
    if nu >= beta {
        (eta - p * (nu - beta)) / (p * beta)
    } else {
        1.0 - nu / beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// Green-kernel functional over shrinking balls.
    Green,
    /// Localized resolvent, every sampled `alpha`.
    ResolventAny,
    /// Localized resolvent, one `alpha`.
    ResolventSome,
    /// Localized time-integrated kernel, every sampled `t`.
    HeatAny,
    /// Localized time-integrated kernel, one `t`.
    HeatSome,
    /// Whole-space time-integrated kernel as `t -> 0`.
    GlobalSemigroup,
    /// Whole-space resolvent as `alpha -> inf`.
    GlobalResolvent,
}

impl Criterion {
    pub const ALL: [Criterion; 7] = [
        Criterion::Green,
        Criterion::ResolventAny,
        Criterion::ResolventSome,
        Criterion::HeatAny,
        Criterion::HeatSome,
        Criterion::GlobalSemigroup,
        Criterion::GlobalResolvent,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Criterion::Green => "green",
            Criterion::ResolventAny => "resolvent_local_any",
            Criterion::ResolventSome => "resolvent_local_some",
            Criterion::HeatAny => "heat_local_any",
            Criterion::HeatSome => "heat_local_some",
            Criterion::GlobalSemigroup => "semigroup_global",
            Criterion::GlobalResolvent => "resolvent_global",
        }
    }

    /// Criteria whose equivalence with `Green` needs `nu >= beta`.
    pub fn is_localized_kernel(&self) -> bool {
        matches!(self, Criterion::ResolventAny | Criterion::ResolventSome | Criterion::HeatAny | Criterion::HeatSome)
    }
}

/// One sweep: a criterion at one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionRow {
    pub criterion: Criterion,
    pub parameter: Option<(&'static str, f64)>,
    /// `(scale, estimate)`; scale is `r`, `t^{1/beta}` or `alpha^{-1/beta}`.
    pub samples: Vec<(f64, FunctionalEstimate)>,
    pub limit: Option<LimitResult>,
    pub verdict: Option<Verdict>,
    pub note: Option<String>,
}

impl CriterionRow {
    pub fn label(&self) -> String {
        match self.parameter {
            Some((k, v)) => format!("{}[{k}={v}]", self.criterion.name()),
            None => String::from(self.criterion.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationConfig {
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
    pub alphas: Vec<f64>,
    /// `alpha` values for the localized resolvent criteria; the first one is
    /// the "some alpha" witness.
    pub resolvent_alphas: Vec<f64>,
    /// `t` values for the localized heat criteria; the first one is the
    /// "some t" witness. Empty means `{T, T/16}` with `T = min(1, t0/2)`.
    pub heat_times: Vec<f64>,
    pub centers: CenterStrategy,
    pub limit: LimitParams,
    pub band: f64,
    pub criteria: Vec<Criterion>,
    pub seed: u64,
}

impl Default for ClassificationConfig {
    fn default() -> Self {
        ClassificationConfig {
            radii: (2..=11).map(|j| powf(2.0, -(j as f64))).collect(),
            times: (1..=8).map(|j| powf(4.0, -(j as f64))).collect(),
            alphas: (1..=8).map(|j| powf(4.0, j as f64)).collect(),
            resolvent_alphas: alloc::vec![1.0, 16.0],
            heat_times: Vec::new(),
            centers: CenterStrategy::adapted(),
            limit: LimitParams::default(),
            band: 0.05,
            criteria: Criterion::ALL.to_vec(),
            seed: 0,
        }
    }
}

impl ClassificationConfig {
    /// Replaces each grid by its first `n` points.
    pub fn with_depth(mut self, n: usize) -> Self {
        let n = n.max(6);
        self.radii = (0..n).map(|j| powf(2.0, -(j as f64 + 2.0))).collect();
        self.times = (0..n).map(|j| powf(4.0, -(j as f64 + 1.0))).collect();
        self.alphas = (0..n).map(|j| powf(4.0, j as f64 + 1.0)).collect();
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PEntry {
    pub p: f64,
    pub verdict_k: Verdict,
    pub verdict_d: Verdict,
    pub fitted_slope: f64,
    pub slope_ci: f64,
    pub p_star: f64,
    pub delta_hat: Option<DeltaFit>,
    pub criteria: Vec<CriterionRow>,
}

impl PEntry {
    /// Verdict of a criterion, combining all of its rows.
    pub fn criterion_verdict(&self, c: Criterion) -> Option<Verdict> {
        self.criteria.iter().filter(|r| r.criterion == c).filter_map(|r| r.verdict).reduce(Verdict::worst)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
    pub alphas: Vec<f64>,
    pub n_centers: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub family: &'static str,
    pub nu: f64,
    pub beta: f64,
    pub eta: Option<f64>,
    pub entries: Vec<PEntry>,
    /// Disagreements between criteria and violated report invariants.
    pub findings: Vec<String>,
    pub provenance: Provenance,
}

impl ClassificationReport {
    pub fn all_undecided(&self) -> bool {
        !self.entries.is_empty() && self.entries.iter().all(|e| e.verdict_k == Verdict::Undecided)
    }
}

fn kato_verdict(l: &LimitResult) -> Verdict {
    match l.verdict {
        LimitVerdict::TendsToZero => Verdict::In,
        LimitVerdict::Bounded | LimitVerdict::Diverges => Verdict::Out,
        LimitVerdict::Undecided => Verdict::Undecided,
    }
}

fn soft_error(e: Error) -> Result<String> {
    match e {
        Error::Unsupported(m) | Error::Domain(m) => Ok(m),
        other => Err(other),
    }
}

struct RowBuilder<'a> {
    cfg: &'a ClassificationConfig,
    near_threshold: bool,
}

impl RowBuilder<'_> {
    fn row(
        &self,
        criterion: Criterion,
        parameter: Option<(&'static str, f64)>,
        scales: &[f64],
        est: Result<Vec<FunctionalEstimate>>,
    ) -> Result<CriterionRow> {
        let mut row = CriterionRow { criterion, parameter, samples: Vec::new(), limit: None, verdict: None, note: None };
        let est = match est {
            Ok(e) => e,
            Err(e) => {
                row.note = Some(soft_error(e)?);
                return Ok(row);
            }
        };
        row.samples = scales.iter().copied().zip(est).collect();
        let pts: Vec<LimitSample> = row.samples.iter().map(|(s, e)| LimitSample::from_estimate(*s, e)).collect();
        match classify_limit(&pts, &self.cfg.limit) {
            Ok(l) => {
                let mut v = kato_verdict(&l);
                if self.near_threshold && l.slope.is_finite() {
                    v = Verdict::Undecided;
                    row.note = Some(String::from("near threshold"));
                }
                row.limit = Some(l);
                row.verdict = Some(v);
            }
            Err(Error::InsufficientData(m)) => row.note = Some(m),
            Err(e) => return Err(e),
        }
        Ok(row)
    }
}

/// Runs the configured criteria for each `p` and assembles verdicts.
pub fn classify_measure(
    mu: &Measure,
    model: &HeatKernelModel,
    ps: &[f64],
    cfg: &ClassificationConfig,
) -> Result<ClassificationReport> {
    let (nu, beta) = (model.nu(), model.beta());
    let spec = GreenKernelSpec::of(model);
    let eta = mu.ahlfors_exponent();
    let horizon = model.time_horizon();
    let t_top = if horizon.is_finite() { (horizon / 2.0).min(1.0) } else { 1.0 };
    let heat_times = if cfg.heat_times.is_empty() { alloc::vec![t_top, t_top / 16.0] } else { cfg.heat_times.clone() };
    let radii: Vec<f64> = cfg.radii.iter().copied().filter(|r| *r <= spec.max_radius()).collect();
    let times: Vec<f64> = cfg.times.iter().copied().filter(|t| *t < horizon).collect();
    let mut findings = Vec::new();
    let mut entries = Vec::new();
    let mut n_centers = 0;

    for &p in ps {
        if !(p >= 1.0) {
            return Err(Error::domain(format!("p = {p} is below 1")));
        }
        let p_star = threshold_p_star(eta.unwrap_or(nu).min(nu).max(f64::MIN_POSITIVE), nu, beta)?;
        let near_threshold = nu >= beta && eta.is_some_and(|h| abs_diff(h, p * (nu - beta)) < cfg.band);
        let b = RowBuilder { cfg, near_threshold };
        let mut rows = Vec::new();
        for &c in &cfg.criteria {
            match c {
                Criterion::Green => {
                    if spec.regime() == Regime::Subcritical {
                        let est = kato_sweep(mu, &spec, p, &[1.0], &cfg.centers);
                        let mut row = CriterionRow {
                            criterion: c,
                            parameter: None,
                            samples: Vec::new(),
                            limit: None,
                            verdict: None,
                            note: Some(String::from("unit-ball mass")),
                        };
                        match est {
                            Ok(e) => {
                                n_centers = n_centers.max(e[0].n_centers);
                                row.verdict = Some(if e[0].diverged { Verdict::Out } else { Verdict::In });
                                row.samples = alloc::vec![(1.0, e[0].clone())];
                            }
                            Err(e) => row.note = Some(soft_error(e)?),
                        }
                        rows.push(row);
                    } else {
                        let est = kato_sweep(mu, &spec, p, &radii, &cfg.centers);
                        if let Ok(e) = &est {
                            n_centers = n_centers.max(e.first().map_or(0, |f| f.n_centers));
                        }
                        rows.push(b.row(c, None, &radii, est)?);
                    }
                }
                Criterion::ResolventAny | Criterion::ResolventSome => {
                    let alphas: &[f64] =
                        if c == Criterion::ResolventSome { &cfg.resolvent_alphas[..1] } else { &cfg.resolvent_alphas };
                    for &a in alphas {
                        let est = resolvent_local_sweep(mu, model, p, a, &radii, &cfg.centers);
                        rows.push(b.row(c, Some(("alpha", a)), &radii, est)?);
                    }
                }
                Criterion::HeatAny | Criterion::HeatSome => {
                    let ts: &[f64] = if c == Criterion::HeatSome { &heat_times[..1] } else { &heat_times };
                    for &t in ts {
                        let est = semigroup_local_sweep(mu, model, p, t, &radii, &cfg.centers);
                        rows.push(b.row(c, Some(("t", t)), &radii, est)?);
                    }
                }
                Criterion::GlobalSemigroup => {
                    let scales: Vec<f64> = times.iter().map(|t| powf(*t, 1.0 / beta)).collect();
                    let est = semigroup_sweep(mu, model, p, &times, &cfg.centers, None);
                    rows.push(b.row(c, None, &scales, est)?);
                }
                Criterion::GlobalResolvent => {
                    let scales: Vec<f64> = cfg.alphas.iter().map(|a| powf(*a, -1.0 / beta)).collect();
                    let est = resolvent_sweep(mu, model, p, &cfg.alphas, &cfg.centers, None);
                    rows.push(b.row(c, None, &scales, est)?);
                }
            }
        }

        let green = rows.iter().find(|r| r.criterion == Criterion::Green);
        let primary = green
            .and_then(|r| r.verdict)
            .or_else(|| rows.iter().find(|r| r.criterion == Criterion::GlobalSemigroup).and_then(|r| r.verdict))
            .unwrap_or(Verdict::Undecided);
        let (slope, slope_ci) = green.and_then(|r| r.limit).map_or((f64::NAN, f64::NAN), |l| (l.slope, l.ci));
        let verdict_d = dynkin_verdict(green, primary);
        let delta_hat = rows
            .iter()
            .find(|r| r.criterion == Criterion::GlobalSemigroup && !r.samples.is_empty())
            .map(|r| {
                let ts: Vec<(f64, FunctionalEstimate)> =
                    r.samples.iter().map(|(s, e)| (powf(*s, beta), e.clone())).collect();
                fit_order_delta(&ts, p)
            })
            .transpose()
            .unwrap_or(None)
            .flatten();

        let entry = PEntry { p, verdict_k: primary, verdict_d, fitted_slope: slope, slope_ci, p_star, delta_hat, criteria: rows };
        findings.extend(agreement_findings(&entry, nu, beta));
        entries.push(entry);
    }
    findings.extend(monotonicity_findings(&entries));
    Ok(ClassificationReport {
        family: model.family.name(),
        nu,
        beta,
        eta,
        entries,
        findings,
        provenance: Provenance {
            radii,
            times,
            alphas: cfg.alphas.clone(),
            n_centers,
            seed: cfg.seed,
        },
    })
}

fn abs_diff(a: f64, b: f64) -> f64 {
    if a > b {
        a - b
    } else {
        b - a
    }
}

fn dynkin_verdict(green: Option<&CriterionRow>, kato: Verdict) -> Verdict {
    if kato == Verdict::In {
        return Verdict::In;
    }
    let Some(row) = green else { return Verdict::Undecided };
    if row.samples.is_empty() {
        return row.verdict.unwrap_or(Verdict::Undecided);
    }
    if row.samples.iter().all(|(_, e)| e.diverged) {
        return Verdict::Out;
    }
    match row.limit.map(|l| l.verdict) {
        Some(LimitVerdict::Bounded) | Some(LimitVerdict::TendsToZero) => Verdict::In,
        _ => Verdict::Undecided,
    }
}

fn agreement_findings(e: &PEntry, nu: f64, beta: f64) -> Vec<String> {
    let mut out = Vec::new();
    let Some(reference) = e.criterion_verdict(Criterion::Green) else { return out };
    for c in Criterion::ALL.iter().skip(1) {
        let Some(v) = e.criterion_verdict(*c) else { continue };
        if v == reference || v == Verdict::Undecided || reference == Verdict::Undecided {
            continue;
        }
        if nu < beta && c.is_localized_kernel() {
            out.push(format!(
                "p={}: {} is {v} while green is {reference}; expected for nu < beta, where the localized criteria are not equivalent",
                e.p,
                c.name()
            ));
        } else {
            out.push(format!("p={}: {} is {v} while green is {reference}", e.p, c.name()));
        }
    }
    out
}

fn monotonicity_findings(entries: &[PEntry]) -> Vec<String> {
    let mut out = Vec::new();
    for a in entries {
        if a.verdict_k == Verdict::In && a.verdict_d == Verdict::Out {
            out.push(format!("p={}: Kato verdict in but Dynkin verdict out", a.p));
        }
        for b in entries {
            if a.p < b.p && b.verdict_k == Verdict::In && a.verdict_k == Verdict::Out {
                out.push(format!("verdict in at p={} but out at smaller p={}", b.p, a.p));
            }
        }
    }
    out
}

fn unit_ball_sup<'a>(mu: &Measure, g: &RadialFn<'a>, centers: &CenterStrategy) -> Result<FunctionalEstimate> {
    let pts = centers.centers(mu, 1.0)?;
    let opts = IntegrationOptions::default();
    crate::functionals::sup_over_centers(&pts, |x| mu.integrate_over_ball(x, 1.0, g, &opts))
}

/// `sup_x int_{B_1(x)} |f|^q dm` for a density measure `f m`.
pub fn lq_unif_norm(f: &Measure, q: f64, centers: &CenterStrategy) -> Result<FunctionalEstimate> {
    if !(q >= 1.0) {
        return Err(Error::domain("q must be at least 1"));
    }
    unit_ball_sup(&f.powered(q)?, &RadialFn::new(&|_| 1.0), centers)
}

/// `sup_x int_{B_1(x)} |f|^q |x-y|^{-(nu-alpha)} dm`.
pub fn schechter_norm(f: &Measure, nu: f64, alpha: f64, q: f64, centers: &CenterStrategy) -> Result<FunctionalEstimate> {
    if !(q >= 1.0) {
        return Err(Error::domain("q must be at least 1"));
    }
    if nu < alpha && !(q > alpha / nu) {
        return Err(Error::domain("q must exceed alpha/nu when nu < alpha"));
    }
    let h = nu - alpha;
    let g = move |r: f64| powf(r, -h);
    let rf = RadialFn::new(&g).with_hint(h.max(0.0));
    unit_ball_sup(&f.powered(q)?, &rf, centers)
}

/// Whether a finite `L^q_unif` norm implies membership at this `p`.
pub fn lq_sufficient(q: f64, nu: f64, beta: f64, p: f64) -> bool {
    if nu < beta {
        return q >= 1.0;
    }
    let room = nu - p * (nu - beta);
    room > 0.0 && q > nu / room
}

/// Whether a finite weighted norm with exponent `alpha` implies membership.
pub fn schechter_sufficient(q: f64, alpha: f64, nu: f64, beta: f64, p: f64) -> bool {
    let room = nu - p * (nu - beta);
    room > 0.0 && q > alpha / room
}

/// Whether Ahlfors regularity with exponent `eta` implies membership.
pub fn ahlfors_sufficient(eta: f64, nu: f64, beta: f64, p: f64) -> bool {
    eta - p * (nu - beta) > 0.0
}

/// Convenience: the Estimate behind a functional value.
pub fn as_estimate(f: &FunctionalEstimate) -> Estimate {
    if f.diverged {
        Estimate::divergent()
    } else {
        Estimate { value: f.value, stat_error: f.stat_error, quad_error: f.quad_error, diverged: false }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::PI;

    fn grid(f: impl Fn(f64) -> f64) -> Vec<LimitSample> {
        (2..=11).map(|j| {
            let r = powf(2.0, -(j as f64));
            LimitSample::new(r, f(r), 0.0)
        })
        .collect()
    }

    #[test]
    fn limit_examples() {
        let p = LimitParams::default();
        let r = classify_limit(&grid(|r| 2.0 * PI * r * r), &p).unwrap();
        assert_eq!(r.verdict, LimitVerdict::TendsToZero);
        assert!((r.slope - 2.0).abs() < 0.01);
        let r = classify_limit(&grid(|_| 3.0), &p).unwrap();
        assert_eq!(r.verdict, LimitVerdict::Bounded);
        assert!(r.slope.abs() < 1e-9);
        let r = classify_limit(&grid(|r| 5.0 * ln(1.0 / r)), &p).unwrap();
        assert_eq!(r.verdict, LimitVerdict::Diverges);
        assert!(classify_limit(&grid(|r| r)[..5], &p).is_err());
    }

    #[test]
    fn thresholds() {
        assert_eq!(threshold_p_star(3.0, 3.0, 2.0).unwrap(), 3.0);
        assert_eq!(threshold_p_star(2.0, 3.0, 2.0).unwrap(), 2.0);
        assert_eq!(threshold_p_star(1.0, 1.0, 2.0).unwrap(), f64::INFINITY);
        assert!(threshold_p_star(4.0, 3.0, 2.0).is_err());
    }

    #[test]
    fn lq_and_schechter() {
        let one = Measure::lebesgue(3);
        let c = CenterStrategy::points(alloc::vec![alloc::vec![0.0; 3]]);
        let n = lq_unif_norm(&one, 2.0, &c).unwrap();
        assert!((n.value - 4.0 * PI / 3.0).abs() < 1e-12);
        let s = schechter_norm(&one, 3.0, 1.0, 1.0, &c).unwrap();
        assert!((s.value - 4.0 * PI).abs() < 1e-6);
        let sing = Measure::radial(3, crate::profile::Profile::Power { c: 1.0, gamma: 1.0 }, alloc::vec![0.0; 3]).unwrap();
        assert!(!lq_unif_norm(&sing, 2.0, &c).unwrap().diverged);
        assert!(lq_unif_norm(&sing, 3.0, &c).unwrap().diverged);
    }
}
