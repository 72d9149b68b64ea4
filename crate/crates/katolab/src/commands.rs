//! The four subcommands. Each writes its files into the output directory,
//! prints a summary to stdout and returns the process exit code.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use katolab_core::classification::{classify_measure, delta_bound, ClassificationReport, Criterion};
use katolab_core::functionals::{semigroup_functional, CenterStrategy};
use katolab_core::kernel::invariants::check_invariants;
use katolab_core::measures::DensityMeasure;
use katolab_core::montecarlo::{expected_additive_functional, McOptions, PathConfig, Process};
use katolab_core::{KernelFamily, Measure, Profile};

use crate::config::{Overrides, RunConfig};
use crate::report::write_report;
use crate::table::{classify_rows, fmt_num, fmt_opt, write_classify, write_plain};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNDECIDED: i32 = 2;

/// Loads the config, applies the overrides and resolves the output directory.
pub fn prepare(config: &Path, out: Option<&Path>, o: &Overrides) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = RunConfig::load(config)?;
    cfg.apply(o);
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir());
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok((cfg, dir))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

pub fn run_classification(cfg: &RunConfig, o: &Overrides) -> Result<ClassificationReport> {
    let model = cfg.model()?;
    let mu = cfg.measure()?;
    let ccfg = cfg.classification(o)?;
    Ok(classify_measure(&mu, &model, &cfg.ps(), &ccfg)?)
}

pub fn cmd_classify(cfg: &RunConfig, dir: &Path, o: &Overrides) -> Result<i32> {
    let rep = run_classification(cfg, o)?;
    let mut w = create(&dir.join("report.txt"))?;
    write_report(&mut w, &rep, &cfg.path)?;
    w.flush()?;
    let w = create(&dir.join("classify.csv"))?;
    write_classify(w, &classify_rows(&rep))?;

    println!("{:>8}  {:>9}  {:>9}  {:>12}  {:>8}", "p", "kato", "dynkin", "slope", "p*");
    for e in &rep.entries {
        println!(
            "{:>8}  {:>9}  {:>9}  {:>12.5}  {:>8.4}",
            e.p,
            e.verdict_k.as_str(),
            e.verdict_d.as_str(),
            e.fitted_slope,
            e.p_star
        );
    }
    for f in &rep.findings {
        println!("finding: {f}");
    }
    println!("wrote {}", dir.display());
    Ok(if rep.all_undecided() { EXIT_UNDECIDED } else { EXIT_OK })
}

pub const SWEEP_HEADER: [&str; 5] = ["p", "delta_hat", "ci_lo", "ci_hi", "bound"];

pub fn cmd_sweep_p(cfg: &RunConfig, dir: &Path, o: &Overrides) -> Result<i32> {
    let model = cfg.model()?;
    let mu = cfg.measure()?;
    let mut ccfg = cfg.classification(o)?;
    ccfg.criteria = vec![Criterion::GlobalSemigroup];
    let rep = classify_measure(&mu, &model, &cfg.ps(), &ccfg)?;
    let eta = rep.eta.unwrap_or(rep.nu);
    let mut rows = Vec::new();
    println!("{:>8}  {:>10}  {:>10}  {:>10}  {:>10}", "p", "delta_hat", "ci_lo", "ci_hi", "bound");
    for e in &rep.entries {
        let bound = delta_bound(eta, rep.nu, rep.beta, e.p);
        let d = e.delta_hat;
        rows.push(vec![
            fmt_num(e.p),
            fmt_opt(d.map(|d| d.delta)),
            fmt_opt(d.map(|d| d.ci_lo)),
            fmt_opt(d.map(|d| d.ci_hi)),
            fmt_num(bound),
        ]);
        match d {
            Some(d) => println!("{:>8}  {:>10.5}  {:>10.5}  {:>10.5}  {:>10.5}", e.p, d.delta, d.ci_lo, d.ci_hi, bound),
            None => println!("{:>8}  {:>10}  {:>10}  {:>10}  {:>10.5}", e.p, "diverged", "", "", bound),
        }
    }
    write_plain(create(&dir.join("sweep_p.csv"))?, &SWEEP_HEADER, &rows)?;
    Ok(EXIT_OK)
}

pub const KERNEL_HEADER: [&str; 4] = ["invariant", "samples", "failures", "pass"];

/// Exit code 2 when any invariant row fails.
pub fn cmd_kernel_check(cfg: &RunConfig, dir: &Path, o: &Overrides) -> Result<i32> {
    let model = cfg.model()?;
    let seed = o.seed.unwrap_or_else(|| cfg.seed());
    let table = check_invariants(&model, seed, 500);
    let mut rows = Vec::new();
    for r in &table {
        println!("{:<52} {:>6} {:>6}  {}", r.invariant, r.samples, r.failures, if r.passed() { "pass" } else { "FAIL" });
        rows.push(vec![r.invariant.clone(), r.samples.to_string(), r.failures.to_string(), r.passed().to_string()]);
    }
    write_plain(create(&dir.join("kernel_check.csv"))?, &KERNEL_HEADER, &rows)?;
    Ok(if table.iter().all(|r| r.passed()) { EXIT_OK } else { EXIT_UNDECIDED })
}

pub type Potential = (&'static str, Box<dyn Fn(&[f64]) -> f64 + Send + Sync>, Measure);

/// Test potentials `V` together with the measure `V dx`.
pub fn potential(name: &str, dim: usize) -> Result<Potential> {
    let mut c = vec![0.0; dim];
    c[0] = 0.5;
    let dist = move |y: &[f64], c: &[f64]| y.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let origin = vec![0.0; dim];
    Ok(match name {
        "one" => ("one", Box::new(|_: &[f64]| 1.0), Measure::lebesgue(dim)),
        "indicator" => {
            let cc = c.clone();
            let f = move |y: &[f64]| if dist(y, &cc) <= 0.5 { 1.0 } else { 0.0 };
            let g = f.clone();
            ("indicator", Box::new(f), Measure::Density(DensityMeasure::new(dim, g, c, 0.5)?))
        }
        "gaussian" => (
            "gaussian",
            Box::new(|y: &[f64]| (-y.iter().map(|v| v * v).sum::<f64>()).exp()),
            Measure::radial(dim, Profile::Exponential { c: 1.0, rate: 1.0, shape: 2.0 }, origin)?,
        ),
        "cauchy" => (
            "cauchy",
            Box::new(|y: &[f64]| 1.0 / (1.0 + y.iter().map(|v| v * v).sum::<f64>())),
            Measure::radial(dim, Profile::custom(|r| 1.0 / (1.0 + r * r)), origin)?,
        ),
        "triangle" => {
            let cc = c.clone();
            let f = move |y: &[f64]| (1.0 - dist(y, &cc)).max(0.0);
            let g = f.clone();
            ("triangle", Box::new(f), Measure::Density(DensityMeasure::new(dim, g, c, 1.0)?))
        }
        other => return Err(anyhow!("unknown potential `{other}`")),
    })
}

pub const POTENTIALS: [&str; 5] = ["one", "indicator", "gaussian", "cauchy", "triangle"];

pub const MC_HEADER: [&str; 6] = ["potential", "x0", "mc", "se", "quadrature", "pass"];

#[derive(Debug, Clone, PartialEq)]
pub struct McRow {
    pub potential: String,
    pub x0: Vec<f64>,
    pub mc: f64,
    pub se: f64,
    pub quadrature: f64,
    pub quad_error: f64,
    pub pass: bool,
}

/// Compares `E_x int_0^t V(X_s) ds` from paths with the quadrature of
/// `int_0^t P_s V(x) ds`; a case passes within 3 standard errors plus the
/// quadrature error.
pub fn mc_rows(cfg: &RunConfig, seed: u64) -> Result<Vec<McRow>> {
    let model = cfg.model()?;
    let process = cfg.process()?;
    if !matches!((&model.family, process), (KernelFamily::Gaussian, Process::Brownian)) {
        return Err(cfg.error("mc.process", "the comparison needs kernel.family = \"gaussian\" with Brownian paths").into());
    }
    let d = model.dim();
    let horizon = cfg.mc.horizon.unwrap_or(1.0);
    let n_paths = cfg.mc.paths.unwrap_or(10_000);
    let starts: Vec<Vec<f64>> = match &cfg.mc.starts {
        Some(s) => s.clone(),
        None => [0.0, 0.5, 2.0].iter().map(|s| {
            let mut x = vec![0.0; d];
            x[0] = *s;
            x
        }).collect(),
    };
    if let Some(bad) = starts.iter().find(|x| x.len() != d) {
        return Err(cfg.error("mc.starts", format!("start {bad:?} does not have {d} coordinates")).into());
    }
    let names: Vec<String> =
        cfg.mc.potentials.clone().unwrap_or_else(|| POTENTIALS.iter().map(|s| s.to_string()).collect());
    let opts = McOptions { richardson: cfg.mc.richardson.unwrap_or(true), ..Default::default() };
    let mut rows = Vec::new();
    for name in &names {
        let (label, v, mu) = potential(name, d).map_err(|e| cfg.error("mc.potentials", e.to_string()))?;
        for x0 in &starts {
            let q = semigroup_functional(&mu, &model, 1.0, horizon, &CenterStrategy::points(vec![x0.clone()]), None)?;
            let mut pc = PathConfig::new(process, x0.clone(), horizon, n_paths, seed);
            if let Some(dt) = cfg.mc.dt {
                pc.dt = dt;
            }
            let e = expected_additive_functional(&pc, &v, &opts)?;
            let pass = (e.mean - q.value).abs() <= 3.0 * e.std_error + q.total_error();
            rows.push(McRow {
                potential: label.to_string(),
                x0: x0.clone(),
                mc: e.mean,
                se: e.std_error,
                quadrature: q.value,
                quad_error: q.total_error(),
                pass,
            });
        }
    }
    Ok(rows)
}

pub fn cmd_mc_check(cfg: &RunConfig, dir: &Path, o: &Overrides) -> Result<i32> {
    let rows = mc_rows(cfg, o.seed.unwrap_or_else(|| cfg.seed()))?;
    let mut out = Vec::new();
    println!("{:<10} {:>16} {:>12} {:>10} {:>12}  pass", "potential", "x0", "mc", "se", "quadrature");
    for r in &rows {
        let x0 = r.x0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        println!("{:<10} {:>16} {:>12.6} {:>10.2e} {:>12.6}  {}", r.potential, x0, r.mc, r.se, r.quadrature, r.pass);
        out.push(vec![
            r.potential.clone(),
            r.x0.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(" "),
            fmt_num(r.mc),
            fmt_num(r.se),
            fmt_num(r.quadrature),
            r.pass.to_string(),
        ]);
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    println!("{passed}/{} cases within 3 standard errors", rows.len());
    write_plain(create(&dir.join("mc_check.csv"))?, &MC_HEADER, &out)?;
    Ok(EXIT_OK)
}
