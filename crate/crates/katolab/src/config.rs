//! Run configuration: a TOML file with dotted sections
//! (`kernel.family`, `space.nu`, `measure.variant`, `sweep.p`, ...).

use std::fmt;
use std::path::{Path, PathBuf};

use katolab_core::classification::{ClassificationConfig, Criterion};
use katolab_core::functionals::CenterStrategy;
use katolab_core::kernel::StretchedParams;
use katolab_core::measures::DensityMeasure;
use katolab_core::montecarlo::Process;
use katolab_core::{HeatKernelModel, Measure, Profile, SpaceModel};
use serde::Deserialize;

/// A parse or validation failure, located in the source file when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.path.display(), l, self.message),
            None => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: String,
    pub c: Option<f64>,
    pub gamma: Option<f64>,
    pub k: Option<f64>,
    pub rate: Option<f64>,
    pub shape: Option<f64>,
    pub cap: Option<f64>,
    pub a: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub values: Option<Vec<f64>>,
    /// Two-column CSV `r,value`, relative to the config file.
    pub file: Option<PathBuf>,
    pub truncate: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelBlock {
    pub family: String,
    pub alpha: Option<f64>,
    pub mass: Option<f64>,
    pub d_f: Option<f64>,
    pub d_w: Option<f64>,
    pub d_j: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub c4: Option<f64>,
    pub profile: Option<ProfileSpec>,
    pub phi_lower: Option<ProfileSpec>,
    pub phi_upper: Option<ProfileSpec>,
    pub rel_tol: Option<f64>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceBlock {
    pub ambient_dim: Option<usize>,
    pub nu: Option<f64>,
    pub beta: Option<f64>,
    pub t0: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureBlock {
    pub variant: String,
    pub points: Option<Vec<Vec<f64>>>,
    pub weights: Option<Vec<f64>>,
    pub center: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub mass: Option<f64>,
    pub profile: Option<ProfileSpec>,
    pub eta: Option<f64>,
    pub c_lower: Option<f64>,
    pub c_upper: Option<f64>,
    pub r0: Option<f64>,
    pub shape: Option<String>,
    pub value: Option<f64>,
    pub width: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub p: Option<Vec<f64>>,
    pub grid_depth: Option<usize>,
    pub radii: Option<Vec<f64>>,
    pub times: Option<Vec<f64>>,
    pub alphas: Option<Vec<f64>>,
    pub resolvent_alphas: Option<Vec<f64>>,
    pub heat_times: Option<Vec<f64>>,
    pub centers: Option<usize>,
    pub center_points: Option<Vec<Vec<f64>>>,
    pub adapted: Option<bool>,
    pub seed: Option<u64>,
    pub criteria: Option<Vec<String>>,
    pub band: Option<f64>,
    pub slope_cut: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBlock {
    pub process: Option<String>,
    pub alpha: Option<f64>,
    pub paths: Option<usize>,
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
    pub starts: Option<Vec<Vec<f64>>>,
    pub potentials: Option<Vec<String>>,
    pub richardson: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kernel: KernelBlock,
    #[serde(default)]
    space: SpaceBlock,
    measure: MeasureBlock,
    #[serde(default)]
    sweep: SweepBlock,
    #[serde(default)]
    output: OutputBlock,
    #[serde(default)]
    mc: McBlock,
}

/// A parsed configuration with its source kept for line diagnostics.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub path: PathBuf,
    source: String,
    pub kernel: KernelBlock,
    pub space: SpaceBlock,
    pub measure: MeasureBlock,
    pub sweep: SweepBlock,
    pub output: OutputBlock,
    pub mc: McBlock,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub p: Option<Vec<f64>>,
    pub grid_depth: Option<usize>,
    pub centers: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| ConfigError { path: path.to_path_buf(), line: None, message: e.to_string() })?;
        Self::parse(path, &source)
    }

    pub fn parse(path: &Path, source: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(source).map_err(|e| ConfigError {
            path: path.to_path_buf(),
            line: e.span().map(|s| line_at(source, s.start)),
            message: e.message().trim().to_string(),
        })?;
        let cfg = RunConfig {
            path: path.to_path_buf(),
            source: source.to_string(),
            kernel: raw.kernel,
            space: raw.space,
            measure: raw.measure,
            sweep: raw.sweep,
            output: raw.output,
            mc: raw.mc,
        };
        cfg.model()?;
        cfg.measure()?;
        cfg.classification(&Overrides::default())?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.sweep.seed = Some(s);
        }
        if let Some(p) = &o.p {
            self.sweep.p = Some(p.clone());
        }
        if let Some(n) = o.grid_depth {
            self.sweep.grid_depth = Some(n);
        }
        if let Some(n) = o.centers {
            self.sweep.centers = Some(n);
        }
    }

    /// An error pointing at the line that sets `key` (a dotted path).
    pub fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError { path: self.path.clone(), line: find_key(&self.source, key), message: format!("{key}: {}", message.into()) }
    }

    fn base_dir(&self) -> PathBuf {
        self.path.parent().map(Path::to_path_buf).unwrap_or_default()
    }

    pub fn seed(&self) -> u64 {
        self.sweep.seed.unwrap_or(0)
    }

    pub fn ps(&self) -> Vec<f64> {
        self.sweep.p.clone().unwrap_or_else(|| vec![1.0, 2.0])
    }

    pub fn output_dir(&self) -> PathBuf {
        match &self.output.dir {
            Some(d) if d.is_absolute() => d.clone(),
            Some(d) => self.base_dir().join(d),
            None => PathBuf::from("katolab-out"),
        }
    }

    pub fn dim(&self) -> Result<usize, ConfigError> {
        match self.space.ambient_dim {
            Some(d) if d >= 1 => Ok(d),
            Some(_) => Err(self.error("space.ambient_dim", "must be at least 1")),
            None => Err(self.error("space.ambient_dim", "is required")),
        }
    }

    fn need(&self, key: &str, v: Option<f64>) -> Result<f64, ConfigError> {
        v.ok_or_else(|| self.error(key, "is required for this variant"))
    }

    pub fn model(&self) -> Result<HeatKernelModel, ConfigError> {
        let k = &self.kernel;
        let d = self.dim()?;
        let core = |e: katolab_core::Error| self.error("kernel.family", e.to_string());
        let mut model = match k.family.as_str() {
            "gaussian" | "brownian" => HeatKernelModel::gaussian(d).map_err(core)?,
            "stable" => {
                let a = self.need("kernel.alpha", k.alpha)?;
                HeatKernelModel::stable(d, a).map_err(|e| self.error("kernel.alpha", e.to_string()))?
            }
            "relativistic" => {
                let a = self.need("kernel.alpha", k.alpha)?;
                let m = self.need("kernel.mass", k.mass)?;
                HeatKernelModel::relativistic(d, a, m).map_err(|e| self.error("kernel.mass", e.to_string()))?
            }
            "stretched" => {
                let params = StretchedParams {
                    d_f: self.need("kernel.d_f", k.d_f)?,
                    d_w: self.need("kernel.d_w", k.d_w)?,
                    d_j: self.need("kernel.d_j", k.d_j)?,
                    c1: self.need("kernel.c1", k.c1)?,
                    c2: self.need("kernel.c2", k.c2)?,
                    c3: self.need("kernel.c3", k.c3)?,
                    c4: self.need("kernel.c4", k.c4)?,
                };
                let t0 = self.space.t0.unwrap_or(1.0);
                HeatKernelModel::stretched_exponential(d, params, t0).map_err(core)?
            }
            "custom" => {
                let nu = self.need("space.nu", self.space.nu)?;
                let beta = self.need("space.beta", self.space.beta)?;
                let space = SpaceModel::new(d, nu, beta).map_err(|e| self.error("space.nu", e.to_string()))?;
                let spec = |key: &str, p: &Option<ProfileSpec>| match p {
                    Some(p) => self.profile(key, p),
                    None => Err(self.error(key, "is required for the custom family")),
                };
                let lower = spec("kernel.phi_lower", &k.phi_lower)?;
                let upper = spec("kernel.phi_upper", &k.phi_upper)?;
                let profile = match &k.profile {
                    Some(p) => self.profile("kernel.profile", p)?,
                    None => upper.clone(),
                };
                let t0 = self.space.t0.unwrap_or(f64::INFINITY);
                HeatKernelModel::custom(space, t0, profile, lower, upper)
                    .map_err(|e| self.error("space.t0", e.to_string()))?
            }
            other => return Err(self.error("kernel.family", format!("unknown family `{other}`"))),
        };
        if k.family != "custom" {
            for (key, given, actual) in
                [("space.nu", self.space.nu, model.nu()), ("space.beta", self.space.beta, model.beta())]
            {
                if let Some(g) = given {
                    if g != actual {
                        return Err(self.error(key, format!("{g} does not match the {} family value {actual}", k.family)));
                    }
                }
            }
        }
        if let Some(tol) = k.rel_tol {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(self.error("kernel.rel_tol", "must lie in ]0,1["));
            }
            let mut q = model.quad;
            q.rel_tol = tol;
            model = model.with_quadrature(q);
        }
        if let Some(g) = k.gamma {
            model.lifetime_gamma = g;
        }
        Ok(model)
    }

    pub fn profile(&self, key: &str, p: &ProfileSpec) -> Result<Profile, ConfigError> {
        let get = |name: &str, v: Option<f64>| v.ok_or_else(|| self.error(&format!("{key}.{name}"), "is required"));
        let c = p.c.unwrap_or(1.0);
        let base = match p.kind.as_str() {
            "constant" => Profile::Constant { c },
            "power" => Profile::Power { c, gamma: get("gamma", p.gamma)? },
            "power_log" => Profile::PowerLog { c, gamma: p.gamma.unwrap_or(0.0), k: get("k", p.k)? },
            "exponential" => Profile::Exponential { c, rate: get("rate", p.rate)?, shape: p.shape.unwrap_or(1.0) },
            "capped_power" => {
                Profile::CappedPower { cap: p.cap.unwrap_or(1.0), a: get("a", p.a)?, k: get("k", p.k)? }
            }
            "tabulated" => {
                let (radii, values) = match (&p.file, &p.radii, &p.values) {
                    (Some(f), None, None) => self.read_table(key, f)?,
                    (None, Some(r), Some(v)) => (r.clone(), v.clone()),
                    _ => return Err(self.error(key, "tabulated profiles need either `file` or both `radii` and `values`")),
                };
                Profile::tabulated(radii, values).map_err(|e| self.error(key, e.to_string()))?
            }
            other => return Err(self.error(&format!("{key}.kind"), format!("unknown profile kind `{other}`"))),
        };
        Ok(match p.truncate {
            Some(r) if r > 0.0 => base.truncated(r),
            Some(_) => return Err(self.error(&format!("{key}.truncate"), "must be positive")),
            None => base,
        })
    }

    fn read_table(&self, key: &str, file: &Path) -> Result<(Vec<f64>, Vec<f64>), ConfigError> {
        let path = self.base_dir().join(file);
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(&path)
            .map_err(|e| self.error(key, format!("{}: {e}", path.display())))?;
        let (mut r, mut v) = (Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| self.error(key, format!("{}: {e}", path.display())))?;
            let num = |j: usize| -> Result<f64, ConfigError> {
                rec.get(j).and_then(|s| s.parse().ok()).ok_or_else(|| {
                    self.error(key, format!("{}:{}: expected two numeric columns", path.display(), i + 1))
                })
            };
            r.push(num(0)?);
            v.push(num(1)?);
        }
        Ok((r, v))
    }

    pub fn measure(&self) -> Result<Measure, ConfigError> {
        let m = &self.measure;
        let d = self.dim()?;
        let core = |key: &'static str| move |e: katolab_core::Error| self.error(key, e.to_string());
        let point = |key: &str, v: &Option<Vec<f64>>| -> Result<Vec<f64>, ConfigError> {
            let p = v.clone().unwrap_or_else(|| vec![0.0; d]);
            if p.len() != d {
                return Err(self.error(key, format!("needs {d} coordinates, got {}", p.len())));
            }
            Ok(p)
        };
        match m.variant.as_str() {
            "lebesgue" => Ok(Measure::lebesgue(d)),
            "zero" | "empty" => Ok(Measure::zero(d)),
            "dirac" => Measure::dirac(point("measure.center", &m.center)?, m.mass.unwrap_or(1.0)).map_err(core("measure.mass")),
            "atoms" => {
                let pts = m.points.clone().ok_or_else(|| self.error("measure.points", "is required for atoms"))?;
                let w = m.weights.clone().unwrap_or_else(|| vec![1.0; pts.len()]);
                if w.len() != pts.len() {
                    return Err(self.error("measure.weights", "needs one weight per point"));
                }
                if let Some(bad) = pts.iter().find(|p| p.len() != d) {
                    return Err(self.error("measure.points", format!("point {bad:?} does not have {d} coordinates")));
                }
                Measure::atoms(d, pts.into_iter().zip(w).collect()).map_err(core("measure.weights"))
            }
            "sphere" => {
                let c = point("measure.center", &m.center)?;
                Measure::sphere(c, m.radius.unwrap_or(1.0), m.mass.unwrap_or(1.0)).map_err(core("measure.radius"))
            }
            "radial" => {
                let spec = m.profile.as_ref().ok_or_else(|| self.error("measure.profile", "is required for radial"))?;
                let profile = self.profile("measure.profile", spec)?;
                Measure::radial(d, profile, point("measure.center", &m.center)?).map_err(core("measure.profile"))
            }
            "ahlfors" => Measure::ahlfors(
                d,
                self.need("measure.eta", m.eta)?,
                m.c_lower.unwrap_or(1.0),
                m.c_upper.unwrap_or(1.0),
                m.r0.unwrap_or(1.0),
            )
            .map_err(core("measure.eta")),
            "density" => {
                let c = point("measure.center", &m.center)?;
                let value = m.value.unwrap_or(1.0);
                let shape = m.shape.as_deref().unwrap_or("ball_indicator");
                let dm = match shape {
                    "ball_indicator" => {
                        let r = m.radius.unwrap_or(1.0);
                        let cc = c.clone();
                        DensityMeasure::new(d, move |y: &[f64]| if dist2(y, &cc) < r * r { value } else { 0.0 }, c, r)
                    }
                    "gaussian_bump" => {
                        let w = m.width.unwrap_or(1.0);
                        let cc = c.clone();
                        DensityMeasure::new(d, move |y: &[f64]| value * (-dist2(y, &cc) / (w * w)).exp(), c, f64::INFINITY)
                            .map(|m| m.with_sup_bound(value))
                    }
                    other => return Err(self.error("measure.shape", format!("unknown density shape `{other}`"))),
                };
                Ok(Measure::Density(dm.map_err(core("measure.shape"))?))
            }
            other => Err(self.error("measure.variant", format!("unknown variant `{other}`"))),
        }
    }

    pub fn classification(&self, o: &Overrides) -> Result<ClassificationConfig, ConfigError> {
        let s = &self.sweep;
        let d = self.dim()?;
        let mut cfg = ClassificationConfig::default();
        if let Some(n) = o.grid_depth.or(s.grid_depth) {
            if n < 6 {
                return Err(self.error("sweep.grid_depth", "must be at least 6"));
            }
            cfg = cfg.with_depth(n);
        }
        let positive = |key: &str, v: &Option<Vec<f64>>, target: &mut Vec<f64>| -> Result<(), ConfigError> {
            if let Some(v) = v {
                if v.is_empty() || v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                    return Err(self.error(key, "must be a nonempty list of positive numbers"));
                }
                *target = v.clone();
            }
            Ok(())
        };
        positive("sweep.radii", &s.radii, &mut cfg.radii)?;
        positive("sweep.times", &s.times, &mut cfg.times)?;
        positive("sweep.alphas", &s.alphas, &mut cfg.alphas)?;
        positive("sweep.resolvent_alphas", &s.resolvent_alphas, &mut cfg.resolvent_alphas)?;
        positive("sweep.heat_times", &s.heat_times, &mut cfg.heat_times)?;
        let grid = s.center_points.clone().unwrap_or_default();
        if let Some(bad) = grid.iter().find(|p| p.len() != d) {
            return Err(self.error("sweep.center_points", format!("center {bad:?} does not have {d} coordinates")));
        }
        let n_qr = o.centers.or(s.centers).unwrap_or(0);
        cfg.centers = CenterStrategy { grid, adapted: s.adapted.unwrap_or(true), ..Default::default() }.with_quasi_random(n_qr);
        if cfg.centers.grid.is_empty() && !cfg.centers.adapted && n_qr == 0 {
            return Err(self.error("sweep.adapted", "the center set is empty"));
        }
        if let Some(names) = &s.criteria {
            cfg.criteria = names
                .iter()
                .map(|n| {
                    Criterion::ALL
                        .into_iter()
                        .find(|c| c.name() == n)
                        .ok_or_else(|| self.error("sweep.criteria", format!("unknown criterion `{n}`")))
                })
                .collect::<Result<_, _>>()?;
        }
        if let Some(b) = s.band {
            cfg.band = b;
        }
        if let Some(c) = s.slope_cut {
            cfg.limit.slope_cut = c;
        }
        cfg.seed = o.seed.or(s.seed).unwrap_or(0);
        let ps = o.p.clone().or_else(|| s.p.clone()).unwrap_or_default();
        if ps.iter().any(|p| !(*p >= 1.0) || !p.is_finite()) {
            return Err(self.error("sweep.p", "every p must be finite and at least 1"));
        }
        Ok(cfg)
    }

    pub fn process(&self) -> Result<Process, ConfigError> {
        match self.mc.process.as_deref().unwrap_or("brownian") {
            "brownian" => Ok(Process::Brownian),
            "stable" => Ok(Process::Stable { alpha: self.need("mc.alpha", self.mc.alpha)? }),
            other => Err(self.error("mc.process", format!("unknown process `{other}`"))),
        }
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn line_at(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

/// Line of the assignment to a dotted key, either written in full or as the
/// remainder inside a `[section]` header.
fn find_key(source: &str, key: &str) -> Option<usize> {
    let mut section = String::new();
    let mut found = None;
    for (i, raw) in source.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(h) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = h.trim().to_string();
            continue;
        }
        let Some((lhs, _)) = line.split_once('=') else { continue };
        let lhs: String = lhs.split('.').map(str::trim).collect::<Vec<_>>().join(".");
        let full = if section.is_empty() { lhs } else { format!("{section}.{lhs}") };
        if full == key {
            found = Some(i + 1);
        } else if found.is_none() && key.starts_with(&format!("{full}.")) {
            found = Some(i + 1);
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_lines_in_both_styles() {
        let src = "kernel.family = \"gaussian\"\n[space]\nambient_dim = 3\n# note\nnu = 3\n";
        assert_eq!(find_key(src, "kernel.family"), Some(1));
        assert_eq!(find_key(src, "space.nu"), Some(5));
        assert_eq!(find_key(src, "measure.variant"), None);
        assert_eq!(line_at(src, 0), 1);
        assert_eq!(line_at(src, src.find("nu =").unwrap()), 5);
    }
}
