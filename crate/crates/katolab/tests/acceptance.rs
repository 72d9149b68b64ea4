//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use katolab::table::{parse_num, parse_opt, read_classify, ClassifyRow};
use katolab_core::classification::{classify_measure, ClassificationConfig, Criterion, Verdict};
use katolab_core::functionals::{green_value, kato_functional, CenterStrategy, GreenKernelSpec};
use katolab_core::kernel::psi;
use katolab_core::rearrangement::{layer_cake_criterion, radial_criterion, DistributionFunction};
use katolab_core::{HeatKernelModel, Measure, Profile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Wall-clock limit for criterion 1.
const CLASSIFY_LIMIT: Duration = Duration::from_secs(120);
/// Relative slope tolerance for criterion 2.
const SLOPE_TOL: f64 = 0.10;
/// Relative error bound for criterion 4.
const RESOLVENT_TOL: f64 = 1e-6;
/// Relative tolerance and lower slack for criterion 5.
const DELTA_TOL: f64 = 0.15;
const DELTA_SLACK: f64 = 0.05;
/// Undecided band around the threshold for criterion 6.
const BAND: f64 = 0.05;
/// Criterion 7: paths, passing cases and wall-clock limit.
const MC_PATHS: usize = 10_000;
const MC_MIN_PASS: usize = 14;
const MC_LIMIT: Duration = Duration::from_secs(60);
/// Criterion 8: allowed variation of the asymptotic ratio.
const PSI_FACTOR: f64 = 2.0;
/// Criterion 9: randomized cases.
const MONO_CASES: usize = 200;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

struct Run {
    code: i32,
    elapsed: Duration,
    stderr: String,
}

fn katolab(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Run {
    let start = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_katolab"))
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("the katolab binary runs");
    Run { code: o.status.code().unwrap_or(-1), elapsed: start.elapsed(), stderr: String::from_utf8_lossy(&o.stderr).into() }
}

fn classify_csv(dir: &Path) -> Vec<ClassifyRow> {
    read_classify(std::fs::File::open(dir.join("classify.csv")).expect("classify.csv exists")).expect("classify.csv parses")
}

/// Verdict of the summary row `name` ("kato" or "dynkin") per p.
fn summary(rows: &[ClassifyRow], name: &str) -> Vec<(f64, String, f64)> {
    rows.iter().filter(|r| r.criterion == name).map(|r| (r.p, r.verdict.clone(), r.value)).collect()
}

/// Verdict per (p, criterion label) from the sample rows.
fn criterion_verdicts(rows: &[ClassifyRow]) -> BTreeMap<(u64, String), String> {
    rows.iter()
        .filter(|r| r.scale.is_some())
        .map(|r| ((r.p.to_bits(), r.criterion.clone()), r.verdict.clone()))
        .collect()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn c1_brownian(tmp: &Path) -> Outcome {
    let out = tmp.join("c1");
    let run = katolab("classify", &configs().join("brownian-d3-lebesgue.cfg"), &out, &["--p", "1,2,2.8,3,3.5"]);
    if run.code != 0 {
        return outcome(false, format!("exit {} {}", run.code, run.stderr.trim()));
    }
    let got: Vec<String> = summary(&classify_csv(&out), "kato").into_iter().map(|(_, v, _)| v).collect();
    let want = ["in", "in", "in", "out", "out"];
    let pass = got == want && run.elapsed < CLASSIFY_LIMIT;
    outcome(pass, format!("p=1,2,2.8,3,3.5 -> {} in {:.1?} (limit {:?})", got.join(","), run.elapsed, CLASSIFY_LIMIT))
}

fn c2_sphere(tmp: &Path) -> Outcome {
    let out = tmp.join("c2");
    let run = katolab("classify", &configs().join("sphere-d3.cfg"), &out, &["--p", "1,1.5,2,2.5,3.5"]);
    if run.code != 0 {
        return outcome(false, format!("exit {} {}", run.code, run.stderr.trim()));
    }
    let s = summary(&classify_csv(&out), "kato");
    let at = |p: f64| s.iter().find(|e| e.0 == p).cloned().expect("p present");
    let (_, v15, slope) = at(1.5);
    let (_, v25, _) = at(2.5);
    let pass = v15 == "in" && v25 == "out" && (slope - 0.5).abs() <= SLOPE_TOL * 0.5;
    outcome(pass, format!("p=1.5 {v15}, p=2.5 {v25}, kato slope at 1.5 = {slope:.4} (target 0.5 +- {:.0}%)", SLOPE_TOL * 100.0))
}

fn c3_agreement(tmp: &Path) -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    // The sphere has eta = 2, so p = 2 sits on the threshold where the
    // Green integral diverges logarithmically: all criteria must say out.
    let expected = [
        ("lebesgue", [(1.0, "in"), (2.0, "in"), (3.5, "out")]),
        ("sphere", [(1.0, "in"), (2.0, "out"), (3.5, "out")]),
    ];
    for (name, dir) in [("lebesgue", tmp.join("c1")), ("sphere", tmp.join("c2"))] {
        let Ok(f) = std::fs::File::open(dir.join("classify.csv")) else {
            return outcome(false, format!("{} missing", dir.display()));
        };
        let verdicts = criterion_verdicts(&read_classify(f).unwrap());
        let want_list = expected.iter().find(|e| e.0 == name).unwrap().1;
        for (p, want) in want_list {
            let rows: Vec<_> = verdicts.iter().filter(|((q, _), _)| *q == f64::to_bits(p)).collect();
            let bad: Vec<_> = rows.iter().filter(|(_, v)| v.as_str() != want).map(|((_, c), v)| format!("{c}={v}")).collect();
            if rows.len() < 5 || !bad.is_empty() {
                pass = false;
                notes.push(format!("{name} p={p}: {} criteria, disagreeing {bad:?}", rows.len()));
            }
        }
    }
    let out = tmp.join("c3");
    let run = katolab("classify", &configs().join("dirac-d1.cfg"), &out, &["--p", "1"]);
    if run.code != 0 {
        return outcome(false, format!("dirac: exit {} {}", run.code, run.stderr.trim()));
    }
    let verdicts = criterion_verdicts(&classify_csv(&out));
    let green_in = verdicts.iter().any(|((_, c), v)| c == "green" && v == "in");
    let localized: Vec<_> = verdicts.iter().filter(|((_, c), _)| c.starts_with("resolvent_local") || c.starts_with("heat_local")).collect();
    let disagree = !localized.is_empty() && localized.iter().all(|(_, v)| v.as_str() == "out");
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap_or_default();
    let documented = report.contains("expected for nu < beta");
    pass &= green_in && disagree && documented;
    notes.push(format!(
        "all criteria agree: lebesgue in,in,out and sphere in,out,out at p=1,2,3.5; dirac d=1: green {} localized {} ({} rows)",
        if green_in { "in" } else { "not in" },
        if disagree { "out" } else { "not all out" },
        localized.len()
    ));
    outcome(pass, notes.join("; "))
}

fn c4_resolvent() -> Outcome {
    let m = HeatKernelModel::gaussian(1).unwrap();
    let mut worst = 0.0f64;
    for alpha in [0.25, 1.0, 4.0, 16.0, 64.0] {
        for rho in [0.0, 0.05, 0.25, 0.5, 1.0] {
            let q = m.resolvent(alpha, &[0.0], &[rho]).unwrap();
            let s = (2.0 * alpha).sqrt();
            let exact = (-s * rho).exp() / s;
            worst = worst.max(((q.value - exact) / exact).abs());
        }
    }
    outcome(worst <= RESOLVENT_TOL, format!("max relative error {worst:.2e} on 5x5 grid (limit {RESOLVENT_TOL:.0e})"))
}

fn c5_delta(tmp: &Path) -> Outcome {
    let out = tmp.join("c5");
    let run = katolab("sweep-p", &configs().join("brownian-d3-lebesgue.cfg"), &out, &["--p", "1,1.5,2"]);
    if run.code != 0 {
        return outcome(false, format!("exit {} {}", run.code, run.stderr.trim()));
    }
    let mut rd = csv::Reader::from_path(out.join("sweep_p.csv")).unwrap();
    let mut pass = true;
    let mut notes = Vec::new();
    for rec in rd.records() {
        let rec = rec.unwrap();
        let p = parse_num(&rec[0]).unwrap();
        let bound = parse_num(&rec[4]).unwrap();
        let exact = (3.0 - p) / (2.0 * p);
        match parse_opt(&rec[1]).unwrap() {
            Some(d) => {
                let ok = (d - exact).abs() <= DELTA_TOL * exact && d >= bound - DELTA_SLACK;
                pass &= ok;
                notes.push(format!("p={p}: {d:.4} vs {exact:.4} (bound {bound:.4})"));
            }
            None => {
                pass = false;
                notes.push(format!("p={p}: no fit"));
            }
        }
    }
    outcome(pass && notes.len() == 3, notes.join(", "))
}

fn c6_ahlfors(tmp: &Path) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for eta in [1.0, 2.0, 3.0] {
        let offsets = [-0.5, -0.25, -0.1, -0.06, -0.04, 0.04, 0.06, 0.1, 0.25, 0.5];
        let ps: Vec<f64> = offsets.iter().map(|o| eta + o).filter(|p| *p >= 1.0).collect();
        let list = ps.iter().map(|p| format!("{p}")).collect::<Vec<_>>().join(", ");
        let body = format!(
            "kernel.family = \"gaussian\"\nspace.ambient_dim = 3\nmeasure.variant = \"ahlfors\"\nmeasure.eta = {eta}\n\
             measure.c_lower = 1\nmeasure.c_upper = 2\nmeasure.r0 = 1\nsweep.p = [{list}]\nsweep.criteria = [\"green\"]\n"
        );
        let cfg = write_config(tmp, &format!("ahlfors-{eta}.cfg"), &body);
        let out = tmp.join(format!("c6-{eta}"));
        let run = katolab("classify", &cfg, &out, &[]);
        if run.code != 0 && run.code != 2 {
            return outcome(false, format!("eta={eta}: exit {} {}", run.code, run.stderr.trim()));
        }
        let mut wrong = Vec::new();
        let mut undecided = 0;
        for (p, v, _) in summary(&classify_csv(&out), "kato") {
            let want = if p < eta { "in" } else { "out" };
            if (p - eta).abs() < BAND {
                if v == "undecided" {
                    undecided += 1;
                } else if v != want {
                    wrong.push(format!("p={p}:{v}"));
                }
            } else if v != want {
                wrong.push(format!("p={p}:{v}"));
            }
        }
        pass &= wrong.is_empty();
        notes.push(format!("eta={eta}: {} wrong, {undecided} undecided in band", wrong.len()));
        if !wrong.is_empty() {
            notes.push(format!("{wrong:?}"));
        }
    }
    outcome(pass, notes.join("; "))
}

fn c7_mc(tmp: &Path) -> Outcome {
    let out = tmp.join("c7");
    let run = katolab("mc-check", &configs().join("mc-brownian-d1.cfg"), &out, &[]);
    if run.code != 0 {
        return outcome(false, format!("exit {} {}", run.code, run.stderr.trim()));
    }
    let mut rd = csv::Reader::from_path(out.join("mc_check.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    let passed = rows.iter().filter(|r| &r[5] == "true").count();
    let pass = rows.len() == 15 && passed >= MC_MIN_PASS && run.elapsed < MC_LIMIT;
    outcome(
        pass,
        format!("{passed}/{} within 3 SE, {MC_PATHS} paths, {:.1?} (limit {:?})", rows.len(), run.elapsed, MC_LIMIT),
    )
}

fn c8_psi() -> Outcome {
    let origin = psi(3, 1.0, 0.0).unwrap();
    let mut monotone = true;
    let mut prev = f64::INFINITY;
    for i in 0..=5000 {
        let v = psi(3, 1.0, 0.01 * i as f64).unwrap();
        monotone &= v <= prev;
        prev = v;
    }
    let ratios: Vec<f64> = (0..=450)
        .map(|i| {
            let r = 5.0 + 0.1 * i as f64;
            psi(3, 1.0, r).unwrap() / ((-r).exp() * (1.0 + r.powf(1.5)))
        })
        .collect();
    let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let pass = origin == 1.0 && monotone && hi / lo < PSI_FACTOR;
    outcome(pass, format!("psi(0) = {origin}, decreasing on [0,50]: {monotone}, ratio spread {:.3} on [5,50]", hi / lo))
}

fn random_measure(rng: &mut ChaCha8Rng) -> (String, Measure) {
    match rng.random_range(0..5) {
        0 => ("lebesgue".into(), Measure::lebesgue(3)),
        1 => {
            let r = rng.random_range(0.2..2.0);
            (format!("sphere R={r:.3}"), Measure::sphere(vec![0.0; 3], r, 1.0).unwrap())
        }
        2 => {
            let g = rng.random_range(0.0..2.5);
            let p = Profile::Power { c: 1.0, gamma: g }.truncated(1.0);
            (format!("radial gamma={g:.3}"), Measure::radial(3, p, vec![0.0; 3]).unwrap())
        }
        3 => {
            let n = rng.random_range(1..4);
            let atoms = (0..n)
                .map(|_| ((0..3).map(|_| rng.random_range(-1.0..1.0)).collect(), rng.random_range(0.1..2.0)))
                .collect();
            (format!("{n} atoms"), Measure::atoms(3, atoms).unwrap())
        }
        _ => {
            let eta = rng.random_range(0.5..3.0);
            (format!("ahlfors eta={eta:.3}"), Measure::ahlfors(3, eta, 1.0, 2.0, 1.0).unwrap())
        }
    }
}

fn c9_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d6f6e6f);
    let spec = GreenKernelSpec::new(3.0, 2.0).unwrap();
    let model = HeatKernelModel::gaussian(3).unwrap();
    let cfg = ClassificationConfig { criteria: vec![Criterion::Green], ..Default::default() };
    let centers = CenterStrategy::adapted();
    let mut violations = Vec::new();
    for case in 0..MONO_CASES {
        let (name, mu) = random_measure(&mut rng);
        let p1 = rng.random_range(1.0..4.0);
        let p2 = p1 + rng.random_range(0.0..1.5);
        let r = rng.random_range(0.01..0.3);
        let a = kato_functional(&mu, &spec, p1, r, &centers).unwrap();
        let b = kato_functional(&mu, &spec, p2, r, &centers).unwrap();
        if !b.diverged {
            let scale = green_value(&spec, r).unwrap().powf(p2 - p1);
            if a.diverged || a.value > b.value / scale + a.total_error() + b.total_error() / scale {
                violations.push(format!("case {case} ({name}, p1={p1:.3}, p2={p2:.3}, r={r:.3}): inequality"));
            }
        }
        let rep = classify_measure(&mu, &model, &[p1, p2], &cfg).unwrap();
        for e in &rep.entries {
            if e.verdict_k == Verdict::In && e.verdict_d != Verdict::In {
                violations.push(format!("case {case} ({name}, p={:.3}): kato in but dynkin {}", e.p, e.verdict_d));
            }
        }
        if rep.entries[1].verdict_k == Verdict::In && rep.entries[0].verdict_k == Verdict::Out {
            violations.push(format!("case {case} ({name}): in at p2={p2:.3} but out at p1={p1:.3}"));
        }
    }
    let detail = if violations.is_empty() {
        format!("{MONO_CASES} randomized cases, 0 violations")
    } else {
        format!("{} violations: {}", violations.len(), violations.join("; "))
    };
    outcome(violations.is_empty(), detail)
}

fn c10_rearrangement(tmp: &Path) -> Outcome {
    let mut cases: Vec<(f64, f64)> = Vec::new();
    for g in [0.0, 0.5, 1.0, 1.5, 1.9, 2.1, 2.5, 3.0] {
        cases.push((g, 0.0));
    }
    cases.extend([(0.5, 1.0), (1.0, 1.0), (1.5, 1.0), (2.5, 1.0), (1.0, -1.0), (1.5, -1.0), (2.5, -1.0)]);
    for k in [-3.0, -2.0, 0.0, 1.0, 2.0] {
        cases.push((2.0, k));
    }
    let mut disagreements = Vec::new();
    let mut unsound = Vec::new();
    let mut finite = 0;
    for (gamma, k) in &cases {
        let f = Profile::PowerLog { c: 1.0, gamma: *gamma, k: *k }.truncated(0.1);
        let r = radial_criterion(&f, 3, 2.0, 1.0, 0.5).unwrap();
        let l = layer_cake_criterion(&DistributionFunction::radial(&f, 3).unwrap(), 3, 2.0, 1.0, 4.0).unwrap();
        if r.finite != l.finite {
            disagreements.push(format!("gamma={gamma} k={k}"));
        }
        if !l.finite {
            continue;
        }
        finite += 1;
        let body = format!(
            "kernel.family = \"gaussian\"\nspace.ambient_dim = 3\nmeasure.variant = \"radial\"\nmeasure.center = [0, 0, 0]\n\
             measure.profile = {{ kind = \"power_log\", c = 1.0, gamma = {gamma:?}, k = {k:?}, truncate = 0.1 }}\nsweep.p = [1]\n"
        );
        let cfg = write_config(tmp, &format!("pl-{gamma}-{k}.cfg"), &body);
        let out = tmp.join(format!("c10-{gamma}-{k}"));
        let run = katolab("classify", &cfg, &out, &[]);
        if run.code == 1 {
            unsound.push(format!("gamma={gamma} k={k}: {}", run.stderr.trim()));
            continue;
        }
        let v = summary(&classify_csv(&out), "kato")[0].1.clone();
        if v == "out" {
            unsound.push(format!("gamma={gamma} k={k}: out"));
        }
    }
    let pass = cases.len() == 20 && disagreements.is_empty() && unsound.is_empty();
    outcome(
        pass,
        format!(
            "{} profiles, {} finiteness disagreements {disagreements:?}; {finite} finite-flag cases, {} classified out {unsound:?}",
            cases.len(),
            disagreements.len(),
            unsound.len()
        ),
    )
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("brownian/lebesgue threshold d=3", Box::new(|| c1_brownian(t))),
        ("sphere threshold d=3 and slope", Box::new(|| c2_sphere(t))),
        ("criteria agreement and nu<beta disagreement", Box::new(|| c3_agreement(t))),
        ("gaussian d=1 resolvent closed form", Box::new(c4_resolvent)),
        ("decay order delta scaling", Box::new(|| c5_delta(t))),
        ("ahlfors threshold at p*=eta", Box::new(|| c6_ahlfors(t))),
        ("monte carlo vs quadrature", Box::new(|| c7_mc(t))),
        ("relativistic psi", Box::new(c8_psi)),
        ("monotonicity property suites", Box::new(c9_monotonicity)),
        ("rearrangement consistency and soundness", Box::new(|| c10_rearrangement(t))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
