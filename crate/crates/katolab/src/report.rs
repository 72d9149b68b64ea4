//! Structured text report for `classify`.

use std::io::Write;
use std::path::Path;

use anyhow::Result;
use katolab_core::classification::ClassificationReport;

fn list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(", ")
}

pub fn write_report<W: Write>(w: &mut W, rep: &ClassificationReport, config: &Path) -> Result<()> {
    writeln!(w, "config = {}", config.display())?;
    writeln!(w, "family = {}", rep.family)?;
    writeln!(w, "nu = {}", rep.nu)?;
    writeln!(w, "beta = {}", rep.beta)?;
    match rep.eta {
        Some(e) => writeln!(w, "eta = {e}")?,
        None => writeln!(w, "eta = unknown")?,
    }
    let pv = &rep.provenance;
    writeln!(w, "seed = {}", pv.seed)?;
    writeln!(w, "centers = {}", pv.n_centers)?;
    writeln!(w, "radii = [{}]", list(&pv.radii))?;
    writeln!(w, "times = [{}]", list(&pv.times))?;
    writeln!(w, "alphas = [{}]", list(&pv.alphas))?;
    for e in &rep.entries {
        writeln!(w)?;
        writeln!(w, "[p = {}]", e.p)?;
        writeln!(w, "kato = {}", e.verdict_k)?;
        writeln!(w, "dynkin = {}", e.verdict_d)?;
        writeln!(w, "p_star = {}", e.p_star)?;
        writeln!(w, "fitted_slope = {} +- {}", e.fitted_slope, e.slope_ci)?;
        match e.delta_hat {
            Some(d) => writeln!(w, "delta_hat = {} [{}, {}]", d.delta, d.ci_lo, d.ci_hi)?,
            None => writeln!(w, "delta_hat = none")?,
        }
        for row in &e.criteria {
            let verdict = row.verdict.map_or("none", |v| v.as_str());
            write!(w, "criterion {} = {}", row.label(), verdict)?;
            if let Some(l) = row.limit {
                write!(w, " (slope {:.4} +- {:.4}, ratio {:.4})", l.slope, l.ci, l.ratio)?;
            }
            if let Some(n) = &row.note {
                write!(w, " ; {n}")?;
            }
            writeln!(w)?;
        }
    }
    writeln!(w)?;
    writeln!(w, "[findings]")?;
    for f in &rep.findings {
        writeln!(w, "- {f}")?;
    }
    Ok(())
}
