//! CSV schemas. Numbers are written with 17 significant digits so that
//! parsing a file back yields the same `f64` bits.

use std::io::{Read, Write};

use anyhow::{anyhow, Context, Result};
use katolab_core::classification::{ClassificationReport, Verdict};

pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

pub fn parse_num(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| anyhow!("not a number: `{s}`"))
}

pub fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s.trim().is_empty() {
        Ok(None)
    } else {
        parse_num(s).map(Some)
    }
}

/// Bit equality, with every NaN equal to every other.
fn same(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
}

/// One line of the classification CSV. Sample rows carry the functional at
/// one scale; the summary rows `kato`, `dynkin` and `delta_hat` leave
/// `scale` empty.
#[derive(Debug, Clone)]
pub struct ClassifyRow {
    pub p: f64,
    pub criterion: String,
    pub scale: Option<f64>,
    pub value: f64,
    pub stat_error: f64,
    pub verdict: String,
}

impl PartialEq for ClassifyRow {
    fn eq(&self, o: &Self) -> bool {
        same(self.p, o.p)
            && self.criterion == o.criterion
            && match (self.scale, o.scale) {
                (Some(a), Some(b)) => same(a, b),
                (a, b) => a.is_none() && b.is_none(),
            }
            && same(self.value, o.value)
            && same(self.stat_error, o.stat_error)
            && self.verdict == o.verdict
    }
}

pub const CLASSIFY_HEADER: [&str; 6] = ["p", "criterion", "scale", "value", "stat_error", "verdict"];

pub fn classify_rows(rep: &ClassificationReport) -> Vec<ClassifyRow> {
    let mut out = Vec::new();
    for e in &rep.entries {
        for row in &e.criteria {
            let verdict = row.verdict.map_or("none", |v| v.as_str()).to_string();
            for (scale, est) in &row.samples {
                let value = if est.diverged { f64::INFINITY } else { est.value };
                out.push(ClassifyRow {
                    p: e.p,
                    criterion: row.label(),
                    scale: Some(*scale),
                    value,
                    stat_error: est.stat_error,
                    verdict: verdict.clone(),
                });
            }
        }
        let summary = |name: &str, value: f64, err: f64, v: Verdict| ClassifyRow {
            p: e.p,
            criterion: name.to_string(),
            scale: None,
            value,
            stat_error: err,
            verdict: v.as_str().to_string(),
        };
        out.push(summary("kato", e.fitted_slope, e.slope_ci, e.verdict_k));
        out.push(summary("dynkin", e.fitted_slope, e.slope_ci, e.verdict_d));
        if let Some(d) = e.delta_hat {
            out.push(summary("delta_hat", d.delta, 0.5 * (d.ci_hi - d.ci_lo), e.verdict_k));
        }
    }
    out
}

pub fn write_classify<W: Write>(w: W, rows: &[ClassifyRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CLASSIFY_HEADER)?;
    for r in rows {
        wr.write_record([
            fmt_num(r.p),
            r.criterion.clone(),
            fmt_opt(r.scale),
            fmt_num(r.value),
            fmt_num(r.stat_error),
            r.verdict.clone(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_classify<R: Read>(r: R) -> Result<Vec<ClassifyRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != CLASSIFY_HEADER {
        return Err(anyhow!("unexpected header {header:?}"));
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let f = |j: usize| rec.get(j).unwrap_or("");
        let row = (|| -> Result<ClassifyRow> {
            Ok(ClassifyRow {
                p: parse_num(f(0))?,
                criterion: f(1).to_string(),
                scale: parse_opt(f(2))?,
                value: parse_num(f(3))?,
                stat_error: parse_num(f(4))?,
                verdict: f(5).to_string(),
            })
        })()
        .with_context(|| format!("row {}", i + 2))?;
        out.push(row);
    }
    Ok(out)
}

/// Writes a header and rows of preformatted cells.
pub fn write_plain<W: Write>(w: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header)?;
    for r in rows {
        wr.write_record(r)?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::INFINITY, f64::MIN_POSITIVE, 5e-324] {
            assert_eq!(parse_num(&fmt_num(x)).unwrap().to_bits(), x.to_bits());
        }
        assert!(parse_num(&fmt_num(f64::NAN)).unwrap().is_nan());
        assert_eq!(parse_opt("").unwrap(), None);
    }
}
