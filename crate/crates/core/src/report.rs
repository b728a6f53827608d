//! Stability reports and tabular output for analysis and parameter scans.

use std::fmt;
use std::io::{self, Write};

use crate::csv::{self, Cell};
use crate::kinetics::{linearize, KineticsError, Linearization, ReactionSystem};
use crate::linear_analysis::{
    classify_sign_pattern, growing_mode_summary, has_turing_instability, rest_state_stable, AnalysisError,
    DispersionRow, GrowingModeSummary, SignPattern, TuringWitness,
};

/// Everything the linear analysis says about one model.
#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub model: String,
    pub dim: usize,
    pub steady_state: (f64, f64),
    pub lin: Linearization,
    pub rest_stable: bool,
    pub sign: SignPattern,
    pub turing: Result<TuringWitness, AnalysisError>,
    /// Present when the model is Turing-unstable.
    pub summary: Option<GrowingModeSummary>,
}

impl AnalysisReport {
    pub fn new(system: &ReactionSystem, dim: usize) -> Result<Self, KineticsError> {
        let lin = linearize(system)?;
        let turing = has_turing_instability(&lin, dim);
        let summary = match &turing {
            Ok(w) if w.unstable => growing_mode_summary(&lin, dim).ok(),
            _ => None,
        };
        Ok(Self {
            model: system.name().to_string(),
            dim,
            steady_state: system.steady_state(),
            lin,
            rest_stable: rest_state_stable(&lin),
            sign: classify_sign_pattern(&lin),
            turing,
            summary,
        })
    }

    pub fn turing_unstable(&self) -> bool {
        matches!(&self.turing, Ok(w) if w.unstable)
    }
}

fn braces<T: fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    let parts: Vec<String> = items.into_iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = &self.lin;
        writeln!(f, "model: {}", self.model)?;
        writeln!(f, "dimension: {}", self.dim)?;
        writeln!(f, "steady state: ({}, {})", self.steady_state.0, self.steady_state.1)?;
        writeln!(f, "A: [[{}, {}], [{}, {}]]", l.a11, l.a12, l.a21, l.a22)?;
        writeln!(f, "D: ({}, {})", l.d1bar, l.d2bar)?;
        writeln!(f, "rest state stable: {} (trace {}, det {})", self.rest_stable, l.trace(), l.det())?;
        writeln!(f, "sign pattern: {}", self.sign.as_str())?;
        match &self.turing {
            Err(e) => writeln!(f, "turing unstable: undetermined ({e})")?,
            Ok(w) => {
                writeln!(f, "turing unstable: {}", w.unstable)?;
                match w.interval {
                    Some((lo, hi)) => writeln!(f, "unstable band: ({lo}, {hi})")?,
                    None => writeln!(f, "unstable band: none")?,
                }
                writeln!(f, "witness q2: {}", braces(&w.witness))?;
                writeln!(
                    f,
                    "range condition: printed form {}, standard form {}",
                    w.range_printed_form, w.range_standard_form
                )?;
            }
        }
        if let Some(s) = &self.summary {
            writeln!(f, "lambda_max: {}", s.lambda_max)?;
            writeln!(f, "omega_max: {}", braces(&s.omega_max))?;
            writeln!(f, "growing modes: {}", s.growing.len())?;
            writeln!(f, "nu: {}", s.nu)?;
        }
        Ok(())
    }
}

/// Columns `k,re_plus,re_minus,im,class`.
pub fn write_dispersion_csv<W: Write>(out: &mut W, rows: &[DispersionRow]) -> io::Result<()> {
    csv::write_header(out, &["k", "re_plus", "re_minus", "im", "class"])?;
    for r in rows {
        csv::write_row(
            out,
            &[r.k.into(), r.re_plus.into(), r.re_minus.into(), r.im.into(), r.class.as_str().into()],
        )?;
    }
    Ok(())
}

/// Columns `q,q2,class,re_plus,re_minus,im,dominant` for every scanned mode.
pub fn write_modes_csv<W: Write>(out: &mut W, summary: &GrowingModeSummary) -> io::Result<()> {
    csv::write_header(out, &["q", "q2", "class", "re_plus", "re_minus", "im", "dominant"])?;
    for (q, e) in &summary.scanned {
        csv::write_row(
            out,
            &[
                q.to_string().into(),
                q.q2().into(),
                e.class().as_str().into(),
                e.re_plus().into(),
                e.re_minus().into(),
                e.im().into(),
                summary.is_dominant(q).into(),
            ],
        )?;
    }
    Ok(())
}

/// One point of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub params: Vec<f64>,
    pub rest_stable: Option<bool>,
    pub turing_unstable: Option<bool>,
    pub lambda_max: Option<f64>,
    pub omega_max_count: Option<usize>,
    /// `ok`, or why the point could not be analysed.
    pub status: String,
}

impl ScanRow {
    pub fn from_report(params: Vec<f64>, report: &AnalysisReport) -> Self {
        let status = match &report.turing {
            Ok(_) => "ok".to_string(),
            Err(e) => e.to_string(),
        };
        Self {
            params,
            rest_stable: Some(report.rest_stable),
            turing_unstable: report.turing.as_ref().ok().map(|w| w.unstable),
            lambda_max: report.summary.as_ref().map(|s| s.lambda_max),
            omega_max_count: Some(report.summary.as_ref().map_or(0, |s| s.omega_max.len())),
            status,
        }
    }

    pub fn failed(params: Vec<f64>, reason: impl Into<String>) -> Self {
        Self {
            params,
            rest_stable: None,
            turing_unstable: None,
            lambda_max: None,
            omega_max_count: None,
            status: reason.into(),
        }
    }
}

/// Parameter columns, then `rest_stable,turing_unstable,lambda_max,omega_max_count,status`.
pub fn write_scan_csv<W: Write>(out: &mut W, names: &[String], rows: &[ScanRow]) -> io::Result<()> {
    let mut header: Vec<&str> = names.iter().map(String::as_str).collect();
    header.extend(["rest_stable", "turing_unstable", "lambda_max", "omega_max_count", "status"]);
    csv::write_header(out, &header)?;
    for r in rows {
        let mut cells: Vec<Cell> = r.params.iter().map(|&x| x.into()).collect();
        cells.extend([
            Cell::from(r.rest_stable),
            Cell::from(r.turing_unstable),
            Cell::from(r.lambda_max),
            Cell::from(r.omega_max_count),
            Cell::from(r.status.as_str()),
        ]);
        csv::write_row(out, &cells)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::builtin_at_steady_state;
    use std::collections::BTreeMap;

    #[test]
    fn benchmark_report_text() {
        let sys = builtin_at_steady_state("linear", &BTreeMap::new()).unwrap();
        let r = AnalysisReport::new(&sys, 1).unwrap();
        assert!(r.turing_unstable());
        let text = r.to_string();
        assert!(text.contains("witness q2: {1}"), "{text}");
        assert!(text.contains("omega_max: {(1)}"), "{text}");
        assert!(text.contains("lambda_max: 0.2526"), "{text}");
    }

    #[test]
    fn scan_csv_layout() {
        let mut buf = Vec::new();
        let rows = vec![ScanRow::failed(vec![1.0], "no steady state")];
        write_scan_csv(&mut buf, &["d2".into()], &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "d2,rest_stable,turing_unstable,lambda_max,omega_max_count,status\n1,,,,,no steady state\n"
        );
    }
}
