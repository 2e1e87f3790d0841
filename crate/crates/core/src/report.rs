//! Structured check results and their CSV/text rendering.

use std::fmt;
use std::io::Write;

use crate::error::Result;
use crate::numerics::Grid;

/// Outcome of a single check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The hypotheses of the check were not met; nothing was concluded.
    Precondition,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Precondition => "PRECONDITION",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Size and extent of the grid a check was evaluated on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridMeta {
    pub nodes: usize,
    pub s_min: f64,
    pub s_max: f64,
}

impl GridMeta {
    pub fn of(grid: &Grid) -> Self {
        GridMeta { nodes: grid.len(), s_min: grid.first(), s_max: grid.last() }
    }
}

/// `lhs` versus `rhs` with signed `margin` (positive means satisfied);
/// the verdict is `margin >= -tol` unless a precondition failed.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tol: f64,
    pub verdict: Verdict,
    pub grid: Option<GridMeta>,
    pub notes: Vec<String>,
}

impl EstimateReport {
    pub fn new(check: impl Into<String>, lhs: f64, rhs: f64, margin: f64, tol: f64) -> Self {
        let verdict = if margin >= -tol { Verdict::Pass } else { Verdict::Fail };
        EstimateReport { check: check.into(), lhs, rhs, margin, tol, verdict, grid: None, notes: Vec::new() }
    }

    /// Check `lhs <= rhs`.
    pub fn upper_bound(check: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::new(check, lhs, rhs, rhs - lhs, tol)
    }

    /// Check `lhs >= rhs`.
    pub fn lower_bound(check: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::new(check, lhs, rhs, lhs - rhs, tol)
    }

    /// Check `|lhs - rhs| <= tol` (margin `-|lhs - rhs|`).
    pub fn equality(check: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::new(check, lhs, rhs, -(lhs - rhs).abs(), tol)
    }

    pub fn precondition(check: impl Into<String>, reason: impl Into<String>) -> Self {
        let mut r = Self::new(check, f64::NAN, f64::NAN, f64::NAN, 0.0);
        r.verdict = Verdict::Precondition;
        r.notes.push(reason.into());
        r
    }

    /// A diagnostic value whose verdict comes from a classification rather
    /// than a numeric comparison.
    pub fn classified(check: impl Into<String>, value: f64, verdict: Verdict) -> Self {
        let mut r = Self::new(check, value, f64::NAN, f64::NAN, 0.0);
        r.verdict = verdict;
        r
    }

    pub fn with_grid(mut self, grid: GridMeta) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn renamed(mut self, check: impl Into<String>) -> Self {
        self.check = check.into();
        self
    }

    /// Multiplies the tolerance and re-evaluates the verdict.
    pub fn rescaled(mut self, factor: f64) -> Self {
        if self.verdict == Verdict::Precondition || self.margin.is_nan() {
            return self;
        }
        self.tol *= factor;
        self.verdict = if self.margin >= -self.tol { Verdict::Pass } else { Verdict::Fail };
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{:<12} {:<40} lhs={} rhs={} margin={} tol={}",
            self.verdict.as_str(),
            self.check,
            fmt_num(self.lhs),
            fmt_num(self.rhs),
            fmt_num(self.margin),
            fmt_num(self.tol)
        )
    }
}

/// Ordered collection of reports from one task.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReportBundle {
    pub title: String,
    pub reports: Vec<EstimateReport>,
}

impl ReportBundle {
    pub fn new(title: impl Into<String>) -> Self {
        ReportBundle { title: title.into(), reports: Vec::new() }
    }

    pub fn push(&mut self, r: EstimateReport) {
        self.reports.push(r);
    }

    pub fn extend(&mut self, other: ReportBundle) {
        self.reports.extend(other.reports);
    }

    pub fn get(&self, check: &str) -> Option<&EstimateReport> {
        self.reports.iter().find(|r| r.check == check)
    }

    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(EstimateReport::passed)
    }

    /// Writes `check,lhs,rhs,margin,tol,verdict`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["check", "lhs", "rhs", "margin", "tol", "verdict"])?;
        for r in &self.reports {
            w.write_record([
                r.check.clone(),
                fmt_num(r.lhs),
                fmt_num(r.rhs),
                fmt_num(r.margin),
                fmt_num(r.tol),
                r.verdict.as_str().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("== {} ==\n", self.title);
        for r in &self.reports {
            s.push_str(&r.summary_line());
            s.push('\n');
            if let Some(g) = r.grid {
                s.push_str(&format!("    grid: {} nodes on [{}, {}]\n", g.nodes, fmt_num(g.s_min), fmt_num(g.s_max)));
            }
            for note in &r.notes {
                s.push_str(&format!("    note: {note}\n"));
            }
        }
        s
    }
}

/// Shortest round-trip formatting; `NaN`/`inf` spelled out.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_margin() {
        assert!(EstimateReport::upper_bound("a", 1.0, 1.0 - 1e-12, 1e-10).passed());
        assert!(!EstimateReport::upper_bound("a", 1.0, 0.9, 1e-10).passed());
        assert!(EstimateReport::lower_bound("b", 2.0, 1.0, 0.0).passed());
        assert!(!EstimateReport::equality("c", 1.0, 1.1, 1e-3).passed());
        assert_eq!(EstimateReport::precondition("d", "why").verdict, Verdict::Precondition);
    }

    #[test]
    fn rescale_relaxes_tolerance() {
        let r = EstimateReport::upper_bound("a", 1.0, 0.99, 1e-3);
        assert!(!r.passed());
        assert!(r.clone().rescaled(100.0).passed());
        let e = EstimateReport::equality("e", 1.0, 1.01, 1e-3);
        assert!(e.rescaled(100.0).passed());
    }

    #[test]
    fn csv_is_stable() {
        let mut b = ReportBundle::new("t");
        b.push(EstimateReport::upper_bound("x", 0.1, 0.2, 1e-8));
        let mut buf = Vec::new();
        b.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "check,lhs,rhs,margin,tol,verdict\nx,1e-1,2e-1,1e-1,1e-8,PASS\n");
    }
}
