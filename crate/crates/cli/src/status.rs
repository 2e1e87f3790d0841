//! Expected outcomes and the statuses derived from them.

use std::io::Write;

use spacelike::report::fmt_num;
use spacelike::{EstimateReport, Verdict};

/// What a check is expected to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    Pass,
    Fail,
    Precondition,
}

impl Expect {
    pub fn as_str(&self) -> &'static str {
        match self {
            Expect::Pass => "pass",
            Expect::Fail => "fail",
            Expect::Precondition => "precondition",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Precondition,
    ExpectedFail,
    ExpectedPrecondition,
    UnexpectedPass,
}

impl Status {
    pub fn of(verdict: Verdict, expect: Expect) -> Status {
        match (expect, verdict) {
            (Expect::Pass, Verdict::Pass) => Status::Pass,
            (Expect::Pass, Verdict::Fail) => Status::Fail,
            (Expect::Pass, Verdict::Precondition) => Status::Precondition,
            (Expect::Fail, Verdict::Fail) => Status::ExpectedFail,
            (Expect::Precondition, Verdict::Precondition) => Status::ExpectedPrecondition,
            (_, Verdict::Pass) => Status::UnexpectedPass,
            _ => Status::Fail,
        }
    }

    pub fn ok(&self) -> bool {
        matches!(self, Status::Pass | Status::ExpectedFail | Status::ExpectedPrecondition)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Precondition => "PRECONDITION",
            Status::ExpectedFail => "EXPECTED-FAIL",
            Status::ExpectedPrecondition => "EXPECTED-PRECONDITION",
            Status::UnexpectedPass => "UNEXPECTED-PASS",
        }
    }
}

/// A report together with the outcome it is supposed to have.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub report: EstimateReport,
    pub expect: Expect,
}

impl Check {
    pub fn pass(report: EstimateReport) -> Self {
        Check { report, expect: Expect::Pass }
    }

    pub fn fail(report: EstimateReport) -> Self {
        Check { report, expect: Expect::Fail }
    }

    pub fn precondition(report: EstimateReport) -> Self {
        Check { report, expect: Expect::Precondition }
    }

    pub fn status(&self) -> Status {
        Status::of(self.report.verdict, self.expect)
    }
}

/// Writes `check,lhs,rhs,margin,tol,verdict,expect,status`.
pub fn write_checks_csv<W: Write>(checks: &[Check], out: W) -> spacelike::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["check", "lhs", "rhs", "margin", "tol", "verdict", "expect", "status"])?;
    for c in checks {
        let r = &c.report;
        w.write_record([
            r.check.as_str(),
            &fmt_num(r.lhs),
            &fmt_num(r.rhs),
            &fmt_num(r.margin),
            &fmt_num(r.tol),
            r.verdict.as_str(),
            c.expect.as_str(),
            c.status().as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_table() {
        assert_eq!(Status::of(Verdict::Fail, Expect::Fail), Status::ExpectedFail);
        assert_eq!(Status::of(Verdict::Pass, Expect::Fail), Status::UnexpectedPass);
        assert_eq!(Status::of(Verdict::Precondition, Expect::Pass), Status::Precondition);
        assert!(!Status::Precondition.ok());
        assert!(Status::ExpectedPrecondition.ok());
    }
}
