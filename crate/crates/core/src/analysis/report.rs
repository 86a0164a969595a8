use std::fmt;
use std::io::Write;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Satisfied,
    Violated,
    Skipped(String),
}

/// Result of checking one inequality `lhs ≤ rhs` (or identity
/// `lhs = rhs`) on concrete data.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`
    pub slack: f64,
    pub outcome: Outcome,
    pub context: String,
}

impl BoundReport {
    /// An inequality report, satisfied iff `lhs ≤ rhs + tol`.
    pub fn inequality(name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let ok = lhs <= rhs + tol;
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            slack: rhs - lhs,
            outcome: if ok { Outcome::Satisfied } else { Outcome::Violated },
            context: String::new(),
        }
    }

    /// An identity report, satisfied iff `|lhs − rhs| ≤ rtol · scale`.
    pub fn identity(name: &str, lhs: f64, rhs: f64, scale: f64, rtol: f64) -> Self {
        let residual = (lhs - rhs).abs();
        let ok = residual <= rtol * scale;
        let relative = if scale > 0.0 { residual / scale } else { residual };
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            slack: rhs - lhs,
            outcome: if ok { Outcome::Satisfied } else { Outcome::Violated },
            context: format!("relative_residual={relative:.3e}"),
        }
    }

    pub fn skipped(name: &str, reason: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::NAN,
            outcome: Outcome::Skipped(reason.into()),
            context: String::new(),
        }
    }

    pub fn with_context(mut self, context: impl AsRef<str>) -> Self {
        let context = context.as_ref();
        if !context.is_empty() {
            if self.context.is_empty() {
                self.context = context.to_string();
            } else {
                self.context = format!("{}; {}", self.context, context);
            }
        }
        self
    }

    pub fn satisfied(&self) -> bool {
        self.outcome == Outcome::Satisfied
    }

    pub fn skipped_reason(&self) -> Option<&str> {
        match &self.outcome {
            Outcome::Skipped(r) => Some(r),
            _ => None,
        }
    }

    /// Satisfied or legitimately gated.
    pub fn acceptable(&self) -> bool {
        !matches!(self.outcome, Outcome::Violated)
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match &self.outcome {
            Outcome::Satisfied => "ok".to_string(),
            Outcome::Violated => "VIOLATED".to_string(),
            Outcome::Skipped(r) => format!("skipped ({r})"),
        };
        write!(
            f,
            "{:<28} lhs={:<14.6e} rhs={:<14.6e} slack={:<12.4e} {status}",
            self.name, self.lhs, self.rhs, self.slack
        )?;
        if !self.context.is_empty() {
            write!(f, " [{}]", self.context)?;
        }
        Ok(())
    }
}

/// One CSV row per report: `name,lhs,rhs,slack,satisfied,context`, where
/// `satisfied` is `true`, `false` or `skipped`.
pub fn write_reports<W: Write>(reports: &[BoundReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["name", "lhs", "rhs", "slack", "satisfied", "context"])?;
    for r in reports {
        let status = match &r.outcome {
            Outcome::Satisfied => "true",
            Outcome::Violated => "false",
            Outcome::Skipped(_) => "skipped",
        };
        let context = match &r.outcome {
            Outcome::Skipped(reason) if r.context.is_empty() => reason.clone(),
            Outcome::Skipped(reason) => format!("{reason}; {}", r.context),
            _ => r.context.clone(),
        };
        w.write_record([
            r.name.clone(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.slack.to_string(),
            status.to_string(),
            context,
        ])?;
    }
    w.flush().map_err(|e| crate::error::Error::io("<report writer>", e))?;
    Ok(())
}
