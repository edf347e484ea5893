//! Check reporting: a named comparison of two values against a tolerance.

use serde::{Deserialize, Serialize};

/// Tolerance tiers used throughout the crate. Pure multilinear algebra gets
/// the tightest tier; analytic routes that pass through a matrix inverse get
/// the middle tier; finite-difference oracles get the loosest.
pub mod tol {
    pub const ALGEBRA: f64 = 1e-12;
    pub const ANALYTIC: f64 = 1e-9;
    pub const ORACLE: f64 = 1e-6;
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_discrepancy: f64,
    pub rel_discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    /// Compare two values; passes when the absolute discrepancy is within
    /// the tolerance scaled by max(1, |lhs|, |rhs|).
    pub fn compare(check: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let abs = (lhs - rhs).abs();
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        let rel = abs / scale;
        CheckReport {
            check: check.into(),
            lhs,
            rhs,
            abs_discrepancy: abs,
            rel_discrepancy: rel,
            tolerance,
            pass: abs <= tolerance * scale,
        }
    }

    /// A check that passes when `margin >= -tolerance` (one-sided bound).
    pub fn margin(check: impl Into<String>, margin: f64, tolerance: f64) -> Self {
        CheckReport {
            check: check.into(),
            lhs: margin,
            rhs: 0.0,
            abs_discrepancy: (-margin).max(0.0),
            rel_discrepancy: (-margin).max(0.0),
            tolerance,
            pass: margin >= -tolerance,
        }
    }
}
