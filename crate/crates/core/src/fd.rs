//! Central-difference derivative oracles with Richardson extrapolation.
//!
//! These are the independent numeric side of every analytic-vs-numeric check
//! in the crate; they never call back into the analytic derivative paths.

use crate::error::{Error, Result};
use crate::report::CheckReport;

/// Step policy: base step `h0`, `levels` halvings (per-level ratio 2).
#[derive(Clone, Copy, Debug)]
pub struct FDPolicy {
    pub h0: f64,
    pub levels: usize,
}

impl FDPolicy {
    pub fn new(h0: f64, levels: usize) -> Result<Self> {
        if !(1e-6..=1e-1).contains(&h0) {
            return Err(Error::SpecInvalid(format!("h0 = {h0} outside [1e-6, 1e-1]")));
        }
        if levels < 2 {
            return Err(Error::SpecInvalid("Richardson needs at least 2 levels".into()));
        }
        Ok(FDPolicy { h0, levels })
    }

    /// Default: h0 = 1e-3 * max(1, |x|), three levels.
    pub fn default_at(x: &[f64]) -> Self {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        FDPolicy { h0: 1e-3 * norm.max(1.0), levels: 3 }
    }

    /// Wider base step for second-derivative stencils, where roundoff in the
    /// divided difference dominates sooner.
    pub fn hessian_at(x: &[f64]) -> Self {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        FDPolicy { h0: 2e-2 * norm.max(1.0), levels: 3 }
    }

    pub fn step(&self, level: usize) -> f64 {
        self.h0 / (1u64 << level) as f64
    }
}

/// Per-level estimates of one derivative plus the Richardson-extrapolated
/// value (error expansion in h^2, so the table ratio is 4).
#[derive(Clone, Debug)]
pub struct FdLadder {
    pub per_level: Vec<f64>,
    pub extrapolated: f64,
}

impl FdLadder {
    pub fn from_levels(per_level: Vec<f64>) -> Self {
        assert!(per_level.len() >= 2);
        let mut table = per_level.clone();
        let levels = table.len();
        let mut factor = 4.0;
        for k in 1..levels {
            for i in (k..levels).rev() {
                table[i] = table[i] + (table[i] - table[i - 1]) / (factor - 1.0);
            }
            factor *= 4.0;
        }
        FdLadder { extrapolated: table[levels - 1], per_level }
    }

    /// Observed convergence order against a reference value, estimated from
    /// the last pair of levels whose errors are above the roundoff floor.
    pub fn observed_order(&self, reference: f64) -> Option<f64> {
        let floor = 1e-13 * reference.abs().max(1.0);
        let errs: Vec<f64> = self.per_level.iter().map(|v| (v - reference).abs()).collect();
        for w in errs.windows(2).rev() {
            if w[0] > floor && w[1] > floor {
                return Some((w[0] / w[1]).log2());
            }
        }
        None
    }
}

fn sample(field: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Result<f64> {
    let v = field(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::SamplingFailure { point: x.to_vec() })
    }
}

/// Ladder of central-difference estimates of the i-th partial derivative.
pub fn fd_gradient_entry(
    field: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    i: usize,
    policy: &FDPolicy,
) -> Result<FdLadder> {
    let mut levels = Vec::with_capacity(policy.levels);
    for l in 0..policy.levels {
        let h = policy.step(l);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        levels.push((sample(field, &xp)? - sample(field, &xm)?) / (2.0 * h));
    }
    Ok(FdLadder::from_levels(levels))
}

/// Ladder of central-difference estimates of the (i, j) second derivative.
pub fn fd_hessian_entry(
    field: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    i: usize,
    j: usize,
    policy: &FDPolicy,
) -> Result<FdLadder> {
    let mut levels = Vec::with_capacity(policy.levels);
    for l in 0..policy.levels {
        let h = policy.step(l);
        let v = if i == j {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            (sample(field, &xp)? - 2.0 * sample(field, x)? + sample(field, &xm)?) / (h * h)
        } else {
            let mut xpp = x.to_vec();
            let mut xpm = x.to_vec();
            let mut xmp = x.to_vec();
            let mut xmm = x.to_vec();
            xpp[i] += h;
            xpp[j] += h;
            xpm[i] += h;
            xpm[j] -= h;
            xmp[i] -= h;
            xmp[j] += h;
            xmm[i] -= h;
            xmm[j] -= h;
            (sample(field, &xpp)? - sample(field, &xpm)? - sample(field, &xmp)?
                + sample(field, &xmm)?)
                / (4.0 * h * h)
        };
        levels.push(v);
    }
    Ok(FdLadder::from_levels(levels))
}

/// Numeric gradient and Hessian of a scalar field, all entries as ladders.
pub struct FdJet {
    pub n: usize,
    pub grad: Vec<FdLadder>,
    pub hess: Vec<FdLadder>,
}

impl FdJet {
    pub fn grad_extrapolated(&self) -> Vec<f64> {
        self.grad.iter().map(|l| l.extrapolated).collect()
    }
    pub fn hess_extrapolated(&self) -> Vec<f64> {
        self.hess.iter().map(|l| l.extrapolated).collect()
    }
}

pub fn finite_diff_jet(
    field: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    policy: &FDPolicy,
) -> Result<FdJet> {
    let n = x.len();
    let mut grad = Vec::with_capacity(n);
    for i in 0..n {
        grad.push(fd_gradient_entry(field, x, i, policy)?);
    }
    let mut hess: Vec<FdLadder> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if j < i {
                hess.push(hess[j * n + i].clone());
            } else {
                hess.push(fd_hessian_entry(field, x, i, j, policy)?);
            }
        }
    }
    Ok(FdJet { n, grad, hess })
}

/// Minimum acceptable shrink order between ladder levels for a pass.
pub const RICHARDSON_MIN_ORDER: f64 = 1.8;

/// Compare an analytic value against a ladder of numeric estimates.
///
/// Passes when the extrapolated value meets the tolerance and the per-level
/// discrepancies shrink at order >= 1.8 (levels already at the roundoff
/// floor are exempt). A ladder whose errors grow materially level-to-level
/// is an oracle failure, not a check failure.
pub fn richardson_check(
    name: impl Into<String>,
    analytic: f64,
    ladder: &FdLadder,
    tolerance: f64,
) -> Result<CheckReport> {
    // Levels whose error is already two decades under the tolerance sit on
    // the roundoff plateau; no convergence order is measurable there.
    let floor = 1e-2 * tolerance * analytic.abs().max(1.0);
    let errs: Vec<f64> = ladder.per_level.iter().map(|v| (v - analytic).abs()).collect();
    for w in errs.windows(2) {
        if w[1] > 4.0 * w[0].max(floor) {
            return Err(Error::OracleDivergence(errs));
        }
    }
    let mut order_ok = true;
    let shrink = 2f64.powf(RICHARDSON_MIN_ORDER);
    for w in errs.windows(2) {
        if w[1] <= floor {
            continue;
        }
        if w[1] * shrink > w[0] {
            order_ok = false;
        }
    }
    let mut report = CheckReport::compare(name, analytic, ladder.extrapolated, tolerance);
    report.pass = report.pass && order_ok;
    Ok(report)
}
