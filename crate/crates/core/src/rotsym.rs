//! Shooting solver for the rotationally symmetric reduction
//! `u^a_rr / (1 + |u_r|^2) + u^a_r (n-1)/r = -u^a + r u^a_r`.
//!
//! Integration starts just off the regular singular point r = 0 with the
//! two-term series `u(r) = c - (c/n) r^2 / 2`, and classifies each
//! trajectory as reaching r_max, diverging past a threshold, or collapsing
//! the step. Divergence is an observation about the numerics, never a claim
//! that no entire solution exists.

use serde::Serialize;

use crate::error::{Error, Result};

/// State of the radial system: u(r) and u_r(r), componentwise.
#[derive(Clone, Debug)]
pub struct RotState {
    pub r: f64,
    pub u: Vec<f64>,
    pub ur: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    GlobalToRmax,
    Diverged {
        at_r: f64,
        /// Which threshold tripped: "u" or "ur".
        #[serde(rename = "threshold")]
        which: ThresholdKind,
    },
    StepCollapse { at_r: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    U,
    Ur,
}

#[derive(Clone, Copy, Debug)]
pub struct Thresholds {
    pub blowup: f64,
    pub step_min: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { blowup: 1e6, step_min: 1e-14, rtol: 1e-10, atol: 1e-12 }
    }
}

#[derive(Clone, Debug)]
pub struct ShootResult {
    pub trajectory: Vec<RotState>,
    pub outcome: Outcome,
    pub max_u: f64,
    pub max_ur: f64,
}

impl ShootResult {
    /// Radius at which the run stopped (r_max for a global trajectory).
    pub fn end_radius(&self) -> f64 {
        match self.outcome {
            Outcome::GlobalToRmax => self.trajectory.last().map(|s| s.r).unwrap_or(0.0),
            Outcome::Diverged { at_r, .. } => at_r,
            Outcome::StepCollapse { at_r } => at_r,
        }
    }
}

/// Right-hand side (u_r, u_rr). At r = 0 the smooth branch has u_r = 0 and
/// the limit u_rr(0) = -u(0)/n from expanding `(n-1) u_r / r`.
pub fn rotsym_rhs(state: &RotState, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if state.r < 0.0 {
        return Err(Error::InvalidRadius(state.r));
    }
    let m = state.u.len();
    if state.r == 0.0 {
        let urr = state.u.iter().map(|&c| -c / n as f64).collect();
        return Ok((vec![0.0; m], urr));
    }
    let ur_sq: f64 = state.ur.iter().map(|v| v * v).sum();
    let factor = 1.0 + ur_sq;
    let urr = (0..m)
        .map(|a| {
            factor
                * (-state.u[a] + state.r * state.ur[a]
                    - (n as f64 - 1.0) * state.ur[a] / state.r)
        })
        .collect();
    Ok((state.ur.clone(), urr))
}

// Dormand-Prince 5(4) coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn system_rhs(r: f64, y: &[f64], n: usize, m: usize) -> Vec<f64> {
    let state = RotState { r, u: y[..m].to_vec(), ur: y[m..].to_vec() };
    let (du, dur) = rotsym_rhs(&state, n).expect("r stays positive during integration");
    let mut out = Vec::with_capacity(2 * m);
    out.extend(du);
    out.extend(dur);
    out
}

/// Integrate from r = 0 (series start at r = 1e-6) with initial value
/// `u(0) = c`, `u_r(0) = 0`, until r_max or a threshold trips.
pub fn shoot(c: &[f64], n: usize, r_max: f64, tols: Thresholds) -> ShootResult {
    let m = c.len();
    let delta = 1e-6;
    let nf = n as f64;
    let mut y = Vec::with_capacity(2 * m);
    for &ci in c {
        y.push(ci - (ci / nf) * delta * delta / 2.0);
    }
    for &ci in c {
        y.push(-(ci / nf) * delta);
    }
    let mut r = delta;
    let mut trajectory = vec![
        RotState { r: 0.0, u: c.to_vec(), ur: vec![0.0; m] },
        RotState { r, u: y[..m].to_vec(), ur: y[m..].to_vec() },
    ];
    let mut max_u = c.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut max_ur = 0.0f64;

    // Step cap keeps the trajectory dense enough for plotting.
    let max_step = r_max / 256.0;
    let mut h = 1e-3f64.min(max_step);
    let mut outcome = None;

    while r < r_max {
        if h < tols.step_min {
            outcome = Some(Outcome::StepCollapse { at_r: r });
            break;
        }
        h = h.min(r_max - r).min(max_step);
        let k0 = system_rhs(r, &y, n, m);
        let mut ks = vec![k0];
        for stage in 0..6 {
            let mut ys = y.clone();
            for (s, k) in ks.iter().enumerate() {
                let a = A[stage][s];
                if a != 0.0 {
                    for (yi, ki) in ys.iter_mut().zip(k) {
                        *yi += h * a * ki;
                    }
                }
            }
            ks.push(system_rhs(r + C[stage] * h, &ys, n, m));
        }
        let mut y5 = y.clone();
        let mut y4 = y.clone();
        for (s, k) in ks.iter().enumerate() {
            for i in 0..2 * m {
                y5[i] += h * B5[s] * k[i];
                y4[i] += h * B4[s] * k[i];
            }
        }
        let mut err: f64 = 0.0;
        for i in 0..2 * m {
            let scale = tols.atol + tols.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((y5[i] - y4[i]).abs() / scale);
        }
        if !err.is_finite() {
            // Overflow inside a trial step: shrink and retry.
            h *= 0.25;
            continue;
        }
        if err <= 1.0 {
            r += h;
            y = y5;
            let u_inf = y[..m].iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let ur_inf = y[m..].iter().fold(0.0f64, |a, v| a.max(v.abs()));
            max_u = max_u.max(u_inf);
            max_ur = max_ur.max(ur_inf);
            trajectory.push(RotState { r, u: y[..m].to_vec(), ur: y[m..].to_vec() });
            if u_inf > tols.blowup {
                outcome = Some(Outcome::Diverged { at_r: r, which: ThresholdKind::U });
                break;
            }
            if ur_inf > tols.blowup {
                outcome = Some(Outcome::Diverged { at_r: r, which: ThresholdKind::Ur });
                break;
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }

    ShootResult { trajectory, outcome: outcome.unwrap_or(Outcome::GlobalToRmax), max_u, max_ur }
}

/// One summary row per initial value.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub c: Vec<f64>,
    pub outcome: Outcome,
    pub end_radius: f64,
    pub max_u: f64,
    pub max_ur: f64,
}

pub fn scan(c_values: &[Vec<f64>], n: usize, r_max: f64) -> Result<Vec<ScanRow>> {
    if c_values.is_empty() {
        return Err(Error::SpecInvalid("empty initial-value list".into()));
    }
    Ok(c_values
        .iter()
        .map(|c| {
            let res = shoot(c, n, r_max, Thresholds::default());
            ScanRow {
                c: c.clone(),
                outcome: res.outcome,
                end_radius: res.end_radius(),
                max_u: res.max_u,
                max_ur: res.max_ur,
            }
        })
        .collect())
}
