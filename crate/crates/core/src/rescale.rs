//! Parabolic rescaling `w(x, t) = sqrt(T - t) u(x / sqrt(T - t))`, the
//! graphical heat operator `d_t - (1/2) gbar^{ij} d_i d_j`, the linear
//! growth margin for solutions, and the constant machinery behind the
//! polynomial growth bound for the generalized linear system
//! `a^{ij} u^a_ij = -u^a + x . Du^a`.

use crate::error::{Error, Result};
use crate::fields::MatrixField;
use crate::geometry::{induced_metric, shrinker_residual, Signature};
use crate::jets::{eval_jet, GraphSpec};
use crate::linalg::jacobi_eigen_sym;

/// `g(s) = (2s/(s+1))^s / (s+1)`, strictly increasing for s > 1 with
/// g(1) = 1/2; its unique unit crossing s0 separates the usable exponents.
pub fn g_of_s(s: f64) -> f64 {
    (2.0 * s / (s + 1.0)).powf(s) / (s + 1.0)
}

#[derive(Clone, Copy, Debug)]
pub struct S0Result {
    pub s0: f64,
    pub residual: f64,
    pub bracket: (f64, f64),
}

/// Bisect `g(s) = 1` inside (3.4, 3.5) after certifying the bracket.
pub fn s0_solve(tolerance: f64) -> Result<S0Result> {
    if !(tolerance > 0.0 && tolerance <= 1e-3) {
        return Err(Error::SpecInvalid(format!("tolerance {tolerance} outside (0, 1e-3]")));
    }
    let (mut lo, mut hi) = (3.4, 3.5);
    if !(g_of_s(lo) < 1.0 && g_of_s(hi) > 1.0) {
        return Err(Error::DecompositionFailure("bracket certificate failed".into()));
    }
    let bracket = (lo, hi);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if g_of_s(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s0 = 0.5 * (lo + hi);
    Ok(S0Result { s0, residual: (g_of_s(s0) - 1.0).abs(), bracket })
}

/// `zeta = 2s/(s+1)` and the margin `zeta^s - 2/(2 - zeta)`, nonnegative
/// exactly when the exponent inequality needed by the dichotomy holds.
#[derive(Clone, Copy, Debug)]
pub struct ZetaWitness {
    pub zeta: f64,
    pub margin: f64,
}

pub fn zeta_witness(s: f64) -> Result<ZetaWitness> {
    let zeta = 2.0 * s / (s + 1.0);
    let margin = zeta.powf(s) - 2.0 / (2.0 - zeta);
    let s0 = s0_solve(1e-6)?.s0;
    if s < s0 {
        return Err(Error::BelowThreshold { s, s0, margin });
    }
    Ok(ZetaWitness { zeta, margin })
}

/// The derived constants for the growth estimate: `theta = sqrt(s/(s+1))`,
/// `k = sqrt(2) theta`, and `R0^2 = max(r0, (n sigma + 1)/2 * k^2/(k^2-1))`.
#[derive(Clone, Copy, Debug)]
pub struct GrowthConstants {
    pub s: f64,
    pub theta: f64,
    pub k: f64,
    pub r_big: f64,
    pub n: usize,
    pub sigma: f64,
    pub tau: f64,
    pub c_decay: f64,
    pub r0: f64,
}

pub fn growth_constants(
    s: f64,
    n: usize,
    sigma: f64,
    tau: f64,
    c_decay: f64,
    r0: f64,
) -> Result<GrowthConstants> {
    if sigma <= 0.0 || tau <= 0.0 || c_decay <= 0.0 || r0 <= 0.0 {
        return Err(Error::SpecInvalid("sigma, tau, c and r0 must be positive".into()));
    }
    let s0 = s0_solve(1e-6)?.s0;
    if s < s0 {
        return Err(Error::BelowThreshold { s, s0, margin: f64::NAN });
    }
    let theta = (s / (s + 1.0)).sqrt();
    let k = std::f64::consts::SQRT_2 * theta;
    let k2 = k * k;
    let r_big_sq = r0.max((n as f64 * sigma + 1.0) / 2.0 * k2 / (k2 - 1.0));
    Ok(GrowthConstants { s, theta, k, r_big: r_big_sq.sqrt(), n, sigma, tau, c_decay, r0 })
}

impl GrowthConstants {
    /// Shrunken-and-shifted comparison radius `r = sqrt(R^2/k^2 + (n sigma + 1)/2)`.
    pub fn inner_radius(&self, r: f64) -> f64 {
        (r * r / (self.k * self.k) + (self.n as f64 * self.sigma + 1.0) / 2.0).sqrt()
    }

    /// The iterated radii: `R_1 = R` (unshifted base case) and for m >= 2
    /// `R_m^2 = R^2/k^{2(m-1)} + (n sigma + 1)/2 * sum_{j=0}^{m-2} k^{-2j}`.
    pub fn iterated_radius(&self, r: f64, m: usize) -> f64 {
        assert!(m >= 1);
        if m == 1 {
            return r;
        }
        let k2 = self.k * self.k;
        let mut shift = 0.0;
        for j in 0..=(m - 2) {
            shift += k2.powi(-(j as i32));
        }
        (r * r / k2.powi((m - 1) as i32)
            + (self.n as f64 * self.sigma + 1.0) / 2.0 * shift)
            .sqrt()
    }
}

/// Two evaluations of the heat operator applied to the rescaled map: the
/// direct route assembles `d_t w - (1/2) gbar^{ij} w_ij` from the chain
/// rule, the second route rescales the elliptic residual at the pulled-back
/// point. The two agree for every smooth u; for solutions both vanish.
#[derive(Clone, Debug)]
pub struct HeatResidual {
    pub direct: Vec<f64>,
    pub via_residual: Vec<f64>,
    pub discrepancy: f64,
}

pub fn heat_residual(spec: &GraphSpec, horizon: f64, x: &[f64], t: f64) -> Result<HeatResidual> {
    if !(t >= 0.0 && t < horizon) {
        return Err(Error::InvalidTime { t, horizon });
    }
    let root = (horizon - t).sqrt();
    let xt: Vec<f64> = x.iter().map(|v| v / root).collect();
    let jet = eval_jet(spec, &xt, 2)?;
    let sig = Signature::Euclidean;
    let pack = induced_metric(&jet, sig)?;
    let (n, m) = (spec.n, spec.m);

    let mut direct = vec![0.0; m];
    for a in 0..m {
        let drift: f64 = (0..n).map(|i| xt[i] * jet.du_at(a, i)).sum();
        // d_t w = (-u + x~ . Du) / (2 sqrt(T - t)) by the chain rule.
        let dt_w = (-jet.u[a] + drift) / (2.0 * root);
        // w_ij = u_ij(x~) / sqrt(T - t) and gbar(x, t) = g(x~).
        let mut lap = 0.0;
        for i in 0..n {
            for j in 0..n {
                lap += pack.ginv[(i, j)] * jet.d2u_at(a, i, j) / root;
            }
        }
        direct[a] = dt_w - 0.5 * lap;
    }

    let res = shrinker_residual(&jet, sig)?;
    let via_residual: Vec<f64> = res.iter().map(|r| -r / (2.0 * root)).collect();
    let discrepancy = direct
        .iter()
        .zip(&via_residual)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok(HeatResidual { direct, via_residual, discrepancy })
}

/// `w(x, t)` itself, for finite-difference cross-checks in t.
pub fn rescaled_value(spec: &GraphSpec, horizon: f64, x: &[f64], t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0 && t < horizon) {
        return Err(Error::InvalidTime { t, horizon });
    }
    let root = (horizon - t).sqrt();
    let xt: Vec<f64> = x.iter().map(|v| v / root).collect();
    let jet = eval_jet(spec, &xt, 0)?;
    Ok(jet.u.iter().map(|u| root * u).collect())
}

/// The rescaled map `w(x, t) = sqrt(T - t) u(x / sqrt(T - t))` with its
/// space derivatives, chain-rule time derivative, and the time-dependent
/// metric `gbar_ij(x, t) = g_ij(x / sqrt(T - t))`.
#[derive(Clone, Debug)]
pub struct RescaledMap {
    pub spec: GraphSpec,
    pub horizon: f64,
}

impl RescaledMap {
    pub fn new(spec: GraphSpec, horizon: f64) -> Result<Self> {
        if horizon <= 0.0 {
            return Err(Error::SpecInvalid(format!("horizon {horizon} must be positive")));
        }
        Ok(RescaledMap { spec, horizon })
    }

    pub fn value(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        rescaled_value(&self.spec, self.horizon, x, t)
    }

    /// (w, Dw, D2w) at (x, t): Dw^a_i = u^a_i(x~), D2w^a_ij = u^a_ij(x~)/root.
    pub fn space_jet(&self, x: &[f64], t: f64) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        if !(t >= 0.0 && t < self.horizon) {
            return Err(Error::InvalidTime { t, horizon: self.horizon });
        }
        let root = (self.horizon - t).sqrt();
        let xt: Vec<f64> = x.iter().map(|v| v / root).collect();
        let jet = eval_jet(&self.spec, &xt, 2)?;
        let w = jet.u.iter().map(|u| root * u).collect();
        let dw = jet.du.clone();
        let d2w = jet.d2u.iter().map(|v| v / root).collect();
        Ok((w, dw, d2w))
    }

    /// Chain-rule time derivative `d_t w = (-u + x~ . Du)/(2 sqrt(T - t))`.
    pub fn time_derivative(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        if !(t >= 0.0 && t < self.horizon) {
            return Err(Error::InvalidTime { t, horizon: self.horizon });
        }
        let root = (self.horizon - t).sqrt();
        let xt: Vec<f64> = x.iter().map(|v| v / root).collect();
        let jet = eval_jet(&self.spec, &xt, 1)?;
        Ok((0..self.spec.m)
            .map(|a| {
                let drift: f64 = (0..self.spec.n).map(|i| xt[i] * jet.du_at(a, i)).sum();
                (-jet.u[a] + drift) / (2.0 * root)
            })
            .collect())
    }

    /// `gbar(x, t) = g(x / sqrt(T - t))`.
    pub fn metric(&self, x: &[f64], t: f64) -> Result<crate::geometry::MetricPack> {
        if !(t >= 0.0 && t < self.horizon) {
            return Err(Error::InvalidTime { t, horizon: self.horizon });
        }
        let root = (self.horizon - t).sqrt();
        let xt: Vec<f64> = x.iter().map(|v| v / root).collect();
        let jet = eval_jet(&self.spec, &xt, 1)?;
        induced_metric(&jet, Signature::Euclidean)
    }
}

/// Low-discrepancy Halton points in the ball of the given radius.
pub fn halton_ball(n: usize, radius: f64, count: usize) -> Vec<Vec<f64>> {
    const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    let mut out = Vec::with_capacity(count);
    let mut index = 1u64;
    while out.len() < count {
        let mut p = Vec::with_capacity(n);
        for d in 0..n {
            p.push((2.0 * halton(index, PRIMES[d % PRIMES.len()]) - 1.0) * radius);
        }
        index += 1;
        let r2: f64 = p.iter().map(|v| v * v).sum();
        if r2 <= radius * radius {
            out.push(p);
        }
    }
    out
}

fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Sampled sup of |u| over the closed ball of the given radius (Halton
/// points plus boundary samples).
pub fn ball_sup_abs_u(spec: &GraphSpec, radius: f64, samples: usize) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for p in halton_ball(spec.n, radius, samples) {
        let jet = eval_jet(spec, &p, 0)?;
        sup = sup.max(crate::geometry::norm(&jet.u));
    }
    for p in sphere_points(spec.n, radius, samples / 4 + 1) {
        let jet = eval_jet(spec, &p, 0)?;
        sup = sup.max(crate::geometry::norm(&jet.u));
    }
    Ok(sup)
}

/// Deterministic direction set scaled to a sphere of the given radius.
pub fn sphere_points(n: usize, radius: f64, count: usize) -> Vec<Vec<f64>> {
    const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    let mut out = Vec::with_capacity(count);
    let mut index = 1u64;
    while out.len() < count {
        // Gaussian-ish directions from Halton via the Box-Muller pairs.
        let mut p = Vec::with_capacity(n);
        for d in 0..n {
            let a = halton(index, PRIMES[(2 * d) % PRIMES.len()]).max(1e-12);
            let b = halton(index, PRIMES[(2 * d + 1) % PRIMES.len()]);
            p.push((-2.0 * a.ln()).sqrt() * (std::f64::consts::TAU * b).cos());
        }
        index += 1;
        let norm: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-9 {
            out.push(p.iter().map(|v| v * radius / norm).collect());
        }
    }
    out
}

/// Margins of the linear growth estimate on sample spheres: per radius, the
/// minimum of `(2|x|^2/(3n) + 1)(sup_ball |u|^2 + 12n) - |u(x)|^2`, plus the
/// mean-curvature margin `C (1 + |x|) - |H|` with
/// `C = sup_ball |u| + 1` over the reference ball `|x| <= 2 sqrt(3n)`.
#[derive(Clone, Debug)]
pub struct GrowthMargins {
    pub sup_ball: f64,
    pub sup_sampling_gap: f64,
    pub per_radius: Vec<RadiusMargin>,
}

#[derive(Clone, Debug)]
pub struct RadiusMargin {
    pub radius: f64,
    pub min_margin: f64,
    pub min_curvature_margin: f64,
}

pub fn growth_bound_check(spec: &GraphSpec, radii: &[f64]) -> Result<GrowthMargins> {
    let n = spec.n;
    let ball_radius = 2.0 * (3.0 * n as f64).sqrt();
    let sup_coarse = ball_sup_abs_u(spec, ball_radius, 5_000)?;
    let sup_ball = ball_sup_abs_u(spec, ball_radius, 10_000)?;
    let sup_sampling_gap = (sup_ball - sup_coarse).abs();
    let c_curv = sup_ball + 1.0;

    let mut per_radius = Vec::with_capacity(radii.len());
    for &radius in radii {
        let mut min_margin = f64::INFINITY;
        let mut min_curv = f64::INFINITY;
        for p in sphere_points(n, radius, 64) {
            let jet = eval_jet(spec, &p, 2)?;
            let u_sq: f64 = jet.u.iter().map(|v| v * v).sum();
            let rhs = (2.0 * radius * radius / (3.0 * n as f64) + 1.0)
                * (sup_ball * sup_ball + 12.0 * n as f64);
            min_margin = min_margin.min(rhs - u_sq);
            let pack = crate::geometry::curvature_pack(&jet, Signature::Euclidean)?;
            let h_norm = crate::geometry::norm(&pack.hcomp);
            min_curv = min_curv.min(c_curv * (1.0 + radius) - h_norm);
        }
        per_radius.push(RadiusMargin { radius, min_margin, min_curvature_margin: min_curv });
    }
    Ok(GrowthMargins { sup_ball, sup_sampling_gap, per_radius })
}

/// Residuals and side conditions of the generalized linear system with
/// coefficients a(x): the system residual per point, the uniform-bound
/// margin `sigma - lambda_max(a)`, and for `|x| >= r0` the decay margin
/// `c |x|^{2 tau - 2} - sum a^{ij} u^a_i u^a_j`.
#[derive(Clone, Debug)]
pub struct GelReport {
    pub residual_sup: f64,
    pub sigma_margin_min: f64,
    pub decay_margin_min: Option<f64>,
    pub rows: Vec<GelRow>,
}

#[derive(Clone, Debug)]
pub struct GelRow {
    pub x: Vec<f64>,
    pub residual: Vec<f64>,
    pub sigma_margin: f64,
    pub decay_margin: Option<f64>,
}

pub fn gel_residual_and_conditions(
    a_field: &dyn MatrixField,
    spec: &GraphSpec,
    grid: &[Vec<f64>],
    constants: &GrowthConstants,
) -> Result<GelReport> {
    let (n, m) = (spec.n, spec.m);
    let mut rows = Vec::with_capacity(grid.len());
    let mut residual_sup: f64 = 0.0;
    let mut sigma_margin_min = f64::INFINITY;
    let mut decay_margin_min: Option<f64> = None;
    for x in grid {
        let a = a_field.eval(x)?;
        if a.asymmetry() > 1e-12 * a.max_abs().max(1.0) {
            return Err(Error::InvalidCoefficients("coefficients not symmetric".into()));
        }
        let eig = jacobi_eigen_sym(&a)?;
        if eig.values.last().copied().unwrap_or(0.0) <= 0.0 {
            return Err(Error::InvalidCoefficients("coefficients not positive definite".into()));
        }
        let jet = eval_jet(spec, x, 2)?;
        let mut residual = vec![0.0; m];
        for alpha in 0..m {
            let mut traced = 0.0;
            for i in 0..n {
                for j in 0..n {
                    traced += a[(i, j)] * jet.d2u_at(alpha, i, j);
                }
            }
            let drift: f64 = (0..n).map(|i| x[i] * jet.du_at(alpha, i)).sum();
            residual[alpha] = traced + jet.u[alpha] - drift;
        }
        residual_sup = residual_sup.max(crate::geometry::norm(&residual));
        let sigma_margin = constants.sigma - eig.values[0];
        sigma_margin_min = sigma_margin_min.min(sigma_margin);
        let r = crate::geometry::norm(x);
        let decay_margin = if r >= constants.r0 {
            let mut quad = 0.0;
            for alpha in 0..m {
                for i in 0..n {
                    for j in 0..n {
                        quad += a[(i, j)] * jet.du_at(alpha, i) * jet.du_at(alpha, j);
                    }
                }
            }
            let margin = constants.c_decay * r.powf(2.0 * constants.tau - 2.0) - quad;
            decay_margin_min =
                Some(decay_margin_min.map_or(margin, |best: f64| best.min(margin)));
            Some(margin)
        } else {
            None
        };
        rows.push(GelRow { x: x.clone(), residual, sigma_margin, decay_margin });
    }
    Ok(GelReport { residual_sup, sigma_margin_min, decay_margin_min, rows })
}

/// Value of the polynomial growth bound
/// `C (1 + sup_term)(1 + |x|^{max(s, tau)})` with C a free input.
pub fn polynomial_growth_bound(
    constants: &GrowthConstants,
    sup_term: f64,
    x: &[f64],
    c: f64,
) -> f64 {
    let exp = constants.s.max(constants.tau);
    c * (1.0 + sup_term) * (1.0 + crate::geometry::norm(x).powf(exp))
}

/// Which of the two sup inequalities holds at radius R: the decay-driven
/// absolute bound or the shrink-and-shift comparison.
#[derive(Clone, Debug)]
pub struct SupDichotomy {
    pub radius: f64,
    pub inner_radius: f64,
    pub sup_outer_sq: f64,
    pub sup_inner_sq: f64,
    pub absolute_margin: f64,
    pub comparison_margin: f64,
    pub holds: bool,
}

pub fn sup_dichotomy_check(
    sup_abs_u: &dyn Fn(f64) -> Result<f64>,
    constants: &GrowthConstants,
    radius: f64,
) -> Result<SupDichotomy> {
    if radius <= constants.r_big {
        return Err(Error::OutOfRange { r: radius, r0: constants.r_big });
    }
    let inner = constants.inner_radius(radius);
    let sup_outer = sup_abs_u(radius)?;
    let sup_inner = sup_abs_u(inner)?;
    let sup_outer_sq = sup_outer * sup_outer;
    let sup_inner_sq = sup_inner * sup_inner;
    let theta = constants.theta;
    let absolute = 3.0 * constants.c_decay * radius.powf(2.0 * constants.tau)
        / (theta.powf(2.0 * constants.tau) * (1.0 - theta * theta))
        - sup_outer_sq;
    let comparison = constants.k.powf(2.0 * constants.s) * sup_inner_sq - sup_outer_sq;
    Ok(SupDichotomy {
        radius,
        inner_radius: inner,
        sup_outer_sq,
        sup_inner_sq,
        absolute_margin: absolute,
        comparison_margin: comparison,
        holds: absolute >= 0.0 || comparison >= 0.0,
    })
}
