//! Spacelike-graph analysis in pseudo-Euclidean space of index m: the
//! volume reciprocal `*dx = 1/sqrt(det g)`, the drift Laplacian
//! `P = Laplace - <X, grad .>`, the adapted-frame identities for the
//! gradient and Laplacian of *dx, and the subexponential-decay diagnostic.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd::{FDPolicy, FdLadder};
use crate::fields::ScalarField;
use crate::geometry::{induced_metric, singular_frame, Signature};
use crate::jets::{eval_jet, GraphSpec, Jet};
use crate::report::{tol, CheckReport};

/// `*dx = 1/sqrt(det g)` evaluated by two routes: LU determinant of g and
/// the singular-value product `prod (1 - lambda_i^2)^{-1/2}`.
#[derive(Clone, Debug)]
pub struct StarDx {
    pub x: Vec<f64>,
    pub value: f64,
    pub lambda_route: f64,
    pub discrepancy: f64,
}

pub fn star_dx(jet: &Jet) -> Result<StarDx> {
    let pack = induced_metric(jet, Signature::PseudoEuclidean)?;
    let value = 1.0 / pack.detg.sqrt();
    let frame = singular_frame(jet, Signature::PseudoEuclidean)?;
    let mut prod = 1.0;
    for &l in &frame.lambdas {
        prod *= 1.0 - l * l;
    }
    let lambda_route = 1.0 / prod.sqrt();
    Ok(StarDx {
        x: jet.x.clone(),
        value,
        lambda_route,
        discrepancy: (value - lambda_route).abs(),
    })
}

/// Signed diagonal slopes and the adapted-frame second fundamental form
/// `h^a_ij = u^a_ij / (sqrt(1-l_a^2) sqrt(1-l_i^2) sqrt(1-l_j^2))` of a spec
/// whose differential is diagonal at x.
#[derive(Clone, Debug)]
pub struct AdaptedFrame {
    pub lambdas: Vec<f64>,
    /// layout `[a * n * n + i * n + j]`
    pub h: Vec<f64>,
}

/// Reject points where du is not diagonal (the frame identities below are
/// derived exactly at adapted points).
pub fn adapted_frame(jet: &Jet) -> Result<AdaptedFrame> {
    let (n, m) = (jet.n, jet.m);
    let mut offdiag = 0.0f64;
    for a in 0..m {
        for i in 0..n {
            if a != i {
                offdiag = offdiag.max(jet.du_at(a, i).abs());
            }
        }
    }
    if offdiag > 1e-12 {
        return Err(Error::FrameNotAdapted { max_offdiag: offdiag });
    }
    let mut lambdas = vec![0.0; n];
    for i in 0..n.min(m) {
        lambdas[i] = jet.du_at(i, i);
    }
    let lmax = lambdas.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    if lmax > 1.0 - crate::geometry::SPACELIKE_MARGIN {
        return Err(Error::NotSpacelike { max_lambda: lmax });
    }
    let gamma = |i: usize| (1.0 - lambdas.get(i).copied().unwrap_or(0.0).powi(2)).sqrt();
    let mut h = vec![0.0; m * n * n];
    for a in 0..m {
        let ga = (1.0 - lambdas.get(a).copied().unwrap_or(0.0).powi(2)).sqrt();
        for i in 0..n {
            for j in 0..n {
                h[(a * n + i) * n + j] = jet.d2u_at(a, i, j) / (ga * gamma(i) * gamma(j));
            }
        }
    }
    Ok(AdaptedFrame { lambdas, h })
}

/// At an adapted point, compare the e_i-directional derivative of *dx
/// (chain rule through `d_k(*dx) = -(1/2)(*dx) g^{pq} d_k g_{pq}`) against
/// the frame form `sum_j h^j_{ij} lambda_j *dx`. One report per direction.
pub fn grad_stardx_identity(spec: &GraphSpec, x: &[f64]) -> Result<Vec<CheckReport>> {
    let jet = eval_jet(spec, x, 2)?;
    let frame = adapted_frame(&jet)?;
    let pack = induced_metric(&jet, Signature::PseudoEuclidean)?;
    let sdx = 1.0 / pack.detg.sqrt();
    let (n, m) = (jet.n, jet.m);

    // d_k(*dx) for all k, from the metric derivative.
    let mut dstar = vec![0.0; n];
    for k in 0..n {
        let mut contraction = 0.0;
        for p in 0..n {
            for q in 0..n {
                let mut dg = 0.0;
                for a in 0..m {
                    dg -= jet.d2u_at(a, p, k) * jet.du_at(a, q)
                        + jet.du_at(a, p) * jet.d2u_at(a, q, k);
                }
                contraction += pack.ginv[(p, q)] * dg;
            }
        }
        dstar[k] = -0.5 * sdx * contraction;
    }

    let mut reports = Vec::with_capacity(n);
    for i in 0..n {
        let gamma_i = (1.0 - frame.lambdas[i].powi(2)).sqrt();
        // e_i has base part E_i / sqrt(1 - lambda_i^2).
        let lhs = dstar[i] / gamma_i;
        let mut rhs = 0.0;
        for j in 0..n.min(m) {
            rhs += frame.h[(j * n + i) * n + j] * frame.lambdas[j] * sdx;
        }
        reports.push(CheckReport::compare(format!("grad-stardx-e{i}"), lhs, rhs, tol::ANALYTIC));
    }
    Ok(reports)
}

/// Divergence-form Laplace-Beltrami and the drift operator on a scalar
/// field: `Lap f = (det g)^{-1/2} d_i(sqrt(det g) g^{ij} d_j f)` and
/// `P f = Lap f - g^{ij} <X, d_i X> f_j` with the pseudo inner product
/// `<X, d_i X> = x_i - sum_a u^a u^a_i`.
#[derive(Clone, Debug)]
pub struct DriftValue {
    pub laplace: f64,
    pub p: f64,
}

pub fn laplace_beltrami_p(
    spec: &GraphSpec,
    f_field: &dyn ScalarField,
    x: &[f64],
) -> Result<DriftValue> {
    let jet = eval_jet(spec, x, 3)?;
    let pack = induced_metric(&jet, Signature::PseudoEuclidean)?;
    let (n, m) = (jet.n, jet.m);
    let fj = f_field.jet2(x)?;

    let dg = |p: usize, q: usize, k: usize| -> f64 {
        let mut acc = 0.0;
        for a in 0..m {
            acc -= jet.d2u_at(a, p, k) * jet.du_at(a, q) + jet.du_at(a, p) * jet.d2u_at(a, q, k);
        }
        acc
    };

    // Lap f = g^{ij} f_ij + b^j f_j,
    // b^j = (1/2) g^{ij} g^{pq} d_i g_{pq} + d_i g^{ij}.
    let mut laplace = 0.0;
    for i in 0..n {
        for j in 0..n {
            laplace += pack.ginv[(i, j)] * fj.hess[(i, j)];
        }
    }
    for j in 0..n {
        let mut b = 0.0;
        for i in 0..n {
            let mut trace_term = 0.0;
            for p in 0..n {
                for q in 0..n {
                    trace_term += pack.ginv[(p, q)] * dg(p, q, i);
                }
            }
            b += 0.5 * pack.ginv[(i, j)] * trace_term;
            // d_i g^{ij} = -g^{ia} g^{jb} d_i g_{ab}
            for a in 0..n {
                for bb in 0..n {
                    b -= pack.ginv[(i, a)] * pack.ginv[(j, bb)] * dg(a, bb, i);
                }
            }
        }
        laplace += b * fj.grad[j];
    }

    let mut drift = 0.0;
    for i in 0..n {
        let mut xdotdix = x[i];
        for a in 0..m {
            xdotdix -= jet.u[a] * jet.du_at(a, i);
        }
        for j in 0..n {
            drift += pack.ginv[(i, j)] * xdotdix * fj.grad[j];
        }
    }
    Ok(DriftValue { laplace, p: laplace - drift })
}

/// Frame data on the pseudo side: signed slopes with |lambda_i| < 1 and the
/// adapted-frame second fundamental form, symmetric in the lower indices.
#[derive(Clone, Debug)]
pub struct PseudoFrameData {
    pub n: usize,
    pub m: usize,
    pub lambdas: Vec<f64>,
    /// layout `[a * n * n + i * n + j]`
    pub h: Vec<f64>,
}

impl PseudoFrameData {
    pub fn new(n: usize, m: usize, lambdas: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if lambdas.len() != n {
            return Err(Error::SpecInvalid("lambdas must have length n".into()));
        }
        let lmax = lambdas.iter().fold(0.0f64, |a, l| a.max(l.abs()));
        if lmax >= 1.0 {
            return Err(Error::NotSpacelike { max_lambda: lmax });
        }
        if h.len() != m * n * n {
            return Err(Error::SpecInvalid("h must have m*n*n entries".into()));
        }
        let data = PseudoFrameData { n, m, lambdas, h };
        for a in 0..m {
            for i in 0..n {
                for j in 0..n {
                    if (data.h_at(a, i, j) - data.h_at(a, j, i)).abs() != 0.0 {
                        return Err(Error::SpecInvalid("h must be exactly symmetric".into()));
                    }
                }
            }
        }
        Ok(data)
    }

    /// Zero-extended access: h^a_ij = 0 whenever the component label exceeds
    /// m or a coordinate index exceeds n.
    pub fn h_at(&self, a: usize, i: usize, j: usize) -> f64 {
        if a >= self.m || i >= self.n || j >= self.n {
            0.0
        } else {
            self.h[(a * self.n + i) * self.n + j]
        }
    }

    fn lambda(&self, i: usize) -> f64 {
        self.lambdas.get(i).copied().unwrap_or(0.0)
    }
}

/// Margins of the two frame inequalities and the sum-of-squares identity
/// for the drift of the volume element.
#[derive(Clone, Debug, Serialize)]
pub struct FrameInequalityReport {
    /// `sum_{i, j != k} (h^k_ij)^2 - |sum_{i, j != k} l_j l_k h^k_ij h^j_ik|`
    pub cauchy_margin: f64,
    /// bracket of the drift Laplacian minus `sum_i (sum_j l_j h^j_ij)^2`
    pub chain_margin: f64,
    /// |three-term expansion - antisymmetrized-square form|
    pub sos_identity_discrepancy: f64,
}

pub fn frame_inequality_check(data: &PseudoFrameData) -> FrameInequalityReport {
    let n = data.n;
    let top = n.max(data.m);

    let mut cross = 0.0;
    let mut squares = 0.0;
    for i in 0..n {
        for j in 0..top {
            for k in 0..top {
                if j == k {
                    continue;
                }
                cross += data.lambda(j) * data.lambda(k) * data.h_at(k, i, j) * data.h_at(j, i, k);
                squares += data.h_at(k, i, j).powi(2);
            }
        }
    }
    let cauchy_margin = squares - cross.abs();

    // bracket = sum_{i, j != k} l_j l_k h^j_ij h^k_ik
    //         - sum_{i, j != k} l_j l_k h^k_ij h^j_ik
    //         + sum_{i, j, a} (h^a_ij)^2
    let mut diag_cross = 0.0;
    for i in 0..n {
        for j in 0..top {
            for k in 0..top {
                if j == k {
                    continue;
                }
                diag_cross +=
                    data.lambda(j) * data.lambda(k) * data.h_at(j, i, j) * data.h_at(k, i, k);
            }
        }
    }
    let mut all_squares = 0.0;
    for a in 0..data.m {
        for i in 0..n {
            for j in 0..n {
                all_squares += data.h_at(a, i, j).powi(2);
            }
        }
    }
    let bracket = diag_cross - cross + all_squares;
    let mut grad_sq = 0.0;
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..top {
            s += data.lambda(j) * data.h_at(j, i, j);
        }
        grad_sq += s * s;
    }
    let chain_margin = bracket - grad_sq;

    FrameInequalityReport {
        cauchy_margin,
        chain_margin,
        sos_identity_discrepancy: sos_identity_discrepancy(data),
    }
}

/// The drift of `-ln det g` in coordinates admits two displays: the
/// three-term expansion and the antisymmetrized-square form. Both are
/// evaluated as pure multilinear algebra with `du = diag(lambda)` and
/// `g = diag(1 - lambda^2)`; they must agree to roundoff.
fn sos_identity_discrepancy(data: &PseudoFrameData) -> f64 {
    let n = data.n;
    let m = data.m;
    let du = |a: usize, i: usize| -> f64 {
        if a == i && a < n.min(m) {
            data.lambda(a)
        } else {
            0.0
        }
    };
    let ginv: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 - data.lambda(i).powi(2))).collect();

    // Three-term form: 2 sum_ab g g g (h^a_mi du^a_n)(h^b_kj du^b_l) with the
    // pattern (m<->n antisymmetrized later), plus the Hessian square.
    let mut t1 = 0.0;
    let mut t2 = 0.0;
    for a in 0..m {
        for b in 0..m {
            for i in 0..n {
                for mm in 0..n {
                    for nn in 0..n {
                        // g^{ij}, g^{mk}, g^{nl} diagonal: j = i, k = mm, l = nn.
                        let w = ginv[i] * ginv[mm] * ginv[nn];
                        t1 += w
                            * data.h_at(a, mm, i)
                            * du(a, nn)
                            * data.h_at(b, mm, i)
                            * du(b, nn);
                        t2 += w
                            * data.h_at(a, nn, i)
                            * du(a, mm)
                            * data.h_at(b, mm, i)
                            * du(b, nn);
                    }
                }
            }
        }
    }
    let mut hess_sq = 0.0;
    for a in 0..m {
        for i in 0..n {
            for mm in 0..n {
                for nn in 0..n {
                    if mm != nn {
                        continue;
                    }
                    hess_sq += ginv[i] * ginv[mm] * data.h_at(a, mm, i) * data.h_at(a, nn, i);
                }
            }
        }
    }
    let three_term = 2.0 * t1 - 2.0 * t2 + 2.0 * hess_sq;

    // Antisymmetrized-square form:
    // sum g^{ij} g^{mk} g^{nl} T_{mn,i} T_{kl,j} + Hessian square, with
    // T_{mn,i} = sum_a (h^a_mi du^a_n - h^a_ni du^a_m).
    let t_at = |mm: usize, nn: usize, i: usize| -> f64 {
        let mut acc = 0.0;
        for a in 0..m {
            acc += data.h_at(a, mm, i) * du(a, nn) - data.h_at(a, nn, i) * du(a, mm);
        }
        acc
    };
    let mut sos = 0.0;
    for i in 0..n {
        for mm in 0..n {
            for nn in 0..n {
                let w = ginv[i] * ginv[mm] * ginv[nn];
                sos += w * t_at(mm, nn, i) * t_at(mm, nn, i);
            }
        }
    }
    let antisym_form = sos + 2.0 * hess_sq;
    (three_term - antisym_form).abs()
}

/// Profile of `log det g / |x|` along sampled directions at increasing
/// radii. Subexponential decay of det g means the ratio tends to zero; a
/// ratio drifting away from zero flags the hypothesis. Diagnostic only.
#[derive(Clone, Debug, Serialize)]
pub struct DecayProfile {
    pub rows: Vec<DecayRow>,
    pub trend: DecayTrend,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub radius: f64,
    /// max over sampled directions of |log det g| / |x|
    pub max_ratio: f64,
    pub min_detg: f64,
    /// directions skipped because the graph stopped being spacelike there
    pub skipped: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayTrend {
    TowardZero,
    Flat,
    AwayFromZero,
}

pub fn decay_diagnostic(
    spec: &GraphSpec,
    radii: &[f64],
    directions_per_radius: usize,
) -> Result<DecayProfile> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::SpecInvalid("radii must be a nonempty increasing list".into()));
    }
    let mut rows = Vec::with_capacity(radii.len());
    for &radius in radii {
        if radius <= 0.0 {
            return Err(Error::InvalidRadius(radius));
        }
        let mut max_ratio: f64 = 0.0;
        let mut min_detg = f64::INFINITY;
        let mut skipped = 0usize;
        for p in crate::rescale::sphere_points(spec.n, radius, directions_per_radius) {
            let jet = eval_jet(spec, &p, 1)?;
            match induced_metric(&jet, Signature::PseudoEuclidean) {
                Ok(pack) => {
                    max_ratio = max_ratio.max(pack.detg.ln().abs() / radius);
                    min_detg = min_detg.min(pack.detg);
                }
                Err(Error::NotSpacelike { .. }) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
        rows.push(DecayRow { radius, max_ratio, min_detg, skipped });
    }
    let first = rows.first().map(|r| r.max_ratio).unwrap_or(0.0);
    let last = rows.last().map(|r| r.max_ratio).unwrap_or(0.0);
    let trend = if last < 0.5 * first || last < 1e-8 {
        DecayTrend::TowardZero
    } else if last > 2.0 * first.max(1e-8) {
        DecayTrend::AwayFromZero
    } else {
        DecayTrend::Flat
    };
    Ok(DecayProfile { rows, trend })
}

/// Finite-difference value of `<nabla_{e_i} nabla_{e_i} e_j, e_j>` at an
/// adapted point, with the frame extended by pseudo-orthogonal projection of
/// the adapted vectors onto nearby tangent spaces (the tangential derivative
/// of that extension vanishes at the base point). The expected value is
/// `sum_a (h^a_ij)^2`.
pub fn frame_second_derivative_fd(
    spec: &GraphSpec,
    x: &[f64],
    i: usize,
    j: usize,
    policy: &FDPolicy,
) -> Result<FdLadder> {
    let (n, m) = (spec.n, spec.m);
    let dim = n + m;
    let base = eval_jet(spec, x, 2)?;
    let frame0 = adapted_frame(&base)?;

    // Adapted frame vectors at the base point.
    let e_of = |k: usize| -> Vec<f64> {
        let mut v = vec![0.0; dim];
        let lk = frame0.lambdas[k];
        let g = (1.0 - lk * lk).sqrt();
        v[k] = 1.0 / g;
        if k < m {
            v[n + k] = lk / g;
        }
        v
    };
    let ei0 = e_of(i);
    let ej0 = e_of(j);

    // Pseudo-orthogonal projection of a constant ambient vector onto the
    // tangent space at base point y, normalized to unit length.
    let extended = |y: &[f64], v0: &[f64]| -> Result<Vec<f64>> {
        let jet = eval_jet(spec, y, 1)?;
        let pack = induced_metric(&jet, Signature::PseudoEuclidean)?;
        let mut frame = vec![vec![0.0; dim]; n];
        for (k, f) in frame.iter_mut().enumerate() {
            f[k] = 1.0;
            for a in 0..m {
                f[n + a] = jet.du_at(a, k);
            }
        }
        let sig = Signature::PseudoEuclidean;
        let rhs: Vec<f64> = (0..n).map(|k| sig.ambient_dot(n, v0, &frame[k])).collect();
        let coef = pack.ginv.matvec(&rhs);
        let mut w = vec![0.0; dim];
        for k in 0..n {
            for d in 0..dim {
                w[d] += coef[k] * frame[k][d];
            }
        }
        let norm_sq = sig.ambient_dot(n, &w, &w);
        if norm_sq <= 0.0 {
            return Err(Error::NotSpacelike { max_lambda: f64::NAN });
        }
        let inv = 1.0 / norm_sq.sqrt();
        Ok(w.iter().map(|c| c * inv).collect())
    };

    // First covariant derivative W(y) = D_{e_i(y)} ej(y), componentwise.
    let w_field = |y: &[f64], h: f64| -> Result<Vec<f64>> {
        let ei_y = extended(y, &ei0)?;
        let bdir: Vec<f64> = ei_y[..n].to_vec();
        let yp: Vec<f64> = y.iter().zip(&bdir).map(|(a, b)| a + h * b).collect();
        let ym: Vec<f64> = y.iter().zip(&bdir).map(|(a, b)| a - h * b).collect();
        let ep = extended(&yp, &ej0)?;
        let em = extended(&ym, &ej0)?;
        Ok(ep.iter().zip(&em).map(|(p, q)| (p - q) / (2.0 * h)).collect())
    };

    let mut levels = Vec::with_capacity(policy.levels);
    for l in 0..policy.levels {
        let h = policy.step(l);
        let bdir: Vec<f64> = ei0[..n].to_vec();
        let xp: Vec<f64> = x.iter().zip(&bdir).map(|(a, b)| a + h * b).collect();
        let xm: Vec<f64> = x.iter().zip(&bdir).map(|(a, b)| a - h * b).collect();
        let wp = w_field(&xp, h)?;
        let wm = w_field(&xm, h)?;
        let ddot: Vec<f64> = wp.iter().zip(&wm).map(|(p, q)| (p - q) / (2.0 * h)).collect();
        levels.push(Signature::PseudoEuclidean.ambient_dot(n, &ddot, &ej0));
    }
    Ok(FdLadder::from_levels(levels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{ConstField, HalfSquareField};
    use crate::jets::{Component, RadialProfile, Term};
    use crate::linalg::Mat;
    use approx::assert_abs_diff_eq;
    use num_rational::Ratio;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn star_dx_flat_and_sloped() {
        let zero = GraphSpec::zero(2, 1);
        let jet = eval_jet(&zero, &[0.3, 0.3], 2).unwrap();
        let s = star_dx(&jet).unwrap();
        assert_abs_diff_eq!(s.value, 1.0, epsilon = 1e-14);

        // n = m = 1, slope 1/2: det g = 3/4, *dx = 2/sqrt(3).
        let spec = GraphSpec::linear(vec![vec![0.5]]).unwrap();
        let jet = eval_jet(&spec, &[1.0], 2).unwrap();
        let s = star_dx(&jet).unwrap();
        assert_abs_diff_eq!(s.value, 2.0 / 3.0f64.sqrt(), epsilon = 1e-14);
        assert!(s.discrepancy < 1e-13);
    }

    #[test]
    fn star_dx_near_lightlike_rejected() {
        let spec = GraphSpec::linear(vec![vec![1.0 - 1e-9]]).unwrap();
        let jet = eval_jet(&spec, &[0.0], 2).unwrap();
        assert!(matches!(star_dx(&jet), Err(Error::NotSpacelike { .. })));
    }

    /// diag slopes plus a quadratic perturbation, adapted at the origin
    fn perturbed_spec(lambdas: &[f64], seed: u64) -> GraphSpec {
        let n = lambdas.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut components = Vec::new();
        for (a, &l) in lambdas.iter().enumerate() {
            let mut terms = Vec::new();
            let mut row = vec![0.0; n];
            row[a] = l;
            for i in 0..n {
                for j in i..n {
                    let c = rng.gen_range(-20i64..=20);
                    if c != 0 {
                        let mut exps = vec![0u32; n];
                        exps[i] += 1;
                        exps[j] += 1;
                        terms.push(Term { coef: Ratio::new(c, 200), exps });
                    }
                }
            }
            components.push(Component::Linear { matrix: vec![row] });
            if !terms.is_empty() {
                // merge the quadratic into the same row by polynomial with the
                // linear part as degree-1 terms
                components.pop();
                let mut all = terms;
                if l != 0.0 {
                    // represent the linear slope exactly as a rational when possible
                    let mut exps = vec![0u32; n];
                    exps[a] = 1;
                    let r = Ratio::approximate_float(l).unwrap();
                    all.push(Term { coef: r, exps });
                }
                components.push(Component::Poly { terms: all });
            }
        }
        GraphSpec::new(n, n, components).unwrap()
    }

    #[test]
    fn grad_stardx_identity_on_adapted_specs() {
        for seed in 0..3u64 {
            let spec = perturbed_spec(&[0.4, -0.3], seed);
            let reports = grad_stardx_identity(&spec, &[0.0, 0.0]).unwrap();
            for r in reports {
                assert!(r.pass, "{r:?}");
            }
        }
    }

    #[test]
    fn grad_stardx_rejects_non_adapted() {
        let spec = GraphSpec::linear(vec![vec![0.0, 0.5], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            grad_stardx_identity(&spec, &[0.0, 0.0]),
            Err(Error::FrameNotAdapted { .. })
        ));
    }

    #[test]
    fn flat_drift_operator_reduces_to_euclidean() {
        let spec = GraphSpec::zero(2, 1);
        let x = [0.7, -0.4];
        let v = laplace_beltrami_p(&spec, &HalfSquareField, &x).unwrap();
        assert_abs_diff_eq!(v.laplace, 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(v.p, 2.0 - (x[0] * x[0] + x[1] * x[1]), epsilon = 1e-13);

        let c = laplace_beltrami_p(&spec, &ConstField(5.0), &x).unwrap();
        assert_eq!(c.laplace, 0.0);
        assert_eq!(c.p, 0.0);

        // f = x1 on the flat graph: P f = -x1.
        let f = crate::fields::FnScalarField {
            value: |y: &[f64]| y[0],
            grad: |y: &[f64]| {
                let mut g = vec![0.0; y.len()];
                g[0] = 1.0;
                g
            },
            hess: |y: &[f64]| Mat::zeros(y.len(), y.len()),
        };
        let v = laplace_beltrami_p(&spec, &f, &x).unwrap();
        assert_abs_diff_eq!(v.p, -x[0], epsilon = 1e-14);
    }

    #[test]
    fn curved_laplacian_matches_divergence_form_fd() {
        // Independent oracle: finite-difference the divergence form.
        let spec = perturbed_spec(&[0.3, 0.2], 11);
        let x = [0.15, -0.1];
        let f = HalfSquareField;
        let got = laplace_beltrami_p(&spec, &f, &x).unwrap();

        let flux = |y: &[f64], j: usize| -> f64 {
            let jet = eval_jet(&spec, y, 1).unwrap();
            let pack = induced_metric(&jet, Signature::PseudoEuclidean).unwrap();
            let fj = f.jet2(y).unwrap();
            let mut acc = 0.0;
            for k in 0..2 {
                acc += pack.ginv[(j, k)] * fj.grad[k];
            }
            pack.detg.sqrt() * acc
        };
        let h = 1e-5;
        let mut div = 0.0;
        for jdir in 0..2 {
            let mut yp = x.to_vec();
            let mut ym = x.to_vec();
            yp[jdir] += h;
            ym[jdir] -= h;
            div += (flux(&yp, jdir) - flux(&ym, jdir)) / (2.0 * h);
        }
        let jet = eval_jet(&spec, &x, 1).unwrap();
        let pack = induced_metric(&jet, Signature::PseudoEuclidean).unwrap();
        let want = div / pack.detg.sqrt();
        assert_abs_diff_eq!(got.laplace, want, epsilon = 1e-7);
    }

    fn random_frame_data(rng: &mut ChaCha8Rng, n: usize, m: usize, lcap: f64) -> PseudoFrameData {
        let lambdas: Vec<f64> = (0..n).map(|_| rng.gen_range(-lcap..lcap)).collect();
        let mut h = vec![0.0; m * n * n];
        for a in 0..m {
            for i in 0..n {
                for j in i..n {
                    let v = rng.gen_range(-1.0..1.0);
                    h[(a * n + i) * n + j] = v;
                    h[(a * n + j) * n + i] = v;
                }
            }
        }
        PseudoFrameData::new(n, m, lambdas, h).unwrap()
    }

    #[test]
    fn frame_inequalities_zero_h() {
        let data = PseudoFrameData::new(2, 2, vec![0.3, -0.2], vec![0.0; 8]).unwrap();
        let rep = frame_inequality_check(&data);
        assert_eq!(rep.cauchy_margin, 0.0);
        assert_eq!(rep.chain_margin, 0.0);
        assert_eq!(rep.sos_identity_discrepancy, 0.0);
    }

    #[test]
    fn frame_inequalities_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let n = rng.gen_range(1..=3);
            let m = rng.gen_range(1..=3);
            let data = random_frame_data(&mut rng, n, m, 0.9);
            let rep = frame_inequality_check(&data);
            assert!(rep.cauchy_margin >= -1e-12, "{rep:?}");
            assert!(rep.chain_margin >= -1e-12, "{rep:?}");
            assert!(rep.sos_identity_discrepancy <= 1e-12, "{rep:?}");
        }
    }

    #[test]
    fn decay_flat_and_linear() {
        let zero = GraphSpec::zero(2, 1);
        let profile = decay_diagnostic(&zero, &[1.0, 4.0, 16.0], 16).unwrap();
        for row in &profile.rows {
            assert_eq!(row.max_ratio, 0.0);
        }
        assert_eq!(profile.trend, DecayTrend::TowardZero);

        let linear = GraphSpec::linear(vec![vec![0.6, 0.0]]).unwrap();
        let profile = decay_diagnostic(&linear, &[1.0, 10.0, 100.0], 16).unwrap();
        assert_eq!(profile.trend, DecayTrend::TowardZero);
    }

    #[test]
    fn decay_flags_exponential_loss() {
        // Slope approaching 1: det g = 1 - (1 - e^{-x^2})^2 decays like a
        // Gaussian, so |log det g|/|x| grows with |x|.
        let spec =
            GraphSpec::new(1, 1, vec![Component::Radial { profile: RadialProfile::GaussRamp }])
                .unwrap();
        let profile = decay_diagnostic(&spec, &[1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(profile.trend, DecayTrend::AwayFromZero, "{profile:?}");
        assert!(profile.rows[2].max_ratio > profile.rows[0].max_ratio);
    }

    #[test]
    fn frame_second_derivative_matches_h_squares() {
        let spec = perturbed_spec(&[0.35, -0.25], 5);
        let x = [0.0, 0.0];
        let jet = eval_jet(&spec, &x, 2).unwrap();
        let frame = adapted_frame(&jet).unwrap();
        let n = 2;
        for i in 0..n {
            for j in 0..n {
                let mut want = 0.0;
                for a in 0..n {
                    want += frame.h[(a * n + i) * n + j].powi(2);
                }
                let ladder = frame_second_derivative_fd(
                    &spec,
                    &x,
                    i,
                    j,
                    &FDPolicy { h0: 1e-3, levels: 3 },
                )
                .unwrap();
                assert_abs_diff_eq!(ladder.extrapolated, want, epsilon = 2e-6);
            }
        }
    }
}
