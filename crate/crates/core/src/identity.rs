//! The drift operator `L_a f = a^{ij} f_ij - x . Df`, the
//! strong-sub-harmonic (SSH) predicate, the volume element
//! `phi = ln det g` with exact derivatives, and the identities tying
//! `L_g phi` to its singular-value frame form.

use crate::error::{Error, Result};
use crate::fields::{MatrixField, ScalarField};
use crate::geometry::{induced_metric, Signature};
use crate::jets::{eval_jet, GraphSpec, Jet};
use crate::linalg::{jacobi_eigen_sym, Mat};
use crate::report::{tol, CheckReport};

/// SSH margin constant. `phi` is SSH when
/// `L_g phi >= eps * g^{ij} phi_i phi_j` everywhere.
#[derive(Clone, Copy, Debug)]
pub struct SSHParams {
    pub epsilon: f64,
}

impl SSHParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::SpecInvalid(format!("epsilon = {epsilon} outside (0, 1]")));
        }
        Ok(SSHParams { epsilon })
    }
}

/// `L_a f = a^{ij} f_ij - x . Df` for symmetric positive definite a(x).
pub fn apply_l(a_field: &dyn MatrixField, phi: &dyn ScalarField, x: &[f64]) -> Result<f64> {
    let a = a_field.eval(x)?;
    if a.asymmetry() > 1e-12 * a.max_abs().max(1.0) {
        return Err(Error::InvalidCoefficients("coefficient matrix is not symmetric".into()));
    }
    let eig = jacobi_eigen_sym(&a)?;
    if eig.values.last().copied().unwrap_or(0.0) <= 0.0 {
        return Err(Error::InvalidCoefficients("coefficient matrix is not positive definite".into()));
    }
    let jet = phi.jet2(x)?;
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * jet.hess[(i, j)];
        }
    }
    for i in 0..n {
        acc -= x[i] * jet.grad[i];
    }
    Ok(acc)
}

/// Per-point SSH margin `L_g phi - eps g^{ij} phi_i phi_j` over a grid.
#[derive(Clone, Debug)]
pub struct SshMarginReport {
    pub margins: Vec<(Vec<f64>, f64)>,
    pub min_margin: f64,
    pub holds: bool,
}

pub fn ssh_margin(
    spec: &GraphSpec,
    phi: &dyn ScalarField,
    params: SSHParams,
    grid: &[Vec<f64>],
    sig: Signature,
) -> Result<SshMarginReport> {
    if grid.is_empty() {
        return Err(Error::SpecInvalid("empty grid".into()));
    }
    let mut margins = Vec::with_capacity(grid.len());
    let mut min_margin = f64::INFINITY;
    for x in grid {
        let jet = eval_jet(spec, x, 1)?;
        let pack = induced_metric(&jet, sig)?;
        let pj = phi.jet2(x)?;
        let n = spec.n;
        let mut l = 0.0;
        for i in 0..n {
            for j in 0..n {
                l += pack.ginv[(i, j)] * pj.hess[(i, j)];
            }
        }
        for i in 0..n {
            l -= x[i] * pj.grad[i];
        }
        let mut grad_sq = 0.0;
        for i in 0..n {
            for j in 0..n {
                grad_sq += pack.ginv[(i, j)] * pj.grad[i] * pj.grad[j];
            }
        }
        let margin = l - params.epsilon * grad_sq;
        min_margin = min_margin.min(margin);
        margins.push((x.clone(), margin));
    }
    Ok(SshMarginReport { margins, min_margin, holds: min_margin >= 0.0 })
}

/// `phi = ln det g` with exact first and second derivatives:
/// `phi_k = g^{pq} d_k g_{pq}` and its derivative, expanded through the
/// third-order jet of u.
#[derive(Clone, Debug)]
pub struct VolumePhi {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Mat,
}

pub fn volume_phi(jet: &Jet, sig: Signature) -> Result<VolumePhi> {
    assert!(jet.order >= 3, "volume_phi needs a third-order jet");
    let n = jet.n;
    let m = jet.m;
    let s = sig.sign();
    let pack = induced_metric(jet, sig)?;
    let ginv = &pack.ginv;

    // d_k g_{pq} = s * sum_a (u^a_pk u^a_q + u^a_p u^a_qk)
    let dg = |p: usize, q: usize, k: usize| -> f64 {
        let mut acc = 0.0;
        for a in 0..m {
            acc += jet.d2u_at(a, p, k) * jet.du_at(a, q) + jet.du_at(a, p) * jet.d2u_at(a, q, k);
        }
        s * acc
    };
    // d_l d_k g_{pq}
    let ddg = |p: usize, q: usize, k: usize, l: usize| -> f64 {
        let mut acc = 0.0;
        for a in 0..m {
            acc += jet.d3u_at(a, p, k, l) * jet.du_at(a, q)
                + jet.d2u_at(a, p, k) * jet.d2u_at(a, q, l)
                + jet.d2u_at(a, p, l) * jet.d2u_at(a, q, k)
                + jet.du_at(a, p) * jet.d3u_at(a, q, k, l);
        }
        s * acc
    };

    let mut grad = vec![0.0; n];
    for k in 0..n {
        let mut acc = 0.0;
        for p in 0..n {
            for q in 0..n {
                acc += ginv[(p, q)] * dg(p, q, k);
            }
        }
        grad[k] = acc;
    }

    let mut hess = Mat::zeros(n, n);
    for k in 0..n {
        for l in k..n {
            let mut acc = 0.0;
            // d_l g^{pq} = -g^{pa} g^{qb} d_l g_{ab}
            for p in 0..n {
                for q in 0..n {
                    let mut dginv = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            dginv -= ginv[(p, a)] * ginv[(q, b)] * dg(a, b, l);
                        }
                    }
                    acc += dginv * dg(p, q, k) + ginv[(p, q)] * ddg(p, q, k, l);
                }
            }
            hess[(k, l)] = acc;
            hess[(l, k)] = acc;
        }
    }

    Ok(VolumePhi { value: pack.detg.ln(), grad, hess })
}

/// Two independent routes to `g^{ij} phi_ij` for the Euclidean volume
/// element: the direct second derivative of `ln det g` versus the four-term
/// expansion in u-jets. A pure calculus identity, valid for any smooth u.
pub fn volume_laplacian_identity(spec: &GraphSpec, x: &[f64]) -> Result<CheckReport> {
    let jet = eval_jet(spec, x, 3)?;
    let sig = Signature::Euclidean;
    let pack = induced_metric(&jet, sig)?;
    let phi = volume_phi(&jet, sig)?;
    let n = spec.n;

    let mut lhs = 0.0;
    for i in 0..n {
        for j in 0..n {
            lhs += pack.ginv[(i, j)] * phi.hess[(i, j)];
        }
    }

    let rhs = volume_laplacian_expansion(&jet, &pack.ginv);
    Ok(CheckReport::compare("volume-laplacian-identity", lhs, rhs, tol::ANALYTIC))
}

/// The four-term expansion of `g^{ij} phi_ij` in the Euclidean signature:
/// two negative inverse-metric derivative terms, the Hessian square, and the
/// third-derivative term.
pub fn volume_laplacian_expansion(jet: &Jet, ginv: &Mat) -> f64 {
    let n = jet.n;
    let m = jet.m;

    // Per-component pieces: w^a = g^{-1} Du^a, M^a the Hessian.
    let mut w = vec![vec![0.0; n]; m];
    let mut hess = Vec::with_capacity(m);
    for a in 0..m {
        let grad: Vec<f64> = (0..n).map(|i| jet.du_at(a, i)).collect();
        w[a] = ginv.matvec(&grad);
        hess.push(jet.hessian_of(a));
    }

    let mut term1 = 0.0; // sum_ab (v^a . g^-1 v^b) tr(g^-1 M^a g^-1 M^b)
    let mut term2 = 0.0; // sum_ab w^b . (M^a g^-1 M^b) w^a
    let mut term3 = 0.0; // sum_a tr(g^-1 M^a g^-1 M^a)
    let mut term4 = 0.0; // sum_a (g^{ij} u^a_pij) w^a_p
    for a in 0..m {
        let ma_g = hess[a].matmul(ginv);
        term3 += ma_g.matmul(&ma_g).trace();
        for b in 0..m {
            let s_ab: f64 = (0..n).map(|i| jet.du_at(a, i) * w[b][i]).sum();
            let mb_g = hess[b].matmul(ginv);
            term1 += s_ab * ma_g.matmul(&mb_g).trace();
            let inner = hess[a].matmul(ginv).matmul(&hess[b]);
            let mut quad = 0.0;
            for p in 0..n {
                for q in 0..n {
                    quad += w[b][q] * inner[(q, p)] * w[a][p];
                }
            }
            term2 += quad;
        }
        for p in 0..n {
            let mut traced = 0.0;
            for i in 0..n {
                for j in 0..n {
                    traced += ginv[(i, j)] * jet.d3u_at(a, p, i, j);
                }
            }
            term4 += traced * w[a][p];
        }
    }
    -2.0 * term1 - 2.0 * term2 + 2.0 * term3 + 2.0 * term4
}

/// Frame data for the reduction of `L_g phi` on solutions: singular values
/// (padded with zeros to max(n, m)) and the Hessians in the diagonalizing
/// coordinates, symmetric in the two lower indices.
#[derive(Clone, Debug)]
pub struct FrameData {
    pub n: usize,
    pub m: usize,
    /// len = max(n, m); entries beyond min(n, m) must be zero.
    pub lambdas: Vec<f64>,
    /// `u^a_{pi}`, layout `[a * n * n + p * n + i]`.
    pub hessians: Vec<f64>,
}

impl FrameData {
    pub fn new(n: usize, m: usize, lambdas: Vec<f64>, hessians: Vec<f64>) -> Result<Self> {
        if lambdas.len() != n.max(m) {
            return Err(Error::SpecInvalid(format!(
                "lambdas has length {}, expected max(n, m) = {}",
                lambdas.len(),
                n.max(m)
            )));
        }
        if lambdas.iter().skip(n.min(m)).any(|&l| l != 0.0) {
            return Err(Error::SpecInvalid(
                "padded singular values beyond min(n, m) must be zero".into(),
            ));
        }
        if hessians.len() != m * n * n {
            return Err(Error::SpecInvalid("hessians must have m*n*n entries".into()));
        }
        let d = FrameData { n, m, lambdas, hessians };
        for a in 0..m {
            for p in 0..n {
                for i in 0..n {
                    if (d.h(a, p, i) - d.h(a, i, p)).abs() != 0.0 {
                        return Err(Error::SpecInvalid("hessians must be exactly symmetric".into()));
                    }
                }
            }
        }
        Ok(d)
    }

    /// `u^a_{pi}` with the zero-extension conventions: zero whenever the
    /// component label exceeds m or a coordinate index exceeds n.
    pub fn h(&self, a: usize, p: usize, i: usize) -> f64 {
        if a >= self.m || p >= self.n || i >= self.n {
            0.0
        } else {
            self.hessians[(a * self.n + p) * self.n + i]
        }
    }

    fn lambda(&self, i: usize) -> f64 {
        self.lambdas.get(i).copied().unwrap_or(0.0)
    }
}

/// Both routes to `L_g phi` on solutions, at a point where du is diagonal.
#[derive(Clone, Debug)]
pub struct FrameReduction {
    /// Three-term coordinate contraction with g built from the diagonal du.
    pub coordinate: f64,
    /// Explicit singular-value denominator form.
    pub frame: f64,
    pub discrepancy: f64,
}

/// Evaluate both closed forms of the reduced `L_g phi` (the drift term
/// already cancelled by the system) and report their discrepancy. Pure
/// multilinear algebra; the two must agree to roundoff.
pub fn frame_reduction(data: &FrameData) -> FrameReduction {
    let (n, m) = (data.n, data.m);
    let top = n.max(m);

    // Coordinate route: g = diag(1 + lambda_i^2) restricted to the n
    // coordinate directions, du diagonal.
    let du_at = |a: usize, i: usize| -> f64 {
        if a == i && a < n.min(m) {
            data.lambda(a)
        } else {
            0.0
        }
    };
    let ginv_diag: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + data.lambda(i).powi(2))).collect();

    let mut term1 = 0.0;
    let mut term2 = 0.0;
    let mut term3 = 0.0;
    for a in 0..m {
        for b in 0..m {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        continue;
                    }
                    for p in 0..n {
                        for k in 0..n {
                            if p != k {
                                continue;
                            }
                            for q in 0..n {
                                for l in 0..n {
                                    if q != l {
                                        continue;
                                    }
                                    let gijk =
                                        ginv_diag[i] * ginv_diag[p] * ginv_diag[q];
                                    term1 += gijk
                                        * data.h(a, p, i)
                                        * du_at(a, q)
                                        * data.h(b, k, j)
                                        * du_at(b, l);
                                    term2 += gijk
                                        * data.h(a, q, i)
                                        * du_at(a, p)
                                        * data.h(b, k, j)
                                        * du_at(b, l);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    for a in 0..m {
        for i in 0..n {
            for p in 0..n {
                term3 += ginv_diag[i] * ginv_diag[p] * data.h(a, p, i) * data.h(a, p, i);
            }
        }
    }
    let coordinate = -2.0 * term1 + 2.0 * term2 + 2.0 * term3;

    // Frame route with the explicit lambda denominators. Sums run over the
    // padded index range; out-of-range Hessian entries are zero.
    let den = |i: usize| 1.0 + data.lambda(i).powi(2);
    let mut f1 = 0.0;
    let mut f2 = 0.0;
    let mut f3 = 0.0;
    for i in 0..n {
        for p in 0..top {
            for q in 0..top {
                f1 += data.lambda(q).powi(2) * data.h(q, p, i).powi(2)
                    / (den(i) * den(p) * den(q));
                f3 += data.lambda(p) * data.lambda(q) * data.h(p, q, i) * data.h(q, p, i)
                    / (den(i) * den(p) * den(q));
            }
        }
        for a in 0..m {
            for p in 0..n {
                f2 += data.h(a, p, i).powi(2) / (den(i) * den(p));
            }
        }
    }
    let frame = -2.0 * f1 + 2.0 * f2 + 2.0 * f3;

    FrameReduction { coordinate, frame, discrepancy: (coordinate - frame).abs() }
}

/// `g^{ij} phi_i phi_j` in the frame variables:
/// `phi_k = 2 sum_p lambda_p u^p_{pk} / (1 + lambda_p^2)`.
pub fn frame_grad_phi_sq(data: &FrameData) -> f64 {
    let n = data.n;
    let top = n.max(data.m);
    let mut acc = 0.0;
    for i in 0..n {
        let mut phi_i = 0.0;
        for p in 0..top {
            phi_i += 2.0 * data.lambda(p) * data.h(p, p, i) / (1.0 + data.lambda(p).powi(2));
        }
        acc += phi_i * phi_i / (1.0 + data.lambda(i).powi(2));
    }
    acc
}

/// Report for the three rigidity conditions: pairwise products of singular
/// values at most one, det g below a threshold beta < 9, and commuting
/// Hessian contractions.
#[derive(Clone, Debug)]
pub struct RigidityReport {
    pub cond_products: bool,
    pub worst_product: f64,
    pub cond_det: bool,
    pub worst_detg: f64,
    pub beta: f64,
    pub cond_commutator: bool,
    pub worst_commutator: f64,
    pub per_point: Vec<RigidityPoint>,
}

#[derive(Clone, Debug)]
pub struct RigidityPoint {
    pub x: Vec<f64>,
    pub max_product: f64,
    pub detg: f64,
    pub commutator: f64,
}

pub fn rigidity_conditions(
    spec: &GraphSpec,
    grid: &[Vec<f64>],
    beta: f64,
) -> Result<RigidityReport> {
    if beta >= 9.0 {
        return Err(Error::InvalidThreshold(beta));
    }
    let sig = Signature::Euclidean;
    let mut worst_product = f64::NEG_INFINITY;
    let mut worst_detg = f64::NEG_INFINITY;
    let mut worst_comm = 0.0f64;
    let mut per_point = Vec::with_capacity(grid.len());
    for x in grid {
        let jet = eval_jet(spec, x, 2)?;
        let pack = induced_metric(&jet, sig)?;
        let frame = crate::geometry::singular_frame(&jet, sig)?;
        let mut max_product = 0.0f64;
        for i in 0..frame.lambdas.len() {
            for j in (i + 1)..frame.lambdas.len() {
                max_product = max_product.max(frame.lambdas[i] * frame.lambdas[j]);
            }
        }
        let mut comm = 0.0f64;
        for a in 0..spec.m {
            let ha = jet.hessian_of(a).matmul(&pack.ginv);
            for b in (a + 1)..spec.m {
                let hb = jet.hessian_of(b).matmul(&pack.ginv);
                let diff = ha.matmul(&jet.hessian_of(b)).sub(&hb.matmul(&jet.hessian_of(a)));
                comm = comm.max(diff.max_abs());
            }
        }
        worst_product = worst_product.max(max_product);
        worst_detg = worst_detg.max(pack.detg);
        worst_comm = worst_comm.max(comm);
        per_point.push(RigidityPoint { x: x.clone(), max_product, detg: pack.detg, commutator: comm });
    }
    Ok(RigidityReport {
        cond_products: worst_product <= 1.0,
        worst_product,
        cond_det: worst_detg <= beta,
        worst_detg,
        beta,
        cond_commutator: worst_comm <= tol::ALGEBRA,
        worst_commutator: worst_comm,
        per_point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{ConstField, HalfSquareField, IdentityField, MetricInverseField};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn drift_operator_closed_forms() {
        // constant field -> 0
        let a = IdentityField(2);
        let c = ConstField(3.0);
        assert_eq!(apply_l(&a, &c, &[0.4, -0.2]).unwrap(), 0.0);

        // a = I, phi = |x|^2/2 -> n - |x|^2
        let phi = HalfSquareField;
        let x = [0.5, -1.5];
        let got = apply_l(&a, &phi, &x).unwrap();
        assert_abs_diff_eq!(got, 2.0 - 2.5, epsilon = 1e-14);

        // a = g^{-1} of a linear graph, phi = x1 -> -x1
        let spec = GraphSpec::linear(vec![vec![1.0, 2.0]]).unwrap();
        let ginv = MetricInverseField { spec: &spec, sig: Signature::Euclidean };
        let phi1 = crate::fields::FnScalarField {
            value: |x: &[f64]| x[0],
            grad: |x: &[f64]| {
                let mut g = vec![0.0; x.len()];
                g[0] = 1.0;
                g
            },
            hess: |x: &[f64]| Mat::zeros(x.len(), x.len()),
        };
        let got = apply_l(&ginv, &phi1, &[0.7, 0.1]).unwrap();
        assert_abs_diff_eq!(got, -0.7, epsilon = 1e-13);
    }

    #[test]
    fn non_pd_coefficients_rejected() {
        let a = ConstMatrixFieldNegative;
        let phi = HalfSquareField;
        assert!(matches!(
            apply_l(&a, &phi, &[0.0]),
            Err(Error::InvalidCoefficients(_))
        ));
    }

    struct ConstMatrixFieldNegative;
    impl MatrixField for ConstMatrixFieldNegative {
        fn eval(&self, _x: &[f64]) -> Result<Mat> {
            let mut m = Mat::identity(1);
            m[(0, 0)] = -1.0;
            Ok(m)
        }
    }

    #[test]
    fn ssh_margin_flat_half_square() {
        // u = 0, phi = |x|^2/2, eps = 1: margin n - 2|x|^2.
        let spec = GraphSpec::zero(2, 1);
        let grid = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let rep = ssh_margin(
            &spec,
            &HalfSquareField,
            SSHParams::new(1.0).unwrap(),
            &grid,
            Signature::Euclidean,
        )
        .unwrap();
        assert_abs_diff_eq!(rep.margins[0].1, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rep.margins[1].1, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rep.margins[2].1, -2.0, epsilon = 1e-14);
        assert!(!rep.holds);
    }

    #[test]
    fn ssh_margin_exponential_hand_formula() {
        // u = 0, phi = e^{x1}, eps = 1/2: margin e^{x1}(1 - x1 - e^{x1}/2).
        let spec = GraphSpec::zero(2, 1);
        let phi = crate::fields::FnScalarField {
            value: |x: &[f64]| x[0].exp(),
            grad: |x: &[f64]| {
                let mut g = vec![0.0; x.len()];
                g[0] = x[0].exp();
                g
            },
            hess: |x: &[f64]| {
                let mut h = Mat::zeros(x.len(), x.len());
                h[(0, 0)] = x[0].exp();
                h
            },
        };
        let grid: Vec<Vec<f64>> =
            vec![vec![-0.25, 0.0], vec![0.0, 0.1], vec![0.2, -0.1], vec![0.25, 0.25]];
        let rep = ssh_margin(
            &spec,
            &phi,
            SSHParams::new(0.5).unwrap(),
            &grid,
            Signature::Euclidean,
        )
        .unwrap();
        for (x, margin) in &rep.margins {
            let e = x[0].exp();
            let want = e * (1.0 - x[0] - 0.5 * e);
            assert_abs_diff_eq!(*margin, want, epsilon = 1e-13);
        }
    }

    #[test]
    fn ssh_constant_phi_margin_zero() {
        let spec = GraphSpec::iso_quadratic(2, 2, 0.5).unwrap();
        let grid = vec![vec![0.3, -0.4], vec![1.0, 2.0]];
        let rep = ssh_margin(
            &spec,
            &ConstField(7.0),
            SSHParams::new(1.0).unwrap(),
            &grid,
            Signature::Euclidean,
        )
        .unwrap();
        assert_eq!(rep.min_margin, 0.0);
        assert!(rep.holds);
    }

    #[test]
    fn volume_phi_one_dimensional_closed_form() {
        // n = m = 1, u = x^2: phi = ln(1 + 4x^2), phi_x = 8x/(1 + 4x^2).
        let spec = GraphSpec::from_json(
            r#"{"n":1,"m":1,"components":[{"kind":"poly","terms":[{"coef":"1","exps":[2]}]}]}"#,
        )
        .unwrap();
        for &x in &[0.0, 0.3, -1.1] {
            let jet = eval_jet(&spec, &[x], 3).unwrap();
            let phi = volume_phi(&jet, Signature::Euclidean).unwrap();
            assert_abs_diff_eq!(phi.value, (1.0 + 4.0 * x * x).ln(), epsilon = 1e-13);
            assert_abs_diff_eq!(phi.grad[0], 8.0 * x / (1.0 + 4.0 * x * x), epsilon = 1e-13);
        }
    }

    #[test]
    fn volume_phi_linear_graph_constant() {
        let spec = GraphSpec::linear(vec![vec![1.0, -0.5], vec![0.25, 2.0]]).unwrap();
        let jet = eval_jet(&spec, &[0.6, -0.3], 3).unwrap();
        let phi = volume_phi(&jet, Signature::Euclidean).unwrap();
        let a = spec.linear_matrix().unwrap();
        let want = Mat::identity(2).add(&a.transpose().matmul(&a)).det().ln();
        assert_abs_diff_eq!(phi.value, want, epsilon = 1e-13);
        assert!(phi.grad.iter().all(|&g| g.abs() < 1e-13));
        assert!(phi.hess.max_abs() < 1e-13);
    }

    #[test]
    fn volume_laplacian_identity_trivial_cases() {
        let linear = GraphSpec::linear(vec![vec![2.0, 1.0]]).unwrap();
        let rep = volume_laplacian_identity(&linear, &[0.4, 0.2]).unwrap();
        assert!(rep.lhs.abs() < 1e-12 && rep.rhs.abs() < 1e-12 && rep.pass);

        let zero = GraphSpec::zero(2, 2);
        let rep = volume_laplacian_identity(&zero, &[1.0, -1.0]).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert_eq!(rep.rhs, 0.0);
    }

    #[test]
    fn frame_reduction_zero_lambda_middle_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (n, m) = (3usize, 2usize);
        let mut hess = vec![0.0; m * n * n];
        for a in 0..m {
            for p in 0..n {
                for i in p..n {
                    let v = rng.gen_range(-1.0..1.0);
                    hess[(a * n + p) * n + i] = v;
                    hess[(a * n + i) * n + p] = v;
                }
            }
        }
        let data = FrameData::new(n, m, vec![0.0; 3], hess.clone()).unwrap();
        let red = frame_reduction(&data);
        let want: f64 = 2.0 * hess.iter().map(|h| h * h).sum::<f64>();
        assert_abs_diff_eq!(red.coordinate, want, epsilon = 1e-12);
        assert_abs_diff_eq!(red.frame, want, epsilon = 1e-12);
    }

    #[test]
    fn frame_reduction_zero_hessians() {
        let data = FrameData::new(2, 2, vec![1.3, 0.4], vec![0.0; 8]).unwrap();
        let red = frame_reduction(&data);
        assert_eq!(red.coordinate, 0.0);
        assert_eq!(red.frame, 0.0);
    }

    #[test]
    fn rigidity_conditions_flat_and_steep() {
        let zero = GraphSpec::zero(2, 2);
        let grid = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let rep = rigidity_conditions(&zero, &grid, 8.0).unwrap();
        assert!(rep.cond_products && rep.cond_det && rep.cond_commutator);

        // du = diag(2, 2): products 4 > 1 and det g = 25 > 9 > beta.
        let steep = GraphSpec::linear(vec![vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let rep = rigidity_conditions(&steep, &grid, 8.0).unwrap();
        assert!(!rep.cond_products);
        assert_abs_diff_eq!(rep.worst_product, 4.0, epsilon = 1e-12);
        assert!(!rep.cond_det);
        assert_abs_diff_eq!(rep.worst_detg, 25.0, epsilon = 1e-10);
        // A single normal direction never fails the commutator condition.
        assert!(rep.cond_commutator);
    }

    #[test]
    fn rigidity_threshold_validated() {
        let zero = GraphSpec::zero(1, 1);
        assert!(matches!(
            rigidity_conditions(&zero, &[vec![0.0]], 9.0),
            Err(Error::InvalidThreshold(_))
        ));
    }

    #[test]
    fn commutator_condition_identically_zero_for_m1() {
        let spec = GraphSpec::from_json(
            r#"{"n":2,"m":1,"components":[{"kind":"poly","terms":[
                {"coef":"1/4","exps":[2,1]},{"coef":"-1/2","exps":[0,3]}]}]}"#,
        )
        .unwrap();
        let grid = vec![vec![0.5, -0.5], vec![1.0, 0.25]];
        let rep = rigidity_conditions(&spec, &grid, 8.9).unwrap();
        assert_eq!(rep.worst_commutator, 0.0);
    }
}
