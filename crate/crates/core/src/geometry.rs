//! Induced geometry of a graph in Euclidean or pseudo-Euclidean ambient
//! space: metric, singular-value frame, second fundamental form, mean
//! curvature components, and the self-shrinker residual
//! `R^a = g^{ij} u^a_ij + u^a - x . Du^a`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::linalg::{jacobi_eigen_sym, jacobi_svd, Mat};

/// Margin below 1 that the largest singular value must keep for pseudo
/// operations; beyond it `g^{-1}` is too ill-conditioned to trust.
pub const SPACELIKE_MARGIN: f64 = 1e-8;

/// Ambient signature. `Euclidean` uses `g_ij = d_ij + sum_a u^a_i u^a_j`;
/// `PseudoEuclidean` (index m, spacelike graphs only) flips the sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signature {
    Euclidean,
    PseudoEuclidean,
}

impl Signature {
    pub fn sign(self) -> f64 {
        match self {
            Signature::Euclidean => 1.0,
            Signature::PseudoEuclidean => -1.0,
        }
    }

    /// Ambient inner product of two (n+m)-vectors under this signature.
    pub fn ambient_dot(self, n: usize, a: &[f64], b: &[f64]) -> f64 {
        let s = self.sign();
        let mut acc = 0.0;
        for i in 0..a.len() {
            let w = if i < n { 1.0 } else { s };
            acc += w * a[i] * b[i];
        }
        acc
    }
}

/// Induced metric data: g, its inverse, det g, and the minimum eigenvalue.
#[derive(Clone, Debug)]
pub struct MetricPack {
    pub g: Mat,
    pub ginv: Mat,
    pub detg: f64,
    pub nu: f64,
}

/// Largest singular value of du; used for the spacelike admission check.
pub fn max_singular_value(jet: &Jet) -> Result<f64> {
    let du = jet.du_mat();
    let svd = jacobi_svd(&du)?;
    Ok(svd.singular.first().copied().unwrap_or(0.0))
}

fn require_spacelike(jet: &Jet) -> Result<()> {
    let lmax = max_singular_value(jet)?;
    if lmax > 1.0 - SPACELIKE_MARGIN {
        return Err(Error::NotSpacelike { max_lambda: lmax });
    }
    Ok(())
}

pub fn induced_metric(jet: &Jet, sig: Signature) -> Result<MetricPack> {
    assert!(jet.order >= 1, "induced_metric needs a first-order jet");
    if sig == Signature::PseudoEuclidean {
        require_spacelike(jet)?;
    }
    let n = jet.n;
    let s = sig.sign();
    let mut g = Mat::identity(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for a in 0..jet.m {
                acc += jet.du_at(a, i) * jet.du_at(a, j);
            }
            g[(i, j)] += s * acc;
        }
    }
    let eig = jacobi_eigen_sym(&g)?;
    let nu = *eig.values.last().unwrap();
    if sig == Signature::PseudoEuclidean && nu <= 0.0 {
        return Err(Error::NotSpacelike { max_lambda: (1.0 - nu).sqrt() });
    }
    // Symmetric inverse through the eigendecomposition.
    let mut ginv = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += eig.vectors[(i, k)] * eig.vectors[(j, k)] / eig.values[k];
            }
            ginv[(i, j)] = acc;
            ginv[(j, i)] = acc;
        }
    }
    let detg = g.det();
    Ok(MetricPack { g, ginv, detg, nu })
}

/// The coordinate change diagonalizing du: orthogonal P (domain) and Q
/// (target) with `Q du P^T` diagonal, the singular values padded with zeros
/// up to max(n, m), and the Hessians rewritten in the rotated coordinates.
#[derive(Clone, Debug)]
pub struct SingularFrame {
    pub lambdas: Vec<f64>,
    pub p: Mat,
    pub q: Mat,
    /// `u'^a_{pi}`, layout `[alpha * n * n + p * n + i]`.
    pub rotated_hessians: Vec<f64>,
}

impl SingularFrame {
    pub fn rotated_hessian_at(&self, n: usize, alpha: usize, p: usize, i: usize) -> f64 {
        self.rotated_hessians[(alpha * n + p) * n + i]
    }
}

pub fn singular_frame(jet: &Jet, sig: Signature) -> Result<SingularFrame> {
    assert!(jet.order >= 2, "singular_frame needs a second-order jet");
    let (n, m) = (jet.n, jet.m);
    let svd = jacobi_svd(&jet.du_mat())?;
    let mut lambdas = svd.singular.clone();
    lambdas.resize(n.max(m), 0.0);
    if sig == Signature::PseudoEuclidean {
        let lmax = lambdas.first().copied().unwrap_or(0.0);
        if lmax > 1.0 - SPACELIKE_MARGIN {
            return Err(Error::NotSpacelike { max_lambda: lmax });
        }
    }
    let p = svd.v.transpose();
    let q = svd.u.transpose();
    let mut rotated = vec![0.0; m * n * n];
    for a in 0..m {
        for pp in 0..n {
            for i in 0..n {
                let mut acc = 0.0;
                for b in 0..m {
                    for j in 0..n {
                        for k in 0..n {
                            acc += q[(a, b)] * jet.d2u_at(b, j, k) * p[(pp, j)] * p[(i, k)];
                        }
                    }
                }
                rotated[(a * n + pp) * n + i] = acc;
            }
        }
    }
    Ok(SingularFrame { lambdas, p, q, rotated_hessians: rotated })
}

/// Second fundamental form coefficients per component normal, the mean
/// curvature components in the graph normalization, the squared norm of the
/// full second fundamental form, and the tangential projections of the
/// position vector.
#[derive(Clone, Debug)]
pub struct CurvaturePack {
    /// `h^a_ij = u^a_ij / (1 +/- |Du^a|^2)^{1/2}`, layout `[a * n * n + i * n + j]`.
    pub h: Vec<f64>,
    /// `H^a = g^{ij} u^a_ij / (1 +/- |Du^a|^2)^{1/2}`.
    pub hcomp: Vec<f64>,
    /// `B^2 = g^{ik} g^{jl} <B_ij, B_kl>` with B the normal part of D^2 X.
    pub b2: f64,
    /// `<X, d_i X>` under the ambient signature.
    pub tangential_x: Vec<f64>,
}

pub fn curvature_pack(jet: &Jet, sig: Signature) -> Result<CurvaturePack> {
    assert!(jet.order >= 2, "curvature_pack needs a second-order jet");
    let (n, m) = (jet.n, jet.m);
    let s = sig.sign();
    let pack = induced_metric(jet, sig)?;

    let mut h = vec![0.0; m * n * n];
    let mut hcomp = vec![0.0; m];
    for a in 0..m {
        let grad_sq: f64 = (0..n).map(|i| jet.du_at(a, i) * jet.du_at(a, i)).sum();
        let w = (1.0 + s * grad_sq).sqrt();
        for i in 0..n {
            for j in 0..n {
                h[(a * n + i) * n + j] = jet.d2u_at(a, i, j) / w;
            }
        }
        let mut traced = 0.0;
        for i in 0..n {
            for j in 0..n {
                traced += pack.ginv[(i, j)] * jet.d2u_at(a, i, j);
            }
        }
        hcomp[a] = traced / w;
    }

    // Ambient second derivatives D_i D_j X live in the u-coordinates only;
    // project out the tangential part to get the second fundamental form.
    let dim = n + m;
    let mut frame = vec![vec![0.0; dim]; n];
    for (i, f) in frame.iter_mut().enumerate() {
        f[i] = 1.0;
        for a in 0..m {
            f[n + a] = jet.du_at(a, i);
        }
    }
    let normal_part = |w: &[f64]| -> Vec<f64> {
        let rhs: Vec<f64> = (0..n).map(|k| sig.ambient_dot(n, w, &frame[k])).collect();
        let coef = pack.ginv.matvec(&rhs);
        let mut out = w.to_vec();
        for k in 0..n {
            for d in 0..dim {
                out[d] -= coef[k] * frame[k][d];
            }
        }
        out
    };
    let mut bvecs = vec![vec![0.0; dim]; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut w = vec![0.0; dim];
            for a in 0..m {
                w[n + a] = jet.d2u_at(a, i, j);
            }
            bvecs[i * n + j] = normal_part(&w);
        }
    }
    let mut b2 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    b2 += pack.ginv[(i, k)]
                        * pack.ginv[(j, l)]
                        * sig.ambient_dot(n, &bvecs[i * n + j], &bvecs[k * n + l]);
                }
            }
        }
    }

    let mut tangential_x = vec![0.0; n];
    for i in 0..n {
        let mut acc = jet.x[i];
        for a in 0..m {
            acc += s * jet.u[a] * jet.du_at(a, i);
        }
        tangential_x[i] = acc;
    }

    Ok(CurvaturePack { h, hcomp, b2, tangential_x })
}

/// Residual of the self-shrinker system, one value per component:
/// `R^a = g^{ij} u^a_ij + u^a - x . Du^a`. Zero exactly when the graph
/// satisfies the system at x.
pub fn shrinker_residual(jet: &Jet, sig: Signature) -> Result<Vec<f64>> {
    assert!(jet.order >= 2, "shrinker_residual needs a second-order jet");
    let (n, m) = (jet.n, jet.m);
    let pack = induced_metric(jet, sig)?;
    let mut res = vec![0.0; m];
    for a in 0..m {
        let mut traced = 0.0;
        for i in 0..n {
            for j in 0..n {
                traced += pack.ginv[(i, j)] * jet.d2u_at(a, i, j);
            }
        }
        let drift: f64 = (0..n).map(|i| jet.x[i] * jet.du_at(a, i)).sum();
        res[a] = traced + jet.u[a] - drift;
    }
    Ok(res)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{eval_jet, GraphSpec};
    use approx::assert_abs_diff_eq;

    #[test]
    fn flat_graph_metric() {
        let spec = GraphSpec::zero(3, 2);
        let jet = eval_jet(&spec, &[0.2, 0.4, -1.0], 2).unwrap();
        let pack = induced_metric(&jet, Signature::Euclidean).unwrap();
        assert_abs_diff_eq!(pack.detg, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pack.nu, 1.0, epsilon = 1e-15);
        assert!(pack.g.sub(&Mat::identity(3)).max_abs() < 1e-15);
    }

    #[test]
    fn slope_one_metric() {
        // n = m = 1, du = 1: g = 2 Euclidean.
        let spec = GraphSpec::linear(vec![vec![1.0]]).unwrap();
        let jet = eval_jet(&spec, &[0.7], 2).unwrap();
        let pack = induced_metric(&jet, Signature::Euclidean).unwrap();
        assert_abs_diff_eq!(pack.g[(0, 0)], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pack.detg, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn pseudo_metric_and_spacelike_guard() {
        let spec = GraphSpec::linear(vec![vec![0.5]]).unwrap();
        let jet = eval_jet(&spec, &[0.0], 2).unwrap();
        let pack = induced_metric(&jet, Signature::PseudoEuclidean).unwrap();
        assert_abs_diff_eq!(pack.g[(0, 0)], 0.75, epsilon = 1e-15);

        let bad = GraphSpec::linear(vec![vec![1.0]]).unwrap();
        let jet = eval_jet(&bad, &[0.0], 2).unwrap();
        assert!(matches!(
            induced_metric(&jet, Signature::PseudoEuclidean),
            Err(Error::NotSpacelike { .. })
        ));
    }

    #[test]
    fn singular_frame_diagonalizes() {
        let spec = GraphSpec::linear(vec![vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        let jet = eval_jet(&spec, &[0.3, 0.1], 2).unwrap();
        let frame = singular_frame(&jet, Signature::Euclidean).unwrap();
        assert_abs_diff_eq!(frame.lambdas[0], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(frame.lambdas[1], 1.0, epsilon = 1e-13);
        let d = frame.q.matmul(&jet.du_mat()).matmul(&frame.p.transpose());
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { frame.lambdas[i] } else { 0.0 };
                assert_abs_diff_eq!(d[(i, j)], want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn zero_map_frame_is_identity() {
        let spec = GraphSpec::zero(2, 2);
        let jet = eval_jet(&spec, &[1.0, 2.0], 2).unwrap();
        let frame = singular_frame(&jet, Signature::Euclidean).unwrap();
        assert!(frame.lambdas.iter().all(|&l| l == 0.0));
        assert_eq!(frame.p, Mat::identity(2));
        assert_eq!(frame.q, Mat::identity(2));
    }

    #[test]
    fn diag_frame_orders_singular_values() {
        let spec = GraphSpec::linear(vec![vec![3.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let jet = eval_jet(&spec, &[0.0, 0.0], 2).unwrap();
        let frame = singular_frame(&jet, Signature::Euclidean).unwrap();
        assert_abs_diff_eq!(frame.lambdas[0], 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(frame.lambdas[1], 0.0, epsilon = 1e-13);
    }

    #[test]
    fn paraboloid_curvature_at_origin() {
        let spec = GraphSpec::iso_quadratic(3, 1, 1.0).unwrap();
        let jet = eval_jet(&spec, &[0.0, 0.0, 0.0], 2).unwrap();
        let pack = curvature_pack(&jet, Signature::Euclidean).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(pack.h[i * 3 + j], want, epsilon = 1e-14);
            }
        }
        assert_abs_diff_eq!(pack.hcomp[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(pack.b2, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn linear_graph_curvature_vanishes() {
        let spec = GraphSpec::linear(vec![vec![1.0, -2.0], vec![0.5, 0.25]]).unwrap();
        let jet = eval_jet(&spec, &[0.4, -0.7], 2).unwrap();
        let pack = curvature_pack(&jet, Signature::Euclidean).unwrap();
        assert!(pack.h.iter().all(|&v| v == 0.0));
        assert!(pack.hcomp.iter().all(|&v| v == 0.0));
        assert!(pack.b2.abs() < 1e-15);
    }

    #[test]
    fn tangential_x_zero_at_origin_when_u_vanishes() {
        let spec = GraphSpec::linear(vec![vec![2.0, 1.0]]).unwrap();
        let jet = eval_jet(&spec, &[0.0, 0.0], 2).unwrap();
        let pack = curvature_pack(&jet, Signature::Euclidean).unwrap();
        assert!(pack.tangential_x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_maps_solve_the_system() {
        let spec = GraphSpec::linear(vec![vec![1.5, -0.25], vec![0.0, 2.0]]).unwrap();
        let jet = eval_jet(&spec, &[3.0, -7.0], 2).unwrap();
        let r = shrinker_residual(&jet, Signature::Euclidean).unwrap();
        assert!(norm(&r) < 1e-13);
    }

    #[test]
    fn quadratic_residual_closed_form() {
        // n = m = 1, u = x^2: R = 2/(1+4x^2) - x^2.
        let spec = GraphSpec::from_json(
            r#"{"n":1,"m":1,"components":[{"kind":"poly","terms":[{"coef":"1","exps":[2]}]}]}"#,
        )
        .unwrap();
        for &x in &[0.0, 0.5, -1.25, 2.0] {
            let jet = eval_jet(&spec, &[x], 2).unwrap();
            let r = shrinker_residual(&jet, Signature::Euclidean).unwrap();
            let want = 2.0 / (1.0 + 4.0 * x * x) - x * x;
            assert_abs_diff_eq!(r[0], want, epsilon = 1e-13);
        }
    }

    #[test]
    fn pseudo_linear_residual_zero() {
        let spec = GraphSpec::linear(vec![vec![0.5]]).unwrap();
        let jet = eval_jet(&spec, &[1.0], 2).unwrap();
        let r = shrinker_residual(&jet, Signature::PseudoEuclidean).unwrap();
        assert_abs_diff_eq!(r[0], 0.0, epsilon = 1e-15);
    }
}
