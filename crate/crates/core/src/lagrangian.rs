//! Potential reductions for Lagrangian graphs (m = n, u = Dv): the arctan
//! and log residuals of the scalar equations, the phase function, the Lewy
//! rotation, and the consistency check that differentiating the scalar
//! equation recovers the full system residual.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::{fd_gradient_entry, FDPolicy, FdLadder};
use crate::jets::{Component, Jet, ScalarComponent, ScalarJet};
use crate::linalg::{jacobi_eigen_sym, Mat};

/// Scalar potential v on R^n with exact derivatives to order 4.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPotentialSpec", into = "RawPotentialSpec")]
pub struct PotentialSpec {
    pub n: usize,
    component: Component,
    #[serde(skip)]
    row: ScalarComponent,
    /// Outer amplitude a and argument scale b of `a * v(b x)`; both 1 for a
    /// plain potential. Kept exact by composing at evaluation time.
    amplitude: f64,
    arg_scale: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPotentialSpec {
    n: usize,
    v: Component,
}

impl From<PotentialSpec> for RawPotentialSpec {
    fn from(p: PotentialSpec) -> Self {
        RawPotentialSpec { n: p.n, v: p.component }
    }
}

impl TryFrom<RawPotentialSpec> for PotentialSpec {
    type Error = Error;
    fn try_from(raw: RawPotentialSpec) -> Result<Self> {
        PotentialSpec::new(raw.n, raw.v)
    }
}

impl PotentialSpec {
    pub fn new(n: usize, component: Component) -> Result<Self> {
        if n == 0 {
            return Err(Error::SpecInvalid("n must be at least 1".into()));
        }
        let rows = match &component {
            Component::Poly { terms } => vec![ScalarComponent::Poly(terms.clone())],
            Component::Linear { matrix } => {
                matrix.iter().map(|r| ScalarComponent::LinearRow(r.clone())).collect()
            }
            Component::IsoQuadratic { c } => vec![ScalarComponent::IsoQuadratic(*c)],
            Component::Radial { profile } => vec![ScalarComponent::Radial(*profile)],
        };
        if rows.len() != 1 {
            return Err(Error::SpecInvalid("potential must be a single scalar component".into()));
        }
        let row = rows.into_iter().next().unwrap();
        row.validate(n)?;
        Ok(PotentialSpec { n, component, row, amplitude: 1.0, arg_scale: 1.0 })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::SpecInvalid(e.to_string()))
    }

    pub fn iso_quadratic(n: usize, c: f64) -> Result<Self> {
        PotentialSpec::new(n, Component::IsoQuadratic { c })
    }

    /// The rescaled potential `a * v(b x)`. Jets are composed exactly at
    /// evaluation time, so no coefficient rewriting takes place.
    pub fn rescaled(&self, amplitude: f64, arg_scale: f64) -> PotentialSpec {
        let mut out = self.clone();
        out.amplitude *= amplitude;
        out.arg_scale *= arg_scale;
        out
    }

    /// Jet of the potential to order 4 (value, Dv, D2v, D3v, D4v).
    pub fn jet4(&self, x: &[f64]) -> Result<ScalarJet> {
        if x.len() != self.n {
            return Err(Error::InvalidPoint(format!(
                "point has dimension {}, expected {}",
                x.len(),
                self.n
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite coordinate in {x:?}")));
        }
        let y: Vec<f64> = x.iter().map(|v| v * self.arg_scale).collect();
        let mut jet = self.row.jet(self.n, &y, 4);
        let (a, b) = (self.amplitude, self.arg_scale);
        jet.value *= a;
        let mut f = a * b;
        for g in jet.grad.iter_mut() {
            *g *= f;
        }
        f *= b;
        for h in jet.hess.iter_mut() {
            *h *= f;
        }
        f *= b;
        for d in jet.d3.iter_mut() {
            *d *= f;
        }
        f *= b;
        for d in jet.d4.iter_mut() {
            *d *= f;
        }
        Ok(jet)
    }

    /// Jet of the induced graph map u = Dv (m = n), to order <= 3.
    pub fn graph_jet(&self, x: &[f64], order: usize) -> Result<Jet> {
        if order > 3 {
            return Err(Error::UnsupportedOrder(order, 3));
        }
        let v = self.jet4(x)?;
        let n = self.n;
        let mut jet = Jet {
            n,
            m: n,
            order,
            x: x.to_vec(),
            u: v.grad.clone(),
            du: vec![0.0; if order >= 1 { n * n } else { 0 }],
            d2u: vec![0.0; if order >= 2 { n * n * n } else { 0 }],
            d3u: vec![0.0; if order >= 3 { n * n * n * n } else { 0 }],
        };
        if order >= 1 {
            jet.du.copy_from_slice(&v.hess);
        }
        if order >= 2 {
            jet.d2u.copy_from_slice(&v.d3);
        }
        if order >= 3 {
            jet.d3u.copy_from_slice(&v.d4);
        }
        Ok(jet)
    }
}

/// Eigenvalues of the Hessian of v at x, plus the pieces shared by the
/// residual formulas.
fn hessian_eigenvalues(v: &ScalarJet) -> Result<Vec<f64>> {
    Ok(jacobi_eigen_sym(&v.hess_mat())?.values)
}

fn linear_part(v: &ScalarJet, x: &[f64]) -> f64 {
    // 2v - x . Dv
    2.0 * v.value - x.iter().zip(&v.grad).map(|(xi, gi)| xi * gi).sum::<f64>()
}

/// Residual `tr arctan D2v + 2v - x . Dv` of the Euclidean scalar equation.
pub fn euclid_potential_residual(vspec: &PotentialSpec, x: &[f64]) -> Result<f64> {
    let v = vspec.jet4(x)?;
    let mu = hessian_eigenvalues(&v)?;
    Ok(mu.iter().map(|m| m.atan()).sum::<f64>() + linear_part(&v, x))
}

/// Residual `(1/2) tr ln (I + D2v)(I - D2v)^{-1} + 2v - x . Dv` of the
/// pseudo-Euclidean scalar equation; requires |mu_i| < 1.
pub fn pseudo_potential_residual(vspec: &PotentialSpec, x: &[f64]) -> Result<f64> {
    let v = vspec.jet4(x)?;
    let mu = hessian_eigenvalues(&v)?;
    let max_mu = mu.iter().fold(0.0f64, |acc, m| acc.max(m.abs()));
    if max_mu >= 1.0 {
        return Err(Error::NotSpacelike { max_lambda: max_mu });
    }
    let trace_log: f64 = mu.iter().map(|m| 0.5 * ((1.0 + m) / (1.0 - m)).ln()).sum();
    Ok(trace_log + linear_part(&v, x))
}

/// The phase `Theta = sum_i arctan mu_i(D2v)` together with the drift value
/// `g^{ij} Theta_ij - x . DTheta` and the analytic gradient. Derivatives of
/// Theta use the resolvent formula `DTheta_k = tr[(I + (D2v)^2)^{-1} d_k D2v]`,
/// which stays smooth through repeated eigenvalues.
#[derive(Clone, Debug)]
pub struct PhaseValue {
    pub theta: f64,
    pub eigenvalues: Vec<f64>,
    pub grad: Vec<f64>,
    pub residual: f64,
}

pub fn phase_residual(vspec: &PotentialSpec, x: &[f64]) -> Result<PhaseValue> {
    let v = vspec.jet4(x)?;
    let n = vspec.n;
    let mu = hessian_eigenvalues(&v)?;
    let theta: f64 = mu.iter().map(|m| m.atan()).sum();

    let h = v.hess_mat();
    let mut g = Mat::identity(n).add(&h.matmul(&h));
    g = g.symmetrized();
    let a = g.inverse()?; // (I + H^2)^{-1} = g^{-1} of the Lagrangian graph

    let dh = |k: usize| -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v.d3_at(i, j, k);
            }
        }
        m
    };
    let ddh = |k: usize, l: usize| -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v.d4_at(i, j, k, l);
            }
        }
        m
    };

    let grad: Vec<f64> = (0..n).map(|k| a.matmul(&dh(k)).trace()).collect();

    // Theta_kl = tr[A H_kl] - tr[A (H_l H + H H_l) A H_k], A = (I + H^2)^{-1}.
    let mut hess_theta = Mat::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            let hk = dh(k);
            let hl = dh(l);
            let mid = hl.matmul(&h).add(&h.matmul(&hl));
            let val = a.matmul(&ddh(k, l)).trace() - a.matmul(&mid).matmul(&a).matmul(&hk).trace();
            hess_theta[(k, l)] = val;
        }
    }

    let mut residual = 0.0;
    for i in 0..n {
        for j in 0..n {
            residual += a[(i, j)] * hess_theta[(i, j)];
        }
    }
    for i in 0..n {
        residual -= x[i] * grad[i];
    }
    Ok(PhaseValue { theta, eigenvalues: mu, grad, residual })
}

/// Finite-difference ladder for one component of DTheta; oracle side of the
/// resolvent formula.
pub fn phase_gradient_fd(
    vspec: &PotentialSpec,
    x: &[f64],
    k: usize,
    policy: &FDPolicy,
) -> Result<FdLadder> {
    let theta_field = |y: &[f64]| -> f64 {
        let v = vspec.jet4(y).expect("potential evaluates on the stencil");
        let mu = hessian_eigenvalues(&v).expect("symmetric eigen converges");
        mu.iter().map(|m| m.atan()).sum()
    };
    fd_gradient_entry(&theta_field, x, k, policy)
}

/// The Lewy rotation at x: `xbar = (x - Deta)/sqrt(2)`,
/// `Dw(xbar) = (x + Deta)/sqrt(2)`, `D2w = (I + D2eta)(I - D2eta)^{-1}`.
#[derive(Clone, Debug)]
pub struct LewyRotation {
    pub xbar: Vec<f64>,
    pub dw: Vec<f64>,
    pub d2w: Mat,
    /// Whether D2w is positive definite, the domain assumption of the
    /// log-determinant form of the rotated equation.
    pub d2w_positive_definite: bool,
}

pub fn lewy_rotate(etaspec: &PotentialSpec, x: &[f64]) -> Result<LewyRotation> {
    let eta = etaspec.jet4(x)?;
    let n = etaspec.n;
    let root2 = std::f64::consts::SQRT_2;
    let xbar: Vec<f64> = x.iter().zip(&eta.grad).map(|(xi, gi)| (xi - gi) / root2).collect();
    let dw: Vec<f64> = x.iter().zip(&eta.grad).map(|(xi, gi)| (xi + gi) / root2).collect();
    let h = eta.hess_mat();
    let i_minus = Mat::identity(n).sub(&h);
    let det = i_minus.det();
    if det.abs() < 1e-12 {
        return Err(Error::DegenerateRotation(det.abs()));
    }
    let d2w = Mat::identity(n).add(&h).matmul(&i_minus.inverse()?);
    let eig = jacobi_eigen_sym(&d2w.symmetrized())?;
    let pd = eig.values.last().copied().unwrap_or(0.0) > 0.0;
    Ok(LewyRotation { xbar, dw, d2w, d2w_positive_definite: pd })
}

/// Consistency of the scalar equation with the full system: the x_alpha
/// derivative of `tr arctan D2v + 2v - x . Dv` against the elliptic residual
/// `R^alpha = g^{ij} u^alpha_ij + u^alpha - x . Du^alpha` of the graph
/// u = Dv with g = I + (D2v)^2. The two agree identically.
#[derive(Clone, Debug)]
pub struct GradientConsistency {
    pub scalar_route: Vec<f64>,
    pub system_route: Vec<f64>,
    pub discrepancy: f64,
}

pub fn gradient_consistency(vspec: &PotentialSpec, x: &[f64]) -> Result<GradientConsistency> {
    let v = vspec.jet4(x)?;
    let n = vspec.n;
    let h = v.hess_mat();
    let g = Mat::identity(n).add(&h.matmul(&h)).symmetrized();
    let a = g.inverse()?;

    let mut scalar_route = vec![0.0; n];
    for alpha in 0..n {
        let mut dh_alpha = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                dh_alpha[(i, j)] = v.d3_at(i, j, alpha);
            }
        }
        // d_alpha tr arctan D2v = tr[(I + H^2)^{-1} H_alpha]
        let arctan_part = a.matmul(&dh_alpha).trace();
        // d_alpha (2v - x . Dv) = v_alpha - x . D(v_alpha)
        let drift: f64 = (0..n).map(|i| x[i] * v.hess_at(alpha, i)).sum();
        scalar_route[alpha] = arctan_part + v.grad[alpha] - drift;
    }

    let graph = vspec.graph_jet(x, 2)?;
    let system_route =
        crate::geometry::shrinker_residual(&graph, crate::geometry::Signature::Euclidean)?;

    let discrepancy = scalar_route
        .iter()
        .zip(&system_route)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok(GradientConsistency { scalar_route, system_route, discrepancy })
}
