//! Scalar and matrix fields over R^n, the inputs of the operator checks.

use crate::error::Result;
use crate::geometry::{induced_metric, Signature};
use crate::jets::{eval_jet, GraphSpec};
use crate::linalg::Mat;

/// A scalar field with second derivatives at every point.
#[derive(Clone, Debug)]
pub struct ScalarJet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Mat,
}

pub trait ScalarField {
    fn jet2(&self, x: &[f64]) -> Result<ScalarJet2>;

    /// Plain value, used by the finite-difference oracles.
    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.jet2(x)?.value)
    }
}

/// Scalar field from closures for the value, gradient and Hessian.
pub struct FnScalarField<V, G, H>
where
    V: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
    H: Fn(&[f64]) -> Mat,
{
    pub value: V,
    pub grad: G,
    pub hess: H,
}

impl<V, G, H> ScalarField for FnScalarField<V, G, H>
where
    V: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
    H: Fn(&[f64]) -> Mat,
{
    fn jet2(&self, x: &[f64]) -> Result<ScalarJet2> {
        Ok(ScalarJet2 { value: (self.value)(x), grad: (self.grad)(x), hess: (self.hess)(x) })
    }
}

/// The field `|x|^2 / 2`.
pub struct HalfSquareField;

impl ScalarField for HalfSquareField {
    fn jet2(&self, x: &[f64]) -> Result<ScalarJet2> {
        let n = x.len();
        Ok(ScalarJet2 {
            value: 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            grad: x.to_vec(),
            hess: Mat::identity(n),
        })
    }
}

/// A constant field.
pub struct ConstField(pub f64);

impl ScalarField for ConstField {
    fn jet2(&self, x: &[f64]) -> Result<ScalarJet2> {
        Ok(ScalarJet2 { value: self.0, grad: vec![0.0; x.len()], hess: Mat::zeros(x.len(), x.len()) })
    }
}

/// A symmetric coefficient field a(x).
pub trait MatrixField {
    fn eval(&self, x: &[f64]) -> Result<Mat>;
}

/// The identity coefficients.
pub struct IdentityField(pub usize);

impl MatrixField for IdentityField {
    fn eval(&self, _x: &[f64]) -> Result<Mat> {
        Ok(Mat::identity(self.0))
    }
}

/// `g^{-1}` of a graph spec under a signature; the natural coefficients of
/// the self-shrinker system.
pub struct MetricInverseField<'a> {
    pub spec: &'a GraphSpec,
    pub sig: Signature,
}

impl MatrixField for MetricInverseField<'_> {
    fn eval(&self, x: &[f64]) -> Result<Mat> {
        let jet = eval_jet(self.spec, x, 1)?;
        Ok(induced_metric(&jet, self.sig)?.ginv)
    }
}

/// Constant coefficients.
pub struct ConstMatrixField(pub Mat);

impl MatrixField for ConstMatrixField {
    fn eval(&self, _x: &[f64]) -> Result<Mat> {
        Ok(self.0.clone())
    }
}
