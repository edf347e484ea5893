//! Python bindings for the core types and operations.
//!
//! Build as an importable module with
//! `cargo build -p shrinker-py --features extension-module`, then place
//! `libshrinker_py.so` on the path as `shrinker_py.so`
//! (`python/smoke_test.py` automates this).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use shrinker_core::geometry::{self, Signature};
use shrinker_core::identity::{self, FrameData};
use shrinker_core::jets;
use shrinker_core::lagrangian;
use shrinker_core::linalg::Mat;
use shrinker_core::pseudo;
use shrinker_core::rescale;
use shrinker_core::rotsym;

fn err(e: shrinker_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_signature(name: &str) -> PyResult<Signature> {
    match name {
        "euclidean" => Ok(Signature::Euclidean),
        "pseudo" | "pseudo_euclidean" => Ok(Signature::PseudoEuclidean),
        other => Err(PyValueError::new_err(format!(
            "signature {other:?}; expected \"euclidean\" or \"pseudo_euclidean\""
        ))),
    }
}

fn mat_to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.rows).map(|i| (0..m.cols).map(|j| m[(i, j)]).collect()).collect()
}

/// A closed-form graph map u: R^n -> R^m.
#[pyclass(name = "GraphSpec", skip_from_py_object)]
#[derive(Clone)]
struct PyGraphSpec {
    inner: jets::GraphSpec,
}

#[pymethods]
impl PyGraphSpec {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyGraphSpec { inner: jets::GraphSpec::from_json(text).map_err(err)? })
    }

    #[staticmethod]
    fn linear(matrix: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyGraphSpec { inner: jets::GraphSpec::linear(matrix).map_err(err)? })
    }

    #[staticmethod]
    fn iso_quadratic(n: usize, m: usize, c: f64) -> PyResult<Self> {
        Ok(PyGraphSpec { inner: jets::GraphSpec::iso_quadratic(n, m, c).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!("GraphSpec(n={}, m={})", self.inner.n, self.inner.m)
    }
}

/// A scalar potential v on R^n (Lagrangian graphs use u = Dv).
#[pyclass(name = "PotentialSpec", skip_from_py_object)]
#[derive(Clone)]
struct PyPotentialSpec {
    inner: lagrangian::PotentialSpec,
}

#[pymethods]
impl PyPotentialSpec {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyPotentialSpec { inner: lagrangian::PotentialSpec::from_json(text).map_err(err)? })
    }

    #[staticmethod]
    fn iso_quadratic(n: usize, c: f64) -> PyResult<Self> {
        Ok(PyPotentialSpec { inner: lagrangian::PotentialSpec::iso_quadratic(n, c).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    fn __repr__(&self) -> String {
        format!("PotentialSpec(n={})", self.inner.n)
    }
}

/// Exact jet of the graph map at x: u, Du, D2u and (order 3) D3u.
#[pyfunction]
#[pyo3(signature = (spec, x, order = 2))]
fn eval_jet<'py>(py: Python<'py>, spec: &PyGraphSpec, x: Vec<f64>, order: usize) -> PyResult<Bound<'py, PyDict>> {
    let jet = jets::eval_jet(&spec.inner, &x, order).map_err(err)?;
    let (n, m) = (jet.n, jet.m);
    let out = PyDict::new(py);
    out.set_item("u", jet.u.clone())?;
    if order >= 1 {
        let du: Vec<Vec<f64>> =
            (0..m).map(|a| (0..n).map(|i| jet.du_at(a, i)).collect()).collect();
        out.set_item("du", du)?;
    }
    if order >= 2 {
        let d2u: Vec<Vec<Vec<f64>>> = (0..m)
            .map(|a| (0..n).map(|i| (0..n).map(|j| jet.d2u_at(a, i, j)).collect()).collect())
            .collect();
        out.set_item("d2u", d2u)?;
    }
    if order >= 3 {
        let d3u: Vec<Vec<Vec<Vec<f64>>>> = (0..m)
            .map(|a| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| (0..n).map(|p| jet.d3u_at(a, i, j, p)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        out.set_item("d3u", d3u)?;
    }
    Ok(out)
}

/// Residual of the self-shrinker system, one entry per component.
#[pyfunction]
#[pyo3(signature = (spec, x, signature = "euclidean"))]
fn shrinker_residual(spec: &PyGraphSpec, x: Vec<f64>, signature: &str) -> PyResult<Vec<f64>> {
    let sig = parse_signature(signature)?;
    let jet = jets::eval_jet(&spec.inner, &x, 2).map_err(err)?;
    geometry::shrinker_residual(&jet, sig).map_err(err)
}

/// Induced metric data: g, its inverse, det g, minimum eigenvalue, and the
/// singular values of du.
#[pyfunction]
#[pyo3(signature = (spec, x, signature = "euclidean"))]
fn metric<'py>(py: Python<'py>, spec: &PyGraphSpec, x: Vec<f64>, signature: &str) -> PyResult<Bound<'py, PyDict>> {
    let sig = parse_signature(signature)?;
    let jet = jets::eval_jet(&spec.inner, &x, 2).map_err(err)?;
    let pack = geometry::induced_metric(&jet, sig).map_err(err)?;
    let frame = geometry::singular_frame(&jet, sig).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("g", mat_to_rows(&pack.g))?;
    out.set_item("ginv", mat_to_rows(&pack.ginv))?;
    out.set_item("detg", pack.detg)?;
    out.set_item("nu", pack.nu)?;
    out.set_item("lambdas", frame.lambdas)?;
    Ok(out)
}

/// Mean curvature components, |B|^2 and the tangential projections of X.
#[pyfunction]
#[pyo3(signature = (spec, x, signature = "euclidean"))]
fn curvature<'py>(
    py: Python<'py>,
    spec: &PyGraphSpec,
    x: Vec<f64>,
    signature: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let sig = parse_signature(signature)?;
    let jet = jets::eval_jet(&spec.inner, &x, 2).map_err(err)?;
    let pack = geometry::curvature_pack(&jet, sig).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("hcomp", pack.hcomp)?;
    out.set_item("b2", pack.b2)?;
    out.set_item("tangential_x", pack.tangential_x)?;
    Ok(out)
}

/// phi = ln det g with its analytic gradient.
#[pyfunction]
#[pyo3(signature = (spec, x, signature = "euclidean"))]
fn volume_phi<'py>(
    py: Python<'py>,
    spec: &PyGraphSpec,
    x: Vec<f64>,
    signature: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let sig = parse_signature(signature)?;
    let jet = jets::eval_jet(&spec.inner, &x, 3).map_err(err)?;
    let phi = identity::volume_phi(&jet, sig).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("value", phi.value)?;
    out.set_item("grad", phi.grad)?;
    out.set_item("hess", mat_to_rows(&phi.hess))?;
    Ok(out)
}

/// Both routes to the reduced volume-element drift on frame data.
#[pyfunction]
fn frame_reduction<'py>(
    py: Python<'py>,
    n: usize,
    m: usize,
    lambdas: Vec<f64>,
    hessians: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let data = FrameData::new(n, m, lambdas, hessians).map_err(err)?;
    let red = identity::frame_reduction(&data);
    let out = PyDict::new(py);
    out.set_item("coordinate", red.coordinate)?;
    out.set_item("frame", red.frame)?;
    out.set_item("discrepancy", red.discrepancy)?;
    Ok(out)
}

/// Integrate the radial system from u(0) = c; returns the outcome summary.
#[pyfunction]
#[pyo3(signature = (c, n, r_max = 50.0))]
fn shoot<'py>(py: Python<'py>, c: Vec<f64>, n: usize, r_max: f64) -> PyResult<Bound<'py, PyDict>> {
    let res = rotsym::shoot(&c, n, r_max, rotsym::Thresholds::default());
    let out = PyDict::new(py);
    out.set_item(
        "outcome",
        match res.outcome {
            rotsym::Outcome::GlobalToRmax => "global",
            rotsym::Outcome::Diverged { .. } => "diverged",
            rotsym::Outcome::StepCollapse { .. } => "step_collapse",
        },
    )?;
    out.set_item("end_radius", res.end_radius())?;
    out.set_item("max_u", res.max_u)?;
    out.set_item("max_ur", res.max_ur)?;
    out.set_item("samples", res.trajectory.len())?;
    Ok(out)
}

/// The unit crossing of g(s) = (2s/(s+1))^s/(s+1).
#[pyfunction]
fn s0_solve() -> PyResult<f64> {
    Ok(rescale::s0_solve(1e-12).map_err(err)?.s0)
}

/// (zeta, margin) with zeta = 2s/(s+1) and margin = zeta^s - 2/(2-zeta).
#[pyfunction]
fn zeta_witness(s: f64) -> PyResult<(f64, f64)> {
    let w = rescale::zeta_witness(s).map_err(err)?;
    Ok((w.zeta, w.margin))
}

/// Derived growth constants theta, k and R0.
#[pyfunction]
fn growth_constants<'py>(
    py: Python<'py>,
    s: f64,
    n: usize,
    sigma: f64,
    tau: f64,
    c_decay: f64,
    r0: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let c = rescale::growth_constants(s, n, sigma, tau, c_decay, r0).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("theta", c.theta)?;
    out.set_item("k", c.k)?;
    out.set_item("r_big_sq", c.r_big * c.r_big)?;
    Ok(out)
}

/// Two-route heat-operator residual of the rescaled graph.
#[pyfunction]
fn heat_residual<'py>(
    py: Python<'py>,
    spec: &PyGraphSpec,
    horizon: f64,
    x: Vec<f64>,
    t: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let hr = rescale::heat_residual(&spec.inner, horizon, &x, t).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("direct", hr.direct)?;
    out.set_item("via_residual", hr.via_residual)?;
    out.set_item("discrepancy", hr.discrepancy)?;
    Ok(out)
}

/// tr arctan D2v + 2v - x.Dv.
#[pyfunction]
fn euclid_potential_residual(pot: &PyPotentialSpec, x: Vec<f64>) -> PyResult<f64> {
    lagrangian::euclid_potential_residual(&pot.inner, &x).map_err(err)
}

/// (1/2) tr ln (I + D2v)(I - D2v)^{-1} + 2v - x.Dv.
#[pyfunction]
fn pseudo_potential_residual(pot: &PyPotentialSpec, x: Vec<f64>) -> PyResult<f64> {
    lagrangian::pseudo_potential_residual(&pot.inner, &x).map_err(err)
}

/// Phase function, its gradient and its drift value.
#[pyfunction]
fn phase<'py>(py: Python<'py>, pot: &PyPotentialSpec, x: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let ph = lagrangian::phase_residual(&pot.inner, &x).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("theta", ph.theta)?;
    out.set_item("eigenvalues", ph.eigenvalues)?;
    out.set_item("grad", ph.grad)?;
    out.set_item("drift", ph.residual)?;
    Ok(out)
}

/// Lewy rotation at x: (xbar, Dw, D2w) and the positivity of D2w.
#[pyfunction]
fn lewy_rotate<'py>(py: Python<'py>, pot: &PyPotentialSpec, x: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let rot = lagrangian::lewy_rotate(&pot.inner, &x).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("xbar", rot.xbar)?;
    out.set_item("dw", rot.dw)?;
    out.set_item("d2w", mat_to_rows(&rot.d2w))?;
    out.set_item("d2w_positive_definite", rot.d2w_positive_definite)?;
    Ok(out)
}

/// Scalar-equation gradient against the system residual of u = Dv.
#[pyfunction]
fn gradient_consistency<'py>(py: Python<'py>, pot: &PyPotentialSpec, x: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let rep = lagrangian::gradient_consistency(&pot.inner, &x).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("scalar", rep.scalar_route)?;
    out.set_item("system", rep.system_route)?;
    out.set_item("discrepancy", rep.discrepancy)?;
    Ok(out)
}

/// *dx = 1/sqrt(det g) by the determinant and singular-value routes.
#[pyfunction]
fn star_dx<'py>(py: Python<'py>, spec: &PyGraphSpec, x: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let jet = jets::eval_jet(&spec.inner, &x, 2).map_err(err)?;
    let s = pseudo::star_dx(&jet).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("value", s.value)?;
    out.set_item("lambda_route", s.lambda_route)?;
    out.set_item("discrepancy", s.discrepancy)?;
    Ok(out)
}

/// Decay profile rows (radius, max |log det g|/|x|, min det g).
#[pyfunction]
#[pyo3(signature = (spec, radii, directions = 16))]
fn decay_profile(
    spec: &PyGraphSpec,
    radii: Vec<f64>,
    directions: usize,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let profile = pseudo::decay_diagnostic(&spec.inner, &radii, directions).map_err(err)?;
    Ok(profile.rows.iter().map(|r| (r.radius, r.max_ratio, r.min_detg)).collect())
}

#[pymodule]
fn shrinker_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraphSpec>()?;
    m.add_class::<PyPotentialSpec>()?;
    m.add_function(wrap_pyfunction!(eval_jet, m)?)?;
    m.add_function(wrap_pyfunction!(shrinker_residual, m)?)?;
    m.add_function(wrap_pyfunction!(metric, m)?)?;
    m.add_function(wrap_pyfunction!(curvature, m)?)?;
    m.add_function(wrap_pyfunction!(volume_phi, m)?)?;
    m.add_function(wrap_pyfunction!(frame_reduction, m)?)?;
    m.add_function(wrap_pyfunction!(shoot, m)?)?;
    m.add_function(wrap_pyfunction!(s0_solve, m)?)?;
    m.add_function(wrap_pyfunction!(zeta_witness, m)?)?;
    m.add_function(wrap_pyfunction!(growth_constants, m)?)?;
    m.add_function(wrap_pyfunction!(heat_residual, m)?)?;
    m.add_function(wrap_pyfunction!(euclid_potential_residual, m)?)?;
    m.add_function(wrap_pyfunction!(pseudo_potential_residual, m)?)?;
    m.add_function(wrap_pyfunction!(phase, m)?)?;
    m.add_function(wrap_pyfunction!(lewy_rotate, m)?)?;
    m.add_function(wrap_pyfunction!(gradient_consistency, m)?)?;
    m.add_function(wrap_pyfunction!(star_dx, m)?)?;
    m.add_function(wrap_pyfunction!(decay_profile, m)?)?;
    Ok(())
}
