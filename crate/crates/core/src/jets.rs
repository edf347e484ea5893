//! Closed-form graph maps `u: R^n -> R^m` and their exact jets.
//!
//! Components are multivariate polynomials with exact rational coefficients
//! plus a few analytic builtins (linear maps, isotropic quadratics, radial
//! profiles). Coefficients stay rational until they are evaluated in binary
//! floating point at the use site.

use num_rational::Ratio;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::Mat;

pub const MAX_JET_ORDER: usize = 3;

/// One polynomial term `coef * x1^e1 ... xn^en` with an exact rational
/// coefficient, serialized as the string `"p/q"`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coef: Ratio<i64>,
    pub exps: Vec<u32>,
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw<'a> {
            coef: String,
            exps: &'a [u32],
        }
        let coef = if *self.coef.denom() == 1 {
            format!("{}", self.coef.numer())
        } else {
            format!("{}/{}", self.coef.numer(), self.coef.denom())
        };
        Raw { coef, exps: &self.exps }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            coef: String,
            exps: Vec<u32>,
        }
        let raw = Raw::deserialize(d)?;
        let coef = parse_rational(&raw.coef)
            .map_err(|e| D::Error::custom(format!("coef {:?}: {e}", raw.coef)))?;
        Ok(Term { coef, exps: raw.exps })
    }
}

pub fn parse_rational(s: &str) -> Result<Ratio<i64>> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: i64 = num.parse().map_err(|_| Error::SpecInvalid(format!("bad numerator {num:?}")))?;
    let q: i64 = den.parse().map_err(|_| Error::SpecInvalid(format!("bad denominator {den:?}")))?;
    if q == 0 {
        return Err(Error::SpecInvalid("zero denominator".into()));
    }
    Ok(Ratio::new(p, q))
}

/// Named radial profiles `u = f(r)` with closed-form derivatives to order 4.
/// `gauss_ramp` is odd and therefore only admitted for n = 1; the even
/// profiles are smooth on all of R^n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialProfile {
    /// f(r) = r - (sqrt(pi)/2) erf(r), so f'(r) = 1 - exp(-r^2). Odd; n = 1 only.
    GaussRamp,
    /// f(r) = ln cosh r, slope tanh r stays in (-1, 1). Even.
    LogCosh,
    /// f(r) = exp(-r^2). Even.
    GaussBump,
}

impl RadialProfile {
    /// f, f', f'', f''', f'''' at r.
    fn derivs(self, r: f64) -> [f64; 5] {
        match self {
            RadialProfile::GaussRamp => {
                let e = (-r * r).exp();
                let f = r - 0.5 * std::f64::consts::PI.sqrt() * libm::erf(r);
                [
                    f,
                    1.0 - e,
                    2.0 * r * e,
                    (2.0 - 4.0 * r * r) * e,
                    (8.0 * r * r * r - 12.0 * r) * e,
                ]
            }
            RadialProfile::LogCosh => {
                let t = r.tanh();
                let sech2 = 1.0 - t * t;
                [ln_cosh(r), t, sech2, -2.0 * t * sech2, sech2 * (6.0 * t * t - 2.0)]
            }
            RadialProfile::GaussBump => {
                let e = (-r * r).exp();
                [
                    e,
                    -2.0 * r * e,
                    (4.0 * r * r - 2.0) * e,
                    (12.0 * r - 8.0 * r * r * r) * e,
                    (16.0 * r.powi(4) - 48.0 * r * r + 12.0) * e,
                ]
            }
        }
    }

    fn is_even(self) -> bool {
        !matches!(self, RadialProfile::GaussRamp)
    }

    /// Leading coefficients of the even expansion u = h0 + h1 s + h2 s^2 in
    /// s = |x|^2, used near the origin where the chain rule degenerates.
    fn even_series(self) -> [f64; 3] {
        match self {
            RadialProfile::LogCosh => [0.0, 0.5, -1.0 / 12.0],
            RadialProfile::GaussBump => [1.0, -1.0, 0.5],
            RadialProfile::GaussRamp => unreachable!("odd profile has no even series"),
        }
    }
}

fn ln_cosh(r: f64) -> f64 {
    // Stable for large |r|: ln cosh r = |r| + ln((1 + exp(-2|r|))/2).
    let a = r.abs();
    a + ((-2.0 * a).exp().ln_1p()) - std::f64::consts::LN_2
}

/// One entry of the component list. `Poly`, `IsoQuadratic` and `Radial`
/// contribute a single scalar component; `Linear` contributes one component
/// per matrix row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Component {
    Poly { terms: Vec<Term> },
    Linear { matrix: Vec<Vec<f64>> },
    IsoQuadratic { c: f64 },
    Radial { profile: RadialProfile },
}

/// A single scalar component with exact jets to order 4.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarComponent {
    Poly(Vec<Term>),
    LinearRow(Vec<f64>),
    IsoQuadratic(f64),
    Radial(RadialProfile),
}

/// Scalar jet to a requested order (value, gradient, Hessian, and the
/// symmetric third/fourth derivative tensors in flattened row-major layout).
#[derive(Clone, Debug)]
pub struct ScalarJet {
    pub n: usize,
    pub order: usize,
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
    pub d3: Vec<f64>,
    pub d4: Vec<f64>,
}

impl ScalarJet {
    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.n + j]
    }
    pub fn d3_at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.d3[(i * self.n + j) * self.n + k]
    }
    pub fn d4_at(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.d4[((i * self.n + j) * self.n + k) * self.n + l]
    }
    pub fn hess_mat(&self) -> Mat {
        Mat { rows: self.n, cols: self.n, data: self.hess.clone() }
    }
}

impl ScalarComponent {
    /// Evaluate the component and its derivatives up to `order` (<= 4).
    pub fn jet(&self, n: usize, x: &[f64], order: usize) -> ScalarJet {
        assert!(order <= 4);
        assert_eq!(x.len(), n);
        let mut jet = ScalarJet {
            n,
            order,
            value: 0.0,
            grad: vec![0.0; n],
            hess: if order >= 2 { vec![0.0; n * n] } else { Vec::new() },
            d3: if order >= 3 { vec![0.0; n * n * n] } else { Vec::new() },
            d4: if order >= 4 { vec![0.0; n * n * n * n] } else { Vec::new() },
        };
        match self {
            ScalarComponent::Poly(terms) => fill_poly(&mut jet, terms, x),
            ScalarComponent::LinearRow(row) => {
                jet.value = row.iter().zip(x).map(|(a, xi)| a * xi).sum();
                if order >= 1 {
                    jet.grad.copy_from_slice(row);
                }
            }
            ScalarComponent::IsoQuadratic(c) => {
                let s: f64 = x.iter().map(|xi| xi * xi).sum();
                jet.value = 0.5 * c * s;
                if order >= 1 {
                    for i in 0..n {
                        jet.grad[i] = c * x[i];
                    }
                }
                if order >= 2 {
                    for i in 0..n {
                        jet.hess[i * n + i] = *c;
                    }
                }
            }
            ScalarComponent::Radial(profile) => fill_radial(&mut jet, *profile, x),
        }
        jet
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            ScalarComponent::Poly(terms) => {
                for t in terms {
                    if t.exps.len() != n {
                        return Err(Error::SpecInvalid(format!(
                            "term exponent list has length {}, expected n = {n}",
                            t.exps.len()
                        )));
                    }
                    let deg: u32 = t.exps.iter().sum();
                    if deg > 5 {
                        return Err(Error::SpecInvalid(format!("term degree {deg} exceeds 5")));
                    }
                }
                Ok(())
            }
            ScalarComponent::LinearRow(row) => {
                if row.len() != n {
                    return Err(Error::SpecInvalid(format!(
                        "linear row has length {}, expected n = {n}",
                        row.len()
                    )));
                }
                Ok(())
            }
            ScalarComponent::IsoQuadratic(c) => {
                if !c.is_finite() {
                    return Err(Error::SpecInvalid("non-finite iso_quadratic coefficient".into()));
                }
                Ok(())
            }
            ScalarComponent::Radial(profile) => {
                if !profile.is_even() && n != 1 {
                    return Err(Error::SpecInvalid(format!(
                        "odd radial profile {profile:?} requires n = 1 (got n = {n})"
                    )));
                }
                Ok(())
            }
        }
    }
}

fn fill_poly(jet: &mut ScalarJet, terms: &[Term], x: &[f64]) {
    let n = jet.n;
    let mut counts = vec![0u32; n];
    jet.value = poly_deriv(terms, x, &counts);
    if jet.order >= 1 {
        for i in 0..n {
            counts[i] += 1;
            jet.grad[i] = poly_deriv(terms, x, &counts);
            counts[i] -= 1;
        }
    }
    if jet.order >= 2 {
        for i in 0..n {
            for j in i..n {
                counts[i] += 1;
                counts[j] += 1;
                let v = poly_deriv(terms, x, &counts);
                counts[i] -= 1;
                counts[j] -= 1;
                jet.hess[i * n + j] = v;
                jet.hess[j * n + i] = v;
            }
        }
    }
    if jet.order >= 3 {
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    counts[i] += 1;
                    counts[j] += 1;
                    counts[k] += 1;
                    let v = poly_deriv(terms, x, &counts);
                    counts[i] -= 1;
                    counts[j] -= 1;
                    counts[k] -= 1;
                    for (a, b, c) in permutations3(i, j, k) {
                        jet.d3[(a * n + b) * n + c] = v;
                    }
                }
            }
        }
    }
    if jet.order >= 4 {
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    for l in k..n {
                        counts[i] += 1;
                        counts[j] += 1;
                        counts[k] += 1;
                        counts[l] += 1;
                        let v = poly_deriv(terms, x, &counts);
                        counts[i] -= 1;
                        counts[j] -= 1;
                        counts[k] -= 1;
                        counts[l] -= 1;
                        for (a, b, c, d) in permutations4(i, j, k, l) {
                            jet.d4[((a * n + b) * n + c) * n + d] = v;
                        }
                    }
                }
            }
        }
    }
}

fn permutations3(i: usize, j: usize, k: usize) -> Vec<(usize, usize, usize)> {
    let mut out = vec![
        (i, j, k),
        (i, k, j),
        (j, i, k),
        (j, k, i),
        (k, i, j),
        (k, j, i),
    ];
    out.sort_unstable();
    out.dedup();
    out
}

fn permutations4(i: usize, j: usize, k: usize, l: usize) -> Vec<(usize, usize, usize, usize)> {
    let idx = [i, j, k, l];
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            if b == a {
                continue;
            }
            for c in 0..4 {
                if c == a || c == b {
                    continue;
                }
                let d = 6 - a - b - c;
                out.push((idx[a], idx[b], idx[c], idx[d]));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Partial derivative of the polynomial with multiplicity `counts` per
/// variable, evaluated at x. Exact in the rationals until the final product.
fn poly_deriv(terms: &[Term], x: &[f64], counts: &[u32]) -> f64 {
    let mut acc = 0.0;
    'terms: for t in terms {
        let mut factor: i64 = 1;
        for (e, &c) in t.exps.iter().zip(counts) {
            if c > *e {
                continue 'terms;
            }
            for step in 0..c {
                factor *= (*e - step) as i64;
            }
        }
        let coef = t.coef * Ratio::from_integer(factor);
        let mut v = (*coef.numer() as f64) / (*coef.denom() as f64);
        for ((e, &c), xi) in t.exps.iter().zip(counts).zip(x) {
            let rem = e - c;
            if rem > 0 {
                v *= xi.powi(rem as i32);
            }
        }
        acc += v;
    }
    acc
}

fn fill_radial(jet: &mut ScalarJet, profile: RadialProfile, x: &[f64]) {
    let n = jet.n;
    if n == 1 {
        // Treat the profile as a function of the signed coordinate.
        let d = profile.derivs(x[0]);
        jet.value = d[0];
        if jet.order >= 1 {
            jet.grad[0] = d[1];
        }
        if jet.order >= 2 {
            jet.hess[0] = d[2];
        }
        if jet.order >= 3 {
            jet.d3[0] = d[3];
        }
        if jet.order >= 4 {
            jet.d4[0] = d[4];
        }
        return;
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let r = r2.sqrt();
    if r < 1e-6 {
        // Even expansion h0 + h1 s + h2 s^2 with s = |x|^2; the dropped s^3
        // term is below roundoff at this radius.
        let [h0, h1, h2] = profile.even_series();
        let s = r2;
        jet.value = h0 + h1 * s + h2 * s * s;
        if jet.order >= 1 {
            for i in 0..n {
                jet.grad[i] = 2.0 * x[i] * (h1 + 2.0 * h2 * s);
            }
        }
        if jet.order >= 2 {
            for i in 0..n {
                for j in 0..n {
                    let mut v = 8.0 * h2 * x[i] * x[j];
                    if i == j {
                        v += 2.0 * (h1 + 2.0 * h2 * s);
                    }
                    jet.hess[i * n + j] = v;
                }
            }
        }
        if jet.order >= 3 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut v = 0.0;
                        if i == j {
                            v += 8.0 * h2 * x[k];
                        }
                        if i == k {
                            v += 8.0 * h2 * x[j];
                        }
                        if j == k {
                            v += 8.0 * h2 * x[i];
                        }
                        jet.d3[(i * n + j) * n + k] = v;
                    }
                }
            }
        }
        if jet.order >= 4 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let mut v = 0.0;
                            if i == j && k == l {
                                v += 8.0 * h2;
                            }
                            if i == k && j == l {
                                v += 8.0 * h2;
                            }
                            if j == k && i == l {
                                v += 8.0 * h2;
                            }
                            jet.d4[((i * n + j) * n + k) * n + l] = v;
                        }
                    }
                }
            }
        }
        return;
    }

    let d = profile.derivs(r);
    let (f1, f2, f3, f4) = (d[1], d[2], d[3], d[4]);
    let b = f1 / r;
    let a = (f2 - b) / r2;
    let c = (f3 - 3.0 * f2 / r + 3.0 * f1 / r2) / (r2 * r);
    let e = (f4 - 6.0 * f3 / r + 15.0 * f2 / r2 - 15.0 * f1 / (r2 * r)) / (r2 * r2);

    jet.value = d[0];
    if jet.order >= 1 {
        for i in 0..n {
            jet.grad[i] = f1 * x[i] / r;
        }
    }
    if jet.order >= 2 {
        for i in 0..n {
            for j in 0..n {
                let mut v = a * x[i] * x[j];
                if i == j {
                    v += b;
                }
                jet.hess[i * n + j] = v;
            }
        }
    }
    if jet.order >= 3 {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = c * x[i] * x[j] * x[k];
                    if i == j {
                        v += a * x[k];
                    }
                    if i == k {
                        v += a * x[j];
                    }
                    if j == k {
                        v += a * x[i];
                    }
                    jet.d3[(i * n + j) * n + k] = v;
                }
            }
        }
    }
    if jet.order >= 4 {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut v = e * x[i] * x[j] * x[k] * x[l];
                        if i == j {
                            v += c * x[k] * x[l];
                        }
                        if i == k {
                            v += c * x[j] * x[l];
                        }
                        if i == l {
                            v += c * x[j] * x[k];
                        }
                        if j == k {
                            v += c * x[i] * x[l];
                        }
                        if j == l {
                            v += c * x[i] * x[k];
                        }
                        if k == l {
                            v += c * x[i] * x[j];
                        }
                        if i == j && k == l {
                            v += a;
                        }
                        if i == k && j == l {
                            v += a;
                        }
                        if j == k && i == l {
                            v += a;
                        }
                        jet.d4[((i * n + j) * n + k) * n + l] = v;
                    }
                }
            }
        }
    }
}

/// A closed-form graph map u: R^n -> R^m.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGraphSpec", into = "RawGraphSpec")]
pub struct GraphSpec {
    pub n: usize,
    pub m: usize,
    components: Vec<Component>,
    #[serde(skip)]
    rows: Vec<ScalarComponent>,
}

#[derive(Serialize, Deserialize)]
struct RawGraphSpec {
    n: usize,
    m: usize,
    components: Vec<Component>,
}

impl From<GraphSpec> for RawGraphSpec {
    fn from(s: GraphSpec) -> Self {
        RawGraphSpec { n: s.n, m: s.m, components: s.components }
    }
}

impl TryFrom<RawGraphSpec> for GraphSpec {
    type Error = Error;
    fn try_from(raw: RawGraphSpec) -> Result<GraphSpec> {
        GraphSpec::new(raw.n, raw.m, raw.components)
    }
}

fn expand_components(n: usize, components: &[Component]) -> Result<Vec<ScalarComponent>> {
    let mut rows = Vec::new();
    for c in components {
        match c {
            Component::Poly { terms } => rows.push(ScalarComponent::Poly(terms.clone())),
            Component::Linear { matrix } => {
                for row in matrix {
                    rows.push(ScalarComponent::LinearRow(row.clone()));
                }
            }
            Component::IsoQuadratic { c } => rows.push(ScalarComponent::IsoQuadratic(*c)),
            Component::Radial { profile } => rows.push(ScalarComponent::Radial(*profile)),
        }
    }
    for r in &rows {
        r.validate(n)?;
    }
    Ok(rows)
}

impl GraphSpec {
    pub fn new(n: usize, m: usize, components: Vec<Component>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::SpecInvalid("n and m must be at least 1".into()));
        }
        let rows = expand_components(n, &components)?;
        if rows.len() != m {
            return Err(Error::SpecInvalid(format!(
                "components expand to {} scalar rows, expected m = {m}",
                rows.len()
            )));
        }
        Ok(GraphSpec { n, m, components, rows })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::SpecInvalid(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("GraphSpec serializes")
    }

    /// The whole map is a single linear component u = A x.
    pub fn linear(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let m = matrix.len();
        let n = matrix.first().map(|r| r.len()).unwrap_or(0);
        GraphSpec::new(n, m, vec![Component::Linear { matrix }])
    }

    pub fn zero(n: usize, m: usize) -> Self {
        GraphSpec::new(n, m, vec![Component::Linear { matrix: vec![vec![0.0; n]; m] }]).unwrap()
    }

    /// Every component the isotropic quadratic c |x|^2 / 2.
    pub fn iso_quadratic(n: usize, m: usize, c: f64) -> Result<Self> {
        GraphSpec::new(n, m, vec![Component::IsoQuadratic { c }; m])
    }

    pub fn scalar_rows(&self) -> &[ScalarComponent] {
        &self.rows
    }

    pub fn linear_matrix(&self) -> Option<Mat> {
        let mut rows = Vec::new();
        for r in &self.rows {
            match r {
                ScalarComponent::LinearRow(row) => rows.push(row.clone()),
                _ => return None,
            }
        }
        Some(Mat::from_rows(&rows))
    }
}

/// Jet of a graph map at a point: u, Du, D2u and (at order 3) D3u, with the
/// index layout `du[alpha * n + i]`, `d2u[(alpha * n + i) * n + j]`,
/// `d3u[((alpha * n + i) * n + j) * n + p]`.
#[derive(Clone, Debug)]
pub struct Jet {
    pub n: usize,
    pub m: usize,
    pub order: usize,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub d2u: Vec<f64>,
    pub d3u: Vec<f64>,
}

impl Jet {
    pub fn du_at(&self, alpha: usize, i: usize) -> f64 {
        self.du[alpha * self.n + i]
    }
    pub fn d2u_at(&self, alpha: usize, i: usize, j: usize) -> f64 {
        self.d2u[(alpha * self.n + i) * self.n + j]
    }
    pub fn d3u_at(&self, alpha: usize, i: usize, j: usize, p: usize) -> f64 {
        self.d3u[((alpha * self.n + i) * self.n + j) * self.n + p]
    }

    /// du as an m x n matrix.
    pub fn du_mat(&self) -> Mat {
        Mat { rows: self.m, cols: self.n, data: self.du.clone() }
    }

    /// Hessian of component alpha as an n x n matrix.
    pub fn hessian_of(&self, alpha: usize) -> Mat {
        let n = self.n;
        let start = alpha * n * n;
        Mat { rows: n, cols: n, data: self.d2u[start..start + n * n].to_vec() }
    }

    /// Jet of the rotated map `u~(y) = R u(S^T y)` at `y = S x`, for
    /// orthogonal S (n x n) and R (m x m). Derivative tensors transform
    /// covariantly; used by the frame-invariance checks.
    pub fn rotated(&self, s: &Mat, r: &Mat) -> Jet {
        let (n, m) = (self.n, self.m);
        assert_eq!((s.rows, s.cols), (n, n));
        assert_eq!((r.rows, r.cols), (m, m));
        let x = s.matvec(&self.x);
        let u = r.matvec(&self.u);
        let mut du = vec![0.0; m * n];
        for a in 0..m {
            for i in 0..n {
                let mut acc = 0.0;
                for b in 0..m {
                    for k in 0..n {
                        acc += r[(a, b)] * self.du_at(b, k) * s[(i, k)];
                    }
                }
                du[a * n + i] = acc;
            }
        }
        let mut d2u = vec![0.0; if self.order >= 2 { m * n * n } else { 0 }];
        if self.order >= 2 {
            for a in 0..m {
                for i in 0..n {
                    for j in 0..n {
                        let mut acc = 0.0;
                        for b in 0..m {
                            for k in 0..n {
                                for l in 0..n {
                                    acc += r[(a, b)] * self.d2u_at(b, k, l) * s[(i, k)] * s[(j, l)];
                                }
                            }
                        }
                        d2u[(a * n + i) * n + j] = acc;
                    }
                }
            }
        }
        let mut d3u = vec![0.0; if self.order >= 3 { m * n * n * n } else { 0 }];
        if self.order >= 3 {
            for a in 0..m {
                for i in 0..n {
                    for j in 0..n {
                        for p in 0..n {
                            let mut acc = 0.0;
                            for b in 0..m {
                                for k in 0..n {
                                    for l in 0..n {
                                        for q in 0..n {
                                            acc += r[(a, b)]
                                                * self.d3u_at(b, k, l, q)
                                                * s[(i, k)]
                                                * s[(j, l)]
                                                * s[(p, q)];
                                        }
                                    }
                                }
                            }
                            d3u[((a * n + i) * n + j) * n + p] = acc;
                        }
                    }
                }
            }
        }
        Jet { n, m, order: self.order, x, u, du, d2u, d3u }
    }
}

/// Exact jet of the graph map at x, to the requested order (0..=3).
pub fn eval_jet(spec: &GraphSpec, x: &[f64], order: usize) -> Result<Jet> {
    if order > MAX_JET_ORDER {
        return Err(Error::UnsupportedOrder(order, MAX_JET_ORDER));
    }
    if x.len() != spec.n {
        return Err(Error::InvalidPoint(format!(
            "point has dimension {}, expected {}",
            x.len(),
            spec.n
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidPoint(format!("non-finite coordinate in {x:?}")));
    }
    let (n, m) = (spec.n, spec.m);
    let mut jet = Jet {
        n,
        m,
        order,
        x: x.to_vec(),
        u: vec![0.0; m],
        du: vec![0.0; if order >= 1 { m * n } else { 0 }],
        d2u: vec![0.0; if order >= 2 { m * n * n } else { 0 }],
        d3u: vec![0.0; if order >= 3 { m * n * n * n } else { 0 }],
    };
    for (alpha, row) in spec.rows.iter().enumerate() {
        let sj = row.jet(n, x, order);
        jet.u[alpha] = sj.value;
        if order >= 1 {
            jet.du[alpha * n..(alpha + 1) * n].copy_from_slice(&sj.grad);
        }
        if order >= 2 {
            jet.d2u[alpha * n * n..(alpha + 1) * n * n].copy_from_slice(&sj.hess);
        }
        if order >= 3 {
            jet.d3u[alpha * n * n * n..(alpha + 1) * n * n * n].copy_from_slice(&sj.d3);
        }
    }
    Ok(jet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cubic_1d() -> GraphSpec {
        // u(x) = x^3
        GraphSpec::new(
            1,
            1,
            vec![Component::Poly {
                terms: vec![Term { coef: Ratio::from_integer(1), exps: vec![3] }],
            }],
        )
        .unwrap()
    }

    #[test]
    fn cubic_jet_values() {
        let spec = cubic_1d();
        let jet = eval_jet(&spec, &[2.0], 3).unwrap();
        assert_eq!(jet.u[0], 8.0);
        assert_eq!(jet.du_at(0, 0), 12.0);
        assert_eq!(jet.d2u_at(0, 0, 0), 12.0);
        assert_eq!(jet.d3u_at(0, 0, 0, 0), 6.0);
    }

    #[test]
    fn zero_map_all_zero() {
        let spec = GraphSpec::zero(3, 2);
        let jet = eval_jet(&spec, &[0.3, -1.2, 4.0], 3).unwrap();
        assert!(jet.u.iter().all(|&v| v == 0.0));
        assert!(jet.du.iter().all(|&v| v == 0.0));
        assert!(jet.d2u.iter().all(|&v| v == 0.0));
        assert!(jet.d3u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn iso_quadratic_jet() {
        let spec = GraphSpec::iso_quadratic(2, 1, 1.0).unwrap();
        let jet = eval_jet(&spec, &[1.0, 0.0], 2).unwrap();
        assert_eq!(jet.du_at(0, 0), 1.0);
        assert_eq!(jet.du_at(0, 1), 0.0);
        assert_eq!(jet.d2u_at(0, 0, 0), 1.0);
        assert_eq!(jet.d2u_at(0, 1, 1), 1.0);
        assert_eq!(jet.d2u_at(0, 0, 1), 0.0);
    }

    #[test]
    fn order_cap_and_bad_point() {
        let spec = cubic_1d();
        assert!(matches!(eval_jet(&spec, &[1.0], 4), Err(Error::UnsupportedOrder(4, 3))));
        assert!(matches!(eval_jet(&spec, &[f64::NAN], 1), Err(Error::InvalidPoint(_))));
    }

    #[test]
    fn json_round_trip_exact_coefficients() {
        let text = r#"{"n":2,"m":2,"components":[
            {"kind":"poly","terms":[{"coef":"1/3","exps":[2,1]},{"coef":"-2","exps":[0,1]}]},
            {"kind":"linear","matrix":[[1.0,2.5]]}
        ]}"#;
        let spec = GraphSpec::from_json(text).unwrap();
        let back = GraphSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(spec, back);
        let jet = eval_jet(&spec, &[3.0, 2.0], 1).unwrap();
        // u1 = (1/3) x^2 y - 2 y = 6 - 4 = 2
        assert_abs_diff_eq!(jet.u[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(jet.u[1], 8.0, epsilon = 1e-15);
    }

    #[test]
    fn odd_radial_rejected_for_n2() {
        let err = GraphSpec::new(2, 1, vec![Component::Radial { profile: RadialProfile::GaussRamp }]);
        assert!(err.is_err());
    }

    #[test]
    fn radial_even_series_matches_chain_rule() {
        // Compare the near-origin branch with the generic chain rule just
        // outside the switch radius.
        let spec =
            GraphSpec::new(3, 1, vec![Component::Radial { profile: RadialProfile::GaussBump }])
                .unwrap();
        let x_in = [4e-7, -3e-7, 2e-7];
        let x_out = [4e-6, -3e-6, 2e-6];
        let j_in = eval_jet(&spec, &x_in, 3).unwrap();
        let j_out = eval_jet(&spec, &x_out, 3).unwrap();
        for (a, b) in j_in.d2u.iter().zip(&j_out.d2u) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn gauss_ramp_slope() {
        let spec =
            GraphSpec::new(1, 1, vec![Component::Radial { profile: RadialProfile::GaussRamp }])
                .unwrap();
        let jet = eval_jet(&spec, &[0.7], 2).unwrap();
        assert_abs_diff_eq!(jet.du_at(0, 0), 1.0 - (-0.49f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn deterministic_bitwise() {
        let spec = GraphSpec::iso_quadratic(3, 2, 0.7).unwrap();
        let a = eval_jet(&spec, &[0.1, 0.2, -0.3], 3).unwrap();
        let b = eval_jet(&spec, &[0.1, 0.2, -0.3], 3).unwrap();
        assert!(a.u.iter().zip(&b.u).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert!(a.d3u.iter().zip(&b.d3u).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
