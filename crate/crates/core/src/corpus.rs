//! Deterministic corpus of test maps: random linear graphs, isotropic
//! quadratics, and random polynomial specs at fixed seeds. Shared by the
//! test suites and the batch runner.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::jets::{Component, GraphSpec, Term};
use crate::lagrangian::PotentialSpec;

/// Random linear map u = A x with entries in [-cap, cap].
pub fn random_linear(rng: &mut ChaCha8Rng, n: usize, m: usize, cap: f64) -> GraphSpec {
    let matrix: Vec<Vec<f64>> =
        (0..m).map(|_| (0..n).map(|_| rng.gen_range(-cap..cap)).collect()).collect();
    GraphSpec::linear(matrix).unwrap()
}

/// Random linear map that stays strictly spacelike: the operator norm is
/// pushed under the requested bound by scaling.
pub fn random_spacelike_linear(rng: &mut ChaCha8Rng, n: usize, m: usize, norm_cap: f64) -> GraphSpec {
    let spec = random_linear(rng, n, m, 1.0);
    let a = spec.linear_matrix().unwrap();
    let svd = crate::linalg::jacobi_svd(&a).unwrap();
    let top = svd.singular.first().copied().unwrap_or(0.0).max(1e-9);
    let scale = norm_cap / top;
    let matrix: Vec<Vec<f64>> =
        (0..m).map(|r| (0..n).map(|c| a[(r, c)] * scale).collect()).collect();
    GraphSpec::linear(matrix).unwrap()
}

/// Random polynomial spec of the given degree with small exact rational
/// coefficients (denominator `denom`, numerators in [-num_cap, num_cap]).
pub fn random_poly_spec(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    degree: u32,
    num_cap: i64,
    denom: i64,
) -> GraphSpec {
    let mut components = Vec::with_capacity(m);
    for _ in 0..m {
        let mut terms = Vec::new();
        for exps in monomials_up_to(n, degree) {
            let p = rng.gen_range(-num_cap..=num_cap);
            if p != 0 {
                terms.push(Term { coef: Ratio::new(p, denom), exps });
            }
        }
        if terms.is_empty() {
            terms.push(Term { coef: Ratio::new(0, 1), exps: vec![0; n] });
        }
        components.push(Component::Poly { terms });
    }
    GraphSpec::new(n, m, components).unwrap()
}

/// Random polynomial potential of the given degree.
pub fn random_poly_potential(
    rng: &mut ChaCha8Rng,
    n: usize,
    degree: u32,
    num_cap: i64,
    denom: i64,
) -> PotentialSpec {
    let mut terms = Vec::new();
    for exps in monomials_up_to(n, degree) {
        let p = rng.gen_range(-num_cap..=num_cap);
        if p != 0 {
            terms.push(Term { coef: Ratio::new(p, denom), exps });
        }
    }
    if terms.is_empty() {
        terms.push(Term { coef: Ratio::new(0, 1), exps: vec![0; n] });
    }
    PotentialSpec::new(n, Component::Poly { terms }).unwrap()
}

/// All exponent vectors with total degree in [1, degree].
pub fn monomials_up_to(n: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    fn rec(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, pos: usize, remaining: u32) {
        if pos == current.len() {
            if current.iter().sum::<u32>() >= 1 {
                out.push(current.clone());
            }
            return;
        }
        for e in 0..=remaining {
            current[pos] = e;
            rec(out, current, pos + 1, remaining - e);
            current[pos] = 0;
        }
    }
    rec(&mut out, &mut current, 0, degree);
    out
}

/// Random point in the cube [-radius, radius]^n.
pub fn random_point(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-radius..radius)).collect()
}

/// Random point in the closed ball of that radius.
pub fn random_ball_point(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<f64> {
    loop {
        let p = random_point(rng, n, radius);
        if p.iter().map(|v| v * v).sum::<f64>() <= radius * radius {
            return p;
        }
    }
}

/// Seeded RNG used everywhere randomness is called for.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_counts() {
        // Degree <= 2 in two variables: x, y, x^2, xy, y^2.
        assert_eq!(monomials_up_to(2, 2).len(), 5);
        // Degree <= 3 in one variable: x, x^2, x^3.
        assert_eq!(monomials_up_to(1, 3).len(), 3);
    }

    #[test]
    fn spacelike_linear_is_spacelike() {
        let mut r = rng(5);
        for _ in 0..10 {
            let spec = random_spacelike_linear(&mut r, 3, 2, 0.8);
            let a = spec.linear_matrix().unwrap();
            let svd = crate::linalg::jacobi_svd(&a).unwrap();
            assert!(svd.singular[0] <= 0.8 + 1e-12);
        }
    }

    #[test]
    fn corpus_is_deterministic() {
        let a = random_poly_spec(&mut rng(7), 2, 2, 3, 10, 20);
        let b = random_poly_spec(&mut rng(7), 2, 2, 3, 10, 20);
        assert_eq!(a, b);
    }
}
