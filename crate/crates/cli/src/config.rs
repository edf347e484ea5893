//! Scene configuration: the JSON document handed to every subcommand.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use shrinker_core::geometry::Signature;
use shrinker_core::jets::GraphSpec;
use shrinker_core::lagrangian::PotentialSpec;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub graph: Option<GraphSpec>,
    pub potential: Option<PotentialSpec>,
    pub signature: Option<Signature>,
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    /// Optional override of the built-in corpus: these specs replace the
    /// generated ones in the spec-independent identity scans.
    pub corpus: Option<Vec<GraphSpec>>,
    #[serde(default)]
    pub params: Params,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpec {
    Box { lo: Vec<f64>, hi: Vec<f64>, counts: Vec<usize> },
    Points(Vec<Vec<f64>>),
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<Vec<f64>>, String> {
        match self {
            GridSpec::Points(points) => {
                if points.is_empty() {
                    return Err("grid.points: empty point list".into());
                }
                Ok(points.clone())
            }
            GridSpec::Box { lo, hi, counts } => {
                if lo.len() != hi.len() || lo.len() != counts.len() {
                    return Err("grid.box: lo, hi and counts must share a length".into());
                }
                if counts.iter().any(|&c| c == 0) {
                    return Err("grid.box: counts must be positive".into());
                }
                let total: usize = counts.iter().product();
                if total > 100_000 {
                    return Err(format!("grid.box: {total} points exceeds the 100000 cap"));
                }
                let n = lo.len();
                let mut points = Vec::with_capacity(total);
                let mut idx = vec![0usize; n];
                loop {
                    let p: Vec<f64> = (0..n)
                        .map(|d| {
                            if counts[d] == 1 {
                                0.5 * (lo[d] + hi[d])
                            } else {
                                lo[d]
                                    + (hi[d] - lo[d]) * idx[d] as f64 / (counts[d] - 1) as f64
                            }
                        })
                        .collect();
                    points.push(p);
                    let mut d = 0;
                    loop {
                        if d == n {
                            return Ok(points);
                        }
                        idx[d] += 1;
                        if idx[d] < counts[d] {
                            break;
                        }
                        idx[d] = 0;
                        d += 1;
                    }
                }
            }
        }
    }
}

/// Command-specific knobs, all optional with serviceable defaults.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// rescale: horizon T and the number of time samples per point
    pub horizon: Option<f64>,
    pub time_samples: Option<usize>,
    /// constants / growth: exponent and side-condition constants
    pub s: Option<f64>,
    pub sigma: Option<f64>,
    pub tau: Option<f64>,
    pub c_decay: Option<f64>,
    pub r0: Option<f64>,
    /// conditions: determinant threshold (must stay below 9)
    pub beta: Option<f64>,
    /// growth / pseudo decay: sample radii
    pub radii: Option<Vec<f64>>,
    /// rotsym: initial values, domain dimension, integration span
    pub c_scan: Option<Vec<Vec<f64>>>,
    pub n: Option<usize>,
    pub r_max: Option<f64>,
    /// identity / pseudo inequality: number of random draws
    pub draws: Option<usize>,
    /// pseudo decay: directions per radius
    pub directions: Option<usize>,
    /// ssh margin constant
    pub epsilon: Option<f64>,
}

/// Tolerance tiers with overrides applied on top of the defaults.
#[derive(Clone, Debug)]
pub struct Tolerances {
    map: BTreeMap<String, f64>,
}

impl Tolerances {
    pub fn new(config: &BTreeMap<String, f64>, overrides: &[(String, f64)]) -> Self {
        let mut map = BTreeMap::new();
        map.insert("algebra".to_string(), shrinker_core::report::tol::ALGEBRA);
        map.insert("analytic".to_string(), shrinker_core::report::tol::ANALYTIC);
        map.insert("oracle".to_string(), shrinker_core::report::tol::ORACLE);
        map.insert("heat".to_string(), 1e-10);
        for (k, v) in config {
            map.insert(k.clone(), *v);
        }
        for (k, v) in overrides {
            map.insert(k.clone(), *v);
        }
        Tolerances { map }
    }

    pub fn get(&self, tier: &str) -> f64 {
        *self.map.get(tier).unwrap_or(&shrinker_core::report::tol::ANALYTIC)
    }
}
