//! One runner per subcommand. Each returns the list of report records;
//! errors carry an exit hint (2 for scene/schema problems).

use std::path::Path;

use rayon::prelude::*;
use serde_json::json;

use shrinker_core::corpus;
use shrinker_core::fields::{HalfSquareField, MetricInverseField};
use shrinker_core::geometry::{curvature_pack, norm, shrinker_residual, Signature};
use shrinker_core::identity::{
    frame_grad_phi_sq, frame_reduction, rigidity_conditions, ssh_margin, volume_laplacian_identity,
    FrameData, SSHParams,
};
use shrinker_core::jets::{eval_jet, GraphSpec};
use shrinker_core::lagrangian::{
    euclid_potential_residual, gradient_consistency, lewy_rotate, phase_gradient_fd,
    phase_residual, pseudo_potential_residual, PotentialSpec,
};
use shrinker_core::pseudo::{
    decay_diagnostic, frame_inequality_check, grad_stardx_identity, star_dx, PseudoFrameData,
};
use shrinker_core::rescale::{
    g_of_s, growth_bound_check, growth_constants, heat_residual, s0_solve, zeta_witness,
};
use shrinker_core::rotsym::{scan, Outcome};

use crate::config::{SceneConfig, Tolerances};
use crate::report::{write_csv, RunRecord};

use rand::Rng;

pub struct RunError {
    pub exit: i32,
    pub message: String,
}

impl RunError {
    pub fn scene(msg: impl Into<String>) -> Self {
        RunError { exit: 2, message: msg.into() }
    }
}

type RunResult = Result<Vec<RunRecord>, RunError>;

fn core_err(context: &str) -> impl Fn(shrinker_core::Error) -> RunError + '_ {
    move |e| RunError::scene(format!("{context}: {e}"))
}

fn need_graph(config: &SceneConfig) -> Result<&GraphSpec, RunError> {
    config.graph.as_ref().ok_or_else(|| RunError::scene("config.graph: missing graph spec"))
}

fn need_potential(config: &SceneConfig) -> Result<&PotentialSpec, RunError> {
    config
        .potential
        .as_ref()
        .ok_or_else(|| RunError::scene("config.potential: missing potential spec"))
}

fn need_grid(config: &SceneConfig) -> Result<Vec<Vec<f64>>, RunError> {
    let grid = config.grid.as_ref().ok_or_else(|| RunError::scene("config.grid: missing grid"))?;
    grid.points().map_err(RunError::scene)
}

fn signature(config: &SceneConfig) -> Signature {
    config.signature.unwrap_or(Signature::Euclidean)
}

fn need_seed(config: &SceneConfig, seed_flag: Option<u64>) -> Result<u64, RunError> {
    seed_flag.or(config.seed).ok_or_else(|| {
        RunError::scene("seed: randomized checks need --seed or config.seed".to_string())
    })
}

/// residual: is the configured graph a solution of the system on the grid?
pub fn residual(config: &SceneConfig, tols: &Tolerances) -> RunResult {
    let spec = need_graph(config)?;
    let grid = need_grid(config)?;
    let sig = signature(config);
    let tol = tols.get("algebra");
    let records: Vec<_> = grid
        .par_iter()
        .enumerate()
        .map(|(idx, x)| -> Result<RunRecord, RunError> {
            let jet = eval_jet(spec, x, 2).map_err(core_err("residual"))?;
            let r = shrinker_residual(&jet, sig).map_err(core_err("residual"))?;
            let rnorm = norm(&r);
            Ok(RunRecord::check(
                format!("residual/p{idx:04}"),
                "g^{ij} u_ij + u - x.Du = 0",
                &(x, sig),
                json!({"x": x, "residual": r, "norm": rnorm}),
                rnorm,
                tol,
            ))
        })
        .collect::<Result<_, _>>()?;
    Ok(records)
}

/// identity: the volume-element drift identities plus seeded frame draws
/// and an SSH margin scan when epsilon is configured.
pub fn identity(config: &SceneConfig, tols: &Tolerances, seed_flag: Option<u64>) -> RunResult {
    let spec = need_graph(config)?;
    let grid = need_grid(config)?;
    let seed = need_seed(config, seed_flag)?;
    let mut records: Vec<RunRecord> = grid
        .par_iter()
        .enumerate()
        .map(|(idx, x)| -> Result<RunRecord, RunError> {
            let rep = volume_laplacian_identity(spec, x).map_err(core_err("identity"))?;
            Ok(RunRecord::check(
                format!("identity/volume-laplacian/p{idx:04}"),
                "g^{ij}(ln det g)_ij equals its four-term expansion",
                &(x,),
                json!({"x": x, "direct": rep.lhs, "expansion": rep.rhs}),
                rep.abs_discrepancy,
                tols.get("analytic") * rep.lhs.abs().max(rep.rhs.abs()).max(1.0),
            ))
        })
        .collect::<Result<_, _>>()?;

    let draws = config.params.draws.unwrap_or(200);
    let mut rng = corpus::rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=4);
        let mut lambdas: Vec<f64> = (0..n.min(m)).map(|_| rng.gen_range(0.0..2.0)).collect();
        lambdas.resize(n.max(m), 0.0);
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
        let data = FrameData::new(n, m, lambdas, hess)
            .map_err(|e| RunError::scene(format!("frame draw: {e}")))?;
        worst = worst.max(frame_reduction(&data).discrepancy);
    }
    records.push(RunRecord::check(
        "identity/frame-reduction",
        "coordinate and singular-value forms of the volume-element drift agree",
        &(seed, draws),
        json!({"draws": draws, "worst_discrepancy": worst}),
        worst,
        tols.get("algebra"),
    ));

    if let Some(epsilon) = config.params.epsilon {
        let params = SSHParams::new(epsilon).map_err(core_err("identity.epsilon"))?;
        let rep = ssh_margin(spec, &HalfSquareField, params, &grid, signature(config))
            .map_err(core_err("identity.ssh"))?;
        records.push(RunRecord::diagnostic(
            "identity/ssh-margin",
            "strong-sub-harmonic margin of |x|^2/2 on the grid",
            &(epsilon,),
            json!({"epsilon": epsilon, "min_margin": rep.min_margin, "holds": rep.holds}),
        ));
    }
    Ok(records)
}

/// conditions: the three rigidity hypotheses over the grid.
pub fn conditions(config: &SceneConfig, tols: &Tolerances) -> RunResult {
    let spec = need_graph(config)?;
    let grid = need_grid(config)?;
    let beta = config.params.beta.unwrap_or(8.0);
    let rep = rigidity_conditions(spec, &grid, beta).map_err(core_err("conditions"))?;
    Ok(vec![
        RunRecord::margin_check(
            "conditions/products",
            "pairwise singular-value products stay at most one",
            &(beta,),
            json!({"worst_product": rep.worst_product}),
            1.0 - rep.worst_product,
            tols.get("algebra"),
        ),
        RunRecord::margin_check(
            "conditions/determinant",
            "det g stays below the configured threshold",
            &(beta,),
            json!({"worst_detg": rep.worst_detg, "beta": beta}),
            beta - rep.worst_detg,
            tols.get("algebra"),
        ),
        RunRecord::check(
            "conditions/commutator",
            "Hessian contractions commute across components",
            &(beta,),
            json!({"worst_commutator": rep.worst_commutator}),
            rep.worst_commutator,
            tols.get("algebra"),
        ),
    ])
}

/// rotsym: scan of radial shooting outcomes; trajectories as CSV.
pub fn rotsym(config: &SceneConfig, out_dir: &Path) -> RunResult {
    let c_scan = config
        .params
        .c_scan
        .clone()
        .ok_or_else(|| RunError::scene("params.c_scan: missing initial values"))?;
    let n = config.params.n.unwrap_or(2);
    let r_max = config.params.r_max.unwrap_or(50.0);
    let rows = scan(&c_scan, n, r_max).map_err(core_err("rotsym"))?;
    let mut records = Vec::with_capacity(rows.len());
    for (idx, row) in rows.iter().enumerate() {
        let res = shrinker_core::rotsym::shoot(
            &row.c,
            n,
            r_max,
            shrinker_core::rotsym::Thresholds::default(),
        );
        let m = row.c.len();
        let mut csv_rows = Vec::with_capacity(res.trajectory.len());
        for s in &res.trajectory {
            let mut line = Vec::with_capacity(1 + 2 * m);
            line.push(s.r);
            line.extend_from_slice(&s.u);
            line.extend_from_slice(&s.ur);
            csv_rows.push(line);
        }
        let mut header = String::from("r");
        for a in 1..=m {
            header.push_str(&format!(",u{a}"));
        }
        for a in 1..=m {
            header.push_str(&format!(",ur{a}"));
        }
        let path = out_dir.join(format!("rotsym_{idx:03}.csv"));
        write_csv(&path, &header, &csv_rows)
            .map_err(|e| RunError::scene(format!("writing {path:?}: {e}")))?;
        records.push(RunRecord::diagnostic(
            format!("rotsym/c{idx:03}"),
            "radial shooting outcome (observation, not proof)",
            &(&row.c, n, r_max),
            json!({
                "c": row.c,
                "outcome": row.outcome,
                "end_radius": row.end_radius,
                "max_u": row.max_u,
                "max_ur": row.max_ur,
                "global": row.outcome == Outcome::GlobalToRmax,
            }),
        ));
    }
    Ok(records)
}

/// rescale: two-route heat-operator agreement over the grid and time samples.
pub fn rescale(config: &SceneConfig, tols: &Tolerances) -> RunResult {
    let spec = need_graph(config)?;
    let grid = need_grid(config)?;
    let horizon = config.params.horizon.unwrap_or(1.0);
    if horizon <= 0.0 {
        return Err(RunError::scene("params.horizon: must be positive"));
    }
    let samples = config.params.time_samples.unwrap_or(4);
    let tol = tols.get("heat");
    let mut pairs = Vec::new();
    for (i, x) in grid.iter().enumerate() {
        for k in 0..samples {
            let t = horizon * (k as f64) / (samples as f64) * 0.75;
            pairs.push((i, k, x.clone(), t));
        }
    }
    pairs
        .par_iter()
        .map(|(i, k, x, t)| -> Result<RunRecord, RunError> {
            let hr = heat_residual(spec, horizon, x, *t).map_err(core_err("rescale"))?;
            Ok(RunRecord::check(
                format!("rescale/heat/p{i:04}t{k:02}"),
                "heat operator of the rescaled graph equals the scaled elliptic residual",
                &(x, t, horizon),
                json!({"x": x, "t": t, "direct": hr.direct, "via_residual": hr.via_residual}),
                hr.discrepancy,
                tol,
            ))
        })
        .collect::<Result<_, _>>()
}

/// growth: the linear-growth margins plus the generalized-system side
/// conditions with the graph's own inverse metric as coefficients.
pub fn growth(config: &SceneConfig, tols: &Tolerances) -> RunResult {
    let spec = need_graph(config)?;
    let radii = config.params.radii.clone().unwrap_or_else(|| vec![1.0, 10.0, 100.0]);
    let rep = growth_bound_check(spec, &radii).map_err(core_err("growth"))?;
    let mut records = vec![RunRecord::diagnostic(
        "growth/sup",
        "sampled sup of |u| over the reference ball",
        &(&radii,),
        json!({"sup": rep.sup_ball, "sampling_gap": rep.sup_sampling_gap}),
    )];
    for row in &rep.per_radius {
        records.push(RunRecord::margin_check(
            format!("growth/bound/r{:.0}", row.radius),
            "squared height stays under the linear-growth bound",
            &(row.radius,),
            json!({"radius": row.radius, "min_margin": row.min_margin}),
            row.min_margin,
            tols.get("algebra"),
        ));
        records.push(RunRecord::margin_check(
            format!("growth/curvature/r{:.0}", row.radius),
            "mean curvature stays under C (1 + |x|)",
            &(row.radius,),
            json!({"radius": row.radius, "min_margin": row.min_curvature_margin}),
            row.min_curvature_margin,
            tols.get("algebra"),
        ));
    }

    if let Some(grid) = config.grid.as_ref() {
        let grid = grid.points().map_err(RunError::scene)?;
        let constants = growth_constants(
            config.params.s.unwrap_or(4.0),
            spec.n,
            config.params.sigma.unwrap_or(2.0),
            config.params.tau.unwrap_or(1.0),
            config.params.c_decay.unwrap_or(1.0),
            config.params.r0.unwrap_or(1.0),
        )
        .map_err(core_err("growth.constants"))?;
        let a = MetricInverseField { spec, sig: signature(config) };
        let gel = shrinker_core::rescale::gel_residual_and_conditions(&a, spec, &grid, &constants)
            .map_err(core_err("growth.gel"))?;
        records.push(RunRecord::margin_check(
            "growth/gel/sigma",
            "coefficients stay under the uniform bound sigma",
            &(constants.sigma,),
            json!({"min_margin": gel.sigma_margin_min}),
            gel.sigma_margin_min,
            tols.get("algebra"),
        ));
        if let Some(min) = gel.decay_margin_min {
            records.push(RunRecord::margin_check(
                "growth/gel/decay",
                "gradient contraction decays like c |x|^{2 tau - 2} past r0",
                &(constants.tau, constants.c_decay, constants.r0),
                json!({"min_margin": min}),
                min,
                tols.get("algebra"),
            ));
        }
        records.push(RunRecord::diagnostic(
            "growth/gel/residual",
            "generalized-system residual with a = g^{-1}",
            &(),
            json!({"sup": gel.residual_sup}),
        ));

        // Dichotomy at every configured radius past R0, and the polynomial
        // growth bound value at the largest one.
        let sup = |r: f64| shrinker_core::rescale::ball_sup_abs_u(spec, r, 2_000);
        for &r in radii.iter().filter(|&&r| r > constants.r_big) {
            let dich = shrinker_core::rescale::sup_dichotomy_check(&sup, &constants, r)
                .map_err(core_err("growth.dichotomy"))?;
            records.push(RunRecord::margin_check(
                format!("growth/dichotomy/r{r:.0}"),
                "sup over the ball obeys one of the two radius inequalities",
                &(r,),
                json!({
                    "radius": r,
                    "inner_radius": dich.inner_radius,
                    "absolute_margin": dich.absolute_margin,
                    "comparison_margin": dich.comparison_margin,
                }),
                dich.absolute_margin.max(dich.comparison_margin),
                tols.get("algebra"),
            ));
        }
        if let Some(&r) = radii.last() {
            let sup_ref = shrinker_core::rescale::ball_sup_abs_u(
                spec,
                (constants.k * constants.k + 1.0).sqrt() * constants.r_big,
                2_000,
            )
            .map_err(core_err("growth.bound"))?;
            let x = vec![r, 0.0]
                .into_iter()
                .chain(std::iter::repeat(0.0))
                .take(spec.n)
                .collect::<Vec<_>>();
            let bound =
                shrinker_core::rescale::polynomial_growth_bound(&constants, sup_ref, &x, 1.0);
            records.push(RunRecord::diagnostic(
                "growth/poly-bound",
                "polynomial growth bound value C (1 + sup)(1 + |x|^max(s, tau))",
                &(r,),
                json!({"x_norm": r, "sup_term": sup_ref, "bound": bound}),
            ));
        }
    }
    Ok(records)
}

/// constants: threshold solve, exponent witness, derived radii; the witness
/// sweep lands in a CSV.
pub fn constants(config: &SceneConfig, tols: &Tolerances, out_dir: &Path) -> RunResult {
    let s0 = s0_solve(1e-12).map_err(core_err("constants"))?;
    let mut records = vec![
        RunRecord::check(
            "constants/threshold",
            "bisection pins the unit crossing of g inside (3.4, 3.5)",
            &(),
            json!({"s0": s0.s0, "bracket": s0.bracket, "g_at_1": g_of_s(1.0)}),
            s0.residual,
            tols.get("algebra"),
        ),
    ];
    let s = config.params.s.unwrap_or(4.0);
    match zeta_witness(s) {
        Ok(w) => records.push(RunRecord::margin_check(
            "constants/witness",
            "2/(2 - zeta) <= zeta^s at zeta = 2s/(s+1)",
            &(s,),
            json!({"s": s, "zeta": w.zeta, "margin": w.margin}),
            w.margin,
            tols.get("algebra"),
        )),
        Err(e) => return Err(RunError::scene(format!("constants.s: {e}"))),
    }

    let n = config.params.n.or(config.graph.as_ref().map(|g| g.n)).unwrap_or(2);
    let gc = growth_constants(
        s,
        n,
        config.params.sigma.unwrap_or(1.0),
        config.params.tau.unwrap_or(1.0),
        config.params.c_decay.unwrap_or(1.0),
        config.params.r0.unwrap_or(1.0),
    )
    .map_err(core_err("constants"))?;
    let k2 = gc.k * gc.k;
    records.push(RunRecord::margin_check(
        "constants/derived",
        "derived constants: theta in (0,1), k^2 in (1,2), R0^2 at its max form",
        &(s, n, gc.sigma, gc.tau, gc.c_decay, gc.r0),
        json!({
            "theta": gc.theta, "k": gc.k, "r_big_sq": gc.r_big * gc.r_big,
            "inner_radius_at_2R0": gc.inner_radius(2.0 * gc.r_big),
        }),
        (1.0 - gc.theta).min(k2 - 1.0).min(2.0 - k2),
        tols.get("algebra"),
    ));

    let mut sweep = Vec::new();
    let mut s_val = s0.s0;
    while s_val <= 20.0 {
        if let Ok(w) = zeta_witness(s_val) {
            sweep.push(vec![s_val, w.zeta, w.margin]);
        }
        s_val += 0.01;
    }
    let path = out_dir.join("zeta_sweep.csv");
    write_csv(&path, "s,zeta,margin", &sweep)
        .map_err(|e| RunError::scene(format!("writing {path:?}: {e}")))?;
    Ok(records)
}

pub enum LagrangianAction {
    ResidualEuclid,
    ResidualPseudo,
    Phase,
    Lewy,
    Consistency,
}

pub fn lagrangian(
    config: &SceneConfig,
    tols: &Tolerances,
    action: &LagrangianAction,
) -> RunResult {
    let vspec = need_potential(config)?;
    let grid = need_grid(config)?;
    let mut records = Vec::new();
    match action {
        LagrangianAction::ResidualEuclid => {
            for (idx, x) in grid.iter().enumerate() {
                let r = euclid_potential_residual(vspec, x)
                    .map_err(core_err("lagrangian.residual-euclid"))?;
                records.push(RunRecord::check(
                    format!("lagrangian/residual-euclid/p{idx:04}"),
                    "tr arctan D2v + 2v - x.Dv = 0",
                    &(x,),
                    json!({"x": x, "residual": r}),
                    r.abs(),
                    tols.get("algebra"),
                ));
            }
        }
        LagrangianAction::ResidualPseudo => {
            for (idx, x) in grid.iter().enumerate() {
                let r = pseudo_potential_residual(vspec, x)
                    .map_err(core_err("lagrangian.residual-pseudo"))?;
                records.push(RunRecord::check(
                    format!("lagrangian/residual-pseudo/p{idx:04}"),
                    "(1/2) tr ln (I + D2v)(I - D2v)^{-1} + 2v - x.Dv = 0",
                    &(x,),
                    json!({"x": x, "residual": r}),
                    r.abs(),
                    tols.get("algebra"),
                ));
            }
        }
        LagrangianAction::Phase => {
            for (idx, x) in grid.iter().enumerate() {
                let ph = phase_residual(vspec, x).map_err(core_err("lagrangian.phase"))?;
                // Check the resolvent gradient against finite differences;
                // report the drift value itself (vanishes on solutions).
                let mut worst = 0.0f64;
                for k in 0..vspec.n {
                    let ladder = phase_gradient_fd(
                        vspec,
                        x,
                        k,
                        &shrinker_core::fd::FDPolicy::default_at(x),
                    )
                    .map_err(core_err("lagrangian.phase"))?;
                    worst = worst.max((ladder.extrapolated - ph.grad[k]).abs());
                }
                records.push(RunRecord::check(
                    format!("lagrangian/phase-gradient/p{idx:04}"),
                    "resolvent formula for DTheta matches finite differences",
                    &(x,),
                    json!({"x": x, "grad": ph.grad}),
                    worst,
                    tols.get("oracle"),
                ));
                records.push(RunRecord::diagnostic(
                    format!("lagrangian/phase-drift/p{idx:04}"),
                    "drift of the phase function (zero on solutions)",
                    &(x,),
                    json!({"x": x, "theta": ph.theta, "drift": ph.residual}),
                ));
            }
        }
        LagrangianAction::Lewy => {
            for (idx, x) in grid.iter().enumerate() {
                let rot = lewy_rotate(vspec, x).map_err(core_err("lagrangian.lewy"))?;
                let jet = vspec.jet4(x).map_err(core_err("lagrangian.lewy"))?;
                let root2 = std::f64::consts::SQRT_2;
                let mut worst = 0.0f64;
                for i in 0..vspec.n {
                    worst = worst.max(((rot.xbar[i] + rot.dw[i]) / root2 - x[i]).abs());
                    worst =
                        worst.max(((rot.dw[i] - rot.xbar[i]) / root2 - jet.grad[i]).abs());
                }
                records.push(RunRecord::check(
                    format!("lagrangian/lewy/p{idx:04}"),
                    "Lewy rotation round trip recovers x and Deta",
                    &(x,),
                    json!({
                        "x": x, "xbar": rot.xbar, "dw": rot.dw,
                        "d2w_positive_definite": rot.d2w_positive_definite,
                    }),
                    worst,
                    tols.get("algebra"),
                ));
            }
        }
        LagrangianAction::Consistency => {
            for (idx, x) in grid.iter().enumerate() {
                let rep =
                    gradient_consistency(vspec, x).map_err(core_err("lagrangian.consistency"))?;
                records.push(RunRecord::check(
                    format!("lagrangian/consistency/p{idx:04}"),
                    "gradient of the scalar equation equals the system residual of u = Dv",
                    &(x,),
                    json!({"x": x, "scalar": rep.scalar_route, "system": rep.system_route}),
                    rep.discrepancy,
                    tols.get("analytic"),
                ));
            }
        }
    }
    Ok(records)
}

pub enum PseudoAction {
    Stardx,
    Identity,
    Inequality,
    Decay,
}

pub fn pseudo(
    config: &SceneConfig,
    tols: &Tolerances,
    action: &PseudoAction,
    seed_flag: Option<u64>,
    out_dir: &Path,
) -> RunResult {
    let mut records = Vec::new();
    match action {
        PseudoAction::Stardx => {
            let spec = need_graph(config)?;
            let grid = need_grid(config)?;
            for (idx, x) in grid.iter().enumerate() {
                let jet = eval_jet(spec, x, 2).map_err(core_err("pseudo.stardx"))?;
                let s = star_dx(&jet).map_err(core_err("pseudo.stardx"))?;
                records.push(RunRecord::check(
                    format!("pseudo/stardx/p{idx:04}"),
                    "1/sqrt(det g) equals the singular-value product route",
                    &(x,),
                    json!({"x": x, "value": s.value, "lambda_route": s.lambda_route}),
                    s.discrepancy,
                    tols.get("analytic"),
                ));
            }
        }
        PseudoAction::Identity => {
            let spec = need_graph(config)?;
            let grid = need_grid(config)?;
            for (idx, x) in grid.iter().enumerate() {
                let reps = grad_stardx_identity(spec, x).map_err(core_err("pseudo.identity"))?;
                for (i, rep) in reps.iter().enumerate() {
                    records.push(RunRecord::check(
                        format!("pseudo/grad-stardx/p{idx:04}e{i}"),
                        "adapted-frame gradient of *dx matches the slope-weighted trace",
                        &(x, i),
                        json!({"x": x, "direction": i, "lhs": rep.lhs, "rhs": rep.rhs}),
                        rep.abs_discrepancy,
                        tols.get("analytic") * rep.lhs.abs().max(rep.rhs.abs()).max(1.0),
                    ));
                }
            }
        }
        PseudoAction::Inequality => {
            let seed = need_seed(config, seed_flag)?;
            let draws = config.params.draws.unwrap_or(500);
            let mut rng = corpus::rng(seed);
            let mut min_cauchy = f64::INFINITY;
            let mut min_chain = f64::INFINITY;
            let mut worst_sos = 0.0f64;
            for _ in 0..draws {
                let n = rng.gen_range(1..=3);
                let m = rng.gen_range(1..=3);
                let lambdas: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.9..0.9)).collect();
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
                let data = PseudoFrameData::new(n, m, lambdas, h)
                    .map_err(|e| RunError::scene(format!("pseudo draw: {e}")))?;
                let rep = frame_inequality_check(&data);
                min_cauchy = min_cauchy.min(rep.cauchy_margin);
                min_chain = min_chain.min(rep.chain_margin);
                worst_sos = worst_sos.max(rep.sos_identity_discrepancy);
            }
            records.push(RunRecord::margin_check(
                "pseudo/inequality/cauchy",
                "cross terms stay under the squared frame coefficients",
                &(seed, draws),
                json!({"min_margin": min_cauchy}),
                min_cauchy,
                tols.get("algebra"),
            ));
            records.push(RunRecord::margin_check(
                "pseudo/inequality/chain",
                "drift bracket dominates the squared gradient of *dx",
                &(seed, draws),
                json!({"min_margin": min_chain}),
                min_chain,
                tols.get("algebra"),
            ));
            records.push(RunRecord::check(
                "pseudo/inequality/sum-of-squares",
                "three-term drift expansion equals the antisymmetrized-square form",
                &(seed, draws),
                json!({"worst_discrepancy": worst_sos}),
                worst_sos,
                tols.get("algebra"),
            ));
        }
        PseudoAction::Decay => {
            let spec = need_graph(config)?;
            let radii = config
                .params
                .radii
                .clone()
                .ok_or_else(|| RunError::scene("params.radii: missing radii"))?;
            let dirs = config.params.directions.unwrap_or(16);
            let profile =
                decay_diagnostic(spec, &radii, dirs).map_err(core_err("pseudo.decay"))?;
            let rows: Vec<Vec<f64>> = profile
                .rows
                .iter()
                .map(|r| vec![r.radius, r.max_ratio, r.min_detg])
                .collect();
            let path = out_dir.join("decay.csv");
            write_csv(&path, "radius,max_ratio,min_detg", &rows)
                .map_err(|e| RunError::scene(format!("writing {path:?}: {e}")))?;
            records.push(RunRecord::diagnostic(
                "pseudo/decay",
                "trend of log det g / |x| along sampled rays (hypothesis diagnostic)",
                &(&radii, dirs),
                serde_json::to_value(&profile).unwrap_or_default(),
            ));
        }
    }
    Ok(records)
}

/// corpus: the built-in battery over deterministic specs; CI's entry point.
/// A corpus override in the config replaces the generated specs in the
/// spec-independent identity scans.
pub fn corpus_run(
    config: &SceneConfig,
    tols: &Tolerances,
    seed_flag: Option<u64>,
    out_dir: &Path,
) -> RunResult {
    let seed = seed_flag.unwrap_or(1);
    let override_specs: Option<&[GraphSpec]> = match &config.corpus {
        None => None,
        Some(list) if list.is_empty() => {
            return Err(RunError::scene("config.corpus: override list is empty"));
        }
        Some(list) => Some(list),
    };
    let mut records = Vec::new();
    let mut rng = corpus::rng(seed);

    // Linear solutions solve the system in both signatures.
    let mut worst = 0.0f64;
    for case in 0..6 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=4);
        let (spec, sig) = if case % 2 == 0 {
            (corpus::random_linear(&mut rng, n, m, 2.0), Signature::Euclidean)
        } else {
            (corpus::random_spacelike_linear(&mut rng, n, m, 0.9), Signature::PseudoEuclidean)
        };
        for _ in 0..100 {
            let x = corpus::random_ball_point(&mut rng, n, 10.0);
            let jet = eval_jet(&spec, &x, 2).map_err(core_err("corpus"))?;
            let r = shrinker_residual(&jet, sig).map_err(core_err("corpus"))?;
            worst = worst.max(norm(&r));
        }
    }
    records.push(RunRecord::check(
        "corpus/residual-linear",
        "linear graphs solve the system exactly",
        &(seed,),
        json!({"worst": worst}),
        worst,
        tols.get("algebra"),
    ));

    // Volume-element identity on random cubic specs (or the override list).
    let mut worst = 0.0f64;
    let scan_specs: Vec<GraphSpec> = match override_specs {
        Some(list) => list.to_vec(),
        None => (0..4)
            .map(|_| {
                let n = rng.gen_range(1..=3);
                let m = rng.gen_range(1..=3);
                corpus::random_poly_spec(&mut rng, n, m, 3, 10, 40)
            })
            .collect(),
    };
    for spec in &scan_specs {
        for _ in 0..10 {
            let x = corpus::random_ball_point(&mut rng, spec.n, 1.0);
            let rep = volume_laplacian_identity(spec, &x).map_err(core_err("corpus"))?;
            worst = worst.max(rep.rel_discrepancy);
        }
    }
    records.push(RunRecord::check(
        "corpus/volume-laplacian",
        "g^{ij}(ln det g)_ij equals its four-term expansion",
        &(seed,),
        json!({"worst_relative": worst}),
        worst,
        tols.get("analytic"),
    ));

    // Frame reduction and the gradient chains.
    let mut worst = 0.0f64;
    let mut min_chain = f64::INFINITY;
    for _ in 0..300 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=4);
        let mut lambdas: Vec<f64> = (0..n.min(m)).map(|_| rng.gen_range(0.0..1.0)).collect();
        lambdas.resize(n.max(m), 0.0);
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
        let data = FrameData::new(n, m, lambdas, hess)
            .map_err(|e| RunError::scene(format!("corpus frame: {e}")))?;
        let red = frame_reduction(&data);
        worst = worst.max(red.discrepancy);
        min_chain = min_chain.min(red.frame - frame_grad_phi_sq(&data) / (2.0 * n as f64));
    }
    records.push(RunRecord::check(
        "corpus/frame-reduction",
        "coordinate and singular-value drift forms agree",
        &(seed,),
        json!({"worst": worst}),
        worst,
        tols.get("algebra"),
    ));
    records.push(RunRecord::margin_check(
        "corpus/gradient-chain",
        "drift dominates |grad phi|^2 / (2n) under the product condition",
        &(seed,),
        json!({"min_margin": min_chain}),
        min_chain,
        tols.get("algebra"),
    ));

    // Exponent machinery.
    let s0 = s0_solve(1e-12).map_err(core_err("corpus"))?;
    records.push(RunRecord::check(
        "corpus/threshold",
        "bisection pins the unit crossing of g inside (3.4, 3.5)",
        &(),
        json!({"s0": s0.s0}),
        s0.residual
            + if s0.s0 > 3.4 && s0.s0 < 3.5 { 0.0 } else { 1.0 }
            + (g_of_s(1.0) - 0.5).abs(),
        tols.get("algebra"),
    ));

    // Heat identity on mixed specs (or the override list).
    let mut worst = 0.0f64;
    let heat_specs: Vec<GraphSpec> = match override_specs {
        Some(list) => list.to_vec(),
        None => (0..4)
            .map(|case| {
                let n = rng.gen_range(1..=3);
                let m = rng.gen_range(1..=3);
                if case % 2 == 0 {
                    corpus::random_linear(&mut rng, n, m, 2.0)
                } else {
                    corpus::random_poly_spec(&mut rng, n, m, 3, 8, 16)
                }
            })
            .collect(),
    };
    for spec in &heat_specs {
        for _ in 0..20 {
            let horizon = rng.gen_range(0.5..2.0);
            let t = rng.gen_range(0.0..horizon * 0.75);
            let x = corpus::random_ball_point(&mut rng, spec.n, 2.0);
            let hr = heat_residual(spec, horizon, &x, t).map_err(core_err("corpus"))?;
            worst = worst.max(hr.discrepancy);
        }
    }
    records.push(RunRecord::check(
        "corpus/heat-identity",
        "heat operator of the rescaled graph equals the scaled elliptic residual",
        &(seed,),
        json!({"worst": worst}),
        worst,
        tols.get("heat"),
    ));

    // Growth margins for scaled linear maps.
    let mut min_margin = f64::INFINITY;
    for _ in 0..4 {
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=3);
        let spec = corpus::random_linear(&mut rng, n, m, 2.5);
        let rep = growth_bound_check(&spec, &[1.0, 10.0, 100.0]).map_err(core_err("corpus"))?;
        for row in &rep.per_radius {
            min_margin = min_margin.min(row.min_margin.min(row.min_curvature_margin));
        }
    }
    records.push(RunRecord::margin_check(
        "corpus/growth-margins",
        "linear corpus satisfies the growth bound and curvature bound",
        &(seed,),
        json!({"min_margin": min_margin}),
        min_margin,
        tols.get("algebra"),
    ));

    // Pseudo identities.
    let mut worst_star = 0.0f64;
    for _ in 0..4 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=4);
        let spec = corpus::random_spacelike_linear(&mut rng, n, m, 0.9);
        for _ in 0..20 {
            let x = corpus::random_ball_point(&mut rng, n, 3.0);
            let jet = eval_jet(&spec, &x, 2).map_err(core_err("corpus"))?;
            worst_star = worst_star.max(star_dx(&jet).map_err(core_err("corpus"))?.discrepancy);
        }
    }
    records.push(RunRecord::check(
        "corpus/stardx",
        "1/sqrt(det g) equals the singular-value product route",
        &(seed,),
        json!({"worst": worst_star}),
        worst_star,
        tols.get("analytic"),
    ));

    // Lagrangian bridge.
    let mut worst = 0.0f64;
    for _ in 0..4 {
        let n = rng.gen_range(1..=3);
        let v = corpus::random_poly_potential(&mut rng, n, 4, 8, 32);
        for _ in 0..25 {
            let x = corpus::random_ball_point(&mut rng, n, 1.5);
            let rep = gradient_consistency(&v, &x).map_err(core_err("corpus"))?;
            worst = worst.max(rep.discrepancy);
        }
    }
    records.push(RunRecord::check(
        "corpus/potential-bridge",
        "gradient of the scalar equation equals the system residual of u = Dv",
        &(seed,),
        json!({"worst": worst}),
        worst,
        tols.get("analytic"),
    ));

    // Curvature of the round paraboloid at the origin: closed form H = n.
    let spec = GraphSpec::iso_quadratic(3, 1, 1.0).map_err(core_err("corpus"))?;
    let jet = eval_jet(&spec, &[0.0, 0.0, 0.0], 2).map_err(core_err("corpus"))?;
    let pack = curvature_pack(&jet, Signature::Euclidean).map_err(core_err("corpus"))?;
    records.push(RunRecord::check(
        "corpus/paraboloid-curvature",
        "isotropic quadratic has H = n at the origin",
        &(),
        json!({"hcomp": pack.hcomp}),
        (pack.hcomp[0] - 3.0).abs(),
        tols.get("algebra"),
    ));

    // Diagnostics: a small shooting scan and a decay profile.
    let rows = scan(&[vec![0.0], vec![1.0]], 2, 30.0).map_err(core_err("corpus"))?;
    records.push(RunRecord::diagnostic(
        "corpus/rotsym",
        "radial shooting outcomes (observation, not proof)",
        &(),
        json!({
            "zero_global": rows[0].outcome == Outcome::GlobalToRmax,
            "unit_end_radius": rows[1].end_radius,
        }),
    ));
    let spacelike = corpus::random_spacelike_linear(&mut rng, 2, 1, 0.7);
    let profile =
        decay_diagnostic(&spacelike, &[1.0, 10.0, 100.0], 8).map_err(core_err("corpus"))?;
    records.push(RunRecord::diagnostic(
        "corpus/decay",
        "trend of log det g / |x| (hypothesis diagnostic)",
        &(),
        serde_json::to_value(&profile).unwrap_or_default(),
    ));

    // Module-level summary.
    let passes = records.iter().filter(|r| r.pass).count();
    let checks = records
        .iter()
        .filter(|r| r.kind == crate::report::RecordKind::Check)
        .count();
    records.push(RunRecord::diagnostic(
        "corpus/summary",
        "aggregated corpus results",
        &(seed,),
        json!({"records": records.len(), "checks": checks, "passes": passes}),
    ));

    // Diagnostics CSV directory exists even when only reports are written.
    std::fs::create_dir_all(out_dir)
        .map_err(|e| RunError::scene(format!("creating {out_dir:?}: {e}")))?;
    Ok(records)
}

