//! Command-line surface: scene configs in, JSON-lines reports and CSV
//! tables out. Exit status: 0 when every check passes, 1 on a failed
//! check, 2 on configuration problems. Diagnostics never gate.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{LagrangianAction, PseudoAction, RunError};
use config::{SceneConfig, Tolerances};
use report::{write_jsonl, RecordKind};

#[derive(Parser)]
#[command(
    name = "shrinker",
    about = "Numerical checks for graphical self-shrinkers of mean curvature flow",
    version
)]
struct Cli {
    /// Scene configuration (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for report.jsonl and CSV tables
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Seed for randomized checks (overrides config.seed)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Tolerance override TIER=VALUE (tiers: algebra, analytic, oracle, heat)
    #[arg(long = "tol-override", global = true, value_parser = parse_tol)]
    tol_override: Vec<(String, f64)>,

    /// Worker threads for grid scans
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Self-shrinker system residual over the grid
    Residual,
    /// Volume-element drift identities and frame-reduction draws
    Identity,
    /// The three rigidity conditions over the grid
    Conditions,
    /// Radial shooting scan (diagnostic; writes one CSV per trajectory)
    Rotsym,
    /// Two-route heat-operator agreement for the rescaled graph
    Rescale,
    /// Linear-growth margins and generalized-system side conditions
    Growth,
    /// Exponent threshold, witness margins and derived radii
    Constants {
        /// Exponent s >= s0 (overrides config.params.s)
        #[arg(long)]
        s: Option<f64>,
        /// Domain dimension (overrides config.params.n)
        #[arg(long)]
        n: Option<usize>,
        /// Coefficient upper bound (overrides config.params.sigma)
        #[arg(long)]
        sigma: Option<f64>,
        /// Decay exponent (overrides config.params.tau)
        #[arg(long)]
        tau: Option<f64>,
        /// Decay constant (overrides config.params.c_decay)
        #[arg(long = "c-decay")]
        c_decay: Option<f64>,
        /// Decay radius (overrides config.params.r0)
        #[arg(long)]
        r0: Option<f64>,
    },
    /// Potential reductions for Lagrangian graphs
    Lagrangian {
        #[command(subcommand)]
        action: LagrangianCmd,
    },
    /// Spacelike-graph identities and diagnostics
    Pseudo {
        #[command(subcommand)]
        action: PseudoCmd,
    },
    /// Built-in battery over the deterministic corpus
    Corpus,
}

#[derive(Subcommand)]
enum LagrangianCmd {
    /// tr arctan D2v + 2v - x.Dv over the grid
    ResidualEuclid,
    /// (1/2) tr ln (I+D2v)(I-D2v)^{-1} + 2v - x.Dv over the grid
    ResidualPseudo,
    /// Phase function, its resolvent gradient, and its drift
    Phase,
    /// Lewy rotation round trip and rotated Hessian
    Lewy,
    /// Scalar-equation gradient versus the system residual
    Consistency,
}

#[derive(Subcommand)]
enum PseudoCmd {
    /// 1/sqrt(det g) by two routes over the grid
    Stardx,
    /// Adapted-frame gradient identity for *dx
    Identity,
    /// Frame inequality margins over seeded draws
    Inequality,
    /// Decay profile of log det g / |x| (diagnostic; writes decay.csv)
    Decay,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected TIER=VALUE")?;
    let value: f64 = v.parse().map_err(|_| format!("bad tolerance value {v:?}"))?;
    if !(value > 0.0) {
        return Err("tolerance must be positive".into());
    }
    Ok((k.to_string(), value))
}

fn load_config(path: &Option<PathBuf>) -> Result<SceneConfig, RunError> {
    match path {
        None => Ok(SceneConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| RunError::scene(format!("config {p:?}: {e}")))?;
            serde_json::from_str(&text)
                .map_err(|e| RunError::scene(format!("config {p:?}: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.exit as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, RunError> {
    let config = load_config(&cli.config)?;
    let tols = Tolerances::new(&config.tolerances, &cli.tol_override);
    let records = match &cli.command {
        Command::Residual => commands::residual(&config, &tols)?,
        Command::Identity => commands::identity(&config, &tols, cli.seed)?,
        Command::Conditions => commands::conditions(&config, &tols)?,
        Command::Rotsym => commands::rotsym(&config, &cli.out)?,
        Command::Rescale => commands::rescale(&config, &tols)?,
        Command::Growth => commands::growth(&config, &tols)?,
        Command::Constants { s, n, sigma, tau, c_decay, r0 } => {
            let mut config = config.clone();
            config.params.s = s.or(config.params.s);
            config.params.n = n.or(config.params.n);
            config.params.sigma = sigma.or(config.params.sigma);
            config.params.tau = tau.or(config.params.tau);
            config.params.c_decay = c_decay.or(config.params.c_decay);
            config.params.r0 = r0.or(config.params.r0);
            commands::constants(&config, &tols, &cli.out)?
        }
        Command::Lagrangian { action } => {
            let action = match action {
                LagrangianCmd::ResidualEuclid => LagrangianAction::ResidualEuclid,
                LagrangianCmd::ResidualPseudo => LagrangianAction::ResidualPseudo,
                LagrangianCmd::Phase => LagrangianAction::Phase,
                LagrangianCmd::Lewy => LagrangianAction::Lewy,
                LagrangianCmd::Consistency => LagrangianAction::Consistency,
            };
            commands::lagrangian(&config, &tols, &action)?
        }
        Command::Pseudo { action } => {
            let action = match action {
                PseudoCmd::Stardx => PseudoAction::Stardx,
                PseudoCmd::Identity => PseudoAction::Identity,
                PseudoCmd::Inequality => PseudoAction::Inequality,
                PseudoCmd::Decay => PseudoAction::Decay,
            };
            commands::pseudo(&config, &tols, &action, cli.seed, &cli.out)?
        }
        Command::Corpus => {
            commands::corpus_run(&config, &tols, cli.seed.or(config.seed), &cli.out)?
        }
    };

    let path = cli.out.join("report.jsonl");
    write_jsonl(&path, &records)
        .map_err(|e| RunError::scene(format!("writing {path:?}: {e}")))?;

    let checks = records.iter().filter(|r| r.kind == RecordKind::Check).count();
    let failed: Vec<&str> = records
        .iter()
        .filter(|r| r.kind == RecordKind::Check && !r.pass)
        .map(|r| r.check_id.as_str())
        .collect();
    println!(
        "{} records ({} checks, {} diagnostics); {} failed -> {}",
        records.len(),
        checks,
        records.len() - checks,
        failed.len(),
        path.display()
    );
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for id in &failed {
            eprintln!("failed check: {id}");
        }
        Ok(ExitCode::from(1))
    }
}
