//! `dionet`: a command-line harness for training and analyzing neural
//! networks whose parameters are constrained to integer lattices.
//!
//! Subcommands:
//! - `reproduce` — run the built-in reference calculations and exit nonzero
//!   on any mismatch;
//! - `train` — run a config-driven experiment, writing `metrics.csv`, the
//!   trained model, and optionally `analysis.csv`;
//! - `eval` — report validation loss/accuracy of a saved model;
//! - `attack` — sweep adversarial accuracy over an epsilon grid;
//! - `encode` — apply integer projection, fixed-point encoding, rational
//!   approximation, or lattice-basis reduction to a saved model.
//!
//! Exit codes: 0 success, 1 reference-value mismatch, 2 configuration
//! error, 3 I/O error.

pub mod config;
pub mod error;
pub mod experiment;
pub mod model;
pub mod reproduce;
pub mod tasks;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dionet_core::constraints::{lll_init, project_network, rational_approx, EncodingMap};
use dionet_core::training::evaluate;

use crate::config::{ExperimentConfig, ModeName};
use crate::error::{CliError, Result};

#[derive(Parser)]
#[command(
    name = "dionet",
    version,
    about = "Train and analyze integer-constrained neural networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the built-in worked-example reference values
    Reproduce,
    /// Train per a config file and write CSV/model artifacts
    Train(TrainArgs),
    /// Report validation loss and accuracy of a saved model
    Eval(EvalArgs),
    /// Sweep adversarial accuracy over an epsilon grid
    Attack(AttackArgs),
    /// Transform a saved model's parameters
    Encode(EncodeArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Experiment config (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's training mode
    #[arg(long, value_enum)]
    mode: Option<ModeName>,
}

#[derive(Args)]
struct EvalArgs {
    /// Experiment config naming the task whose validation set to use
    #[arg(long)]
    config: PathBuf,
    /// Saved model to evaluate
    #[arg(long)]
    model: PathBuf,
    /// Override the config's seed (affects synthetic datasets)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct AttackArgs {
    /// Experiment config naming the task and the sweep parameters
    #[arg(long)]
    config: PathBuf,
    /// Saved model to attack
    #[arg(long)]
    model: PathBuf,
    /// Write the sweep CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's seed (affects synthetic datasets)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EncodeOp {
    /// Round every parameter to the nearest integer (ties toward zero)
    Project,
    /// Print the fixed-point integer encoding round(scale * theta)
    Scale,
    /// Print the best rational approximation of each parameter
    Cf,
    /// Re-initialize parameters from a reduced lattice basis
    Lll,
}

#[derive(Args)]
struct EncodeArgs {
    /// Saved model to transform
    #[arg(long)]
    model: PathBuf,
    /// Which transform to apply
    #[arg(long, value_enum)]
    op: EncodeOp,
    /// Where to write the transformed model (project/lll)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fixed-point scale for the scale op (must be positive)
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Denominator bound for the cf op
    #[arg(long, default_value_t = 1000)]
    max_den: u64,
}

fn apply_overrides(
    cfg: &mut ExperimentConfig,
    out: Option<PathBuf>,
    seed: Option<u64>,
    mode: Option<ModeName>,
) {
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(m) = mode {
        cfg.mode = m;
    }
}

fn cmd_train(args: TrainArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    apply_overrides(&mut cfg, args.out, args.seed, args.mode);
    let result = experiment::run_experiment(&cfg)?;
    let last = result.history.last().expect("epochs >= 1 was validated");
    writeln!(
        out,
        "trained {} epochs: train_loss={} val_loss={} val_acc={}",
        result.history.len(),
        last.train_loss,
        last.val_loss,
        last.val_acc
    )?;
    writeln!(out, "wrote {}", result.metrics_path.display())?;
    writeln!(out, "wrote {}", result.model_path.display())?;
    if let Some(path) = &result.analysis_path {
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    apply_overrides(&mut cfg, None, args.seed, None);
    let (net, _, _) = model::load_model(&args.model)?;
    let setup = tasks::build(cfg.task, cfg.seed)?;
    let (val_loss, val_acc) = evaluate(&net, &setup.val, cfg.task.kind())?;
    writeln!(out, "val_loss={val_loss} val_acc={val_acc}")?;
    Ok(())
}

fn cmd_attack(args: AttackArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    apply_overrides(&mut cfg, None, args.seed, None);
    let (net, _, _) = model::load_model(&args.model)?;
    let setup = tasks::build(cfg.task, cfg.seed)?;
    let default_eps = [0.0, 0.05, 0.1, 0.2];
    let (sigma, samples, epsilons) = match &cfg.analysis {
        Some(t) => (t.sigma, t.samples, t.epsilons.clone()),
        None => (0.1, 1000, default_eps.to_vec()),
    };
    let body = experiment::analysis_csv(
        &net,
        &setup.val,
        cfg.task.kind(),
        sigma,
        samples,
        cfg.seed,
        &epsilons,
    )?;
    match &args.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => out.write_all(body.as_bytes())?,
    }
    Ok(())
}

fn require_out(out: &Option<PathBuf>, op: &str) -> Result<PathBuf> {
    out.clone()
        .ok_or_else(|| CliError::Config(format!("the {op} op needs --out for the result")))
}

fn cmd_encode(args: EncodeArgs, out: &mut dyn Write) -> Result<()> {
    let (net, mode, seed) = model::load_model(&args.model)?;
    match args.op {
        EncodeOp::Project => {
            let path = require_out(&args.out, "project")?;
            let mut net = net;
            project_network(&mut net)?;
            model::save_model(&net, mode.into(), seed, &path)?;
            writeln!(out, "wrote projected model to {}", path.display())?;
        }
        EncodeOp::Scale => {
            let map = EncodingMap::new(args.scale).map_err(CliError::from)?;
            let encoded = map.encode(&net.flat_params());
            let rendered: Vec<String> = encoded.iter().map(|v| v.to_string()).collect();
            writeln!(out, "scale={}", args.scale)?;
            writeln!(out, "{}", rendered.join(" "))?;
        }
        EncodeOp::Cf => {
            writeln!(out, "max_den={}", args.max_den)?;
            for (i, theta) in net.flat_params().iter().enumerate() {
                let (p, q) = rational_approx(*theta, args.max_den).map_err(CliError::from)?;
                let err = (theta - p as f64 / q as f64).abs();
                writeln!(out, "theta[{i}] = {theta} ~ {p}/{q} (|error| = {err:e})")?;
            }
        }
        EncodeOp::Lll => {
            let path = require_out(&args.out, "lll")?;
            let map = EncodingMap::new(args.scale).map_err(CliError::from)?;
            let outcome = lll_init(&net, &map, 0.75).map_err(CliError::from)?;
            model::save_model(&outcome.network, mode.into(), seed, &path)?;
            match outcome.fallback {
                None => writeln!(out, "wrote reduced-basis model to {}", path.display())?,
                Some(f) => writeln!(
                    out,
                    "wrote model to {} (fallback: {f:?}, see docs)",
                    path.display()
                )?,
            }
        }
    }
    Ok(())
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Reproduce => reproduce::reproduce_examples(out),
        Command::Train(args) => cmd_train(args, out),
        Command::Eval(args) => cmd_eval(args, out),
        Command::Attack(args) => cmd_attack(args, out),
        Command::Encode(args) => cmd_encode(args, out),
    }
}

/// Parse arguments from the process environment, run the selected
/// subcommand, and map the outcome to an exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(cli, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str], out: &mut Vec<u8>) -> Result<()> {
        let cli = Cli::try_parse_from(args).expect("argument parsing");
        execute(cli, out)
    }

    #[test]
    fn reproduce_via_dispatch() {
        let mut out = Vec::new();
        run_args(&["dionet", "reproduce"], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("checks passed"));
    }

    #[test]
    fn train_eval_attack_encode_pipeline() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("cfg.toml");
        std::fs::write(
            &cfg_path,
            format!(
                r#"
task = "example1"
mode = "diophantine"
seed = 4
output_dir = "{}"

[training]
eta = 0.1
epochs = 5
"#,
                dir.path().join("run").display()
            ),
        )
        .unwrap();
        let mut out = Vec::new();
        run_args(
            &["dionet", "train", "--config", cfg_path.to_str().unwrap()],
            &mut out,
        )
        .unwrap();
        let model = dir.path().join("run/model.toml");
        assert!(model.exists());

        let mut out = Vec::new();
        run_args(
            &[
                "dionet",
                "eval",
                "--config",
                cfg_path.to_str().unwrap(),
                "--model",
                model.to_str().unwrap(),
            ],
            &mut out,
        )
        .unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("val_loss="));

        let sweep = dir.path().join("sweep.csv");
        run_args(
            &[
                "dionet",
                "attack",
                "--config",
                cfg_path.to_str().unwrap(),
                "--model",
                model.to_str().unwrap(),
                "--out",
                sweep.to_str().unwrap(),
            ],
            &mut Vec::new(),
        )
        .unwrap();
        let body = std::fs::read_to_string(&sweep).unwrap();
        assert!(body.starts_with(experiment::ANALYSIS_HEADER));
        assert_eq!(body.lines().count(), 5);

        let projected = dir.path().join("projected.toml");
        run_args(
            &[
                "dionet",
                "encode",
                "--model",
                model.to_str().unwrap(),
                "--op",
                "project",
                "--out",
                projected.to_str().unwrap(),
            ],
            &mut Vec::new(),
        )
        .unwrap();
        let (net, _, _) = model::load_model(&projected).unwrap();
        assert!(net.flat_params().iter().all(|p| p.fract() == 0.0));

        let mut out = Vec::new();
        run_args(
            &[
                "dionet",
                "encode",
                "--model",
                model.to_str().unwrap(),
                "--op",
                "cf",
                "--max-den",
                "12",
            ],
            &mut out,
        )
        .unwrap();
        assert!(String::from_utf8(out).unwrap().contains("max_den=12"));
    }

    #[test]
    fn missing_out_for_project_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let model = dir.path().join("m.toml");
        let setup = tasks::build(config::Task::Example1, 0).unwrap();
        model::save_model(&setup.network, dionet_core::training::Mode::Normal, 0, &model).unwrap();
        let err = run_args(
            &[
                "dionet",
                "encode",
                "--model",
                model.to_str().unwrap(),
                "--op",
                "project",
            ],
            &mut Vec::new(),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn bad_config_path_is_an_io_error() {
        let err = run_args(
            &["dionet", "train", "--config", "/nonexistent/cfg.toml"],
            &mut Vec::new(),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
