//! End-to-end experiment runner: trains per the config, then writes a
//! per-epoch metrics CSV, the trained model, and (when requested) an
//! epsilon-sweep robustness CSV. All outputs are deterministic functions of
//! the config, so a rerun produces byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dionet_core::analysis::{adversarial_accuracy, output_variance};
use dionet_core::constraints::project_network;
use dionet_core::network::Network;
use dionet_core::training::{self, evaluate, EpochMetrics};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::model::save_model;
use crate::tasks;

pub const METRICS_HEADER: &str =
    "epoch,train_loss,train_acc,val_loss,val_acc,adv_acc,constraint_residual";
pub const ANALYSIS_HEADER: &str = "epsilon,clean_acc,adv_acc,variance_normal,variance_diophantine";

pub struct ExperimentOutput {
    pub network: Network,
    pub history: Vec<EpochMetrics>,
    pub metrics_path: PathBuf,
    pub model_path: PathBuf,
    pub analysis_path: Option<PathBuf>,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn metrics_csv(history: &[EpochMetrics]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for m in history {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            m.epoch, m.train_loss, m.train_acc, m.val_loss, m.val_acc, m.adv_acc,
            m.constraint_residual
        );
    }
    out
}

/// One epsilon-sweep row per epsilon. The variance columns probe the first
/// validation input under Gaussian input noise: once for the network as-is,
/// once for a copy with every parameter projected to the nearest integer.
pub fn analysis_csv(
    net: &Network,
    val: &training::Dataset,
    kind: training::TaskKind,
    sigma: f64,
    samples: usize,
    seed: u64,
    epsilons: &[f64],
) -> Result<String> {
    let x = val.inputs().first().ok_or_else(|| {
        CliError::Config("analysis needs at least one validation sample".into())
    })?;
    let mut projected = net.clone();
    project_network(&mut projected)?;
    let (_, clean_acc) = evaluate(net, val, kind)?;
    let variance_normal = output_variance(net, x, sigma, samples, seed)?;
    let variance_dio = output_variance(&projected, x, sigma, samples, seed)?;
    let mut out = String::from(ANALYSIS_HEADER);
    out.push('\n');
    for &eps in epsilons {
        let adv = adversarial_accuracy(net, val, eps, kind)?;
        let _ = writeln!(out, "{eps},{clean_acc},{adv},{variance_normal},{variance_dio}");
    }
    Ok(out)
}

/// Train per the config and write every artifact into `output_dir`
/// (created if missing): `metrics.csv`, `model.toml`, and `analysis.csv`
/// when an `[analysis]` table is present.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let setup = tasks::build(cfg.task, cfg.seed)?;
    let t_cfg = cfg.training_config();
    let l_cfg = cfg.loss_config()?;
    let (network, history) =
        training::train(setup.network, &setup.train, &setup.val, &t_cfg, &l_cfg)?;

    let dir = cfg.output_dir.as_path();
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;

    let metrics_path = dir.join("metrics.csv");
    write_file(&metrics_path, &metrics_csv(&history))?;

    let model_path = dir.join("model.toml");
    save_model(&network, t_cfg.mode, cfg.seed, &model_path)?;

    let analysis_path = if let Some(table) = &cfg.analysis {
        let path = dir.join("analysis.csv");
        let body = analysis_csv(
            &network,
            &setup.val,
            cfg.task.kind(),
            table.sigma,
            table.samples,
            cfg.seed,
            &table.epsilons,
        )?;
        write_file(&path, &body)?;
        Some(path)
    } else {
        None
    };

    Ok(ExperimentOutput { network, history, metrics_path, model_path, analysis_path })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn minimal_config(dir: &Path) -> ExperimentConfig {
        let text = format!(
            r#"
            task = "example1"
            mode = "diophantine"
            seed = 11
            output_dir = "{}"

            [training]
            eta = 0.1
            epochs = 3
            "#,
            dir.display()
        );
        ExperimentConfig::parse_str(&text).unwrap()
    }

    #[test]
    fn writes_metrics_and_model() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = minimal_config(dir.path());
        let out = run_experiment(&cfg).unwrap();
        let metrics = std::fs::read_to_string(&out.metrics_path).unwrap();
        let mut lines = metrics.lines();
        assert_eq!(lines.next(), Some(METRICS_HEADER));
        assert_eq!(lines.count(), 3);
        assert!(out.model_path.exists());
        assert!(out.analysis_path.is_none());
        // Integer mode really leaves integer parameters behind.
        assert!(out.network.flat_params().iter().all(|p| p.fract() == 0.0));
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = minimal_config(dir.path());
        cfg.output_dir = dir.path().join("a");
        run_experiment(&cfg).unwrap();
        let a_metrics = std::fs::read(cfg.output_dir.join("metrics.csv")).unwrap();
        let a_model = std::fs::read(cfg.output_dir.join("model.toml")).unwrap();
        cfg.output_dir = dir.path().join("b");
        run_experiment(&cfg).unwrap();
        let b_metrics = std::fs::read(cfg.output_dir.join("metrics.csv")).unwrap();
        let b_model = std::fs::read(cfg.output_dir.join("model.toml")).unwrap();
        assert_eq!(a_metrics, b_metrics);
        assert_eq!(a_model, b_model);
    }

    #[test]
    fn analysis_table_produces_epsilon_sweep() {
        let dir = tempfile::tempdir().unwrap();
        let text = format!(
            r#"
            task = "example1"
            mode = "normal"
            seed = 2
            output_dir = "{}"

            [training]
            eta = 0.05
            epochs = 5

            [analysis]
            sigma = 0.1
            samples = 200
            epsilons = [0.0, 0.1]
            "#,
            dir.path().display()
        );
        let cfg = ExperimentConfig::parse_str(&text).unwrap();
        let out = run_experiment(&cfg).unwrap();
        let path = out.analysis_path.unwrap();
        let body = std::fs::read_to_string(path).unwrap();
        let mut lines = body.lines();
        assert_eq!(lines.next(), Some(ANALYSIS_HEADER));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].starts_with("0,"));
        assert!(rows[1].starts_with("0.1,"));
        // Clean accuracy and the variance columns repeat on every row.
        let first: Vec<&str> = rows[0].split(',').collect();
        let second: Vec<&str> = rows[1].split(',').collect();
        assert_eq!(first[1], second[1]);
        assert_eq!(first[3], second[3]);
        assert_eq!(first[4], second[4]);
    }
}
