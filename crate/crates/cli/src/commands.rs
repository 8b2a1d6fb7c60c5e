use std::fs;
use std::path::{Path, PathBuf};

use chansense::experiment::draw_trial;
use chansense::{
    estimate_reporting_channel, indirect_ls, indirect_sparse, run_experiment_with_threads,
    trial_rmse, ChannelImpulseResponse, EstimateResult, EstimatorKind, ExperimentConfig, LsConfig,
    Preset, SparseStageConfig, TrainingSignal,
};
use serde::{Deserialize, Serialize};

use crate::args::{EstimateArgs, ExperimentArgs, SimulateArgs};
use crate::dataset::{ComplexArray, Dataset};
use crate::error::{CliError, CliResult};
use crate::manifest::{sibling_manifest_path, RunManifest};
use crate::settings::{resolve, Override};
use crate::tables;

/// Solver settings of the `estimate` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateSettings {
    pub estimator: EstimatorKind,
    pub ls: LsConfig,
    pub sparse: SparseStageConfig,
}

impl Default for EstimateSettings {
    fn default() -> Self {
        Self {
            estimator: EstimatorKind::IndirectLs,
            ls: LsConfig::default(),
            sparse: SparseStageConfig::default(),
        }
    }
}

/// What `estimate` writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator: EstimatorKind,
    pub h_hat: ComplexArray,
    pub iterations: usize,
    pub converged: bool,
    pub final_cost: f64,
    pub relay_residual: Option<f64>,
    pub fit_residual: f64,
    pub noise_std: Option<f64>,
    pub lambda: Option<f64>,
    /// Absent (null) when the dataset carries no `h1`.
    pub rmse_overall: Option<f64>,
    pub rmse_nonzero: Option<f64>,
}

fn experiment_config(
    preset: Option<&str>,
    config: Option<&Path>,
    seed: Option<u64>,
    overrides: &[Override],
) -> CliResult<ExperimentConfig> {
    let base = match preset {
        Some(name) => name.parse::<Preset>()?.config(),
        None => ExperimentConfig::default(),
    };
    let mut cfg = resolve(&base, config, overrides)?;
    if let Some(seed) = seed {
        cfg.master_seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn to_value<T: Serialize>(v: &T) -> CliResult<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| CliError::config(format!("cannot serialize: {e}")))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::config(format!("cannot serialize: {e}")))?;
    text.push('\n');
    write_file(path, &text)
}

/// Draws trial 0 of the configured experiment and writes it as a dataset,
/// so the dataset matches the experiment's first trial.
pub fn cmd_simulate(args: &SimulateArgs, overrides: &[Override]) -> CliResult<()> {
    let cfg = experiment_config(
        args.preset.as_deref(),
        args.config.as_deref(),
        args.seed,
        overrides,
    )?;
    let draw = draw_trial(&cfg, 0)?;
    let dataset = Dataset::from_draw(&draw, cfg.modes);
    write_json(&args.out, &dataset)?;
    let manifest_path = sibling_manifest_path(&args.out);
    let manifest = RunManifest::new(
        "simulate",
        to_value(&cfg)?,
        Some(cfg.master_seed),
        vec![args.out.clone()],
    );
    write_json(&manifest_path, &manifest)?;
    eprintln!(
        "wrote {} and {}",
        args.out.display(),
        manifest_path.display()
    );
    Ok(())
}

pub fn read_dataset(path: &Path) -> CliResult<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let dataset: Dataset = serde_json::from_str(&text).map_err(|e| {
        CliError::config(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    dataset.check_format()?;
    Ok(dataset)
}

/// Runs one estimator on a dataset.
pub fn estimate_dataset(
    dataset: &Dataset,
    settings: &EstimateSettings,
) -> CliResult<EstimateReport> {
    let x = TrainingSignal::custom(dataset.x.to_vector("x")?)?;
    let z = dataset.z.to_vector("z")?;
    let h3 = match (&dataset.probe, &dataset.h3) {
        (Some(probe), _) => {
            let signal = TrainingSignal::custom(probe.signal.to_vector("probe.signal")?)?;
            let observed = probe.observed.to_vector("probe.observed")?;
            estimate_reporting_channel(&signal, &observed, dataset.n_taps, &settings.ls)?
        }
        (None, Some(h3)) => ChannelImpulseResponse::dense(h3.to_vector("h3")?)?,
        (None, None) => {
            return Err(CliError::config(
                "dataset has neither h3 nor a probe to estimate it from",
            ))
        }
    };
    if h3.len() != dataset.n_taps {
        return Err(CliError::config(format!(
            "dataset n_taps is {} but h3 has {} taps",
            dataset.n_taps,
            h3.len()
        )));
    }
    let est: EstimateResult = match settings.estimator.sparse_algorithm() {
        None => indirect_ls(&z, &x, &h3, dataset.modes, &settings.ls, dataset.relay_gain)?,
        Some(algorithm) => {
            let stage = SparseStageConfig {
                algorithm,
                ..settings.sparse
            };
            indirect_sparse(
                &z,
                &x,
                &h3,
                dataset.modes,
                &settings.ls,
                &stage,
                dataset.relay_gain,
            )?
        }
    };
    let (rmse_overall, rmse_nonzero) = match &dataset.h1 {
        Some(h1) => {
            let h1 = h1.to_vector("h1")?;
            let support: Vec<usize> = (0..h1.len()).filter(|&i| h1[i].norm() != 0.0).collect();
            let nonzero = if support.is_empty() {
                None
            } else {
                Some(trial_rmse(&h1, &est.h_hat, Some(&support))?)
            };
            (Some(trial_rmse(&h1, &est.h_hat, None)?), nonzero)
        }
        None => (None, None),
    };
    Ok(EstimateReport {
        estimator: settings.estimator,
        h_hat: (&est.h_hat).into(),
        iterations: est.iterations,
        converged: est.converged,
        final_cost: est.final_cost,
        relay_residual: est.diagnostics.relay_residual,
        fit_residual: est.diagnostics.fit_residual,
        noise_std: est.diagnostics.noise_std,
        lambda: est.diagnostics.lambda,
        rmse_overall,
        rmse_nonzero,
    })
}

pub fn cmd_estimate(args: &EstimateArgs, overrides: &[Override]) -> CliResult<()> {
    let mut settings = resolve(
        &EstimateSettings::default(),
        args.config.as_deref(),
        overrides,
    )?;
    if let Some(name) = &args.estimator {
        settings.estimator = name.parse()?;
    }
    settings.ls.validate()?;
    settings.sparse.validate()?;
    let dataset = read_dataset(&args.dataset)?;
    let report = estimate_dataset(&dataset, &settings)?;
    write_json(&args.out, &report)?;
    let manifest_path = sibling_manifest_path(&args.out);
    let mut manifest = RunManifest::new(
        "estimate",
        to_value(&settings)?,
        None,
        vec![args.out.clone()],
    );
    manifest.inputs.push(args.dataset.clone());
    write_json(&manifest_path, &manifest)?;
    eprintln!(
        "wrote {} and {}",
        args.out.display(),
        manifest_path.display()
    );
    Ok(())
}

/// Output files of an experiment, relative to its directory.
pub fn experiment_outputs(cfg: &ExperimentConfig) -> Vec<PathBuf> {
    let mut files = vec![PathBuf::from("trials.csv")];
    for est in &cfg.estimators {
        for metric in chansense::Metric::ALL {
            files.push(PathBuf::from(format!("cdf_{est}_{metric}.csv")));
        }
    }
    files.push(PathBuf::from("summary.csv"));
    files
}

pub fn cmd_experiment(args: &ExperimentArgs, overrides: &[Override]) -> CliResult<()> {
    let cfg = experiment_config(
        args.preset.as_deref(),
        args.config.as_deref(),
        args.seed,
        overrides,
    )?;
    fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let result = run_experiment_with_threads(&cfg, args.threads)?;

    let dir = &args.out;
    write_file(
        &dir.join("trials.csv"),
        &tables::write_trials(&tables::trial_rows(&result))?,
    )?;
    for table in &result.cdfs {
        let name = format!("cdf_{}_{}.csv", table.estimator, table.metric);
        write_file(&dir.join(name), &tables::write_cdf(&table.cdf)?)?;
    }
    let summary = tables::summary_rows(&result);
    write_file(&dir.join("summary.csv"), &tables::write_summary(&summary)?)?;

    let outputs = experiment_outputs(&cfg);
    let manifest = RunManifest::new(
        "experiment",
        to_value(&cfg)?,
        Some(cfg.master_seed),
        outputs,
    );
    write_json(&dir.join("manifest.json"), &manifest)?;

    for row in &summary {
        println!(
            "{:<22} {:<8} median {:.6} mean {:.6} failed {}",
            row.estimator, row.metric, row.median, row.mean, row.failed
        );
    }
    Ok(())
}
