use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::config::{EstimatorKind, ExperimentConfig, H3Knowledge};
use super::metrics::{empirical_cdf, median, trial_rmse, EmpiricalCdf, Metric};
use crate::channel_model::{
    generate_dense_channel_with, generate_sparse_channel, ChannelImpulseResponse, ChannelKind,
    NoiseLevel,
};
use crate::error::{Error, Result};
use crate::estimators::{
    estimate_reporting_channel, indirect_ls, indirect_sparse, EstimateResult, SparseStageConfig,
};
use crate::signal_model::{
    make_training_signal, simulate_link, simulate_probe, LinkObservation, LinkSetup,
    TrainingScheme, TrainingSignal,
};
use crate::CVector;

/// Largest tolerated fraction of failed trials per estimator.
pub const FAILURE_GATE: f64 = 0.10;

/// Random stream of one trial: ChaCha20 keyed by the master seed, with the
/// trial index as stream id.
pub fn trial_stream(master_seed: u64, trial_index: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index as u64);
    rng
}

/// Random quantities of one trial, before any estimation.
#[derive(Debug, Clone)]
pub struct TrialDraw {
    pub h1: ChannelImpulseResponse,
    pub h2: ChannelImpulseResponse,
    pub h3: ChannelImpulseResponse,
    pub x: TrainingSignal,
    pub link: LinkObservation,
    /// Probe and what came back, when `h3` is to be estimated.
    pub probe: Option<(TrainingSignal, CVector)>,
}

/// Draws h1, h2, h3, the training burst, the link noise and the optional
/// probe, in that order, from the trial's stream.
pub fn draw_trial(cfg: &ExperimentConfig, trial_index: usize) -> Result<TrialDraw> {
    let mut rng = trial_stream(cfg.master_seed, trial_index);
    let n = cfg.n_taps;
    let dense = |rng: &mut ChaCha20Rng| {
        generate_dense_channel_with(
            n,
            cfg.dense_decay_rate,
            cfg.field,
            cfg.dense_normalization,
            rng,
        )
    };
    let h1 = match cfg.channel_kind {
        ChannelKind::Sparse => {
            generate_sparse_channel(n, cfg.sparse_k, cfg.head_region, cfg.head_count, &mut rng)?
        }
        ChannelKind::Dense => dense(&mut rng)?,
    };
    let h2 = dense(&mut rng)?;
    let h3 = dense(&mut rng)?;
    let x = make_training_signal(
        cfg.training_len,
        cfg.training_scheme,
        Some(&mut rng as &mut dyn RngCore),
    )?;
    let setup = LinkSetup {
        noise: cfg.noise(),
        relay_gain: cfg.relay_gain,
        modes: cfg.modes,
        field: cfg.field,
    };
    let link = simulate_link(&x, &h1, Some(&h2), &h3, &setup, &mut rng)?;
    let probe = match cfg.h3_knowledge {
        H3Knowledge::Oracle => None,
        H3Knowledge::Estimated {
            probe_len,
            probe_snr_db,
        } => {
            let probe = make_training_signal(
                probe_len,
                TrainingScheme::Bpsk,
                Some(&mut rng as &mut dyn RngCore),
            )?;
            let observed = simulate_probe(
                &probe,
                &h3,
                NoiseLevel::SnrDb(probe_snr_db),
                cfg.field,
                &mut rng,
            )?;
            Some((probe, observed))
        }
    };
    Ok(TrialDraw {
        h1,
        h2,
        h3,
        x,
        link,
        probe,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorOutcome {
    pub estimator: EstimatorKind,
    /// NaN when the estimator failed.
    pub rmse_overall: f64,
    pub rmse_nonzero: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Message of the numerical error that made this run fail.
    pub failure: Option<String>,
}

impl EstimatorOutcome {
    fn failed(estimator: EstimatorKind, err: &Error) -> Self {
        Self {
            estimator,
            rmse_overall: f64::NAN,
            rmse_nonzero: f64::NAN,
            iterations: 0,
            converged: false,
            failure: Some(err.to_string()),
        }
    }

    pub fn is_failure(&self) -> bool {
        self.failure.is_some()
    }

    pub fn rmse(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Overall => self.rmse_overall,
            Metric::Nonzero => self.rmse_nonzero,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial_index: usize,
    /// One entry per configured estimator, in config order.
    pub outcomes: Vec<EstimatorOutcome>,
}

impl TrialResult {
    pub fn outcome(&self, estimator: EstimatorKind) -> Option<&EstimatorOutcome> {
        self.outcomes.iter().find(|o| o.estimator == estimator)
    }
}

/// Runs every configured estimator on one trial. Numerical failures are
/// recorded in the outcome; anything else is returned as an error.
pub fn run_trial(cfg: &ExperimentConfig, trial_index: usize) -> Result<TrialResult> {
    let draw = draw_trial(cfg, trial_index)?;
    let h3_known = match &draw.probe {
        None => Ok(draw.h3.clone()),
        Some((probe, observed)) => estimate_reporting_channel(probe, observed, cfg.n_taps, &cfg.ls),
    };
    // Dense responses have no support; their nonzero metric covers every tap.
    let support = (!draw.h1.support().is_empty()).then(|| draw.h1.support());

    let mut outcomes = Vec::with_capacity(cfg.estimators.len());
    for &estimator in &cfg.estimators {
        let estimate = h3_known
            .as_ref()
            .map_err(clone_numerical)
            .and_then(|h3| run_estimator(cfg, estimator, &draw, h3));
        let outcome = match estimate {
            Ok(est) => EstimatorOutcome {
                estimator,
                rmse_overall: trial_rmse(draw.h1.taps(), &est.h_hat, None)?,
                rmse_nonzero: trial_rmse(draw.h1.taps(), &est.h_hat, support)?,
                iterations: est.iterations,
                converged: est.converged,
                failure: None,
            },
            Err(e) if e.is_numerical() => EstimatorOutcome::failed(estimator, &e),
            Err(e) => return Err(e),
        };
        outcomes.push(outcome);
    }
    Ok(TrialResult {
        trial_index,
        outcomes,
    })
}

fn clone_numerical(e: &Error) -> Error {
    match e {
        Error::SingularSystem(m) => Error::SingularSystem(m.clone()),
        Error::DegenerateInput(m) => Error::DegenerateInput(m.clone()),
        other => Error::SolverBreakdown {
            iteration: 0,
            reason: format!("relay channel estimate failed: {other}"),
        },
    }
}

fn run_estimator(
    cfg: &ExperimentConfig,
    estimator: EstimatorKind,
    draw: &TrialDraw,
    h3: &ChannelImpulseResponse,
) -> Result<EstimateResult> {
    let z = &draw.link.z;
    match estimator.sparse_algorithm() {
        None => indirect_ls(z, &draw.x, h3, cfg.modes, &cfg.ls, cfg.relay_gain),
        Some(algorithm) => {
            let stage = SparseStageConfig {
                algorithm,
                ..cfg.sparse
            };
            indirect_sparse(z, &draw.x, h3, cfg.modes, &cfg.ls, &stage, cfg.relay_gain)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdfTable {
    pub estimator: EstimatorKind,
    pub metric: Metric,
    pub cdf: EmpiricalCdf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub estimator: EstimatorKind,
    pub metric: Metric,
    pub median: f64,
    pub mean: f64,
    /// `sqrt((1/L) Σ_t ‖e_t‖²)` over the metric's taps and the included trials.
    pub aggregate_rmse: f64,
    pub included: usize,
    pub failed: usize,
    pub not_converged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    /// Sorted by trial index.
    pub trials: Vec<TrialResult>,
    /// Estimator-major, overall before nonzero.
    pub cdfs: Vec<CdfTable>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentResult {
    /// Per-trial values of one metric, NaN for failed trials.
    pub fn values(&self, estimator: EstimatorKind, metric: Metric) -> Vec<f64> {
        self.trials
            .iter()
            .filter_map(|t| t.outcome(estimator).map(|o| o.rmse(metric)))
            .collect()
    }

    pub fn cdf(&self, estimator: EstimatorKind, metric: Metric) -> Option<&EmpiricalCdf> {
        self.cdfs
            .iter()
            .find(|c| c.estimator == estimator && c.metric == metric)
            .map(|c| &c.cdf)
    }

    pub fn summary_for(&self, estimator: EstimatorKind, metric: Metric) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|s| s.estimator == estimator && s.metric == metric)
    }

    pub fn median(&self, estimator: EstimatorKind, metric: Metric) -> f64 {
        self.summary_for(estimator, metric)
            .map_or(f64::NAN, |s| s.median)
    }
}

/// Runs the experiment on the global rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_with_threads(cfg, None)
}

/// Runs the experiment on `threads` workers (the global pool when `None`).
/// The result does not depend on the worker count.
pub fn run_experiment_with_threads(
    cfg: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    let run = || -> Result<Vec<TrialResult>> {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, t))
            .collect()
    };
    let trials = match threads {
        None => run()?,
        Some(0) => return Err(Error::config(&["threads"], "must be positive")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?
            .install(run)?,
    };
    aggregate(cfg, trials)
}

fn aggregate(cfg: &ExperimentConfig, trials: Vec<TrialResult>) -> Result<ExperimentResult> {
    let total = trials.len();
    for &estimator in &cfg.estimators {
        let failed = trials
            .iter()
            .filter(|t| t.outcome(estimator).is_some_and(|o| o.is_failure()))
            .count();
        if failed as f64 > FAILURE_GATE * total as f64 {
            return Err(Error::ExperimentGate {
                estimator: estimator.name().to_string(),
                failed,
                total,
            });
        }
    }

    let mut result = ExperimentResult {
        config: cfg.clone(),
        trials,
        cdfs: Vec::new(),
        summary: Vec::new(),
    };
    let support_size = match cfg.channel_kind {
        ChannelKind::Sparse => cfg.sparse_k,
        ChannelKind::Dense => cfg.n_taps,
    };
    for &estimator in &cfg.estimators {
        let outcomes: Vec<&EstimatorOutcome> = result
            .trials
            .iter()
            .filter_map(|t| t.outcome(estimator))
            .collect();
        let failed = outcomes.iter().filter(|o| o.is_failure()).count();
        let not_converged = outcomes
            .iter()
            .filter(|o| !o.is_failure() && !o.converged)
            .count();
        for metric in Metric::ALL {
            let values: Vec<f64> = outcomes
                .iter()
                .filter(|o| !o.is_failure())
                .map(|o| o.rmse(metric))
                .collect();
            let taps = match metric {
                Metric::Overall => cfg.n_taps,
                Metric::Nonzero => support_size,
            } as f64;
            let included = values.len();
            let mean = values.iter().sum::<f64>() / included as f64;
            let energy = values.iter().map(|r| taps * r * r).sum::<f64>();
            result.summary.push(SummaryRow {
                estimator,
                metric,
                median: median(&values),
                mean,
                aggregate_rmse: (energy / included as f64).sqrt(),
                included,
                failed,
                not_converged,
            });
            result.cdfs.push(CdfTable {
                estimator,
                metric,
                cdf: empirical_cdf(&values)?,
            });
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_model::MatrixModes;

    fn small(trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            n_taps: 20,
            training_len: 15,
            sparse_k: 4,
            head_region: 5,
            head_count: 3,
            trials,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn noiseless_single_trial_recovers_exactly() {
        let cfg = ExperimentConfig {
            trials: 1,
            snr1_db: NoiseLevel::Noiseless,
            snr2_db: NoiseLevel::Noiseless,
            snr3_db: NoiseLevel::Noiseless,
            estimators: vec![EstimatorKind::IndirectLs],
            modes: MatrixModes::default(),
            ..ExperimentConfig::default()
        };
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.trials.len(), 1);
        assert!(res.trials[0].outcomes[0].rmse_overall < 1e-7);
    }

    #[test]
    fn shape_of_the_result() {
        let mut cfg = small(12);
        cfg.estimators = EstimatorKind::ALL.to_vec();
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.trials.len(), 12);
        assert!(res
            .trials
            .iter()
            .enumerate()
            .all(|(i, t)| t.trial_index == i));
        assert_eq!(res.cdfs.len(), 6);
        assert_eq!(res.summary.len(), 6);
        for c in &res.cdfs {
            assert_eq!(*c.cdf.probabilities.last().unwrap(), 1.0);
            assert!(c.cdf.probabilities.iter().all(|&p| p > 0.0 && p <= 1.0));
        }
    }

    #[test]
    fn independent_of_worker_count() {
        let cfg = small(9);
        let one = run_experiment_with_threads(&cfg, Some(1)).unwrap();
        let three = run_experiment_with_threads(&cfg, Some(3)).unwrap();
        assert_eq!(format!("{one:?}"), format!("{three:?}"));
        assert!(run_experiment_with_threads(&cfg, Some(0)).is_err());
    }

    #[test]
    fn trials_do_not_depend_on_trial_count() {
        let a = run_experiment(&small(3)).unwrap();
        let b = run_experiment(&small(6)).unwrap();
        assert_eq!(a.trials[..], b.trials[..3]);
    }

    #[test]
    fn aggregate_matches_hand_computation() {
        let cfg = small(5);
        let res = run_experiment(&cfg).unwrap();
        let v = res.values(EstimatorKind::IndirectLs, Metric::Overall);
        let energy: f64 = v.iter().map(|r| 20.0 * r * r).sum();
        let s = res
            .summary_for(EstimatorKind::IndirectLs, Metric::Overall)
            .unwrap();
        assert!((s.aggregate_rmse - (energy / 5.0).sqrt()).abs() < 1e-14);
        assert!((s.mean - v.iter().sum::<f64>() / 5.0).abs() < 1e-15);
    }

    #[test]
    fn dense_primary_channel_uses_every_tap_for_nonzero_metric() {
        let cfg = ExperimentConfig {
            channel_kind: ChannelKind::Dense,
            ..small(2)
        };
        let res = run_experiment(&cfg).unwrap();
        for t in &res.trials {
            let o = &t.outcomes[0];
            assert_eq!(o.rmse_overall, o.rmse_nonzero);
        }
    }

    #[test]
    fn estimated_relay_channel_runs() {
        let cfg = ExperimentConfig {
            h3_knowledge: H3Knowledge::Estimated {
                probe_len: 100,
                probe_snr_db: 30.0,
            },
            ..small(3)
        };
        let res = run_experiment(&cfg).unwrap();
        assert!(res
            .trials
            .iter()
            .all(|t| t.outcomes.iter().all(|o| !o.is_failure())));
    }

    #[test]
    fn singular_systems_trip_the_gate() {
        // A truncated training matrix with M < N is rank deficient.
        let cfg = ExperimentConfig {
            modes: MatrixModes {
                x: crate::signal_model::MatrixMode::Truncated,
                ..MatrixModes::default()
            },
            estimators: vec![EstimatorKind::IndirectLs],
            ..small(4)
        };
        match run_experiment(&cfg) {
            Err(Error::ExperimentGate { failed, total, .. }) => assert_eq!((failed, total), (4, 4)),
            other => panic!("expected gate, got {other:?}"),
        }
    }
}
