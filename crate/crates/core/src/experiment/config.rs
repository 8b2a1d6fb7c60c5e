use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel_model::{ChannelKind, NoiseLevel, NoiseSpec, PowerNormalization, ScalarField};
use crate::error::{Error, Result};
use crate::estimators::{LsConfig, SparseAlgorithm, SparseStageConfig};
use crate::signal_model::{MatrixModes, TrainingScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    IndirectLs,
    IndirectSparseIrls,
    IndirectSparseL1,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [
        EstimatorKind::IndirectLs,
        EstimatorKind::IndirectSparseIrls,
        EstimatorKind::IndirectSparseL1,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::IndirectLs => "indirect_ls",
            EstimatorKind::IndirectSparseIrls => "indirect_sparse_irls",
            EstimatorKind::IndirectSparseL1 => "indirect_sparse_l1",
        }
    }

    /// Sparse algorithm this estimator runs, if any.
    pub fn sparse_algorithm(&self) -> Option<SparseAlgorithm> {
        match self {
            EstimatorKind::IndirectLs => None,
            EstimatorKind::IndirectSparseIrls => Some(SparseAlgorithm::Irls),
            EstimatorKind::IndirectSparseL1 => Some(SparseAlgorithm::L1),
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = EstimatorKind::ALL.iter().map(|k| k.name()).collect();
                Error::config(
                    &["estimator"],
                    format!("unknown estimator {s:?}; valid names: {}", names.join(", ")),
                )
            })
    }
}

/// How the cognitive radio knows the relay channel.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum H3Knowledge {
    /// The true `h3` is handed to the estimators.
    #[default]
    Oracle,
    /// `h3` is estimated by least squares from a BPSK probe of `probe_len`
    /// symbols received at `probe_snr_db`.
    Estimated { probe_len: usize, probe_snr_db: f64 },
}

/// Named starting points for experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Paper10Db,
    Paper20Db,
    PaperRamp10Db,
    PaperRamp20Db,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Paper10Db,
        Preset::Paper20Db,
        Preset::PaperRamp10Db,
        Preset::PaperRamp20Db,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Paper10Db => "paper-10db",
            Preset::Paper20Db => "paper-20db",
            Preset::PaperRamp10Db => "paper-ramp-10db",
            Preset::PaperRamp20Db => "paper-ramp-20db",
        }
    }

    pub fn config(&self) -> ExperimentConfig {
        match self {
            Preset::Paper10Db => ExperimentConfig::reference(10.0),
            Preset::Paper20Db => ExperimentConfig::reference(20.0),
            Preset::PaperRamp10Db => ExperimentConfig {
                training_scheme: TrainingScheme::Ramp,
                ..ExperimentConfig::reference(10.0)
            },
            Preset::PaperRamp20Db => ExperimentConfig {
                training_scheme: TrainingScheme::Ramp,
                ..ExperimentConfig::reference(20.0)
            },
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::config(
                    &["preset"],
                    format!("unknown preset {s:?}; valid presets: {}", names.join(", ")),
                )
            })
    }
}

/// Everything a Monte Carlo run depends on. Missing JSON fields take the
/// 10 dB reference scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_taps: usize,
    pub training_len: usize,
    pub sparse_k: usize,
    pub head_region: usize,
    pub head_count: usize,
    /// Kind of the primary channel `h1`; `h2` and `h3` are always dense.
    pub channel_kind: ChannelKind,
    pub dense_decay_rate: f64,
    pub dense_normalization: PowerNormalization,
    pub field: ScalarField,
    pub training_scheme: TrainingScheme,
    pub snr1_db: NoiseLevel,
    pub snr2_db: NoiseLevel,
    pub snr3_db: NoiseLevel,
    pub relay_gain: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub estimators: Vec<EstimatorKind>,
    pub h3_knowledge: H3Knowledge,
    pub modes: MatrixModes,
    pub ls: LsConfig,
    pub sparse: SparseStageConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::reference(10.0)
    }
}

impl ExperimentConfig {
    /// N=100, M=50, K=15 (10 of them in the first 10 taps), L=1000, every
    /// link at `snr_db`, LS against IRLS.
    pub fn reference(snr_db: f64) -> Self {
        let snr = NoiseLevel::SnrDb(snr_db);
        Self {
            n_taps: 100,
            training_len: 50,
            sparse_k: 15,
            head_region: 10,
            head_count: 10,
            channel_kind: ChannelKind::Sparse,
            dense_decay_rate: 0.05,
            dense_normalization: PowerNormalization::Realized,
            field: ScalarField::Real,
            training_scheme: TrainingScheme::Bpsk,
            snr1_db: snr,
            snr2_db: snr,
            snr3_db: snr,
            relay_gain: 1.0,
            trials: 1000,
            master_seed: 0,
            estimators: vec![EstimatorKind::IndirectLs, EstimatorKind::IndirectSparseIrls],
            h3_knowledge: H3Knowledge::Oracle,
            modes: MatrixModes::default(),
            ls: LsConfig::default(),
            sparse: SparseStageConfig::default(),
        }
    }

    pub fn paper_10db() -> Self {
        Self::reference(10.0)
    }

    pub fn paper_20db() -> Self {
        Self::reference(20.0)
    }

    pub fn noise(&self) -> NoiseSpec {
        NoiseSpec {
            ch1: self.snr1_db,
            ch2: self.snr2_db,
            ch3: self.snr3_db,
        }
    }

    /// Checks ranges and cross-field constraints; errors name the offending keys.
    pub fn validate(&self) -> Result<()> {
        if self.n_taps == 0 {
            return Err(Error::config(&["n_taps"], "must be positive"));
        }
        if self.training_len == 0 {
            return Err(Error::config(&["training_len"], "must be positive"));
        }
        if self.trials == 0 {
            return Err(Error::config(&["trials"], "must be at least 1"));
        }
        if self.channel_kind == ChannelKind::Sparse {
            if self.sparse_k == 0 {
                return Err(Error::config(&["sparse_k"], "must be positive"));
            }
            if self.sparse_k > self.n_taps {
                return Err(Error::config(
                    &["sparse_k", "n_taps"],
                    format!(
                        "sparse_k ({}) exceeds n_taps ({})",
                        self.sparse_k, self.n_taps
                    ),
                ));
            }
            if self.head_region > self.n_taps {
                return Err(Error::config(
                    &["head_region", "n_taps"],
                    format!(
                        "head_region ({}) exceeds n_taps ({})",
                        self.head_region, self.n_taps
                    ),
                ));
            }
            if self.head_count > self.head_region || self.head_count > self.sparse_k {
                return Err(Error::config(
                    &["head_count", "head_region", "sparse_k"],
                    "head_count must not exceed head_region or sparse_k",
                ));
            }
            if self.sparse_k - self.head_count > self.n_taps - self.head_region {
                return Err(Error::config(
                    &["sparse_k", "head_count", "head_region", "n_taps"],
                    "the taps outside the head do not fit after the head region",
                ));
            }
        }
        if !(self.dense_decay_rate >= 0.0 && self.dense_decay_rate.is_finite()) {
            return Err(Error::config(
                &["dense_decay_rate"],
                "must be finite and non-negative",
            ));
        }
        if self.training_scheme == TrainingScheme::Custom {
            return Err(Error::config(
                &["training_scheme"],
                "experiments draw their own training; use ramp or bpsk",
            ));
        }
        self.snr1_db.validate("snr1_db")?;
        self.snr2_db.validate("snr2_db")?;
        self.snr3_db.validate("snr3_db")?;
        if !(self.relay_gain > 0.0 && self.relay_gain.is_finite()) {
            return Err(Error::config(
                &["relay_gain"],
                "must be positive and finite",
            ));
        }
        if self.estimators.is_empty() {
            return Err(Error::config(
                &["estimators"],
                "at least one estimator is required",
            ));
        }
        for (i, e) in self.estimators.iter().enumerate() {
            if self.estimators[..i].contains(e) {
                return Err(Error::config(
                    &["estimators"],
                    format!("{e} is listed more than once"),
                ));
            }
        }
        if let H3Knowledge::Estimated {
            probe_len,
            probe_snr_db,
        } = self.h3_knowledge
        {
            if probe_len == 0 {
                return Err(Error::config(
                    &["h3_knowledge.probe_len"],
                    "must be positive",
                ));
            }
            if !probe_snr_db.is_finite() {
                return Err(Error::config(
                    &["h3_knowledge.probe_snr_db"],
                    "must be finite",
                ));
            }
        }
        self.ls.validate()?;
        self.sparse.validate()
    }
}
