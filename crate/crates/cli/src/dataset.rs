//! JSON dataset written by `simulate` and read by `estimate`. Complex
//! vectors are stored as parallel `re` / `im` arrays.

use serde::{Deserialize, Serialize};

use chansense::experiment::TrialDraw;
use chansense::{CVector, Complex64, MatrixModes};

use crate::error::{CliError, CliResult};

pub const DATASET_FORMAT: &str = "chansense-dataset/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexArray {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexArray {
    pub fn to_vector(&self, name: &str) -> CliResult<CVector> {
        if self.re.len() != self.im.len() {
            return Err(CliError::config(format!(
                "dataset field {name}: re has {} entries, im has {}",
                self.re.len(),
                self.im.len()
            )));
        }
        Ok(CVector::from_iterator(
            self.re.len(),
            self.re
                .iter()
                .zip(&self.im)
                .map(|(&r, &i)| Complex64::new(r, i)),
        ))
    }
}

impl From<&CVector> for ComplexArray {
    fn from(v: &CVector) -> Self {
        Self {
            re: v.iter().map(|c| c.re).collect(),
            im: v.iter().map(|c| c.im).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeRecord {
    pub signal: ComplexArray,
    pub observed: ComplexArray,
}

/// Only `x`, `z`, the layout and either `h3` or `probe` are needed to
/// estimate; `h1` enables the RMSE report. When a probe is present the
/// relay channel is estimated from it even if `h3` is also given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dataset {
    pub format: String,
    pub n_taps: usize,
    pub relay_gain: f64,
    pub modes: MatrixModes,
    pub x: ComplexArray,
    pub z: ComplexArray,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<ComplexArray>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h1: Option<ComplexArray>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h2: Option<ComplexArray>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h3: Option<ComplexArray>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct: Option<ComplexArray>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<ComplexArray>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<ComplexArray>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n3: Option<ComplexArray>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeRecord>,
}

impl Dataset {
    pub fn from_draw(draw: &TrialDraw, modes: MatrixModes) -> Self {
        let link = &draw.link;
        Self {
            format: DATASET_FORMAT.to_string(),
            n_taps: draw.h1.len(),
            relay_gain: link.relay_gain,
            modes,
            x: draw.x.samples().into(),
            z: (&link.z).into(),
            y: Some((&link.y).into()),
            h1: Some(draw.h1.taps().into()),
            h2: Some(draw.h2.taps().into()),
            h3: Some(draw.h3.taps().into()),
            direct: link.direct.as_ref().map(Into::into),
            n1: Some((&link.n1).into()),
            n2: link.n2.as_ref().map(Into::into),
            n3: Some((&link.n3).into()),
            probe: draw.probe.as_ref().map(|(p, obs)| ProbeRecord {
                signal: p.samples().into(),
                observed: obs.into(),
            }),
        }
    }

    pub fn check_format(&self) -> CliResult<()> {
        if self.format != DATASET_FORMAT {
            return Err(CliError::config(format!(
                "dataset format {:?} is not {DATASET_FORMAT:?}",
                self.format
            )));
        }
        Ok(())
    }
}
