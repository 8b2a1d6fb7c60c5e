use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::CVector;

/// Which taps an RMSE is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// All N taps.
    Overall,
    /// The true support only.
    Nonzero,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Overall, Metric::Nonzero];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Overall => "overall",
            Metric::Nonzero => "nonzero",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `sqrt(mean_{i∈S} |ĥᵢ − hᵢ|²)` over `index_set`, or over every tap when
/// `index_set` is `None`.
pub fn trial_rmse(h_true: &CVector, h_hat: &CVector, index_set: Option<&[usize]>) -> Result<f64> {
    if h_true.len() != h_hat.len() {
        return Err(Error::InvalidArgument(format!(
            "true response has {} taps, estimate has {}",
            h_true.len(),
            h_hat.len()
        )));
    }
    match index_set {
        None => {
            if h_true.is_empty() {
                return Err(Error::InvalidArgument("responses are empty".into()));
            }
            Ok(((h_hat - h_true).norm_squared() / h_true.len() as f64).sqrt())
        }
        Some([]) => Err(Error::InvalidArgument("index set is empty".into())),
        Some(set) => {
            let mut acc = 0.0;
            for &i in set {
                if i >= h_true.len() {
                    return Err(Error::InvalidArgument(format!(
                        "index {i} is out of range for {} taps",
                        h_true.len()
                    )));
                }
                acc += (h_hat[i] - h_true[i]).norm_sqr();
            }
            Ok((acc / set.len() as f64).sqrt())
        }
    }
}

/// Step CDF of a sample: ascending values, the k-th (1-based) carrying
/// probability k/L.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    pub values: Vec<f64>,
    pub probabilities: Vec<f64>,
}

pub fn empirical_cdf(values: &[f64]) -> Result<EmpiricalCdf> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot build a CDF from no values".into(),
        ));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("CDF input contains NaN".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let len = sorted.len() as f64;
    let probabilities = (1..=sorted.len()).map(|k| k as f64 / len).collect();
    Ok(EmpiricalCdf {
        values: sorted,
        probabilities,
    })
}

/// Median of the non-NaN entries (mean of the middle pair for even counts);
/// NaN when there are none.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}
