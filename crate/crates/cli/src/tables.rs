//! CSV result tables. Reals are written with 17 significant digits, so
//! parsing a table and writing it again reproduces it byte for byte.

use chansense::{EmpiricalCdf, ExperimentResult};

use crate::error::{CliError, CliResult};

pub const TRIALS_HEADER: [&str; 6] = [
    "trial",
    "estimator",
    "rmse_overall",
    "rmse_nonzero",
    "iterations",
    "converged",
];
pub const CDF_HEADER: [&str; 2] = ["value", "probability"];
pub const SUMMARY_HEADER: [&str; 8] = [
    "estimator",
    "metric",
    "median",
    "mean",
    "aggregate_rmse",
    "included",
    "failed",
    "not_converged",
];

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub estimator: String,
    pub rmse_overall: f64,
    pub rmse_nonzero: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRecord {
    pub estimator: String,
    pub metric: String,
    pub median: f64,
    pub mean: f64,
    pub aggregate_rmse: f64,
    pub included: usize,
    pub failed: usize,
    pub not_converged: usize,
}

pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse<T: std::str::FromStr>(field: &str, column: &str, line: u64) -> CliResult<T> {
    field
        .parse()
        .map_err(|_| CliError::config(format!("line {line}: bad {column} value {field:?}")))
}

fn write_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::config(format!("csv: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::config(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::config(format!("csv: {e}")))
}

fn read_table(text: &str, header: &[&str]) -> CliResult<Vec<(u64, csv::StringRecord)>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let found = r
        .headers()
        .map_err(|e| CliError::config(format!("csv: {e}")))?
        .clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(CliError::config(format!(
            "expected columns {}, found {}",
            header.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| CliError::config(format!("csv: {e}")))?;
            let line = rec.position().map_or(0, |p| p.line());
            Ok((line, rec))
        })
        .collect()
}

pub fn write_trials(rows: &[TrialRow]) -> CliResult<String> {
    write_table(
        &TRIALS_HEADER,
        rows.iter().map(|r| {
            vec![
                r.trial.to_string(),
                r.estimator.clone(),
                format_real(r.rmse_overall),
                format_real(r.rmse_nonzero),
                r.iterations.to_string(),
                r.converged.to_string(),
            ]
        }),
    )
}

pub fn read_trials(text: &str) -> CliResult<Vec<TrialRow>> {
    read_table(text, &TRIALS_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            Ok(TrialRow {
                trial: parse(&rec[0], "trial", line)?,
                estimator: rec[1].to_string(),
                rmse_overall: parse(&rec[2], "rmse_overall", line)?,
                rmse_nonzero: parse(&rec[3], "rmse_nonzero", line)?,
                iterations: parse(&rec[4], "iterations", line)?,
                converged: parse(&rec[5], "converged", line)?,
            })
        })
        .collect()
}

pub fn write_cdf(cdf: &EmpiricalCdf) -> CliResult<String> {
    write_table(
        &CDF_HEADER,
        cdf.values
            .iter()
            .zip(&cdf.probabilities)
            .map(|(v, p)| vec![format_real(*v), format_real(*p)]),
    )
}

pub fn read_cdf(text: &str) -> CliResult<EmpiricalCdf> {
    let mut cdf = EmpiricalCdf {
        values: Vec::new(),
        probabilities: Vec::new(),
    };
    for (line, rec) in read_table(text, &CDF_HEADER)? {
        cdf.values.push(parse(&rec[0], "value", line)?);
        cdf.probabilities.push(parse(&rec[1], "probability", line)?);
    }
    Ok(cdf)
}

pub fn write_summary(rows: &[SummaryRecord]) -> CliResult<String> {
    write_table(
        &SUMMARY_HEADER,
        rows.iter().map(|r| {
            vec![
                r.estimator.clone(),
                r.metric.clone(),
                format_real(r.median),
                format_real(r.mean),
                format_real(r.aggregate_rmse),
                r.included.to_string(),
                r.failed.to_string(),
                r.not_converged.to_string(),
            ]
        }),
    )
}

pub fn read_summary(text: &str) -> CliResult<Vec<SummaryRecord>> {
    read_table(text, &SUMMARY_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            Ok(SummaryRecord {
                estimator: rec[0].to_string(),
                metric: rec[1].to_string(),
                median: parse(&rec[2], "median", line)?,
                mean: parse(&rec[3], "mean", line)?,
                aggregate_rmse: parse(&rec[4], "aggregate_rmse", line)?,
                included: parse(&rec[5], "included", line)?,
                failed: parse(&rec[6], "failed", line)?,
                not_converged: parse(&rec[7], "not_converged", line)?,
            })
        })
        .collect()
}

/// Per-trial rows, trial-major and in configured estimator order.
pub fn trial_rows(result: &ExperimentResult) -> Vec<TrialRow> {
    result
        .trials
        .iter()
        .flat_map(|t| {
            t.outcomes.iter().map(move |o| TrialRow {
                trial: t.trial_index,
                estimator: o.estimator.name().to_string(),
                rmse_overall: o.rmse_overall,
                rmse_nonzero: o.rmse_nonzero,
                iterations: o.iterations,
                converged: o.converged,
            })
        })
        .collect()
}

pub fn summary_rows(result: &ExperimentResult) -> Vec<SummaryRecord> {
    result
        .summary
        .iter()
        .map(|s| SummaryRecord {
            estimator: s.estimator.name().to_string(),
            metric: s.metric.name().to_string(),
            median: s.median,
            mean: s.mean,
            aggregate_rmse: s.aggregate_rmse,
            included: s.included,
            failed: s.failed,
            not_converged: s.not_converged,
        })
        .collect()
}
