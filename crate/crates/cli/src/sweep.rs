//! Frequency sweeps of `e1 · ∇(u - H)` at the configured target.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, Scheme, TargetKind};
use crate::error::CliError;
use crate::schemes::{row_flag, Evaluator};

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub omega: f64,
    pub scheme: Scheme,
    pub trunc: usize,
    pub re_grad_x: f64,
    pub im_grad_x: f64,
    pub abs_grad: f64,
}

/// A row whose value could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlaggedRow {
    pub omega: f64,
    pub scheme: Scheme,
    pub trunc: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailSummary {
    pub scheme: Scheme,
    pub trunc: usize,
    /// Largest truncation bound met during the sweep.
    pub max_tail_estimate: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub flagged: Vec<FlaggedRow>,
    pub tails: Vec<TailSummary>,
}

impl SweepResult {
    /// Values of one curve in frequency order.
    pub fn curve(&self, scheme: Scheme, trunc: usize) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.scheme == scheme && r.trunc == trunc).collect()
    }
}

/// Evaluates every configured curve at every sweep frequency.
pub fn run_sweep(config: &RunConfig) -> Result<SweepResult, CliError> {
    let runs = config.schemes.runs();
    let evaluator = Evaluator::new(config, &runs, &[])?;
    run_sweep_with(config, &evaluator, &runs)
}

/// A row with its tail estimate and, if it failed, the reason.
type Evaluated = (SweepRow, Option<f64>, Option<String>);

pub fn run_sweep_with(config: &RunConfig, evaluator: &Evaluator, runs: &[(Scheme, usize)]) -> Result<SweepResult, CliError> {
    if runs.iter().any(|r| r.0 == Scheme::Cgpt) && config.target.kind == TargetKind::OriginGradient {
        return Err(CliError::Config("the cgpt scheme is a far-field expansion and cannot evaluate at the origin".into()));
    }
    let point = config.target.location();
    let omegas = config.omegas();
    // Each frequency is independent; collect() keeps frequency order.
    let per_omega: Vec<Vec<Evaluated>> = omegas
        .par_iter()
        .map(|&omega| -> Result<_, CliError> {
            let lambda = evaluator.lambda(omega)?;
            runs.iter()
                .map(|&(scheme, trunc)| match evaluator.gradient(scheme, trunc, lambda, point) {
                    Ok(sample) => {
                        let g = sample.gradient[0];
                        let row = SweepRow { omega, scheme, trunc, re_grad_x: g.re, im_grad_x: g.im, abs_grad: g.norm() };
                        Ok((row, sample.tail_estimate, None))
                    }
                    Err(err) => match row_flag(&err) {
                        Some(_) => {
                            log::warn!("ω = {omega}, {scheme} {trunc}: {err}");
                            let row = SweepRow { omega, scheme, trunc, re_grad_x: f64::NAN, im_grad_x: f64::NAN, abs_grad: f64::NAN };
                            Ok((row, None, Some(err.to_string())))
                        }
                        None => Err(err.into()),
                    },
                })
                .collect()
        })
        .collect::<Result<_, CliError>>()?;

    let mut rows = Vec::with_capacity(omegas.len() * runs.len());
    let mut flagged = Vec::new();
    let mut tails: BTreeMap<(Scheme, usize), Option<f64>> = runs.iter().map(|&r| (r, None)).collect();
    for (row, tail, flag) in per_omega.into_iter().flatten() {
        if let Some(t) = tail {
            let slot = tails.get_mut(&(row.scheme, row.trunc)).expect("known run");
            *slot = Some(slot.map_or(t, |v: f64| v.max(t)));
        }
        if let Some(reason) = flag {
            flagged.push(FlaggedRow { omega: row.omega, scheme: row.scheme, trunc: row.trunc, reason });
        }
        rows.push(row);
    }
    let tails = runs.iter().map(|&(scheme, trunc)| TailSummary { scheme, trunc, max_tail_estimate: tails[&(scheme, trunc)] }).collect();
    Ok(SweepResult { rows, flagged, tails })
}

/// Writes rows as CSV with a header line.
pub fn write_rows<W: Write, R: Serialize>(rows: impl IntoIterator<Item = R>, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Metadata written next to a CSV file.
#[derive(Debug, Serialize)]
pub struct Sidecar<'a, E: Serialize> {
    pub command: &'a str,
    pub build: &'a str,
    pub config: &'a RunConfig,
    pub rows: usize,
    #[serde(flatten)]
    pub extra: E,
}

/// Build identifier captured at compile time.
pub const BUILD_DESCRIBE: &str = env!("TWODISK_GIT_DESCRIBE");

/// Writes `<path>.json`.
pub fn write_sidecar<E: Serialize>(path: &Path, sidecar: &Sidecar<'_, E>) -> Result<(), CliError> {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    let mut text = serde_json::to_string_pretty(sidecar)?;
    text.push('\n');
    std::fs::write(name, text)?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SweepMeta<'a> {
    pub omegas: usize,
    pub tail_estimates: &'a [TailSummary],
    pub flagged: &'a [FlaggedRow],
}
