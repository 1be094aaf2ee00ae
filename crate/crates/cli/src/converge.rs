//! Truncation studies against the reference solver.

use serde::Serialize;

use crate::config::{RunConfig, Scheme};
use crate::error::CliError;
use crate::schemes::Evaluator;
use crate::sweep::{run_sweep_with, SweepResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub truncation: usize,
    pub scheme: Scheme,
    /// `max_ω |g - g_ref| / |g_ref|` over the sweep.
    pub max_rel_error: f64,
}

/// Largest relative deviation of one curve from the reference curve.
/// Frequencies where either value is missing are skipped.
pub fn max_relative_error(result: &SweepResult, scheme: Scheme, trunc: usize, reference_nodes: usize) -> f64 {
    let reference = result.curve(Scheme::Oracle, reference_nodes);
    result
        .curve(scheme, trunc)
        .iter()
        .zip(reference)
        .map(|(a, b)| {
            let da = (a.re_grad_x - b.re_grad_x).hypot(a.im_grad_x - b.im_grad_x);
            da / b.abs_grad
        })
        .filter(|e| e.is_finite())
        .fold(0.0, f64::max)
}

/// Sweeps every configured run together with the solver at
/// `truncation.nodes` and reports the worst relative error of each run.
pub fn run_convergence(config: &RunConfig) -> Result<(Vec<ConvergenceRow>, SweepResult), CliError> {
    let nodes = config.truncation.nodes;
    let mut runs: Vec<(Scheme, usize)> = config.schemes.runs().into_iter().filter(|r| r.0 != Scheme::Oracle).collect();
    if runs.is_empty() {
        return Err(CliError::Config("converge needs at least one series scheme".into()));
    }
    runs.push((Scheme::Oracle, nodes));
    let evaluator = Evaluator::new(config, &runs, &[])?;
    let result = run_sweep_with(config, &evaluator, &runs)?;
    let rows = runs[..runs.len() - 1]
        .iter()
        .map(|&(scheme, truncation)| ConvergenceRow {
            truncation,
            scheme,
            max_rel_error: max_relative_error(&result, scheme, truncation, nodes),
        })
        .collect();
    Ok((rows, result))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_fall_with_truncation() {
        let mut c = RunConfig::default();
        c.sweep.steps = 15;
        c.schemes.resonant = vec![5, 10, 20];
        c.schemes.hybrid = vec![10, 40, 80];
        let (rows, _) = run_convergence(&c).unwrap();
        assert_eq!(rows.len(), 6);
        for pair in rows.windows(2).filter(|w| w[0].scheme == w[1].scheme) {
            assert!(pair[1].max_rel_error < pair[0].max_rel_error, "{rows:?}");
        }
        assert!(rows.iter().all(|r| r.max_rel_error.is_finite() && r.max_rel_error > 0.0));
    }

    #[test]
    fn resonant_errors_shrink_geometrically() {
        let mut c = RunConfig::default();
        c.sweep.steps = 8;
        c.select(Some(Scheme::Resonant), Some(vec![20, 25])).unwrap();
        // Past the peaks the decay is set by the gap parameter alone.
        c.sweep.omega_min = 2.3;
        let (rows, _) = run_convergence(&c).unwrap();
        let ratio = rows[1].max_rel_error / rows[0].max_rel_error;
        let predicted = (-10.0 * c.frame().s()).exp();
        assert!(ratio < 5.0 * predicted && ratio > 0.2 * predicted, "{ratio} vs {predicted}");
    }
}
