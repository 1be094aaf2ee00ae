//! Field maps on a rectangular grid at one frequency.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, Scheme};
use crate::error::CliError;
use crate::schemes::{row_flag, Evaluator};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldRow {
    pub x1: f64,
    pub x2: f64,
    pub abs_grad: f64,
    pub re_field: f64,
    /// `ok`, or why the point has no value (`excluded`, `too-close`, `pole`).
    pub status: &'static str,
}

#[derive(Debug, Clone)]
pub struct FieldMap {
    pub omega: f64,
    pub scheme: Scheme,
    pub trunc: usize,
    pub nx: usize,
    pub ny: usize,
    /// Row-major: `x1` varies fastest.
    pub rows: Vec<FieldRow>,
}

impl FieldMap {
    /// Largest `|∇(u - H)|` among valid points.
    pub fn peak(&self) -> Option<&FieldRow> {
        self.rows.iter().filter(|r| r.status == "ok").max_by(|a, b| a.abs_grad.total_cmp(&b.abs_grad))
    }
}

/// Frequency of the first bonding resonance of the undamped model.
pub fn first_resonance(config: &RunConfig) -> Result<f64, CliError> {
    let undamped = twodisk::DrudeModel::new(config.material.omega_p, 0.0)?;
    Ok(undamped.resonance_frequencies(&config.frame(), 1)?[0].omega)
}

/// Evaluates the first configured run on the configured grid.
pub fn run_fieldmap(config: &RunConfig) -> Result<FieldMap, CliError> {
    let (scheme, trunc) =
        *config.schemes.runs().first().ok_or_else(|| CliError::Config("fieldmap needs one scheme with one truncation".into()))?;
    let omega = match config.grid.omega {
        Some(w) => w,
        None => first_resonance(config)?,
    };
    let evaluator = Evaluator::new(config, &[(scheme, trunc)], &[])?;
    let lambda = evaluator.lambda(omega)?;
    let g = &config.grid;
    let points: Vec<[f64; 2]> = (0..g.ny)
        .flat_map(|j| {
            let y = g.y_min + (g.y_max - g.y_min) * j as f64 / (g.ny - 1) as f64;
            (0..g.nx).map(move |i| [g.x_min + (g.x_max - g.x_min) * i as f64 / (g.nx - 1) as f64, y])
        })
        .collect();
    let pair = config.pair();
    let rows = points
        .par_iter()
        .map(|&p| -> Result<FieldRow, CliError> {
            let invalid = |status| FieldRow { x1: p[0], x2: p[1], abs_grad: f64::NAN, re_field: f64::NAN, status };
            // The schemes that expand about the disks only describe the exterior.
            if matches!(scheme, Scheme::Hybrid | Scheme::Cgpt) && !pair.is_exterior(p) {
                return Ok(invalid("excluded"));
            }
            match evaluator.field(scheme, trunc, lambda, p) {
                Ok((u, grad)) => Ok(FieldRow {
                    x1: p[0],
                    x2: p[1],
                    abs_grad: (grad[0].norm_sqr() + grad[1].norm_sqr()).sqrt(),
                    re_field: u.re,
                    status: "ok",
                }),
                Err(err) => row_flag(&err).map(invalid).ok_or_else(|| err.into()),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FieldMap { omega, scheme, trunc, nx: g.nx, ny: g.ny, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(scheme: Scheme, order: usize) -> RunConfig {
        let mut c = RunConfig::default();
        c.select(Some(scheme), Some(vec![order])).unwrap();
        c.grid.nx = 41;
        c.grid.ny = 21;
        c
    }

    #[test]
    fn real_part_is_odd_across_mirror_plane() {
        let map = run_fieldmap(&config(Scheme::Resonant, 20)).unwrap();
        for (k, row) in map.rows.iter().enumerate() {
            let (i, j) = (k % map.nx, k / map.nx);
            let mirror = &map.rows[j * map.nx + map.nx - 1 - i];
            assert!((row.x1 + mirror.x1).abs() < 1e-12 && row.x2 == mirror.x2);
            assert!((row.re_field + mirror.re_field).abs() <= 1e-12 * row.re_field.abs().max(1e-12));
        }
    }

    #[test]
    fn peak_sits_in_the_gap_at_resonance() {
        let map = run_fieldmap(&config(Scheme::Resonant, 20)).unwrap();
        let peak = map.peak().unwrap();
        assert!(peak.x1.abs() <= 0.15 && peak.x2.abs() <= 0.3, "{peak:?}");
    }

    #[test]
    fn enhancement_is_resonant() {
        let mut c = config(Scheme::Resonant, 20);
        c.grid = crate::config::Grid { omega: None, x_min: 0.0, x_max: 0.0, y_min: 0.0, y_max: 0.0, nx: 2, ny: 2 };
        c.grid.x_max = 1e-9;
        c.grid.y_max = 1e-9;
        let at_resonance = run_fieldmap(&c).unwrap().rows[0].abs_grad;
        c.grid.omega = Some(0.3 * c.material.omega_p);
        let off = run_fieldmap(&c).unwrap().rows[0].abs_grad;
        assert!(off < 10.0 && at_resonance > 100.0, "{off} {at_resonance}");
    }

    #[test]
    fn interior_points_are_marked_for_multipoles() {
        let map = run_fieldmap(&config(Scheme::Hybrid, 20)).unwrap();
        let inside = map.rows.iter().filter(|r| r.status == "excluded").count();
        assert!(inside > 0);
        assert!(map.rows.iter().filter(|r| r.status == "ok").all(|r| r.abs_grad.is_finite()));
    }
}
