//! Uniform evaluation of the four schemes for one geometry.

use std::collections::BTreeMap;

use num_complex::Complex64;
use twodisk::cgpt::{CgptTable, HarmonicSource};
use twodisk::hybrid::{HybridCoefficients, MultipoleSet};
use twodisk::oracle::{BieSystem, Source};
use twodisk::resonant::ResonantExpansion;
use twodisk::{BipolarFrame, ComplexVector, DrudeModel, Error, Point};

use crate::config::{RunConfig, Scheme};

/// Gradient of `u - H` with the scheme's own truncation bound, if any.
#[derive(Debug, Clone, Copy)]
pub struct GradientSample {
    pub gradient: ComplexVector,
    pub tail_estimate: Option<f64>,
}

/// Expensive per-geometry state (coefficient tables, assembled solvers),
/// built once and shared read-only across frequencies.
pub struct Evaluator {
    frame: BipolarFrame,
    drude: DrudeModel,
    inner: usize,
    cgpt_terms: usize,
    hybrid: Option<HybridCoefficients>,
    oracles: BTreeMap<usize, BieSystem>,
}

impl Evaluator {
    /// Prepares everything `runs` will need, plus solvers for `extra_nodes`.
    pub fn new(config: &RunConfig, runs: &[(Scheme, usize)], extra_nodes: &[usize]) -> twodisk::Result<Self> {
        let frame = config.frame();
        let inner = config.truncation.inner;
        let max_m = runs.iter().filter(|r| r.0 == Scheme::Hybrid).map(|r| r.1).max();
        let hybrid = max_m.map(|m| HybridCoefficients::new(&frame, inner, m));
        let mut oracles = BTreeMap::new();
        let nodes = runs.iter().filter(|r| r.0 == Scheme::Oracle).map(|r| r.1).chain(extra_nodes.iter().copied());
        for p in nodes {
            if let std::collections::btree_map::Entry::Vacant(e) = oracles.entry(p) {
                let system = BieSystem::discretize(config.pair(), p)?.with_eval_nodes(p * config.truncation.upsampling);
                e.insert(system);
            }
        }
        Ok(Self { frame, drude: config.drude(), inner, cgpt_terms: config.truncation.cgpt_terms, hybrid, oracles })
    }

    pub fn frame(&self) -> &BipolarFrame {
        &self.frame
    }

    pub fn oracle(&self, nodes: usize) -> Option<&BieSystem> {
        self.oracles.get(&nodes)
    }

    pub fn lambda(&self, omega: f64) -> twodisk::Result<Complex64> {
        Ok(self.drude.spectral_param(omega)?.lambda)
    }

    fn oracle_for(&self, nodes: usize) -> &BieSystem {
        self.oracles.get(&nodes).expect("solver prepared for every oracle run")
    }

    /// `∇(u - H)` at `point`; the origin uses the closed forms of the series
    /// schemes.
    pub fn gradient(&self, scheme: Scheme, order: usize, lambda: Complex64, point: Point) -> twodisk::Result<GradientSample> {
        let origin = point == [0.0, 0.0];
        let zero = Complex64::new(0.0, 0.0);
        Ok(match scheme {
            Scheme::Resonant => {
                let e = ResonantExpansion::build(&self.frame, lambda, order)?;
                if origin {
                    GradientSample { gradient: [e.gradient_at_origin(), zero], tail_estimate: Some(e.origin_tail_estimate()) }
                } else {
                    GradientSample { gradient: e.gradient(point)?, tail_estimate: None }
                }
            }
            Scheme::Hybrid => {
                let table = self.hybrid.as_ref().expect("coefficient table prepared for hybrid runs");
                let m = MultipoleSet::build(table, lambda, order, self.inner)?;
                let gradient = if origin { [m.gradient_at_origin(), zero] } else { m.gradient(point)? };
                GradientSample { gradient, tail_estimate: Some(m.tail_estimate()) }
            }
            Scheme::Cgpt => {
                let t = CgptTable::new(&self.frame, lambda, order as u32, self.cgpt_terms as u32)?;
                GradientSample { gradient: t.gradient_far(&HarmonicSource::x1(), point)?, tail_estimate: Some(t.tail_estimate()) }
            }
            Scheme::Oracle => {
                let system = self.oracle_for(order);
                let dens = system.solve_densities(lambda, Source::X1)?;
                GradientSample { gradient: system.evaluate_gradient(&dens, point)?, tail_estimate: None }
            }
        })
    }

    /// `(u - H, ∇(u - H))` at `point`.
    pub fn field(&self, scheme: Scheme, order: usize, lambda: Complex64, point: Point) -> twodisk::Result<(Complex64, ComplexVector)> {
        match scheme {
            Scheme::Resonant => {
                let e = ResonantExpansion::build(&self.frame, lambda, order)?;
                Ok((e.field(point)?, e.gradient(point)?))
            }
            Scheme::Hybrid => {
                let table = self.hybrid.as_ref().expect("coefficient table prepared for hybrid runs");
                let m = MultipoleSet::build(table, lambda, order, self.inner)?;
                Ok((m.field(point)?, m.gradient(point)?))
            }
            Scheme::Cgpt => {
                let t = CgptTable::new(&self.frame, lambda, order as u32, self.cgpt_terms as u32)?;
                let h = HarmonicSource::x1();
                Ok((t.field_far(&h, point)?, t.gradient_far(&h, point)?))
            }
            Scheme::Oracle => {
                let system = self.oracle_for(order);
                let dens = system.solve_densities(lambda, Source::X1)?;
                Ok((system.evaluate_field(&dens, point)?, system.evaluate_gradient(&dens, point)?))
            }
        }
    }
}

/// Errors that mark a single row instead of aborting a run.
pub fn row_flag(err: &Error) -> Option<&'static str> {
    match err {
        Error::ResonanceSingularity { .. } | Error::NearResonance { .. } => Some("pole"),
        Error::OutOfDomain(_) => Some("excluded"),
        Error::TooClose { .. } | Error::Singular(_) => Some("too-close"),
        _ => None,
    }
}
