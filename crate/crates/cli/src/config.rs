//! Run configuration read from TOML.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use twodisk::{BipolarFrame, DiskPair, DrudeModel};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Resonant,
    Hybrid,
    Cgpt,
    Oracle,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Resonant, Scheme::Hybrid, Scheme::Cgpt, Scheme::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Resonant => "resonant",
            Scheme::Hybrid => "hybrid",
            Scheme::Cgpt => "cgpt",
            Scheme::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| CliError::Config(format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub radius: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub omega_p: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub omega_min: f64,
    pub omega_max: f64,
    pub steps: usize,
}

/// Truncation orders per scheme. Every listed order produces one curve.
/// A `[schemes]` table replaces the default selection; schemes it omits
/// are not run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schemes {
    /// Number of resonant terms `N`.
    #[serde(default)]
    pub resonant: Vec<usize>,
    /// Multipole orders `M`.
    #[serde(default)]
    pub hybrid: Vec<usize>,
    /// Far-field orders.
    #[serde(default)]
    pub cgpt: Vec<usize>,
    /// Nodes per circle `P`.
    #[serde(default)]
    pub oracle: Vec<usize>,
}

impl Default for Schemes {
    fn default() -> Self {
        Self { resonant: vec![5, 10, 20], hybrid: vec![5, 10, 20], cgpt: vec![], oracle: vec![] }
    }
}

impl Schemes {
    pub fn orders(&self, scheme: Scheme) -> &[usize] {
        match scheme {
            Scheme::Resonant => &self.resonant,
            Scheme::Hybrid => &self.hybrid,
            Scheme::Cgpt => &self.cgpt,
            Scheme::Oracle => &self.oracle,
        }
    }

    fn orders_mut(&mut self, scheme: Scheme) -> &mut Vec<usize> {
        match scheme {
            Scheme::Resonant => &mut self.resonant,
            Scheme::Hybrid => &mut self.hybrid,
            Scheme::Cgpt => &mut self.cgpt,
            Scheme::Oracle => &mut self.oracle,
        }
    }

    /// `(scheme, order)` pairs in output order.
    pub fn runs(&self) -> Vec<(Scheme, usize)> {
        Scheme::ALL.into_iter().flat_map(|s| self.orders(s).iter().map(move |&t| (s, t))).collect()
    }
}

/// Secondary truncations shared by all runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Truncation {
    /// Inner sum length `N_inner` of the multipole coefficients.
    pub inner: usize,
    /// Spectral terms `K` in each polarization tensor entry.
    pub cgpt_terms: usize,
    /// Nodes per circle of the reference solver.
    pub nodes: usize,
    /// Evaluation grid refinement of the solver.
    pub upsampling: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self { inner: 200, cgpt_terms: 60, nodes: 256, upsampling: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    OriginGradient,
    Point,
}

/// Where `e1 · ∇(u - H)` is sampled during a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Target {
    pub kind: TargetKind,
    pub point: [f64; 2],
}

impl Default for Target {
    fn default() -> Self {
        Self { kind: TargetKind::OriginGradient, point: [0.0, 0.0] }
    }
}

impl Target {
    pub fn location(&self) -> [f64; 2] {
        match self.kind {
            TargetKind::OriginGradient => [0.0, 0.0],
            TargetKind::Point => self.point,
        }
    }
}

/// Grid for `fieldmap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    /// Drive frequency; defaults to the first bonding resonance.
    pub omega: Option<f64>,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self { omega: None, x_min: -3.0, x_max: 3.0, y_min: -2.0, y_max: 2.0, nx: 121, ny: 81 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub path: Option<String>,
    pub format: Format,
}

impl Default for Output {
    fn default() -> Self {
        Self { path: None, format: Format::Csv }
    }
}

/// Complete description of a run. Every section has defaults matching the
/// reference configuration: unit disks 0.1 apart, `ω_p = 3`, `γ = 0.02`,
/// 561 frequencies in `[1.0, 2.4]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub material: Material,
    pub sweep: Sweep,
    pub schemes: Schemes,
    pub truncation: Truncation,
    pub target: Target,
    pub grid: Grid,
    pub output: Output,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: Geometry { radius: 1.0, gap: 0.1 },
            material: Material { omega_p: 3.0, gamma: 0.02 },
            sweep: Sweep { omega_min: 1.0, omega_max: 2.4, steps: 561 },
            schemes: Schemes::default(),
            truncation: Truncation::default(),
            target: Target::default(),
            grid: Grid::default(),
            output: Output::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is serializable")
    }

    /// Replaces the scheme table by one scheme, optionally with new orders.
    pub fn select(&mut self, scheme: Option<Scheme>, orders: Option<Vec<usize>>) -> Result<(), CliError> {
        match (scheme, orders) {
            (None, None) => {}
            (Some(s), orders) => {
                let list = orders.unwrap_or_else(|| self.schemes.orders(s).to_vec());
                self.schemes = Schemes { resonant: vec![], hybrid: vec![], cgpt: vec![], oracle: vec![] };
                *self.schemes.orders_mut(s) = list;
            }
            (None, Some(list)) => {
                let active: Vec<Scheme> = Scheme::ALL.into_iter().filter(|&s| !self.schemes.orders(s).is_empty()).collect();
                match active.as_slice() {
                    [s] => *self.schemes.orders_mut(*s) = list,
                    _ => return Err(CliError::Config("--truncation needs --scheme when several schemes are configured".into())),
                }
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(self.geometry.radius > 0.0 && self.geometry.gap > 0.0) {
            return bad(format!("radius and gap must be positive, got {} and {}", self.geometry.radius, self.geometry.gap));
        }
        if !(self.material.omega_p > 0.0 && self.material.gamma >= 0.0) {
            return bad("need omega_p > 0 and gamma >= 0".into());
        }
        let sw = &self.sweep;
        if !(sw.omega_min > 0.0 && sw.omega_max >= sw.omega_min && sw.omega_max.is_finite()) {
            return bad(format!("invalid sweep range [{}, {}]", sw.omega_min, sw.omega_max));
        }
        if sw.steps < 2 {
            return bad(format!("sweep needs at least 2 steps, got {}", sw.steps));
        }
        for (scheme, order) in self.schemes.runs() {
            if order == 0 {
                return bad(format!("{scheme} truncation must be at least 1"));
            }
        }
        let t = &self.truncation;
        if t.inner == 0 || t.cgpt_terms == 0 || t.nodes < 8 || t.upsampling == 0 {
            return bad("secondary truncations must be positive and nodes at least 8".into());
        }
        let g = &self.grid;
        if g.nx < 2 || g.ny < 2 || !(g.x_max > g.x_min && g.y_max > g.y_min) {
            return bad("grid needs nx, ny >= 2 and a non-empty box".into());
        }
        Ok(())
    }

    pub fn pair(&self) -> DiskPair {
        DiskPair::new(self.geometry.radius, self.geometry.gap).expect("validated geometry")
    }

    pub fn frame(&self) -> BipolarFrame {
        BipolarFrame::new(self.pair()).expect("validated geometry")
    }

    pub fn drude(&self) -> DrudeModel {
        DrudeModel::new(self.material.omega_p, self.material.gamma).expect("validated material")
    }

    /// Equispaced sweep frequencies, endpoints included.
    pub fn omegas(&self) -> Vec<f64> {
        let Sweep { omega_min, omega_max, steps } = self.sweep;
        let h = (omega_max - omega_min) / (steps - 1) as f64;
        (0..steps).map(|i| if i + 1 == steps { omega_max } else { omega_min + h * i as f64 }).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
        let omegas = c.omegas();
        assert_eq!(omegas.len(), 561);
        assert_eq!((omegas[0], omegas[560]), (1.0, 2.4));
        assert!((omegas[1] - 1.0025).abs() < 1e-15);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c = RunConfig::from_toml("[geometry]\nradius = 0.5\ngap = 2.0\n[schemes]\nresonant = [3]\n").unwrap();
        assert_eq!(c.geometry.gap, 2.0);
        assert_eq!(c.schemes.runs(), vec![(Scheme::Resonant, 3)]);
        assert_eq!(c.material.omega_p, 3.0);
    }

    #[test]
    fn shipped_example_is_the_default_setup() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/figure1.toml");
        let mut c = RunConfig::load(&path).unwrap();
        assert_eq!(c.output.path.take().as_deref(), Some("figure1.csv"));
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn invalid_files_are_config_errors() {
        for text in [
            "[sweep]\nomega_min = 0.0\nomega_max = 1.0\nsteps = 5\n",
            "[sweep]\nomega_min = 1.0\nomega_max = 2.0\nsteps = 1\n",
            "[schemes]\nhybrid = [0]\n",
            "[geometry]\nradius = -1.0\ngap = 0.1\n",
            "unknown = 3\n",
            "[geometry]\nradius = \"one\"\n",
        ] {
            assert!(matches!(RunConfig::from_toml(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn selection_overrides_scheme_table() {
        let mut c = RunConfig::default();
        c.select(Some(Scheme::Hybrid), Some(vec![40, 80])).unwrap();
        assert_eq!(c.schemes.runs(), vec![(Scheme::Hybrid, 40), (Scheme::Hybrid, 80)]);
        c.select(None, Some(vec![7])).unwrap();
        assert_eq!(c.schemes.runs(), vec![(Scheme::Hybrid, 7)]);
        let mut c = RunConfig::default();
        assert!(c.select(None, Some(vec![7])).is_err());
        assert!("fourier".parse::<Scheme>().is_err());
    }
}
