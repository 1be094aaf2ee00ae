//! Drude permittivity and the spectral contrast parameter `λ`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::BipolarFrame;
use crate::numeric::golden_section_min;
use crate::spectrum::{eigenvalue, Sign};

/// Free-electron metal in a unit-permittivity background.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrudeModel {
    omega_p: f64,
    gamma: f64,
}

/// Contrast parameter `λ = (ε + 1) / (2 (ε - 1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParam {
    pub lambda: Complex64,
}

/// A resonance of one mode family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub n: u32,
    pub sign: Sign,
    pub omega: f64,
}

impl DrudeModel {
    pub fn new(omega_p: f64, gamma: f64) -> Result<Self> {
        if !(omega_p.is_finite() && omega_p > 0.0) {
            return Err(Error::Domain(format!("plasma frequency must be positive, got {omega_p}")));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::Domain(format!("damping must be non-negative, got {gamma}")));
        }
        Ok(Self { omega_p, gamma })
    }

    pub fn omega_p(&self) -> f64 {
        self.omega_p
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `ε(ω) = 1 - ω_p² / (ω (ω + iγ))`.
    pub fn permittivity(&self, omega: f64) -> Result<Complex64> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::Domain(format!("frequency must be positive, got {omega}")));
        }
        let wp2 = self.omega_p * self.omega_p;
        Ok(1.0 - wp2 / (omega * Complex64::new(omega, self.gamma)))
    }

    /// `λ(ε(ω))`.
    pub fn spectral_param(&self, omega: f64) -> Result<SpectralParam> {
        spectral_lambda(self.permittivity(omega)?)
    }

    /// Undamped resonance frequencies `ω` with `λ(ω) = λ_n^±`, `n = 1..=count`.
    /// Requires `γ = 0`.
    pub fn resonance_frequencies(&self, frame: &BipolarFrame, count: u32) -> Result<Vec<Resonance>> {
        if self.gamma != 0.0 {
            return Err(Error::Domain("undamped resonances need gamma = 0".into()));
        }
        let mut out = Vec::new();
        for n in 1..=count {
            for sign in Sign::BOTH {
                let lam = eigenvalue(n as i32, sign, frame)?;
                if lam == 0.5 {
                    log::warn!("mode ({n}, {sign}) needs infinite permittivity; skipped");
                    continue;
                }
                let eps = permittivity_for_lambda(lam);
                let omega = self.omega_p / (1.0 - eps).sqrt();
                if omega.is_finite() && omega > 0.0 {
                    out.push(Resonance { n, sign, omega });
                }
            }
        }
        Ok(out)
    }

    /// Real frequency in `[lo, hi]` maximizing `1/|λ(ω) - target|`, located by
    /// golden-section search to `1e-10 ω_p`.
    pub fn damped_resonance(&self, target: f64, lo: f64, hi: f64) -> Result<f64> {
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Domain(format!("invalid search bracket [{lo}, {hi}]")));
        }
        let tol = 1e-10 * self.omega_p;
        Ok(golden_section_min(|w| self.spectral_param(w).map_or(f64::INFINITY, |p| (p.lambda - target).norm()), lo, hi, tol))
    }
}

/// `λ = (ε + 1) / (2 (ε - 1))`.
pub fn spectral_lambda(eps: Complex64) -> Result<SpectralParam> {
    if eps == Complex64::new(1.0, 0.0) {
        return Err(Error::DegenerateContrast);
    }
    let lambda = (eps + 1.0) / (2.0 * (eps - 1.0));
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(Error::DegenerateContrast);
    }
    Ok(SpectralParam { lambda })
}

/// Real permittivity that maps to a given real `λ`: `(2λ + 1) / (2λ - 1)`.
pub fn permittivity_for_lambda(lambda: f64) -> f64 {
    (2.0 * lambda + 1.0) / (2.0 * lambda - 1.0)
}
