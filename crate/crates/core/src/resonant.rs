//! Resonant expansion of the scattered potential for `H = x1`.
//!
//! Only the bonding family is excited by `x1`. In the gap region
//! `|ζ| ≤ s` the scattered potential is
//!
//! ```text
//! u - H = Σ_{n≥1} a_n sinh(nζ) cos(nη),   a_n = -2α e^{-2ns} / (λ - λ_n^+),
//! ```
//!
//! and inside the disks the same coefficients multiply the decaying
//! continuations `± sinh(ns) e^{∓n(ζ ∓ s)}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{BipolarFrame, ComplexVector, Point};
use crate::spectrum::{eigenvalue, NpMode, Sign};

/// Truncated eigenfunction expansion for one value of `λ`.
#[derive(Debug, Clone)]
pub struct ResonantExpansion {
    frame: BipolarFrame,
    lambda: Complex64,
    coefficients: Vec<Complex64>,
}

impl ResonantExpansion {
    /// Coefficients `a_1..a_N`.
    pub fn build(frame: &BipolarFrame, lambda: Complex64, truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::Domain("truncation must be at least 1".into()));
        }
        let alpha = frame.alpha();
        let s = frame.s();
        let coefficients = (1..=truncation)
            .map(|n| {
                let lam_n = eigenvalue(n as i32, Sign::Plus, frame)?;
                let denom = lambda - lam_n;
                if denom == Complex64::new(0.0, 0.0) {
                    return Err(Error::ResonanceSingularity { n: n as i32, sign: Sign::Plus });
                }
                Ok(-2.0 * alpha * (-2.0 * n as f64 * s).exp() / denom)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { frame: *frame, lambda, coefficients })
    }

    pub fn frame(&self) -> &BipolarFrame {
        &self.frame
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn truncation(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// `a_n` for `1 ≤ n ≤ N`.
    pub fn coefficient(&self, n: usize) -> Complex64 {
        self.coefficients[n - 1]
    }

    /// Radial profile `G_n(ζ)` and `G_n'(ζ)`: `sinh nζ` in the gap, matched
    /// decaying exponentials inside the disks.
    fn profile(&self, n: f64, zeta: f64) -> (f64, f64) {
        let s = self.frame.s();
        if zeta > s {
            let g = (n * s).sinh() * (-n * (zeta - s)).exp();
            (g, -n * g)
        } else if zeta < -s {
            let g = -(n * s).sinh() * (n * (zeta + s)).exp();
            (g, n * g)
        } else {
            ((n * zeta).sinh(), n * (n * zeta).cosh())
        }
    }

    /// `(u - H, ∂/∂ζ, ∂/∂η)` at bipolar coordinates.
    pub fn partials(&self, zeta: f64, eta: f64) -> (Complex64, Complex64, Complex64) {
        let mut value = Complex64::new(0.0, 0.0);
        let mut dz = Complex64::new(0.0, 0.0);
        let mut de = Complex64::new(0.0, 0.0);
        for (k, a) in self.coefficients.iter().enumerate() {
            let n = (k + 1) as f64;
            let (g, dg) = self.profile(n, zeta);
            let (sin, cos) = (n * eta).sin_cos();
            value += a * (g * cos);
            dz += a * (dg * cos);
            de -= a * (n * g * sin);
        }
        (value, dz, de)
    }

    /// `u - H` at a Cartesian point.
    pub fn field(&self, point: Point) -> Result<Complex64> {
        let (zeta, eta) = self.frame.to_bipolar(point)?;
        Ok(self.partials(zeta, eta).0)
    }

    /// `∇(u - H)` at a Cartesian point.
    pub fn gradient(&self, point: Point) -> Result<ComplexVector> {
        let (zeta, eta) = self.frame.to_bipolar(point)?;
        let (_, dz, de) = self.partials(zeta, eta);
        self.frame.bipolar_gradient_to_cartesian(dz, de, zeta, eta)
    }

    /// `e1 · ∇(u - H)(0, 0) = (2/α) Σ n (-1)^n a_n`; the `e2` component
    /// vanishes by symmetry.
    pub fn gradient_at_origin(&self) -> Complex64 {
        let sum: Complex64 = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let n = (k + 1) as f64;
                let sign = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
                a * (n * sign)
            })
            .sum();
        sum * (2.0 / self.frame.alpha())
    }

    /// The closed form with `+2α n e^{-ns}` in place of the differentiated
    /// `-2α n e^{-2ns}`; kept for comparison against the solver.
    pub fn gradient_at_origin_printed(&self) -> Complex64 {
        let alpha = self.frame.alpha();
        let s = self.frame.s();
        let sum: Complex64 = (1..=self.truncation())
            .map(|n| {
                let nf = n as f64;
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let lam_n = 0.5 * (-2.0 * nf * s).exp();
                2.0 * alpha * nf * (-nf * s).exp() * sign / (self.lambda - lam_n)
            })
            .sum();
        sum * (2.0 / alpha)
    }

    /// Bound on the omitted part `Σ_{n>N}` of the origin gradient, using the
    /// distance from `λ` to the remaining eigenvalues `(0, λ_{N+1}]`.
    pub fn origin_tail_estimate(&self) -> f64 {
        let s = self.frame.s();
        let next = self.truncation() + 1;
        let top = 0.5 * (-2.0 * next as f64 * s).exp();
        let dist = distance_to_segment(self.lambda, 0.0, top);
        let q = (-2.0 * s).exp();
        // Σ_{n≥N+1} 4 n qⁿ / dist
        let nf = next as f64;
        4.0 * q.powf(nf) * (nf / (1.0 - q) + q / (1.0 - q).powi(2)) / dist
    }

    /// Sum over both signs of `n` of `(-c_n)^{-1} α|n| e^{-|n|s} / (λ - λ_n^+) 𝕊[Ψ_n^+]`,
    /// the eigenfunction form of the same truncated series.
    pub fn field_from_modes(&self, point: Point) -> Result<Complex64> {
        let alpha = self.frame.alpha();
        let s = self.frame.s();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=self.truncation() as i32 {
            for n in [-k, k] {
                let mode = NpMode::new(n, Sign::Plus, &self.frame)?;
                let weight = -alpha * k as f64 * (-(k as f64) * s).exp() / mode.c / (self.lambda - mode.eigenvalue);
                acc += weight * mode.potential_at(&self.frame, point)?;
            }
        }
        Ok(acc)
    }
}

fn distance_to_segment(z: Complex64, lo: f64, hi: f64) -> f64 {
    let x = z.re.clamp(lo, hi);
    (z - x).norm()
}
