//! Closed-form eigensystem of the two-disk Neumann–Poincaré operator.
//!
//! In bipolar coordinates the operator diagonalizes on densities
//! `h(s, η) e^{inη}`: for every `n ≠ 0` there is a bonding mode (`+`, odd
//! under the mirror `x1 ↦ -x1`) with eigenvalue `½ e^{-2|n|s}` and an
//! antibonding mode (`-`, even) with eigenvalue `-½ e^{-2|n|s}`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{BipolarFrame, ComplexVector, Point};

/// Eigenvalue family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    /// Bonding family, positive eigenvalues.
    Plus,
    /// Antibonding family, negative eigenvalues.
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// `±½ e^{-2|n|s}`.
pub fn eigenvalue(n: i32, sign: Sign, frame: &BipolarFrame) -> Result<f64> {
    if n == 0 {
        return Err(Error::ExcludedIndex);
    }
    Ok(sign.as_f64() * 0.5 * (-2.0 * n.unsigned_abs() as f64 * frame.s()).exp())
}

/// One normalized eigenpair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpMode {
    pub n: i32,
    pub sign: Sign,
    pub eigenvalue: f64,
    /// Normalization `sqrt(|n|) / sqrt(4π (½ - λ))`.
    pub c: f64,
}

impl NpMode {
    pub fn new(n: i32, sign: Sign, frame: &BipolarFrame) -> Result<Self> {
        let eigenvalue = eigenvalue(n, sign, frame)?;
        let c = (n.unsigned_abs() as f64).sqrt() / (4.0 * PI * (0.5 - eigenvalue)).sqrt();
        Ok(Self { n, sign, eigenvalue, c })
    }

    fn k(&self) -> f64 {
        self.n.unsigned_abs() as f64
    }

    /// Ratio of the `∂B2` component to the `∂B1` component: `∓1`.
    pub fn second_disk_factor(&self) -> f64 {
        -self.sign.as_f64()
    }

    /// Density components `(Ψ on ∂B1, Ψ on ∂B2)` at parameter `η`.
    pub fn density(&self, frame: &BipolarFrame, eta: f64) -> Result<[Complex64; 2]> {
        let h = frame.scale_factor(frame.s(), eta)?;
        let v = Complex64::from_polar(self.c * h, self.n as f64 * eta);
        Ok([v, v * self.second_disk_factor()])
    }

    /// Value of the additive constant that makes the single-layer potential
    /// vanish at infinity.
    fn far_constant(&self, frame: &BipolarFrame) -> f64 {
        match self.sign {
            Sign::Plus => 0.0,
            Sign::Minus => self.c / self.k() * (-self.k() * frame.s()).exp(),
        }
    }

    /// Single-layer potential `𝕊[Ψ]` and its bipolar partials
    /// `(value, ∂/∂ζ, ∂/∂η)`, normalized to vanish at infinity.
    pub fn potential_partials(&self, frame: &BipolarFrame, zeta: f64, eta: f64) -> (Complex64, Complex64, Complex64) {
        let k = self.k();
        let s = frame.s();
        let tau = self.second_disk_factor();
        let pre = -self.c / (2.0 * k);
        // Radial profile g(ζ) and g'(ζ), each branch matched at ζ = ±s.
        let (g, dg) = if zeta < -s {
            let a = pre * ((k * s).exp() + tau * (-k * s).exp());
            let e = (k * zeta).exp();
            (a * e, a * k * e)
        } else if zeta > s {
            let a = pre * ((-k * s).exp() + tau * (k * s).exp());
            let e = (-k * zeta).exp();
            (a * e, -a * k * e)
        } else {
            let a = pre * (-k * s).exp();
            let (em, ep) = ((-k * zeta).exp(), (k * zeta).exp());
            (a * (em + tau * ep), a * k * (tau * ep - em))
        };
        let phase = Complex64::from_polar(1.0, self.n as f64 * eta);
        let value = phase * g + self.far_constant(frame);
        let i_n = Complex64::new(0.0, self.n as f64);
        (value, phase * dg, i_n * phase * g)
    }

    /// `𝕊[Ψ]` at bipolar coordinates.
    pub fn potential(&self, frame: &BipolarFrame, zeta: f64, eta: f64) -> Complex64 {
        self.potential_partials(frame, zeta, eta).0
    }

    /// `𝕊[Ψ]` at a Cartesian point.
    pub fn potential_at(&self, frame: &BipolarFrame, point: Point) -> Result<Complex64> {
        let (zeta, eta) = frame.to_bipolar(point)?;
        Ok(self.potential(frame, zeta, eta))
    }

    /// Cartesian gradient of `𝕊[Ψ]`.
    pub fn potential_gradient_at(&self, frame: &BipolarFrame, point: Point) -> Result<ComplexVector> {
        let (zeta, eta) = frame.to_bipolar(point)?;
        let (_, dz, de) = self.potential_partials(frame, zeta, eta);
        frame.bipolar_gradient_to_cartesian(dz, de, zeta, eta)
    }
}

/// The first `count` modes of both families, ordered by `|n|` then sign,
/// covering `n = 1..=count`.
pub fn leading_modes(frame: &BipolarFrame, count: u32) -> Vec<NpMode> {
    (1..=count as i32).flat_map(|n| Sign::BOTH.map(|sign| NpMode::new(n, sign, frame).expect("n ≥ 1"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DiskPair;
    use approx::assert_relative_eq;

    fn frame() -> BipolarFrame {
        BipolarFrame::new(DiskPair::new(1.0, 0.1).unwrap()).unwrap()
    }

    #[test]
    fn first_bonding_eigenvalue() {
        let f = frame();
        // ½ e^{-2s} with s = asinh(sqrt(0.1025)).
        assert_relative_eq!(eigenvalue(1, Sign::Plus, &f).unwrap(), 0.266_335_977_534_775_4, max_relative = 1e-12);
        assert_eq!(eigenvalue(0, Sign::Plus, &f), Err(Error::ExcludedIndex));
        for n in 1..10 {
            assert_eq!(eigenvalue(n, Sign::Plus, &f).unwrap(), -eigenvalue(n, Sign::Minus, &f).unwrap());
            assert_eq!(eigenvalue(n, Sign::Plus, &f).unwrap(), eigenvalue(-n, Sign::Plus, &f).unwrap());
        }
        assert!(eigenvalue(400, Sign::Plus, &f).unwrap() < 1e-100);
    }

    #[test]
    fn normalization_is_positive() {
        let f = frame();
        for m in leading_modes(&f, 8) {
            assert!(m.c > 0.0 && m.eigenvalue.abs() < 0.5);
        }
    }

    #[test]
    fn density_sign_structure_and_zero_mean() {
        let f = frame();
        let q = 64;
        for mode in leading_modes(&f, 4) {
            let mut mean = [Complex64::new(0.0, 0.0); 2];
            for k in 0..q {
                let eta = -PI + 2.0 * PI * k as f64 / q as f64;
                let d = mode.density(&f, eta).unwrap();
                assert_eq!(d[1], d[0] * mode.second_disk_factor());
                let h = f.scale_factor(f.s(), eta).unwrap();
                for j in 0..2 {
                    mean[j] += d[j] / h * (2.0 * PI / q as f64);
                }
            }
            assert!(mean[0].norm() < 1e-12 && mean[1].norm() < 1e-12);
        }
    }

    #[test]
    fn potential_is_continuous_across_boundaries() {
        let f = frame();
        let s = f.s();
        for n in [-3, -1, 1, 2, 7] {
            for sign in Sign::BOTH {
                let mode = NpMode::new(n, sign, &f).unwrap();
                for zb in [-s, s] {
                    let lo = mode.potential(&f, zb - 1e-14, 0.7);
                    let hi = mode.potential(&f, zb + 1e-14, 0.7);
                    assert!((lo - hi).norm() < 1e-12, "n={n} {sign}: {lo} vs {hi}");
                }
            }
        }
    }

    #[test]
    fn bonding_potential_is_odd_in_zeta() {
        let f = frame();
        let mode = NpMode::new(2, Sign::Plus, &f).unwrap();
        for z in [0.05, 0.2, 0.9] {
            let a = mode.potential(&f, z, 1.3);
            let b = mode.potential(&f, -z, 1.3);
            assert!((a + b).norm() < 1e-14 * a.norm().max(1.0));
        }
    }

    #[test]
    fn potential_vanishes_at_infinity() {
        let f = frame();
        for mode in leading_modes(&f, 3) {
            let v = mode.potential_at(&f, [1e7, 3e6]).unwrap();
            assert!(v.norm() < 1e-6, "{mode:?}: {v}");
        }
    }

    #[test]
    fn potential_is_harmonic_and_gradient_matches_differences() {
        let f = frame();
        let pts: [Point; 4] = [[0.0, 0.3], [0.4, -0.7], [-2.5, 1.0], [1.3, 1.4]];
        for mode in leading_modes(&f, 3) {
            for p in pts {
                let u = |x: f64, y: f64| mode.potential_at(&f, [x, y]).unwrap();
                let five_point = |hs: f64| {
                    (u(p[0] + hs, p[1]) + u(p[0] - hs, p[1]) + u(p[0], p[1] + hs) + u(p[0], p[1] - hs) - u(p[0], p[1]) * 4.0) / (hs * hs)
                };
                // Richardson step removes the O(h²) truncation term.
                let lap = (five_point(5e-4) * 4.0 - five_point(1e-3)) / 3.0;
                assert!(lap.norm() < 1e-5, "laplacian {lap} at {p:?} for {mode:?}");
                let hd = 1e-6;
                let g = mode.potential_gradient_at(&f, p).unwrap();
                let gx = (u(p[0] + hd, p[1]) - u(p[0] - hd, p[1])) / (2.0 * hd);
                let gy = (u(p[0], p[1] + hd) - u(p[0], p[1] - hd)) / (2.0 * hd);
                assert!((g[0] - gx).norm() < 1e-6 && (g[1] - gy).norm() < 1e-6, "{g:?} vs {gx} {gy}");
            }
        }
    }
}
