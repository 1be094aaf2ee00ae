//! Bipolar coordinates for a pair of equal disks.
//!
//! The disks `B1` (left) and `B2` (right) have radius `R` and are separated by
//! a gap `d`; their centers sit at `(∓(R + d/2), 0)`. With
//! `α = sqrt(d (R + d/4))` and `sinh s = α / R`, the boundaries are the
//! coordinate circles `ζ = -s` and `ζ = +s`, so every boundary-value problem
//! posed on the pair separates in `(ζ, η)`.
//!
//! Conventions: `η ∈ (-π, π]`, `ζ < 0` on the `B1` side and `ζ > 0` on the
//! `B2` side. The bipolar origin `(ζ, η) = (0, 0)` is the point at infinity and
//! the foci `(±α, 0)` are `ζ = ±∞`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Cartesian point `(x1, x2)`.
pub type Point = [f64; 2];

/// Cartesian vector with complex components, e.g. the gradient of a
/// complex-valued potential.
pub type ComplexVector = [Complex64; 2];

/// Points closer than this (relative to `α`) to a focus are rejected.
const FOCUS_TOLERANCE: f64 = 1e-13;

/// One of the two disks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Disk {
    /// `B1`, centered on the negative `x1` axis (`ζ = -s`).
    First,
    /// `B2`, centered on the positive `x1` axis (`ζ = +s`).
    Second,
}

impl Disk {
    pub const BOTH: [Disk; 2] = [Disk::First, Disk::Second];

    /// `(-1)^j`: `-1` for `B1`, `+1` for `B2`.
    pub fn sign(self) -> f64 {
        match self {
            Disk::First => -1.0,
            Disk::Second => 1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Disk::First => 0,
            Disk::Second => 1,
        }
    }
}

/// Two disjoint disks of equal radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPair {
    radius: f64,
    gap: f64,
}

impl DiskPair {
    pub fn new(radius: f64, gap: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Domain(format!("disk radius must be positive, got {radius}")));
        }
        if !(gap.is_finite() && gap > 0.0) {
            return Err(Error::Domain(format!("gap must be positive, got {gap}")));
        }
        Ok(Self { radius, gap })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// Distance `R + d/2` from the origin to either center.
    pub fn center_offset(&self) -> f64 {
        self.radius + 0.5 * self.gap
    }

    pub fn center(&self, disk: Disk) -> Point {
        [disk.sign() * self.center_offset(), 0.0]
    }

    /// Signed distance from `point` to the boundary of `disk` (negative inside).
    pub fn boundary_distance(&self, disk: Disk, point: Point) -> f64 {
        let c = self.center(disk);
        (point[0] - c[0]).hypot(point[1] - c[1]) - self.radius
    }

    /// `true` if the point lies strictly outside both disks.
    pub fn is_exterior(&self, point: Point) -> bool {
        Disk::BOTH.iter().all(|&j| self.boundary_distance(j, point) > 0.0)
    }
}

/// Bipolar coordinate system adapted to a [`DiskPair`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BipolarFrame {
    pair: DiskPair,
    alpha: f64,
    s: f64,
}

impl BipolarFrame {
    /// Derives `α` and `s` from the disk pair and checks that the leftmost
    /// point of `B1` lands on the coordinate circle `ζ = -s`.
    pub fn new(pair: DiskPair) -> Result<Self> {
        let r = pair.radius();
        let d = pair.gap();
        let alpha = (d * (r + 0.25 * d)).sqrt();
        let s = (alpha / r).asinh();
        let frame = Self { pair, alpha, s };

        let probe = [-alpha / s.tanh() - r, 0.0];
        let (zeta, _) = frame.to_bipolar(probe)?;
        if (zeta + s).abs() > 1e-9 * s.max(1.0) {
            return Err(Error::Domain(format!("boundary of B1 does not match zeta = -s (zeta = {zeta}, s = {s})")));
        }
        Ok(frame)
    }

    pub fn pair(&self) -> &DiskPair {
        &self.pair
    }

    /// Conformal scale `α`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Boundary coordinate `s`.
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn radius(&self) -> f64 {
        self.pair.radius()
    }

    /// Bipolar `ζ` of the boundary of `disk`.
    pub fn boundary_zeta(&self, disk: Disk) -> f64 {
        disk.sign() * self.s
    }

    /// `(ζ, η) ↦ (x1, x2)`.
    pub fn to_cartesian(&self, zeta: f64, eta: f64) -> Result<Point> {
        // Scaled by e^{-|ζ|} so that large |ζ| neither overflows nor
        // produces inf/inf.
        let q = (-zeta.abs()).exp();
        let one_minus_q = -(-zeta.abs()).exp_m1();
        let half = (0.5 * eta).sin();
        let denom = one_minus_q * one_minus_q + 4.0 * q * half * half;
        if denom == 0.0 {
            return Err(Error::PointAtInfinity);
        }
        let one_minus_q2 = -(-2.0 * zeta.abs()).exp_m1();
        let x1 = self.alpha * zeta.signum() * one_minus_q2 / denom;
        let x2 = self.alpha * 2.0 * q * eta.sin() / denom;
        // signum(0.0) is 1.0 but the numerator already vanishes there.
        Ok([if zeta == 0.0 { 0.0 } else { x1 }, x2])
    }

    /// `(x1, x2) ↦ (ζ, η)` with `η ∈ (-π, π]`.
    pub fn to_bipolar(&self, point: Point) -> Result<(f64, f64)> {
        let [x, y] = point;
        let a = self.alpha;
        let minus = (x - a) * (x - a) + y * y;
        let plus = (x + a) * (x + a) + y * y;
        let tol = FOCUS_TOLERANCE * a;
        if minus.sqrt() < tol || plus.sqrt() < tol {
            return Err(Error::Singular(format!("point ({x}, {y}) is a focus of the frame")));
        }
        // ζ is odd in x; evaluating on the positive side keeps the ln_1p
        // argument non-negative and the mirror symmetry exact.
        let near = (x.abs() - a) * (x.abs() - a) + y * y;
        let zeta = (0.5 * (4.0 * a * x.abs() / near).ln_1p()).copysign(x);
        let mut eta = (2.0 * a * y).atan2(x * x + y * y - a * a);
        if eta <= -PI {
            eta += 2.0 * PI;
        }
        Ok((zeta, eta))
    }

    /// Metric factor `h(ζ, η) = (cosh ζ - cos η) / α`.
    pub fn scale_factor(&self, zeta: f64, eta: f64) -> Result<f64> {
        let h = metric_numerator(zeta, eta) / self.alpha;
        if h == 0.0 {
            return Err(Error::PointAtInfinity);
        }
        Ok(h)
    }

    /// Cartesian unit vectors `(ê_ζ, ê_η)` at a regular point.
    pub fn unit_vectors(&self, zeta: f64, eta: f64) -> Result<(Point, Point)> {
        if metric_numerator(zeta, eta) == 0.0 {
            return Err(Error::PointAtInfinity);
        }
        // ∂z/∂ζ = z'(w) with w = ζ - iη and z'(w) = -(α/2) / sinh²(w/2).
        // Its direction is -(conj(sinh(w/2)) / |sinh(w/2)|)², computed from
        // sinh(w/2) / cosh(ζ/2) to stay finite for large |ζ|.
        let t = Complex64::new((0.5 * zeta).tanh() * (0.5 * eta).cos(), -(0.5 * eta).sin());
        let u = t.conj() / t.norm();
        let e_zeta = -(u * u);
        // ∂z/∂η = -i z'(w).
        let e_eta = Complex64::new(0.0, -1.0) * e_zeta;
        Ok(([e_zeta.re, e_zeta.im], [e_eta.re, e_eta.im]))
    }

    /// Assembles `∇g = h (∂g/∂ζ ê_ζ + ∂g/∂η ê_η)` in Cartesian components.
    pub fn bipolar_gradient_to_cartesian(&self, dg_dzeta: Complex64, dg_deta: Complex64, zeta: f64, eta: f64) -> Result<ComplexVector> {
        let h = self.scale_factor(zeta, eta)?;
        let (ez, ee) = self.unit_vectors(zeta, eta)?;
        Ok([(dg_dzeta * ez[0] + dg_deta * ee[0]) * h, (dg_dzeta * ez[1] + dg_deta * ee[1]) * h])
    }

    /// Partial sum of `x1 = sgn(ζ) α [1 + 2 Σ_{n≥1} e^{-n|ζ|} cos nη]`.
    pub fn harmonic_series_x1(&self, zeta: f64, eta: f64, terms: usize) -> Result<f64> {
        check_series_args(zeta, terms)?;
        let q = (-zeta.abs()).exp();
        let sum: f64 = (1..=terms).map(|n| q.powi(n as i32) * (n as f64 * eta).cos()).sum();
        Ok(zeta.signum() * self.alpha * (1.0 + 2.0 * sum))
    }

    /// Partial sum of `x2 = 2 α Σ_{n≥1} e^{-n|ζ|} sin nη`.
    pub fn harmonic_series_x2(&self, zeta: f64, eta: f64, terms: usize) -> Result<f64> {
        check_series_args(zeta, terms)?;
        let q = (-zeta.abs()).exp();
        let sum: f64 = (1..=terms).map(|n| q.powi(n as i32) * (n as f64 * eta).sin()).sum();
        Ok(2.0 * self.alpha * sum)
    }

    /// `f_ζ` whose zero set is the coordinate circle `ζ = c`.
    pub fn zeta_level_function(&self, c: f64, point: Point) -> f64 {
        let center = self.alpha / c.tanh();
        let radius = self.alpha / c.sinh();
        (point[0] - center).powi(2) + point[1] * point[1] - radius * radius
    }

    /// Signed distance from `point` to the nearest boundary.
    pub fn boundary_distance(&self, point: Point) -> f64 {
        Disk::BOTH.iter().map(|&j| self.pair.boundary_distance(j, point)).fold(f64::INFINITY, f64::min)
    }
}

/// `cosh ζ - cos η`, written to avoid cancellation near the bipolar origin.
fn metric_numerator(zeta: f64, eta: f64) -> f64 {
    let a = (0.5 * zeta).sinh();
    let b = (0.5 * eta).sin();
    2.0 * (a * a + b * b)
}

fn check_series_args(zeta: f64, terms: usize) -> Result<()> {
    if zeta == 0.0 {
        return Err(Error::Domain("harmonic series does not converge on zeta = 0".into()));
    }
    if terms == 0 {
        return Err(Error::Domain("truncation must be at least 1".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn frame() -> BipolarFrame {
        BipolarFrame::new(DiskPair::new(1.0, 0.1).unwrap()).unwrap()
    }

    #[test]
    fn frame_parameters_for_unit_disks() {
        let f = frame();
        // sqrt(0.1 * 1.025) and asinh(alpha); 1 + alpha^2 = 1.05^2 exactly.
        assert_relative_eq!(f.alpha(), 0.320_156_211_871_642_4, max_relative = 1e-15);
        assert_relative_eq!(f.s(), 0.314_924_756_603_847_9, max_relative = 1e-14);
        assert_relative_eq!((1.0 + f.alpha().powi(2)).sqrt(), 1.05, max_relative = 1e-15);
        // Center of B_j is (±α coth s, 0).
        assert_relative_eq!(f.alpha() / f.s().tanh(), 1.05, max_relative = 1e-14);
    }

    #[test]
    fn rejects_nonpositive_inputs() {
        assert!(matches!(DiskPair::new(0.0, 0.1), Err(Error::Domain(_))));
        assert!(matches!(DiskPair::new(1.0, -0.1), Err(Error::Domain(_))));
        assert!(matches!(DiskPair::new(f64::NAN, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn touching_limit_shrinks_frame() {
        let f = BipolarFrame::new(DiskPair::new(1.0, 1e-12).unwrap()).unwrap();
        assert!(f.alpha() < 2e-6);
        assert!(f.s() < 2e-6);
    }

    #[test]
    fn widely_separated_frame_has_logarithmic_s() {
        let f = BipolarFrame::new(DiskPair::new(0.5, 100.0).unwrap()).unwrap();
        assert!((f.s() - 100f64.ln()).abs() < 1.0, "s = {}", f.s());
    }

    #[test]
    fn to_cartesian_special_points() {
        let f = frame();
        let p = f.to_cartesian(0.0, PI).unwrap();
        assert!(p[0].abs() < 1e-16 && p[1].abs() < 1e-16);
        let p = f.to_cartesian(800.0, 0.3).unwrap();
        assert_relative_eq!(p[0], f.alpha(), max_relative = 1e-15);
        assert!(p[1].abs() < 1e-300);
        assert_eq!(f.to_cartesian(0.0, 0.0), Err(Error::PointAtInfinity));
    }

    #[test]
    fn boundary_circles_have_radius_r() {
        let f = frame();
        for k in 0..64 {
            let eta = -PI + 2.0 * PI * (k as f64 + 0.5) / 64.0;
            for disk in Disk::BOTH {
                let p = f.to_cartesian(f.boundary_zeta(disk), eta).unwrap();
                let c = f.pair().center(disk);
                assert_relative_eq!((p[0] - c[0]).hypot(p[1] - c[1]), 1.0, max_relative = 1e-14);
                assert!(f.zeta_level_function(f.boundary_zeta(disk), p).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn to_bipolar_special_points() {
        let f = frame();
        assert_eq!(f.to_bipolar([0.0, 0.0]).unwrap(), (0.0, PI));
        assert_eq!(f.to_bipolar([0.0, -0.0]).unwrap().1, PI);
        for x in [-0.3, -0.1, 0.05, 0.2] {
            let (_, eta) = f.to_bipolar([x, 0.0]).unwrap();
            assert_eq!(eta, PI);
        }
        assert!(matches!(f.to_bipolar([f.alpha(), 0.0]), Err(Error::Singular(_))));
        assert!(matches!(f.to_bipolar([-f.alpha(), 0.0]), Err(Error::Singular(_))));
    }

    #[test]
    fn zeta_sign_matches_disk() {
        let f = frame();
        let (z1, _) = f.to_bipolar(f.pair().center(Disk::First)).unwrap();
        let (z2, _) = f.to_bipolar(f.pair().center(Disk::Second)).unwrap();
        assert!(z1 < -f.s() && z2 > f.s());
    }

    #[test]
    fn scale_factor_values() {
        let f = frame();
        assert_relative_eq!(f.scale_factor(0.0, PI).unwrap(), 2.0 / f.alpha(), max_relative = 1e-15);
        let s = f.s();
        assert_relative_eq!(f.scale_factor(s, 0.0).unwrap(), (s.cosh() - 1.0) / f.alpha(), max_relative = 1e-12);
        assert_eq!(f.scale_factor(0.7, 1.1).unwrap(), f.scale_factor(-0.7, 1.1).unwrap());
        assert_eq!(f.scale_factor(0.0, 0.0), Err(Error::PointAtInfinity));
    }

    #[test]
    fn gradient_of_coordinate_functions() {
        let f = frame();
        for &(zeta, eta) in &[(0.1f64, 0.4f64), (-0.25, 2.9), (0.9, -1.3), (-2.0, 0.2), (0.0, PI)] {
            // Derivatives of x1 = α sinh ζ / D and x2 = α sin η / D, D = cosh ζ - cos η.
            let d = zeta.cosh() - eta.cos();
            let a = f.alpha();
            let dx1_dz = a * (zeta.cosh() * d - zeta.sinh() * zeta.sinh()) / (d * d);
            let dx1_de = -a * zeta.sinh() * eta.sin() / (d * d);
            let g = f.bipolar_gradient_to_cartesian(dx1_dz.into(), dx1_de.into(), zeta, eta).unwrap();
            assert!((g[0].re - 1.0).abs() < 1e-12 && g[1].re.abs() < 1e-12, "{g:?}");
            let dx2_dz = -a * eta.sin() * zeta.sinh() / (d * d);
            let dx2_de = a * (eta.cos() * d - eta.sin() * eta.sin()) / (d * d);
            let g = f.bipolar_gradient_to_cartesian(dx2_dz.into(), dx2_de.into(), zeta, eta).unwrap();
            assert!(g[0].re.abs() < 1e-12 && (g[1].re - 1.0).abs() < 1e-12, "{g:?}");
            let zero = f.bipolar_gradient_to_cartesian(0.0.into(), 0.0.into(), zeta, eta).unwrap();
            assert_eq!(zero, [Complex64::new(0.0, 0.0); 2]);
        }
    }

    #[test]
    fn harmonic_series_match_closed_form() {
        let f = frame();
        let s = f.s();
        let p = f.to_cartesian(s, 0.0).unwrap();
        assert!((f.harmonic_series_x1(s, 0.0, 200).unwrap() - p[0]).abs() < 1e-10);
        for &(zeta, eta) in &[(0.3, 1.0), (-0.8, -2.5), (1.5, 3.0)] {
            let p = f.to_cartesian(zeta, eta).unwrap();
            assert!((f.harmonic_series_x1(zeta, eta, 400).unwrap() - p[0]).abs() < 1e-10);
            assert!((f.harmonic_series_x2(zeta, eta, 400).unwrap() - p[1]).abs() < 1e-10);
            assert_eq!(f.harmonic_series_x1(-zeta, eta, 20).unwrap(), -f.harmonic_series_x1(zeta, eta, 20).unwrap());
        }
        assert!(f.harmonic_series_x1(0.0, 1.0, 10).is_err());
        assert!(f.harmonic_series_x1(0.5, 1.0, 0).is_err());
    }

    #[test]
    fn harmonic_series_error_decays_geometrically() {
        let f = frame();
        let (zeta, eta) = (0.4, 0.3);
        let exact = f.to_cartesian(zeta, eta).unwrap()[0];
        let err = |n| (f.harmonic_series_x1(zeta, eta, n).unwrap() - exact).abs();
        // Tail is dominated by 2α e^{-(N+1)ζ} cos((N+1)η); compare envelopes.
        let ratio = (err(30) / err(20)).powf(0.1);
        assert!(err(30) < err(10));
        assert!(ratio < (-zeta).exp() * 1.3, "ratio {ratio}");
    }
}
