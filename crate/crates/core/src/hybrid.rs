//! Plasmon hybridization: coupled modes as combinations of single-disk
//! multipoles.
//!
//! On `∂B1` the bipolar density `h(s, η) cos nη` has the polar Fourier
//! expansion `Σ_{m≠0} b_{nm} e^{imθ1}` with
//!
//! ```text
//! b_{nm} = (1/2R) Σ_l (-1)^l C(|m|, l) C(|m|+n-l-1, |m|-1) e^{(2l-n-|m|)s}.
//! ```
//!
//! The alternating sum cancels catastrophically once `n` and `|m|` are a few
//! tens at small gaps, so coefficients are recomputed in fixed-point
//! arithmetic with exact binomials whenever the `f64` sum has lost most of
//! its digits. Feeding the expansion through the single-disk potentials
//! `-(R^{m+1}/2m) e^{imθ}/r^m` gives the multipole coefficients `M_m^{(j)}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{BipolarFrame, ComplexVector, Disk, DiskPair, Point};
use crate::numeric::{BinomialTable, Fixed};
use crate::spectrum::{eigenvalue, NpMode, Sign};

/// Default truncation of the sum over bipolar modes inside `M_m`.
pub const DEFAULT_INNER_TRUNCATION: usize = 200;

/// Relative size below which the `f64` alternating sum is distrusted.
const CANCELLATION_THRESHOLD: f64 = 1e-6;

/// Polar coordinates about the center of one disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalPolar {
    pub disk: Disk,
    pub r: f64,
    pub theta: f64,
}

impl LocalPolar {
    pub fn of(pair: &DiskPair, disk: Disk, point: Point) -> Self {
        let c = pair.center(disk);
        let (dx, dy) = (point[0] - c[0], point[1] - c[1]);
        Self { disk, r: dx.hypot(dy), theta: dy.atan2(dx) }
    }
}

/// `𝒮_{Bj}[e^{imθ_j}]` outside `B_j`: `-(R^{|m|+1} / 2|m|) e^{imθ_j} / r_j^{|m|}`.
pub fn single_disk_mode_potential(pair: &DiskPair, disk: Disk, m: i32, point: Point) -> Result<Complex64> {
    if m == 0 {
        return Err(Error::ExcludedIndex);
    }
    let local = LocalPolar::of(pair, disk, point);
    let r = pair.radius();
    if local.r <= r {
        return Err(Error::OutOfDomain(format!("point {point:?} is inside disk {disk:?}")));
    }
    let k = m.unsigned_abs() as i32;
    let amplitude = -r.powi(k + 1) / (2.0 * k as f64) / local.r.powi(k);
    Ok(Complex64::from_polar(amplitude, m as f64 * local.theta))
}

/// Evaluates `F(k, m, s)` and `b_{nm}` with the cancellation fallback.
#[derive(Debug, Clone)]
pub struct CoefficientCalculator {
    s: f64,
    radius: f64,
    binomials: BinomialTable,
    powers: Option<(u32, Vec<Fixed>)>,
}

impl CoefficientCalculator {
    /// Supports `k + m ≤ max_index`.
    pub fn new(s: f64, radius: f64, max_index: usize) -> Self {
        Self { s, radius, binomials: BinomialTable::new(max_index + 1), powers: None }
    }

    /// `F(k, m, s) = Σ_{l=0}^{min(k,m)} (-1)^l C(m,l) C(m+k-l-1, m-1) e^{2ls}`.
    pub fn f(&mut self, k: u32, m: u32) -> f64 {
        assert!(m >= 1, "F is defined for m ≥ 1");
        let (k, m) = (k as i64, m as i64);
        let top = k.min(m);
        let mut sum = 0.0;
        let mut largest: f64 = 0.0;
        for l in 0..=top {
            let t = self.binomials.float(m, l) * self.binomials.float(m + k - l - 1, m - 1) * (2.0 * l as f64 * self.s).exp();
            largest = largest.max(t);
            sum += if l % 2 == 0 { t } else { -t };
        }
        if sum.is_finite() && sum.abs() >= CANCELLATION_THRESHOLD * largest {
            return sum;
        }
        self.f_exact(k, m, largest)
    }

    fn f_exact(&mut self, k: i64, m: i64, largest: f64) -> f64 {
        let top = k.min(m) as usize;
        let scale_bits = largest.log2().max(0.0).ceil() as u32;
        let mut bits = scale_bits + 128;
        loop {
            let powers = exp2s_powers(&mut self.powers, self.s, bits, top + 1);
            let binomials = &self.binomials;
            let work = powers[0].bits();
            let mut acc = Fixed::zero(work);
            for (l, power) in powers.iter().enumerate().take(top + 1) {
                let li = l as i64;
                let c = binomials.exact(m, li) * binomials.exact(m + k - li - 1, m - 1);
                let term = power.mul_int(&c);
                acc = if l % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            // Accumulated rounding is below largest·(top+1)²·2^-work; demand
            // 60 clean bits above it.
            let noise_bits = scale_bits as i64 + 2 * (64 - (top as u64 + 1).leading_zeros()) as i64 + 60;
            if acc.magnitude_bits() as i64 > noise_bits || bits > 8192 {
                return acc.to_f64();
            }
            bits += 256;
        }
    }

    /// `b_{nm}` for `n ≥ 1`, `m ≠ 0`; even in `m`.
    pub fn b(&mut self, n: u32, m: i32) -> Result<f64> {
        if m == 0 || n == 0 {
            return Err(Error::ExcludedIndex);
        }
        let mm = m.unsigned_abs();
        let f = self.f(n, mm);
        let decay = (-((n + mm) as f64) * self.s).exp();
        Ok(f * decay / (2.0 * self.radius))
    }
}

/// Cached powers `e^{2ls}`, `l = 0..count`, to at least `bits` fractional bits.
fn exp2s_powers(cache: &mut Option<(u32, Vec<Fixed>)>, s: f64, bits: u32, count: usize) -> &[Fixed] {
    let stale = match cache {
        Some((b, p)) => *b < bits || p.len() < count,
        None => true,
    };
    if stale {
        let bits = bits.max(cache.as_ref().map_or(0, |c| c.0));
        let count = count.max(cache.as_ref().map_or(0, |c| c.1.len()));
        // Guard bits absorb the rounding of repeated multiplication.
        let work = bits + 64;
        let base = Fixed::exp(2.0 * s, work);
        let mut powers = Vec::with_capacity(count);
        let mut acc = Fixed::one(work);
        for _ in 0..count {
            powers.push(acc.clone());
            acc = acc.mul(&base);
        }
        *cache = Some((work, powers));
    }
    &cache.as_ref().expect("filled above").1
}

/// `F(k, m, s)` with exact binomials.
pub fn f_coeff(k: u32, m: u32, s: f64) -> f64 {
    CoefficientCalculator::new(s, 1.0, (k + m) as usize).f(k, m)
}

/// `b_{nm}` for one frame.
pub fn b_coeff(n: u32, m: i32, frame: &BipolarFrame) -> Result<f64> {
    CoefficientCalculator::new(frame.s(), frame.radius(), (n + m.unsigned_abs()) as usize).b(n, m)
}

/// Table of `b_{nm}`, `1 ≤ n ≤ N`, `1 ≤ m ≤ M` (values for `-m` coincide).
#[derive(Debug, Clone)]
pub struct HybridCoefficients {
    frame: BipolarFrame,
    n_max: usize,
    m_max: usize,
    values: Vec<f64>,
}

impl HybridCoefficients {
    pub fn new(frame: &BipolarFrame, n_max: usize, m_max: usize) -> Self {
        let mut calc = CoefficientCalculator::new(frame.s(), frame.radius(), n_max + m_max);
        let mut values = Vec::with_capacity(n_max * m_max);
        for n in 1..=n_max {
            for m in 1..=m_max {
                values.push(calc.b(n as u32, m as i32).expect("indices are positive"));
            }
        }
        Self { frame: *frame, n_max, m_max, values }
    }

    pub fn frame(&self) -> &BipolarFrame {
        &self.frame
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// `b_{nm}`; `m` may be negative.
    pub fn get(&self, n: usize, m: i32) -> f64 {
        let mm = m.unsigned_abs() as usize;
        assert!(n >= 1 && n <= self.n_max && mm >= 1 && mm <= self.m_max, "index ({n}, {m}) outside table");
        self.values[(n - 1) * self.m_max + (mm - 1)]
    }
}

/// Which expansion of a mode density to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompositionForm {
    /// `m ↦ c b_{nm}` on `∂B1` and `m ↦ ∓(-1)^m c b_{nm}` on `∂B2`. These
    /// coefficients are even in `m` and reproduce the real combination
    /// `c h cos nη` of the mode pair `±n`.
    Symmetric,
    /// Exact expansion of the complex density `c h e^{inη}`: on `∂B1` only
    /// `m` of sign opposite to `n` occur, with weight `2 c b_{|n|m}`.
    OneSided,
}

/// Polar Fourier coefficients of one mode density on both circles.
#[derive(Debug, Clone)]
pub struct HybridDecomposition {
    pub mode: NpMode,
    pub form: DecompositionForm,
    /// `(m, coefficient)` on `∂B1`.
    pub first: Vec<(i32, f64)>,
    /// `(m, coefficient)` on `∂B2`.
    pub second: Vec<(i32, f64)>,
}

impl HybridDecomposition {
    /// Evaluates the truncated series on `∂B_j` at local angle `theta`.
    pub fn reconstruct(&self, disk: Disk, theta: f64) -> Complex64 {
        let terms = match disk {
            Disk::First => &self.first,
            Disk::Second => &self.second,
        };
        terms.iter().map(|&(m, c)| Complex64::from_polar(c, m as f64 * theta)).sum()
    }
}

/// Expands `Ψ_n^±` in single-disk modes up to `|m| ≤ M`.
pub fn hybrid_decomposition(mode: &NpMode, table: &HybridCoefficients, m_max: usize, form: DecompositionForm) -> HybridDecomposition {
    let n = mode.n.unsigned_abs() as usize;
    let factor = mode.second_disk_factor();
    let mut first = Vec::new();
    let mut second = Vec::new();
    for m in (-(m_max as i32)..=m_max as i32).filter(|&m| m != 0) {
        let b = table.get(n, m);
        let parity = if m % 2 == 0 { 1.0 } else { -1.0 };
        match form {
            DecompositionForm::Symmetric => {
                first.push((m, mode.c * b));
                second.push((m, factor * parity * mode.c * b));
            }
            DecompositionForm::OneSided => {
                if m.signum() != mode.n.signum() {
                    first.push((m, 2.0 * mode.c * b));
                } else {
                    second.push((m, factor * parity * 2.0 * mode.c * b));
                }
            }
        }
    }
    HybridDecomposition { mode: *mode, form, first, second }
}

/// Multipole coefficients `M_m^{(1)}`, `m = 1..=M`; `M_m^{(2)} = (-1)^{m+1} M_m^{(1)}`.
#[derive(Debug, Clone)]
pub struct MultipoleSet {
    pair: DiskPair,
    first: Vec<Complex64>,
    inner: usize,
    tail_estimate: f64,
}

impl MultipoleSet {
    /// `M_m^{(1)} = (R^{m+1}/m) Σ_{n=1}^{N_inner} α n e^{-ns} b_{nm} / (λ - λ_n^+)`.
    pub fn build(table: &HybridCoefficients, lambda: Complex64, m_max: usize, inner: usize) -> Result<Self> {
        let frame = table.frame();
        if m_max == 0 || inner == 0 {
            return Err(Error::Domain("truncations must be at least 1".into()));
        }
        if m_max > table.m_max() || inner > table.n_max() {
            return Err(Error::Domain(format!("coefficient table covers n ≤ {}, m ≤ {}", table.n_max(), table.m_max())));
        }
        let alpha = frame.alpha();
        let s = frame.s();
        let r = frame.radius();
        let mut weights = Vec::with_capacity(inner);
        for n in 1..=inner {
            let lam_n = eigenvalue(n as i32, Sign::Plus, frame)?;
            let denom = lambda - lam_n;
            if denom == Complex64::new(0.0, 0.0) {
                return Err(Error::ResonanceSingularity { n: n as i32, sign: Sign::Plus });
            }
            weights.push(alpha * n as f64 * (-(n as f64) * s).exp() / denom);
        }
        let first = (1..=m_max)
            .map(|m| {
                let sum: Complex64 = weights.iter().enumerate().map(|(k, w)| w * table.get(k + 1, m as i32)).sum();
                sum * (r.powi(m as i32 + 1) / m as f64)
            })
            .collect();
        let top = 0.5 * (-2.0 * (inner + 1) as f64 * s).exp();
        let x = lambda.re.clamp(0.0, top);
        let dist = (lambda - x).norm();
        let tail_estimate = (-(inner as f64) * s).exp() / dist;
        log::debug!("multipole inner sum truncated at {inner}: tail ≲ {tail_estimate:.3e}");
        Ok(Self { pair: *frame.pair(), first, inner, tail_estimate })
    }

    /// Convenience constructor that tabulates `b_{nm}` on the fly.
    pub fn compute(frame: &BipolarFrame, lambda: Complex64, m_max: usize, inner: usize) -> Result<Self> {
        Self::build(&HybridCoefficients::new(frame, inner, m_max), lambda, m_max, inner)
    }

    pub fn truncation(&self) -> usize {
        self.first.len()
    }

    pub fn inner_truncation(&self) -> usize {
        self.inner
    }

    /// Bound on the neglected inner tail, `e^{-N_inner s} / dist(λ, spectrum)`.
    pub fn tail_estimate(&self) -> f64 {
        self.tail_estimate
    }

    /// `M_m^{(j)}` for `1 ≤ m ≤ M`.
    pub fn coefficient(&self, disk: Disk, m: usize) -> Complex64 {
        let v = self.first[m - 1];
        match disk {
            Disk::First => v,
            Disk::Second if m % 2 == 1 => v,
            Disk::Second => -v,
        }
    }

    fn check_exterior(&self, point: Point) -> Result<[LocalPolar; 2]> {
        let polar = Disk::BOTH.map(|j| LocalPolar::of(&self.pair, j, point));
        if polar.iter().any(|p| p.r <= self.pair.radius()) {
            return Err(Error::OutOfDomain(format!("point {point:?} is inside a disk")));
        }
        Ok(polar)
    }

    /// `u - H = Σ_j Σ_{m=1}^{M} 2 M_m^{(j)} cos(mθ_j) / r_j^m`.
    pub fn field(&self, point: Point) -> Result<Complex64> {
        let polar = self.check_exterior(point)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for p in polar {
            for m in 1..=self.truncation() {
                let amp = 2.0 * (m as f64 * p.theta).cos() / p.r.powi(m as i32);
                acc += self.coefficient(p.disk, m) * amp;
            }
        }
        Ok(acc)
    }

    /// `∇(u - H)`, using `∇(r^{-m} cos mθ) = -m r^{-m-1} (cos(m+1)θ, sin(m+1)θ)`.
    pub fn gradient(&self, point: Point) -> Result<ComplexVector> {
        let polar = self.check_exterior(point)?;
        let mut gx = Complex64::new(0.0, 0.0);
        let mut gy = Complex64::new(0.0, 0.0);
        for p in polar {
            for m in 1..=self.truncation() {
                let mf = m as f64;
                let amp = -2.0 * mf / p.r.powi(m as i32 + 1);
                let (sin, cos) = ((mf + 1.0) * p.theta).sin_cos();
                let c = self.coefficient(p.disk, m);
                gx += c * (amp * cos);
                gy += c * (amp * sin);
            }
        }
        Ok([gx, gy])
    }

    /// `e1 · ∇(u - H)(0, 0) = -4 Σ m M_m^{(1)} / (R + d/2)^{m+1}`; both disks
    /// contribute equally.
    pub fn gradient_at_origin(&self) -> Complex64 {
        self.origin_sum() * -4.0
    }

    /// The single-disk prefactor `-2` in place of `-4`; kept for comparison
    /// against the solver.
    pub fn gradient_at_origin_printed(&self) -> Complex64 {
        self.origin_sum() * -2.0
    }

    fn origin_sum(&self) -> Complex64 {
        let l = self.pair.center_offset();
        self.first.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 / l.powi(k as i32 + 2))).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn frame() -> BipolarFrame {
        BipolarFrame::new(DiskPair::new(1.0, 0.1).unwrap()).unwrap()
    }

    #[test]
    fn single_disk_potential_values() {
        let pair = DiskPair::new(1.0, 0.1).unwrap();
        let c = pair.center(Disk::Second);
        let v = single_disk_mode_potential(&pair, Disk::Second, 1, [c[0] + 2.0, 0.0]).unwrap();
        assert_relative_eq!(v.re, -0.25, max_relative = 1e-15);
        for m in 1..5 {
            let near = single_disk_mode_potential(&pair, Disk::Second, m, [c[0] + 1.0 + 1e-12, 0.0]).unwrap();
            let far = single_disk_mode_potential(&pair, Disk::Second, m, [c[0] + 10.0, 0.0]).unwrap();
            assert_relative_eq!(far.re / near.re, 10f64.powi(-m), max_relative = 1e-10);
        }
        assert!(matches!(single_disk_mode_potential(&pair, Disk::First, 2, [-1.05, 0.3]), Err(Error::OutOfDomain(_))));
        assert_eq!(single_disk_mode_potential(&pair, Disk::First, 0, [5.0, 0.0]), Err(Error::ExcludedIndex));
    }

    #[test]
    fn f_coeff_values() {
        for m in 1..6 {
            assert_eq!(f_coeff(0, m, 0.37), 1.0);
        }
        assert_relative_eq!(f_coeff(1, 1, 0.4), 1.0 - 0.8f64.exp(), max_relative = 1e-15);
        // 6 - 9e + 3e²
        assert_relative_eq!(f_coeff(2, 3, 0.5), 3.702_631_840_660_543_6, max_relative = 1e-14);
    }

    #[test]
    fn b_coeff_reference_values() {
        let f = frame();
        let cases = [
            (1, 1, -0.233_664_022_465_224_56),
            (3, 2, -0.022_287_270_246_144_83),
            (40, 40, -0.010_803_946_402_162_573),
            (200, 80, -0.014_505_121_383_263_253),
            (120, 3, -3.360_943_219_431_249e-14),
            (80, 200, -0.036_262_803_458_158_13),
        ];
        for (n, m, want) in cases {
            let got = b_coeff(n, m, &f).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-12);
            assert_eq!(got, b_coeff(n, -m, &f).unwrap());
        }
        assert_eq!(b_coeff(1, 0, &f), Err(Error::ExcludedIndex));
    }

    fn boundary_angle(f: &BipolarFrame, disk: Disk, eta: f64) -> f64 {
        let p = f.to_cartesian(f.boundary_zeta(disk), eta).unwrap();
        LocalPolar::of(f.pair(), disk, p).theta
    }

    #[test]
    fn b_matches_fourier_quadrature() {
        let f = frame();
        let q = 512;
        let table = HybridCoefficients::new(&f, 6, 6);
        for n in 1..=6 {
            for m in [-6, -3, -1, 1, 2, 5] {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..q {
                    let eta = -PI + 2.0 * PI * (k as f64 + 0.5) / q as f64;
                    let th = boundary_angle(&f, Disk::First, eta);
                    acc += Complex64::from_polar((n as f64 * eta).cos(), -(m as f64) * th);
                }
                acc *= 1.0 / (q as f64 * f.radius());
                assert!((acc.re - table.get(n, m)).abs() < 1e-10 && acc.im.abs() < 1e-10, "{n} {m}: {acc}");
            }
        }
    }

    #[test]
    fn one_sided_decomposition_reconstructs_complex_modes() {
        let f = frame();
        // Coefficients decay like 0.745^|m| at this gap, so |m| ≤ 120 is needed
        // for 1e-8 accuracy at n = 3.
        let table = HybridCoefficients::new(&f, 4, 120);
        for n in [-3, -1, 1, 2] {
            for sign in Sign::BOTH {
                let mode = NpMode::new(n, sign, &f).unwrap();
                let dec = hybrid_decomposition(&mode, &table, 120, DecompositionForm::OneSided);
                let sym = hybrid_decomposition(&mode, &table, 120, DecompositionForm::Symmetric);
                for k in 0..97 {
                    let eta = -PI + 2.0 * PI * (k as f64 + 0.3) / 97.0;
                    let exact = mode.density(&f, eta).unwrap();
                    for (j, disk) in Disk::BOTH.iter().enumerate() {
                        let th = boundary_angle(&f, *disk, eta);
                        let err = (dec.reconstruct(*disk, th) - exact[j]).norm();
                        assert!(err < 1e-8, "n={n} {sign} {disk:?}: {err}");
                        let err = (sym.reconstruct(*disk, th) - exact[j].re).norm();
                        assert!(err < 1e-8, "symmetric n={n} {sign} {disk:?}: {err}");
                    }
                }
            }
        }
    }

    #[test]
    fn multipole_mirror_identity_and_origin_gradient() {
        let f = frame();
        let set = MultipoleSet::compute(&f, Complex64::new(0.12, 0.03), 12, 120).unwrap();
        for m in 1..=12 {
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            assert_eq!(set.coefficient(Disk::First, m), set.coefficient(Disk::Second, m) * sign);
        }
        let g0 = set.gradient_at_origin();
        let g = set.gradient([0.0, 0.0]).unwrap();
        assert!((g[0] - g0).norm() < 1e-12 * g0.norm() && g[1].norm() < 1e-12 * g0.norm());
        let h = 1e-5;
        let fd = (set.field([h, 0.0]).unwrap() - set.field([-h, 0.0]).unwrap()) / (2.0 * h);
        assert!((fd - g0).norm() < 1e-8 * g0.norm().max(1.0), "{fd} vs {g0}");
        assert_eq!(set.gradient_at_origin_printed() * 2.0, g0);
    }

    #[test]
    fn mirror_antisymmetry_of_field() {
        let f = frame();
        let set = MultipoleSet::compute(&f, Complex64::new(0.2, 0.01), 10, 100).unwrap();
        for p in [[0.3, 1.2], [2.5, -0.4], [0.0, 1.5]] {
            let a = set.field(p).unwrap();
            let b = set.field([-p[0], p[1]]).unwrap();
            assert!((a + b).norm() < 1e-13 * a.norm().max(1.0));
        }
        assert!(matches!(set.field([1.05, 0.0]), Err(Error::OutOfDomain(_))));
        assert!(matches!(set.field([0.3, 0.2]), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn zero_coefficients_give_zero_gradient() {
        let f = frame();
        let set = MultipoleSet::compute(&f, Complex64::new(1e300, 0.0), 5, 10).unwrap();
        assert_eq!(set.gradient_at_origin(), Complex64::new(0.0, 0.0));
    }
}
