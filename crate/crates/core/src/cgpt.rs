//! Contracted generalized polarization tensors of the disk pair and the
//! far-field expansion about the origin.
//!
//! With `P_m = z^m`, `P̃_m^c = Re P_m` and `P̃_m^s = Im P_m` restricted to
//! both circles, the moments of the modes are
//!
//! ```text
//! ⟨P̃_m^c, Ψ_k^±⟩ = π α^m c_k C_k^{(m)} e^{-|k|s} ((-1)^m ∓ 1),
//! C_k^{(m)} = Σ_l C(m, l) C(k-l+m-1, m-1) = [u^k] ((1+u)/(1-u))^m,
//! ```
//!
//! so the bonding family couples to odd `m` and the antibonding family to
//! even `m` (the sine parts swap roles). Summing over the spectrum gives
//!
//! ```text
//! M_{nm}^{cc} = 2π α^{m+n} Σ_{k≥1} k C_k^{(m)} C_k^{(n)} e^{-2ks} / (λ - λ_k^σ)
//! ```
//!
//! for `m ≡ n (mod 2)`, with `σ = +` for odd and `σ = -` for even orders;
//! `M^{ss}` uses the opposite family, mixed parities vanish, and the
//! cross blocks `M^{cs}`, `M^{sc}` vanish identically.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{BipolarFrame, ComplexVector, Disk, Point};
use crate::numeric::BinomialTable;
use crate::oracle::Part;
use crate::spectrum::{eigenvalue, NpMode, Sign};

/// Coefficients of a harmonic background `H = Σ_n h_n^c r^n cos nθ + h_n^s r^n sin nθ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSource {
    /// `h_n^c`, index `n - 1`.
    pub cos: Vec<f64>,
    /// `h_n^s`, index `n - 1`.
    pub sin: Vec<f64>,
}

impl HarmonicSource {
    /// `H = x1`.
    pub fn x1() -> Self {
        Self { cos: vec![1.0], sin: vec![0.0] }
    }

    /// `H = x2`.
    pub fn x2() -> Self {
        Self { cos: vec![0.0], sin: vec![1.0] }
    }

    pub fn order(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    fn coefficient(&self, part: Part, n: usize) -> f64 {
        let v = match part {
            Part::Cos => &self.cos,
            Part::Sin => &self.sin,
        };
        v.get(n - 1).copied().unwrap_or(0.0)
    }
}

/// Reading of the combinatorial factor in the closed-form moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FTildeVariant {
    /// `Σ_l (-1)^m C(m, l) C(k-l+m-1, k-m)` exactly as written.
    Literal,
    /// `-(2/√π) C_k^{(m)}` for odd `m` and `0` for even `m`: the factor that
    /// makes `⟨P̃_m^c, Ψ_k^+⟩ = (π/2) α^m sqrt(|k|/(½-λ_k^+)) e^{-|k|s} F̃(m,|k|)`
    /// hold.
    Validated,
}

/// `C_k^{(m)} = Σ_{l=0}^{min(k,m)} C(m, l) C(k-l+m-1, m-1)`.
pub fn bipolar_moment(m: u32, k: u32, binomials: &BinomialTable) -> f64 {
    let (m, k) = (m as i64, k as i64);
    (0..=k.min(m)).map(|l| binomials.float(m, l) * binomials.float(k - l + m - 1, m - 1)).sum()
}

/// `F̃(m, k)` in either reading; binomials vanish outside `0 ≤ b ≤ a`.
pub fn f_tilde(m: u32, k: u32, variant: FTildeVariant, binomials: &BinomialTable) -> f64 {
    match variant {
        FTildeVariant::Literal => {
            let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
            let (mi, ki) = (m as i64, k as i64);
            (0..=ki.min(mi)).map(|l| sign * binomials.float(mi, l) * binomials.float(ki - l + mi - 1, ki - mi)).sum()
        }
        FTildeVariant::Validated => {
            if m.is_multiple_of(2) {
                0.0
            } else {
                -2.0 / PI.sqrt() * bipolar_moment(m, k, binomials)
            }
        }
    }
}

/// `P̃_m` of the requested part at a point.
fn polynomial(m: u32, part: Part, point: Point) -> f64 {
    let z = Complex64::new(point[0], point[1]).powu(m);
    match part {
        Part::Cos => z.re,
        Part::Sin => z.im,
    }
}

/// `⟨P̃_m, Ψ⟩_{L²}` by the trapezoid rule in `η` with `q` nodes per circle
/// (`dσ = h⁻¹ dη` cancels the metric factor of the density).
pub fn inner_product_quadrature(m: u32, part: Part, mode: &NpMode, frame: &BipolarFrame, q: usize) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..q {
        let eta = -PI + 2.0 * PI * (i as f64 + 0.5) / q as f64;
        let phase = Complex64::from_polar(mode.c, mode.n as f64 * eta);
        for (disk, factor) in [(Disk::First, 1.0), (Disk::Second, mode.second_disk_factor())] {
            let p = frame.to_cartesian(frame.boundary_zeta(disk), eta)?;
            acc += phase * (factor * polynomial(m, part, p));
        }
    }
    Ok(acc * (2.0 * PI / q as f64))
}

/// Closed form of `⟨P̃_m, Ψ_k^±⟩_{L²}`.
pub fn inner_product_closed_form(m: u32, part: Part, mode: &NpMode, frame: &BipolarFrame, binomials: &BinomialTable) -> Complex64 {
    let k = mode.n.unsigned_abs();
    let base = PI * frame.alpha().powi(m as i32) * mode.c * bipolar_moment(m, k, binomials) * (-(k as f64) * frame.s()).exp();
    let odd = m % 2 == 1;
    match (part, mode.sign) {
        (Part::Cos, Sign::Plus) if odd => Complex64::new(-2.0 * base, 0.0),
        (Part::Cos, Sign::Minus) if !odd => Complex64::new(2.0 * base, 0.0),
        (Part::Sin, Sign::Plus) if !odd => Complex64::new(0.0, -2.0 * base * mode.n.signum() as f64),
        (Part::Sin, Sign::Minus) if odd => Complex64::new(0.0, 2.0 * base * mode.n.signum() as f64),
        _ => Complex64::new(0.0, 0.0),
    }
}

/// Family whose poles appear in the `(part, part)` block of order `m`.
pub fn coupled_family(m: u32, part: Part) -> Sign {
    let odd = m % 2 == 1;
    match (part, odd) {
        (Part::Cos, true) | (Part::Sin, false) => Sign::Plus,
        _ => Sign::Minus,
    }
}

/// One `2×2` CGPT block `[[cc, cs], [sc, ss]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgptBlock {
    pub n: u32,
    pub m: u32,
    pub cc: Complex64,
    pub cs: Complex64,
    pub sc: Complex64,
    pub ss: Complex64,
    /// Bound on the omitted spectral tail.
    pub tail_estimate: f64,
}

fn spectral_sum(
    n: u32,
    m: u32,
    sign: Sign,
    frame: &BipolarFrame,
    lambda: Complex64,
    k_max: u32,
    binomials: &BinomialTable,
) -> Result<(Complex64, f64)> {
    let s = frame.s();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut last = 0.0;
    for k in 1..=k_max {
        let lam_k = eigenvalue(k as i32, sign, frame)?;
        let denom = lambda - lam_k;
        if denom == Complex64::new(0.0, 0.0) {
            return Err(Error::ResonanceSingularity { n: k as i32, sign });
        }
        let w = k as f64 * bipolar_moment(m, k, binomials) * bipolar_moment(n, k, binomials) * (-2.0 * k as f64 * s).exp();
        last = w / denom.norm();
        acc += w / denom;
    }
    let scale = 2.0 * PI * frame.alpha().powi((m + n) as i32);
    // Terms decay at least like e^{-2ks} times a polynomial; bound the tail
    // by a geometric series started at the last retained term.
    let q = (-2.0 * s).exp() * ((k_max as f64 + 1.0) / k_max as f64).powi((m + n) as i32);
    let tail = if q < 1.0 { scale * last * q / (1.0 - q) } else { f64::INFINITY };
    Ok((acc * scale, tail))
}

/// Closed-form CGPT block with the spectral sum truncated at `K`.
pub fn cgpt_block(n: u32, m: u32, frame: &BipolarFrame, lambda: Complex64, k_max: u32) -> Result<CgptBlock> {
    let binomials = BinomialTable::new((k_max + m.max(n)) as usize + 1);
    cgpt_block_with(n, m, frame, lambda, k_max, &binomials)
}

pub fn cgpt_block_with(
    n: u32,
    m: u32,
    frame: &BipolarFrame,
    lambda: Complex64,
    k_max: u32,
    binomials: &BinomialTable,
) -> Result<CgptBlock> {
    if n == 0 || m == 0 || k_max == 0 {
        return Err(Error::Domain("orders and truncation must be at least 1".into()));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut block = CgptBlock { n, m, cc: zero, cs: zero, sc: zero, ss: zero, tail_estimate: 0.0 };
    if (m + n).is_multiple_of(2) {
        let (cc, t1) = spectral_sum(n, m, coupled_family(m, Part::Cos), frame, lambda, k_max, binomials)?;
        let (ss, t2) = spectral_sum(n, m, coupled_family(m, Part::Sin), frame, lambda, k_max, binomials)?;
        block.cc = cc;
        block.ss = ss;
        block.tail_estimate = t1.max(t2);
    }
    Ok(block)
}

/// The closed form taken literally: `π α^{m+n} Σ F̃(m,k) F̃(n,k) k e^{-2ks} / (λ - λ_k^±)`
/// with `+` poles in `cc` and `-` poles in `ss` for every order.
pub fn cgpt_block_as_printed(
    n: u32,
    m: u32,
    frame: &BipolarFrame,
    lambda: Complex64,
    k_max: u32,
    variant: FTildeVariant,
) -> Result<CgptBlock> {
    let binomials = BinomialTable::new((2 * k_max + m.max(n)) as usize + 1);
    let s = frame.s();
    let scale = PI * frame.alpha().powi((m + n) as i32);
    let mut sums = [Complex64::new(0.0, 0.0); 2];
    for (slot, sign) in Sign::BOTH.iter().enumerate() {
        for k in 1..=k_max {
            let lam_k = eigenvalue(k as i32, *sign, frame)?;
            let denom = lambda - lam_k;
            if denom == Complex64::new(0.0, 0.0) {
                return Err(Error::ResonanceSingularity { n: k as i32, sign: *sign });
            }
            let w = f_tilde(m, k, variant, &binomials) * f_tilde(n, k, variant, &binomials) * k as f64 * (-2.0 * k as f64 * s).exp();
            sums[slot] += w / denom;
        }
    }
    let zero = Complex64::new(0.0, 0.0);
    Ok(CgptBlock { n, m, cc: sums[0] * scale, cs: zero, sc: zero, ss: sums[1] * scale, tail_estimate: f64::NAN })
}

/// All blocks up to order `max_order` for one `λ`.
#[derive(Debug, Clone)]
pub struct CgptTable {
    frame: BipolarFrame,
    max_order: u32,
    blocks: Vec<CgptBlock>,
}

impl CgptTable {
    pub fn new(frame: &BipolarFrame, lambda: Complex64, max_order: u32, k_max: u32) -> Result<Self> {
        let binomials = BinomialTable::new((k_max + max_order) as usize + 1);
        let mut blocks = Vec::with_capacity((max_order * max_order) as usize);
        for n in 1..=max_order {
            for m in 1..=max_order {
                blocks.push(cgpt_block_with(n, m, frame, lambda, k_max, &binomials)?);
            }
        }
        Ok(Self { frame: *frame, max_order, blocks })
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn block(&self, n: u32, m: u32) -> &CgptBlock {
        &self.blocks[((n - 1) * self.max_order + (m - 1)) as usize]
    }

    /// Largest spectral-tail bound over the tabulated blocks.
    pub fn tail_estimate(&self) -> f64 {
        self.blocks.iter().map(|b| b.tail_estimate).fold(0.0, f64::max)
    }

    /// Radius of the disk about the origin that encloses both particles.
    pub fn validity_radius(&self) -> f64 {
        self.frame.alpha() / self.frame.s().tanh() + self.frame.radius()
    }

    fn check(&self, point: Point) -> Result<(f64, f64)> {
        let r = point[0].hypot(point[1]);
        if r <= self.validity_radius() {
            return Err(Error::OutOfDomain(format!("|x| = {r} is inside the enclosing radius {}", self.validity_radius())));
        }
        Ok((r, point[1].atan2(point[0])))
    }

    /// Angular coefficients `(A_m, B_m)` of `cos mθ` and `sin mθ`.
    fn moments(&self, source: &HarmonicSource, m: u32) -> (Complex64, Complex64) {
        let mut a = Complex64::new(0.0, 0.0);
        let mut b = Complex64::new(0.0, 0.0);
        for n in 1..=(source.order() as u32).min(self.max_order) {
            let blk = self.block(n, m);
            let hc = source.coefficient(Part::Cos, n as usize);
            let hs = source.coefficient(Part::Sin, n as usize);
            a += blk.cc * hc + blk.sc * hs;
            b += blk.cs * hc + blk.ss * hs;
        }
        (a, b)
    }

    /// `u - H = Σ_m (-1/2πm) r^{-m} [cos mθ (M^{cc} h^c + M^{sc} h^s) + sin mθ (M^{cs} h^c + M^{ss} h^s)]`.
    pub fn field_far(&self, source: &HarmonicSource, point: Point) -> Result<Complex64> {
        let (r, theta) = self.check(point)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 1..=self.max_order {
            let (a, b) = self.moments(source, m);
            let mf = m as f64;
            let (sin, cos) = (mf * theta).sin_cos();
            acc += (a * cos + b * sin) * (-1.0 / (2.0 * PI * mf) / r.powi(m as i32));
        }
        Ok(acc)
    }

    /// Gradient of [`CgptTable::field_far`].
    pub fn gradient_far(&self, source: &HarmonicSource, point: Point) -> Result<ComplexVector> {
        let (r, theta) = self.check(point)?;
        let mut g = [Complex64::new(0.0, 0.0); 2];
        for m in 1..=self.max_order {
            let (a, b) = self.moments(source, m);
            let mf = m as f64;
            let (sin, cos) = ((mf + 1.0) * theta).sin_cos();
            // ∇(r^{-m} cos mθ) = -m r^{-m-1} (cos(m+1)θ, sin(m+1)θ)
            // ∇(r^{-m} sin mθ) = -m r^{-m-1} (sin(m+1)θ, -cos(m+1)θ)
            let pre = -1.0 / (2.0 * PI * mf) * (-mf) / r.powi(m as i32 + 1);
            g[0] += (a * cos + b * sin) * pre;
            g[1] += (a * sin - b * cos) * pre;
        }
        Ok(g)
    }
}

/// Which diagonal the first-order ellipse tensor uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EllipseFormula {
    /// Both diagonal entries with pole `½ (a1 - a2)/(a1 + a2)`.
    Printed,
    /// Poles `½ (a1 - a2)/(a1 + a2)` and `½ (a2 - a1)/(a1 + a2)`.
    Standard,
}

/// First-order polarization tensor of the ellipse `R_θ {(x1/a1)² + (x2/a2)² < 1}`.
pub fn ellipse_pt(lambda: Complex64, a1: f64, a2: f64, theta: f64, formula: EllipseFormula) -> Result<[[Complex64; 2]; 2]> {
    if !(a1 > 0.0 && a2 > 0.0) {
        return Err(Error::Domain(format!("semi-axes must be positive, got {a1}, {a2}")));
    }
    let area = PI * a1 * a2;
    let p1 = 0.5 * (a1 - a2) / (a1 + a2);
    let p2 = match formula {
        EllipseFormula::Printed => p1,
        EllipseFormula::Standard => -p1,
    };
    let mut diag = [Complex64::new(0.0, 0.0); 2];
    for (slot, pole) in [p1, p2].into_iter().enumerate() {
        let denom = lambda - pole;
        if denom == Complex64::new(0.0, 0.0) {
            return Err(Error::Singular(format!("lambda equals the ellipse pole {pole}")));
        }
        diag[slot] = area / denom;
    }
    let (s, c) = theta.sin_cos();
    // R diag(d1, d2) Rᵀ
    Ok([
        [diag[0] * (c * c) + diag[1] * (s * s), (diag[0] - diag[1]) * (c * s)],
        [(diag[0] - diag[1]) * (c * s), diag[0] * (s * s) + diag[1] * (c * c)],
    ])
}

/// Real `λ` in `(lo, hi)` where `1/f` crosses zero, i.e. where the real
/// function `f` has a pole, refined by bisection.
pub fn locate_poles<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let g = |x: f64| 1.0 / f(x);
    let mut poles = Vec::new();
    let step = (hi - lo) / samples as f64;
    let mut a = lo;
    let mut ga = g(a);
    for i in 1..=samples {
        let b = lo + step * i as f64;
        let gb = g(b);
        if ga.is_finite() && gb.is_finite() && ga.signum() != gb.signum() {
            let (mut x0, mut x1, mut g0) = (a, b, ga);
            for _ in 0..200 {
                let xm = 0.5 * (x0 + x1);
                if xm == x0 || xm == x1 {
                    break;
                }
                let gm = g(xm);
                if gm.signum() == g0.signum() {
                    x0 = xm;
                    g0 = gm;
                } else {
                    x1 = xm;
                }
            }
            let x = 0.5 * (x0 + x1);
            // A zero of f also flips the sign of 1/f; keep only crossings
            // where |f| grew during the refinement. Landing exactly on the
            // pole may make f undefined there.
            let fx = f(x).abs();
            if !fx.is_finite() || fx > ga.recip().abs().max(gb.recip().abs()) {
                poles.push(x);
            }
        }
        a = b;
        ga = gb;
    }
    poles
}
