//! Small numerical helpers: exact binomials, a fixed-point exponential for
//! cancellation-prone alternating sums, and golden-section search.

use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_traits::{One, ToPrimitive, Zero};

/// Pascal triangle of exact binomial coefficients with cached `f64` copies.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    rows: Vec<Vec<BigUint>>,
    floats: Vec<Vec<f64>>,
}

impl BinomialTable {
    /// Builds rows `0..=max_n`.
    pub fn new(max_n: usize) -> Self {
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(max_n + 1);
        rows.push(vec![BigUint::one()]);
        for n in 1..=max_n {
            let prev = &rows[n - 1];
            let mut row = Vec::with_capacity(n + 1);
            row.push(BigUint::one());
            for k in 1..n {
                row.push(&prev[k - 1] + &prev[k]);
            }
            row.push(BigUint::one());
            rows.push(row);
        }
        let floats = rows.iter().map(|r| r.iter().map(|c| c.to_f64().unwrap_or(f64::INFINITY)).collect()).collect();
        Self { rows, floats }
    }

    pub fn max_n(&self) -> usize {
        self.rows.len() - 1
    }

    fn in_range(&self, n: i64, k: i64) -> Option<(usize, usize)> {
        if n < 0 || k < 0 || k > n {
            return None;
        }
        let (n, k) = (n as usize, k as usize);
        assert!(n <= self.max_n(), "binomial row {n} exceeds table size {}", self.max_n());
        Some((n, k))
    }

    /// `C(n, k)`, zero outside `0 ≤ k ≤ n`.
    pub fn exact(&self, n: i64, k: i64) -> BigUint {
        self.in_range(n, k).map_or_else(BigUint::zero, |(n, k)| self.rows[n][k].clone())
    }

    /// `C(n, k)` rounded to `f64`, zero outside `0 ≤ k ≤ n`.
    pub fn float(&self, n: i64, k: i64) -> f64 {
        self.in_range(n, k).map_or(0.0, |(n, k)| self.floats[n][k])
    }
}

/// A real number stored as an integer multiple of `2^-bits`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixed {
    raw: BigInt,
    bits: u32,
}

impl Fixed {
    pub fn zero(bits: u32) -> Self {
        Self { raw: BigInt::zero(), bits }
    }

    pub fn one(bits: u32) -> Self {
        Self { raw: BigInt::one() << bits, bits }
    }

    /// Exact conversion of a finite `f64` (truncated below `2^-bits`).
    pub fn from_f64(x: f64, bits: u32) -> Self {
        assert!(x.is_finite(), "cannot represent {x} in fixed point");
        if x == 0.0 {
            return Self::zero(bits);
        }
        let (mantissa, exponent, sign) = num_traits::float::FloatCore::integer_decode(x);
        let mut raw = BigInt::from(mantissa);
        let shift = exponent as i64 + bits as i64;
        if shift >= 0 {
            raw <<= shift as usize;
        } else {
            raw >>= (-shift) as usize;
        }
        if sign < 0 {
            raw = -raw;
        }
        Self { raw, bits }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn mul(&self, other: &Fixed) -> Fixed {
        debug_assert_eq!(self.bits, other.bits);
        Fixed { raw: (&self.raw * &other.raw) >> self.bits, bits: self.bits }
    }

    pub fn mul_int(&self, k: &BigUint) -> Fixed {
        Fixed { raw: &self.raw * BigInt::from_biguint(BigSign::Plus, k.clone()), bits: self.bits }
    }

    pub fn add(&self, other: &Fixed) -> Fixed {
        Fixed { raw: &self.raw + &other.raw, bits: self.bits }
    }

    pub fn sub(&self, other: &Fixed) -> Fixed {
        Fixed { raw: &self.raw - &other.raw, bits: self.bits }
    }

    /// Number of significant bits of the magnitude.
    pub fn magnitude_bits(&self) -> u64 {
        self.raw.bits()
    }

    /// Nearest `f64` (to within a couple of ulps).
    pub fn to_f64(&self) -> f64 {
        let width = self.raw.bits();
        let drop = width.saturating_sub(64);
        let top = (&self.raw >> drop).to_f64().unwrap_or(f64::NAN);
        let scale = drop as i64 - self.bits as i64;
        top * pow2(scale)
    }

    /// `e^x` by Taylor series after halving `x` until it is below 1/2.
    pub fn exp(x: f64, bits: u32) -> Fixed {
        let mut halvings = 0u32;
        let mut y = x;
        while y.abs() > 0.5 {
            y *= 0.5;
            halvings += 1;
        }
        let guard = bits + 2 * halvings + 32;
        let y = Fixed::from_f64(y, guard);
        let mut sum = Fixed::one(guard);
        let mut term = Fixed::one(guard);
        let mut k = 1u64;
        loop {
            term = term.mul(&y);
            term.raw /= BigInt::from(k);
            if term.raw.is_zero() {
                break;
            }
            sum = sum.add(&term);
            k += 1;
        }
        for _ in 0..halvings {
            sum = sum.mul(&sum);
        }
        Fixed { raw: sum.raw >> (guard - bits), bits }
    }
}

fn pow2(e: i64) -> f64 {
    // Split to avoid overflow of the intermediate when e is large in magnitude.
    let half = e / 2;
    2f64.powi(half as i32) * 2f64.powi((e - half) as i32)
}

/// Minimizes a unimodal function on `[a, b]` by golden-section search,
/// stopping when the bracket is shorter than `tol`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
