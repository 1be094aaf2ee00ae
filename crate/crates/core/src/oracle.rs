//! Nyström discretization of the two-disk Neumann–Poincaré system.
//!
//! Both boundaries carry `P` equispaced nodes. The kernels between and on
//! circles are smooth and periodic, so the trapezoid rule converges
//! super-algebraically. The operator is restricted to densities with zero
//! mean on each circle by `A0 = Q K Q`; on that subspace the transmission
//! problem reads `(λ I - A0) φ = Q ∂_ν H`.
//!
//! `A0` is reduced to Hessenberg form once, so every solve for a new `λ`
//! costs `O(P²)`. Potentials are evaluated with densities resampled onto a
//! finer grid by zero-padding their discrete Fourier series, which keeps the
//! quadrature accurate at points close to the boundaries.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::{ComplexVector, Disk, DiskPair, Point};

/// Minimum distance between `λ` and a discrete eigenvalue before a solve is
/// refused.
pub const NEAR_RESONANCE_DISTANCE: f64 = 1e-9;

/// Solve residual bound `‖(λ - A0) φ - b‖ / ‖b‖`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

/// Default evaluation grid refinement factor.
pub const DEFAULT_UPSAMPLING: usize = 16;

/// Quadrature nodes on both circles.
#[derive(Debug, Clone)]
pub struct BoundaryMesh {
    pair: DiskPair,
    per_disk: usize,
}

impl BoundaryMesh {
    pub fn new(pair: DiskPair, per_disk: usize) -> Result<Self> {
        if per_disk < 16 || !per_disk.is_multiple_of(2) {
            return Err(Error::Discretization(format!("nodes per disk must be even and at least 16, got {per_disk}")));
        }
        Ok(Self { pair, per_disk })
    }

    pub fn pair(&self) -> &DiskPair {
        &self.pair
    }

    pub fn per_disk(&self) -> usize {
        self.per_disk
    }

    /// Total number of nodes, `2P`.
    pub fn len(&self) -> usize {
        2 * self.per_disk
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Arclength weight `2πR / P`.
    pub fn weight(&self) -> f64 {
        2.0 * PI * self.pair.radius() / self.per_disk as f64
    }

    pub fn disk(&self, index: usize) -> Disk {
        if index < self.per_disk {
            Disk::First
        } else {
            Disk::Second
        }
    }

    /// Polar angle of node `index` about its own center.
    pub fn angle(&self, index: usize) -> f64 {
        2.0 * PI * (index % self.per_disk) as f64 / self.per_disk as f64
    }

    pub fn normal(&self, index: usize) -> Point {
        let t = self.angle(index);
        [t.cos(), t.sin()]
    }

    pub fn point(&self, index: usize) -> Point {
        circle_point(&self.pair, self.disk(index), self.angle(index))
    }
}

fn circle_point(pair: &DiskPair, disk: Disk, theta: f64) -> Point {
    let c = pair.center(disk);
    [c[0] + pair.radius() * theta.cos(), c[1] + pair.radius() * theta.sin()]
}

/// Which part of `z^m` a harmonic polynomial source takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    /// `Re z^m = r^m cos mθ`.
    Cos,
    /// `Im z^m = r^m sin mθ`.
    Sin,
}

/// Background potential `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    X1,
    X2,
    /// `Re z^m` or `Im z^m` about the origin.
    Polynomial {
        degree: u32,
        part: Part,
    },
}

impl Source {
    /// Value of `H` at `point`.
    pub fn value(&self, point: Point) -> f64 {
        match *self {
            Source::X1 => point[0],
            Source::X2 => point[1],
            Source::Polynomial { degree, part } => {
                let z = Complex64::new(point[0], point[1]).powu(degree);
                match part {
                    Part::Cos => z.re,
                    Part::Sin => z.im,
                }
            }
        }
    }

    /// `∇H` at `point`.
    pub fn gradient(&self, point: Point) -> Point {
        match *self {
            Source::X1 => [1.0, 0.0],
            Source::X2 => [0.0, 1.0],
            Source::Polynomial { degree: 0, .. } => [0.0, 0.0],
            Source::Polynomial { degree, part } => {
                // d/dz z^m = m z^{m-1}; ∇Re f = (Re f', -Im f'), ∇Im f = (Im f', Re f').
                let d = Complex64::new(point[0], point[1]).powu(degree - 1) * degree as f64;
                match part {
                    Part::Cos => [d.re, -d.im],
                    Part::Sin => [d.im, d.re],
                }
            }
        }
    }
}

/// Density pair `(φ1, φ2)` sampled at the mesh nodes.
#[derive(Debug, Clone)]
pub struct Densities {
    values: Vec<Complex64>,
    upsampled: OnceLock<Arc<Vec<Complex64>>>,
}

impl Densities {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values, upsampled: OnceLock::new() }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Component on one disk.
    pub fn on(&self, disk: Disk) -> &[Complex64] {
        let p = self.values.len() / 2;
        match disk {
            Disk::First => &self.values[..p],
            Disk::Second => &self.values[p..],
        }
    }
}

/// Assembled Nyström system for one geometry and node count.
#[derive(Debug)]
pub struct BieSystem {
    mesh: BoundaryMesh,
    kernel: DMatrix<f64>,
    projected: DMatrix<f64>,
    hess_q: DMatrix<f64>,
    hess_h: DMatrix<f64>,
    eval_per_disk: usize,
    eigenvalues: OnceLock<Vec<Complex64>>,
}

impl BieSystem {
    /// Assembles `𝕂*` with `P` nodes per disk.
    pub fn discretize(pair: DiskPair, per_disk: usize) -> Result<Self> {
        let mesh = BoundaryMesh::new(pair, per_disk)?;
        let n = mesh.len();
        let w = mesh.weight();
        let r = pair.radius();
        // Differences are formed as center offset plus local offset so that
        // widely separated disks do not lose digits to cancellation.
        let centers: Vec<Point> = (0..n).map(|i| pair.center(mesh.disk(i))).collect();
        let normals: Vec<Point> = (0..n).map(|i| mesh.normal(i)).collect();

        let kernel = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                // Curvature limit of the kernel on a circle.
                return w / (4.0 * PI * r);
            }
            let dx = (centers[i][0] - centers[j][0]) + r * (normals[i][0] - normals[j][0]);
            let dy = r * (normals[i][1] - normals[j][1]);
            let dot = dx * normals[i][0] + dy * normals[i][1];
            dot / (dx * dx + dy * dy) / (2.0 * PI) * w
        });

        let projected = project(&kernel, per_disk);
        let hess = nalgebra::linalg::Hessenberg::new(projected.clone());
        let (hess_q, hess_h) = hess.unpack();
        Ok(Self { mesh, kernel, projected, hess_q, hess_h, eval_per_disk: DEFAULT_UPSAMPLING * per_disk, eigenvalues: OnceLock::new() })
    }

    /// Overrides the number of nodes per disk used for potential evaluation.
    pub fn with_eval_nodes(mut self, per_disk: usize) -> Self {
        assert!(per_disk >= self.mesh.per_disk && per_disk.is_multiple_of(2));
        self.eval_per_disk = per_disk;
        self
    }

    pub fn mesh(&self) -> &BoundaryMesh {
        &self.mesh
    }

    /// The plain Nyström matrix of `𝕂*` (weights included).
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    /// `Q K Q`, the operator on zero-mean densities.
    pub fn projected_matrix(&self) -> &DMatrix<f64> {
        &self.projected
    }

    /// Samples a function of the node index into a density vector.
    pub fn sample<F: FnMut(usize) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        (0..self.mesh.len()).map(f).collect()
    }

    /// `∂_ν H` at the nodes.
    pub fn normal_derivative(&self, source: Source) -> Vec<Complex64> {
        self.sample(|i| {
            let g = source.gradient(self.mesh.point(i));
            let nu = self.mesh.normal(i);
            Complex64::new(g[0] * nu[0] + g[1] * nu[1], 0.0)
        })
    }

    /// Applies the projected operator to a density.
    pub fn apply(&self, density: &[Complex64]) -> Vec<Complex64> {
        let n = self.mesh.len();
        (0..n).map(|i| (0..n).map(|j| density[j] * self.projected[(i, j)]).sum()).collect()
    }

    /// Eigenvalues of the projected matrix (computed once).
    pub fn eigenvalues(&self) -> &[Complex64] {
        self.eigenvalues.get_or_init(|| {
            let schur = nalgebra::linalg::Schur::new(self.hess_h.clone());
            schur.complex_eigenvalues().iter().copied().collect()
        })
    }

    /// The `count` eigenvalues of largest magnitude, sorted descending by
    /// magnitude. The two zero eigenvalues carried by the constant densities
    /// sit at the end of the spectrum.
    pub fn numeric_spectrum(&self, count: usize) -> Vec<f64> {
        let mut ev: Vec<f64> = self.eigenvalues().iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a)));
        ev.truncate(count);
        ev
    }

    /// Nearest discrete eigenvalue to `λ` and its distance.
    pub fn nearest_eigenvalue(&self, lambda: Complex64) -> (f64, f64) {
        self.eigenvalues()
            .iter()
            .map(|z| (z.re, (lambda - z).norm()))
            .fold((f64::NAN, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
    }

    /// Solves `(λ - A0) φ = Q b`.
    pub fn solve(&self, lambda: Complex64, rhs: &[Complex64]) -> Result<Densities> {
        let n = self.mesh.len();
        if rhs.len() != n {
            return Err(Error::Discretization(format!("rhs has {} entries, expected {n}", rhs.len())));
        }
        let (eigenvalue, distance) = self.nearest_eigenvalue(lambda);
        if distance < NEAR_RESONANCE_DISTANCE {
            return Err(Error::NearResonance { eigenvalue, distance });
        }
        let b = project_vector(rhs, self.mesh.per_disk);
        let b_norm = norm(&b);
        if b_norm == 0.0 {
            return Ok(Densities::new(vec![Complex64::new(0.0, 0.0); n]));
        }
        // φ = U (λ - H)^{-1} Uᵀ b with A0 = U H Uᵀ.
        let q = &self.hess_q;
        let c: Vec<Complex64> = (0..n).map(|j| (0..n).map(|i| b[i] * q[(i, j)]).sum()).collect();
        let y = solve_shifted_hessenberg(&self.hess_h, lambda, c)?;
        let phi: Vec<Complex64> = (0..n).map(|i| (0..n).map(|j| y[j] * q[(i, j)]).sum()).collect();

        let applied = self.apply(&phi);
        let residual: Vec<Complex64> = (0..n).map(|i| phi[i] * lambda - applied[i] - b[i]).collect();
        let rel = norm(&residual) / b_norm;
        // Also rejects a NaN residual.
        if rel.partial_cmp(&RESIDUAL_TOLERANCE) != Some(std::cmp::Ordering::Less) {
            return Err(Error::Discretization(format!("solve residual {rel:.3e} exceeds tolerance")));
        }
        Ok(Densities::new(phi))
    }

    /// Solves the transmission problem for a background potential.
    pub fn solve_densities(&self, lambda: Complex64, source: Source) -> Result<Densities> {
        self.solve(lambda, &self.normal_derivative(source))
    }

    fn upsampled<'a>(&self, densities: &'a Densities) -> &'a Arc<Vec<Complex64>> {
        densities.upsampled.get_or_init(|| {
            let mut out = Vec::with_capacity(2 * self.eval_per_disk);
            for disk in Disk::BOTH {
                out.extend(fourier_resample(densities.on(disk), self.eval_per_disk));
            }
            Arc::new(out)
        })
    }

    fn check_distance(&self, point: Point) -> Result<()> {
        let pair = self.mesh.pair();
        let distance = Disk::BOTH.iter().map(|&j| pair.boundary_distance(j, point).abs()).fold(f64::INFINITY, f64::min);
        let required = 5.0 * 2.0 * PI * pair.radius() / self.eval_per_disk as f64;
        if distance <= required {
            return Err(Error::TooClose { distance, required });
        }
        Ok(())
    }

    /// `u - H = 𝒮_{B1}[φ1] + 𝒮_{B2}[φ2]` at a point away from both circles.
    pub fn evaluate_field(&self, densities: &Densities, point: Point) -> Result<Complex64> {
        self.check_distance(point)?;
        let fine = self.upsampled(densities);
        let (pe, w) = self.eval_grid();
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, disk) in Disk::BOTH.iter().enumerate() {
            for i in 0..pe {
                let y = circle_point(self.mesh.pair(), *disk, 2.0 * PI * i as f64 / pe as f64);
                let r2 = (point[0] - y[0]).powi(2) + (point[1] - y[1]).powi(2);
                acc += fine[k * pe + i] * (0.5 * r2.ln());
            }
        }
        Ok(acc * (w / (2.0 * PI)))
    }

    /// `∇(u - H)` at a point away from both circles.
    pub fn evaluate_gradient(&self, densities: &Densities, point: Point) -> Result<ComplexVector> {
        self.check_distance(point)?;
        let fine = self.upsampled(densities);
        let (pe, w) = self.eval_grid();
        let mut gx = Complex64::new(0.0, 0.0);
        let mut gy = Complex64::new(0.0, 0.0);
        for (k, disk) in Disk::BOTH.iter().enumerate() {
            for i in 0..pe {
                let y = circle_point(self.mesh.pair(), *disk, 2.0 * PI * i as f64 / pe as f64);
                let dx = point[0] - y[0];
                let dy = point[1] - y[1];
                let r2 = dx * dx + dy * dy;
                let phi = fine[k * pe + i];
                gx += phi * (dx / r2);
                gy += phi * (dy / r2);
            }
        }
        let scale = w / (2.0 * PI);
        Ok([gx * scale, gy * scale])
    }

    fn eval_grid(&self) -> (usize, f64) {
        let pe = self.eval_per_disk;
        (pe, 2.0 * PI * self.mesh.pair().radius() / pe as f64)
    }

    /// `𝕊[φ]` at the nodes. The self-interaction uses the exact Fourier
    /// multipliers of the logarithmic kernel on a circle; the interaction
    /// between the circles uses the trapezoid rule.
    pub fn single_layer_on_boundary(&self, density: &[Complex64]) -> Vec<Complex64> {
        let p = self.mesh.per_disk;
        let r = self.mesh.pair().radius();
        let w = self.mesh.weight();
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * p];
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(p);
        let inv = planner.plan_fft_inverse(p);
        for k in 0..2 {
            let mut coeffs = density[k * p..(k + 1) * p].to_vec();
            fwd.process(&mut coeffs);
            for (m, c) in coeffs.iter_mut().enumerate() {
                let freq = signed_frequency(m, p).unsigned_abs() as f64;
                let mult = if freq == 0.0 { r * r.ln() } else { -r / (2.0 * freq) };
                *c *= mult / p as f64;
            }
            inv.process(&mut coeffs);
            let other = 1 - k;
            for i in 0..p {
                let x = self.mesh.point(k * p + i);
                let mut acc = coeffs[i];
                for j in 0..p {
                    let y = self.mesh.point(other * p + j);
                    let r2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
                    acc += density[other * p + j] * (0.5 * r2.ln() / (2.0 * PI) * w);
                }
                out[k * p + i] = acc;
            }
        }
        out
    }

    /// `⟨φ, ψ⟩_* = -∮ conj(φ) 𝕊[ψ] dσ`.
    pub fn star_inner(&self, phi: &[Complex64], psi: &[Complex64]) -> Complex64 {
        let s_psi = self.single_layer_on_boundary(psi);
        -phi.iter().zip(&s_psi).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.mesh.weight()
    }

    /// Bilinear boundary pairing `∮ f φ dσ` over both circles.
    pub fn pairing(&self, f: &[Complex64], phi: &[Complex64]) -> Complex64 {
        f.iter().zip(phi).map(|(a, b)| a * b).sum::<Complex64>() * self.mesh.weight()
    }

    /// `∮ P_row (λ - 𝕂*)^{-1}[∂_ν P_col] dσ` for harmonic polynomial sources.
    pub fn cgpt(&self, lambda: Complex64, row: Source, col: Source) -> Result<Complex64> {
        let phi = self.solve_densities(lambda, col)?;
        let values = self.sample(|i| Complex64::new(row.value(self.mesh.point(i)), 0.0));
        Ok(self.pairing(&values, phi.values()))
    }

    /// Relative mismatch of the transmission condition
    /// `ε ∂_ν u|₋ = ∂_ν u|₊` at the boundary point of `disk` with polar angle
    /// `theta`, from one-sided values at `δ` and `δ/2` extrapolated to the
    /// boundary.
    pub fn flux_mismatch(&self, eps: Complex64, densities: &Densities, source: Source, disk: Disk, theta: f64, delta: f64) -> Result<f64> {
        let pair = *self.mesh.pair();
        let nu = [theta.cos(), theta.sin()];
        let x0 = circle_point(&pair, disk, theta);
        let normal_derivative = |t: f64| -> Result<Complex64> {
            let x = [x0[0] + t * nu[0], x0[1] + t * nu[1]];
            let g = self.evaluate_gradient(densities, x)?;
            let h = source.gradient(x);
            Ok((g[0] + h[0]) * nu[0] + (g[1] + h[1]) * nu[1])
        };
        let side = |sign: f64| -> Result<Complex64> {
            let far = normal_derivative(sign * delta)?;
            let near = normal_derivative(sign * 0.5 * delta)?;
            Ok(near * 2.0 - far)
        };
        let outside = side(1.0)?;
        let inside = side(-1.0)?;
        Ok((eps * inside - outside).norm() / outside.norm().max(f64::MIN_POSITIVE))
    }
}

/// `Q A Q` with `Q` the per-block mean-removal projector.
fn project(a: &DMatrix<f64>, p: usize) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = a.clone();
    // Right multiplication: subtract block-column means of each row.
    for i in 0..n {
        for blk in 0..2 {
            let mean: f64 = (blk * p..(blk + 1) * p).map(|j| a[(i, j)]).sum::<f64>() / p as f64;
            for j in blk * p..(blk + 1) * p {
                out[(i, j)] -= mean;
            }
        }
    }
    // Left multiplication: subtract block-row means of each column.
    let tmp = out.clone();
    for j in 0..n {
        for blk in 0..2 {
            let mean: f64 = (blk * p..(blk + 1) * p).map(|i| tmp[(i, j)]).sum::<f64>() / p as f64;
            for i in blk * p..(blk + 1) * p {
                out[(i, j)] -= mean;
            }
        }
    }
    out
}

fn project_vector(v: &[Complex64], p: usize) -> Vec<Complex64> {
    let mut out = v.to_vec();
    for blk in 0..2 {
        let mean: Complex64 = v[blk * p..(blk + 1) * p].iter().sum::<Complex64>() / p as f64;
        for x in &mut out[blk * p..(blk + 1) * p] {
            *x -= mean;
        }
    }
    out
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves `(λ I - H) y = c` for upper Hessenberg `H` by Gaussian elimination
/// with adjacent-row partial pivoting.
fn solve_shifted_hessenberg(h: &DMatrix<f64>, lambda: Complex64, mut c: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let n = h.nrows();
    // Row-major working copy of the upper Hessenberg part.
    let mut a: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            let start = i.saturating_sub(1);
            (start..n)
                .map(|j| {
                    let v = Complex64::new(-h[(i, j)], 0.0);
                    if i == j {
                        v + lambda
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    // Row i stores columns start(i)..n; map column j to index j - start(i).
    let start = |i: usize| i.saturating_sub(1);
    for k in 0..n.saturating_sub(1) {
        let top = a[k][k - start(k)];
        let below = a[k + 1][k - start(k + 1)];
        if below.norm() > top.norm() {
            // Swap rows k and k+1 over columns k..n.
            let (rk, rk1) = {
                let (lo, hi) = a.split_at_mut(k + 1);
                (&mut lo[k], &mut hi[0])
            };
            for j in k..n {
                let ik = j - start(k);
                let ik1 = j - start(k + 1);
                std::mem::swap(&mut rk[ik], &mut rk1[ik1]);
            }
            c.swap(k, k + 1);
        }
        let pivot = a[k][k - start(k)];
        if pivot == Complex64::new(0.0, 0.0) {
            return Err(Error::NearResonance { eigenvalue: lambda.re, distance: 0.0 });
        }
        let factor = a[k + 1][k - start(k + 1)] / pivot;
        if factor != Complex64::new(0.0, 0.0) {
            let (lo, hi) = a.split_at_mut(k + 1);
            let (rk, rk1) = (&lo[k], &mut hi[0]);
            for j in k..n {
                let v = rk[j - start(k)];
                rk1[j - start(k + 1)] -= factor * v;
            }
            c[k + 1] = c[k + 1] - factor * c[k];
        }
    }
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let row = &a[i];
        let mut acc = c[i];
        for j in i + 1..n {
            acc -= row[j - start(i)] * y[j];
        }
        let d = row[i - start(i)];
        if d == Complex64::new(0.0, 0.0) {
            return Err(Error::NearResonance { eigenvalue: lambda.re, distance: 0.0 });
        }
        y[i] = acc / d;
    }
    Ok(y)
}

fn signed_frequency(index: usize, len: usize) -> i64 {
    if index <= len / 2 {
        index as i64
    } else {
        index as i64 - len as i64
    }
}

/// Trigonometric interpolation of equispaced samples onto a finer grid.
/// The Nyquist coefficient is split evenly between `±P/2`.
pub fn fourier_resample(samples: &[Complex64], target: usize) -> Vec<Complex64> {
    let p = samples.len();
    if target == p {
        return samples.to_vec();
    }
    assert!(target > p && p.is_multiple_of(2));
    let mut planner = FftPlanner::new();
    let mut coeffs = samples.to_vec();
    planner.plan_fft_forward(p).process(&mut coeffs);
    let mut fine = vec![Complex64::new(0.0, 0.0); target];
    let half = p / 2;
    fine[..half].copy_from_slice(&coeffs[..half]);
    for m in 1..half {
        fine[target - m] = coeffs[p - m];
    }
    fine[half] = coeffs[half] * 0.5;
    fine[target - half] = coeffs[half] * 0.5;
    planner.plan_fft_inverse(target).process(&mut fine);
    let scale = 1.0 / p as f64;
    fine.iter_mut().for_each(|z| *z *= scale);
    fine
}

/// Convenience: the column vector form of a density.
pub fn to_dvector(v: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> DiskPair {
        DiskPair::new(1.0, 0.1).unwrap()
    }

    #[test]
    fn mesh_nodes_on_circles() {
        let mesh = BoundaryMesh::new(pair(), 32).unwrap();
        for i in 0..mesh.len() {
            let c = pair().center(mesh.disk(i));
            let p = mesh.point(i);
            assert!(((p[0] - c[0]).hypot(p[1] - c[1]) - 1.0).abs() < 1e-15);
        }
        assert!((mesh.weight() * 32.0 - 2.0 * PI).abs() < 1e-14);
        assert!(BoundaryMesh::new(pair(), 15).is_err());
        assert!(BoundaryMesh::new(pair(), 14).is_err());
    }

    #[test]
    fn resample_is_exact_for_bandlimited_data() {
        let p = 16;
        let f = |t: f64| Complex64::new((3.0 * t).cos(), (5.0 * t).sin()) + 0.25;
        let s: Vec<_> = (0..p).map(|i| f(2.0 * PI * i as f64 / p as f64)).collect();
        let fine = fourier_resample(&s, 64);
        for (i, v) in fine.iter().enumerate() {
            assert!((v - f(2.0 * PI * i as f64 / 64.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn hessenberg_solve_matches_dense() {
        let sys = BieSystem::discretize(pair(), 16).unwrap();
        let lambda = Complex64::new(0.3, 0.05);
        let rhs = sys.normal_derivative(Source::X1);
        let phi = sys.solve(lambda, &rhs).unwrap();
        let n = sys.mesh().len();
        let a = DMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { lambda } else { Complex64::new(0.0, 0.0) };
            d - sys.projected_matrix()[(i, j)]
        });
        let x = a.lu().solve(&to_dvector(&project_vector(&rhs, 16))).unwrap();
        for i in 0..n {
            assert!((x[i] - phi.values()[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn self_block_annihilates_fourier_modes() {
        let sys = BieSystem::discretize(DiskPair::new(1.0, 1e6).unwrap(), 256).unwrap();
        let p = 256;
        for m in [1, 2, 7, 40] {
            let density: Vec<f64> = (0..p).map(|i| (m as f64 * 2.0 * PI * i as f64 / p as f64).cos()).collect();
            for i in 0..p {
                let v: f64 = (0..p).map(|j| sys.matrix()[(i, j)] * density[j]).sum();
                assert!(v.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_rhs_gives_zero_density() {
        let sys = BieSystem::discretize(pair(), 32).unwrap();
        let phi = sys.solve(Complex64::new(2.0, 0.0), &vec![Complex64::new(0.0, 0.0); 64]).unwrap();
        assert!(phi.values().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn density_is_mirror_antisymmetric_for_x1() {
        let sys = BieSystem::discretize(pair(), 64).unwrap();
        let phi = sys.solve_densities(Complex64::new(10.0, 0.0), Source::X1).unwrap();
        let p = 64;
        // Mirror x1 ↦ -x1 sends node angle θ on B1 to π - θ on B2.
        for i in 0..p {
            let j = (p + p / 2 - i) % p;
            let a = phi.on(Disk::First)[i];
            let b = phi.on(Disk::Second)[j];
            assert!((a + b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn too_close_points_are_rejected() {
        let sys = BieSystem::discretize(pair(), 32).unwrap();
        let phi = sys.solve_densities(Complex64::new(2.0, 0.0), Source::X1).unwrap();
        assert!(sys.evaluate_field(&phi, [0.0, 3.0]).is_ok());
        assert!(matches!(sys.evaluate_field(&phi, [-0.05, 0.0]), Err(Error::TooClose { .. })));
    }

    #[test]
    fn single_layer_on_circle_matches_multipliers() {
        let sys = BieSystem::discretize(DiskPair::new(0.7, 1e8).unwrap(), 64).unwrap();
        let p = 64;
        let density: Vec<Complex64> =
            (0..2 * p).map(|i| if i < p { Complex64::from_polar(1.0, 3.0 * 2.0 * PI * i as f64 / p as f64) } else { 0.0.into() }).collect();
        let s = sys.single_layer_on_boundary(&density);
        for i in 0..p {
            assert!((s[i] - density[i] * (-0.7 / 6.0)).norm() < 1e-12);
        }
    }
}
