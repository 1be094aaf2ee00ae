//! Closed-form eigenpairs checked against the discretized operator.

use num_complex::Complex64;
use twodisk::oracle::BieSystem;
use twodisk::spectrum::{eigenvalue, leading_modes, NpMode, Sign};
use twodisk::{BipolarFrame, Disk, DiskPair};

fn setup(per_disk: usize) -> (BipolarFrame, BieSystem) {
    let pair = DiskPair::new(1.0, 0.1).unwrap();
    (BipolarFrame::new(pair).unwrap(), BieSystem::discretize(pair, per_disk).unwrap())
}

/// Samples a mode density at the mesh nodes.
fn sampled(system: &BieSystem, frame: &BipolarFrame, mode: &NpMode) -> Vec<Complex64> {
    let mesh = system.mesh();
    system.sample(|i| {
        let (_, eta) = frame.to_bipolar(mesh.point(i)).unwrap();
        mode.density(frame, eta).unwrap()[mesh.disk(i).index()]
    })
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[test]
fn leading_eigenvalues_match_closed_form() {
    let (frame, system) = setup(256);
    let numeric = system.numeric_spectrum(20);
    // Each closed-form value is doubly degenerate (cos and sin modes).
    for (chunk, n) in numeric.chunks(4).zip(1..) {
        let want = eigenvalue(n, Sign::Plus, &frame).unwrap();
        let mut sorted = chunk.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let expected = [want, want, -want, -want];
        for (got, want) in sorted.iter().zip(expected) {
            assert!((got - want).abs() < 1e-6, "n={n}: {got} vs {want}");
        }
    }
    for mu in &numeric {
        assert!(numeric.iter().any(|nu| (nu + mu).abs() < 1e-8), "no partner for {mu}");
    }
}

#[test]
fn eigen_relation_improves_under_refinement() {
    let frame = BipolarFrame::new(DiskPair::new(1.0, 0.1).unwrap()).unwrap();
    let mut previous: Option<f64> = None;
    for p in [32, 64, 128, 256] {
        let system = BieSystem::discretize(*frame.pair(), p).unwrap();
        let mut worst: f64 = 0.0;
        for mode in leading_modes(&frame, 4) {
            let psi = sampled(&system, &frame, &mode);
            // Real and imaginary parts are eigenfunctions on their own.
            for part in
                [psi.iter().map(|z| Complex64::new(z.re, 0.0)).collect::<Vec<_>>(), psi.iter().map(|z| Complex64::new(z.im, 0.0)).collect()]
            {
                let applied = system.apply(&part);
                let res: Vec<Complex64> = applied.iter().zip(&part).map(|(a, v)| a - v * mode.eigenvalue).collect();
                worst = worst.max(norm(&res) / norm(&part));
            }
        }
        if let Some(prev) = previous {
            assert!(worst < prev * 0.1 || worst < 1e-12, "P={p}: {worst} vs {prev}");
        }
        previous = Some(worst);
    }
    assert!(previous.unwrap() < 1e-10);
}

#[test]
fn modes_are_orthonormal_in_energy_product() {
    let (frame, system) = setup(256);
    let modes: Vec<NpMode> = (1..=3).flat_map(|k| [-k, k]).flat_map(|n| Sign::BOTH.map(|s| NpMode::new(n, s, &frame).unwrap())).collect();
    let samples: Vec<_> = modes.iter().map(|m| sampled(&system, &frame, m)).collect();
    for (i, a) in samples.iter().enumerate() {
        for (j, b) in samples.iter().enumerate() {
            let g = system.star_inner(a, b);
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((g - want).norm() < 1e-9, "{:?} {:?}: {g}", modes[i], modes[j]);
        }
    }
}

#[test]
fn mode_potential_matches_discrete_single_layer() {
    let (frame, system) = setup(256);
    let mesh = system.mesh();
    for mode in leading_modes(&frame, 3) {
        let psi = sampled(&system, &frame, &mode);
        let on_boundary = system.single_layer_on_boundary(&psi);
        for i in (0..mesh.len()).step_by(37) {
            let (zeta, eta) = frame.to_bipolar(mesh.point(i)).unwrap();
            let zeta = frame.boundary_zeta(mesh.disk(i)).copysign(zeta);
            let want = mode.potential(&frame, zeta, eta);
            assert!((on_boundary[i] - want).norm() < 1e-10, "{mode:?} node {i}");
        }
        let dens = twodisk::oracle::Densities::new(psi);
        for p in [[0.0, 0.3], [2.5, 1.0], [-1.0, -1.4], [0.5, 0.05], [8.0, -3.0]] {
            let a = system.evaluate_field(&dens, p).unwrap();
            let b = mode.potential_at(&frame, p).unwrap();
            assert!((a - b).norm() < 1e-9, "{mode:?} at {p:?}: {a} vs {b}");
        }
    }
}

#[test]
fn normal_derivative_jumps_by_the_density() {
    let frame = BipolarFrame::new(DiskPair::new(1.0, 0.1).unwrap()).unwrap();
    let pair = *frame.pair();
    for mode in leading_modes(&frame, 3) {
        for disk in Disk::BOTH {
            for theta in [0.3, 1.7, 2.9, -2.2] {
                let c = pair.center(disk);
                let nu = [f64::cos(theta), f64::sin(theta)];
                let x0 = [c[0] + nu[0], c[1] + nu[1]];
                let dn = |t: f64| {
                    let g = mode.potential_gradient_at(&frame, [x0[0] + t * nu[0], x0[1] + t * nu[1]]).unwrap();
                    g[0] * nu[0] + g[1] * nu[1]
                };
                let side = |sign: f64| dn(sign * 1e-7);
                let jump = side(1.0) - side(-1.0);
                let (_, eta) = frame.to_bipolar(x0).unwrap();
                let want = mode.density(&frame, eta).unwrap()[disk.index()];
                assert!((jump - want).norm() < 1e-5 * want.norm().max(1.0), "{mode:?} {disk:?} θ={theta}");
            }
        }
    }
}

#[test]
fn isolated_disks_have_flat_spectrum() {
    let system = BieSystem::discretize(DiskPair::new(1.0, 1e6).unwrap(), 64).unwrap();
    for mu in system.numeric_spectrum(10) {
        assert!(mu.abs() < 1e-9, "{mu}");
    }
}
