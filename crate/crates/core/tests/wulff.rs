use dilute_core::wulff::*;
use proptest::prelude::*;

fn lp(p: f64) -> impl Fn(&[f64]) -> f64 {
    move |n: &[f64]| n.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_tension_2d(values in prop::collection::vec(0.2f64..3.0, 16)) {
        let tau = TensionFunction::new(2, grid_2d(32).into_iter().take(16).collect(), values).unwrap();
        let w = wulff_construct(&tau).unwrap();
        prop_assert!((w.volume - 1.0).abs() < 1e-6);
        prop_assert!((Profile::Polygon(w.vertices.clone()).volume().unwrap() - 1.0).abs() < 1e-6);
        // Counterclockwise and convex.
        let k = w.vertices.len();
        for i in 0..k {
            let c = cross(&w.vertices[i], &w.vertices[(i + 1) % k], &w.vertices[(i + 2) % k]);
            prop_assert!(c > -1e-12);
        }
        // Never larger than τ on the grid, touching at some direction.
        let r = reciprocity_check(&tau, &w);
        prop_assert!(r.min_signed > -1e-9);
        prop_assert!(r.min_signed < 1e-9);
        for v in &w.vertices {
            prop_assert!(w.contains(v, 1e-9));
        }
    }

    #[test]
    fn homogeneity(c in 0.1f64..20.0, p in 1.0f64..6.0, dim in 2usize..=3) {
        let grid = if dim == 2 { grid_2d(24) } else { grid_3d(2) };
        let a = wulff_construct(&TensionFunction::from_fn(dim, grid.clone(), lp(p)).unwrap()).unwrap();
        let b = wulff_construct(&TensionFunction::from_fn(dim, grid, |n| c * lp(p)(n)).unwrap()).unwrap();
        prop_assert!((b.raw_volume / a.raw_volume - c.powi(dim as i32)).abs() < 1e-8 * c.powi(dim as i32));
        prop_assert!((b.scale * c - a.scale).abs() < 1e-9 * a.scale);
        prop_assert_eq!(a.vertices.len(), b.vertices.len());
        for x in &a.vertices {
            prop_assert!(b.vertices.iter().any(|y| x.iter().zip(y).all(|(s, t)| (s - t).abs() < 1e-9)));
        }
    }

    #[test]
    fn random_tension_3d(values in prop::collection::vec(0.5f64..2.0, 18)) {
        let tau = TensionFunction::new(3, grid_3d(2), values).unwrap();
        let w = wulff_construct(&tau).unwrap();
        prop_assert!((w.volume - 1.0).abs() < 1e-6);
        let poly = w.scaled(1.0);
        prop_assert!((poly.volume().unwrap() - 1.0).abs() < 1e-6);
        // Euler: V - E + F = 2.
        let edges: usize = w.faces.iter().map(|f| f.len()).sum::<usize>() / 2;
        prop_assert_eq!(w.vertices.len() + w.faces.len(), edges + 2);
        prop_assert!(reciprocity_check(&tau, &w).min_signed > -1e-9);
    }
}

#[test]
fn isotropic_disc_diameter() {
    let tau = TensionFunction::from_fn(2, grid_2d(64), |_| 1.0).unwrap();
    let w = wulff_construct(&tau).unwrap();
    let d = diam_inf(&w, 1.0).diam;
    assert!((d * std::f64::consts::PI.sqrt() / 2.0 - 1.0).abs() < 0.01, "{d}");
    // A regular 64-gon of unit apothem has area 64 tan(π/64).
    let raw = 64.0 * (std::f64::consts::PI / 64.0).tan();
    assert!((w.raw_volume - raw).abs() < 1e-9);
}

#[test]
fn l1_norm_gives_unit_cube() {
    for dim in [2, 3] {
        let w = wulff_construct(&TensionFunction::from_fn(dim, default_grid(dim), lp(1.0)).unwrap()).unwrap();
        assert_eq!(w.vertices.len(), 1 << dim);
        let err = w
            .vertices
            .iter()
            .flat_map(|v| v.iter().map(|x| (x.abs() - 0.5).abs()))
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{dim}: {err}");
        assert!((w.volume - 1.0).abs() < 1e-6);
    }
}

/// For a support function `τ` the crystal on a finite grid contains the
/// true one, and its excess support over a fixed fine grid shrinks when
/// the grid is refined.
fn excess(dim: usize, grid: Vec<Vec<f64>>, reference: &TensionFunction, f: &dyn Fn(&[f64]) -> f64) -> f64 {
    let w = wulff_construct(&TensionFunction::from_fn(dim, grid, f).unwrap()).unwrap();
    reciprocity_check(reference, &w).max_abs
}

#[test]
fn reciprocity_under_grid_doubling() {
    let taus: Vec<Box<dyn Fn(&[f64]) -> f64>> = vec![Box::new(|_: &[f64]| 1.0), Box::new(lp(3.0)), Box::new(lp(1.5))];
    for f in &taus {
        let reference = TensionFunction::from_fn(2, grid_2d(1024), f).unwrap();
        let r: Vec<f64> = [8, 16, 32, 64, 128].iter().map(|&n| excess(2, grid_2d(n), &reference, f)).collect();
        assert!(r.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{r:?}");
        let reference = TensionFunction::from_fn(3, grid_3d(12), f).unwrap();
        let r: Vec<f64> = [1, 2, 4].iter().map(|&k| excess(3, grid_3d(k), &reference, f)).collect();
        assert!(r.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{r:?}");
    }
    // On its own grid a support function is reproduced exactly.
    let tau = TensionFunction::from_fn(2, grid_2d(64), lp(3.0)).unwrap();
    let w = wulff_construct(&tau).unwrap();
    assert!(reciprocity_check(&tau, &w).max_abs < 1e-9);
}

#[test]
fn crystal_beats_rectangles() {
    let cases: Vec<(usize, Box<dyn Fn(&[f64]) -> f64>)> = vec![
        (2, Box::new(|_: &[f64]| 1.0)),
        (2, Box::new(|n: &[f64]| 2.0 * n[0].abs() + 0.5 * n[1].abs())),
        (2, Box::new(lp(3.0))),
        (3, Box::new(|n: &[f64]| n[0].abs() + 2.0 * n[1].abs() + 0.7 * n[2].abs())),
        (3, Box::new(|_: &[f64]| 1.0)),
    ];
    for (dim, f) in &cases {
        let tau = TensionFunction::from_fn(*dim, default_grid(*dim), f).unwrap();
        let w = wulff_construct(&tau).unwrap();
        let e = surface_energy(&w.scaled(1.0), &tau).unwrap();
        for r in [0.25f64, 0.5, 0.8, 1.0, 1.3, 2.0, 4.0] {
            let sides: Vec<f64> = if *dim == 2 { vec![r.sqrt(), 1.0 / r.sqrt()] } else { vec![r, 1.0, 1.0 / r] };
            let lo = vec![0.0; *dim];
            let rect = Profile::rectangle(&lo, &sides);
            assert!((rect.volume().unwrap() - 1.0).abs() < 1e-12);
            assert!(e <= surface_energy(&rect, &tau).unwrap() + 1e-9, "dim {dim} ratio {r}");
        }
    }
    // For τ = 2|n₁| + ½|n₂| the crystal is the rectangle [±2] × [±½],
    // rescaled.
    let tau = TensionFunction::from_fn(2, default_grid(2), |n| 2.0 * n[0].abs() + 0.5 * n[1].abs()).unwrap();
    let w = wulff_construct(&tau).unwrap();
    let d = diam_inf(&w, 1.0);
    let width: Vec<f64> = (0..2).map(|i| 1.0 - d.hi[i] + d.lo[i]).collect();
    assert!((width[0] / width[1] - 4.0).abs() < 1e-9, "{width:?}");
}

#[test]
fn energy_scales_with_dimension() {
    let tau = TensionFunction::from_fn(3, grid_3d(4), lp(2.0)).unwrap();
    let w = wulff_construct(&tau).unwrap();
    let e1 = surface_energy(&w.scaled(1.0), &tau).unwrap();
    let e2 = surface_energy(&w.scaled(0.5), &tau).unwrap();
    assert!((e2 / e1 - 0.25).abs() < 1e-9);
    // For the crystal, energy = d · volume (in raw units).
    let raw = Profile::Polyhedron { vertices: w.raw_vertices(), faces: w.faces.clone() };
    assert!((surface_energy(&raw, &tau).unwrap() - 3.0 * w.raw_volume).abs() < 1e-6 * w.raw_volume);
}

#[test]
fn symmetric_input_gives_symmetric_crystal() {
    let vals: Vec<f64> = (0..9).map(|k| 1.0 + 0.05 * k as f64).collect();
    let tau = TensionFunction::with_lattice_symmetry(2, octant_grid_2d(64), vals).unwrap();
    let w = wulff_construct(&tau).unwrap();
    for v in &w.vertices {
        for image in [vec![v[1], v[0]], vec![-v[0], v[1]], vec![v[0], -v[1]]] {
            assert!(w.vertices.iter().any(|u| (u[0] - image[0]).abs() < 1e-9 && (u[1] - image[1]).abs() < 1e-9));
        }
    }
}

#[test]
fn invalid_input() {
    assert!(matches!(TensionFunction::new(4, vec![vec![1.0; 4]], vec![1.0]), Err(WulffError::BadDimension(4))));
    assert!(matches!(TensionFunction::new(2, vec![vec![0.0, 0.0]], vec![1.0]), Err(WulffError::BadDirection(0))));
    assert!(matches!(TensionFunction::new(2, vec![vec![1.0, 0.0]], vec![-1.0]), Err(WulffError::BadValue(0))));
}
