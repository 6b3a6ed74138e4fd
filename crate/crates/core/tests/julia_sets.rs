use mrds::julia::{
    backward_orbit_cloud, clouds_for_all, repelling_fixed_points, roots, CloudParams, Sampler,
};
use mrds::{examples, Complex64, Polynomial64};

fn basilica() -> mrds::System64 {
    examples::single_map(Polynomial64::from_real(&[-1.0, 0.0, 1.0]))
}

fn escapes(mut z: Complex64, iterations: usize) -> bool {
    for _ in 0..iterations {
        z = z * z - 1.0;
        if z.norm_sqr() > 4.0 {
            return true;
        }
    }
    false
}

/// Both escaping and bounded orbits on circles of radius `eps`, `eps/2`, ...
/// around `z`, or at `z` itself.
fn straddles_boundary(z: Complex64, eps: f64) -> bool {
    let (mut out, mut inside) = (false, false);
    let mut note = |w: Complex64| {
        if escapes(w, 2000) {
            out = true;
        } else {
            inside = true;
        }
    };
    note(z);
    for k in 0..10 {
        let r = eps * 0.5f64.powi(k);
        for j in 0..64 {
            note(z + Complex64::from_polar(r, j as f64 * std::f64::consts::TAU / 64.0));
        }
    }
    out && inside
}

#[test]
fn basilica_cloud_lies_on_the_boundary_of_the_filled_set() {
    let s = basilica();
    for sampler in [Sampler::RandomChain, Sampler::PixelTree { pitch: None }] {
        let cloud = backward_orbit_cloud(&s, 0, CloudParams::new(4000, 5).with_sampler(sampler)).unwrap();
        assert!(cloud.len() >= 2000, "{sampler:?}: {} points", cloud.len());
        let on = cloud.points.iter().filter(|&&z| straddles_boundary(z, 0.01)).count();
        assert!(on as f64 >= 0.99 * cloud.len() as f64, "{sampler:?}: {on}/{}", cloud.len());
        assert!(cloud.points.iter().all(|z| z.norm() < 1.7));
    }
}

#[test]
fn clouds_are_seed_reproducible() {
    let s = examples::two_vertex::<f64>();
    let params = CloudParams::new(3000, 9);
    let a = clouds_for_all(&s, params).unwrap();
    let b = clouds_for_all(&s, params).unwrap();
    assert_eq!(a, b);
    let c = clouds_for_all(&s, CloudParams::new(3000, 10)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn quadratic_fixed_points_match_the_closed_form() {
    for c in [Complex64::new(-1.0, 0.0), Complex64::new(-0.12, 0.75), Complex64::new(0.3, -0.1)] {
        let s = examples::single_map(Polynomial64::new(vec![c, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]));
        let disc = (Complex64::new(1.0, 0.0) - 4.0 * c).sqrt();
        let closed = [(1.0 + disc) / 2.0, (1.0 - disc) / 2.0];
        let search = repelling_fixed_points(&s, 0, 1, 10, 1).unwrap();
        let expected: Vec<_> = closed.iter().filter(|z| (2.0 * **z).norm() > 1.0 + 1e-9).collect();
        assert_eq!(search.points.len(), expected.len(), "c = {c}");
        for z in expected {
            let best = search.points.iter().map(|p| (p.location - z).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-10, "c = {c}: {best}");
        }
        for p in &search.points {
            assert!((p.multiplier_modulus - (2.0 * p.location).norm()).abs() < 1e-9);
        }
    }
}

#[test]
fn superattracting_cycle_is_not_repelling() {
    // period-two points are 0, -1 (multiplier 0) and the two fixed points
    let search = repelling_fixed_points(&basilica(), 0, 2, 10, 1).unwrap();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert_eq!(search.points.len(), 4);
    for p in &search.points {
        let d = (p.location - phi).norm().min((p.location - (1.0 - phi)).norm());
        assert!(d < 1e-10, "{:?}", p.location);
    }
}

#[test]
fn preimages_solve_the_equation() {
    let s = examples::two_vertex::<f64>();
    let targets = [Complex64::new(0.3, -2.0), Complex64::new(50.0, 7.0), Complex64::new(-1e-6, 0.0)];
    for map in s.maps() {
        for rhs in targets {
            let found = roots(map, rhs).into_result().unwrap();
            assert_eq!(found.len(), map.degree());
            let scale = map.coeffs().iter().map(|c| c.norm()).fold(rhs.norm(), f64::max);
            for w in &found {
                let (value, _) = map.eval_with_derivative(*w);
                assert!((value - rhs).norm() <= 1e-8 * scale, "{w} -> {value} vs {rhs}");
            }
            // Vieta: roots sum to -a_{d-1}/a_d
            let c = map.coeffs();
            let d = map.degree();
            let sum: Complex64 = found.iter().sum();
            assert!((sum + c[d - 1] / c[d]).norm() < 1e-6);
        }
    }
}

#[test]
fn single_precision_cloud_tracks_double_precision() {
    let s32 = basilica().cast::<f32>().unwrap();
    let cloud = backward_orbit_cloud(&s32, 0, CloudParams::new(2000, 5)).unwrap();
    let on = cloud
        .points
        .iter()
        .filter(|z| straddles_boundary(Complex64::new(z.re as f64, z.im as f64), 0.01))
        .count();
    assert!(on as f64 >= 0.98 * cloud.len() as f64, "{on}/{}", cloud.len());
}
