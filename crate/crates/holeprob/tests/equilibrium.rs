use holeprob::equilibrium::{
    balayage_eta, capacity, classify_support, regularity_audit, solve_equilibrium_i, solve_equilibrium_j, upper_envelope, verify_frostman, Init, SolverOptions, SupportTag,
};
use holeprob::kernel::Discretization;
use holeprob::measures::{functional_i, PotentialField};
use holeprob::surface::{build_quadrature, HoleRegion, SurfaceId, SurfacePoint};
use num_complex::Complex64;
use std::sync::Arc;

fn cap_disc(res: usize, mass: f64) -> Arc<Discretization> {
    let m = Arc::new(build_quadrature(SurfaceId::Sphere, res, None).unwrap());
    let h = HoleRegion::ball(&m, SurfacePoint::sphere(Complex64::new(0.0, 0.0)), mass.sqrt().asin(), None).unwrap();
    Arc::new(Discretization::new(m, h).unwrap())
}

/// Radial oracle for a polar cap of ω-mass a: the minimiser is a ring of mass
/// b on the cap boundary plus ω beyond ω-mass b, where b balances the
/// potential at the pole against the bulk, and min I = ½(b + (1 − b)ln(1 − b)).
fn cap_oracle(a: f64) -> (f64, f64) {
    let f = |b: f64| -b * (1.0 - a).ln() - b * (b / a).ln() - (1.0 - b) * (1.0 - b).ln();
    let (mut lo, mut hi) = (a, 1.0 - 1e-12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) * f(lo) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let b = lo;
    (b, 0.5 * (b + (1.0 - b) * (1.0 - b).ln()))
}

#[test]
fn cap_oracle_frozen_values() {
    let (b, v) = cap_oracle(0.3);
    assert!((b - 0.710_327_048_738_879).abs() < 1e-12);
    assert!((v - 0.175_710_733_245_611).abs() < 1e-12);
}

#[test]
fn cap_oracle_small_cap_limit() {
    // b → e·a and min I → b²/4 as a → 0
    let (b, v) = cap_oracle(1e-6);
    assert!((b / 1e-6 - std::f64::consts::E).abs() < 1e-4);
    assert!((v / (b * b / 4.0) - 1.0).abs() < 1e-4);
}

#[test]
fn cap_solve_matches_radial_oracle() {
    let d = cap_disc(32, 0.3);
    let sol = solve_equilibrium_i(d, &SolverOptions::default()).unwrap();
    let (b, v) = cap_oracle(0.3);
    assert!(sol.converged);
    assert!(sol.lower_bound <= sol.value && sol.value - sol.lower_bound <= 1e-5);
    assert!((sol.value - v).abs() < 2e-3, "{} vs {v}", sol.value);
    let rep = classify_support(&sol);
    assert!((rep.boundary_layer_mass - b).abs() < 1e-2, "{} vs {b}", rep.boundary_layer_mass);
}

#[test]
fn cap_solution_is_a_certified_probability_measure_off_the_hole() {
    let d = cap_disc(16, 0.2);
    let sol = solve_equilibrium_i(d.clone(), &SolverOptions::default()).unwrap();
    assert!((sol.measure.mass() - 1.0).abs() < 1e-12);
    assert!(sol.measure.supported_off_hole());
    let cert = verify_frostman(&sol, &sol.field, 1e-3).unwrap();
    assert!(cert.holds(1e-3));
    assert!((functional_i(&sol.measure).unwrap().unwrap() - sol.value).abs() < 1e-9);
    let tags = classify_support(&sol).tags;
    for i in 0..d.len() {
        if d.in_hole[i] && !d.is_boundary(i) {
            assert_eq!(tags[i], SupportTag::Hole);
        }
    }
}

#[test]
fn minimum_grows_with_the_hole() {
    let v: Vec<f64> = [0.1, 0.2, 0.3]
        .iter()
        .map(|&a| solve_equilibrium_i(cap_disc(16, a), &SolverOptions::default()).unwrap().value)
        .collect();
    assert!(v[0] < v[1] && v[1] < v[2], "{v:?}");
}

#[test]
fn starting_measure_does_not_matter() {
    let d = cap_disc(16, 0.3);
    let a = solve_equilibrium_i(d.clone(), &SolverOptions::default()).unwrap();
    let opts = SolverOptions { init: Init::BoundaryConcentrated, ..SolverOptions::default() };
    let b = solve_equilibrium_i(d, &opts).unwrap();
    assert!((a.value - b.value).abs() <= 2e-5);
}

#[test]
fn weighted_problem_in_the_own_field_returns_the_minimiser() {
    let d = cap_disc(16, 0.3);
    let sol = solve_equilibrium_i(d.clone(), &SolverOptions::default()).unwrap();
    let j = solve_equilibrium_j(d, &sol.potential, &SolverOptions::default()).unwrap();
    let e: f64 = sol.measure.weights.iter().zip(&sol.potential.values).map(|(a, b)| a * b).sum();
    assert!((j.value - e).abs() < 1e-4, "{} vs {e}", j.value);
}

#[test]
fn empty_hole_gives_omega() {
    let m = Arc::new(build_quadrature(SurfaceId::Torus, 16, Some(Complex64::new(0.2, 1.1))).unwrap());
    let d = Arc::new(Discretization::new(m.clone(), HoleRegion::empty(&m)).unwrap());
    let sol = solve_equilibrium_i(d.clone(), &SolverOptions::default()).unwrap();
    assert!(sol.value.abs() < 1e-4);
    assert!(sol.measure.weights.iter().zip(&d.omega).all(|(a, b)| (a - b).abs() < 1e-3 * b));
}

#[test]
fn invalid_initial_weights_are_refused() {
    let d = cap_disc(16, 0.3);
    let w: Vec<f64> = d.omega.iter().chain(std::iter::repeat_n(&0.0, d.len() - d.n_grid)).cloned().collect();
    let opts = SolverOptions { init: Init::Weights(w), ..SolverOptions::default() };
    assert!(solve_equilibrium_i(d, &opts).is_err());
}

#[test]
fn capacity_of_a_point_is_zero_and_of_a_patch_is_in_unit_interval() {
    let d = cap_disc(16, 0.1);
    let opts = SolverOptions::default();
    assert_eq!(capacity(d.clone(), &[d.n_grid - 1], &opts).unwrap(), 0.0);
    let patch: Vec<usize> = (d.n_grid - 64..d.n_grid).collect();
    let c = capacity(d, &patch, &opts).unwrap();
    assert!(c > 0.0 && c < 1.0, "{c}");
}

#[test]
fn balayage_potential_flattens_on_its_set_under_refinement() {
    // the grid oscillation of U′_η over a fixed cap shrinks like the spacing
    let osc: Vec<f64> = [16usize, 32]
        .iter()
        .map(|&r| {
            let m = Arc::new(build_quadrature(SurfaceId::Sphere, r, None).unwrap());
            let d = Arc::new(Discretization::new(m.clone(), HoleRegion::empty(&m)).unwrap());
            let south = SurfacePoint::sphere_infinity().loc();
            let set: Vec<usize> = (0..d.n_grid).filter(|&i| d.geometry().dist(&d.node_loc(i), &south) < 0.4).collect();
            let (_, rep) = balayage_eta(d, &set, &SolverOptions::default(), 1e-2).unwrap();
            assert!(rep.min_excess >= -1e-9);
            rep.oscillation
        })
        .collect();
    assert!(osc[0] < 0.03 && osc[1] < 0.6 * osc[0], "{osc:?}");
}

#[test]
fn envelope_and_regularity_audit_run_on_a_cap() {
    let d = cap_disc(16, 0.3);
    let sol = solve_equilibrium_i(d.clone(), &SolverOptions::default()).unwrap();
    let zero = PotentialField::constant(0.0, &d.omega);
    let j = solve_equilibrium_j(d, &zero, &SolverOptions::default()).unwrap();
    assert!(upper_envelope(&j, &zero, 1e-3).is_ok());
    let rep = regularity_audit(&sol, 50, 3);
    assert!(rep.window_density.iter().all(|w| w.1.is_finite()));
}
