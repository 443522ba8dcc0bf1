use holeprob::ensemble::SectionSpace;
use holeprob::ratelab::{
    clopper_pearson, estimate_hole_probabilities, estimate_hole_probability, geometric_ladder, n1_rate, radial_bump, rate_report, witness_upper_bound, RateRow, Reference,
};
use holeprob::kernel::Discretization;
use holeprob::surface::{build_quadrature, HoleRegion, SurfaceId, SurfacePoint};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::Arc;

fn north() -> SurfacePoint {
    SurfacePoint::sphere(Complex64::new(0.0, 0.0))
}

#[test]
fn nested_holes_give_nested_counts_on_common_draws() {
    let m = build_quadrature(SurfaceId::Sphere, 8, None).unwrap();
    let g = m.geometry;
    let holes: Vec<HoleRegion> = [0.2, 0.4, 0.6].iter().map(|&r| HoleRegion::ball(&m, north(), r, Some(8)).unwrap()).collect();
    let refs: Vec<&HoleRegion> = holes.iter().collect();
    let sp = SectionSpace::new(&g, 3).unwrap();
    let l = estimate_hole_probabilities(&sp, &g, &refs, 5_000, 1).unwrap();
    assert!(l[0].hits >= l[1].hits && l[1].hits >= l[2].hits);
}

#[test]
fn empty_hole_has_probability_one() {
    let m = build_quadrature(SurfaceId::Sphere, 8, None).unwrap();
    let sp = SectionSpace::new(&m.geometry, 5).unwrap();
    let l = estimate_hole_probability(&sp, &m.geometry, &HoleRegion::empty(&m), 2_000, 0).unwrap();
    assert_eq!(l.p_hat, 1.0);
    assert_eq!(l.ci_high, 1.0);
    assert!(l.valid);
}

#[test]
fn estimates_are_deterministic_in_the_seed() {
    let m = build_quadrature(SurfaceId::Sphere, 8, None).unwrap();
    let d = HoleRegion::ball(&m, north(), 0.5, Some(8)).unwrap();
    let sp = SectionSpace::new(&m.geometry, 2).unwrap();
    let a = estimate_hole_probability(&sp, &m.geometry, &d, 3_000, 9).unwrap();
    let b = estimate_hole_probability(&sp, &m.geometry, &d, 3_000, 9).unwrap();
    assert_eq!(a, b);
}

#[test]
fn interval_width_shrinks_like_root_trials() {
    let m = build_quadrature(SurfaceId::Sphere, 8, None).unwrap();
    let d = HoleRegion::ball(&m, north(), 0.6, Some(8)).unwrap();
    let sp = SectionSpace::new(&m.geometry, 1).unwrap();
    let w = |t: u64| {
        let l = estimate_hole_probability(&sp, &m.geometry, &d, t, 2).unwrap();
        l.ci_high - l.ci_low
    };
    let ratio = w(40_000) / w(20_000);
    assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.03, "{ratio}");
}

#[test]
fn clopper_pearson_edges() {
    // zero hits: upper end 1 − (α/2)^{1/n}
    let (lo, hi) = clopper_pearson(0, 100, 0.05);
    assert_eq!(lo, 0.0);
    assert!((hi - (1.0 - 0.025f64.powf(0.01))).abs() < 1e-9);
    let (lo, hi) = clopper_pearson(100, 100, 0.05);
    assert!((lo - 0.025f64.powf(0.01)).abs() < 1e-9);
    assert_eq!(hi, 1.0);
}

#[test]
fn n1_rate_is_minus_log_complement() {
    assert!((n1_rate(0.3) + 0.7f64.ln()).abs() < 1e-15);
}

#[test]
fn ladder_is_geometric_with_exact_endpoints() {
    let r = geometric_ladder(0.05, 0.4, 8).unwrap();
    assert_eq!(r.len(), 8);
    assert_eq!(r[0], 0.05);
    assert_eq!(r[7], 0.4);
    for w in r.windows(3) {
        assert!((w[1] * w[1] - w[0] * w[2]).abs() < 1e-15);
    }
    assert!(geometric_ladder(0.4, 0.05, 3).is_err());
    assert!(geometric_ladder(0.1, 0.2, 0).is_err());
}

#[test]
fn rate_report_on_exact_ledgers() {
    // ledgers sitting on p = exp(−n²·I) give zero deviation everywhere
    let m = build_quadrature(SurfaceId::Sphere, 8, None).unwrap();
    let d = HoleRegion::ball(&m, north(), 0.3, Some(8)).unwrap();
    let sp = SectionSpace::new(&m.geometry, 1).unwrap();
    let base = estimate_hole_probability(&sp, &m.geometry, &d, 10, 0).unwrap();
    let i = 0.1;
    let ledgers: Vec<_> = [1usize, 2, 4, 8]
        .iter()
        .map(|&n| {
            let trials = 1u64 << 40;
            let p = (-((n * n) as f64) * i).exp();
            let hits = (p * trials as f64).round() as u64;
            let mut l = base.clone();
            l.n = n;
            l.trials = trials;
            l.hits = hits;
            l.failures = 0;
            l.p_hat = hits as f64 / trials as f64;
            let (lo, hi) = clopper_pearson(hits, trials, 0.05);
            l.ci_low = lo;
            l.ci_high = hi;
            l
        })
        .collect();
    let rep = rate_report(&ledgers, Reference { value: i, lower_bound: i });
    for r in &rep.rows {
        assert!((r.rate.unwrap() - i).abs() < 1e-6);
    }
    assert!(rep.trend_non_increasing);
    assert!(rep.band_c.unwrap().abs() < 1e-4);
    let row = RateRow::from_ledger(&ledgers[3]);
    assert!(row.in_fit && !row.one_sided);
}

#[test]
fn bump_witness_dominates_the_solver_value() {
    let m = Arc::new(build_quadrature(SurfaceId::Sphere, 32, None).unwrap());
    let h = HoleRegion::ball(&m, north(), 0.2, None).unwrap();
    let d = Arc::new(Discretization::new(m.clone(), h).unwrap());
    let w = witness_upper_bound(d.clone()).unwrap();
    let sol = holeprob::equilibrium::solve_equilibrium_i(d, &Default::default()).unwrap();
    assert!(w.grid_value >= sol.value);
    assert!(w.continuum_value >= 0.0);
    assert!(w.mass_defect < 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn interval_contains_the_estimate(trials in 1u64..5000, frac in 0.0f64..1.0) {
        let hits = (frac * trials as f64).floor() as u64;
        let (lo, hi) = clopper_pearson(hits, trials, 0.05);
        let p = hits as f64 / trials as f64;
        prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
    }

    #[test]
    fn bump_is_positive_on_its_collar(r in 0.03f64..0.3) {
        let b = radial_bump(&holeprob::surface::Geometry::Sphere, r).unwrap();
        prop_assert!(b.positive_on_collar());
        prop_assert!(b.ell >= 3);
    }
}
