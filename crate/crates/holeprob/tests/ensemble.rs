use holeprob::ensemble::{abel_sum, is_hole_event, polynomial_roots, separation_audit, torus_class_distance, trial_rng, SectionSpace};
use holeprob::measures::AtomicConfiguration;
use holeprob::surface::{build_quadrature, Geometry, HoleRegion, SurfaceId, SurfacePoint};
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::Rng;

fn tau() -> C {
    C::new(0.2, 1.1)
}

#[test]
fn roots_of_a_known_cubic() {
    // (z − 1)(z + 2)(z − i)
    let r = polynomial_roots(&[C::new(0.0, 2.0), C::new(-2.0, -1.0), C::new(1.0, -1.0), C::new(1.0, 0.0)]).unwrap();
    for want in [C::new(1.0, 0.0), C::new(-2.0, 0.0), C::new(0.0, 1.0)] {
        assert!(r.iter().any(|z| (z - want).norm() < 1e-12), "{r:?}");
    }
}

#[test]
fn vanishing_top_coefficient_puts_a_zero_at_infinity() {
    let sp = SectionSpace::new(&Geometry::Sphere, 2).unwrap();
    let z = sp.extract_zeros(&[C::new(-1.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0)]).unwrap();
    assert_eq!(z.m(), 2);
    assert_eq!(z.points.iter().filter(|p| p.at_infinity).count(), 1);
}

#[test]
fn zero_section_is_refused() {
    let sp = SectionSpace::new(&Geometry::Sphere, 3).unwrap();
    assert!(sp.extract_zeros(&[C::new(0.0, 0.0); 4]).is_err());
    assert!(sp.extract_zeros(&[C::new(1.0, 0.0); 3]).is_err());
}

#[test]
fn samples_are_reproducible_per_trial() {
    let sp = SectionSpace::new(&Geometry::Sphere, 5).unwrap();
    assert_eq!(sp.sample(3, 17).unwrap().coefficients, sp.sample(3, 17).unwrap().coefficients);
    assert_ne!(sp.sample(3, 17).unwrap().coefficients, sp.sample(3, 18).unwrap().coefficients);
    let mut a = trial_rng(3, 17);
    let mut b = trial_rng(3, 17);
    assert_eq!(a.random::<u64>(), b.random::<u64>());
}

#[test]
fn torus_zero_counts_and_abel_sums() {
    let g = Geometry::torus(tau());
    for n in [1usize, 2, 4, 6] {
        let sp = SectionSpace::new(&g, n).unwrap();
        let a0 = abel_sum(&sp.sample(1, 0).unwrap().zeros, tau());
        for t in 1..20 {
            let s = sp.sample(1, t).unwrap();
            assert_eq!(s.zeros.m(), n);
            assert!(torus_class_distance(abel_sum(&s.zeros, tau()), a0, tau()) < 1e-8);
        }
    }
}

#[test]
fn sphere_zeros_of_degree_one_are_uniform() {
    // one zero, ω-distributed: the fraction in the northern hemisphere is ½
    let sp = SectionSpace::new(&Geometry::Sphere, 1).unwrap();
    let north = (0..20_000).filter(|&t| sp.sample(2, t).unwrap().zeros.points[0].coord.norm() < 1.0).count();
    let p = north as f64 / 20_000.0;
    assert!((p - 0.5).abs() < 4.0 * (0.25f64 / 20_000.0).sqrt(), "{p}");
}

#[test]
fn empty_hole_is_always_a_hole_event() {
    let m = build_quadrature(SurfaceId::Sphere, 8, None).unwrap();
    let d = HoleRegion::empty(&m);
    let sp = SectionSpace::new(&m.geometry, 4).unwrap();
    assert!((0..100).all(|t| is_hole_event(&sp.sample(0, t).unwrap().zeros, &d, &m.geometry)));
}

#[test]
fn separation_audit_thresholds() {
    let g = Geometry::Sphere;
    let pts = AtomicConfiguration::new(vec![SurfacePoint::sphere(C::new(0.0, 0.0)), SurfacePoint::sphere_infinity()]).unwrap();
    let r = separation_audit(&pts, &g, 2);
    assert!(r.pairs_ok && r.satisfied);
    assert!((r.pair_threshold - 1.0 / 16.0).abs() < 1e-15);
    let close = AtomicConfiguration::new(vec![SurfacePoint::sphere(C::new(0.0, 0.0)), SurfacePoint::sphere(C::new(1e-3, 0.0))]).unwrap();
    assert!(!separation_audit(&close, &g, 2).pairs_ok);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn extracted_zeros_annihilate_the_polynomial(n in 1usize..12, seed in 0u64..1000) {
        let sp = SectionSpace::new(&Geometry::Sphere, n).unwrap();
        let s = sp.sample(seed, 0).unwrap();
        prop_assert_eq!(s.zeros.m(), n);
        let b: Vec<f64> = (0..=n).scan(1.0f64, |c, k| { let v = *c; *c *= (n - k) as f64 / (k + 1) as f64; Some(v.sqrt()) }).collect();
        for p in s.zeros.points.iter().filter(|p| !p.at_infinity) {
            let (mut v, mut scale) = (C::new(0.0, 0.0), 0.0);
            for k in 0..=n {
                let t = s.coefficients[k] * b[k] * p.coord.powu(k as u32);
                v += t;
                scale += t.norm();
            }
            prop_assert!(v.norm() <= 1e-9 * scale);
        }
    }

    #[test]
    fn torus_zero_count_equals_degree(n in 1usize..7, trial in 0u64..500) {
        let sp = SectionSpace::new(&Geometry::torus(tau()), n).unwrap();
        prop_assert_eq!(sp.sample(4, trial).unwrap().zeros.m(), n);
    }
}
