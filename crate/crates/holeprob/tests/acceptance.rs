//! Acceptance runner: one PASS/FAIL line per criterion.
//!
//! `ACCEPTANCE_ONLY=3,5` runs a subset; `ACCEPTANCE_STRICT=1` turns any
//! failure into a nonzero exit status.

use holeprob::equilibrium::{classify_support, frostman_residuals, solve_equilibrium_i, solve_equilibrium_j, EquilibriumSolution, SolverOptions, SupportTag};
use holeprob::ensemble::{abel_sum, torus_class_distance, SectionSpace};
use holeprob::fekete::{audit_energy_bounds, audit_separation, fit_energy_bounds, fit_separation, solve_fekete, FeketeOptions};
use holeprob::kernel::Discretization;
use holeprob::measures::{energy_offdiagonal, functional_i_forms, functional_j, potential_type_i, GridMeasure, PotentialField};
use holeprob::quad::gauss;
use holeprob::ratelab::{estimate_hole_probabilities, estimate_hole_probability, geometric_ladder, r_sweep, radial_bump, rate_report, Reference};
use holeprob::surface::{build_quadrature, green, Geometry, HoleRegion, SurfaceId, SurfaceModel, SurfacePoint};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

type Outcome = (bool, String);

fn tau() -> Complex64 {
    Complex64::new(0.2, 1.1)
}

fn model(id: SurfaceId, r: usize) -> Arc<SurfaceModel> {
    let t = (id == SurfaceId::Torus).then(tau);
    Arc::new(build_quadrature(id, r, t).unwrap())
}

fn north() -> SurfacePoint {
    SurfacePoint::sphere(Complex64::new(0.0, 0.0))
}

fn random_point(rng: &mut ChaCha8Rng, id: SurfaceId) -> SurfacePoint {
    match id {
        SurfaceId::Sphere => {
            let z: f64 = rng.random_range(-1.0..1.0);
            let ph: f64 = rng.random_range(0.0..2.0 * PI);
            let s = (1.0 - z * z).sqrt();
            SurfacePoint::from_unit([s * ph.cos(), s * ph.sin(), z])
        }
        SurfaceId::Torus => {
            let (a, b): (f64, f64) = (rng.random(), rng.random());
            SurfacePoint::torus(tau() * b + a, tau())
        }
    }
}

/// Cap of ω-mass 0.3 about the north pole, solved at two resolutions.
struct Caps {
    r64: OnceLock<EquilibriumSolution>,
    r128: OnceLock<EquilibriumSolution>,
}

fn cap_radius(mass: f64) -> f64 {
    mass.sqrt().asin()
}

fn solve_cap(res: usize) -> EquilibriumSolution {
    let m = model(SurfaceId::Sphere, res);
    let h = HoleRegion::ball(&m, north(), cap_radius(0.3), None).unwrap();
    let d = Arc::new(Discretization::new(m, h).unwrap());
    solve_equilibrium_i(d, &SolverOptions::default()).unwrap()
}

impl Caps {
    fn at(&self, res: usize) -> &EquilibriumSolution {
        match res {
            64 => self.r64.get_or_init(|| solve_cap(64)),
            _ => self.r128.get_or_init(|| solve_cap(128)),
        }
    }
}

fn c1_green() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut sym: f64 = 0.0;
    let mut mean: f64 = 0.0;
    let mut weak = vec![];
    for id in [SurfaceId::Sphere, SurfaceId::Torus] {
        let coarse = model(id, 16);
        for _ in 0..1000 {
            let (x, y) = (random_point(&mut rng, id), random_point(&mut rng, id));
            sym = sym.max((green(&coarse, &x, &y).unwrap() - green(&coarse, &y, &x).unwrap()).abs());
        }
        let m = model(id, 128);
        let g = m.geometry;
        let disc = Discretization::new(m.clone(), HoleRegion::empty(&m)).unwrap();
        for _ in 0..100 {
            let x = random_point(&mut rng, id).loc();
            mean = mean.max(disc.potential_at(&x, &disc.omega).abs());
        }
        // ∫G(x,y)φ(y)dω(y) = κφ(x) for a Laplace eigenfunction φ; the grid
        // tolerance is λh² with λ its eigenvalue and h the cell side
        let (phi, kappa, tol): (Box<dyn Fn(&[f64; 3]) -> f64>, f64, f64) = match g {
            Geometry::Sphere => (Box::new(|y: &[f64; 3]| y[2]), -0.25, 2.0 * (PI / 128.0).powi(2)),
            Geometry::Torus { tau, .. } => {
                let k = tau.re / tau.im;
                let lambda = 4.0 * PI * PI * (1.0 + k * k);
                (
                    Box::new(move |y: &[f64; 3]| (2.0 * PI * (y[0] - y[1] * k)).cos()),
                    -1.0 / (2.0 * PI * tau.im * (1.0 + k * k)),
                    lambda / (128.0f64 * 128.0),
                )
            }
        };
        let mu: Vec<f64> = m
            .cells
            .iter()
            .map(|c| c.mass(&g) * c.rule(&g, 4).iter().map(|(y, w)| w * phi(y)).sum::<f64>())
            .collect();
        let mut e: f64 = 0.0;
        for _ in 0..100 {
            let x = random_point(&mut rng, id).loc();
            e = e.max((disc.potential_at(&x, &mu) - kappa * phi(&x)).abs() / kappa.abs());
        }
        weak.push((id, e, tol));
    }
    let pass = sym <= 1e-12 && mean <= 1e-5 && weak.iter().all(|w| w.1 <= w.2);
    let wf: Vec<String> = weak.iter().map(|(id, e, t)| format!("{id:?} {e:.1e} (<={t:.1e})")).collect();
    (pass, format!("symmetry {sym:.1e} (<=1e-12), zero-mean {mean:.1e} (<=1e-5), weak-form relative {}", wf.join(", ")))
}

fn c2_trivial() -> Outcome {
    let m = model(SurfaceId::Sphere, 64);
    let d = Arc::new(Discretization::new(m.clone(), HoleRegion::empty(&m)).unwrap());
    let sol = solve_equilibrium_i(d.clone(), &SolverOptions::default()).unwrap();
    let tv = sol.measure.total_variation(&GridMeasure::omega(d));
    (sol.value.abs() <= 1e-4 && tv <= 0.01, format!("|min I| {:.2e} (<=1e-4), TV to omega {tv:.2e} (<=1e-2)", sol.value.abs()))
}

/// min I of a polar cap of ω-mass a from the radial balance of the ring
/// b on ∂D against the bulk beyond ω-mass b.
fn cap_oracle(a: f64) -> f64 {
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
    0.5 * (lo + (1.0 - lo) * (1.0 - lo).ln())
}

fn c3_frostman(caps: &Caps) -> Outcome {
    let sol = caps.at(128);
    let cert = frostman_residuals(&sol.measure, &sol.potential, &sol.field);
    let pass = sol.duality_gap <= 1e-5 && cert.inequality_residual >= -1e-3 && cert.equality_residual <= 1e-3;
    (
        pass,
        format!(
            "min I {:.6} (radial oracle {:.6}), gap {:.2e} (<=1e-5), inequality {:.2e} (>=-1e-3), equality {:.2e} (<=1e-3)",
            sol.value,
            cap_oracle(0.3),
            sol.duality_gap,
            cert.inequality_residual,
            cert.equality_residual
        ),
    )
}

/// Upper bound on the Fubini–Study W1 distance of two sphere grid measures:
/// transport along a quadtree over (band, longitude) blocks, each level paying
/// half the diameter of the parent block for its mass imbalance.
fn sphere_w1_upper(a: &GridMeasure, b: &GridMeasure) -> f64 {
    let disc = &a.disc;
    let r = disc.model.resolution;
    let step = PI / r as f64;
    let cell_of = |i: usize| -> (usize, usize) {
        if i < disc.n_grid {
            return (i / (2 * r), i % (2 * r));
        }
        let x = disc.node_loc(i);
        let th = x[2].clamp(-1.0, 1.0).acos();
        let ph = x[1].atan2(x[0]).rem_euclid(2.0 * PI);
        (((th / step) as usize).min(r - 1), ((ph / step) as usize) % (2 * r))
    };
    // round-sphere path along a meridian then a parallel, halved for FS
    let diam = |k: usize, band: usize, lon: usize| -> f64 {
        let b0 = band << k;
        let b1 = ((band + 1) << k).min(r);
        let l0 = lon << k;
        let l1 = ((lon + 1) << k).min(2 * r);
        let (t0, t1) = (b0 as f64 * step, b1 as f64 * step);
        let smax = if t0 <= PI / 2.0 && t1 >= PI / 2.0 { 1.0 } else { t0.sin().max(t1.sin()) };
        let dphi = ((l1 - l0) as f64 * step).min(PI);
        (((t1 - t0) + smax * dphi) / 2.0).min(PI / 2.0)
    };
    let mut total = 0.0;
    let mut diff: std::collections::HashMap<(usize, usize), f64> = std::collections::HashMap::new();
    for i in 0..disc.len() {
        let d = a.weights[i] - b.weights[i];
        let c = cell_of(i);
        if i >= disc.n_grid {
            total += 0.5 * diam(0, c.0, c.1) * d.abs();
        }
        *diff.entry(c).or_default() += d;
    }
    let mut k = 0;
    while (r >> k) > 1 || ((2 * r) >> k) > 1 {
        let mut up: std::collections::HashMap<(usize, usize), f64> = std::collections::HashMap::new();
        for (&(bd, ln), &d) in &diff {
            let parent = (bd >> 1, ln >> 1);
            total += 0.5 * diam(k + 1, parent.0, parent.1) * d.abs();
            *up.entry(parent).or_default() += d;
        }
        diff = up;
        k += 1;
    }
    total
}

fn c4_fixed_point(caps: &Caps) -> Outcome {
    let sol = caps.at(128);
    let disc = sol.measure.disc.clone();
    let q = &sol.potential;
    let j = solve_equilibrium_j(disc, q, &SolverOptions::default()).unwrap();
    let w1 = sphere_w1_upper(&j.measure, &sol.measure);
    let w_tol = 2.0 * j.duality_gap.max(sol.duality_gap).sqrt();
    let j_at_nu = functional_j(&sol.measure, q).unwrap().unwrap();
    let dv = (j.value - j_at_nu).abs();
    (w1 <= w_tol && dv <= 5e-4, format!("TV {:.2e}, W1 upper bound {w1:.2e} (<={w_tol:.2e}), value difference {dv:.2e} (<=5e-4)", j.measure.total_variation(&sol.measure)))
}

struct Signature {
    layer: f64,
    forbidden: f64,
    adjacent: bool,
}

fn signature(sol: &EquilibriumSolution) -> Signature {
    let rep = classify_support(sol);
    let disc = &sol.measure.disc;
    let g = disc.geometry();
    let c = north().loc();
    let h = PI / disc.model.resolution as f64;
    let rho = disc.hole.radius;
    let adjacent = (0..disc.n_grid).any(|i| rep.tags[i] == SupportTag::Forbidden && g.dist(&disc.node_loc(i), &c) - rho <= h);
    Signature { layer: rep.boundary_layer_mass, forbidden: rep.forbidden_area, adjacent }
}

fn c5_structure(caps: &Caps) -> Outcome {
    let a = signature(caps.at(64));
    let b = signature(caps.at(128));
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs());
    let pass = a.layer > 0.01
        && b.layer > 0.01
        && a.forbidden > 0.0
        && b.forbidden > 0.0
        && a.adjacent
        && b.adjacent
        && rel(a.layer, b.layer) <= 0.2
        && rel(a.forbidden, b.forbidden) <= 0.2;
    (
        pass,
        format!(
            "boundary layer {:.4} -> {:.4}, forbidden area {:.3e} -> {:.3e}, adjacent {}/{} (R=64 -> 128)",
            a.layer, b.layer, a.forbidden, b.forbidden, a.adjacent, b.adjacent
        ),
    )
}

fn c6_c7_fekete(caps: &Caps) -> (Outcome, Outcome) {
    let sol = caps.at(64);
    let disc = sol.measure.disc.clone();
    let mut energy = vec![];
    let mut sep = vec![];
    for m in [8usize, 16, 32, 64, 128] {
        let f = solve_fekete(&disc, &sol.potential, m, Some(&sol.measure), &FeketeOptions::default()).unwrap();
        energy.push(audit_energy_bounds(&f, sol));
        sep.push(audit_separation(disc.geometry(), &f.config, 1.0 / 3.0));
    }
    let lowest = energy.iter().map(|r| r.excess).fold(f64::INFINITY, f64::min);
    let fit = fit_energy_bounds(&energy);
    let excess: Vec<String> = energy.iter().map(|r| format!("{:.2e}", r.excess)).collect();
    let six = (
        lowest >= -1e-3 && (-1.3..=-0.7).contains(&fit.slope),
        format!("excess over min I [{}] (>=-1e-3), slope {:.3} ± {:.3} (in [-1.3,-0.7])", excess.join(", "), fit.slope, fit.slope_stderr),
    );
    let sfit = fit_separation(&sep);
    let scaled: Vec<String> = sep.iter().map(|r| format!("{:.3}", r.scaled)).collect();
    let seven = (
        sfit.stable,
        format!("sep*m^3 [{}], c_Q {:.3}, top-octave ratio {:.3} (in (0.5,2))", scaled.join(", "), sfit.c_q, sfit.top_octave_ratio),
    );
    (six, seven)
}

/// ω-mass of the cap of Fubini–Study radius r: polar angle up to 2r on the unit sphere.
fn cap_mass_by_quadrature(r: f64) -> f64 {
    let (x, w) = gauss(20);
    let b = 2.0 * r;
    x.iter().zip(w).map(|(x, w)| w * b * (b * x).sin()).sum::<f64>() / 2.0
}

fn c8_n1() -> Outcome {
    let m = model(SurfaceId::Sphere, 16);
    let g = m.geometry;
    let space = SectionSpace::new(&g, 1).unwrap();
    let mut pass = true;
    let mut parts = vec![];
    for w in [0.1, 0.3, 0.5] {
        let r = cap_radius(w);
        let wq = cap_mass_by_quadrature(r);
        let hole = HoleRegion::ball(&m, north(), r, None).unwrap();
        let l = estimate_hole_probability(&space, &g, &hole, 1_000_000, 8).unwrap();
        let width = l.ci_high - l.ci_low;
        let err = (l.p_hat - (1.0 - wq)).abs();
        pass &= err <= width;
        parts.push(format!("w={w}: p {:.5} vs {:.5}, |err| {err:.1e} (<= CI width {width:.1e})", l.p_hat, 1.0 - wq));
    }
    (pass, parts.join("; "))
}

fn c9_rate() -> Outcome {
    let r = 0.5;
    let m = model(SurfaceId::Sphere, 128);
    let g = m.geometry;
    let hole = HoleRegion::ball(&m, north(), r, None).unwrap();
    let d = Arc::new(Discretization::new(m.clone(), hole.clone()).unwrap());
    let sol = solve_equilibrium_i(d, &SolverOptions::default()).unwrap();
    let mut ledgers = vec![];
    for n in [1usize, 2, 4, 8] {
        let space = SectionSpace::new(&g, n).unwrap();
        ledgers.extend(estimate_hole_probabilities(&space, &g, &[&hole], 10_000_000, 9).unwrap());
    }
    let rep = rate_report(&ledgers, Reference { value: sol.value, lower_bound: sol.lower_bound });
    let devs: Vec<String> = rep.octaves.iter().map(|o| format!("{:.4}±{:.4}", o.deviation, o.half_width)).collect();
    let rates: Vec<String> = rep.rows.iter().map(|w| w.rate.map_or("none".into(), |x| format!("{x:.4}"))).collect();
    let c = rep.band_c.filter(|c| c.is_finite());
    (
        rep.trend_non_increasing && c.is_some(),
        format!(
            "min I {:.4} (radial oracle {:.4}), rates n=1,2,4,8 [{}], octave deviations [{}], non-increasing {}, band C {}",
            sol.value,
            cap_oracle(r.sin().powi(2)),
            rates.join(", "),
            devs.join(", "),
            rep.trend_non_increasing,
            c.map_or("none".into(), |c| format!("{c:.3}"))
        ),
    )
}

fn c10_r4() -> Outcome {
    let m = model(SurfaceId::Sphere, 128);
    let g = m.geometry;
    let radii = geometric_ladder(0.05, 0.4, 8).unwrap();
    let sw = r_sweep(m, north(), &radii, &SolverOptions::default(), 1e-2, true).unwrap();
    let cont = radii.iter().map(|&r| radial_bump(&g, r).unwrap().continuum_value() / r.powi(4)).fold(0.0, f64::max);
    let wit: Vec<f64> = sw.rows.iter().map(|r| r.witness.unwrap() / r.r.powi(4)).collect();
    let top = wit.iter().cloned().fold(0.0, f64::max);
    let above = sw.rows.iter().all(|r| r.witness.unwrap() >= r.value);
    let pass = (3.7..=4.3).contains(&sw.slope) && above && top <= 2.0 * cont && sw.excluded.is_empty();
    (
        pass,
        format!(
            "slope {:.3} ± {:.3} (in [3.7,4.3]), I/r^4 in [{:.3}, {:.3}], witness/r^4 max {top:.2} (<= 2 x continuum {cont:.2}), witness >= I at every r {above}",
            sw.slope, sw.slope_stderr, sw.c, sw.big_c
        ),
    )
}

fn c11_abel() -> Outcome {
    let t = tau();
    let g = Geometry::torus(t);
    let (mut spread, mut bad_counts, mut failures, mut total) = (0.0f64, 0usize, 0usize, 0usize);
    for n in [3usize, 5, 8] {
        let space = SectionSpace::new(&g, n).unwrap();
        let mut first = None;
        for trial in 0..100 {
            total += 1;
            match space.sample(11, trial) {
                Ok(s) => {
                    bad_counts += (s.zeros.m() != n) as usize;
                    let a = abel_sum(&s.zeros, t);
                    let a0 = *first.get_or_insert(a);
                    spread = spread.max(torus_class_distance(a, a0, t));
                }
                Err(_) => failures += 1,
            }
        }
    }
    let rate = failures as f64 / total as f64;
    (
        spread <= 1e-6 && bad_counts == 0 && rate < 1e-4,
        format!("Abel spread {spread:.1e} (<=1e-6), wrong counts {bad_counts}, failures {failures}/{total}"),
    )
}

fn c12_brute_force() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut err: f64 = 0.0;
    for id in [SurfaceId::Sphere, SurfaceId::Torus] {
        let m = model(id, 8);
        let center = random_point(&mut rng, id);
        let hole = HoleRegion::ball(&m, center, 0.3, Some(12)).unwrap();
        let d = Arc::new(Discretization::new(m, hole).unwrap());
        let w: Vec<f64> = (0..d.len()).map(|i| if d.feasible[i] { rng.random::<f64>() } else { 0.0 }).collect();
        let s: f64 = w.iter().sum();
        let mu = GridMeasure::new(d.clone(), w.iter().map(|x| x / s).collect()).unwrap();
        let nn = d.len();
        let u: Vec<f64> = (0..nn).map(|i| (0..nn).map(|j| d.entry(i, j) * mu.weights[j]).sum()).collect();
        let e: f64 = u.iter().zip(&mu.weights).map(|(a, b)| a * b).sum();
        let top = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let fast = potential_type_i(&mu);
        err = err.max(u.iter().zip(&fast.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        err = err.max((energy_offdiagonal(&mu) - e).abs());
        let (i1, i2) = functional_i_forms(&mu).unwrap();
        let mean: f64 = u.iter().zip(&d.omega).map(|(a, b)| a * b).sum();
        err = err.max((i2 - (-e + 2.0 * top)).abs());
        err = err.max((i1 - (-(mean - top) - (e - top))).abs());
        let q = PotentialField::from_values(u.iter().map(|x| 0.5 * x).collect(), &d.omega, vec![]);
        err = err.max((functional_j(&mu, &q).unwrap().unwrap() - 0.0).abs());
    }
    let (fek_err, fek_detail) = exhaustive_fekete();
    (err <= 1e-10 && fek_err, format!("direct-sum discrepancy {err:.1e} (<=1e-10); {fek_detail}"))
}

/// Unweighted Fekete problem on the sphere for m = 2, 3 against exhaustive
/// search over the cell centres of a 16-band grid.
fn exhaustive_fekete() -> (bool, String) {
    let m = model(SurfaceId::Sphere, 16);
    let g = m.geometry;
    let c0 = m.green_offset;
    let disc = Discretization::new(m.clone(), HoleRegion::empty(&m)).unwrap();
    let zero = PotentialField::constant(0.0, &disc.omega);
    let locs: Vec<[f64; 3]> = m.cells.iter().map(|c| c.center_loc(&g)).collect();
    let n = locs.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                k[i * n + j] = g.green_raw(&locs[i], &locs[j]) + c0;
            }
        }
    }
    let best2 = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| -k[i * n + j]).fold(f64::INFINITY, f64::min);
    let mut best3 = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let kij = k[i * n + j];
            for l in j + 1..n {
                best3 = best3.min(-(kij + k[i * n + l] + k[j * n + l]) / 3.0);
            }
        }
    }
    let h = PI / 32.0;
    let mut ok = true;
    let mut parts = vec![];
    for (mm, best) in [(2usize, best2), (3, best3)] {
        let f = solve_fekete(&disc, &zero, mm, None, &FeketeOptions::default()).unwrap();
        let diff = best - f.objective;
        ok &= diff >= -1e-6 && diff <= h * h;
        parts.push(format!("m={mm} solver {:.9} grid {:.9}", f.objective, best));
    }
    (ok, format!("Fekete vs exhaustive grid (-1e-6 <= grid - solver <= h^2={:.1e}): {}", h * h, parts.join(", ")))
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let want = |k: usize| only.as_ref().is_none_or(|o| o.contains(&k));
    let caps = Caps { r64: OnceLock::new(), r128: OnceLock::new() };
    let names = [
        "green kernel suite",
        "trivial minimizer",
        "Frostman certificates",
        "fixed point nu_Q = nu_D",
        "structure signatures",
        "Fekete bracket",
        "Fekete separation",
        "exact n = 1 law",
        "rate-band trend",
        "r^4 law",
        "torus Abel invariant",
        "brute-force equivalences",
    ];
    let mut results: Vec<(usize, Outcome, f64)> = vec![];
    let mut report = |k: usize, o: Outcome, t: f64| {
        println!("criterion {k:>2} [{}] {}: {} ({t:.0} s)", if o.0 { "PASS" } else { "FAIL" }, names[k - 1], o.1);
        results.push((k, o, t));
    };
    let timed = |f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        (o, t.elapsed().as_secs_f64())
    };
    macro_rules! run {
        ($k:expr, $e:expr) => {
            if want($k) {
                let (o, t) = timed(&mut || $e);
                report($k, o, t);
            }
        };
    }
    run!(1, c1_green());
    run!(2, c2_trivial());
    run!(3, c3_frostman(&caps));
    run!(4, c4_fixed_point(&caps));
    run!(5, c5_structure(&caps));
    if want(6) || want(7) {
        let t = Instant::now();
        let (six, seven) = c6_c7_fekete(&caps);
        let el = t.elapsed().as_secs_f64();
        if want(6) {
            report(6, six, el);
        }
        if want(7) {
            report(7, seven, 0.0);
        }
    }
    run!(8, c8_n1());
    run!(9, c9_rate());
    run!(10, c10_r4());
    run!(11, c11_abel());
    run!(12, c12_brute_force());
    let failed: Vec<usize> = results.iter().filter(|r| !r.1 .0).map(|r| r.0).collect();
    println!("acceptance: {}/{} passed{}", results.len() - failed.len(), results.len(), if failed.is_empty() { String::new() } else { format!(", failed {failed:?}") });
    if strict && !failed.is_empty() {
        std::process::exit(1);
    }
}
