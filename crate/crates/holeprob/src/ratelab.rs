//! Monte-Carlo hole probabilities with exact binomial intervals, decay-rate
//! reports against min 𝓘_D, the small-radius sweep and the radial witness.

use crate::ensemble::{is_hole_event, SectionSpace};
use crate::equilibrium::{solve_equilibrium_i, EquilibriumSolution, Init, SolverOptions};
use crate::error::{Error, Result};
use crate::kernel::Discretization;
use crate::measures::{functional_i, GridMeasure};
use crate::quad::gauss;
use crate::stats::ols_slope;
use crate::surface::{Cell, Geometry, HoleKind, HoleRegion, SurfaceModel, SurfacePoint};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};
use std::f64::consts::PI;
use std::sync::Arc;

/// Largest tolerated fraction of discarded trials.
pub const MAX_FAILURE_RATE: f64 = 1e-4;
/// Rows with fewer hits are left out of the band fit.
pub const MIN_FIT_HITS: u64 = 10;

/// Hole as recorded in a ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleDescriptor {
    pub kind: HoleKind,
    pub center: [f64; 3],
    pub radius: f64,
    pub omega_mass: f64,
}

impl HoleDescriptor {
    pub fn of(d: &HoleRegion, g: &Geometry) -> HoleDescriptor {
        HoleDescriptor { kind: d.kind, center: d.center.loc(), radius: d.radius, omega_mass: d.omega_mass(g) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLedger {
    pub n: usize,
    pub hole: HoleDescriptor,
    pub trials: u64,
    pub hits: u64,
    pub failures: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub master_seed: u64,
    pub valid: bool,
}

impl TrialLedger {
    /// Trials that produced a zero set.
    pub fn accepted(&self) -> u64 {
        self.trials - self.failures
    }

    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }

    /// Errors when the run breached the failure budget.
    pub fn check(&self) -> Result<()> {
        if self.valid {
            Ok(())
        } else {
            Err(Error::Inconsistent(format!(
                "invalid run: {} of {} trials failed extraction (n = {})",
                self.failures, self.trials, self.n
            )))
        }
    }
}

/// Two-sided Clopper–Pearson interval at level 1 − alpha.
pub fn clopper_pearson(hits: u64, trials: u64, alpha: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let (x, n) = (hits as f64, trials as f64);
    let lo = if hits == 0 {
        0.0
    } else {
        Beta::new(x, n - x + 1.0).map(|b| b.inverse_cdf(alpha / 2.0)).unwrap_or(0.0)
    };
    let hi = if hits == trials {
        1.0
    } else {
        Beta::new(x + 1.0, n - x).map(|b| b.inverse_cdf(1.0 - alpha / 2.0)).unwrap_or(1.0)
    };
    (lo, hi)
}

fn ledger(n: usize, hole: HoleDescriptor, trials: u64, hits: u64, failures: u64, master_seed: u64) -> TrialLedger {
    let acc = trials - failures;
    let p_hat = if acc > 0 { hits as f64 / acc as f64 } else { f64::NAN };
    let (ci_low, ci_high) = clopper_pearson(hits, acc, 0.05);
    let valid = (failures as f64) < MAX_FAILURE_RATE * trials as f64;
    TrialLedger { n, hole, trials, hits, failures, p_hat, ci_low: ci_low.min(p_hat), ci_high: ci_high.max(p_hat), master_seed, valid }
}

/// Hole probabilities of several holes on the same draws (common random
/// numbers): trial t uses stream t of `master_seed` for every hole.
pub fn estimate_hole_probabilities(space: &SectionSpace, g: &Geometry, holes: &[&HoleRegion], trials: u64, master_seed: u64) -> Result<Vec<TrialLedger>> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let k = holes.len();
    let zero = || (vec![0u64; k], 0u64);
    let (hits, failures) = (0..trials)
        .into_par_iter()
        .fold(zero, |(mut h, mut f), t| {
            match space.sample(master_seed, t) {
                Ok(s) => {
                    for (c, d) in h.iter_mut().zip(holes) {
                        if is_hole_event(&s.zeros, d, g) {
                            *c += 1;
                        }
                    }
                }
                Err(_) => f += 1,
            }
            (h, f)
        })
        .reduce(zero, |(mut a, fa), (b, fb)| {
            a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            (a, fa + fb)
        });
    let out: Vec<TrialLedger> = holes
        .iter()
        .zip(hits)
        .map(|(d, h)| ledger(space.n(), HoleDescriptor::of(d, g), trials, h, failures, master_seed))
        .collect();
    if out.iter().any(|l| !l.valid) {
        log::warn!("extraction failures {failures}/{trials} exceed the budget at n = {}", space.n());
    }
    Ok(out)
}

/// 𝐏_n(H_{n,D}) by direct simulation; deterministic given the seed.
pub fn estimate_hole_probability(space: &SectionSpace, g: &Geometry, d: &HoleRegion, trials: u64, master_seed: u64) -> Result<TrialLedger> {
    Ok(estimate_hole_probabilities(space, g, &[d], trials, master_seed)?.remove(0))
}

/// Exact decay rate at n = 1, where a single zero is ω-distributed.
pub fn n1_rate(omega_mass: f64) -> f64 {
    -(1.0 - omega_mass).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// −log(p̂)/n², absent without hits.
    pub rate: Option<f64>,
    pub rate_low: f64,
    /// Absent when the interval reaches p = 0 (one-sided row).
    pub rate_high: Option<f64>,
    pub one_sided: bool,
    pub in_fit: bool,
}

impl RateRow {
    pub fn from_ledger(l: &TrialLedger) -> RateRow {
        let n2 = (l.n * l.n) as f64;
        let rate = (l.hits > 0).then(|| -l.p_hat.ln() / n2);
        let rate_high = (l.ci_low > 0.0).then(|| -l.ci_low.ln() / n2);
        RateRow {
            n: l.n,
            trials: l.accepted(),
            hits: l.hits,
            p_hat: l.p_hat,
            ci_low: l.ci_low,
            ci_high: l.ci_high,
            rate,
            rate_low: -l.ci_high.ln() / n2,
            rate_high,
            one_sided: l.hits == 0,
            in_fit: l.hits >= MIN_FIT_HITS,
        }
    }

    fn half_width(&self) -> f64 {
        self.rate_high.map(|h| 0.5 * (h - self.rate_low)).unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub value: f64,
    pub lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OctaveMean {
    pub octave: u32,
    pub deviation: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub rows: Vec<RateRow>,
    pub reference: Reference,
    /// Least-squares C in |rate − min𝓘| ≈ C·(log n)/n over fitted rows with n ≥ 2.
    pub band_c: Option<f64>,
    /// max over fitted rows of |rate − min𝓘|·n/log n.
    pub band_c_max: Option<f64>,
    pub octaves: Vec<OctaveMean>,
    /// Octave means of |rate − min𝓘| never rise by more than the statistical half-width.
    pub trend_non_increasing: bool,
    /// Last octave inside the fitted band (plus its half-width).
    pub consistent: bool,
    pub rsweep: Option<RSweep>,
}

/// Rates −(1/n²) log p̂ with interval propagation, band fit and octave trend.
pub fn rate_check(ledgers: &[TrialLedger], sol: &EquilibriumSolution) -> RateReport {
    rate_report(ledgers, Reference { value: sol.value, lower_bound: sol.lower_bound })
}

pub fn rate_report(ledgers: &[TrialLedger], reference: Reference) -> RateReport {
    let mut rows: Vec<RateRow> = ledgers.iter().map(RateRow::from_ledger).collect();
    rows.sort_by_key(|r| r.n);
    let dev = |r: &RateRow| (r.rate.unwrap() - reference.value).abs();
    let fit: Vec<&RateRow> = rows.iter().filter(|r| r.in_fit && r.rate.is_some()).collect();
    let band: Vec<(f64, f64)> = fit
        .iter()
        .filter(|r| r.n >= 2)
        .map(|r| ((r.n as f64).ln() / r.n as f64, dev(r)))
        .collect();
    let (band_c, band_c_max) = if band.is_empty() {
        (None, None)
    } else {
        let sxy: f64 = band.iter().map(|(x, y)| x * y).sum();
        let sxx: f64 = band.iter().map(|(x, _)| x * x).sum();
        let cmax = band.iter().map(|(x, y)| y / x).fold(0.0, f64::max);
        (Some(sxy / sxx), Some(cmax))
    };
    let octave_of = |r: &RateRow| (r.n as f64).log2().floor() as u32;
    let mut octaves: Vec<OctaveMean> = vec![];
    for r in &fit {
        let k = octave_of(r);
        if octaves.last().map(|o| o.octave) != Some(k) {
            let group: Vec<&&RateRow> = fit.iter().filter(|q| octave_of(q) == k).collect();
            let cnt = group.len() as f64;
            octaves.push(OctaveMean {
                octave: k,
                deviation: group.iter().map(|q| dev(q)).sum::<f64>() / cnt,
                half_width: group.iter().map(|q| q.half_width()).sum::<f64>() / cnt,
            });
        }
    }
    let trend_non_increasing = octaves.windows(2).all(|w| w[1].deviation <= w[0].deviation + w[1].half_width);
    let consistent = match (fit.last(), band_c) {
        (Some(r), Some(c)) if r.n >= 2 => dev(r) <= c * (r.n as f64).ln() / r.n as f64 + r.half_width(),
        _ => false,
    };
    RateReport { rows, reference, band_c, band_c_max, octaves, trend_non_increasing, consistent, rsweep: None }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RSweepRow {
    pub r: f64,
    pub value: f64,
    pub lower_bound: f64,
    pub duality_gap: f64,
    pub converged: bool,
    pub iterations: usize,
    pub witness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RSweep {
    pub rows: Vec<RSweepRow>,
    /// Slope of log min𝓘_r against log r over converged rows.
    pub slope: f64,
    pub slope_stderr: f64,
    /// min and max of min𝓘_r / r⁴.
    pub c: f64,
    pub big_c: f64,
    /// Radii whose solve did not converge (left out of the fit).
    pub excluded: Vec<f64>,
}

/// Geometric ladder of k radii from a to b.
pub fn geometric_ladder(a: f64, b: f64, k: usize) -> Result<Vec<f64>> {
    if !(a > 0.0 && b >= a) || k == 0 || (k == 1 && a != b) {
        return Err(Error::Domain(format!("bad ladder {a}:{b}:{k}")));
    }
    if k == 1 {
        return Ok(vec![a]);
    }
    let q = (b / a).ln() / (k - 1) as f64;
    Ok((0..k).map(|i| if i + 1 == k { b } else { a * (q * i as f64).exp() }).collect())
}

/// min 𝓘_r over a ladder of balls around `center`. Each solve is tightened
/// (warm-started) until its bracket is below `rel_tol` of the value, so small
/// radii are resolved relative to their own scale.
pub fn r_sweep(model: Arc<SurfaceModel>, center: SurfacePoint, radii: &[f64], opts: &SolverOptions, rel_tol: f64, with_witness: bool) -> Result<RSweep> {
    let mut rows = vec![];
    for &r in radii {
        let hole = HoleRegion::ball(&model, center, r, None)?;
        let disc = Arc::new(Discretization::new(model.clone(), hole)?);
        let mut o = opts.clone();
        let mut sol = solve_equilibrium_i(disc.clone(), &o)?;
        for _ in 0..4 {
            if !sol.converged || sol.duality_gap <= rel_tol * sol.value {
                break;
            }
            o.tol = 0.5 * rel_tol * sol.value;
            o.init = Init::Weights(sol.measure.weights.clone());
            sol = solve_equilibrium_i(disc.clone(), &o)?;
        }
        let converged = sol.converged && sol.duality_gap <= rel_tol * sol.value;
        let witness = if with_witness { Some(witness_upper_bound(disc.clone())?.grid_value) } else { None };
        rows.push(RSweepRow {
            r,
            value: sol.value,
            lower_bound: sol.lower_bound,
            duality_gap: sol.duality_gap,
            converged,
            iterations: sol.iterations,
            witness,
        });
    }
    let good: Vec<&RSweepRow> = rows.iter().filter(|r| r.converged && r.value > 0.0).collect();
    let pts: Vec<(f64, f64)> = good.iter().map(|r| (r.r.ln(), r.value.ln())).collect();
    let (slope, slope_stderr) = ols_slope(&pts);
    let scaled = good.iter().map(|r| r.value / r.r.powi(4));
    let c = scaled.clone().fold(f64::INFINITY, f64::min);
    let big_c = scaled.fold(f64::NEG_INFINITY, f64::max);
    let excluded = rows.iter().filter(|r| !r.converged).map(|r| r.r).collect();
    Ok(RSweep { rows, slope, slope_stderr, c, big_c, excluded })
}

/// Radial bump Φ: zero beyond ℓa, −β(s − ℓa)² on [a, ℓa], and the solution of
/// dd^cΦ = −ω inside the disc of chart radius a. Chart radius s is tan(dist)
/// on the sphere and dist on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialBump {
    pub a: f64,
    pub ell: usize,
    pub beta: f64,
    sphere: bool,
    /// ω density constant π/Im τ on the torus.
    c: f64,
}

impl RadialBump {
    /// Local potential with dd^c = ω, and its mass function.
    fn p_omega(&self, s: f64) -> f64 {
        if self.sphere {
            0.5 * s.mul_add(s, 1.0).ln()
        } else {
            0.5 * self.c * s * s
        }
    }

    fn m_omega(&self, s: f64) -> f64 {
        if self.sphere {
            s * s / (1.0 + s * s)
        } else {
            self.c * s * s
        }
    }

    fn dm_omega(&self, s: f64) -> f64 {
        if self.sphere {
            2.0 * s / (1.0 + s * s).powi(2)
        } else {
            2.0 * self.c * s
        }
    }

    fn outer(&self) -> f64 {
        self.ell as f64 * self.a
    }

    pub fn phi(&self, s: f64) -> f64 {
        let la = self.outer();
        if s >= la {
            0.0
        } else if s >= self.a {
            -self.beta * (s - la).powi(2)
        } else {
            self.p_omega(self.a) - self.p_omega(s) - self.beta * (la - self.a).powi(2)
        }
    }

    /// Mass of μ = dd^cΦ + ω on the circle s = a.
    pub fn ring_mass(&self) -> f64 {
        2.0 * self.beta * self.a * (self.outer() - self.a) + self.m_omega(self.a)
    }

    /// Density of the absolutely continuous part of μ relative to ω.
    pub fn density(&self, s: f64) -> f64 {
        let la = self.outer();
        if s >= la {
            1.0
        } else if s >= self.a {
            (2.0 * self.beta * (la - 2.0 * s) + self.dm_omega(s)) / self.dm_omega(s)
        } else {
            0.0
        }
    }

    /// μ(disc of chart radius s): 0 inside, then 2βs(ℓa − s) + ω-mass, then ω-mass.
    pub fn mass_function(&self, s: f64) -> f64 {
        if s < self.a {
            0.0
        } else if s < self.outer() {
            2.0 * self.beta * s * (self.outer() - s) + self.m_omega(s)
        } else {
            self.m_omega(s)
        }
    }

    /// 𝓘(μ) = −∫Φ dμ − ∫Φ ω by radial Gauss quadrature.
    pub fn continuum_value(&self) -> f64 {
        let (x, w) = gauss(40);
        let integrate = |lo: f64, hi: f64, f: &dyn Fn(f64) -> f64| -> f64 { (0..x.len()).map(|i| w[i] * f(lo + (hi - lo) * x[i])).sum::<f64>() * (hi - lo) };
        let la = self.outer();
        let against_omega = integrate(0.0, self.a, &|s| self.phi(s) * self.dm_omega(s)) + integrate(self.a, la, &|s| self.phi(s) * self.dm_omega(s));
        let against_mu = self.phi(self.a) * self.ring_mass() + integrate(self.a, la, &|s| self.phi(s) * self.density(s) * self.dm_omega(s));
        -against_mu - against_omega
    }

    pub fn positive_on_collar(&self) -> bool {
        let k = 2000;
        (0..=k).all(|i| {
            let s = self.a + (self.outer() - self.a) * i as f64 / k as f64;
            self.density(s) >= 0.0
        })
    }
}

/// Smallest ℓ ≥ 3 admitting a collar slope β with μ ≥ 0 and Φ ≤ 0.
pub fn radial_bump(g: &Geometry, r: f64) -> Result<RadialBump> {
    let (sphere, a, c, reach) = match g {
        Geometry::Sphere => (true, r.tan(), 0.0, f64::INFINITY),
        Geometry::Torus { tau, .. } => {
            let shortest = [1.0, tau.norm(), (*tau - 1.0).norm(), (*tau + 1.0).norm()].into_iter().fold(f64::INFINITY, f64::min);
            (false, r, PI / tau.im, 0.5 * shortest)
        }
    };
    for ell in 3..=64usize {
        let la = ell as f64 * a;
        if la >= reach {
            break;
        }
        let mut b = RadialBump { a, ell, beta: 0.0, sphere, c };
        // μ ≥ 0 on the collar: β(2s − ℓa) ≤ s·dm_ω(s)/(2s) wherever 2s > ℓa
        let k = 4000;
        let beta_max = (0..=k)
            .map(|i| a + (la - a) * i as f64 / k as f64)
            .filter(|s| 2.0 * s > la)
            .map(|s| b.dm_omega(s) / (2.0 * (2.0 * s - la)))
            .fold(f64::INFINITY, f64::min);
        b.beta = 0.98 * beta_max;
        let need = b.p_omega(a) / (la - a).powi(2);
        if b.beta >= need && b.positive_on_collar() {
            return Ok(b);
        }
    }
    Err(Error::Domain(format!("no admissible radial bump for radius {r}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessBound {
    pub radius: f64,
    pub bump: RadialBump,
    /// max |Φ| / r².
    pub alpha: f64,
    /// 𝓘 of the continuum witness measure.
    pub continuum_value: f64,
    /// 𝓘 of the grid witness: an upper bound on the discrete min 𝓘_D.
    pub grid_value: f64,
    /// |grid mass before normalisation − 1|.
    pub mass_defect: f64,
}

fn chart_radius(g: &Geometry, d: f64) -> f64 {
    match g {
        Geometry::Sphere => d.tan(),
        Geometry::Torus { .. } => d,
    }
}

fn cell_mass(bump: &RadialBump, g: &Geometry, cell: &Cell, omega: f64, center: &[f64; 3]) -> f64 {
    let d = g.dist(&cell.center_loc(g), center);
    let h = cell.diam(g);
    let s_lo = chart_radius(g, (d - h).max(0.0));
    let s_hi = if d + h < PI / 2.0 || !matches!(g, Geometry::Sphere) { chart_radius(g, d + h) } else { f64::INFINITY };
    if s_lo >= bump.outer() {
        return omega;
    }
    if s_hi < bump.a {
        return 0.0;
    }
    let k = 8;
    let mut acc = 0.0;
    let mut tot = 0.0;
    for i in 0..k {
        for j in 0..k {
            let t = |lo: f64, hi: f64, q: usize| lo + (hi - lo) * q as f64 / k as f64;
            let sub = Cell {
                lo: [t(cell.lo[0], cell.hi[0], i), t(cell.lo[1], cell.hi[1], j)],
                hi: [t(cell.lo[0], cell.hi[0], i + 1), t(cell.lo[1], cell.hi[1], j + 1)],
            };
            let m = sub.mass(g);
            let avg: f64 = sub.rule(g, 4).iter().map(|(x, w)| w * bump.density(chart_radius(g, g.dist(x, center)))).sum();
            acc += m * avg;
            tot += m;
        }
    }
    if tot > 0.0 {
        omega * acc / tot
    } else {
        0.0
    }
}

/// Upper bound on min 𝓘_D for a ball D from μ = dd^cΦ + ω with the radial bump
/// Φ. Grid cells get the cell average of μ; mass of cells meeting D and the
/// ring on ∂D move to the boundary nodes, so μ is feasible for the discrete
/// problem and its 𝓘 bounds the solver's minimum from above.
pub fn witness_upper_bound(disc: Arc<Discretization>) -> Result<WitnessBound> {
    let hole = &disc.hole;
    if !matches!(hole.kind, HoleKind::Cap | HoleKind::Disc) {
        return Err(Error::Domain("witness needs a single ball".into()));
    }
    let g = *disc.geometry();
    let bump = radial_bump(&g, hole.radius)?;
    let center = hole.center.loc();
    let ng = disc.n_grid;
    let nb = disc.n_bdry;
    if nb == 0 {
        return Err(Error::Domain("ball without boundary nodes".into()));
    }
    let mut w = vec![0.0; disc.len()];
    let arc_locs: Vec<[f64; 3]> = (ng..ng + nb).map(|j| disc.node_loc(j)).collect();
    for i in 0..ng {
        let m = cell_mass(&bump, &g, &disc.model.cells[i], disc.omega[i], &center);
        if m < 0.0 {
            return Err(Error::Certificate(format!("negative witness mass {m:.3e} in cell {i}")));
        }
        if disc.feasible[i] {
            w[i] = m;
        } else if m > 0.0 {
            let x = disc.node_loc(i);
            let k = (0..nb)
                .min_by(|&p, &q| g.dist(&x, &arc_locs[p]).total_cmp(&g.dist(&x, &arc_locs[q])))
                .unwrap();
            w[ng + k] += m;
        }
    }
    let ring = bump.ring_mass() / nb as f64;
    for x in &mut w[ng..] {
        *x += ring;
    }
    let mass: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= mass);
    let mu = GridMeasure::new(disc.clone(), w)?;
    let grid_value = functional_i(&mu)?.finite().ok_or_else(|| Error::Inconsistent("witness energy is infinite".into()))?;
    let alpha = -bump.phi(0.0) / (hole.radius * hole.radius);
    Ok(WitnessBound {
        radius: hole.radius,
        bump,
        alpha,
        continuum_value: bump.continuum_value(),
        grid_value,
        mass_defect: (mass - 1.0).abs(),
    })
}
