//! Weighted Fekete configurations: minimisers of 𝒦^Q_m on (X∖D)^m, with the
//! separation and energy audits against the equilibrium solution.

use crate::equilibrium::EquilibriumSolution;
use crate::error::{Error, Result};
use crate::kernel::Discretization;
use crate::measures::{discrete_energy, fekete_objective, AtomicConfiguration, FieldInterpolator, GridMeasure, PotentialField, Value};
use crate::surface::{Element, Geometry, SurfaceModel};
use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeketeOptions {
    pub restarts: usize,
    /// Stop when every point's projected gradient (in units of the per-point
    /// field −U′ + Q) is below this.
    pub gtol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for FeketeOptions {
    fn default() -> Self {
        FeketeOptions { restarts: 16, gtol: 1e-4, max_iter: 20_000, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct FeketeResult {
    pub config: AtomicConfiguration,
    pub objective: f64,
    pub min_pair_separation: f64,
    pub energy: f64,
    pub max_potential: f64,
    pub restarts_used: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    pub iterations: usize,
}

type Loc = [f64; 3];

fn add(a: &Loc, b: &Loc, t: f64) -> Loc {
    [a[0] + t * b[0], a[1] + t * b[1], a[2] + t * b[2]]
}

fn dot(a: &Loc, b: &Loc) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Orthonormal tangent frame at x.
fn frame(g: &Geometry, x: &Loc) -> [Loc; 2] {
    match g {
        Geometry::Sphere => {
            let t = if x[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let e1 = g.tangent(x, t);
            let n = dot(&e1, &e1).sqrt();
            let e1 = [e1[0] / n, e1[1] / n, e1[2] / n];
            let e2 = [x[1] * e1[2] - x[2] * e1[1], x[2] * e1[0] - x[0] * e1[2], x[0] * e1[1] - x[1] * e1[0]];
            [e1, e2]
        }
        Geometry::Torus { .. } => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
    }
}

/// Grid spacing in loc units (chord on the sphere).
fn spacing(model: &SurfaceModel) -> f64 {
    match model.geometry {
        Geometry::Sphere => PI / model.resolution as f64,
        Geometry::Torus { tau, .. } => (1.0f64).min(tau.im) / model.resolution as f64,
    }
}

struct Problem<'a> {
    g: Geometry,
    c0: f64,
    disc: &'a Discretization,
    q: FieldInterpolator,
    delta: f64,
}

impl Problem<'_> {
    fn objective(&self, p: &[Loc]) -> Option<f64> {
        let m = p.len();
        let mut s = 0.0;
        for j in 0..m {
            for k in j + 1..m {
                let v = self.g.green_raw(&p[j], &p[k]);
                if !v.is_finite() {
                    return None;
                }
                s += 2.0 * (v + self.c0);
            }
        }
        let e = s / (m * m) as f64;
        let qs: f64 = p.iter().map(|x| self.q.value(x)).sum::<f64>() / m as f64;
        Some(-(m as f64) / (m as f64 - 1.0) * e + 2.0 * qs)
    }

    fn q_grad(&self, x: &Loc) -> Loc {
        let [e1, e2] = frame(&self.g, x);
        // small enough to resolve the bilinear interpolant's one-sided slopes
        let h = 1e-4 * self.delta;
        let d = |e: &Loc| {
            let a = self.q.value(&self.g.retract(x, &[e[0] * h, e[1] * h, e[2] * h]));
            let b = self.q.value(&self.g.retract(x, &[-e[0] * h, -e[1] * h, -e[2] * h]));
            (a - b) / (2.0 * h)
        };
        let (a, b) = (d(&e1), d(&e2));
        [a * e1[0] + b * e2[0], a * e1[1] + b * e2[1], a * e1[2] + b * e2[2]]
    }

    /// Per-point gradients of the field −U′_{δ_𝐩′} + Q (∇_k 𝒦 scaled by m/2),
    /// with inward normal components removed at the hole boundary.
    fn gradient(&self, p: &[Loc]) -> Vec<Loc> {
        let m = p.len();
        let mut acc = vec![[0.0; 3]; m];
        for j in 0..m {
            for k in j + 1..m {
                let v = self.g.green_grad_ambient(&p[j], &p[k]);
                acc[j] = add(&acc[j], &v, 1.0);
                acc[k] = add(&acc[k], &v, -1.0);
            }
        }
        let w = -1.0 / (m as f64 - 1.0);
        (0..m)
            .map(|k| {
                let s = add(&self.q_grad(&p[k]), &self.g.tangent(&p[k], acc[k]), w);
                match self.disc.hole.outward_normal(&p[k], &self.g, 1e-9) {
                    Some(n) if dot(&s, &n) > 0.0 => add(&s, &n, -dot(&s, &n)),
                    _ => s,
                }
            })
            .collect()
    }

    fn step(&self, p: &[Loc], dir: &[Loc], t: f64) -> Vec<Loc> {
        p.iter()
            .zip(dir)
            .map(|(x, d)| {
                let y = self.g.retract(x, &[-t * d[0], -t * d[1], -t * d[2]]);
                self.disc.hole.project_out(&y, &self.g)
            })
            .collect()
    }

    /// Re-kicks one point of every pair closer than 1e−10.
    fn guard(&self, p: &mut [Loc], rng: &mut ChaCha8Rng) {
        let m = p.len();
        for j in 0..m {
            for k in j + 1..m {
                let d = self.g.dist(&p[j], &p[k]);
                if d < 1e-10 {
                    let [e1, e2] = frame(&self.g, &p[k]);
                    let a = rng.random::<f64>() * 2.0 * PI;
                    let r = 1e3 * d.max(1e-12);
                    let v = add(&[e1[0] * r * a.cos(), e1[1] * r * a.cos(), e1[2] * r * a.cos()], &e2, r * a.sin());
                    log::info!("points {j} and {k} at distance {d:.1e}: re-kicking");
                    p[k] = self.disc.hole.project_out(&self.g.retract(&p[k], &v), &self.g);
                }
            }
        }
    }

    /// Projected gradient descent with Armijo backtracking.
    fn descend(&self, mut p: Vec<Loc>, opts: &FeketeOptions, rng: &mut ChaCha8Rng) -> (Vec<Loc>, f64, f64, bool, usize) {
        let m = p.len() as f64;
        let mut f = self.objective(&p).unwrap_or(f64::INFINITY);
        let mut t = self.delta;
        let mut gnorm = f64::INFINITY;
        let mut checkpoint = f;
        for it in 0..opts.max_iter {
            let dir = self.gradient(&p);
            gnorm = dir.iter().map(|d| dot(d, d).sqrt()).fold(0.0, f64::max);
            if gnorm < opts.gtol {
                return (p, f, gnorm, true, it);
            }
            let slope = 2.0 / m * dir.iter().map(|d| dot(d, d)).sum::<f64>();
            let mut accepted = false;
            t *= 2.0;
            for _ in 0..50 {
                let cand = self.step(&p, &dir, t);
                if let Some(fc) = self.objective(&cand) {
                    if fc <= f - 1e-4 * t * slope {
                        p = cand;
                        f = fc;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                // no descent left at machine precision
                return (p, f, gnorm, false, it);
            }
            self.guard(&mut p, rng);
            if it % 200 == 199 {
                // stalled on a kink of the interpolated field
                if checkpoint - f < 1e-13 * f.abs().max(1.0) {
                    return (p, f, gnorm, false, it + 1);
                }
                checkpoint = f;
            }
        }
        (p, f, gnorm, false, opts.max_iter)
    }
}

/// Draws a point of element `e`, uniform in its parameters.
fn sample_in(g: &Geometry, e: &Element, rng: &mut ChaCha8Rng) -> Loc {
    match e {
        Element::Cell(c) => {
            let s = c.lo[0] + rng.random::<f64>() * (c.hi[0] - c.lo[0]);
            let t = c.lo[1] + rng.random::<f64>() * (c.hi[1] - c.lo[1]);
            crate::surface::Cell::param_loc(g, s, t)
        }
        Element::Arc { circle, psi0, psi1 } => circle.at(g, psi0 + rng.random::<f64>() * (psi1 - psi0)),
    }
}

fn initial(disc: &Discretization, weights: &[f64], m: usize, rng: &mut ChaCha8Rng) -> Vec<Loc> {
    let g = disc.geometry();
    let pick = WeightedIndex::new(weights).expect("positive weights");
    (0..m)
        .map(|_| {
            let e = &disc.elements[pick.sample(rng)];
            disc.hole.project_out(&sample_in(g, e, rng), g)
        })
        .collect()
}

/// Multistart descent for an m-th Fekete set in the field Q (bilinear
/// interpolant of its grid values). Starts are drawn from `start` when given,
/// from ω restricted to X∖D otherwise.
pub fn solve_fekete(disc: &Discretization, q: &PotentialField, m: usize, start: Option<&GridMeasure>, opts: &FeketeOptions) -> Result<FeketeResult> {
    if m < 2 {
        return Err(Error::Domain("Fekete sets need m >= 2".into()));
    }
    let budget = disc.feasible.iter().filter(|&&f| f).count();
    if m > budget {
        return Err(Error::Domain(format!("m = {m} exceeds the node budget {budget}")));
    }
    if q.values.len() < disc.n_grid {
        return Err(Error::Domain("field does not cover the grid".into()));
    }
    let weights: Vec<f64> = match start {
        Some(mu) => mu.weights.clone(),
        None => (0..disc.len()).map(|i| if disc.feasible[i] { disc.omega[i] } else { 0.0 }).collect(),
    };
    let prob = Problem {
        g: *disc.geometry(),
        c0: disc.model.green_offset,
        disc,
        q: FieldInterpolator::new(&disc.model, q),
        delta: spacing(&disc.model),
    };
    let runs: Vec<_> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(r as u64);
            let p0 = initial(disc, &weights, m, &mut rng);
            prob.descend(p0, opts, &mut rng)
        })
        .collect();
    let converged = runs.iter().any(|r| r.3);
    let (best, _) = runs
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bf), (i, r)| if r.1 < bf { (i, r.1) } else { (bi, bf) });
    let (p, _, gnorm, conv, iters) = &runs[best];
    if !converged {
        log::warn!("no Fekete restart reached gtol {:.1e}; best gradient {gnorm:.2e}", opts.gtol);
    }
    let config = AtomicConfiguration::new(p.iter().map(|x| prob.g.loc_to_point(x)).collect())?;
    let locs = config.locs();
    let objective = match fekete_objective(&prob.g, prob.c0, &config, &prob.q)? {
        Value::Finite(v) => v,
        _ => return Err(Error::Inconsistent("Fekete configuration has coincident points".into())),
    };
    let energy = discrete_energy(&prob.g, prob.c0, &config)?.unwrap();
    Ok(FeketeResult {
        min_pair_separation: min_separation(&prob.g, &locs),
        energy,
        max_potential: max_atomic_potential(&disc.model, &config).0,
        objective,
        config,
        restarts_used: runs.len(),
        converged: *conv,
        gradient_norm: *gnorm,
        iterations: *iters,
    })
}

pub fn min_separation(g: &Geometry, locs: &[Loc]) -> f64 {
    let mut best = f64::INFINITY;
    for j in 0..locs.len() {
        for k in j + 1..locs.len() {
            best = best.min(g.dist(&locs[j], &locs[k]));
        }
    }
    best
}

/// max over X of U′_{δ_𝐩}: scan of the cell centres, then gradient ascent
/// from the best few. Returns the value and its location.
pub fn max_atomic_potential(model: &SurfaceModel, p: &AtomicConfiguration) -> (f64, Loc) {
    let g = model.geometry;
    let c0 = model.green_offset;
    let locs = p.locs();
    let m = locs.len() as f64;
    let u = |x: &Loc| -> f64 {
        let mut s = 0.0;
        for y in &locs {
            s += g.green_raw(x, y);
        }
        s / m + c0
    };
    let grad = |x: &Loc| -> Loc {
        let mut s = [0.0; 3];
        for y in &locs {
            s = add(&s, &g.green_grad(x, y), 1.0 / m);
        }
        s
    };
    let vals: Vec<(f64, usize)> = (0..model.len())
        .into_par_iter()
        .map(|i| {
            let x = model.node_loc(i);
            let v = u(&x);
            (if v.is_finite() { v } else { f64::NEG_INFINITY }, i)
        })
        .collect();
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[b].0.total_cmp(&vals[a].0).then(a.cmp(&b)));
    let h = spacing(model);
    order
        .iter()
        .take(8)
        .map(|&i| {
            let mut x = model.node_loc(i);
            let mut f = vals[i].0;
            let mut t = h;
            for _ in 0..200 {
                let d = grad(&x);
                let n2 = dot(&d, &d);
                if n2.sqrt() < 1e-12 {
                    break;
                }
                let mut moved = false;
                while t > 1e-14 {
                    let y = g.retract(&x, &[t * d[0], t * d[1], t * d[2]]);
                    let fy = u(&y);
                    if fy >= f + 1e-4 * t * n2 {
                        x = y;
                        f = fy;
                        moved = true;
                        t *= 2.0;
                        break;
                    }
                    t *= 0.5;
                }
                if !moved {
                    break;
                }
            }
            (f, x)
        })
        .fold((f64::NEG_INFINITY, [0.0; 3]), |a, b| if b.0 > a.0 { b } else { a })
}

/// Smallest plausible value of min separation × m^{1/γ}; configurations below it are flagged.
pub const SEPARATION_FLOOR: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub m: usize,
    pub min_separation: f64,
    /// min separation × m^{1/γ}
    pub scaled: f64,
    pub flagged: bool,
}

pub fn audit_separation(g: &Geometry, config: &AtomicConfiguration, gamma: f64) -> SeparationReport {
    let m = config.m();
    let s = min_separation(g, &config.locs());
    let scaled = s * (m as f64).powf(1.0 / gamma);
    SeparationReport { m, min_separation: s, scaled, flagged: scaled < SEPARATION_FLOOR }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationFit {
    /// inf over the sequence of min separation × m^{1/γ}
    pub c_q: f64,
    /// c_Q over the whole sequence divided by c_Q without the top octave
    pub top_octave_ratio: f64,
    pub stable: bool,
}

/// Fitted c_Q from reports ordered by m; stable when dropping the top octave
/// changes it by less than a factor 2.
pub fn fit_separation(reports: &[SeparationReport]) -> SeparationFit {
    let c_q = reports.iter().map(|r| r.scaled).fold(f64::INFINITY, f64::min);
    let top = reports.iter().map(|r| r.m).max().unwrap_or(0);
    let below = reports.iter().filter(|r| 2 * r.m <= top).map(|r| r.scaled).fold(f64::INFINITY, f64::min);
    let ratio = if below.is_finite() { c_q / below } else { 1.0 };
    SeparationFit { c_q, top_octave_ratio: ratio, stable: c_q > 0.0 && ratio > 0.5 && ratio < 2.0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBoundReport {
    pub m: usize,
    /// −ℰ_m(𝐟_m) − (−∫U′_{ν_D} dν_D)
    pub energy_gap: f64,
    /// max U′_{δ_𝐟} − max U′_{ν_D}
    pub potential_gap: f64,
    /// −ℰ_m(𝐟_m) + 2 max U′_{δ_𝐟}
    pub combined: f64,
    /// combined − min 𝓘_D
    pub excess: f64,
}

pub fn audit_energy_bounds(result: &FeketeResult, sol: &EquilibriumSolution) -> EnergyBoundReport {
    let e_nu: f64 = sol.measure.weights.iter().zip(&sol.potential.values).map(|(a, b)| a * b).sum();
    let combined = -result.energy + 2.0 * result.max_potential;
    EnergyBoundReport {
        m: result.config.m(),
        energy_gap: -result.energy + e_nu,
        potential_gap: result.max_potential - sol.potential.max_value,
        combined,
        excess: combined - sol.value,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBoundFit {
    /// max over m of the positive parts of both gaps × m / log m
    pub c_d: f64,
    /// log-log slope of |excess| against m
    pub slope: f64,
    pub slope_stderr: f64,
    /// |excess| non-increasing from octave to octave
    pub decreasing: bool,
}

pub fn fit_energy_bounds(reports: &[EnergyBoundReport]) -> EnergyBoundFit {
    let c_d = reports
        .iter()
        .map(|r| {
            let m = r.m as f64;
            r.energy_gap.max(r.potential_gap).max(0.0) * m / m.ln()
        })
        .fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| r.excess != 0.0)
        .map(|r| ((r.m as f64).ln(), r.excess.abs().ln()))
        .collect();
    let (slope, slope_stderr) = crate::stats::ols_slope(&pts);
    let decreasing = reports.windows(2).all(|w| w[1].excess.abs() <= w[0].excess.abs());
    EnergyBoundFit { c_d, slope, slope_stderr, decreasing }
}
