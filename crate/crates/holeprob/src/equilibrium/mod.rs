//! Minimisation of 𝓘_D and 𝓙^Q over probability measures off the hole, with
//! Frostman certificates, capacity and balayage.

mod fw;

use crate::error::{Error, Result};
use crate::kernel::Discretization;
use crate::measures::{GridMeasure, PotentialField};
use fw::EngineOptions;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Init {
    UniformOnComplement,
    BoundaryConcentrated,
    Weights(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Target width of the certified bracket.
    pub tol: f64,
    pub max_iter: usize,
    pub init: Init,
    /// Iterations between exact recomputations of the potentials.
    pub refresh_every: usize,
    /// Step damping of the dual (argmax) measure in the 𝓘_D solver.
    pub dual_damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-5,
            max_iter: 2_000_000,
            init: Init::UniformOnComplement,
            refresh_every: 20_000,
            dual_damping: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportTag {
    Hole,
    BoundaryLayer,
    Bulk,
    Forbidden,
    Transition,
}

#[derive(Debug, Clone)]
pub struct EquilibriumSolution {
    pub measure: GridMeasure,
    /// Upper end of the certified bracket (the functional at `measure`).
    pub value: f64,
    pub lower_bound: f64,
    /// U′ of the minimiser.
    pub potential: PotentialField,
    /// External field the Frostman residuals refer to (Q itself for 𝓙^Q;
    /// U′ of the dual measure for 𝓘_D).
    pub field: PotentialField,
    pub frostman_constant: f64,
    pub kkt_residual_inequality: f64,
    pub kkt_residual_equality: f64,
    pub duality_gap: f64,
    pub support_classification: Vec<SupportTag>,
    pub converged: bool,
    pub iterations: usize,
    /// Measure on the argmax set of U′ (𝓘_D solves only).
    pub dual: Option<GridMeasure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrostmanCertificate {
    pub frostman_constant: f64,
    /// min over feasible nodes of (−U′ + Q − F); should be ≥ −tol.
    pub inequality_residual: f64,
    /// max over the numerical support of |−U′ + Q − F|; should be ≤ tol.
    pub equality_residual: f64,
}

impl FrostmanCertificate {
    pub fn holds(&self, tol: f64) -> bool {
        self.inequality_residual >= -tol && self.equality_residual <= tol
    }
}

fn engine_options(opts: &SolverOptions) -> EngineOptions {
    EngineOptions {
        tol: opts.tol,
        max_iter: opts.max_iter,
        refresh_every: opts.refresh_every.max(1),
        dual_damping: opts.dual_damping,
    }
}

fn initial_weights(disc: &Arc<Discretization>, feasible: &[bool], init: &Init) -> Result<Vec<f64>> {
    let mut w = match init {
        Init::UniformOnComplement => {
            let w: Vec<f64> = (0..disc.len()).map(|i| if feasible[i] { disc.omega[i] } else { 0.0 }).collect();
            if w.iter().sum::<f64>() > 0.0 {
                w
            } else {
                feasible.iter().map(|&f| if f { 1.0 } else { 0.0 }).collect()
            }
        }
        Init::BoundaryConcentrated => {
            let w: Vec<f64> = (0..disc.len()).map(|i| if feasible[i] && disc.is_boundary(i) { 1.0 } else { 0.0 }).collect();
            if w.iter().sum::<f64>() > 0.0 {
                w
            } else {
                return initial_weights(disc, feasible, &Init::UniformOnComplement);
            }
        }
        Init::Weights(w) => {
            if w.len() != disc.len() || w.iter().zip(feasible).any(|(x, f)| !(*x >= 0.0) || (*x > 0.0 && !f)) {
                return Err(Error::Domain("initial weights must be nonnegative on feasible nodes".into()));
            }
            w.clone()
        }
    };
    let s: f64 = w.iter().sum();
    if !(s > 0.0) {
        return Err(Error::Infeasible("no feasible node".into()));
    }
    w.iter_mut().for_each(|x| *x /= s);
    Ok(w)
}

/// Zero out weights below 1e−14 and renormalise.
fn prune(w: &mut [f64]) {
    for x in w.iter_mut() {
        if *x < 1e-14 {
            *x = 0.0;
        }
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
}

/// Residuals of the Frostman conditions for `measure` in the field `q`.
pub fn frostman_residuals(measure: &GridMeasure, potential: &PotentialField, q: &PotentialField) -> FrostmanCertificate {
    let disc = &measure.disc;
    let w = &measure.weights;
    let mass: f64 = w.iter().sum();
    let f: f64 = w.iter().zip(&q.values).zip(&potential.values).map(|((m, q), u)| m * (q - u)).sum::<f64>() / mass;
    let mut ineq = f64::INFINITY;
    let mut eq: f64 = 0.0;
    for i in 0..disc.len() {
        if !disc.feasible[i] {
            continue;
        }
        let r = q.values[i] - potential.values[i] - f;
        ineq = ineq.min(r);
        if w[i] > 1e-6 * mass {
            eq = eq.max(r.abs());
        }
    }
    FrostmanCertificate { frostman_constant: f, inequality_residual: ineq, equality_residual: eq }
}

fn assemble(
    disc: Arc<Discretization>,
    mut weights: Vec<f64>,
    dual: Option<Vec<f64>>,
    q: Option<&PotentialField>,
    lower: f64,
    converged: bool,
    iterations: usize,
) -> Result<EquilibriumSolution> {
    prune(&mut weights);
    let measure = GridMeasure::new(disc.clone(), weights)?;
    let u = disc.apply(&measure.weights);
    let potential = PotentialField::from_values(u, &disc.omega, vec![]);
    let e: f64 = measure.weights.iter().zip(&potential.values).map(|(a, b)| a * b).sum();
    let (value, field, dual) = match (q, dual) {
        (Some(q), _) => {
            let qm: f64 = measure.weights.iter().zip(&q.values).map(|(a, b)| a * b).sum();
            (-e + 2.0 * qm, q.clone(), None)
        }
        (None, Some(mut s)) => {
            prune(&mut s);
            let v = disc.apply(&s);
            let field = PotentialField::from_values(v, &disc.omega, vec![]);
            (-e + 2.0 * potential.max_value, field, Some(GridMeasure::new(disc.clone(), s)?))
        }
        (None, None) => unreachable!(),
    };
    let cert = frostman_residuals(&measure, &potential, &field);
    let mut sol = EquilibriumSolution {
        measure,
        value,
        lower_bound: lower.min(value),
        potential,
        field,
        frostman_constant: cert.frostman_constant,
        kkt_residual_inequality: cert.inequality_residual,
        kkt_residual_equality: cert.equality_residual,
        duality_gap: value - lower.min(value),
        support_classification: vec![],
        converged,
        iterations,
        dual,
    };
    sol.support_classification = classify_support(&sol).tags;
    if !converged {
        log::warn!("solver stopped after {iterations} iterations with gap {:.3e}", sol.duality_gap);
    }
    Ok(sol)
}

/// Minimiser ν_D of 𝓘_D over probability measures on the nodes off the hole
/// (grid cells outside D and the boundary arcs).
pub fn solve_equilibrium_i(disc: Arc<Discretization>, opts: &SolverOptions) -> Result<EquilibriumSolution> {
    let feasible = disc.feasible.clone();
    let w0 = initial_weights(&disc, &feasible, &opts.init)?;
    let s0 = initial_weights(&disc, &feasible, &Init::UniformOnComplement)?;
    let r = fw::minimize_i(&disc, &feasible, w0, s0, &engine_options(opts));
    assemble(disc, r.weights, r.dual, None, r.lower, r.converged, r.iterations)
}

/// Minimiser ν_Q of 𝓙^Q over probability measures off the hole.
pub fn solve_equilibrium_j(disc: Arc<Discretization>, q: &PotentialField, opts: &SolverOptions) -> Result<EquilibriumSolution> {
    let feasible = disc.feasible.clone();
    solve_j_on(disc, q, &feasible, opts)
}

fn solve_j_on(disc: Arc<Discretization>, q: &PotentialField, feasible: &[bool], opts: &SolverOptions) -> Result<EquilibriumSolution> {
    if q.values.len() != disc.len() {
        return Err(Error::Domain("field length does not match the node set".into()));
    }
    let w0 = initial_weights(&disc, feasible, &opts.init)?;
    let r = fw::minimize_j(&disc, &q.values, feasible, w0, &engine_options(opts));
    assemble(disc, r.weights, None, Some(q), r.lower, r.converged, r.iterations)
}

/// Certificate of Frostman's conditions; fails when a residual exceeds 10·tol.
pub fn verify_frostman(sol: &EquilibriumSolution, q: &PotentialField, tol: f64) -> Result<FrostmanCertificate> {
    let cert = frostman_residuals(&sol.measure, &sol.potential, q);
    if !cert.holds(10.0 * tol) {
        return Err(Error::Certificate(format!(
            "Frostman residuals (inequality {:.3e}, equality {:.3e}) exceed 10x tol {tol:.1e}",
            cert.inequality_residual, cert.equality_residual
        )));
    }
    Ok(cert)
}

/// U′_{ν_Q} + F_Q, checked to lie below Q off the hole and to be ω-subharmonic
/// (discrete Laplacian test) on nodes away from the support.
pub fn upper_envelope(sol: &EquilibriumSolution, q: &PotentialField, tol: f64) -> Result<PotentialField> {
    let disc = &sol.measure.disc;
    let cert = frostman_residuals(&sol.measure, &sol.potential, q);
    let vals: Vec<f64> = sol.potential.values.iter().map(|u| u + cert.frostman_constant).collect();
    for i in 0..disc.len() {
        if disc.feasible[i] && vals[i] > q.values[i] + tol {
            return Err(Error::Inconsistent(format!("envelope exceeds Q by {:.3e} at node {i}", vals[i] - q.values[i])));
        }
    }
    let env = PotentialField::from_values(vals, &disc.omega, vec![]);
    let lap = crate::equilibrium::laplacian::ddc_plus_omega(disc, &env.values[..disc.n_grid]);
    let worst = lap
        .iter()
        .enumerate()
        .filter(|(i, _)| laplacian::away_from_support(disc, &sol.measure.weights, *i))
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    if worst < -tol.max(1e-3) {
        return Err(Error::Inconsistent(format!("envelope fails ω-subharmonicity: {worst:.3e}")));
    }
    Ok(env)
}

/// ω-capacity exp(max_{μ∈𝓜(E)} ∫U′_μ dμ) of a node set E. A single node is
/// treated as a polar point (capacity 0).
pub fn capacity(disc: Arc<Discretization>, nodes: &[usize], opts: &SolverOptions) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::Domain("capacity of an empty set".into()));
    }
    if nodes.len() == 1 {
        return Ok(0.0);
    }
    let sol = balayage_solve(disc, nodes, opts)?;
    Ok((-sol.value).exp())
}

fn balayage_solve(disc: Arc<Discretization>, nodes: &[usize], opts: &SolverOptions) -> Result<EquilibriumSolution> {
    let mut mask = vec![false; disc.len()];
    for &i in nodes {
        if i >= disc.len() {
            return Err(Error::Domain(format!("node {i} out of range")));
        }
        mask[i] = true;
    }
    let zero = PotentialField::constant(0.0, &disc.omega);
    let mut o = opts.clone();
    if let Init::BoundaryConcentrated = o.init {
        o.init = Init::UniformOnComplement;
    }
    solve_j_on(disc, &zero, &mask, &o)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalayageReport {
    /// max − min of U′_η over the node set.
    pub oscillation: f64,
    /// min of U′_η over the node set minus its global minimum (≥ 0 up to tolerance).
    pub min_excess: f64,
}

/// η minimising −∫U′_μ dμ over 𝓜(Ē), with the audit that U′_η is constant on Ē
/// and attains its minimum there.
pub fn balayage_eta(disc: Arc<Discretization>, nodes: &[usize], opts: &SolverOptions, tol: f64) -> Result<(EquilibriumSolution, BalayageReport)> {
    let sol = balayage_solve(disc, nodes, opts)?;
    let u = &sol.potential.values;
    let on = nodes.iter().map(|&i| u[i]);
    let hi = on.clone().fold(f64::NEG_INFINITY, f64::max);
    let lo = on.fold(f64::INFINITY, f64::min);
    let global = u.iter().cloned().fold(f64::INFINITY, f64::min);
    let rep = BalayageReport { oscillation: hi - lo, min_excess: lo - global };
    if rep.oscillation > 10.0 * tol {
        return Err(Error::Certificate(format!("U' of the balayage varies by {:.3e} on the set", rep.oscillation)));
    }
    Ok((sol, rep))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupportReport {
    pub tags: Vec<SupportTag>,
    pub forbidden_area: f64,
    pub bulk_area: f64,
    pub boundary_layer_mass: f64,
}

/// Tags every node: hole, boundary layer, bulk (weight within 20% of ω),
/// forbidden (weight below 10⁻³ of ω), or transition.
pub fn classify_support(sol: &EquilibriumSolution) -> SupportReport {
    let disc = &sol.measure.disc;
    let w = &sol.measure.weights;
    let mut tags = Vec::with_capacity(disc.len());
    let (mut forbidden_area, mut bulk_area, mut boundary_layer_mass) = (0.0, 0.0, 0.0);
    for i in 0..disc.len() {
        let tag = if disc.is_boundary(i) {
            boundary_layer_mass += w[i];
            if w[i] > 1e-9 {
                SupportTag::BoundaryLayer
            } else {
                SupportTag::Forbidden
            }
        } else if disc.in_hole[i] {
            SupportTag::Hole
        } else {
            let o = disc.omega[i];
            if (w[i] - o).abs() <= 0.2 * o {
                bulk_area += o;
                SupportTag::Bulk
            } else if w[i] < 1e-3 * o {
                forbidden_area += o;
                SupportTag::Forbidden
            } else {
                SupportTag::Transition
            }
        };
        tags.push(tag);
    }
    SupportReport { tags, forbidden_area, bulk_area, boundary_layer_mass }
}

pub mod audit;
mod laplacian;
pub use audit::{regularity_audit, RegularityReport};
