//! Grid measures, atomic configurations, their potentials and the energy functionals.

use crate::error::{Error, Result};
use crate::kernel::Discretization;
use crate::surface::{Geometry, SurfaceModel, SurfacePoint};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Extended real used for functionals that may diverge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Finite(f64),
    PlusInfinity,
    MinusInfinity,
}

impl Value {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Value::Finite(v) => Some(*v),
            _ => None,
        }
    }

    pub fn unwrap(&self) -> f64 {
        self.finite().expect("functional value is not finite")
    }
}

/// Node weights over grid cells and boundary arcs. A weight spreads uniformly
/// over its cell (resp. arc).
#[derive(Debug, Clone)]
pub struct GridMeasure {
    pub disc: Arc<Discretization>,
    pub weights: Vec<f64>,
}

impl GridMeasure {
    pub fn new(disc: Arc<Discretization>, weights: Vec<f64>) -> Result<GridMeasure> {
        if weights.len() != disc.len() {
            return Err(Error::Domain(format!("{} weights for {} nodes", weights.len(), disc.len())));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Domain("negative or NaN weight".into()));
        }
        Ok(GridMeasure { disc, weights })
    }

    /// ω itself (grid weights, nothing on the boundary).
    pub fn omega(disc: Arc<Discretization>) -> GridMeasure {
        let w = disc.omega.clone();
        GridMeasure { disc, weights: w }
    }

    /// ω restricted to the feasible grid nodes, renormalised.
    pub fn uniform_on_complement(disc: Arc<Discretization>) -> GridMeasure {
        let mut w: Vec<f64> = (0..disc.len()).map(|i| if disc.feasible[i] { disc.omega[i] } else { 0.0 }).collect();
        let s: f64 = w.iter().sum();
        if s > 0.0 {
            w.iter_mut().for_each(|x| *x /= s);
        }
        GridMeasure { disc, weights: w }
    }

    /// Uniform mass on the boundary nodes (falls back to ω when the hole is empty).
    pub fn boundary_concentrated(disc: Arc<Discretization>) -> GridMeasure {
        if disc.n_bdry == 0 {
            return Self::uniform_on_complement(disc);
        }
        let mut w = vec![0.0; disc.len()];
        let share = 1.0 / disc.n_bdry as f64;
        w[disc.n_grid..].iter_mut().for_each(|x| *x = share);
        GridMeasure { disc, weights: w }
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// True when no weight sits on a node inside the hole.
    pub fn supported_off_hole(&self) -> bool {
        self.weights.iter().zip(&self.disc.feasible).all(|(w, f)| *f || *w == 0.0)
    }

    pub fn mix(&self, other: &GridMeasure, t: f64) -> GridMeasure {
        let w = self.weights.iter().zip(&other.weights).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        GridMeasure { disc: self.disc.clone(), weights: w }
    }

    /// Total variation distance ½Σ|μ_i − ν_i|.
    pub fn total_variation(&self, other: &GridMeasure) -> f64 {
        0.5 * self.weights.iter().zip(&other.weights).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

/// An ordered m-tuple of points carrying the empirical measure (1/m)Σδ_{p_j}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicConfiguration {
    pub points: Vec<SurfacePoint>,
}

impl AtomicConfiguration {
    pub fn new(points: Vec<SurfacePoint>) -> Result<AtomicConfiguration> {
        if points.is_empty() {
            return Err(Error::Domain("a configuration needs at least one point".into()));
        }
        Ok(AtomicConfiguration { points })
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    pub fn locs(&self) -> Vec<[f64; 3]> {
        self.points.iter().map(|p| p.loc()).collect()
    }
}

/// Node values of a potential. `singular_nodes` lists nodes where the value is −∞
/// (an atom sitting exactly at a node); their stored value is excluded from max and mean.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialField {
    pub values: Vec<f64>,
    pub max_value: f64,
    pub argmax_index: usize,
    pub mean_under_omega: f64,
    pub singular_nodes: Vec<usize>,
}

impl PotentialField {
    pub fn from_values(values: Vec<f64>, omega: &[f64], singular_nodes: Vec<usize>) -> PotentialField {
        let mut max_value = f64::NEG_INFINITY;
        let mut argmax_index = 0;
        for (i, &v) in values.iter().enumerate() {
            if singular_nodes.contains(&i) {
                continue;
            }
            if v > max_value {
                max_value = v;
                argmax_index = i;
            }
        }
        let mean_under_omega = values
            .iter()
            .zip(omega)
            .enumerate()
            .filter(|(i, _)| !singular_nodes.contains(i))
            .map(|(_, (v, w))| v * w)
            .sum();
        PotentialField { values, max_value, argmax_index, mean_under_omega, singular_nodes }
    }

    /// Constant field c on the given node set.
    pub fn constant(c: f64, omega: &[f64]) -> PotentialField {
        Self::from_values(vec![c; omega.len()], omega, vec![])
    }

    pub fn shifted(&self, c: f64) -> PotentialField {
        let mut f = self.clone();
        f.values.iter_mut().for_each(|v| *v += c);
        f.max_value += c;
        f.mean_under_omega += c;
        f
    }
}

/// U′_μ at every node (cell/arc averages of ∫G(x,·)dμ).
pub fn potential_type_i(mu: &GridMeasure) -> PotentialField {
    let v = mu.disc.apply(&mu.weights);
    PotentialField::from_values(v, &mu.disc.omega, vec![])
}

/// U′_{δ_𝐩} at the node centres, −∞ where an atom sits on a node centre.
pub fn potential_type_i_atomic(disc: &Discretization, p: &AtomicConfiguration) -> PotentialField {
    let g = disc.geometry();
    let c0 = disc.model.green_offset;
    let locs = p.locs();
    let m = p.m() as f64;
    let mut singular = vec![];
    let values: Vec<f64> = (0..disc.len())
        .map(|i| {
            let x = disc.node_loc(i);
            let mut s = 0.0;
            for y in &locs {
                if g.dist(&x, y) < 1e-14 {
                    return f64::NAN;
                }
                s += g.green_raw(&x, y) + c0;
            }
            s / m
        })
        .collect();
    let values: Vec<f64> = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            if v.is_nan() {
                log::warn!("atom on node {i}: potential is -inf there");
                singular.push(i);
                f64::MIN
            } else {
                v
            }
        })
        .collect();
    PotentialField::from_values(values, &disc.omega, singular)
}

/// U_μ = U′_μ − max U′_μ.
pub fn potential_type_m(field: &PotentialField) -> PotentialField {
    let m = field.max_value;
    let values = field
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| if field.singular_nodes.contains(&i) { *v } else { v - m })
        .collect();
    PotentialField {
        values,
        max_value: 0.0,
        argmax_index: field.argmax_index,
        mean_under_omega: field.mean_under_omega - m,
        singular_nodes: field.singular_nodes.clone(),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// ∫∫ G dμ dμ with the diagonal cell terms taken as cell self-averages (finite
/// for grid measures, whose weights are spread over cells).
pub fn energy_offdiagonal(mu: &GridMeasure) -> f64 {
    let u = mu.disc.apply(&mu.weights);
    dot(&u, &mu.weights)
}

/// Off-diagonal energy of the empirical measure of 𝐩: pairs at coincident
/// locations lie on the diagonal and are left out.
pub fn energy_offdiagonal_atomic(g: &Geometry, c0: f64, p: &AtomicConfiguration) -> f64 {
    let locs = p.locs();
    let m = p.m() as f64;
    let mut s = 0.0;
    for (j, a) in locs.iter().enumerate() {
        for (k, b) in locs.iter().enumerate() {
            if j != k && g.dist(a, b) >= 1e-14 {
                s += g.green_raw(a, b) + c0;
            }
        }
    }
    s / (m * m)
}

/// ∫U′_μ dμ₂ (reciprocity: symmetric in the two measures).
pub fn mutual_energy(mu: &GridMeasure, nu: &GridMeasure) -> f64 {
    let u = mu.disc.apply(&mu.weights);
    dot(&u, &nu.weights)
}

/// 𝓘_D(μ) in both of its forms: (−∫U_μ ω − ∫U_μ dμ, −∫U′_μ dμ + 2 max U′_μ).
pub fn functional_i_forms(mu: &GridMeasure) -> Result<(f64, f64)> {
    if !mu.supported_off_hole() {
        return Err(Error::Precondition("measure charges the hole".into()));
    }
    let f = potential_type_i(mu);
    let e = dot(&f.values, &mu.weights);
    let m = f.max_value;
    let first = -(f.mean_under_omega - m) - (e - m * mu.mass());
    let second = -e + 2.0 * m;
    Ok((first, second))
}

pub fn functional_i(mu: &GridMeasure) -> Result<Value> {
    let (a, b) = functional_i_forms(mu)?;
    if (a - b).abs() > 1e-6 {
        return Err(Error::Inconsistent(format!("the two forms of I differ: {a} vs {b}")));
    }
    Ok(Value::Finite(b))
}

/// Any measure with an atom has infinite 𝓘_D.
pub fn functional_i_atomic(_p: &AtomicConfiguration) -> Value {
    Value::PlusInfinity
}

/// 𝓙^Q(μ) = −∫U′_μ dμ + 2∫Q dμ.
pub fn functional_j(mu: &GridMeasure, q: &PotentialField) -> Result<Value> {
    if !mu.supported_off_hole() {
        return Err(Error::Precondition("measure charges the hole".into()));
    }
    let e = energy_offdiagonal(mu);
    Ok(Value::Finite(-e + 2.0 * dot(&q.values, &mu.weights)))
}

/// ℰ_m(𝐩) = m⁻² Σ_{j≠k} G(p_j, p_k); −∞ when two points coincide.
pub fn discrete_energy(g: &Geometry, c0: f64, p: &AtomicConfiguration) -> Result<Value> {
    let m = p.m();
    if m < 2 {
        return Err(Error::Domain("discrete energy needs m >= 2".into()));
    }
    let locs = p.locs();
    let mut s = 0.0;
    for j in 0..m {
        for k in j + 1..m {
            if g.dist(&locs[j], &locs[k]) < 1e-14 {
                return Ok(Value::MinusInfinity);
            }
            s += 2.0 * (g.green_raw(&locs[j], &locs[k]) + c0);
        }
    }
    Ok(Value::Finite(s / (m * m) as f64))
}

/// 𝓕_m(𝐩) with ω₀ = ω, together with max U′_{δ_𝐩} over the node centres.
pub fn functional_f(disc: &Discretization, p: &AtomicConfiguration, q: Option<&AtomicConfiguration>) -> Result<(f64, f64)> {
    let genus = match disc.geometry() {
        Geometry::Sphere => 0,
        Geometry::Torus { .. } => 1,
    };
    match (genus, q) {
        (0, Some(_)) => return Err(Error::Domain("the sphere takes no extra points".into())),
        (1, None) => return Err(Error::Domain("the torus needs one extra point q".into())),
        (1, Some(q)) if q.m() != 1 => return Err(Error::Domain("the torus needs exactly one q".into())),
        _ => {}
    }
    let m = p.m() as f64;
    let up = potential_type_i_atomic(disc, p);
    let uq = q.map(|q| potential_type_i_atomic(disc, q));
    let ng = disc.n_grid;
    // log ‖e^V‖_{L^{2m}(ω)} = (1/2m) log Σ w_i e^{2m V_i}, via log-sum-exp
    let mut terms = Vec::with_capacity(ng);
    for i in 0..ng {
        if up.singular_nodes.contains(&i) {
            continue;
        }
        let mut v = up.values[i];
        if let Some(uq) = &uq {
            if uq.singular_nodes.contains(&i) {
                continue;
            }
            v += uq.values[i] / m;
        }
        terms.push(disc.omega[i].ln() + 2.0 * m * v);
    }
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln();
    let max_grid = (0..ng)
        .filter(|i| !up.singular_nodes.contains(i))
        .map(|i| up.values[i])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((lse / (2.0 * m), max_grid))
}

/// Continuous interpolant of a grid field in chart coordinates (bilinear).
#[derive(Debug, Clone)]
pub struct FieldInterpolator {
    geometry: Geometry,
    r: usize,
    grid: Vec<f64>,
    north: f64,
    south: f64,
}

impl FieldInterpolator {
    pub fn new(model: &SurfaceModel, field: &PotentialField) -> FieldInterpolator {
        let r = model.resolution;
        let ng = model.len();
        let grid = field.values[..ng].to_vec();
        let (north, south) = match model.geometry {
            Geometry::Sphere => {
                let w = 2 * r;
                let n = grid[..w].iter().sum::<f64>() / w as f64;
                let s = grid[ng - w..].iter().sum::<f64>() / w as f64;
                (n, s)
            }
            Geometry::Torus { .. } => (0.0, 0.0),
        };
        FieldInterpolator { geometry: model.geometry, r, grid, north, south }
    }

    fn row_value(&self, row: usize, cols: usize, t: f64) -> f64 {
        // periodic linear interpolation along a row; t in units of the column spacing, centres at k+½
        let x = t - 0.5;
        let k = x.floor();
        let f = x - k;
        let k0 = (k as i64).rem_euclid(cols as i64) as usize;
        let k1 = (k0 + 1) % cols;
        let base = row * cols;
        (1.0 - f) * self.grid[base + k0] + f * self.grid[base + k1]
    }

    pub fn value(&self, x: &[f64; 3]) -> f64 {
        let r = self.r;
        match self.geometry {
            Geometry::Sphere => {
                let w = 2 * r;
                let th = x[2].clamp(-1.0, 1.0).acos();
                let ph = x[1].atan2(x[0]).rem_euclid(2.0 * PI);
                let step = PI / r as f64;
                let tc = ph / step;
                let y = th / step - 0.5;
                if y < 0.0 {
                    let f = th / (0.5 * step);
                    return (1.0 - f) * self.north + f * self.row_value(0, w, tc);
                }
                if y > (r - 1) as f64 {
                    let f = (PI - th) / (0.5 * step);
                    return (1.0 - f) * self.south + f * self.row_value(r - 1, w, tc);
                }
                let b = (y.floor() as usize).min(r - 2);
                let f = y - b as f64;
                (1.0 - f) * self.row_value(b, w, tc) + f * self.row_value(b + 1, w, tc)
            }
            Geometry::Torus { tau, .. } => {
                let p = crate::surface::reduce_torus(num_complex::Complex64::new(x[0], x[1]), tau);
                let dy = tau.im / r as f64;
                let y = p.im / dy - 0.5;
                let cx = p.re * r as f64;
                if y < 0.0 {
                    // between the last row (shifted down by τ) and the first
                    let f = y + 1.0;
                    let lo = self.row_value(r - 1, r, cx + tau.re * r as f64);
                    return (1.0 - f) * lo + f * self.row_value(0, r, cx);
                }
                let b = y.floor() as usize;
                let f = y - b as f64;
                if b + 1 >= r {
                    let hi = self.row_value(0, r, cx - tau.re * r as f64);
                    return (1.0 - f) * self.row_value(r - 1, r, cx) + f * hi;
                }
                (1.0 - f) * self.row_value(b, r, cx) + f * self.row_value(b + 1, r, cx)
            }
        }
    }
}

/// 𝒦^Q_m(𝐩) = −(m/(m−1)) ℰ_m(𝐩) + 2∫Q dδ_𝐩; +∞ for coincident points.
pub fn fekete_objective(g: &Geometry, c0: f64, p: &AtomicConfiguration, q: &FieldInterpolator) -> Result<Value> {
    let m = p.m();
    let e = match discrete_energy(g, c0, p)? {
        Value::Finite(e) => e,
        _ => return Ok(Value::PlusInfinity),
    };
    let qs: f64 = p.locs().iter().map(|x| q.value(x)).sum::<f64>() / m as f64;
    Ok(Value::Finite(-(m as f64) / (m as f64 - 1.0) * e + 2.0 * qs))
}
