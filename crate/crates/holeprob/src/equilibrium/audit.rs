use super::EquilibriumSolution;
use crate::measures::potential_type_m;
use crate::surface::Element;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityReport {
    /// (window size, max over windows of ν(A)/length(A))
    pub window_density: Vec<(usize, f64)>,
    /// Largest window ratio: the empirical linear-mass constant.
    pub c_d: f64,
    /// max/min of the per-arc density ν_k/length_k.
    pub density_spread: f64,
    /// max |U(x) − U(y)| / dist(x,y)^{1/3} over the sampled pairs.
    pub holder_constant: f64,
    pub pairs: usize,
}

fn arc_length(e: &Element, g: &crate::surface::Geometry) -> f64 {
    match e {
        Element::Arc { circle, psi0, psi1 } => circle.length(g) * (psi1 - psi0) / (2.0 * std::f64::consts::PI),
        Element::Cell(_) => 0.0,
    }
}

/// Linear-mass bound of the boundary layer over sliding windows of 4–32 arcs,
/// and the empirical Hölder-1/3 constant of U_{ν_D} over random node pairs.
pub fn regularity_audit(sol: &EquilibriumSolution, pairs: usize, seed: u64) -> RegularityReport {
    let disc = &sol.measure.disc;
    let g = disc.geometry();
    let w = &sol.measure.weights;
    let mut window_density = vec![];
    let mut spread = 1.0;
    // arcs of each component are contiguous
    let comps: Vec<usize> = if disc.hole.components.is_empty() {
        vec![disc.n_bdry]
    } else {
        disc.hole.components.iter().map(|c| c.boundary_count).collect()
    };
    if disc.n_bdry > 0 {
        let lens: Vec<f64> = (disc.n_grid..disc.len()).map(|k| arc_length(&disc.elements[k], g)).collect();
        let dens: Vec<f64> = (0..disc.n_bdry).map(|k| w[disc.n_grid + k] / lens[k]).collect();
        let hi = dens.iter().cloned().fold(0.0, f64::max);
        let lo = dens.iter().cloned().fold(f64::INFINITY, f64::min);
        spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        for size in [4usize, 8, 16, 32] {
            let mut best: f64 = 0.0;
            let mut start = 0;
            for &n in &comps {
                if n >= size {
                    for s in 0..n {
                        let (mut m, mut l) = (0.0, 0.0);
                        for t in 0..size {
                            let k = start + (s + t) % n;
                            m += w[disc.n_grid + k];
                            l += lens[k];
                        }
                        best = best.max(m / l);
                    }
                }
                start += n;
            }
            window_density.push((size, best));
        }
    }
    let c_d = window_density.iter().map(|x| x.1).fold(0.0, f64::max);
    let u = potential_type_m(&sol.potential);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut holder: f64 = 0.0;
    let ng = disc.n_grid;
    for _ in 0..pairs {
        let i = rng.random_range(0..ng);
        let j = rng.random_range(0..ng);
        if i == j {
            continue;
        }
        let d = g.dist(&disc.node_loc(i), &disc.node_loc(j));
        if d > 0.0 {
            holder = holder.max((u.values[i] - u.values[j]).abs() / d.cbrt());
        }
    }
    RegularityReport { window_density, c_d, density_spread: spread, holder_constant: holder, pairs }
}
