//! Pairwise Frank–Wolfe engines on the weight simplex.

use crate::kernel::Discretization;

/// Support of a weight vector with O(1) insert/remove.
pub(crate) struct ActiveSet {
    pub nodes: Vec<usize>,
    pos: Vec<usize>,
}

impl ActiveSet {
    pub fn from_weights(w: &[f64]) -> ActiveSet {
        let mut s = ActiveSet { nodes: vec![], pos: vec![usize::MAX; w.len()] };
        for (i, &x) in w.iter().enumerate() {
            if x > 0.0 {
                s.insert(i);
            }
        }
        s
    }

    pub fn insert(&mut self, i: usize) {
        if self.pos[i] == usize::MAX {
            self.pos[i] = self.nodes.len();
            self.nodes.push(i);
        }
    }

    pub fn remove(&mut self, i: usize) {
        let p = self.pos[i];
        if p == usize::MAX {
            return;
        }
        let last = *self.nodes.last().unwrap();
        self.nodes.swap_remove(p);
        if last != i {
            self.pos[last] = p;
        }
        self.pos[i] = usize::MAX;
    }
}

#[derive(Debug, Clone)]
pub(crate) struct EngineOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub refresh_every: usize,
    pub dual_damping: f64,
}

pub(crate) struct EngineResult {
    pub weights: Vec<f64>,
    pub dual: Option<Vec<f64>>,
    pub lower: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Move weight t from node `from` to node `to` and update u = Kμ.
fn transfer(disc: &Discretization, w: &mut [f64], set: &mut ActiveSet, u: &mut [f64], to: usize, from: usize, t: f64) {
    if t <= 0.0 {
        return;
    }
    w[to] += t;
    set.insert(to);
    if t >= w[from] {
        w[from] = 0.0;
        set.remove(from);
    } else {
        w[from] -= t;
    }
    disc.axpy_column(to, t, u);
    disc.axpy_column(from, -t, u);
}

fn curvature(disc: &Discretization, i: usize, j: usize) -> f64 {
    -(disc.entry(i, i) + disc.entry(j, j) - 2.0 * disc.entry(i, j))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimises 𝓙^Q(μ) = −μᵀKμ + 2 Q·μ over probability vectors on `feasible`.
/// The bracket is [J − gap, J] with gap = ∇J·μ − min_feasible ∇J.
pub(crate) fn minimize_j(disc: &Discretization, q: &[f64], feasible: &[bool], init: Vec<f64>, opts: &EngineOptions) -> EngineResult {
    let n = disc.len();
    let mut w = init;
    let mut set = ActiveSet::from_weights(&w);
    let mut u = disc.apply(&w);
    let mut best_lower = f64::NEG_INFINITY;
    let mut it = 0;
    let mut converged = false;
    while it < opts.max_iter {
        if it > 0 && it % opts.refresh_every == 0 {
            u = disc.apply(&w);
        }
        // half gradient h = Q − u
        let mut i_best = usize::MAX;
        let mut h_min = f64::INFINITY;
        for k in 0..n {
            if feasible[k] {
                let h = q[k] - u[k];
                if h < h_min {
                    h_min = h;
                    i_best = k;
                }
            }
        }
        let mut j_best = usize::MAX;
        let mut h_max = f64::NEG_INFINITY;
        for &k in &set.nodes {
            let h = q[k] - u[k];
            if h > h_max {
                h_max = h;
                j_best = k;
            }
        }
        let e = dot(&w, &u);
        let val = -e + 2.0 * dot(&w, q);
        let gap = 2.0 * (dot(&w, q) - e - h_min);
        best_lower = best_lower.max(val - gap);
        if gap <= opts.tol {
            converged = true;
            break;
        }
        if i_best == j_best {
            break;
        }
        let lin = 2.0 * (h_min - h_max);
        let quad = curvature(disc, i_best, j_best);
        let t = if quad > 1e-300 { (-lin / (2.0 * quad)).min(w[j_best]) } else { w[j_best] };
        transfer(disc, &mut w, &mut set, &mut u, i_best, j_best, t);
        it += 1;
    }
    EngineResult { weights: w, dual: None, lower: best_lower, iterations: it, converged }
}

/// Minimises 𝓘(μ) = −μᵀKμ + 2 max Kμ over probability vectors on `feasible`,
/// through the saddle function L(μ,σ) = −μᵀKμ + 2σᵀKμ with σ a probability
/// vector on all nodes. Each iteration takes one pairwise step in μ (exact line
/// search on L(·,σ)) and one damped pairwise ascent step in σ towards argmax Kμ.
///
/// Certified bracket: upper = 𝓘(μ); lower = μᵀKμ + 2 min_feasible (Kσ − Kμ),
/// a lower bound on min_μ L(μ,σ) by convexity, hence on min 𝓘.
pub(crate) fn minimize_i(disc: &Discretization, feasible: &[bool], init: Vec<f64>, dual_init: Vec<f64>, opts: &EngineOptions) -> EngineResult {
    let n = disc.len();
    let mut w = init;
    let mut s = dual_init;
    let mut wset = ActiveSet::from_weights(&w);
    let mut sset = ActiveSet::from_weights(&s);
    let mut u = disc.apply(&w);
    let mut v = disc.apply(&s);
    let mut best_lower = f64::NEG_INFINITY;
    let mut it = 0;
    let mut converged = false;
    while it < opts.max_iter {
        if it > 0 && it % opts.refresh_every == 0 {
            u = disc.apply(&w);
            v = disc.apply(&s);
        }
        let mut i_best = usize::MAX;
        let mut h_min = f64::INFINITY;
        let mut k_best = 0;
        let mut u_max = f64::NEG_INFINITY;
        for k in 0..n {
            if u[k] > u_max {
                u_max = u[k];
                k_best = k;
            }
            if feasible[k] {
                let h = v[k] - u[k];
                if h < h_min {
                    h_min = h;
                    i_best = k;
                }
            }
        }
        let e = dot(&w, &u);
        let upper = -e + 2.0 * u_max;
        best_lower = best_lower.max(e + 2.0 * h_min);
        if upper - best_lower <= opts.tol {
            converged = true;
            break;
        }
        // primal step
        let mut j_best = usize::MAX;
        let mut h_max = f64::NEG_INFINITY;
        for &k in &wset.nodes {
            let h = v[k] - u[k];
            if h > h_max {
                h_max = h;
                j_best = k;
            }
        }
        if i_best != j_best && h_min < h_max {
            let lin = 2.0 * (h_min - h_max);
            let quad = curvature(disc, i_best, j_best);
            let t = if quad > 1e-300 { (-lin / (2.0 * quad)).min(w[j_best]) } else { w[j_best] };
            transfer(disc, &mut w, &mut wset, &mut u, i_best, j_best, t);
        }
        // dual step towards the argmax found before the primal move
        let mut l_best = usize::MAX;
        let mut u_low = f64::INFINITY;
        for &k in &sset.nodes {
            if u[k] < u_low {
                u_low = u[k];
                l_best = k;
            }
        }
        let rise = u[k_best] - u_low;
        if l_best != usize::MAX && l_best != k_best && rise > 0.0 {
            let c = 2.0 * curvature(disc, k_best, l_best);
            let d = if c > 1e-300 { (opts.dual_damping * rise / c).min(s[l_best]) } else { s[l_best] };
            transfer(disc, &mut s, &mut sset, &mut v, k_best, l_best, d);
        }
        it += 1;
    }
    EngineResult { weights: w, dual: Some(s), lower: best_lower, iterations: it, converged }
}
