//! Node set of a discretised problem (grid cells plus hole-boundary arcs) and
//! the cell-averaged Green kernel between nodes.

use crate::error::{Error, Result};
use crate::surface::{Element, Geometry, HoleRegion, SurfaceModel, SurfacePoint};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::sync::Arc;

/// Grid model + hole, with the kernel K_ij = average of G over element i × element j.
#[derive(Debug)]
pub struct Discretization {
    pub model: Arc<SurfaceModel>,
    pub hole: HoleRegion,
    pub n_grid: usize,
    pub n_bdry: usize,
    /// ω-weight of every node (zero on boundary nodes).
    pub omega: Vec<f64>,
    pub in_hole: Vec<bool>,
    pub feasible: Vec<bool>,
    pub elements: Vec<Element>,
    kernel: Kernel,
}

#[derive(Debug)]
enum GridTable {
    /// T[(bi·R + bj)·(R+1) + |Δlon|]
    Sphere { r: usize, t: Vec<f64> },
    /// T[(Δrow + R − 1)·(2R − 1) + Δcol + R − 1]
    Torus { r: usize, t: Vec<f64> },
}

#[derive(Debug)]
struct Kernel {
    grid: GridTable,
    /// boundary × grid, row-major by boundary node
    bg: Vec<f64>,
    /// grid × boundary, row-major by grid node
    gb: Vec<f64>,
    bb: Vec<f64>,
}

/// Double average of G_raw over two elements.
pub(crate) fn pair_average(g: &Geometry, a: &Element, b: &Element) -> f64 {
    let d = g.dist(&a.center_loc(g), &b.center_loc(g));
    let h = a.diam(g).max(b.diam(g));
    if d > 6.0 * h || d > 2.5 * h {
        let level = if d > 6.0 * h { 0 } else { 1 };
        let ra = a.rule_for(g, level);
        let rb = b.rule_for(g, level);
        let mut s = 0.0;
        for (x, wx) in &ra {
            let mut t = 0.0;
            for (y, wy) in &rb {
                t += wy * g.green_raw(x, y);
            }
            s += wx * t;
        }
        return s;
    }
    // outer rule on the smaller element; the potential of the larger one is the smoother integrand
    let one_way = |p: &Element, q: &Element| -> f64 { p.rule_for(g, 2).iter().map(|(x, w)| w * q.avg_green_raw(g, x)).sum() };
    let (ha, hb) = (a.diam(g), b.diam(g));
    if ha < 0.5 * hb {
        one_way(a, b)
    } else if hb < 0.5 * ha {
        one_way(b, a)
    } else {
        0.5 * (one_way(a, b) + one_way(b, a))
    }
}

impl Discretization {
    pub fn new(model: Arc<SurfaceModel>, hole: HoleRegion) -> Result<Discretization> {
        let g = model.geometry;
        let n_grid = model.len();
        let n_bdry = hole.arcs().len();
        let mut elements: Vec<Element> = model.cells.iter().map(|c| Element::Cell(*c)).collect();
        elements.extend_from_slice(hole.arcs());
        let n = n_grid + n_bdry;
        let mut omega = vec![0.0; n];
        let mut in_hole = vec![false; n];
        let mut feasible = vec![true; n];
        for j in 0..n_grid {
            omega[j] = model.weight(j);
            in_hole[j] = hole.contains_loc(&model.node_loc(j), &g);
            feasible[j] = !hole.meets_cell(&model.cells[j], &g);
        }
        if !feasible.iter().any(|&f| f) {
            return Err(Error::Infeasible("the hole covers every node".into()));
        }
        let c0 = model.green_offset;
        let r = model.resolution;
        let grid = match g {
            Geometry::Sphere => {
                let w = 2 * r;
                let mut t = vec![0.0; r * r * (r + 1)];
                let rows: Vec<(usize, Vec<f64>)> = (0..r)
                    .into_par_iter()
                    .map(|bi| {
                        let mut row = vec![0.0; r * (r + 1)];
                        for bj in bi..r {
                            let a = &elements[bi * w];
                            for d in 0..=r {
                                let b = &elements[bj * w + d];
                                row[bj * (r + 1) + d] = pair_average(&g, a, b) + c0;
                            }
                        }
                        (bi, row)
                    })
                    .collect();
                for (bi, row) in rows {
                    for bj in bi..r {
                        for d in 0..=r {
                            let v = row[bj * (r + 1) + d];
                            t[(bi * r + bj) * (r + 1) + d] = v;
                            t[(bj * r + bi) * (r + 1) + d] = v;
                        }
                    }
                }
                GridTable::Sphere { r, t }
            }
            Geometry::Torus { .. } => {
                let m = 2 * r - 1;
                let base = &elements[0];
                let t: Vec<f64> = (0..m * m)
                    .into_par_iter()
                    .map(|k| {
                        let (dr, dc) = (k / m, k % m);
                        let (dr, dc) = (dr as i64 - (r as i64 - 1), dc as i64 - (r as i64 - 1));
                        let Element::Cell(c) = base else { unreachable!() };
                        let (dx, dy) = (c.hi[0] - c.lo[0], c.hi[1] - c.lo[1]);
                        let mut moved = *c;
                        moved.lo = [c.lo[0] + dc as f64 * dx, c.lo[1] + dr as f64 * dy];
                        moved.hi = [c.hi[0] + dc as f64 * dx, c.hi[1] + dr as f64 * dy];
                        pair_average(&g, base, &Element::Cell(moved)) + c0
                    })
                    .collect();
                GridTable::Torus { r, t }
            }
        };
        let bg: Vec<f64> = (0..n_bdry)
            .into_par_iter()
            .flat_map_iter(|k| {
                let a = elements[n_grid + k];
                let els = &elements;
                (0..n_grid).map(move |j| pair_average(&g, &a, &els[j]) + c0)
            })
            .collect();
        let mut gb = vec![0.0; n_grid * n_bdry];
        for k in 0..n_bdry {
            for j in 0..n_grid {
                gb[j * n_bdry + k] = bg[k * n_grid + j];
            }
        }
        let mut bb = vec![0.0; n_bdry * n_bdry];
        let upper: Vec<(usize, usize, f64)> = (0..n_bdry)
            .into_par_iter()
            .flat_map_iter(|k| {
                let els = &elements;
                (k..n_bdry).map(move |l| (k, l, pair_average(&g, &els[n_grid + k], &els[n_grid + l]) + c0))
            })
            .collect();
        for (k, l, v) in upper {
            bb[k * n_bdry + l] = v;
            bb[l * n_bdry + k] = v;
        }
        Ok(Discretization {
            model,
            hole,
            n_grid,
            n_bdry,
            omega,
            in_hole,
            feasible,
            elements,
            kernel: Kernel { grid, bg, gb, bb },
        })
    }

    pub fn len(&self) -> usize {
        self.n_grid + self.n_bdry
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn geometry(&self) -> &Geometry {
        &self.model.geometry
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        i >= self.n_grid
    }

    pub fn node_loc(&self, i: usize) -> [f64; 3] {
        self.elements[i].center_loc(&self.model.geometry)
    }

    pub fn node_point(&self, i: usize) -> SurfacePoint {
        self.model.point(&self.node_loc(i))
    }

    /// Kernel entry K_ij.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (ng, nb) = (self.n_grid, self.n_bdry);
        let k = &self.kernel;
        match (i < ng, j < ng) {
            (true, true) => self.grid_entry(i, j),
            (false, true) => k.bg[(i - ng) * ng + j],
            (true, false) => k.gb[i * nb + (j - ng)],
            (false, false) => k.bb[(i - ng) * nb + (j - ng)],
        }
    }

    #[inline]
    fn grid_entry(&self, i: usize, j: usize) -> f64 {
        match &self.kernel.grid {
            GridTable::Sphere { r, t } => {
                let w = 2 * r;
                let (bi, a) = (i / w, i % w);
                let (bj, b) = (j / w, j % w);
                let d = a.abs_diff(b);
                let d = d.min(w - d);
                t[(bi * r + bj) * (r + 1) + d]
            }
            GridTable::Torus { r, t } => {
                let m = 2 * r - 1;
                let (bi, a) = (i / r, i % r);
                let (bj, b) = (j / r, j % r);
                t[(bi + r - 1 - bj) * m + (a + r - 1 - b)]
            }
        }
    }

    /// out += alpha · K[:, j]
    pub fn axpy_column(&self, j: usize, alpha: f64, out: &mut [f64]) {
        let (ng, nb) = (self.n_grid, self.n_bdry);
        let k = &self.kernel;
        if j < ng {
            match &k.grid {
                GridTable::Sphere { r, t } => {
                    let w = 2 * r;
                    let (bj, b) = (j / w, j % w);
                    for bi in 0..*r {
                        let row = &t[(bi * r + bj) * (r + 1)..(bi * r + bj + 1) * (r + 1)];
                        let o = &mut out[bi * w..(bi + 1) * w];
                        // longitudes a: distance |a−b| folded into [0, R]
                        for (a, v) in o.iter_mut().enumerate() {
                            let d = a.abs_diff(b);
                            let d = if d > *r { w - d } else { d };
                            *v += alpha * row[d];
                        }
                    }
                }
                GridTable::Torus { r, t } => {
                    let m = 2 * r - 1;
                    let (bj, b) = (j / r, j % r);
                    for bi in 0..*r {
                        let base = (bi + r - 1 - bj) * m + r - 1 - b;
                        let row = &t[base..base + r];
                        for (v, kv) in out[bi * r..(bi + 1) * r].iter_mut().zip(row) {
                            *v += alpha * kv;
                        }
                    }
                }
            }
            let col = &k.gb[j * nb..(j + 1) * nb];
            for (v, kv) in out[ng..].iter_mut().zip(col) {
                *v += alpha * kv;
            }
        } else {
            let l = j - ng;
            let row = &k.bg[l * ng..(l + 1) * ng];
            for (v, kv) in out[..ng].iter_mut().zip(row) {
                *v += alpha * kv;
            }
            let row = &k.bb[l * nb..(l + 1) * nb];
            for (v, kv) in out[ng..].iter_mut().zip(row) {
                *v += alpha * kv;
            }
        }
    }

    /// K μ for a weight vector over all nodes.
    pub fn apply(&self, mu: &[f64]) -> Vec<f64> {
        let (ng, nb) = (self.n_grid, self.n_bdry);
        let k = &self.kernel;
        let mut out = vec![0.0; ng + nb];
        match &k.grid {
            GridTable::Sphere { r, t } => self.sphere_apply(*r, t, &mu[..ng], &mut out[..ng]),
            GridTable::Torus { .. } => {
                let res: Vec<f64> = (0..ng)
                    .into_par_iter()
                    .map(|i| {
                        let mut s = 0.0;
                        for (j, &m) in mu[..ng].iter().enumerate() {
                            if m != 0.0 {
                                s += self.grid_entry(i, j) * m;
                            }
                        }
                        s
                    })
                    .collect();
                out[..ng].copy_from_slice(&res);
            }
        }
        for l in 0..nb {
            let ml = mu[ng + l];
            let row = &k.bg[l * ng..(l + 1) * ng];
            let mut s = 0.0;
            for (j, kv) in row.iter().enumerate() {
                s += kv * mu[j];
            }
            for (l2, kv) in k.bb[l * nb..(l + 1) * nb].iter().enumerate() {
                s += kv * mu[ng + l2];
            }
            out[ng + l] = s;
            if ml != 0.0 {
                for (v, kv) in out[..ng].iter_mut().zip(row) {
                    *v += ml * kv;
                }
            }
        }
        out
    }

    // Longitude convolution per band pair, done in Fourier space.
    fn sphere_apply(&self, r: usize, t: &[f64], mu: &[f64], out: &mut [f64]) {
        let w = 2 * r;
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(w);
        let inv = planner.plan_fft_inverse(w);
        let spec = |v: &mut Vec<Complex64>| fwd.process(v);
        let mu_hat: Vec<Vec<Complex64>> = (0..r)
            .map(|bj| {
                let mut v: Vec<Complex64> = mu[bj * w..(bj + 1) * w].iter().map(|&x| Complex64::new(x, 0.0)).collect();
                spec(&mut v);
                v
            })
            .collect();
        let kern_hat = |bi: usize, bj: usize| -> Vec<Complex64> {
            let row = &t[(bi * r + bj) * (r + 1)..(bi * r + bj + 1) * (r + 1)];
            let mut v: Vec<Complex64> = (0..w).map(|d| Complex64::new(row[d.min(w - d)], 0.0)).collect();
            fwd.process(&mut v);
            v
        };
        for bi in 0..r {
            let mut acc = vec![Complex64::new(0.0, 0.0); w];
            for (bj, mh) in mu_hat.iter().enumerate() {
                if mh.iter().all(|c| c.norm_sqr() == 0.0) {
                    continue;
                }
                let kh = kern_hat(bi, bj);
                for q in 0..w {
                    acc[q] += kh[q] * mh[q];
                }
            }
            inv.process(&mut acc);
            for a in 0..w {
                out[bi * w + a] = acc[a].re / w as f64;
            }
        }
    }

    /// Potential at an arbitrary location of the measure with node weights μ.
    pub fn potential_at(&self, x: &[f64; 3], mu: &[f64]) -> f64 {
        let g = &self.model.geometry;
        let c0 = self.model.green_offset;
        let mut s = 0.0;
        for (e, &m) in self.elements.iter().zip(mu) {
            if m != 0.0 {
                s += m * (e.avg_green_raw(g, x) + c0);
            }
        }
        s
    }
}
