//! Finite-volume dd^c on the product grid.

use crate::kernel::Discretization;
use crate::surface::Geometry;

/// Grid neighbours (up, down, left, right) of a grid node; the torus rows wrap
/// with the τ shift, reported as the two columns bracketing the shifted position.
fn neighbours(disc: &Discretization, i: usize) -> Vec<usize> {
    let r = disc.model.resolution;
    match disc.geometry() {
        Geometry::Sphere => {
            let w = 2 * r;
            let (b, a) = (i / w, i % w);
            let mut v = vec![b * w + (a + 1) % w, b * w + (a + w - 1) % w];
            if b > 0 {
                v.push((b - 1) * w + a);
            }
            if b + 1 < r {
                v.push((b + 1) * w + a);
            }
            v
        }
        Geometry::Torus { .. } => {
            let (b, a) = (i / r, i % r);
            vec![b * r + (a + 1) % r, b * r + (a + r - 1) % r, ((b + 1) % r) * r + a, ((b + r - 1) % r) * r + a]
        }
    }
}

/// True when the node and its neighbours carry (almost) no mass.
pub(crate) fn away_from_support(disc: &Discretization, w: &[f64], i: usize) -> bool {
    if i >= disc.n_grid {
        return false;
    }
    let quiet = |j: usize| w[j] < 1e-3 * disc.omega[j].max(1e-300);
    if !quiet(i) {
        return false;
    }
    // boundary arcs passing close by also count as support
    let g = disc.geometry();
    let x = disc.node_loc(i);
    let h = disc.elements[i].diam(g);
    for k in disc.n_grid..disc.len() {
        if w[k] > 0.0 && g.dist(&x, &disc.node_loc(k)) < 2.0 * h {
            return false;
        }
    }
    neighbours(disc, i).into_iter().all(quiet)
}

/// (dd^c V + ω)/ω per grid cell, from the fluxes of V across cell faces.
pub(crate) fn ddc_plus_omega(disc: &Discretization, v: &[f64]) -> Vec<f64> {
    let r = disc.model.resolution;
    let two_pi = 2.0 * std::f64::consts::PI;
    match disc.geometry() {
        Geometry::Sphere => {
            let w = 2 * r;
            let dt = std::f64::consts::PI / r as f64;
            let dp = dt;
            (0..disc.n_grid)
                .map(|i| {
                    let (b, a) = (i / w, i % w);
                    let th = (b as f64 + 0.5) * dt;
                    let mut flux = 0.0;
                    for s in [-1i64, 1] {
                        let nb = b as i64 + s;
                        if nb >= 0 && (nb as usize) < r {
                            let face = (th + 0.5 * s as f64 * dt).sin() * dp;
                            flux += face * (v[nb as usize * w + a] - v[i]) / dt;
                        }
                        let na = (a as i64 + s).rem_euclid(w as i64) as usize;
                        flux += dt * (v[b * w + na] - v[i]) / (th.sin() * dp);
                    }
                    flux / two_pi / disc.omega[i] + 1.0
                })
                .collect()
        }
        Geometry::Torus { tau, .. } => {
            let (dx, dy) = (1.0 / r as f64, tau.im / r as f64);
            let row_at = |row: usize, col: f64| -> f64 {
                let k = col.floor();
                let f = col - k;
                let k0 = (k as i64).rem_euclid(r as i64) as usize;
                (1.0 - f) * v[row * r + k0] + f * v[row * r + (k0 + 1) % r]
            };
            (0..disc.n_grid)
                .map(|i| {
                    let (b, a) = (i / r, i % r);
                    let mut flux = dy * (v[b * r + (a + 1) % r] - v[i]) / dx + dy * (v[b * r + (a + r - 1) % r] - v[i]) / dx;
                    let up = if b + 1 < r { v[(b + 1) * r + a] } else { row_at(0, a as f64 - tau.re * r as f64) };
                    let down = if b > 0 { v[(b - 1) * r + a] } else { row_at(r - 1, a as f64 + tau.re * r as f64) };
                    flux += dx * (up - v[i]) / dy + dx * (down - v[i]) / dy;
                    flux / two_pi / disc.omega[i] + 1.0
                })
                .collect()
        }
    }
}
