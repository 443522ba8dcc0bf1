//! Cells of the product grid and arcs of hole boundaries, with averages of the
//! Green kernel over them.

use super::{center_torus, Geometry};
use crate::quad::gauss;
use num_complex::Complex64;
use std::f64::consts::PI;

const DUFFY_ORDER: usize = 10;
const ARC_SINGULAR_ORDER: usize = 16;

/// Rectangle in chart parameters: (θ, φ) on the sphere, (x, y) on the torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

/// Circle on the surface: centre location, radius, and (sphere) an orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: [f64; 3],
    pub radius: f64,
    pub e1: [f64; 3],
    pub e2: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    Cell(Cell),
    Arc { circle: Circle, psi0: f64, psi1: f64 },
}

pub(crate) fn sphere_loc(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

impl Cell {
    pub fn mass(&self, g: &Geometry) -> f64 {
        match g {
            Geometry::Sphere => (self.lo[0].cos() - self.hi[0].cos()) * (self.hi[1] - self.lo[1]) / (4.0 * PI),
            Geometry::Torus { tau, .. } => (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1]) / tau.im,
        }
    }

    #[inline]
    pub fn param_loc(g: &Geometry, s: f64, t: f64) -> [f64; 3] {
        match g {
            Geometry::Sphere => sphere_loc(s, t),
            Geometry::Torus { .. } => [s, t, 0.0],
        }
    }

    #[inline]
    fn density(g: &Geometry, s: f64) -> f64 {
        match g {
            Geometry::Sphere => s.sin(),
            Geometry::Torus { .. } => 1.0,
        }
    }

    pub fn center_param(&self) -> [f64; 2] {
        [0.5 * (self.lo[0] + self.hi[0]), 0.5 * (self.lo[1] + self.hi[1])]
    }

    pub fn center_loc(&self, g: &Geometry) -> [f64; 3] {
        let c = self.center_param();
        Self::param_loc(g, c[0], c[1])
    }

    pub fn diam(&self, g: &Geometry) -> f64 {
        let a = Self::param_loc(g, self.lo[0], self.lo[1]);
        let b = Self::param_loc(g, self.hi[0], self.hi[1]);
        let c = Self::param_loc(g, self.lo[0], self.hi[1]);
        let d = Self::param_loc(g, self.hi[0], self.lo[1]);
        let mid_lo = Self::param_loc(g, self.center_param()[0], self.lo[1]);
        let mid_hi = Self::param_loc(g, self.center_param()[0], self.hi[1]);
        g.dist(&a, &b).max(g.dist(&c, &d)).max(g.dist(&mid_lo, &mid_hi))
    }

    /// Tensor Gauss rule with n×n points, weights normalised to 1.
    pub fn rule(&self, g: &Geometry, n: usize) -> Vec<([f64; 3], f64)> {
        let (x, w) = gauss(n);
        let mut out = Vec::with_capacity(n * n);
        let mut tot = 0.0;
        for i in 0..n {
            let s = self.lo[0] + (self.hi[0] - self.lo[0]) * x[i];
            let ds = w[i] * Self::density(g, s);
            for j in 0..n {
                let t = self.lo[1] + (self.hi[1] - self.lo[1]) * x[j];
                out.push((Self::param_loc(g, s, t), ds * w[j]));
                tot += ds * w[j];
            }
        }
        for p in &mut out {
            p.1 /= tot;
        }
        out
    }

    fn param_of(&self, g: &Geometry, x: &[f64; 3]) -> [f64; 2] {
        let c = self.center_param();
        match g {
            Geometry::Sphere => {
                let th = x[2].clamp(-1.0, 1.0).acos();
                let mut ph = x[1].atan2(x[0]);
                ph += 2.0 * PI * ((c[1] - ph) / (2.0 * PI)).round();
                [th, ph]
            }
            Geometry::Torus { tau, .. } => {
                let d = center_torus(Complex64::new(x[0] - c[0], x[1] - c[1]), *tau);
                [c[0] + d.re, c[1] + d.im]
            }
        }
    }

    /// Whether the location lies in the closed cell.
    pub fn contains_loc(&self, g: &Geometry, x: &[f64; 3]) -> bool {
        let p = self.param_of(g, x);
        let inside = |k: usize| p[k] >= self.lo[k] - 1e-15 && p[k] <= self.hi[k] + 1e-15;
        match g {
            // at the poles the longitude is irrelevant
            Geometry::Sphere if p[0] <= self.lo[0] + 1e-15 && self.lo[0] == 0.0 => true,
            Geometry::Sphere if p[0] >= self.hi[0] - 1e-15 && self.hi[0] >= PI - 1e-15 => true,
            _ => inside(0) && inside(1),
        }
    }

    /// Average of G_raw(x,·) over the cell (normalised ω on the cell).
    pub fn avg_green_raw(&self, g: &Geometry, x: &[f64; 3]) -> f64 {
        let d = g.dist(x, &self.center_loc(g));
        let h = self.diam(g);
        if d > 6.0 * h {
            self.rule(g, 2).iter().map(|(y, w)| w * g.green_raw(x, y)).sum()
        } else if d > 2.5 * h {
            self.rule(g, 5).iter().map(|(y, w)| w * g.green_raw(x, y)).sum()
        } else if d > 1.2 * h {
            self.rule(g, 10).iter().map(|(y, w)| w * g.green_raw(x, y)).sum()
        } else {
            self.duffy_avg(g, x)
        }
    }

    /// Singular integration: split at the parameter point nearest x and map each
    /// sub-rectangle's two triangles onto the unit square with apex at that point.
    fn duffy_avg(&self, g: &Geometry, x: &[f64; 3]) -> f64 {
        let p = self.param_of(g, x);
        let apex = [p[0].clamp(self.lo[0], self.hi[0]), p[1].clamp(self.lo[1], self.hi[1])];
        let (gx, gw) = gauss(DUFFY_ORDER);
        let mut num = 0.0;
        let mut den = 0.0;
        let size = (self.hi[0] - self.lo[0]).max(self.hi[1] - self.lo[1]);
        for &cx in &[self.lo[0], self.hi[0]] {
            for &cy in &[self.lo[1], self.hi[1]] {
                let a = cx - apex[0];
                let b = cy - apex[1];
                if a.abs() < 1e-14 * size || b.abs() < 1e-14 * size {
                    continue;
                }
                let jac = (a * b).abs();
                for i in 0..DUFFY_ORDER {
                    let s = gx[i];
                    for j in 0..DUFFY_ORDER {
                        let t = gx[j];
                        let wt = gw[i] * gw[j] * jac * s;
                        for (u, v) in [(a * s, b * s * t), (a * s * t, b * s)] {
                            let th = apex[0] + u;
                            let ph = apex[1] + v;
                            let dens = Self::density(g, th) * wt;
                            let y = Self::param_loc(g, th, ph);
                            num += dens * g.green_raw(x, &y);
                            den += dens;
                        }
                    }
                }
            }
        }
        num / den
    }
}

impl Circle {
    pub fn new(g: &Geometry, center: [f64; 3], radius: f64) -> Circle {
        let (e1, e2) = match g {
            Geometry::Sphere => {
                let c = center;
                let t = if c[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
                let dot = t[0] * c[0] + t[1] * c[1] + t[2] * c[2];
                let mut e1 = [t[0] - dot * c[0], t[1] - dot * c[1], t[2] - dot * c[2]];
                let n = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
                e1.iter_mut().for_each(|v| *v /= n);
                let e2 = [
                    c[1] * e1[2] - c[2] * e1[1],
                    c[2] * e1[0] - c[0] * e1[2],
                    c[0] * e1[1] - c[1] * e1[0],
                ];
                (e1, e2)
            }
            Geometry::Torus { .. } => ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
        };
        Circle { center, radius, e1, e2 }
    }

    #[inline]
    pub fn at(&self, g: &Geometry, psi: f64) -> [f64; 3] {
        let (s, c) = psi.sin_cos();
        match g {
            Geometry::Sphere => {
                let (sa, ca) = (2.0 * self.radius).sin_cos();
                let mut p = [0.0; 3];
                for k in 0..3 {
                    p[k] = self.center[k] * ca + sa * (self.e1[k] * c + self.e2[k] * s);
                }
                p
            }
            Geometry::Torus { .. } => [self.center[0] + self.radius * c, self.center[1] + self.radius * s, 0.0],
        }
    }

    pub fn length(&self, g: &Geometry) -> f64 {
        match g {
            Geometry::Sphere => PI * (2.0 * self.radius).sin(),
            Geometry::Torus { .. } => 2.0 * PI * self.radius,
        }
    }

    pub(crate) fn angle_of(&self, g: &Geometry, x: &[f64; 3]) -> f64 {
        match g {
            Geometry::Sphere => {
                let a: f64 = (0..3).map(|k| x[k] * self.e1[k]).sum();
                let b: f64 = (0..3).map(|k| x[k] * self.e2[k]).sum();
                b.atan2(a)
            }
            Geometry::Torus { tau, .. } => {
                let d = center_torus(Complex64::new(x[0] - self.center[0], x[1] - self.center[1]), *tau);
                d.im.atan2(d.re)
            }
        }
    }
}

impl Element {
    pub fn is_arc(&self) -> bool {
        matches!(self, Element::Arc { .. })
    }

    pub fn center_loc(&self, g: &Geometry) -> [f64; 3] {
        match self {
            Element::Cell(c) => c.center_loc(g),
            Element::Arc { circle, psi0, psi1 } => circle.at(g, 0.5 * (psi0 + psi1)),
        }
    }

    pub fn diam(&self, g: &Geometry) -> f64 {
        match self {
            Element::Cell(c) => c.diam(g),
            Element::Arc { circle, psi0, psi1 } => g.dist(&circle.at(g, *psi0), &circle.at(g, *psi1)),
        }
    }

    pub fn rule(&self, g: &Geometry, n: usize) -> Vec<([f64; 3], f64)> {
        match self {
            Element::Cell(c) => c.rule(g, n),
            Element::Arc { circle, psi0, psi1 } => {
                let (x, w) = gauss(n);
                x.iter().zip(w).map(|(x, w)| (circle.at(g, psi0 + (psi1 - psi0) * x), *w)).collect()
            }
        }
    }

    /// Number of rule points per side used for a given accuracy level.
    pub fn rule_for(&self, g: &Geometry, level: usize) -> Vec<([f64; 3], f64)> {
        match (self, level) {
            (Element::Cell(_), 0) => self.rule(g, 2),
            (Element::Cell(_), 1) => self.rule(g, 4),
            (Element::Cell(_), _) => self.rule(g, 6),
            (Element::Arc { .. }, 0) => self.rule(g, 2),
            (Element::Arc { .. }, 1) => self.rule(g, 4),
            (Element::Arc { .. }, _) => self.rule(g, 10),
        }
    }

    pub fn avg_green_raw(&self, g: &Geometry, x: &[f64; 3]) -> f64 {
        match self {
            Element::Cell(c) => c.avg_green_raw(g, x),
            Element::Arc { circle, psi0, psi1 } => {
                let d = g.dist(x, &self.center_loc(g));
                let h = self.diam(g);
                if d > 6.0 * h {
                    return self.rule(g, 2).iter().map(|(y, w)| w * g.green_raw(x, y)).sum();
                }
                if d > 2.5 * h {
                    return self.rule(g, 6).iter().map(|(y, w)| w * g.green_raw(x, y)).sum();
                }
                let mid = 0.5 * (psi0 + psi1);
                let mut px = circle.angle_of(g, x);
                px += 2.0 * PI * ((mid - px) / (2.0 * PI)).round();
                let pc = px.clamp(*psi0, *psi1);
                let (gx, gw) = gauss(ARC_SINGULAR_ORDER);
                let mut acc = 0.0;
                for (a, b) in [(pc, *psi0), (pc, *psi1)] {
                    let l = b - a;
                    if l.abs() < 1e-15 {
                        continue;
                    }
                    for (s, w) in gx.iter().zip(gw) {
                        let y = circle.at(g, a + l * s * s * s);
                        acc += w * 3.0 * s * s * l.abs() * g.green_raw(x, &y);
                    }
                }
                acc / (psi1 - psi0)
            }
        }
    }
}
