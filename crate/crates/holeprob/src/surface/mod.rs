//! Sphere (Fubini–Study) and flat torus: distance, Green function, ω-quadrature, holes.

mod element;
mod hole;
mod point;

pub use element::{Cell, Element};
pub use hole::{HoleKind, HoleRegion, HoleSpec};
pub use point::{center_torus, reduce_torus, SurfaceId, SurfacePoint};

use crate::error::{Error, Result};
use crate::theta;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Metric and kernel of one surface, without quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    Sphere,
    Torus { tau: Complex64, theta: theta::Theta1 },
}

impl Geometry {
    pub fn torus(tau: Complex64) -> Geometry {
        Geometry::Torus { tau, theta: theta::Theta1::new(tau) }
    }

    pub fn id(&self) -> SurfaceId {
        match self {
            Geometry::Sphere => SurfaceId::Sphere,
            Geometry::Torus { .. } => SurfaceId::Torus,
        }
    }

    pub fn tau(&self) -> Option<Complex64> {
        match self {
            Geometry::Sphere => None,
            Geometry::Torus { tau, .. } => Some(*tau),
        }
    }

    /// Green function without the additive constant.
    #[inline]
    pub fn green_raw(&self, a: &[f64; 3], b: &[f64; 3]) -> f64 {
        match self {
            Geometry::Sphere => {
                let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
                0.5 * ((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) * 0.25).ln()
            }
            Geometry::Torus { tau, theta } => {
                let d = center_torus(Complex64::new(a[0] - b[0], a[1] - b[1]), *tau);
                theta.eval(d).norm().ln() - PI * d.im * d.im / tau.im
            }
        }
    }

    /// Green function minus log distance, without the additive constant.
    pub fn regular_raw(&self, a: &[f64; 3], b: &[f64; 3]) -> f64 {
        match self {
            Geometry::Sphere => {
                let d = self.dist(a, b);
                if d < 1e-4 {
                    // log(sin d / d)
                    -d * d / 6.0 - d.powi(4) / 180.0
                } else {
                    (d.sin() / d).ln()
                }
            }
            Geometry::Torus { tau, .. } => {
                let d = center_torus(Complex64::new(a[0] - b[0], a[1] - b[1]), *tau);
                let flat = self.dist(a, b);
                if flat < 1e-300 {
                    return theta::theta1_over_z(d, *tau).norm().ln();
                }
                // the centered representative realises the flat distance near the diagonal
                let q = theta::theta1_over_z(d, *tau).norm().ln() + (d.norm() / flat).ln();
                q - PI * d.im * d.im / tau.im
            }
        }
    }

    /// Sphere: Fubini–Study geodesic distance (half the round angle, at most π/2).
    /// Torus: flat distance minimised over lattice translates.
    #[inline]
    pub fn dist(&self, a: &[f64; 3], b: &[f64; 3]) -> f64 {
        match self {
            Geometry::Sphere => {
                let c = [
                    a[1] * b[2] - a[2] * b[1],
                    a[2] * b[0] - a[0] * b[2],
                    a[0] * b[1] - a[1] * b[0],
                ];
                let s = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                let d = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
                0.5 * s.atan2(d)
            }
            Geometry::Torus { tau, .. } => {
                let d = center_torus(Complex64::new(a[0] - b[0], a[1] - b[1]), *tau);
                let mut best = d.norm();
                for m in -1..=1 {
                    for n in -1..=1 {
                        best = best.min((d + *tau * n as f64 + m as f64).norm());
                    }
                }
                best
            }
        }
    }

    /// Gradient of G(·, b) at a, as a tangent vector in loc coordinates.
    pub fn green_grad(&self, a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
        self.tangent(a, self.green_grad_ambient(a, b))
    }

    /// Ambient gradient of G(·, b) at a before tangent projection; odd under a ↔ b.
    #[inline]
    pub fn green_grad_ambient(&self, a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
        match self {
            Geometry::Sphere => {
                let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
                let n2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                [d[0] / n2, d[1] / n2, d[2] / n2]
            }
            Geometry::Torus { tau, theta } => {
                let d = center_torus(Complex64::new(a[0] - b[0], a[1] - b[1]), *tau);
                let (t, tp) = theta.eval_with_prime(d);
                let r = tp / t;
                [r.re, -r.im - 2.0 * PI * d.im / tau.im, 0.0]
            }
        }
    }

    /// Projection of an ambient vector onto the tangent space at a.
    #[inline]
    pub fn tangent(&self, a: &[f64; 3], v: [f64; 3]) -> [f64; 3] {
        match self {
            Geometry::Sphere => {
                let t = a[0] * v[0] + a[1] * v[1] + a[2] * v[2];
                [v[0] - t * a[0], v[1] - t * a[1], v[2] - t * a[2]]
            }
            Geometry::Torus { .. } => [v[0], v[1], 0.0],
        }
    }

    /// Moves a by the tangent vector v (renormalised on the sphere, reduced on the torus).
    pub fn retract(&self, a: &[f64; 3], v: &[f64; 3]) -> [f64; 3] {
        match self {
            Geometry::Sphere => {
                let p = [a[0] + v[0], a[1] + v[1], a[2] + v[2]];
                let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                [p[0] / n, p[1] / n, p[2] / n]
            }
            Geometry::Torus { tau, .. } => {
                let z = reduce_torus(Complex64::new(a[0] + v[0], a[1] + v[1]), *tau);
                [z.re, z.im, 0.0]
            }
        }
    }

    pub fn loc_to_point(&self, l: &[f64; 3]) -> SurfacePoint {
        match self {
            Geometry::Sphere => SurfacePoint::from_unit(*l),
            Geometry::Torus { tau, .. } => SurfacePoint::torus(Complex64::new(l[0], l[1]), *tau),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Geometry::Sphere => 4.0 * PI,
            Geometry::Torus { tau, .. } => tau.im,
        }
    }

    /// ω-mass of a metric ball of the given radius (sphere cap, small torus disc).
    pub fn ball_mass(&self, radius: f64) -> f64 {
        match self {
            Geometry::Sphere => radius.min(PI / 2.0).sin().powi(2),
            Geometry::Torus { tau, .. } => PI * radius * radius / tau.im,
        }
    }
}

/// A surface together with its ω-quadrature and calibrated Green constant.
#[derive(Debug, Clone)]
pub struct SurfaceModel {
    pub geometry: Geometry,
    pub resolution: usize,
    pub green_offset: f64,
    pub cells: Vec<Cell>,
    pub quadrature: Vec<(SurfacePoint, f64)>,
}

/// Builds the product grid: sphere R bands × 2R longitudes with exact band
/// weights; torus R × R equal cells on the fundamental rectangle.
pub fn build_quadrature(surface: SurfaceId, resolution: usize, tau: Option<Complex64>) -> Result<SurfaceModel> {
    if resolution < 8 {
        return Err(Error::Domain(format!("resolution {resolution} < 8")));
    }
    let geometry = match surface {
        SurfaceId::Sphere => Geometry::Sphere,
        SurfaceId::Torus => {
            let tau = tau.ok_or_else(|| Error::Domain("torus requires tau".into()))?;
            if !(tau.im > 0.0) {
                return Err(Error::Domain(format!("Im tau = {} must be positive", tau.im)));
            }
            Geometry::torus(tau)
        }
    };
    let r = resolution;
    let mut cells = Vec::new();
    match geometry {
        Geometry::Sphere => {
            let dt = PI / r as f64;
            for i in 0..r {
                for a in 0..2 * r {
                    cells.push(Cell {
                        lo: [i as f64 * dt, a as f64 * dt],
                        hi: [(i + 1) as f64 * dt, (a + 1) as f64 * dt],
                    });
                }
            }
        }
        Geometry::Torus { tau, .. } => {
            let (dx, dy) = (1.0 / r as f64, tau.im / r as f64);
            for b in 0..r {
                for a in 0..r {
                    cells.push(Cell {
                        lo: [a as f64 * dx, b as f64 * dy],
                        hi: [(a + 1) as f64 * dx, (b + 1) as f64 * dy],
                    });
                }
            }
        }
    }
    let mut weights: Vec<f64> = cells.iter().map(|c| c.mass(&geometry)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    if let Geometry::Torus { .. } = geometry {
        let w = 1.0 / cells.len() as f64;
        weights.iter_mut().for_each(|x| *x = w);
    }
    let quadrature = cells
        .iter()
        .zip(&weights)
        .map(|(c, &w)| (geometry.loc_to_point(&c.center_loc(&geometry)), w))
        .collect();
    let mut model = SurfaceModel { geometry, resolution, green_offset: 0.0, cells, quadrature };
    model.green_offset = model.calibrate_offset();
    Ok(model)
}

impl SurfaceModel {
    pub fn id(&self) -> SurfaceId {
        self.geometry.id()
    }

    pub fn tau(&self) -> Option<Complex64> {
        self.geometry.tau()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn weight(&self, j: usize) -> f64 {
        self.quadrature[j].1
    }

    pub fn node_loc(&self, j: usize) -> [f64; 3] {
        self.cells[j].center_loc(&self.geometry)
    }

    fn calibrate_offset(&self) -> f64 {
        // −∫ G_raw(x,·) ω at a few probe points, each integral cell by cell
        let probes: Vec<[f64; 3]> = match self.geometry {
            Geometry::Sphere => vec![
                [0.0, 0.0, 1.0],
                [1.0, 0.0, 0.0],
                [0.0, 0.6, -0.8],
                [0.48, 0.6, 0.64],
            ],
            Geometry::Torus { tau, .. } => vec![
                [0.0, 0.0, 0.0],
                [0.31, 0.37 * tau.im, 0.0],
                [0.77, 0.81 * tau.im, 0.0],
            ],
        };
        let mut acc = 0.0;
        for x in &probes {
            acc += self.raw_mean(x);
        }
        -acc / probes.len() as f64
    }

    /// Σ_j w_j · (cell average of G_raw(x,·) over cell j).
    pub(crate) fn raw_mean(&self, x: &[f64; 3]) -> f64 {
        let mut acc = 0.0;
        for (j, c) in self.cells.iter().enumerate() {
            acc += self.weight(j) * c.avg_green_raw(&self.geometry, x);
        }
        acc
    }

    pub fn check_surface(&self, p: &SurfacePoint) -> Result<()> {
        if p.surface != self.id() {
            return Err(Error::Domain(format!("{:?} point on a {:?} model", p.surface, self.id())));
        }
        Ok(())
    }

    pub fn loc(&self, p: &SurfacePoint) -> [f64; 3] {
        p.loc()
    }

    pub fn point(&self, l: &[f64; 3]) -> SurfacePoint {
        self.geometry.loc_to_point(l)
    }
}

pub fn distance(a: &SurfacePoint, b: &SurfacePoint, geometry: &Geometry) -> Result<f64> {
    if a.surface != b.surface || a.surface != geometry.id() {
        return Err(Error::Domain("points on different surfaces".into()));
    }
    Ok(geometry.dist(&a.loc(), &b.loc()))
}

/// G(x,y), with the diagonal rejected.
pub fn green(model: &SurfaceModel, x: &SurfacePoint, y: &SurfacePoint) -> Result<f64> {
    model.check_surface(x)?;
    model.check_surface(y)?;
    let (a, b) = (x.loc(), y.loc());
    if model.geometry.dist(&a, &b) < 1e-14 {
        return Err(Error::Singularity);
    }
    Ok(model.geometry.green_raw(&a, &b) + model.green_offset)
}

/// ϱ(x,y) = G(x,y) − log dist(x,y), continuous across the diagonal.
pub fn green_regular_part(model: &SurfaceModel, x: &SurfacePoint, y: &SurfacePoint) -> Result<f64> {
    model.check_surface(x)?;
    model.check_surface(y)?;
    Ok(model.geometry.regular_raw(&x.loc(), &y.loc()) + model.green_offset)
}

pub fn contains(d: &HoleRegion, x: &SurfacePoint, geometry: &Geometry) -> bool {
    d.contains_loc(&x.loc(), geometry)
}
