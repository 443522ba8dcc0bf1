use super::element::{Cell, Circle, Element};
use super::{Geometry, SurfaceModel, SurfacePoint};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HoleKind {
    Empty,
    Cap,
    Disc,
    Union,
}

/// Hole description as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoleSpec {
    pub kind: HoleKind,
    #[serde(default)]
    pub center: Option<CenterSpec>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub components: Vec<HoleSpec>,
    #[serde(default)]
    pub boundary_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CenterSpec {
    Coord([f64; 2]),
    Named(String),
}

/// Open hole D: empty, a metric ball (sphere cap / torus disc) or a union of balls.
#[derive(Debug, Clone, PartialEq)]
pub struct HoleRegion {
    pub kind: HoleKind,
    pub center: SurfacePoint,
    pub radius: f64,
    pub components: Vec<HoleRegion>,
    pub boundary_nodes: Vec<SurfacePoint>,
    pub boundary_count: usize,
    pub(crate) arcs: Vec<Element>,
}

impl HoleRegion {
    pub fn empty(model: &SurfaceModel) -> HoleRegion {
        let center = match model.geometry {
            Geometry::Sphere => SurfacePoint::sphere(Complex64::new(0.0, 0.0)),
            Geometry::Torus { tau, .. } => SurfacePoint::torus(Complex64::new(0.0, 0.0), tau),
        };
        HoleRegion {
            kind: HoleKind::Empty,
            center,
            radius: 0.0,
            components: vec![],
            boundary_nodes: vec![],
            boundary_count: 0,
            arcs: vec![],
        }
    }

    /// Metric ball of the given radius; `boundary_count` defaults to
    /// max(256, ⌈2π·radius/h⌉) with h the grid spacing.
    pub fn ball(model: &SurfaceModel, center: SurfacePoint, radius: f64, boundary_count: Option<usize>) -> Result<HoleRegion> {
        model.check_surface(&center)?;
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("hole radius {radius} must be positive")));
        }
        let g = &model.geometry;
        let kind = match g {
            Geometry::Sphere => {
                if radius >= PI / 2.0 - 1e-9 {
                    return Err(Error::Domain("cap closure covers the sphere".into()));
                }
                HoleKind::Cap
            }
            Geometry::Torus { tau, .. } => {
                let shortest = [Complex64::new(1.0, 0.0), *tau, *tau - 1.0, *tau + 1.0]
                    .iter()
                    .map(|v| v.norm())
                    .fold(f64::INFINITY, f64::min);
                if radius >= 0.5 * shortest {
                    return Err(Error::Domain("disc does not embed in the torus".into()));
                }
                HoleKind::Disc
            }
        };
        let h = match g {
            Geometry::Sphere => PI / (2.0 * model.resolution as f64),
            Geometry::Torus { .. } => 1.0 / model.resolution as f64,
        };
        let n = boundary_count.unwrap_or_else(|| 256usize.max((2.0 * PI * radius / h).ceil() as usize));
        if n < 3 {
            return Err(Error::Domain("boundary_count must be at least 3".into()));
        }
        let circle = Circle::new(g, center.loc(), radius);
        let arcs: Vec<Element> = (0..n)
            .map(|k| Element::Arc {
                circle,
                psi0: 2.0 * PI * k as f64 / n as f64,
                psi1: 2.0 * PI * (k + 1) as f64 / n as f64,
            })
            .collect();
        let boundary_nodes = arcs.iter().map(|a| g.loc_to_point(&a.center_loc(g))).collect();
        Ok(HoleRegion { kind, center, radius, components: vec![], boundary_nodes, boundary_count: n, arcs })
    }

    pub fn union(model: &SurfaceModel, parts: Vec<HoleRegion>) -> Result<HoleRegion> {
        let parts: Vec<HoleRegion> = parts.into_iter().filter(|p| p.kind != HoleKind::Empty).collect();
        if parts.is_empty() {
            return Ok(Self::empty(model));
        }
        let g = &model.geometry;
        for (i, a) in parts.iter().enumerate() {
            for b in &parts[i + 1..] {
                if g.dist(&a.center.loc(), &b.center.loc()) <= a.radius + b.radius {
                    return Err(Error::Domain("union components must have disjoint closures".into()));
                }
            }
        }
        let arcs: Vec<Element> = parts.iter().flat_map(|p| p.arcs.clone()).collect();
        let boundary_nodes: Vec<SurfacePoint> = parts.iter().flat_map(|p| p.boundary_nodes.clone()).collect();
        Ok(HoleRegion {
            kind: HoleKind::Union,
            center: parts[0].center,
            radius: parts.iter().map(|p| p.radius).fold(0.0, f64::max),
            boundary_count: boundary_nodes.len(),
            boundary_nodes,
            components: parts,
            arcs,
        })
    }

    pub fn from_spec(model: &SurfaceModel, spec: &HoleSpec) -> Result<HoleRegion> {
        match spec.kind {
            HoleKind::Empty => Ok(Self::empty(model)),
            HoleKind::Union => {
                let parts = spec.components.iter().map(|c| Self::from_spec(model, c)).collect::<Result<Vec<_>>>()?;
                Self::union(model, parts)
            }
            HoleKind::Cap | HoleKind::Disc => {
                let center = match (&spec.center, model.geometry) {
                    (None, Geometry::Sphere) => SurfacePoint::sphere(Complex64::new(0.0, 0.0)),
                    (None, Geometry::Torus { tau, .. }) => SurfacePoint::torus(Complex64::new(0.0, 0.0), tau),
                    (Some(CenterSpec::Named(s)), Geometry::Sphere) if s == "inf" => SurfacePoint::sphere_infinity(),
                    (Some(CenterSpec::Named(s)), _) => {
                        return Err(Error::Domain(format!("unknown center '{s}'")));
                    }
                    (Some(CenterSpec::Coord([a, b])), Geometry::Sphere) => SurfacePoint::sphere(Complex64::new(*a, *b)),
                    (Some(CenterSpec::Coord([a, b])), Geometry::Torus { tau, .. }) => {
                        SurfacePoint::torus(Complex64::new(*a, *b), tau)
                    }
                };
                let radius = spec.radius.ok_or_else(|| Error::Domain("hole radius missing".into()))?;
                Self::ball(model, center, radius, spec.boundary_count)
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.kind == HoleKind::Empty
    }

    /// Membership in the open hole.
    pub fn contains_loc(&self, x: &[f64; 3], g: &Geometry) -> bool {
        match self.kind {
            HoleKind::Empty => false,
            HoleKind::Union => self.components.iter().any(|c| c.contains_loc(x, g)),
            _ => g.dist(x, &self.center.loc()) < self.radius,
        }
    }

    /// Whether the closed cell meets the open hole (boundary sampled at 16 points per edge).
    pub fn meets_cell(&self, cell: &Cell, g: &Geometry) -> bool {
        match self.kind {
            HoleKind::Empty => false,
            HoleKind::Union => self.components.iter().any(|c| c.meets_cell(cell, g)),
            _ => {
                let c = self.center.loc();
                if cell.contains_loc(g, &c) {
                    return true;
                }
                let n = 16;
                for k in 0..=n {
                    let t = k as f64 / n as f64;
                    let s0 = cell.lo[0] + t * (cell.hi[0] - cell.lo[0]);
                    let s1 = cell.lo[1] + t * (cell.hi[1] - cell.lo[1]);
                    for p in [[s0, cell.lo[1]], [s0, cell.hi[1]], [cell.lo[0], s1], [cell.hi[0], s1]] {
                        if g.dist(&Cell::param_loc(g, p[0], p[1]), &c) < self.radius {
                            return true;
                        }
                    }
                }
                false
            }
        }
    }

    /// Nearest point of the closed complement: x itself when outside D,
    /// otherwise its radial projection onto the boundary of the component containing it.
    pub fn project_out(&self, x: &[f64; 3], g: &Geometry) -> [f64; 3] {
        match self.kind {
            HoleKind::Empty => *x,
            HoleKind::Union => match self.components.iter().find(|c| c.contains_loc(x, g)) {
                Some(c) => c.project_out(x, g),
                None => *x,
            },
            _ => {
                if !self.contains_loc(x, g) {
                    return *x;
                }
                let c = self.center.loc();
                let circle = Circle::new(g, c, self.radius * (1.0 + 1e-12));
                let psi = if g.dist(x, &c) < 1e-15 { 0.0 } else { circle.angle_of(g, x) };
                circle.at(g, psi)
            }
        }
    }

    /// Unit outward normal of D (pointing into X∖D) at a point near the boundary of a
    /// ball component, in loc coordinates; None away from every boundary.
    pub fn outward_normal(&self, x: &[f64; 3], g: &Geometry, slack: f64) -> Option<[f64; 3]> {
        match self.kind {
            HoleKind::Empty => None,
            HoleKind::Union => self.components.iter().find_map(|c| c.outward_normal(x, g, slack)),
            _ => {
                let c = self.center.loc();
                if (g.dist(x, &c) - self.radius).abs() > slack {
                    return None;
                }
                let v = match g {
                    Geometry::Sphere => g.tangent(x, [x[0] - c[0], x[1] - c[1], x[2] - c[2]]),
                    Geometry::Torus { tau, .. } => {
                        let d = super::center_torus(Complex64::new(x[0] - c[0], x[1] - c[1]), *tau);
                        [d.re, d.im, 0.0]
                    }
                };
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if n < 1e-300 {
                    return None;
                }
                Some([v[0] / n, v[1] / n, v[2] / n])
            }
        }
    }

    /// Boundary arcs, one per boundary node.
    pub fn arcs(&self) -> &[Element] {
        &self.arcs
    }

    /// Exact ω-mass of the hole.
    pub fn omega_mass(&self, g: &Geometry) -> f64 {
        match self.kind {
            HoleKind::Empty => 0.0,
            HoleKind::Union => self.components.iter().map(|c| c.omega_mass(g)).sum(),
            _ => g.ball_mass(self.radius),
        }
    }
}
