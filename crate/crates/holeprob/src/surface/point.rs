use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceId {
    Sphere,
    Torus,
}

/// A point of the sphere (stereographic coordinate, z = 0 the north pole)
/// or of the torus ℂ/(ℤ + τℤ) (reduced representative).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub surface: SurfaceId,
    pub coord: Complex64,
    pub at_infinity: bool,
}

impl SurfacePoint {
    pub fn sphere(z: Complex64) -> Self {
        SurfacePoint { surface: SurfaceId::Sphere, coord: z, at_infinity: false }
    }

    pub fn sphere_infinity() -> Self {
        SurfacePoint {
            surface: SurfaceId::Sphere,
            coord: Complex64::new(f64::INFINITY, 0.0),
            at_infinity: true,
        }
    }

    /// Torus point, reduced into {x ∈ [0,1), y ∈ [0, Im τ)}.
    pub fn torus(z: Complex64, tau: Complex64) -> Self {
        SurfacePoint { surface: SurfaceId::Torus, coord: reduce_torus(z, tau), at_infinity: false }
    }

    /// Sphere point from a unit vector (north pole ↦ 0, south pole ↦ ∞).
    pub fn from_unit(v: [f64; 3]) -> Self {
        let den = 1.0 + v[2];
        if den < 1e-300 {
            return Self::sphere_infinity();
        }
        Self::sphere(Complex64::new(v[0] / den, v[1] / den))
    }

    /// Unit vector of a sphere point.
    pub fn unit(&self) -> [f64; 3] {
        if self.at_infinity {
            return [0.0, 0.0, -1.0];
        }
        let z = self.coord;
        let s = z.norm_sqr();
        if !s.is_finite() {
            return [0.0, 0.0, -1.0];
        }
        let d = 1.0 + s;
        [2.0 * z.re / d, 2.0 * z.im / d, (1.0 - s) / d]
    }

    /// Internal location: unit vector on the sphere, (x, y, 0) on the torus.
    pub fn loc(&self) -> [f64; 3] {
        match self.surface {
            SurfaceId::Sphere => self.unit(),
            SurfaceId::Torus => [self.coord.re, self.coord.im, 0.0],
        }
    }
}

pub fn reduce_torus(z: Complex64, tau: Complex64) -> Complex64 {
    let mut w = z;
    let k = (w.im / tau.im).floor();
    w -= tau * k;
    if w.im >= tau.im {
        w -= tau;
    }
    if w.im < 0.0 {
        w.im = 0.0;
    }
    w.re -= w.re.floor();
    if w.re >= 1.0 {
        w.re = 0.0;
    }
    w
}

/// Representative of z mod Λ with |Im| ≤ Im τ/2 and |Re| ≤ 1/2.
pub fn center_torus(z: Complex64, tau: Complex64) -> Complex64 {
    let mut w = z;
    w -= tau * (w.im / tau.im).round();
    w.re -= w.re.round();
    w
}
