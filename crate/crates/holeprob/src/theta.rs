//! Jacobi theta function θ₁ with nome q = exp(iπτ).

use num_complex::Complex64;
use std::f64::consts::PI;

const MAX_TERMS: usize = 12;

/// Precomputed coefficients (−1)ⁿ q^{(n+½)²} for repeated θ₁ evaluation at one τ,
/// valid for |Im z| ≤ Im τ / 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta1 {
    pub tau: Complex64,
    coef: [Complex64; MAX_TERMS],
    terms: usize,
}

impl Theta1 {
    pub fn new(tau: Complex64) -> Theta1 {
        let mut coef = [Complex64::new(0.0, 0.0); MAX_TERMS];
        let mut terms = MAX_TERMS;
        for (n, c) in coef.iter_mut().enumerate() {
            let e = (n as f64 + 0.5).powi(2);
            // worst-case size of the term on the strip |Im z| ≤ Im τ/2
            let bound = -PI * tau.im * (e - (n as f64 + 0.5));
            if n > 0 && bound < -40.0 {
                terms = n;
                break;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            *c = (Complex64::new(0.0, PI) * tau * e).exp() * sign;
        }
        Theta1 { tau, coef, terms }
    }

    /// θ₁(z|τ) via w = exp(iπz): sin((2n+1)πz) = (w^{2n+1} − w^{−(2n+1)})/2i.
    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let w = (Complex64::new(-z.im, z.re) * PI).exp();
        let wi = w.inv();
        let (w2, wi2) = (w * w, wi * wi);
        let (mut a, mut b) = (w, wi);
        let mut s = Complex64::new(0.0, 0.0);
        for c in &self.coef[..self.terms] {
            s += *c * (a - b);
            a *= w2;
            b *= wi2;
        }
        // 2 · s / (2i)
        Complex64::new(s.im, -s.re)
    }
}

impl Theta1 {
    /// (θ₁(z), θ₁′(z)) in one pass.
    pub fn eval_with_prime(&self, z: Complex64) -> (Complex64, Complex64) {
        let w = (Complex64::new(-z.im, z.re) * PI).exp();
        let wi = w.inv();
        let (w2, wi2) = (w * w, wi * wi);
        let (mut a, mut b) = (w, wi);
        let mut s = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for (n, c) in self.coef[..self.terms].iter().enumerate() {
            s += *c * (a - b);
            d += *c * (a + b) * ((2 * n + 1) as f64 * PI);
            a *= w2;
            b *= wi2;
        }
        (Complex64::new(s.im, -s.re), d)
    }
}

/// θ₁(z|τ) = 2 Σ_{n≥0} (−1)ⁿ q^{(n+½)²} sin((2n+1)πz).
///
/// Intended for |Im z| ≤ Im τ / 2, where the terms decay monotonically.
pub fn theta1(z: Complex64, tau: Complex64) -> Complex64 {
    series(z, tau, |k| (z * (k * PI)).sin())
}

/// θ₁(z|τ)/z, continuous at z = 0 where it equals θ₁′(0|τ).
pub fn theta1_over_z(z: Complex64, tau: Complex64) -> Complex64 {
    if z.norm() > 1e-3 {
        return theta1(z, tau) / z;
    }
    // sin(kπz)/z by its Taylor series for small z
    series(z, tau, |k| {
        let a = z * (k * PI);
        let a2 = a * a;
        let s = Complex64::new(1.0, 0.0)
            - a2 / 6.0 * (Complex64::new(1.0, 0.0) - a2 / 20.0 * (Complex64::new(1.0, 0.0) - a2 / 42.0));
        s * (k * PI)
    })
}

/// Derivative of θ₁ in z.
pub fn theta1_prime(z: Complex64, tau: Complex64) -> Complex64 {
    series(z, tau, |k| (z * (k * PI)).cos() * (k * PI))
}

fn series(z: Complex64, tau: Complex64, f: impl Fn(f64) -> Complex64) -> Complex64 {
    let lq = -PI * tau.im; // log |q|
    let iq = Complex64::new(0.0, PI) * tau;
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..200 {
        let e = (n as f64 + 0.5).powi(2);
        let k = (2 * n + 1) as f64;
        let bound = (lq * e + k * PI * z.im.abs()).exp() * k.max(1.0);
        if n > 0 && bound < 1e-17 * sum.norm().max(1e-300) {
            break;
        }
        let term = (iq * e).exp() * f(k);
        if n % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum * 2.0
}
