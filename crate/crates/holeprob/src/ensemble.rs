//! Gaussian random holomorphic sections of 𝓛ⁿ and their zero sets: SU(2)
//! polynomials on the sphere, degree-n theta functions on the torus.

use crate::error::{Error, Result};
use crate::measures::AtomicConfiguration;
use crate::surface::{reduce_torus, Geometry, HoleRegion, SurfacePoint};
use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

type C = Complex64;

/// Leading basis coefficients below this fraction of ‖a‖ count as zero (zeros at ∞).
pub const INFINITY_THRESHOLD: f64 = 1e-13;

/// Reproducibility record of one draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedTag {
    pub master_seed: u64,
    pub trial: u64,
}

/// Generator of trial `trial` under `master_seed`: its own ChaCha stream, so
/// trials are reproducible and independent of scheduling.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone)]
pub struct SectionSample {
    pub n: usize,
    /// Coefficients in the orthonormal basis of H⁰(X, 𝓛ⁿ).
    pub coefficients: Vec<C>,
    pub zeros: AtomicConfiguration,
    pub seed_tag: SeedTag,
}

/// Standard complex Gaussian (E|ξ|² = 1).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (a, b): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
    C::new(s * a, s * b)
}

/// Orthonormal basis of H⁰(X, 𝓛ⁿ) for ⟨·,·⟩_n.
#[derive(Debug, Clone)]
pub enum SectionSpace {
    /// √C(n,k) z^k, k = 0..n.
    Sphere { n: usize, binom_sqrt: Vec<f64> },
    /// Orthonormalised theta functions θ_k, k = 0..n−1; `to_theta` maps
    /// orthonormal coefficients to θ_k coefficients.
    Torus { n: usize, tau: C, to_theta: DMatrix<C> },
}

impl SectionSpace {
    pub fn new(g: &Geometry, n: usize) -> Result<SectionSpace> {
        if n < 1 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        match g {
            Geometry::Sphere => {
                let mut b = vec![1.0f64; n + 1];
                for k in 1..=n {
                    b[k] = b[k - 1] * (n + 1 - k) as f64 / k as f64;
                }
                Ok(SectionSpace::Sphere { n, binom_sqrt: b.iter().map(|x| x.sqrt()).collect() })
            }
            Geometry::Torus { tau, .. } => {
                let gram = theta_gram(n, *tau);
                let chol = gram
                    .clone()
                    .cholesky()
                    .ok_or_else(|| Error::Basis(format!("Gram matrix of the degree-{n} theta basis is not positive definite")))?;
                let l = chol.l();
                let cond = (0..n).map(|i| l[(i, i)].re).fold(f64::INFINITY, f64::min)
                    / (0..n).map(|i| l[(i, i)].re).fold(0.0, f64::max);
                if cond < 1e-7 {
                    return Err(Error::Basis(format!("Gram matrix numerically singular (ratio {cond:.1e}); raise the quadrature")));
                }
                // φ = L⁻¹θ is orthonormal; Σ ξ_i φ_i has θ coefficients (L⁻¹)ᵀ ξ
                let linv = l.try_inverse().ok_or_else(|| Error::Basis("singular Cholesky factor".into()))?;
                Ok(SectionSpace::Torus { n, tau: *tau, to_theta: linv.transpose() })
            }
        }
    }

    pub fn n(&self) -> usize {
        match self {
            SectionSpace::Sphere { n, .. } | SectionSpace::Torus { n, .. } => *n,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SectionSpace::Sphere { n, .. } => n + 1,
            SectionSpace::Torus { n, .. } => *n,
        }
    }

    /// Draws i.i.d. standard complex Gaussian coefficients and extracts the zeros.
    pub fn sample(&self, master_seed: u64, trial: u64) -> Result<SectionSample> {
        let mut rng = trial_rng(master_seed, trial);
        let coefficients: Vec<C> = (0..self.dim()).map(|_| complex_gaussian(&mut rng)).collect();
        let zeros = self.extract_zeros(&coefficients)?;
        Ok(SectionSample { n: self.n(), coefficients, zeros, seed_tag: SeedTag { master_seed, trial } })
    }

    pub fn extract_zeros(&self, a: &[C]) -> Result<AtomicConfiguration> {
        if a.len() != self.dim() {
            return Err(Error::Domain(format!("expected {} coefficients, got {}", self.dim(), a.len())));
        }
        if a.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::Domain("zero section has no zero set".into()));
        }
        match self {
            SectionSpace::Sphere { n, binom_sqrt } => {
                let c: Vec<C> = a.iter().zip(binom_sqrt).map(|(x, b)| x * b).collect();
                let norm = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                let mut deg = *n;
                while deg > 0 && a[deg].norm() < INFINITY_THRESHOLD * norm {
                    deg -= 1;
                }
                let mut pts: Vec<SurfacePoint> = polynomial_roots(&c[..=deg])?.into_iter().map(SurfacePoint::sphere).collect();
                pts.extend(std::iter::repeat_n(SurfacePoint::sphere_infinity(), n - deg));
                AtomicConfiguration::new(pts)
            }
            SectionSpace::Torus { n, tau, to_theta } => {
                let xi = nalgebra::DVector::from_column_slice(a);
                let c: Vec<C> = (to_theta * xi).iter().cloned().collect();
                let f = ThetaSection { n: *n, tau: *tau, c };
                let z = f.zeros()?;
                AtomicConfiguration::new(z.into_iter().map(|z| SurfacePoint::torus(z, *tau)).collect())
            }
        }
    }
}

/// Roots of Σ c_k z^k (c_d ≠ 0) from the balanced companion matrix, each
/// polished by one Newton step.
pub fn polynomial_roots(c: &[C]) -> Result<Vec<C>> {
    let d = c.len() - 1;
    if d == 0 {
        return Ok(vec![]);
    }
    if d == 1 {
        return Ok(vec![-c[0] / c[1]]);
    }
    let lead = c[d];
    let mut m = DMatrix::<C>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = C::new(1.0, 0.0);
    }
    for i in 0..d {
        m[(i, d - 1)] = -c[i] / lead;
    }
    balance(&mut m);
    let schur = Schur::try_new(m, 1e-15, 10_000).ok_or_else(|| Error::Extraction("companion Schur iteration failed".into()))?;
    let ev = schur.eigenvalues().ok_or_else(|| Error::Extraction("companion matrix not triangularised".into()))?;
    Ok(ev.iter().map(|&z| polish(c, z)).collect())
}

/// Parlett–Reinsch diagonal balancing in powers of two.
fn balance(m: &mut DMatrix<C>) {
    let n = m.nrows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let (mut r, mut c) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].norm();
                    r += m[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let (mut cc, mut rr) = (c, r);
            while cc < rr / 2.0 {
                f *= 2.0;
                cc *= 2.0;
                rr /= 2.0;
            }
            while cc >= rr * 2.0 {
                f /= 2.0;
                cc /= 2.0;
                rr *= 2.0;
            }
            if (cc + rr) < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// p and p′ at z; for |z| > 1 through the reversed polynomial in 1/z.
fn horner(c: &[C], z: C) -> (C, C) {
    let mut p = C::new(0.0, 0.0);
    let mut dp = C::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// One Newton step, kept only when it lowers the residual; polish failures
/// keep the eigenvalue and are logged.
fn polish(c: &[C], z: C) -> C {
    let (step, res0) = if z.norm() <= 1.0 {
        let (p, dp) = horner(c, z);
        (p / dp, p.norm())
    } else {
        // w = 1/z: q(w) = Σ c_k w^{d−k}
        let r: Vec<C> = c.iter().rev().cloned().collect();
        let w = z.inv();
        let (q, dq) = horner(&r, w);
        let wn = w - q / dq;
        let (q1, _) = horner(&r, wn);
        if q1.norm() <= q.norm() && wn.is_finite() && wn.norm() > 0.0 {
            return wn.inv();
        }
        if q1.norm() > q.norm() * (1.0 + 1e-12) {
            log::debug!("Newton polish rejected at {z}");
        }
        return z;
    };
    let zn = z - step;
    if zn.is_finite() && horner(c, zn).0.norm() <= res0 {
        zn
    } else {
        log::debug!("Newton polish rejected at {z}");
        z
    }
}

/// s(z) = Σ_j c_{j mod n} exp(πiτj²/n + 2πijz), a section of the degree-n
/// bundle with s(z+1) = s(z), s(z+τ) = e^{−πinτ − 2πinz} s(z). Evaluated with
/// the factor e^{−πn y²/Im τ}, so |value| is the pointwise norm.
#[derive(Debug, Clone)]
pub struct ThetaSection {
    pub n: usize,
    pub tau: C,
    pub c: Vec<C>,
}

impl ThetaSection {
    /// (s, s′) times e^{−πn y²/Im τ}, for any z.
    pub fn eval(&self, z: C) -> (C, C) {
        let n = self.n as f64;
        let t = self.tau;
        let y = z.im;
        let centre = -n * y / t.im;
        let half = (36.0 * n / (PI * t.im)).sqrt().ceil() + 1.0;
        let lo = (centre - half).floor() as i64;
        let hi = (centre + half).ceil() as i64;
        let mut s = C::new(0.0, 0.0);
        let mut ds = C::new(0.0, 0.0);
        for j in lo..=hi {
            let jf = j as f64;
            let e = C::new(0.0, PI) * t * (jf * jf / n) + C::new(0.0, 2.0 * PI * jf) * z - PI * n * y * y / t.im;
            let term = self.c[j.rem_euclid(self.n as i64) as usize] * e.exp();
            s += term;
            ds += term * C::new(0.0, 2.0 * PI * jf);
        }
        (s, ds)
    }

    /// Point on the fundamental parallelogram {u + vτ}.
    fn at(&self, u: f64, v: f64) -> C {
        C::new(u, 0.0) + self.tau * v
    }

    /// Zeros on the fundamental parallelogram by argument-principle counts on
    /// a grid of cells (recursively split), Newton-polished; exactly n in total.
    pub fn zeros(&self) -> Result<Vec<C>> {
        let k = ((4.0 * (self.n as f64).sqrt()).ceil() as usize).max(4);
        let shifts = [(0.0137, 0.0291), (0.311, 0.173), (0.587, 0.729)];
        let mut last = String::new();
        for (du, dv) in shifts {
            match self.zeros_on_grid(k, du, dv) {
                Ok(z) => return Ok(z),
                Err(e) => {
                    log::debug!("zero extraction retry: {e}");
                    last = e.to_string();
                }
            }
        }
        Err(Error::Extraction(last))
    }

    fn zeros_on_grid(&self, k: usize, du: f64, dv: f64) -> Result<Vec<C>> {
        let h = 1.0 / k as f64;
        let mut found = vec![];
        let mut total = 0i64;
        for a in 0..k {
            for b in 0..k {
                let (u0, v0) = (du + a as f64 * h, dv + b as f64 * h);
                let w = self.winding(u0, v0, h, h)?;
                if w < 0 {
                    return Err(Error::Extraction(format!("negative winding {w}")));
                }
                total += w;
                if w > 0 {
                    self.resolve(u0, v0, h, w as usize, 0, &mut found)?;
                }
            }
        }
        if total != self.n as i64 || found.len() != self.n {
            return Err(Error::Extraction(format!("winding total {total}, {} zeros found, expected {}", found.len(), self.n)));
        }
        Ok(found.into_iter().map(|z| reduce_torus(z, self.tau)).collect())
    }

    /// Zeros inside the cell [u0,u0+h]×[v0,v0+h] (parallelogram coordinates) known to hold w of them.
    fn resolve(&self, u0: f64, v0: f64, h: f64, w: usize, depth: usize, out: &mut Vec<C>) -> Result<()> {
        if w == 1 {
            if let Some(z) = self.newton(self.at(u0 + 0.5 * h, v0 + 0.5 * h), u0, v0, h) {
                out.push(z);
                return Ok(());
            }
        }
        if depth >= 12 {
            // cluster below resolution: a zero of multiplicity w
            let z = self.newton(self.at(u0 + 0.5 * h, v0 + 0.5 * h), u0, v0, h).unwrap_or(self.at(u0 + 0.5 * h, v0 + 0.5 * h));
            out.extend(std::iter::repeat_n(z, w));
            return Ok(());
        }
        let g = 0.5 * h;
        let mut sum = 0;
        for (a, b) in [(0.0, 0.0), (g, 0.0), (0.0, g), (g, g)] {
            let wi = self.winding(u0 + a, v0 + b, g, g)?;
            if wi < 0 {
                return Err(Error::Extraction("negative winding in a sub-cell".into()));
            }
            sum += wi as usize;
            if wi > 0 {
                self.resolve(u0 + a, v0 + b, g, wi as usize, depth + 1, out)?;
            }
        }
        if sum != w {
            return Err(Error::Extraction(format!("sub-cell windings {sum} != {w}")));
        }
        Ok(())
    }

    /// Newton iteration from z0; the root must stay within the (slightly enlarged) cell.
    fn newton(&self, z0: C, u0: f64, v0: f64, h: f64) -> Option<C> {
        let mut z = z0;
        for _ in 0..60 {
            let (s, ds) = self.eval(z);
            let step = s / ds;
            if !step.is_finite() {
                return None;
            }
            z -= step;
            if step.norm() < 1e-14 {
                break;
            }
        }
        // parallelogram coordinates of z
        let v = z.im / self.tau.im;
        let u = z.re - v * self.tau.re;
        let m = 0.05 * h;
        if u < u0 - m || u > u0 + h + m || v < v0 - m || v > v0 + h + m {
            return None;
        }
        let (s, ds) = self.eval(z);
        (s.norm() <= 1e-10 * ds.norm().max(1.0)).then_some(z)
    }

    /// Winding number of s around the boundary of a parallelogram cell.
    fn winding(&self, u0: f64, v0: f64, hu: f64, hv: f64) -> Result<i64> {
        let corners = [
            self.at(u0, v0),
            self.at(u0 + hu, v0),
            self.at(u0 + hu, v0 + hv),
            self.at(u0, v0 + hv),
        ];
        let mut total = 0.0;
        for e in 0..4 {
            total += self.arg_change(corners[e], corners[(e + 1) % 4], 0)?;
        }
        Ok((total / (2.0 * PI)).round() as i64)
    }

    /// Continuous change of arg s along the segment [a, b], refined until
    /// every sampled step turns by less than π/4.
    fn arg_change(&self, a: C, b: C, depth: usize) -> Result<f64> {
        let steps = 8;
        let mut prev = self.eval(a).0;
        let mut acc = 0.0;
        for i in 1..=steps {
            let z = a + (b - a) * (i as f64 / steps as f64);
            let cur = self.eval(z).0;
            if cur.norm() == 0.0 || prev.norm() == 0.0 {
                return Err(Error::Extraction("zero on a cell edge".into()));
            }
            let d = (cur / prev).arg();
            if d.abs() > PI / 4.0 {
                if depth >= 10 {
                    return Err(Error::Extraction("argument unresolved along an edge".into()));
                }
                let za = a + (b - a) * ((i - 1) as f64 / steps as f64);
                acc += self.arg_change(za, z, depth + 1)?;
            } else {
                acc += d;
            }
            prev = cur;
        }
        Ok(acc)
    }
}

/// Gram matrix of θ_k(z) = Σ_m exp(πinτ(m+k/n)² + 2πin(m+k/n)z) for
/// ∫ s₁ s̄₂ e^{−2πn y²/Im τ} ω, by the trapezoidal rule (spectrally accurate
/// for these periodic integrands).
fn theta_gram(n: usize, tau: C) -> DMatrix<C> {
    let nu = 4 * n + 32;
    let nv = 4 * n + 32;
    let mut basis = Vec::with_capacity(n);
    for k in 0..n {
        let mut c = vec![C::new(0.0, 0.0); n];
        c[k] = C::new(1.0, 0.0);
        basis.push(ThetaSection { n, tau, c });
    }
    let mut g = DMatrix::<C>::zeros(n, n);
    let w = 1.0 / (nu * nv) as f64;
    for a in 0..nu {
        for b in 0..nv {
            // the weighted integrand is Λ-periodic, so any fundamental domain will do
            let z = C::new(a as f64 / nu as f64, 0.0) + tau * (b as f64 / nv as f64);
            let vals: Vec<C> = basis.iter().map(|s| s.eval(z).0).collect();
            for i in 0..n {
                for j in 0..=i {
                    let v = vals[i] * vals[j].conj() * w;
                    g[(i, j)] += v;
                    if i != j {
                        g[(j, i)] += v.conj();
                    }
                }
            }
        }
    }
    g
}

/// Σ zeros mod Λ, reduced to the fundamental domain.
pub fn abel_sum(zeros: &AtomicConfiguration, tau: C) -> C {
    reduce_torus(zeros.points.iter().map(|p| p.coord).sum(), tau)
}

/// Distance between two classes of ℂ/Λ.
pub fn torus_class_distance(a: C, b: C, tau: C) -> f64 {
    Geometry::torus(tau).dist(&[a.re, a.im, 0.0], &[b.re, b.im, 0.0])
}

/// Hole event: no zero in the open hole.
pub fn is_hole_event(zeros: &AtomicConfiguration, d: &HoleRegion, g: &Geometry) -> bool {
    !zeros.points.iter().any(|p| d.contains_loc(&p.loc(), g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroSeparationReport {
    pub m: usize,
    pub min_pair_distance: f64,
    /// m^{−4}
    pub pair_threshold: f64,
    pub pairs_ok: bool,
    /// Torus: index of the distinguished zero q and its distance to the others.
    pub q_index: Option<usize>,
    pub q_distance: Option<f64>,
    pub q_ok: Option<bool>,
    pub satisfied: bool,
}

/// Membership test for the separation set: pairwise distances ≥ m^{−4}; on the
/// torus the zero with the largest nearest-neighbour distance plays q and must
/// stay ≥ 1/m from the others, which are the m points p_j.
pub fn separation_audit(zeros: &AtomicConfiguration, g: &Geometry, m: usize) -> ZeroSeparationReport {
    let locs = zeros.locs();
    let n = locs.len();
    let thr = (m as f64).powi(-4);
    let nearest: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| g.dist(&locs[i], &locs[j])).fold(f64::INFINITY, f64::min))
        .collect();
    let (q_index, q_distance, q_ok, p_idx): (Option<usize>, Option<f64>, Option<bool>, Vec<usize>) = match g {
        Geometry::Sphere => (None, None, None, (0..n).collect()),
        Geometry::Torus { .. } => {
            let q = (0..n).fold(0, |b, i| if nearest[i] > nearest[b] { i } else { b });
            let qd = nearest[q];
            (Some(q), Some(qd), Some(qd >= 1.0 / m as f64), (0..n).filter(|&i| i != q).collect())
        }
    };
    let mut min_pair = f64::INFINITY;
    for (a, &i) in p_idx.iter().enumerate() {
        for &j in &p_idx[a + 1..] {
            min_pair = min_pair.min(g.dist(&locs[i], &locs[j]));
        }
    }
    let pairs_ok = min_pair >= thr;
    ZeroSeparationReport {
        m,
        min_pair_distance: min_pair,
        pair_threshold: thr,
        pairs_ok,
        q_index,
        q_distance,
        q_ok,
        satisfied: pairs_ok && q_ok.unwrap_or(true),
    }
}
