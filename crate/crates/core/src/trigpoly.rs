//! Real trigonometric polynomials on the unit circle.
//!
//! A [`TrigPoly`] of degree `N` stores `a_0..a_N` and represents
//! `F(φ) = Σ_{k=-N..N} a_k e^{ikφ}` with `a_{-k} = conj(a_k)`, so `F` is real
//! for real `φ`. Critical points of `F` are the unit-circle roots of the
//! degree-`2N` algebraic polynomial `P(z) = Σ_{k≠0} k a_k z^{k+N}`, found
//! from companion-matrix eigenvalues and polished by Newton steps.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{MagflowError, Result};

/// Default tolerance for root residuals and degenerate-critical detection.
pub const TOL_ROOT: f64 = 1e-9;
/// Default minimum angular separation between distinct critical points.
pub const TOL_SEP: f64 = 1e-6;
/// Eigenvalues this close to the unit circle are accepted as circle roots.
pub const CIRCLE_MEMBERSHIP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    coeffs: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    Maximum,
    Minimum,
    Degenerate,
}

/// Unit-circle critical points of a [`TrigPoly`], sorted by angle in `[0, 2π)`.
#[derive(Debug, Clone)]
pub struct CriticalSet {
    pub angles: Vec<f64>,
    pub points: Vec<Complex64>,
    pub kinds: Vec<CriticalKind>,
    /// Number of roots of `P(z)` counted with multiplicity (always `2N`).
    pub algebraic_roots: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hyperbolicity {
    StrictlyHyperbolic,
    Degenerate,
}

impl TrigPoly {
    /// Builds a polynomial from `a_0..a_N`. `a_0` must be real and the degree
    /// at least one.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(MagflowError::Validation(
                "trigonometric polynomial needs degree >= 1".into(),
            ));
        }
        let scale: f64 = coeffs.iter().map(|c| c.norm()).sum::<f64>().max(1.0);
        if coeffs[0].im.abs() > 1e-14 * scale {
            return Err(MagflowError::Validation(format!(
                "a_0 must be real, got imaginary part {}",
                coeffs[0].im
            )));
        }
        let mut coeffs = coeffs;
        coeffs[0].im = 0.0;
        Ok(TrigPoly { coeffs })
    }

    /// Builds from real parts `u_0..u_N` and imaginary parts `v_1..v_N`.
    pub fn from_parts(u: &[f64], v: &[f64]) -> Result<Self> {
        if v.len() + 1 != u.len() {
            return Err(MagflowError::Validation(format!(
                "need {} imaginary parts, got {}",
                u.len().saturating_sub(1),
                v.len()
            )));
        }
        let coeffs = u
            .iter()
            .enumerate()
            .map(|(k, &re)| Complex64::new(re, if k == 0 { 0.0 } else { v[k - 1] }))
            .collect();
        Self::new(coeffs)
    }

    /// The zero polynomial of the given degree (all coefficients zero).
    pub(crate) fn zeros(degree: usize) -> Self {
        TrigPoly {
            coeffs: vec![Complex64::new(0.0, 0.0); degree + 1],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients `a_0..a_N`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// `a_k` for any integer `k`: conjugate for negative `k`, zero beyond the degree.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k.unsigned_abs() as usize;
        match self.coeffs.get(idx) {
            None => Complex64::new(0.0, 0.0),
            Some(c) if k < 0 => c.conj(),
            Some(c) => *c,
        }
    }

    pub fn eval(&self, phi: f64) -> f64 {
        let mut s = self.coeffs[0].re;
        for (k, a) in self.coeffs.iter().enumerate().skip(1) {
            s += 2.0 * (a * Complex64::cis(k as f64 * phi)).re;
        }
        s
    }

    /// `dF/dφ`.
    pub fn eval_dphi(&self, phi: f64) -> f64 {
        let mut s = 0.0;
        for (k, a) in self.coeffs.iter().enumerate().skip(1) {
            s -= 2.0 * k as f64 * (a * Complex64::cis(k as f64 * phi)).im;
        }
        s
    }

    /// `d²F/dφ²`.
    pub fn eval_d2phi(&self, phi: f64) -> f64 {
        let mut s = 0.0;
        for (k, a) in self.coeffs.iter().enumerate().skip(1) {
            let k = k as f64;
            s -= 2.0 * k * k * (a * Complex64::cis(k * phi)).re;
        }
        s
    }

    /// `F(z) = Σ a_k z^k` for an arbitrary nonzero complex `z`.
    pub fn eval_z(&self, z: Complex64) -> Complex64 {
        let n = self.degree() as i64;
        (-n..=n).map(|k| self.coeff(k) * z.powi(k as i32)).sum()
    }

    /// Complex derivative `F'(z) = Σ k a_k z^{k-1}`.
    pub fn eval_dz(&self, z: Complex64) -> Complex64 {
        let n = self.degree() as i64;
        (-n..=n)
            .filter(|&k| k != 0)
            .map(|k| self.coeff(k) * k as f64 * z.powi(k as i32 - 1))
            .sum()
    }

    /// Coefficients `p_0..p_{2N}` of `P(z) = z^N · z F'(z)`.
    pub fn critical_polynomial(&self) -> Vec<Complex64> {
        let n = self.degree() as i64;
        (0..=2 * n)
            .map(|j| {
                let k = j - n;
                self.coeff(k) * k as f64
            })
            .collect()
    }

    /// All `2N` roots of the critical polynomial, polished by Newton steps.
    pub fn algebraic_critical_roots(&self) -> Result<Vec<Complex64>> {
        let p = self.critical_polynomial();
        let deg = p.len() - 1;
        let lead = p[deg];
        if lead.norm() == 0.0 {
            return Err(MagflowError::RootFindingFailure(
                "leading coefficient a_N vanishes".into(),
            ));
        }
        let mut companion = DMatrix::<Complex64>::zeros(deg, deg);
        for j in 0..deg {
            companion[(0, j)] = -p[deg - 1 - j] / lead;
        }
        for i in 1..deg {
            companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        let eig = companion.schur().eigenvalues().ok_or_else(|| {
            MagflowError::RootFindingFailure("companion Schur form did not converge".into())
        })?;
        let mut roots: Vec<Complex64> = eig.iter().copied().collect();
        for z in roots.iter_mut() {
            *z = newton_polish(&p, *z);
        }
        if roots.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MagflowError::RootFindingFailure(
                "non-finite root after polishing".into(),
            ));
        }
        Ok(roots)
    }

    /// Unit-circle critical points, sorted by angle and classified by the
    /// sign of the second derivative.
    pub fn critical_points(&self, tol_root: f64) -> Result<CriticalSet> {
        let roots = self.algebraic_critical_roots()?;
        let mut angles: Vec<f64> = roots
            .iter()
            .filter(|z| (z.norm() - 1.0).abs() <= CIRCLE_MEMBERSHIP)
            .map(|z| {
                let phi = self.refine_angle(z.arg());
                normalize_angle(phi)
            })
            .collect();
        angles.sort_by(|a, b| a.total_cmp(b));
        for &phi in &angles {
            let resid = self.eval_dphi(phi).abs();
            if resid > tol_root * self.coeff_scale().max(1.0) {
                return Err(MagflowError::RootFindingFailure(format!(
                    "critical residual {resid:e} at angle {phi}"
                )));
            }
        }
        let kinds = angles
            .iter()
            .map(|&phi| {
                let d2 = self.eval_d2phi(phi);
                if d2.abs() <= tol_root {
                    CriticalKind::Degenerate
                } else if d2 < 0.0 {
                    CriticalKind::Maximum
                } else {
                    CriticalKind::Minimum
                }
            })
            .collect();
        Ok(CriticalSet {
            points: angles.iter().map(|&a| Complex64::cis(a)).collect(),
            angles,
            kinds,
            algebraic_roots: roots,
        })
    }

    pub fn classify(&self) -> Result<Hyperbolicity> {
        self.classify_with(TOL_ROOT, TOL_SEP)
    }

    pub fn classify_with(&self, tol_root: f64, tol_sep: f64) -> Result<Hyperbolicity> {
        let cs = self.critical_points(tol_root)?;
        Ok(if cs.is_strictly_hyperbolic(self.degree(), tol_sep) {
            Hyperbolicity::StrictlyHyperbolic
        } else {
            Hyperbolicity::Degenerate
        })
    }

    /// Product of two trigonometric polynomials (coefficient convolution).
    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let (n, m) = (self.degree() as i64, other.degree() as i64);
        let deg = n + m;
        let coeffs = (0..=deg)
            .map(|k| {
                let lo = (k - m).max(-n);
                let hi = (k + m).min(n);
                (lo..=hi)
                    .map(|j| self.coeff(j) * other.coeff(k - j))
                    .sum::<Complex64>()
            })
            .collect::<Vec<_>>();
        let mut out = TrigPoly { coeffs };
        out.coeffs[0].im = 0.0;
        out
    }

    /// `F^m` by repeated convolution.
    pub fn power(&self, m: u32) -> TrigPoly {
        assert!(m >= 1, "power requires m >= 1");
        let mut acc = self.clone();
        for _ in 1..m {
            acc = acc.mul(self);
        }
        acc
    }

    pub(crate) fn coeff_scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum::<f64>().max(1e-300)
    }

    fn refine_angle(&self, phi0: f64) -> f64 {
        let mut phi = phi0;
        let mut resid = self.eval_dphi(phi).abs();
        for _ in 0..4 {
            let d2 = self.eval_d2phi(phi);
            if d2 == 0.0 {
                break;
            }
            let next = phi - self.eval_dphi(phi) / d2;
            let r = self.eval_dphi(next).abs();
            if r < resid {
                phi = next;
                resid = r;
            } else {
                break;
            }
        }
        phi
    }
}

impl CriticalSet {
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Exactly `2N` distinct, simple circle roots.
    pub fn is_strictly_hyperbolic(&self, degree: usize, tol_sep: f64) -> bool {
        let m = self.angles.len();
        if m != 2 * degree || self.kinds.contains(&CriticalKind::Degenerate) {
            return false;
        }
        (0..m).all(|k| circular_distance(self.angles[k], self.angles[(k + 1) % m]) > tol_sep)
    }
}

/// `Π x_k` over the critical points.
pub fn vieta_product(cs: &CriticalSet, degree: usize) -> Result<Complex64> {
    if cs.len() != 2 * degree {
        return Err(MagflowError::WrongCount {
            expected: 2 * degree,
            found: cs.len(),
        });
    }
    Ok(cs.points.iter().product())
}

pub fn normalize_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Newton on `P`, accepting steps only while the residual decreases.
fn newton_polish(p: &[Complex64], z0: Complex64) -> Complex64 {
    let eval = |z: Complex64| {
        let mut v = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for c in p.iter().rev() {
            d = d * z + v;
            v = v * z + c;
        }
        (v, d)
    };
    let mut z = z0;
    let (mut v, mut d) = eval(z);
    for _ in 0..3 {
        if d.norm() == 0.0 {
            break;
        }
        let next = z - v / d;
        let (nv, nd) = eval(next);
        if nv.norm() < v.norm() {
            z = next;
            v = nv;
            d = nd;
        } else {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cos_poly(n: usize) -> TrigPoly {
        let mut coeffs = vec![c(0.0, 0.0); n + 1];
        coeffs[n] = c(1.0, 0.0);
        TrigPoly::new(coeffs).unwrap()
    }

    #[test]
    fn eval_simple_cosines() {
        let f = cos_poly(1);
        assert!((f.eval(0.0) - 2.0).abs() < 1e-15);
        assert!(f.eval(FRAC_PI_2).abs() < 1e-15);
        assert!((f.eval_dphi(FRAC_PI_2) + 2.0).abs() < 1e-15);
        let g = cos_poly(2);
        assert!((g.eval_dphi(FRAC_PI_4) + 4.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_complex_constant_term() {
        assert!(TrigPoly::new(vec![c(0.0, 1.0), c(1.0, 0.0)]).is_err());
        assert!(TrigPoly::new(vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn coefficient_symmetry_and_truncation() {
        let f = TrigPoly::new(vec![c(0.5, 0.0), c(0.1, 0.2), c(1.0, 0.0)]).unwrap();
        assert_eq!(f.coeff(-1), c(0.1, -0.2));
        assert_eq!(f.coeff(5), c(0.0, 0.0));
    }

    #[test]
    fn critical_points_of_cosines() {
        let cs = cos_poly(1).critical_points(TOL_ROOT).unwrap();
        assert_eq!(cs.len(), 2);
        assert!(cs.angles[0].abs() < 1e-12);
        assert!((cs.angles[1] - PI).abs() < 1e-12);
        assert_eq!(cs.kinds, vec![CriticalKind::Maximum, CriticalKind::Minimum]);

        let cs = cos_poly(2).critical_points(TOL_ROOT).unwrap();
        let expected = [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2];
        assert_eq!(cs.len(), 4);
        for (a, e) in cs.angles.iter().zip(expected) {
            assert!((a - e).abs() < 1e-12, "{a} vs {e}");
        }
    }

    #[test]
    fn vieta_of_cosines() {
        for n in 1..=2 {
            let cs = cos_poly(n).critical_points(TOL_ROOT).unwrap();
            let p = vieta_product(&cs, n).unwrap();
            assert!((p + 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn vieta_wrong_count() {
        // shifted cosine with a large constant: still two points, ask for N=2
        let cs = cos_poly(1).critical_points(TOL_ROOT).unwrap();
        assert!(matches!(
            vieta_product(&cs, 2),
            Err(MagflowError::WrongCount { expected: 4, found: 2 })
        ));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            cos_poly(2).classify().unwrap(),
            Hyperbolicity::StrictlyHyperbolic
        );
        let f = TrigPoly::new(vec![c(3.7, 0.0), c(0.5, 0.0)]).unwrap();
        assert_eq!(f.classify().unwrap(), Hyperbolicity::StrictlyHyperbolic);
    }

    #[test]
    fn collision_is_degenerate() {
        // F = 2cos2φ + 2b cosφ has F_φ = -2 sinφ (4cosφ + b); b = 4 merges
        // the pair cosφ = -b/4 into a triple point at π.
        let f = TrigPoly::new(vec![c(0.0, 0.0), c(4.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(f.classify().unwrap(), Hyperbolicity::Degenerate);
        // just before the collision it is still hyperbolic
        let f = TrigPoly::new(vec![c(0.0, 0.0), c(3.9, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(f.classify().unwrap(), Hyperbolicity::StrictlyHyperbolic);
        // past it the pair leaves the circle
        let f = TrigPoly::new(vec![c(0.0, 0.0), c(4.5, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(f.classify().unwrap(), Hyperbolicity::Degenerate);
    }

    #[test]
    fn power_examples() {
        let f = cos_poly(1);
        let sq = f.power(2);
        assert_eq!(sq.degree(), 2);
        assert!((sq.coeff(2) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(sq.coeff(1).norm() < 1e-15);
        assert!((sq.coeff(0) - c(2.0, 0.0)).norm() < 1e-15);
        assert_eq!(f.power(1), f);
    }
}
