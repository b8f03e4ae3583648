//! Riemann invariants `r_k = F(x_k)` and characteristic speeds
//! `λ_k = tan φ_k` at the critical points of the fibre polynomial.
//!
//! Complex coordinates are ordered `μ = (Λ^{N/2}, a_{N-1}, …, a_{1-N})`;
//! real coordinates are `(Λ^{N/2}, u_0, u_1, v_1, …)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{MagflowError, Result};
use crate::fields::{FieldPoint, Jet};
use crate::linalg::kernel_svd;
use crate::system::build_matrices;
use crate::trigpoly::{circular_distance, CriticalKind, CriticalSet, TOL_ROOT, TOL_SEP};

/// Speeds with `|cos φ_k|` at or below this are reported as vertical.
pub const TOL_VERTICAL: f64 = 1e-3;
/// Default relative FD step for gradients of `r`.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct CharData {
    pub angles: Vec<f64>,
    pub points: Vec<Complex64>,
    pub kinds: Vec<CriticalKind>,
    pub invariants: Vec<f64>,
    /// `(cos φ_k, sin φ_k)`, the characteristic direction.
    pub directions: Vec<(f64, f64)>,
    /// `tan φ_k`, or `None` when the characteristic is (nearly) vertical.
    pub speeds: Vec<Option<f64>>,
    pub value_collision: bool,
}

impl CharData {
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn all_speeds_valid(&self) -> bool {
        self.speeds.iter().all(Option::is_some)
    }

    /// Speeds, or `NearVertical` naming the first vertical characteristic.
    pub fn valid_speeds(&self) -> Result<Vec<f64>> {
        self.speeds
            .iter()
            .enumerate()
            .map(|(k, s)| {
                s.ok_or_else(|| {
                    MagflowError::NearVertical(format!(
                        "characteristic {k} at angle {} is vertical",
                        self.angles[k]
                    ))
                })
            })
            .collect()
    }

    /// Smallest gap between cyclically adjacent critical values.
    pub fn min_adjacent_gap(&self) -> f64 {
        let m = self.len();
        (0..m)
            .map(|k| (self.invariants[k] - self.invariants[(k + 1) % m]).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn char_data(point: &FieldPoint) -> Result<CharData> {
    char_data_with(point, TOL_VERTICAL)
}

pub fn char_data_with(point: &FieldPoint, tol_vertical: f64) -> Result<CharData> {
    let f = point.trig_poly();
    let cs = hyperbolic_set(point)?;
    let invariants: Vec<f64> = cs.angles.iter().map(|&a| f.eval(a)).collect();
    let directions: Vec<(f64, f64)> = cs.angles.iter().map(|a| (a.cos(), a.sin())).collect();
    let speeds = directions
        .iter()
        .map(|&(c, s)| (c.abs() > tol_vertical).then(|| s / c))
        .collect();
    let scale = invariants.iter().fold(1.0_f64, |m, r| m.max(r.abs()));
    let mut value_collision = false;
    for i in 0..invariants.len() {
        for j in i + 1..invariants.len() {
            if (invariants[i] - invariants[j]).abs() <= 1e-9 * scale {
                value_collision = true;
            }
        }
    }
    Ok(CharData {
        angles: cs.angles,
        points: cs.points,
        kinds: cs.kinds,
        invariants,
        directions,
        speeds,
        value_collision,
    })
}

fn hyperbolic_set(point: &FieldPoint) -> Result<CriticalSet> {
    let cs = point.trig_poly().critical_points(TOL_ROOT)?;
    if !cs.is_strictly_hyperbolic(point.degree(), TOL_SEP) {
        return Err(MagflowError::NotHyperbolic(format!(
            "{} critical points on the circle, {} required and simple",
            cs.len(),
            2 * point.degree()
        )));
    }
    Ok(cs)
}

/// For each base angle, the index of the matching critical point of `cs`.
/// The match must be the unique nearest point and closer than half the
/// smallest base separation, otherwise the branches are ambiguous.
pub fn track_branches(base_angles: &[f64], cs: &CriticalSet) -> Result<Vec<usize>> {
    let m = base_angles.len();
    if cs.len() != m {
        return Err(MagflowError::BranchCrossing(format!(
            "{} critical points, expected {m}",
            cs.len()
        )));
    }
    let min_sep = (0..m)
        .map(|k| circular_distance(base_angles[k], base_angles[(k + 1) % m]))
        .fold(f64::INFINITY, f64::min);
    let mut used = vec![false; m];
    let mut out = Vec::with_capacity(m);
    for &b in base_angles {
        let (j, d) = cs
            .angles
            .iter()
            .enumerate()
            .map(|(j, &a)| (j, circular_distance(a, b)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty");
        if d >= min_sep / 2.0 || used[j] {
            return Err(MagflowError::BranchCrossing(format!(
                "critical point near angle {b} moved by {d}"
            )));
        }
        used[j] = true;
        out.push(j);
    }
    Ok(out)
}

/// Critical angles at `point`, ordered to match `base_angles`.
pub fn tracked_angles(point: &FieldPoint, base_angles: &[f64]) -> Result<Vec<f64>> {
    let cs = hyperbolic_set(point)?;
    let idx = track_branches(base_angles, &cs)?;
    Ok(idx.iter().map(|&j| cs.angles[j]).collect())
}

/// Riemann invariants at `point`, ordered to match `base_angles`.
pub fn tracked_invariants(point: &FieldPoint, base_angles: &[f64]) -> Result<Vec<f64>> {
    let f = point.trig_poly();
    Ok(tracked_angles(point, base_angles)?
        .iter()
        .map(|&a| f.eval(a))
        .collect())
}

/// `∂r_k/∂U_l = ∂F/∂U_l(φ_k)`: the critical angle moves, but `F_φ = 0`
/// there, so only the explicit dependence survives.
pub fn riemann_gradient(point: &FieldPoint, angles: &[f64]) -> DMatrix<f64> {
    let m = point.values().len();
    let mut g = DMatrix::zeros(angles.len(), m);
    for l in 0..m {
        let d = point.trig_poly_derivative(l);
        for (k, &a) in angles.iter().enumerate() {
            g[(k, l)] = d.eval(a);
        }
    }
    g
}

/// `∂φ_k/∂U_l = -∂_l F_φ(φ_k) / F_φφ(φ_k)`.
pub fn angle_gradient(point: &FieldPoint, angles: &[f64]) -> DMatrix<f64> {
    let f = point.trig_poly();
    let m = point.values().len();
    let mut g = DMatrix::zeros(angles.len(), m);
    for l in 0..m {
        let d = point.trig_poly_derivative(l);
        for (k, &a) in angles.iter().enumerate() {
            g[(k, l)] = -d.eval_dphi(a) / f.eval_d2phi(a);
        }
    }
    g
}

/// Central-difference gradient of the tracked invariants with respect to
/// the unknowns `U`, step `h·(1 + |U_l|)`.
pub fn fd_riemann_gradient(point: &FieldPoint, h: f64) -> Result<DMatrix<f64>> {
    let base = hyperbolic_set(point)?;
    let m = point.values().len();
    let mut g = DMatrix::zeros(base.len(), m);
    for l in 0..m {
        let ul = point.values()[l];
        let step = h * (1.0 + ul.abs());
        let at = |v: f64| -> Result<Vec<f64>> {
            let p = point
                .with_component(l, v)
                .map_err(|_| step_too_large(l, step))?;
            tracked_invariants(&p, &base.angles).map_err(|_| step_too_large(l, step))
        };
        let (plus, minus) = (at(ul + step)?, at(ul - step)?);
        for k in 0..base.len() {
            g[(k, l)] = (plus[k] - minus[k]) / (2.0 * step);
        }
    }
    Ok(g)
}

fn step_too_large(l: usize, step: f64) -> MagflowError {
    MagflowError::StepTooLarge(format!(
        "hyperbolicity or branch order lost stepping component {l} by {step:e}"
    ))
}

/// The §3 determinant identity data.
#[derive(Debug, Clone)]
pub struct ComplexJacobian {
    /// `M_{ks} = ∂F/∂μ_s (x_k)`.
    pub m: DMatrix<Complex64>,
    pub det_m: Complex64,
    /// `det` of rows `(x_k^{2N-1}, …, x_k, 1)`.
    pub vandermonde: Complex64,
    /// `(-1)^{N+1} · 2V`.
    pub rhs: Complex64,
    /// `2 Π_{i>j} |x_i - x_j|`.
    pub modulus: f64,
}

pub fn jacobian_complex(point: &FieldPoint) -> Result<ComplexJacobian> {
    let cs = hyperbolic_set(point)?;
    Ok(complex_jacobian_at(&cs.points))
}

/// The identity data for arbitrary points `x_k` on the circle.
pub fn complex_jacobian_at(xs: &[Complex64]) -> ComplexJacobian {
    let m2 = xs.len();
    let n = (m2 / 2) as i32;
    let mut m = DMatrix::zeros(m2, m2);
    let mut v = DMatrix::zeros(m2, m2);
    for (k, &x) in xs.iter().enumerate() {
        m[(k, 0)] = x.powi(n) + x.powi(-n);
        for s in 1..m2 {
            m[(k, s)] = x.powi(n - s as i32);
        }
        for s in 0..m2 {
            v[(k, s)] = x.powi((m2 - 1 - s) as i32);
        }
    }
    let det_m = m.clone().determinant();
    let vandermonde = v.determinant();
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let mut modulus = 2.0;
    for i in 0..m2 {
        for j in 0..i {
            modulus *= (xs[i] - xs[j]).norm();
        }
    }
    ComplexJacobian {
        m,
        det_m,
        vandermonde,
        rhs: sign * 2.0 * vandermonde,
        modulus,
    }
}

/// Finite-difference Jacobian of `r` with respect to the real variables
/// `(Λ^{N/2}, u_0, u_1, v_1, …)`, step `h·(1 + |w|)`.
pub fn jacobian_real_matrix(point: &FieldPoint, h: f64) -> Result<DMatrix<f64>> {
    let base = hyperbolic_set(point)?;
    let n = point.degree() as f64;
    let m = point.values().len();
    let p0 = point.lambda().powf(n / 2.0);
    let mut jac = DMatrix::zeros(m, m);
    for l in 0..m {
        let w0 = if l == 0 { p0 } else { point.values()[l] };
        let step = h * (1.0 + w0.abs());
        let at = |w: f64| -> Result<Vec<f64>> {
            let value = if l == 0 {
                if w <= 0.0 {
                    return Err(step_too_large(l, step));
                }
                w.powf(2.0 / n)
            } else {
                w
            };
            let p = point
                .with_component(l, value)
                .map_err(|_| step_too_large(l, step))?;
            tracked_invariants(&p, &base.angles).map_err(|_| step_too_large(l, step))
        };
        let (plus, minus) = (at(w0 + step)?, at(w0 - step)?);
        for k in 0..m {
            jac[(k, l)] = (plus[k] - minus[k]) / (2.0 * step);
        }
    }
    Ok(jac)
}

/// `det ∂r/∂(Λ^{N/2}, u_0, u_1, v_1, …)` by finite differences. Its modulus
/// equals `2^{N-1} |det M|`: each pair `(a_k, a_{-k})` contributes a factor
/// `|det [[1, i], [1, -i]]| = 2` to the change of variables.
pub fn jacobian_real(point: &FieldPoint, h: f64) -> Result<f64> {
    Ok(jacobian_real_matrix(point, h)?.determinant())
}

/// Largest `|∇r_k·ξ + λ_k ∇r_k·η|` over an orthonormal basis `(ξ, η)` of the
/// jet kernel `Aξ + Bη = 0` at the jet's point. Vanishes when every
/// admissible jet advects the invariants with their speeds.
pub fn advection_check(jet: &Jet) -> Result<f64> {
    let point = &jet.point;
    let cd = char_data(point)?;
    let speeds = cd.valid_speeds()?;
    let m = point.values().len();
    let kernel = kernel_svd(&build_matrices(point).stacked());
    if kernel.ncols() != m {
        return Err(MagflowError::KernelDimensionUnexpected {
            expected: m,
            found: kernel.ncols(),
        });
    }
    let grad = fd_riemann_gradient(point, FD_STEP)?;
    let mut worst = 0.0_f64;
    for c in 0..kernel.ncols() {
        let col = kernel.column(c);
        for (k, lam) in speeds.iter().enumerate() {
            let (mut gx, mut gy) = (0.0, 0.0);
            for l in 0..m {
                gx += grad[(k, l)] * col[l];
                gy += grad[(k, l)] * col[m + l];
            }
            worst = worst.max((gx + lam * gy).abs());
        }
    }
    Ok(worst)
}

/// `max_k |∇r_k·U_x + λ_k ∇r_k·U_y|` for the jet's own derivatives; small
/// only when the jet solves the system.
pub fn advection_residual(jet: &Jet) -> Result<f64> {
    let cd = char_data(&jet.point)?;
    let speeds = cd.valid_speeds()?;
    let grad = riemann_gradient(&jet.point, &cd.angles);
    let mut worst = 0.0_f64;
    for (k, lam) in speeds.iter().enumerate() {
        let row = grad.row(k);
        let gx: f64 = row.iter().zip(&jet.dx).map(|(a, b)| a * b).sum();
        let gy: f64 = row.iter().zip(&jet.dy).map(|(a, b)| a * b).sum();
        worst = worst.max((gx + lam * gy).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn flat_degree_one() {
        let cd = char_data(&FieldPoint::flat(1)).unwrap();
        assert!((cd.angles[0]).abs() < 1e-12 && (cd.angles[1] - PI).abs() < 1e-12);
        assert!((cd.invariants[0] - 2.0).abs() < 1e-12);
        assert!((cd.invariants[1] + 2.0).abs() < 1e-12);
        assert!(cd.speeds.iter().all(|s| s.unwrap().abs() < 1e-12));
        assert!(!cd.value_collision);
    }

    #[test]
    fn flat_degree_two_collides() {
        let cd = char_data(&FieldPoint::flat(2)).unwrap();
        let want = [2.0, -2.0, 2.0, -2.0];
        for (r, w) in cd.invariants.iter().zip(want) {
            assert!((r - w).abs() < 1e-12);
        }
        assert!(cd.value_collision);
        assert!(cd.speeds[1].is_none() && cd.speeds[3].is_none());
    }

    #[test]
    fn complex_jacobian_degree_one() {
        let j = jacobian_complex(&FieldPoint::flat(1)).unwrap();
        assert!((j.det_m - Complex64::new(4.0, 0.0)).norm() < 1e-12);
        assert!((j.vandermonde - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        assert!((j.rhs - j.det_m).norm() < 1e-12);
        assert!((j.modulus - 4.0).abs() < 1e-12);
    }

    #[test]
    fn real_jacobian_degree_one() {
        let d = jacobian_real(&FieldPoint::flat(1), 1e-5).unwrap();
        assert!((d.abs() - 4.0).abs() < 1e-6, "{d}");
    }

    #[test]
    fn not_hyperbolic_rejected() {
        // F = 2cos2φ + 10cosφ has only two critical points
        let p = FieldPoint::new(2, vec![1.0, 0.0, 5.0, 0.0]).unwrap();
        assert!(matches!(char_data(&p), Err(MagflowError::NotHyperbolic(_))));
    }
}
