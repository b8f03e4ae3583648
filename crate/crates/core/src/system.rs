//! The quasi-linear system on the `2N` unknowns.
//!
//! Collecting Fourier modes of `dF/dt = 0` gives, for each `k`,
//! `Q_k - ik Ω √Λ a_k = 0`. The system assembled here is
//!
//! * `k = 0`: `Q_0 = 0` (no magnetic term), scaled by `√Λ`;
//! * `1 ≤ k < N`: `N Q_k Λ^{N/2} = k Q_N a_k` after eliminating `Ω`, scaled by `Λ^{-N/2}`,
//!   contributing its real and imaginary parts;
//! * `Re Q_N · Λ^{(1-N)/2} = 0`, which makes `Ω = Q_N / (iN√Λ a_N)` real.
//!
//! All components are linear in the first derivatives, so the system reads
//! `A(U) U_x + B(U) U_y = 0` with `U = (Λ, u_0, u_1, v_1, …)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{MagflowError, Result};
use crate::fields::{FieldPoint, Jet};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// The `2N` residual components, ordered
/// `[eq k=0; Re E_1, Im E_1, …, Re E_{N-1}, Im E_{N-1}; Re Q_N Λ^{(1-N)/2}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemResidual(pub Vec<f64>);

impl SystemResidual {
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `A`, `B` with `A·U_x + B·U_y` equal to the system residual.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

/// Magnetic field recovered from a jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaReport {
    /// `Im Q_N / (N Λ^{(N+1)/2})`.
    pub omega: f64,
    /// `Re Q_N · Λ^{(1-N)/2}`; vanishes on solutions.
    pub consistency: f64,
    /// `Ω` from the divergence form
    /// `ΩΛ = [(v_{N-1}Λ^{(1-N)/2})_x - (u_{N-1}Λ^{(1-N)/2})_y] / 2N`.
    pub omega_divergence: f64,
}

/// `Q_k` evaluated from the jet.
pub fn q_residual(jet: &Jet, k: i64) -> Complex64 {
    let lam = jet.point.lambda();
    let (lx, ly) = (jet.dx[0], jet.dy[0]);
    let (am, amx, amy) = jet.coeff_with_derivatives(k - 1);
    let (ap, apx, apy) = jet.coeff_with_derivatives(k + 1);
    let (km, kp) = ((k - 1) as f64, (k + 1) as f64);
    (amx + apx) / 2.0 + (amy - apy) / (2.0 * I) + ly / (2.0 * lam) * I * (km * am + kp * ap) / 2.0
        - lx / (2.0 * lam) * (km * am - kp * ap) / 2.0
}

pub fn omega(jet: &Jet) -> OmegaReport {
    let n = jet.degree();
    let nf = n as f64;
    let lam = jet.point.lambda();
    let qn = q_residual(jet, n as i64);
    let omega = qn.im / (nf * lam.powf((nf + 1.0) / 2.0));
    let consistency = qn.re * lam.powf((1.0 - nf) / 2.0);

    // divergence form, assembled from components
    let c = lam.powf((1.0 - nf) / 2.0);
    let dc = (1.0 - nf) / 2.0 * lam.powf((-1.0 - nf) / 2.0);
    let (cx, cy) = (dc * jet.dx[0], dc * jet.dy[0]);
    let (a, ax, ay) = jet.coeff_with_derivatives(n as i64 - 1);
    let cv_x = cx * a.im + c * ax.im;
    let cu_y = cy * a.re + c * ay.re;
    let omega_divergence = (cv_x - cu_y) / (2.0 * nf * lam);
    OmegaReport {
        omega,
        consistency,
        omega_divergence,
    }
}

/// `N Q_k Λ^{N/2} - k Q_N a_k`, the unscaled elimination of `Ω` at mode `k`.
pub fn eliminated_mode(jet: &Jet, k: i64) -> Complex64 {
    let n = jet.degree() as i64;
    let lam = jet.point.lambda();
    let qn = q_residual(jet, n);
    let (ak, _, _) = jet.coeff_with_derivatives(k);
    n as f64 * q_residual(jet, k) * lam.powf(n as f64 / 2.0) - k as f64 * qn * ak
}

pub fn system_residual(jet: &Jet) -> SystemResidual {
    let n = jet.degree();
    let lam = jet.point.lambda();
    let nf = n as f64;
    let mut out = Vec::with_capacity(2 * n);
    out.push(q_residual(jet, 0).re * lam.sqrt());
    let scale = lam.powf(-nf / 2.0);
    for k in 1..n {
        let e = eliminated_mode(jet, k as i64) * scale;
        out.push(e.re);
        out.push(e.im);
    }
    out.push(q_residual(jet, n as i64).re * lam.powf((1.0 - nf) / 2.0));
    SystemResidual(out)
}

/// Column-by-column assembly from unit-derivative jets.
pub fn build_matrices(point: &FieldPoint) -> SystemMatrices {
    let m = point.values().len();
    let mut a = DMatrix::zeros(m, m);
    let mut b = DMatrix::zeros(m, m);
    for l in 0..m {
        let mut unit = vec![0.0; m];
        unit[l] = 1.0;
        let jx = Jet {
            point: point.clone(),
            dx: unit.clone(),
            dy: vec![0.0; m],
        };
        let jy = Jet {
            point: point.clone(),
            dx: vec![0.0; m],
            dy: unit,
        };
        a.set_column(l, &DVector::from_vec(system_residual(&jx).0));
        b.set_column(l, &DVector::from_vec(system_residual(&jy).0));
    }
    SystemMatrices { a, b }
}

impl SystemMatrices {
    /// `A·dx + B·dy`.
    pub fn apply(&self, dx: &[f64], dy: &[f64]) -> Vec<f64> {
        let r = &self.a * DVector::from_column_slice(dx) + &self.b * DVector::from_column_slice(dy);
        r.iter().copied().collect()
    }

    /// Roots of `det(Aλ - B) = 0`, as eigenvalues of `A⁻¹B`.
    pub fn characteristic_speeds(&self) -> Result<Vec<Complex64>> {
        let lu = self.a.clone().lu();
        let m = lu.solve(&self.b).ok_or_else(|| {
            MagflowError::NearVertical("matrix A is singular (infinite speed)".into())
        })?;
        Ok(m.complex_eigenvalues().iter().copied().collect())
    }

    /// The `2N × 4N` matrix `[A B]` whose kernel holds the admissible jets.
    pub fn stacked(&self) -> DMatrix<f64> {
        let m = self.a.nrows();
        let mut s = DMatrix::zeros(m, 2 * m);
        s.view_mut((0, 0), (m, m)).copy_from(&self.a);
        s.view_mut((0, m), (m, m)).copy_from(&self.b);
        s
    }
}

/// Degree-2 matrices rewritten in `W = (Λ, u_0, f, g)` with `f = u_1/√Λ`,
/// `g = v_1/√Λ`, and with the rows recombined into the four equations
///
/// ```text
/// f_x + g_y = 0
/// (fΛ)_x - (gΛ)_y = 0
/// (u_0)_x + 2Λ_x - g(f_y - g_x)/2 = 0
/// -(u_0)_y + 2Λ_y + f(f_y - g_x)/2 = 0
/// ```
///
/// The recombination is invertible, so the solution set is unchanged.
pub fn reduced_degree2_matrices(point: &FieldPoint) -> Result<SystemMatrices> {
    if point.degree() != 2 {
        return Err(MagflowError::Validation(format!(
            "reduced form exists for degree 2 only, got {}",
            point.degree()
        )));
    }
    let lam = point.lambda();
    let s = lam.sqrt();
    let (f, g) = (point.u(1) / s, point.v(1) / s);
    let mats = build_matrices(point);
    // U = (Λ, u0, √Λ f, √Λ g): dU/dW
    let jac = DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            f / (2.0 * s), 0.0, s, 0.0, //
            g / (2.0 * s), 0.0, 0.0, s,
        ],
    );
    let rows = DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, 0.0, 0.0, 2.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, f, //
            0.0, 0.0, 1.0, g,
        ],
    );
    Ok(SystemMatrices {
        a: &rows * &mats.a * &jac,
        b: &rows * &mats.b * &jac,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenClass {
    /// All eigenvalues real and distinct.
    Hyperbolic,
    /// At least one complex-conjugate pair.
    Elliptic,
    /// Real spectrum with a repeated eigenvalue.
    Borderline,
}

#[derive(Debug, Clone)]
pub struct GeodesicReport {
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<Complex64>,
    pub class: EigenClass,
}

/// The `n × n` matrix of the geodesic (zero magnetic field) system
/// `U_t + A(U) U_x = 0` in semi-geodesic coordinates, built from
/// `a_0..a_n` with `a_{n-1} = g` and `a_n = 1`.
pub fn geodesic_matrix(a: &[f64]) -> Result<GeodesicReport> {
    if a.len() < 3 {
        return Err(MagflowError::Validation(
            "need coefficients a_0..a_n with n >= 2".into(),
        ));
    }
    let n = a.len() - 1;
    let coeff = |i: isize| if i < 0 { 0.0 } else { a[i as usize] };
    let mut m = DMatrix::zeros(n, n);
    for r in 1..=n {
        let ri = r as isize;
        if r >= 2 {
            m[(r - 1, r - 2)] += a[n - 1];
        }
        m[(r - 1, n - 1)] += r as f64 * coeff(ri) - (n as f64 - r as f64 + 2.0) * coeff(ri - 2);
    }
    let eigenvalues: Vec<Complex64> = m.clone().complex_eigenvalues().iter().copied().collect();
    let scale = eigenvalues.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = 1e-7 * scale;
    let class = if eigenvalues.iter().any(|z| z.im.abs() > tol) {
        EigenClass::Elliptic
    } else {
        let mut re: Vec<f64> = eigenvalues.iter().map(|z| z.re).collect();
        re.sort_by(|x, y| x.total_cmp(y));
        if re.windows(2).any(|w| (w[1] - w[0]).abs() <= tol) {
            EigenClass::Borderline
        } else {
            EigenClass::Hyperbolic
        }
    };
    Ok(GeodesicReport {
        matrix: m,
        eigenvalues,
        class,
    })
}
