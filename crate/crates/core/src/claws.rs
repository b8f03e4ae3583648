//! Conservation laws `(P)_x + (Q)_y = 0` of the system and a pointwise
//! validity oracle.
//!
//! The system is linear in first derivatives, so a law holds modulo the
//! system at a point exactly when `∇P·ξ + ∇Q·η = 0` for every `(ξ, η)` in
//! the kernel of `[A B]`. [`validity_check`] measures the failure of that.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::chars::{char_data, jacobian_complex, tracked_angles, CharData, TOL_VERTICAL};
use crate::error::{MagflowError, Result};
use crate::fields::{u_index, v_index, FieldGrid, FieldPoint, Jet};
use crate::linalg::{kernel_qr, kernel_svd, projection_norm};
use crate::system::build_matrices;
use crate::trigpoly::{CriticalKind, TrigPoly};

type EvalFn = Arc<dyn Fn(&FieldPoint) -> Result<(f64, f64)> + Send + Sync>;
type GradFn = Arc<dyn Fn(&FieldPoint) -> Result<(Vec<f64>, Vec<f64>)> + Send + Sync>;

/// Default relative step for finite-difference gradients of densities.
pub const FD_STEP: f64 = 1e-3;

/// A candidate law: densities `P`, `Q` as functions of the field point,
/// optionally with analytic gradients.
#[derive(Clone)]
pub struct DensityPair {
    pub name: String,
    eval: EvalFn,
    grad: Option<GradFn>,
    fd_step: f64,
}

impl fmt::Debug for DensityPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityPair")
            .field("name", &self.name)
            .field("analytic_gradient", &self.grad.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMode {
    /// Analytic when available, otherwise finite differences.
    Auto,
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMethod {
    Svd,
    Qr,
}

impl DensityPair {
    pub fn new<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&FieldPoint) -> Result<(f64, f64)> + Send + Sync + 'static,
    {
        DensityPair {
            name: name.into(),
            eval: Arc::new(eval),
            grad: None,
            fd_step: FD_STEP,
        }
    }

    pub fn with_gradient<G>(mut self, grad: G) -> Self
    where
        G: Fn(&FieldPoint) -> Result<(Vec<f64>, Vec<f64>)> + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(grad));
        self
    }

    /// Relative step used by [`GradientMode::FiniteDifference`].
    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    /// `(P, Q)` at a point.
    pub fn eval(&self, point: &FieldPoint) -> Result<(f64, f64)> {
        (self.eval)(point)
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.grad.is_some()
    }

    /// `(∇P, ∇Q)` with respect to the unknowns `U`.
    pub fn gradient(&self, point: &FieldPoint, mode: GradientMode) -> Result<(Vec<f64>, Vec<f64>)> {
        match (mode, &self.grad) {
            (GradientMode::FiniteDifference, _) | (GradientMode::Auto, None) => {
                self.fd_gradient(point, self.fd_step)
            }
            (_, Some(g)) => g(point),
            (GradientMode::Analytic, None) => Err(MagflowError::Validation(format!(
                "law `{}` has no analytic gradient",
                self.name
            ))),
        }
    }

    /// Five-point central differences with step `h·(1 + |U_l|)`.
    pub fn fd_gradient(&self, point: &FieldPoint, h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let m = point.values().len();
        let mut gp = vec![0.0; m];
        let mut gq = vec![0.0; m];
        for l in 0..m {
            let ul = point.values()[l];
            let step = h * (1.0 + ul.abs());
            let at = |k: f64| self.eval(&point.with_component(l, ul + k * step)?);
            let ((p1, q1), (m1p, m1q)) = (at(1.0)?, at(-1.0)?);
            let ((p2, q2), (m2p, m2q)) = (at(2.0)?, at(-2.0)?);
            gp[l] = (8.0 * (p1 - m1p) - (p2 - m2p)) / (12.0 * step);
            gq[l] = (8.0 * (q1 - m1q) - (q2 - m2q)) / (12.0 * step);
        }
        Ok((gp, gq))
    }

    /// `(P)_x + (Q)_y` on a jet, by the chain rule.
    pub fn divergence(&self, jet: &Jet, mode: GradientMode) -> Result<f64> {
        let (gp, gq) = self.gradient(&jet.point, mode)?;
        Ok(dot(&gp, &jet.dx) + dot(&gq, &jet.dy))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal kernel basis of `[A B]` at a point, `2N` columns expected.
pub fn jet_kernel(point: &FieldPoint, method: KernelMethod) -> Result<DMatrix<f64>> {
    let stacked = build_matrices(point).stacked();
    let k = match method {
        KernelMethod::Svd => kernel_svd(&stacked),
        KernelMethod::Qr => kernel_qr(&stacked),
    };
    let m = point.values().len();
    if k.ncols() != m {
        return Err(MagflowError::KernelDimensionUnexpected {
            expected: m,
            found: k.ncols(),
        });
    }
    Ok(k)
}

/// `‖Kᵀ(∇P, ∇Q)‖` over an orthonormal kernel basis `K`, using the SVD kernel
/// and analytic gradients where the law has them.
pub fn validity_check(point: &FieldPoint, law: &DensityPair) -> Result<f64> {
    validity_check_with(point, law, KernelMethod::Svd, GradientMode::Auto)
}

pub fn validity_check_with(
    point: &FieldPoint,
    law: &DensityPair,
    method: KernelMethod,
    mode: GradientMode,
) -> Result<f64> {
    let kernel = jet_kernel(point, method)?;
    let (gp, gq) = law.gradient(point, mode)?;
    let g: Vec<f64> = gp.into_iter().chain(gq).collect();
    Ok(projection_norm(&kernel, &g))
}

fn c_factor(point: &FieldPoint) -> (f64, f64) {
    // Λ^{(1-N)/2} and its Λ-derivative
    let n = point.degree() as f64;
    let lam = point.lambda();
    (
        lam.powf((1.0 - n) / 2.0),
        (1.0 - n) / 2.0 * lam.powf((-1.0 - n) / 2.0),
    )
}

/// `L1 = (u_{N-1} Λ^{(1-N)/2}, v_{N-1} Λ^{(1-N)/2})`, the real part of
/// Eq (4) at `k = N`.
pub fn law_l1() -> DensityPair {
    DensityPair::new("L1", |p| {
        let n = p.degree() - 1;
        let (c, _) = c_factor(p);
        Ok((p.u(n) * c, p.v(n) * c))
    })
    .with_gradient(|p| {
        let n = p.degree() - 1;
        let (c, dc) = c_factor(p);
        let m = p.values().len();
        let (mut gp, mut gq) = (vec![0.0; m], vec![0.0; m]);
        gp[0] = p.u(n) * dc;
        gq[0] = p.v(n) * dc;
        gp[u_index(n)] += c;
        if n >= 1 {
            gq[v_index(n)] += c;
        }
        Ok((gp, gq))
    })
}

/// The law generated by `F^m`: `(√Λ u_1^{(m)}, -√Λ v_1^{(m)})` with
/// `a_1^{(m)}` the first Fourier coefficient of `F^m`. `m = 1` is Eq (4) at
/// `k = 0`.
pub fn power_law(m: u32) -> DensityPair {
    assert!(m >= 1, "power must be at least 1");
    let name = if m == 1 { "L2".to_string() } else { format!("F^{m}") };
    DensityPair::new(name, move |p| {
        let a1 = p.trig_poly().power(m).coeff(1);
        let s = p.lambda().sqrt();
        Ok((s * a1.re, -s * a1.im))
    })
    .with_gradient(move |p| {
        let f = p.trig_poly();
        let a1 = f.power(m).coeff(1);
        let lower = (m > 1).then(|| f.power(m - 1));
        let lam = p.lambda();
        let s = lam.sqrt();
        let len = p.values().len();
        let (mut gp, mut gq) = (vec![0.0; len], vec![0.0; len]);
        for l in 0..len {
            let d = p.trig_poly_derivative(l);
            // ∂a_1^{(m)} = m [F^{m-1} ∂F]_1
            let da = match &lower {
                Some(fl) => fl.mul(&d).coeff(1) * m as f64,
                None => d.coeff(1),
            };
            gp[l] = s * da.re;
            gq[l] = -s * da.im;
        }
        gp[0] += a1.re / (2.0 * s);
        gq[0] -= a1.im / (2.0 * s);
        Ok((gp, gq))
    })
}

/// `L1` and `L2` for any degree.
pub fn explicit_laws() -> Vec<DensityPair> {
    vec![law_l1(), power_law(1)]
}

/// Gradient in `U = (Λ, u_0, u_1, v_1)` of a function of `(Λ, u_0, f, g)`.
fn fg_chain(p: &FieldPoint, d_lam: f64, d_u0: f64, d_f: f64, d_g: f64) -> Vec<f64> {
    let lam = p.lambda();
    let s = lam.sqrt();
    let f_lam = -p.u(1) / (2.0 * lam * s);
    let g_lam = -p.v(1) / (2.0 * lam * s);
    vec![d_lam + d_f * f_lam + d_g * g_lam, d_u0, d_f / s, d_g / s]
}

fn fg(p: &FieldPoint) -> Result<(f64, f64)> {
    if p.degree() != 2 {
        return Err(MagflowError::Validation(format!(
            "the f, g laws need degree 2, got {}",
            p.degree()
        )));
    }
    let s = p.lambda().sqrt();
    Ok((p.u(1) / s, p.v(1) / s))
}

/// The four §5 laws in `f = u_1/√Λ`, `g = v_1/√Λ`: `(f, g)`, `(fΛ, -gΛ)`,
/// Eq (10) and Eq (11).
pub fn n2_laws() -> Vec<DensityPair> {
    vec![
        DensityPair::new("(f, g)", |p| fg(p)).with_gradient(|p| {
            fg(p)?;
            Ok((fg_chain(p, 0.0, 0.0, 1.0, 0.0), fg_chain(p, 0.0, 0.0, 0.0, 1.0)))
        }),
        DensityPair::new("(f Lambda, -g Lambda)", |p| {
            let (f, g) = fg(p)?;
            Ok((f * p.lambda(), -g * p.lambda()))
        })
        .with_gradient(|p| {
            let (f, g) = fg(p)?;
            let lam = p.lambda();
            Ok((fg_chain(p, f, 0.0, lam, 0.0), fg_chain(p, -g, 0.0, 0.0, -lam)))
        }),
        eq10_law(0.0),
        DensityPair::new("Eq11", |p| {
            let (f, g) = fg(p)?;
            Ok((-f * g / 2.0, -p.u(0) + 2.0 * p.lambda() - (g * g - f * f) / 4.0))
        })
        .with_gradient(|p| {
            let (f, g) = fg(p)?;
            Ok((
                fg_chain(p, 0.0, 0.0, -g / 2.0, -f / 2.0),
                fg_chain(p, 2.0, -1.0, f / 2.0, -g / 2.0),
            ))
        }),
    ]
}

/// Eq (10), `(u_0 + 2Λ + (g²-f²)/4, -fg/2)`, with `shift·Λ` added to the
/// density (zero for the genuine law).
pub fn eq10_law(shift: f64) -> DensityPair {
    let name = if shift == 0.0 {
        "Eq10".to_string()
    } else {
        format!("Eq10 + {shift} Lambda")
    };
    DensityPair::new(name, move |p| {
        let (f, g) = fg(p)?;
        Ok((
            p.u(0) + (2.0 + shift) * p.lambda() + (g * g - f * f) / 4.0,
            -f * g / 2.0,
        ))
    })
    .with_gradient(move |p| {
        let (f, g) = fg(p)?;
        Ok((
            fg_chain(p, 2.0 + shift, 1.0, -f / 2.0, g / 2.0),
            fg_chain(p, 0.0, 0.0, -g / 2.0, -f / 2.0),
        ))
    })
}

/// `(Λ, 0)`: not a law of the system for `N ≥ 2` (for `N = 1` it coincides
/// with `L2`). Used as a negative control.
pub fn fake_law() -> DensityPair {
    DensityPair::new("fake (Lambda, 0)", |p| Ok((p.lambda(), 0.0))).with_gradient(|p| {
        let m = p.values().len();
        let mut gp = vec![0.0; m];
        gp[0] = 1.0;
        Ok((gp, vec![0.0; m]))
    })
}

/// Densities of the law attached to an invariant surface `φ = f`:
/// `(√Λ sin f + v_{N-1}c/2N, -√Λ cos f - u_{N-1}c/2N)`, `c = Λ^{(1-N)/2}`.
pub fn surface_densities(point: &FieldPoint, f: f64) -> (f64, f64) {
    let n = point.degree();
    let (c, _) = c_factor(point);
    let s = point.lambda().sqrt();
    let two_n = 2.0 * n as f64;
    (
        s * f.sin() + point.v(n - 1) * c / two_n,
        -s * f.cos() - point.u(n - 1) * c / two_n,
    )
}

/// Gradients of [`surface_densities`] when `f` depends on the point with
/// gradient `df`.
fn surface_gradient(point: &FieldPoint, f: f64, df: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = point.degree();
    let (c, dc) = c_factor(point);
    let lam = point.lambda();
    let s = lam.sqrt();
    let two_n = 2.0 * n as f64;
    let (sn, cs) = f.sin_cos();
    let mut gp: Vec<f64> = df.iter().map(|d| s * cs * d).collect();
    let mut gq: Vec<f64> = df.iter().map(|d| s * sn * d).collect();
    gp[0] += sn / (2.0 * s) + point.v(n - 1) * dc / two_n;
    gq[0] += -cs / (2.0 * s) - point.u(n - 1) * dc / two_n;
    if n >= 2 {
        gp[v_index(n - 1)] += c / two_n;
    }
    gq[u_index(n - 1)] -= c / two_n;
    (gp, gq)
}

/// The surface law for a constant angle `f`.
pub fn surface_law(f: f64) -> DensityPair {
    DensityPair::new(format!("surface f={f}"), move |p| Ok(surface_densities(p, f)))
        .with_gradient(move |p| Ok(surface_gradient(p, f, &vec![0.0; p.values().len()])))
}

fn grid_check(grid: &FieldGrid, arr: &[f64], what: &str) -> Result<()> {
    let (nx, ny) = grid.dims();
    if arr.len() != nx * ny {
        return Err(MagflowError::GridMismatch(format!(
            "{what} has {} samples, grid has {nx}x{ny}",
            arr.len()
        )));
    }
    Ok(())
}

/// Eq (9): `(√Λ sin f)_x - (√Λ cos f)_y + ΩΛ` with grid derivatives.
pub fn invariance_residual(grid: &FieldGrid, f: &[f64], omega: &[f64]) -> Result<Vec<f64>> {
    grid_check(grid, f, "f")?;
    grid_check(grid, omega, "Omega")?;
    let st = grid.stencil()?;
    let lam = grid.component(0);
    let sx: Vec<f64> = lam.iter().zip(f).map(|(l, f)| l.sqrt() * f.sin()).collect();
    let cy: Vec<f64> = lam.iter().zip(f).map(|(l, f)| l.sqrt() * f.cos()).collect();
    let dx = st.d_dx(&sx)?;
    let dy = st.d_dy(&cy)?;
    Ok((0..lam.len())
        .map(|i| dx[i] - dy[i] + omega[i] * lam[i])
        .collect())
}

/// Eq (8) as a residual: `ΩΛ - [(v_{N-1}c)_x - (u_{N-1}c)_y]/2N`.
pub fn eq8_residual(grid: &FieldGrid, omega: &[f64]) -> Result<Vec<f64>> {
    grid_check(grid, omega, "Omega")?;
    let st = grid.stencil()?;
    let n = grid.degree();
    let lam = grid.component(0);
    let c: Vec<f64> = lam.iter().map(|l| l.powf((1.0 - n as f64) / 2.0)).collect();
    let u = grid.component(u_index(n - 1));
    let vc: Vec<f64> = if n >= 2 {
        grid.component(v_index(n - 1))
            .iter()
            .zip(&c)
            .map(|(v, c)| v * c)
            .collect()
    } else {
        vec![0.0; lam.len()]
    };
    let uc: Vec<f64> = u.iter().zip(&c).map(|(u, c)| u * c).collect();
    let dvc = st.d_dx(&vc)?;
    let duc = st.d_dy(&uc)?;
    let two_n = 2.0 * n as f64;
    Ok((0..lam.len())
        .map(|i| omega[i] * lam[i] - (dvc[i] - duc[i]) / two_n)
        .collect())
}

/// Grid divergence of the surface-law densities for an angle field `f`.
pub fn surface_law_divergence(grid: &FieldGrid, f: &[f64]) -> Result<Vec<f64>> {
    grid_check(grid, f, "f")?;
    let st = grid.stencil()?;
    let (nx, ny) = grid.dims();
    let mut p = Vec::with_capacity(nx * ny);
    let mut q = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b) = surface_densities(&grid.point(i, j), f[st.index(i, j)]);
            p.push(a);
            q.push(b);
        }
    }
    let dp = st.d_dx(&p)?;
    let dq = st.d_dy(&q)?;
    Ok(dp.iter().zip(&dq).map(|(a, b)| a + b).collect())
}

/// Points `z_k` on the circle with `F(z_k) = r_k + s_k ε`.
#[derive(Debug, Clone)]
pub struct LevelPoints {
    pub epsilon: f64,
    /// Critical angles `φ_k` at the base point.
    pub critical_angles: Vec<f64>,
    /// `s_k = -1` at maxima, `+1` at minima.
    pub signs: Vec<f64>,
    /// Level values `c_k = r_k + s_k ε`, frozen at the base point.
    pub targets: Vec<f64>,
    pub angles: Vec<f64>,
    pub points: Vec<Complex64>,
}

/// `min |r_k - r_{k+1}| / 4` over cyclically adjacent critical values.
pub fn epsilon_max(cd: &CharData) -> f64 {
    cd.min_adjacent_gap() / 4.0
}

/// Default `ε`: `1e-3` times the smallest adjacent critical-value gap.
pub fn default_epsilon(cd: &CharData) -> f64 {
    1e-3 * cd.min_adjacent_gap()
}

pub fn level_points(point: &FieldPoint, epsilon: f64) -> Result<LevelPoints> {
    let cd = char_data(point)?;
    let emax = epsilon_max(&cd);
    if !(epsilon > 0.0 && epsilon < emax) {
        return Err(MagflowError::EpsilonTooLarge {
            eps: epsilon,
            max: emax,
        });
    }
    let signs: Vec<f64> = cd
        .kinds
        .iter()
        .map(|k| match k {
            CriticalKind::Maximum => -1.0,
            _ => 1.0,
        })
        .collect();
    let targets: Vec<f64> = cd
        .invariants
        .iter()
        .zip(&signs)
        .map(|(r, s)| r + s * epsilon)
        .collect();
    let angles = level_angles(&point.trig_poly(), &cd.angles, &targets)?;
    Ok(LevelPoints {
        epsilon,
        critical_angles: cd.angles,
        signs,
        targets,
        points: angles.iter().map(|&a| Complex64::cis(a)).collect(),
        angles,
    })
}

/// For each `k`, the solution of `F = targets[k]` on the arc from
/// `crit[k]` counter-clockwise to the next critical angle.
fn level_angles(f: &TrigPoly, crit: &[f64], targets: &[f64]) -> Result<Vec<f64>> {
    let m = crit.len();
    let mut sorted: Vec<(f64, usize)> = crit.iter().copied().zip(0..m).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = vec![0.0; m];
    for (pos, &(lo, k)) in sorted.iter().enumerate() {
        let mut hi = sorted[(pos + 1) % m].0;
        if hi <= lo {
            hi += std::f64::consts::TAU;
        }
        out[k] = solve_on_arc(f, lo, hi, targets[k])?;
    }
    Ok(out)
}

/// Safeguarded Newton for `F(φ) = c` on `[lo, hi]`, where `F - c` changes sign.
fn solve_on_arc(f: &TrigPoly, lo: f64, hi: f64, c: f64) -> Result<f64> {
    let g = |x: f64| f.eval(x) - c;
    let (mut a, mut b) = (lo, hi);
    let (ga, gb) = (g(a), g(b));
    if ga * gb > 0.0 {
        return Err(MagflowError::NewtonFailure(format!(
            "level {c} not bracketed on [{lo}, {hi}]"
        )));
    }
    let rising = ga < gb;
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            return Ok(x);
        }
        if (gx < 0.0) == rising {
            a = x;
        } else {
            b = x;
        }
        let d = f.eval_dphi(x);
        let newton = x - gx / d;
        let next = if d != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || b - a <= 1e-15 * (1.0 + x.abs()) {
            return Ok(next);
        }
        x = next;
    }
    Err(MagflowError::NewtonFailure(format!(
        "no convergence for level {c} on [{lo}, {hi}]"
    )))
}

/// The level-set angles `ψ_k` at a nearby point for frozen targets, with
/// the arcs delimited by that point's own (tracked) critical angles.
pub fn tracked_level_angles(point: &FieldPoint, base: &LevelPoints) -> Result<Vec<f64>> {
    let crit = tracked_angles(point, &base.critical_angles)?;
    level_angles(&point.trig_poly(), &crit, &base.targets)
}

/// `G_k = Im[√Λ z_k + a_{N-1}Λ^{(1-N)/2}/2N]` at the base point.
pub fn g_values(point: &FieldPoint, epsilon: f64) -> Result<Vec<f64>> {
    let lp = level_points(point, epsilon)?;
    Ok(lp.angles.iter().map(|&a| surface_densities(point, a).0).collect())
}

/// The `2N` surface laws with `f = arg z_k`, where `z_k` solves
/// `F(z_k) = c_k` for the level values `c_k` frozen at `point`. Gradients are
/// analytic: `∂ψ/∂U_l = -∂_l F(ψ) / F_φ(ψ)`.
pub fn g_densities(point: &FieldPoint, epsilon: f64) -> Result<Vec<DensityPair>> {
    let lp = Arc::new(level_points(point, epsilon)?);
    let h = g_fd_step(point, epsilon);
    Ok((0..lp.angles.len())
        .map(|k| {
            let (lp_e, lp_g) = (Arc::clone(&lp), Arc::clone(&lp));
            DensityPair::new(format!("G_{}", k + 1), move |p| {
                let psi = tracked_level_angles(p, &lp_e)?[k];
                Ok(surface_densities(p, psi))
            })
            .with_gradient(move |p| {
                let psi = tracked_level_angles(p, &lp_g)?[k];
                let dpsi = level_angle_gradient(p, psi);
                Ok(surface_gradient(p, psi, &dpsi))
            })
            .with_fd_step(h)
        })
        .collect())
}

/// FD step for the `G_k`: `z_k` sits at distance `O(√ε)` from a critical
/// point, so the step must be small against `ε` itself.
fn g_fd_step(point: &FieldPoint, epsilon: f64) -> f64 {
    3e-3 * epsilon / point.trig_poly().coeff_scale().max(1.0)
}

fn level_angle_gradient(point: &FieldPoint, psi: f64) -> Vec<f64> {
    let fphi = point.trig_poly().eval_dphi(psi);
    (0..point.values().len())
        .map(|l| -point.trig_poly_derivative(l).eval(psi) / fphi)
        .collect()
}

/// Proposition 1 diagnostics at one `ε`.
#[derive(Debug, Clone)]
pub struct GIndependence {
    pub epsilon: f64,
    /// `det ∂(G_1..G_2N)/∂U` by central finite differences.
    pub det_fd: f64,
    /// The same determinant from analytic gradients.
    pub det_analytic: f64,
    /// `det` of the bracket matrix: rows of `∂G/∂μ` divided by the
    /// prefactors `-(√Λ/2i)(1 + z_k^{-2})/F'(z_k)`.
    pub bracket_det: Complex64,
    /// `det M` from [`jacobian_complex`].
    pub det_m: Complex64,
    /// `|bracket_det - det_m| / |det_m|`.
    pub relative_gap: f64,
}

pub fn g_independence(point: &FieldPoint, epsilon: f64) -> Result<GIndependence> {
    let cd = char_data(point)?;
    if let Some(k) = cd.directions.iter().position(|(c, _)| c.abs() <= TOL_VERTICAL) {
        return Err(MagflowError::NearVerticalCritical(format!(
            "critical point {k} at angle {} is within tolerance of ±i",
            cd.angles[k]
        )));
    }
    let lp = level_points(point, epsilon)?;
    let laws = g_densities(point, epsilon)?;
    let m = point.values().len();

    let mut jac = DMatrix::zeros(m, m);
    let mut jac_fd = DMatrix::zeros(m, m);
    for (k, law) in laws.iter().enumerate() {
        let (g, _) = law.gradient(point, GradientMode::Analytic)?;
        let (gf, _) = law.gradient(point, GradientMode::FiniteDifference)?;
        for l in 0..m {
            jac[(k, l)] = g[l];
            jac_fd[(k, l)] = gf[l];
        }
    }

    // ∂G/∂μ = ∂G/∂real · (∂μ/∂real)^{-1}
    let n = point.degree();
    let lam = point.lambda();
    let dlam_dp = 2.0 / n as f64 * lam.powf(1.0 - n as f64 / 2.0);
    let mut jreal = jac.map(|v| Complex64::new(v, 0.0));
    for k in 0..m {
        jreal[(k, 0)] *= dlam_dp;
    }
    let t = mu_from_real(n);
    let tinv = t.try_inverse().expect("coordinate change is invertible");
    let d = jreal * tinv;
    let f = point.trig_poly();
    let s = lam.sqrt();
    let two_i = Complex64::new(0.0, 2.0);
    let mut br = d.clone();
    for (k, &z) in lp.points.iter().enumerate() {
        let pref = -(s / two_i) * (1.0 + z.powi(-2)) / f.eval_dz(z);
        for c in 0..m {
            br[(k, c)] = d[(k, c)] / pref;
        }
    }
    let bracket_det = br.determinant();
    let det_m = jacobian_complex(point)?.det_m;
    Ok(GIndependence {
        epsilon,
        det_fd: jac_fd.determinant(),
        det_analytic: jac.determinant(),
        bracket_det,
        det_m,
        relative_gap: (bracket_det - det_m).norm() / det_m.norm(),
    })
}

/// `T = ∂μ/∂(Λ^{N/2}, u_0, u_1, v_1, …)` for `μ = (Λ^{N/2}, a_{N-1}, …, a_{1-N})`.
fn mu_from_real(n: usize) -> DMatrix<Complex64> {
    let m = 2 * n;
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mut t = DMatrix::zeros(m, m);
    t[(0, 0)] = one;
    t[(n, 1)] = one;
    for k in 1..n {
        t[(n - k, 2 * k)] = one;
        t[(n - k, 2 * k + 1)] = i;
        t[(n + k, 2 * k)] = one;
        t[(n + k, 2 * k + 1)] = -i;
    }
    t
}

/// Numerical rank of the gradients of the densities `P` of the power laws
/// `m = 1..=count`, relative tolerance `1e-8`. Measured, not asserted: the
/// paper leaves their functional independence open.
pub fn power_law_rank(point: &FieldPoint, count: u32) -> Result<usize> {
    let m = point.values().len();
    let mut g = DMatrix::zeros(count as usize, m);
    for j in 1..=count {
        let (gp, _) = power_law(j).gradient(point, GradientMode::Analytic)?;
        for l in 0..m {
            g[(j as usize - 1, l)] = gp[l];
        }
    }
    Ok(g.rank(1e-8 * g.abs().max().max(1e-300)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_points, SampleOptions};

    #[test]
    fn explicit_laws_hold_at_random_points() {
        for n in 1..=3 {
            for p in random_points(5, n, 5, &SampleOptions::default()).unwrap() {
                for law in explicit_laws() {
                    let v = validity_check(&p, &law).unwrap();
                    assert!(v < 1e-10, "{} at N={n}: {v}", law.name);
                }
            }
        }
    }

    #[test]
    fn fake_law_fails() {
        let p = &random_points(5, 2, 1, &SampleOptions::default()).unwrap()[0];
        assert!(validity_check(p, &fake_law()).unwrap() > 1e-3);
    }

    #[test]
    fn analytic_gradients_match_fd() {
        let p = &random_points(8, 2, 1, &SampleOptions::default()).unwrap()[0];
        let mut laws = n2_laws();
        laws.extend(explicit_laws());
        laws.push(power_law(3));
        for law in laws {
            let (a, b) = law.gradient(p, GradientMode::Analytic).unwrap();
            let (c, d) = law.fd_gradient(p, 1e-6).unwrap();
            for l in 0..4 {
                assert!((a[l] - c[l]).abs() < 1e-7, "{} dP/dU{l}", law.name);
                assert!((b[l] - d[l]).abs() < 1e-7, "{} dQ/dU{l}", law.name);
            }
        }
    }

    #[test]
    fn level_points_flat_degree_two() {
        let lp = level_points(&FieldPoint::flat(2), 0.1).unwrap();
        let want = 0.95_f64.acos() / 2.0;
        assert!((lp.angles[0] - want).abs() < 1e-14, "{}", lp.angles[0]);
        assert!(matches!(
            level_points(&FieldPoint::flat(2), 1.1),
            Err(MagflowError::EpsilonTooLarge { .. })
        ));
    }

    #[test]
    fn flat_g_values_are_sines() {
        let lp = level_points(&FieldPoint::flat(2), 0.1).unwrap();
        let g = g_values(&FieldPoint::flat(2), 0.1).unwrap();
        for (a, gv) in lp.angles.iter().zip(g) {
            assert!((a.sin() - gv).abs() < 1e-15);
        }
    }
}
