//! Diagonal-form diagnostics in Riemann coordinates.
//!
//! In the invariants `r` the system reads `(r_k)_x + λ_k(r)(r_k)_y = 0`. It is
//! semi-Hamiltonian when `Γ^k_{ki} = ∂_iλ_k / (λ_i - λ_k)` satisfies
//! `∂_jΓ^k_{ki} = ∂_iΓ^k_{kj}` for distinct `i, j, k`. The map `r ↦ λ` has no
//! closed form here: [`MagneticChart`] inverts `μ ↦ r` by Newton iteration
//! around a base point and differentiates `λ` with the envelope formulas,
//! and the outer derivative of `Γ` is a central difference whose error is
//! estimated from a step-halving (Richardson) pair.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::chars::{angle_gradient, char_data, riemann_gradient, tracked_angles, CharData};
use crate::claws::{eq10_law, n2_laws, validity_check, GradientMode};
use crate::error::{MagflowError, Result};
use crate::fields::FieldPoint;
use crate::sampling::random_jet;

/// Speeds closer than this (relative) count as colliding.
pub const TOL_GAP: f64 = 1e-8;
/// Assumed relative accuracy of a single `Γ` evaluation, for the roundoff
/// part of the noise floor.
pub const GAMMA_ROUNDOFF: f64 = 1e-12;

/// A diagonal hydrodynamic system `(r_k)_x + λ_k(r)(r_k)_y = 0`.
pub trait DiagonalSystem: Sync {
    fn dim(&self) -> usize;

    fn speeds(&self, r: &[f64]) -> Result<Vec<f64>>;

    /// `J[(k, i)] = ∂λ_k/∂r_i`. Defaults to central differences.
    fn speed_jacobian(&self, r: &[f64]) -> Result<DMatrix<f64>> {
        fd_speed_jacobian(self, r, 1e-6)
    }

    /// Step for differentiating `Γ` in `r`.
    fn fd_step(&self) -> f64;
}

pub fn fd_speed_jacobian<S: DiagonalSystem + ?Sized>(sys: &S, r: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let n = sys.dim();
    let mut j = DMatrix::zeros(n, n);
    for i in 0..n {
        let (mut rp, mut rm) = (r.to_vec(), r.to_vec());
        rp[i] += h;
        rm[i] -= h;
        let (lp, lm) = (sys.speeds(&rp)?, sys.speeds(&rm)?);
        for k in 0..n {
            j[(k, i)] = (lp[k] - lm[k]) / (2.0 * h);
        }
    }
    Ok(j)
}

/// `G[(k, i)] = Γ^k_{ki}` for `i ≠ k`, zero on the diagonal.
pub fn gamma_matrix<S: DiagonalSystem + ?Sized>(sys: &S, r: &[f64]) -> Result<DMatrix<f64>> {
    let lam = sys.speeds(r)?;
    let jac = sys.speed_jacobian(r)?;
    gamma_from(&lam, &jac)
}

fn gamma_from(lam: &[f64], jac: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = lam.len();
    let scale = lam.iter().fold(1.0_f64, |m, l| m.max(l.abs()));
    let mut g = DMatrix::zeros(n, n);
    for k in 0..n {
        for i in 0..n {
            if i == k {
                continue;
            }
            let gap = lam[i] - lam[k];
            if gap.abs() <= TOL_GAP * scale {
                return Err(MagflowError::SpeedCollision(format!(
                    "λ_{i} = {} and λ_{k} = {} coincide",
                    lam[i], lam[k]
                )));
            }
            g[(k, i)] = jac[(k, i)] / gap;
        }
    }
    Ok(g)
}

/// `Γ^k_{ki}` at `r`.
pub fn gamma<S: DiagonalSystem + ?Sized>(sys: &S, r: &[f64], i: usize, k: usize) -> Result<f64> {
    if i == k {
        return Err(MagflowError::Validation("Γ^k_{ki} needs i != k".into()));
    }
    Ok(gamma_matrix(sys, r)?[(k, i)])
}

/// `Γ^k_{ki}` with the speed derivative taken by central differences of step `h`.
pub fn gamma_fd<S: DiagonalSystem + ?Sized>(sys: &S, r: &[f64], i: usize, k: usize, h: f64) -> Result<f64> {
    let lam = sys.speeds(r)?;
    let jac = fd_speed_jacobian(sys, r, h)?;
    Ok(gamma_from(&lam, &jac)?[(k, i)])
}

/// One semi-Hamiltonian symmetry test.
#[derive(Debug, Clone, Copy)]
pub struct SymmetryTerm {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    /// `∂_jΓ^k_{ki}` at step `h/2`.
    pub d_j_gamma_ki: f64,
    /// `∂_iΓ^k_{kj}` at step `h/2`.
    pub d_i_gamma_kj: f64,
    /// `|∂_jΓ^k_{ki} - ∂_iΓ^k_{kj}|` at step `h/2`.
    pub residual: f64,
    /// `|D(h) - D(h/2)|` plus a roundoff bound.
    pub floor: f64,
}

impl SymmetryTerm {
    pub fn within_floor(&self) -> bool {
        self.residual <= self.floor
    }
}

/// `∂_jΓ^k_{ki} - ∂_iΓ^k_{kj}` at `r`, with its noise floor.
pub fn semiham_residual<S: DiagonalSystem + ?Sized>(
    sys: &S,
    r: &[f64],
    i: usize,
    j: usize,
    k: usize,
) -> Result<SymmetryTerm> {
    if i == j || j == k || i == k {
        return Err(MagflowError::Validation(format!(
            "indices must be pairwise distinct, got ({i}, {j}, {k})"
        )));
    }
    let h = sys.fd_step();
    let cache = StencilCache::build(sys, r, h, &[i, j])?;
    Ok(cache.term(i, j, k))
}

/// `Γ` at `r ± h e_m` and `r ± (h/2) e_m` for the coordinates needed.
struct StencilCache {
    h: f64,
    // per coordinate m: [+h, -h, +h/2, -h/2]
    gammas: Vec<Option<[DMatrix<f64>; 4]>>,
}

impl StencilCache {
    fn build<S: DiagonalSystem + ?Sized>(sys: &S, r: &[f64], h: f64, coords: &[usize]) -> Result<Self> {
        let mut gammas = vec![None; r.len()];
        for &m in coords {
            let at = |d: f64| -> Result<DMatrix<f64>> {
                let mut rr = r.to_vec();
                rr[m] += d;
                gamma_matrix(sys, &rr)
            };
            gammas[m] = Some([at(h)?, at(-h)?, at(h / 2.0)?, at(-h / 2.0)?]);
        }
        Ok(StencilCache { h, gammas })
    }

    /// `(∂_m Γ[(k,i)]` at step `h`, at step `h/2`, largest `|Γ|` used`)`.
    fn derivative(&self, m: usize, k: usize, i: usize) -> (f64, f64, f64) {
        let g = self.gammas[m].as_ref().expect("coordinate in stencil");
        let d_h = (g[0][(k, i)] - g[1][(k, i)]) / (2.0 * self.h);
        let d_h2 = (g[2][(k, i)] - g[3][(k, i)]) / self.h;
        let big = g.iter().fold(0.0_f64, |a, x| a.max(x[(k, i)].abs()));
        (d_h, d_h2, big)
    }

    fn term(&self, i: usize, j: usize, k: usize) -> SymmetryTerm {
        let (a_h, a_h2, big_a) = self.derivative(j, k, i);
        let (b_h, b_h2, big_b) = self.derivative(i, k, j);
        let d_h = a_h - b_h;
        let d_h2 = a_h2 - b_h2;
        let roundoff = 4.0 * GAMMA_ROUNDOFF * big_a.max(big_b) / self.h;
        SymmetryTerm {
            i,
            j,
            k,
            d_j_gamma_ki: a_h2,
            d_i_gamma_kj: b_h2,
            residual: d_h2.abs(),
            floor: (d_h - d_h2).abs() + roundoff,
        }
    }
}

/// All symmetry terms at one point of `r`-space.
#[derive(Debug, Clone)]
pub struct SemihamReport {
    pub terms: Vec<SymmetryTerm>,
    /// Largest `|∂Γ|` among the terms.
    pub scale: f64,
}

impl SemihamReport {
    pub fn max_residual(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, t| m.max(t.residual))
    }

    pub fn max_floor(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, t| m.max(t.floor))
    }

    /// Every residual within its floor, and floors at most `1e-4·scale`.
    pub fn passes(&self) -> bool {
        self.terms.iter().all(SymmetryTerm::within_floor) && self.max_floor() <= 1e-4 * self.scale
    }

    /// Smallest `residual / floor` over the terms.
    pub fn min_excess(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.residual / t.floor.max(1e-300))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `residual / floor` over the terms.
    pub fn max_excess(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.residual / t.floor.max(1e-300))
            .fold(0.0, f64::max)
    }
}

/// Symmetry terms for every `k` and unordered pair `{i, j}` not containing `k`.
pub fn semiham_sweep<S: DiagonalSystem + ?Sized>(sys: &S, r: &[f64]) -> Result<SemihamReport> {
    let n = sys.dim();
    let all: Vec<usize> = (0..n).collect();
    let cache = StencilCache::build(sys, r, sys.fd_step(), &all)?;
    let mut terms = Vec::new();
    for k in 0..n {
        for i in 0..n {
            for j in i + 1..n {
                if i != k && j != k {
                    terms.push(cache.term(i, j, k));
                }
            }
        }
    }
    let scale = terms
        .iter()
        .fold(0.0_f64, |m, t| m.max(t.d_j_gamma_ki.abs()).max(t.d_i_gamma_kj.abs()));
    Ok(SemihamReport { terms, scale })
}

/// `ln H_i` along a staircase path through `vertices`, each segment moving a
/// single coordinate. Segments along `r_i` contribute nothing (gauge
/// `∂_i ln H_i = 0`); the others integrate `Γ^i_{im} dr_m` by composite
/// Simpson with `panels` panels. Returns `ln H_i` at every vertex, starting at 0.
pub fn lame_integrate<S: DiagonalSystem + ?Sized>(
    sys: &S,
    vertices: &[Vec<f64>],
    i: usize,
    panels: usize,
) -> Result<Vec<f64>> {
    let panels = panels.max(2) + panels % 2;
    let mut out = vec![0.0];
    for w in vertices.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let moved: Vec<usize> = (0..a.len()).filter(|&m| a[m] != b[m]).collect();
        let last = *out.last().expect("non-empty");
        match moved[..] {
            [] => out.push(last),
            [m] if m == i => out.push(last),
            [m] => {
                let step = (b[m] - a[m]) / panels as f64;
                let mut sum = 0.0;
                for p in 0..=panels {
                    let mut r = a.clone();
                    r[m] = a[m] + p as f64 * step;
                    let w = if p == 0 || p == panels {
                        1.0
                    } else if p % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    sum += w * gamma_matrix(sys, &r)?[(i, m)];
                }
                out.push(last + sum * step / 3.0);
            }
            _ => {
                return Err(MagflowError::Validation(
                    "staircase segments must move one coordinate".into(),
                ))
            }
        }
    }
    Ok(out)
}

/// `H_i` at `r0 + delta` along two staircases that both move `r_i` first and
/// then the remaining coordinates in ascending versus descending order.
#[derive(Debug, Clone, Copy)]
pub struct LameComparison {
    pub i: usize,
    pub h_ascending: f64,
    pub h_descending: f64,
    /// `|H_a - H_d| / max(|H_a|, |H_d|)`.
    pub relative_gap: f64,
}

pub fn lame_two_paths<S: DiagonalSystem + ?Sized>(
    sys: &S,
    r0: &[f64],
    delta: &[f64],
    i: usize,
    panels: usize,
) -> Result<LameComparison> {
    let n = r0.len();
    let others: Vec<usize> = (0..n).filter(|&m| m != i).collect();
    let path = |order: &[usize]| {
        let mut v = vec![r0.to_vec()];
        let mut cur = r0.to_vec();
        cur[i] += delta[i];
        v.push(cur.clone());
        for &m in order {
            cur[m] += delta[m];
            v.push(cur.clone());
        }
        v
    };
    let asc = path(&others);
    let desc: Vec<usize> = others.iter().rev().copied().collect();
    let desc = path(&desc);
    let la = *lame_integrate(sys, &asc, i, panels)?.last().expect("non-empty");
    let ld = *lame_integrate(sys, &desc, i, panels)?.last().expect("non-empty");
    let (ha, hd) = (la.exp(), ld.exp());
    Ok(LameComparison {
        i,
        h_ascending: ha,
        h_descending: hd,
        relative_gap: (ha - hd).abs() / ha.abs().max(hd.abs()),
    })
}

/// The system of a magnetic integral in Riemann coordinates, near a base
/// point. Branches are tracked by nearest angle to the base critical points.
#[derive(Debug, Clone)]
pub struct MagneticChart {
    base: FieldPoint,
    base_data: CharData,
    radius: f64,
    fd_step: f64,
}

/// Newton iterations allowed in [`MagneticChart::mu_from_r`].
pub const MAX_NEWTON: usize = 50;

impl MagneticChart {
    /// Chart radius is `0.1` times the smallest adjacent critical-value gap.
    pub fn new(base: FieldPoint) -> Result<Self> {
        let base_data = char_data(&base)?;
        base_data.valid_speeds()?;
        let radius = 0.1 * base_data.min_adjacent_gap();
        Ok(MagneticChart {
            base,
            base_data,
            radius,
            fd_step: 0.02 * radius,
        })
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub fn base(&self) -> &FieldPoint {
        &self.base
    }

    pub fn center(&self) -> &[f64] {
        &self.base_data.invariants
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Tracked invariants at a point of the chart.
    pub fn r_of_mu(&self, point: &FieldPoint) -> Result<Vec<f64>> {
        let f = point.trig_poly();
        Ok(tracked_angles(point, &self.base_data.angles)?
            .iter()
            .map(|&a| f.eval(a))
            .collect())
    }

    pub fn mu_from_r(&self, r: &[f64]) -> Result<FieldPoint> {
        Ok(self.mu_from_r_counted(r)?.0)
    }

    /// Newton on `μ ↦ r(μ)` from the base point, with the analytic Jacobian
    /// `∂r_k/∂U_l = ∂F/∂U_l(φ_k)`. Returns the point and the iteration count.
    pub fn mu_from_r_counted(&self, r: &[f64]) -> Result<(FieldPoint, usize)> {
        let dist = r
            .iter()
            .zip(self.center())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        if dist > self.radius {
            return Err(MagflowError::NewtonDivergence(format!(
                "target lies {dist:e} from the chart center, radius {:e}",
                self.radius
            )));
        }
        let scale = r.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let mut mu = self.base.clone();
        let mut best = f64::INFINITY;
        for it in 0..=MAX_NEWTON {
            let lost = |e: MagflowError| MagflowError::NewtonDivergence(format!("iteration {it}: {e}"));
            let angles = tracked_angles(&mu, &self.base_data.angles).map_err(lost)?;
            let f = mu.trig_poly();
            let resid: Vec<f64> = angles.iter().zip(r).map(|(&a, t)| f.eval(a) - t).collect();
            let norm = resid.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            // stop at roundoff, or once progress stalls inside the tolerance
            let stalled = norm > 0.5 * best && norm <= 1e-10 * scale;
            if norm <= 4.0 * f64::EPSILON * scale || stalled {
                return Ok((mu, it));
            }
            best = best.min(norm);
            let jac = riemann_gradient(&mu, &angles);
            let step = jac
                .lu()
                .solve(&nalgebra::DVector::from_vec(resid))
                .ok_or_else(|| MagflowError::NewtonDivergence("singular Jacobian".into()))?;
            let values: Vec<f64> = mu.values().iter().zip(step.iter()).map(|(u, s)| u - s).collect();
            mu = FieldPoint::new(mu.degree(), values).map_err(lost)?;
        }
        Err(MagflowError::NewtonDivergence(format!(
            "no convergence in {MAX_NEWTON} iterations, residual {best:e}"
        )))
    }

    /// Critical angles at `μ(r)`, ordered as at the base point.
    pub fn angles_at(&self, r: &[f64]) -> Result<Vec<f64>> {
        let mu = self.mu_from_r(r)?;
        tracked_angles(&mu, &self.base_data.angles)
    }

    /// `λ(r)`, erroring with `NearVertical` at vertical characteristics.
    pub fn lambda_of_r(&self, r: &[f64]) -> Result<Vec<f64>> {
        self.speeds(r)
    }
}

fn tan_checked(a: f64) -> Result<f64> {
    if a.cos().abs() <= crate::chars::TOL_VERTICAL {
        return Err(MagflowError::NearVertical(format!(
            "characteristic at angle {a} is vertical"
        )));
    }
    Ok(a.tan())
}

impl DiagonalSystem for MagneticChart {
    fn dim(&self) -> usize {
        self.base.values().len()
    }

    fn speeds(&self, r: &[f64]) -> Result<Vec<f64>> {
        self.angles_at(r)?.into_iter().map(tan_checked).collect()
    }

    /// `∂λ/∂r = (sec²φ ∂φ/∂U)(∂r/∂U)^{-1}`.
    fn speed_jacobian(&self, r: &[f64]) -> Result<DMatrix<f64>> {
        let mu = self.mu_from_r(r)?;
        let angles = tracked_angles(&mu, &self.base_data.angles)?;
        let dr = riemann_gradient(&mu, &angles);
        let mut dl = angle_gradient(&mu, &angles);
        for (k, a) in angles.iter().enumerate() {
            let sec2 = 1.0 / a.cos().powi(2);
            for l in 0..dl.ncols() {
                dl[(k, l)] *= sec2;
            }
        }
        let inv = dr
            .try_inverse()
            .ok_or_else(|| MagflowError::NewtonDivergence("singular ∂r/∂U".into()))?;
        Ok(dl * inv)
    }

    fn fd_step(&self) -> f64 {
        self.fd_step
    }
}

type SpeedFn = fn(&[f64]) -> Vec<f64>;
type JacFn = fn(&[f64]) -> DMatrix<f64>;

/// Explicit diagonal systems used as controls.
#[derive(Debug, Clone)]
pub struct SyntheticSystem {
    pub name: &'static str,
    dim: usize,
    speeds: SpeedFn,
    jacobian: JacFn,
    fd_step: f64,
}

impl SyntheticSystem {
    /// `λ_k = r_k`: every `Γ` vanishes.
    pub fn identity(dim: usize) -> Self {
        SyntheticSystem {
            name: "lambda_k = r_k",
            dim,
            speeds: |r| r.to_vec(),
            jacobian: |r| DMatrix::identity(r.len(), r.len()),
            fd_step: 1e-3,
        }
    }

    /// `λ = (r_2 r_3, r_1, 2 r_1)`: not semi-Hamiltonian.
    pub fn broken() -> Self {
        SyntheticSystem {
            name: "lambda = (r2 r3, r1, 2 r1)",
            dim: 3,
            speeds: |r| vec![r[1] * r[2], r[0], 2.0 * r[0]],
            jacobian: |r| {
                DMatrix::from_row_slice(3, 3, &[0.0, r[2], r[1], 1.0, 0.0, 0.0, 2.0, 0.0, 0.0])
            },
            fd_step: 1e-3,
        }
    }

    /// Base point used with [`SyntheticSystem::broken`].
    pub fn broken_base() -> Vec<f64> {
        vec![1.0, 2.0, 3.0]
    }
}

impl DiagonalSystem for SyntheticSystem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn speeds(&self, r: &[f64]) -> Result<Vec<f64>> {
        Ok((self.speeds)(r))
    }

    fn speed_jacobian(&self, r: &[f64]) -> Result<DMatrix<f64>> {
        Ok((self.jacobian)(r))
    }

    fn fd_step(&self) -> f64 {
        self.fd_step
    }
}

/// A system with fixed speeds; all `Γ` vanish.
#[derive(Debug, Clone)]
pub struct ConstantSpeeds(pub Vec<f64>);

impl DiagonalSystem for ConstantSpeeds {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn speeds(&self, _r: &[f64]) -> Result<Vec<f64>> {
        Ok(self.0.clone())
    }

    fn fd_step(&self) -> f64 {
        1e-3
    }
}

/// Outcome of the Pavlov–Tsarev pattern check for `N = 2`.
#[derive(Debug, Clone)]
pub struct PtReport {
    pub points: usize,
    /// Largest validity residual of Eq (10).
    pub eq10: f64,
    /// Largest validity residual of Eq (11).
    pub eq11: f64,
    /// Largest mismatch between the `y`-flux of Eq (10) and the `x`-density
    /// of Eq (11), as values and as derivatives along random jets.
    pub shared_density: f64,
    /// Smallest validity residual of Eq (10) with `0.1Λ` added to its density.
    pub control: f64,
    pub conclusion: Option<String>,
}

pub const EGOROV_CONCLUSION: &str = "Egorov structure present (N=2)";

/// Checks that Eqs (10), (11) are laws of the system sharing the density
/// `-fg/2`, i.e. fit `F_x + G_y = 0`, `F_y + H_x = 0`.
pub fn pt_pattern_check(points: &[FieldPoint], seed: u64) -> Result<PtReport> {
    let laws = n2_laws();
    let (eq10, eq11) = (&laws[2], &laws[3]);
    let control = eq10_law(0.1);
    let rows: Vec<(f64, f64, f64, f64)> = points
        .par_iter()
        .enumerate()
        .map(|(idx, p)| -> Result<(f64, f64, f64, f64)> {
            let mut rng = crate::sampling::rng(seed.wrapping_add(idx as u64));
            let jet = random_jet(&mut rng, p);
            let (_, q10) = eq10.eval(p)?;
            let (p11, _) = eq11.eval(p)?;
            let (_, gq10) = eq10.gradient(p, GradientMode::Analytic)?;
            let (gp11, _) = eq11.gradient(p, GradientMode::Analytic)?;
            let along = |g: &[f64], d: &[f64]| g.iter().zip(d).map(|(a, b)| a * b).sum::<f64>();
            let shared = (q10 - p11)
                .abs()
                .max((along(&gq10, &jet.dy) - along(&gp11, &jet.dy)).abs())
                .max((along(&gq10, &jet.dx) - along(&gp11, &jet.dx)).abs());
            Ok((
                validity_check(p, eq10)?,
                validity_check(p, eq11)?,
                shared,
                validity_check(p, &control)?,
            ))
        })
        .collect::<Result<_>>()?;
    let max = |f: fn(&(f64, f64, f64, f64)) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let eq10_max = max(|r| r.0);
    let eq11_max = max(|r| r.1);
    let shared = max(|r| r.2);
    let control_min = rows.iter().map(|r| r.3).fold(f64::INFINITY, f64::min);
    let ok = !rows.is_empty() && eq10_max <= 1e-10 && eq11_max <= 1e-10 && shared <= 1e-12 && control_min >= 1e-3;
    Ok(PtReport {
        points: rows.len(),
        eq10: eq10_max,
        eq11: eq11_max,
        shared_density: shared,
        control: control_min,
        conclusion: ok.then(|| EGOROV_CONCLUSION.to_string()),
    })
}
