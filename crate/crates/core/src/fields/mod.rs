//! Field configurations on the torus and their first-derivative jets.
//!
//! The unknowns at a point are ordered `(Λ, u_0, u_1, v_1, …, u_{N-1}, v_{N-1})`,
//! `2N` reals in total. The coefficients of the integral are
//! `a_k = u_k + i v_k` for `0 ≤ k < N` (with `v_0 = 0`) and `a_N = Λ^{N/2}`.

mod fourier;
mod grid;
mod io;
mod power;

pub use fourier::{FourierFieldSpec, Mode};
pub use grid::{FieldGrid, GridField, PeriodicStencil};
pub use io::{load_grid, load_spec, parse_grid, parse_spec, save_grid, save_spec, write_grid, write_spec};
pub use power::PowerField;

use num_complex::Complex64;

use crate::error::{MagflowError, Result};
use crate::trigpoly::TrigPoly;

/// Values of the `2N` unknowns at one point of the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPoint {
    degree: usize,
    values: Vec<f64>,
}

/// A field point together with its `x` and `y` derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub point: FieldPoint,
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
}

/// Anything that can produce jets at torus positions.
pub trait FieldSource: Send + Sync {
    fn degree(&self) -> usize;
    /// `(Lx, Ly)`.
    fn periods(&self) -> (f64, f64);
    fn jet(&self, x: f64, y: f64) -> Result<Jet>;
}

/// Position of `u_k` in the unknown vector.
pub fn u_index(k: usize) -> usize {
    if k == 0 {
        1
    } else {
        2 * k
    }
}

/// Position of `v_k` (`k ≥ 1`) in the unknown vector.
pub fn v_index(k: usize) -> usize {
    debug_assert!(k >= 1);
    2 * k + 1
}

/// Human-readable names of the unknowns, in vector order.
pub fn component_names(degree: usize) -> Vec<String> {
    let mut names = vec!["Lambda".to_string(), "u0".to_string()];
    for k in 1..degree {
        names.push(format!("u{k}"));
        names.push(format!("v{k}"));
    }
    names
}

impl FieldPoint {
    pub fn new(degree: usize, values: Vec<f64>) -> Result<Self> {
        if degree == 0 {
            return Err(MagflowError::Validation("degree must be >= 1".into()));
        }
        if values.len() != 2 * degree {
            return Err(MagflowError::Validation(format!(
                "degree {degree} needs {} components, got {}",
                2 * degree,
                values.len()
            )));
        }
        if !(values[0] > 0.0) || !values[0].is_finite() {
            return Err(MagflowError::Validation(format!(
                "Lambda must be positive, got {}",
                values[0]
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MagflowError::Validation("non-finite field value".into()));
        }
        Ok(FieldPoint { degree, values })
    }

    /// Point with `Λ = 1` and every other unknown zero; its integral is `2cos(Nφ)`.
    pub fn flat(degree: usize) -> Self {
        let mut values = vec![0.0; 2 * degree];
        values[0] = 1.0;
        FieldPoint { degree, values }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lambda(&self) -> f64 {
        self.values[0]
    }

    pub fn u(&self, k: usize) -> f64 {
        self.values[u_index(k)]
    }

    pub fn v(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.values[v_index(k)]
        }
    }

    /// Same point with component `idx` replaced.
    pub fn with_component(&self, idx: usize, value: f64) -> Result<Self> {
        let mut values = self.values.clone();
        values[idx] = value;
        FieldPoint::new(self.degree, values)
    }

    /// `a_k` for any integer `k`.
    pub fn coeff_a(&self, k: i64) -> Complex64 {
        let n = self.degree as i64;
        let idx = k.unsigned_abs() as usize;
        let a = if k.abs() > n {
            Complex64::new(0.0, 0.0)
        } else if k.abs() == n {
            Complex64::new(self.lambda().powf(n as f64 / 2.0), 0.0)
        } else {
            Complex64::new(self.u(idx), self.v(idx))
        };
        if k < 0 {
            a.conj()
        } else {
            a
        }
    }

    /// The integral restricted to the fibre over this point.
    pub fn trig_poly(&self) -> TrigPoly {
        let coeffs = (0..=self.degree as i64).map(|k| self.coeff_a(k)).collect();
        TrigPoly::new(coeffs).expect("a_0 is real by construction")
    }

    /// `∂F/∂U_l` as a trigonometric polynomial.
    pub fn trig_poly_derivative(&self, l: usize) -> TrigPoly {
        let n = self.degree;
        let mut d = TrigPoly::zeros(n);
        let coeffs = d.coeffs_mut();
        if l == 0 {
            let nf = n as f64;
            coeffs[n] = Complex64::new(nf / 2.0 * self.lambda().powf(nf / 2.0 - 1.0), 0.0);
        } else if l == 1 {
            coeffs[0] = Complex64::new(1.0, 0.0);
        } else if l % 2 == 0 {
            coeffs[l / 2] = Complex64::new(1.0, 0.0);
        } else {
            coeffs[l / 2] = Complex64::new(0.0, 1.0);
        }
        d
    }
}

impl Jet {
    pub fn new(point: FieldPoint, dx: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        let m = point.values().len();
        if dx.len() != m || dy.len() != m {
            return Err(MagflowError::Validation(format!(
                "jet derivative lengths {}/{} do not match {m} components",
                dx.len(),
                dy.len()
            )));
        }
        Ok(Jet { point, dx, dy })
    }

    /// Jet with all derivatives zero.
    pub fn constant(point: FieldPoint) -> Self {
        let m = point.values().len();
        Jet {
            point,
            dx: vec![0.0; m],
            dy: vec![0.0; m],
        }
    }

    pub fn degree(&self) -> usize {
        self.point.degree()
    }

    /// `(a_k, ∂_x a_k, ∂_y a_k)` for any integer `k`.
    pub fn coeff_with_derivatives(&self, k: i64) -> (Complex64, Complex64, Complex64) {
        let n = self.degree() as i64;
        let zero = Complex64::new(0.0, 0.0);
        let idx = k.unsigned_abs() as usize;
        let (a, ax, ay) = if k.abs() > n {
            (zero, zero, zero)
        } else if k.abs() == n {
            let nf = n as f64;
            let lam = self.point.lambda();
            let dval = nf / 2.0 * lam.powf(nf / 2.0 - 1.0);
            (
                Complex64::new(lam.powf(nf / 2.0), 0.0),
                Complex64::new(dval * self.dx[0], 0.0),
                Complex64::new(dval * self.dy[0], 0.0),
            )
        } else if idx == 0 {
            let i = u_index(0);
            (
                Complex64::new(self.point.u(0), 0.0),
                Complex64::new(self.dx[i], 0.0),
                Complex64::new(self.dy[i], 0.0),
            )
        } else {
            let (iu, iv) = (u_index(idx), v_index(idx));
            (
                Complex64::new(self.point.u(idx), self.point.v(idx)),
                Complex64::new(self.dx[iu], self.dx[iv]),
                Complex64::new(self.dy[iu], self.dy[iv]),
            )
        };
        if k < 0 {
            (a.conj(), ax.conj(), ay.conj())
        } else {
            (a, ax, ay)
        }
    }
}
