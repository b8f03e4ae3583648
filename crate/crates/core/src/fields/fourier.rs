use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{component_names, FieldPoint, FieldSource, Jet};
use crate::error::{MagflowError, Result};

/// One Fourier mode `c · e^{2πi(m x/Lx + n y/Ly)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub m: i32,
    pub n: i32,
    pub c: Complex64,
}

impl Mode {
    pub fn new(m: i32, n: i32, re: f64, im: f64) -> Self {
        Mode {
            m,
            n,
            c: Complex64::new(re, im),
        }
    }
}

/// Exact, smooth, doubly periodic test fields.
///
/// `fields[0]` holds the modes of `log Λ`; `fields[i]` for `i ≥ 1` holds the
/// modes of the `i`-th unknown (`u0, u1, v1, …`). Every mode list must be
/// Hermitian so the series is real.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierFieldSpec {
    degree: usize,
    lx: f64,
    ly: f64,
    fields: Vec<Vec<Mode>>,
}

impl FourierFieldSpec {
    pub fn new(degree: usize, lx: f64, ly: f64, fields: Vec<Vec<Mode>>) -> Result<Self> {
        if degree == 0 {
            return Err(MagflowError::Validation("degree must be >= 1".into()));
        }
        if !(lx > 0.0 && ly > 0.0) {
            return Err(MagflowError::Validation(format!(
                "periods must be positive, got {lx} x {ly}"
            )));
        }
        if fields.len() != 2 * degree {
            return Err(MagflowError::Validation(format!(
                "expected {} mode lists, got {}",
                2 * degree,
                fields.len()
            )));
        }
        let names = field_names(degree);
        for (name, modes) in names.iter().zip(&fields) {
            check_hermitian(name, modes)?;
        }
        Ok(FourierFieldSpec {
            degree,
            lx,
            ly,
            fields,
        })
    }

    /// Spec with no modes at all: `Λ = 1` and every other unknown zero.
    pub fn flat(degree: usize, lx: f64, ly: f64) -> Result<Self> {
        Self::new(degree, lx, ly, vec![Vec::new(); 2 * degree])
    }

    pub fn fields(&self) -> &[Vec<Mode>] {
        &self.fields
    }

    /// The degree-1 family `Λ = exp(s sin(2πy/Ly))`, `u_0 = c cos(2πy/Ly)`,
    /// which admits the linear integral `2√Λ cos φ + u_0` once the magnetic
    /// field is derived from the jets.
    pub fn y_family(log_amp: f64, u0_amp: f64, lx: f64, ly: f64) -> Result<Self> {
        let log_lambda = vec![
            Mode::new(0, 1, 0.0, -log_amp / 2.0),
            Mode::new(0, -1, 0.0, log_amp / 2.0),
        ];
        let u0 = vec![
            Mode::new(0, 1, u0_amp / 2.0, 0.0),
            Mode::new(0, -1, u0_amp / 2.0, 0.0),
        ];
        Self::new(1, lx, ly, vec![log_lambda, u0])
    }

    /// `(value, ∂x, ∂y)` of a real Fourier series.
    fn eval_series(&self, modes: &[Mode], x: f64, y: f64) -> (f64, f64, f64) {
        let (mut v, mut dx, mut dy) = (0.0, 0.0, 0.0);
        for mode in modes {
            let kx = TAU * mode.m as f64 / self.lx;
            let ky = TAU * mode.n as f64 / self.ly;
            let e = mode.c * Complex64::cis(kx * x + ky * y);
            v += e.re;
            // d/dx of Re(c e^{iθ}) = Re(i kx c e^{iθ}) = -kx Im(c e^{iθ})
            dx -= kx * e.im;
            dy -= ky * e.im;
        }
        (v, dx, dy)
    }

    pub fn eval_jet(&self, x: f64, y: f64) -> Result<Jet> {
        let m = 2 * self.degree;
        let mut values = vec![0.0; m];
        let mut dx = vec![0.0; m];
        let mut dy = vec![0.0; m];
        let (log_l, lx_, ly_) = self.eval_series(&self.fields[0], x, y);
        let lam = log_l.exp();
        values[0] = lam;
        dx[0] = lam * lx_;
        dy[0] = lam * ly_;
        for i in 1..m {
            let (v, a, b) = self.eval_series(&self.fields[i], x, y);
            values[i] = v;
            dx[i] = a;
            dy[i] = b;
        }
        Jet::new(FieldPoint::new(self.degree, values)?, dx, dy)
    }
}

impl FieldSource for FourierFieldSpec {
    fn degree(&self) -> usize {
        self.degree
    }

    fn periods(&self) -> (f64, f64) {
        (self.lx, self.ly)
    }

    fn jet(&self, x: f64, y: f64) -> Result<Jet> {
        self.eval_jet(x, y)
    }
}

/// File-format names of the mode lists: `LOGLAMBDA, U0, U1, V1, …`.
pub(crate) fn field_names(degree: usize) -> Vec<String> {
    let mut names = component_names(degree);
    names[0] = "LOGLAMBDA".into();
    names.iter().map(|s| s.to_uppercase()).collect()
}

fn check_hermitian(name: &str, modes: &[Mode]) -> Result<()> {
    let mut merged: BTreeMap<(i32, i32), Complex64> = BTreeMap::new();
    for mode in modes {
        *merged.entry((mode.m, mode.n)).or_default() += mode.c;
    }
    let scale = merged.values().map(|c| c.norm()).fold(1.0, f64::max);
    for (&(m, n), &c) in &merged {
        let partner = merged.get(&(-m, -n)).copied().unwrap_or_default();
        if (c - partner.conj()).norm() > 1e-12 * scale {
            return Err(MagflowError::Validation(format!(
                "field {name}: mode ({m},{n}) lacks its conjugate partner ({},{})",
                -m, -n
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_spec_is_flat() {
        let spec = FourierFieldSpec::flat(2, 1.0, 1.0).unwrap();
        let jet = spec.eval_jet(0.3, 0.7).unwrap();
        assert_eq!(jet.point.values(), &[1.0, 0.0, 0.0, 0.0]);
        assert!(jet.dx.iter().chain(&jet.dy).all(|&d| d == 0.0));
    }

    #[test]
    fn lambda_chain_rule() {
        let ly = 2.0;
        let spec = FourierFieldSpec::y_family(0.3, 0.0, 1.0, ly).unwrap();
        let jet = spec.eval_jet(0.1, 0.0).unwrap();
        let lam = jet.point.lambda();
        assert!((lam - 1.0).abs() < 1e-15);
        assert!((jet.dy[0] - lam * 0.3 * TAU / ly).abs() < 1e-14);
        assert_eq!(jet.dx[0], 0.0);
    }

    #[test]
    fn rejects_non_hermitian_modes() {
        let bad = vec![vec![], vec![Mode::new(1, 0, 1.0, 0.0)]];
        assert!(FourierFieldSpec::new(1, 1.0, 1.0, bad).is_err());
        let complex_mean = vec![vec![Mode::new(0, 0, 0.0, 0.5)], vec![]];
        assert!(FourierFieldSpec::new(1, 1.0, 1.0, complex_mean).is_err());
    }
}
