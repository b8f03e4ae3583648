use num_complex::Complex64;

use super::{u_index, v_index, FieldPoint, FieldSource, Jet};
use crate::error::Result;
use crate::trigpoly::TrigPoly;

/// Lifts a degree-`N` field to degree `mN` by raising its integral to the
/// `m`-th power. The metric factor is unchanged, and the top coefficient of
/// `F^m` is `Λ^{mN/2}`, so the lifted coefficients form a valid field point.
/// If `F` is conserved by a flow, so is `F^m`.
#[derive(Debug, Clone)]
pub struct PowerField<S> {
    base: S,
    m: u32,
}

impl<S: FieldSource> PowerField<S> {
    pub fn new(base: S, m: u32) -> Self {
        assert!(m >= 1, "power must be at least 1");
        PowerField { base, m }
    }

    pub fn base(&self) -> &S {
        &self.base
    }

    /// Lifts a single base jet.
    pub fn lift(&self, jet: &Jet) -> Result<Jet> {
        lift_jet(jet, self.m)
    }
}

pub(crate) fn lift_jet(jet: &Jet, m: u32) -> Result<Jet> {
    let n = jet.degree() as i64;
    let f = jet.point.trig_poly();
    let mut fx = Vec::with_capacity(n as usize + 1);
    let mut fy = Vec::with_capacity(n as usize + 1);
    for k in 0..=n {
        let (_, ax, ay) = jet.coeff_with_derivatives(k);
        fx.push(ax);
        fy.push(ay);
    }
    let fx = TrigPoly::new(fx)?;
    let fy = TrigPoly::new(fy)?;
    let fm = f.power(m);
    let (gx, gy) = if m == 1 {
        (fx, fy)
    } else {
        let fm1 = f.power(m - 1);
        (scale(&fm1.mul(&fx), m as f64), scale(&fm1.mul(&fy), m as f64))
    };

    let deg = (n as usize) * m as usize;
    let mut values = vec![0.0; 2 * deg];
    let mut dx = vec![0.0; 2 * deg];
    let mut dy = vec![0.0; 2 * deg];
    values[0] = jet.point.lambda();
    dx[0] = jet.dx[0];
    dy[0] = jet.dy[0];
    values[1] = fm.coeff(0).re;
    dx[1] = gx.coeff(0).re;
    dy[1] = gy.coeff(0).re;
    for k in 1..deg {
        let (iu, iv) = (u_index(k), v_index(k));
        let (a, ax, ay) = (fm.coeff(k as i64), gx.coeff(k as i64), gy.coeff(k as i64));
        values[iu] = a.re;
        values[iv] = a.im;
        dx[iu] = ax.re;
        dx[iv] = ax.im;
        dy[iu] = ay.re;
        dy[iv] = ay.im;
    }
    Jet::new(FieldPoint::new(deg, values)?, dx, dy)
}

fn scale(p: &TrigPoly, s: f64) -> TrigPoly {
    let coeffs: Vec<Complex64> = p.coeffs().iter().map(|c| c * s).collect();
    TrigPoly::new(coeffs).expect("scaling keeps a_0 real")
}

impl<S: FieldSource> FieldSource for PowerField<S> {
    fn degree(&self) -> usize {
        self.base.degree() * self.m as usize
    }

    fn periods(&self) -> (f64, f64) {
        self.base.periods()
    }

    fn jet(&self, x: f64, y: f64) -> Result<Jet> {
        lift_jet(&self.base.jet(x, y)?, self.m)
    }
}
