//! Magnetic geodesic flow on the energy level `H = 1/2` in angle form.
//!
//! With `p = √Λ (cos φ, sin φ)` the equations of §2 become
//!
//! ```text
//! ẋ = cos φ / √Λ,   ẏ = sin φ / √Λ,
//! φ̇ = (Λ_y cos φ - Λ_x sin φ) / (2Λ√Λ) - Ω.
//! ```
//!
//! Integration is classical RK4 with a fixed step. Positions are kept
//! unwrapped during integration and reduced mod the periods on output.

use std::f64::consts::TAU;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{MagflowError, Result};
use crate::fields::{FieldSource, Jet};
use crate::system::omega;

/// Position on the unit cotangent bundle of the torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
}

impl FlowState {
    pub fn new(x: f64, y: f64, phi: f64) -> Self {
        FlowState { x, y, phi }
    }

    fn axpy(&self, h: f64, d: [f64; 3]) -> Self {
        FlowState {
            x: self.x + h * d[0],
            y: self.y + h * d[1],
            phi: self.phi + h * d[2],
        }
    }
}

/// Where the magnetic field comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaModel {
    /// `scale · Im Q_N / (N √Λ Λ^{N/2})` from the field jet.
    Derived { scale: f64 },
    Constant(f64),
}

impl OmegaModel {
    pub fn derived() -> Self {
        OmegaModel::Derived { scale: 1.0 }
    }
}

/// A field source together with a magnetic field.
pub struct MagneticFlow<'a, S: FieldSource + ?Sized> {
    source: &'a S,
    omega: OmegaModel,
}

impl<'a, S: FieldSource + ?Sized> MagneticFlow<'a, S> {
    pub fn new(source: &'a S, omega: OmegaModel) -> Self {
        MagneticFlow { source, omega }
    }

    fn local(&self, x: f64, y: f64) -> Result<(Jet, f64)> {
        let jet = self.source.jet(x, y)?;
        if !(jet.point.lambda() > 0.0) {
            return Err(MagflowError::BlowUp { x, y });
        }
        let w = match self.omega {
            OmegaModel::Derived { scale } => scale * omega(&jet).omega,
            OmegaModel::Constant(w) => w,
        };
        Ok((jet, w))
    }

    /// Magnetic field at a position.
    pub fn omega_at(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.local(x, y)?.1)
    }

    pub fn rhs(&self, s: &FlowState) -> Result<[f64; 3]> {
        let (jet, w) = self.local(s.x, s.y)?;
        let lam = jet.point.lambda();
        let sq = lam.sqrt();
        let (c, sn) = (s.phi.cos(), s.phi.sin());
        Ok([
            c / sq,
            sn / sq,
            (jet.dy[0] * c - jet.dx[0] * sn) / (2.0 * lam * sq) - w,
        ])
    }

    /// The integral `F` of the source's coefficients at a state.
    pub fn first_integral(&self, s: &FlowState) -> Result<f64> {
        let jet = self.source.jet(s.x, s.y)?;
        Ok(jet.point.trig_poly().eval(s.phi))
    }

    pub fn step(&self, s: &FlowState, dt: f64) -> Result<FlowState> {
        let k1 = self.rhs(s)?;
        let k2 = self.rhs(&s.axpy(dt / 2.0, k1))?;
        let k3 = self.rhs(&s.axpy(dt / 2.0, k2))?;
        let k4 = self.rhs(&s.axpy(dt, k3))?;
        let mut d = [0.0; 3];
        for i in 0..3 {
            d[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
        }
        Ok(s.axpy(dt, d))
    }

    /// RK4 from `s0` over `[0, t_end]`, `round(t_end/dt) + 1` samples.
    pub fn integrate(&self, s0: FlowState, t_end: f64, dt: f64) -> Result<Trajectory> {
        if !(dt > 0.0) || !(t_end >= dt) || !dt.is_finite() || !t_end.is_finite() {
            return Err(MagflowError::Validation(format!(
                "need 0 < dt <= T, got dt = {dt}, T = {t_end}"
            )));
        }
        let steps = (t_end / dt).round() as usize;
        let mut samples = Vec::with_capacity(steps + 1);
        let mut s = s0;
        samples.push(Sample::new(0.0, s, self.first_integral(&s)?));
        for i in 1..=steps {
            s = self.step(&s, dt)?;
            samples.push(Sample::new(i as f64 * dt, s, self.first_integral(&s)?));
        }
        Ok(Trajectory {
            dt,
            method: "rk4",
            periods: self.source.periods(),
            samples,
        })
    }

    /// Trajectories for several initial states, in input order.
    pub fn ensemble(&self, starts: &[FlowState], t_end: f64, dt: f64) -> Vec<Result<Trajectory>> {
        starts.par_iter().map(|&s| self.integrate(s, t_end, dt)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: FlowState,
    /// `F` at the state.
    pub f: f64,
}

impl Sample {
    fn new(t: f64, state: FlowState, f: f64) -> Self {
        Sample { t, state, f }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub method: &'static str,
    pub periods: (f64, f64),
    pub samples: Vec<Sample>,
}

/// `max |F(t) - F(0)|` and the series `F(t) - F(0)`.
#[derive(Debug, Clone)]
pub struct Drift {
    pub max_drift: f64,
    pub series: Vec<f64>,
}

impl Trajectory {
    pub fn drift(&self) -> Drift {
        drift(&self.samples, |s| Ok(s.f)).expect("recorded values")
    }

    pub fn max_drift(&self) -> f64 {
        self.drift().max_drift
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("at least one sample")
    }

    /// CSV with header `t,x,y,phi,F`; positions wrapped into the period cell.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,x,y,phi,F")?;
        let (lx, ly) = self.periods;
        for s in &self.samples {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t,
                s.state.x.rem_euclid(lx),
                s.state.y.rem_euclid(ly),
                s.state.phi.rem_euclid(TAU),
                s.f
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Drift of an arbitrary evaluator along samples.
pub fn drift<E>(samples: &[Sample], mut eval: E) -> Result<Drift>
where
    E: FnMut(&Sample) -> Result<f64>,
{
    let mut series = Vec::with_capacity(samples.len());
    let mut f0 = None;
    for s in samples {
        let v = eval(s)?;
        let base = *f0.get_or_insert(v);
        series.push(v - base);
    }
    let max_drift = series.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    Ok(Drift { max_drift, series })
}

/// Closed-form orbit for `Λ = 1`, constant `Ω = ω`.
pub fn larmor_state(s0: FlowState, omega: f64, t: f64) -> FlowState {
    if omega == 0.0 {
        return FlowState::new(s0.x + t * s0.phi.cos(), s0.y + t * s0.phi.sin(), s0.phi);
    }
    let phi = s0.phi - omega * t;
    FlowState {
        x: s0.x - (phi.sin() - s0.phi.sin()) / omega,
        y: s0.y + (phi.cos() - s0.phi.cos()) / omega,
        phi,
    }
}

/// RK4 order study: endpoint state error at `dt` and `dt/2` against a run
/// at `dt/32`. The ratio should approach 16. The ratio of `F` drifts is kept
/// alongside; on the `y`-only families it scales like `dt^5` instead.
#[derive(Debug, Clone, Copy)]
pub struct OrderCheck {
    pub dt: f64,
    pub error_dt: f64,
    pub error_half: f64,
    pub ratio: f64,
    pub drift_ratio: f64,
}

pub fn order_check<S: FieldSource + ?Sized>(
    flow: &MagneticFlow<'_, S>,
    s0: FlowState,
    t_end: f64,
    dt: f64,
) -> Result<OrderCheck> {
    let reference = flow.integrate(s0, t_end, dt / 32.0)?.last().state;
    let err = |tr: &Trajectory| {
        let s = tr.last().state;
        ((s.x - reference.x).powi(2) + (s.y - reference.y).powi(2) + (s.phi - reference.phi).powi(2)).sqrt()
    };
    let a = flow.integrate(s0, t_end, dt)?;
    let b = flow.integrate(s0, t_end, dt / 2.0)?;
    Ok(OrderCheck {
        dt,
        error_dt: err(&a),
        error_half: err(&b),
        ratio: err(&a) / err(&b),
        drift_ratio: a.max_drift() / b.max_drift(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FourierFieldSpec;

    #[test]
    fn flat_rhs() {
        let spec = FourierFieldSpec::flat(1, 1.0, 1.0).unwrap();
        let flow = MagneticFlow::new(&spec, OmegaModel::derived());
        let r = flow.rhs(&FlowState::new(0.1, 0.2, 0.7)).unwrap();
        assert!((r[0] - 0.7f64.cos()).abs() < 1e-15);
        assert!((r[1] - 0.7f64.sin()).abs() < 1e-15);
        assert_eq!(r[2], 0.0);
    }

    #[test]
    fn flat_lines_are_straight() {
        let spec = FourierFieldSpec::flat(1, 1.0, 1.0).unwrap();
        let flow = MagneticFlow::new(&spec, OmegaModel::derived());
        let s0 = FlowState::new(0.0, 0.0, 0.4);
        let tr = flow.integrate(s0, 5.0, 0.01).unwrap();
        assert_eq!(tr.samples.len(), 501);
        let end = tr.last();
        assert!((end.state.x - 5.0 * 0.4f64.cos()).abs() < 1e-12);
        assert!((end.state.y - 5.0 * 0.4f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn larmor_circle() {
        let spec = FourierFieldSpec::flat(1, 1.0, 1.0).unwrap();
        let w = 2.0;
        let flow = MagneticFlow::new(&spec, OmegaModel::Constant(w));
        let s0 = FlowState::new(0.3, 0.1, 0.2);
        let period = TAU / w;
        let tr = flow.integrate(s0, period, period / 200.0).unwrap();
        let end = tr.last().state;
        assert!((end.x - s0.x).abs() < 1e-9 && (end.y - s0.y).abs() < 1e-9);
        let k = 74;
        let mid = tr.samples[k].state;
        let ex = larmor_state(s0, w, tr.samples[k].t);
        assert!((mid.x - ex.x).abs() < 1e-9 && (mid.phi - ex.phi).abs() < 1e-12);
    }

    #[test]
    fn bad_steps_rejected() {
        let spec = FourierFieldSpec::flat(1, 1.0, 1.0).unwrap();
        let flow = MagneticFlow::new(&spec, OmegaModel::derived());
        assert!(flow.integrate(FlowState::new(0.0, 0.0, 0.0), 1.0, 0.0).is_err());
        assert!(flow.integrate(FlowState::new(0.0, 0.0, 0.0), 0.1, 1.0).is_err());
    }
}
