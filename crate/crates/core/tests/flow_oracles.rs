//! Flow integration against closed-form orbits, conservation of the exact
//! integrals, and the output format.

use std::f64::consts::TAU;

use magflow::fields::{FourierFieldSpec, PowerField};
use magflow::flow::{larmor_state, order_check, FlowState, MagneticFlow, OmegaModel};

#[test]
fn larmor_error_is_fourth_order() {
    let spec = FourierFieldSpec::flat(1, 1.0, 1.0).unwrap();
    let w = 1.5;
    let flow = MagneticFlow::new(&spec, OmegaModel::Constant(w));
    let s0 = FlowState::new(0.2, 0.4, 1.0);
    // away from whole periods, where Simpson quadrature of the orbit is spectrally exact
    let t = 2.3;
    let err = |dt: f64| {
        let e = flow.integrate(s0, t, dt).unwrap().last().state;
        let x = larmor_state(s0, w, t);
        ((e.x - x.x).powi(2) + (e.y - x.y).powi(2) + (e.phi - x.phi).powi(2)).sqrt()
    };
    let (a, b) = (err(t / 20.0), err(t / 40.0));
    let ratio = a / b;
    assert!((ratio - 16.0).abs() <= 0.3 * 16.0, "ratio {ratio}");
}

#[test]
fn exact_families_conserve_f() {
    let spec = FourierFieldSpec::y_family(0.3, 0.2, 1.0, 1.0).unwrap();
    let s0 = FlowState::new(0.0, 0.0, 0.3);
    let flow = MagneticFlow::new(&spec, OmegaModel::derived());
    let d1 = flow.integrate(s0, 10.0, 1e-2).unwrap().max_drift();
    assert!(d1 <= 1e-8, "{d1}");
    let sq = PowerField::new(spec.clone(), 2);
    let d2 = MagneticFlow::new(&sq, OmegaModel::derived()).integrate(s0, 10.0, 1e-2).unwrap().max_drift();
    assert!(d2 <= 1e-8, "{d2}");
    // a wrong magnetic field breaks conservation by orders of magnitude
    let off = MagneticFlow::new(&spec, OmegaModel::Derived { scale: 1.1 });
    let d3 = off.integrate(s0, 10.0, 1e-2).unwrap().max_drift();
    assert!(d3 >= 1e3 * d1.max(1e-12), "{d3}");
}

#[test]
fn order_check_ratio() {
    let spec = FourierFieldSpec::y_family(0.3, 0.2, 1.0, 1.0).unwrap();
    let flow = MagneticFlow::new(&spec, OmegaModel::derived());
    let oc = order_check(&flow, FlowState::new(0.0, 0.0, 0.3), 10.0, 0.05).unwrap();
    assert!((oc.ratio - 16.0).abs() <= 0.3 * 16.0, "{oc:?}");
}

#[test]
fn csv_format_and_ensemble_determinism() {
    let spec = FourierFieldSpec::y_family(0.3, 0.2, 1.0, 1.0).unwrap();
    let flow = MagneticFlow::new(&spec, OmegaModel::derived());
    let starts: Vec<FlowState> = (0..4).map(|k| FlowState::new(0.1, 0.2, 0.5 * k as f64)).collect();
    let a = flow.ensemble(&starts, 2.0, 0.01);
    let b = flow.ensemble(&starts, 2.0, 0.01);
    for (k, (x, y)) in a.iter().zip(&b).enumerate() {
        let (x, y) = (x.as_ref().unwrap(), y.as_ref().unwrap());
        assert_eq!(x.to_csv(), y.to_csv());
        let serial = flow.integrate(starts[k], 2.0, 0.01).unwrap();
        assert_eq!(x.to_csv(), serial.to_csv());
    }
    let csv = a[0].as_ref().unwrap().to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x,y,phi,F"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 201);
    for r in &rows {
        assert_eq!(r.len(), 5);
        assert!((0.0..1.0).contains(&r[1]) && (0.0..1.0).contains(&r[2]) && (0.0..TAU).contains(&r[3]));
    }
    assert_eq!(rows[200][0], 2.0);
}
