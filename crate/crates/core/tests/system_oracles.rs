//! The quasi-linear system against independent oracles.

use std::f64::consts::TAU;

use magflow::fields::{FieldPoint, FieldSource, FourierFieldSpec, Jet, PowerField};
use magflow::flow::{FlowState, MagneticFlow, OmegaModel};
use magflow::sampling::{random_jet, random_point, random_points, rng, SampleOptions};
use magflow::system::{
    build_matrices, geodesic_matrix, omega, q_residual, reduced_degree2_matrices, system_residual, EigenClass,
};
use magflow::chars::char_data;
use num_complex::Complex64;
use proptest::prelude::*;

/// Fields that are affine in (x, y) with the given jet at the origin.
struct AffineField(Jet);

impl FieldSource for AffineField {
    fn degree(&self) -> usize {
        self.0.degree()
    }
    fn periods(&self) -> (f64, f64) {
        (1.0, 1.0)
    }
    fn jet(&self, x: f64, y: f64) -> magflow::Result<Jet> {
        let j = &self.0;
        let v: Vec<f64> = (0..j.dx.len())
            .map(|l| j.point.values()[l] + x * j.dx[l] + y * j.dy[l])
            .collect();
        Jet::new(FieldPoint::new(j.degree(), v)?, j.dx.clone(), j.dy.clone())
    }
}

/// Fourier mode `k` of `√Λ dF/dt` along the flow with `Ω = 0`, where
/// `dF/dt = F_x ẋ + F_y ẏ + F_φ φ̇` and the vector field comes from `flow::rhs`.
fn q_oracle(jet: &Jet, k: i64) -> Complex64 {
    let field = AffineField(jet.clone());
    let flow = MagneticFlow::new(&field, OmegaModel::Constant(0.0));
    let n = jet.degree() as i64;
    let f = jet.point.trig_poly();
    let samples = 128;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..samples {
        let phi = TAU * j as f64 / samples as f64;
        let rhs = flow.rhs(&FlowState::new(0.0, 0.0, phi)).unwrap();
        let (mut fx, mut fy) = (0.0, 0.0);
        for s in -n..=n {
            let (_, ax, ay) = jet.coeff_with_derivatives(s);
            let e = Complex64::from_polar(1.0, s as f64 * phi);
            fx += (ax * e).re;
            fy += (ay * e).re;
        }
        let dfdt = fx * rhs[0] + fy * rhs[1] + f.eval_dphi(phi) * rhs[2];
        acc += jet.point.lambda().sqrt() * dfdt * Complex64::from_polar(1.0, -(k as f64) * phi);
    }
    acc / samples as f64
}

#[test]
fn q_matches_fourier_oracle() {
    let mut r = rng(8);
    for n in 1..=4 {
        for _ in 0..10 {
            let p = random_point(&mut r, n, &SampleOptions::default()).unwrap();
            let jet = random_jet(&mut r, &p);
            for k in 0..=n as i64 {
                let q = q_residual(&jet, k);
                let o = q_oracle(&jet, k);
                assert!((q - o).norm() <= 1e-12 * (1.0 + o.norm()), "N={n} k={k}: {q} vs {o}");
            }
        }
    }
}

#[test]
fn constant_fields_are_trivial() {
    for n in 1..=3 {
        let jet = Jet::constant(FieldPoint::flat(n));
        for k in 0..=n as i64 {
            assert_eq!(q_residual(&jet, k), Complex64::new(0.0, 0.0));
        }
        let om = omega(&jet);
        assert_eq!((om.omega, om.consistency), (0.0, 0.0));
        assert_eq!(system_residual(&jet).max_abs(), 0.0);
    }
}

#[test]
fn n1_family_q_and_omega() {
    let spec = FourierFieldSpec::y_family(0.3, 0.2, 1.0, 1.0).unwrap();
    for &y in &[0.05, 0.3, 0.71] {
        let jet = spec.jet(0.4, y).unwrap();
        let lam = (0.3 * (TAU * y).sin()).exp();
        let du0 = -0.2 * TAU * (TAU * y).sin();
        let q1 = q_residual(&jet, 1);
        assert!((q1 - Complex64::new(0.0, -du0 / 2.0)).norm() < 1e-13);
        assert!((omega(&jet).omega + du0 / (2.0 * lam)).abs() < 1e-13);
        assert!(system_residual(&jet).max_abs() < 1e-13);
    }
}

#[test]
fn squared_family_closure() {
    let base = FourierFieldSpec::y_family(0.3, 0.2, 1.0, 1.0).unwrap();
    let sq = PowerField::new(base, 2);
    for j in 0..20 {
        let y = j as f64 / 20.0 + 0.013;
        let jet = sq.jet(0.2, y).unwrap();
        assert!(system_residual(&jet).max_abs() <= 1e-12);
        let lam = (0.3 * (TAU * y).sin()).exp();
        let du0 = -0.2 * TAU * (TAU * y).sin();
        assert!((omega(&jet).omega + du0 / (2.0 * lam)).abs() <= 1e-12);
        // u_1 = 2√Λ u_0, v_1 = 0
        let u0 = 0.2 * (TAU * y).cos();
        assert!((jet.point.u(1) - 2.0 * lam.sqrt() * u0).abs() <= 1e-13);
        assert!(jet.point.v(1).abs() <= 1e-13);
    }
}

#[test]
fn omega_forms_agree() {
    let mut r = rng(17);
    for n in 1..=4 {
        for _ in 0..25 {
            let p = random_point(&mut r, n, &SampleOptions::default()).unwrap();
            let jet = random_jet(&mut r, &p);
            let om = omega(&jet);
            assert!((om.omega - om.omega_divergence).abs() <= 1e-12 * (1.0 + om.omega.abs()), "{om:?}");
        }
    }
}

#[test]
fn characteristic_speeds_are_tangents() {
    let pts = random_points(4, 2, 50, &SampleOptions::default()).unwrap();
    let mut checked = 0;
    for p in &pts {
        let cd = char_data(p).unwrap();
        if cd.angles.iter().any(|a| a.cos().abs() <= 1e-3) {
            continue;
        }
        checked += 1;
        let mut want: Vec<f64> = cd.angles.iter().map(|a| a.tan()).collect();
        want.sort_by(f64::total_cmp);
        let ev = build_matrices(p).characteristic_speeds().unwrap();
        let mut got: Vec<f64> = ev.iter().map(|z| z.re).collect();
        got.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0), "{a} vs {b}");
        }
        assert!(ev.iter().all(|z| z.im.abs() <= 1e-6 * z.norm().max(1.0)));
    }
    assert!(checked >= 40);
}

#[test]
fn reduced_matrices_match_section5() {
    let mut r = rng(5);
    for _ in 0..20 {
        let p = random_point(&mut r, 2, &SampleOptions::default()).unwrap();
        let red = reduced_degree2_matrices(&p).unwrap();
        let lam = p.lambda();
        let (f, g) = (p.u(1) / lam.sqrt(), p.v(1) / lam.sqrt());
        // rows in W = (Λ, u0, f, g):
        //   f_x + g_y = 0
        //   (fΛ)_x - (gΛ)_y = 0
        //   u0_x + 2Λ_x - g(f_y - g_x)/2 = 0
        //   -u0_y + 2Λ_y + f(f_y - g_x)/2 = 0
        let a = [
            [0.0, 0.0, 1.0, 0.0],
            [f, 0.0, lam, 0.0],
            [2.0, 1.0, 0.0, g / 2.0],
            [0.0, 0.0, 0.0, -f / 2.0],
        ];
        let b = [
            [0.0, 0.0, 0.0, 1.0],
            [-g, 0.0, 0.0, -lam],
            [0.0, 0.0, -g / 2.0, 0.0],
            [2.0, -1.0, f / 2.0, 0.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((red.a[(i, j)] - a[i][j]).abs() <= 1e-12, "A[{i}][{j}]");
                assert!((red.b[(i, j)] - b[i][j]).abs() <= 1e-12, "B[{i}][{j}]");
            }
        }
    }
}

#[test]
fn geodesic_matrix_closed_forms() {
    let rep = geodesic_matrix(&[0.3, 0.7, 1.0]).unwrap();
    let want = [[0.0, 0.7], [0.7, 2.0 - 0.6]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((rep.matrix[(i, j)] - want[i][j]).abs() < 1e-15);
        }
    }
    assert_eq!(rep.class, EigenClass::Hyperbolic);
    assert_eq!(geodesic_matrix(&[1.0, 0.0, 1.0]).unwrap().class, EigenClass::Borderline);
}

#[test]
fn geodesic_eigenvalues_match_power_sums() {
    let mut r = rng(12);
    for _ in 0..20 {
        use rand::Rng;
        let mut a: Vec<f64> = (0..4).map(|_| r.gen_range(-1.0..1.0)).collect();
        a.push(1.0);
        let rep = geodesic_matrix(&a).unwrap();
        let mut mk = rep.matrix.clone();
        for k in 1..=4 {
            let s: Complex64 = rep.eigenvalues.iter().map(|z| z.powi(k)).sum();
            let tr = mk.trace();
            assert!((s.re - tr).abs() <= 1e-10 * (1.0 + tr.abs()) && s.im.abs() <= 1e-10 * (1.0 + tr.abs()));
            mk = &mk * &rep.matrix;
        }
    }
}

proptest! {
    #[test]
    fn residual_is_linear_in_derivatives(seed in 0u64..100_000, n in 1usize..4) {
        let mut r = rng(seed);
        let p = random_point(&mut r, n, &SampleOptions::default()).unwrap();
        let jet = random_jet(&mut r, &p);
        let m = build_matrices(&p);
        let lhs = m.apply(&jet.dx, &jet.dy);
        let res = system_residual(&jet);
        for (a, b) in lhs.iter().zip(&res.0) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }
}
