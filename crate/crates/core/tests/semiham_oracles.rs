//! Riemann charts, Christoffel-type coefficients and the semi-Hamiltonian
//! property (Theorem 1), with explicit controls.

use magflow::chars::char_data;
use magflow::semiham::{
    fd_speed_jacobian, gamma, gamma_fd, lame_two_paths, pt_pattern_check, semiham_sweep, ConstantSpeeds,
    DiagonalSystem, MagneticChart, SyntheticSystem, EGOROV_CONCLUSION,
};
use magflow::sampling::{random_points, rng, SampleOptions};
use magflow::MagflowError;
use rand::Rng;

fn charts(seed: u64, n: usize) -> Vec<MagneticChart> {
    random_points(seed, 2, n, &SampleOptions::well_conditioned())
        .unwrap()
        .into_iter()
        .map(|p| MagneticChart::new(p).unwrap())
        .collect()
}

#[test]
fn chart_round_trip_and_newton() {
    let mut r = rng(5);
    for chart in charts(21, 6) {
        let c = chart.center().to_vec();
        let scale = c.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for _ in 0..5 {
            let t: Vec<f64> = c.iter().map(|v| v + 0.5 * chart.radius() * (2.0 * r.gen::<f64>() - 1.0)).collect();
            let mu = chart.mu_from_r(&t).unwrap();
            let back = chart.r_of_mu(&mu).unwrap();
            for (a, b) in back.iter().zip(&t) {
                assert!((a - b).abs() <= 1e-9 * scale);
            }
        }
        // small generic perturbation: quadratic convergence
        let t: Vec<f64> = c.iter().enumerate().map(|(k, v)| v + 1e-3 * chart.radius() * (1.0 + 0.37 * k as f64)).collect();
        let (_, iters) = chart.mu_from_r_counted(&t).unwrap();
        assert!(iters <= 6, "{iters} iterations");
        let far: Vec<f64> = c.iter().map(|v| v + 3.0 * chart.radius()).collect();
        assert!(matches!(chart.mu_from_r(&far), Err(MagflowError::NewtonDivergence(_))));
        // the center reproduces the characteristic speeds
        let sp = chart.speeds(&c).unwrap();
        let cd = char_data(chart.base()).unwrap().valid_speeds().unwrap();
        for (a, b) in sp.iter().zip(&cd) {
            assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }
}

#[test]
fn speed_jacobian_matches_differences() {
    for chart in charts(22, 4) {
        let c = chart.center().to_vec();
        let an = chart.speed_jacobian(&c).unwrap();
        let fd = fd_speed_jacobian(&chart, &c, chart.fd_step()).unwrap();
        let scale = an.amax().max(1.0);
        assert!((&an - &fd).amax() <= 1e-5 * scale, "{}", (&an - &fd).amax());
    }
}

#[test]
fn gamma_difference_quotients_are_stable() {
    for chart in charts(23, 3) {
        let c = chart.center().to_vec();
        let h = chart.fd_step();
        for i in 0..4 {
            for k in 0..4 {
                if i == k {
                    continue;
                }
                let g = gamma(&chart, &c, i, k).unwrap();
                let (a, b) = (gamma_fd(&chart, &c, i, k, h).unwrap(), gamma_fd(&chart, &c, i, k, h / 2.0).unwrap());
                assert!((a - b).abs() <= 1e-2 * a.abs().max(1e-6), "Γ^{k}_{k}{i}: {a} vs {b}");
                assert!((g - b).abs() <= 1e-2 * g.abs().max(1e-6));
            }
        }
    }
}

#[test]
fn theorem1_at_random_charts() {
    for chart in charts(24, 2) {
        let c = chart.center().to_vec();
        let rep = semiham_sweep(&chart, &c).unwrap();
        assert_eq!(rep.terms.len(), 4 * 3);
        assert!(rep.passes(), "max residual {:e}, max floor {:e}", rep.max_residual(), rep.max_floor());
        let delta: Vec<f64> = (0..4).map(|k| 0.3 * chart.radius() * (1.0 - 0.2 * k as f64)).collect();
        for i in 0..4 {
            let l = lame_two_paths(&chart, &c, &delta, i, 8).unwrap();
            assert!(l.relative_gap <= 1e-6, "H_{i}: {l:?}");
        }
    }
}

#[test]
fn controls() {
    let broken = SyntheticSystem::broken();
    let base = SyntheticSystem::broken_base();
    let rep = semiham_sweep(&broken, &base).unwrap();
    assert!(!rep.passes());
    assert!(rep.min_excess() >= 1e3, "{}", rep.min_excess());
    let gaps: Vec<f64> = (0..3)
        .map(|i| lame_two_paths(&broken, &base, &[0.3, 0.3, 0.3], i, 16).unwrap().relative_gap)
        .collect();
    assert!(gaps.iter().any(|g| *g > 1e-2), "{gaps:?}");

    let id = SyntheticSystem::identity(4);
    assert!(semiham_sweep(&id, &[0.1, 0.7, 1.9, 3.0]).unwrap().passes());
    let cs = ConstantSpeeds(vec![-1.0, 0.5, 2.0]);
    let rep = semiham_sweep(&cs, &[0.0; 3]).unwrap();
    assert_eq!(rep.max_residual(), 0.0);
}

#[test]
fn egorov_pattern() {
    let pts = random_points(30, 2, 50, &SampleOptions::default()).unwrap();
    let rep = pt_pattern_check(&pts, 3).unwrap();
    assert_eq!(rep.points, 50);
    assert!(rep.eq10 <= 1e-10 && rep.eq11 <= 1e-10 && rep.shared_density <= 1e-12);
    assert!(rep.control >= 1e-3);
    assert_eq!(rep.conclusion.as_deref(), Some(EGOROV_CONCLUSION));
    assert!(pt_pattern_check(&[], 3).unwrap().conclusion.is_none());
}
