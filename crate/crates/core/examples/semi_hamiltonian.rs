//! Theorem 1 at one degree-2 chart: symmetry residuals against their
//! Richardson floors, Lame coefficients along two paths, and the
//! non-semi-Hamiltonian control.

use magflow::sampling::{random_points, SampleOptions};
use magflow::semiham::{lame_two_paths, semiham_sweep, MagneticChart, SyntheticSystem};

fn main() -> magflow::Result<()> {
    let p = random_points(7, 2, 1, &SampleOptions::well_conditioned())?.remove(0);
    let chart = MagneticChart::new(p)?;
    let r0 = chart.center().to_vec();
    let rep = semiham_sweep(&chart, &r0)?;
    for t in &rep.terms {
        println!("(i,j,k) = ({},{},{}): residual {:.2e}  floor {:.2e}", t.i, t.j, t.k, t.residual, t.floor);
    }
    println!("scale {:.3e}, passes {}", rep.scale, rep.passes());
    let delta = vec![0.5 * chart.radius(); 4];
    for i in 0..4 {
        let l = lame_two_paths(&chart, &r0, &delta, i, 8)?;
        println!("H_{i}: {:.12} vs {:.12}", l.h_ascending, l.h_descending);
    }
    let control = SyntheticSystem::broken();
    let crep = semiham_sweep(&control, &SyntheticSystem::broken_base())?;
    println!("{}: residual/floor >= {:.2e}", control.name, crep.min_excess());
    Ok(())
}
