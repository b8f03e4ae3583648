//! Proposition 1: the laws G_k built from level points near the critical
//! values, and the independence determinant as ε shrinks.

use magflow::chars::char_data;
use magflow::claws::{default_epsilon, g_densities, g_independence, level_points, validity_check};
use magflow::sampling::{random_points, SampleOptions};

fn main() -> magflow::Result<()> {
    let p = random_points(3, 2, 1, &SampleOptions::well_conditioned())?.remove(0);
    let cd = char_data(&p)?;
    let gap = cd.min_adjacent_gap();
    let eps = default_epsilon(&cd);
    let lp = level_points(&p, eps)?;
    println!("critical angles {:.6?}", lp.critical_angles);
    println!("level angles    {:.6?}", lp.angles);
    for g in g_densities(&p, eps)? {
        println!("{} validity {:.2e}", g.name, validity_check(&p, &g)?);
    }
    for f in [1e-2, 1e-3, 1e-4] {
        let gi = g_independence(&p, f * gap)?;
        println!(
            "eps = {f:.0e} gap: det = {:.4e}, |bracket| = {:.6}, |det M| = {:.6}, gap {:.2e}",
            gi.det_analytic,
            gi.bracket_det.norm(),
            gi.det_m.norm(),
            gi.relative_gap
        );
    }
    Ok(())
}
