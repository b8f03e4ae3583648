//! Riemann invariants, speeds and the Jacobian identity of §3 at a random
//! degree-2 point, with the speeds cross-checked against det(Aλ - B) = 0.

use magflow::chars::{char_data, jacobian_complex, jacobian_real, FD_STEP};
use magflow::sampling::{random_points, SampleOptions};
use magflow::system::build_matrices;

fn main() -> magflow::Result<()> {
    let p = random_points(5, 2, 1, &SampleOptions::well_conditioned())?.remove(0);
    let cd = char_data(&p)?;
    println!("U = {:?}", p.values());
    for k in 0..cd.len() {
        println!("  phi = {:.6}  r = {:.6}  lambda = {:.6}", cd.angles[k], cd.invariants[k], cd.speeds[k].unwrap());
    }
    let mut ev: Vec<f64> = build_matrices(&p).characteristic_speeds()?.iter().map(|z| z.re).collect();
    ev.sort_by(f64::total_cmp);
    println!("generalized eigenvalues of (A, B): {ev:.6?}");
    let cj = jacobian_complex(&p)?;
    println!("det M = {:.6}, -2V = {:.6}", cj.det_m, -2.0 * cj.vandermonde);
    println!("det J_real = {:.6} (2|det M| = {:.6})", jacobian_real(&p, FD_STEP)?, 2.0 * cj.det_m.norm());
    Ok(())
}
