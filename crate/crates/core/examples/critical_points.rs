//! Critical points of a fibre polynomial and the Vieta product of Eq (7).

use magflow::sampling::{random_hyperbolic_poly, rng};
use magflow::trigpoly::{vieta_product, TOL_ROOT};

fn main() -> magflow::Result<()> {
    let mut r = rng(1);
    for n in 1..=4 {
        let f = random_hyperbolic_poly(&mut r, n, 0.5)?;
        let cs = f.critical_points(TOL_ROOT)?;
        let prod = vieta_product(&cs, n)?;
        println!("N = {n}: {} critical points, |prod x_k + 1| = {:.2e}", cs.len(), (prod + 1.0).norm());
        for (a, k) in cs.angles.iter().zip(&cs.kinds) {
            println!("  phi = {a:.6}  {k:?}  F = {:.6}", f.eval(*a));
        }
    }
    Ok(())
}
