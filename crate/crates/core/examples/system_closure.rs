//! The degree-2 squared family solves the system exactly; its matrices in
//! the (Λ, u0, f, g) variables match the §5 display.

use magflow::fields::{FieldSource, FourierFieldSpec, PowerField};
use magflow::system::{build_matrices, omega, reduced_degree2_matrices, system_residual};

fn main() -> magflow::Result<()> {
    let base = FourierFieldSpec::y_family(0.3, 0.2, 1.0, 1.0)?;
    let sq = PowerField::new(base, 2);
    for &(x, y) in &[(0.0, 0.1), (0.3, 0.45), (0.7, 0.8)] {
        let jet = sq.jet(x, y)?;
        let om = omega(&jet);
        let res = system_residual(&jet);
        let m = build_matrices(&jet.point);
        let lin = m
            .apply(&jet.dx, &jet.dy)
            .iter()
            .zip(&res.0)
            .fold(0.0_f64, |a, (p, q)| a.max((p - q).abs()));
        println!(
            "({x}, {y}): Omega = {:.6}, |residual| = {:.1e}, linearity gap = {:.1e}",
            om.omega,
            res.max_abs(),
            lin
        );
    }
    let jet = sq.jet(0.0, 0.2)?;
    let red = reduced_degree2_matrices(&jet.point)?;
    println!("reduced A =\n{:.4}reduced B =\n{:.4}", red.a, red.b);
    Ok(())
}
