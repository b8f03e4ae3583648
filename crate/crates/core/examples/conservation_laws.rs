//! Validity of the explicit conservation laws at random degree-2 points,
//! with the fake law (Λ, 0) as a negative control.

use magflow::claws::{explicit_laws, fake_law, n2_laws, validity_check};
use magflow::sampling::{random_points, SampleOptions};

fn main() -> magflow::Result<()> {
    let pts = random_points(2, 2, 20, &SampleOptions::default())?;
    let mut laws = explicit_laws();
    laws.extend(n2_laws());
    laws.push(fake_law());
    for law in &laws {
        let worst = pts
            .iter()
            .map(|p| validity_check(p, law))
            .collect::<magflow::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!("{:<24} max residual {worst:.2e}", law.name);
    }
    Ok(())
}
