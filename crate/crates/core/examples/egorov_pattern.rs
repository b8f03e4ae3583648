//! Pavlov–Tsarev pattern of Eqs (10), (11) for degree 2.

use magflow::sampling::{random_points, SampleOptions};
use magflow::semiham::pt_pattern_check;

fn main() -> magflow::Result<()> {
    let pts = random_points(0, 2, 100, &SampleOptions::default())?;
    let rep = pt_pattern_check(&pts, 0)?;
    println!("{rep:#?}");
    Ok(())
}
