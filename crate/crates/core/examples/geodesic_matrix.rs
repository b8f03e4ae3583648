//! The Eq (1) matrix of the geodesic case and its eigenvalue classification.

use magflow::system::geodesic_matrix;

fn main() -> magflow::Result<()> {
    for a in [vec![0.5, 0.3, 1.0], vec![1.0, 0.0, 1.0], vec![0.2, -0.1, 0.4, 0.3, 1.0]] {
        let rep = geodesic_matrix(&a)?;
        println!("a = {a:?}\n{:.4}class {:?}\n", rep.matrix, rep.class);
    }
    Ok(())
}
