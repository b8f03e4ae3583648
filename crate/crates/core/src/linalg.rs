//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Relative singular-value threshold below which a direction counts as null.
pub const NULL_TOL: f64 = 1e-10;

/// Orthonormal basis (as columns) of the null space of a wide matrix, from
/// the SVD of the matrix padded to square with zero rows.
pub fn kernel_svd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    let mut padded = DMatrix::zeros(cols.max(rows), cols);
    padded.view_mut((0, 0), (rows, cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.max();
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= NULL_TOL * smax.max(1e-300))
        .collect();
    let mut basis = DMatrix::zeros(cols, null.len());
    for (c, &i) in null.iter().enumerate() {
        basis.set_column(c, &vt.row(i).transpose());
    }
    basis
}

/// Null-space basis from a Householder QR of `Mᵀ` padded to square: the
/// trailing columns of the full `Q` are orthogonal to the row space.
/// Assumes `M` has full row rank.
pub fn kernel_qr(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    let mut padded = DMatrix::zeros(cols, cols);
    padded.view_mut((0, 0), (cols, rows)).copy_from(&m.transpose());
    let q = padded.qr().q();
    q.columns(rows, cols - rows).into_owned()
}

/// `‖Kᵀ g‖`: the size of the part of `g` that sees the subspace spanned by
/// the orthonormal columns of `K`. Independent of the choice of basis.
pub fn projection_norm(basis: &DMatrix<f64>, g: &[f64]) -> f64 {
    (0..basis.ncols())
        .map(|c| {
            let d: f64 = basis.column(c).iter().zip(g).map(|(a, b)| a * b).sum();
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

pub fn complex_det(m: &DMatrix<Complex64>) -> Complex64 {
    m.clone().determinant()
}
