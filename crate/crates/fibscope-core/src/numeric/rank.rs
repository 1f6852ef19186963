//! Numerical rank of small dense matrices via singular values.

use nalgebra::{Complex, DMatrix};

/// Number of singular values above `tol * sigma_max`.
///
/// The zero matrix (and any matrix with `sigma_max = 0`) has rank 0.
pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    if smax <= 0.0 || !smax.is_finite() {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > tol * smax).count()
}

/// Numerical rank after scaling every nonzero row to unit norm.
///
/// Removes the dependence on row magnitudes, so presentations that
/// differ only by nonzero row rescalings get identical ranks.
pub fn numerical_rank_row_normalized(m: &DMatrix<f64>, tol: f64) -> usize {
    let mut a = m.clone();
    for r in 0..a.nrows() {
        let norm = a.row(r).norm();
        if norm > 0.0 {
            for c in 0..a.ncols() {
                a[(r, c)] /= norm;
            }
        }
    }
    numerical_rank(&a, tol)
}

/// Rank of a complex matrix, computed on the realified `2r x 2c` matrix
/// (every complex singular value appears twice there).
pub fn complex_rank(m: &DMatrix<Complex<f64>>, tol: f64) -> usize {
    numerical_rank(&realify_matrix(m), tol) / 2
}

/// Smallest singular value of a complex matrix (0 for empty input).
pub fn complex_sigma_min(m: &DMatrix<Complex<f64>>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let svd = realify_matrix(m).svd(false, false);
    svd.singular_values.min()
}

/// Real representation of a complex matrix: each entry `a+bi` becomes
/// the 2x2 block `[[a, -b], [b, a]]`.
pub fn realify_matrix(m: &DMatrix<Complex<f64>>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    DMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let e = m[(i / 2, j / 2)];
        match (i % 2, j % 2) {
            (0, 0) | (1, 1) => e.re,
            (0, 1) => -e.im,
            _ => e.im,
        }
    })
}
