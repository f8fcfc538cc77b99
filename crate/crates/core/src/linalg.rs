//! Small complex dense-matrix helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// Scales every nonzero column to unit Euclidean norm.
pub fn normalize_columns(a: &CMatrix) -> CMatrix {
    let mut out = a.clone();
    for mut col in out.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col.unscale_mut(norm);
        }
    }
    out
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Smallest singular value counted over all columns: zero when the matrix is
/// wider than tall. `None` for a matrix without columns.
pub fn min_singular_value(a: &CMatrix) -> Option<f64> {
    if a.ncols() == 0 {
        return None;
    }
    if a.ncols() > a.nrows() {
        return Some(0.0);
    }
    singular_values(a).last().copied()
}

/// Smallest singular value after column normalisation; the rank margin used
/// throughout verification.
pub fn column_rank_margin(a: &CMatrix) -> Option<f64> {
    min_singular_value(&normalize_columns(a))
}

pub fn numeric_rank(a: &CMatrix, tol: f64) -> usize {
    singular_values(a).iter().filter(|&&s| s > tol).count()
}

/// Orthonormal basis for the column space: left singular vectors whose
/// singular value exceeds `tol`.
pub fn orthonormal_basis(a: &CMatrix, tol: f64) -> CMatrix {
    if a.ncols() == 0 {
        return CMatrix::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > tol)
        .map(|(i, _)| i)
        .collect();
    CMatrix::from_fn(a.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

pub fn hstack(blocks: &[CMatrix]) -> CMatrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut offset = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack needs equal row counts");
        out.columns_mut(offset, b.ncols()).copy_from(b);
        offset += b.ncols();
    }
    out
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
