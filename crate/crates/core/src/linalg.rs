//! Small complex linear-algebra helpers shared by the simulator modules.
//!
//! Matrices are `nalgebra` dense matrices over `Complex<f64>`. `vec(.)` is
//! column-major stacking, which matches nalgebra's storage order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Column-major vectorization.
pub fn vec_of(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_of`].
pub fn unvec(v: &CVec, rows: usize, cols: usize) -> CMat {
    assert_eq!(v.len(), rows * cols, "unvec: length mismatch");
    CMat::from_column_slice(rows, cols, v.as_slice())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative Frobenius distance `||a - b|| / max(||b||, tiny)`.
pub fn rel_diff(a: &CMat, b: &CMat) -> f64 {
    let den = frobenius(b).max(f64::MIN_POSITIVE);
    frobenius(&(a - b)) / den
}

/// `||m - m^H||_F / ||m||_F`, zero for the zero matrix.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let n = frobenius(m);
    if n == 0.0 {
        return 0.0;
    }
    frobenius(&(m - m.adjoint())) / n
}

/// Real part of the trace.
pub fn trace_re(m: &CMat) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// `Re Tr(a b)` without forming the product. Both must be square and of equal side.
pub fn trace_product_re(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// `(m + m^H) / 2`.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Singular value decomposition with singular values sorted in descending order.
///
/// Returns `(u, s, v)` with `m = u * diag(s) * v^H`, `u` of shape `m x r`,
/// `v` of shape `n x r`, `r = min(m, n)`.
pub fn svd_sorted(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let (rows, cols) = m.shape();
    let r = rows.min(cols);
    if r == 0 {
        return (CMat::zeros(rows, 0), Vec::new(), CMat::zeros(cols, 0));
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_s = CMat::from_fn(rows, r, |i, c| u[(i, order[c])]);
    let v_s = CMat::from_fn(cols, r, |i, c| v_t[(order[c], i)].conj());
    (u_s, s, v_s)
}

/// Full right singular basis of `m` (`n x n`), columns ordered by descending
/// singular value; the trailing columns span the null space. Also returns the
/// singular values (length `min(rows, n)`).
pub fn right_singular_basis(m: &CMat) -> (Vec<f64>, CMat) {
    let (rows, cols) = m.shape();
    if rows >= cols {
        let (_, s, v) = svd_sorted(m);
        return (s, v);
    }
    // Pad with zero rows so the decomposition yields a complete basis.
    let mut padded = CMat::zeros(cols, cols);
    padded.view_mut((0, 0), (rows, cols)).copy_from(m);
    let (_, mut s, v) = svd_sorted(&padded);
    s.truncate(rows);
    (s, v)
}

/// Numerical rank: count of singular values above `rel_tol * s_max`.
pub fn rank_of(s: &[f64], rel_tol: f64) -> usize {
    let smax = s.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * smax).count()
}

/// Inverse of a Hermitian positive definite matrix via Cholesky.
pub fn hpd_inverse(m: &CMat) -> Result<CMat> {
    hermitize(m)
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::numerical("matrix is not Hermitian positive definite"))
}

/// Solve `m x = b` for Hermitian positive definite `m`.
pub fn hpd_solve(m: &CMat, b: &CMat) -> Result<CMat> {
    hermitize(m)
        .cholesky()
        .map(|c| c.solve(b))
        .ok_or_else(|| Error::numerical("matrix is not Hermitian positive definite"))
}

/// `log2 det(m)` for Hermitian positive definite `m`.
pub fn hpd_log2_det(m: &CMat) -> Result<f64> {
    let c = hermitize(m)
        .cholesky()
        .ok_or_else(|| Error::numerical("log-det of a non positive definite matrix"))?;
    let l = c.l();
    Ok(2.0 * l.diagonal().iter().map(|z| z.re.log2()).sum::<f64>())
}

/// One CN(0, 1) sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. CN(0, 1) entries, filled column by column.
pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        data.push(complex_gaussian(rng));
    }
    CMat::from_vec(rows, cols, data)
}

/// Sub-matrix of `m` with the given rows and columns, in the given order.
pub fn select(m: &CMat, rows: &[usize], cols: &[usize]) -> CMat {
    CMat::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Columns of `m` with the given indices, in order.
pub fn select_columns(m: &CMat, cols: &[usize]) -> CMat {
    CMat::from_fn(m.nrows(), cols.len(), |i, j| m[(i, cols[j])])
}

/// Stack matrices vertically. All inputs must share the column count.
pub fn vstack(blocks: &[&CMat]) -> CMat {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut r0 = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack: column mismatch");
        out.view_mut((r0, 0), (b.nrows(), cols)).copy_from(*b);
        r0 += b.nrows();
    }
    out
}
