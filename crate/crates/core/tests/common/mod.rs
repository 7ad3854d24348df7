//! Shared helpers for the integration tests: seeded RNGs, random instances and
//! textbook-form oracles built independently of the library's Kronecker helpers.

#![allow(dead_code)]

use gobsim::linalg::{self, CMat};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random Hermitian PSD matrix of full rank (almost surely).
pub fn random_psd(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = linalg::complex_gaussian_matrix(n, n, rng);
    &g * g.adjoint()
}

/// Random PSD matrix of the given rank.
pub fn random_psd_rank(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = linalg::complex_gaussian_matrix(n, rank, rng);
    &g * g.adjoint()
}

/// Column-major vec without going through the library.
pub fn vec_cols(m: &CMat) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(m.nrows() * m.ncols(), 1);
    let mut i = 0;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            out[(i, 0)] = m[(r, c)];
            i += 1;
        }
    }
    out
}

/// Matrix of a linear map `X (rows x cols) -> f(X)`, built by applying it to
/// each elementary matrix in column-major order.
pub fn operator_of(rows: usize, cols: usize, f: impl Fn(&CMat) -> CMat) -> CMat {
    let mut columns = Vec::with_capacity(rows * cols);
    for c in 0..cols {
        for r in 0..rows {
            let mut e = CMat::zeros(rows, cols);
            e[(r, c)] = Complex64::new(1.0, 0.0);
            columns.push(vec_cols(&f(&e)));
        }
    }
    let n_out = columns[0].nrows();
    CMat::from_fn(n_out, columns.len(), |i, j| columns[j][(i, 0)])
}

/// Textbook Bayesian linear-model MMSE for `y = Phi x + n`, `x ~ CN(0, Cx)`,
/// `n ~ CN(0, Cn)`: returns `(estimate, error covariance)`. Uses a plain LU
/// inverse rather than the library's Cholesky helpers.
pub fn textbook_mmse(y: &CMat, phi: &CMat, cx: &CMat, cn: &CMat) -> (CMat, CMat) {
    let cy = phi * cx * phi.adjoint() + cn;
    let cy_inv = cy.clone().try_inverse().expect("invertible measurement covariance");
    let gain = cx * phi.adjoint() * cy_inv;
    let est = &gain * y;
    let err = cx - &gain * phi * cx;
    (est, err)
}

/// Forward and noise operators of the training model for one UE, built by
/// probing `Y = rho Hbar S + W^H N` with elementary inputs.
pub fn training_operators(s: &CMat, w: &CMat, rho: f64) -> (CMat, CMat) {
    let m_ue = w.ncols();
    let (m_bs, _tau) = s.shape();
    let n_ue = w.nrows();
    let phi = operator_of(m_ue, m_bs, |h| (h * s).scale(rho));
    let gamma = operator_of(n_ue, s.ncols(), |n| w.adjoint() * n);
    (phi, gamma)
}

/// Sample covariance `(1/n) sum x x^H` of column samples.
pub fn sample_covariance(samples: &[DMatrix<Complex64>]) -> CMat {
    let d = samples[0].nrows();
    let mut acc = CMat::zeros(d, d);
    for x in samples {
        acc += x * x.adjoint();
    }
    acc.scale(1.0 / samples.len() as f64)
}

pub fn rel_fro(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm()
}
