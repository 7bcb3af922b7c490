use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Module, Result};

/// Relative singular-value cutoff for pseudo-inverses.
pub const PINV_RCOND: f64 = 1e-10;

/// Moore-Penrose pseudo-inverse, dropping singular values below
/// `rcond * σ_max`.
pub fn pinv(m: &DMatrix<Complex64>, rcond: f64) -> DMatrix<Complex64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd computed with u");
    let v_t = svd.v_t.as_ref().expect("svd computed with v_t");
    let smax = svd.singular_values.max();
    let cut = rcond * smax;
    let mut out = DMatrix::zeros(c, r);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cut && s > 0.0 {
            // v_k u_k^H / s
            let vk = v_t.row(k).adjoint();
            let uk = u.column(k).adjoint();
            out += vk * uk / Complex64::from(s);
        }
    }
    out
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in
/// descending order; ties keep their original order.
pub fn hermitian_eigen_desc(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Eigenvalues of a general complex square matrix.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    match m.nrows() {
        0 => Ok(Vec::new()),
        1 => Ok(vec![m[(0, 0)]]),
        _ => Schur::try_new(m.clone(), f64::EPSILON, 10_000)
            .and_then(|s| s.eigenvalues())
            .map(|v| v.iter().copied().collect())
            .ok_or_else(|| Error::Numerical {
                module: Module::Estimators,
                reason: "Schur decomposition of the rotation matrix did not converge".into(),
            }),
    }
}
