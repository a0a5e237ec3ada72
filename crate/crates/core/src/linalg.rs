use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

/// Eigenpairs of a real symmetric matrix in a reproducible order.
///
/// Positive eigenvalues come first, then negative ones, then the ones that
/// are zero relative to `tol`. Inside a group pairs are ordered by the index
/// of the eigenvector's largest component, and each eigenvector is signed so
/// its first nonzero component is positive.
pub(crate) struct OrderedEigen {
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector of `values[i]`.
    pub vectors: DMatrix<f64>,
}

pub(crate) fn ordered_symmetric_eigen(m: &DMatrix<f64>, tol: f64) -> OrderedEigen {
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let zero = tol * scale;

    let mut pairs: Vec<(u8, usize, f64, DVector<f64>)> = (0..n)
        .map(|c| {
            let mut v: DVector<f64> = eig.eigenvectors.column(c).into_owned();
            let first = v.iter().position(|x| x.abs() > 1e-12).unwrap_or(0);
            if v[first] < 0.0 {
                v.neg_mut();
            }
            let lead = v.iamax();
            let lambda = eig.eigenvalues[c];
            let group = if lambda > zero {
                0
            } else if lambda < -zero {
                1
            } else {
                2
            };
            let lambda = if group == 2 { 0.0 } else { lambda };
            (group, lead, lambda, v)
        })
        .collect();
    pairs.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(b.2.abs().total_cmp(&a.2.abs()))
    });

    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (c, (_, _, lambda, v)) in pairs.into_iter().enumerate() {
        vectors.set_column(c, &v);
        values.push(lambda);
    }
    OrderedEigen { values, vectors }
}

/// Solves `a x = b` by LU decomposition.
pub(crate) fn lu_solve(a: DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    a.lu().solve(b)
}
