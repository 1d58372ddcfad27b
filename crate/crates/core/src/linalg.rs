//! Floating-point rank decisions. Everything goes through a singular value
//! decomposition with a relative cutoff.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value cutoff used for every rank decision.
pub const RANK_TOL: f64 = 1e-10;

struct Decomposition {
    sigma: Vec<f64>,
    u: DMatrix<f64>,
    v_t: DMatrix<f64>,
}

/// Thin SVD of a matrix with at least as many rows as columns.
fn decompose_tall(a: &DMatrix<f64>) -> Decomposition {
    debug_assert!(a.nrows() >= a.ncols());
    let svd = a.clone().svd(true, true);
    Decomposition {
        sigma: svd.singular_values.iter().copied().collect(),
        u: svd.u.expect("requested"),
        v_t: svd.v_t.expect("requested"),
    }
}

fn cutoff(sigma: &[f64], rel_tol: f64, scale: f64) -> f64 {
    let smax = sigma.iter().fold(0.0f64, |m, s| m.max(*s));
    rel_tol * smax.max(scale)
}

/// Orthonormal basis (as columns) of the kernel of `a`.
pub fn nullspace(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (m, n) = a.shape();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m == 0 {
        return DMatrix::identity(n, n);
    }
    if m >= n {
        let d = decompose_tall(a);
        let cut = cutoff(&d.sigma, rel_tol, 0.0);
        let cols: Vec<DVector<f64>> =
            (0..n).filter(|&r| d.sigma[r] <= cut).map(|r| d.v_t.row(r).transpose()).collect();
        return columns(n, &cols);
    }
    // Wide: complement of the row space through the projector onto it.
    let rows = range_basis(&a.transpose(), rel_tol, 0.0);
    let proj = DMatrix::identity(n, n) - &rows * rows.transpose();
    let eig = proj.symmetric_eigen();
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| eig.eigenvalues[i] > 0.5)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    columns(n, &cols)
}

/// Orthonormal basis (as columns) of the column space of `a`. Singular
/// values below `rel_tol * max(sigma_max, scale)` count as zero; `scale`
/// gives an absolute floor when the whole matrix is roundoff.
pub fn range_basis(a: &DMatrix<f64>, rel_tol: f64, scale: f64) -> DMatrix<f64> {
    let (m, n) = a.shape();
    if n == 0 || m == 0 {
        return DMatrix::zeros(m, 0);
    }
    let cols: Vec<DVector<f64>> = if m >= n {
        let d = decompose_tall(a);
        let cut = cutoff(&d.sigma, rel_tol, scale);
        (0..n).filter(|&r| d.sigma[r] > cut).map(|r| d.u.column(r).into_owned()).collect()
    } else {
        let d = decompose_tall(&a.transpose());
        let cut = cutoff(&d.sigma, rel_tol, scale);
        (0..m).filter(|&r| d.sigma[r] > cut).map(|r| d.v_t.row(r).transpose()).collect()
    };
    columns(m, &cols)
}

pub fn rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let d = if a.nrows() >= a.ncols() { decompose_tall(a) } else { decompose_tall(&a.transpose()) };
    let cut = cutoff(&d.sigma, rel_tol, 0.0);
    d.sigma.iter().filter(|s| **s > cut).count()
}

pub fn columns(rows: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows, cols.len());
    for (c, v) in cols.iter().enumerate() {
        out.set_column(c, v);
    }
    out
}
