//! Ricci operator, moment map and the functional `F` for the canonical
//! inner product on R^n.

use std::collections::{BTreeMap, HashSet};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bracket::{self, Bracket, DiagonalVector, SymOp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RicciData {
    #[serde(serialize_with = "crate::report::ser_matrix")]
    pub ric: SymOp,
    pub scalar_curv: f64,
    #[serde(serialize_with = "crate::report::ser_matrix")]
    pub moment: SymOp,
    pub f_value: f64,
}

/// Ricci operator from 0-based entries.
pub(crate) fn ricci_from_entries(n: usize, entries: &[(usize, usize, usize, f64)]) -> SymOp {
    let mut ric = DMatrix::zeros(n, n);
    // -1/2 sum_{m,k} T[x][m][k] T[y][m][k]: rows of T keyed by (m, k).
    let mut rows: Vec<Vec<((usize, usize), f64)>> = vec![Vec::new(); n];
    for &(i, j, k, c) in entries {
        rows[i].push(((j, k), c));
        rows[j].push(((i, k), -c));
    }
    let mut scratch = vec![0.0; n * n];
    for x in 0..n {
        if rows[x].is_empty() {
            continue;
        }
        for &((m, k), v) in &rows[x] {
            scratch[m * n + k] += v;
        }
        for y in x..n {
            let s: f64 = rows[y].iter().map(|&((m, k), v)| v * scratch[m * n + k]).sum();
            ric[(x, y)] -= 0.5 * s;
            if y != x {
                ric[(y, x)] -= 0.5 * s;
            }
        }
        for &((m, k), _) in &rows[x] {
            scratch[m * n + k] = 0.0;
        }
    }
    // +1/2 sum_{i<j} mu_ij^x mu_ij^y.
    let mut by_pair: BTreeMap<(usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
    for &(i, j, k, c) in entries {
        by_pair.entry((i, j)).or_default().push((k, c));
    }
    for outs in by_pair.values() {
        for &(x, a) in outs {
            for &(y, b) in outs {
                ric[(x, y)] += 0.5 * a * b;
            }
        }
    }
    ric
}

/// The Ricci operator alone; the zero bracket gives the zero operator.
pub fn ricci_operator(b: &Bracket) -> SymOp {
    ricci_from_entries(b.dim(), &b.entries0())
}

pub fn ricci(b: &Bracket) -> Result<RicciData> {
    if b.is_empty() {
        return Err(Error::ZeroBracket);
    }
    let ric = ricci_operator(b);
    let ns = b.norm_sq();
    let moment = &ric * (4.0 / ns);
    let f_value = 16.0 * (&ric * &ric).trace() / (ns * ns);
    Ok(RicciData { scalar_curv: ric.trace(), moment, f_value, ric })
}

/// `F(mu) = 16 tr(Ric^2) / ||mu||^4`.
pub fn f_value(b: &Bracket) -> Result<f64> {
    Ok(ricci(b)?.f_value)
}

/// Accumulates `pi(alpha) mu` into a dense array indexed `(a * n + b) * n + m`.
/// Only ordered pairs with `a < b` are written.
pub(crate) fn pi_accumulate(n: usize, entries: &[(usize, usize, usize, f64)], alpha: &DMatrix<f64>, out: &mut [f64]) {
    let mut add = |a: usize, b: usize, m: usize, v: f64| {
        if a < b {
            out[(a * n + b) * n + m] += v;
        }
    };
    for &(i, j, k, c) in entries {
        for m in 0..n {
            let v = alpha[(m, k)] * c;
            if v != 0.0 {
                add(i, j, m, v);
            }
        }
        for a in 0..n {
            // -mu(alpha e_a, e_b) and -mu(e_a, alpha e_b).
            let ai = alpha[(i, a)];
            if ai != 0.0 {
                add(a, j, k, -ai * c);
                add(j, a, k, ai * c);
            }
            let aj = alpha[(j, a)];
            if aj != 0.0 {
                add(a, i, k, aj * c);
                add(i, a, k, -aj * c);
            }
        }
    }
}

/// `pi(alpha) mu = alpha mu(., .) - mu(alpha ., .) - mu(., alpha .)`.
pub fn pi_action(alpha: &DMatrix<f64>, b: &Bracket) -> Result<Bracket> {
    let n = b.dim();
    if alpha.nrows() != n || alpha.ncols() != n {
        return Err(Error::DimensionMismatch(alpha.nrows(), n));
    }
    let mut out = vec![0.0; n * n * n];
    pi_accumulate(n, &b.entries0(), alpha, &mut out);
    Ok(Bracket::from_dense(n, &out, 0.0))
}

/// `(2 / ||mu||^2) sum c^2 alpha`, the diagonal part of the moment map.
pub fn diagonal_moment_projection(b: &Bracket) -> Result<DiagonalVector> {
    if b.is_empty() {
        return Err(Error::ZeroBracket);
    }
    let n = b.dim();
    let mut p = DVector::zeros(n);
    for (key, c) in b.entries() {
        for (x, w) in key.weight(n).into_iter().enumerate() {
            p[x] += c * c * w as f64;
        }
    }
    Ok(p * (2.0 / b.norm_sq()))
}

/// Structural test guaranteeing a diagonal Ricci operator: each pair
/// `(i, j)` has at most one output, and two entries with the same output
/// have equal or disjoint index pairs.
pub fn ricci_diagonal_sufficient(b: &Bracket) -> bool {
    let mut pairs = HashSet::new();
    let mut by_output: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for key in b.keys() {
        if !pairs.insert((key.i, key.j)) {
            return false;
        }
        by_output.entry(key.k).or_default().push((key.i, key.j));
    }
    by_output.values().all(|ps| {
        ps.iter().enumerate().all(|(x, p)| {
            ps[x + 1..].iter().all(|q| p == q || (p.0 != q.0 && p.0 != q.1 && p.1 != q.0 && p.1 != q.1))
        })
    })
}

/// For a 2-step nilpotent bracket: true iff every Ricci eigenvalue is
/// nonzero, which happens exactly when the center equals the derived
/// algebra.
pub fn two_step_center_check(b: &Bracket, tol: f64) -> Result<bool> {
    let v = bracket::validate(b, tol);
    if !v.jacobi_ok || v.step != Some(2) {
        return Err(Error::NotTwoStep);
    }
    let ric = ricci_operator(b);
    let eig = ric.symmetric_eigen().eigenvalues;
    let scale = eig.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(eig.iter().all(|x| x.abs() > tol * scale))
}
