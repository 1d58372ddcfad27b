//! Sparse skew-symmetric brackets on R^n and their basic invariants.
//!
//! Indices are 1-based at the public surface: the key `(i, j, k)` with
//! `i < j` stores the coefficient of `e_k` in `[e_i, e_j]`. Internally all
//! dense arrays are 0-based.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RANK_TOL};

/// Symmetric operator on R^n.
pub type SymOp = DMatrix<f64>;

/// Element of the diagonal subalgebra, stored as its diagonal.
pub type DiagonalVector = DVector<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Key {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl Key {
    pub fn new(i: usize, j: usize, k: usize) -> Self {
        Key { i, j, k }
    }

    /// Integer weight `E_kk - E_ii - E_jj` as a length-`n` vector.
    pub fn weight(&self, n: usize) -> Vec<i64> {
        let mut w = vec![0i64; n];
        w[self.k - 1] += 1;
        w[self.i - 1] -= 1;
        w[self.j - 1] -= 1;
        w
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.i, self.j, self.k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bracket {
    dim: usize,
    coeffs: BTreeMap<Key, f64>,
}

impl Bracket {
    pub fn zero(dim: usize) -> Self {
        Bracket { dim, coeffs: BTreeMap::new() }
    }

    /// Builds a bracket from 1-based `(i, j, k, c)` entries. A key with
    /// `i > j` is stored as `(j, i, k)` with the sign flipped. Zero
    /// coefficients are dropped.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, usize, f64)>,
    {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut b = Bracket::zero(dim);
        for (i, j, k, c) in entries {
            let key = b.check_key(i, j, k)?;
            if !c.is_finite() {
                return Err(Error::NonFinite { i, j, k });
            }
            let c = if i > j { -c } else { c };
            if b.coeffs.contains_key(&key) {
                return Err(Error::DuplicateKey { i: key.i, j: key.j, k: key.k });
            }
            if c != 0.0 {
                b.coeffs.insert(key, c);
            }
        }
        Ok(b)
    }

    fn check_key(&self, i: usize, j: usize, k: usize) -> Result<Key> {
        let n = self.dim;
        if i == 0 || j == 0 || k == 0 || i > n || j > n || k > n {
            return Err(Error::IndexOutOfRange { i, j, k, dim: n });
        }
        if i == j {
            return Err(Error::DiagonalKey { i, j, k });
        }
        Ok(if i < j { Key::new(i, j, k) } else { Key::new(j, i, k) })
    }

    /// Sets the coefficient of `e_k` in `[e_i, e_j]`, replacing any previous
    /// value.
    pub fn set(&mut self, i: usize, j: usize, k: usize, c: f64) -> Result<()> {
        let key = self.check_key(i, j, k)?;
        if !c.is_finite() {
            return Err(Error::NonFinite { i, j, k });
        }
        let c = if i > j { -c } else { c };
        if c == 0.0 {
            self.coeffs.remove(&key);
        } else {
            self.coeffs.insert(key, c);
        }
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.coeffs.get(&Key::new(i, j, k)).copied().unwrap_or(0.0),
            std::cmp::Ordering::Greater => -self.get(j, i, k),
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Key, f64)> + '_ {
        self.coeffs.iter().map(|(k, c)| (*k, *c))
    }

    pub fn keys(&self) -> impl Iterator<Item = Key> + '_ {
        self.coeffs.keys().copied()
    }

    pub(crate) fn entries0(&self) -> Vec<(usize, usize, usize, f64)> {
        self.coeffs.iter().map(|(k, c)| (k.i - 1, k.j - 1, k.k - 1, *c)).collect()
    }

    /// `||mu||^2`, summing over ordered pairs.
    pub fn norm_sq(&self) -> f64 {
        2.0 * self.coeffs.values().map(|c| c * c).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scaled(&self, s: f64) -> Bracket {
        let mut out = Bracket::zero(self.dim);
        if s != 0.0 {
            out.coeffs = self.coeffs.iter().map(|(k, c)| (*k, c * s)).collect();
        }
        out
    }

    /// `self + s * other`, treating both as vectors in the ambient space.
    pub fn add_scaled(&self, other: &Bracket, s: f64) -> Result<Bracket> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            let v = out.coeffs.get(k).copied().unwrap_or(0.0) + s * c;
            if v == 0.0 {
                out.coeffs.remove(k);
            } else {
                out.coeffs.insert(*k, v);
            }
        }
        Ok(out)
    }

    /// Drops coefficients with `|c| <= tol`.
    pub fn pruned(&self, tol: f64) -> Bracket {
        Bracket {
            dim: self.dim,
            coeffs: self.coeffs.iter().filter(|(_, c)| c.abs() > tol).map(|(k, c)| (*k, *c)).collect(),
        }
    }

    /// `[x, y]` for arbitrary vectors.
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        for (key, c) in &self.coeffs {
            let (i, j) = (key.i - 1, key.j - 1);
            out[key.k - 1] += c * (x[i] * y[j] - x[j] * y[i]);
        }
        out
    }

    /// Dense antisymmetric array `T[a][b][k]` at `(a * n + b) * n + k`.
    pub(crate) fn dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut t = vec![0.0; n * n * n];
        for (i, j, k, c) in self.entries0() {
            t[(i * n + j) * n + k] = c;
            t[(j * n + i) * n + k] = -c;
        }
        t
    }

    pub(crate) fn from_dense(n: usize, t: &[f64], drop_tol: f64) -> Bracket {
        let mut b = Bracket::zero(n);
        for a in 0..n {
            for c in a + 1..n {
                for k in 0..n {
                    let v = t[(a * n + c) * n + k];
                    if v.abs() > drop_tol {
                        b.coeffs.insert(Key::new(a + 1, c + 1, k + 1), v);
                    }
                }
            }
        }
        b
    }
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dim {}:", self.dim)?;
        for (k, c) in &self.coeffs {
            write!(f, " {k}={c}")?;
        }
        Ok(())
    }
}

/// `<mu, lambda>`, summing over ordered pairs.
pub fn inner(a: &Bracket, b: &Bracket) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch(a.dim, b.dim));
    }
    Ok(2.0 * a.coeffs.iter().map(|(k, c)| c * b.coeffs.get(k).copied().unwrap_or(0.0)).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Largest Jacobiator norm over basis triples.
    pub jacobi_defect: f64,
    pub jacobi_ok: bool,
    pub nilpotent: bool,
    pub step: Option<usize>,
    pub central_series: Vec<usize>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.jacobi_ok && self.nilpotent
    }
}

/// Checks the Jacobi identity and nilpotency. The Jacobi identity passes
/// when the largest Jacobiator is at most `tol * ||mu||^2`.
pub fn validate(b: &Bracket, tol: f64) -> ValidationReport {
    let jacobi_defect = jacobi_defect(b);
    let jacobi_ok = jacobi_defect <= tol * b.norm_sq();
    let series = central_series(b);
    let nilpotent = series.last() == Some(&0);
    ValidationReport {
        jacobi_defect,
        jacobi_ok,
        nilpotent,
        step: nilpotent.then(|| series.len() - 1),
        central_series: series,
    }
}

fn jacobi_defect(b: &Bracket) -> f64 {
    let n = b.dim;
    let t = b.dense();
    let at = |a: usize, c: usize, k: usize| t[(a * n + c) * n + k];
    let mut worst = 0.0f64;
    let mut jac = vec![0.0; n];
    for a in 0..n {
        for c in a + 1..n {
            for d in c + 1..n {
                jac.iter_mut().for_each(|x| *x = 0.0);
                for k in 0..n {
                    let (x, y, z) = (at(a, c, k), at(c, d, k), at(d, a, k));
                    if x == 0.0 && y == 0.0 && z == 0.0 {
                        continue;
                    }
                    for (m, jm) in jac.iter_mut().enumerate() {
                        *jm += x * at(k, d, m) + y * at(k, a, m) + z * at(k, c, m);
                    }
                }
                worst = worst.max(jac.iter().map(|v| v * v).sum::<f64>().sqrt());
            }
        }
    }
    worst
}

/// Dimensions of the descending central series `C^0 = R^n`,
/// `C^{k+1} = [R^n, C^k]`. Ends with 0 when nilpotent, otherwise with the
/// dimension at which the series stabilizes.
pub fn central_series(b: &Bracket) -> Vec<usize> {
    let n = b.dim;
    let t = b.dense();
    let scale = b.max_abs();
    let mut basis = DMatrix::<f64>::identity(n, n);
    let mut dims = vec![n];
    loop {
        let d = basis.ncols();
        let mut span = DMatrix::zeros(n, n * d);
        for a in 0..n {
            for col in 0..d {
                for m in 0..n {
                    let mut s = 0.0;
                    for c in 0..n {
                        s += basis[(c, col)] * t[(a * n + c) * n + m];
                    }
                    span[(m, a * d + col)] = s;
                }
            }
        }
        let next = linalg::range_basis(&span, RANK_TOL, scale);
        let nd = next.ncols();
        if nd == 0 {
            dims.push(0);
            return dims;
        }
        if nd == d {
            return dims;
        }
        dims.push(nd);
        basis = next;
    }
}

/// Orthonormal basis of the center, as columns.
pub fn center(b: &Bracket) -> DMatrix<f64> {
    let n = b.dim;
    let t = b.dense();
    let mut m = DMatrix::zeros(n * n, n);
    for c in 0..n {
        for a in 0..n {
            for k in 0..n {
                m[(a * n + k, c)] = t[(c * n + a) * n + k];
            }
        }
    }
    if b.is_empty() {
        return DMatrix::identity(n, n);
    }
    linalg::nullspace(&m, RANK_TOL)
}

/// Orthonormal basis of the derived algebra `[R^n, R^n]`, as columns.
pub fn derived(b: &Bracket) -> DMatrix<f64> {
    let n = b.dim;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |c| (a, c))).collect();
    let mut m = DMatrix::zeros(n, pairs.len());
    for (k, c) in b.coeffs.iter() {
        let col = pairs.iter().position(|&p| p == (k.i - 1, k.j - 1)).expect("valid key");
        m[(k.k - 1, col)] = *c;
    }
    linalg::range_basis(&m, RANK_TOL, b.max_abs())
}

/// `g . mu (X, Y) = g mu(g^{-1} X, g^{-1} Y)`. Output coefficients below
/// `1e-14` times the largest one are treated as roundoff and dropped.
pub fn act(g: &DMatrix<f64>, b: &Bracket) -> Result<Bracket> {
    let n = b.dim;
    if g.nrows() != n || g.ncols() != n {
        return Err(Error::DimensionMismatch(g.nrows(), n));
    }
    let h = g.clone().try_inverse().ok_or(Error::Singular)?;
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::Singular);
    }
    let t = b.dense();
    let idx = |a: usize, c: usize, k: usize| (a * n + c) * n + k;
    // Output index first, then each input slot.
    let mut t1 = vec![0.0; n * n * n];
    for a in 0..n {
        for c in 0..n {
            for k in 0..n {
                let v = t[idx(a, c, k)];
                if v != 0.0 {
                    for m in 0..n {
                        t1[idx(a, c, m)] += g[(m, k)] * v;
                    }
                }
            }
        }
    }
    let mut t2 = vec![0.0; n * n * n];
    for c in 0..n {
        for d in 0..n {
            for m in 0..n {
                let v = t1[idx(c, d, m)];
                if v != 0.0 {
                    for a in 0..n {
                        t2[idx(a, d, m)] += h[(c, a)] * v;
                    }
                }
            }
        }
    }
    let mut t3 = vec![0.0; n * n * n];
    for a in 0..n {
        for d in 0..n {
            for m in 0..n {
                let v = t2[idx(a, d, m)];
                if v != 0.0 {
                    for c in 0..n {
                        t3[idx(a, c, m)] += h[(d, c)] * v;
                    }
                }
            }
        }
    }
    let big = t3.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(Bracket::from_dense(n, &t3, 1e-14 * big))
}

/// Action of `diag(d)`: each coefficient is scaled by `d_k / (d_i d_j)`.
pub fn act_diagonal(d: &[f64], b: &Bracket) -> Result<Bracket> {
    if d.len() != b.dim {
        return Err(Error::DimensionMismatch(d.len(), b.dim));
    }
    if let Some(p) = d.iter().position(|x| *x == 0.0 || !x.is_finite()) {
        return Err(Error::ZeroScale(p + 1));
    }
    let mut out = Bracket::zero(b.dim);
    for (key, c) in &b.coeffs {
        let v = c * d[key.k - 1] / (d[key.i - 1] * d[key.j - 1]);
        out.coeffs.insert(*key, v);
    }
    Ok(out)
}

/// Distinct weights of the support, in order of first appearance along the
/// lexicographically sorted keys. Keys sharing a weight are merged and their
/// squared coefficients summed.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSupport {
    pub dim: usize,
    pub weights: Vec<Vec<i64>>,
    pub keys: Vec<Vec<Key>>,
    pub squares: Vec<f64>,
}

impl WeightSupport {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight_vector(&self, idx: usize) -> DiagonalVector {
        DVector::from_iterator(self.dim, self.weights[idx].iter().map(|&x| x as f64))
    }

    /// Builds a support from keys in a caller-chosen order, with unit squares.
    pub fn from_keys(dim: usize, keys: &[Key]) -> Self {
        let mut s = WeightSupport { dim, weights: Vec::new(), keys: Vec::new(), squares: Vec::new() };
        for key in keys {
            s.push(*key, 1.0);
        }
        s
    }

    fn push(&mut self, key: Key, square: f64) {
        let w = key.weight(self.dim);
        match self.weights.iter().position(|x| *x == w) {
            Some(p) => {
                self.keys[p].push(key);
                self.squares[p] += square;
            }
            None => {
                self.weights.push(w);
                self.keys.push(vec![key]);
                self.squares.push(square);
            }
        }
    }
}

pub fn weight_support(b: &Bracket) -> WeightSupport {
    let mut s = WeightSupport { dim: b.dim, weights: Vec::new(), keys: Vec::new(), squares: Vec::new() };
    for (key, c) in &b.coeffs {
        s.push(*key, c * c);
    }
    s
}
