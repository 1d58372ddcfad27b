//! Exact arithmetic helpers over arbitrary-precision rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Solution set `particular + span(directions)` of a linear system.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSolution {
    pub particular: Vec<Q>,
    pub directions: Vec<Vec<Q>>,
}

impl AffineSolution {
    pub fn is_unique(&self) -> bool {
        self.directions.is_empty()
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut [Vec<Q>]) -> Vec<usize> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Solves `a x = b` exactly, returning the full solution set.
pub fn solve_affine(a: &[Vec<Q>], b: &[Q]) -> Result<AffineSolution> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    let n = a.first().map_or(0, |r| r.len());
    let mut aug: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&n) {
        return Err(Error::Inconsistent);
    }
    let mut particular = vec![Q::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = aug[r][n].clone();
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let directions = free
        .iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); n];
            v[f] = Q::one();
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = -aug[r][f].clone();
            }
            v
        })
        .collect();
    Ok(AffineSolution { particular, directions })
}

/// Unique solution of a square integer system by fraction-free (Bareiss)
/// elimination followed by rational back substitution.
pub fn bareiss_solve(a: &[Vec<BigInt>], b: &[BigInt]) -> Result<Vec<Q>> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::DimensionMismatch(n, b.len()));
    }
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(n, a.first().map_or(0, |r| r.len())));
    }
    let mut m: Vec<Vec<BigInt>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return Err(Error::Singular);
        };
        m.swap(k, p);
        for i in k + 1..n {
            for j in k + 1..=n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let mut x = vec![Q::zero(); n];
    for k in (0..n).rev() {
        let mut acc = Q::from_integer(m[k][n].clone());
        for j in k + 1..n {
            acc -= Q::from_integer(m[k][j].clone()) * &x[j];
        }
        x[k] = acc / Q::from_integer(m[k][k].clone());
    }
    Ok(x)
}

/// Smallest positive rational multiple of `v` with coprime integer entries.
/// Returns the integers and the multiplier.
pub fn primitive_integer_vector(v: &[Q]) -> (Vec<BigInt>, Q) {
    let mut den = BigInt::one();
    for x in v {
        den = den.lcm(x.denom());
    }
    let mut g = BigInt::zero();
    for x in v {
        let n = x.numer() * (&den / x.denom());
        g = g.gcd(&n);
    }
    if g.is_zero() {
        return (vec![BigInt::zero(); v.len()], Q::one());
    }
    let g = g.abs();
    let scale = Q::new(den, g);
    let ints = v.iter().map(|x| (x * &scale).to_integer()).collect();
    (ints, scale)
}

/// Best continued-fraction approximant `p/q` of `x` with `q <= cap` that is
/// within `tol * max(1, |x|)` of `x`.
pub fn rationalize(x: f64, cap: u64, tol: f64) -> Option<(i64, u64)> {
    if !x.is_finite() {
        return None;
    }
    let bound = tol * x.abs().max(1.0);
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let a = a as i128;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > cap as i128 {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= bound {
            return Some((h1 as i64, k1 as u64));
        }
        let frac = r - a as f64;
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}
