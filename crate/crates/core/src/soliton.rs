//! Einstein test for the rank-one solvable extension, the distinguished
//! derivation `D`, eigenvalue types and the linear (Gram-matrix) test on
//! weight supports.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::bracket::{self, inner, Bracket, SymOp, WeightSupport};
use crate::curvature::{self, pi_accumulate};
use crate::error::{Error, Result};
use crate::linalg::{self, RANK_TOL};
use crate::rational::{self, Q};

/// Eigenvalues closer than this (relative to the largest) are merged.
pub const CLUSTER_TOL: f64 = 1e-7;
/// Denominator cap for rationalizing eigenvalue ratios.
pub const DENOMINATOR_CAP: u64 = 1_000_000;

/// Matrix whose column `c` is `pi(E_c) mu` over the ambient coordinates,
/// with identically zero rows removed.
fn derivation_system(b: &Bracket, unknowns: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n = b.dim();
    let entries = b.entries0();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(unknowns.len());
    let mut buf = vec![0.0; n * n * n];
    for e in unknowns {
        buf.iter_mut().for_each(|x| *x = 0.0);
        pi_accumulate(n, &entries, e, &mut buf);
        cols.push(buf.clone());
    }
    let live: Vec<usize> = (0..n * n * n).filter(|&r| cols.iter().any(|c| c[r] != 0.0)).collect();
    DMatrix::from_fn(live.len(), unknowns.len(), |r, c| cols[c][live[r]])
}

fn combine(basis: &[DMatrix<f64>], coeffs: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    (0..coeffs.ncols())
        .map(|c| {
            let mut m = DMatrix::zeros(basis[0].nrows(), basis[0].ncols());
            for (r, e) in basis.iter().enumerate() {
                m += e * coeffs[(r, c)];
            }
            m
        })
        .collect()
}

/// Orthonormal basis (under `tr(a b^t)`) of the derivation algebra.
pub fn derivation_space(b: &Bracket) -> Vec<DMatrix<f64>> {
    let n = b.dim();
    let units: Vec<DMatrix<f64>> = (0..n * n)
        .map(|r| {
            let mut m = DMatrix::zeros(n, n);
            m[(r / n, r % n)] = 1.0;
            m
        })
        .collect();
    let sys = derivation_system(b, &units);
    combine(&units, &linalg::nullspace(&sys, RANK_TOL))
}

/// Orthonormal basis of the symmetric derivations.
pub fn symmetric_derivation_space(b: &Bracket) -> Vec<SymOp> {
    let n = b.dim();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut units = Vec::new();
    for p in 0..n {
        for q in p..n {
            let mut m = DMatrix::zeros(n, n);
            if p == q {
                m[(p, p)] = 1.0;
            } else {
                m[(p, q)] = h;
                m[(q, p)] = h;
            }
            units.push(m);
        }
    }
    let sys = derivation_system(b, &units);
    combine(&units, &linalg::nullspace(&sys, RANK_TOL))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonDerivation {
    pub d_mu: SymOp,
    pub c_mu: f64,
    /// Set when the identity has no component along the symmetric
    /// derivations, in which case `d_mu` is zero.
    pub degenerate: bool,
}

/// `c = tr(Ric^2) / tr(Ric)` and `D = sqrt(-c tr P) P / tr P`, where `P` is
/// the projection of the identity onto the symmetric derivations.
pub fn soliton_derivation(b: &Bracket) -> Result<SolitonDerivation> {
    if b.is_empty() {
        return Err(Error::ZeroBracket);
    }
    let n = b.dim();
    let ric = curvature::ricci_operator(b);
    let c_mu = (&ric * &ric).trace() / ric.trace();
    let ident = DMatrix::<f64>::identity(n, n);
    let mut p = DMatrix::zeros(n, n);
    for e in symmetric_derivation_space(b) {
        p += &e * ident.dot(&e);
    }
    let tr = p.trace();
    if tr <= 1e-12 * n as f64 {
        return Ok(SolitonDerivation { d_mu: DMatrix::zeros(n, n), c_mu, degenerate: true });
    }
    let d_mu = &p * ((-c_mu * tr).sqrt() / tr);
    Ok(SolitonDerivation { d_mu, c_mu, degenerate: false })
}

/// Coprime positive integer eigenvalues with multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EigenvalueType {
    pub values: Vec<u64>,
    pub multiplicities: Vec<usize>,
}

impl fmt::Display for EigenvalueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vals: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        let mult: Vec<String> = self.multiplicities.iter().map(|v| v.to_string()).collect();
        write!(f, "({}; {})", vals.join("<"), mult.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TypeStatus {
    Found(EigenvalueType),
    NotEinstein,
    /// `D` is zero or has a nonpositive eigenvalue.
    Degenerate,
    NotRationalizable { ratios: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolitonReport {
    pub is_einstein: bool,
    pub c_mu: f64,
    #[serde(serialize_with = "crate::report::ser_matrix")]
    pub d_mu: SymOp,
    pub degenerate_derivation: bool,
    pub eigenvalue_type: TypeStatus,
    /// `||Ric - c I - tr(D) D|| / ||mu||^2`.
    pub residual: f64,
    /// `||pi(Ric - c I) mu|| / ||mu||^3`, the quantity the test thresholds.
    pub derivation_defect: f64,
}

impl SolitonReport {
    pub fn eigenvalue_type(&self) -> Option<&EigenvalueType> {
        match &self.eigenvalue_type {
            TypeStatus::Found(t) => Some(t),
            _ => None,
        }
    }
}

/// Declares `b` a nilsoliton when `Ric - c I` is a derivation, i.e. when
/// `||pi(Ric - c I) mu|| <= tol ||mu||^3`.
pub fn is_einstein(b: &Bracket, tol: f64) -> Result<SolitonReport> {
    if b.is_empty() {
        return Err(Error::ZeroBracket);
    }
    let v = bracket::validate(b, tol.max(1e-12));
    if !v.jacobi_ok {
        return Err(Error::InvalidBracket(format!("Jacobi defect {:e}", v.jacobi_defect)));
    }
    if !v.nilpotent {
        return Err(Error::InvalidBracket("not nilpotent".into()));
    }
    let n = b.dim();
    let ric = curvature::ricci_operator(b);
    let sd = soliton_derivation(b)?;
    let cand = &ric - DMatrix::<f64>::identity(n, n) * sd.c_mu;
    let moved = curvature::pi_action(&cand, b)?;
    let norm = b.norm();
    let derivation_defect = inner(&moved, &moved)?.sqrt() / norm.powi(3);
    let is_einstein = derivation_defect <= tol;
    let resid_op = &cand - &sd.d_mu * sd.d_mu.trace();
    let residual = resid_op.norm() / b.norm_sq();
    let eigenvalue_type = if !is_einstein {
        TypeStatus::NotEinstein
    } else if sd.degenerate {
        TypeStatus::Degenerate
    } else {
        match eigenvalue_type_of(&sd.d_mu) {
            Ok(t) => TypeStatus::Found(t),
            Err(Error::NotRationalizable { ratios, .. }) => TypeStatus::NotRationalizable { ratios },
            Err(_) => TypeStatus::Degenerate,
        }
    };
    Ok(SolitonReport {
        is_einstein,
        c_mu: sd.c_mu,
        d_mu: sd.d_mu,
        degenerate_derivation: sd.degenerate,
        eigenvalue_type,
        residual,
        derivation_defect,
    })
}

/// Eigenvalue type recorded in a report; errors when the report is not
/// Einstein or rationalization failed.
pub fn eigenvalue_type(report: &SolitonReport) -> Result<EigenvalueType> {
    match &report.eigenvalue_type {
        TypeStatus::Found(t) => Ok(t.clone()),
        TypeStatus::NotEinstein => Err(Error::NotEinstein),
        TypeStatus::Degenerate => Err(Error::InvalidBracket("degenerate derivation".into())),
        TypeStatus::NotRationalizable { ratios } => {
            Err(Error::NotRationalizable { cap: DENOMINATOR_CAP, ratios: ratios.clone() })
        }
    }
}

/// Clusters the eigenvalues of `d`, rationalizes their ratios to the
/// smallest one and scales to coprime integers.
pub fn eigenvalue_type_of(d: &SymOp) -> Result<EigenvalueType> {
    eigenvalue_type_with(d, DENOMINATOR_CAP, CLUSTER_TOL)
}

/// As [`eigenvalue_type_of`] with an explicit denominator cap and
/// rationalization tolerance.
pub fn eigenvalue_type_with(d: &SymOp, cap: u64, tol: f64) -> Result<EigenvalueType> {
    let mut eig: Vec<f64> = d.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    let top = eig.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if top == 0.0 || eig[0] <= CLUSTER_TOL * top {
        return Err(Error::InvalidBracket("derivation has a nonpositive eigenvalue".into()));
    }
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for x in eig {
        match clusters.last_mut() {
            Some((sum, count)) if x - last <= CLUSTER_TOL * top => {
                *sum += x;
                *count += 1;
            }
            _ => clusters.push((x, 1)),
        }
        last = x;
    }
    let means: Vec<f64> = clusters.iter().map(|(s, c)| s / *c as f64).collect();
    let ratios: Vec<f64> = means.iter().map(|m| m / means[0]).collect();
    let mut fracs = Vec::new();
    for r in &ratios {
        match rational::rationalize(*r, cap, tol) {
            Some((p, q)) => fracs.push((p as u64, q)),
            None => return Err(Error::NotRationalizable { cap, ratios }),
        }
    }
    let l = fracs.iter().fold(1u64, |acc, (_, q)| acc.lcm(q));
    let ints: Vec<u64> = fracs.iter().map(|(p, q)| p * (l / q)).collect();
    let g = ints.iter().fold(0u64, |acc, x| acc.gcd(x));
    Ok(EigenvalueType {
        values: ints.iter().map(|x| x / g).collect(),
        multiplicities: clusters.iter().map(|(_, c)| *c).collect(),
    })
}

/// Integer Gram matrix of the weights.
pub fn payne_matrix(s: &WeightSupport) -> Vec<Vec<i64>> {
    s.weights
        .iter()
        .map(|a| s.weights.iter().map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum()).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayneOutcome {
    pub is_einstein: bool,
    pub nu: f64,
    /// `max |U m - nu| / nu` for the best constant `nu`.
    pub residual: f64,
}

/// Linear test `U [c^2] = nu [1]`, valid when the Ricci operator is
/// diagonal.
pub fn payne_test(b: &Bracket, tol: f64) -> Result<PayneOutcome> {
    if b.is_empty() {
        return Err(Error::ZeroBracket);
    }
    if !curvature::ricci_diagonal_sufficient(b) {
        let ric = curvature::ricci_operator(b);
        let off = (&ric - DMatrix::from_diagonal(&ric.diagonal())).norm();
        if off > tol * ric.norm() {
            return Err(Error::RicciNotDiagonal(off));
        }
    }
    let s = bracket::weight_support(b);
    let u = payne_matrix(&s);
    let m = DVector::from_row_slice(&s.squares);
    let um: DVector<f64> = DVector::from_fn(s.len(), |r, _| (0..s.len()).map(|c| u[r][c] as f64 * m[c]).sum());
    let nu = um.mean();
    let residual = um.iter().map(|x: &f64| (x - nu).abs()).fold(0.0, f64::max) / nu.abs().max(f64::MIN_POSITIVE);
    Ok(PayneOutcome { is_einstein: residual <= tol, nu, residual })
}

/// Exact variant on rational squared coefficients; returns `nu` when
/// `U m` is constant.
pub fn payne_test_exact(s: &WeightSupport, squares: &[Q]) -> Result<Option<Q>> {
    if squares.len() != s.len() {
        return Err(Error::DimensionMismatch(squares.len(), s.len()));
    }
    let u = payne_matrix(s);
    let um: Vec<Q> = u
        .iter()
        .map(|row| row.iter().zip(squares).fold(Q::zero(), |acc, (x, m)| acc + rational::qi(*x) * m))
        .collect();
    Ok(um.iter().all(|x| *x == um[0]).then(|| um[0].clone()))
}

/// Exact solution set of `U c = nu [1]`, `sum c = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PayneSolution {
    pub coefficients: Vec<Q>,
    pub nu: Q,
    /// Directions of the affine solution set; `nu` is constant along them.
    pub directions: Vec<Vec<Q>>,
}

impl PayneSolution {
    pub fn is_unique(&self) -> bool {
        self.directions.is_empty()
    }

    /// Whether `c` belongs to the solution set.
    pub fn contains(&self, c: &[Q]) -> bool {
        if c.len() != self.coefficients.len() {
            return false;
        }
        let rhs: Vec<Q> = c.iter().zip(&self.coefficients).map(|(a, b)| a - b).collect();
        if self.directions.is_empty() {
            return rhs.iter().all(Zero::is_zero);
        }
        let q = c.len();
        let a: Vec<Vec<Q>> = (0..q).map(|r| self.directions.iter().map(|d| d[r].clone()).collect()).collect();
        rational::solve_affine(&a, &rhs).is_ok()
    }
}

pub fn payne_solve(s: &WeightSupport) -> Result<PayneSolution> {
    let q = s.len();
    if q == 0 {
        return Err(Error::ZeroBracket);
    }
    let u = payne_matrix(s);
    let mut a: Vec<Vec<Q>> = u
        .iter()
        .map(|row| {
            let mut r: Vec<Q> = row.iter().map(|x| rational::qi(*x)).collect();
            r.push(-Q::one());
            r
        })
        .collect();
    let mut sum_row = vec![Q::one(); q];
    sum_row.push(Q::zero());
    a.push(sum_row);
    let mut rhs = vec![Q::zero(); q];
    rhs.push(Q::one());
    let sol = rational::solve_affine(&a, &rhs)?;
    let nu = sol.particular[q].clone();
    let coefficients = sol.particular[..q].to_vec();
    let directions = sol
        .directions
        .into_iter()
        .map(|mut d| {
            debug_assert!(d[q].is_zero());
            d.truncate(q);
            d
        })
        .collect();
    Ok(PayneSolution { coefficients, nu, directions })
}

/// Rational vector as coprime integers, used for reporting weightings.
pub fn integer_profile(v: &[Q]) -> Vec<BigInt> {
    rational::primitive_integer_vector(v).0
}
