//! Minimal convex combinations of weights, chamber sorting, and the
//! sufficient conditions certifying stratum membership.

use nalgebra::{DMatrix, DVector};
use num_traits::{FromPrimitive, Num, Signed, Zero};
use serde::Serialize;

use crate::bracket::{self, Bracket, DiagonalVector};
use crate::curvature;
use crate::error::{Error, Result};
use crate::rational::Q;
use crate::soliton;

/// Scalars Wolfe's method runs over: `f64` and exact rationals.
pub trait WolfeScalar: Clone + PartialOrd + Num + Signed + FromPrimitive + std::fmt::Debug {}
impl<T> WolfeScalar for T where T: Clone + PartialOrd + Num + Signed + FromPrimitive + std::fmt::Debug {}

fn dot<T: WolfeScalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Solves a square system by Gaussian elimination with largest-magnitude
/// pivoting; `None` when singular.
fn gauss<T: WolfeScalar>(mut a: Vec<Vec<T>>, mut rhs: Vec<T>) -> Option<Vec<T>> {
    let n = rhs.len();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().partial_cmp(&a[y][c].abs()).expect("comparable"))?;
        if a[p][c].is_zero() {
            return None;
        }
        a.swap(c, p);
        rhs.swap(c, p);
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].clone() / a[c][c].clone();
            for k in c..n {
                let d = f.clone() * a[c][k].clone();
                a[r][k] = a[r][k].clone() - d;
            }
            rhs[r] = rhs[r].clone() - f * rhs[c].clone();
        }
    }
    let mut x = vec![T::zero(); n];
    for c in (0..n).rev() {
        let mut acc = rhs[c].clone();
        for k in c + 1..n {
            acc = acc - a[c][k].clone() * x[k].clone();
        }
        x[c] = acc / a[c][c].clone();
    }
    Some(x)
}

/// Affine minimizer over the points indexed by `set`: weights summing to 1.
fn affine_minimizer<T: WolfeScalar>(points: &[Vec<T>], set: &[usize]) -> Option<Vec<T>> {
    let m = set.len();
    let mut a = vec![vec![T::zero(); m + 1]; m + 1];
    for (r, &i) in set.iter().enumerate() {
        for (c, &j) in set.iter().enumerate() {
            a[r][c] = dot(&points[i], &points[j]);
        }
        a[r][m] = T::one();
        a[m][r] = T::one();
    }
    let mut rhs = vec![T::zero(); m + 1];
    rhs[m] = T::one();
    let mut w = gauss(a, rhs)?;
    w.truncate(m);
    Some(w)
}

fn combination<T: WolfeScalar>(points: &[Vec<T>], set: &[usize], lambda: &[T]) -> Vec<T> {
    let dim = points[0].len();
    let mut x = vec![T::zero(); dim];
    for (&i, l) in set.iter().zip(lambda) {
        for (xk, pk) in x.iter_mut().zip(&points[i]) {
            *xk = xk.clone() + l.clone() * pk.clone();
        }
    }
    x
}

/// Wolfe's min-norm point algorithm. `stop_tol` is the slack in the
/// optimality test and `zero_tol` the threshold under which a barycentric
/// weight counts as zero; both are zero for exact scalars. Returns the
/// active set and its weights.
pub fn wolfe<T: WolfeScalar>(points: &[Vec<T>], stop_tol: T, zero_tol: T) -> (Vec<usize>, Vec<T>) {
    let norms: Vec<T> = points.iter().map(|p| dot(p, p)).collect();
    let mut first = 0;
    for (i, v) in norms.iter().enumerate() {
        if *v < norms[first] {
            first = i;
        }
    }
    let mut set = vec![first];
    let mut lambda = vec![T::one()];
    let mut x = points[first].clone();
    // Each major cycle strictly decreases the norm; the bound only guards
    // against roundoff cycling.
    for _ in 0..10 * points.len() + 100 {
        let xx = dot(&x, &x);
        let mut j = 0;
        let mut best = dot(&x, &points[0]);
        for (i, p) in points.iter().enumerate().skip(1) {
            let v = dot(&x, p);
            if v < best {
                best = v;
                j = i;
            }
        }
        if best >= xx.clone() - stop_tol.clone() || set.contains(&j) {
            break;
        }
        set.push(j);
        lambda.push(T::zero());
        loop {
            let Some(w) = affine_minimizer(points, &set) else {
                // Affinely dependent set: drop the newest point and stop.
                set.pop();
                lambda.pop();
                return (set, lambda);
            };
            if w.iter().all(|v| *v > zero_tol) {
                lambda = w;
                x = combination(points, &set, &lambda);
                break;
            }
            let mut theta = T::one();
            for (l, v) in lambda.iter().zip(&w) {
                if *v <= zero_tol {
                    let t = l.clone() / (l.clone() - v.clone());
                    if t < theta {
                        theta = t;
                    }
                }
            }
            let keep = T::one() - theta.clone();
            lambda = lambda.iter().zip(&w).map(|(l, v)| theta.clone() * v.clone() + keep.clone() * l.clone()).collect();
            // Remove the weights the step drove to zero (at least one).
            let mut drop = lambda.iter().position(|l| *l <= zero_tol);
            if drop.is_none() {
                let mut arg = 0;
                for (i, l) in lambda.iter().enumerate() {
                    if *l < lambda[arg] {
                        arg = i;
                    }
                }
                drop = Some(arg);
            }
            let mut i = 0;
            let mut first_drop = drop;
            while i < set.len() {
                if first_drop == Some(i) || lambda[i] <= zero_tol {
                    set.remove(i);
                    lambda.remove(i);
                    first_drop = first_drop.and_then(|d| if d > i { Some(d - 1) } else { None });
                } else {
                    i += 1;
                }
            }
            let total = lambda.iter().fold(T::zero(), |a, b| a + b.clone());
            lambda = lambda.into_iter().map(|l| l / total.clone()).collect();
        }
    }
    (set, lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MccResult {
    pub point: Vec<f64>,
    /// One convex weight per input point.
    pub coefficients: Vec<f64>,
    pub active_set: Vec<usize>,
    pub norm_sq: f64,
}

impl MccResult {
    pub fn point_vector(&self) -> DiagonalVector {
        DVector::from_row_slice(&self.point)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MccExact {
    pub point: Vec<Q>,
    pub coefficients: Vec<Q>,
    pub active_set: Vec<usize>,
    pub norm_sq: Q,
}

fn check_points<T>(points: &[Vec<T>]) -> Result<usize> {
    let dim = points.first().ok_or(Error::ZeroBracket)?.len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch(p.len(), dim));
    }
    Ok(dim)
}

/// Min-norm point of the convex hull of `points`.
pub fn mcc(points: &[DiagonalVector]) -> Result<MccResult> {
    let pts: Vec<Vec<f64>> = points.iter().map(|p| p.iter().copied().collect()).collect();
    check_points(&pts)?;
    let scale = pts.iter().map(|p| dot(p, p)).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let (set, lambda) = wolfe(&pts, 1e-13 * scale, 1e-15);
    let mut coefficients = vec![0.0; pts.len()];
    for (&i, l) in set.iter().zip(&lambda) {
        coefficients[i] = *l;
    }
    let point = combination(&pts, &set, &lambda);
    let mut active_set = set;
    active_set.sort_unstable();
    Ok(MccResult { norm_sq: dot(&point, &point), point, coefficients, active_set })
}

/// Exact min-norm point for rational inputs.
pub fn mcc_exact(points: &[Vec<Q>]) -> Result<MccExact> {
    check_points(points)?;
    let (set, lambda) = wolfe(points, Q::zero(), Q::zero());
    let mut coefficients = vec![Q::zero(); points.len()];
    for (&i, l) in set.iter().zip(&lambda) {
        coefficients[i] = l.clone();
    }
    let point = combination(points, &set, &lambda);
    let mut active_set = set;
    active_set.sort_unstable();
    Ok(MccExact { norm_sq: dot(&point, &point), point, coefficients, active_set })
}

/// `beta`: min-norm point of the support weights, with one coefficient per
/// distinct weight of `weight_support(b)`.
pub fn beta_of(b: &Bracket) -> Result<MccResult> {
    if b.is_empty() {
        return Err(Error::ZeroBracket);
    }
    let s = bracket::weight_support(b);
    let pts: Vec<DiagonalVector> = (0..s.len()).map(|i| s.weight_vector(i)).collect();
    let r = mcc(&pts)?;
    debug_assert!((r.point.iter().sum::<f64>() + 1.0).abs() < 1e-9);
    Ok(r)
}

/// Exact `beta` over the integer weights of the support.
pub fn beta_exact(b: &Bracket) -> Result<MccExact> {
    if b.is_empty() {
        return Err(Error::ZeroBracket);
    }
    let s = bracket::weight_support(b);
    let pts: Vec<Vec<Q>> =
        s.weights.iter().map(|w| w.iter().map(|x| crate::rational::qi(*x)).collect()).collect();
    mcc_exact(&pts)
}

/// Stable ascending sort; `perm[p]` is the original index now at `p`.
pub fn to_chamber(v: &DiagonalVector) -> (DiagonalVector, Vec<usize>) {
    let mut perm: Vec<usize> = (0..v.len()).collect();
    perm.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    (DVector::from_iterator(v.len(), perm.iter().map(|&i| v[i])), perm)
}

/// `<beta, alpha> >= ||beta||^2 - tol` for every support weight.
pub fn in_w_beta(b: &Bracket, beta: &DiagonalVector, tol: f64) -> bool {
    let s = bracket::weight_support(b);
    let nb = beta.norm_squared();
    (0..s.len()).all(|i| s.weight_vector(i).dot(beta) >= nb - tol)
}

/// Limit of `diag(s_i t^{r_i}) . mu` as `t -> infinity`.
pub fn diagonal_limit(b: &Bracket, exponents: &[i64], scales: &[f64]) -> Result<Bracket> {
    let n = b.dim();
    if exponents.len() != n {
        return Err(Error::DimensionMismatch(exponents.len(), n));
    }
    if scales.len() != n {
        return Err(Error::DimensionMismatch(scales.len(), n));
    }
    if let Some(p) = scales.iter().position(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::ZeroScale(p + 1));
    }
    let mut out = Bracket::zero(n);
    for (key, c) in b.entries() {
        let (i, j, k) = (key.i - 1, key.j - 1, key.k - 1);
        let e = exponents[k] - exponents[i] - exponents[j];
        if e > 0 {
            return Err(Error::Diverges { i: key.i, j: key.j, k: key.k, exponent: e });
        }
        if e == 0 {
            out.set(key.i, key.j, key.k, c * scales[k] / (scales[i] * scales[j]))?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegenerationEvidence {
    pub exponents: Vec<i64>,
    pub scales: Vec<f64>,
    /// Expected limit, compared against the computed one when present.
    pub witness: Option<Bracket>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Evidence {
    pub degeneration: Option<DegenerationEvidence>,
    /// Limit of the gradient flow started at the bracket.
    pub flow_limit: Option<Bracket>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Certificate {
    /// `F(mu) = ||beta_mu||^2`: the bracket is itself a nilsoliton.
    EinsteinPoint,
    /// A diagonal degeneration reaches a point with diagonal Ricci and
    /// `F = ||beta_mu||^2`.
    DiagonalDegeneration,
    /// The flow limit has diagonal Ricci and the bracket lies in `W_beta`.
    FlowLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StratumStatus {
    Certified,
    Candidate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumReport {
    pub beta_plus: Vec<f64>,
    pub permutation: Vec<usize>,
    pub status: StratumStatus,
    pub certificate: Option<Certificate>,
    pub f_lower_bound: f64,
}

fn ricci_is_diagonal(b: &Bracket, tol: f64) -> bool {
    let ric = curvature::ricci_operator(b);
    let off = (&ric - DMatrix::from_diagonal(&ric.diagonal())).norm();
    off <= tol * ric.norm()
}

fn report(beta: &DiagonalVector, status: StratumStatus, certificate: Option<Certificate>) -> StratumReport {
    let (sorted, permutation) = to_chamber(beta);
    StratumReport {
        f_lower_bound: sorted.norm_squared(),
        beta_plus: sorted.iter().copied().collect(),
        permutation,
        status,
        certificate,
    }
}

/// Tries the three sufficient conditions in order and falls back to a
/// candidate report built from `beta_of(b)`.
pub fn certify_stratum(b: &Bracket, evidence: &Evidence, tol: f64) -> Result<StratumReport> {
    let beta = beta_of(b)?;
    let bv = beta.point_vector();
    let target = beta.norm_sq;
    let close = |x: f64| (x - target).abs() <= tol * target.max(1.0);

    if close(curvature::f_value(b)?) {
        return Ok(report(&bv, StratumStatus::Certified, Some(Certificate::EinsteinPoint)));
    }

    if let Some(deg) = &evidence.degeneration {
        if deg.exponents.len() != b.dim() || deg.scales.len() != b.dim() {
            return Err(Error::MalformedEvidence("degeneration length differs from dimension".into()));
        }
        if let Some(w) = &deg.witness {
            if w.dim() != b.dim() {
                return Err(Error::MalformedEvidence("witness dimension differs".into()));
            }
        }
        match diagonal_limit(b, &deg.exponents, &deg.scales) {
            Ok(lim) if !lim.is_empty() => {
                let matches = deg.witness.as_ref().is_none_or(|w| {
                    lim.add_scaled(w, -1.0).map(|d| d.max_abs() <= tol * w.max_abs().max(1.0)).unwrap_or(false)
                });
                if matches && ricci_is_diagonal(&lim, tol) && close(curvature::f_value(&lim)?) {
                    return Ok(report(&bv, StratumStatus::Certified, Some(Certificate::DiagonalDegeneration)));
                }
            }
            Ok(_) | Err(Error::Diverges { .. }) => {}
            Err(e) => return Err(e),
        }
    }

    if let Some(lim) = &evidence.flow_limit {
        if lim.dim() != b.dim() {
            return Err(Error::MalformedEvidence("flow limit dimension differs".into()));
        }
        if !lim.is_empty() && ricci_is_diagonal(lim, tol) {
            let einstein = soliton::is_einstein(lim, tol).map(|r| r.is_einstein).unwrap_or(false);
            let flow_beta = curvature::ricci(lim)?.moment.diagonal();
            if einstein && in_w_beta(b, &flow_beta, tol) {
                return Ok(report(&flow_beta, StratumStatus::Certified, Some(Certificate::FlowLimit)));
            }
        }
    }

    Ok(report(&bv, StratumStatus::Candidate, None))
}
