//! Negative gradient flow of `F` on the sphere `||mu|| = 2`.
//!
//! The flow is integrated on the smallest coordinate subspace that contains
//! the initial support and is invariant under the vector field. Two
//! integrators are available: an adaptive Dormand-Prince 5(4) pair, and a
//! linearly implicit Rosenbrock 2(3) scheme for the stiff tails where some
//! coefficients decay only algebraically. `Scheme::Auto` starts explicit
//! and switches once the explicit pair detects stiffness.

use std::collections::BTreeSet;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bracket::{self, Bracket, Key};
use crate::curvature::{self, pi_accumulate, ricci_from_entries};
use crate::error::{Error, Result};

/// Coefficients below this are reported as structurally zero in limits.
pub const STRUCTURAL_ZERO: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scheme {
    DormandPrince,
    Rosenbrock,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub seed: u64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowOptions {
    pub grad_tol: f64,
    /// When set, convergence also requires `t * ||grad F|| <= drift_tol`,
    /// i.e. the coefficients would move by less than this if the flow ran
    /// for as long again. This is what separates an algebraically decaying
    /// coefficient from a genuinely nonzero one.
    pub drift_tol: Option<f64>,
    pub max_time: f64,
    pub min_time: f64,
    pub initial_step: f64,
    pub rtol: f64,
    pub atol: f64,
    pub min_step: f64,
    pub max_steps: usize,
    pub scheme: Scheme,
    pub perturbation: Option<Perturbation>,
    /// Keep every `sample_every`-th accepted step (the first and last are
    /// always kept).
    pub sample_every: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            grad_tol: 1e-9,
            drift_tol: Some(1e-8),
            max_time: 1e16,
            min_time: 0.0,
            initial_step: 1e-2,
            rtol: 1e-10,
            atol: 1e-12,
            min_step: 1e-14,
            max_steps: 2_000_000,
            scheme: Scheme::Auto,
            perturbation: None,
            sample_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSample {
    pub t: f64,
    pub bracket: Bracket,
    pub f_value: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrajectory {
    pub samples: Vec<FlowSample>,
    pub limit: Bracket,
    pub converged: bool,
    pub steps: usize,
    pub rejected: usize,
    /// Time at which `Scheme::Auto` switched to the implicit scheme.
    pub stiff_switch: Option<f64>,
    /// Coordinates the flow was integrated on.
    pub keys: Vec<Key>,
}

impl FlowTrajectory {
    pub fn final_time(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn final_grad_norm(&self) -> f64 {
        self.samples.last().map_or(f64::NAN, |s| s.grad_norm)
    }
}

/// `grad F = -(16 / ||mu||^6) (delta_mu(Ric) ||mu||^2 + 4 tr(Ric^2) mu)` with
/// `delta_mu(a) = -pi(a) mu`.
pub fn grad_f(b: &Bracket) -> Result<Bracket> {
    if b.is_empty() {
        return Err(Error::ZeroBracket);
    }
    let ric = curvature::ricci_operator(b);
    let ns = b.norm_sq();
    let tr2 = (&ric * &ric).trace();
    let moved = curvature::pi_action(&ric, b)?;
    let s = 16.0 / ns.powi(3);
    moved.scaled(s * ns).add_scaled(b, -s * 4.0 * tr2)
}

/// Right-hand side `-pi(Ric) mu + tr(Ric^2) mu`.
pub fn flow_field(b: &Bracket) -> Result<Bracket> {
    let ric = curvature::ricci_operator(b);
    let tr2 = (&ric * &ric).trace();
    curvature::pi_action(&ric, b)?.scaled(-1.0).add_scaled(b, tr2)
}

/// Evaluates the field on a fixed set of coordinates.
struct Kernel {
    n: usize,
    keys: Vec<(usize, usize, usize)>,
    scratch: Vec<f64>,
    entries: Vec<(usize, usize, usize, f64)>,
}

impl Kernel {
    fn new(n: usize, keys: &[Key]) -> Self {
        Kernel {
            n,
            keys: keys.iter().map(|k| (k.i - 1, k.j - 1, k.k - 1)).collect(),
            scratch: vec![0.0; n * n * n],
            entries: Vec::with_capacity(keys.len()),
        }
    }

    fn load(&mut self, y: &[f64]) {
        self.entries.clear();
        for (&(i, j, k), &c) in self.keys.iter().zip(y) {
            if c != 0.0 {
                self.entries.push((i, j, k, c));
            }
        }
    }

    /// Field values, plus `tr(Ric^2)` and `tr(Ric)`.
    ///
    /// Off the sphere the plain field pushes the norm away from 2
    /// exponentially, which forces tiny steps. The scalar term
    /// `tr(Ric^2) (6 - ||mu||^2) / 2` agrees with `tr(Ric^2)` on the sphere
    /// and makes it attracting instead, while keeping the field polynomial.
    fn field(&mut self, y: &[f64], out: &mut [f64]) -> (f64, f64) {
        let n = self.n;
        let s: f64 = 2.0 * y.iter().map(|x| x * x).sum::<f64>();
        self.load(y);
        let ric = ricci_from_entries(n, &self.entries);
        let tr2: f64 = ric.iter().map(|x| x * x).sum();
        self.scratch.iter_mut().for_each(|x| *x = 0.0);
        pi_accumulate(n, &self.entries, &ric, &mut self.scratch);
        for (o, (&(i, j, k), &c)) in out.iter_mut().zip(self.keys.iter().zip(y)) {
            *o = -self.scratch[(i * n + j) * n + k] + tr2 * (6.0 - s) / 2.0 * c;
        }
        (tr2, ric.trace())
    }

    fn field_vec(&mut self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; y.len()];
        self.field(y, &mut out);
        out
    }

    /// Jacobian by a nine-point stencil, which is exact (up to roundoff)
    /// for the degree-7 polynomial field. Finite differences with small
    /// steps are not accurate enough once `h * J` reaches 1e14.
    fn jacobian(&mut self, y: &[f64]) -> DMatrix<f64> {
        let m = y.len();
        let h = 0.5;
        let mut jac = DMatrix::zeros(m, m);
        let mut z = y.to_vec();
        for c in 0..m {
            let mut eval = |s: f64, z: &mut Vec<f64>| {
                z[c] = y[c] + s * h;
                let v = self.field_vec(z);
                z[c] = y[c];
                v
            };
            let d: Vec<Vec<f64>> = (1..=4)
                .map(|s| {
                    let p = eval(s as f64, &mut z);
                    let q = eval(-(s as f64), &mut z);
                    p.iter().zip(&q).map(|(a, b)| a - b).collect()
                })
                .collect();
            for r in 0..m {
                jac[(r, c)] = (672.0 * d[0][r] - 168.0 * d[1][r] + 32.0 * d[2][r] - 3.0 * d[3][r]) / (840.0 * h);
            }
        }
        jac
    }
}

/// Smallest coordinate set containing `start` that the field maps into
/// itself, found by evaluating the field at generic points.
fn invariant_keys(n: usize, start: &BTreeSet<Key>) -> Vec<Key> {
    let mut keys = start.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    loop {
        let list: Vec<Key> = keys.iter().copied().collect();
        let y: Vec<f64> = list.iter().map(|_| rng.gen_range(0.5..1.5)).collect();
        let b = Bracket::from_entries(n, list.iter().zip(&y).map(|(k, c)| (k.i, k.j, k.k, *c))).expect("valid keys");
        let f = flow_field(&b).expect("dimensions agree");
        let before = keys.len();
        let scale = f.max_abs().max(1.0);
        for (k, c) in f.entries() {
            if c.abs() > 1e-12 * scale {
                keys.insert(k);
            }
        }
        if keys.len() == before {
            return list;
        }
    }
}

fn v_norm(y: &[f64]) -> f64 {
    (2.0 * y.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

fn renormalize(y: &mut [f64]) {
    let s = 2.0 / v_norm(y);
    y.iter_mut().for_each(|x| *x *= s);
}

fn err_norm(err: &[f64], y0: &[f64], y1: &[f64], opts: &FlowOptions) -> f64 {
    err.iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| e.abs() / (opts.atol + opts.rtol * a.abs().max(b.abs())))
        .fold(0.0, f64::max)
}

struct StepResult {
    y: Vec<f64>,
    err: f64,
    /// `h * lambda` estimate used for stiffness detection.
    stiffness: Option<f64>,
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn dopri_step(kernel: &mut Kernel, y: &[f64], k1: &[f64], h: f64, opts: &FlowOptions) -> StepResult {
    let m = y.len();
    let mut ks: Vec<Vec<f64>> = vec![k1.to_vec()];
    let mut stage_arg = vec![0.0; m];
    for row in A.iter() {
        for (r, arg) in stage_arg.iter_mut().enumerate() {
            *arg = y[r] + h * ks.iter().zip(row).map(|(k, a)| a * k[r]).sum::<f64>();
        }
        let k = kernel.field_vec(&stage_arg);
        ks.push(k);
    }
    let ysti: Vec<f64> = (0..m).map(|r| y[r] + h * (0..5).map(|s| A[4][s] * ks[s][r]).sum::<f64>()).collect();
    let ynew: Vec<f64> = (0..m).map(|r| y[r] + h * (0..6).map(|s| A[5][s] * ks[s][r]).sum::<f64>()).collect();
    let err: Vec<f64> = (0..m).map(|r| h * (0..7).map(|s| E[s] * ks[s][r]).sum::<f64>()).collect();
    let num: f64 = (0..m).map(|r| (ks[6][r] - ks[5][r]).powi(2)).sum();
    let den: f64 = (0..m).map(|r| (ynew[r] - ysti[r]).powi(2)).sum();
    let stiffness = (den > 0.0).then(|| h * (num / den).sqrt());
    StepResult { err: err_norm(&err, y, &ynew, opts), y: ynew, stiffness }
}

fn rosenbrock_step(kernel: &mut Kernel, y: &[f64], f0: &[f64], h: f64, opts: &FlowOptions) -> Option<StepResult> {
    let m = y.len();
    let d = 1.0 / (2.0 + std::f64::consts::SQRT_2);
    let e32 = 6.0 + std::f64::consts::SQRT_2;
    let jac = kernel.jacobian(y);
    let w = DMatrix::<f64>::identity(m, m) - jac * (h * d);
    let lu = w.lu();
    let solve = |v: Vec<f64>| lu.solve(&DVector::from_vec(v)).map(|x| x.iter().copied().collect::<Vec<f64>>());
    let k1 = solve(f0.to_vec())?;
    let mid: Vec<f64> = (0..m).map(|r| y[r] + 0.5 * h * k1[r]).collect();
    let f1 = kernel.field_vec(&mid);
    let k2: Vec<f64> = solve((0..m).map(|r| f1[r] - k1[r]).collect())?.iter().zip(&k1).map(|(a, b)| a + b).collect();
    let ynew: Vec<f64> = (0..m).map(|r| y[r] + h * k2[r]).collect();
    let f2 = kernel.field_vec(&ynew);
    let k3 = solve((0..m).map(|r| f2[r] - e32 * (k2[r] - f1[r]) - 2.0 * (k1[r] - f0[r])).collect())?;
    let err: Vec<f64> = (0..m).map(|r| h / 6.0 * (k1[r] - 2.0 * k2[r] + k3[r])).collect();
    Some(StepResult { err: err_norm(&err, y, &ynew, opts), y: ynew, stiffness: None })
}

fn perturb(b: &Bracket, p: &Perturbation) -> Result<Bracket> {
    let n = b.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let x = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    bracket::act(&(DMatrix::identity(n, n) + x * p.epsilon), b)
}

/// Integrates the flow from `b0` (rescaled to norm 2).
pub fn integrate(b0: &Bracket, opts: &FlowOptions) -> Result<FlowTrajectory> {
    if b0.is_empty() {
        return Err(Error::ZeroBracket);
    }
    let n = b0.dim();
    let start = match &opts.perturbation {
        Some(p) => perturb(b0, p)?,
        None => b0.clone(),
    };
    let start = start.scaled(2.0 / start.norm());
    let keys = invariant_keys(n, &start.keys().collect());
    let mut kernel = Kernel::new(n, &keys);
    let mut y: Vec<f64> = keys.iter().map(|k| start.get(k.i, k.j, k.k)).collect();

    let to_bracket = |y: &[f64]| {
        Bracket::from_entries(n, keys.iter().zip(y).map(|(k, c)| (k.i, k.j, k.k, *c))).expect("valid keys")
    };
    let sample = |t: f64, y: &[f64], f: &[f64], tr2: f64| FlowSample {
        t,
        bracket: to_bracket(y),
        // At norm 2, F = tr(Ric^2) and grad F = -field.
        f_value: tr2,
        grad_norm: v_norm(f),
    };
    let converged_at = |t: f64, g: f64| {
        g <= opts.grad_tol && t >= opts.min_time && opts.drift_tol.is_none_or(|d| t * g <= d)
    };

    let mut f = vec![0.0; y.len()];
    let (tr2, _) = kernel.field(&y, &mut f);
    let mut samples = vec![sample(0.0, &y, &f, tr2)];
    let mut t = 0.0;
    let mut h = opts.initial_step;
    let mut steps = 0;
    let mut rejected = 0;
    let mut stiff = opts.scheme == Scheme::Rosenbrock;
    let mut stiff_switch = None;
    let (mut stiff_count, mut calm_count) = (0u32, 0u32);
    let mut converged = converged_at(0.0, v_norm(&f));
    let mut just_rejected = false;

    while !converged && t < opts.max_time && steps < opts.max_steps {
        h = h.min(opts.max_time - t);
        let step = if stiff {
            rosenbrock_step(&mut kernel, &y, &f, h, opts)
        } else {
            Some(dopri_step(&mut kernel, &y, &f, h, opts))
        };
        let ok = step.as_ref().is_some_and(|s| s.err.is_finite() && s.y.iter().all(|x| x.is_finite()));
        if !ok {
            rejected += 1;
            h *= 0.5;
            if h < opts.min_step * t.max(1.0) {
                return Err(Error::FlowFailure { t, reason: "non-finite values at the step-size floor".into() });
            }
            continue;
        }
        let step = step.expect("checked");
        let order = if stiff { 3.0 } else { 5.0 };
        if step.err > 1.0 {
            rejected += 1;
            just_rejected = true;
            h *= (0.9 * step.err.powf(-1.0 / order)).clamp(0.2, 1.0);
            if h < opts.min_step * t.max(1.0) {
                return Err(Error::FlowFailure { t, reason: "step size underflow".into() });
            }
            continue;
        }
        t += h;
        steps += 1;
        y = step.y;
        renormalize(&mut y);
        let (tr2, _) = kernel.field(&y, &mut f);
        let g = v_norm(&f);
        converged = converged_at(t, g);
        if steps % opts.sample_every.max(1) == 0 || converged {
            samples.push(sample(t, &y, &f, tr2));
        }
        let max_growth = if just_rejected { 1.0 } else { 5.0 };
        just_rejected = false;
        let fac = if step.err == 0.0 { max_growth } else { (0.9 * step.err.powf(-1.0 / order)).clamp(0.2, max_growth) };
        h *= fac;
        if opts.scheme == Scheme::Auto && !stiff {
            if let Some(hl) = step.stiffness {
                if hl > 3.25 {
                    calm_count = 0;
                    stiff_count += 1;
                    if stiff_count >= 15 {
                        stiff = true;
                        stiff_switch = Some(t);
                    }
                } else {
                    calm_count += 1;
                    if calm_count >= 6 {
                        stiff_count = 0;
                    }
                }
            }
        }
    }
    if samples.last().is_none_or(|s| s.t != t) {
        let (tr2, _) = kernel.field(&y, &mut f);
        samples.push(sample(t, &y, &f, tr2));
    }
    Ok(FlowTrajectory {
        limit: to_bracket(&y),
        samples,
        converged,
        steps,
        rejected,
        stiff_switch,
        keys,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Invariants {
    pub central_series: Vec<usize>,
    pub center_dim: usize,
    pub derived_dim: usize,
}

impl Invariants {
    pub fn of(b: &Bracket) -> Self {
        Invariants {
            central_series: bracket::central_series(b),
            center_dim: bracket::center(b).ncols(),
            derived_dim: bracket::derived(b).ncols(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LimitEvidence {
    /// All compared invariants agree; consistent with the limit lying in
    /// the orbit, but not a proof.
    SameOrbit,
    /// Some invariant differs, so the limit lies outside the orbit.
    Degeneration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitClassification {
    pub evidence: LimitEvidence,
    pub start: Invariants,
    pub limit: Invariants,
    /// Keys whose limit coefficient is below the structural-zero threshold.
    pub structural_zeros: Vec<Key>,
}

/// Compares discrete invariants of `b0` and of `limit` with coefficients
/// below `zero_tol` removed.
pub fn classify_limit(b0: &Bracket, limit: &Bracket, zero_tol: f64) -> LimitClassification {
    let structural_zeros = limit.entries().filter(|(_, c)| c.abs() < zero_tol).map(|(k, _)| k).collect();
    let start = Invariants::of(b0);
    let lim = Invariants::of(&limit.pruned(zero_tol));
    let evidence = if start == lim { LimitEvidence::SameOrbit } else { LimitEvidence::Degeneration };
    LimitClassification { evidence, start, limit: lim, structural_zeros }
}

/// Trajectory as CSV: `t, F, grad_norm`, then one column per coordinate.
pub fn write_csv<W: Write>(traj: &FlowTrajectory, mut w: W) -> std::io::Result<()> {
    write!(w, "t,F,grad_norm")?;
    for k in &traj.keys {
        write!(w, ",mu_{}_{}_{}", k.i, k.j, k.k)?;
    }
    writeln!(w)?;
    for s in &traj.samples {
        write!(w, "{},{},{}", s.t, s.f_value, s.grad_norm)?;
        for k in &traj.keys {
            write!(w, ",{}", s.bracket.get(k.i, k.j, k.k))?;
        }
        writeln!(w)?;
    }
    Ok(())
}
