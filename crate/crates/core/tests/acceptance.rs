//! Acceptance criteria 1 to 11, one PASS/FAIL line each.
//!
//! A criterion listed in `KNOWN_FAILURES` is still run in full and reported
//! as FAIL; the run only errors when the set of failing criteria differs
//! from that list.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nilsoliton::bracket::{self, act, inner, weight_support, Bracket};
use nilsoliton::catalog;
use nilsoliton::curvature;
use nilsoliton::flow::{self, FlowOptions, LimitEvidence};
use nilsoliton::graphs::{self, Graph};
use nilsoliton::rational::{q, Q};
use nilsoliton::soliton::{self, EigenvalueType};
use nilsoliton::stratify;

/// Criterion 3 asks for eleven positive triples outside the closed-form
/// conditions; exact enumeration finds ten (every one of them positive).
const KNOWN_FAILURES: &[u32] = &[3];

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn permuted(v: &[BigInt], order: &[usize]) -> Vec<BigInt> {
    order.iter().map(|&i| v[i].clone()).collect()
}

fn criterion_1() -> Outcome {
    // grst lists the central edge first; the reference drawings list it last (G220) or
    // in its drawn order (G211).
    let cases: [((usize, usize, usize), &[usize], &[i64]); 3] = [
        ((2, 2, 0), &[1, 2, 3, 4, 0], &[1, 1, 1, 1, 0]),
        ((0, 0, 3), &[1, 2, 3, 4, 5, 6, 0], &[1, 1, 1, 1, 1, 1, 0]),
        ((2, 1, 1), &[1, 2, 4, 5, 0, 3], &[15, 15, 8, 14, -1, 18]),
    ];
    for ((r, s, t), order, want) in cases {
        let g = graphs::grst(r, s, t).map_err(|e| e.to_string())?;
        let w = graphs::weighting(&g).map_err(|e| e.to_string())?;
        let got = permuted(&w.integer, order);
        ensure(got == ints(want), || format!("G({r},{s},{t}) weighting {got:?}"))?;
        ensure(!graphs::is_positive(&g).map_err(|e| e.to_string())?, || format!("G({r},{s},{t}) declared positive"))?;
    }
    let nu = graphs::weighting(&graphs::grst(2, 1, 1).unwrap()).unwrap().nu_int;
    ensure(nu == BigInt::from(67), || format!("G(2,1,1) nu = {nu}"))?;
    Ok("G(2,2,0), G(0,0,3), G(2,1,1) exact; none positive".into())
}

fn criterion_2() -> Outcome {
    let check = |name: &str, g: &Graph, want: &[i64], nu: Option<i64>| -> Result<(), String> {
        let w = graphs::weighting(g).map_err(|e| e.to_string())?;
        ensure(w.integer == ints(want), || format!("{name}: weighting {:?}", w.integer))?;
        if let Some(nu) = nu {
            ensure(w.nu_int == BigInt::from(nu), || format!("{name}: nu = {}", w.nu_int))?;
        }
        ensure(graphs::is_positive(g).map_err(|e| e.to_string())?, || format!("{name} not positive"))
    };
    for m in 4..=8 {
        check(&format!("K(1,{m})"), &catalog::star_graph(m), &vec![1; m], None)?;
    }
    check("three ends plus arm", &catalog::tree_three_plus_arm(), &[6, 6, 6, 1, 10], Some(31))?;
    check("five ends plus arm", &catalog::tree_five_plus_arm(), &[15, 15, 15, 15, 15, 2, 26, 27], Some(107))?;
    Ok("stars m = 4..8 all ones; nu = 31 and nu = 107 trees exact; all positive".into())
}

/// Closed-form conditions for non-positivity.
fn closed_form_nonpositive(r: usize, s: usize, t: usize) -> bool {
    r * s >= 4 || t >= 3 || (t >= 1 && 2 * t + r >= 6) || (r >= 2 && s >= 1 && t >= 1) || (s >= 1 && t >= 2)
}

fn criterion_3() -> Outcome {
    let mut checked = 0;
    let mut complement = Vec::new();
    for t in 0..=12 {
        for s in 0..=24 {
            for r in s..=24 {
                if (s == 0 && t == 0) || r + s + 2 * t + 1 > 25 {
                    continue;
                }
                let exact = graphs::is_positive(&graphs::grst(r, s, t).unwrap()).map_err(|e| e.to_string())?;
                let closed = graphs::grst_is_positive(r, s, t).map_err(|e| e.to_string())?;
                ensure(exact == closed, || format!("G({r},{s},{t}): exact {exact}, closed form {closed}"))?;
                ensure(exact != closed_form_nonpositive(r, s, t), || format!("G({r},{s},{t}) disagrees with the closed form"))?;
                checked += 1;
                if !closed_form_nonpositive(r, s, t) {
                    complement.push((r, s, t, exact));
                }
            }
        }
    }
    let positive: Vec<_> = complement.iter().filter(|c| c.3).map(|&(r, s, t, _)| (r, s, t)).collect();
    let detail = format!("closed form agrees on {checked} triples; positive complement {positive:?}");
    ensure(positive.len() == 11, || format!("{detail}: count {}, expected 11", positive.len()))?;
    Ok(detail)
}

fn criterion_4() -> Outcome {
    let mut tested = 0;
    for q in 1..=12 {
        for g in graphs::trees_with_edges(q) {
            if !graphs::tree_valency_hypothesis(&g) {
                continue;
            }
            ensure(graphs::is_positive(&g).map_err(|e| e.to_string())?, || format!("tree {g} not positive"))?;
            tested += 1;
        }
    }
    Ok(format!("{tested} trees with at most 12 edges and edge valency <= 3, all positive"))
}

fn criterion_5() -> Outcome {
    let traj = flow::integrate(&catalog::flow_chain(), &FlowOptions::default()).map_err(|e| e.to_string())?;
    ensure(traj.converged, || "flow did not converge".into())?;
    let want = [2.0 / 5f64.sqrt(), (2.0f64 / 5.0).sqrt(), 2.0 / 5f64.sqrt()];
    let got = [traj.limit.get(1, 2, 5), traj.limit.get(2, 3, 6), traj.limit.get(3, 4, 7)];
    for (w, g) in want.iter().zip(got) {
        ensure((w - g).abs() < 1e-5, || format!("limit {got:?}"))?;
    }
    ensure(soliton::payne_test(&traj.limit, 1e-8).map_err(|e| e.to_string())?.is_einstein, || "payne test fails".into())?;
    let s = weight_support(&traj.limit);
    let nu = soliton::payne_test_exact(&s, &[q(4, 5), q(2, 5), q(4, 5)]).map_err(|e| e.to_string())?;
    ensure(nu == Some(q(14, 5)), || format!("exact nu {nu:?}"))?;
    Ok(format!("limit {got:.10?} after {} steps; nu = 14/5 exact", traj.steps))
}

fn criterion_6() -> Outcome {
    let b0 = catalog::flow_degenerating();
    let traj = flow::integrate(&b0, &FlowOptions::default()).map_err(|e| e.to_string())?;
    ensure(traj.converged, || "flow did not converge".into())?;
    let small = traj.limit.get(1, 2, 7);
    ensure(small.abs() < 1e-6, || format!("(1,2,7) = {small:e}"))?;
    for (i, j, k) in [(1, 3, 8), (1, 4, 9), (2, 5, 10), (2, 6, 11)] {
        let c = traj.limit.get(i, j, k);
        ensure((c - 0.5f64.sqrt()).abs() < 1e-5, || format!("({i},{j},{k}) = {c}"))?;
    }
    let cls = flow::classify_limit(&b0, &traj.limit, flow::STRUCTURAL_ZERO);
    ensure(cls.evidence == LimitEvidence::Degeneration, || "no degeneration detected".into())?;
    ensure((cls.start.derived_dim, cls.limit.derived_dim) == (5, 4), || format!("derived dims {:?}", (cls.start.derived_dim, cls.limit.derived_dim)))?;
    let m = curvature::ricci(&traj.limit).map_err(|e| e.to_string())?.moment;
    let mut eig: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    let want = [-0.5, -0.5, -0.25, -0.25, -0.25, -0.25, 0.0, 0.25, 0.25, 0.25, 0.25];
    let err = eig.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(err < 1e-6, || format!("moment spectrum {eig:?}"))?;
    Ok(format!("(1,2,7) = {small:.3e} at t = {:.3e}; derived dim 5 -> 4; moment error {err:.1e}", traj.final_time()))
}

const PRINTED_U: [[i64; 9]; 9] = [
    [3, 0, 1, 1, 1, 0, 1, 1, -1],
    [0, 3, 0, 1, 1, 1, -1, 0, 0],
    [1, 0, 3, 0, 1, 1, 1, -1, 1],
    [1, 1, 0, 3, 0, -1, 1, 1, 0],
    [1, 1, 1, 0, 3, 0, -1, 1, 1],
    [0, 1, 1, -1, 0, 3, 1, 0, 1],
    [1, -1, 1, 1, -1, 1, 3, 1, 1],
    [1, 0, -1, 1, 1, 0, 1, 3, 1],
    [-1, 0, 1, 0, 1, 1, 1, 1, 3],
];

fn eigen_type(b: &Bracket) -> Result<EigenvalueType, String> {
    let r = soliton::is_einstein(b, 1e-8).map_err(|e| e.to_string())?;
    ensure(r.is_einstein, || format!("not Einstein: {b}"))?;
    r.eigenvalue_type().cloned().ok_or_else(|| format!("no eigenvalue type: {:?}", r.eigenvalue_type))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let want = EigenvalueType { values: (1..=7).collect(), multiplicities: vec![1; 7] };
    let mut branches = [0; 3];
    for _ in 0..20 {
        let branch: u8 = rng.gen_range(0..3);
        let s = if branch == 0 { rng.gen_range(0.05..0.95) } else { rng.gen_range(0.68..0.99) };
        let b = catalog::critical_jacobi(branch, s).map_err(|e| e.to_string())?;
        branches[branch as usize] += 1;
        ensure(bracket::validate(&b, 1e-10).jacobi_ok, || format!("branch {branch}, s = {s}: Jacobi fails"))?;
        let t = eigen_type(&b)?;
        ensure(t == want, || format!("type {t}"))?;
        ensure(soliton::payne_test(&b, 1e-8).map_err(|e| e.to_string())?.is_einstein, || "payne test fails".into())?;
        let f = curvature::f_value(&b).map_err(|e| e.to_string())?;
        ensure((f - 5.0 / 7.0).abs() < 1e-9, || format!("F = {f}"))?;
        let u = soliton::payne_matrix(&weight_support(&b));
        ensure(u.len() == 9 && u.iter().zip(&PRINTED_U).all(|(a, b)| a[..] == b[..]), || format!("U = {u:?}"))?;
    }
    Ok(format!("20 points (branches {branches:?}); type {want}; F = 5/7; U matches"))
}

fn criterion_8() -> Outcome {
    let cases = [
        ("mu1'", catalog::mu1_prime(), 16),
        ("mu3'", catalog::mu3_prime(), 4),
        ("mu4'", catalog::mu4_prime(), 3),
    ];
    for (name, b, first) in cases {
        let t = eigen_type(&b).map_err(|e| format!("{name}: {e}"))?;
        let mut values = vec![1];
        values.extend(first..first + 6);
        let want = EigenvalueType { values, multiplicities: vec![1; 7] };
        ensure(t == want, || format!("{name}: type {t}"))?;
    }
    let s = weight_support(&catalog::mu1_prime());
    let squares: Vec<Q> = [5, 8, 9, 8, 5].iter().map(|&x| q(x, 1)).collect();
    let nu = soliton::payne_test_exact(&s, &squares).map_err(|e| e.to_string())?;
    ensure(nu == Some(q(37, 1)), || format!("mu1' nu {nu:?}"))?;
    Ok("types (1<16<..<21), (1<4<..<9), (1<3<..<8); mu1' nu = 37".into())
}

fn criterion_9() -> Outcome {
    let ones = [1.0; 7];
    let alpha0: [i64; 7] = [0, 1, 1, 1, 2, 2, 2];
    let alpha1: [i64; 7] = [1, 2, 0, 1, 2, 3, 4];
    let mu111 = catalog::graded([1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0]);
    let mu011 = catalog::graded([0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0]);
    // diagonal_limit takes exponents for diag(t^r); the degeneration of
    // lambda_0 uses t^{-alpha}, that of lambda_1 uses t^{alpha}.
    let neg: Vec<i64> = alpha0.iter().map(|x| -x).collect();
    let l0 = stratify::diagonal_limit(&catalog::lambda(0.0), &neg, &ones).map_err(|e| e.to_string())?;
    ensure(l0 == mu111, || format!("lambda_0 limit {l0}"))?;
    let l1 = stratify::diagonal_limit(&catalog::lambda(1.0), &alpha1, &ones).map_err(|e| e.to_string())?;
    ensure(l1 == mu011, || format!("lambda_1 limit {l1}"))?;
    let flipped: Vec<i64> = alpha1.iter().map(|x| -x).collect();
    let diverges = matches!(stratify::diagonal_limit(&catalog::lambda(1.0), &flipped, &ones), Err(nilsoliton::error::Error::Diverges { .. }));
    ensure(diverges, || "lambda_1 with t^{-alpha} should diverge".into())?;
    Ok("lambda_0 -> mu_111 and lambda_1 -> mu_011 exactly; lambda_1 diverges under t^{-alpha}".into())
}

/// Exhaustive search over active sets: the min-norm point of each affine
/// hull, kept when its barycentric coordinates are nonnegative.
fn mcc_by_enumeration(points: &[DVector<f64>]) -> DVector<f64> {
    let k = points.len();
    let mut best: Option<DVector<f64>> = None;
    for mask in 1u32..(1 << k) {
        let idx: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
        let m = idx.len();
        let mut kkt = DMatrix::zeros(m + 1, m + 1);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                kkt[(a, b)] = points[i].dot(&points[j]);
            }
            kkt[(a, m)] = 1.0;
            kkt[(m, a)] = 1.0;
        }
        let mut rhs = DVector::zeros(m + 1);
        rhs[m] = 1.0;
        let Ok(sol) = kkt.svd(true, true).solve(&rhs, 1e-12) else { continue };
        if (0..m).any(|a| sol[a] < -1e-12) || ((0..m).map(|a| sol[a]).sum::<f64>() - 1.0).abs() > 1e-9 {
            continue;
        }
        let p = idx.iter().enumerate().fold(DVector::zeros(points[0].len()), |acc, (a, &i)| acc + &points[i] * sol[a]);
        if best.as_ref().is_none_or(|b| p.norm_squared() < b.norm_squared() - 1e-15) {
            best = Some(p);
        }
    }
    best.expect("a vertex is always feasible")
}

/// Smallest squared norm over the simplex grid of step `1/den`: exhaustive
/// at step 1/20, then a descent over the fine lattice moving `1/den` of
/// mass between two points at a time.
fn mcc_by_grid(points: &[DVector<f64>], den: usize) -> f64 {
    let k = points.len();
    let gram = DMatrix::from_fn(k, k, |i, j| points[i].dot(&points[j]));
    let value = |l: &[usize], d: usize| -> f64 {
        let mut s = 0.0;
        for i in 0..k {
            for j in 0..k {
                s += gram[(i, j)] * l[i] as f64 * l[j] as f64;
            }
        }
        s / (d * d) as f64
    };
    fn compositions(total: usize, parts: usize, prefix: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if parts == 1 {
            prefix.push(total);
            visit(prefix);
            prefix.pop();
            return;
        }
        for x in 0..=total {
            prefix.push(x);
            compositions(total - x, parts - 1, prefix, visit);
            prefix.pop();
        }
    }
    let coarse = 20;
    let mut best = (f64::INFINITY, vec![0; k]);
    compositions(coarse, k, &mut Vec::new(), &mut |l| {
        let v = value(l, coarse);
        if v < best.0 {
            best = (v, l.to_vec());
        }
    });
    let mut l: Vec<usize> = best.1.iter().map(|x| x * den / coarse).collect();
    let mut cur = value(&l, den);
    loop {
        let mut improved = false;
        for i in 0..k {
            for j in 0..k {
                if i == j || l[i] == 0 {
                    continue;
                }
                l[i] -= 1;
                l[j] += 1;
                let v = value(&l, den);
                if v < cur - 1e-15 {
                    cur = v;
                    improved = true;
                } else {
                    l[i] += 1;
                    l[j] -= 1;
                }
            }
        }
        if !improved {
            return cur;
        }
    }
}

fn fixture_supports() -> Vec<(String, Vec<DVector<f64>>)> {
    let mut brackets: Vec<(String, Bracket)> = catalog::named_brackets().into_iter().map(|(n, b)| (n.to_string(), b)).collect();
    let mut graphs_: Vec<(String, Graph)> = graphs::FORBIDDEN
        .iter()
        .map(|&(r, s, t)| (format!("G({r},{s},{t})"), graphs::grst(r, s, t).unwrap()))
        .collect();
    graphs_.extend((4..=8).map(|m| (format!("K(1,{m})"), catalog::star_graph(m))));
    graphs_.push(("E6".into(), catalog::e6_graph()));
    graphs_.push(("D5".into(), catalog::d_graph(5)));
    graphs_.push(("P4".into(), catalog::path_graph(4)));
    graphs_.push(("three ends plus arm".into(), catalog::tree_three_plus_arm()));
    graphs_.push(("five ends plus arm".into(), catalog::tree_five_plus_arm()));
    brackets.extend(graphs_.into_iter().map(|(n, g)| (n, graphs::to_bracket(&g, None).unwrap())));
    let mut out = Vec::new();
    for (name, b) in brackets {
        let s = weight_support(&b);
        let pts: Vec<DVector<f64>> = (0..s.len()).map(|i| s.weight_vector(i)).collect();
        if pts.len() <= 6 {
            out.push((name, pts));
        } else {
            for start in 0..=pts.len() - 6 {
                out.push((format!("{name}[{start}..{}]", start + 6), pts[start..start + 6].to_vec()));
            }
        }
    }
    out
}

fn random_supports(rng: &mut ChaCha8Rng, count: usize) -> Vec<(String, Vec<DVector<f64>>)> {
    (0..count)
        .map(|c| {
            let n = rng.gen_range(4..=7);
            let k = rng.gen_range(2..=6);
            let mut keys = Vec::new();
            while keys.len() < k {
                let i = rng.gen_range(1..n);
                let j = rng.gen_range(i + 1..=n);
                let key = bracket::Key::new(i, j, rng.gen_range(1..=n));
                if !keys.contains(&key) {
                    keys.push(key);
                }
            }
            let pts = keys.iter().map(|key| DVector::from_iterator(n, key.weight(n).into_iter().map(|x| x as f64))).collect();
            (format!("random {c}"), pts)
        })
        .collect()
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut supports = fixture_supports();
    let fixtures = supports.len();
    supports.extend(random_supports(&mut rng, 100));
    let mut worst_grid: f64 = 0.0;
    let mut worst_enum: f64 = 0.0;
    for (name, pts) in &supports {
        let w = stratify::mcc(pts).map_err(|e| format!("{name}: {e}"))?;
        let wp = w.point_vector();
        let by_enum = mcc_by_enumeration(pts);
        let by_grid = mcc_by_grid(pts, 200);
        let e = (&wp - &by_enum).norm();
        let g = (by_grid - wp.norm_squared()).abs();
        worst_enum = worst_enum.max(e);
        worst_grid = worst_grid.max(g);
        ensure(e <= 1e-4, || format!("{name}: Wolfe point off the enumeration by {e:e}"))?;
        ensure(g <= 1e-4, || format!("{name}: grid norm off by {g:e}"))?;
    }
    let mu111 = catalog::graded([1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0]);
    let s = weight_support(&mu111);
    let pts: Vec<DVector<f64>> = (0..s.len()).map(|i| s.weight_vector(i)).collect();
    let beta = stratify::mcc(&pts).map_err(|e| e.to_string())?.point_vector();
    let want = DVector::from_iterator(7, (-4..=2).map(|x| x as f64 / 7.0));
    let err = (&beta - &want).amax();
    ensure(err <= 1e-10, || format!("mu_111 mcc {beta:?}"))?;
    Ok(format!(
        "{fixtures} fixture and 100 random supports; worst point gap {worst_enum:.1e}, worst grid norm gap {worst_grid:.1e}; mu_111 error {err:.1e}"
    ))
}

fn random_bracket(rng: &mut ChaCha8Rng, n: usize, entries: usize) -> Bracket {
    let mut b = Bracket::zero(n);
    for _ in 0..entries {
        let i = rng.gen_range(1..n);
        let j = rng.gen_range(i + 1..=n);
        b.set(i, j, rng.gen_range(1..=n), rng.gen_range(-2.0..2.0)).unwrap();
    }
    b
}

/// Two-step bracket `[e_i, e_j] in span(e_{p+1}, ..., e_n)` for `i, j <= p`.
fn random_two_step(rng: &mut ChaCha8Rng, p: usize, n: usize, entries: usize) -> Bracket {
    let mut b = Bracket::zero(n);
    for _ in 0..entries {
        let i = rng.gen_range(1..p);
        let j = rng.gen_range(i + 1..=p);
        b.set(i, j, rng.gen_range(p + 1..=n), rng.gen_range(-2.0..2.0)).unwrap();
    }
    b
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)).qr().q()
}

fn gradient_suite(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    while cases < 100 {
        let b = random_bracket(rng, 5, 6);
        let grad = flow::grad_f(&b).map_err(|e| e.to_string())?;
        if b.len() < 2 || grad.norm() < 1e-3 {
            continue;
        }
        let dir = random_bracket(rng, 5, 6);
        let mut keys: Vec<bracket::Key> = b.keys().chain(dir.keys()).collect();
        keys.sort();
        keys.dedup();
        let (mut diff, mut scale) = (0.0, 0.0);
        for k in keys {
            let e = Bracket::from_entries(5, [(k.i, k.j, k.k, 1.0)]).unwrap();
            let fp = curvature::f_value(&b.add_scaled(&e, eps).unwrap()).map_err(|e| e.to_string())?;
            let fm = curvature::f_value(&b.add_scaled(&e, -eps).unwrap()).map_err(|e| e.to_string())?;
            let fd = (fp - fm) / (2.0 * eps);
            let an = inner(&grad, &e).unwrap();
            diff += (fd - an).powi(2);
            scale += an * an;
        }
        let rel = (diff / scale).sqrt();
        worst = worst.max(rel);
        ensure(rel < 1e-5, || format!("gradient relative error {rel:e} at {b}"))?;
        cases += 1;
    }
    Ok(worst)
}

fn monotonicity_suite(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let opts = FlowOptions { max_time: 5.0, ..FlowOptions::default() };
    let mut samples = 0;
    let mut cases = 0;
    while cases < 100 {
        let b = random_two_step(rng, 4, 6, 4);
        if b.is_empty() {
            continue;
        }
        let traj = flow::integrate(&b, &opts).map_err(|e| e.to_string())?;
        for w in traj.samples.windows(2) {
            ensure(w[1].f_value <= w[0].f_value + 1e-12, || format!("F increases from {} to {} at {b}", w[0].f_value, w[1].f_value))?;
        }
        samples += traj.samples.len();
        cases += 1;
    }
    Ok(samples)
}

fn equivariance_suite(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let b = random_bracket(rng, 5, 6);
        let g = random_orthogonal(rng, 5);
        let lhs = curvature::ricci_operator(&act(&g, &b).map_err(|e| e.to_string())?);
        let rhs = &g * curvature::ricci_operator(&b) * g.transpose();
        let err = (lhs - rhs).norm() / (1.0 + b.norm_sq());
        worst = worst.max(err);
        ensure(err < 1e-10, || format!("Ricci equivariance error {err:e}"))?;
    }
    Ok(worst)
}

fn moment_suite(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    while cases < 100 {
        let b = random_bracket(rng, 5, 6);
        if b.is_empty() {
            continue;
        }
        let a = DMatrix::from_fn(5, 5, |_, _| rng.gen_range(-1.0..1.0));
        let alpha = &a + a.transpose();
        let m = curvature::ricci(&b).map_err(|e| e.to_string())?.moment;
        let lhs = m.dot(&alpha) * b.norm_sq();
        let rhs = inner(&curvature::pi_action(&alpha, &b).map_err(|e| e.to_string())?, &b).unwrap();
        let err = (lhs - rhs).abs() / (1.0 + rhs.abs());
        worst = worst.max(err);
        ensure(err < 1e-9, || format!("moment identity error {err:e}"))?;
        cases += 1;
    }
    Ok(worst)
}

fn jacobi_suite(rng: &mut ChaCha8Rng) -> Result<(usize, usize), String> {
    let (mut lie, mut not_lie) = (0, 0);
    for case in 0..100 {
        let b = if case % 2 == 0 { random_two_step(rng, 3, 6, 5) } else { random_bracket(rng, 5, 4) };
        let g = DMatrix::identity(b.dim(), b.dim()) + DMatrix::from_fn(b.dim(), b.dim(), |_, _| rng.gen_range(-0.3..0.3));
        let moved = act(&g, &b).map_err(|e| e.to_string())?;
        let tol = |x: &Bracket| 1e-9 * (1.0 + x.norm_sq());
        let before = bracket::validate(&b, tol(&b)).jacobi_ok;
        let after = bracket::validate(&moved, tol(&moved)).jacobi_ok;
        ensure(before == after, || format!("Jacobi status changed under GL action: {b}"))?;
        if before {
            lie += 1;
        } else {
            not_lie += 1;
        }
    }
    Ok((lie, not_lie))
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grad = gradient_suite(&mut rng)?;
    let samples = monotonicity_suite(&mut rng)?;
    let equi = equivariance_suite(&mut rng)?;
    let moment = moment_suite(&mut rng)?;
    let (lie, not_lie) = jacobi_suite(&mut rng)?;
    Ok(format!(
        "gradient {grad:.1e}; F monotone over 100 flows ({samples} samples); Ricci equivariance {equi:.1e}; moment identity {moment:.1e}; Jacobi invariance ({lie} Lie, {not_lie} not)"
    ))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "grst weightings", criterion_1),
        (2, "tree weightings", criterion_2),
        (3, "grst exceptions", criterion_3),
        (4, "low-valency trees", criterion_4),
        (5, "chain flow", criterion_5),
        (6, "degenerating flow", criterion_6),
        (7, "critical family", criterion_7),
        (8, "explicit points", criterion_8),
        (9, "degenerations", criterion_9),
        (10, "min-norm oracle", criterion_10),
        (11, "property suites", criterion_11),
    ];
    let mut failed = Vec::new();
    for (n, name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n:>2} {name}: PASS ({secs:.1}s) {detail}"),
            Err(detail) => {
                let known = if KNOWN_FAILURES.contains(&n) { " [known]" } else { "" };
                println!("criterion {n:>2} {name}: FAIL{known} ({secs:.1}s) {detail}");
                failed.push(n);
            }
        }
    }
    if failed == KNOWN_FAILURES {
        println!("acceptance: {} of 11 pass; failures match the known list {KNOWN_FAILURES:?}", 11 - failed.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing {failed:?}, known {KNOWN_FAILURES:?}");
        ExitCode::FAILURE
    }
}
