//! Named brackets and graphs used as fixtures by the tests, the CLI and the
//! acceptance suite.

use crate::bracket::Bracket;
use crate::error::{Error, Result};
use crate::graphs::Graph;

/// Keys of the graded 7-dimensional family, in tuple order:
/// `a12, a13, a14, a15, a16, a23, a24, a25, a34` with `[e_i, e_j] = a_ij e_{i+j}`.
pub const GRADED_KEYS: [(usize, usize); 9] = [(1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (2, 3), (2, 4), (2, 5), (3, 4)];

pub fn heisenberg() -> Bracket {
    Bracket::from_entries(3, [(1, 2, 3, 1.0)]).expect("valid")
}

/// Bracket on R^7 from a graded 9-tuple; zeros are skipped.
pub fn graded(a: [f64; 9]) -> Bracket {
    Bracket::from_entries(7, GRADED_KEYS.iter().zip(a).map(|(&(i, j), c)| (i, j, i + j, c))).expect("valid keys")
}

fn with_extra(mut b: Bracket, extra: &[(usize, usize, usize, f64)]) -> Bracket {
    for &(i, j, k, c) in extra {
        b.set(i, j, k, c).expect("valid key");
    }
    b
}

pub fn mu1() -> Bracket {
    graded([1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0])
}

/// As printed this tuple violates Jacobi (`a15 a23 = a13 a24` fails); only
/// its weights are used.
pub fn mu2() -> Bracket {
    graded([1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0])
}

pub fn mu3() -> Bracket {
    with_extra(mu1(), &[(2, 3, 7, 1.0)])
}

pub fn mu4() -> Bracket {
    with_extra(mu1(), &[(2, 3, 6, 1.0), (2, 4, 7, 1.0)])
}

/// `(1, ..., 1, t, 1 - t)`.
pub fn lambda(t: f64) -> Bracket {
    graded([1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, t, 1.0 - t])
}

pub fn mu1_prime() -> Bracket {
    let r = f64::sqrt;
    graded([r(5.0), r(8.0), 3.0, r(8.0), r(5.0), 0.0, 0.0, 0.0, 0.0])
}

pub fn mu3_prime() -> Bracket {
    let r = f64::sqrt;
    with_extra(graded([r(5.0), r(5.0), 3.0, r(8.0), r(2.0), 0.0, 0.0, 0.0, 0.0]), &[(2, 3, 7, 3.0)])
}

pub fn mu4_prime() -> Bracket {
    let r = f64::sqrt;
    with_extra(
        graded([r(10.0), r(21.0), r(18.0), 4.0, r(18.0), 0.0, 0.0, 0.0, 0.0]),
        &[(2, 3, 6, r(21.0)), (2, 4, 7, r(18.0))],
    )
}

/// Squared entries of the critical family, in tuple order.
pub fn critical_squares(a: f64, b: f64, c: f64) -> [f64; 9] {
    let d = 3.0 - a - b - c;
    [a, 2.0 - b, d, b, b + c - 1.0, b, c, d, a]
}

/// The critical family with the given signs on the `a25` and `a34` entries
/// and positive roots elsewhere.
pub fn critical(a: f64, b: f64, c: f64, sign25: f64, sign34: f64) -> Result<Bracket> {
    let sq = critical_squares(a, b, c);
    if let Some(p) = sq.iter().position(|x| *x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidBracket(format!("entry {} of the tuple is the root of {}", p + 1, sq[p])));
    }
    let mut t = sq.map(f64::sqrt);
    t[7] *= sign25.signum();
    t[8] *= sign34.signum();
    Ok(graded(t))
}

/// A point of the critical family that also satisfies Jacobi. `branch`
/// selects the one-parameter piece: 0 is `b = c = 1` with `a = s`, and 1, 2
/// are the pieces with `c = b^2 / (2 - b)`, `b = s`, `2/3 < b < 1`.
pub fn critical_jacobi(branch: u8, s: f64) -> Result<Bracket> {
    match branch {
        0 => critical(s, 1.0, 1.0, 1.0, 1.0),
        1 | 2 => {
            let b = s;
            let c = b * b / (2.0 - b);
            let root = b * (3.0 * b - 2.0).sqrt();
            if branch == 1 {
                critical((6.0 - 5.0 * b - root) / (2.0 * (2.0 - b)), b, c, 1.0, -1.0)
            } else {
                critical((6.0 - 5.0 * b + root) / (2.0 * (2.0 - b)), b, c, -1.0, 1.0)
            }
        }
        _ => Err(Error::InvalidBracket(format!("no branch {branch}"))),
    }
}

/// Starting point of the flow that stays in its orbit.
pub fn flow_chain() -> Bracket {
    let s = (2.0f64 / 3.0).sqrt();
    Bracket::from_entries(7, [(1, 2, 5, s), (2, 3, 6, s), (3, 4, 7, s)]).expect("valid")
}

/// Starting point of the flow that degenerates.
pub fn flow_degenerating() -> Bracket {
    let s = (2.0f64 / 5.0).sqrt();
    Bracket::from_entries(11, [(1, 2, 7, s), (1, 3, 8, s), (1, 4, 9, s), (2, 5, 10, s), (2, 6, 11, s)]).expect("valid")
}

pub fn path_graph(vertices: usize) -> Graph {
    Graph::new(vertices, (1..vertices).map(|i| (i, i + 1))).expect("simple")
}

pub fn star_graph(m: usize) -> Graph {
    Graph::new(m + 1, (2..=m + 1).map(|v| (1, v))).expect("simple")
}

/// `D_p`: a path on `p - 1` vertices with an extra leaf at the second vertex.
pub fn d_graph(p: usize) -> Graph {
    assert!(p >= 4);
    let mut e: Vec<(usize, usize)> = (1..p - 1).map(|i| (i, i + 1)).collect();
    e.push((2, p));
    Graph::new(p, e).expect("simple")
}

/// `E_6`: arms of lengths 1, 2, 2 from a trivalent vertex.
pub fn e6_graph() -> Graph {
    Graph::new(6, [(1, 2), (2, 3), (3, 4), (4, 5), (3, 6)]).expect("simple")
}

/// Three end edges and a two-edge arm at one vertex.
pub fn tree_three_plus_arm() -> Graph {
    Graph::new(6, [(1, 2), (1, 3), (1, 4), (1, 5), (5, 6)]).expect("simple")
}

/// Five end edges and a three-edge arm at one vertex.
pub fn tree_five_plus_arm() -> Graph {
    Graph::new(9, [(1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (1, 7), (7, 8), (8, 9)]).expect("simple")
}

/// Every named bracket, for batch runs and round-trip tests.
pub fn named_brackets() -> Vec<(&'static str, Bracket)> {
    vec![
        ("heisenberg", heisenberg()),
        ("mu1", mu1()),
        ("mu2", mu2()),
        ("mu3", mu3()),
        ("mu4", mu4()),
        ("lambda0", lambda(0.0)),
        ("lambda1", lambda(1.0)),
        ("mu1_prime", mu1_prime()),
        ("mu3_prime", mu3_prime()),
        ("mu4_prime", mu4_prime()),
        ("flow_chain", flow_chain()),
        ("flow_degenerating", flow_degenerating()),
    ]
}
