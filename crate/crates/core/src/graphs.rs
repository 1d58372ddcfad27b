//! Two-step brackets attached to graphs, and the exact positivity test.
//!
//! A graph with vertices `1..=p` and edges `l_1..l_q` gives the bracket
//! `[e_i, e_j] = a_k e_{p+k}` for `l_k = v_i v_j`. Its weight Gram matrix is
//! `3I + Adj L(G)`, which is positive definite, so the weighting
//! `(3I + Adj L(G)) c = nu [1]` always exists and is unique. Everything here
//! is exact.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::bracket::Bracket;
use crate::error::{Error, Result};
use crate::rational::{self, Q};
use crate::soliton::{self, PayneOutcome};

/// Simple undirected graph. Edge order is the input order and indexes
/// weightings and bracket coordinates downstream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Graph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl Graph {
    /// Edges are 1-based unordered pairs; each is stored with the smaller
    /// endpoint first.
    pub fn new(vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut list = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::Graph(format!("loop at vertex {u}")));
            }
            if u == 0 || v == 0 || u > vertices || v > vertices {
                return Err(Error::Graph(format!("edge ({u},{v}) out of range 1..={vertices}")));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(Error::Graph(format!("duplicate edge ({},{})", e.0, e.1)));
            }
            list.push(e);
        }
        Ok(Graph { vertices, edges: list, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.vertices {
            return Err(Error::Graph(format!("{} labels for {} vertices", labels.len(), self.vertices)));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|(a, b)| *a == v || *b == v).count()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Isolated vertices, 1-based.
    pub fn isolated(&self) -> Vec<usize> {
        (1..=self.vertices).filter(|&v| self.degree(v) == 0).collect()
    }

    /// Copy without isolated vertices, renumbered in order; edge order kept.
    pub fn without_isolated(&self) -> Graph {
        let keep: Vec<usize> = (1..=self.vertices).filter(|&v| self.degree(v) > 0).collect();
        let index: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i + 1)).collect();
        let labels = self.labels.as_ref().map(|l| keep.iter().map(|&v| l[v - 1].clone()).collect());
        Graph {
            vertices: keep.len(),
            edges: self.edges.iter().map(|&(a, b)| (index[&a], index[&b])).collect(),
            labels,
        }
    }

    pub fn is_tree(&self) -> bool {
        if self.vertices == 0 || self.edges.len() + 1 != self.vertices {
            return false;
        }
        let mut seen = vec![false; self.vertices + 1];
        let mut stack = vec![1];
        seen[1] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.vertices
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "graph p={} q={}:", self.vertices, self.edges.len())?;
        for (u, v) in &self.edges {
            write!(f, " {u}-{v}")?;
        }
        Ok(())
    }
}

/// Vertex `k` of the line graph is edge `l_k` (1-based).
pub fn line_graph(g: &Graph) -> Graph {
    let q = g.edges.len();
    let mut edges = Vec::new();
    for a in 0..q {
        for b in a + 1..q {
            if adjacent(g.edges[a], g.edges[b]) {
                edges.push((a + 1, b + 1));
            }
        }
    }
    Graph { vertices: q, edges, labels: None }
}

fn adjacent(a: (usize, usize), b: (usize, usize)) -> bool {
    a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1
}

/// `3I + Adj L(G)`.
pub fn payne_graph_matrix(g: &Graph) -> Vec<Vec<i64>> {
    let q = g.edges.len();
    (0..q)
        .map(|a| {
            (0..q)
                .map(|b| {
                    if a == b {
                        3
                    } else if adjacent(g.edges[a], g.edges[b]) {
                        1
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect()
}

/// Exact solution of `(3I + Adj L(G)) c = nu [1]`, in edge order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Weighting {
    /// Solution with `nu = 1`.
    #[serde(serialize_with = "crate::report::ser_rationals")]
    pub nu_one: Vec<Q>,
    /// Same direction scaled to coprime integers.
    #[serde(serialize_with = "crate::report::ser_bigints")]
    pub integer: Vec<BigInt>,
    /// `nu` for the integer normalization.
    #[serde(serialize_with = "crate::report::ser_bigint")]
    pub nu_int: BigInt,
}

impl Weighting {
    /// Rescaled so the entries sum to 1, with the matching `nu`.
    pub fn sum_one(&self) -> (Vec<Q>, Q) {
        let total: Q = self.nu_one.iter().fold(Q::zero(), |a, b| a + b);
        (self.nu_one.iter().map(|c| c / &total).collect(), Q::one() / total)
    }

    pub fn is_positive(&self) -> bool {
        self.integer.iter().all(Signed::is_positive)
    }

    /// Edge indices (0-based) with a weight `<= 0`.
    pub fn nonpositive(&self) -> Vec<usize> {
        self.integer.iter().enumerate().filter(|(_, c)| !c.is_positive()).map(|(i, _)| i).collect()
    }
}

pub fn weighting(g: &Graph) -> Result<Weighting> {
    let q = g.edges.len();
    if q == 0 {
        return Err(Error::Graph("graph has no edges".into()));
    }
    let u: Vec<Vec<BigInt>> = payne_graph_matrix(g).into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect();
    let nu_one = rational::bareiss_solve(&u, &vec![BigInt::one(); q])?;
    let (integer, scale) = rational::primitive_integer_vector(&nu_one);
    debug_assert!(scale.is_integer());
    Ok(Weighting { nu_one, integer, nu_int: scale.to_integer() })
}

/// All weights strictly positive, decided exactly.
pub fn is_positive(g: &Graph) -> Result<bool> {
    Ok(weighting(g)?.is_positive())
}

fn check_grst(r: usize, s: usize, t: usize) -> Result<()> {
    if r < s || (s == 0 && t == 0) {
        return Err(Error::GrstParameters { r, s, t });
    }
    Ok(())
}

/// `G_{r,s,t}`: central edge `1-2`, then `r` end edges at 1, `s` at 2, and
/// `t` triangles over the central edge. Edge order: central, end edges at 1,
/// end edges at 2, then `(1, x), (2, x)` for each apex `x`.
pub fn grst(r: usize, s: usize, t: usize) -> Result<Graph> {
    check_grst(r, s, t)?;
    let p = r + s + t + 2;
    let mut edges = vec![(1, 2)];
    edges.extend((0..r).map(|i| (1, 3 + i)));
    edges.extend((0..s).map(|i| (2, 3 + r + i)));
    for i in 0..t {
        let x = 3 + r + s + i;
        edges.push((1, x));
        edges.push((2, x));
    }
    Graph::new(p, edges)
}

/// Closed-form positivity of `G_{r,s,t}`.
pub fn grst_is_positive(r: usize, s: usize, t: usize) -> Result<bool> {
    check_grst(r, s, t)?;
    let not_positive = r * s >= 4
        || t >= 3
        || (t >= 1 && 2 * t + r >= 6)
        || (r >= 2 && s >= 1 && t >= 1)
        || (s >= 1 && t >= 2);
    Ok(!not_positive)
}

/// The configurations whose faithful presence rules out positivity.
pub const FORBIDDEN: [(usize, usize, usize); 7] =
    [(2, 2, 0), (0, 0, 3), (2, 1, 1), (4, 1, 0), (2, 0, 2), (4, 0, 1), (1, 1, 2)];

/// Faithful copy of `G_{r,s,t}` inside a graph, 1-based vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub config: (usize, usize, usize),
    pub central: (usize, usize),
    pub ends_first: Vec<usize>,
    pub ends_second: Vec<usize>,
    pub apexes: Vec<usize>,
}

impl Witness {
    /// Edge indices (0-based) of the copy, in `grst` order.
    pub fn edge_indices(&self, g: &Graph) -> Vec<usize> {
        let (v, w) = self.central;
        let idx = |a: usize, b: usize| g.edges.iter().position(|&e| e == (a.min(b), a.max(b))).expect("edge of the copy");
        let mut out = vec![idx(v, w)];
        out.extend(self.ends_first.iter().map(|&x| idx(v, x)));
        out.extend(self.ends_second.iter().map(|&x| idx(w, x)));
        for &x in &self.apexes {
            out.push(idx(v, x));
            out.push(idx(w, x));
        }
        out
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (r, s, t) = self.config;
        write!(f, "G({r},{s},{t}) on central edge {}-{}", self.central.0, self.central.1)
    }
}

/// Searches the configurations in order, trying every edge in both
/// orientations as the central edge. The end vertices must have valency 1
/// and the apexes valency 2 in `g`.
pub fn forbidden_witness(g: &Graph) -> Option<Witness> {
    let deg: Vec<usize> = (0..=g.vertices).map(|v| if v == 0 { 0 } else { g.degree(v) }).collect();
    let nbrs: Vec<Vec<usize>> = (0..=g.vertices).map(|v| if v == 0 { Vec::new() } else { g.neighbors(v) }).collect();
    for &(r, s, t) in &FORBIDDEN {
        for &(a, b) in &g.edges {
            // Valency pruning: the central edge needs r + t and s + t other
            // neighbours at its ends.
            for (v, w) in [(a, b), (b, a)] {
                if deg[v] < r + t + 1 || deg[w] < s + t + 1 {
                    continue;
                }
                let ends = |x: usize, other: usize| -> Vec<usize> {
                    nbrs[x].iter().copied().filter(|&y| y != other && deg[y] == 1).collect()
                };
                let ends_v = ends(v, w);
                let ends_w = ends(w, v);
                let apexes: Vec<usize> = nbrs[v].iter().copied().filter(|&y| deg[y] == 2 && nbrs[w].contains(&y)).collect();
                if ends_v.len() >= r && ends_w.len() >= s && apexes.len() >= t {
                    return Some(Witness {
                        config: (r, s, t),
                        central: (v, w),
                        ends_first: ends_v[..r].to_vec(),
                        ends_second: ends_w[..s].to_vec(),
                        apexes: apexes[..t].to_vec(),
                    });
                }
            }
        }
    }
    None
}

/// Tree whose edges each meet at most three others.
pub fn tree_valency_hypothesis(g: &Graph) -> bool {
    g.is_tree() && g.edges.iter().all(|&(u, v)| g.degree(u) + g.degree(v) - 2 <= 3)
}

/// `[e_i, e_j] = a_k e_{p+k}` for `l_k = v_i v_j`, `i < j`; unit
/// coefficients by default.
pub fn to_bracket(g: &Graph, coefficients: Option<&[f64]>) -> Result<Bracket> {
    let q = g.edges.len();
    if let Some(c) = coefficients {
        if c.len() != q {
            return Err(Error::CoefficientCount { expected: q, got: c.len() });
        }
    }
    let p = g.vertices;
    Bracket::from_entries(
        p + q,
        g.edges.iter().enumerate().map(|(k, &(i, j))| (i, j, p + k + 1, coefficients.map_or(1.0, |c| c[k]))),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphVerdict {
    pub positive: bool,
    /// Isolated vertices removed before the analysis (1-based, original
    /// numbering).
    pub stripped: Vec<usize>,
    pub weighting: Weighting,
    /// Edges with a weight `<= 0`.
    pub nonpositive: Vec<usize>,
    pub witness: Option<Witness>,
    #[serde(skip)]
    pub soliton: Option<Bracket>,
    pub payne: Option<PayneOutcome>,
}

/// Decides whether the graph's bracket is an Einstein nilradical and, if
/// so, builds the nilsoliton from the square roots of the weighting.
pub fn graph_einstein_nilradical(g: &Graph) -> Result<GraphVerdict> {
    let stripped = g.isolated();
    let h = g.without_isolated();
    let w = weighting(&h)?;
    let positive = w.is_positive();
    let (soliton, payne) = if positive {
        let coeffs: Vec<f64> = w.nu_one.iter().map(|c| rational::to_f64(c).sqrt()).collect();
        let b = to_bracket(&h, Some(&coeffs))?;
        let outcome = soliton::payne_test(&b, 1e-10)?;
        (Some(b), Some(outcome))
    } else {
        (None, None)
    };
    Ok(GraphVerdict {
        positive,
        stripped,
        nonpositive: w.nonpositive(),
        witness: if positive { None } else { forbidden_witness(&h) },
        weighting: w,
        soliton,
        payne,
    })
}

/// Exact check of the soliton condition on the rational squares of a
/// graph bracket.
pub fn graph_payne_exact(g: &Graph, squares: &[Q]) -> Result<Option<Q>> {
    if squares.len() != g.edges.len() {
        return Err(Error::CoefficientCount { expected: g.edges.len(), got: squares.len() });
    }
    let u = payne_graph_matrix(g);
    let um: Vec<Q> = u
        .iter()
        .map(|row| row.iter().zip(squares).fold(Q::zero(), |acc, (x, m)| acc + rational::qi(*x) * m))
        .collect();
    Ok(um.iter().all(|x| *x == um[0]).then(|| um[0].clone()))
}

/// Canonical string of a free tree: the nested-parenthesis encoding rooted
/// at the centre (the smaller one when there are two).
fn tree_code(n: usize, adj: &[Vec<usize>]) -> String {
    fn encode(v: usize, parent: usize, adj: &[Vec<usize>]) -> String {
        let mut parts: Vec<String> = adj[v].iter().filter(|&&w| w != parent).map(|&w| encode(w, v, adj)).collect();
        parts.sort();
        format!("({})", parts.concat())
    }
    if n == 1 {
        return "()".into();
    }
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut removed = vec![false; n];
    let mut layer: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
    let mut left = n;
    while left > 2 {
        let mut next = Vec::new();
        for &v in &layer {
            removed[v] = true;
            left -= 1;
            for &w in &adj[v] {
                if !removed[w] {
                    deg[w] -= 1;
                    if deg[w] == 1 {
                        next.push(w);
                    }
                }
            }
        }
        layer = next;
    }
    let centers: Vec<usize> = (0..n).filter(|&v| !removed[v]).collect();
    centers.iter().map(|&c| encode(c, usize::MAX, adj)).min().expect("a tree has a centre")
}

/// All trees with exactly `q` edges up to isomorphism, in a fixed order.
pub fn trees_with_edges(q: usize) -> Vec<Graph> {
    let mut level: BTreeMap<String, Vec<Vec<usize>>> = BTreeMap::new();
    level.insert("()".into(), vec![Vec::new()]);
    for n in 1..=q {
        let mut next = BTreeMap::new();
        for adj in level.values() {
            for v in 0..n {
                let mut a = adj.clone();
                a.push(vec![v]);
                a[v].push(n);
                next.entry(tree_code(n + 1, &a)).or_insert(a);
            }
        }
        level = next;
    }
    level
        .values()
        .map(|adj| {
            let edges = adj.iter().enumerate().flat_map(|(v, ns)| ns.iter().filter(move |&&w| w > v).map(move |&w| (v + 1, w + 1)));
            Graph::new(adj.len(), edges.collect::<Vec<_>>()).expect("tree is simple")
        })
        .collect()
}

/// Integer weighting as plain `i64` when it fits; convenient for display.
pub fn small_integers(v: &[BigInt]) -> Option<Vec<i64>> {
    v.iter().map(ToPrimitive::to_i64).collect()
}
