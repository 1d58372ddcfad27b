//! JSON documents for brackets, graphs and batch manifests, plus the plain
//! edge-list format.
//!
//! Every JSON document carries a `"kind"` field. Coefficients are JSON
//! numbers or strings in a small grammar: an optional sign, then a rational
//! `p` or `p/q`, optionally times `sqrt(r)` (or just `sqrt(r)`), e.g. `"2/3"`,
//! `"-sqrt(2/5)"`, `"3*sqrt(2)"`. Strings are kept verbatim (after
//! canonicalization) so documents round-trip exactly.

use std::fmt;
use std::path::PathBuf;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::bracket::Bracket;
use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::rational::Q;

/// A coefficient resolved to binary64. `exact` says whether the float is
/// the exact value of the source.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub value: f64,
    pub exact: bool,
    /// Canonical source text when given as a string.
    pub text: Option<String>,
}

impl Coefficient {
    pub fn float(value: f64) -> Self {
        Coefficient { value, exact: true, text: None }
    }

    /// Parses the string grammar.
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(&t)),
        };
        if body.is_empty() {
            return Err(format!("empty coefficient {s:?}"));
        }
        let (factor, radicand) = if let Some(inner) = body.strip_prefix("sqrt(") {
            (Q::one(), Some(inner))
        } else if let Some(pos) = body.find("*sqrt(") {
            (parse_rational(&body[..pos])?, Some(&body[pos + 6..]))
        } else {
            (parse_rational(body)?, None)
        };
        let radicand = match radicand {
            Some(r) => {
                let r = r.strip_suffix(')').ok_or_else(|| format!("unclosed sqrt in {s:?}"))?;
                let q = parse_rational(r)?;
                if q.is_negative() {
                    return Err(format!("negative radicand in {s:?}"));
                }
                Some(q)
            }
            None => None,
        };
        let factor = if neg { -factor } else { factor };
        // Fold a perfect-square radicand into the factor.
        let (factor, radicand) = match radicand {
            Some(r) => match rational_sqrt(&r) {
                Some(root) => (factor * root, None),
                None => (factor, Some(r)),
            },
            None => (factor, None),
        };
        let f = q_to_f64(&factor);
        let (value, exact) = match &radicand {
            None => (f, q_exact(&factor)),
            Some(r) => (f * q_to_f64(r).sqrt(), false),
        };
        if !value.is_finite() {
            return Err(format!("coefficient {s:?} is not finite in binary64"));
        }
        let text = match &radicand {
            None => factor.to_string(),
            Some(r) if factor.is_one() => format!("sqrt({r})"),
            Some(r) if factor == -Q::one() => format!("-sqrt({r})"),
            Some(r) => format!("{factor}*sqrt({r})"),
        };
        Ok(Coefficient { value, exact, text: Some(text) })
    }
}

fn parse_rational(s: &str) -> std::result::Result<Q, String> {
    let int = |x: &str| -> std::result::Result<BigInt, String> {
        if x.is_empty() || !x.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("expected digits, found {x:?}"));
        }
        x.parse::<BigInt>().map_err(|e| e.to_string())
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let d = int(q)?;
            if d.is_zero() {
                return Err("zero denominator".into());
            }
            Ok(Q::new(int(p)?, d))
        }
        None => Ok(Q::from_integer(int(s)?)),
    }
}

fn rational_sqrt(q: &Q) -> Option<Q> {
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| Q::new(n, d))
}

fn q_to_f64(q: &Q) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.abs() < 9.0e15 && d < 9.0e15 => n / d,
        _ => crate::rational::to_f64(q),
    }
}

/// Whether the binary64 value of `q` is exact: a power-of-two denominator
/// and a numerator of at most 53 significant bits.
fn q_exact(q: &Q) -> bool {
    let d = q.denom();
    let pow2 = (d & (d - BigInt::one())).is_zero();
    let mut n = q.numer().abs();
    while !n.is_zero() && (&n % 2u32).is_zero() {
        n /= 2u32;
    }
    pow2 && n.bits() <= 53 && q_to_f64(q).is_finite()
}

impl Serialize for Coefficient {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match &self.text {
            Some(t) => s.serialize_str(t),
            None => s.serialize_f64(self.value),
        }
    }
}

impl<'de> Deserialize<'de> for Coefficient {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Coefficient;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a coefficient string such as \"2/3\" or \"sqrt(5)\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Coefficient, E> {
                Ok(Coefficient::float(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Coefficient, E> {
                Ok(Coefficient::float(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Coefficient, E> {
                Ok(Coefficient::float(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Coefficient, E> {
                Coefficient::parse(v).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: Coefficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketDocument {
    pub dim: usize,
    pub entries: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl BracketDocument {
    pub fn to_bracket(&self) -> Result<Bracket> {
        let mut seen = std::collections::BTreeSet::new();
        for e in &self.entries {
            if !seen.insert((e.i.min(e.j), e.i.max(e.j), e.k)) {
                return Err(Error::DuplicateKey { i: e.i, j: e.j, k: e.k });
            }
        }
        Bracket::from_entries(self.dim, self.entries.iter().map(|e| (e.i, e.j, e.k, e.c.value)))
    }

    /// Float document of a bracket, entries in key order.
    pub fn from_bracket(b: &Bracket, name: Option<&str>) -> Self {
        BracketDocument {
            dim: b.dim(),
            entries: b.entries().map(|(k, c)| Entry { i: k.i, j: k.j, k: k.k, c: Coefficient::float(c) }).collect(),
            name: name.map(str::to_owned),
            source: None,
        }
    }

    /// Whether every coefficient was resolved exactly.
    pub fn is_exact(&self) -> bool {
        self.entries.iter().all(|e| e.c.exact)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl GraphDocument {
    pub fn to_graph(&self) -> Result<Graph> {
        let g = Graph::new(self.vertices, self.edges.iter().copied())?;
        match &self.labels {
            Some(l) => g.with_labels(l.clone()),
            None => Ok(g),
        }
    }

    pub fn from_graph(g: &Graph, name: Option<&str>) -> Self {
        GraphDocument {
            vertices: g.vertex_count(),
            edges: g.edges().to_vec(),
            labels: g.labels().map(<[String]>::to_vec),
            name: name.map(str::to_owned),
        }
    }
}

/// One batch item: an input file or a generated graph, and what to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestItem {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grst: Option<(usize, usize, usize)>,
    pub task: Task,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Analyze,
    Flow,
    Positivity,
    Weighting,
    Soliton,
    Witness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub items: Vec<ManifestItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Document {
    Bracket(BracketDocument),
    Graph(GraphDocument),
    Manifest(Manifest),
}

impl Document {
    /// Reads the `kind` first, then the body as the concrete type so that
    /// errors keep their line and column.
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Head {
            kind: String,
        }
        let head: Head = from_json(text)?;
        match head.kind.as_str() {
            "bracket" => from_json(text).map(Document::Bracket),
            "graph" => from_json(text).map(Document::Graph),
            "manifest" => from_json(text).map(Document::Manifest),
            other => Err(Error::Parse {
                line: 1,
                column: 1,
                message: format!("unknown document kind {other:?}; expected bracket, graph or manifest"),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), column: e.column(), message: e.to_string() })
}

/// Edge-list text: one `u v` pair per line, 1-based. Blank lines and `#`
/// comments are ignored. An optional `p N` line fixes the vertex count;
/// otherwise it is the largest index used.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut declared = None;
    let mut edges = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let fields: Vec<(usize, &str)> = line
            .split_whitespace()
            .map(|f| (f.as_ptr() as usize - raw.as_ptr() as usize + 1, f))
            .collect();
        let err = |column: usize, message: String| Error::Parse { line: n + 1, column, message };
        let number = |(col, f): (usize, &str)| f.parse::<usize>().map_err(|_| err(col, format!("expected a vertex index, found {f:?}")));
        match fields.as_slice() {
            [] => {}
            [(_, "p"), v] => {
                if declared.is_some() || !edges.is_empty() {
                    return Err(err(1, "the `p` line must come first".into()));
                }
                declared = Some(number(*v)?);
            }
            [u, v] => {
                let (a, b) = (number(*u)?, number(*v)?);
                if a == 0 || b == 0 {
                    return Err(err(if a == 0 { u.0 } else { v.0 }, "vertices are 1-based".into()));
                }
                edges.push((a, b));
            }
            [_, _, extra, ..] => return Err(err(extra.0, "expected two fields".into())),
            [only] => return Err(err(only.0, "expected two fields".into())),
        }
    }
    let max = edges.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0);
    let p = declared.unwrap_or(max);
    if p < max {
        return Err(Error::Graph(format!("vertex {max} exceeds declared count {p}")));
    }
    Graph::new(p, edges)
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut s = format!("p {}\n", g.vertex_count());
    for (u, v) in g.edges() {
        s.push_str(&format!("{u} {v}\n"));
    }
    s
}

/// Reads a graph from either a JSON graph document or an edge list.
pub fn parse_graph(text: &str) -> Result<Graph> {
    if text.trim_start().starts_with('{') {
        match Document::parse(text)? {
            Document::Graph(g) => g.to_graph(),
            _ => Err(Error::Parse { line: 1, column: 1, message: "expected a graph document".into() }),
        }
    } else {
        parse_edge_list(text)
    }
}
