//! Serialization helpers and the run report shared by the command line
//! and batch runner.

use std::fmt;

use nalgebra::DMatrix;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::bracket::{Key, ValidationReport};
use crate::curvature::RicciData;
use crate::doc::{BracketDocument, GraphDocument};
use crate::flow::{LimitClassification, LimitEvidence};
use crate::graphs::{Weighting, Witness};
use crate::rational::Q;
use crate::soliton::{PayneOutcome, SolitonReport, TypeStatus};
use crate::stratify::StratumReport;

/// Serializes a matrix as a list of rows.
pub fn ser_matrix<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for r in 0..m.nrows() {
        let row: Vec<f64> = m.row(r).iter().copied().collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

/// Exact rationals are written as strings `"p/q"` (or `"p"`).
pub fn ser_rational<S: Serializer>(x: &crate::rational::Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn ser_rationals<S: Serializer>(v: &[crate::rational::Q], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

/// Big integers are written as strings so no precision is lost.
pub fn ser_bigint<S: Serializer>(x: &num_bigint::BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn ser_bigints<S: Serializer>(v: &[num_bigint::BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

/// Compact decimal for text reports: integers print without a fraction,
/// everything else with ten significant digits.
pub fn real(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == x.round() && x.abs() < 1e15 {
        return format!("{}", x as i64);
    }
    let s = format!("{:.10e}", x);
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("exponent");
    let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
    if (-4..10).contains(&exp) {
        let v: f64 = format!("{mantissa}e{exp}").parse().expect("round trip");
        let digits = (9 - exp).max(0) as usize;
        let t = format!("{v:.digits$}");
        t.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        format!("{mantissa}e{exp}")
    }
}

/// Results for a list of inputs, in input order.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub items: Vec<ItemReport>,
}

impl RunReport {
    /// Largest item exit code, 0 for an empty report.
    pub fn exit_code(&self) -> i32 {
        self.items.iter().map(|i| i.exit_code).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, item) in self.items.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemReport {
    pub input: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub sections: Vec<Section>,
}

impl ItemReport {
    pub fn ok(input: impl Into<String>, sections: Vec<Section>) -> Self {
        ItemReport { input: input.into(), exit_code: 0, error: None, sections }
    }

    pub fn failed(input: impl Into<String>, exit_code: i32, error: impl Into<String>, sections: Vec<Section>) -> Self {
        ItemReport { input: input.into(), exit_code, error: Some(error.into()), sections }
    }
}

impl fmt::Display for ItemReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "== {}", self.input)?;
        for s in &self.sections {
            write!(f, "{s}")?;
        }
        if let Some(e) = &self.error {
            writeln!(f, "error (exit {}): {e}", self.exit_code)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "section", rename_all = "lowercase")]
pub enum Section {
    Validation(ValidationReport),
    Ricci(RicciData),
    Soliton(SolitonSection),
    Stratum(StratumReport),
    Flow(FlowSummary),
    Graph(GraphSection),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolitonSection {
    pub soliton: SolitonReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payne: Option<PayneOutcome>,
    pub f_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: f64,
    pub structural_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSummary {
    pub converged: bool,
    pub already_critical: bool,
    pub steps: usize,
    pub rejected: usize,
    pub final_time: f64,
    pub final_grad_norm: f64,
    pub f_limit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stiff_switch: Option<f64>,
    pub limit: Vec<LimitEntry>,
    pub classification: LimitClassification,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

impl FlowSummary {
    /// One-line reading of the limit evidence.
    pub fn evidence_text(&self) -> String {
        let c = &self.classification;
        match c.evidence {
            LimitEvidence::SameOrbit => "same discrete invariants (consistent with the orbit, not a proof)".into(),
            LimitEvidence::Degeneration => {
                let mut diffs = Vec::new();
                if c.start.derived_dim != c.limit.derived_dim {
                    diffs.push(format!("derived dim {}\u{2192}{}", c.start.derived_dim, c.limit.derived_dim));
                }
                if c.start.center_dim != c.limit.center_dim {
                    diffs.push(format!("center dim {}\u{2192}{}", c.start.center_dim, c.limit.center_dim));
                }
                if c.start.central_series != c.limit.central_series {
                    diffs.push(format!("central series {:?}\u{2192}{:?}", c.start.central_series, c.limit.central_series));
                }
                format!("proper degeneration: {}", diffs.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum GraphSection {
    Positivity {
        edges: Vec<(usize, usize)>,
        positive: bool,
        verdict: String,
        /// Edge indices (0-based) with a weight `<= 0`.
        nonpositive: Vec<usize>,
    },
    Weighting {
        edges: Vec<(usize, usize)>,
        weighting: Weighting,
        #[serde(serialize_with = "ser_rationals")]
        sum_one: Vec<Q>,
        #[serde(serialize_with = "ser_rational")]
        sum_one_nu: Q,
    },
    Soliton {
        positive: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        document: Option<BracketDocument>,
        #[serde(skip_serializing_if = "Option::is_none")]
        payne: Option<PayneOutcome>,
        nonpositive: Vec<usize>,
    },
    Witness {
        witness: Option<Witness>,
        edge_indices: Vec<usize>,
    },
    Grst {
        parameters: (usize, usize, usize),
        graph: GraphDocument,
        closed_form_positive: bool,
    },
}

fn list<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn edge_list(e: &[(usize, usize)]) -> String {
    e.iter().map(|(u, v)| format!("{u}-{v}")).collect::<Vec<_>>().join(" ")
}

/// `positive`, or the reason it is not.
pub fn positivity_text(integer_weights: &[num_bigint::BigInt]) -> String {
    use num_traits::Signed;
    if integer_weights.iter().all(Signed::is_positive) {
        "positive".into()
    } else if integer_weights.iter().any(Signed::is_negative) {
        "not positive (negative weight)".into()
    } else {
        "not positive (zero weight)".into()
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Section::Validation(v) => {
                let jac = if v.jacobi_ok { "Jacobi ok" } else { "Jacobi fails" };
                let nil = match v.step {
                    Some(s) if v.nilpotent => format!("nilpotent, step {s}"),
                    _ => "not nilpotent".into(),
                };
                writeln!(
                    f,
                    "validation: {jac} (defect {}), {nil}, central series [{}]",
                    real(v.jacobi_defect),
                    list(&v.central_series)
                )
            }
            Section::Ricci(r) => {
                let diag: Vec<String> = r.ric.diagonal().iter().map(|x| real(*x)).collect();
                writeln!(f, "ricci: scalar curvature {}, F = {}", real(r.scalar_curv), real(r.f_value))?;
                writeln!(f, "ricci diagonal: [{}]", diag.join(", "))
            }
            Section::Soliton(s) => {
                let r = &s.soliton;
                if r.is_einstein {
                    writeln!(f, "verdict: Einstein, F = {}", real(s.f_value))?;
                    match &r.eigenvalue_type {
                        TypeStatus::Found(t) => writeln!(f, "soliton: Einstein, eigenvalue type {t}")?,
                        TypeStatus::Degenerate => writeln!(f, "soliton: Einstein, degenerate derivation")?,
                        TypeStatus::NotRationalizable { ratios } => {
                            let r: Vec<String> = ratios.iter().map(|x| real(*x)).collect();
                            writeln!(f, "soliton: Einstein, eigenvalues not rationalizable: [{}]", r.join(", "))?
                        }
                        TypeStatus::NotEinstein => writeln!(f, "soliton: Einstein")?,
                    }
                    writeln!(f, "soliton: c = {}, residual {}", real(r.c_mu), real(r.residual))?;
                } else {
                    writeln!(f, "verdict: not Einstein, F = {}", real(s.f_value))?;
                    writeln!(f, "soliton: derivation defect {}", real(r.derivation_defect))?;
                }
                if let Some(p) = &s.payne {
                    let v = if p.is_einstein { "Einstein" } else { "not Einstein" };
                    writeln!(f, "payne: {v}, nu = {}, residual {}", real(p.nu), real(p.residual))?;
                }
                Ok(())
            }
            Section::Stratum(s) => {
                let beta: Vec<String> = s.beta_plus.iter().map(|x| real(*x)).collect();
                let status = match (s.status, s.certificate) {
                    (crate::stratify::StratumStatus::Certified, Some(c)) => format!("certified ({c:?})"),
                    _ => "candidate".into(),
                };
                writeln!(f, "stratum: {status}, beta+ = ({}), F >= {}", beta.join(", "), real(s.f_lower_bound))
            }
            Section::Flow(s) => {
                if s.already_critical {
                    writeln!(f, "flow: already critical")?;
                } else if s.converged {
                    writeln!(f, "flow: converged at t = {} after {} steps ({} rejected)", real(s.final_time), s.steps, s.rejected)?;
                } else {
                    writeln!(f, "flow: not converged by t = {} after {} steps", real(s.final_time), s.steps)?;
                }
                writeln!(f, "flow: F = {}, |grad F| = {}", real(s.f_limit), real(s.final_grad_norm))?;
                if let Some(t) = s.stiff_switch {
                    writeln!(f, "flow: switched to the stiff scheme at t = {}", real(t))?;
                }
                writeln!(f, "limit:")?;
                for e in &s.limit {
                    let key = Key::new(e.i, e.j, e.k);
                    let note = if e.structural_zero { "  [structural zero]" } else { "" };
                    writeln!(f, "  {key} {}{note}", real(e.c))?;
                }
                writeln!(f, "evidence: {}", s.evidence_text())?;
                if let Some(p) = &s.csv {
                    writeln!(f, "trajectory: {p}")?;
                }
                Ok(())
            }
            Section::Graph(g) => write!(f, "{g}"),
        }
    }
}

impl fmt::Display for GraphSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSection::Positivity { edges, positive, verdict, nonpositive } => {
                writeln!(f, "edges: {}", edge_list(edges))?;
                if *positive {
                    writeln!(f, "positivity: {verdict}")
                } else {
                    let e = list(&nonpositive.iter().map(|i| i + 1).collect::<Vec<_>>());
                    writeln!(f, "positivity: {verdict}, at edges {e}")
                }
            }
            GraphSection::Weighting { edges, weighting, sum_one, sum_one_nu } => {
                writeln!(f, "edges: {}", edge_list(edges))?;
                writeln!(f, "weighting (integer): ({}), nu = {}", list(&weighting.integer), weighting.nu_int)?;
                writeln!(f, "weighting (nu = 1): ({})", list(&weighting.nu_one))?;
                writeln!(f, "weighting (sum 1): ({}), nu = {}", list(sum_one), sum_one_nu)?;
                writeln!(f, "positivity: {}", positivity_text(&weighting.integer))
            }
            GraphSection::Soliton { positive, document, payne, nonpositive } => {
                if !positive {
                    let e = list(&nonpositive.iter().map(|i| i + 1).collect::<Vec<_>>());
                    return writeln!(f, "soliton: none, the weighting is not positive (edges {e})");
                }
                if let Some(p) = payne {
                    let v = if p.is_einstein { "passes" } else { "fails" };
                    writeln!(f, "soliton: payne test {v}, nu = {}", real(p.nu))?;
                }
                if let Some(d) = document {
                    writeln!(f, "{}", crate::doc::Document::Bracket(d.clone()).to_json())?;
                }
                Ok(())
            }
            GraphSection::Witness { witness, edge_indices } => match witness {
                Some(w) => writeln!(f, "witness: {w}, edges {}", list(&edge_indices.iter().map(|i| i + 1).collect::<Vec<_>>())),
                None => writeln!(f, "witness: none"),
            },
            GraphSection::Grst { parameters: (r, s, t), graph, closed_form_positive } => {
                writeln!(f, "G({r},{s},{t}): {} vertices, edges {}", graph.vertices, edge_list(&graph.edges))?;
                let v = if *closed_form_positive { "positive" } else { "not positive" };
                writeln!(f, "closed form: {v}")
            }
        }
    }
}
