//! Command-line surface: argument parsing, the per-command runners and the
//! batch runner. Every runner returns an [`ItemReport`]; nothing here
//! prints or exits, so the binary and the tests share the same code.
//!
//! Exit codes: 0 success, 1 parse or I/O error, 2 invalid input (not a
//! nilpotent Lie bracket, bad graph), 3 a computation that failed.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::bracket::{self, Bracket};
use crate::curvature;
use crate::doc::{self, BracketDocument, Coefficient, Document, Entry, GraphDocument, Task};
use crate::error::Error;
use crate::flow::{self, FlowOptions, Perturbation, Scheme, STRUCTURAL_ZERO};
use crate::graphs::{self, Graph};
use crate::report::{positivity_text, FlowSummary, GraphSection, ItemReport, LimitEntry, RunReport, Section, SolitonSection};
use crate::soliton;
use crate::stratify::{self, Evidence};

pub const THREADS_ENV: &str = "NILSOLITON_THREADS";

#[derive(Debug, Parser)]
#[command(name = "nilsoliton", version, about = "Nilsoliton metrics, moment-map strata, gradient flow and graph positivity")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Numerical tolerance for Jacobi, Einstein and Payne tests.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Seed for randomized steps (flow perturbation).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

impl Default for Global {
    fn default() -> Self {
        Global { tol: 1e-8, seed: 0, format: Format::Text }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a bracket and run the curvature and soliton analyses.
    Analyze(AnalyzeArgs),
    /// Integrate the normalized gradient flow of F from a bracket.
    Flow(FlowArgs),
    /// Positivity, weighting, soliton or witness for a graph.
    Graph(GraphArgs),
    /// Run a manifest of inputs in parallel.
    Batch { manifest: PathBuf },
}

#[derive(Debug, Clone, Default, Args)]
pub struct AnalyzeArgs {
    pub path: PathBuf,
    /// Also certify the moment-map stratum.
    #[arg(long)]
    pub stratum: bool,
    /// Also run the linear test on the weight support.
    #[arg(long)]
    pub payne: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FlowArgs {
    pub path: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 1e16)]
    pub max_time: f64,
    /// Write the trajectory here as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Start from (I + eps X) . mu with X drawn from --seed.
    #[arg(long)]
    pub perturb: Option<f64>,
    #[arg(long, value_enum, default_value_t = SchemeArg::Auto)]
    pub scheme: SchemeArg,
}

impl FlowArgs {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        FlowArgs { path: path.into(), grad_tol: 1e-9, max_time: 1e16, csv: None, perturb: None, scheme: SchemeArg::Auto }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Auto,
    Dopri,
    Rosenbrock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphMode {
    Positivity,
    Weighting,
    Soliton,
    Witness,
    Grst,
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    #[arg(value_enum)]
    pub mode: GraphMode,
    /// Edge list or JSON graph document.
    #[arg(required_unless_present = "grst", conflicts_with = "grst")]
    pub path: Option<PathBuf>,
    /// Use the graph G(r,s,t) instead of a file.
    #[arg(long, num_args = 3, value_names = ["R", "S", "T"])]
    pub grst: Option<Vec<usize>>,
}

pub enum GraphSource<'a> {
    Text(&'a str),
    Grst(usize, usize, usize),
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Io(_) => 1,
        Error::IndexOutOfRange { .. }
        | Error::DiagonalKey { .. }
        | Error::DuplicateKey { .. }
        | Error::NonFinite { .. }
        | Error::ZeroDimension
        | Error::ZeroBracket
        | Error::InvalidBracket(_)
        | Error::Graph(_)
        | Error::GrstParameters { .. }
        | Error::CoefficientCount { .. } => 2,
        _ => 3,
    }
}

fn fail(input: &str, e: Error, sections: Vec<Section>) -> ItemReport {
    ItemReport::failed(input, exit_code(&e), e.to_string(), sections)
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn bracket_of(text: &str) -> Result<Bracket, Error> {
    match Document::parse(text)? {
        Document::Bracket(d) => d.to_bracket(),
        _ => Err(Error::Parse { line: 1, column: 1, message: "expected a bracket document".into() }),
    }
}

/// Parses and validates; a bracket that is not a nilpotent Lie bracket
/// ends the item with exit code 2 and its validation section.
fn checked_bracket(input: &str, text: &str, tol: f64) -> Result<(Bracket, Section), ItemReport> {
    let b = bracket_of(text).map_err(|e| fail(input, e, vec![]))?;
    let v = bracket::validate(&b, tol);
    let ok = v.is_valid();
    let section = Section::Validation(v);
    if !ok {
        return Err(fail(input, Error::InvalidBracket("Jacobi or nilpotency fails".into()), vec![section]));
    }
    Ok((b, section))
}

pub fn analyze(input: &str, text: &str, args: &AnalyzeArgs, g: &Global) -> ItemReport {
    let (b, validation) = match checked_bracket(input, text, g.tol) {
        Ok(x) => x,
        Err(r) => return r,
    };
    let mut sections = vec![validation];
    let run = |sections: &mut Vec<Section>| -> Result<(), Error> {
        let ric = curvature::ricci(&b)?;
        let f_value = ric.f_value;
        sections.push(Section::Ricci(ric));
        let s = soliton::is_einstein(&b, g.tol)?;
        let payne = if args.payne { Some(soliton::payne_test(&b, g.tol)?) } else { None };
        sections.push(Section::Soliton(SolitonSection { soliton: s, payne, f_value }));
        if args.stratum {
            sections.push(Section::Stratum(stratify::certify_stratum(&b, &Evidence::default(), g.tol)?));
        }
        Ok(())
    };
    match run(&mut sections) {
        Ok(()) => ItemReport::ok(input, sections),
        Err(e) => fail(input, e, sections),
    }
}

pub fn run_flow(input: &str, text: &str, args: &FlowArgs, g: &Global) -> ItemReport {
    let (b, validation) = match checked_bracket(input, text, g.tol) {
        Ok(x) => x,
        Err(r) => return r,
    };
    let opts = FlowOptions {
        grad_tol: args.grad_tol,
        max_time: args.max_time,
        scheme: match args.scheme {
            SchemeArg::Auto => Scheme::Auto,
            SchemeArg::Dopri => Scheme::DormandPrince,
            SchemeArg::Rosenbrock => Scheme::Rosenbrock,
        },
        perturbation: args.perturb.map(|epsilon| Perturbation { seed: g.seed, epsilon }),
        ..FlowOptions::default()
    };
    let run = || -> Result<FlowSummary, Error> {
        let traj = flow::integrate(&b, &opts)?;
        if let Some(p) = &args.csv {
            let file = fs::File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            flow::write_csv(&traj, std::io::BufWriter::new(file))?;
        }
        let limit = traj
            .keys
            .iter()
            .map(|k| {
                let c = traj.limit.get(k.i, k.j, k.k);
                LimitEntry { i: k.i, j: k.j, k: k.k, c, structural_zero: c.abs() < STRUCTURAL_ZERO }
            })
            .collect();
        Ok(FlowSummary {
            converged: traj.converged,
            already_critical: traj.converged && traj.steps == 0,
            steps: traj.steps,
            rejected: traj.rejected,
            final_time: traj.final_time(),
            final_grad_norm: traj.final_grad_norm(),
            f_limit: curvature::f_value(&traj.limit)?,
            stiff_switch: traj.stiff_switch,
            limit,
            classification: flow::classify_limit(&b, &traj.limit, STRUCTURAL_ZERO),
            csv: args.csv.as_ref().map(|p| p.display().to_string()),
        })
    };
    match run() {
        Ok(s) => {
            let converged = s.converged;
            let sections = vec![validation, Section::Flow(s)];
            if converged {
                ItemReport::ok(input, sections)
            } else {
                ItemReport::failed(input, 3, "flow did not converge", sections)
            }
        }
        Err(e) => fail(input, e, vec![validation]),
    }
}

fn soliton_document(g: &Graph, w: &graphs::Weighting) -> Result<BracketDocument, Error> {
    let p = g.vertex_count();
    let entries = g
        .edges()
        .iter()
        .zip(&w.nu_one)
        .enumerate()
        .map(|(n, (&(i, j), c))| {
            let c = Coefficient::parse(&format!("sqrt({c})")).map_err(Error::InvalidBracket)?;
            Ok(Entry { i, j, k: p + n + 1, c })
        })
        .collect::<Result<_, Error>>()?;
    Ok(BracketDocument { dim: p + g.edge_count(), entries, name: None, source: Some("graph weighting, nu = 1".into()) })
}

pub fn graph_command(input: &str, source: GraphSource, mode: GraphMode) -> ItemReport {
    let run = || -> Result<GraphSection, Error> {
        if let (GraphMode::Grst, GraphSource::Grst(r, s, t)) = (mode, &source) {
            let g = graphs::grst(*r, *s, *t)?;
            return Ok(GraphSection::Grst {
                parameters: (*r, *s, *t),
                graph: GraphDocument::from_graph(&g, Some(&format!("G({r},{s},{t})"))),
                closed_form_positive: graphs::grst_is_positive(*r, *s, *t)?,
            });
        }
        let g = match source {
            GraphSource::Text(t) => doc::parse_graph(t)?,
            GraphSource::Grst(r, s, t) => graphs::grst(r, s, t)?,
        };
        Ok(match mode {
            GraphMode::Positivity => {
                let w = graphs::weighting(&g)?;
                GraphSection::Positivity {
                    edges: g.edges().to_vec(),
                    positive: w.is_positive(),
                    verdict: positivity_text(&w.integer),
                    nonpositive: w.nonpositive(),
                }
            }
            GraphMode::Weighting => {
                let w = graphs::weighting(&g)?;
                let (sum_one, sum_one_nu) = w.sum_one();
                GraphSection::Weighting { edges: g.edges().to_vec(), weighting: w, sum_one, sum_one_nu }
            }
            GraphMode::Soliton => {
                let v = graphs::graph_einstein_nilradical(&g)?;
                let document = if v.positive { Some(soliton_document(&g.without_isolated(), &v.weighting)?) } else { None };
                GraphSection::Soliton { positive: v.positive, document, payne: v.payne, nonpositive: v.nonpositive }
            }
            GraphMode::Witness => {
                let witness = graphs::forbidden_witness(&g);
                let edge_indices = witness.as_ref().map(|w| w.edge_indices(&g)).unwrap_or_default();
                GraphSection::Witness { witness, edge_indices }
            }
            GraphMode::Grst => return Err(Error::Graph("the grst mode needs --grst R S T".into())),
        })
    };
    match run() {
        Ok(s) => ItemReport::ok(input, vec![Section::Graph(s)]),
        Err(e) => fail(input, e, vec![]),
    }
}

fn grst_label(r: usize, s: usize, t: usize) -> String {
    format!("G({r},{s},{t})")
}

fn run_item(base: &Path, item: &doc::ManifestItem, g: &Global) -> ItemReport {
    let (label, text) = match (&item.path, item.grst) {
        (Some(p), None) => {
            let label = p.display().to_string();
            match read(&base.join(p)) {
                Ok(t) => (label, Some(t)),
                Err(e) => return fail(&label, e, vec![]),
            }
        }
        (None, Some((r, s, t))) => (grst_label(r, s, t), None),
        _ => return fail("<item>", Error::Parse { line: 0, column: 0, message: "an item needs exactly one of path and grst".into() }, vec![]),
    };
    let graph_source = || match (&text, item.grst) {
        (Some(t), _) => GraphSource::Text(t),
        (None, Some((r, s, t))) => GraphSource::Grst(r, s, t),
        (None, None) => unreachable!(),
    };
    let need_text = |f: &dyn Fn(&str) -> ItemReport| match &text {
        Some(t) => f(t),
        None => fail(&label, Error::Parse { line: 0, column: 0, message: "this task needs a path".into() }, vec![]),
    };
    match item.task {
        Task::Analyze => need_text(&|t| analyze(&label, t, &AnalyzeArgs { path: PathBuf::new(), stratum: true, payne: true }, g)),
        Task::Flow => need_text(&|t| run_flow(&label, t, &FlowArgs::new(""), g)),
        Task::Positivity => graph_command(&label, graph_source(), GraphMode::Positivity),
        Task::Weighting => graph_command(&label, graph_source(), GraphMode::Weighting),
        Task::Soliton => graph_command(&label, graph_source(), GraphMode::Soliton),
        Task::Witness => graph_command(&label, graph_source(), GraphMode::Witness),
    }
}

/// Thread count from the environment, when set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs every item of the manifest; paths are relative to the manifest's
/// directory. Items run in parallel and are reported in manifest order.
pub fn batch(manifest: &Path, g: &Global) -> RunReport {
    let label = manifest.display().to_string();
    let text = match read(manifest) {
        Ok(t) => t,
        Err(e) => return RunReport { items: vec![fail(&label, e, vec![])] },
    };
    let m = match Document::parse(&text) {
        Ok(Document::Manifest(m)) => m,
        Ok(_) => {
            let e = Error::Parse { line: 1, column: 1, message: "expected a manifest document".into() };
            return RunReport { items: vec![fail(&label, e, vec![])] };
        }
        Err(e) => return RunReport { items: vec![fail(&label, e, vec![])] },
    };
    let base = manifest.parent().unwrap_or(Path::new("."));
    let work = || m.items.par_iter().map(|item| run_item(base, item, g)).collect();
    let items = match thread_cap() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(work),
            Err(_) => work(),
        },
        None => work(),
    };
    RunReport { items }
}

/// Runs a parsed command line and returns the rendered output and the exit
/// code.
pub fn run(cli: &Cli) -> (String, i32) {
    let g = &cli.global;
    let from_file = |path: &Path, f: &dyn Fn(&str, &str) -> ItemReport| {
        let label = path.display().to_string();
        match read(path) {
            Ok(t) => f(&label, &t),
            Err(e) => fail(&label, e, vec![]),
        }
    };
    let report = match &cli.command {
        Command::Analyze(a) => RunReport { items: vec![from_file(&a.path, &|l, t| analyze(l, t, a, g))] },
        Command::Flow(a) => RunReport { items: vec![from_file(&a.path, &|l, t| run_flow(l, t, a, g))] },
        Command::Graph(a) => {
            let item = match (&a.path, a.grst.as_deref()) {
                (_, Some(&[r, s, t])) => graph_command(&grst_label(r, s, t), GraphSource::Grst(r, s, t), a.mode),
                (Some(p), _) if a.mode == GraphMode::Grst => {
                    fail(&p.display().to_string(), Error::Graph("the grst mode needs --grst R S T".into()), vec![])
                }
                (Some(p), _) => from_file(p, &|l, t| graph_command(l, GraphSource::Text(t), a.mode)),
                _ => fail("<graph>", Error::Graph("give a path or --grst R S T".into()), vec![]),
            };
            RunReport { items: vec![item] }
        }
        Command::Batch { manifest } => batch(manifest, g),
    };
    let out = match g.format {
        Format::Text => report.to_string(),
        Format::Structured => report.to_json(),
    };
    (out, report.exit_code())
}
