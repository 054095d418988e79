//! Batch front end: compile gate diagrams to graphs, compute fixed-sector
//! ground energies, run the verification suites, and apply the
//! instance-to-instance reductions. Reports are JSON on stdout; every run
//! writes a manifest recording input digests, tolerances, the seed, and the
//! produced files.
//!
//! Exit codes: 0 pass, 1 assertion failure, 2 input error, 3 solver or
//! budget failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use gategraph::diagram::{diagram_from_json, GateDiagram};
use gategraph::element::{load_element, mini_double_element, ElementGraph};
use gategraph::error::Error;
use gategraph::io;
use gategraph::reductions::{
    classify_ffbh, classify_xy, reduce_bh_to_xy, reduce_to_simple, ElementRef, InstanceFile,
};
use gategraph::sector::{bose_hubbard, run_hardcore_suite, xy_sector, SectorOperator};
use gategraph::spectral::run_certificate_suite;
use gategraph::transforms::verify_doubling;

const ASSET_DIR_ENV: &str = "GATEGRAPH_ASSET_DIR";

#[derive(Parser)]
#[command(
    name = "gategraph",
    version,
    about = "gate-diagram graphs, sector spectra, gap certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a diagram JSON file into a graph with a label sidecar.
    Compile(CompileArgs),
    /// Ground energy of a sector Hamiltonian on a graph file.
    Spectrum(SpectrumArgs),
    /// Run a verification suite and report pass/fail.
    Verify(VerifyArgs),
    /// Map an instance file to another instance file.
    Reduce(ReduceArgs),
    /// Measure a promise instance and print the verdict.
    Classify(ClassifyArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// Instance JSON path.
    instance: PathBuf,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct CompileArgs {
    /// Diagram JSON path.
    diagram: PathBuf,
    /// Element source: `mini`, `asset`, or a graph file path.
    #[arg(long, default_value = "mini")]
    element: String,
    /// Label sidecar when `--element` is a path (defaults to `<stem>.labels.json`).
    #[arg(long)]
    element_labels: Option<PathBuf>,
    /// Output graph path (Matrix Market).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Validate inputs and exit without computing or writing.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Sector {
    Xy,
    Bh,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Graph path (Matrix Market).
    graph: PathBuf,
    #[arg(long, value_enum)]
    sector: Sector,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Export the sector operator as a real symmetric Matrix Market file.
    #[arg(long)]
    export_operator: Option<PathBuf>,
    /// Export the basis manifest JSON.
    #[arg(long)]
    export_basis: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    dry_run: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Suite {
    Doubling,
    Certificates,
    Hardcore,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Diagram JSON path (doubling suite).
    #[arg(long)]
    diagram: Option<PathBuf>,
    #[arg(long, default_value = "mini")]
    element: String,
    #[arg(long)]
    element_labels: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 40)]
    max_dim: usize,
    #[arg(long, default_value_t = 25)]
    graphs: usize,
    #[arg(long, default_value_t = 8)]
    max_k: usize,
    #[arg(long, default_value_t = 3)]
    max_n: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Also write the report JSON to a file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Target {
    Xy,
    Simple,
}

#[derive(Args)]
struct ReduceArgs {
    /// Instance JSON path.
    instance: PathBuf,
    #[arg(long, value_enum)]
    target: Target,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    dry_run: bool,
}

fn main() {
    // die quietly when a pipe downstream closes early
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            let code = exit_code_for(&err);
            let payload = serde_json::json!({
                "error": {
                    "kind": error_kind(&err),
                    "message": err.to_string(),
                    "exit_code": code,
                }
            });
            eprintln!("{payload}");
            code
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Compile(args) => cmd_compile(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Reduce(args) => cmd_reduce(args),
        Command::Classify(args) => cmd_classify(args),
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::SolverNoConvergence { .. }
        | Error::BudgetExceeded { .. }
        | Error::NotPsd { .. }
        | Error::EmptyNullspace
        | Error::ZeroRestriction
        | Error::InternalInvariant(_) => 3,
        _ => 2,
    }
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::NotSymmetric { .. } => "NotSymmetric",
        Error::NonBinaryEntry { .. } => "NonBinaryEntry",
        Error::EmptyGraph => "EmptyGraph",
        Error::MissingSelfLoop(_) => "MissingSelfLoop",
        Error::SolverNoConvergence { .. } => "SolverNoConvergence",
        Error::BadLabeling(_) => "BadLabeling",
        Error::WrongVertexCount { .. } => "WrongVertexCount",
        Error::GeometryMismatch(_) => "GeometryMismatch",
        Error::NodeConflict { .. } => "NodeConflict",
        Error::IllegalNodeForLabel { .. } => "IllegalNodeForLabel",
        Error::DanglingElementIndex { .. } => "DanglingElementIndex",
        Error::ElementGeometryMismatch(_) => "ElementGeometryMismatch",
        Error::BadWeight { .. } => "BadWeight",
        Error::DimensionMismatch { .. } => "DimensionMismatch",
        Error::BudgetExceeded { .. } => "BudgetExceeded",
        Error::NotPsd { .. } => "NotPsd",
        Error::NotOrthonormal { .. } => "NotOrthonormal",
        Error::EmptyNullspace => "EmptyNullspace",
        Error::ZeroRestriction => "ZeroRestriction",
        Error::NonPositiveInput(_) => "NonPositiveInput",
        Error::AlphaMismatch { .. } => "AlphaMismatch",
        Error::NotE1GateGraph { .. } => "NotE1GateGraph",
        Error::BadInstance(_) => "BadInstance",
        Error::InternalInvariant(_) => "InternalInvariant",
        Error::Parse(_) => "Parse",
        Error::Io(_) => "Io",
        Error::Json(_) => "Json",
    }
}

// --- manifest ----------------------------------------------------------------

#[derive(Serialize)]
struct RunManifest {
    command: String,
    inputs: BTreeMap<String, String>,
    tolerances: BTreeMap<String, f64>,
    seed: u64,
    outputs: Vec<String>,
    wall_time_s: f64,
}

struct ManifestBuilder {
    command: String,
    inputs: BTreeMap<String, String>,
    tolerances: BTreeMap<String, f64>,
    seed: u64,
    outputs: Vec<String>,
    started: Instant,
}

impl ManifestBuilder {
    fn new(command: &str) -> ManifestBuilder {
        ManifestBuilder {
            command: command.into(),
            inputs: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            seed: 0,
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    fn input(&mut self, path: &Path) -> Result<(), Error> {
        let bytes = std::fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        self.inputs
            .insert(path.display().to_string(), hex::encode(digest));
        Ok(())
    }

    fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.insert(name.into(), value);
    }

    fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    fn write(self, path: &Path) -> Result<(), Error> {
        for out in &self.outputs {
            if !Path::new(out).exists() {
                return Err(Error::InternalInvariant(format!(
                    "manifest lists missing output {out}"
                )));
            }
        }
        let manifest = RunManifest {
            command: self.command,
            inputs: self.inputs,
            tolerances: self.tolerances,
            seed: self.seed,
            outputs: self.outputs,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        std::fs::write(path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }
}

fn default_manifest_path(explicit: Option<PathBuf>, out: Option<&Path>, command: &str) -> PathBuf {
    if let Some(p) = explicit {
        return p;
    }
    match out {
        Some(out) => PathBuf::from(format!("{}.manifest.json", out.display())),
        None => PathBuf::from(format!("gategraph-{command}-manifest.json")),
    }
}

// --- element / diagram loading -------------------------------------------------

fn resolve_element(
    spec: &str,
    labels_flag: Option<&Path>,
    manifest: &mut ManifestBuilder,
) -> Result<ElementGraph, Error> {
    match spec {
        "mini" => Ok(mini_double_element()),
        "asset" => {
            let dir = std::env::var(ASSET_DIR_ENV).unwrap_or_else(|_| "assets".into());
            let mtx = Path::new(&dir).join("g0.mtx");
            let labels = Path::new(&dir).join("g0.labels.json");
            manifest.input(&mtx)?;
            manifest.input(&labels)?;
            load_element(&mtx, &labels)
        }
        path => {
            let mtx = PathBuf::from(path);
            let labels = match labels_flag {
                Some(p) => p.to_path_buf(),
                None => mtx.with_extension("labels.json"),
            };
            manifest.input(&mtx)?;
            manifest.input(&labels)?;
            load_element(&mtx, &labels)
        }
    }
}

fn load_diagram(path: &Path, elem: &ElementGraph) -> Result<GateDiagram, Error> {
    let text = std::fs::read_to_string(path)?;
    diagram_from_json(&text, elem.node_scheme())
}

// --- commands ------------------------------------------------------------------

fn cmd_compile(args: CompileArgs) -> Result<i32, Error> {
    let mut manifest = ManifestBuilder::new("compile");
    manifest.input(&args.diagram)?;
    manifest.tolerance("mu", args.tol);
    let elem = resolve_element(&args.element, args.element_labels.as_deref(), &mut manifest)?;
    let diagram = load_diagram(&args.diagram, &elem)?;
    if args.dry_run {
        println!("{}", serde_json::json!({"dry_run": true, "ok": true}));
        return Ok(0);
    }
    let graph = diagram.compile(&elem)?;
    let mu = graph.mu(args.tol)?;

    io::write_graph_file(&graph, &args.out)?;
    manifest.output(&args.out);
    let labels_path = PathBuf::from(format!("{}.labels.json", args.out.display()));
    if let Some(labels) = graph.labels() {
        io::write_labels_file(labels, &labels_path)?;
        manifest.output(&labels_path);
    }
    let report = serde_json::json!({
        "vertices": graph.num_vertices(),
        "entries": graph.upper_entries().len(),
        "mu": mu,
        "element_ground_energy": elem.ground_energy(),
        "conforming": (mu - elem.ground_energy()).abs() <= args.tol.max(1e-9),
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    let manifest_path = default_manifest_path(args.manifest, Some(&args.out), "compile");
    manifest.write(&manifest_path)?;
    Ok(0)
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<i32, Error> {
    let mut manifest = ManifestBuilder::new("spectrum");
    manifest.input(&args.graph)?;
    manifest.tolerance("eigensolve", args.tol);
    let graph = io::read_graph_file(&args.graph)?;
    if args.dry_run {
        println!("{}", serde_json::json!({"dry_run": true, "ok": true}));
        return Ok(0);
    }
    let mu = graph.mu(args.tol)?;
    let (op, value_name): (SectorOperator, &str) = match args.sector {
        Sector::Xy => (xy_sector(&graph, args.n)?, "theta"),
        Sector::Bh => (bose_hubbard(&graph, args.n)?, "lambda1"),
    };
    let raw = op.smallest_eigenvalue(args.tol)?;
    let value = match args.sector {
        Sector::Xy => raw,
        Sector::Bh => raw - args.n as f64 * mu,
    };
    if let Some(path) = &args.export_operator {
        let csr = op.to_csr().ok_or(Error::BudgetExceeded {
            needed: op.basis().dim(),
            budget: gategraph::linalg::MATERIALIZE_LIMIT,
        })?;
        let mut buf = Vec::new();
        io::write_operator_mtx(csr, &mut buf)?;
        std::fs::write(path, buf)?;
        manifest.output(path);
    }
    if let Some(path) = &args.export_basis {
        let mut buf = Vec::new();
        io::write_basis_manifest(&op.basis().manifest(), &mut buf)?;
        std::fs::write(path, buf)?;
        manifest.output(path);
    }
    let report = serde_json::json!({
        "sector": match args.sector { Sector::Xy => "xy", Sector::Bh => "bh" },
        value_name: value,
        "mu": mu,
        "basis_dim": op.basis().dim(),
        "converged": true,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    let manifest_path = default_manifest_path(args.manifest, None, "spectrum");
    manifest.write(&manifest_path)?;
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, Error> {
    let mut manifest = ManifestBuilder::new("verify");
    manifest.seed = args.seed;
    manifest.tolerance("suite", args.tol);

    let (report_json, pass) = match args.suite {
        Suite::Doubling => {
            let elem =
                resolve_element(&args.element, args.element_labels.as_deref(), &mut manifest)?;
            let diagram_path = args.diagram.as_ref().ok_or_else(|| {
                Error::BadInstance("--diagram is required for the doubling suite".into())
            })?;
            manifest.input(diagram_path)?;
            let diagram = load_diagram(diagram_path, &elem)?;
            let report = verify_doubling(&diagram, &elem, args.n, args.tol, args.seed)?;
            (serde_json::to_value(&report)?, report.pass)
        }
        Suite::Certificates => {
            let report = run_certificate_suite(args.trials, args.max_dim, args.seed, 1e-9)?;
            (serde_json::to_value(&report)?, report.pass)
        }
        Suite::Hardcore => {
            let tol = if args.tol <= 0.0 {
                1e-12
            } else {
                args.tol.min(1e-12)
            };
            let report = run_hardcore_suite(args.graphs, args.max_k, args.max_n, args.seed, tol)?;
            (serde_json::to_value(&report)?, report.pass)
        }
    };

    let text = serde_json::to_string_pretty(&report_json)?;
    println!("{text}");
    if let Some(out) = &args.out {
        std::fs::write(out, &text)?;
        manifest.output(out);
    }
    let manifest_path = default_manifest_path(args.manifest, args.out.as_deref(), "verify");
    manifest.write(&manifest_path)?;
    Ok(if pass { 0 } else { 1 })
}

fn cmd_reduce(args: ReduceArgs) -> Result<i32, Error> {
    let mut manifest = ManifestBuilder::new("reduce");
    manifest.input(&args.instance)?;
    let text = std::fs::read_to_string(&args.instance)?;
    let file: InstanceFile = serde_json::from_str(&text)?;
    let base = args
        .instance
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();

    match args.target {
        Target::Xy => {
            if file.kind != "ffbh" {
                return Err(Error::BadInstance(format!(
                    "xy target requires an ffbh instance, found kind '{}'",
                    file.kind
                )));
            }
            let graph_rel = file.graph.clone().ok_or_else(|| {
                Error::BadInstance("xy target requires a graph-backed instance".into())
            })?;
            let graph_path = base.join(&graph_rel);
            manifest.input(&graph_path)?;
            let graph = io::read_graph_file(&graph_path)?;
            let inst = file.to_ffbh(graph)?;
            if args.dry_run {
                println!("{}", serde_json::json!({"dry_run": true, "ok": true}));
                return Ok(0);
            }
            let xy = reduce_bh_to_xy(&inst)?;
            let out_file = InstanceFile::from_xy(&xy, graph_rel);
            std::fs::write(&args.out, serde_json::to_string_pretty(&out_file)?)?;
            manifest.output(&args.out);
            println!(
                "{}",
                serde_json::json!({
                    "target": "xy",
                    "c": xy.c,
                    "T": xy.t.to_string(),
                    "mu": xy.provenance.map(|p| p.mu),
                })
            );
        }
        Target::Simple => {
            if file.kind != "ffbh" {
                return Err(Error::BadInstance(format!(
                    "simple target requires an ffbh instance, found kind '{}'",
                    file.kind
                )));
            }
            let diagram_rel = file.diagram.clone().ok_or_else(|| {
                Error::BadInstance("simple target requires a diagram-backed instance".into())
            })?;
            let element_spec = match &file.element {
                Some(ElementRef::Named(name)) => name.clone(),
                Some(ElementRef::Files { mtx, .. }) => base.join(mtx).display().to_string(),
                None => "mini".into(),
            };
            let element_labels = match &file.element {
                Some(ElementRef::Files { labels, .. }) => Some(base.join(labels)),
                _ => None,
            };
            let elem = resolve_element(&element_spec, element_labels.as_deref(), &mut manifest)?;
            let diagram_path = base.join(&diagram_rel);
            manifest.input(&diagram_path)?;
            let diagram = load_diagram(&diagram_path, &elem)?;
            if args.dry_run {
                println!("{}", serde_json::json!({"dry_run": true, "ok": true}));
                return Ok(0);
            }
            let t = file.parse_t()?;
            let alpha = file
                .alpha
                .ok_or_else(|| Error::BadInstance("ffbh instance requires alpha".into()))?;
            let (inst, prov) = reduce_to_simple(&diagram, &elem, file.n, &t, alpha)?;
            debug_assert!(inst.graph.is_simple());

            let graph_out = PathBuf::from(format!("{}.mtx", args.out.display()));
            io::write_graph_file(&inst.graph, &graph_out)?;
            manifest.output(&graph_out);
            let graph_rel_out = graph_out
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| graph_out.display().to_string());
            let mut out_file = InstanceFile::from_ffbh(&inst, graph_rel_out);
            out_file.provenance = Some(serde_json::to_value(&prov)?);
            std::fs::write(&args.out, serde_json::to_string_pretty(&out_file)?)?;
            manifest.output(&args.out);
            println!(
                "{}",
                serde_json::json!({
                    "target": "simple",
                    "vertices": prov.k_output,
                    "T": inst.t.to_string(),
                    "simple": true,
                })
            );
        }
    }

    let manifest_path = default_manifest_path(args.manifest, Some(&args.out), "reduce");
    manifest.write(&manifest_path)?;
    Ok(0)
}

fn cmd_classify(args: ClassifyArgs) -> Result<i32, Error> {
    let mut manifest = ManifestBuilder::new("classify");
    manifest.input(&args.instance)?;
    manifest.tolerance("classify", args.tol);
    let text = std::fs::read_to_string(&args.instance)?;
    let file: InstanceFile = serde_json::from_str(&text)?;
    let base = args
        .instance
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let graph_rel = file.graph.clone().ok_or_else(|| {
        Error::BadInstance("classification requires a graph-backed instance".into())
    })?;
    let graph_path = base.join(&graph_rel);
    manifest.input(&graph_path)?;
    let graph = io::read_graph_file(&graph_path)?;
    if args.dry_run {
        println!("{}", serde_json::json!({"dry_run": true, "ok": true}));
        return Ok(0);
    }
    let verdict = match file.kind.as_str() {
        "ffbh" => classify_ffbh(&file.to_ffbh(graph)?, args.tol)?,
        "xy" => classify_xy(&file.to_xy(graph)?, args.tol)?,
        other => {
            return Err(Error::BadInstance(format!(
                "unknown instance kind '{other}'"
            )))
        }
    };
    println!("{}", serde_json::to_string_pretty(&verdict)?);
    let manifest_path = default_manifest_path(args.manifest, None, "classify");
    manifest.write(&manifest_path)?;
    Ok(0)
}
