//! Command-line front end: `gen`, `run`, `sweep` and `check`.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage, parse or fatal error.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::checkers::{self, parse_placement, run_suite, CheckReport, Placement, Tee, TraceAudit};
use crate::engine::{self, HaltReason, JsonLines, RunError, SimConfig, SimOutcome, TraceSink};
use crate::graph::{self, NodeId, PortLabeledGraph, PortRule};
use crate::robots::{Fault, Strategy};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK: u8 = 1;
pub const EXIT_FATAL: u8 = 2;

pub const CSV_HEADER: &str = "n,m,delta,k,strategy,rounds_stage1,rounds_total,bound_stage1,bound_total,tree_edges,nontree_traversals,checks_passed";

#[derive(Debug, Parser)]
#[command(name = "d2d", version, about = "Distance-2 dispersion simulator and checker")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a graph file.
    Gen(GenArgs),
    /// Run one simulation and check the outcome.
    Run(RunArgs),
    /// Run a grid of simulations and emit CSV metrics.
    Sweep(SweepArgs),
    /// Check an externally supplied placement.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Lowerbound,
    Path,
    Ring,
    Clique,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ports {
    Canonical,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    SkipVpWrite,
    SkipSpecial,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub family: Family,
    #[arg(long)]
    pub n: usize,
    /// Edge count (random family only).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Port numbering for cliques.
    #[arg(long, value_enum, default_value_t = Ports::Canonical)]
    pub ports: Ports,
    /// Output file; the graph goes to stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub graph: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub root: NodeId,
    #[arg(long, default_value_t = Strategy::Main)]
    pub strategy: Strategy,
    /// Known upper bound on the maximum degree (warm-up only; defaults to Δ).
    #[arg(long)]
    pub delta: Option<u32>,
    #[arg(long)]
    pub max_rounds: Option<u64>,
    /// Write the JSON-lines trace here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write the final placement as Graphviz DOT here.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    #[arg(long)]
    pub no_check: bool,
    /// Inject a protocol fault (for exercising the checkers).
    #[arg(long, value_enum)]
    pub fault: Option<FaultArg>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Generator family to sweep.
    #[arg(long, value_enum, conflicts_with = "graph")]
    pub family: Option<Family>,
    /// Graph files to sweep instead of a generator.
    #[arg(long)]
    pub graph: Vec<PathBuf>,
    /// Node counts, e.g. `3..12` or `4,6,8`.
    #[arg(long, value_parser = parse_list, default_value = "")]
    pub n: List,
    /// Edge counts (random family; defaults to min(2n, n(n-1)/2)).
    #[arg(long, value_parser = parse_list)]
    pub m: Option<List>,
    #[arg(long, value_parser = parse_list, default_value = "2")]
    pub k: List,
    #[arg(long, value_parser = parse_list, default_value = "0")]
    pub seeds: List,
    #[arg(long, default_value_t = Strategy::Main)]
    pub strategy: Strategy,
    #[arg(long, default_value_t = 0)]
    pub root: NodeId,
    #[arg(long, value_enum, default_value_t = Ports::Random)]
    pub ports: Ports,
    #[arg(long)]
    pub max_rounds: Option<u64>,
    /// CSV output file; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub graph: PathBuf,
    pub placement: PathBuf,
    /// Node allowed to hold several robots; inferred from the placement when absent.
    #[arg(long)]
    pub root: Option<NodeId>,
}

/// Inclusive ranges and comma lists: `3..12`, `1,4,9`, `0..3,10`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct List(pub Vec<u64>);

pub fn parse_list(s: &str) -> Result<List, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("`{t}` is not a non-negative integer"));
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
                if b.saturating_sub(a) > 1_000_000 {
                    return Err(format!("range `{part}` is too large"));
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    Ok(List(out))
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    fn fatal(msg: impl std::fmt::Display) -> Self {
        Failure { code: EXIT_FATAL, msg: msg.to_string() }
    }
}

type CmdResult = Result<u8, Failure>;

/// Runs a parsed command, writing normal output to `out`. Returns the exit code.
pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(&a, out),
        Command::Run(a) => cmd_run(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out, err),
        Command::Check(a) => cmd_check(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.msg);
            f.code
        }
    }
}

fn read_graph(path: &Path) -> Result<PortLabeledGraph, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::fatal(format!("{}: {e}", path.display())))?;
    graph::parse(&text).map_err(|e| Failure::fatal(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::fatal(format!("{}: {e}", path.display())))
}

fn io_fail(e: io::Error) -> Failure {
    Failure::fatal(e)
}

fn generate(family: Family, n: usize, m: Option<usize>, seed: u64, ports: Ports) -> Result<PortLabeledGraph, Failure> {
    let rule = match ports {
        Ports::Canonical => PortRule::Canonical,
        Ports::Random => PortRule::Random,
    };
    let g = match family {
        Family::Lowerbound => graph::gen_lower_bound_family(n, seed).map(|lb| lb.graph),
        Family::Path => graph::gen_path(n),
        Family::Ring => graph::gen_ring(n),
        Family::Clique => graph::gen_clique(n, rule, seed),
        Family::Random => {
            let m = m.unwrap_or_else(|| (2 * n).min(n * n.saturating_sub(1) / 2));
            graph::gen_random_connected(n, m, seed)
        }
    };
    g.map_err(Failure::fatal)
}

fn stats(g: &PortLabeledGraph) -> String {
    format!("n={} m={} delta={}", g.node_count(), g.edge_count(), g.max_degree())
}

pub fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> CmdResult {
    let g = generate(a.family, a.n, a.m, a.seed, a.ports)?;
    let text = graph::serialize(&g);
    match &a.out {
        Some(path) => {
            write_file(path, &text)?;
            writeln!(out, "{}", stats(&g)).map_err(io_fail)?;
        }
        None => out.write_all(text.as_bytes()).map_err(io_fail)?,
    }
    Ok(EXIT_OK)
}

fn fault(f: Option<FaultArg>) -> Option<Fault> {
    f.map(|f| match f {
        FaultArg::SkipVpWrite => Fault::SkipVirtualParentWrite,
        FaultArg::SkipSpecial => Fault::SkipSpecialFlag,
    })
}

/// Engine errors that show a violated property exit 1; the rest are fatal.
fn run_failure(e: RunError) -> Failure {
    let code = match e {
        RunError::Invariant(_) | RunError::MemoryBudget { .. } => EXIT_CHECK,
        _ => EXIT_FATAL,
    };
    Failure { code, msg: e.to_string() }
}

fn halt_text(h: HaltReason) -> &'static str {
    match h {
        HaltReason::AllTerminated => "all robots terminated",
        HaltReason::AllSettled => "all robots settled",
        HaltReason::RoundCap => "round cap reached",
    }
}

fn summary(g: &PortLabeledGraph, o: &SimOutcome, reports: Option<&[CheckReport]>) -> String {
    let (b1, bt) = checkers::round_bounds(g);
    let s1 = o.rounds_stage1.map_or("-".to_string(), |r| r.to_string());
    let mut s = String::new();
    let _ = writeln!(s, "graph: {}", stats(g));
    let _ = writeln!(s, "run: strategy={} k={} root={}", o.strategy, o.k(), o.root);
    let _ = writeln!(s, "rounds: stage1={s1} total={} (bounds {b1} / {bt})", o.rounds_total);
    let _ = writeln!(s, "halted: {}", halt_text(o.halted_by));
    let _ = writeln!(
        s,
        "edges: tree={} nontree_traversals={} traversals={}",
        o.ledger.tree_edges(),
        o.ledger.nontree_traversals(),
        o.ledger.total()
    );
    let _ = writeln!(s, "placement:");
    for line in checkers::serialize_placement(&o.placement).lines() {
        let _ = writeln!(s, "  {line}");
    }
    for &(r, u) in &o.unsettled {
        let _ = writeln!(s, "  unsettled robot {r} at node {u}");
    }
    if let Some(reports) = reports {
        let _ = writeln!(s, "checks:");
        for r in reports {
            let _ = writeln!(s, "  {r}");
        }
    }
    s
}

fn sim_config(strategy: Strategy, k: usize, root: NodeId, delta: Option<u32>, g: &PortLabeledGraph) -> SimConfig {
    match strategy {
        Strategy::Main => SimConfig::main(k, root),
        Strategy::Warmup => SimConfig::warmup(k, root, delta.unwrap_or(g.max_degree() as u32)),
    }
}

pub fn cmd_run(a: &RunArgs, out: &mut dyn Write) -> CmdResult {
    let g = read_graph(&a.graph)?;
    let mut cfg = sim_config(a.strategy, a.k, a.root, a.delta, &g);
    cfg.max_rounds = a.max_rounds;
    cfg.fault = fault(a.fault);

    let mut audit = TraceAudit::new();
    let outcome = match &a.trace {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| Failure::fatal(format!("{}: {e}", path.display())))?;
            let mut json = JsonLines(BufWriter::new(file));
            let outcome = {
                let mut tee = Tee(&mut json, &mut audit);
                engine::run_traced(&g, &cfg, Some(&mut tee as &mut dyn TraceSink))
            };
            json.0.flush().map_err(io_fail)?;
            outcome
        }
        None => engine::run_traced(&g, &cfg, Some(&mut audit as &mut dyn TraceSink)),
    }
    .map_err(run_failure)?;

    let reports = (!a.no_check).then(|| run_suite(&outcome, &g, Some(&audit)));
    out.write_all(summary(&g, &outcome, reports.as_deref()).as_bytes()).map_err(io_fail)?;
    if let Some(path) = &a.dot {
        write_file(path, &graph::to_dot(&g, Some(&outcome.multiplicities())))?;
    }
    match reports {
        Some(r) if !checkers::all_passed(&r) => Ok(EXIT_CHECK),
        _ => Ok(EXIT_OK),
    }
}

/// One cell of the sweep grid.
#[derive(Debug, Clone)]
struct Job {
    source: Source,
    k: usize,
    seed: u64,
}

#[derive(Debug, Clone)]
enum Source {
    Generated { family: Family, n: usize, m: Option<usize> },
    File(usize),
}

/// Jobs in lexicographic order of (graph, k, seed).
fn sweep_jobs(a: &SweepArgs) -> Vec<Job> {
    let mut sources = Vec::new();
    match a.family {
        Some(family) => {
            for &n in &a.n.0 {
                match (&a.m, family) {
                    (Some(ms), Family::Random) => {
                        for &m in &ms.0 {
                            sources.push(Source::Generated { family, n: n as usize, m: Some(m as usize) });
                        }
                    }
                    _ => sources.push(Source::Generated { family, n: n as usize, m: None }),
                }
            }
        }
        None => sources.extend((0..a.graph.len()).map(Source::File)),
    }
    let mut jobs = Vec::new();
    for source in sources {
        for &k in &a.k.0 {
            let seeds: &[u64] = if matches!(source, Source::File(_)) { &[0] } else { &a.seeds.0 };
            for &seed in seeds {
                jobs.push(Job { source: source.clone(), k: k as usize, seed });
            }
        }
    }
    jobs
}

struct Row {
    csv: String,
    passed: bool,
    note: Option<String>,
}

fn sweep_row(a: &SweepArgs, files: &[PortLabeledGraph], job: &Job) -> Row {
    let generated;
    let g = match job.source {
        Source::Generated { family, n, m } => match generate(family, n, m, job.seed, a.ports) {
            Ok(g) => {
                generated = g;
                &generated
            }
            Err(f) => return Row { csv: String::new(), passed: false, note: Some(f.msg) },
        },
        Source::File(i) => &files[i],
    };
    let mut cfg = sim_config(a.strategy, job.k, a.root, None, g);
    cfg.max_rounds = a.max_rounds;
    cfg.seed = job.seed;
    let (b1, bt) = checkers::round_bounds(g);
    let prefix = format!("{},{},{},{},{}", g.node_count(), g.edge_count(), g.max_degree(), job.k, a.strategy);
    let mut audit = TraceAudit::new();
    match engine::run_traced(g, &cfg, Some(&mut audit as &mut dyn TraceSink)) {
        Ok(o) => {
            let reports = run_suite(&o, g, Some(&audit));
            let passed = checkers::all_passed(&reports);
            let s1 = o.rounds_stage1.map_or(String::new(), |r| r.to_string());
            let csv = format!(
                "{prefix},{s1},{},{b1},{bt},{},{},{passed}",
                o.rounds_total,
                o.ledger.tree_edges(),
                o.ledger.nontree_traversals()
            );
            let note = (!passed).then(|| {
                let failed: Vec<String> = reports.iter().filter(|r| r.failed()).map(|r| r.to_string()).collect();
                failed.join("; ")
            });
            Row { csv, passed, note }
        }
        Err(e) => Row { csv: format!("{prefix},,,{b1},{bt},,,false"), passed: false, note: Some(e.to_string()) },
    }
}

pub fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let files = a.graph.iter().map(|p| read_graph(p)).collect::<Result<Vec<_>, _>>()?;
    let jobs = sweep_jobs(a);
    let rows: Vec<Row> = jobs.par_iter().map(|j| sweep_row(a, &files, j)).collect();

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    let mut failed = false;
    for (job, row) in jobs.iter().zip(&rows) {
        if !row.csv.is_empty() {
            csv.push_str(&row.csv);
            csv.push('\n');
        }
        if !row.passed {
            failed = true;
            let what = match &job.source {
                Source::Generated { family, n, m } => {
                    let m = m.map_or(String::new(), |m| format!(" m={m}"));
                    format!("{family:?} n={n}{m}").to_lowercase()
                }
                Source::File(i) => a.graph[*i].display().to_string(),
            };
            let note = row.note.as_deref().unwrap_or("");
            let _ = writeln!(err, "row failed: {what} k={} seed={}: {note}", job.k, job.seed);
        }
    }
    match &a.out {
        Some(path) => write_file(path, &csv)?,
        None => out.write_all(csv.as_bytes()).map_err(io_fail)?,
    }
    Ok(if failed { EXIT_CHECK } else { EXIT_OK })
}

/// With no explicit root, the node holding several robots plays the root.
fn infer_root(p: &Placement) -> NodeId {
    p.iter().find(|(_, ids)| ids.len() > 1).map_or(0, |(&u, _)| u)
}

pub fn cmd_check(a: &CheckArgs, out: &mut dyn Write) -> CmdResult {
    let g = read_graph(&a.graph)?;
    let text = fs::read_to_string(&a.placement).map_err(|e| Failure::fatal(format!("{}: {e}", a.placement.display())))?;
    let p = parse_placement(&text).map_err(|e| Failure::fatal(format!("{}: {e}", a.placement.display())))?;
    let root = a.root.unwrap_or_else(|| infer_root(&p));
    let reports = checkers::placement_suite(&g, &p, root);
    for r in &reports {
        writeln!(out, "{r}").map_err(io_fail)?;
    }
    Ok(if checkers::all_passed(&reports) { EXIT_OK } else { EXIT_CHECK })
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_FATAL } else { EXIT_OK };
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    execute(cli, &mut out, &mut io::stderr())
}
