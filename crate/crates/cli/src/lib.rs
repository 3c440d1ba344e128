//! Command-line front end for `flatrank-core`.
//!
//! Every command produces a [`CommandResult`]: a status and a payload of
//! `key: value` lines ending in `status: <ok|inconclusive|error>`. Exit
//! codes are 0, 2 and 1 respectively.

use std::fmt;
use std::fs;
use std::ops::{Range, RangeInclusive};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use flatrank_core::laurent::DEFAULT_K_RANGE;
use flatrank_core::tree::{build_level_tree, LevelTree, RegularBall, TruncatedTree};
use flatrank_core::{
    classify_isometry, conjugate_index, flat_rank_of_example, flatness_certificate,
    four_point_delta_parallel, materialize_box, non_hyperbolicity_certificate, norm_witness,
    orbit_growth_scale, rough_cayley_graph, scale, shortest_path_metric, AffineElement, Error,
    FlatLatticeModel, GeneratedAction, Graph, MapTable, Record, SubgroupIndexK, TruncatedLaurent,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Inconclusive,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Inconclusive => 2,
            Status::Error => 1,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::Inconclusive => "inconclusive",
            Status::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub status: Status,
    pub payload: String,
}

impl CommandResult {
    fn from_record(status: Status, mut record: Record) -> Self {
        record.push("status", status);
        CommandResult { status, payload: record.to_string() }
    }

    fn ok(record: Record) -> Self {
        Self::from_record(Status::Ok, record)
    }

    fn inconclusive(record: Record) -> Self {
        Self::from_record(Status::Inconclusive, record)
    }

    pub fn error(msg: impl fmt::Display) -> Self {
        let mut r = Record::new();
        r.push("error", msg);
        Self::from_record(Status::Error, r)
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

/// Failure of a command: a library error or a problem with the inputs.
#[derive(Debug)]
pub struct CliError(String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn fail<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError(msg.into()))
}

#[derive(Debug, Parser)]
#[command(name = "flatrank", version, about = "Exact hyperbolicity, scale and flat-rank computations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Four-point δ of a graph or of a lattice box.
    Delta(DeltaArgs),
    /// Scale, index and flat-rank in ℤ ⋉ 𝔽_q((t)).
    #[command(subcommand)]
    Laurent(LaurentCommand),
    /// Norm witnesses and non-hyperbolicity certificates for lattice models.
    #[command(subcommand)]
    Lattice(LatticeCommand),
    /// Isometries and orbits on truncated trees.
    #[command(subcommand)]
    Tree(TreeCommand),
}

#[derive(Debug, Args)]
pub struct DeltaArgs {
    /// Edge-list file.
    #[arg(required_unless_present = "space", conflicts_with = "space")]
    pub graph: Option<PathBuf>,
    /// Also print the quadruple attaining δ.
    #[arg(long)]
    pub witness: bool,
    /// `box:<model-file>:<radius>` instead of a graph.
    #[arg(long)]
    pub space: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum LaurentCommand {
    /// Scale by index minimization over the chain `O_k`.
    Scale {
        q: String,
        element: String,
        /// Chain levels scanned, `a..=b` or `a..b`.
        #[arg(long, allow_hyphen_values = true)]
        k_range: Option<String>,
    },
    /// `|g O_k g⁻¹ : g O_k g⁻¹ ∩ O_k|`.
    Index {
        q: String,
        element: String,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        k: i64,
    },
    /// Flat-rank of the group generated by the probes.
    Flatrank {
        q: String,
        #[arg(required = true)]
        elements: Vec<String>,
    },
    /// Whether `O_k` minimizes every listed element.
    FlatCert {
        q: String,
        #[arg(required = true)]
        elements: Vec<String>,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        k: i64,
    },
}

#[derive(Debug, Subcommand)]
pub enum LatticeCommand {
    /// Least pair in the box violating the parallelogram-type inequality.
    Witness {
        model: PathBuf,
        #[arg(long, default_value_t = 2)]
        radius: u32,
    },
    /// Quadruple with positive deficiency and its exact scaling law.
    Certificate {
        model: PathBuf,
        #[arg(long, default_value_t = 2)]
        radius: u32,
        /// Comma-separated scaling factors.
        #[arg(long, default_value = "1,2,4")]
        lambdas: String,
    },
}

/// Window of the tree of ℤ ⋉ 𝔽_q((t)).
#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Level window, `a..=b` or `a..b`.
    #[arg(long, allow_hyphen_values = true)]
    pub levels: Option<String>,
    /// Tail exponent window, `a..b` or `a..=b`.
    #[arg(long, allow_hyphen_values = true)]
    pub tails: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum TreeCommand {
    /// Elliptic or hyperbolic, with translation length and axis.
    Classify {
        q: String,
        element: String,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Growth of `|V·h⁻ⁿ·v|`, with `V` the stabilizer of the base vertex.
    OrbitScale {
        q: String,
        element: String,
        #[arg(long, default_value_t = 6)]
        steps: usize,
        /// Level of the base vertex `(base, 0)`.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        base: i64,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Graph on the orbit of the base vertex, joined at distance `2k+1`.
    RoughCayley {
        q: String,
        /// Generators; defaults to `(1; 0 @ 0)` and `(0; 1 @ j)` for every tail exponent `j`.
        elements: Vec<String>,
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        base: i64,
        #[command(flatten)]
        window: WindowArgs,
        /// Write the graph as an edge list.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a truncated tree as an edge list plus a sidecar of interior
    /// flags and coordinates.
    Export {
        q: String,
        /// Ball of this radius in the `(q+1)`-regular tree instead of a level window.
        #[arg(long)]
        radius: Option<u32>,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
}

/// Parses and runs one invocation; `args[0]` is the program name.
pub fn run_args<I, T>(args: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => CommandResult::error(e.to_string().lines().next().unwrap_or("invalid arguments")),
    }
}

pub fn run(cli: Cli) -> CommandResult {
    let outcome = match cli.command {
        Command::Delta(args) => cmd_delta(args),
        Command::Laurent(c) => cmd_laurent(c),
        Command::Lattice(c) => cmd_lattice(c),
        Command::Tree(c) => cmd_tree(c),
    };
    outcome.unwrap_or_else(CommandResult::error)
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).or_else(|e| fail(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).or_else(|e| fail(format!("cannot write {}: {e}", path.display())))
}

fn parse_q(text: &str) -> CliResult<u64> {
    let digits = text.strip_prefix("q=").unwrap_or(text);
    let q: u64 = digits.trim().parse().or_else(|_| fail(format!("expected q=<prime>, got `{text}`")))?;
    TruncatedLaurent::zero(q)?;
    Ok(q)
}

fn parse_element(q: u64, text: &str) -> CliResult<AffineElement> {
    AffineElement::parse(q, text).map_err(|e| CliError(format!("element `{text}`: {e}")))
}

/// `a..b` (half-open) or `a..=b` (inclusive) as an inclusive pair.
fn parse_bounds(text: &str) -> CliResult<(i64, i64)> {
    let bad = || CliError(format!("expected `a..b` or `a..=b`, got `{text}`"));
    let (a, rest) = text.split_once("..").ok_or_else(bad)?;
    let a: i64 = a.trim().parse().map_err(|_| bad())?;
    let b = match rest.strip_prefix('=') {
        Some(b) => b.trim().parse::<i64>().map_err(|_| bad())?,
        None => rest.trim().parse::<i64>().map_err(|_| bad())? - 1,
    };
    if b < a {
        return fail(format!("range `{text}` is empty"));
    }
    Ok((a, b))
}

fn inclusive(text: &str) -> CliResult<RangeInclusive<i64>> {
    parse_bounds(text).map(|(a, b)| a..=b)
}

fn half_open(text: &str) -> CliResult<Range<i64>> {
    parse_bounds(text).map(|(a, b)| a..b + 1)
}

fn cmd_delta(args: DeltaArgs) -> CliResult<CommandResult> {
    let mut record = Record::new();
    let (space, labels): (_, Option<Vec<String>>) = match (&args.graph, &args.space) {
        (Some(path), None) => {
            let graph = Graph::parse_edge_list(&read(path)?)?;
            (shortest_path_metric(&graph)?, None)
        }
        (None, Some(space)) => {
            let rest = space.strip_prefix("box:").ok_or_else(|| CliError(format!("expected box:<model>:<radius>, got `{space}`")))?;
            let (file, radius) = rest
                .rsplit_once(':')
                .ok_or_else(|| CliError(format!("expected box:<model>:<radius>, got `{space}`")))?;
            let radius: u32 = radius.parse().or_else(|_| fail(format!("bad radius `{radius}`")))?;
            let model = FlatLatticeModel::parse(&read(Path::new(file))?)?;
            let (points, space) = materialize_box(&model, radius)?;
            (space, Some(points.iter().map(|p| p.to_string()).collect()))
        }
        _ => return fail("give a graph file or --space, not both"),
    };
    if space.is_empty() {
        return fail("empty space");
    }
    let cert = four_point_delta_parallel(&space);
    record.extend(&cert.to_record(args.witness));
    if let (true, Some(labels)) = (args.witness, labels) {
        record.push("witness-points", cert.witness.iter().map(|&i| labels[i].as_str()).collect::<Vec<_>>().join(" "));
    }
    Ok(CommandResult::ok(record))
}

fn cmd_laurent(cmd: LaurentCommand) -> CliResult<CommandResult> {
    let mut r = Record::new();
    match cmd {
        LaurentCommand::Scale { q, element, k_range } => {
            let q = parse_q(&q)?;
            let g = parse_element(q, &element)?;
            let range = k_range.as_deref().map(inclusive).transpose()?.unwrap_or(DEFAULT_K_RANGE);
            r.push("scale", scale(&g, range)?);
        }
        LaurentCommand::Index { q, element, k } => {
            let q = parse_q(&q)?;
            let g = parse_element(q, &element)?;
            r.push("index", conjugate_index(&g, SubgroupIndexK(k))?);
            r.push("k", k);
        }
        LaurentCommand::Flatrank { q, elements } => {
            let q = parse_q(&q)?;
            let probes = elements.iter().map(|e| parse_element(q, e)).collect::<CliResult<Vec<_>>>()?;
            r.push("flat-rank", flat_rank_of_example(q, &probes)?);
        }
        LaurentCommand::FlatCert { q, elements, k } => {
            let q = parse_q(&q)?;
            let els = elements.iter().map(|e| parse_element(q, e)).collect::<CliResult<Vec<_>>>()?;
            r.extend(&flatness_certificate(q, &els, SubgroupIndexK(k))?.to_record());
        }
    }
    Ok(CommandResult::ok(r))
}

fn cmd_lattice(cmd: LatticeCommand) -> CliResult<CommandResult> {
    let mut r = Record::new();
    match cmd {
        LatticeCommand::Witness { model, radius } => {
            let model = FlatLatticeModel::parse(&read(&model)?)?;
            r.push("radius", radius);
            match norm_witness(&model, radius) {
                Some((x, y)) => {
                    r.push("x", x).push("y", y);
                    Ok(CommandResult::ok(r))
                }
                None => {
                    r.push("witness", "none");
                    Ok(CommandResult::inconclusive(r))
                }
            }
        }
        LatticeCommand::Certificate { model, radius, lambdas } => {
            let model = FlatLatticeModel::parse(&read(&model)?)?;
            let lambdas = lambdas
                .split(',')
                .map(|s| s.trim().parse::<u64>().or_else(|_| fail(format!("bad lambda `{s}`"))))
                .collect::<CliResult<Vec<_>>>()?;
            r.push("radius", radius);
            match non_hyperbolicity_certificate(&model, radius, &lambdas)? {
                Some(cert) => {
                    r.extend(&cert.to_record());
                    Ok(CommandResult::ok(r))
                }
                None => {
                    r.push("certificate", "none");
                    Ok(CommandResult::inconclusive(r))
                }
            }
        }
    }
}

fn level_window(window: &WindowArgs, default_levels: RangeInclusive<i64>, q: u64) -> CliResult<LevelTree> {
    let levels = window.levels.as_deref().map(inclusive).transpose()?.unwrap_or(default_levels);
    let tails = match window.tails.as_deref() {
        Some(t) => half_open(t)?,
        None => *levels.start()..*levels.end(),
    };
    Ok(build_level_tree(q, levels, tails)?)
}

fn cmd_tree(cmd: TreeCommand) -> CliResult<CommandResult> {
    let mut r = Record::new();
    match cmd {
        TreeCommand::Classify { q, element, window } => {
            let q = parse_q(&q)?;
            let g = parse_element(q, &element)?;
            let lt = level_window(&window, -4..=4, q)?;
            let report = classify_isometry(lt.tree(), &lt.affine_map(&g)?)?;
            r.extend(&report.to_record());
            Ok(if report.window_limited { CommandResult::inconclusive(r) } else { CommandResult::ok(r) })
        }
        TreeCommand::OrbitScale { q, element, steps, base, window } => {
            let q = parse_q(&q)?;
            let h = parse_element(q, &element)?;
            // h⁻ⁿ·(base, 0) sits at level base − n·h.n.
            let reach = steps as i64 * h.n.abs();
            let default = if h.n >= 0 { base - reach - 1..=base + 1 } else { base - 1..=base + reach };
            let tails_default = base..*default.end();
            let lt = match window.tails {
                Some(_) => level_window(&window, default, q)?,
                None => build_level_tree(
                    q,
                    window.levels.as_deref().map(inclusive).transpose()?.unwrap_or(default),
                    tails_default,
                )?,
            };
            let v = lt
                .base_vertex(base)
                .ok_or_else(|| CliError(format!("base vertex ({base}, 0) lies outside the window")))?;
            let n = lt.tree().len();
            let gens = stabilizer_generators(&lt, base)?;
            let action = GeneratedAction::new(lt.tree(), gens)?;
            let hmap = MapTable::from_map(n, &lt.affine_map(&h)?);
            let trace = orbit_growth_scale(&action, &hmap, v, steps)?;
            r.extend(&trace.to_record());
            Ok(if trace.is_conclusive() { CommandResult::ok(r) } else { CommandResult::inconclusive(r) })
        }
        TreeCommand::RoughCayley { q, elements, k, base, window, out } => {
            let q = parse_q(&q)?;
            let lt = level_window(&window, -3..=3, q)?;
            let els = if elements.is_empty() {
                let mut d = vec![AffineElement::translation(q, 1)?];
                for j in lt.tail_window() {
                    d.push(AffineElement::additive(TruncatedLaurent::monomial(q, 1, j)?));
                }
                d
            } else {
                elements.iter().map(|e| parse_element(q, e)).collect::<CliResult<Vec<_>>>()?
            };
            let n = lt.tree().len();
            let tables = els
                .iter()
                .map(|g| Ok(MapTable::from_map(n, &lt.affine_map(g)?)))
                .collect::<CliResult<Vec<_>>>()?;
            let action = GeneratedAction::new(lt.tree(), tables)?;
            let x = lt
                .base_vertex(base)
                .ok_or_else(|| CliError(format!("base vertex ({base}, 0) lies outside the window")))?;
            let (graph, vertices) = rough_cayley_graph(lt.tree(), &action, x, k)?;
            r.push("vertices", vertices.len());
            r.push("edges", graph.edges().len());
            r.push("reach", 2 * k + 1);
            if let Some(path) = out {
                write(&path, &graph.to_edge_list())?;
                r.push("written", path.display());
            }
            Ok(CommandResult::ok(r))
        }
        TreeCommand::Export { q, radius, window, edges, sidecar } => {
            let q = parse_q(&q)?;
            let (tree, side): (TruncatedTree, String) = match radius {
                Some(rad) => {
                    let ball = RegularBall::new(q as usize, rad)?;
                    let side = ball.tree().sidecar();
                    (ball.tree().clone(), side)
                }
                None => {
                    let lt = level_window(&window, -3..=3, q)?;
                    let side = lt.sidecar();
                    (lt.tree().clone(), side)
                }
            };
            write(&edges, &tree.to_edge_list())?;
            if let Some(path) = sidecar {
                write(&path, &side)?;
            }
            r.push("vertices", tree.len());
            r.push("edges", tree.len() - 1);
            r.push("interior", tree.interior_vertices().count());
            Ok(CommandResult::ok(r))
        }
    }
}

/// `(0, tʲ)` for every tail exponent `j ≥ base`: together they generate the
/// stabilizer of `(base, 0)` as it acts on the window.
fn stabilizer_generators(lt: &LevelTree, base: i64) -> CliResult<Vec<MapTable>> {
    let n = lt.tree().len();
    let q = lt.q();
    let mut gens = Vec::new();
    for j in lt.tail_window().filter(|&j| j >= base) {
        let g = AffineElement::additive(TruncatedLaurent::monomial(q, 1, j)?);
        gens.push(MapTable::from_map(n, &lt.affine_map(&g)?));
    }
    Ok(gens)
}
