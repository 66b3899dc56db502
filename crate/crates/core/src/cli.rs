//! Command-line front end. The `viewpoints` binary is a thin wrapper around
//! [`run`], which takes explicit output streams so it can be driven in-process.
//!
//! Exit codes: 0 success, 1 validation or assertion failure, 2 usage error.
//! Numbers print with six decimals; unreachable results print `unreachable`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::graph::{Agency, KnowledgeGraph, NewResource, Paradigm, Polarity, ResourceId, ResourceKind, Timestamp, ViewpointType};
use crate::io::{export_map, replay, write_log, EventLog, ExportFormat};
use crate::perspective::{build_map, KnowledgeMap, Perspective};
use crate::query::{k_nearest, nearest_via, neighborhood, shortest_paths, Neighborhood, PathAnswer, Ranked};
use crate::session::{self, record_feedback, FeedbackEvent, ScenarioScript};
use crate::simulator::{self, SimulationConfig};

#[derive(Parser, Debug)]
#[command(name = "viewpoints", version, about = "Subjective knowledge graph: viewpoints, perspectives, knowledge paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Create an empty event log.
    Init { log: PathBuf },
    /// Register a resource.
    AddResource(AddResourceArgs),
    /// Append a viewpoint.
    AddViewpoint(AddViewpointArgs),
    /// Record an agent's feedback on a document.
    Feedback(FeedbackArgs),
    /// Query the knowledge map.
    Query {
        #[command(subcommand)]
        query: QueryCommand,
    },
    /// Knowledge map operations.
    Map {
        #[command(subcommand)]
        map: MapCommand,
    },
    /// Scripted scenarios.
    Scenario {
        #[command(subcommand)]
        scenario: ScenarioCommand,
    },
    /// Run a multi-agent simulation.
    Simulate(SimulateArgs),
    /// Serve the HTTP API over a log.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Agent,
    Document,
    Topic,
}

impl From<KindArg> for ResourceKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Agent => ResourceKind::Agent,
            KindArg::Document => ResourceKind::Document,
            KindArg::Topic => ResourceKind::Topic,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AgencyArg {
    Human,
    Artificial,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ParadigmArg {
    Logic,
    Mine,
    Feel,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolarityArg {
    #[value(alias = "pos", alias = "+")]
    Positive,
    #[value(alias = "neg", alias = "-")]
    Negative,
}

impl From<PolarityArg> for Polarity {
    fn from(p: PolarityArg) -> Self {
        match p {
            PolarityArg::Positive => Polarity::Positive,
            PolarityArg::Negative => Polarity::Negative,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Dot,
    Json,
}

#[derive(Args, Debug)]
struct AddResourceArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, value_enum)]
    agency: Option<AgencyArg>,
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    id: Option<String>,
    /// Defaults to the latest timestamp in the log.
    #[arg(long)]
    at: Option<u64>,
}

#[derive(Args, Debug)]
struct AddViewpointArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    emitter: String,
    #[arg(long)]
    r2: String,
    #[arg(long)]
    r3: String,
    #[arg(long, value_enum)]
    paradigm: ParadigmArg,
    #[arg(long, value_enum, allow_hyphen_values = true)]
    polarity: PolarityArg,
    #[arg(long)]
    at: u64,
}

#[derive(Args, Debug)]
struct FeedbackArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    agent: String,
    #[arg(long)]
    document: String,
    #[arg(long)]
    topic: Option<String>,
    #[arg(long, value_enum, allow_hyphen_values = true)]
    polarity: PolarityArg,
    #[arg(long)]
    at: u64,
}

#[derive(Args, Debug, Clone)]
pub struct ViewArgs {
    #[arg(long)]
    log: PathBuf,
    /// Preset name (`neutral`), inline JSON, or a perspective JSON file.
    #[arg(long, default_value = "neutral")]
    perspective: String,
    /// Evaluation time; defaults to the latest timestamp in the log.
    #[arg(long)]
    now: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum QueryCommand {
    /// All tied shortest paths between two resources.
    Paths {
        #[command(flatten)]
        view: ViewArgs,
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
    },
    /// Closest resources to an origin.
    Near {
        #[command(flatten)]
        view: ViewArgs,
        #[arg(long)]
        origin: String,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Rank by route length through each candidate to this resource.
        #[arg(long)]
        via: Option<String>,
    },
    /// Resources within a radius of an origin.
    Neighborhood {
        #[command(flatten)]
        view: ViewArgs,
        #[arg(long)]
        origin: String,
        #[arg(long)]
        radius: f64,
    },
}

#[derive(Subcommand, Debug)]
enum MapCommand {
    /// Write the knowledge map as DOT or JSON.
    Export {
        #[command(flatten)]
        view: ViewArgs,
        #[arg(long, value_enum, default_value = "dot")]
        format: FormatArg,
    },
}

#[derive(Subcommand, Debug)]
enum ScenarioCommand {
    /// Run a scenario script (the built-in apple scenario by default).
    Run {
        #[arg(long)]
        script: Option<PathBuf>,
        /// Also write the resulting event log here.
        #[arg(long)]
        write_log: Option<PathBuf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Config file, or `default` / `apple` for the shipped configs.
    #[arg(long)]
    config: String,
    /// Metrics output (JSON Lines); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Final event log output.
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: std::net::SocketAddr,
    #[arg(long, default_value = "*")]
    cors_origin: String,
}

enum Failure {
    Usage(String),
    Invalid(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::SameResource(_) => Failure::Usage(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "usage error: {m}");
            2
        }
        Err(Failure::Invalid(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
    }
}

fn load(log: &Path) -> Result<KnowledgeGraph> {
    let file = fs::File::open(log)?;
    replay(std::io::BufReader::new(file))
}

/// Opens the log, applies `op`, and appends the new records.
fn mutate<T>(log: &Path, op: impl FnOnce(&mut KnowledgeGraph) -> Result<T>) -> Result<T> {
    if !log.exists() {
        return Err(Error::InvalidArgument(format!(
            "log {} does not exist (run `init` first)",
            log.display()
        )));
    }
    let (mut handle, mut graph) = EventLog::open(log)?;
    let out = op(&mut graph)?;
    handle.sync(&graph)?;
    Ok(out)
}

fn load_perspective(input: &str) -> Result<Perspective> {
    let trimmed = input.trim();
    if trimmed.starts_with('{') || trimmed == "neutral" {
        return Perspective::resolve(trimmed);
    }
    let text = fs::read_to_string(trimmed)
        .map_err(|e| Error::InvalidPerspective(format!("{trimmed}: {e}")))?;
    Perspective::from_json(&text)
}

/// Loads the log named by `view` and builds its knowledge map.
pub fn view_map(view: &ViewArgs) -> Result<KnowledgeMap> {
    let graph = load(&view.log)?;
    map_of(&graph, &view.perspective, view.now)
}

fn map_of(graph: &KnowledgeGraph, perspective: &str, now: Option<u64>) -> Result<KnowledgeMap> {
    let perspective = load_perspective(perspective)?;
    let now = now.map(Timestamp).unwrap_or(graph.max_timestamp());
    build_map(graph, &perspective, now)
}

pub fn render_paths(answer: &PathAnswer) -> String {
    if answer.paths.is_empty() {
        return "unreachable\n".into();
    }
    answer
        .paths
        .iter()
        .map(|p| {
            let ids: Vec<&str> = p.nodes.iter().map(ResourceId::as_str).collect();
            format!("{} length {:.6}\n", ids.join(","), p.length)
        })
        .collect()
}

pub fn render_ranked(ranked: &[Ranked]) -> String {
    ranked
        .iter()
        .map(|r| format!("{} {:.6}\n", r.id, r.distance))
        .collect()
}

pub fn render_neighborhood(hood: &Neighborhood) -> String {
    let mut out: String = hood
        .nodes
        .iter()
        .map(|r| format!("node {} {:.6}\n", r.id, r.distance))
        .collect();
    for e in &hood.edges {
        out.push_str(&format!("edge {} {} {:.6}\n", e.a, e.b, e.distance));
    }
    out
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Init { log } => {
            EventLog::create(&log)?;
            writeln!(out, "initialized {}", log.display())?;
        }
        Command::AddResource(a) => {
            let id = mutate(&a.log, |g| {
                let mut new = NewResource::new(a.kind.into());
                new.id = a.id.clone();
                new.label = a.label.clone();
                new.agency = a.agency.map(|x| match x {
                    AgencyArg::Human => Agency::Human,
                    AgencyArg::Artificial => Agency::Artificial,
                });
                new.at = a.at.map(Timestamp).unwrap_or(g.max_timestamp());
                g.add_resource(new)
            })?;
            writeln!(out, "{id}")?;
        }
        Command::AddViewpoint(a) => {
            let paradigm = match a.paradigm {
                ParadigmArg::Logic => Paradigm::Logic,
                ParadigmArg::Mine => Paradigm::Mine,
                ParadigmArg::Feel => Paradigm::Feel,
            };
            let id = mutate(&a.log, |g| {
                g.add_viewpoint(
                    &a.emitter,
                    &a.r2,
                    &a.r3,
                    ViewpointType::new(paradigm, a.polarity.into()),
                    Timestamp(a.at),
                )
            })?;
            writeln!(out, "{id}")?;
        }
        Command::Feedback(a) => {
            let event = FeedbackEvent {
                agent: ResourceId::new(a.agent)?,
                document: ResourceId::new(a.document)?,
                topic: a.topic.map(ResourceId::new).transpose()?,
                polarity: a.polarity.into(),
                at: Timestamp(a.at),
            };
            let ids = mutate(&a.log, |g| record_feedback(g, &event))?;
            for id in ids {
                writeln!(out, "{id}")?;
            }
        }
        Command::Query { query } => match query {
            QueryCommand::Paths { view, source, target } => {
                if source == target {
                    return Err(Error::SameResource(source).into());
                }
                let map = view_map(&view)?;
                out.write_all(render_paths(&shortest_paths(&map, &source, &target)?).as_bytes())?;
            }
            QueryCommand::Near {
                view,
                origin,
                kind,
                k,
                via,
            } => {
                let map = view_map(&view)?;
                let kind = kind.map(ResourceKind::from);
                let ranked = match via {
                    Some(via) => nearest_via(&map, &origin, &via, kind, k)?,
                    None => k_nearest(&map, &origin, kind, k)?,
                };
                out.write_all(render_ranked(&ranked).as_bytes())?;
            }
            QueryCommand::Neighborhood { view, origin, radius } => {
                let map = view_map(&view)?;
                out.write_all(render_neighborhood(&neighborhood(&map, &origin, radius)?).as_bytes())?;
            }
        },
        Command::Map {
            map: MapCommand::Export { view, format },
        } => {
            let map = view_map(&view)?;
            let format = match format {
                FormatArg::Dot => ExportFormat::Dot,
                FormatArg::Json => ExportFormat::Json,
            };
            out.write_all(&export_map(&map, format))?;
        }
        Command::Scenario {
            scenario: ScenarioCommand::Run { script, write_log: log_out, json },
        } => {
            let script = match script {
                Some(path) => ScenarioScript::from_json(&fs::read_to_string(path)?)?,
                None => session::apple_script(),
            };
            let (report, graph) = session::execute(&script)?;
            if let Some(path) = log_out {
                write_log(&graph, fs::File::create(path)?)?;
            }
            if json {
                writeln!(out, "{}", report.to_json())?;
            } else {
                out.write_all(report.render().as_bytes())?;
            }
            return Ok(if report.all_passed() { 0 } else { 1 });
        }
        Command::Simulate(a) => {
            let config = match a.config.as_str() {
                "default" => SimulationConfig::default_experiment(),
                "apple" => SimulationConfig::apple_learners(),
                path => SimulationConfig::from_json(&fs::read_to_string(path)?)?,
            };
            let run = simulator::run(config)?;
            match a.out {
                Some(path) => run.write_metrics(fs::File::create(path)?)?,
                None => run.write_metrics(&mut *out)?,
            }
            if let Some(path) = a.events {
                write_log(&run.graph, fs::File::create(path)?)?;
            }
        }
        Command::Serve(a) => {
            let state = crate::service::AppState::open(&a.log)?;
            writeln!(out, "listening on {}", a.addr)?;
            out.flush()?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(crate::service::serve(state, a.addr, &a.cors_origin))?;
        }
    }
    Ok(0)
}
