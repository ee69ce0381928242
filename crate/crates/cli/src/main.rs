//! `sg4d`: generate synthetic streams, build scene graphs, benchmark, and
//! query the result.

use std::io::{self, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sg4d_annotator::{serve_backend, Annotator, DescriberConfig, Endpoint, MockDescriber};
use sg4d_engine::{bench, generate, run_config_input, write_outputs, RunConfig, SceneSpec};
use sg4d_query::{serve_stdio, serve_tcp, QueryService, ToolRequest};
use sg4d_scenegraph::{GraphHandle, SceneGraph4D};

/// Overrides the describer endpoint of any config (`mock`, `tcp://host:port`
/// or a shell command).
const DESCRIBER_ENV: &str = "SG4D_DESCRIBER";

#[derive(Parser)]
#[command(name = "sg4d", version, about = "Streaming 4D scene graphs with batched semantic annotation")]
struct Cli {
    /// Run configuration (TOML). Defaults apply when omitted.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// More log output; repeat for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic stream, occupancy snapshot and manifest.
    Generate {
        /// Scene description (TOML); the two-room scene when omitted.
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long, default_value = "scene")]
        out: PathBuf,
    },
    /// Run the pipeline and write the graph and statistics.
    Run {
        #[command(flatten)]
        overrides: RunOverrides,
        /// Keep serving queries over TCP at this address during and after the run.
        #[arg(long, value_name = "ADDR")]
        serve: Option<String>,
    },
    /// Batching, frame-rate and selection-latency measurements.
    Bench {
        #[command(flatten)]
        overrides: RunOverrides,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Serve the query tools over TCP, or over stdin/stdout.
    Serve {
        #[arg(long)]
        graph: PathBuf,
        /// Listen address; stdin/stdout when omitted.
        #[arg(long, value_name = "ADDR")]
        tcp: Option<String>,
    },
    /// Run one query tool against a persisted graph.
    Query {
        #[arg(long)]
        graph: PathBuf,
        #[command(subcommand)]
        tool: QueryTool,
    },
    /// Act as a describer backend, answering protocol lines with the mock.
    DescribeMock {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        d1: usize,
        #[arg(long, default_value_t = 64)]
        d2: usize,
        /// Listen address; stdin/stdout when omitted.
        #[arg(long, value_name = "ADDR")]
        tcp: Option<String>,
    },
    /// Print the default configuration.
    DefaultConfig,
}

#[derive(Args)]
struct RunOverrides {
    /// Frame stream (JSONL); the configured scene is synthesized when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum QueryTool {
    /// Objects most similar to a text query.
    Search {
        #[arg(long)]
        text: String,
        #[arg(short, default_value_t = 10)]
        n: usize,
    },
    /// Objects within a radius of a point.
    Radius {
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        position: [f64; 3],
        #[arg(long)]
        radius: f64,
    },
    /// Region summaries with entry and exit times.
    Regions,
    /// Objects of one region most similar to a text query.
    InRegion {
        #[arg(long)]
        region: u64,
        #[arg(long)]
        text: String,
        #[arg(short, default_value_t = 10)]
        n: usize,
    },
    /// Poses along the agent path between two points.
    Trajectory {
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        start: [f64; 3],
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        end: [f64; 3],
        #[arg(short, default_value_t = 10)]
        n: usize,
    },
}

impl QueryTool {
    fn request(&self) -> ToolRequest {
        let (tool, args) = match self {
            QueryTool::Search { text, n } => ("semantic_search", json!({ "text": text, "n": n })),
            QueryTool::Radius { position, radius } => ("fragments_in_radius", json!({ "position": position, "radius": radius })),
            QueryTool::Regions => ("region_information", Value::Null),
            QueryTool::InRegion { region, text, n } => {
                ("objects_in_region", json!({ "region_id": region, "text": text, "n": n }))
            }
            QueryTool::Trajectory { start, end, n } => ("agent_trajectory", json!({ "start": start, "end": end, "n": n })),
        };
        ToolRequest { tool: tool.into(), args }
    }
}

fn parse_vec3(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|p: Vec<f64>| format!("expected x,y,z, got {} values", p.len()))
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Ok(endpoint) = std::env::var(DESCRIBER_ENV) {
        cfg.describer.endpoint = Endpoint::from(endpoint);
    }
    Ok(cfg)
}

fn apply(cfg: &mut RunConfig, o: &RunOverrides) {
    if let Some(input) = &o.input {
        cfg.input = Some(input.clone());
    }
    if let Some(out) = &o.out {
        cfg.output = out.clone();
    }
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
}

/// Embedder matching the graph: the explicit config when one is given,
/// otherwise the describer recorded in the graph's metadata.
fn embedder_for(graph: &SceneGraph4D, config: Option<&Path>) -> Result<Annotator> {
    let mut d: DescriberConfig = match config {
        Some(_) => load_config(config)?.describer(),
        None => {
            let mut d = DescriberConfig::default();
            if let Some(m) = graph.meta.get("describer") {
                if let Some(e) = m["endpoint"].as_str() {
                    d.endpoint = Endpoint::from(e.to_string());
                }
                d.d1 = m["d1"].as_u64().map_or(d.d1, |v| v as usize);
                d.d2 = m["d2"].as_u64().map_or(d.d2, |v| v as usize);
                d.mock_seed = m["seed"].as_u64().unwrap_or(d.mock_seed);
            }
            d
        }
    };
    if let Ok(endpoint) = std::env::var(DESCRIBER_ENV) {
        d.endpoint = Endpoint::from(endpoint);
    }
    let backend = d.connect().context("connecting the text embedder")?;
    Ok(Annotator::new(backend, d.d1, d.d2))
}

fn query_service(graph_path: &Path, config: Option<&Path>) -> Result<QueryService> {
    let graph = SceneGraph4D::load(graph_path).with_context(|| format!("loading {}", graph_path.display()))?;
    let embedder = embedder_for(&graph, config)?;
    Ok(QueryService::new(GraphHandle::new(graph), Some(Box::new(embedder))))
}

/// Prints to stdout; a closed pipe (`sg4d ... | head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn listen(addr: &str) -> Result<TcpListener> {
    let listener = TcpListener::bind(addr).with_context(|| format!("binding {addr}"))?;
    // the bound address, so callers passing port 0 learn the real one
    eprintln!("listening on {}", listener.local_addr()?);
    Ok(listener)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Generate { scene, out } => {
            let spec = match scene {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    toml::from_str::<SceneSpec>(&text).with_context(|| format!("parsing {}", p.display()))?
                }
                None => load_config(config)?.scene.unwrap_or_default(),
            };
            let scene = generate(&spec)?;
            scene.write_to(&out)?;
            emit(&format!(
                "wrote {} frames, {} objects to {}",
                scene.manifest.frames,
                scene.manifest.objects.len(),
                out.display()
            ))?;
        }
        Command::Run { overrides, serve } => {
            let mut cfg = load_config(config)?;
            apply(&mut cfg, &overrides);
            let server = match &serve {
                Some(addr) => {
                    let handle = GraphHandle::new(SceneGraph4D::new());
                    let d = cfg.describer();
                    let embedder = Annotator::new(d.connect()?, d.d1, d.d2);
                    let service = Arc::new(QueryService::new(handle.clone(), Some(Box::new(embedder))));
                    let listener = listen(addr)?;
                    let thread = std::thread::spawn(move || serve_tcp(service, listener));
                    Some((handle, thread))
                }
                None => None,
            };
            let out = run_config_input(&cfg, server.as_ref().map(|(h, _)| h.clone()))?;
            write_outputs(&cfg.output, &out)?;
            emit(&out.stats.table())?;
            emit(&format!("outputs in {}", cfg.output.display()))?;
            if let Some((_, thread)) = server {
                thread.join().map_err(|_| anyhow::anyhow!("query server panicked"))??;
            }
        }
        Command::Bench { overrides, json } => {
            let mut cfg = load_config(config)?;
            apply(&mut cfg, &overrides);
            let report = bench(&cfg)?;
            if json {
                emit(&serde_json::to_string_pretty(&report)?)?;
            } else {
                emit(&report.table())?;
            }
        }
        Command::Serve { graph, tcp } => {
            let service = query_service(&graph, config)?;
            match tcp {
                Some(addr) => serve_tcp(Arc::new(service), listen(&addr)?)?,
                None => serve_stdio(&service, io::stdin().lock(), io::stdout().lock())?,
            }
        }
        Command::Query { graph, tool } => {
            let service = query_service(&graph, config)?;
            let reply = service.handle(&tool.request());
            emit(&serde_json::to_string_pretty(&reply)?)?;
            if !reply.ok {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::DescribeMock { seed, d1, d2, tcp } => {
            if d1 == 0 || d2 == 0 {
                bail!("embedding dims must be positive");
            }
            let mut mock = MockDescriber::new(seed, d1, d2);
            match tcp {
                Some(addr) => {
                    for stream in listen(&addr)?.incoming() {
                        let stream = stream?;
                        let reader = BufReader::new(stream.try_clone()?);
                        if let Err(e) = serve_backend(&mut mock, reader, stream) {
                            log::warn!("describer connection: {e}");
                        }
                    }
                }
                None => serve_backend(&mut mock, io::stdin().lock(), io::stdout().lock())?,
            }
        }
        Command::DefaultConfig => emit(RunConfig::default().to_toml().trim_end())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
