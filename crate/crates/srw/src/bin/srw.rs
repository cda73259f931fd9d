//! Command-line front end: graph files in, simulations, probabilities,
//! densities, occupation estimates, and the verification suite out.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage error, 3 input error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use srw::errw;
use srw::harness;
use srw::io;
use srw::mixing::{self, DensityParams, QuadratureSpec};
use srw::star_graph::{StarGraph, VertexId, WeightConfig};
use srw::vrjp;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "srw",
    about = "Star-symmetric reinforced random walks: simulate, evaluate, verify",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read, validate, and write graph files.
    Graph {
        #[command(subcommand)]
        action: GraphAction,
    },
    /// Simulate the reinforced walk or the jump process.
    Sim {
        #[command(subcommand)]
        action: SimAction,
    },
    /// Exact path probabilities.
    Prob {
        #[command(subcommand)]
        action: ProbAction,
    },
    /// Mixing density evaluation and normalization.
    Density {
        #[command(subcommand)]
        action: DensityAction,
    },
    /// Monte Carlo estimate of the occupation limit Y.
    EstimateY(EstimateArgs),
    /// Run verification suites.
    Verify {
        #[command(subcommand)]
        action: VerifyAction,
    },
}

#[derive(Subcommand)]
enum GraphAction {
    /// Parse a graph file and write it back in canonical form.
    Build {
        #[arg(long)]
        graph: PathBuf,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse a graph file and report whether it is a valid star graph.
    Validate {
        #[arg(long)]
        graph: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SimCommon {
    #[arg(long)]
    graph: PathBuf,
    /// Start vertex; overrides the graph file's start.
    #[arg(long)]
    start: Option<String>,
    /// Master seed; defaults to SRW_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum SimAction {
    /// Discrete-time reinforced walk.
    Errw {
        #[command(flatten)]
        common: SimCommon,
        #[arg(long)]
        steps: u64,
    },
    /// Continuous-time jump process under conductances drawn from the
    /// Gamma prior of the annealing lemma.
    Vrjp {
        #[command(flatten)]
        common: SimCommon,
        /// Stop after this many jumps.
        #[arg(long, conflicts_with = "time")]
        jumps: Option<u64>,
        /// Stop at this process time.
        #[arg(long)]
        time: Option<f64>,
    },
}

#[derive(Subcommand)]
enum ProbAction {
    /// Probability of a comma-separated vertex path.
    Path {
        #[arg(long)]
        graph: PathBuf,
        /// Comma-separated vertex names, starting at the start vertex.
        #[arg(long)]
        path: String,
        #[arg(long, value_enum, default_value = "sequential")]
        method: Method,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Sequential,
    Closed,
}

#[derive(Subcommand)]
enum DensityAction {
    /// Evaluate the log density at a chart point.
    Eval {
        #[arg(long)]
        graph: PathBuf,
        /// Comma-separated chart coordinates; the chart anchor when omitted.
        #[arg(long)]
        coords: Option<String>,
    },
    /// Quadrature of the density over the chart; should be close to 1.
    Normalize {
        #[arg(long)]
        graph: PathBuf,
        /// Gauss-Legendre points per axis.
        #[arg(long, default_value_t = 64)]
        points: usize,
        /// Endpoint substitution for alpha_e < 1.
        #[arg(long)]
        substitution: bool,
    },
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    steps: u64,
    #[arg(long, default_value_t = 100)]
    replicates: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum VerifyAction {
    /// Run every invariant suite on the built-in graph zoo.
    All {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn master_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("SRW_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(0)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| e.to_string()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

struct Loaded {
    graph: Arc<StarGraph>,
    config: WeightConfig,
}

/// Reads a graph file and resolves the weight configuration: explicit
/// alphas when present, otherwise uniform weights; --start wins over the
/// file's start vertex.
fn load(path: &PathBuf, start: &Option<String>) -> Result<Loaded, String> {
    let bundle = io::read_graph(path).map_err(|e| e.to_string())?;
    let start_id: Option<VertexId> = match start {
        Some(name) => Some(
            bundle
                .graph
                .vertex(name)
                .ok_or_else(|| format!("unknown start vertex {name:?}"))?,
        ),
        None => bundle.start,
    };
    let config = match bundle.config {
        Some(cfg) => match start_id {
            Some(v) if v != cfg.start() => cfg.with_start(v),
            _ => cfg,
        },
        None => {
            let v = start_id.ok_or_else(|| {
                "no start vertex: add \"start\" to the file or pass --start".to_string()
            })?;
            WeightConfig::uniform(Arc::clone(&bundle.graph), v)
        }
    };
    Ok(Loaded {
        graph: bundle.graph,
        config,
    })
}

fn parse_path(g: &StarGraph, text: &str) -> Result<Vec<VertexId>, String> {
    text.split(',')
        .map(|name| {
            let name = name.trim();
            g.vertex(name)
                .ok_or_else(|| format!("unknown vertex {name:?} in --path"))
        })
        .collect()
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Graph { action } => match action {
            GraphAction::Build { graph, out } => {
                let bundle = io::read_graph(&graph).map_err(|e| e.to_string())?;
                let text =
                    io::graph_to_string(&bundle.graph, bundle.config.as_ref(), bundle.start);
                emit(&out, &text)?;
                Ok(0)
            }
            GraphAction::Validate { graph } => {
                let bundle = io::read_graph(&graph).map_err(|e| e.to_string())?;
                println!(
                    "ok: {} vertices, {} edges, {} classes, |V1| = {}",
                    bundle.graph.vertex_count(),
                    bundle.graph.edge_count(),
                    bundle.graph.class_count(),
                    bundle.graph.v1_len()
                );
                Ok(0)
            }
        },
        Command::Sim { action } => match action {
            SimAction::Errw { common, steps } => {
                let loaded = load(&common.graph, &common.start)?;
                let mut rng = ChaCha8Rng::seed_from_u64(master_seed(common.seed));
                let record = errw::simulate_errw(&loaded.config, steps, &mut rng)
                    .map_err(|e| e.to_string())?;
                let text = match common.format {
                    Format::Csv => io::trajectory_csv(&loaded.graph, &record.vertices),
                    Format::Json => {
                        let names: Vec<&str> = record
                            .vertices
                            .iter()
                            .map(|&v| loaded.graph.name(v))
                            .collect();
                        let value = serde_json::json!({
                            "vertices": names,
                            "edge_counts": record.edge_counts,
                            "class_counts": record.class_counts,
                        });
                        format!("{:#}\n", value)
                    }
                };
                emit(&common.out, &text)?;
                Ok(0)
            }
            SimAction::Vrjp {
                common,
                jumps,
                time,
            } => {
                let loaded = load(&common.graph, &common.start)?;
                let horizon = match (jumps, time) {
                    (Some(j), None) => vrjp::Horizon::Jumps(j),
                    (None, Some(t)) => vrjp::Horizon::Time(t),
                    _ => return Err("pass exactly one of --jumps or --time".to_string()),
                };
                let mut rng = ChaCha8Rng::seed_from_u64(master_seed(common.seed));
                let w = vrjp::sample_class_conductances(&loaded.config, &mut rng);
                let traj = vrjp::simulate_vrjp(
                    &loaded.graph,
                    &w,
                    loaded.config.start(),
                    horizon,
                    &mut rng,
                )
                .map_err(|e| e.to_string())?;
                let text = match common.format {
                    Format::Csv => io::timed_trajectory_csv(&loaded.graph, &traj),
                    Format::Json => {
                        let jumps: Vec<serde_json::Value> = traj
                            .jumps
                            .iter()
                            .map(|&(t, v)| {
                                serde_json::json!({"time": t, "vertex": loaded.graph.name(v)})
                            })
                            .collect();
                        format!("{:#}\n", serde_json::json!({ "jumps": jumps }))
                    }
                };
                emit(&common.out, &text)?;
                Ok(0)
            }
        },
        Command::Prob { action } => match action {
            ProbAction::Path {
                graph,
                path,
                method,
            } => {
                let loaded = load(&graph, &None)?;
                let vertices = parse_path(&loaded.graph, &path)?;
                if vertices.first() != Some(&loaded.config.start()) {
                    return Err(format!(
                        "path must begin at the start vertex {}",
                        loaded.graph.name(loaded.config.start())
                    ));
                }
                let record = errw::PathRecord::from_vertices(&loaded.graph, vertices)
                    .map_err(|e| e.to_string())?;
                let p = match method {
                    Method::Sequential => {
                        errw::path_probability_sequential(&loaded.config, &record)
                    }
                    Method::Closed => errw::path_probability_closed_form(&loaded.config, &record),
                }
                .map_err(|e| e.to_string())?;
                println!(
                    "{}/{} ({})",
                    p.numer(),
                    p.denom(),
                    p.to_f64().unwrap_or(f64::NAN)
                );
                Ok(0)
            }
        },
        Command::Density { action } => match action {
            DensityAction::Eval { graph, coords } => {
                let loaded = load(&graph, &None)?;
                let params =
                    DensityParams::new(loaded.config.clone()).map_err(|e| e.to_string())?;
                let c: Vec<f64> = match coords {
                    Some(text) => text
                        .split(',')
                        .map(|s| s.trim().parse::<f64>().map_err(|e| e.to_string()))
                        .collect::<Result<_, _>>()?,
                    None => vec![0.0; params.chart.dimension()],
                };
                if c.len() != params.chart.dimension() {
                    return Err(format!(
                        "expected {} chart coordinates, got {}",
                        params.chart.dimension(),
                        c.len()
                    ));
                }
                let y = params.chart.to_l1(&c).map_err(|e| e.to_string())?;
                let v = mixing::log_density(&params, &y).map_err(|e| e.to_string())?;
                let edges: Vec<serde_json::Value> = loaded
                    .graph
                    .edge_ids()
                    .map(|e| {
                        let (t, h) = loaded.graph.endpoints(e);
                        serde_json::json!({
                            "from": loaded.graph.name(t),
                            "to": loaded.graph.name(h),
                            "y": y[e],
                        })
                    })
                    .collect();
                let value = serde_json::json!({
                    "log_density": v.total,
                    "density": v.total.exp(),
                    "point": edges,
                });
                println!("{:#}", value);
                Ok(0)
            }
            DensityAction::Normalize {
                graph,
                points,
                substitution,
            } => {
                let loaded = load(&graph, &None)?;
                let params = DensityParams::new(loaded.config).map_err(|e| e.to_string())?;
                let spec = QuadratureSpec {
                    points,
                    substitution,
                    ..QuadratureSpec::default()
                };
                let r =
                    mixing::normalization_integral(&params, &spec).map_err(|e| e.to_string())?;
                println!(
                    "{:#}",
                    serde_json::json!({
                        "value": r.value,
                        "error_estimate": r.error_estimate,
                        "method": r.method,
                    })
                );
                Ok(0)
            }
        },
        Command::EstimateY(args) => {
            let loaded = load(&args.graph, &args.start)?;
            let est = harness::estimate_occupation(
                &loaded.config,
                args.steps,
                args.replicates,
                master_seed(args.seed),
            )
            .map_err(|e| e.to_string())?;
            let classes: Vec<serde_json::Value> = loaded
                .graph
                .class_ids()
                .map(|c| {
                    let (t, h) = loaded.graph.endpoints(loaded.graph.representative(c));
                    serde_json::json!({
                        "edge": format!("{}->{}", loaded.graph.name(t), loaded.graph.name(h)),
                        "mean": est.class_mean[c.index()],
                        "se": est.class_se[c.index()],
                    })
                })
                .collect();
            let text = format!(
                "{:#}\n",
                serde_json::json!({
                    "classes": classes,
                    "max_divergence_residual": est.max_divergence_residual,
                    "max_class_asymmetry": est.max_class_asymmetry,
                })
            );
            emit(&args.out, &text)?;
            Ok(0)
        }
        Command::Verify { action } => match action {
            VerifyAction::All { seed, out } => {
                let report = harness::verify_suite(master_seed(seed));
                for c in &report.checks {
                    let status = match c.status {
                        harness::CheckStatus::Pass => "pass",
                        harness::CheckStatus::Fail => "FAIL",
                        harness::CheckStatus::Skip => "skip",
                    };
                    eprintln!(
                        "{status}  {name}  statistic {stat:.3e}  threshold {thr:.3e}",
                        name = c.name,
                        stat = c.statistic,
                        thr = c.threshold
                    );
                }
                emit(&out, &format!("{}\n", report.json()))?;
                Ok(if report.passed() { 0 } else { EXIT_CHECK_FAILED })
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
