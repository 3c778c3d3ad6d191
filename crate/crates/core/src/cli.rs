//! Command-line front end. Exit status 0 on success, 1 when `evaluate`
//! rejects the success target, 2 on usage or configuration errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::generators::{CorridorSpec, GeneratorSpec, LandmarkPlan};
use crate::graph::{world_to_dot, ClassId, WorldFile};
use crate::harness::{
    run_bound_suite, run_pac_campaign, run_separation_suite, summary_text, write_campaign, BoundSuiteConfig,
    ExperimentConfig, HarnessError, LearnerConfig, SeparationConfig,
};
use crate::learner::{learn_global_with, LearnOptions};
use crate::map::{LearnedMap, QueryAnswer};
use crate::par::Execution;
use crate::sim::write_trace_ndjson;

#[derive(Debug, Parser)]
#[command(name = "maplearn", version, about = "Learn landmark maps under movement and recognition noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a world file.
    Generate(GenerateArgs),
    /// Learn a map of a world.
    Learn(LearnArgs),
    /// Answer a landmark-to-landmark query from a learned map.
    Query(QueryArgs),
    /// Run a trial campaign and write stats, maps and a summary.
    Evaluate(EvaluateArgs),
    /// Monte Carlo checks of the selection and filtering bounds.
    Bounds(SuiteArgs),
    /// Reverse-retrace hit statistics for real and corrupted candidates.
    Separation(SuiteArgs),
    /// Write a world or map as Graphviz DOT.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Grid,
    Building,
    Random,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Full generator spec as JSON; replaces the other shape flags.
    #[arg(long, conflicts_with = "kind")]
    spec: Option<PathBuf>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// `all`, a vertex list such as `0,3,12`, or `density:COUNT:R`.
    #[arg(long, default_value = "all")]
    landmarks: String,
    /// Corridor layout JSON for `--kind building`; the built-in sample floor
    /// when omitted.
    #[arg(long)]
    corridors: Option<PathBuf>,
    #[arg(long)]
    vertices: Option<usize>,
    #[arg(long, default_value_t = 4)]
    max_degree: usize,
    #[arg(long)]
    landmark_count: Option<usize>,
    #[arg(long)]
    target_r: Option<usize>,
    #[arg(long, env = "MAPLEARN_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
    /// Also write the world as DOT.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LearnArgs {
    #[arg(short, long)]
    world: PathBuf,
    /// Learner config JSON; flags below override its fields.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    c: Option<u32>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    exploration_length: Option<usize>,
    #[arg(long)]
    reverse_certainty: bool,
    #[arg(long, env = "MAPLEARN_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
    /// Write one NDJSON trace per robot into this directory.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(short, long)]
    map: PathBuf,
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
    /// Print the answer as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(short, long)]
    config: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Override the config's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the config's root seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Args)]
struct SuiteArgs {
    /// Suite config JSON; built-in defaults when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Write the full report as JSON.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, env = "MAPLEARN_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct ExportSource {
    #[arg(short, long)]
    world: Option<PathBuf>,
    #[arg(short, long)]
    map: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[command(flatten)]
    source: ExportSource,
    /// Standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents).map_err(|e| HarnessError::Config(format!("cannot write {}: {e}", path.display())))
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn parse_plan(text: &str) -> Result<LandmarkPlan, HarnessError> {
    let bad = || HarnessError::Config(format!("--landmarks: cannot parse {text:?}"));
    if text == "all" {
        return Ok(LandmarkPlan::All);
    }
    if let Some(rest) = text.strip_prefix("density:") {
        let (count, r) = rest.split_once(':').ok_or_else(bad)?;
        return Ok(LandmarkPlan::Density {
            count: count.parse().map_err(|_| bad())?,
            target_r: r.parse().map_err(|_| bad())?,
        });
    }
    let list = text.split(',').map(|v| v.trim().parse()).collect::<Result<Vec<_>, _>>().map_err(|_| bad())?;
    Ok(LandmarkPlan::Explicit(list))
}

fn need<T>(value: Option<T>, flag: &str) -> Result<T, HarnessError> {
    value.ok_or_else(|| HarnessError::Config(format!("missing {flag}")))
}

fn generate(args: GenerateArgs) -> Result<(), HarnessError> {
    let spec = match (&args.spec, args.kind) {
        (Some(path), _) => serde_json::from_str(&read(path)?)?,
        (None, Some(Kind::Grid)) => GeneratorSpec::Grid {
            width: need(args.width, "--width")?,
            height: need(args.height, "--height")?,
            landmarks: parse_plan(&args.landmarks)?,
            seed: args.seed,
        },
        (None, Some(Kind::Building)) => {
            let corridors = match &args.corridors {
                Some(path) => serde_json::from_str::<CorridorSpec>(&read(path)?)?,
                None => CorridorSpec::sample_floor(),
            };
            GeneratorSpec::Building { corridors, seed: args.seed }
        }
        (None, Some(Kind::Random)) => GeneratorSpec::Random {
            vertex_count: need(args.vertices, "--vertices")?,
            max_degree: args.max_degree,
            landmark_count: need(args.landmark_count, "--landmark-count")?,
            target_r: need(args.target_r, "--target-r")?,
            seed: args.seed,
        },
        (None, None) => return Err(HarnessError::Config("missing --kind or --spec".into())),
    };
    let world = spec.generate()?;
    write(&args.output, &world.to_world_file().to_json())?;
    if let Some(dot) = &args.dot {
        write(dot, &world_to_dot(&world.graph, &world.partition))?;
    }
    println!(
        "{} vertices, {} edges, {} landmarks, r = {}",
        world.graph.vertex_count(),
        world.graph.edge_count(),
        world.partition.landmarks().len(),
        world.r.map_or("-".into(), |r| r.to_string())
    );
    Ok(())
}

fn learn(args: LearnArgs) -> Result<(), HarnessError> {
    let (graph, partition) = WorldFile::from_json(&read(&args.world)?)?.into_parts()?;
    let base: Option<LearnerConfig> = match &args.config {
        Some(path) => Some(serde_json::from_str(&read(path)?)?),
        None => None,
    };
    let pick = |flag: Option<f64>, from: Option<f64>, name: &str| {
        need(flag.or(from), &format!("--{name} (or {name} in --config)"))
    };
    let cfg = LearnerConfig {
        delta_g: pick(args.delta, base.as_ref().map(|b| b.delta_g), "delta")?,
        alpha: pick(args.alpha, base.as_ref().map(|b| b.alpha), "alpha")?,
        gamma: pick(args.gamma, base.as_ref().map(|b| b.gamma), "gamma")?,
        c: args.c.or(base.as_ref().map(|b| b.c)).unwrap_or(4),
        r: args.r.or(base.as_ref().and_then(|b| b.r)),
        d: args.d.or(base.as_ref().and_then(|b| b.d)),
        m: args.m.or(base.as_ref().and_then(|b| b.m)),
        exploration_length: args.exploration_length.or(base.as_ref().and_then(|b| b.exploration_length)),
        reverse_certainty: args.reverse_certainty || base.as_ref().is_some_and(|b| b.reverse_certainty),
    };
    let params = cfg.resolve(&graph, &partition)?;
    let world = cfg.build_world(graph, partition)?;
    let options = LearnOptions { execution: execution(args.sequential), trace: args.trace_dir.is_some() };
    let run = learn_global_with(&world, &params, args.seed, &options)?;
    write(&args.output, &run.map.to_json())?;
    if let Some(dir) = &args.trace_dir {
        fs::create_dir_all(dir)?;
        for (name, events) in &run.traces {
            let file = fs::File::create(dir.join(format!("{}.ndjson", name.replace('/', "_"))))?;
            write_trace_ndjson(world.graph(), events, std::io::BufWriter::new(file))?;
        }
    }
    let steps = run.map.provenance().steps;
    println!(
        "{} landmarks, {} routes; steps: identify {}, select {}, filter {}",
        run.map.landmarks().len(),
        run.map.route_count(),
        steps.identify,
        steps.select,
        steps.filter
    );
    Ok(())
}

fn parse_class(text: &str, flag: &str) -> Result<ClassId, HarnessError> {
    ClassId::parse(text).ok_or_else(|| HarnessError::Config(format!("{flag}: {text:?} is not a landmark id like L3")))
}

fn query(args: QueryArgs) -> Result<(), HarnessError> {
    let map = LearnedMap::from_json(&read(&args.map)?)?;
    let (u, v) = (parse_class(&args.from, "--from")?, parse_class(&args.to, "--to")?);
    let answer = map.global_path_query(u, v)?;
    if args.json {
        let value = match &answer {
            QueryAnswer::Path(p) => serde_json::to_value(p)?,
            QueryAnswer::NotConnected => serde_json::json!({ "not_connected": true }),
        };
        println!("{}", serde_json::to_string_pretty(&value)?);
        return Ok(());
    }
    match answer {
        QueryAnswer::Path(p) => {
            let waypoints: Vec<String> = p.waypoints.iter().map(ToString::to_string).collect();
            println!("waypoints: {}", waypoints.join(" -> "));
            println!("labels: {}", p.labels.join(" "));
            println!("length: {}", p.length);
        }
        QueryAnswer::NotConnected => println!("not connected"),
    }
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<bool, HarnessError> {
    let mut config = ExperimentConfig::from_json(&read(&args.config)?)?;
    if let Some(k) = args.trials {
        config.trials = k;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.sequential {
        config.execution = Execution::Sequential;
    }
    let report = run_pac_campaign(&config)?;
    write_campaign(&report, &config, &args.output)?;
    print!("{}", summary_text(&report));
    Ok(report.accepted)
}

fn load_or_default<T: serde::de::DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T, HarnessError> {
    match path {
        Some(p) => Ok(serde_json::from_str(&read(p)?)?),
        None => Ok(T::default()),
    }
}

fn bounds(args: SuiteArgs) -> Result<(), HarnessError> {
    let mut config: BoundSuiteConfig = load_or_default(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.sequential {
        config.execution = Execution::Sequential;
    }
    let report = run_bound_suite(&config)?;
    for s in &report.selection {
        let p = s.point;
        println!(
            "selection alpha={} d={} r={} delta_s={}: n={} all-recorded {:.3} (need >= {:.3}) per-path {:.6} vs {:.6} {}",
            p.alpha,
            p.d,
            p.r,
            p.delta_s,
            s.attempts,
            s.all_recorded.estimate.unwrap_or(0.0),
            1.0 - p.delta_s - 3.0 * s.sigma,
            s.per_path_exact,
            s.per_path_formula,
            if s.pass { "PASS" } else { "FAIL" }
        );
    }
    for f in &report.filter {
        let p = f.point;
        println!(
            "filter alpha={} gamma={} delta_fl={}: n={} real rejected {:.4}, false accepted {:.4} (limit {:.4}) {}",
            p.alpha,
            p.gamma,
            p.delta_fl,
            f.traversals,
            f.real_rejected.estimate.unwrap_or(0.0),
            f.false_accepted.estimate.unwrap_or(0.0),
            p.delta_fl + 3.0 * f.sigma,
            if f.pass { "PASS" } else { "FAIL" }
        );
    }
    if let Some(out) = &args.output {
        write(out, &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(())
}

fn separation(args: SuiteArgs) -> Result<(), HarnessError> {
    let mut config: SeparationConfig = load_or_default(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.sequential {
        config.execution = Execution::Sequential;
    }
    let report = run_separation_suite(&config)?;
    for row in &report.rows {
        println!(
            "k={}: real {:.4} (expect {:.4}), false {:.4} (expect <= {:.4}), threshold {:.1}, accuracy {:.3} {}",
            row.k,
            row.real_rate,
            row.expected_real,
            row.false_rate,
            row.expected_false,
            row.threshold,
            row.accuracy,
            if row.pass { "PASS" } else { "FAIL" }
        );
    }
    if let Some(out) = &args.output {
        write(out, &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(())
}

fn export(args: ExportArgs) -> Result<(), HarnessError> {
    let dot = match (&args.source.world, &args.source.map) {
        (Some(w), _) => {
            let (g, p) = WorldFile::from_json(&read(w)?)?.into_parts()?;
            world_to_dot(&g, &p)
        }
        (None, Some(m)) => LearnedMap::from_json(&read(m)?)?.to_dot(),
        (None, None) => unreachable!("clap requires one source"),
    };
    match &args.output {
        Some(path) => write(path, &dot)?,
        None => std::io::stdout().write_all(dot.as_bytes())?,
    }
    Ok(())
}

/// Runs the command line `argv` (including the program name) and returns
/// the process exit status.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a).map(|_| true),
        Command::Learn(a) => learn(a).map(|_| true),
        Command::Query(a) => query(a).map(|_| true),
        Command::Evaluate(a) => evaluate(a),
        Command::Bounds(a) => bounds(a).map(|_| true),
        Command::Separation(a) => separation(a).map(|_| true),
        Command::Export(a) => export(a).map(|_| true),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
