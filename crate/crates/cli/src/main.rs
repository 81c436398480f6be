use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use clap::{Args, Parser, Subcommand, ValueEnum};
use plotmap_client::HttpClient;
use plotmap_core::api::{
    self, EvaluateRequest, GenerateMapsRequest, GenerateTasksRequest, GenerateTasksResponse, RenderRequest,
    RolloutRequest, RolloutResponse,
};
use plotmap_core::constraints::ConstraintType;
use plotmap_core::env::{EnvConfig, MovementMode};
use plotmap_core::solvers::{EvalReport, PolicyKind, PolicySpec};
use plotmap_core::taskgen::{Dataset, Task, TaskGenConfig};
use plotmap_core::worldgen::{MapGenConfig, WorldMap};
use plotmap_server::{ServerConfig, DEFAULT_HTTP_ADDR, DEFAULT_TCP_ADDR};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "plotmap",
    version,
    about = "Place story locations on procedural maps under spatial constraints"
)]
struct Cli {
    /// Run operations on a plotmap service instead of in-process.
    #[arg(long, global = true, env = "PLOTMAP_REMOTE")]
    remote: Option<String>,

    /// Root for default inputs and outputs.
    #[arg(long, global = true, env = "PLOTMAP_DATA_DIR", default_value = ".")]
    data_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate maps as JSON with PNG previews under <out>/maps.
    GenMaps(GenMaps),
    /// Generate a task dataset (JSONL) and its family histogram.
    GenTasks(GenTasks),
    /// Run one episode and write its trajectory.
    Rollout(Rollout),
    /// Measure a policy's success rate over a task set.
    Evaluate(Evaluate),
    /// Rasterize a map file to PNG.
    Render(Render),
    /// Start the protocol service.
    Serve(Serve),
}

#[derive(Args)]
struct GenMaps {
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 1000)]
    cells: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.35)]
    water_ratio: f64,
    #[arg(long, default_value_t = 3)]
    lakes: usize,
    #[arg(long, default_value_t = 4)]
    rivers: usize,
    #[arg(long, default_value_t = 2)]
    lloyd: usize,
    #[arg(long, default_value_t = 42)]
    raster_size: usize,
    /// Side of the PNG preview.
    #[arg(long, default_value_t = 512)]
    png_size: usize,
    /// Output root; defaults to the data directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenTasks {
    /// Directory holding map JSON files (or a root with a maps/ child).
    #[arg(long)]
    maps: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    facilities: usize,
    #[arg(long, default_value_t = 3)]
    min_constraints: usize,
    #[arg(long, default_value_t = 10)]
    max_constraints: usize,
    /// Comma-separated family whitelist.
    #[arg(long, value_delimiter = ',')]
    families: Option<Vec<String>>,
    /// Sample a family uniformly, then an instance within it.
    #[arg(long)]
    balanced: bool,
    /// Dataset path; the histogram goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Simulated,
    Actual,
}

#[derive(Args)]
struct EnvArgs {
    #[arg(long, value_enum, default_value = "simulated")]
    mode: Mode,
    #[arg(long, default_value_t = 200)]
    horizon: usize,
    #[arg(long, default_value_t = 0.05)]
    max_step: f64,
}

impl EnvArgs {
    fn config(&self) -> EnvConfig {
        EnvConfig {
            horizon: self.horizon,
            max_step: self.max_step,
            movement_mode: match self.mode {
                Mode::Simulated => MovementMode::SimulatedConcurrent,
                Mode::Actual => MovementMode::ActualConcurrent,
            },
        }
    }
}

#[derive(Args)]
struct PolicyArgs {
    /// random, greedy, scripted or zero.
    #[arg(long, default_value = "random")]
    policy: String,
    /// Candidates per greedy decision.
    #[arg(long, default_value_t = 16)]
    candidates: usize,
}

impl PolicyArgs {
    fn spec(&self) -> Result<PolicySpec> {
        let kind: PolicyKind = self.policy.parse()?;
        let spec = PolicySpec {
            kind,
            candidate_count: self.candidates,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct Rollout {
    #[arg(long)]
    tasks: PathBuf,
    #[arg(long)]
    maps: Option<PathBuf>,
    /// Task to run; defaults to the first in the file.
    #[arg(long)]
    task_id: Option<String>,
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the trails drawn over the map.
    #[arg(long)]
    png: Option<PathBuf>,
    #[arg(long, default_value_t = 512)]
    png_size: usize,
}

#[derive(Args)]
struct Evaluate {
    #[arg(long)]
    tasks: PathBuf,
    #[arg(long)]
    maps: Option<PathBuf>,
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    env: EnvArgs,
    /// Total episodes, spread round-robin over the tasks.
    #[arg(long, default_value_t = 1000)]
    rollouts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Per-task CSV export.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct Render {
    #[arg(long)]
    map: PathBuf,
    #[arg(long, default_value_t = 512)]
    size: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Serve {
    #[arg(long, default_value = DEFAULT_HTTP_ADDR)]
    http: SocketAddr,
    #[arg(long, default_value = DEFAULT_TCP_ADDR)]
    tcp: SocketAddr,
    #[arg(long)]
    no_http: bool,
    #[arg(long)]
    no_tcp: bool,
    /// Serve one session on stdin/stdout instead of listening.
    #[arg(long)]
    stdio: bool,
    /// Directory of static UI assets served over HTTP.
    #[arg(long = "static")]
    static_dir: Option<PathBuf>,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn pretty<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn runtime() -> Result<tokio::runtime::Runtime> {
    Ok(tokio::runtime::Builder::new_current_thread().enable_all().build()?)
}

/// Blocks on a client call.
fn remote<T>(fut: impl std::future::Future<Output = plotmap_client::Result<T>>) -> Result<T> {
    Ok(runtime()?.block_on(fut)?)
}

fn maps_dir(cli: &Cli, given: &Option<PathBuf>) -> PathBuf {
    let dir = given.clone().unwrap_or_else(|| cli.data_dir.clone());
    let nested = dir.join("maps");
    if nested.is_dir() {
        nested
    } else {
        dir
    }
}

fn load_maps_dir(dir: &Path) -> Result<Vec<WorldMap>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading map directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no map files in {}", dir.display());
    }
    paths
        .iter()
        .map(|p| WorldMap::load(p).with_context(|| format!("loading {}", p.display())))
        .collect()
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(api::parse_dataset(&text)?)
}

/// Loads the maps a task list refers to from `dir/<map_ref>.json`.
fn maps_for(tasks: &[Task], dir: &Path) -> Result<Vec<WorldMap>> {
    let mut refs: Vec<&str> = tasks.iter().map(|t| t.map_ref.as_str()).collect();
    refs.sort_unstable();
    refs.dedup();
    refs.into_iter()
        .map(|r| {
            let path = dir.join(format!("{r}.json"));
            WorldMap::load(&path).with_context(|| format!("loading map {r} from {}", path.display()))
        })
        .collect()
}

fn gen_maps(cli: &Cli, args: &GenMaps) -> Result<()> {
    let req = GenerateMapsRequest {
        count: args.count,
        config: MapGenConfig {
            seed: args.seed,
            cell_count: args.cells,
            water_edge_ratio: args.water_ratio,
            lake_seed_count: args.lakes,
            river_count: args.rivers,
            lloyd_iterations: args.lloyd,
            raster_size: args.raster_size,
        },
    };
    req.config.validate()?;
    let maps = match &cli.remote {
        Some(url) => remote(HttpClient::new(url).generate_maps(&req))?,
        None => api::generate_maps(&req)?,
    };
    let dir = args.out.clone().unwrap_or_else(|| cli.data_dir.clone()).join("maps");
    for map in &maps {
        let mut json = map.to_json()?.into_bytes();
        json.push(b'\n');
        write_file(&dir.join(format!("{}.json", map.id)), &json)?;
        let png = match &cli.remote {
            Some(url) => remote(HttpClient::new(url).render(&RenderRequest {
                map: map.clone(),
                size: args.png_size,
            }))?,
            None => api::render(&RenderRequest {
                map: map.clone(),
                size: args.png_size,
            })?,
        };
        write_file(&dir.join(format!("{}.png", map.id)), &png)?;
    }
    println!("wrote {} maps to {}", maps.len(), dir.display());
    Ok(())
}

fn histogram_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.histogram.json"))
}

fn gen_tasks(cli: &Cli, args: &GenTasks) -> Result<()> {
    let families = match &args.families {
        None => ConstraintType::ALL.to_vec(),
        Some(names) => names
            .iter()
            .map(|n| ConstraintType::from_name(n.trim()).with_context(|| format!("unknown constraint family {n:?}")))
            .collect::<Result<_>>()?,
    };
    let config = TaskGenConfig {
        facility_count: args.facilities,
        min_constraints: args.min_constraints,
        max_constraints: args.max_constraints,
        families,
        seed: args.seed,
        balance_sampling: args.balanced,
        ..TaskGenConfig::default()
    };
    config.validate()?;
    let maps = load_maps_dir(&maps_dir(cli, &args.maps))?;
    let req = GenerateTasksRequest {
        count: args.count,
        config,
        maps,
    };
    let out: GenerateTasksResponse = match &cli.remote {
        Some(url) => remote(HttpClient::new(url).generate_tasks(&req))?,
        None => api::generate_tasks(&req)?,
    };
    let path = args.out.clone().unwrap_or_else(|| cli.data_dir.join("tasks.jsonl"));
    write_file(&path, out.jsonl.as_bytes())?;
    write_file(&histogram_path(&path), &pretty(&out.histogram)?)?;
    println!("wrote {} tasks to {}", args.count, path.display());
    Ok(())
}

fn rollout(cli: &Cli, args: &Rollout) -> Result<()> {
    let dataset = load_dataset(&args.tasks)?;
    let task = match &args.task_id {
        Some(id) => dataset
            .tasks
            .iter()
            .find(|t| &t.task_id == id)
            .with_context(|| format!("no task {id:?}"))?,
        None => dataset.tasks.first().context("task file is empty")?,
    }
    .clone();
    let map = maps_for(std::slice::from_ref(&task), &maps_dir(cli, &args.maps))?.remove(0);
    let req = RolloutRequest {
        policy: args.policy.spec()?,
        env: args.env.config(),
        seed: args.seed,
        task,
        map,
        initial: None,
        png_size: args.png.as_ref().map(|_| args.png_size),
    };
    let out: RolloutResponse = match &cli.remote {
        Some(url) => remote(HttpClient::new(url).rollout(&req))?,
        None => api::run_rollout(&req)?,
    };
    write_file(&args.out, &pretty(&out.trajectory)?)?;
    if let (Some(path), Some(png)) = (&args.png, &out.png_base64) {
        write_file(path, &BASE64.decode(png)?)?;
    }
    println!(
        "{} in {} steps",
        if out.trajectory.success { "success" } else { "failure" },
        out.trajectory.steps
    );
    Ok(())
}

fn evaluate(cli: &Cli, args: &Evaluate) -> Result<()> {
    let dataset = load_dataset(&args.tasks)?;
    let maps = maps_for(&dataset.tasks, &maps_dir(cli, &args.maps))?;
    let req = EvaluateRequest {
        policy: args.policy.spec()?,
        env: args.env.config(),
        rollouts: args.rollouts,
        seed: args.seed,
        tasks: dataset.tasks,
        maps,
    };
    let report: EvalReport = match &cli.remote {
        Some(url) => remote(HttpClient::new(url).evaluate(&req))?,
        None => api::evaluate(&req)?,
    };
    write_file(&args.out, &pretty(&report)?)?;
    if let Some(csv) = &args.csv {
        write_file(csv, report.to_csv().as_bytes())?;
    }
    println!(
        "{} success rate {:.4} [{:.4}, {:.4}] over {} rollouts",
        report.policy, report.success_rate, report.ci_low, report.ci_high, report.rollouts
    );
    Ok(())
}

fn render(cli: &Cli, args: &Render) -> Result<()> {
    let req = RenderRequest {
        map: WorldMap::load(&args.map).with_context(|| format!("loading {}", args.map.display()))?,
        size: args.size,
    };
    let png = match &cli.remote {
        Some(url) => remote(HttpClient::new(url).render(&req))?,
        None => api::render(&req)?,
    };
    write_file(&args.out, &png)
}

fn serve(cli: &Cli, args: &Serve) -> Result<()> {
    let data_dir = Some(cli.data_dir.clone());
    if args.stdio {
        return Ok(plotmap_server::serve_stdio(data_dir)?);
    }
    if cli.remote.is_some() {
        bail!("serve runs locally; drop --remote");
    }
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let config = ServerConfig {
        http_addr: (!args.no_http).then_some(args.http),
        tcp_addr: (!args.no_tcp).then_some(args.tcp),
        data_dir,
        static_dir: args.static_dir.clone(),
    };
    if config.http_addr.is_none() && config.tcp_addr.is_none() {
        bail!("nothing to serve: both listeners disabled");
    }
    let rt = tokio::runtime::Runtime::new()?;
    Ok(rt.block_on(plotmap_server::run(config))?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GenMaps(a) => gen_maps(&cli, a),
        Command::GenTasks(a) => gen_tasks(&cli, a),
        Command::Rollout(a) => rollout(&cli, a),
        Command::Evaluate(a) => evaluate(&cli, a),
        Command::Render(a) => render(&cli, a),
        Command::Serve(a) => serve(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
