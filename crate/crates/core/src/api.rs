//! Request and response bodies for the batch operations exposed over
//! HTTP. The same functions back the command-line tool when it runs
//! locally, so remote and local runs produce identical bytes.

use std::sync::Arc;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use crate::constraints::Layout;
use crate::env::{render_trails_png, rollout, EnvConfig, LayoutEnv, Trajectory};
use crate::error::{Error, Result};
use crate::seeds::{derive_seed, rng_for};
use crate::solvers::{evaluate_policy, EvalReport, PolicySpec, TaskInstance};
use crate::taskgen::{generate_dataset, Dataset, Histogram, Task, TaskGenConfig};
use crate::worldgen::{generate_map, render_png, MapGenConfig, WorldMap};

/// Largest batch accepted by a single request.
pub const MAX_BATCH: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateMapsRequest {
    pub count: usize,
    /// Template configuration; its seed is the base for per-map seeds.
    pub config: MapGenConfig,
}

/// Seed of the `index`-th map of a batch.
pub fn map_seed(base: u64, index: usize) -> u64 {
    derive_seed(base, &[index as u64])
}

pub fn generate_maps(req: &GenerateMapsRequest) -> Result<Vec<WorldMap>> {
    if req.count > MAX_BATCH {
        return Err(Error::Capacity(format!("at most {MAX_BATCH} maps per request")));
    }
    (0..req.count)
        .map(|i| {
            generate_map(&MapGenConfig {
                seed: map_seed(req.config.seed, i),
                ..req.config.clone()
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerateTasksRequest {
    pub count: usize,
    pub config: TaskGenConfig,
    pub maps: Vec<WorldMap>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateTasksResponse {
    /// Dataset as JSON lines, header first.
    pub jsonl: String,
    pub histogram: Histogram,
}

pub fn generate_tasks(req: &GenerateTasksRequest) -> Result<GenerateTasksResponse> {
    if req.count > MAX_BATCH {
        return Err(Error::Capacity(format!("at most {MAX_BATCH} tasks per request")));
    }
    let dataset = generate_dataset(&req.maps, &req.config, req.count)?;
    let jsonl = String::from_utf8(dataset.to_jsonl()?).expect("serde_json writes UTF-8");
    Ok(GenerateTasksResponse {
        jsonl,
        histogram: dataset.histogram(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluateRequest {
    pub policy: PolicySpec,
    #[serde(default)]
    pub env: EnvConfig,
    pub rollouts: usize,
    pub seed: u64,
    pub tasks: Vec<Task>,
    pub maps: Vec<WorldMap>,
}

fn bind(tasks: &[Task], maps: &[WorldMap]) -> Result<Vec<TaskInstance>> {
    let maps: Vec<Arc<WorldMap>> = maps.iter().cloned().map(Arc::new).collect();
    TaskInstance::bind(tasks.to_vec(), &maps)
}

pub fn evaluate(req: &EvaluateRequest) -> Result<EvalReport> {
    let tasks = bind(&req.tasks, &req.maps)?;
    evaluate_policy(&req.policy, &tasks, req.rollouts, req.env, req.seed)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RolloutRequest {
    pub policy: PolicySpec,
    #[serde(default)]
    pub env: EnvConfig,
    pub seed: u64,
    pub task: Task,
    pub map: WorldMap,
    #[serde(default)]
    pub initial: Option<Layout>,
    /// Side of the trail overlay in pixels; no image when absent.
    #[serde(default)]
    pub png_size: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RolloutResponse {
    pub trajectory: Trajectory,
    #[serde(default)]
    pub png_base64: Option<String>,
}

pub fn run_rollout(req: &RolloutRequest) -> Result<RolloutResponse> {
    req.policy.validate()?;
    let map = Arc::new(req.map.clone());
    let mut env = LayoutEnv::new(Arc::clone(&map), Arc::new(req.task.clone()), req.env)?;
    let mut policy = req.policy.build();
    let mut rng = rng_for(req.seed, &[]);
    let trajectory = rollout(&mut env, policy.as_mut(), req.initial.as_ref(), &mut rng)?;
    let png_base64 = match req.png_size {
        Some(size) => Some(BASE64.encode(render_trails_png(&map, env.trails(), checked_size(size)?)?)),
        None => None,
    };
    Ok(RolloutResponse { trajectory, png_base64 })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RenderRequest {
    pub map: WorldMap,
    pub size: usize,
}

fn checked_size(size: usize) -> Result<usize> {
    if (1..=4096).contains(&size) {
        Ok(size)
    } else {
        Err(Error::InvalidInput(format!(
            "image size must be in 1..=4096, got {size}"
        )))
    }
}

pub fn render(req: &RenderRequest) -> Result<Vec<u8>> {
    render_png(&req.map, checked_size(req.size)?)
}

/// Parses a JSONL dataset into its tasks.
pub fn parse_dataset(text: &str) -> Result<Dataset> {
    Dataset::read_jsonl(text.as_bytes())
}
