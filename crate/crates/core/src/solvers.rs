//! Baseline policies, a simulated-annealing layout solver and batch
//! evaluation with Wilson confidence intervals.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::env::{rollout, Action, EnvConfig, LayoutEnv, MovementMode, Policy};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::seeds::rng_for;
use crate::taskgen::Task;
use crate::worldgen::WorldMap;

pub const EVAL_FORMAT: &str = "plotmap-eval/1";

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Uniform sample from the disk of radius `r` centred at the origin.
pub fn sample_disk(r: f64, rng: &mut dyn RngCore) -> Point {
    let radius = r * rng.random::<f64>().sqrt();
    let angle = std::f64::consts::TAU * rng.random::<f64>();
    Point::new(radius * angle.cos(), radius * angle.sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Random,
    Greedy,
    /// Walks straight towards the task's witness layout.
    Scripted,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    #[serde(default = "default_candidates")]
    pub candidate_count: usize,
}

fn default_candidates() -> usize {
    16
}

impl PolicySpec {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            candidate_count: default_candidates(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.candidate_count < 1 {
            return Err(Error::InvalidConfig("candidate_count must be at least 1".into()));
        }
        Ok(())
    }

    pub fn build(&self) -> Box<dyn Policy> {
        match self.kind {
            PolicyKind::Random => Box::new(RandomPolicy),
            PolicyKind::Greedy => Box::new(GreedyPolicy::new(self.candidate_count)),
            PolicyKind::Scripted => Box::new(ScriptedPolicy),
            PolicyKind::Zero => Box::new(ZeroPolicy),
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(PolicyKind::Random),
            "greedy" => Ok(PolicyKind::Greedy),
            "scripted" => Ok(PolicyKind::Scripted),
            "zero" => Ok(PolicyKind::Zero),
            other => Err(Error::InvalidConfig(format!("unknown policy {other:?}"))),
        }
    }
}

fn per_facility(env: &LayoutEnv, mut f: impl FnMut(usize) -> Point) -> Action {
    match env.config().movement_mode {
        MovementMode::SimulatedConcurrent => Action::Move(f(env.turn_index())),
        MovementMode::ActualConcurrent => Action::Joint((0..env.facility_count()).map(f).collect()),
    }
}

/// Uniform displacement on the disk of radius `max_step`.
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn act(&mut self, env: &LayoutEnv, rng: &mut dyn RngCore) -> Action {
        let r = env.config().max_step;
        per_facility(env, |_| sample_disk(r, rng))
    }

    fn name(&self) -> String {
        "random".into()
    }
}

pub struct ZeroPolicy;

impl Policy for ZeroPolicy {
    fn act(&mut self, env: &LayoutEnv, _: &mut dyn RngCore) -> Action {
        per_facility(env, |_| Point::new(0.0, 0.0))
    }

    fn name(&self) -> String {
        "zero".into()
    }
}

pub struct ScriptedPolicy;

impl Policy for ScriptedPolicy {
    fn act(&mut self, env: &LayoutEnv, _: &mut dyn RngCore) -> Action {
        let targets = env
            .task()
            .witness_positions()
            .unwrap_or_else(|_| env.positions().to_vec());
        per_facility(env, |k| env.clip(targets[k] - env.positions()[k]))
    }

    fn name(&self) -> String {
        "scripted".into()
    }
}

/// One-step lookahead search. In simulated mode it scores `K` disk samples
/// and the zero move for the indicated facility; in actual mode each of the
/// `K` candidates is a joint move of every facility. The candidate with the
/// highest mean score wins, ties going to the shortest displacement and
/// then the earliest sample (the zero move comes first).
pub struct GreedyPolicy {
    pub candidates: usize,
}

impl GreedyPolicy {
    pub fn new(candidates: usize) -> Self {
        Self {
            candidates: candidates.max(1),
        }
    }
}

fn better(score: f64, length: f64, best: (f64, f64)) -> bool {
    score > best.0 || (score == best.0 && length < best.1)
}

impl Policy for GreedyPolicy {
    fn act(&mut self, env: &LayoutEnv, rng: &mut dyn RngCore) -> Action {
        let r = env.config().max_step;
        match env.config().movement_mode {
            MovementMode::SimulatedConcurrent => {
                let f = env.turn_index();
                let here = env.positions()[f];
                let mut choice = Point::new(0.0, 0.0);
                let mut best = (env.local_score_with(f, here), 0.0);
                for _ in 0..self.candidates {
                    let d = sample_disk(r, rng);
                    let score = env.local_score_with(f, (here + d).clamp_unit());
                    if better(score, d.norm(), best) {
                        best = (score, d.norm());
                        choice = d;
                    }
                }
                Action::Move(choice)
            }
            MovementMode::ActualConcurrent => {
                let n = env.facility_count();
                let mut choice = vec![Point::new(0.0, 0.0); n];
                let mut best = (env.score_sum(), 0.0);
                let mut moved = vec![Point::new(0.0, 0.0); n];
                for _ in 0..self.candidates {
                    let ds: Vec<Point> = (0..n).map(|_| sample_disk(r, rng)).collect();
                    for k in 0..n {
                        moved[k] = (env.positions()[k] + ds[k]).clamp_unit();
                    }
                    let score: f64 = env.evaluate_positions(&moved).iter().map(|s| s.score).sum();
                    let length = ds.iter().map(|d| d.norm_sq()).sum::<f64>().sqrt();
                    if better(score, length, best) {
                        best = (score, length);
                        choice = ds;
                    }
                }
                Action::Joint(choice)
            }
        }
    }

    fn name(&self) -> String {
        "greedy".into()
    }
}

/// Annealing schedule constants.
pub mod anneal_params {
    pub const SIGMA_START: f64 = 0.2;
    pub const SIGMA_END: f64 = 0.01;
    pub const T0: f64 = 1.0;
    pub const ALPHA: f64 = 0.995;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealResult {
    pub positions: Vec<Point>,
    pub success: bool,
    pub energy: f64,
    /// Layouts evaluated, including the starting one.
    pub evaluations: usize,
}

/// Progress report passed to the annealing observer after each proposal.
#[derive(Debug, Clone, Copy)]
pub struct AnnealStep<'a> {
    pub iteration: usize,
    pub positions: &'a [Point],
    pub energy: f64,
    pub accepted: bool,
}

fn energy_of(sum: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        1.0 - sum / n as f64
    }
}

/// Simulated annealing over whole layouts starting from the environment's
/// current positions. `budget` counts evaluated layouts, so a budget of 1
/// returns the start unchanged. Stops early once every constraint holds.
pub fn anneal_solve(
    env: &LayoutEnv,
    budget: usize,
    rng: &mut dyn RngCore,
    observer: &mut dyn FnMut(AnnealStep<'_>),
) -> Result<AnnealResult> {
    use anneal_params::*;
    if budget < 1 {
        return Err(Error::InvalidConfig("anneal budget must be at least 1".into()));
    }
    let n = env.relations().len();
    let facilities = env.facility_count();
    let mut positions = env.positions().to_vec();
    let mut scores: Vec<f64> = env.evaluate_positions(&positions).iter().map(|s| s.score).collect();
    let mut satisfied: Vec<bool> = env.scores().iter().map(|s| s.satisfied).collect();
    let mut unsatisfied = satisfied.iter().filter(|s| !**s).count();
    let mut sum: f64 = scores.iter().sum();
    let mut best = (energy_of(sum, n), positions.clone(), unsatisfied == 0);
    let mut evaluations = 1;
    let proposals = budget - 1;
    let mut temperature = T0;
    let mut trial = positions.clone();
    let mut new_scores = Vec::new();

    let mut iteration = 0;
    while iteration < proposals && unsatisfied > 0 {
        let frac = if proposals > 1 {
            iteration as f64 / (proposals - 1) as f64
        } else {
            0.0
        };
        let sigma = SIGMA_START * (SIGMA_END / SIGMA_START).powf(frac);
        let normal = Normal::new(0.0, sigma).expect("positive sigma");
        let f = rng.random_range(0..facilities);
        let jump = Point::new(normal.sample(rng), normal.sample(rng));
        trial.copy_from_slice(&positions);
        trial[f] = (positions[f] + jump).clamp_unit();

        new_scores.clear();
        let mut delta = 0.0;
        for &r in env.touching(f) {
            let s = env.relations()[r].score(&trial, env.map());
            delta += s.score - scores[r];
            new_scores.push((r, s));
        }
        let d_energy = if n == 0 { 0.0 } else { -delta / n as f64 };
        let accepted = d_energy <= 0.0 || rng.random::<f64>() < (-d_energy / temperature).exp();
        if accepted {
            positions[f] = trial[f];
            for &(r, s) in &new_scores {
                scores[r] = s.score;
                if satisfied[r] != s.satisfied {
                    if s.satisfied {
                        unsatisfied -= 1;
                    } else {
                        unsatisfied += 1;
                    }
                    satisfied[r] = s.satisfied;
                }
            }
            sum = scores.iter().sum();
        }
        let energy = energy_of(sum, n);
        let done = unsatisfied == 0;
        if done || energy < best.0 {
            best = (energy, positions.clone(), done);
        }
        evaluations += 1;
        temperature *= ALPHA;
        observer(AnnealStep {
            iteration,
            positions: &positions,
            energy,
            accepted,
        });
        iteration += 1;
    }
    let (energy, positions, success) = best;
    Ok(AnnealResult {
        positions,
        success,
        energy,
        evaluations,
    })
}

/// A task bound to its map.
#[derive(Debug, Clone)]
pub struct TaskInstance {
    pub map: Arc<WorldMap>,
    pub task: Arc<Task>,
}

impl TaskInstance {
    /// Pairs each task with the map named by its `map_ref`.
    pub fn bind(tasks: Vec<Task>, maps: &[Arc<WorldMap>]) -> Result<Vec<TaskInstance>> {
        let by_id: BTreeMap<&str, &Arc<WorldMap>> = maps.iter().map(|m| (m.id.as_str(), m)).collect();
        tasks
            .into_iter()
            .map(|task| {
                let map = by_id
                    .get(task.map_ref.as_str())
                    .ok_or_else(|| Error::MissingReference(format!("map {:?} not loaded", task.map_ref)))?;
                Ok(TaskInstance {
                    map: Arc::clone(map),
                    task: Arc::new(task),
                })
            })
            .collect()
    }
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskStats {
    pub task_id: String,
    pub rollouts: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_steps_to_success: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub format: String,
    pub policy: String,
    pub env: EnvConfig,
    pub seed: u64,
    pub rollouts: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_steps_to_success: Option<f64>,
    pub tasks: Vec<TaskStats>,
}

#[derive(Default)]
struct Tally {
    rollouts: usize,
    successes: usize,
    success_steps: usize,
}

impl Tally {
    fn mean_steps(&self) -> Option<f64> {
        (self.successes > 0).then(|| self.success_steps as f64 / self.successes as f64)
    }
}

impl EvalReport {
    /// One row per task.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("task_id,rollouts,successes,success_rate,ci_low,ci_high,mean_steps_to_success\n");
        for t in &self.tasks {
            let steps = t.mean_steps_to_success.map(|s| s.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                t.task_id, t.rollouts, t.successes, t.success_rate, t.ci_low, t.ci_high, steps
            );
        }
        out
    }
}

/// Runs `rollouts` episodes in total, assigned to tasks round-robin, each
/// from a uniform random start. Rollout `r` of task `t` draws from the seed
/// stream `(seed, t, r)`, so the report does not depend on execution order.
pub fn evaluate_with(
    make_policy: &dyn Fn() -> Box<dyn Policy>,
    policy_name: &str,
    tasks: &[TaskInstance],
    rollouts: usize,
    env_config: EnvConfig,
    seed: u64,
) -> Result<EvalReport> {
    if tasks.is_empty() {
        return Err(Error::InvalidInput("task set is empty".into()));
    }
    if rollouts < 1 {
        return Err(Error::InvalidConfig("rollouts must be at least 1".into()));
    }
    let mut tallies: Vec<Tally> = (0..tasks.len()).map(|_| Tally::default()).collect();
    let mut envs = tasks
        .iter()
        .map(|t| LayoutEnv::new(Arc::clone(&t.map), Arc::clone(&t.task), env_config))
        .collect::<Result<Vec<_>>>()?;
    let mut policy = make_policy();
    for r in 0..rollouts {
        let t = r % tasks.len();
        let local = (r / tasks.len()) as u64;
        let mut rng = rng_for(seed, &[t as u64, local]);
        let traj = rollout(&mut envs[t], policy.as_mut(), None, &mut rng)?;
        let tally = &mut tallies[t];
        tally.rollouts += 1;
        if traj.success {
            tally.successes += 1;
            tally.success_steps += traj.steps;
        }
    }
    let task_stats = tasks
        .iter()
        .zip(&tallies)
        .map(|(inst, tally)| {
            let (ci_low, ci_high) = wilson_interval(tally.successes, tally.rollouts, Z95);
            TaskStats {
                task_id: inst.task.task_id.clone(),
                rollouts: tally.rollouts,
                successes: tally.successes,
                success_rate: if tally.rollouts > 0 {
                    tally.successes as f64 / tally.rollouts as f64
                } else {
                    0.0
                },
                ci_low,
                ci_high,
                mean_steps_to_success: tally.mean_steps(),
            }
        })
        .collect();
    let total = Tally {
        rollouts,
        successes: tallies.iter().map(|t| t.successes).sum(),
        success_steps: tallies.iter().map(|t| t.success_steps).sum(),
    };
    let (ci_low, ci_high) = wilson_interval(total.successes, rollouts, Z95);
    Ok(EvalReport {
        format: EVAL_FORMAT.to_string(),
        policy: policy_name.to_string(),
        env: env_config,
        seed,
        rollouts,
        successes: total.successes,
        success_rate: total.successes as f64 / rollouts as f64,
        ci_low,
        ci_high,
        mean_steps_to_success: total.mean_steps(),
        tasks: task_stats,
    })
}

pub fn evaluate_policy(
    spec: &PolicySpec,
    tasks: &[TaskInstance],
    rollouts: usize,
    env_config: EnvConfig,
    seed: u64,
) -> Result<EvalReport> {
    spec.validate()?;
    let name = serde_json::to_value(spec.kind)?
        .as_str()
        .unwrap_or("policy")
        .to_string();
    evaluate_with(&|| spec.build(), &name, tasks, rollouts, env_config, seed)
}
