//! Turn-based layout environment.
//!
//! In simulated-concurrent mode one facility moves per step, chosen
//! round-robin. In actual-concurrent mode every facility moves at once and
//! scores are refreshed once per step. Either way the reward is `+1` when
//! every constraint is satisfied and `mean score - 1` otherwise.

use std::collections::BTreeMap;
use std::sync::Arc;

use image::{Rgb, RgbImage};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::constraints::{Layout, Relation, SatisfactionResult};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::taskgen::{Task, MAX_CONSTRAINTS, MAX_FACILITIES};
use crate::worldgen::{encode_png, rasterize_at, WorldMap};

pub const TRAJECTORY_FORMAT: &str = "plotmap-trajectory/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MovementMode {
    SimulatedConcurrent,
    ActualConcurrent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub horizon: usize,
    /// Longest displacement a facility can make in one move.
    pub max_step: f64,
    pub movement_mode: MovementMode,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            horizon: 200,
            max_step: 0.05,
            movement_mode: MovementMode::SimulatedConcurrent,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        if !(self.max_step > 0.0 && self.max_step <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "max_step must be in (0, 1], got {}",
                self.max_step
            )));
        }
        Ok(())
    }
}

/// A move for the indicated facility, or one move per facility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Move(Point),
    Joint(Vec<Point>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub scores: Vec<f64>,
    pub satisfied: Vec<bool>,
    pub n: usize,
    pub reward: f64,
    pub all_satisfied: bool,
}

impl RewardBreakdown {
    pub fn from_results(results: &[SatisfactionResult]) -> Self {
        let n = results.len();
        let all_satisfied = results.iter().all(|r| r.satisfied);
        let reward = if all_satisfied {
            1.0
        } else {
            results.iter().map(|r| r.score).sum::<f64>() / n as f64 - 1.0
        };
        Self {
            scores: results.iter().map(|r| r.score).collect(),
            satisfied: results.iter().map(|r| r.satisfied).collect(),
            n,
            reward,
            all_satisfied,
        }
    }

    pub fn mean_score(&self) -> f64 {
        if self.n == 0 {
            1.0
        } else {
            self.scores.iter().sum::<f64>() / self.n as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub reward: RewardBreakdown,
    pub done: bool,
    pub step_count: usize,
    /// Facilities that moved in this step.
    pub moved: Vec<usize>,
}

pub const RASTER_CHANNELS: usize = 3;
pub const RELATION_WIDTH: usize = 60;
pub const FACILITY_WIDTH: usize = 4;
const FAMILY_OFFSET: usize = 0;
const DIRECTION_OFFSET: usize = 12;
const BIOME_OFFSET: usize = 17;
const SLOT_OFFSET: usize = 27;
const SLOT_WIDTH: usize = MAX_FACILITIES + 1;

/// Length of the flat observation vector for a square raster of `size`.
pub fn observation_len(raster_size: usize) -> usize {
    raster_size * raster_size * RASTER_CHANNELS + MAX_CONSTRAINTS * RELATION_WIDTH + MAX_FACILITIES * FACILITY_WIDTH
}

/// One-hot structural encoding of a relation.
pub fn encode_relation(rel: &Relation) -> [f64; RELATION_WIDTH] {
    let mut row = [0.0; RELATION_WIDTH];
    row[FAMILY_OFFSET + rel.ctype.index()] = 1.0;
    row[DIRECTION_OFFSET + rel.direction.map_or(4, |d| d.index())] = 1.0;
    row[BIOME_OFFSET + rel.biome.map_or(9, |b| b.index())] = 1.0;
    for slot in 0..3 {
        let k = if slot < rel.arity {
            rel.slots[slot]
        } else {
            MAX_FACILITIES
        };
        row[SLOT_OFFSET + slot * SLOT_WIDTH + k] = 1.0;
    }
    row
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Row-major RGB bytes, row 0 at the north edge.
    pub raster: Vec<u8>,
    pub raster_size: usize,
    pub facility_block: Vec<[f64; FACILITY_WIDTH]>,
    pub constraint_block: Vec<Vec<f64>>,
}

impl Observation {
    /// Flattens to `raster / 255`, then the padded constraint block, then
    /// the padded facility block.
    pub fn encode(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(observation_len(self.raster_size));
        out.extend(self.raster.iter().map(|&b| b as f64 / 255.0));
        for k in 0..MAX_CONSTRAINTS {
            match self.constraint_block.get(k) {
                Some(row) => out.extend_from_slice(row),
                None => out.extend([0.0; RELATION_WIDTH]),
            }
        }
        for k in 0..MAX_FACILITIES {
            match self.facility_block.get(k) {
                Some(row) => out.extend_from_slice(row),
                None => out.extend([0.0; FACILITY_WIDTH]),
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct LayoutEnv {
    map: Arc<WorldMap>,
    task: Arc<Task>,
    config: EnvConfig,
    relations: Vec<Relation>,
    /// Relation indices touching each facility.
    touching: Vec<Vec<usize>>,
    positions: Vec<Point>,
    scores: Vec<SatisfactionResult>,
    turn: usize,
    step_count: usize,
    done: bool,
    trails: Vec<Vec<Point>>,
}

impl LayoutEnv {
    /// Binds a task to its map. Positions start at the witness layout until
    /// [`LayoutEnv::reset`] is called.
    pub fn new(map: Arc<WorldMap>, task: Arc<Task>, config: EnvConfig) -> Result<Self> {
        config.validate()?;
        task.validate()?;
        if task.map_ref != map.id {
            return Err(Error::MissingReference(format!(
                "task {} refers to map {:?}, got {:?}",
                task.task_id, task.map_ref, map.id
            )));
        }
        let ids = task.facility_ids();
        let relations = task
            .constraints
            .iter()
            .map(|c| c.resolve(&ids))
            .collect::<Result<Vec<_>>>()?;
        let touching = (0..ids.len())
            .map(|f| (0..relations.len()).filter(|&r| relations[r].involves(f)).collect())
            .collect();
        let positions = task
            .witness_positions()
            .unwrap_or_else(|_| vec![Point::new(0.5, 0.5); ids.len()]);
        let mut env = Self {
            map,
            task,
            config,
            relations,
            touching,
            positions: positions.clone(),
            scores: Vec::new(),
            turn: 0,
            step_count: 0,
            done: false,
            trails: Vec::new(),
        };
        env.start(positions);
        Ok(env)
    }

    fn start(&mut self, positions: Vec<Point>) {
        self.positions = positions;
        self.scores = self
            .relations
            .iter()
            .map(|r| r.score(&self.positions, &self.map))
            .collect();
        self.turn = 0;
        self.step_count = 0;
        self.done = false;
        self.trails = self.positions.iter().map(|&p| vec![p]).collect();
    }

    /// Starts an episode from `initial` (which must name every facility) or
    /// from a uniform random layout.
    pub fn reset(&mut self, initial: Option<&Layout>, rng: &mut dyn RngCore) -> Result<Observation> {
        let positions = match initial {
            Some(layout) => self
                .task
                .facilities
                .iter()
                .map(|f| {
                    layout
                        .get(&f.id)
                        .or_else(|| layout.get(&f.name))
                        .map(|p| p.clamp_unit())
                        .ok_or_else(|| Error::InvalidLayout(format!("layout lacks facility {:?}", f.id)))
                })
                .collect::<Result<Vec<_>>>()?,
            None => (0..self.positions.len())
                .map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>()))
                .collect(),
        };
        self.start(positions);
        Ok(self.observation())
    }

    pub fn map(&self) -> &WorldMap {
        &self.map
    }

    pub fn map_arc(&self) -> &Arc<WorldMap> {
        &self.map
    }

    pub fn task(&self) -> &Task {
        &self.task
    }

    pub fn task_arc(&self) -> &Arc<Task> {
        &self.task
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn layout(&self) -> Layout {
        self.task
            .facilities
            .iter()
            .zip(&self.positions)
            .map(|(f, &p)| (f.id.clone(), p))
            .collect()
    }

    pub fn facility_count(&self) -> usize {
        self.positions.len()
    }

    pub fn turn_index(&self) -> usize {
        self.turn
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn trails(&self) -> &[Vec<Point>] {
        &self.trails
    }

    pub fn scores(&self) -> &[SatisfactionResult] {
        &self.scores
    }

    pub fn reward(&self) -> RewardBreakdown {
        RewardBreakdown::from_results(&self.scores)
    }

    pub fn all_satisfied(&self) -> bool {
        self.scores.iter().all(|s| s.satisfied)
    }

    pub fn score_sum(&self) -> f64 {
        self.scores.iter().map(|s| s.score).sum()
    }

    /// Relations touching `facility`.
    pub fn touching(&self, facility: usize) -> &[usize] {
        &self.touching[facility]
    }

    /// Sum of scores of the relations touching `facility` if it stood at
    /// `at`. The remaining relations are unaffected by such a move.
    pub fn local_score_with(&self, facility: usize, at: Point) -> f64 {
        let mut positions = self.positions.clone();
        positions[facility] = at;
        self.touching[facility]
            .iter()
            .map(|&r| self.relations[r].score(&positions, &self.map).score)
            .sum()
    }

    /// Full score results for an arbitrary position vector.
    pub fn evaluate_positions(&self, positions: &[Point]) -> Vec<SatisfactionResult> {
        self.relations.iter().map(|r| r.score(positions, &self.map)).collect()
    }

    /// Limits a displacement to `max_step`, keeping its direction.
    pub fn clip(&self, d: Point) -> Point {
        let n = d.norm();
        if n > self.config.max_step {
            d * (self.config.max_step / n)
        } else {
            d
        }
    }

    pub fn observation(&self) -> Observation {
        let n = self.positions.len();
        let indicated = match self.config.movement_mode {
            MovementMode::SimulatedConcurrent => Some(self.turn),
            MovementMode::ActualConcurrent => None,
        };
        let facility_block = self
            .positions
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let on = indicated.map_or(true, |t| t == k);
                let id = if n > 1 { k as f64 / (n - 1) as f64 } else { 0.0 };
                [p.x, p.y, if on { 1.0 } else { 0.0 }, id]
            })
            .collect();
        Observation {
            raster: self.map.raster.pixels.clone(),
            raster_size: self.map.raster.size,
            facility_block,
            constraint_block: self.relations.iter().map(|r| encode_relation(r).to_vec()).collect(),
        }
    }

    fn check_move(d: Point) -> Result<()> {
        if d.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput("displacement must be finite".into()))
        }
    }

    fn finish_step(&mut self, moved: Vec<usize>) -> Transition {
        self.step_count += 1;
        for (trail, &p) in self.trails.iter_mut().zip(&self.positions) {
            trail.push(p);
        }
        let reward = self.reward();
        self.done = reward.all_satisfied || self.step_count >= self.config.horizon;
        Transition {
            reward,
            done: self.done,
            step_count: self.step_count,
            moved,
        }
    }

    /// Applies either kind of action; the kind must match the movement mode.
    pub fn apply(&mut self, action: &Action) -> Result<Transition> {
        match action {
            Action::Move(d) => self.step(*d),
            Action::Joint(ds) => self.step_joint(ds),
        }
    }

    /// Moves the indicated facility. A step taken while every constraint is
    /// already satisfied ends the episode with reward 1 and moves nothing.
    pub fn step(&mut self, d: Point) -> Result<Transition> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        if self.config.movement_mode != MovementMode::SimulatedConcurrent {
            return Err(Error::InvalidInput(
                "single-facility step needs simulated_concurrent mode; use step_joint".into(),
            ));
        }
        Self::check_move(d)?;
        if self.all_satisfied() {
            return Ok(self.finish_step(Vec::new()));
        }
        let f = self.turn;
        self.positions[f] = (self.positions[f] + self.clip(d)).clamp_unit();
        for &r in &self.touching[f] {
            self.scores[r] = self.relations[r].score(&self.positions, &self.map);
        }
        self.turn = (self.turn + 1) % self.positions.len();
        Ok(self.finish_step(vec![f]))
    }

    /// Moves every facility at once, then rescores.
    pub fn step_joint(&mut self, ds: &[Point]) -> Result<Transition> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        if self.config.movement_mode != MovementMode::ActualConcurrent {
            return Err(Error::InvalidInput(
                "joint step needs actual_concurrent mode; use step".into(),
            ));
        }
        if ds.len() != self.positions.len() {
            return Err(Error::InvalidInput(format!(
                "joint step needs {} displacements, got {}",
                self.positions.len(),
                ds.len()
            )));
        }
        for &d in ds {
            Self::check_move(d)?;
        }
        if self.all_satisfied() {
            return Ok(self.finish_step(Vec::new()));
        }
        for (k, &d) in ds.iter().enumerate() {
            self.positions[k] = (self.positions[k] + self.clip(d)).clamp_unit();
        }
        self.scores = self.evaluate_positions(&self.positions);
        Ok(self.finish_step((0..ds.len()).collect()))
    }

    /// Places a facility directly (no step limit, clamped to the map).
    /// If the episode had finished, editing reopens it with a fresh step
    /// budget unless the edited layout is still fully satisfied.
    pub fn set_position(&mut self, facility: usize, p: Point) -> Result<Observation> {
        if facility >= self.positions.len() {
            return Err(Error::MissingReference(format!("no facility at index {facility}")));
        }
        if !p.is_finite() {
            return Err(Error::InvalidInput("position must be finite".into()));
        }
        self.positions[facility] = p.clamp_unit();
        for &r in &self.touching[facility] {
            self.scores[r] = self.relations[r].score(&self.positions, &self.map);
        }
        if let Some(last) = self.trails[facility].last_mut() {
            *last = self.positions[facility];
        }
        if self.done && !self.all_satisfied() {
            self.done = false;
            self.step_count = 0;
        }
        Ok(self.observation())
    }

    /// Looks a facility up by id or display name.
    pub fn facility_index(&self, key: &str) -> Result<usize> {
        self.task
            .facility_index(key)
            .ok_or_else(|| Error::MissingReference(format!("unknown facility {key:?}")))
    }

    pub fn set_facility_position(&mut self, key: &str, p: Point) -> Result<Observation> {
        let k = self.facility_index(key)?;
        self.set_position(k, p)
    }

    /// Replaces every position without advancing the step counter; reopens
    /// a finished episode the same way [`LayoutEnv::set_position`] does.
    pub fn set_positions(&mut self, positions: &[Point]) -> Result<()> {
        if positions.len() != self.positions.len() {
            return Err(Error::InvalidLayout("position count mismatch".into()));
        }
        self.positions = positions.iter().map(|p| p.clamp_unit()).collect();
        self.scores = self.evaluate_positions(&self.positions);
        for (trail, &p) in self.trails.iter_mut().zip(&self.positions) {
            if let Some(last) = trail.last_mut() {
                *last = p;
            }
        }
        if self.done && !self.all_satisfied() {
            self.done = false;
            self.step_count = 0;
        }
        Ok(())
    }
}

/// Anything that can drive an environment. Policies get read access to the
/// environment so that search baselines can score lookahead moves.
pub trait Policy {
    fn act(&mut self, env: &LayoutEnv, rng: &mut dyn RngCore) -> Action;

    fn name(&self) -> String;
}

/// Result of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub format: String,
    pub task_id: String,
    pub success: bool,
    pub steps: usize,
    pub rewards: Vec<f64>,
    pub final_layout: Layout,
    /// Per facility id, the position at reset and after every step.
    pub trails: BTreeMap<String, Vec<Point>>,
}

/// Resets `env` (uniform start unless `initial` is given) and runs `policy`
/// until the episode ends.
pub fn rollout(
    env: &mut LayoutEnv,
    policy: &mut dyn Policy,
    initial: Option<&Layout>,
    rng: &mut dyn RngCore,
) -> Result<Trajectory> {
    env.reset(initial, rng)?;
    let mut rewards = Vec::new();
    let mut success = false;
    while !env.is_done() {
        let action = policy.act(env, rng);
        let t = env.apply(&action)?;
        rewards.push(t.reward.reward);
        success = t.reward.all_satisfied;
    }
    let trails = env
        .task()
        .facilities
        .iter()
        .zip(env.trails())
        .map(|(f, t)| (f.id.clone(), t.clone()))
        .collect();
    Ok(Trajectory {
        format: TRAJECTORY_FORMAT.to_string(),
        task_id: env.task().task_id.clone(),
        success,
        steps: env.step_count(),
        rewards,
        final_layout: env.layout(),
        trails,
    })
}

const TRAIL_COLOURS: [[u8; 3]; MAX_FACILITIES] = [
    [220, 20, 60],
    [255, 140, 0],
    [255, 215, 0],
    [148, 0, 211],
    [0, 0, 0],
    [255, 255, 255],
    [0, 191, 255],
    [255, 20, 147],
    [139, 69, 19],
    [0, 128, 128],
];

fn to_pixel(p: Point, size: usize) -> (i64, i64) {
    let s = size as f64;
    let col = (p.x * s).floor().clamp(0.0, s - 1.0) as i64;
    let row = ((1.0 - p.y) * s).floor().clamp(0.0, s - 1.0) as i64;
    (col, row)
}

fn draw_line(img: &mut RgbImage, a: (i64, i64), b: (i64, i64), colour: [u8; 3]) {
    let (mut x, mut y) = a;
    let dx = (b.0 - x).abs();
    let dy = -(b.1 - y).abs();
    let sx = if x < b.0 { 1 } else { -1 };
    let sy = if y < b.1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        img.put_pixel(x as u32, y as u32, Rgb(colour));
        if (x, y) == b {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// PNG of the map with each facility's trail drawn as a polyline and its
/// final position marked with a small square.
pub fn render_trails_png(map: &WorldMap, trails: &[Vec<Point>], size: usize) -> Result<Vec<u8>> {
    let mut img = rasterize_at(map, size).to_image();
    for (k, trail) in trails.iter().enumerate() {
        let colour = TRAIL_COLOURS[k % TRAIL_COLOURS.len()];
        for w in trail.windows(2) {
            draw_line(&mut img, to_pixel(w[0], size), to_pixel(w[1], size), colour);
        }
        if let Some(&last) = trail.last() {
            let (cx, cy) = to_pixel(last, size);
            for y in (cy - 2).max(0)..=(cy + 2).min(size as i64 - 1) {
                for x in (cx - 2).max(0)..=(cx + 2).min(size as i64 - 1) {
                    img.put_pixel(x as u32, y as u32, Rgb(colour));
                }
            }
        }
    }
    encode_png(&img)
}
