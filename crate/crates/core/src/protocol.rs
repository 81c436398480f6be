//! JSON message protocol shared by every transport.
//!
//! A request is one JSON object `{"id", "cmd", "payload"}`. Fields other
//! than `id`, `cmd` and `payload` are merged into the payload, so
//! `{"id":3,"cmd":"set_pos","facility":"Marketown","x":0.8,"y":0.85}` is
//! accepted. Each request produces exactly one response
//! `{"id","ok","payload"}` or `{"id","ok":false,"error":{"code","message"}}`.
//! A streaming `solve` emits `{"id","event":"position",...}` messages
//! before its response.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::constraints::Layout;
use crate::demo::{demo_map, demo_task, DEMO_TASK_ID};
use crate::env::{render_trails_png, Action, EnvConfig, LayoutEnv, MovementMode, Observation, Policy};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::seeds::derive_seed;
use crate::solvers::{anneal_solve, GreedyPolicy};
use crate::taskgen::Task;
use crate::worldgen::{palette, render_png, WorldMap};

pub const PROTOCOL: &str = "plotmap-proto/1";
pub const DATA_DIR_ENV: &str = "PLOTMAP_DATA_DIR";
pub const DEFAULT_SOLVE_BUDGET: usize = 4000;
pub const DEFAULT_RENDER_SIZE: usize = 512;
const MAX_RENDER_SIZE: usize = 4096;

/// Recognised commands.
pub const COMMANDS: [&str; 8] = [
    "reset",
    "step",
    "step_joint",
    "set_pos",
    "solve",
    "get_state",
    "load_task",
    "render",
];

/// Per-connection state: the loaded map and task and one environment.
pub struct Session {
    data_dir: Option<PathBuf>,
    map: Option<Arc<WorldMap>>,
    env: Option<LayoutEnv>,
    started: bool,
    seed: u64,
    requests: u64,
}

impl Default for Session {
    fn default() -> Self {
        Self::new(std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
    }
}

fn error_message(id: &Value, err: &Error) -> Value {
    json!({
        "id": id,
        "ok": false,
        "error": { "code": err.code(), "message": err.to_string() },
    })
}

fn field<'a>(p: &'a Map<String, Value>, key: &str) -> Option<&'a Value> {
    p.get(key).filter(|v| !v.is_null())
}

fn get_f64(p: &Map<String, Value>, key: &str) -> Result<Option<f64>> {
    match field(p, key) {
        None => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| Error::InvalidInput(format!("{key:?} must be a number"))),
    }
}

fn get_u64(p: &Map<String, Value>, key: &str) -> Result<Option<u64>> {
    match field(p, key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(Some)
            .ok_or_else(|| Error::InvalidInput(format!("{key:?} must be a non-negative integer"))),
    }
}

fn get_bool(p: &Map<String, Value>, key: &str, default: bool) -> Result<bool> {
    match field(p, key) {
        None => Ok(default),
        Some(v) => v
            .as_bool()
            .ok_or_else(|| Error::InvalidInput(format!("{key:?} must be a boolean"))),
    }
}

fn get_str<'a>(p: &'a Map<String, Value>, key: &str) -> Result<Option<&'a str>> {
    match field(p, key) {
        None => Ok(None),
        Some(v) => v
            .as_str()
            .map(Some)
            .ok_or_else(|| Error::InvalidInput(format!("{key:?} must be a string"))),
    }
}

fn parse<T: for<'de> Deserialize<'de>>(v: &Value, what: &str) -> Result<T> {
    T::deserialize(v).map_err(|e| Error::InvalidInput(format!("bad {what}: {e}")))
}

fn point(v: &Value, what: &str) -> Result<Point> {
    let p: Point = parse(v, what)?;
    if !p.is_finite() {
        return Err(Error::InvalidInput(format!("{what} must be finite")));
    }
    Ok(p)
}

fn layout_json(env: &LayoutEnv) -> Value {
    json!(env.layout())
}

fn observation_json(obs: &Observation, with_raster: bool) -> Value {
    let mut v = json!({
        "facility_block": obs.facility_block,
        "constraint_block": obs.constraint_block,
    });
    if with_raster {
        v["raster_size"] = json!(obs.raster_size);
        v["raster_base64"] = json!(BASE64.encode(&obs.raster));
    }
    v
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::MissingReference(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

impl Session {
    pub fn new(data_dir: Option<PathBuf>) -> Self {
        Self {
            data_dir,
            map: None,
            env: None,
            started: false,
            seed: 0,
            requests: 0,
        }
    }

    /// Handles one raw line, passing every outgoing message to `sink` as a
    /// compact JSON string. Always emits exactly one response.
    pub fn handle_line(&mut self, line: &str, sink: &mut dyn FnMut(String)) {
        let value: Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => {
                let err = Error::InvalidInput(format!("malformed JSON: {e}"));
                sink(error_message(&Value::Null, &err).to_string());
                return;
            }
        };
        let response = self.handle_value(value, &mut |event| sink(event.to_string()));
        sink(response.to_string());
    }

    /// Handles one parsed request; events go to `events`, the response is
    /// returned.
    pub fn handle_value(&mut self, request: Value, events: &mut dyn FnMut(Value)) -> Value {
        let Value::Object(mut obj) = request else {
            let err = Error::InvalidInput("request must be a JSON object".into());
            return error_message(&Value::Null, &err);
        };
        let id = obj.remove("id").unwrap_or(Value::Null);
        let cmd = obj.remove("cmd");
        let mut payload = match obj.remove("payload") {
            None | Some(Value::Null) => Map::new(),
            Some(Value::Object(m)) => m,
            Some(_) => {
                return error_message(&id, &Error::InvalidInput("payload must be an object".into()));
            }
        };
        for (k, v) in obj {
            payload.entry(k).or_insert(v);
        }
        self.requests += 1;
        let result = match cmd.as_ref().and_then(Value::as_str) {
            Some(cmd) => self.dispatch(cmd, &payload, &id, events),
            None => Err(Error::InvalidInput("missing \"cmd\"".into())),
        };
        match result {
            Ok(payload) => json!({ "id": id, "ok": true, "payload": payload }),
            Err(err) => error_message(&id, &err),
        }
    }

    fn dispatch(
        &mut self,
        cmd: &str,
        p: &Map<String, Value>,
        id: &Value,
        events: &mut dyn FnMut(Value),
    ) -> Result<Value> {
        match cmd {
            "load_task" => self.load_task(p),
            "reset" => self.reset(p),
            "step" => self.step(p),
            "step_joint" => self.step_joint(p),
            "set_pos" => self.set_pos(p),
            "solve" => self.solve(p, id, events),
            "get_state" => self.get_state(p),
            "render" => self.render(p),
            other => Err(Error::InvalidInput(format!(
                "unknown command {other:?}; expected one of {}",
                COMMANDS.join(", ")
            ))),
        }
    }

    fn env(&self) -> Result<&LayoutEnv> {
        self.env
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("no task loaded; send load_task first".into()))
    }

    fn started_env(&mut self) -> Result<&mut LayoutEnv> {
        if self.env.is_some() && !self.started {
            return Err(Error::InvalidInput("episode not started; send reset first".into()));
        }
        self.env
            .as_mut()
            .ok_or_else(|| Error::InvalidInput("no task loaded; send load_task first".into()))
    }

    fn resolve_map(&self, task: &Task, p: &Map<String, Value>) -> Result<Arc<WorldMap>> {
        if let Some(v) = field(p, "map") {
            return Ok(Arc::new(WorldMap::from_value(v.clone())?));
        }
        if let Some(path) = get_str(p, "map_path")? {
            return Ok(Arc::new(WorldMap::from_value(read_json(Path::new(path))?)?));
        }
        if task.map_ref == crate::demo::DEMO_MAP_ID {
            return Ok(demo_map());
        }
        if let Some(current) = &self.map {
            if current.id == task.map_ref {
                return Ok(Arc::clone(current));
            }
        }
        let dir = self.data_dir.as_ref().ok_or_else(|| {
            Error::MissingReference(format!(
                "map {:?} not supplied and {DATA_DIR_ENV} is unset",
                task.map_ref
            ))
        })?;
        let path = dir.join("maps").join(format!("{}.json", task.map_ref));
        Ok(Arc::new(WorldMap::from_value(read_json(&path)?)?))
    }

    fn load_task(&mut self, p: &Map<String, Value>) -> Result<Value> {
        let task: Task = match (field(p, "task"), get_str(p, "task_path")?) {
            (Some(Value::String(name)), _) if name == DEMO_TASK_ID => demo_task(),
            (Some(Value::String(name)), _) => {
                return Err(Error::MissingReference(format!("unknown built-in task {name:?}")));
            }
            (Some(v), _) => parse(v, "task")?,
            (None, Some(path)) => parse(&read_json(Path::new(path))?, "task")?,
            (None, None) if get_bool(p, "demo", false)? => demo_task(),
            (None, None) => return Err(Error::InvalidInput("load_task needs task, task_path or demo".into())),
        };
        let env_config: EnvConfig = match field(p, "env") {
            Some(v) => parse(v, "env config")?,
            None => EnvConfig::default(),
        };
        let map = self.resolve_map(&task, p)?;
        let env = LayoutEnv::new(Arc::clone(&map), Arc::new(task), env_config)?;
        if let Some(seed) = get_u64(p, "seed")? {
            self.seed = seed;
        }
        self.map = Some(map);
        self.env = Some(env);
        self.started = false;
        let env = self.env()?;
        let task = env.task();
        let mut out = json!({
            "protocol": PROTOCOL,
            "task_id": task.task_id,
            "map_ref": task.map_ref,
            "facilities": task.facilities,
            "constraints": task.constraints,
            "env": env.config(),
        });
        if get_bool(p, "include_map", false)? {
            out["map"] = self.map_geometry(env.map());
        }
        Ok(out)
    }

    fn map_geometry(&self, map: &WorldMap) -> Value {
        let cells: Vec<Value> = map
            .cells
            .iter()
            .map(|c| json!({ "id": c.id, "vertices": c.vertices, "biome": c.biome }))
            .collect();
        let palette: Map<String, Value> = crate::worldgen::Biome::ALL
            .iter()
            .map(|&b| (b.name().to_string(), json!(palette(b))))
            .collect();
        json!({ "id": map.id, "cells": cells, "palette": palette })
    }

    fn next_rng(&mut self, p: &Map<String, Value>) -> Result<ChaCha8Rng> {
        let seed = match get_u64(p, "seed")? {
            Some(s) => s,
            None => derive_seed(self.seed, &[self.requests]),
        };
        Ok(ChaCha8Rng::seed_from_u64(seed))
    }

    fn reset(&mut self, p: &Map<String, Value>) -> Result<Value> {
        self.env()?;
        let mut rng = self.next_rng(p)?;
        let layout: Option<Layout> = match field(p, "layout") {
            Some(v) => Some(parse(v, "layout")?),
            None if get_bool(p, "witness", false)? => Some(self.env()?.task().witness_layout.clone()),
            None => None,
        };
        let env = self.env.as_mut().expect("checked above");
        let obs = env.reset(layout.as_ref(), &mut rng)?;
        self.started = true;
        let mut state = self.state_json()?;
        state["observation"] = observation_json(&obs, true);
        Ok(state)
    }

    fn step(&mut self, p: &Map<String, Value>) -> Result<Value> {
        let d = match field(p, "action") {
            Some(v) => point(v, "action")?,
            None => Point::new(
                get_f64(p, "dx")?.ok_or_else(|| Error::InvalidInput("step needs dx and dy".into()))?,
                get_f64(p, "dy")?.ok_or_else(|| Error::InvalidInput("step needs dx and dy".into()))?,
            ),
        };
        let env = self.started_env()?;
        let t = env.step(d)?;
        let obs = env.observation();
        let mut state = self.state_json()?;
        state["moved"] = json!(t.moved);
        state["observation"] = observation_json(&obs, false);
        Ok(state)
    }

    fn step_joint(&mut self, p: &Map<String, Value>) -> Result<Value> {
        let moves: Vec<Point> = match field(p, "moves").or_else(|| field(p, "action")) {
            Some(v) => parse(v, "moves")?,
            None => return Err(Error::InvalidInput("step_joint needs moves".into())),
        };
        let env = self.started_env()?;
        let t = env.apply(&Action::Joint(moves))?;
        let obs = env.observation();
        let mut state = self.state_json()?;
        state["moved"] = json!(t.moved);
        state["observation"] = observation_json(&obs, false);
        Ok(state)
    }

    fn set_pos(&mut self, p: &Map<String, Value>) -> Result<Value> {
        let key = get_str(p, "facility")?
            .ok_or_else(|| Error::InvalidInput("set_pos needs facility".into()))?
            .to_string();
        let at = match field(p, "position") {
            Some(v) => point(v, "position")?,
            None => Point::new(
                get_f64(p, "x")?.ok_or_else(|| Error::InvalidInput("set_pos needs x and y".into()))?,
                get_f64(p, "y")?.ok_or_else(|| Error::InvalidInput("set_pos needs x and y".into()))?,
            ),
        };
        self.started_env()?.set_facility_position(&key, at)?;
        self.state_json()
    }

    fn solve(&mut self, p: &Map<String, Value>, id: &Value, events: &mut dyn FnMut(Value)) -> Result<Value> {
        let method = get_str(p, "method")?.unwrap_or("anneal").to_string();
        let budget = get_u64(p, "budget")?.unwrap_or(DEFAULT_SOLVE_BUDGET as u64) as usize;
        let stream = get_bool(p, "stream", true)?;
        let mut rng = self.next_rng(p)?;
        let env = self.started_env()?;
        let ids = env.task().facility_ids();
        let emit = |events: &mut dyn FnMut(Value), step: usize, positions: &[Point], energy: f64| {
            let layout: Layout = ids.iter().cloned().zip(positions.iter().copied()).collect();
            events(json!({
                "id": id,
                "event": "position",
                "step": step,
                "positions": layout,
                "energy": energy,
            }));
        };
        let (steps, positions) = match method.as_str() {
            _ if budget == 0 => (0, env.positions().to_vec()),
            "anneal" => {
                let mut steps = 0;
                let res = anneal_solve(env, budget, &mut rng, &mut |s| {
                    steps += 1;
                    if stream {
                        emit(events, s.iteration + 1, s.positions, s.energy);
                    }
                })?;
                (steps, res.positions)
            }
            "greedy" => {
                let config = EnvConfig {
                    horizon: budget,
                    movement_mode: MovementMode::SimulatedConcurrent,
                    ..*env.config()
                };
                let mut scratch = LayoutEnv::new(Arc::clone(env.map_arc()), Arc::clone(env.task_arc()), config)?;
                scratch.set_positions(env.positions())?;
                let mut policy = GreedyPolicy::new(16);
                let mut steps = 0;
                while !scratch.is_done() && !scratch.all_satisfied() {
                    let action = policy.act(&scratch, &mut rng);
                    let t = scratch.apply(&action)?;
                    steps += 1;
                    if stream {
                        let energy = 1.0 - t.reward.mean_score();
                        emit(events, steps, scratch.positions(), energy);
                    }
                }
                (steps, scratch.positions().to_vec())
            }
            other => return Err(Error::InvalidInput(format!("unknown solve method {other:?}"))),
        };
        env.set_positions(&positions)?;
        let success = env.all_satisfied();
        let mut state = self.state_json()?;
        state["success"] = json!(success);
        state["solver_steps"] = json!(steps);
        state["method"] = json!(method);
        Ok(state)
    }

    fn state_json(&self) -> Result<Value> {
        let env = self.env()?;
        let reward = env.reward();
        let constraints: Vec<Value> = env
            .task()
            .constraints
            .iter()
            .zip(env.scores())
            .map(|(c, s)| json!({ "utterance": c.utterance, "score": s.score, "satisfied": s.satisfied }))
            .collect();
        Ok(json!({
            "positions": layout_json(env),
            "scores": reward.scores,
            "satisfied": reward.satisfied,
            "all_satisfied": reward.all_satisfied,
            "reward": reward.reward,
            "constraints": constraints,
            "step_count": env.step_count(),
            "turn_index": env.turn_index(),
            "done": env.is_done(),
        }))
    }

    fn get_state(&mut self, _: &Map<String, Value>) -> Result<Value> {
        self.state_json()
    }

    fn render(&mut self, p: &Map<String, Value>) -> Result<Value> {
        let size = get_u64(p, "size")?.unwrap_or(DEFAULT_RENDER_SIZE as u64) as usize;
        if !(1..=MAX_RENDER_SIZE).contains(&size) {
            return Err(Error::InvalidInput(format!("size must be in 1..={MAX_RENDER_SIZE}")));
        }
        let env = self.env()?;
        let png = if get_bool(p, "trails", true)? {
            render_trails_png(env.map(), env.trails(), size)?
        } else {
            render_png(env.map(), size)?
        };
        Ok(json!({ "width": size, "height": size, "png_base64": BASE64.encode(png) }))
    }
}
