//! Solvable task generation: place facilities at random, collect every
//! constraint instantiation that the placement satisfies, and sample a
//! subset. The placement is kept as the witness layout.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constraints::{render_utterance, Constraint, ConstraintType, Direction, Layout};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::seeds::rng_for;
use crate::worldgen::{Biome, WorldMap};

pub const TASK_FORMAT: &str = "plotmap-task/1";
pub const HISTOGRAM_FORMAT: &str = "plotmap-histogram/1";

/// Upper bound on facilities and constraints per task.
pub const MAX_FACILITIES: usize = 10;
pub const MAX_CONSTRAINTS: usize = 10;

const FACILITY_NAMES: [&str; MAX_FACILITIES] = [
    "Marketown",
    "Veilstead Kingdom",
    "Hearthfire Hold",
    "Aquafrost Garrison",
    "Pillar of Hope",
    "Mirestep Swamp",
    "Forgewind Citadel",
    "Fountain of Solace",
    "Emberfall Keep",
    "Stonewatch Tower",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaskGenConfig {
    pub facility_count: usize,
    pub min_constraints: usize,
    pub max_constraints: usize,
    pub families: Vec<ConstraintType>,
    pub seed: u64,
    pub balance_sampling: bool,
    /// Placement attempts per task before giving up.
    pub max_retries: usize,
}

impl Default for TaskGenConfig {
    fn default() -> Self {
        Self {
            facility_count: MAX_FACILITIES,
            min_constraints: 3,
            max_constraints: MAX_CONSTRAINTS,
            families: ConstraintType::ALL.to_vec(),
            seed: 0,
            balance_sampling: false,
            max_retries: 50,
        }
    }
}

impl TaskGenConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_FACILITIES).contains(&self.facility_count) {
            return Err(Error::InvalidConfig(format!(
                "facility_count must be in 1..={MAX_FACILITIES}, got {}",
                self.facility_count
            )));
        }
        if self.min_constraints < 1
            || self.min_constraints > self.max_constraints
            || self.max_constraints > MAX_CONSTRAINTS
        {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= min_constraints <= max_constraints <= {MAX_CONSTRAINTS}, got {}..{}",
                self.min_constraints, self.max_constraints
            )));
        }
        if self.families.is_empty() {
            return Err(Error::InvalidConfig("family whitelist is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Facility {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    #[serde(default = "task_format")]
    pub format: String,
    pub task_id: String,
    pub map_ref: String,
    pub facilities: Vec<Facility>,
    pub constraints: Vec<Constraint>,
    pub witness_layout: Layout,
}

fn task_format() -> String {
    TASK_FORMAT.to_string()
}

impl Task {
    pub fn facility_ids(&self) -> Vec<String> {
        self.facilities.iter().map(|f| f.id.clone()).collect()
    }

    pub fn names(&self) -> BTreeMap<String, String> {
        self.facilities.iter().map(|f| (f.id.clone(), f.name.clone())).collect()
    }

    /// Facility index by id, falling back to display name.
    pub fn facility_index(&self, key: &str) -> Option<usize> {
        self.facilities
            .iter()
            .position(|f| f.id == key)
            .or_else(|| self.facilities.iter().position(|f| f.name == key))
    }

    /// Checks references and capacities.
    pub fn validate(&self) -> Result<()> {
        if self.facilities.is_empty() || self.facilities.len() > MAX_FACILITIES {
            return Err(Error::Capacity(format!(
                "task has {} facilities, limit {MAX_FACILITIES}",
                self.facilities.len()
            )));
        }
        if self.constraints.len() > MAX_CONSTRAINTS {
            return Err(Error::Capacity(format!(
                "task has {} constraints, limit {MAX_CONSTRAINTS}",
                self.constraints.len()
            )));
        }
        let ids = self.facility_ids();
        for c in &self.constraints {
            c.resolve(&ids)?;
        }
        Ok(())
    }

    pub fn witness_positions(&self) -> Result<Vec<Point>> {
        self.facilities
            .iter()
            .map(|f| {
                self.witness_layout
                    .get(&f.id)
                    .copied()
                    .ok_or_else(|| Error::InvalidLayout(format!("witness lacks {:?}", f.id)))
            })
            .collect()
    }
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// Every instantiation of the whitelisted families over `ids` and
/// `biomes`, one representative per argument symmetry class:
/// symmetric pairwise relations use `i < j`, `InBetween` takes an unordered
/// endpoint pair, and `DirOfFacility(d, a, b)` (equivalent to
/// `DirOfFacility(opposite d, b, a)`) keeps `a < b`.
pub fn enumerate_all(ids: &[String], biomes: &[Biome], families: &[ConstraintType]) -> Vec<Constraint> {
    use ConstraintType::*;
    let n = ids.len();
    let mut out = Vec::new();
    let mut push = |ctype, direction, biome, slots: &[usize]| {
        out.push(Constraint {
            ctype,
            direction,
            biome,
            facilities: slots.iter().map(|&k| ids[k].clone()).collect(),
            utterance: String::new(),
        });
    };
    for &family in families {
        match family {
            AcrossBiomeFrom => {
                for &b in biomes {
                    for (i, j) in pairs(n) {
                        push(family, None, Some(b), &[i, j]);
                    }
                }
            }
            Inside | Outside | CloseToBiome | AwayFromBiome => {
                for &b in biomes {
                    for i in 0..n {
                        push(family, None, Some(b), &[i]);
                    }
                }
            }
            DirOfBiome => {
                for d in Direction::ALL {
                    for &b in biomes {
                        for i in 0..n {
                            push(family, Some(d), Some(b), &[i]);
                        }
                    }
                }
            }
            CloseToFacility | AwayFromFacility | VisibleFrom => {
                for (i, j) in pairs(n) {
                    push(family, None, None, &[i, j]);
                }
            }
            InBetween => {
                for i in 0..n {
                    for (j, k) in pairs(n) {
                        if i != j && i != k {
                            push(family, None, None, &[i, j, k]);
                        }
                    }
                }
            }
            OnMapSide => {
                for d in Direction::ALL {
                    for i in 0..n {
                        push(family, Some(d), None, &[i]);
                    }
                }
            }
            DirOfFacility => {
                for d in Direction::ALL {
                    for (i, j) in pairs(n) {
                        push(family, Some(d), None, &[i, j]);
                    }
                }
            }
        }
    }
    out
}

/// Instantiations satisfied by `positions` (indexed like `ids`).
pub fn enumerate_satisfied(
    ids: &[String],
    positions: &[Point],
    map: &WorldMap,
    families: &[ConstraintType],
) -> Vec<Constraint> {
    enumerate_all(ids, &map.biomes_present(), families)
        .into_iter()
        .filter(|c| {
            c.resolve(ids)
                .map(|r| r.score(positions, map).satisfied)
                .unwrap_or(false)
        })
        .collect()
}

fn sample_constraints(pool: Vec<Constraint>, count: usize, balanced: bool, rng: &mut impl Rng) -> Vec<Constraint> {
    if !balanced {
        let mut picks = sample(rng, pool.len(), count).into_vec();
        picks.sort_unstable();
        return picks.into_iter().map(|k| pool[k].clone()).collect();
    }
    let mut by_family: BTreeMap<ConstraintType, Vec<Constraint>> = BTreeMap::new();
    for c in pool {
        by_family.entry(c.ctype).or_default().push(c);
    }
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let families: Vec<ConstraintType> = by_family.keys().copied().collect();
        let family = families[rng.random_range(0..families.len())];
        let bucket = by_family.get_mut(&family).expect("family key");
        out.push(bucket.swap_remove(rng.random_range(0..bucket.len())));
        if bucket.is_empty() {
            by_family.remove(&family);
        }
    }
    out
}

/// Generates one task on `map`.
pub fn generate_task(map: &WorldMap, config: &TaskGenConfig, task_id: &str, rng: &mut impl Rng) -> Result<Task> {
    config.validate()?;
    let facilities: Vec<Facility> = (0..config.facility_count)
        .map(|k| Facility {
            id: format!("p{}", k + 1),
            name: FACILITY_NAMES[k].to_string(),
        })
        .collect();
    let ids: Vec<String> = facilities.iter().map(|f| f.id.clone()).collect();
    let names: BTreeMap<String, String> = facilities.iter().map(|f| (f.id.clone(), f.name.clone())).collect();

    for _ in 0..config.max_retries.max(1) {
        let positions: Vec<Point> = (0..ids.len())
            .map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>()))
            .collect();
        let pool = enumerate_satisfied(&ids, &positions, map, &config.families);
        if pool.len() < config.min_constraints {
            continue;
        }
        let upper = config.max_constraints.min(pool.len());
        let count = rng.random_range(config.min_constraints..=upper);
        let mut constraints = sample_constraints(pool, count, config.balance_sampling, rng);
        for c in &mut constraints {
            c.utterance = render_utterance(c, &names, rng);
        }
        return Ok(Task {
            format: TASK_FORMAT.to_string(),
            task_id: task_id.to_string(),
            map_ref: map.id.clone(),
            facilities,
            constraints,
            witness_layout: ids.iter().cloned().zip(positions).collect(),
        });
    }
    Err(Error::GenerationFailed(format!(
        "no placement produced {} satisfied constraints in {} attempts",
        config.min_constraints, config.max_retries
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub format: String,
    pub kind: String,
    pub count: usize,
    pub config: TaskGenConfig,
    pub maps: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub format: String,
    pub tasks: usize,
    pub constraints: usize,
    pub families: BTreeMap<String, usize>,
}

impl Histogram {
    pub fn of(tasks: &[Task]) -> Histogram {
        let mut families: BTreeMap<String, usize> =
            ConstraintType::ALL.iter().map(|t| (t.name().to_string(), 0)).collect();
        let mut constraints = 0;
        for c in tasks.iter().flat_map(|t| &t.constraints) {
            *families.entry(c.ctype.name().to_string()).or_default() += 1;
            constraints += 1;
        }
        Histogram {
            format: HISTOGRAM_FORMAT.to_string(),
            tasks: tasks.len(),
            constraints,
            families,
        }
    }

    pub fn count(&self, family: ConstraintType) -> usize {
        self.families.get(family.name()).copied().unwrap_or(0)
    }

    /// Family with the highest count, first by wire order on ties.
    pub fn modal(&self) -> Option<ConstraintType> {
        ConstraintType::ALL
            .into_iter()
            .filter(|&t| self.count(t) > 0)
            .max_by(|&a, &b| self.count(a).cmp(&self.count(b)).then(b.cmp(&a)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub tasks: Vec<Task>,
}

/// Generation attempts per task index before it counts as a failure.
const ATTEMPTS_PER_TASK: u64 = 5;

/// Generates `count` tasks over `maps`, each from its own seed stream.
pub fn generate_dataset(maps: &[WorldMap], config: &TaskGenConfig, count: usize) -> Result<Dataset> {
    config.validate()?;
    if maps.is_empty() {
        return Err(Error::InvalidInput("at least one map is required".into()));
    }
    let max_failures = 10 + count / 100;
    let mut failures = 0;
    let mut tasks = Vec::with_capacity(count);
    let mut index = 0u64;
    while tasks.len() < count {
        let task_id = format!("task-{:05}", tasks.len());
        let mut last_err = None;
        for attempt in 0..ATTEMPTS_PER_TASK {
            let mut rng = rng_for(config.seed, &[index, attempt]);
            let map = &maps[rng.random_range(0..maps.len())];
            match generate_task(map, config, &task_id, &mut rng) {
                Ok(task) => {
                    tasks.push(task);
                    last_err = None;
                    break;
                }
                Err(e) => last_err = Some(e),
            }
        }
        index += 1;
        if let Some(e) = last_err {
            failures += 1;
            if failures > max_failures {
                return Err(e);
            }
        }
    }
    Ok(Dataset {
        header: DatasetHeader {
            format: TASK_FORMAT.to_string(),
            kind: "header".to_string(),
            count,
            config: config.clone(),
            maps: maps.iter().map(|m| m.id.clone()).collect(),
        },
        tasks,
    })
}

impl Dataset {
    pub fn histogram(&self) -> Histogram {
        Histogram::of(&self.tasks)
    }

    /// JSON lines: the header, then one task per line.
    pub fn write_jsonl(&self, out: &mut impl Write) -> Result<()> {
        serde_json::to_writer(&mut *out, &self.header)?;
        out.write_all(b"\n")?;
        for task in &self.tasks {
            serde_json::to_writer(&mut *out, task)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf)?;
        Ok(buf)
    }

    /// Reads a dataset. A first line with `"kind": "header"` is optional.
    pub fn read_jsonl(input: impl BufRead) -> Result<Dataset> {
        let mut header = None;
        let mut tasks = Vec::new();
        for (k, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let value: serde_json::Value = serde_json::from_str(&line)?;
            if k == 0 && value.get("kind").and_then(|v| v.as_str()) == Some("header") {
                header = Some(serde_json::from_value(value)?);
                continue;
            }
            let task: Task = serde_json::from_value(value)?;
            if task.format != TASK_FORMAT {
                return Err(Error::InvalidInput(format!(
                    "unsupported task format {:?}",
                    task.format
                )));
            }
            tasks.push(task);
        }
        let header = header.unwrap_or_else(|| DatasetHeader {
            format: TASK_FORMAT.to_string(),
            kind: "header".to_string(),
            count: tasks.len(),
            config: TaskGenConfig::default(),
            maps: Vec::new(),
        });
        Ok(Dataset { header, tasks })
    }
}
