//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails. Pass criterion numbers (`4 7`)
//! as arguments to run a subset.

mod oracle;

use std::collections::{BTreeMap, VecDeque};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use plotmap_core::api::map_seed;
use plotmap_core::constraints::{evaluate, Constraint, ConstraintType, Direction, Layout};
use plotmap_core::env::{EnvConfig, LayoutEnv, MovementMode, Policy};
use plotmap_core::geometry::signed_area;
use plotmap_core::protocol::Session;
use plotmap_core::seeds::rng_for;
use plotmap_core::solvers::{evaluate_policy, PolicyKind, PolicySpec, RandomPolicy, TaskInstance};
use plotmap_core::taskgen::{generate_dataset, Dataset, Facility, Task, TaskGenConfig, TASK_FORMAT};
use plotmap_core::worldgen::{
    build_cells, generate_map, generate_with_water, mean_site_centroid_distance, Biome, MapGenConfig, TerrainClass,
    WorldMap,
};
use plotmap_core::Point;
use rand::Rng;
use serde_json::{json, Value};

use oracle::{in_polygon, Oracle, Probe, P};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Base seed of the ten shared seed maps.
const MAP_BASE_SEED: u64 = 2024;
/// Random-policy success on the frozen acceptance set, measured at
/// 1000 rollouts with seed 3 and pinned here.
const RANDOM_PIN: f64 = 0.242;
const PIN_TOLERANCE: f64 = 0.05;

fn seed_maps() -> &'static [Arc<WorldMap>] {
    static MAPS: OnceLock<Vec<Arc<WorldMap>>> = OnceLock::new();
    MAPS.get_or_init(|| {
        (0..10)
            .map(|i| Arc::new(generate_map(&MapGenConfig::with_seed(map_seed(MAP_BASE_SEED, i))).expect("map")))
            .collect()
    })
}

fn plain_maps() -> Vec<WorldMap> {
    seed_maps().iter().map(|m| (**m).clone()).collect()
}

fn default_dataset() -> &'static Dataset {
    static DATA: OnceLock<Dataset> = OnceLock::new();
    DATA.get_or_init(|| {
        let cfg = TaskGenConfig {
            seed: 7,
            ..Default::default()
        };
        generate_dataset(&plain_maps(), &cfg, 1000).expect("dataset")
    })
}

/// The frozen 100-task set used for the baseline band and separation.
fn acceptance_set() -> &'static [TaskInstance] {
    static SET: OnceLock<Vec<TaskInstance>> = OnceLock::new();
    SET.get_or_init(|| {
        let cfg = TaskGenConfig {
            seed: 11,
            facility_count: 4,
            min_constraints: 2,
            max_constraints: 5,
            ..Default::default()
        };
        let ds = generate_dataset(&plain_maps(), &cfg, 100).expect("acceptance set");
        TaskInstance::bind(ds.tasks, seed_maps()).expect("bind")
    })
}

fn random_rate_on_set() -> f64 {
    static RATE: OnceLock<f64> = OnceLock::new();
    *RATE.get_or_init(|| {
        evaluate_policy(
            &PolicySpec::new(PolicyKind::Random),
            acceptance_set(),
            1000,
            EnvConfig::default(),
            3,
        )
        .expect("random evaluation")
        .success_rate
    })
}

fn c01_solvability() -> Outcome {
    let start = Instant::now();
    seed_maps();
    let ds = default_dataset();
    let by_id: BTreeMap<&str, &WorldMap> = seed_maps().iter().map(|m| (m.id.as_str(), &**m)).collect();
    let mut failures = 0;
    let mut checked = 0;
    for task in &ds.tasks {
        let map = by_id[task.map_ref.as_str()];
        for c in &task.constraints {
            checked += 1;
            match evaluate(c, &task.witness_layout, map) {
                Ok(r) if r.satisfied && r.score == 1.0 => {}
                _ => failures += 1,
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ds.tasks.len() == 1000 && failures == 0 && secs < 300.0,
        format!(
            "{} tasks, {checked} constraints, {failures} witness failures, {secs:.1}s",
            ds.tasks.len()
        ),
    )
}

fn c02_reward_contract() -> Outcome {
    let cfg = TaskGenConfig {
        seed: 23,
        ..Default::default()
    };
    let ds = generate_dataset(&plain_maps(), &cfg, 50).expect("tasks");
    let instances = TaskInstance::bind(ds.tasks, seed_maps()).expect("bind");
    let mut envs: Vec<LayoutEnv> = instances
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mode = if i % 2 == 0 {
                MovementMode::SimulatedConcurrent
            } else {
                MovementMode::ActualConcurrent
            };
            let cfg = EnvConfig {
                movement_mode: mode,
                ..Default::default()
            };
            LayoutEnv::new(Arc::clone(&t.map), Arc::clone(&t.task), cfg).expect("env")
        })
        .collect();
    let mut rng = rng_for(29, &[]);
    let mut policy = RandomPolicy;
    let (mut steps, mut out_of_range, mut iff_violations, mut plus_one) = (0usize, 0usize, 0usize, 0usize);
    let mut episode = 0usize;
    while steps < 100_000 {
        let env = &mut envs[episode % 50];
        // Every tenth episode starts at the witness so the +1 branch is exercised.
        let witness = (episode % 10 == 9).then(|| env.task().witness_layout.clone());
        env.reset(witness.as_ref(), &mut rng).expect("reset");
        episode += 1;
        while !env.is_done() && steps < 100_000 {
            let action = policy.act(env, &mut rng);
            let t = env.apply(&action).expect("step");
            steps += 1;
            let r = t.reward.reward;
            if !(r == 1.0 || (-1.0..=0.0).contains(&r)) {
                out_of_range += 1;
            }
            let all = env.scores().iter().all(|s| s.satisfied) && t.reward.satisfied.iter().all(|&s| s);
            if (r == 1.0) != all {
                iff_violations += 1;
            }
            plus_one += (r == 1.0) as usize;
        }
    }
    outcome(
        out_of_range == 0 && iff_violations == 0,
        format!(
            "{steps} steps over {episode} episodes, {out_of_range} out of range, {iff_violations} +1/all-satisfied mismatches, {plus_one} rewards of +1"
        ),
    )
}

/// Largest non-ocean biome by cell count.
fn main_land_biome(map: &WorldMap) -> Biome {
    let mut counts = [0usize; 9];
    for c in &map.cells {
        counts[c.biome.index()] += 1;
    }
    Biome::ALL
        .into_iter()
        .filter(|&b| b != Biome::Ocean)
        .max_by_key(|b| counts[b.index()])
        .expect("some land")
}

fn grid_probes(map: &WorldMap) -> Vec<Probe> {
    use ConstraintType::*;
    let land = main_land_biome(map);
    let across = if map.has_biome(Biome::Lake) { Biome::Lake } else { land };
    let anchor = [(0.5, 0.5), (0.45, 0.55), (0.55, 0.45), (0.4, 0.4), (0.6, 0.6)]
        .into_iter()
        .find(|&(x, y)| map.biome_at(Point::new(x, y)) != across)
        .unwrap_or((0.5, 0.5));
    let probe = |family, biome, direction, others| Probe {
        family,
        biome,
        direction,
        others,
    };
    let mid = [(0.5, 0.5), (0.0, 0.0)];
    vec![
        probe(AcrossBiomeFrom, Some(across), None, [anchor, (0.0, 0.0)]),
        probe(Inside, Some(land), None, mid),
        probe(Outside, Some(land), None, mid),
        probe(CloseToBiome, Some(land), None, mid),
        probe(AwayFromBiome, Some(land), None, mid),
        probe(DirOfBiome, Some(land), Some(Direction::E), mid),
        probe(CloseToFacility, None, None, [(0.37, 0.61), (0.0, 0.0)]),
        probe(AwayFromFacility, None, None, [(0.37, 0.61), (0.0, 0.0)]),
        probe(InBetween, None, None, [(0.2, 0.3), (0.8, 0.7)]),
        probe(OnMapSide, None, Some(Direction::W), mid),
        probe(DirOfFacility, None, Some(Direction::N), [(0.52, 0.41), (0.0, 0.0)]),
        probe(VisibleFrom, None, None, [(0.5, 0.5), (0.0, 0.0)]),
    ]
}

fn c03_grid_oracle() -> Outcome {
    const N: usize = 200;
    let map = &*seed_maps()[0];
    let oracle = Oracle::new(map);
    let ids = ["a".to_string(), "b".to_string(), "c".to_string()];
    let mut worst = 1.0f64;
    let mut off_boundary = 0usize;
    let mut notes = Vec::new();
    for probe in grid_probes(map) {
        let arity = probe.family.signature().facilities;
        let refs: Vec<&str> = ids[..arity].iter().map(String::as_str).collect();
        let relation = Constraint::new(probe.family, probe.direction, probe.biome, &refs)
            .resolve(&ids[..arity])
            .expect("probe constraint");
        let others = probe.others.map(|(x, y)| Point::new(x, y));
        let (mut agree, mut positives) = (0usize, 0usize);
        for i in 0..N {
            for j in 0..N {
                let p: P = ((i as f64 + 0.5) / N as f64, (j as f64 + 0.5) / N as f64);
                let positions = [Point::new(p.0, p.1), others[0], others[1]];
                let engine = relation.score(&positions[..arity], map).satisfied;
                let truth = probe.holds(&oracle, p);
                positives += truth as usize;
                if engine == truth {
                    agree += 1;
                } else if !probe.near_boundary(&oracle, p, 1e-6) {
                    off_boundary += 1;
                }
            }
        }
        let rate = agree as f64 / (N * N) as f64;
        worst = worst.min(rate);
        notes.push(format!("{}={:.4}({}+)", probe.family, rate, positives));
    }
    outcome(
        worst >= 0.999 && off_boundary == 0,
        format!(
            "min agreement {worst:.5}, {off_boundary} disagreements away from a boundary; {}",
            notes.join(" ")
        ),
    )
}

fn inside_lake_fixture() -> TaskInstance {
    let centres = [(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)];
    let map = generate_with_water("inside-lake", &MapGenConfig::with_seed(5), |p| {
        centres.iter().any(|&(x, y)| p.dist(Point::new(x, y)) < 0.07)
    })
    .expect("fixture map");
    let inside = |id: &str| Constraint::new(ConstraintType::Inside, None, Some(Biome::Lake), &[id]);
    let task = Task {
        format: TASK_FORMAT.into(),
        task_id: "inside-lake".into(),
        map_ref: map.id.clone(),
        facilities: vec![
            Facility {
                id: "p1".into(),
                name: "p1".into(),
            },
            Facility {
                id: "p2".into(),
                name: "p2".into(),
            },
        ],
        constraints: vec![inside("p1"), inside("p2")],
        witness_layout: Layout::new(),
    };
    TaskInstance {
        map: Arc::new(map),
        task: Arc::new(task),
    }
}

fn c04_inside_lake() -> Outcome {
    let start = Instant::now();
    let set = [inside_lake_fixture()];
    let simulated = EnvConfig::default();
    let actual = EnvConfig {
        movement_mode: MovementMode::ActualConcurrent,
        ..Default::default()
    };
    let rate = |kind, env| {
        evaluate_policy(&PolicySpec::new(kind), &set, 1000, env, 1)
            .expect("eval")
            .success_rate
    };
    let greedy = rate(PolicyKind::Greedy, simulated);
    let random = rate(PolicyKind::Random, simulated);
    let joint = rate(PolicyKind::Greedy, actual);
    let secs = start.elapsed().as_secs_f64();
    let clauses = [
        greedy >= 0.70,
        (0.02..=0.20).contains(&random),
        joint < random,
        secs < 600.0,
    ];
    outcome(
        clauses.iter().all(|&c| c),
        format!(
            "greedy+simulated {:.1}% (>=70: {}), random {:.1}% (in [2,20]: {}), greedy-joint+actual {:.1}% (< random: {}), {secs:.1}s",
            greedy * 100.0,
            clauses[0],
            random * 100.0,
            clauses[1],
            joint * 100.0,
            clauses[2]
        ),
    )
}

fn c05_random_band() -> Outcome {
    let r = random_rate_on_set();
    let in_band = (0.05..=0.60).contains(&r);
    let pinned = (r - RANDOM_PIN).abs() <= PIN_TOLERANCE + 1e-12;
    outcome(
        in_band && pinned,
        format!(
            "random {:.1}% (band [5,60]: {in_band}; pin {:.1}±{:.0}: {pinned})",
            r * 100.0,
            RANDOM_PIN * 100.0,
            PIN_TOLERANCE * 100.0
        ),
    )
}

fn c06_separation() -> Outcome {
    let random = random_rate_on_set();
    let greedy = evaluate_policy(
        &PolicySpec::new(PolicyKind::Greedy),
        acceptance_set(),
        1000,
        EnvConfig::default(),
        3,
    )
    .expect("greedy evaluation")
    .success_rate;
    let gap = (greedy - random) * 100.0;
    outcome(
        gap >= 15.0,
        format!(
            "greedy {:.1}% vs random {:.1}%, gap {gap:.1} points",
            greedy * 100.0,
            random * 100.0
        ),
    )
}

/// The `plotmap` binary next to this test executable, built on demand when
/// the suite runs on its own.
fn cli_binary() -> Result<PathBuf, String> {
    let exe = std::env::current_exe().map_err(|e| e.to_string())?;
    let profile_dir = exe
        .parent()
        .and_then(Path::parent)
        .ok_or("unexpected test executable location")?;
    let bin = profile_dir.join(format!("plotmap{}", std::env::consts::EXE_SUFFIX));
    if !bin.exists() {
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        let status = Command::new(cargo)
            .args(["build", "-p", "plotmap-cli", "--bin", "plotmap"])
            .status()
            .map_err(|e| format!("cannot run cargo: {e}"))?;
        if !status.success() || !bin.exists() {
            return Err("building the plotmap binary failed".into());
        }
    }
    Ok(bin)
}

fn cli_pipeline(bin: &Path, dir: &Path) -> Result<(), String> {
    let d = dir.to_str().ok_or("non-UTF-8 temp path")?;
    let tasks = format!("{d}/tasks.jsonl");
    let runs: [Vec<String>; 3] = [
        ["gen-maps", "--count", "3", "--cells", "400", "--seed", "99", "--out", d]
            .map(String::from)
            .to_vec(),
        [
            "gen-tasks",
            "--maps",
            d,
            "--count",
            "30",
            "--seed",
            "5",
            "--out",
            &tasks,
        ]
        .map(String::from)
        .to_vec(),
        [
            "evaluate",
            "--tasks",
            &tasks,
            "--maps",
            d,
            "--policy",
            "greedy",
            "--rollouts",
            "60",
            "--seed",
            "8",
            "--out",
            &format!("{d}/eval.json"),
            "--csv",
            &format!("{d}/eval.csv"),
        ]
        .map(String::from)
        .to_vec(),
    ];
    for args in runs {
        let out = Command::new(bin)
            .args(&args)
            .env_remove("PLOTMAP_REMOTE")
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{} failed: {}", args[0], String::from_utf8_lossy(&out.stderr)));
        }
    }
    Ok(())
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).expect("read dir").flatten() {
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).expect("prefix").to_path_buf();
                files.insert(rel, std::fs::read(&path).expect("read file"));
            }
        }
    }
    files
}

fn c07_determinism() -> Outcome {
    let bin = match cli_binary() {
        Ok(b) => b,
        Err(e) => return outcome(false, e),
    };
    let (a, b) = (
        tempfile::tempdir().expect("tempdir"),
        tempfile::tempdir().expect("tempdir"),
    );
    for dir in [a.path(), b.path()] {
        if let Err(e) = cli_pipeline(&bin, dir) {
            return outcome(false, e);
        }
    }
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    let differing: Vec<String> = ta
        .keys()
        .chain(tb.keys())
        .filter(|k| ta.get(*k) != tb.get(*k))
        .map(|k| k.display().to_string())
        .collect();
    let bytes: usize = ta.values().map(Vec::len).sum();
    outcome(
        differing.is_empty() && ta.len() >= 9,
        format!(
            "{} files, {bytes} bytes per run, {} differing {:?}",
            ta.len(),
            differing.len(),
            differing
        ),
    )
}

fn ocean_violations(map: &WorldMap) -> usize {
    let cells = &map.cells;
    let mut reached = vec![false; cells.len()];
    let mut queue: VecDeque<usize> = cells
        .iter()
        .filter(|c| c.terrain == TerrainClass::Ocean && c.touches_border())
        .map(|c| c.id)
        .collect();
    for &i in &queue {
        reached[i] = true;
    }
    while let Some(i) = queue.pop_front() {
        for &n in &cells[i].neighbors {
            if cells[n].terrain == TerrainClass::Ocean && !reached[n] {
                reached[n] = true;
                queue.push_back(n);
            }
        }
    }
    let unreached_ocean = cells
        .iter()
        .filter(|c| c.terrain == TerrainClass::Ocean && !reached[c.id])
        .count();
    let bad_lakes = cells
        .iter()
        .filter(|c| c.terrain == TerrainClass::Lake)
        .filter(|c| c.touches_border() || c.neighbors.iter().any(|&n| cells[n].terrain == TerrainClass::Ocean))
        .count();
    unreached_ocean + bad_lakes
}

fn river_violations(map: &WorldMap) -> usize {
    map.rivers
        .iter()
        .map(|r| {
            let shape = (r.points.len() != r.elevations.len() || r.points.len() < 2) as usize;
            shape + r.elevations.windows(2).filter(|w| w[1] > w[0]).count()
        })
        .sum()
}

fn partition_violations(map: &WorldMap, seed: u64) -> usize {
    let polys: Vec<Vec<P>> = map
        .cells
        .iter()
        .map(|c| c.vertices.iter().map(|v| (v.x, v.y)).collect())
        .collect();
    let area: f64 = map.cells.iter().map(|c| signed_area(&c.vertices)).sum();
    let mut rng = rng_for(seed, &[]);
    let mut bad = ((area - 1.0).abs() > 1e-9) as usize;
    for _ in 0..10_000 {
        let p: P = (rng.random(), rng.random());
        let hits = polys.iter().filter(|poly| in_polygon(poly, p)).count();
        if hits != 1 {
            bad += 1;
        }
    }
    bad
}

fn lloyd_violations(seed: u64) -> usize {
    let spread: Vec<f64> = (0..=2)
        .map(|iterations| {
            let cfg = MapGenConfig {
                lloyd_iterations: iterations,
                ..MapGenConfig::with_seed(seed)
            };
            let mut rng = rng_for(seed, &[]);
            mean_site_centroid_distance(&build_cells(&cfg, &mut rng).expect("cells"))
        })
        .collect();
    spread.windows(2).filter(|w| w[1] > w[0]).count()
}

fn c08_map_invariants() -> Outcome {
    let (mut ocean, mut river, mut partition, mut lloyd, mut rivers) = (0, 0, 0, 0, 0);
    for i in 0..20 {
        let seed = map_seed(77, i);
        let map = generate_map(&MapGenConfig::with_seed(seed)).expect("map");
        ocean += ocean_violations(&map);
        river += river_violations(&map);
        rivers += map.rivers.len();
        partition += partition_violations(&map, seed);
        lloyd += lloyd_violations(seed);
    }
    outcome(
        ocean + river + partition + lloyd == 0,
        format!(
            "20 maps: ocean {ocean}, river {river} ({rivers} rivers), partition {partition} (200000 probes), lloyd {lloyd}"
        ),
    )
}

fn c09_skew() -> Outcome {
    let hist = default_dataset().histogram();
    let modal = hist.modal();
    let across = hist.count(ConstraintType::AcrossBiomeFrom);
    let away = hist.count(ConstraintType::AwayFromFacility);
    let close = hist.count(ConstraintType::CloseToFacility);
    outcome(
        modal == Some(ConstraintType::AcrossBiomeFrom) && away > close,
        format!(
            "modal {:?} ({across}), AwayFromFacility {away} vs CloseToFacility {close}, {} constraints",
            modal.map(|m| m.name()),
            hist.constraints
        ),
    )
}

fn send(session: &mut Session, request: Value) -> Value {
    session.handle_value(request, &mut |_| {})
}

/// One scripted edit-and-repair session; returns whether both solves
/// reached all-satisfied and the edit broke at least one constraint.
fn readapt(seed: u64) -> Result<bool, String> {
    let mut s = Session::new(None);
    let ok = |v: Value| -> Result<Value, String> {
        if v["ok"] == true {
            Ok(v["payload"].clone())
        } else {
            Err(v["error"].to_string())
        }
    };
    ok(send(
        &mut s,
        json!({"id": 1, "cmd": "load_task", "task": "demo", "seed": seed}),
    ))?;
    ok(send(&mut s, json!({"id": 2, "cmd": "reset"})))?;
    let first = ok(send(
        &mut s,
        json!({"id": 3, "cmd": "solve", "budget": 4000, "stream": false}),
    ))?;
    ok(send(
        &mut s,
        json!({"id": 4, "cmd": "set_pos", "facility": "p4", "x": 0.5, "y": 0.9}),
    ))?;
    let broken = ok(send(&mut s, json!({"id": 5, "cmd": "get_state"})))?;
    let unsatisfied = broken["satisfied"]
        .as_array()
        .map_or(0, |a| a.iter().filter(|v| **v == false).count());
    let second = ok(send(
        &mut s,
        json!({"id": 6, "cmd": "solve", "budget": 4000, "stream": false}),
    ))?;
    let end = ok(send(&mut s, json!({"id": 7, "cmd": "get_state"})))?;
    Ok(first["success"] == true && unsatisfied >= 1 && second["success"] == true && end["all_satisfied"] == true)
}

fn c10_readaptation() -> Outcome {
    let mut wins = 0;
    let mut errors = Vec::new();
    for seed in 0..10 {
        match readapt(seed) {
            Ok(true) => wins += 1,
            Ok(false) => {}
            Err(e) => errors.push(e),
        }
    }
    outcome(
        wins >= 9 && errors.is_empty(),
        format!("{wins}/10 seeded runs re-satisfied within 4000 evaluations; errors {errors:?}"),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    (1, "witness solvability", c01_solvability),
    (2, "reward contract", c02_reward_contract),
    (3, "grid oracle agreement", c03_grid_oracle),
    (4, "inside-lake movement modes", c04_inside_lake),
    (5, "random-agent band", c05_random_band),
    (6, "baseline separation", c06_separation),
    (7, "cli determinism", c07_determinism),
    (8, "map invariants", c08_map_invariants),
    (9, "dataset skew", c09_skew),
    (10, "re-adaptation", c10_readaptation),
];

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (n, name, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {n:>2} {verdict} {name}: {} [{:.1}s]",
            result.detail,
            start.elapsed().as_secs_f64()
        );
        if !result.pass {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
