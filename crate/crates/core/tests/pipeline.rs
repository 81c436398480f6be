use std::io::BufReader;
use std::sync::Arc;

use plotmap_core::constraints::evaluate;
use plotmap_core::env::{rollout, EnvConfig, LayoutEnv, MovementMode};
use plotmap_core::protocol::{Session, DATA_DIR_ENV};
use plotmap_core::seeds::rng_for;
use plotmap_core::solvers::{anneal_solve, evaluate_policy, GreedyPolicy, PolicyKind, PolicySpec, TaskInstance};
use plotmap_core::taskgen::{generate_dataset, Dataset, TaskGenConfig};
use plotmap_core::worldgen::{generate_map, MapGenConfig, WorldMap};
use serde_json::{json, Value};

fn small_map(seed: u64) -> WorldMap {
    generate_map(&MapGenConfig {
        cell_count: 300,
        ..MapGenConfig::with_seed(seed)
    })
    .unwrap()
}

#[test]
fn files_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let map = small_map(4);
    let map_path = dir.path().join("map.json");
    std::fs::write(&map_path, map.to_json().unwrap()).unwrap();
    let back = WorldMap::load(&map_path).unwrap();
    assert_eq!(back.cells, map.cells);
    assert_eq!(back.to_json().unwrap(), map.to_json().unwrap());

    let ds = generate_dataset(
        &[map.clone()],
        &TaskGenConfig {
            seed: 2,
            ..Default::default()
        },
        12,
    )
    .unwrap();
    let tasks_path = dir.path().join("tasks.jsonl");
    let mut file = std::fs::File::create(&tasks_path).unwrap();
    ds.write_jsonl(&mut file).unwrap();
    drop(file);
    let read = Dataset::read_jsonl(BufReader::new(std::fs::File::open(&tasks_path).unwrap())).unwrap();
    assert_eq!(read.tasks, ds.tasks);
    for task in &read.tasks {
        for c in &task.constraints {
            assert!(evaluate(c, &task.witness_layout, &back).unwrap().satisfied);
        }
    }
}

#[test]
fn generated_tasks_are_solvable_by_annealing() {
    let map = Arc::new(small_map(9));
    let cfg = TaskGenConfig {
        seed: 5,
        facility_count: 3,
        min_constraints: 2,
        max_constraints: 3,
        ..Default::default()
    };
    let ds = generate_dataset(&[(*map).clone()], &cfg, 5).unwrap();
    let mut solved = 0;
    for (i, task) in ds.tasks.into_iter().enumerate() {
        let mut env = LayoutEnv::new(Arc::clone(&map), Arc::new(task), EnvConfig::default()).unwrap();
        let mut rng = rng_for(1, &[i as u64]);
        env.reset(None, &mut rng).unwrap();
        let res = anneal_solve(&env, 20_000, &mut rng, &mut |_| {}).unwrap();
        solved += res.success as usize;
        assert!(res.evaluations <= 20_000);
    }
    assert!(solved >= 4, "annealing solved only {solved}/5");
}

#[test]
fn rollouts_and_evaluation_are_reproducible() {
    let map = Arc::new(small_map(11));
    let ds = generate_dataset(
        &[(*map).clone()],
        &TaskGenConfig {
            seed: 8,
            ..Default::default()
        },
        4,
    )
    .unwrap();
    let set = TaskInstance::bind(ds.tasks.clone(), &[Arc::clone(&map)]).unwrap();
    for mode in [MovementMode::SimulatedConcurrent, MovementMode::ActualConcurrent] {
        let cfg = EnvConfig {
            movement_mode: mode,
            horizon: 40,
            ..Default::default()
        };
        let a = evaluate_policy(&PolicySpec::new(PolicyKind::Greedy), &set, 8, cfg, 6).unwrap();
        let b = evaluate_policy(&PolicySpec::new(PolicyKind::Greedy), &set, 8, cfg, 6).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.tasks.iter().map(|t| t.rollouts).sum::<usize>(), 8);
    }

    let mut env = LayoutEnv::new(Arc::clone(&map), Arc::new(ds.tasks[0].clone()), EnvConfig::default()).unwrap();
    let traj = rollout(&mut env, &mut GreedyPolicy::new(8), None, &mut rng_for(3, &[])).unwrap();
    assert_eq!(traj.rewards.len(), traj.steps);
    assert!(traj.trails.values().all(|t| t.len() >= 1));
}

fn run(session: &mut Session, lines: &[Value]) -> Vec<Value> {
    let mut out = Vec::new();
    for line in lines {
        session.handle_line(&line.to_string(), &mut |m| out.push(serde_json::from_str(&m).unwrap()));
    }
    out
}

#[test]
fn protocol_loads_maps_from_the_data_directory() {
    let dir = tempfile::tempdir().unwrap();
    let map = small_map(21);
    std::fs::create_dir_all(dir.path().join("maps")).unwrap();
    std::fs::write(
        dir.path().join("maps").join(format!("{}.json", map.id)),
        map.to_json().unwrap(),
    )
    .unwrap();
    let ds = generate_dataset(
        &[map],
        &TaskGenConfig {
            seed: 3,
            ..Default::default()
        },
        1,
    )
    .unwrap();
    let task = serde_json::to_value(&ds.tasks[0]).unwrap();

    let mut session = Session::new(Some(dir.path().to_path_buf()));
    let out = run(
        &mut session,
        &[
            json!({"id": 1, "cmd": "load_task", "task": task}),
            json!({"id": 2, "cmd": "reset", "witness": true}),
            json!({"id": 3, "cmd": "get_state"}),
        ],
    );
    assert!(out.iter().all(|m| m["ok"] == true), "{out:?}");
    assert_eq!(out[2]["payload"]["all_satisfied"], true);

    let mut bare = Session::new(None);
    let out = run(&mut bare, &[json!({"id": 1, "cmd": "load_task", "task": ds.tasks[0]})]);
    assert_eq!(out[0]["ok"], false);
    assert_eq!(out[0]["error"]["code"], "missing-reference");
    assert!(out[0]["error"]["message"].as_str().unwrap().contains(DATA_DIR_ENV));
}
