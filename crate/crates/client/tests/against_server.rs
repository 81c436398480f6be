use std::net::SocketAddr;

use plotmap_client::{ClientError, HttpClient, LineClient};
use plotmap_core::api::{
    self, parse_dataset, EvaluateRequest, GenerateMapsRequest, GenerateTasksRequest, RenderRequest, RolloutRequest,
};
use plotmap_core::env::EnvConfig;
use plotmap_core::solvers::{PolicyKind, PolicySpec};
use plotmap_core::taskgen::TaskGenConfig;
use plotmap_core::worldgen::MapGenConfig;
use serde_json::json;
use tokio::net::TcpListener;

async fn start_http() -> HttpClient {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(plotmap_server::serve_http(listener, None, None));
    HttpClient::new(&format!("http://{addr}/"))
}

async fn start_tcp() -> SocketAddr {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(plotmap_server::serve_tcp(listener, None));
    addr
}

fn map_request() -> GenerateMapsRequest {
    GenerateMapsRequest {
        count: 2,
        config: MapGenConfig {
            cell_count: 250,
            ..MapGenConfig::with_seed(12)
        },
    }
}

#[tokio::test]
async fn batch_operations_match_local_execution() {
    let client = start_http().await;
    assert_eq!(client.health().await.unwrap()["ok"], true);

    let maps = client.generate_maps(&map_request()).await.unwrap();
    let local_maps = api::generate_maps(&map_request()).unwrap();
    assert_eq!(maps.len(), 2);
    for (remote, local) in maps.iter().zip(&local_maps) {
        assert_eq!(remote.to_json().unwrap(), local.to_json().unwrap());
    }

    let tasks_req = GenerateTasksRequest {
        count: 6,
        config: TaskGenConfig {
            seed: 4,
            facility_count: 3,
            min_constraints: 2,
            max_constraints: 4,
            ..Default::default()
        },
        maps: maps.clone(),
    };
    let generated = client.generate_tasks(&tasks_req).await.unwrap();
    assert_eq!(generated, api::generate_tasks(&tasks_req).unwrap());
    let tasks = parse_dataset(&generated.jsonl).unwrap().tasks;
    assert_eq!(tasks.len(), 6);

    let eval_req = EvaluateRequest {
        policy: PolicySpec::new(PolicyKind::Greedy),
        env: EnvConfig::default(),
        rollouts: 12,
        seed: 9,
        tasks: tasks.clone(),
        maps: maps.clone(),
    };
    let report = client.evaluate(&eval_req).await.unwrap();
    let local = api::evaluate(&eval_req).unwrap();
    assert_eq!(
        serde_json::to_string(&report).unwrap(),
        serde_json::to_string(&local).unwrap()
    );

    let rollout = client
        .rollout(&RolloutRequest {
            policy: PolicySpec::new(PolicyKind::Random),
            env: EnvConfig::default(),
            seed: 1,
            task: tasks[0].clone(),
            map: maps.iter().find(|m| m.id == tasks[0].map_ref).unwrap().clone(),
            initial: None,
            png_size: Some(48),
        })
        .await
        .unwrap();
    let png = HttpClient::rollout_png(&rollout).unwrap().unwrap();
    assert!(png.starts_with(b"\x89PNG"));
    assert_eq!(rollout.trajectory.rewards.len(), rollout.trajectory.steps);

    let render = client
        .render(&RenderRequest {
            map: maps[0].clone(),
            size: 32,
        })
        .await
        .unwrap();
    assert!(render.starts_with(b"\x89PNG"));
}

#[tokio::test]
async fn server_errors_carry_code_and_status() {
    let client = start_http().await;
    let err = client
        .render(&RenderRequest {
            map: api::generate_maps(&map_request()).unwrap().remove(0),
            size: 0,
        })
        .await
        .unwrap_err();
    match err {
        ClientError::Server { status, code, .. } => {
            assert_eq!(status, 400);
            assert_eq!(code, "invalid-input");
        }
        other => panic!("unexpected error {other}"),
    }
}

#[tokio::test]
async fn http_session_round_trip() {
    let client = start_http().await;
    let session = client.open_session().await.unwrap();
    let loaded = session
        .send(&json!({"id": 1, "cmd": "load_task", "task": "demo"}))
        .await
        .unwrap();
    assert!(loaded.ok());
    session
        .send(&json!({"id": 2, "cmd": "reset", "witness": true}))
        .await
        .unwrap();
    session
        .send(&json!({"id": 3, "cmd": "set_pos", "facility": "p1", "x": 0.9, "y": 0.9}))
        .await
        .unwrap();
    let solved = session
        .send(&json!({"id": 4, "cmd": "solve", "seed": 5}))
        .await
        .unwrap();
    assert!(solved.ok());
    assert_eq!(solved.payload()["success"], true);
    assert_eq!(
        solved.events.len() as u64,
        solved.payload()["solver_steps"].as_u64().unwrap()
    );
    let unknown = session.send(&json!({"id": 5, "cmd": "teleport"})).await.unwrap();
    assert_eq!(unknown.error_code(), Some("invalid-input"));
    session.close().await.unwrap();
}

#[tokio::test]
async fn line_client_collects_events_before_the_response() {
    let mut client = LineClient::connect(start_tcp().await).await.unwrap();
    let bad = client.send_line("[1,2").await.unwrap();
    assert_eq!(bad.error_code(), Some("invalid-input"));
    client
        .send(&json!({"id": 1, "cmd": "load_task", "task": "demo"}))
        .await
        .unwrap();
    client.send(&json!({"id": 2, "cmd": "reset", "seed": 8})).await.unwrap();
    let solved = client
        .send(&json!({"id": 3, "cmd": "solve", "budget": 300}))
        .await
        .unwrap();
    assert!(solved.ok());
    assert!(!solved.events.is_empty());
    assert!(solved.events.len() <= 300);
    let state = client.send(&json!({"id": 4, "cmd": "get_state"})).await.unwrap();
    assert_eq!(state.response["id"], 4);
}
