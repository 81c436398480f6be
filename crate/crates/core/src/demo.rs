//! A small hand-built scenario: a round lake in the middle of an island,
//! two towns that must face a third across it, and a garrison on the
//! southern shore.

use std::sync::{Arc, OnceLock};

use crate::constraints::{render_with_template, Constraint, ConstraintType, Direction, Layout};
use crate::geometry::Point;
use crate::taskgen::{Facility, Task, TASK_FORMAT};
use crate::worldgen::{generate_with_water, Biome, MapGenConfig, WorldMap};

pub const DEMO_MAP_ID: &str = "demo-lake";
pub const DEMO_TASK_ID: &str = "demo";
const LAKE_CENTRE: Point = Point { x: 0.5, y: 0.5 };
const LAKE_RADIUS: f64 = 0.2;

/// The demo map, generated once per process.
pub fn demo_map() -> Arc<WorldMap> {
    static MAP: OnceLock<Arc<WorldMap>> = OnceLock::new();
    Arc::clone(MAP.get_or_init(|| {
        let config = MapGenConfig {
            cell_count: 1000,
            ..MapGenConfig::with_seed(17)
        };
        let map = generate_with_water(DEMO_MAP_ID, &config, |p| p.dist(LAKE_CENTRE) < LAKE_RADIUS)
            .expect("demo map configuration is valid");
        Arc::new(map)
    }))
}

pub fn demo_task() -> Task {
    let facilities: Vec<Facility> = [
        ("p1", "Marketown"),
        ("p2", "Veilstead Kingdom"),
        ("p3", "Hearthfire Hold"),
        ("p4", "Aquafrost Garrison"),
    ]
    .into_iter()
    .map(|(id, name)| Facility {
        id: id.into(),
        name: name.into(),
    })
    .collect();
    let mut constraints = vec![
        Constraint::new(ConstraintType::AcrossBiomeFrom, None, Some(Biome::Lake), &["p2", "p1"]),
        Constraint::new(ConstraintType::AcrossBiomeFrom, None, Some(Biome::Lake), &["p3", "p1"]),
        Constraint::new(ConstraintType::OnMapSide, Some(Direction::S), None, &["p4"]),
        Constraint::new(ConstraintType::CloseToBiome, None, Some(Biome::Ocean), &["p4"]),
    ];
    let names = facilities.iter().map(|f| (f.id.clone(), f.name.clone())).collect();
    for c in &mut constraints {
        c.utterance = render_with_template(c, &names, 0);
    }
    let witness_layout = Layout::from([
        ("p1".to_string(), Point::new(0.3, 0.3)),
        ("p2".to_string(), Point::new(0.72, 0.62)),
        ("p3".to_string(), Point::new(0.6, 0.75)),
        ("p4".to_string(), Point::new(0.5, 0.08)),
    ]);
    Task {
        format: TASK_FORMAT.to_string(),
        task_id: DEMO_TASK_ID.to_string(),
        map_ref: DEMO_MAP_ID.to_string(),
        facilities,
        constraints,
        witness_layout,
    }
}
