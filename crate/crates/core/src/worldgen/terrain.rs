//! Terrain stages: flooding, elevation, rivers, moisture and biomes.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::Rng;

use super::mesh::Mesh;
use super::{Biome, Cell, MapGenConfig, River, TerrainClass};
use crate::geometry::{point_convex_dist, point_segment_dist, Point};

/// Number of random border regions flooded before the coastline grows.
pub const OCEAN_SEED_REGIONS: usize = 2;
/// Radius of each seeded border region.
pub const OCEAN_SEED_RADIUS: f64 = 0.12;
/// A cell is water once this fraction of its edges are water edges.
pub const CELL_WATER_FRACTION: f64 = 0.5;
/// Minimum interpolated corner elevation for a river source.
pub const RIVER_SOURCE_ELEVATION: f64 = 0.6;
/// Length scale of the moisture decay `exp(-d / MOISTURE_FALLOFF)`.
pub const MOISTURE_FALLOFF: f64 = 0.15;

/// Random-order set supporting O(1) insert and uniform removal.
struct Frontier {
    items: Vec<usize>,
    slot: Vec<Option<usize>>,
}

impl Frontier {
    fn new(universe: usize) -> Self {
        Self {
            items: Vec::new(),
            slot: vec![None; universe],
        }
    }

    fn insert(&mut self, item: usize) {
        if self.slot[item].is_none() {
            self.slot[item] = Some(self.items.len());
            self.items.push(item);
        }
    }

    fn take_random(&mut self, rng: &mut impl Rng) -> Option<usize> {
        if self.items.is_empty() {
            return None;
        }
        let k = rng.random_range(0..self.items.len());
        let item = self.items.swap_remove(k);
        self.slot[item] = None;
        if let Some(&moved) = self.items.get(k) {
            self.slot[moved] = Some(k);
        }
        Some(item)
    }
}

struct WaterEdges {
    flags: Vec<bool>,
    count: usize,
}

impl WaterEdges {
    fn mark(&mut self, e: usize) {
        if !self.flags[e] {
            self.flags[e] = true;
            self.count += 1;
        }
    }
}

fn edge_neighbors(mesh: &Mesh, edge: usize) -> impl Iterator<Item = usize> + '_ {
    let (a, b) = mesh.edges[edge].corners;
    mesh.corner_edges[a]
        .iter()
        .chain(&mesh.corner_edges[b])
        .copied()
        .filter(move |&e| e != edge)
}

#[derive(PartialEq)]
struct ByDistance(f64, usize);

impl Eq for ByDistance {}

impl PartialOrd for ByDistance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ByDistance {
    // Min-heap on distance, then edge id.
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Floods water edges from the border, then seeds lakes inland, and
/// classifies every cell as OCEAN, COAST, LAKE or LAND.
pub fn flood_water(cells: &mut [Cell], mesh: &Mesh, config: &MapGenConfig, rng: &mut impl Rng) {
    let edge_count = mesh.edges.len();
    let mut water = WaterEdges {
        flags: vec![false; edge_count],
        count: 0,
    };

    for (e, edge) in mesh.edges.iter().enumerate() {
        if edge.is_border() {
            water.mark(e);
        }
    }
    for _ in 0..OCEAN_SEED_REGIONS {
        let t: f64 = rng.random();
        let side = rng.random_range(0..4);
        let anchor = match side {
            0 => Point::new(t, 0.0),
            1 => Point::new(1.0, t),
            2 => Point::new(t, 1.0),
            _ => Point::new(0.0, t),
        };
        for (e, edge) in mesh.edges.iter().enumerate() {
            if edge.midpoint(mesh).dist(anchor) <= OCEAN_SEED_RADIUS {
                water.mark(e);
            }
        }
    }

    let mut frontier = Frontier::new(edge_count);
    for e in 0..edge_count {
        if water.flags[e] {
            for n in edge_neighbors(mesh, e) {
                if !water.flags[n] {
                    frontier.insert(n);
                }
            }
        }
    }
    let target = (config.water_edge_ratio * edge_count as f64).ceil() as usize;
    while water.count < target {
        let Some(e) = frontier.take_random(rng) else {
            break;
        };
        water.mark(e);
        for n in edge_neighbors(mesh, e) {
            if !water.flags[n] {
                frontier.insert(n);
            }
        }
    }

    let lake_size = (edge_count / 60).max(6);
    for _ in 0..config.lake_seed_count {
        let inland = |e: usize, water: &[bool]| !water[e] && edge_neighbors(mesh, e).all(|n| !water[n]);
        let seed = (0..100)
            .map(|_| rng.random_range(0..edge_count.max(1)))
            .find(|&e| edge_count > 0 && inland(e, &water.flags));
        let Some(seed) = seed else { continue };
        let origin = mesh.edges[seed].midpoint(mesh);
        let mut heap = BinaryHeap::from([ByDistance(0.0, seed)]);
        let mut added = 0;
        while added < lake_size {
            let Some(ByDistance(_, e)) = heap.pop() else { break };
            if water.flags[e] {
                continue;
            }
            water.mark(e);
            added += 1;
            for n in edge_neighbors(mesh, e) {
                if !water.flags[n] {
                    heap.push(ByDistance(mesh.edges[n].midpoint(mesh).dist(origin), n));
                }
            }
        }
    }

    let water_cells: Vec<bool> = cells
        .iter()
        .map(|cell| {
            let edges = &mesh.cell_edges[cell.id];
            let wet = edges.iter().filter(|&&e| water.flags[e]).count();
            cell.touches_border() || (!edges.is_empty() && wet as f64 >= CELL_WATER_FRACTION * edges.len() as f64)
        })
        .collect();
    classify_water(cells, &water_cells);
}

/// Assigns terrain classes from a per-cell water mask: water reachable from
/// a border cell through water is OCEAN, other water is LAKE, land touching
/// ocean is COAST.
pub(crate) fn classify_water(cells: &mut [Cell], water: &[bool]) {
    let mut ocean = vec![false; cells.len()];
    let mut queue: VecDeque<usize> = cells
        .iter()
        .filter(|c| water[c.id] && c.touches_border())
        .map(|c| c.id)
        .collect();
    for &i in &queue {
        ocean[i] = true;
    }
    while let Some(i) = queue.pop_front() {
        for &n in &cells[i].neighbors {
            if water[n] && !ocean[n] {
                ocean[n] = true;
                queue.push_back(n);
            }
        }
    }
    for i in 0..cells.len() {
        let terrain = if ocean[i] {
            TerrainClass::Ocean
        } else if water[i] {
            TerrainClass::Lake
        } else if cells[i].neighbors.iter().any(|&n| ocean[n]) {
            TerrainClass::Coast
        } else {
            TerrainClass::Land
        };
        cells[i].terrain = terrain;
        cells[i].biome = match terrain {
            TerrainClass::Ocean => Biome::Ocean,
            TerrainClass::Lake => Biome::Lake,
            TerrainClass::Coast => Biome::Coast,
            TerrainClass::Land => cells[i].biome,
        };
    }
}

/// Breadth-first adjacency distance from the nearest COAST or OCEAN cell.
pub fn coast_distance_levels(cells: &[Cell]) -> Vec<Option<usize>> {
    let mut level = vec![None; cells.len()];
    let mut queue = VecDeque::new();
    for c in cells {
        if matches!(c.terrain, TerrainClass::Coast | TerrainClass::Ocean) {
            level[c.id] = Some(0);
            queue.push_back(c.id);
        }
    }
    while let Some(i) = queue.pop_front() {
        let next = level[i].map(|l| l + 1);
        for &n in &cells[i].neighbors {
            if level[n].is_none() {
                level[n] = next;
                queue.push_back(n);
            }
        }
    }
    level
}

/// Elevation is the squared, normalised coast distance; water sits at 0.
pub fn assign_elevation(cells: &mut [Cell]) {
    let levels = coast_distance_levels(cells);
    let max_land = cells
        .iter()
        .filter(|c| !c.terrain.is_water())
        .filter_map(|c| levels[c.id])
        .max()
        .unwrap_or(0);
    for c in cells.iter_mut() {
        c.elevation = match (c.terrain.is_water(), levels[c.id]) {
            (false, Some(l)) if max_land > 0 => {
                let h = l as f64 / max_land as f64;
                h * h
            }
            _ => 0.0,
        };
    }
}

/// Rivers descend from random high corners along the lowest unvisited
/// neighbouring corner until they reach a lake or ocean corner or run out
/// of non-ascending moves.
pub fn carve_rivers(cells: &[Cell], mesh: &Mesh, config: &MapGenConfig, rng: &mut impl Rng) -> Vec<River> {
    if config.river_count == 0 || mesh.corners.is_empty() {
        return Vec::new();
    }
    let elevation: Vec<f64> = (0..mesh.corners.len())
        .map(|c| mesh.corner_elevation(cells, c))
        .collect();
    let is_water: Vec<bool> = (0..mesh.corners.len())
        .map(|c| mesh.is_water_corner(cells, c))
        .collect();
    let mut sources: Vec<usize> = (0..mesh.corners.len())
        .filter(|&c| !is_water[c] && elevation[c] >= RIVER_SOURCE_ELEVATION)
        .collect();
    if sources.is_empty() {
        let highest = (0..mesh.corners.len())
            .max_by(|&a, &b| elevation[a].total_cmp(&elevation[b]).then(b.cmp(&a)))
            .expect("non-empty mesh");
        sources.push(highest);
    }

    (0..config.river_count)
        .map(|_| {
            let mut current = sources[rng.random_range(0..sources.len())];
            let mut visited = vec![false; mesh.corners.len()];
            visited[current] = true;
            let mut river = River {
                points: vec![mesh.corners[current].position],
                elevations: vec![elevation[current]],
            };
            while !is_water[current] {
                let here = mesh.corners[current].position;
                let next = mesh.corners[current]
                    .adjacent
                    .iter()
                    .copied()
                    .filter(|&n| !visited[n] && elevation[n] <= elevation[current])
                    .min_by(|&a, &b| {
                        elevation[a]
                            .total_cmp(&elevation[b])
                            .then(
                                mesh.corners[a]
                                    .position
                                    .dist(here)
                                    .total_cmp(&mesh.corners[b].position.dist(here)),
                            )
                            .then(a.cmp(&b))
                    });
                let Some(next) = next else { break };
                visited[next] = true;
                current = next;
                river.points.push(mesh.corners[current].position);
                river.elevations.push(elevation[current]);
            }
            river
        })
        .collect()
}

/// Distance from `p` to the nearest fresh water: a LAKE polygon or a river.
pub fn freshwater_distance(cells: &[Cell], rivers: &[River], p: Point) -> f64 {
    let lakes = cells
        .iter()
        .filter(|c| c.terrain == TerrainClass::Lake)
        .map(|c| point_convex_dist(&c.vertices, p));
    let streams = rivers.iter().map(|r| match r.points.as_slice() {
        [] => f64::INFINITY,
        [only] => only.dist(p),
        pts => pts
            .windows(2)
            .map(|w| point_segment_dist(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    });
    lakes.chain(streams).fold(f64::INFINITY, f64::min)
}

/// Moisture decays exponentially with distance from fresh water; ocean
/// cells are saturated.
pub fn assign_moisture(cells: &mut [Cell], rivers: &[River]) {
    let moisture: Vec<f64> = cells
        .iter()
        .map(|c| {
            if c.terrain == TerrainClass::Ocean {
                1.0
            } else {
                (-freshwater_distance(cells, rivers, c.site) / MOISTURE_FALLOFF).exp()
            }
        })
        .collect();
    for (c, m) in cells.iter_mut().zip(moisture) {
        c.moisture = m;
    }
}

/// Whittaker-style land biome lookup over elevation and moisture.
pub fn whittaker(elevation: f64, moisture: f64) -> Biome {
    if elevation >= 0.8 {
        Biome::Mountain
    } else if elevation >= 0.6 {
        if moisture < 0.5 {
            Biome::Tundra
        } else {
            Biome::Forest
        }
    } else if moisture < 0.33 {
        Biome::Desert
    } else if moisture < 0.66 {
        Biome::Plains
    } else if elevation >= 0.3 {
        Biome::Forest
    } else {
        Biome::Swamp
    }
}

pub fn assign_biomes(cells: &mut [Cell]) {
    for c in cells.iter_mut() {
        c.biome = match c.terrain {
            TerrainClass::Ocean => Biome::Ocean,
            TerrainClass::Lake => Biome::Lake,
            TerrainClass::Coast => Biome::Coast,
            TerrainClass::Land => whittaker(c.elevation, c.moisture),
        };
    }
}
