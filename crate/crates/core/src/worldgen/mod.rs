//! Seeded procedural generation of polygonal terrain maps.
//!
//! The pipeline runs in six stages over a relaxed Voronoi diagram of the
//! unit square: cell construction, coastline flooding, elevation from coast
//! distance, downhill rivers, moisture from fresh water and biome lookup.
//! Every stage draws from one ChaCha stream seeded by [`MapGenConfig::seed`],
//! so a map is a pure function of its config.

mod index;
mod io;
mod mesh;
mod raster;
mod terrain;
mod voronoi;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

pub use index::MapIndex;
pub use io::{MapFile, MAP_FORMAT};
pub use mesh::Mesh;
pub use raster::{encode_png, palette, rasterize, rasterize_at, render_png, Raster};
pub use terrain::{
    assign_biomes, assign_elevation, assign_moisture, carve_rivers, flood_water, whittaker, MOISTURE_FALLOFF,
    RIVER_SOURCE_ELEVATION,
};
pub use terrain::{coast_distance_levels, freshwater_distance};
pub use voronoi::{build_cells, mean_site_centroid_distance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MapGenConfig {
    pub seed: u64,
    pub cell_count: usize,
    pub water_edge_ratio: f64,
    pub lake_seed_count: usize,
    pub river_count: usize,
    pub lloyd_iterations: usize,
    pub raster_size: usize,
}

impl Default for MapGenConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            cell_count: 1000,
            water_edge_ratio: 0.35,
            lake_seed_count: 3,
            river_count: 4,
            lloyd_iterations: 2,
            raster_size: 42,
        }
    }
}

impl MapGenConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cell_count == 0 {
            return Err(Error::InvalidConfig("cell_count must be at least 1".into()));
        }
        if !(self.water_edge_ratio > 0.0 && self.water_edge_ratio < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "water_edge_ratio must lie in (0, 1), got {}",
                self.water_edge_ratio
            )));
        }
        if self.raster_size < 8 {
            return Err(Error::InvalidConfig(format!(
                "raster_size must be at least 8, got {}",
                self.raster_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TerrainClass {
    Ocean,
    Coast,
    Lake,
    Land,
}

impl TerrainClass {
    pub fn is_water(self) -> bool {
        matches!(self, TerrainClass::Ocean | TerrainClass::Lake)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Biome {
    Ocean,
    Lake,
    Coast,
    Plains,
    Forest,
    Desert,
    Swamp,
    Tundra,
    Mountain,
}

impl Biome {
    pub const ALL: [Biome; 9] = [
        Biome::Ocean,
        Biome::Lake,
        Biome::Coast,
        Biome::Plains,
        Biome::Forest,
        Biome::Desert,
        Biome::Swamp,
        Biome::Tundra,
        Biome::Mountain,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Wire name, e.g. `"OCEAN"`.
    pub fn name(self) -> &'static str {
        match self {
            Biome::Ocean => "OCEAN",
            Biome::Lake => "LAKE",
            Biome::Coast => "COAST",
            Biome::Plains => "PLAINS",
            Biome::Forest => "FOREST",
            Biome::Desert => "DESERT",
            Biome::Swamp => "SWAMP",
            Biome::Tundra => "TUNDRA",
            Biome::Mountain => "MOUNTAIN",
        }
    }

    pub fn from_name(name: &str) -> Option<Biome> {
        Biome::ALL.into_iter().find(|b| b.name() == name)
    }
}

impl fmt::Display for Biome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: usize,
    pub site: Point,
    /// Counter-clockwise convex polygon.
    pub vertices: Vec<Point>,
    pub neighbors: Vec<usize>,
    #[serde(rename = "class")]
    pub terrain: TerrainClass,
    pub biome: Biome,
    pub elevation: f64,
    pub moisture: f64,
}

impl Cell {
    fn new(id: usize, site: Point, vertices: Vec<Point>, neighbors: Vec<usize>) -> Self {
        Self {
            id,
            site,
            vertices,
            neighbors,
            terrain: TerrainClass::Land,
            biome: Biome::Plains,
            elevation: 0.0,
            moisture: 0.0,
        }
    }

    /// Whether any polygon vertex sits on the unit-square border.
    pub fn touches_border(&self) -> bool {
        self.vertices.iter().any(|v| on_border(*v))
    }
}

pub(crate) fn on_border(p: Point) -> bool {
    const EPS: f64 = 1e-12;
    p.x <= EPS || p.y <= EPS || p.x >= 1.0 - EPS || p.y >= 1.0 - EPS
}

/// A river as a polyline over polygon corners, with the interpolated
/// corner elevation recorded at each point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct River {
    pub points: Vec<Point>,
    pub elevations: Vec<f64>,
}

/// A generated map. Immutable after construction; the spatial index and
/// raster are derived from the cells.
#[derive(Debug, Clone)]
pub struct WorldMap {
    pub id: String,
    pub config: MapGenConfig,
    pub cells: Vec<Cell>,
    pub rivers: Vec<River>,
    pub raster: Raster,
    index: MapIndex,
}

impl WorldMap {
    /// Builds the derived index and raster for a finished set of cells.
    pub fn assemble(id: String, config: MapGenConfig, cells: Vec<Cell>, rivers: Vec<River>) -> Self {
        let index = MapIndex::build(&cells);
        let mut map = Self {
            id,
            config,
            cells,
            rivers,
            raster: Raster::empty(0),
            index,
        };
        map.raster = rasterize(&map);
        map
    }

    pub fn index(&self) -> &MapIndex {
        &self.index
    }

    /// Id of the cell containing `p`: the nearest site, lowest id on ties.
    pub fn cell_at(&self, p: Point) -> usize {
        self.index.nearest_site(&self.cells, p)
    }

    pub fn biome_at(&self, p: Point) -> Biome {
        self.cells[self.cell_at(p)].biome
    }

    pub fn elevation_at(&self, p: Point) -> f64 {
        self.cells[self.cell_at(p)].elevation
    }

    pub fn has_biome(&self, biome: Biome) -> bool {
        self.index.has_biome(biome)
    }

    pub fn biomes_present(&self) -> Vec<Biome> {
        Biome::ALL.into_iter().filter(|&b| self.has_biome(b)).collect()
    }

    /// Distance from `p` to the region of `biome`: 0 when the containing
    /// cell has that biome, `+inf` when the biome is absent.
    pub fn distance_to_biome(&self, p: Point, biome: Biome) -> f64 {
        if self.biome_at(p) == biome {
            return 0.0;
        }
        self.index.distance_to_biome(&self.cells, p, biome)
    }

    /// Distance from `p` to the nearest cell whose biome differs from
    /// `biome`; `+inf` when the whole map is that biome.
    pub fn distance_to_non_biome(&self, p: Point, biome: Biome) -> f64 {
        Biome::ALL
            .into_iter()
            .filter(|&b| b != biome)
            .map(|b| self.index.distance_to_biome(&self.cells, p, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Area-weighted centroid of all cells of `biome`.
    pub fn biome_centroid(&self, biome: Biome) -> Option<Point> {
        self.index.biome_centroid(biome)
    }

    /// Whether the open segment `ab` passes through a cell of `biome`.
    pub fn segment_crosses_biome(&self, a: Point, b: Point, biome: Biome) -> bool {
        self.index.segment_crosses_biome(&self.cells, a, b, biome)
    }

    /// Distance from segment `ab` to the nearest cell of `biome`.
    pub fn segment_distance_to_biome(&self, a: Point, b: Point, biome: Biome) -> f64 {
        self.index.segment_distance_to_biome(&self.cells, a, b, biome)
    }
}

/// Runs the full six-stage pipeline.
pub fn generate_map(config: &MapGenConfig) -> Result<WorldMap> {
    Ok(generate_map_with_mesh(config)?.0)
}

/// As [`generate_map`], also returning the corner/edge mesh used by the
/// flooding and river stages.
pub fn generate_map_with_mesh(config: &MapGenConfig) -> Result<(WorldMap, Mesh)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut cells = build_cells(config, &mut rng)?;
    let mesh = Mesh::from_cells(&cells);
    flood_water(&mut cells, &mesh, config, &mut rng);
    assign_elevation(&mut cells);
    let rivers = carve_rivers(&cells, &mesh, config, &mut rng);
    assign_moisture(&mut cells, &rivers);
    assign_biomes(&mut cells);
    let map = WorldMap::assemble(format!("seed-{}", config.seed), config.clone(), cells, rivers);
    Ok((map, mesh))
}

/// Builds a map whose water layout is dictated by `classify` instead of the
/// flooding simulation: `classify(site)` returning `true` marks a cell as
/// water. Border cells are always water. Elevation, moisture and biomes
/// follow the regular pipeline with no rivers. Used for hand-shaped
/// fixtures such as lake-centred demo maps.
pub fn generate_with_water(id: &str, config: &MapGenConfig, classify: impl Fn(Point) -> bool) -> Result<WorldMap> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut cells = build_cells(config, &mut rng)?;
    let water: Vec<bool> = cells.iter().map(|c| c.touches_border() || classify(c.site)).collect();
    terrain::classify_water(&mut cells, &water);
    assign_elevation(&mut cells);
    assign_moisture(&mut cells, &[]);
    assign_biomes(&mut cells);
    let config = MapGenConfig {
        river_count: 0,
        ..config.clone()
    };
    Ok(WorldMap::assemble(id.to_string(), config, cells, Vec::new()))
}
