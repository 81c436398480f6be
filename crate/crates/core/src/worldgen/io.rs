use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Cell, MapGenConfig, River, WorldMap};
use crate::error::{Error, Result};

pub const MAP_FORMAT: &str = "plotmap-map/1";

/// On-disk map representation. The raster is not stored; it is a pure
/// function of the cells and is written as a PNG side-car instead.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapFile {
    pub format: String,
    pub id: String,
    pub config: MapGenConfig,
    pub cells: Vec<Cell>,
    pub rivers: Vec<River>,
}

impl From<&WorldMap> for MapFile {
    fn from(map: &WorldMap) -> Self {
        Self {
            format: MAP_FORMAT.to_string(),
            id: map.id.clone(),
            config: map.config.clone(),
            cells: map.cells.clone(),
            rivers: map.rivers.clone(),
        }
    }
}

impl MapFile {
    pub fn into_map(self) -> Result<WorldMap> {
        if self.format != MAP_FORMAT {
            return Err(Error::InvalidInput(format!(
                "unsupported map format {:?}, expected {MAP_FORMAT}",
                self.format
            )));
        }
        if self.cells.is_empty() {
            return Err(Error::InvalidInput("map has no cells".into()));
        }
        Ok(WorldMap::assemble(self.id, self.config, self.cells, self.rivers))
    }
}

impl Serialize for WorldMap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MapFile::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WorldMap {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        MapFile::deserialize(deserializer)?
            .into_map()
            .map_err(serde::de::Error::custom)
    }
}

impl WorldMap {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&MapFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<WorldMap> {
        serde_json::from_str::<MapFile>(text)?.into_map()
    }

    pub fn load(path: &Path) -> Result<WorldMap> {
        WorldMap::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn from_value(value: serde_json::Value) -> Result<WorldMap> {
        serde_json::from_value::<MapFile>(value)?.into_map()
    }
}
