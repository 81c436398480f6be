//! Spatial constraint families over facilities and biomes, with crisp
//! satisfaction predicates and shaped scores in `[0, 1]`.
//!
//! A score of exactly 1 means satisfied. Unsatisfied layouts are scored
//! at most [`params::UNSATISFIED_CAP`] so that the reward can tell the two
//! apart without a separate flag.

mod score;
mod text;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::worldgen::{Biome, WorldMap};

pub use score::{
    score_across_biome, score_between, score_containment, score_directional, score_proximity, score_visibility, Anchor,
    Proximity, Target,
};
pub use text::{parse_utterance, render_utterance, render_with_template, template_count};

/// Engine constants shared by every scorer, the grid oracles and the
/// environment.
pub mod params {
    /// Facility-to-facility "close" radius.
    pub const CLOSE_FACILITY: f64 = 0.15;
    /// Facility-to-biome "close" radius.
    pub const CLOSE_BIOME: f64 = 0.10;
    /// Falloff length past the close radius.
    pub const CLOSE_FALLOFF: f64 = 0.5;
    /// Facility-to-facility "away" distance.
    pub const AWAY_FACILITY: f64 = 0.40;
    /// Facility-to-biome "away" distance.
    pub const AWAY_BIOME: f64 = 0.25;
    /// Falloff length outside a biome for `Inside`.
    pub const INSIDE_FALLOFF: f64 = 0.3;
    /// Falloff depth inside a biome for `Outside`.
    pub const OUTSIDE_FALLOFF: f64 = 0.2;
    /// Half-angle of the directional cone, degrees.
    pub const CONE_HALF_ANGLE: f64 = 45.0;
    /// Minimum offset for a direction to be defined.
    pub const MIN_OFFSET: f64 = 0.02;
    /// Width of the band along each map edge for `OnMapSide`.
    pub const EDGE_BAND: f64 = 0.30;
    /// Projection window along the segment for `InBetween`.
    pub const BETWEEN_T_MIN: f64 = 0.15;
    pub const BETWEEN_T_MAX: f64 = 0.85;
    /// Maximum perpendicular offset for `InBetween`.
    pub const BETWEEN_HALF_WIDTH: f64 = 0.08;
    pub const BETWEEN_FALLOFF: f64 = 0.3;
    /// Falloff of the segment-to-biome distance for `AcrossBiomeFrom`.
    pub const ACROSS_FALLOFF: f64 = 0.2;
    /// Observer height above terrain for `VisibleFrom`.
    pub const EYE_HEIGHT: f64 = 0.04;
    /// Samples along the sight line for `VisibleFrom`.
    pub const SIGHT_SAMPLES: usize = 64;
    /// Largest score an unsatisfied constraint can receive.
    pub const UNSATISFIED_CAP: f64 = 0.99;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConstraintType {
    AcrossBiomeFrom,
    Inside,
    Outside,
    CloseToBiome,
    AwayFromBiome,
    DirOfBiome,
    CloseToFacility,
    AwayFromFacility,
    InBetween,
    OnMapSide,
    DirOfFacility,
    VisibleFrom,
}

/// Argument slots of a constraint family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub direction: bool,
    pub biome: bool,
    pub facilities: usize,
}

impl ConstraintType {
    pub const ALL: [ConstraintType; 12] = [
        ConstraintType::AcrossBiomeFrom,
        ConstraintType::Inside,
        ConstraintType::Outside,
        ConstraintType::CloseToBiome,
        ConstraintType::AwayFromBiome,
        ConstraintType::DirOfBiome,
        ConstraintType::CloseToFacility,
        ConstraintType::AwayFromFacility,
        ConstraintType::InBetween,
        ConstraintType::OnMapSide,
        ConstraintType::DirOfFacility,
        ConstraintType::VisibleFrom,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstraintType::AcrossBiomeFrom => "AcrossBiomeFrom",
            ConstraintType::Inside => "Inside",
            ConstraintType::Outside => "Outside",
            ConstraintType::CloseToBiome => "CloseToBiome",
            ConstraintType::AwayFromBiome => "AwayFromBiome",
            ConstraintType::DirOfBiome => "DirOfBiome",
            ConstraintType::CloseToFacility => "CloseToFacility",
            ConstraintType::AwayFromFacility => "AwayFromFacility",
            ConstraintType::InBetween => "InBetween",
            ConstraintType::OnMapSide => "OnMapSide",
            ConstraintType::DirOfFacility => "DirOfFacility",
            ConstraintType::VisibleFrom => "VisibleFrom",
        }
    }

    pub fn from_name(name: &str) -> Option<ConstraintType> {
        ConstraintType::ALL.into_iter().find(|t| t.name() == name)
    }

    pub fn signature(self) -> Signature {
        use ConstraintType::*;
        let (direction, biome, facilities) = match self {
            AcrossBiomeFrom => (false, true, 2),
            Inside | Outside | CloseToBiome | AwayFromBiome => (false, true, 1),
            DirOfBiome => (true, true, 1),
            CloseToFacility | AwayFromFacility | VisibleFrom => (false, false, 2),
            InBetween => (false, false, 3),
            OnMapSide => (true, false, 1),
            DirOfFacility => (true, false, 2),
        };
        Signature {
            direction,
            biome,
            facilities,
        }
    }
}

impl fmt::Display for ConstraintType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Compass direction in the north-up map frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    N,
    S,
    E,
    W,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::N, Direction::S, Direction::E, Direction::W];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn unit(self) -> Point {
        match self {
            Direction::N => Point::new(0.0, 1.0),
            Direction::S => Point::new(0.0, -1.0),
            Direction::E => Point::new(1.0, 0.0),
            Direction::W => Point::new(-1.0, 0.0),
        }
    }

    pub fn word(self) -> &'static str {
        match self {
            Direction::N => "north",
            Direction::S => "south",
            Direction::E => "east",
            Direction::W => "west",
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::N => Direction::S,
            Direction::S => Direction::N,
            Direction::E => Direction::W,
            Direction::W => Direction::E,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Constraint {
    #[serde(rename = "type")]
    pub ctype: ConstraintType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub biome: Option<Biome>,
    pub facilities: Vec<String>,
    #[serde(default)]
    pub utterance: String,
}

impl Constraint {
    pub fn new(ctype: ConstraintType, direction: Option<Direction>, biome: Option<Biome>, facilities: &[&str]) -> Self {
        Self {
            ctype,
            direction,
            biome,
            facilities: facilities.iter().map(|s| s.to_string()).collect(),
            utterance: String::new(),
        }
    }

    /// Checks that the argument slots match the family signature.
    pub fn validate(&self) -> Result<()> {
        let sig = self.ctype.signature();
        if sig.direction != self.direction.is_some() {
            return Err(Error::InvalidConstraint(format!(
                "{} {} a direction",
                self.ctype,
                if sig.direction { "requires" } else { "takes no" }
            )));
        }
        if sig.biome != self.biome.is_some() {
            return Err(Error::InvalidConstraint(format!(
                "{} {} a biome",
                self.ctype,
                if sig.biome { "requires" } else { "takes no" }
            )));
        }
        if self.facilities.len() != sig.facilities {
            return Err(Error::InvalidConstraint(format!(
                "{} takes {} facilities, got {}",
                self.ctype,
                sig.facilities,
                self.facilities.len()
            )));
        }
        Ok(())
    }

    /// Same constraint with the utterance cleared, for structural comparison.
    pub fn structure(&self) -> Constraint {
        Constraint {
            utterance: String::new(),
            ..self.clone()
        }
    }

    /// Binds facility ids to indices into `ids`.
    pub fn resolve(&self, ids: &[String]) -> Result<Relation> {
        self.validate()?;
        let mut slots = [usize::MAX; 3];
        for (slot, id) in slots.iter_mut().zip(&self.facilities) {
            *slot = ids
                .iter()
                .position(|f| f == id)
                .ok_or_else(|| Error::MissingReference(format!("unknown facility {id:?}")))?;
        }
        Ok(Relation {
            ctype: self.ctype,
            direction: self.direction,
            biome: self.biome,
            slots,
            arity: self.facilities.len(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatisfactionResult {
    pub score: f64,
    pub satisfied: bool,
}

impl SatisfactionResult {
    pub const SATISFIED: SatisfactionResult = SatisfactionResult {
        score: 1.0,
        satisfied: true,
    };

    /// Unsatisfied result with score `UNSATISFIED_CAP * fraction`.
    pub fn partial(fraction: f64) -> Self {
        let fraction = if fraction.is_nan() {
            0.0
        } else {
            fraction.clamp(0.0, 1.0)
        };
        Self {
            score: params::UNSATISFIED_CAP * fraction,
            satisfied: false,
        }
    }

    pub fn unsatisfied() -> Self {
        Self::partial(0.0)
    }
}

/// Facility id to position.
pub type Layout = BTreeMap<String, Point>;

/// A constraint whose facility slots are bound to indices of a position
/// vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Relation {
    pub ctype: ConstraintType,
    pub direction: Option<Direction>,
    pub biome: Option<Biome>,
    pub slots: [usize; 3],
    pub arity: usize,
}

impl Relation {
    pub fn involves(&self, facility: usize) -> bool {
        self.slots[..self.arity].contains(&facility)
    }

    pub fn score(&self, positions: &[Point], map: &WorldMap) -> SatisfactionResult {
        use ConstraintType::*;
        let p = |k: usize| positions[self.slots[k]];
        let biome = || self.biome.expect("validated biome slot");
        let direction = || self.direction.expect("validated direction slot");
        match self.ctype {
            AcrossBiomeFrom => score_across_biome(biome(), p(0), p(1), map),
            Inside => score_containment(true, biome(), p(0), map),
            Outside => score_containment(false, biome(), p(0), map),
            CloseToBiome => score_proximity(Proximity::Close, Target::Biome(biome()), p(0), map),
            AwayFromBiome => score_proximity(Proximity::Away, Target::Biome(biome()), p(0), map),
            DirOfBiome => score_directional(direction(), Anchor::Biome(biome()), p(0), map),
            CloseToFacility => score_proximity(Proximity::Close, Target::Facility(p(1)), p(0), map),
            AwayFromFacility => score_proximity(Proximity::Away, Target::Facility(p(1)), p(0), map),
            InBetween => score_between(p(0), p(1), p(2)),
            OnMapSide => score_directional(direction(), Anchor::MapEdge, p(0), map),
            DirOfFacility => score_directional(direction(), Anchor::Facility(p(1)), p(0), map),
            VisibleFrom => score_visibility(p(0), p(1), map),
        }
    }
}

/// Scores one constraint against a layout.
pub fn evaluate(constraint: &Constraint, layout: &Layout, map: &WorldMap) -> Result<SatisfactionResult> {
    constraint.validate()?;
    let ids: Vec<String> = constraint.facilities.clone();
    let positions = ids
        .iter()
        .map(|id| {
            layout
                .get(id)
                .copied()
                .ok_or_else(|| Error::MissingReference(format!("facility {id:?} not in layout")))
        })
        .collect::<Result<Vec<Point>>>()?;
    Ok(constraint.resolve(&ids)?.score(&positions, map))
}

/// Distance from a point to a biome region (0 inside, `+inf` if absent).
pub fn distance_to_biome(point: Point, biome: Biome, map: &WorldMap) -> f64 {
    map.distance_to_biome(point, biome)
}
