//! Per-family scorers.

use super::params::*;
use super::{Direction, SatisfactionResult};
use crate::geometry::{angle_between_deg, point_segment_dist, Point};
use crate::worldgen::{Biome, WorldMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Proximity {
    Close,
    Away,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Facility(Point),
    Biome(Biome),
}

/// Reference for directional relations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Anchor {
    Facility(Point),
    /// Area centroid of the biome region.
    Biome(Biome),
    /// The map edge facing the direction.
    MapEdge,
}

/// `Inside` (`inside = true`) and `Outside` relations.
pub fn score_containment(inside: bool, biome: Biome, point: Point, map: &WorldMap) -> SatisfactionResult {
    let here = map.biome_at(point);
    if inside {
        if here == biome {
            return SatisfactionResult::SATISFIED;
        }
        let d = map.distance_to_biome(point, biome);
        SatisfactionResult::partial(1.0 - d / INSIDE_FALLOFF)
    } else {
        if here != biome {
            return SatisfactionResult::SATISFIED;
        }
        let depth = map.distance_to_non_biome(point, biome);
        SatisfactionResult::partial(1.0 - depth / OUTSIDE_FALLOFF)
    }
}

pub fn score_proximity(kind: Proximity, target: Target, subject: Point, map: &WorldMap) -> SatisfactionResult {
    let (d, close, away) = match target {
        Target::Facility(p) => (subject.dist(p), CLOSE_FACILITY, AWAY_FACILITY),
        Target::Biome(b) => (map.distance_to_biome(subject, b), CLOSE_BIOME, AWAY_BIOME),
    };
    match kind {
        Proximity::Close if d <= close => SatisfactionResult::SATISFIED,
        Proximity::Close => SatisfactionResult::partial(1.0 - (d - close) / CLOSE_FALLOFF),
        Proximity::Away if d >= away => SatisfactionResult::SATISFIED,
        Proximity::Away => SatisfactionResult::partial(d / away),
    }
}

/// Cone test around the direction's unit vector, or the edge band for
/// [`Anchor::MapEdge`].
pub fn score_directional(direction: Direction, anchor: Anchor, subject: Point, map: &WorldMap) -> SatisfactionResult {
    let origin = match anchor {
        Anchor::MapEdge => return score_map_side(direction, subject),
        Anchor::Facility(p) => p,
        Anchor::Biome(b) => match map.biome_centroid(b) {
            Some(c) => c,
            None => return SatisfactionResult::unsatisfied(),
        },
    };
    let offset = subject - origin;
    if offset.norm() < MIN_OFFSET {
        return SatisfactionResult::unsatisfied();
    }
    let theta = angle_between_deg(direction.unit(), offset);
    if theta <= CONE_HALF_ANGLE {
        SatisfactionResult::SATISFIED
    } else {
        SatisfactionResult::partial(1.0 - (theta - CONE_HALF_ANGLE) / (180.0 - CONE_HALF_ANGLE))
    }
}

fn score_map_side(direction: Direction, p: Point) -> SatisfactionResult {
    let excess = match direction {
        Direction::S => p.y - EDGE_BAND,
        Direction::N => (1.0 - EDGE_BAND) - p.y,
        Direction::W => p.x - EDGE_BAND,
        Direction::E => (1.0 - EDGE_BAND) - p.x,
    };
    if excess <= 0.0 {
        SatisfactionResult::SATISFIED
    } else {
        SatisfactionResult::partial(1.0 - excess / EDGE_BAND)
    }
}

/// `p1` lies between `p2` and `p3`.
pub fn score_between(p1: Point, p2: Point, p3: Point) -> SatisfactionResult {
    let axis = p3 - p2;
    let len = axis.norm();
    if len < 1e-12 {
        let d = p1.dist(p2);
        return if d <= BETWEEN_HALF_WIDTH {
            SatisfactionResult::SATISFIED
        } else {
            SatisfactionResult::partial(1.0 - d / BETWEEN_FALLOFF)
        };
    }
    let rel = p1 - p2;
    let t = rel.dot(axis) / (len * len);
    let h = axis.cross(rel).abs() / len;
    if (BETWEEN_T_MIN..=BETWEEN_T_MAX).contains(&t) && h <= BETWEEN_HALF_WIDTH {
        SatisfactionResult::SATISFIED
    } else {
        SatisfactionResult::partial(1.0 - point_segment_dist(p1, p2, p3) / BETWEEN_FALLOFF)
    }
}

/// `p1` and `p2` sit on opposite sides of a `biome` region: the segment
/// between them passes through the biome while neither endpoint is in it.
pub fn score_across_biome(biome: Biome, p1: Point, p2: Point, map: &WorldMap) -> SatisfactionResult {
    if !map.has_biome(biome) || map.biome_at(p1) == biome || map.biome_at(p2) == biome {
        return SatisfactionResult::unsatisfied();
    }
    if map.segment_crosses_biome(p1, p2, biome) {
        return SatisfactionResult::SATISFIED;
    }
    let d = map.segment_distance_to_biome(p1, p2, biome);
    SatisfactionResult::partial((1.0 - d / ACROSS_FALLOFF) * 0.5)
}

/// Evenly spaced sample parameters along the sight line, endpoints included.
pub fn sight_samples() -> impl Iterator<Item = f64> {
    (0..SIGHT_SAMPLES).map(|i| i as f64 / (SIGHT_SAMPLES - 1) as f64)
}

/// `p2` is visible from `p1` over the terrain heightfield.
pub fn score_visibility(p1: Point, p2: Point, map: &WorldMap) -> SatisfactionResult {
    let eye1 = map.elevation_at(p1) + EYE_HEIGHT;
    let eye2 = map.elevation_at(p2) + EYE_HEIGHT;
    let blocked = sight_samples()
        .filter(|&t| map.elevation_at(p1.lerp(p2, t)) > eye1 + (eye2 - eye1) * t)
        .count();
    if blocked == 0 {
        SatisfactionResult::SATISFIED
    } else {
        SatisfactionResult::partial((SIGHT_SAMPLES - blocked) as f64 / SIGHT_SAMPLES as f64)
    }
}
