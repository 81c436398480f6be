//! Brute-force geometric predicates written against the raw cell polygons.
//! Nothing here touches the map's spatial index or the engine's geometry
//! helpers; every test is a linear scan over all cells.

use plotmap_core::constraints::{ConstraintType, Direction};
use plotmap_core::worldgen::{Biome, WorldMap};

pub type P = (f64, f64);

fn sub(a: P, b: P) -> P {
    (a.0 - b.0, a.1 - b.1)
}

fn len(a: P) -> f64 {
    a.0.hypot(a.1)
}

fn cross(a: P, b: P) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

/// Even-odd crossing test; makes no convexity assumption.
pub fn in_polygon(poly: &[P], p: P) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.1 > p.1) != (b.1 > p.1) {
            let x = a.0 + (p.1 - a.1) * (b.0 - a.0) / (b.1 - a.1);
            if p.0 < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn seg_dist(p: P, a: P, b: P) -> f64 {
    let ab = sub(b, a);
    let l2 = ab.0 * ab.0 + ab.1 * ab.1;
    let t = if l2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * ab.0 + (p.1 - a.1) * ab.1) / l2).clamp(0.0, 1.0)
    };
    len(sub(p, (a.0 + t * ab.0, a.1 + t * ab.1)))
}

fn orient(a: P, b: P, c: P) -> f64 {
    cross(sub(b, a), sub(c, a))
}

fn on_segment(a: P, b: P, p: P) -> bool {
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

fn segments_meet(a: P, b: P, c: P, d: P) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

fn shoelace(poly: &[P]) -> (f64, P) {
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let w = p.0 * q.1 - q.0 * p.1;
        a += w;
        cx += (p.0 + q.0) * w;
        cy += (p.1 + q.1) * w;
    }
    (a / 2.0, (cx / (3.0 * a), cy / (3.0 * a)))
}

/// Cell polygons flattened to tuples, with biome and elevation.
pub struct Oracle {
    pub polys: Vec<Vec<P>>,
    pub sites: Vec<P>,
    pub biome: Vec<Biome>,
    pub elevation: Vec<f64>,
    boxes: Vec<[f64; 4]>,
}

impl Oracle {
    pub fn new(map: &WorldMap) -> Self {
        Self {
            polys: map
                .cells
                .iter()
                .map(|c| c.vertices.iter().map(|v| (v.x, v.y)).collect())
                .collect(),
            sites: map.cells.iter().map(|c| (c.site.x, c.site.y)).collect(),
            biome: map.cells.iter().map(|c| c.biome).collect(),
            elevation: map.cells.iter().map(|c| c.elevation).collect(),
            boxes: map
                .cells
                .iter()
                .map(|c| {
                    c.vertices.iter().fold(
                        [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
                        |b, v| [b[0].min(v.x), b[1].min(v.y), b[2].max(v.x), b[3].max(v.y)],
                    )
                })
                .collect(),
        }
    }

    /// Cell whose polygon contains `p`. Points on a shared edge fall back
    /// to the nearest site.
    pub fn cell(&self, p: P) -> usize {
        let hit = (0..self.polys.len()).find(|&i| {
            let b = self.boxes[i];
            p.0 >= b[0] && p.0 <= b[2] && p.1 >= b[1] && p.1 <= b[3] && in_polygon(&self.polys[i], p)
        });
        if let Some(i) = hit {
            return i;
        }
        (0..self.sites.len())
            .min_by(|&i, &j| len(sub(p, self.sites[i])).total_cmp(&len(sub(p, self.sites[j]))))
            .expect("map has cells")
    }

    pub fn biome_at(&self, p: P) -> Biome {
        self.biome[self.cell(p)]
    }

    pub fn elevation_at(&self, p: P) -> f64 {
        self.elevation[self.cell(p)]
    }

    pub fn distance_to_biome(&self, p: P, b: Biome) -> f64 {
        if self.biome_at(p) == b {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for (poly, _) in self.polys.iter().zip(&self.biome).filter(|(_, &cb)| cb == b) {
            if in_polygon(poly, p) {
                return 0.0;
            }
            for i in 0..poly.len() {
                best = best.min(seg_dist(p, poly[i], poly[(i + 1) % poly.len()]));
            }
        }
        best
    }

    pub fn biome_centroid(&self, b: Biome) -> Option<P> {
        let (mut area, mut x, mut y) = (0.0, 0.0, 0.0);
        for (poly, _) in self.polys.iter().zip(&self.biome).filter(|(_, &cb)| cb == b) {
            let (a, c) = shoelace(poly);
            area += a;
            x += a * c.0;
            y += a * c.1;
        }
        (area > 0.0).then(|| (x / area, y / area))
    }

    fn segment_meets_biome(&self, a: P, b: P, biome: Biome) -> bool {
        self.polys
            .iter()
            .zip(&self.biome)
            .filter(|(_, &cb)| cb == biome)
            .any(|(poly, _)| {
                in_polygon(poly, a)
                    || in_polygon(poly, b)
                    || (0..poly.len()).any(|i| segments_meet(a, b, poly[i], poly[(i + 1) % poly.len()]))
            })
    }

    fn visible(&self, a: P, b: P) -> bool {
        let e1 = self.elevation_at(a) + 0.04;
        let e2 = self.elevation_at(b) + 0.04;
        (0..64).all(|i| {
            let t = i as f64 / 63.0;
            let q = (a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t);
            self.elevation_at(q) <= e1 + (e2 - e1) * t
        })
    }
}

fn unit(d: Direction) -> P {
    match d {
        Direction::N => (0.0, 1.0),
        Direction::S => (0.0, -1.0),
        Direction::E => (1.0, 0.0),
        Direction::W => (-1.0, 0.0),
    }
}

fn in_cone(d: Direction, origin: P, subject: P) -> bool {
    let off = sub(subject, origin);
    if len(off) < 0.02 {
        return false;
    }
    let u = unit(d);
    let angle = (u.0 * off.1 - u.1 * off.0).atan2(u.0 * off.0 + u.1 * off.1).abs();
    angle.to_degrees() <= 45.0
}

/// A constraint instance with every argument except the subject fixed.
#[derive(Debug, Clone, Copy)]
pub struct Probe {
    pub family: ConstraintType,
    pub biome: Option<Biome>,
    pub direction: Option<Direction>,
    /// Positions of the second and third facility slots.
    pub others: [P; 2],
}

impl Probe {
    /// Crisp satisfaction with the grid point in the first facility slot.
    pub fn holds(&self, o: &Oracle, p: P) -> bool {
        use ConstraintType::*;
        let [q, r] = self.others;
        let biome = || self.biome.expect("probe biome");
        let dir = || self.direction.expect("probe direction");
        match self.family {
            Inside => o.biome_at(p) == biome(),
            Outside => o.biome_at(p) != biome(),
            CloseToBiome => o.distance_to_biome(p, biome()) <= 0.10,
            AwayFromBiome => o.distance_to_biome(p, biome()) >= 0.25,
            CloseToFacility => len(sub(p, q)) <= 0.15,
            AwayFromFacility => len(sub(p, q)) >= 0.40,
            DirOfFacility => in_cone(dir(), q, p),
            DirOfBiome => o.biome_centroid(biome()).is_some_and(|c| in_cone(dir(), c, p)),
            OnMapSide => match dir() {
                Direction::S => p.1 <= 0.3,
                Direction::N => p.1 >= 0.7,
                Direction::W => p.0 <= 0.3,
                Direction::E => p.0 >= 0.7,
            },
            InBetween => {
                let axis = sub(r, q);
                let l = len(axis);
                let rel = sub(p, q);
                let t = (rel.0 * axis.0 + rel.1 * axis.1) / (l * l);
                let h = cross(axis, rel).abs() / l;
                (0.15..=0.85).contains(&t) && h <= 0.08
            }
            AcrossBiomeFrom => {
                o.biome_at(p) != biome() && o.biome_at(q) != biome() && o.segment_meets_biome(p, q, biome())
            }
            VisibleFrom => o.visible(p, q),
        }
    }

    /// Whether the oracle's answer changes within `eps` of `p`.
    pub fn near_boundary(&self, o: &Oracle, p: P, eps: f64) -> bool {
        let here = self.holds(o, p);
        [
            (-1.0, 0.0),
            (1.0, 0.0),
            (0.0, -1.0),
            (0.0, 1.0),
            (-1.0, -1.0),
            (1.0, 1.0),
            (-1.0, 1.0),
            (1.0, -1.0),
        ]
        .iter()
        .any(|&(dx, dy)| self.holds(o, (p.0 + dx * eps, p.1 + dy * eps)) != here)
    }
}
