//! Uniform-grid spatial index over cell sites and per-biome cell polygons.

use super::{Biome, Cell};
use crate::geometry::{
    centroid, clip_segment_convex, point_convex_dist, segment_convex_dist, signed_area, Bounds, Point,
};

/// Buckets over the unit square; each bucket lists the items overlapping it.
#[derive(Debug, Clone)]
struct Grid {
    size: usize,
    buckets: Vec<Vec<u32>>,
}

impl Grid {
    fn new(size: usize) -> Self {
        Self {
            size,
            buckets: vec![Vec::new(); size * size],
        }
    }

    fn width(&self) -> f64 {
        1.0 / self.size as f64
    }

    fn coord(&self, v: f64) -> usize {
        ((v * self.size as f64).floor().max(0.0) as usize).min(self.size - 1)
    }

    fn insert_point(&mut self, p: Point, item: u32) {
        let (cx, cy) = (self.coord(p.x), self.coord(p.y));
        self.buckets[cy * self.size + cx].push(item);
    }

    fn insert_bounds(&mut self, b: &Bounds, item: u32) {
        for cy in self.coord(b.min.y)..=self.coord(b.max.y) {
            for cx in self.coord(b.min.x)..=self.coord(b.max.x) {
                self.buckets[cy * self.size + cx].push(item);
            }
        }
    }

    /// Visits the buckets at Chebyshev ring `r` around `(cx, cy)`.
    fn ring(&self, cx: usize, cy: usize, r: usize, mut visit: impl FnMut(&[u32])) {
        let (cx, cy, r, n) = (cx as i64, cy as i64, r as i64, self.size as i64);
        for y in (cy - r)..=(cy + r) {
            if y < 0 || y >= n {
                continue;
            }
            let edge_row = y == cy - r || y == cy + r;
            let step = if edge_row || r == 0 { 1 } else { 2 * r };
            let mut x = cx - r;
            while x <= cx + r {
                if x >= 0 && x < n {
                    visit(&self.buckets[(y * n + x) as usize]);
                }
                x += step;
            }
        }
    }

    /// Buckets touched by segment `ab`, padded by one bucket.
    fn segment_buckets(&self, a: Point, b: Point, mut visit: impl FnMut(&[u32])) {
        let n = self.size;
        let w = self.width();
        let (lo, hi) = if a.x <= b.x { (a, b) } else { (b, a) };
        let c0 = self.coord(lo.x).saturating_sub(1);
        let c1 = (self.coord(hi.x) + 1).min(n - 1);
        let dx = hi.x - lo.x;
        for cx in c0..=c1 {
            let x0 = (cx as f64 * w).max(lo.x);
            let x1 = ((cx + 1) as f64 * w).min(hi.x);
            let (ya, yb) = if dx.abs() < 1e-15 {
                (lo.y, hi.y)
            } else {
                let x0 = x0.min(hi.x).max(lo.x);
                let x1 = x1.max(lo.x).min(hi.x);
                (
                    lo.y + (hi.y - lo.y) * (x0 - lo.x) / dx,
                    lo.y + (hi.y - lo.y) * (x1 - lo.x) / dx,
                )
            };
            let r0 = self.coord(ya.min(yb)).saturating_sub(1);
            let r1 = (self.coord(ya.max(yb)) + 1).min(n - 1);
            for cy in r0..=r1 {
                visit(&self.buckets[cy * n + cx]);
            }
        }
    }
}

#[derive(Debug, Clone)]
struct BiomeLayer {
    cells: Vec<u32>,
    grid: Grid,
    centroid: Option<Point>,
}

#[derive(Debug, Clone)]
pub struct MapIndex {
    sites: Grid,
    bounds: Vec<Bounds>,
    biomes: Vec<BiomeLayer>,
}

fn grid_size(items: usize) -> usize {
    ((items as f64 / 2.0).sqrt().ceil() as usize).clamp(1, 64)
}

impl MapIndex {
    pub fn build(cells: &[Cell]) -> Self {
        let mut sites = Grid::new(grid_size(cells.len()));
        for c in cells {
            sites.insert_point(c.site, c.id as u32);
        }
        let bounds: Vec<Bounds> = cells.iter().map(|c| Bounds::of(&c.vertices)).collect();
        let biomes = Biome::ALL
            .into_iter()
            .map(|biome| {
                let members: Vec<u32> = cells.iter().filter(|c| c.biome == biome).map(|c| c.id as u32).collect();
                let mut grid = Grid::new(grid_size(members.len()));
                for &m in &members {
                    grid.insert_bounds(&bounds[m as usize], m);
                }
                let (mut area, mut acc) = (0.0, Point::default());
                for &m in &members {
                    let poly = &cells[m as usize].vertices;
                    let a = signed_area(poly);
                    area += a;
                    acc = acc + centroid(poly) * a;
                }
                BiomeLayer {
                    centroid: (area > 0.0).then(|| acc * (1.0 / area)),
                    cells: members,
                    grid,
                }
            })
            .collect();
        Self { sites, bounds, biomes }
    }

    /// Nearest site to `p`, lowest id on exact ties.
    pub fn nearest_site(&self, cells: &[Cell], p: Point) -> usize {
        let grid = &self.sites;
        let (cx, cy) = (grid.coord(p.x), grid.coord(p.y));
        let mut best = (f64::INFINITY, usize::MAX);
        for r in 0..grid.size {
            grid.ring(cx, cy, r, |items| {
                for &i in items {
                    let d = cells[i as usize].site.dist_sq(p);
                    if d < best.0 || (d == best.0 && (i as usize) < best.1) {
                        best = (d, i as usize);
                    }
                }
            });
            let reach = r as f64 * grid.width();
            if best.1 != usize::MAX && best.0.sqrt() < reach {
                break;
            }
        }
        best.1
    }

    pub fn has_biome(&self, biome: Biome) -> bool {
        !self.biomes[biome.index()].cells.is_empty()
    }

    pub fn biome_cells(&self, biome: Biome) -> &[u32] {
        &self.biomes[biome.index()].cells
    }

    pub fn biome_centroid(&self, biome: Biome) -> Option<Point> {
        self.biomes[biome.index()].centroid
    }

    /// Minimum distance from `p` to any polygon of `biome` (`+inf` if absent).
    pub fn distance_to_biome(&self, cells: &[Cell], p: Point, biome: Biome) -> f64 {
        let layer = &self.biomes[biome.index()];
        if layer.cells.is_empty() {
            return f64::INFINITY;
        }
        let grid = &layer.grid;
        let (cx, cy) = (grid.coord(p.x), grid.coord(p.y));
        let mut best = f64::INFINITY;
        for r in 0..grid.size {
            grid.ring(cx, cy, r, |items| {
                for &i in items {
                    if self.bounds[i as usize].dist_to_point(p) < best {
                        best = best.min(point_convex_dist(&cells[i as usize].vertices, p));
                    }
                }
            });
            if best <= r as f64 * grid.width() {
                break;
            }
        }
        best
    }

    /// Whether the open segment `ab` meets a polygon of `biome`.
    pub fn segment_crosses_biome(&self, cells: &[Cell], a: Point, b: Point, biome: Biome) -> bool {
        let layer = &self.biomes[biome.index()];
        if layer.cells.is_empty() {
            return false;
        }
        let seg = Bounds::of(&[a, b]);
        let mut hit = false;
        layer.grid.segment_buckets(a, b, |items| {
            if hit {
                return;
            }
            for &i in items {
                let bb = &self.bounds[i as usize];
                if bb.min.x > seg.max.x || bb.max.x < seg.min.x || bb.min.y > seg.max.y || bb.max.y < seg.min.y {
                    continue;
                }
                if let Some((t0, t1)) = clip_segment_convex(&cells[i as usize].vertices, a, b) {
                    if t0 < 1.0 && t1 > 0.0 {
                        hit = true;
                        return;
                    }
                }
            }
        });
        hit
    }

    /// Minimum distance from segment `ab` to any polygon of `biome`.
    pub fn segment_distance_to_biome(&self, cells: &[Cell], a: Point, b: Point, biome: Biome) -> f64 {
        let layer = &self.biomes[biome.index()];
        let mut best = f64::INFINITY;
        for &i in &layer.cells {
            if self.bounds[i as usize].dist_to_segment_lower(a, b) < best {
                best = best.min(segment_convex_dist(&cells[i as usize].vertices, a, b));
            }
        }
        best
    }
}
