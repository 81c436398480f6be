//! Voronoi cells clipped to the unit square, built by successive half-plane
//! clipping, followed by Lloyd relaxation.

use rand::Rng;

use super::{Cell, MapGenConfig};
use crate::error::{Error, Result};
use crate::geometry::{centroid, Point};

/// Generator label of a polygon edge: the neighbouring site whose bisector
/// produced it, or `None` for the square border.
type EdgeLabel = Option<usize>;

struct LabeledPolygon {
    vertices: Vec<Point>,
    /// `labels[k]` labels the edge from `vertices[k]` to `vertices[k + 1]`.
    labels: Vec<EdgeLabel>,
}

impl LabeledPolygon {
    fn unit_square() -> Self {
        Self {
            vertices: vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
            ],
            labels: vec![None; 4],
        }
    }

    fn max_dist_sq(&self, from: Point) -> f64 {
        self.vertices.iter().map(|v| v.dist_sq(from)).fold(0.0, f64::max)
    }

    /// Keeps the part of the polygon closer to `site` than to `other`.
    fn clip(&mut self, site: Point, other: Point, other_id: usize) {
        let normal = other - site;
        let offset = normal.dot((site + other) * 0.5);
        let side = |p: Point| normal.dot(p) - offset;

        let n = self.vertices.len();
        let mut verts = Vec::with_capacity(n + 1);
        let mut labels = Vec::with_capacity(n + 1);
        for k in 0..n {
            let (a, b) = (self.vertices[k], self.vertices[(k + 1) % n]);
            let (sa, sb) = (side(a), side(b));
            let (a_in, b_in) = (sa <= 0.0, sb <= 0.0);
            if a_in {
                verts.push(a);
                labels.push(self.labels[k]);
                if !b_in {
                    verts.push(a.lerp(b, sa / (sa - sb)));
                    labels.push(Some(other_id));
                }
            } else if b_in {
                verts.push(a.lerp(b, sa / (sa - sb)));
                labels.push(self.labels[k]);
            }
        }
        self.vertices = verts;
        self.labels = labels;
        self.drop_degenerate();
    }

    fn drop_degenerate(&mut self) {
        let mut k = 0;
        while self.vertices.len() > 3 && k < self.vertices.len() {
            let next = (k + 1) % self.vertices.len();
            if self.vertices[k].dist_sq(self.vertices[next]) < 1e-26 {
                self.vertices.remove(k);
                self.labels.remove(k);
            } else {
                k += 1;
            }
        }
    }
}

fn voronoi(sites: &[Point]) -> Vec<LabeledPolygon> {
    let mut order: Vec<usize> = Vec::with_capacity(sites.len());
    sites
        .iter()
        .enumerate()
        .map(|(i, &site)| {
            order.clear();
            order.extend((0..sites.len()).filter(|&j| j != i));
            order.sort_by(|&a, &b| {
                site.dist_sq(sites[a])
                    .total_cmp(&site.dist_sq(sites[b]))
                    .then(a.cmp(&b))
            });
            let mut poly = LabeledPolygon::unit_square();
            for &j in &order {
                // Sites farther than twice the polygon radius cannot cut it.
                if site.dist_sq(sites[j]) > 4.0 * poly.max_dist_sq(site) {
                    break;
                }
                poly.clip(site, sites[j], j);
            }
            poly
        })
        .collect()
}

/// Mean distance from each site to the centroid of its cell.
pub fn mean_site_centroid_distance(cells: &[Cell]) -> f64 {
    let total: f64 = cells.iter().map(|c| c.site.dist(centroid(&c.vertices))).sum();
    total / cells.len().max(1) as f64
}

/// Uniform random sites, relaxed `lloyd_iterations` times, then the final
/// Voronoi diagram with symmetric adjacency.
pub fn build_cells(config: &MapGenConfig, rng: &mut impl Rng) -> Result<Vec<Cell>> {
    if config.cell_count == 0 {
        return Err(Error::InvalidConfig("cell_count must be at least 1".into()));
    }
    let mut sites: Vec<Point> = (0..config.cell_count)
        .map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    let mut polys = voronoi(&sites);
    for _ in 0..config.lloyd_iterations {
        sites = polys.iter().map(|p| centroid(&p.vertices)).collect();
        polys = voronoi(&sites);
    }

    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); sites.len()];
    for (i, poly) in polys.iter().enumerate() {
        for j in poly.labels.iter().flatten() {
            neighbors[i].push(*j);
            neighbors[*j].push(i);
        }
    }
    Ok(polys
        .into_iter()
        .zip(sites)
        .zip(neighbors)
        .enumerate()
        .map(|(id, ((poly, site), mut nbrs))| {
            nbrs.sort_unstable();
            nbrs.dedup();
            Cell::new(id, site, poly.vertices, nbrs)
        })
        .collect())
}
