//! Corner/edge graph over the cell polygons. Corners are polygon vertices
//! merged across the cells sharing them.

use std::collections::HashMap;

use super::{on_border, Cell};
use crate::geometry::Point;

const MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Corner {
    pub position: Point,
    pub cells: Vec<usize>,
    pub adjacent: Vec<usize>,
    pub border: bool,
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub corners: (usize, usize),
    /// One cell for border edges, two otherwise.
    pub cells: Vec<usize>,
}

impl Edge {
    pub fn midpoint(&self, mesh: &Mesh) -> Point {
        let (a, b) = self.corners;
        mesh.corners[a].position.lerp(mesh.corners[b].position, 0.5)
    }

    pub fn is_border(&self) -> bool {
        self.cells.len() < 2
    }
}

#[derive(Debug, Clone, Default)]
pub struct Mesh {
    pub corners: Vec<Corner>,
    pub edges: Vec<Edge>,
    /// Edge ids around each cell.
    pub cell_edges: Vec<Vec<usize>>,
    /// Edge ids incident to each corner.
    pub corner_edges: Vec<Vec<usize>>,
}

impl Mesh {
    pub fn from_cells(cells: &[Cell]) -> Mesh {
        let mut mesh = Mesh::default();
        let bucket = |p: Point| ((p.x / 1e-6).floor() as i64, (p.y / 1e-6).floor() as i64);
        let mut lookup: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        mesh.cell_edges = vec![Vec::new(); cells.len()];

        for cell in cells {
            let ids: Vec<usize> = cell
                .vertices
                .iter()
                .map(|&v| {
                    let (bx, by) = bucket(v);
                    let mut found = None;
                    'search: for dx in -1..=1 {
                        for dy in -1..=1 {
                            if let Some(list) = lookup.get(&(bx + dx, by + dy)) {
                                for &c in list {
                                    if mesh.corners[c].position.dist(v) < MERGE_TOL {
                                        found = Some(c);
                                        break 'search;
                                    }
                                }
                            }
                        }
                    }
                    let id = found.unwrap_or_else(|| {
                        mesh.corners.push(Corner {
                            position: v,
                            cells: Vec::new(),
                            adjacent: Vec::new(),
                            border: on_border(v),
                        });
                        lookup.entry((bx, by)).or_default().push(mesh.corners.len() - 1);
                        mesh.corners.len() - 1
                    });
                    if !mesh.corners[id].cells.contains(&cell.id) {
                        mesh.corners[id].cells.push(cell.id);
                    }
                    id
                })
                .collect();

            let n = ids.len();
            for k in 0..n {
                let (a, b) = (ids[k], ids[(k + 1) % n]);
                if a == b {
                    continue;
                }
                let key = (a.min(b), a.max(b));
                let edge = *edge_ids.entry(key).or_insert_with(|| {
                    mesh.edges.push(Edge {
                        corners: key,
                        cells: Vec::new(),
                    });
                    mesh.edges.len() - 1
                });
                if !mesh.edges[edge].cells.contains(&cell.id) {
                    mesh.edges[edge].cells.push(cell.id);
                }
                mesh.cell_edges[cell.id].push(edge);
            }
        }

        mesh.corner_edges = vec![Vec::new(); mesh.corners.len()];
        for (e, edge) in mesh.edges.iter().enumerate() {
            let (a, b) = edge.corners;
            mesh.corner_edges[a].push(e);
            mesh.corner_edges[b].push(e);
            mesh.corners[a].adjacent.push(b);
            mesh.corners[b].adjacent.push(a);
        }
        mesh
    }

    /// Mean elevation of the cells meeting at a corner.
    pub fn corner_elevation(&self, cells: &[Cell], corner: usize) -> f64 {
        let c = &self.corners[corner];
        c.cells.iter().map(|&i| cells[i].elevation).sum::<f64>() / c.cells.len().max(1) as f64
    }

    /// Whether a corner belongs to a lake or ocean cell.
    pub fn is_water_corner(&self, cells: &[Cell], corner: usize) -> bool {
        self.corners[corner].cells.iter().any(|&i| cells[i].terrain.is_water())
    }
}
