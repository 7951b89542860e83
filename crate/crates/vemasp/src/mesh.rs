//! Polygonal meshes of the unit square: representation, generators,
//! geometry queries, validation, and JSON I/O.
//!
//! Orientation conventions are fixed once and used everywhere downstream:
//! facets store vertex pairs `(a, b)` with `a < b`, the tangent points from
//! `a` to `b`, and the facet normal is the tangent rotated +90 degrees
//! counterclockwise, `n = (-t_y, t_x)`. Cells are counterclockwise vertex
//! cycles; the per-cell sign is `+1` iff the facet normal points out of the
//! cell. Files store only vertices and cells; facets and signs are rebuilt
//! canonically (facets sorted lexicographically by vertex pair), so there is
//! a single source of truth for orientation.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Tolerance for vertex-on-line degeneracy in [`cut_with_line`].
pub const CUT_TOLERANCE: f64 = 1e-14;

/// Aspect ratios above this make [`validate`] raise a (soft) warning.
pub const ASPECT_WARN_THRESHOLD: f64 = 50.0;

pub type Point = [f64; 2];

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("cut line passes through vertex {vertex} (y = {y}) within tolerance")]
    DegenerateCut { vertex: usize, y: f64 },
    #[error("cell {cell} has non-positive signed area {area}")]
    NonPositiveArea { cell: usize, area: f64 },
    #[error("mesh parse error: {0}")]
    Parse(String),
    #[error("mesh topology error: {0}")]
    Topology(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// A 2D polygonal mesh with oriented facets. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalMesh {
    /// Vertex coordinates on the unit square.
    pub vertices: Vec<Point>,
    /// Vertex-index pairs `(a, b)` with `a < b`; tangent points a → b.
    pub facets: Vec<(usize, usize)>,
    /// Counterclockwise vertex cycles.
    pub cells: Vec<Vec<usize>>,
    /// Per cell: `(facet index, sign)`, sign `+1` iff the facet normal
    /// points out of the cell.
    pub cell_facets: Vec<Vec<(usize, i8)>>,
    /// Characteristic mesh size: the maximum cell diameter.
    pub h: f64,
}

/// Exact polygon geometry of a single cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    pub area: f64,
    pub centroid: Point,
    pub diameter: f64,
}

impl PolygonalMesh {
    /// Builds a mesh from vertices and counterclockwise cells; facets and
    /// orientation signs are derived canonically.
    ///
    /// Only vertex-index bounds are checked here. Use [`validate`] for
    /// geometric and topological diagnostics, or [`read_mesh`] which rejects
    /// non-manifold input outright.
    pub fn from_cells(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self, MeshError> {
        let nv = vertices.len();
        for (k, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(MeshError::Topology(format!(
                    "cell {k} has fewer than 3 vertices"
                )));
            }
            for &v in cell {
                if v >= nv {
                    return Err(MeshError::Topology(format!(
                        "cell {k} references vertex {v} >= #vertices {nv}"
                    )));
                }
            }
        }

        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for cell in &cells {
            for i in 0..cell.len() {
                let (u, v) = (cell[i], cell[(i + 1) % cell.len()]);
                if u == v {
                    return Err(MeshError::Topology(format!(
                        "degenerate edge at vertex {u}"
                    )));
                }
                pairs.push((u.min(v), u.max(v)));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let facet_index: HashMap<(usize, usize), usize> =
            pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();

        // Traversing a facet in its stored direction (a -> b) means the cell
        // lies on the left, so the fixed normal (+90 deg of tangent) points
        // into the cell: sign -1. Opposite traversal: +1.
        let cell_facets: Vec<Vec<(usize, i8)>> = cells
            .iter()
            .map(|cell| {
                (0..cell.len())
                    .map(|i| {
                        let (u, v) = (cell[i], cell[(i + 1) % cell.len()]);
                        let key = (u.min(v), u.max(v));
                        let sign = if u < v { -1 } else { 1 };
                        (facet_index[&key], sign)
                    })
                    .collect()
            })
            .collect();

        let h = cells
            .iter()
            .map(|cell| {
                let pts: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
                diameter(&pts)
            })
            .fold(0.0, f64::max);

        Ok(Self {
            vertices,
            facets: pairs,
            cells,
            cell_facets,
            h,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Facet length.
    pub fn facet_length(&self, f: usize) -> f64 {
        let (a, b) = self.facets[f];
        dist(self.vertices[a], self.vertices[b])
    }

    /// Unit tangent of facet `f`, pointing from the lower to the higher
    /// vertex index.
    pub fn facet_tangent(&self, f: usize) -> Point {
        let (a, b) = self.facets[f];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let len = dist(pa, pb);
        [(pb[0] - pa[0]) / len, (pb[1] - pa[1]) / len]
    }

    /// Fixed unit normal of facet `f`: the tangent rotated +90 degrees.
    pub fn facet_normal(&self, f: usize) -> Point {
        let t = self.facet_tangent(f);
        [-t[1], t[0]]
    }

    /// Facet midpoint.
    pub fn facet_midpoint(&self, f: usize) -> Point {
        let (a, b) = self.facets[f];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    /// Vertex coordinates of cell `k` in cycle order.
    pub fn cell_points(&self, k: usize) -> Vec<Point> {
        self.cells[k].iter().map(|&v| self.vertices[v]).collect()
    }
}

/// Diagnostics produced by [`validate`]; carries failures, never errors.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    /// Cells that are not strictly convex.
    pub nonconvex_cells: Vec<usize>,
    /// Cells with non-positive shoelace area (clockwise or degenerate).
    pub misoriented_cells: Vec<usize>,
    /// Facets with incidence other than 1 or 2, or two equal signs.
    pub nonmanifold_facets: Vec<usize>,
    pub euler_characteristic: i64,
    pub min_diameter: f64,
    pub max_diameter: f64,
    pub aspect_ratio: f64,
    /// Set when the aspect ratio exceeds [`ASPECT_WARN_THRESHOLD`]; the
    /// shape-regularity assumption of the analysis is then violated.
    pub aspect_warning: bool,
}

impl ValidationReport {
    /// Hard checks only; the aspect-ratio warning is advisory.
    pub fn is_valid(&self) -> bool {
        self.nonconvex_cells.is_empty()
            && self.misoriented_cells.is_empty()
            && self.nonmanifold_facets.is_empty()
            && self.euler_characteristic == 1
    }
}

/// Checks convexity, orientation, facet incidences, and the Euler relation.
pub fn validate(mesh: &PolygonalMesh) -> ValidationReport {
    let mut report = ValidationReport {
        min_diameter: f64::INFINITY,
        ..Default::default()
    };

    for k in 0..mesh.num_cells() {
        let pts = mesh.cell_points(k);
        let area = signed_area(&pts);
        if area <= 0.0 {
            report.misoriented_cells.push(k);
        }
        if !is_strictly_convex(&pts) {
            report.nonconvex_cells.push(k);
        }
        let d = diameter(&pts);
        report.min_diameter = report.min_diameter.min(d);
        report.max_diameter = report.max_diameter.max(d);
        if area > 0.0 {
            report.aspect_ratio = report.aspect_ratio.max(d * d / area);
        }
    }

    let mut incidence: Vec<Vec<i8>> = vec![Vec::new(); mesh.num_facets()];
    for cf in &mesh.cell_facets {
        for &(f, s) in cf {
            incidence[f].push(s);
        }
    }
    for (f, signs) in incidence.iter().enumerate() {
        let ok = match signs.as_slice() {
            [_] => true,
            [a, b] => a != b,
            _ => false,
        };
        if !ok {
            report.nonmanifold_facets.push(f);
        }
    }

    report.euler_characteristic =
        mesh.num_vertices() as i64 - mesh.num_facets() as i64 + mesh.num_cells() as i64;
    report.aspect_warning = report.aspect_ratio > ASPECT_WARN_THRESHOLD;
    report
}

/// Exact area, centroid, and diameter of cell `cell`.
pub fn cell_geometry(mesh: &PolygonalMesh, cell: usize) -> Result<CellGeometry, MeshError> {
    let pts = mesh.cell_points(cell);
    let area = signed_area(&pts);
    if area <= 0.0 {
        return Err(MeshError::NonPositiveArea { cell, area });
    }
    Ok(CellGeometry {
        area,
        centroid: polygon_centroid(&pts, area),
        diameter: diameter(&pts),
    })
}

/// Maximum over cells of `diam(K)^2 / |K|`.
pub fn aspect_ratio(mesh: &PolygonalMesh) -> Result<f64, MeshError> {
    let mut alpha: f64 = 0.0;
    for k in 0..mesh.num_cells() {
        let g = cell_geometry(mesh, k)?;
        alpha = alpha.max(g.diameter * g.diameter / g.area);
    }
    Ok(alpha)
}

/// Subdivides an `N x N` Cartesian grid into a diamond, four side triangles,
/// and four corner pentagons per square.
///
/// Side third-points sit at relative 1/3 and 2/3 on every Cartesian edge and
/// the four interior points at (1/2,1/6), (5/6,1/2), (1/2,5/6), (1/6,1/2),
/// so every coordinate is an integer multiple of `1/(12 N)` and vertex
/// dedup across squares is exact. The flat side triangles make the mesh
/// aspect ratio exactly 4.
pub fn generate_diamond(n: usize) -> PolygonalMesh {
    assert!(n >= 1, "N must be positive");

    // local template on the 12x12 integer lattice, all cells CCW
    const TEMPLATE: [&[(i64, i64)]; 9] = [
        &[(6, 2), (10, 6), (6, 10), (2, 6)],                 // central diamond
        &[(4, 0), (8, 0), (6, 2)],                           // bottom triangle
        &[(12, 4), (12, 8), (10, 6)],                        // right triangle
        &[(8, 12), (4, 12), (6, 10)],                        // top triangle
        &[(0, 8), (0, 4), (2, 6)],                           // left triangle
        &[(0, 0), (4, 0), (6, 2), (2, 6), (0, 4)],           // bottom-left pentagon
        &[(8, 0), (12, 0), (12, 4), (10, 6), (6, 2)],        // bottom-right pentagon
        &[(12, 8), (12, 12), (8, 12), (6, 10), (10, 6)],     // top-right pentagon
        &[(4, 12), (0, 12), (0, 8), (2, 6), (6, 10)],        // top-left pentagon
    ];

    let scale = 12 * n as i64;
    let mut lookup: HashMap<(i64, i64), usize> = HashMap::new();
    let mut vertices: Vec<Point> = Vec::new();
    let mut cells: Vec<Vec<usize>> = Vec::new();

    for j in 0..n as i64 {
        for i in 0..n as i64 {
            for poly in TEMPLATE {
                let cell = poly
                    .iter()
                    .map(|&(lx, ly)| {
                        let key = (12 * i + lx, 12 * j + ly);
                        *lookup.entry(key).or_insert_with(|| {
                            vertices.push([
                                key.0 as f64 / scale as f64,
                                key.1 as f64 / scale as f64,
                            ]);
                            vertices.len() - 1
                        })
                    })
                    .collect();
                cells.push(cell);
            }
        }
    }

    PolygonalMesh::from_cells(vertices, cells).expect("generated mesh is well formed")
}

/// Uniform right-triangle grid: `N x N` squares each split along the
/// diagonal from the lower-left to the upper-right corner.
pub fn generate_triangle_grid(n: usize) -> PolygonalMesh {
    assert!(n >= 1, "N must be positive");
    let idx = |i: usize, j: usize| j * (n + 1) + i;

    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }

    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            cells.push(vec![idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }

    PolygonalMesh::from_cells(vertices, cells).expect("generated mesh is well formed")
}

/// Splits every cell crossed by the horizontal line `y = y0` into its two
/// sub-polygons, inserting new vertices where the line crosses facets.
///
/// Fails with [`MeshError::DegenerateCut`] when the line passes through an
/// existing vertex within [`CUT_TOLERANCE`]; perturb the offset in that case.
pub fn cut_with_line(mesh: &PolygonalMesh, y0: f64) -> Result<PolygonalMesh, MeshError> {
    for (v, p) in mesh.vertices.iter().enumerate() {
        if (p[1] - y0).abs() <= CUT_TOLERANCE {
            return Err(MeshError::DegenerateCut { vertex: v, y: p[1] });
        }
    }

    let mut vertices = mesh.vertices.clone();
    let mut crossing: HashMap<(usize, usize), usize> = HashMap::new();
    let mut cells: Vec<Vec<usize>> = Vec::new();

    for cell in &mesh.cells {
        let above: Vec<bool> = cell.iter().map(|&v| mesh.vertices[v][1] > y0).collect();
        if above.iter().all(|&a| a) || above.iter().all(|&a| !a) {
            cells.push(cell.clone());
            continue;
        }

        let mut lower: Vec<usize> = Vec::new();
        let mut upper: Vec<usize> = Vec::new();
        for i in 0..cell.len() {
            let (u, v) = (cell[i], cell[(i + 1) % cell.len()]);
            if above[i] {
                upper.push(u);
            } else {
                lower.push(u);
            }
            if above[i] != above[(i + 1) % cell.len()] {
                // compute the intersection from the sorted pair so both
                // adjacent cells produce bit-identical coordinates
                let key = (u.min(v), u.max(v));
                let w = *crossing.entry(key).or_insert_with(|| {
                    let (pa, pb) = (vertices[key.0], vertices[key.1]);
                    let t = (y0 - pa[1]) / (pb[1] - pa[1]);
                    vertices.push([pa[0] + t * (pb[0] - pa[0]), y0]);
                    vertices.len() - 1
                });
                lower.push(w);
                upper.push(w);
            }
        }
        cells.push(lower);
        cells.push(upper);
    }

    PolygonalMesh::from_cells(vertices, cells)
}

#[derive(Serialize, Deserialize)]
struct MeshFile {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
}

/// Writes `{"vertices": [[x,y],...], "cells": [[i0,i1,...],...]}`.
pub fn write_mesh(mesh: &PolygonalMesh, path: &Path) -> Result<(), MeshError> {
    let file = MeshFile {
        vertices: mesh.vertices.clone(),
        cells: mesh.cells.clone(),
    };
    let writer = BufWriter::new(File::create(path)?);
    serde_json::to_writer(writer, &file).map_err(|e| MeshError::Parse(e.to_string()))
}

/// Reads a mesh file and rebuilds facets and signs canonically. Rejects
/// input that fails the manifold or Euler checks.
pub fn read_mesh(path: &Path) -> Result<PolygonalMesh, MeshError> {
    let reader = BufReader::new(File::open(path)?);
    let file: MeshFile = serde_json::from_reader(reader).map_err(|e| {
        MeshError::Parse(format!(
            "{}: line {}, column {}",
            e, e.line(), e.column()
        ))
    })?;
    let mesh = PolygonalMesh::from_cells(file.vertices, file.cells)?;

    let report = validate(&mesh);
    if !report.nonmanifold_facets.is_empty() {
        return Err(MeshError::Topology(format!(
            "non-manifold facets: {:?}",
            report.nonmanifold_facets
        )));
    }
    if report.euler_characteristic != 1 {
        return Err(MeshError::Topology(format!(
            "Euler characteristic {} != 1",
            report.euler_characteristic
        )));
    }
    Ok(mesh)
}

/// Shoelace signed area; positive for counterclockwise cycles.
pub fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        s += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * s
}

fn polygon_centroid(pts: &[Point], area: f64) -> Point {
    let n = pts.len();
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        let cross = p[0] * q[1] - q[0] * p[1];
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
    }
    [cx / (6.0 * area), cy / (6.0 * area)]
}

fn diameter(pts: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max(dist(pts[i], pts[j]));
        }
    }
    d
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn is_strictly_convex(pts: &[Point]) -> bool {
    let n = pts.len();
    let scale = diameter(pts).powi(2);
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let c = pts[(i + 2) % n];
        let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if cross <= 1e-12 * scale {
            return false;
        }
    }
    true
}
