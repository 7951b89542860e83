//! Per-cell virtual element matrices.
//!
//! Everything here is computable from degrees of freedom and exact polygon
//! moments: the nodal (scalar H1) projector, stiffness and mass with
//! dof-based stabilization, and the facet-space mass matrix built from the
//! L2 projection onto `span{e1, e2, x_K}` plus the facet stabilization.
//! All operations are pure per-cell functions.

use faer::Mat;

use crate::mesh::{cell_geometry, CellGeometry, MeshError, Point, PolygonalMesh};

#[derive(Debug, thiserror::Error)]
pub enum VemError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("singular Gram matrix on cell {cell}")]
    SingularGram { cell: usize },
}

/// Geometry of one facet of a cell, in cycle order.
#[derive(Debug, Clone, Copy)]
pub struct LocalFacet {
    /// Global facet index.
    pub facet: usize,
    /// +1 iff the fixed facet normal points out of this cell.
    pub sign: f64,
    pub length: f64,
    /// The facet's fixed unit normal (not the outward one).
    pub normal: Point,
    pub midpoint: Point,
}

/// Immutable per-cell view: vertex ring, geometry, and oriented facets.
#[derive(Debug, Clone)]
pub struct CellView {
    pub cell: usize,
    pub points: Vec<Point>,
    pub vertex_ids: Vec<usize>,
    pub geometry: CellGeometry,
    pub facets: Vec<LocalFacet>,
}

impl CellView {
    pub fn new(mesh: &PolygonalMesh, cell: usize) -> Result<Self, VemError> {
        let geometry = cell_geometry(mesh, cell)?;
        let facets = mesh.cell_facets[cell]
            .iter()
            .map(|&(f, s)| LocalFacet {
                facet: f,
                sign: s as f64,
                length: mesh.facet_length(f),
                normal: mesh.facet_normal(f),
                midpoint: mesh.facet_midpoint(f),
            })
            .collect();
        Ok(Self {
            cell,
            points: mesh.cell_points(cell),
            vertex_ids: mesh.cells[cell].clone(),
            geometry,
            facets,
        })
    }

    /// Builds a standalone view from a vertex ring (for single-polygon use).
    pub fn from_polygon(points: Vec<Point>) -> Result<Self, VemError> {
        let mesh = PolygonalMesh::from_cells(points.clone(), vec![(0..points.len()).collect()])?;
        CellView::new(&mesh, 0)
    }

    pub fn num_vertices(&self) -> usize {
        self.points.len()
    }

    fn centered(&self, p: Point) -> Point {
        [p[0] - self.geometry.centroid[0], p[1] - self.geometry.centroid[1]]
    }
}

/// Exact centered moments of the cell: integrals of `(x - c_x)^a (y - c_y)^b`
/// for `a + b <= 2`. First moments vanish by the centroid property.
#[derive(Debug, Clone, Copy)]
pub struct Moments {
    pub m00: f64,
    pub m10: f64,
    pub m01: f64,
    pub m20: f64,
    pub m11: f64,
    pub m02: f64,
}

impl Moments {
    /// ∫_K |x - c_K|²
    pub fn second_trace(&self) -> f64 {
        self.m20 + self.m02
    }
}

/// Exact moments up to order 2 by centroid-fan triangulation and a
/// degree-2 triangle rule.
pub fn polygon_moments(cell: &CellView) -> Moments {
    let c = cell.geometry.centroid;
    let quad = |f: &mut dyn FnMut(f64, f64) -> f64| {
        crate::quadrature::integrate_polygon(&cell.points, c, 2, f)
    };
    Moments {
        m00: cell.geometry.area,
        m10: quad(&mut |x, _| x - c[0]),
        m01: quad(&mut |_, y| y - c[1]),
        m20: quad(&mut |x, _| (x - c[0]).powi(2)),
        m11: quad(&mut |x, y| (x - c[0]) * (y - c[1])),
        m02: quad(&mut |_, y| (y - c[1]).powi(2)),
    }
}

/// Nodal (scalar H1) consistency and stabilization matrices, plus the
/// elliptic projector onto `{1, (x-c)/h, (y-c)/h}`.
#[derive(Debug, Clone)]
pub struct LocalNodalMatrices {
    pub stiffness: Mat<f64>,
    pub mass: Mat<f64>,
    /// 3 x N_v coefficients of the projector in the scaled monomial basis.
    pub projector: Mat<f64>,
}

/// Elliptic projector of the nodal space: the gradient part matches
/// boundary fluxes of edgewise-linear traces, the constant part matches
/// the vertex average.
pub fn nodal_projector(cell: &CellView) -> Result<Mat<f64>, VemError> {
    let nv = cell.num_vertices();
    let area = cell.geometry.area;
    let h = cell.geometry.diameter;
    if !(area > 0.0) || !(h > 0.0) {
        return Err(VemError::SingularGram { cell: cell.cell });
    }

    let mut proj = Mat::zeros(3, nv);
    // gradient rows: a_k = (h / |K|) Σ_E |E| n_k^out (v_a + v_b)/2
    for (i, f) in cell.facets.iter().enumerate() {
        let n_out = [f.sign * f.normal[0], f.sign * f.normal[1]];
        let j = (i + 1) % nv;
        for &v in &[i, j] {
            proj[(1, v)] += h / area * f.length * n_out[0] * 0.5;
            proj[(2, v)] += h / area * f.length * n_out[1] * 0.5;
        }
    }
    // constant row: vertex-average matching
    let (mut mean_xi, mut mean_eta) = (0.0, 0.0);
    for p in &cell.points {
        let d = cell.centered(*p);
        mean_xi += d[0] / h / nv as f64;
        mean_eta += d[1] / h / nv as f64;
    }
    for j in 0..nv {
        proj[(0, j)] = 1.0 / nv as f64 - mean_xi * proj[(1, j)] - mean_eta * proj[(2, j)];
    }
    Ok(proj)
}

/// Evaluates the projected basis functions at the vertices: `D[i][j] =
/// (Π b_j)(V_i)`.
fn projector_at_vertices(cell: &CellView, proj: &Mat<f64>) -> Mat<f64> {
    let nv = cell.num_vertices();
    let h = cell.geometry.diameter;
    let mut d = Mat::zeros(nv, nv);
    for i in 0..nv {
        let p = cell.centered(cell.points[i]);
        for j in 0..nv {
            d[(i, j)] = proj[(0, j)] + proj[(1, j)] * p[0] / h + proj[(2, j)] * p[1] / h;
        }
    }
    d
}

/// Stiffness: `|K| ∇Π·∇Π` consistency plus trace-scaled dof-dof
/// stabilization on `(I - Π)`.
pub fn nodal_stiffness(cell: &CellView) -> Result<Mat<f64>, VemError> {
    let proj = nodal_projector(cell)?;
    let nv = cell.num_vertices();
    let area = cell.geometry.area;
    let h = cell.geometry.diameter;

    let mut k = Mat::zeros(nv, nv);
    for i in 0..nv {
        for j in 0..nv {
            k[(i, j)] = area / (h * h) * (proj[(1, i)] * proj[(1, j)] + proj[(2, i)] * proj[(2, j)]);
        }
    }
    // trace-scaled stabilization: proportional to the consistency trace so
    // the dof-dof term tracks the anisotropy of the cell (a sliver of
    // width w and height e scales like w/e instead of 1)
    let tau: f64 = (0..nv)
        .map(|i| area / (h * h) * (proj[(1, i)].powi(2) + proj[(2, i)].powi(2)))
        .sum::<f64>()
        / 3.0;
    let d = projector_at_vertices(cell, &proj);
    for i in 0..nv {
        for j in 0..nv {
            let mut s = 0.0;
            for l in 0..nv {
                let ei = if l == i { 1.0 } else { 0.0 };
                let ej = if l == j { 1.0 } else { 0.0 };
                s += (ei - d[(l, i)]) * (ej - d[(l, j)]);
            }
            k[(i, j)] += tau * s;
        }
    }
    Ok(k)
}

/// Mass: `(Πu, Πv)_K` by exact moments plus `|K|`-scaled dof-dof
/// stabilization on `(I - Π)`.
pub fn nodal_mass(cell: &CellView) -> Result<Mat<f64>, VemError> {
    let proj = nodal_projector(cell)?;
    let nv = cell.num_vertices();
    let area = cell.geometry.area;
    let h = cell.geometry.diameter;
    let mom = polygon_moments(cell);

    // Gram of {1, xi, eta}; first moments vanish at the centroid
    let gram = [
        [area, 0.0, 0.0],
        [0.0, mom.m20 / (h * h), mom.m11 / (h * h)],
        [0.0, mom.m11 / (h * h), mom.m02 / (h * h)],
    ];
    let mut m = Mat::zeros(nv, nv);
    for i in 0..nv {
        for j in 0..nv {
            let mut s = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    s += proj[(a, i)] * gram[a][b] * proj[(b, j)];
                }
            }
            m[(i, j)] = s;
        }
    }
    let d = projector_at_vertices(cell, &proj);
    for i in 0..nv {
        for j in 0..nv {
            let mut s = 0.0;
            for l in 0..nv {
                let ei = if l == i { 1.0 } else { 0.0 };
                let ej = if l == j { 1.0 } else { 0.0 };
                s += (ei - d[(l, i)]) * (ej - d[(l, j)]);
            }
            m[(i, j)] += area * s;
        }
    }
    Ok(m)
}

/// Combined nodal matrices for a cell.
pub fn nodal_matrices(cell: &CellView) -> Result<LocalNodalMatrices, VemError> {
    Ok(LocalNodalMatrices {
        stiffness: nodal_stiffness(cell)?,
        mass: nodal_mass(cell)?,
        projector: nodal_projector(cell)?,
    })
}

/// Facet-space mass matrix split into its computable parts.
#[derive(Debug, Clone)]
pub struct LocalFacetMass {
    /// Consistency + stabilization; symmetric positive definite.
    pub mass: Mat<f64>,
    /// 3 x N_F coefficients of the L2 projection onto `{e1, e2, x_K}`.
    pub projection: Mat<f64>,
    /// The stabilization part alone.
    pub stabilization: Mat<f64>,
}

/// L2 projection of the facet basis onto `span{e1, e2, x_K}`.
///
/// All right-hand sides are computable from the facet dofs: constants pair
/// against facet midpoints, and the `x_K` mode integrates `q = |x_K|²/2`
/// along the boundary (Simpson, exact for quadratics). The Gram matrix is
/// `diag(|K|, |K|, ∫|x_K|²)` because `c_K` is the centroid.
pub fn facet_projection(cell: &CellView) -> Result<Mat<f64>, VemError> {
    let nf = cell.facets.len();
    let nv = cell.num_vertices();
    let area = cell.geometry.area;
    let mom = polygon_moments(cell);
    let j2 = mom.second_trace();
    if !(area > 0.0) || !(j2 > 0.0) {
        return Err(VemError::SingularGram { cell: cell.cell });
    }

    let q = |p: Point| {
        let d = cell.centered(p);
        0.5 * (d[0] * d[0] + d[1] * d[1])
    };

    let mut proj = Mat::zeros(3, nf);
    for (i, f) in cell.facets.iter().enumerate() {
        let m = cell.centered(f.midpoint);
        proj[(0, i)] = f.sign * m[0] / area;
        proj[(1, i)] = f.sign * m[1] / area;

        let pa = cell.points[i];
        let pb = cell.points[(i + 1) % nv];
        let edge_q = (q(pa) + 4.0 * q(f.midpoint) + q(pb)) / 6.0;
        proj[(2, i)] = f.sign * (edge_q - 0.5 * j2 / area) / j2;
    }
    Ok(proj)
}

/// Facet mass matrix: projected consistency plus the dof-based
/// stabilization `(diam(K)/2) Σ_F dof_F(·) dof_F(·) / |F|` on `(I - Π)`.
pub fn facet_mass(cell: &CellView) -> Result<LocalFacetMass, VemError> {
    let proj = facet_projection(cell)?;
    let nf = cell.facets.len();
    let area = cell.geometry.area;
    let diam = cell.geometry.diameter;
    let j2 = polygon_moments(cell).second_trace();

    let gram = [area, area, j2];
    let mut mass = Mat::zeros(nf, nf);
    for i in 0..nf {
        for j in 0..nf {
            let mut s = 0.0;
            for a in 0..3 {
                s += proj[(a, i)] * gram[a] * proj[(a, j)];
            }
            mass[(i, j)] = s;
        }
    }

    // dofs of the projected basis w.r.t. the fixed facet normals
    let mut dofs = Mat::zeros(nf, nf);
    for (i, f) in cell.facets.iter().enumerate() {
        let m = cell.centered(f.midpoint);
        for j in 0..nf {
            dofs[(i, j)] = f.length
                * (f.normal[0] * proj[(0, j)]
                    + f.normal[1] * proj[(1, j)]
                    + proj[(2, j)] * (f.normal[0] * m[0] + f.normal[1] * m[1]));
        }
    }

    let mut stab = Mat::zeros(nf, nf);
    for a in 0..nf {
        for b in 0..nf {
            let mut s = 0.0;
            for (i, f) in cell.facets.iter().enumerate() {
                let ea = if i == a { 1.0 } else { 0.0 };
                let eb = if i == b { 1.0 } else { 0.0 };
                s += (ea - dofs[(i, a)]) * (eb - dofs[(i, b)]) / f.length;
            }
            stab[(a, b)] = 0.5 * diam * s;
        }
    }

    for i in 0..nf {
        for j in 0..nf {
            mass[(i, j)] += stab[(i, j)];
        }
    }
    Ok(LocalFacetMass {
        mass,
        projection: proj,
        stabilization: stab,
    })
}

/// Dof vector of the RT0-type field `c + gamma * x_K` on this cell
/// (exact: the integrand is linear along each facet).
pub fn rt0_dofs(cell: &CellView, c: [f64; 2], gamma: f64) -> Vec<f64> {
    cell.facets
        .iter()
        .map(|f| {
            let m = cell.centered(f.midpoint);
            f.length
                * (f.normal[0] * c[0]
                    + f.normal[1] * c[1]
                    + gamma * (f.normal[0] * m[0] + f.normal[1] * m[1]))
        })
        .collect()
}

/// Exact L2 inner product of two fields `c + gamma x_K` on this cell.
pub fn rt0_inner_product(cell: &CellView, c1: [f64; 2], g1: f64, c2: [f64; 2], g2: f64) -> f64 {
    let j2 = polygon_moments(cell).second_trace();
    cell.geometry.area * (c1[0] * c2[0] + c1[1] * c2[1]) + g1 * g2 * j2
}
