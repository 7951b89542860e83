//! The discrete de Rham complex on a polygonal mesh:
//! nodal space --curl--> facet space --div--> cell space,
//! plus the canonical interpolation operators and the nodal-to-facet
//! transfer used by the auxiliary space preconditioners.

use crate::mesh::{Point, PolygonalMesh};
use crate::quadrature::gauss_segment;
use crate::sparse::SparseMatrix;

/// Degree-of-freedom counts of the three spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofMap {
    pub nodal: usize,
    pub facet: usize,
    pub cell: usize,
}

impl DofMap {
    pub fn new(mesh: &PolygonalMesh) -> Self {
        Self {
            nodal: mesh.vertices.len(),
            facet: mesh.facets.len(),
            cell: mesh.cells.len(),
        }
    }
}

/// Discrete curl: facet dof of the rotated gradient of a nodal function.
/// Row for facet `(a, b)` (with `a < b` and the fixed normal convention)
/// is `v(b) - v(a)`.
pub fn curl_matrix(mesh: &PolygonalMesh) -> SparseMatrix {
    let mut trip = Vec::with_capacity(2 * mesh.facets.len());
    for (f, &(a, b)) in mesh.facets.iter().enumerate() {
        trip.push((f, a, -1.0));
        trip.push((f, b, 1.0));
    }
    SparseMatrix::from_triplets(mesh.facets.len(), mesh.vertices.len(), &trip)
}

/// Signed cell-facet incidence: `sigma[K][F] = ±1` when facet `F` bounds
/// cell `K`, positive iff the fixed normal points out of `K`.
pub fn signed_incidence(mesh: &PolygonalMesh) -> Vec<Vec<(usize, i8)>> {
    mesh.cell_facets.clone()
}

/// Discrete div: cell average of the divergence, `D[K][F] = sigma / |K|`.
pub fn div_matrix(mesh: &PolygonalMesh) -> SparseMatrix {
    let mut trip = Vec::new();
    for (k, faces) in mesh.cell_facets.iter().enumerate() {
        let area = crate::mesh::cell_geometry(mesh, k).expect("valid cell").area;
        for &(f, s) in faces {
            trip.push((k, f, s as f64 / area));
        }
    }
    SparseMatrix::from_triplets(mesh.cells.len(), mesh.facets.len(), &trip)
}

/// Nodal-vector to facet transfer: trapezoidal flux of the edgewise-linear
/// interpolant, `dof_F = |F| n · (v_a + v_b) / 2`. Columns are
/// component-major: x at `node`, y at `nodal + node`.
pub fn transfer_matrix(mesh: &PolygonalMesh) -> SparseMatrix {
    let nn = mesh.vertices.len();
    let mut trip = Vec::with_capacity(4 * mesh.facets.len());
    for (f, &(a, b)) in mesh.facets.iter().enumerate() {
        let len = mesh.facet_length(f);
        let n = mesh.facet_normal(f);
        for &v in &[a, b] {
            trip.push((f, v, 0.5 * len * n[0]));
            trip.push((f, nn + v, 0.5 * len * n[1]));
        }
    }
    SparseMatrix::from_triplets(mesh.facets.len(), 2 * nn, &trip)
}

/// Canonical facet interpolation of a smooth vector field: per-facet Gauss
/// quadrature (of the given polynomial exactness degree) of `v · n`.
pub fn interpolate_facet(
    mesh: &PolygonalMesh,
    v: &dyn Fn(Point) -> [f64; 2],
    degree: usize,
) -> Vec<f64> {
    let rule = gauss_segment(degree);
    mesh.facets
        .iter()
        .enumerate()
        .map(|(f, &(a, b))| {
            let pa = mesh.vertices[a];
            let pb = mesh.vertices[b];
            let n = mesh.facet_normal(f);
            let len = mesh.facet_length(f);
            let mut s = 0.0;
            for &(t, w) in &rule {
                let p = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
                let val = v(p);
                s += w * (val[0] * n[0] + val[1] * n[1]);
            }
            len * s
        })
        .collect()
}

/// Canonical nodal interpolation: vertex values.
pub fn interpolate_nodal(mesh: &PolygonalMesh, v: &dyn Fn(Point) -> f64) -> Vec<f64> {
    mesh.vertices.iter().map(|&p| v(p)).collect()
}

/// Cell averages of a smooth scalar (degree-5 centroid-fan quadrature).
pub fn interpolate_cell(mesh: &PolygonalMesh, v: &dyn Fn(Point) -> f64) -> Vec<f64> {
    (0..mesh.cells.len())
        .map(|k| {
            let geo = crate::mesh::cell_geometry(mesh, k).expect("valid cell");
            let pts = mesh.cell_points(k);
            let mut f = |x: f64, y: f64| v([x, y]);
            crate::quadrature::integrate_polygon(&pts, geo.centroid, 5, &mut f) / geo.area
        })
        .collect()
}

/// Structural report on the discrete complex.
#[derive(Debug, Clone)]
pub struct ComplexReport {
    pub dofs: DofMap,
    /// True iff the integer incidence product (div ∘ curl, unscaled) is
    /// identically zero.
    pub div_curl_zero: bool,
    pub rank_curl: usize,
    pub rank_div: usize,
    /// True iff `rank(curl) = N_v - 1`, `rank(div) = N_c`, and the ranks
    /// tile the facet space: `rank(curl) + rank(div) = N_F`.
    pub exact: bool,
    /// Max over sampled smooth fields and cells of
    /// `|div(I_F v) - mean_K(div v)|`.
    pub commuting_error: f64,
}

fn dense_rank(m: &SparseMatrix) -> usize {
    let sv = m.to_dense().singular_values().expect("svd");
    let tol = 1e-11 * sv.first().copied().unwrap_or(0.0).max(1.0);
    sv.iter().filter(|&&s| s > tol).count()
}

/// Checks complex identities on a mesh: `div ∘ curl = 0` exactly (in
/// integer incidence arithmetic), the exactness ranks, and the commuting
/// property of the canonical interpolations for a few smooth fields.
pub fn verify_complex(mesh: &PolygonalMesh) -> ComplexReport {
    let dofs = DofMap::new(mesh);
    let curl = curl_matrix(mesh);

    // integer product of signed incidence with the curl incidence
    let mut div_curl_zero = true;
    'cells: for faces in &mesh.cell_facets {
        let mut accum = std::collections::HashMap::<usize, i64>::new();
        for &(f, s) in faces {
            let (a, b) = mesh.facets[f];
            *accum.entry(a).or_insert(0) -= s as i64;
            *accum.entry(b).or_insert(0) += s as i64;
        }
        if accum.values().any(|&v| v != 0) {
            div_curl_zero = false;
            break 'cells;
        }
    }

    let div = div_matrix(mesh);
    let rank_curl = dense_rank(&curl);
    let rank_div = dense_rank(&div);
    let exact =
        rank_curl == dofs.nodal - 1 && rank_div == dofs.cell && rank_curl + rank_div == dofs.facet;

    let mut commuting_error = 0.0f64;

    // nodal -> facet leg: I_F(curl v) = C I_0(v) with curl v = (-v_y, v_x)
    let pi = std::f64::consts::PI;
    let potentials: Vec<(Box<dyn Fn(Point) -> f64>, Box<dyn Fn(Point) -> [f64; 2]>)> = vec![
        (Box::new(|p: Point| p[0]), Box::new(|_| [0.0, 1.0])),
        (Box::new(|p: Point| p[1]), Box::new(|_| [-1.0, 0.0])),
        (
            Box::new(|p: Point| p[0] * p[1]),
            Box::new(|p: Point| [-p[0], p[1]]),
        ),
        (
            Box::new(move |p: Point| (pi * p[0]).sin() * (pi * p[1]).sin()),
            Box::new(move |p: Point| {
                [
                    -pi * (pi * p[0]).sin() * (pi * p[1]).cos(),
                    pi * (pi * p[0]).cos() * (pi * p[1]).sin(),
                ]
            }),
        ),
    ];
    for (v, curl_v) in &potentials {
        let lhs = interpolate_facet(mesh, curl_v.as_ref(), 11);
        let rhs = curl.apply_vec(&interpolate_nodal(mesh, v.as_ref()));
        for (a, b) in lhs.iter().zip(&rhs) {
            commuting_error = commuting_error.max((a - b).abs());
        }
    }

    // facet -> cell leg: div I_F(v) = mean_K(div v); polynomial fields so
    // the reference cell averages are quadrature-exact
    let fields: Vec<(Box<dyn Fn(Point) -> [f64; 2]>, Box<dyn Fn(Point) -> f64>)> = vec![
        (Box::new(|p: Point| [p[0], p[1]]), Box::new(|_| 2.0)),
        (
            Box::new(|p: Point| [p[0] * p[1], -p[0] * p[1]]),
            Box::new(|p: Point| p[1] - p[0]),
        ),
        (
            Box::new(|p: Point| [p[0] * p[0] * p[1], p[1] * p[1]]),
            Box::new(|p: Point| 2.0 * p[0] * p[1] + 2.0 * p[1]),
        ),
    ];
    for (v, div_v) in &fields {
        let dofs_v = interpolate_facet(mesh, v.as_ref(), 11);
        let lhs = div.apply_vec(&dofs_v);
        let rhs = interpolate_cell(mesh, div_v.as_ref());
        for (a, b) in lhs.iter().zip(&rhs) {
            commuting_error = commuting_error.max((a - b).abs());
        }
    }

    ComplexReport {
        dofs,
        div_curl_zero,
        rank_curl,
        rank_div,
        exact,
        commuting_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_diamond, generate_triangle_grid};

    #[test]
    fn div_curl_composition_is_zero() {
        let mesh = generate_diamond(2);
        let d = div_matrix(&mesh);
        let c = curl_matrix(&mesh);
        for j in 0..mesh.vertices.len() {
            let mut e = vec![0.0; mesh.vertices.len()];
            e[j] = 1.0;
            let dc = d.apply_vec(&c.apply_vec(&e));
            assert!(dc.iter().all(|&v| v == 0.0), "column {j} not annihilated");
        }
    }

    #[test]
    fn exactness_ranks_on_diamond() {
        let mesh = generate_diamond(2);
        let report = verify_complex(&mesh);
        assert_eq!(report.dofs.nodal, 49);
        assert_eq!(report.dofs.facet, 84);
        assert_eq!(report.dofs.cell, 36);
        assert!(report.div_curl_zero);
        assert_eq!(report.rank_curl, 48);
        assert_eq!(report.rank_div, 36);
        assert!(report.exact);
    }

    #[test]
    fn exactness_on_triangle_grid() {
        let mesh = generate_triangle_grid(3);
        let report = verify_complex(&mesh);
        assert!(report.div_curl_zero && report.exact);
    }

    #[test]
    fn commuting_diagram_error_small() {
        let report = verify_complex(&generate_diamond(2));
        assert!(
            report.commuting_error <= 1e-10,
            "commuting error {}",
            report.commuting_error
        );
    }

    #[test]
    fn transfer_consistent_with_curl_on_rotated_gradients() {
        // For nodal phi, the facet dofs of the rotated edgewise-linear
        // gradient equal v(b) - v(a) up to orientation: T applied to the
        // rotated nodal gradient of a linear function matches C phi.
        let mesh = generate_diamond(1);
        let nn = mesh.vertices.len();
        let c = curl_matrix(&mesh);
        let t = transfer_matrix(&mesh);
        // phi = x: grad = (1, 0), rotated (+90) = (0, 1)
        let phi: Vec<f64> = mesh.vertices.iter().map(|p| p[0]).collect();
        let mut w = vec![0.0; 2 * nn];
        for i in 0..nn {
            w[nn + i] = 1.0;
        }
        let lhs = t.apply_vec(&w);
        let rhs = c.apply_vec(&phi);
        for (f, (a, b)) in lhs.iter().zip(&rhs).enumerate() {
            assert!((a - b).abs() < 1e-13, "facet {f}: {a} vs {b}");
        }
    }

    #[test]
    fn facet_interpolation_exact_for_linear_fields() {
        let mesh = generate_diamond(1);
        let dofs = interpolate_facet(&mesh, &|p| [p[0], p[1]], 3);
        for (f, &(a, b)) in mesh.facets.iter().enumerate() {
            let n = mesh.facet_normal(f);
            let m = mesh.facet_midpoint(f);
            let _ = (a, b);
            let exact = mesh.facet_length(f) * (n[0] * m[0] + n[1] * m[1]);
            assert!((dofs[f] - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn cell_interpolation_of_linears_is_centroid_value() {
        let mesh = generate_diamond(1);
        let avg = interpolate_cell(&mesh, &|p| 3.0 * p[0] - p[1]);
        for (k, &a) in avg.iter().enumerate() {
            let geo = crate::mesh::cell_geometry(&mesh, k).unwrap();
            let exact = 3.0 * geo.centroid[0] - geo.centroid[1];
            assert!((a - exact).abs() < 1e-13);
        }
    }
}
