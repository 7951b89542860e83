//! Global assembly: the H(div) projection system, the Darcy saddle
//! system, the nodal auxiliary H1 operators, and the manufactured data
//! fields used by the experiment sweeps.

use crate::complex_ops::div_matrix;
use crate::mesh::{cell_geometry, Point, PolygonalMesh};
use crate::quadrature::integrate_polygon;
use crate::sparse::SparseMatrix;
use crate::vem_local::{facet_mass, nodal_matrices, CellView, VemError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    Projection,
    Darcy,
}

/// An assembled linear system together with its block structure.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    pub kind: SystemKind,
    /// Size of the facet (velocity) block.
    pub facet_dofs: usize,
    /// Size of the cell (pressure) block; zero for the projection system.
    pub cell_dofs: usize,
    /// Cell areas = diagonal of the pressure mass matrix (darcy only).
    pub cell_areas: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error(transparent)]
    Vem(#[from] VemError),
    #[error("unknown data field {0:?} (known: f1, f2)")]
    UnknownField(String),
}

fn cell_views(mesh: &PolygonalMesh) -> Result<Vec<CellView>, VemError> {
    (0..mesh.cells.len()).map(|k| CellView::new(mesh, k)).collect()
}

/// Facet-space mass matrix `M_h`: scatter of the per-cell consistency +
/// stabilization blocks. Local dofs already use the fixed facet normals,
/// so the scatter needs no sign flips.
pub fn assemble_facet_mass(mesh: &PolygonalMesh) -> Result<SparseMatrix, ProblemError> {
    let nf = mesh.facets.len();
    let mut trip = Vec::new();
    for cell in cell_views(mesh)? {
        let local = facet_mass(&cell)?;
        let n = cell.facets.len();
        for i in 0..n {
            for j in 0..n {
                trip.push((cell.facets[i].facet, cell.facets[j].facet, local.mass[(i, j)]));
            }
        }
    }
    Ok(SparseMatrix::from_triplets(nf, nf, &trip))
}

/// The projection system matrix `A = M_h + Dᵀ diag(|K|) D`, which is the
/// discrete H(div) inner product. Symmetric positive definite.
pub fn assemble_projection(mesh: &PolygonalMesh) -> Result<SparseMatrix, ProblemError> {
    let mass = assemble_facet_mass(mesh)?;
    let nf = mesh.facets.len();
    let mut trip = Vec::new();
    for (k, faces) in mesh.cell_facets.iter().enumerate() {
        let area = cell_geometry(mesh, k).map_err(VemError::from)?.area;
        for &(fi, si) in faces {
            for &(fj, sj) in faces {
                trip.push((fi, fj, (si as f64) * (sj as f64) / area));
            }
        }
    }
    let div_energy = SparseMatrix::from_triplets(nf, nf, &trip);
    Ok(mass.add(&div_energy))
}

/// Load vector `b_i = Σ_K ∫_K f · (Π b_i)`, pairing the data with the
/// per-cell RT0-type projection of each facet basis function
/// (degree-5 centroid-fan quadrature).
pub fn assemble_rhs_projection(
    mesh: &PolygonalMesh,
    f: &dyn Fn(Point) -> [f64; 2],
) -> Result<Vec<f64>, ProblemError> {
    let mut b = vec![0.0; mesh.facets.len()];
    for cell in cell_views(mesh)? {
        let proj = crate::vem_local::facet_projection(&cell)?;
        let c = cell.geometry.centroid;
        let mut fx = |x: f64, y: f64| f([x, y])[0];
        let int_fx = integrate_polygon(&cell.points, c, 5, &mut fx);
        let mut fy = |x: f64, y: f64| f([x, y])[1];
        let int_fy = integrate_polygon(&cell.points, c, 5, &mut fy);
        let mut fxk = |x: f64, y: f64| {
            let v = f([x, y]);
            v[0] * (x - c[0]) + v[1] * (y - c[1])
        };
        let int_fxk = integrate_polygon(&cell.points, c, 5, &mut fxk);
        for (j, lf) in cell.facets.iter().enumerate() {
            b[lf.facet] +=
                proj[(0, j)] * int_fx + proj[(1, j)] * int_fy + proj[(2, j)] * int_fxk;
        }
    }
    Ok(b)
}

/// The Darcy saddle system `[[M_u, -Bᵀ], [-B, 0]]` with
/// `B[K][F] = sigma_{K,F}` (the pairing `(q, div u)` against cellwise
/// constants) and right-hand side `[b_f; b_g]`, `b_g[K] = ∫_K g`.
pub fn assemble_darcy(
    mesh: &PolygonalMesh,
    f: &dyn Fn(Point) -> [f64; 2],
    g: &dyn Fn(Point) -> f64,
) -> Result<AssembledSystem, ProblemError> {
    let nf = mesh.facets.len();
    let nc = mesh.cells.len();
    let mass = assemble_facet_mass(mesh)?;
    let mut trip: Vec<(usize, usize, f64)> =
        mass.iter().map(|(i, j, v)| (i, j, v)).collect();
    for (k, faces) in mesh.cell_facets.iter().enumerate() {
        for &(fi, si) in faces {
            trip.push((fi, nf + k, -(si as f64)));
            trip.push((nf + k, fi, -(si as f64)));
        }
    }
    let matrix = SparseMatrix::from_triplets(nf + nc, nf + nc, &trip);

    let mut rhs = assemble_rhs_projection(mesh, f)?;
    rhs.resize(nf + nc, 0.0);
    let mut cell_areas = Vec::with_capacity(nc);
    for k in 0..nc {
        let geo = cell_geometry(mesh, k).map_err(VemError::from)?;
        let pts = mesh.cell_points(k);
        let mut gv = |x: f64, y: f64| g([x, y]);
        rhs[nf + k] = integrate_polygon(&pts, geo.centroid, 5, &mut gv);
        cell_areas.push(geo.area);
    }
    Ok(AssembledSystem {
        matrix,
        rhs,
        kind: SystemKind::Darcy,
        facet_dofs: nf,
        cell_dofs: nc,
        cell_areas,
    })
}

/// Wraps the projection system in the same report structure.
pub fn assemble_projection_system(
    mesh: &PolygonalMesh,
    f: &dyn Fn(Point) -> [f64; 2],
) -> Result<AssembledSystem, ProblemError> {
    Ok(AssembledSystem {
        matrix: assemble_projection(mesh)?,
        rhs: assemble_rhs_projection(mesh, f)?,
        kind: SystemKind::Projection,
        facet_dofs: mesh.facets.len(),
        cell_dofs: 0,
        cell_areas: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Scalar,
    Vector,
}

/// Nodal auxiliary operator: the full H1 inner product (stiffness + mass)
/// on the nodal space. The vector variant is two decoupled copies in
/// component-major order (all x dofs, then all y dofs), matching the
/// transfer matrix columns.
pub fn assemble_nodal_h1(mesh: &PolygonalMesh, arity: Arity) -> Result<SparseMatrix, ProblemError> {
    let nn = mesh.vertices.len();
    let mut trip = Vec::new();
    for cell in cell_views(mesh)? {
        let mats = nodal_matrices(&cell)?;
        let n = cell.vertex_ids.len();
        for i in 0..n {
            for j in 0..n {
                let v = mats.stiffness[(i, j)] + mats.mass[(i, j)];
                trip.push((cell.vertex_ids[i], cell.vertex_ids[j], v));
            }
        }
    }
    match arity {
        Arity::Scalar => Ok(SparseMatrix::from_triplets(nn, nn, &trip)),
        Arity::Vector => {
            let mut both = Vec::with_capacity(2 * trip.len());
            for &(i, j, v) in &trip {
                both.push((i, j, v));
                both.push((nn + i, nn + j, v));
            }
            Ok(SparseMatrix::from_triplets(2 * nn, 2 * nn, &both))
        }
    }
}

/// Named manufactured data: `(f, g)` pairs for the experiment suites.
pub fn data_library(name: &str) -> Result<(fn(Point) -> [f64; 2], fn(Point) -> f64), ProblemError> {
    use std::f64::consts::PI;
    fn f1(p: Point) -> [f64; 2] {
        [
            -2.0 * PI * (2.0 * PI * p[0]).cos() * (4.0 * PI * p[1]).sin(),
            -4.0 * PI * (4.0 * PI * p[1]).cos() * (2.0 * PI * p[0]).sin(),
        ]
    }
    fn g1(p: Point) -> f64 {
        -40.0 * PI * PI * (2.0 * PI * p[0]).cos() * (4.0 * PI * p[1]).sin()
    }
    fn f2(p: Point) -> [f64; 2] {
        [p[0].cos() * p[1].sinh(), p[0].sin() * p[1].cosh()]
    }
    fn g2(_: Point) -> f64 {
        0.0
    }
    match name {
        "f1" => Ok((f1, g1)),
        "f2" => Ok((f2, g2)),
        other => Err(ProblemError::UnknownField(other.to_string())),
    }
}

/// Consistency check between conventions: the Darcy coupling block equals
/// `diag(|K|) · D` where `D` is the cell-average divergence.
pub fn darcy_block_consistent(mesh: &PolygonalMesh) -> bool {
    let d = div_matrix(mesh);
    for (k, faces) in mesh.cell_facets.iter().enumerate() {
        let area = cell_geometry(mesh, k).expect("valid cell").area;
        for &(f, s) in faces {
            let scaled = area * d.get(k, f);
            if (scaled - s as f64).abs() > 1e-12 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_diamond, PolygonalMesh};
    use crate::vem_local::rt0_dofs;
    use faer::Side;

    fn unit_square() -> PolygonalMesh {
        PolygonalMesh::from_cells(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap()
    }

    fn energy(a: &SparseMatrix, v: &[f64]) -> f64 {
        crate::sparse::dot(&a.apply_vec(v), v)
    }

    /// Scatters the cell-local RT0 dofs to global facet numbering.
    fn global_rt0(mesh: &PolygonalMesh, cell: &CellView, c: [f64; 2], gamma: f64) -> Vec<f64> {
        let local = rt0_dofs(cell, c, gamma);
        let mut v = vec![0.0; mesh.facets.len()];
        for (i, lf) in cell.facets.iter().enumerate() {
            v[lf.facet] = local[i];
        }
        v
    }

    #[test]
    fn projection_single_square_energies() {
        let mesh = unit_square();
        let a = assemble_projection(&mesh).unwrap();
        assert_eq!(a.nrows(), 4);
        let cell = CellView::new(&mesh, 0).unwrap();
        // (1,0): unit L2 norm, zero divergence
        let v = global_rt0(&mesh, &cell, [1.0, 0.0], 0.0);
        assert!((energy(&a, &v) - 1.0).abs() < 1e-13);
        // x_K: L2 norm^2 = 1/6, div = 2 so the div energy adds |K|*4
        let v = global_rt0(&mesh, &cell, [0.0, 0.0], 1.0);
        assert!((energy(&a, &v) - (1.0 / 6.0 + 4.0)).abs() < 1e-13);
    }

    #[test]
    fn projection_spd_on_diamond() {
        let a = assemble_projection(&generate_diamond(2)).unwrap();
        assert!(a.symmetry_defect() < 1e-14);
        let eigs = a.to_dense().self_adjoint_eigenvalues(Side::Lower).unwrap();
        assert!(eigs[0] > 0.0, "min eigenvalue {}", eigs[0]);
    }

    #[test]
    fn galerkin_consistency_single_cell() {
        // global RT0 field c + gamma*x on a one-cell mesh: discrete energy
        // equals the continuous H(div) norm
        let mesh = unit_square();
        let a = assemble_projection(&mesh).unwrap();
        let cell = CellView::new(&mesh, 0).unwrap();
        let (c, gamma) = ([0.4, -0.7], 1.3);
        let v = global_rt0(&mesh, &cell, c, gamma);
        let exact = crate::vem_local::rt0_inner_product(&cell, c, gamma, c, gamma)
            + (2.0 * gamma).powi(2) * cell.geometry.area;
        assert!((energy(&a, &v) - exact).abs() < 1e-12 * exact.abs());
    }

    #[test]
    fn rhs_zero_for_zero_data() {
        let b = assemble_rhs_projection(&generate_diamond(1), &|_| [0.0, 0.0]).unwrap();
        assert!(b.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rhs_constant_field_matches_consistency_pairing() {
        // f = (1,0): b_i = ∫ (Pi b_i)·(1,0) which is the consistency-mass
        // pairing against the dofs of (1,0); stabilization vanishes there
        // because (1,0) is in the projected space
        let mesh = unit_square();
        let b = assemble_rhs_projection(&mesh, &|_| [1.0, 0.0]).unwrap();
        let cell = CellView::new(&mesh, 0).unwrap();
        let m = assemble_facet_mass(&mesh).unwrap();
        let v = global_rt0(&mesh, &cell, [1.0, 0.0], 0.0);
        let mv = m.apply_vec(&v);
        for (bi, mi) in b.iter().zip(&mv) {
            assert!((bi - mi).abs() < 1e-13, "{bi} vs {mi}");
        }
    }

    #[test]
    fn data_fields_match_reference_values() {
        use std::f64::consts::PI;
        let (f1, g1) = data_library("f1").unwrap();
        let v = f1([0.0, 0.125]);
        assert!((v[0] + 2.0 * PI).abs() < 1e-14 && v[1].abs() < 1e-14);
        let v = f1([0.25, 0.0]);
        assert!(v[0].abs() < 1e-14);
        assert!((g1([0.0, 0.125]) + 40.0 * PI * PI).abs() < 1e-11);
        let (f2, g2) = data_library("f2").unwrap();
        let v = f2([0.0, 0.0]);
        assert!(v[0].abs() < 1e-15 && v[1].abs() < 1e-15);
        assert!(g2([0.3, 0.7]) == 0.0);
        assert!(data_library("f3").is_err());
    }

    #[test]
    fn darcy_structure_and_inertia() {
        let mesh = generate_diamond(1);
        let (f, g) = data_library("f1").unwrap();
        let sys = assemble_darcy(&mesh, &f, &g).unwrap();
        let nf = mesh.facets.len();
        let nc = mesh.cells.len();
        assert_eq!(sys.matrix.nrows(), nf + nc);
        assert!(sys.matrix.symmetry_defect() < 1e-14);
        // zero lower-right block
        for k in 0..nc {
            for l in 0..nc {
                assert_eq!(sys.matrix.get(nf + k, nf + l), 0.0);
            }
        }
        let eigs = sys
            .matrix
            .to_dense()
            .self_adjoint_eigenvalues(Side::Lower)
            .unwrap();
        let neg = eigs.iter().filter(|&&e| e < 0.0).count();
        let pos = eigs.iter().filter(|&&e| e > 0.0).count();
        assert_eq!((pos, neg), (nf, nc), "saddle-point inertia");
    }

    #[test]
    fn darcy_rhs_g_block() {
        let mesh = unit_square();
        let sys = assemble_darcy(&mesh, &|_| [1.0, 0.0], &|_| 0.0).unwrap();
        assert_eq!(sys.rhs[4], 0.0);
        let sys = assemble_darcy(&mesh, &|_| [0.0, 0.0], &|p| p[0]).unwrap();
        assert!((sys.rhs[4] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn darcy_block_matches_divergence() {
        assert!(darcy_block_consistent(&generate_diamond(2)));
    }

    #[test]
    fn nodal_h1_scalar_properties() {
        let mesh = generate_diamond(2);
        let a2 = assemble_nodal_h1(&mesh, Arity::Scalar).unwrap();
        let ones = vec![1.0; mesh.vertices.len()];
        // constants: stiffness row sums vanish, mass gives |Omega| = 1
        assert!((energy(&a2, &ones) - 1.0).abs() < 1e-12);
        let eigs = a2.to_dense().self_adjoint_eigenvalues(Side::Lower).unwrap();
        assert!(eigs[0] > 0.0);
    }

    #[test]
    fn nodal_h1_single_square_linear_energy() {
        let mesh = unit_square();
        let a2 = assemble_nodal_h1(&mesh, Arity::Scalar).unwrap();
        let xs: Vec<f64> = mesh.vertices.iter().map(|p| p[0]).collect();
        assert!((energy(&a2, &xs) - 4.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn nodal_h1_vector_is_two_blocks() {
        let mesh = generate_diamond(1);
        let nn = mesh.vertices.len();
        let a2 = assemble_nodal_h1(&mesh, Arity::Scalar).unwrap();
        let a1 = assemble_nodal_h1(&mesh, Arity::Vector).unwrap();
        assert_eq!(a1.nrows(), 2 * nn);
        for (i, j, v) in a2.iter() {
            assert_eq!(a1.get(i, j), v);
            assert_eq!(a1.get(nn + i, nn + j), v);
            assert_eq!(a1.get(i, nn + j), 0.0);
        }
    }

    #[test]
    fn inverse_inequality_scaling() {
        // h^2 * lambda_max(D^T diag(|K|) D, M_h) bounded across refinements
        let mut vals = Vec::new();
        for n in [2usize, 4, 8] {
            let mesh = generate_diamond(n);
            let m = assemble_facet_mass(&mesh).unwrap();
            let a = assemble_projection(&mesh).unwrap();
            // div energy = A - M; generalized max eig via dense pencil
            let div_e = a.add(&m.scale(-1.0));
            let llt = m.to_dense().llt(Side::Lower).unwrap();
            let l = llt.L();
            let nfc = m.nrows();
            let mut s = div_e.to_dense();
            for col in 0..nfc {
                for i in 0..nfc {
                    let mut v = s[(i, col)];
                    for p in 0..i {
                        v -= l[(i, p)] * s[(p, col)];
                    }
                    s[(i, col)] = v / l[(i, i)];
                }
            }
            for row in 0..nfc {
                for j in 0..nfc {
                    let mut v = s[(row, j)];
                    for p in 0..j {
                        v -= l[(j, p)] * s[(row, p)];
                    }
                    s[(row, j)] = v / l[(j, j)];
                }
            }
            let eigs = s.self_adjoint_eigenvalues(Side::Lower).unwrap();
            vals.push(mesh.h * mesh.h * eigs[eigs.len() - 1]);
        }
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(0.0, f64::max);
        assert!(hi / lo < 1.5, "scaled max eigenvalues {vals:?}");
    }
}
