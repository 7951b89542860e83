//! Smoothers and the nodal auxiliary space preconditioners: additive,
//! multiplicative, and the Darcy block-diagonal wrapper.

use faer::Side;

use crate::complex_ops::{curl_matrix, transfer_matrix};
use crate::mesh::{cell_geometry, PolygonalMesh};
use crate::operator::LinearOperator;
use crate::problems::{assemble_nodal_h1, Arity, AssembledSystem, ProblemError, SystemKind};
use crate::sparse::SparseMatrix;

#[derive(Debug, thiserror::Error)]
pub enum PrecondError {
    #[error("non-positive diagonal entry {value:e} at index {index}")]
    NonPositiveDiagonal { index: usize, value: f64 },
    #[error("sparse Cholesky factorization failed (operator not SPD)")]
    FactorizationFailure,
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmootherKind {
    Diag,
    Stab,
}

/// A diagonal smoother: the vector `d` of `D^k` or `S^k` entries. The
/// preconditioner applies its inverse elementwise.
/// Damping of the opening smoother pass of the multiplicative variant.
const MULT_SMOOTHER_DAMPING: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct Smoother {
    pub diag: Vec<f64>,
    pub kind: SmootherKind,
}

impl Smoother {
    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) {
        for ((z, r), d) in z.iter_mut().zip(r).zip(&self.diag) {
            *z = r / d;
        }
    }
}

/// `D^k`: the diagonal of the system matrix.
pub fn smoother_diag(a: &SparseMatrix) -> Result<Smoother, PrecondError> {
    let diag = a.diagonal();
    for (i, &d) in diag.iter().enumerate() {
        if !(d > 0.0) {
            return Err(PrecondError::NonPositiveDiagonal { index: i, value: d });
        }
    }
    Ok(Smoother {
        diag,
        kind: SmootherKind::Diag,
    })
}

/// `S^k`: the stabilization smoother, `d_F = Σ_{K ∋ F} diam(K)⁻¹ / |F|`
/// (the `h⁻¹`-weighted facet L2 norm in dof form).
pub fn smoother_stab(mesh: &PolygonalMesh) -> Smoother {
    let mut diag = vec![0.0; mesh.facets.len()];
    for k in 0..mesh.cells.len() {
        let diam = cell_geometry(mesh, k).expect("valid cell").diameter;
        for &(f, _) in &mesh.cell_facets[k] {
            diag[f] += 1.0 / (diam * mesh.facet_length(f));
        }
    }
    Smoother {
        diag,
        kind: SmootherKind::Stab,
    }
}

/// Sparse Cholesky factorization of an SPD matrix, reused across applies.
pub struct SparseCholesky {
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
    dim: usize,
}

impl SparseCholesky {
    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl SparseCholesky {
    pub fn new(a: &SparseMatrix) -> Result<Self, PrecondError> {
        let llt = a
            .to_faer()
            .sp_cholesky(Side::Lower)
            .map_err(|_| PrecondError::FactorizationFailure)?;
        Ok(Self {
            llt,
            dim: a.nrows(),
        })
    }

    pub fn solve_vec(&self, r: &[f64]) -> Vec<f64> {
        use faer::linalg::solvers::SolveCore;
        let mut x = faer::Mat::from_fn(r.len(), 1, |i, _| r[i]);
        self.llt.solve_in_place_with_conj(faer::Conj::No, x.as_mut());
        (0..r.len()).map(|i| x[(i, 0)]).collect()
    }
}

enum Op {
    /// Inverse-diagonal preconditioner (stores `d`, applies `r / d`).
    Diagonal(Vec<f64>),
    /// `d⁻¹∘r + Σ_j π_j A_j⁻¹ π_jᵀ r`.
    Additive {
        smoother: Smoother,
        stages: Vec<(SparseMatrix, SparseCholesky)>,
    },
    /// `z_0 = S⁻¹r; z_j = z_{j-1} + π_j A_j⁻¹ π_jᵀ (r − A z_{j-1})`.
    Multiplicative {
        a: SparseMatrix,
        smoother: Smoother,
        stages: Vec<(SparseMatrix, SparseCholesky)>,
    },
    /// `[r_u; r_p] ↦ [B r_u; M_p⁻¹ r_p]`.
    DarcyBlock {
        facet: Box<Preconditioner>,
        areas: Vec<f64>,
    },
    /// Exact inverse via sparse Cholesky.
    Exact(SparseCholesky),
}

/// An applyable preconditioner `r ↦ B r`.
pub struct Preconditioner {
    op: Op,
    dim: usize,
    symmetric: bool,
}

impl Preconditioner {
    /// Whether `B` is symmetric as an operator.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// The entries of `B` when it is diagonal (used to pick the cheap
    /// symmetric-scaling path in condition number computations).
    pub fn as_diagonal(&self) -> Option<Vec<f64>> {
        match &self.op {
            Op::Diagonal(d) => Some(d.iter().map(|v| 1.0 / v).collect()),
            _ => None,
        }
    }
}

impl LinearOperator for Preconditioner {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match &self.op {
            Op::Diagonal(d) => {
                for ((z, r), d) in z.iter_mut().zip(r).zip(d) {
                    *z = r / d;
                }
            }
            Op::Additive { smoother, stages } => {
                smoother.apply_inverse(r, z);
                for (pi, chol) in stages {
                    let w = chol.solve_vec(&pi.apply_transpose_vec(r));
                    for (z, v) in z.iter_mut().zip(pi.apply_vec(&w)) {
                        *z += v;
                    }
                }
            }
            Op::Multiplicative { a, smoother, stages } => {
                // damped opening smoother pass: lambda_max of the
                // Jacobi-preconditioned operator sits near 4, so an
                // undamped pass overshoots the high end of the spectrum
                smoother.apply_inverse(r, z);
                for z in z.iter_mut() {
                    *z *= MULT_SMOOTHER_DAMPING;
                }
                for (pi, chol) in stages {
                    let az = a.apply_vec(z);
                    let rj: Vec<f64> = r.iter().zip(&az).map(|(r, az)| r - az).collect();
                    let w = chol.solve_vec(&pi.apply_transpose_vec(&rj));
                    for (z, v) in z.iter_mut().zip(pi.apply_vec(&w)) {
                        *z += v;
                    }
                }
                // reverse stage sweep: exact subspace corrections are
                // stable, and the second pass tightens the coupling
                // between the auxiliary spaces on badly shaped cells
                for (pi, chol) in stages.iter().rev().skip(1) {
                    let az = a.apply_vec(z);
                    let rj: Vec<f64> = r.iter().zip(&az).map(|(r, az)| r - az).collect();
                    let w = chol.solve_vec(&pi.apply_transpose_vec(&rj));
                    for (z, v) in z.iter_mut().zip(pi.apply_vec(&w)) {
                        *z += v;
                    }
                }
            }
            Op::DarcyBlock { facet, areas } => {
                let nf = facet.dim();
                facet.apply(&r[..nf], &mut z[..nf]);
                for ((z, r), a) in z[nf..].iter_mut().zip(&r[nf..]).zip(areas) {
                    *z = r / a;
                }
            }
            Op::Exact(chol) => z.copy_from_slice(&chol.solve_vec(r)),
        }
    }
}

fn make_smoother(
    a: &SparseMatrix,
    mesh: &PolygonalMesh,
    kind: SmootherKind,
) -> Result<Smoother, PrecondError> {
    match kind {
        SmootherKind::Diag => smoother_diag(a),
        SmootherKind::Stab => Ok(smoother_stab(mesh)),
    }
}

fn auxiliary_stages(
    mesh: &PolygonalMesh,
) -> Result<Vec<(SparseMatrix, SparseCholesky)>, PrecondError> {
    let t = transfer_matrix(mesh);
    let c = curl_matrix(mesh);
    let a1 = SparseCholesky::new(&assemble_nodal_h1(mesh, Arity::Vector)?)?;
    let a2 = SparseCholesky::new(&assemble_nodal_h1(mesh, Arity::Scalar)?)?;
    Ok(vec![(t, a1), (c, a2)])
}

/// The additive auxiliary space preconditioner
/// `B_add = d⁻¹ + T A₁⁻¹ Tᵀ + C A₂⁻¹ Cᵀ` on the facet space.
pub fn build_additive(
    a: &SparseMatrix,
    mesh: &PolygonalMesh,
    kind: SmootherKind,
) -> Result<Preconditioner, PrecondError> {
    Ok(Preconditioner {
        dim: a.nrows(),
        symmetric: true,
        op: Op::Additive {
            smoother: make_smoother(a, mesh, kind)?,
            stages: auxiliary_stages(mesh)?,
        },
    })
}

/// The multiplicative variant: sequential correction through the smoother
/// and the two auxiliary spaces. Nonsymmetric in general.
pub fn build_multiplicative(
    a: &SparseMatrix,
    mesh: &PolygonalMesh,
    kind: SmootherKind,
) -> Result<Preconditioner, PrecondError> {
    Ok(Preconditioner {
        dim: a.nrows(),
        symmetric: false,
        op: Op::Multiplicative {
            a: a.clone(),
            smoother: make_smoother(a, mesh, kind)?,
            stages: auxiliary_stages(mesh)?,
        },
    })
}

/// Multiplicative operator with caller-supplied stages (also the hook for
/// the `J = 1`, `π = I` telescoping identity).
pub fn build_multiplicative_with_stages(
    a: &SparseMatrix,
    smoother: Smoother,
    stages: Vec<(SparseMatrix, SparseCholesky)>,
) -> Preconditioner {
    Preconditioner {
        dim: a.nrows(),
        symmetric: false,
        op: Op::Multiplicative {
            a: a.clone(),
            smoother,
            stages,
        },
    }
}

/// Block-diagonal Darcy preconditioner: the facet-space preconditioner on
/// the velocity block and the inverse diagonal pressure mass `M_p⁻¹ =
/// diag(|K|)⁻¹` on the pressure block.
pub fn build_darcy_block(facet: Preconditioner, areas: Vec<f64>) -> Preconditioner {
    Preconditioner {
        dim: facet.dim() + areas.len(),
        symmetric: facet.symmetric,
        op: Op::DarcyBlock {
            facet: Box::new(facet),
            areas,
        },
    }
}

/// Reference inverse-diagonal preconditioner. For the Darcy system the
/// diagonal is `[diag(M_u); diag(M_p)]` (the saddle matrix itself has a
/// zero pressure diagonal).
pub fn build_diag_reference(system: &AssembledSystem) -> Result<Preconditioner, PrecondError> {
    let diag_a = system.matrix.diagonal();
    let mut d = diag_a[..system.facet_dofs].to_vec();
    match system.kind {
        SystemKind::Projection => {}
        SystemKind::Darcy => d.extend_from_slice(&system.cell_areas),
    }
    for (i, &v) in d.iter().enumerate() {
        if !(v > 0.0) {
            return Err(PrecondError::NonPositiveDiagonal { index: i, value: v });
        }
    }
    Ok(Preconditioner {
        dim: d.len(),
        symmetric: true,
        op: Op::Diagonal(d),
    })
}

/// Exact inverse of an SPD matrix as a preconditioner.
pub fn exact_inverse(a: &SparseMatrix) -> Result<Preconditioner, PrecondError> {
    Ok(Preconditioner {
        dim: a.nrows(),
        symmetric: true,
        op: Op::Exact(SparseCholesky::new(a)?),
    })
}
