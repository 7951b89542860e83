//! Lowest-order mixed virtual element discretizations on polygonal meshes,
//! with nodal auxiliary space preconditioning.
//!
//! The crate builds the discrete de Rham complex (nodal, facet, and cell
//! spaces with `curl` and `div` maps), assembles L2-projection and Darcy
//! systems in the facet space, and provides additive and multiplicative
//! auxiliary space preconditioners whose quality is independent of mesh
//! size and of element aspect ratio. Instrumentation (condition numbers,
//! preconditioned GMRES iteration counts) lives in [`krylov`] and
//! [`experiments`].

pub mod complex_ops;
pub mod experiments;
pub mod krylov;
pub mod mesh;
pub mod operator;
pub mod precond;
pub mod problems;
pub mod quadrature;
pub mod sparse;
pub mod vem_local;

pub use mesh::{generate_diamond, generate_triangle_grid, MeshError, PolygonalMesh};
pub use operator::LinearOperator;
pub use sparse::SparseMatrix;
