//! The application contract shared by system matrices and preconditioners.

use crate::sparse::SparseMatrix;

/// A square linear map `x -> y` with a known dimension.
pub trait LinearOperator: Send + Sync {
    fn dim(&self) -> usize;

    /// Computes `y = op(x)`; `x` and `y` have length [`LinearOperator::dim`].
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        y
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        assert_eq!(self.nrows(), self.ncols(), "operator must be square");
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        SparseMatrix::apply(self, x, y);
    }
}
