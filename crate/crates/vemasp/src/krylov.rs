//! Unrestarted left-preconditioned GMRES and spectral condition numbers.
//!
//! Condition numbers use a dense eigensolve when the dimension is at or
//! below a cap (default 8000, see the CLI) and Lanczos-based extremal
//! estimates above it. Nonsymmetric preconditioned operators (the
//! multiplicative variant) have no estimator and error out above the cap.

use faer::{Mat, Side};

use crate::operator::LinearOperator;
use crate::precond::{Preconditioner, SparseCholesky};
use crate::sparse::{dot, norm2, SparseMatrix};

/// Result of a GMRES solve.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub solution: Vec<f64>,
    /// Preconditioned residual norms; entry 0 is the initial residual, so
    /// the iteration count is `history.len() - 1`.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Arnoldi norm underflow before reaching the tolerance.
    pub breakdown: bool,
}

impl SolveResult {
    pub fn iterations(&self) -> usize {
        self.residual_history.len() - 1
    }
}

/// Unrestarted GMRES on the left-preconditioned system `BAx = Bb`.
/// Modified Gram-Schmidt with one reorthogonalization pass; stops when the
/// relative preconditioned residual drops below `tol`.
pub fn gmres(
    a: &dyn LinearOperator,
    precond: Option<&Preconditioner>,
    b: &[f64],
    tol: f64,
    maxit: usize,
) -> SolveResult {
    let n = a.dim();
    assert_eq!(b.len(), n, "rhs dimension mismatch");
    let apply_ba = |x: &[f64]| -> Vec<f64> {
        let ax = a.apply_vec(x);
        match precond {
            Some(p) => p.apply_vec(&ax),
            None => ax,
        }
    };
    let r0 = match precond {
        Some(p) => p.apply_vec(b),
        None => b.to_vec(),
    };
    let beta = norm2(&r0);
    if beta == 0.0 {
        return SolveResult {
            solution: vec![0.0; n],
            residual_history: vec![0.0],
            converged: true,
            breakdown: false,
        };
    }

    let mut basis: Vec<Vec<f64>> = vec![r0.iter().map(|v| v / beta).collect()];
    // Hessenberg columns after Givens, plus the rotations and rhs g
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut givens: Vec<(f64, f64)> = Vec::new();
    let mut g = vec![beta];
    let mut history = vec![beta];
    let mut converged = false;
    let mut breakdown = false;

    for k in 0..maxit {
        let mut w = apply_ba(&basis[k]);
        let mut h = vec![0.0; k + 2];
        for pass in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = dot(&w, v);
                if pass == 0 {
                    h[i] = c;
                } else {
                    h[i] += c;
                }
                for (w, v) in w.iter_mut().zip(v) {
                    *w -= c * v;
                }
            }
        }
        let wnorm = norm2(&w);
        h[k + 1] = wnorm;

        // apply accumulated rotations, then the new one
        for (i, &(c, s)) in givens.iter().enumerate() {
            let (hi, hj) = (h[i], h[i + 1]);
            h[i] = c * hi + s * hj;
            h[i + 1] = -s * hi + c * hj;
        }
        let (c, s) = {
            let r = (h[k] * h[k] + h[k + 1] * h[k + 1]).sqrt();
            if r == 0.0 {
                (1.0, 0.0)
            } else {
                (h[k] / r, h[k + 1] / r)
            }
        };
        let hkk = c * h[k] + s * h[k + 1];
        h[k] = hkk;
        h[k + 1] = 0.0;
        givens.push((c, s));
        g.push(-s * g[k]);
        g[k] *= c;
        cols.push(h);

        let res = g[k + 1].abs();
        history.push(res.min(history[k]));
        if res <= tol * beta {
            converged = true;
            break;
        }
        if wnorm <= f64::EPSILON * beta {
            breakdown = true;
            break;
        }
        basis.push(w.iter().map(|v| v / wnorm).collect());
    }

    // back substitution on the triangular system
    let m = cols.len();
    let mut y = vec![0.0; m];
    for i in (0..m).rev() {
        let mut v = g[i];
        for j in i + 1..m {
            v -= cols[j][i] * y[j];
        }
        y[i] = if cols[i][i] != 0.0 { v / cols[i][i] } else { 0.0 };
    }
    let mut solution = vec![0.0; n];
    for (j, yj) in y.iter().enumerate() {
        for (x, v) in solution.iter_mut().zip(&basis[j]) {
            *x += yj * v;
        }
    }
    SolveResult {
        solution,
        residual_history: history,
        converged,
        breakdown,
    }
}

/// A condition number together with whether it is a Lanczos estimate
/// (above the dense cap) rather than a dense eigensolve value.
#[derive(Debug, Clone, Copy)]
pub struct Kappa {
    pub value: f64,
    pub estimate: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum KrylovError {
    #[error("dimension {dim} exceeds dense cap {cap} and no estimator applies")]
    DimensionExceedsCap { dim: usize, cap: usize },
    #[error("eigenvalue computation failed")]
    EigenFailure,
}

fn abs_ratio(eigs: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &e in eigs {
        lo = lo.min(e.abs());
        hi = hi.max(e.abs());
    }
    hi / lo
}

/// Materializes a preconditioner densely, column by column.
fn dense_of(p: &Preconditioner) -> Mat<f64> {
    let n = p.dim();
    let mut e = vec![0.0; n];
    let mut m = Mat::zeros(n, n);
    for j in 0..n {
        e[j] = 1.0;
        let col = p.apply_vec(&e);
        e[j] = 0.0;
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    m
}

/// Eigenvalues of `L^T A L` where `B = L L^T`: similar to `BA`, symmetric.
fn preconditioned_spectrum_dense(a: &SparseMatrix, b: &Mat<f64>) -> Result<Vec<f64>, KrylovError> {
    let n = a.nrows();
    let llt = b.llt(Side::Lower).map_err(|_| KrylovError::EigenFailure)?;
    let l = llt.L();
    let mut al: Mat<f64> = Mat::zeros(n, n);
    for (i, j, v) in a.iter() {
        for col in 0..n {
            al[(i, col)] += v * l[(j, col)];
        }
    }
    let s = l.transpose() * &al;
    s.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| KrylovError::EigenFailure)
}

/// Lanczos in the `B`-inner product on the operator `v -> A B v`, whose
/// spectrum equals that of `BA`. Carries the pairs `(v_j, B v_j)` so all
/// inner products are cheap. Returns eigenvalues of the tridiagonal.
fn lanczos_pencil(
    a: &SparseMatrix,
    apply_b: &dyn Fn(&[f64]) -> Vec<f64>,
    steps: usize,
    seed: u64,
) -> Result<Vec<f64>, KrylovError> {
    let n = a.nrows();
    let steps = steps.min(n);
    let mut v0 = pseudorandom(n, seed);
    let mut b0 = apply_b(&v0);
    let nrm = dot(&v0, &b0).sqrt();
    for (v, b) in v0.iter_mut().zip(b0.iter_mut()) {
        *v /= nrm;
        *b /= nrm;
    }
    let mut vs = vec![v0];
    let mut bs = vec![b0];
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    for j in 0..steps {
        let mut w = a.apply_vec(&bs[j]);
        let alpha = dot(&w, &bs[j]);
        alphas.push(alpha);
        // full reorthogonalization against the B-orthonormal basis
        for _ in 0..2 {
            for (v, b) in vs.iter().zip(&bs) {
                let c = dot(&w, b);
                for (w, v) in w.iter_mut().zip(v) {
                    *w -= c * v;
                }
            }
        }
        let bw = apply_b(&w);
        let beta2 = dot(&w, &bw);
        if !(beta2 > 0.0) || j + 1 == steps {
            break;
        }
        let beta = beta2.sqrt();
        betas.push(beta);
        vs.push(w.iter().map(|x| x / beta).collect());
        bs.push(bw.iter().map(|x| x / beta).collect());
    }
    let m = alphas.len();
    let mut t = Mat::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i + 1, i)] = betas[i];
            t[(i, i + 1)] = betas[i];
        }
    }
    t.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| KrylovError::EigenFailure)
}

fn pseudorandom(n: usize, seed: u64) -> Vec<f64> {
    let mut s = seed.wrapping_mul(0x2545f4914f6cdd1d).wrapping_add(1);
    (0..n)
        .map(|_| {
            s = s.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = s;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^= z >> 31;
            (z as f64 / u64::MAX as f64) * 2.0 - 1.0
        })
        .collect()
}

const LANCZOS_STEPS: usize = 250;

/// Largest generalized eigenvalue of the pencil `A x = lambda M x` for
/// symmetric `A` and SPD `M`, by Lanczos in the `M^{-1}` inner product.
pub fn pencil_lambda_max(a: &SparseMatrix, m: &SparseMatrix) -> Result<f64, KrylovError> {
    let chol = SparseCholesky::new(m).map_err(|_| KrylovError::EigenFailure)?;
    let solve = |r: &[f64]| chol.solve_vec(r);
    let eigs = lanczos_pencil(a, &solve, LANCZOS_STEPS, 3)?;
    eigs.last().copied().ok_or(KrylovError::EigenFailure)
}

/// Spectral condition number of `BA` (or of `A` when no preconditioner is
/// given). Dense eigensolves at or below `cap`; Lanczos estimates above,
/// except for nonsymmetric `B` where no estimator applies.
pub fn condition_number(
    a: &SparseMatrix,
    precond: Option<&Preconditioner>,
    cap: usize,
) -> Result<Kappa, KrylovError> {
    let n = a.nrows();
    match precond {
        None => {
            if n <= cap {
                let eigs = a
                    .to_dense()
                    .self_adjoint_eigenvalues(Side::Lower)
                    .map_err(|_| KrylovError::EigenFailure)?;
                return Ok(Kappa {
                    value: abs_ratio(&eigs),
                    estimate: false,
                });
            }
            // SPD A: lambda_max by plain Lanczos, lambda_min by
            // shift-invert through a sparse factorization
            let ident = |r: &[f64]| r.to_vec();
            let eigs = lanczos_pencil(a, &ident, LANCZOS_STEPS, 1)?;
            let lmax = eigs[eigs.len() - 1];
            let chol = SparseCholesky::new(a).map_err(|_| KrylovError::EigenFailure)?;
            let lmin = 1.0 / extremal_inverse(&chol, n, LANCZOS_STEPS)?;
            Ok(Kappa {
                value: lmax / lmin,
                estimate: true,
            })
        }
        Some(p) if p.is_symmetric() => {
            if n <= cap {
                let b = dense_of(p);
                let eigs = preconditioned_spectrum_dense(a, &b)?;
                return Ok(Kappa {
                    value: abs_ratio(&eigs),
                    estimate: false,
                });
            }
            if let Some(d) = p.as_diagonal() {
                // diagonal B: symmetric scaling A_hat = D^1/2 A D^1/2 with
                // D = sqrt of the preconditioner entries
                let sq: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
                let mut trip = Vec::with_capacity(a.nnz());
                for (i, j, v) in a.iter() {
                    trip.push((i, j, sq[i] * v * sq[j]));
                }
                let scaled = SparseMatrix::from_triplets(n, n, &trip);
                let ident = |r: &[f64]| r.to_vec();
                let eigs = lanczos_pencil(&scaled, &ident, LANCZOS_STEPS, 2)?;
                let lmax = eigs[eigs.len() - 1];
                let chol = SparseCholesky::new(&scaled).map_err(|_| KrylovError::EigenFailure)?;
                let lmin = 1.0 / extremal_inverse(&chol, n, LANCZOS_STEPS)?;
                return Ok(Kappa {
                    value: lmax / lmin,
                    estimate: true,
                });
            }
            // general SPD B (auxiliary space preconditioner): the spectrum
            // of BA is compact, so both ends come from one Lanczos run
            let apply_b = |r: &[f64]| p.apply_vec(r);
            let eigs = lanczos_pencil(a, &apply_b, LANCZOS_STEPS, 3)?;
            Ok(Kappa {
                value: abs_ratio(&eigs),
                estimate: true,
            })
        }
        Some(p) => {
            if n > cap {
                return Err(KrylovError::DimensionExceedsCap { dim: n, cap });
            }
            let mut ba = Mat::zeros(n, n);
            let mut e = vec![0.0; n];
            for j in 0..n {
                e[j] = 1.0;
                let col = p.apply_vec(&a.apply_vec(&e));
                e[j] = 0.0;
                for i in 0..n {
                    ba[(i, j)] = col[i];
                }
            }
            let eigs = ba.eigenvalues().map_err(|_| KrylovError::EigenFailure)?;
            let moduli: Vec<f64> = eigs.iter().map(|z| z.norm()).collect();
            let lo = moduli.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = moduli.iter().cloned().fold(0.0, f64::max);
            Ok(Kappa {
                value: hi / lo,
                estimate: false,
            })
        }
    }
}

/// Largest eigenvalue of the inverse via Lanczos on factorized solves.
fn extremal_inverse(
    chol: &SparseCholesky,
    n: usize,
    steps: usize,
) -> Result<f64, KrylovError> {
    // Lanczos on the operator r -> A^-1 r in the Euclidean inner product
    let mut v = pseudorandom(n, 7);
    let nrm = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nrm);
    let mut basis = vec![v];
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    for j in 0..steps.min(n) {
        let mut w = chol.solve_vec(&basis[j]);
        let alpha = dot(&w, &basis[j]);
        alphas.push(alpha);
        for _ in 0..2 {
            for v in &basis {
                let c = dot(&w, v);
                for (w, v) in w.iter_mut().zip(v) {
                    *w -= c * v;
                }
            }
        }
        let beta = norm2(&w);
        if beta <= f64::EPSILON || j + 1 == steps.min(n) {
            break;
        }
        betas.push(beta);
        basis.push(w.iter().map(|x| x / beta).collect());
    }
    let m = alphas.len();
    let mut t = Mat::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i + 1, i)] = betas[i];
            t[(i, i + 1)] = betas[i];
        }
    }
    let eigs = t
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| KrylovError::EigenFailure)?;
    Ok(eigs[eigs.len() - 1])
}
