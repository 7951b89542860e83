//! Experiment sweeps: condition numbers and GMRES iteration counts on the
//! diamond refinement family and the high-aspect-ratio cut meshes, with
//! CSV and Markdown reporting.

use std::fmt::Write as _;
use std::time::Instant;

use crate::krylov::{condition_number, gmres, KrylovError};
use crate::mesh::{
    aspect_ratio, cut_with_line, generate_diamond, generate_triangle_grid, MeshError,
    PolygonalMesh,
};
use crate::precond::{
    build_additive, build_darcy_block, build_diag_reference, build_multiplicative,
    PrecondError, Preconditioner, SmootherKind,
};
use crate::problems::{
    assemble_darcy, assemble_projection_system, data_library, AssembledSystem, ProblemError,
    SystemKind,
};

/// Default dense-eigensolve cap; override with `VEMASP_DENSE_CAP`.
pub const DEFAULT_DENSE_CAP: usize = 8000;

/// Reads the dense cap from the environment, falling back to the default.
pub fn dense_cap_from_env() -> usize {
    std::env::var("VEMASP_DENSE_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_DENSE_CAP)
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Precond(#[from] PrecondError),
    #[error(transparent)]
    Krylov(#[from] KrylovError),
    #[error(
        "invalid mesh spec {0:?} (expected diamond:N, triangle:N, cut:N:eps, or cutdiamond:N:eps)"
    )]
    BadMeshSpec(String),
    #[error("unknown preconditioner {0:?} (expected none, diag, add, or mult)")]
    BadPrecond(String),
    #[error("solver did not converge ({0} iterations)")]
    NoConvergence(usize),
}

/// A mesh family member in a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshSpec {
    Diamond(usize),
    Triangle(usize),
    /// Triangle grid of the given size, cut at `y = 1/2 + eps`.
    Cut(usize, f64),
    /// Diamond mesh of the given size, cut at `y = 1/2 + eps`.
    CutDiamond(usize, f64),
}

impl MeshSpec {
    /// Parses `diamond:N`, `triangle:N`, `cut:N:eps`, or `cutdiamond:N:eps`.
    pub fn parse(s: &str) -> Result<Self, ExperimentError> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || ExperimentError::BadMeshSpec(s.to_string());
        match parts.as_slice() {
            ["diamond", n] => Ok(MeshSpec::Diamond(n.parse().map_err(|_| bad())?)),
            ["triangle", n] => Ok(MeshSpec::Triangle(n.parse().map_err(|_| bad())?)),
            ["cut", n, eps] => Ok(MeshSpec::Cut(
                n.parse().map_err(|_| bad())?,
                eps.parse().map_err(|_| bad())?,
            )),
            ["cutdiamond", n, eps] => Ok(MeshSpec::CutDiamond(
                n.parse().map_err(|_| bad())?,
                eps.parse().map_err(|_| bad())?,
            )),
            _ => Err(bad()),
        }
    }

    pub fn build(self) -> Result<PolygonalMesh, ExperimentError> {
        match self {
            MeshSpec::Diamond(n) => Ok(generate_diamond(n)),
            MeshSpec::Triangle(n) => Ok(generate_triangle_grid(n)),
            MeshSpec::Cut(n, eps) => {
                Ok(cut_with_line(&generate_triangle_grid(n), 0.5 + eps)?)
            }
            MeshSpec::CutDiamond(n, eps) => {
                Ok(cut_with_line(&generate_diamond(n), 0.5 + eps)?)
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            MeshSpec::Diamond(_) => "diamond",
            MeshSpec::Triangle(_) => "triangle",
            MeshSpec::Cut(..) => "cut",
            MeshSpec::CutDiamond(..) => "cutdiamond",
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            MeshSpec::Diamond(n)
            | MeshSpec::Triangle(n)
            | MeshSpec::Cut(n, _)
            | MeshSpec::CutDiamond(n, _) => n,
        }
    }

    pub fn eps(&self) -> Option<f64> {
        match *self {
            MeshSpec::Cut(_, eps) | MeshSpec::CutDiamond(_, eps) => Some(eps),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondKind {
    None,
    Diag,
    Add,
    Mult,
}

impl PrecondKind {
    pub fn parse(s: &str) -> Result<Self, ExperimentError> {
        match s {
            "none" => Ok(PrecondKind::None),
            "diag" => Ok(PrecondKind::Diag),
            "add" => Ok(PrecondKind::Add),
            "mult" => Ok(PrecondKind::Mult),
            other => Err(ExperimentError::BadPrecond(other.to_string())),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PrecondKind::None => "none",
            PrecondKind::Diag => "diag",
            PrecondKind::Add => "add",
            PrecondKind::Mult => "mult",
        }
    }
}

/// One row of an experiment report; one solve on one mesh with one
/// preconditioner.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub suite: String,
    pub mesh: String,
    pub n: usize,
    pub eps: Option<f64>,
    pub ndof: usize,
    pub alpha: f64,
    pub precond: String,
    pub smoother: String,
    pub tol: f64,
    /// `None` when the condition number is omitted (above the dense cap
    /// with no applicable estimator).
    pub kappa: Option<f64>,
    pub kappa_is_estimate: bool,
    pub iters: usize,
    pub converged: bool,
    pub seconds: f64,
}

pub const CSV_HEADER: &str =
    "suite,mesh,N,eps,ndof,alpha,precond,smoother,tol,kappa,iters,converged,seconds";

impl ReportRow {
    pub fn to_csv(&self) -> String {
        let eps = self.eps.map(|e| format!("{e:e}")).unwrap_or_default();
        let kappa = self.kappa.map(|k| format!("{k:.6e}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{:.6e},{},{},{:e},{},{},{},{:.3}",
            self.suite,
            self.mesh,
            self.n,
            eps,
            self.ndof,
            self.alpha,
            self.precond,
            self.smoother,
            self.tol,
            kappa,
            self.iters,
            self.converged,
            self.seconds
        )
    }
}

/// Renders rows as a Markdown table (one row per solve).
pub fn to_markdown(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    out.push_str("| mesh | N | eps | #dof | alpha | precond | kappa | iters |\n");
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    for r in rows {
        let eps = r.eps.map(|e| format!("{e:.0e}")).unwrap_or_else(|| "—".into());
        let kappa = match r.kappa {
            Some(k) if r.kappa_is_estimate => format!("{k:.3e} (est)"),
            Some(k) => format!("{k:.3e}"),
            None => "—".into(),
        };
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {:.2e} | {} | {} | {} |",
            r.mesh, r.n, eps, r.ndof, r.alpha, r.precond, kappa, r.iters
        );
    }
    out
}

/// Configuration of a single run.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub tol: f64,
    pub maxit: usize,
    pub smoother: SmootherKind,
    pub dense_cap: usize,
    pub compute_kappa: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            maxit: 2000,
            smoother: SmootherKind::Diag,
            dense_cap: DEFAULT_DENSE_CAP,
            compute_kappa: true,
        }
    }
}

fn build_preconditioner(
    kind: PrecondKind,
    system: &AssembledSystem,
    mesh: &PolygonalMesh,
    smoother: SmootherKind,
) -> Result<Option<Preconditioner>, ExperimentError> {
    let facet_matrix = |sys: &AssembledSystem| -> Result<crate::sparse::SparseMatrix, ExperimentError> {
        match sys.kind {
            SystemKind::Projection => Ok(sys.matrix.clone()),
            // the auxiliary preconditioner for the Darcy velocity block is
            // built on the full H(div) operator
            SystemKind::Darcy => Ok(crate::problems::assemble_projection(mesh)?),
        }
    };
    let wrap = |sys: &AssembledSystem, facet: Preconditioner| match sys.kind {
        SystemKind::Projection => facet,
        SystemKind::Darcy => build_darcy_block(facet, sys.cell_areas.clone()),
    };
    Ok(match kind {
        PrecondKind::None => None,
        PrecondKind::Diag => Some(build_diag_reference(system)?),
        PrecondKind::Add => {
            let a = facet_matrix(system)?;
            Some(wrap(system, build_additive(&a, mesh, smoother)?))
        }
        PrecondKind::Mult => {
            let a = facet_matrix(system)?;
            Some(wrap(system, build_multiplicative(&a, mesh, smoother)?))
        }
    })
}

fn kappa_of(
    system: &AssembledSystem,
    precond: Option<&Preconditioner>,
    cap: usize,
) -> Result<(Option<f64>, bool), ExperimentError> {
    let n = system.matrix.nrows();
    let symmetric = precond.map(|p| p.is_symmetric()).unwrap_or(true);
    if n > cap {
        // above the cap: Lanczos estimates exist only for the SPD
        // projection operator; Darcy and nonsymmetric values are omitted
        if system.kind == SystemKind::Darcy || !symmetric {
            return Ok((None, false));
        }
    }
    match condition_number(&system.matrix, precond, cap) {
        Ok(k) => Ok((Some(k.value), k.estimate)),
        Err(KrylovError::DimensionExceedsCap { .. }) => Ok((None, false)),
        Err(e) => Err(e.into()),
    }
}

/// Runs one solve and fills in a report row.
pub fn run_single(
    suite: &str,
    spec: MeshSpec,
    kind: SystemKind,
    data: &str,
    precond_kind: PrecondKind,
    cfg: &RunConfig,
) -> Result<ReportRow, ExperimentError> {
    let mesh = spec.build()?;
    run_on_mesh(
        suite,
        &mesh,
        spec.label(),
        spec.n(),
        spec.eps(),
        kind,
        data,
        precond_kind,
        cfg,
    )
}

/// Runs one solve on an already-built mesh (e.g. loaded from a file).
#[allow(clippy::too_many_arguments)]
pub fn run_on_mesh(
    suite: &str,
    mesh: &PolygonalMesh,
    mesh_label: &str,
    n: usize,
    eps: Option<f64>,
    kind: SystemKind,
    data: &str,
    precond_kind: PrecondKind,
    cfg: &RunConfig,
) -> Result<ReportRow, ExperimentError> {
    let start = Instant::now();
    let (f, g) = data_library(data)?;
    let system = match kind {
        SystemKind::Projection => assemble_projection_system(mesh, &f)?,
        SystemKind::Darcy => assemble_darcy(mesh, &f, &g)?,
    };
    let precond = build_preconditioner(precond_kind, &system, mesh, cfg.smoother)?;
    let (kappa, kappa_is_estimate) = if cfg.compute_kappa {
        kappa_of(&system, precond.as_ref(), cfg.dense_cap)?
    } else {
        (None, false)
    };
    let result = gmres(
        &system.matrix,
        precond.as_ref(),
        &system.rhs,
        cfg.tol,
        cfg.maxit,
    );
    Ok(ReportRow {
        suite: suite.to_string(),
        mesh: mesh_label.to_string(),
        n,
        eps,
        ndof: system.matrix.nrows(),
        alpha: aspect_ratio(mesh)?,
        precond: precond_kind.label().to_string(),
        smoother: match cfg.smoother {
            SmootherKind::Diag => "diag".to_string(),
            SmootherKind::Stab => "stab".to_string(),
        },
        tol: cfg.tol,
        kappa,
        kappa_is_estimate,
        iters: result.iterations(),
        converged: result.converged,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// The background family of the cut-mesh suites (diamond mesh level).
pub const CUT_BACKGROUND_N: usize = 8;
/// The cut offsets of the aspect-ratio suites (`None` = uncut baseline).
pub const CUT_EPSILONS: [Option<f64>; 5] =
    [None, Some(1e-2), Some(1e-4), Some(1e-6), Some(1e-8)];
/// The diamond refinement levels of the mesh-size suites.
pub const DIAMOND_LEVELS: [usize; 4] = [4, 8, 16, 32];

/// Runs one of the four standard sweeps.
pub fn sweep(table: u8, cfg: &RunConfig) -> Result<Vec<ReportRow>, ExperimentError> {
    let mut rows = Vec::new();
    let suite = format!("table{table}");
    match table {
        1 | 2 => {
            let kind = if table == 1 {
                SystemKind::Projection
            } else {
                SystemKind::Darcy
            };
            for n in DIAMOND_LEVELS {
                for pk in [
                    PrecondKind::None,
                    PrecondKind::Diag,
                    PrecondKind::Add,
                    PrecondKind::Mult,
                ] {
                    rows.push(run_single(
                        &suite,
                        MeshSpec::Diamond(n),
                        kind,
                        "f1",
                        pk,
                        cfg,
                    )?);
                }
            }
        }
        3 | 4 => {
            let kind = if table == 3 {
                SystemKind::Projection
            } else {
                SystemKind::Darcy
            };
            let preconds: &[PrecondKind] = if table == 3 {
                &[PrecondKind::None, PrecondKind::Add]
            } else {
                &[PrecondKind::Diag, PrecondKind::Add]
            };
            for eps in CUT_EPSILONS {
                let spec = match eps {
                    None => MeshSpec::Diamond(CUT_BACKGROUND_N),
                    Some(e) => MeshSpec::CutDiamond(CUT_BACKGROUND_N, e),
                };
                for &pk in preconds {
                    rows.push(run_single(&suite, spec, kind, "f2", pk, cfg)?);
                }
            }
        }
        _ => {
            return Err(ExperimentError::BadMeshSpec(format!(
                "table {table} (expected 1..=4)"
            )))
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_spec_parsing() {
        assert_eq!(MeshSpec::parse("diamond:4").unwrap(), MeshSpec::Diamond(4));
        assert_eq!(MeshSpec::parse("triangle:16").unwrap(), MeshSpec::Triangle(16));
        assert_eq!(
            MeshSpec::parse("cut:16:1e-6").unwrap(),
            MeshSpec::Cut(16, 1e-6)
        );
        assert!(MeshSpec::parse("hex:3").is_err());
        assert!(MeshSpec::parse("diamond").is_err());
    }

    #[test]
    fn csv_row_shape() {
        let cfg = RunConfig {
            dense_cap: 8000,
            ..Default::default()
        };
        let row = run_single(
            "smoke",
            MeshSpec::Diamond(1),
            SystemKind::Projection,
            "f1",
            PrecondKind::Add,
            &cfg,
        )
        .unwrap();
        let csv = row.to_csv();
        assert_eq!(csv.split(',').count(), CSV_HEADER.split(',').count());
        assert!(row.converged);
        assert!(row.kappa.is_some() && !row.kappa_is_estimate);
        assert_eq!(row.ndof, 24);
        // deterministic output
        let row2 = run_single(
            "smoke",
            MeshSpec::Diamond(1),
            SystemKind::Projection,
            "f1",
            PrecondKind::Add,
            &cfg,
        )
        .unwrap();
        let strip = |s: &str| s.rsplit_once(',').unwrap().0.to_string();
        assert_eq!(strip(&csv), strip(&row2.to_csv()));
    }

    #[test]
    fn darcy_above_cap_omits_kappa() {
        let cfg = RunConfig {
            dense_cap: 100,
            tol: 1e-6,
            ..Default::default()
        };
        let row = run_single(
            "smoke",
            MeshSpec::Diamond(2),
            SystemKind::Darcy,
            "f1",
            PrecondKind::Add,
            &cfg,
        )
        .unwrap();
        assert!(row.kappa.is_none());
        assert!(row.converged);
    }

    #[test]
    fn markdown_rendering() {
        let cfg = RunConfig::default();
        let row = run_single(
            "smoke",
            MeshSpec::Cut(2, 1e-2),
            SystemKind::Projection,
            "f2",
            PrecondKind::None,
            &cfg,
        )
        .unwrap();
        let md = to_markdown(&[row]);
        assert!(md.contains("| cut | 2 | 1e-2 |"));
    }
}
