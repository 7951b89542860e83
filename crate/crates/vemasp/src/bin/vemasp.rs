//! Command-line front end: mesh generation, single solves, and the four
//! standard experiment sweeps.
//!
//! Exit codes: 0 on success, 1 on numerical failure (validation errors,
//! non-convergence), 2 on usage errors.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vemasp::experiments::{
    dense_cap_from_env, run_on_mesh, sweep, to_markdown, MeshSpec, PrecondKind, ReportRow,
    RunConfig, CSV_HEADER,
};
use vemasp::mesh::{aspect_ratio, read_mesh, validate, write_mesh, PolygonalMesh};
use vemasp::precond::SmootherKind;
use vemasp::problems::SystemKind;

#[derive(Parser)]
#[command(name = "vemasp", version, about = "Mixed virtual element solvers with nodal auxiliary space preconditioners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh and write it as JSON.
    Mesh(MeshArgs),
    /// Solve the H(div) projection problem on one mesh.
    Project(SolveArgs),
    /// Solve the Darcy saddle-point problem on one mesh.
    Darcy(SolveArgs),
    /// Run a full experiment sweep (tables 1-4).
    Sweep(SweepArgs),
}

#[derive(Args)]
struct MeshArgs {
    /// Mesh family: diamond, triangle, cut, or cutdiamond.
    #[arg(long = "type", value_name = "FAMILY")]
    family: String,
    /// Grid size.
    #[arg(long = "N")]
    n: usize,
    /// Cut offset (required for --type cut; the cut line is y = 1/2 + eps).
    #[arg(long)]
    eps: Option<f64>,
    /// Output path for the mesh JSON.
    #[arg(long)]
    out: PathBuf,
    /// Print a validation report; hard failures exit 1.
    #[arg(long)]
    validate: bool,
}

#[derive(Args)]
struct SolveArgs {
    /// Mesh file path, or a generator spec such as diamond:4, triangle:16,
    /// or cut:16:1e-6.
    #[arg(long)]
    mesh: String,
    /// Data set: f1 or f2.
    #[arg(long, default_value = "f1")]
    data: String,
    /// Preconditioner: none, diag, add, or mult.
    #[arg(long, default_value = "add")]
    precond: String,
    /// Smoother: diag or stab.
    #[arg(long, default_value = "diag")]
    smoother: String,
    /// GMRES relative residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Compute the condition number (dense below the cap, Lanczos estimate
    /// above it where applicable).
    #[arg(long)]
    cond: bool,
    /// CSV report path; the row is appended (header written if new).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Which sweep to run: 1 or 3 (projection), 2 or 4 (Darcy).
    #[arg(long)]
    table: u8,
    /// GMRES relative residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
    /// Optional Markdown rendering of the same rows.
    #[arg(long)]
    markdown: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Mesh(args) => cmd_mesh(args),
        Command::Project(args) => cmd_solve(args, SystemKind::Projection),
        Command::Darcy(args) => cmd_solve(args, SystemKind::Darcy),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn cmd_mesh(args: MeshArgs) -> Result<ExitCode, String> {
    let spec = match args.family.as_str() {
        "diamond" => MeshSpec::Diamond(args.n),
        "triangle" => MeshSpec::Triangle(args.n),
        "cut" => {
            let eps = args.eps.ok_or("--eps is required for --type cut")?;
            MeshSpec::Cut(args.n, eps)
        }
        "cutdiamond" => {
            let eps = args.eps.ok_or("--eps is required for --type cutdiamond")?;
            MeshSpec::CutDiamond(args.n, eps)
        }
        other => {
            eprintln!(
                "error: unknown mesh type {other:?} (expected diamond, triangle, cut, or cutdiamond)"
            );
            return Ok(ExitCode::from(2));
        }
    };
    let mesh = spec.build().map_err(|e| e.to_string())?;
    write_mesh(&mesh, &args.out).map_err(|e| e.to_string())?;
    let alpha = aspect_ratio(&mesh).map_err(|e| e.to_string())?;
    println!(
        "wrote {} ({} vertices, {} facets, {} cells, alpha = {:.2e})",
        args.out.display(),
        mesh.vertices.len(),
        mesh.facets.len(),
        mesh.cells.len(),
        alpha
    );
    if args.validate {
        let report = validate(&mesh);
        println!("{report:#?}");
        if !report.is_valid() {
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Resolves `--mesh` as a generator spec first, then as a file path.
fn resolve_mesh(arg: &str) -> Result<(PolygonalMesh, String, usize, Option<f64>), String> {
    if let Ok(spec) = MeshSpec::parse(arg) {
        let mesh = spec.build().map_err(|e| e.to_string())?;
        return Ok((mesh, spec.label().to_string(), spec.n(), spec.eps()));
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(format!(
            "{arg:?} is neither a generator spec (diamond:N, triangle:N, cut:N:eps, cutdiamond:N:eps) nor a file"
        ));
    }
    let mesh = read_mesh(path).map_err(|e| e.to_string())?;
    Ok((mesh, arg.to_string(), 0, None))
}

fn append_row(path: &Path, row: &ReportRow) -> Result<(), String> {
    let fresh = !path.exists();
    let mut file = File::options()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| e.to_string())?;
    if fresh {
        writeln!(file, "{CSV_HEADER}").map_err(|e| e.to_string())?;
    }
    writeln!(file, "{}", row.to_csv()).map_err(|e| e.to_string())
}

fn cmd_solve(args: SolveArgs, kind: SystemKind) -> Result<ExitCode, String> {
    let smoother = match args.smoother.as_str() {
        "diag" => SmootherKind::Diag,
        "stab" => SmootherKind::Stab,
        other => {
            eprintln!("error: unknown smoother {other:?} (expected diag or stab)");
            return Ok(ExitCode::from(2));
        }
    };
    let precond = match PrecondKind::parse(&args.precond) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(2));
        }
    };
    let (mesh, label, n, eps) = resolve_mesh(&args.mesh)?;
    let cfg = RunConfig {
        tol: args.tol,
        smoother,
        dense_cap: dense_cap_from_env(),
        compute_kappa: args.cond,
        ..Default::default()
    };
    let suite = match kind {
        SystemKind::Projection => "project",
        SystemKind::Darcy => "darcy",
    };
    let row = run_on_mesh(suite, &mesh, &label, n, eps, kind, &args.data, precond, &cfg)
        .map_err(|e| e.to_string())?;
    match row.kappa {
        Some(k) if row.kappa_is_estimate => println!("kappa ~= {k:.4e} (Lanczos estimate)"),
        Some(k) => println!("kappa = {k:.4e}"),
        None if args.cond => println!("kappa omitted (above dense cap)"),
        None => {}
    }
    println!(
        "ndof = {}, iters = {}, converged = {}, {:.3} s",
        row.ndof, row.iters, row.converged, row.seconds
    );
    let converged = row.converged;
    if let Some(report) = &args.report {
        append_row(report, &row)?;
    }
    Ok(if converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode, String> {
    if !(1..=4).contains(&args.table) {
        eprintln!("error: --table must be 1, 2, 3, or 4");
        return Ok(ExitCode::from(2));
    }
    let cfg = RunConfig {
        tol: args.tol,
        dense_cap: dense_cap_from_env(),
        ..Default::default()
    };
    let rows = sweep(args.table, &cfg).map_err(|e| e.to_string())?;
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    std::fs::write(&args.out, &out).map_err(|e| e.to_string())?;
    if let Some(md) = &args.markdown {
        std::fs::write(md, to_markdown(&rows)).map_err(|e| e.to_string())?;
    }
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    if rows.iter().all(|r| r.converged) {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: some solves did not converge");
        Ok(ExitCode::from(1))
    }
}
