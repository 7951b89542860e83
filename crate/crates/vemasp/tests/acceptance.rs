//! Acceptance gate: ten criteria covering the discrete complex, local
//! consistency, the four reference sweeps, smoother admissibility, the
//! inverse inequality, and the multiplicative variant. Each test prints
//! exactly one `criterion N: PASS/FAIL` line (visible with
//! `--nocapture`, or automatically on failure).

use std::time::Instant;

use vemasp::complex_ops::{curl_matrix, interpolate_facet, interpolate_nodal, verify_complex};
use vemasp::experiments::{
    run_single, MeshSpec, PrecondKind, ReportRow, RunConfig, CUT_BACKGROUND_N, CUT_EPSILONS,
    DIAMOND_LEVELS,
};
use vemasp::krylov::pencil_lambda_max;
use vemasp::mesh::{cell_geometry, cut_with_line, Point};
use vemasp::precond::{
    build_multiplicative_with_stages, smoother_diag, smoother_stab, SparseCholesky,
};
use vemasp::problems::{assemble_facet_mass, assemble_projection, SystemKind};
use vemasp::vem_local::{
    facet_mass, nodal_stiffness, rt0_dofs, rt0_inner_product, CellView,
};
use vemasp::{generate_diamond, LinearOperator, SparseMatrix};

fn verdict(id: usize, name: &str, ok: bool, detail: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("criterion {id:2} [{tag}] {name}: {detail}");
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

fn fmt_e(vals: &[f64]) -> String {
    let parts: Vec<String> = vals.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn max_min(vals: &[f64]) -> (f64, f64) {
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    (hi, lo)
}

fn diamond_runs(
    kind: SystemKind,
    preconds: &[PrecondKind],
    cfg: &RunConfig,
) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for n in DIAMOND_LEVELS {
        for &pk in preconds {
            rows.push(
                run_single("acceptance", MeshSpec::Diamond(n), kind, "f1", pk, cfg).unwrap(),
            );
        }
    }
    rows
}

fn cut_runs(kind: SystemKind, preconds: &[PrecondKind], cfg: &RunConfig) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for eps in CUT_EPSILONS {
        let spec = match eps {
            None => MeshSpec::Diamond(CUT_BACKGROUND_N),
            Some(e) => MeshSpec::CutDiamond(CUT_BACKGROUND_N, e),
        };
        for &pk in preconds {
            rows.push(run_single("acceptance", spec, kind, "f2", pk, cfg).unwrap());
        }
    }
    rows
}

#[test]
fn criterion_01_complex_identities() {
    let start = Instant::now();
    let mut meshes = vec![generate_diamond(1), generate_diamond(2), generate_diamond(4)];
    meshes.push(cut_with_line(&generate_diamond(2), 0.5 + 1e-6).unwrap());
    let mut ok = true;
    let mut detail = String::new();
    for mesh in &meshes {
        let rep = verify_complex(mesh);
        ok &= rep.div_curl_zero && rep.exact;
        detail.push_str(&format!(
            "[rank C = {} (nodes {}), rank D = {} (cells {}), D C = 0: {}] ",
            rep.rank_curl,
            rep.dofs.nodal,
            rep.rank_div,
            rep.dofs.cell,
            rep.div_curl_zero
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 10.0;
    detail.push_str(&format!("in {secs:.1}s"));
    verdict(1, "complex identities", ok, &detail);
}

#[test]
fn criterion_02_commuting_diagram() {
    let mesh = generate_diamond(4);
    let curl = curl_matrix(&mesh);
    let pi = std::f64::consts::PI;
    let fields: Vec<(Box<dyn Fn(Point) -> f64>, Box<dyn Fn(Point) -> [f64; 2]>)> = vec![
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
    let mut err = 0.0f64;
    for (v, curl_v) in &fields {
        let lhs = interpolate_facet(&mesh, curl_v.as_ref(), 11);
        let rhs = curl.apply_vec(&interpolate_nodal(&mesh, v.as_ref()));
        for (a, b) in lhs.iter().zip(&rhs) {
            err = err.max((a - b).abs());
        }
    }
    verdict(
        2,
        "commuting diagram",
        err <= 1e-10,
        &format!("max |interp(curl v) - C interp(v)| = {err:.2e}"),
    );
}

#[test]
fn criterion_03_patch_and_consistency() {
    let mesh = generate_diamond(2);
    let mut worst = 0.0f64;
    for k in 0..9 {
        let cell = CellView::new(&mesh, k).unwrap();

        // facet mass patch test against exact RT0-type inner products
        let fm = facet_mass(&cell).unwrap();
        let fields = [([1.0, 0.0], 0.0), ([0.0, 1.0], 0.0), ([0.3, -0.2], 1.5)];
        for &(c1, g1) in &fields {
            for &(c2, g2) in &fields {
                let d1 = rt0_dofs(&cell, c1, g1);
                let d2 = rt0_dofs(&cell, c2, g2);
                let mut got = 0.0;
                for i in 0..d1.len() {
                    for j in 0..d2.len() {
                        got += d1[i] * fm.mass[(i, j)] * d2[j];
                    }
                }
                let exact = rt0_inner_product(&cell, c1, g1, c2, g2);
                worst = worst.max((got - exact).abs() / exact.abs().max(1e-3));
            }
        }

        // nodal P1 stiffness consistency
        let ks = nodal_stiffness(&cell).unwrap();
        for (a, b) in [(1.0, 0.0), (0.0, 1.0), (0.7, -0.3)] {
            let dofs: Vec<f64> = cell.points.iter().map(|p| a * p[0] + b * p[1]).collect();
            let exact = cell.geometry.area * (a * a + b * b);
            let mut got = 0.0;
            for i in 0..dofs.len() {
                for j in 0..dofs.len() {
                    got += dofs[i] * ks[(i, j)] * dofs[j];
                }
            }
            worst = worst.max((got - exact).abs() / exact.abs().max(1.0));
        }
    }
    verdict(
        3,
        "patch/consistency tests",
        worst <= 1e-12,
        &format!("worst relative error {worst:.2e} over all template cells"),
    );
}

#[test]
fn criterion_04_mesh_size_projection() {
    let start = Instant::now();
    // Lanczos estimates beyond N = 8 keep the whole sweep inside the
    // five-minute budget; dense eigensolves at 4704 dofs alone take longer.
    let cfg = RunConfig {
        dense_cap: 2000,
        ..RunConfig::default()
    };
    let rows = diamond_runs(
        SystemKind::Projection,
        &[PrecondKind::None, PrecondKind::Add],
        &cfg,
    );
    let plain: Vec<&ReportRow> = rows.iter().filter(|r| r.precond == "none").collect();
    let add: Vec<&ReportRow> = rows.iter().filter(|r| r.precond == "add").collect();

    let kba: Vec<f64> = add.iter().map(|r| r.kappa.unwrap()).collect();
    let (hi, lo) = max_min(&kba);
    let mut ok = kba.iter().all(|&k| (3.5..=6.0).contains(&k)) && hi / lo <= 1.10;

    let ka: Vec<f64> = plain.iter().map(|r| r.kappa.unwrap()).collect();
    for w in ka.windows(2) {
        let growth = w[1] / w[0];
        ok &= (3.5..=4.5).contains(&growth);
    }

    // iteration counts must not grow under refinement: flat or decreasing
    // past the coarsest level, and at most one above the coarsest overall
    let it_add: Vec<usize> = add.iter().map(|r| r.iters).collect();
    ok &= it_add.iter().all(|&i| i <= 25)
        && it_add.windows(2).skip(1).all(|w| w[1] <= w[0])
        && it_add[it_add.len() - 1] <= it_add[0] + 1;
    let it_plain: Vec<usize> = plain.iter().map(|r| r.iters).collect();
    ok &= it_plain.windows(2).all(|w| w[1] > w[0]);
    ok &= rows.iter().all(|r| r.converged);

    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 300.0;
    verdict(
        4,
        "mesh-size sweep, projection",
        ok,
        &format!(
            "kappa(BA) = {kba:.3?}, kappa(A) = {}, iters add = {it_add:?}, \
             iters plain = {it_plain:?}, in {secs:.0}s",
            fmt_e(&ka)
        ),
    );
}

#[test]
fn criterion_05_mesh_size_darcy() {
    let cfg = RunConfig {
        dense_cap: 2000,
        ..RunConfig::default()
    };
    let rows = diamond_runs(SystemKind::Darcy, &[PrecondKind::Add], &cfg);

    let kappas: Vec<f64> = rows.iter().filter_map(|r| r.kappa).collect();
    let (hi, lo) = max_min(&kappas);
    let mut ok = !kappas.is_empty()
        && kappas.iter().all(|&k| (2.5..=4.5).contains(&k))
        && hi / lo <= 1.10;

    // above the dense cap (the largest level) the value must be omitted
    ok &= rows.last().unwrap().kappa.is_none();

    let iters: Vec<usize> = rows.iter().map(|r| r.iters).collect();
    let imax = *iters.iter().max().unwrap();
    let imin = *iters.iter().min().unwrap();
    ok &= imax <= 50 && imax - imin <= 6;
    ok &= rows.iter().all(|r| r.converged);
    verdict(
        5,
        "mesh-size sweep, Darcy",
        ok,
        &format!(
            "kappa(BA) = {kappas:.3?} (omitted at N = {}), iters = {iters:?}",
            rows.last().unwrap().n
        ),
    );
}

#[test]
fn criterion_06_aspect_ratio_projection() {
    let cfg = RunConfig::default();
    let rows = cut_runs(
        SystemKind::Projection,
        &[PrecondKind::None, PrecondKind::Add],
        &cfg,
    );
    let plain: Vec<&ReportRow> = rows.iter().filter(|r| r.precond == "none").collect();
    let add: Vec<&ReportRow> = rows.iter().filter(|r| r.precond == "add").collect();

    // baseline aspect ratio is exactly 4; cut meshes track the reference
    // values within a factor of 2
    let reference_alpha = [4.00, 7.94, 6.27e2, 6.25e4, 6.25e6];
    let mut ok = (plain[0].alpha - 4.0).abs() < 1e-9;
    for (r, &a_ref) in plain.iter().zip(&reference_alpha) {
        let ratio = r.alpha / a_ref;
        ok &= (0.5..=2.0).contains(&ratio);
    }

    let kba: Vec<f64> = add.iter().map(|r| r.kappa.unwrap()).collect();
    let (hi, lo) = max_min(&kba);
    ok &= kba.iter().all(|&k| k <= 7.0) && (hi - lo) / lo <= 0.25;

    let ka_sharpest = plain.last().unwrap().kappa.unwrap();
    ok &= ka_sharpest >= 1e9;

    let it_add: Vec<usize> = add.iter().map(|r| r.iters).collect();
    ok &= it_add.iter().all(|&i| i <= 25);
    ok &= rows.iter().all(|r| r.converged);
    verdict(
        6,
        "aspect-ratio sweep, projection",
        ok,
        &format!(
            "alpha = {}, kappa(BA) = {kba:.3?}, kappa(A) at 1e-8 = {ka_sharpest:.2e}, \
             iters add = {it_add:?}",
            fmt_e(&plain.iter().map(|r| r.alpha).collect::<Vec<_>>())
        ),
    );
}

#[test]
fn criterion_07_aspect_ratio_darcy() {
    let cfg = RunConfig::default();
    let rows = cut_runs(
        SystemKind::Darcy,
        &[PrecondKind::Diag, PrecondKind::Add],
        &cfg,
    );
    let diag: Vec<&ReportRow> = rows.iter().filter(|r| r.precond == "diag").collect();
    let add: Vec<&ReportRow> = rows.iter().filter(|r| r.precond == "add").collect();

    let kba: Vec<f64> = add.iter().map(|r| r.kappa.unwrap()).collect();
    let (hi, lo) = max_min(&kba);
    let mut ok = kba.iter().all(|&k| (2.5..=4.5).contains(&k)) && (hi - lo) / lo <= 0.10;

    let it_add: Vec<usize> = add.iter().map(|r| r.iters).collect();
    ok &= it_add.iter().all(|&i| i <= 45);

    // the diagonal preconditioner degrades on the sharp cuts
    for (d, a) in diag.iter().zip(&add) {
        if d.eps.map(|e| e <= 1e-4).unwrap_or(false) {
            ok &= d.iters > a.iters;
        }
    }
    ok &= add.iter().all(|r| r.converged);
    verdict(
        7,
        "aspect-ratio sweep, Darcy",
        ok,
        &format!(
            "kappa(BA) = {kba:.3?}, iters add = {it_add:?}, iters diag = {:?}",
            diag.iter().map(|r| r.iters).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_08_smoother_admissibility() {
    // Generalized-eigenvalue ratios realizing the norm chain
    // energy <~ D-norm <~ S-norm <~ h^-1-weighted L2, per refinement level.
    let mut r1 = Vec::new();
    let mut r2 = Vec::new();
    let mut r3 = Vec::new();
    for n in DIAMOND_LEVELS {
        let mesh = generate_diamond(n);
        let nf = mesh.facets.len();
        let a = assemble_projection(&mesh).unwrap();
        let m = assemble_facet_mass(&mesh).unwrap();
        let d = a.diagonal();
        let s = smoother_stab(&mesh).diag;
        let h = (0..mesh.cells.len())
            .map(|k| cell_geometry(&mesh, k).unwrap().diameter)
            .fold(0.0f64, f64::max);
        let diag_mat = |v: &[f64]| {
            let trip: Vec<(usize, usize, f64)> =
                v.iter().enumerate().map(|(i, &x)| (i, i, x)).collect();
            SparseMatrix::from_triplets(nf, nf, &trip)
        };
        r1.push(pencil_lambda_max(&a, &diag_mat(&d)).unwrap());
        r2.push(d.iter().zip(&s).map(|(a, b)| a / b).fold(0.0f64, f64::max));
        r3.push(h * h * pencil_lambda_max(&diag_mat(&s), &m).unwrap());
    }
    let drift_ok = |v: &[f64]| {
        let (hi, lo) = max_min(v);
        lo > 0.0 && hi / lo <= 1.1 / 0.9
    };
    let ok = drift_ok(&r1) && drift_ok(&r2) && drift_ok(&r3);
    verdict(
        8,
        "smoother admissibility",
        ok,
        &format!("ratios across levels: energy/D = {r1:.3?}, D/S = {r2:.3?}, S/h-weighted = {r3:.3?}"),
    );
}

#[test]
fn criterion_09_inverse_inequality() {
    // h^2 lambda_max(D^T diag(|K|) D, M_h) bounded across refinement.
    let mut vals = Vec::new();
    for n in DIAMOND_LEVELS {
        let mesh = generate_diamond(n);
        let nf = mesh.facets.len();
        let m = assemble_facet_mass(&mesh).unwrap();
        let h = (0..mesh.cells.len())
            .map(|k| cell_geometry(&mesh, k).unwrap().diameter)
            .fold(0.0f64, f64::max);
        let mut trip = Vec::new();
        for (k, faces) in mesh.cell_facets.iter().enumerate() {
            let area = cell_geometry(&mesh, k).unwrap().area;
            for &(fi, si) in faces {
                for &(fj, sj) in faces {
                    trip.push((fi, fj, (si as f64) * (sj as f64) / area));
                }
            }
        }
        let div_energy = SparseMatrix::from_triplets(nf, nf, &trip);
        vals.push(h * h * pencil_lambda_max(&div_energy, &m).unwrap());
    }
    let (hi, lo) = max_min(&vals);
    let ok = lo > 0.0 && hi / lo <= 1.5;
    verdict(
        9,
        "inverse inequality",
        ok,
        &format!("h^2 lambda_max = {vals:.3?} across levels"),
    );
}

#[test]
fn criterion_10_multiplicative() {
    // (a) one-stage identity telescoping returns the exact inverse
    let mesh = generate_diamond(2);
    let a = assemble_projection(&mesh).unwrap();
    let n = a.nrows();
    let chol = SparseCholesky::new(&a).unwrap();
    let b = build_multiplicative_with_stages(
        &a,
        smoother_diag(&a).unwrap(),
        vec![(SparseMatrix::identity(n), SparseCholesky::new(&a).unwrap())],
    );
    let r: Vec<f64> = (0..n).map(|i| ((i * 7919 + 13) % 101) as f64 / 50.0 - 1.0).collect();
    let z = b.apply_vec(&r);
    let exact = chol.solve_vec(&r);
    let scale = exact.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()));
    let tele_err = z
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max)
        / scale;
    let mut ok = tele_err <= 1e-10;

    // (b) the multiplicative variant meets the additive iteration bands
    let cfg = RunConfig {
        compute_kappa: false,
        ..RunConfig::default()
    };
    let proj = diamond_runs(SystemKind::Projection, &[PrecondKind::Mult], &cfg);
    let darcy = diamond_runs(SystemKind::Darcy, &[PrecondKind::Mult], &cfg);
    let cut_proj = cut_runs(SystemKind::Projection, &[PrecondKind::Mult], &cfg);
    let cut_darcy = cut_runs(SystemKind::Darcy, &[PrecondKind::Mult], &cfg);
    let iters = |rows: &[ReportRow]| rows.iter().map(|r| r.iters).collect::<Vec<_>>();
    ok &= proj.iter().all(|r| r.converged && r.iters <= 25);
    ok &= darcy.iter().all(|r| r.converged && r.iters <= 50);
    ok &= cut_proj.iter().all(|r| r.converged && r.iters <= 25);
    ok &= cut_darcy.iter().all(|r| r.converged && r.iters <= 45);
    verdict(
        10,
        "multiplicative variant",
        ok,
        &format!(
            "telescoping error {tele_err:.2e}; iters: projection {:?}, Darcy {:?}, \
             cut projection {:?}, cut Darcy {:?}",
            iters(&proj),
            iters(&darcy),
            iters(&cut_proj),
            iters(&cut_darcy)
        ),
    );
}
