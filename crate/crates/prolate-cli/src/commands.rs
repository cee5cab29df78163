use std::path::PathBuf;

use serde::Serialize;

use prolate::families::{Bispectral, FourierPair};
use prolate::kernels::{
    commutation_defect_continuous, commutation_defect_discrete, commutation_defect_discrete_unchecked,
    orthonormality_defect, spectral_check_pair, worst, BandKernel, OracleConfig,
};
use prolate::solver::{
    darboux_commuting_order4, matrix_commuting_order2, perturbed_pair, soliton_parameters, solve_commuting,
    CommutingReport, Family,
};

use crate::config::Resolved;
use crate::error::{CliError, Result};
use crate::output::{csv_with_header, emit, fmt17, nums, to_json, write_file, MatrixOut, Num};

const RESIDUAL_TOL: f64 = 1e-8;
const CONTINUOUS_TOL: f64 = 1e-6;
const DISCRETE_TOL: f64 = 1e-8;
const LEAK_TOL: f64 = 1e-9;
const SPECTRAL_TOL: f64 = 1e-4;
/// Eigenpairs whose relative gap is below this are not resolved by the Nyström matrix.
const SPECTRAL_GAP: f64 = 1e-8;
const SPECTRAL_PAIRS: usize = 5;
const ORTHONORMALITY_TOL: f64 = 1e-6;
const IDENTITY_TOL: f64 = 1e-8;
const UU_TOL: f64 = 1e-9;
const CONTINUOUS_PANELS: usize = 40;
const DISCRETE_PANELS: usize = 60;
const QUAD_POINTS: usize = 12;

fn solver_err(e: prolate::Error) -> CliError {
    CliError::Solver(e.to_string())
}

fn run_solver(cfg: &Resolved) -> Result<CommutingReport> {
    let (n, t) = (cfg.index_edge, cfg.t);
    match &cfg.family {
        Family::LaguerreDarboux(f) => darboux_commuting_order4(f, n, t),
        Family::HermiteMatrix(f) => matrix_commuting_order2(f, n, t),
        fam => solve_commuting(fam, n, t),
    }
    .map_err(solver_err)
}

/// The pair under test: the solved one, or the perturbed control.
fn tested_pair(cfg: &Resolved, rep: &CommutingReport) -> Result<FourierPair> {
    match cfg.perturb {
        Some(rel) => perturbed_pair(&cfg.family, rep, rel).map_err(solver_err),
        None => Ok(rep.pair.clone()),
    }
}

#[derive(Serialize)]
struct ConfigOut {
    family: String,
    index_edge: i64,
    t: Num,
    seed: u64,
    perturb: Option<Num>,
}

impl ConfigOut {
    fn new(cfg: &Resolved) -> Self {
        ConfigOut {
            family: cfg.family.name(),
            index_edge: cfg.index_edge,
            t: Num(cfg.t),
            seed: cfg.seed,
            perturb: cfg.perturb.map(Num),
        }
    }
}

#[derive(Serialize)]
struct WindowOut {
    k_lo: i64,
    k_hi: i64,
    x_lo: Num,
    x_hi: Num,
}

#[derive(Serialize)]
struct Named {
    name: String,
    value: Num,
}

fn named(v: &[(String, f64)]) -> Vec<Named> {
    v.iter().map(|(n, x)| Named { name: n.clone(), value: Num(*x) }).collect()
}

#[derive(Serialize)]
struct Term {
    label: String,
    coefficient: Num,
}

#[derive(Serialize)]
struct DiffTable {
    grid: Vec<Num>,
    /// `coefficients[i][s]` is `Bᵢ` at `grid[s]`.
    coefficients: Vec<Vec<MatrixOut>>,
}

#[derive(Serialize)]
struct ShiftDiagonal {
    offset: i64,
    samples: Vec<MatrixOut>,
}

#[derive(Serialize)]
struct ShiftTable {
    indices: Vec<i64>,
    diagonals: Vec<ShiftDiagonal>,
}

#[derive(Serialize)]
struct SolveOut {
    config: ConfigOut,
    window: WindowOut,
    order: usize,
    null_dim: usize,
    constant_dim: usize,
    min_order_dim: usize,
    basis: Vec<Term>,
    residuals: Vec<Named>,
    max_residual: Num,
    tolerance: Num,
    verification: Vec<Named>,
    differential: DiffTable,
    shift: ShiftTable,
    pass: bool,
}

fn grid_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    // cell midpoints avoid singular endpoints
    (0..count).map(|i| lo + (i as f64 + 0.5) * (hi - lo) / count as f64).collect()
}

fn tables(cfg: &Resolved, rep: &CommutingReport, pair: &FourierPair) -> Result<(DiffTable, ShiftTable)> {
    let kern = BandKernel::from_window(cfg.family.bispectral(), &rep.window).map_err(solver_err)?;
    let (lo, hi) = kern.finite_window();
    let grid = grid_points(lo, hi, cfg.grid);
    let mut coefficients: Vec<Vec<MatrixOut>> = (0..=pair.diff.order()).map(|_| Vec::new()).collect();
    for &x in &grid {
        for (i, c) in pair.diff.coeff_values(x).map_err(solver_err)?.iter().enumerate() {
            coefficients[i].push(MatrixOut::from(c));
        }
    }
    let indices: Vec<i64> = (rep.window.k_lo..=rep.window.k_hi).collect();
    let mut diagonals = Vec::new();
    for (offset, _) in pair.shift.diags() {
        let samples = indices
            .iter()
            .map(|&k| pair.shift.coeff(offset, k).map(|m| MatrixOut::from(&m)))
            .collect::<prolate::Result<Vec<_>>>()
            .map_err(solver_err)?;
        diagonals.push(ShiftDiagonal { offset, samples });
    }
    Ok((DiffTable { grid: nums(&grid), coefficients }, ShiftTable { indices, diagonals }))
}

pub fn solve(cfg: &Resolved) -> Result<()> {
    let rep = run_solver(cfg)?;
    let pair = tested_pair(cfg, &rep)?;
    let (differential, shift) = tables(cfg, &rep, &pair)?;
    let tol = cfg.tol.unwrap_or(RESIDUAL_TOL);
    let max_residual = rep.max_residual();
    let out = SolveOut {
        config: ConfigOut::new(cfg),
        window: WindowOut {
            k_lo: rep.window.k_lo,
            k_hi: rep.window.k_hi,
            x_lo: Num(rep.window.x_lo),
            x_hi: Num(rep.window.x_hi),
        },
        order: rep.order,
        null_dim: rep.null_dim,
        constant_dim: rep.constant_dim,
        min_order_dim: rep.min_order_dim,
        basis: rep
            .labels
            .iter()
            .zip(&rep.coefficients)
            .map(|(l, c)| Term { label: l.clone(), coefficient: Num(*c) })
            .collect(),
        residuals: named(&rep.residuals),
        max_residual: Num(max_residual),
        tolerance: Num(tol),
        verification: named(&rep.verification),
        differential,
        shift,
        pass: max_residual <= tol,
    };
    emit(cfg.out.as_deref(), &to_json(&out))?;
    if max_residual <= tol {
        Ok(())
    } else {
        Err(CliError::Solver(format!(
            "vanishing-condition residual {} exceeds tolerance {}",
            fmt17(max_residual),
            fmt17(tol)
        )))
    }
}

#[derive(Serialize)]
struct Row {
    check: String,
    value: Num,
    tolerance: Option<Num>,
    pass: Option<bool>,
    note: String,
}

#[derive(Default)]
struct Rows(Vec<Row>);

impl Rows {
    fn gate(&mut self, check: &str, value: f64, tol: f64) {
        self.0.push(Row {
            check: check.into(),
            value: Num(value),
            tolerance: Some(Num(tol)),
            pass: Some(value < tol),
            note: String::new(),
        });
    }

    fn failed(&mut self, check: &str, value: f64, tol: f64, note: String) {
        self.0.push(Row { check: check.into(), value: Num(value), tolerance: Some(Num(tol)), pass: Some(false), note });
    }

    fn info(&mut self, check: &str, value: f64) {
        self.0.push(Row { check: check.into(), value: Num(value), tolerance: None, pass: None, note: String::new() });
    }
}

#[derive(Serialize)]
struct VerifyOut<'a> {
    config: ConfigOut,
    rows: &'a [Row],
    failed: usize,
    pass: bool,
}

fn family_rows(cfg: &Resolved, rep: &CommutingReport, rows: &mut Rows) -> prolate::Result<()> {
    let fam = cfg.family.bispectral();
    let n = cfg.index_edge;
    match &cfg.family {
        Family::Classical(_) => {
            let full = BandKernel::full(fam, 0, n)?;
            rows.gate("orthonormality", orthonormality_defect(&full, &full.quadrature(60, QUAD_POINTS)?)?, ORTHONORMALITY_TOL);
        }
        Family::LaguerreDarboux(f) => {
            let xs = f.base().sample_points(20);
            let ks: Vec<i64> = (0..=30).collect();
            rows.gate("factorization (differential)", f.factorization_defect_diff(&xs)?, IDENTITY_TOL);
            rows.gate("factorization (shift)", f.factorization_defect_shift(&ks)?, IDENTITY_TOL);
        }
        Family::HermiteMatrix(f) => {
            let xs = f.base().sample_points(15);
            let ks: Vec<i64> = (0..=20).collect();
            rows.gate("UU* block identity", f.uu_star_defect(&xs)?, UU_TOL);
            rows.gate("isometry", f.isometry_defect(&ks)?, IDENTITY_TOL);
            let full = BandKernel::full(fam, 0, n.max(8))?;
            rows.gate("orthonormality", orthonormality_defect(&full, &full.quadrature(60, QUAD_POINTS)?)?, ORTHONORMALITY_TOL);
            let cd = [(0.3, -1.1), (1.7, 0.2), (-2.0, 2.5)]
                .iter()
                .map(|&(x, y)| f.christoffel_darboux_defect(n, x, y))
                .collect::<prolate::Result<Vec<_>>>()?;
            let cd = worst(cd);
            rows.gate("Christoffel-Darboux", cd, IDENTITY_TOL);
        }
        Family::Soliton(s) => {
            let xs = s.sample_points(20);
            let top = s.nsol as i64 + 2;
            rows.gate("Schrodinger equation", s.schrodinger_defect(&(0..=top).collect::<Vec<_>>(), &xs)?, IDENTITY_TOL);
            rows.gate("difference equation", s.difference_defect(&(1..=top).collect::<Vec<_>>(), &xs)?, IDENTITY_TOL);
            let full = BandKernel::full(fam, 1, s.nsol as i64)?;
            rows.gate("orthonormality", orthonormality_defect(&full, &full.quadrature(120, QUAD_POINTS)?)?, ORTHONORMALITY_TOL);
            if let Some((beta, gamma)) = soliton_parameters(rep) {
                let (eb, eg) = s.closed_form(cfg.index_edge, cfg.t);
                let d = ((beta - eb).abs() / eb.abs().max(1.0)).max((gamma - eg).abs() / eg.abs().max(1.0));
                rows.gate("(beta, gamma) vs closed form", d, IDENTITY_TOL);
            }
        }
    }
    Ok(())
}

fn verify_rows(cfg: &Resolved) -> Result<Rows> {
    let rep = run_solver(cfg)?;
    let pair = tested_pair(cfg, &rep)?;
    let fam = cfg.family.bispectral();
    let kern = BandKernel::from_window(fam, &rep.window).map_err(solver_err)?;
    let mut rows = Rows::default();
    rows.gate("solver vanishing residual", rep.max_residual(), RESIDUAL_TOL);

    let oracle = OracleConfig {
        seed: cfg.seed,
        panels: cfg.quad_panels.unwrap_or(CONTINUOUS_PANELS),
        ..OracleConfig::default()
    };
    let cont = commutation_defect_continuous(&kern, &pair.diff, &oracle).map_err(solver_err)?;
    rows.gate("commutation (continuous)", cont.relative, cfg.tol.unwrap_or(CONTINUOUS_TOL));

    let quad = kern
        .quadrature(cfg.quad_panels.unwrap_or(DISCRETE_PANELS), QUAD_POINTS)
        .map_err(solver_err)?;
    let disc_tol = cfg.tol.unwrap_or(DISCRETE_TOL);
    match commutation_defect_discrete(&kern, &pair.shift, &quad, LEAK_TOL) {
        Ok(d) => rows.gate("commutation (discrete)", d.relative, disc_tol),
        Err(prolate::Error::Contract(msg)) => {
            let d = commutation_defect_discrete_unchecked(&kern, &pair.shift, &quad).map_err(solver_err)?;
            rows.failed("commutation (discrete)", d.relative, disc_tol, msg);
        }
        Err(e) => return Err(solver_err(e)),
    }

    let sc = spectral_check_pair(&kern, &pair, &quad, kern.index_count() * fam.size()).map_err(solver_err)?;
    let resolved: Vec<f64> = sc
        .gaps
        .iter()
        .zip(&sc.residuals)
        .filter(|(g, _)| **g > SPECTRAL_GAP)
        .map(|(_, r)| *r)
        .take(SPECTRAL_PAIRS)
        .collect();
    if resolved.is_empty() {
        rows.failed("simultaneous eigenvectors", f64::NAN, SPECTRAL_TOL, "no eigenpair is separated from its neighbours".into());
    } else {
        rows.gate("simultaneous eigenvectors", worst(resolved.iter().copied()), SPECTRAL_TOL);
        if let Some(last) = rows.0.last_mut() {
            last.note = format!("leading {} eigenpairs with relative gap above {SPECTRAL_GAP:e}", resolved.len());
        }
    }

    family_rows(cfg, &rep, &mut rows).map_err(solver_err)?;
    for (name, v) in &rep.verification {
        rows.info(name, *v);
    }
    Ok(rows)
}

pub fn verify(cfg: &Resolved) -> Result<()> {
    let rows = verify_rows(cfg)?;
    let gated = rows.0.iter().filter(|r| r.pass.is_some()).count();
    let failed = rows.0.iter().filter(|r| r.pass == Some(false)).count();
    if let Some(path) = &cfg.out {
        let csv_rows: Vec<Vec<String>> = rows
            .0
            .iter()
            .map(|r| {
                vec![
                    r.check.clone(),
                    fmt17(r.value.0),
                    r.tolerance.map_or(String::new(), |t| fmt17(t.0)),
                    r.pass.map_or(String::new(), |p| p.to_string()),
                    r.note.clone(),
                ]
            })
            .collect();
        let cols = ["check", "value", "tolerance", "pass", "note"].map(String::from);
        write_file(path, csv_with_header(&meta(cfg, None), &cols, &csv_rows).as_bytes())?;
    }
    let out = VerifyOut { config: ConfigOut::new(cfg), rows: &rows.0, failed, pass: failed == 0 };
    emit(None, &to_json(&out))?;
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Verification { failed, total: gated })
    }
}

fn meta(cfg: &Resolved, grid: Option<String>) -> Vec<(&'static str, String)> {
    let mut m = vec![
        ("family", cfg.family.name()),
        ("n", cfg.index_edge.to_string()),
        ("t", fmt17(cfg.t)),
    ];
    if let Some(g) = grid {
        m.push(("grid", g));
    }
    m.push(("seed", cfg.seed.to_string()));
    m
}

/// Writes `kernel.csv` (K on a grid) and `j.csv` (the J block matrix) into the
/// output directory. With `full`, the interval is the whole support.
pub fn emit_kernel(cfg: &Resolved, full: bool) -> Result<()> {
    let w = cfg.window()?;
    let fam = cfg.family.bispectral();
    let kern = if full { BandKernel::full(fam, w.k_lo, w.k_hi) } else { BandKernel::from_window(fam, &w) }
        .map_err(solver_err)?;
    let (lo, hi) = kern.finite_window();
    let grid = grid_points(lo, hi, cfg.grid);
    let grid_desc = format!("midpoints of {} cells on [{}, {}]", cfg.grid, fmt17(lo), fmt17(hi));
    let n = fam.size();
    let mut krows = Vec::new();
    for &x in &grid {
        for &y in &grid {
            let k = kern.kernel_k(x, y).map_err(solver_err)?;
            for i in 0..n {
                for j in 0..n {
                    krows.push(vec![fmt17(x), fmt17(y), i.to_string(), j.to_string(), fmt17(k[(i, j)])]);
                }
            }
        }
    }
    let kcols = ["x", "y", "row", "col", "value"].map(String::from);
    let quad = kern
        .quadrature(cfg.quad_panels.unwrap_or(DISCRETE_PANELS), QUAD_POINTS)
        .map_err(solver_err)?;
    let j = kern.j_matrix(&quad).map_err(solver_err)?;
    let jrows: Vec<Vec<String>> = (0..j.nrows()).map(|r| (0..j.ncols()).map(|c| fmt17(j[(r, c)])).collect()).collect();
    let jcols: Vec<String> = (0..j.ncols()).map(|c| format!("c{c}")).collect();

    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut head = meta(cfg, Some(grid_desc));
    head.push(("indices", format!("{}..={}", kern.k_lo, kern.k_hi)));
    head.push(("interval", format!("[{}, {}]", fmt17(kern.x0), fmt17(kern.x1))));
    write_file(&dir.join("kernel.csv"), csv_with_header(&head, &kcols, &krows).as_bytes())?;
    head.push(("quadrature", format!("{} panels x {QUAD_POINTS} points", quad_panels(cfg))));
    write_file(&dir.join("j.csv"), csv_with_header(&head, &jcols, &jrows).as_bytes())?;
    Ok(())
}

fn quad_panels(cfg: &Resolved) -> usize {
    cfg.quad_panels.unwrap_or(DISCRETE_PANELS)
}

#[derive(Serialize)]
struct FamilyInfo {
    name: &'static str,
    parameters: &'static str,
    constraints: &'static str,
    window: &'static str,
}

pub fn families() -> Result<()> {
    let list = [
        FamilyInfo {
            name: "hermite",
            parameters: "--size N (default 1)",
            constraints: "N >= 1",
            window: "indices {0..n}, interval (-inf, t)",
        },
        FamilyInfo {
            name: "laguerre",
            parameters: "--a, --size N",
            constraints: "a > -1, N >= 1, t > 0",
            window: "indices {0..n}, interval (0, t)",
        },
        FamilyInfo {
            name: "jacobi",
            parameters: "--a, --b, --size N",
            constraints: "a > -1, b > -1, N >= 1, -1 < t < 1",
            window: "indices {0..n}, interval (-1, t)",
        },
        FamilyInfo {
            name: "laguerre-darboux",
            parameters: "--a, --lambda",
            constraints: "a > -1, lambda < min(0, -a), (lambda-k)(lambda-k-1) > 0 for all k >= 0",
            window: "indices {0..n}, interval (0, t)",
        },
        FamilyInfo {
            name: "hermite-matrix",
            parameters: "--r, --matrix (row-major entries of A, default identity)",
            constraints: "A symmetric r x r; invertible when r >= 2",
            window: "indices {0..n}, interval (-inf, t)",
        },
        FamilyInfo {
            name: "soliton",
            parameters: "--nsol N, --p (default 1)",
            constraints: "N >= 1, 1 <= p <= N",
            window: "indices {p..N}, interval (t, inf)",
        },
    ];
    emit(None, &to_json(&list))
}
