use std::path::{Path, PathBuf};

use clap::Args;
use nalgebra::DMatrix;
use serde::Deserialize;

use prolate::darboux::{HermiteMatrixFamily, LaguerreDarboux, SolitonFamily};
use prolate::families::ClassicalTriple;
use prolate::solver::{BandWindow, Family};

use crate::error::{CliError, Result};

pub const FAMILIES: [&str; 6] = ["hermite", "laguerre", "jacobi", "laguerre-darboux", "hermite-matrix", "soliton"];

/// Run parameters. Every field can come from a flag or from the `--config`
/// JSON file; file values win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Family name (see the `families` subcommand)
    #[arg(long)]
    pub family: Option<String>,
    /// Matrix size N of a classical family
    #[arg(long)]
    pub size: Option<usize>,
    /// Window end n, giving indices {0..n}
    #[arg(long)]
    pub n: Option<i64>,
    /// Band edge t
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Block size r of the matrix Hermite family
    #[arg(long)]
    pub r: Option<usize>,
    /// Entries of A, row-major and comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub matrix: Option<Vec<f64>>,
    /// Soliton number N
    #[arg(long)]
    pub nsol: Option<usize>,
    /// First soliton index p, giving indices {p..N}
    #[arg(long)]
    pub p: Option<i64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the commutation tolerances
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub quad_panels: Option<usize>,
    /// Sample count for coefficient tables and kernel grids
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Scale the control coefficient of the solved operator by (1 + rel)
    #[arg(long, allow_negative_numbers = true)]
    pub perturb: Option<f64>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f; } )*
    };
}

impl RunConfig {
    pub fn overlay(mut self, file: RunConfig) -> RunConfig {
        overlay!(self, file, family, size, n, t, a, b, lambda, r, matrix, nsol, p, seed, tol, quad_panels, grid, out, perturb);
        self
    }

    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// A validated configuration with its family constructed.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub family: Family,
    /// `n` for the windowed families, `p` for the soliton family.
    pub index_edge: i64,
    pub t: f64,
    pub seed: u64,
    pub tol: Option<f64>,
    pub quad_panels: Option<usize>,
    pub grid: usize,
    pub out: Option<PathBuf>,
    pub perturb: Option<f64>,
}

fn need<T>(v: Option<T>, flag: &str, family: &str) -> Result<T> {
    v.ok_or_else(|| CliError::Config(format!("family {family} requires --{flag}")))
}

fn config_err(e: prolate::Error) -> CliError {
    CliError::Config(e.to_string())
}

impl Resolved {
    pub fn new(c: RunConfig) -> Result<Resolved> {
        let key = c.family.clone().ok_or_else(|| CliError::Config("--family is required".into()))?;
        let size = c.size.unwrap_or(1);
        let family = match key.as_str() {
            "hermite" => Family::Classical(ClassicalTriple::hermite(size).map_err(config_err)?),
            "laguerre" => Family::Classical(ClassicalTriple::laguerre(need(c.a, "a", &key)?, size).map_err(config_err)?),
            "jacobi" => Family::Classical(
                ClassicalTriple::jacobi(need(c.a, "a", &key)?, need(c.b, "b", &key)?, size).map_err(config_err)?,
            ),
            "laguerre-darboux" => Family::LaguerreDarboux(
                LaguerreDarboux::new(need(c.a, "a", &key)?, need(c.lambda, "lambda", &key)?).map_err(config_err)?,
            ),
            "hermite-matrix" => Family::HermiteMatrix(HermiteMatrixFamily::new(matrix_a(&c)?).map_err(config_err)?),
            "soliton" => Family::Soliton(SolitonFamily::new(need(c.nsol, "nsol", &key)?).map_err(config_err)?),
            other => {
                return Err(CliError::Config(format!(
                    "unknown family {other:?}; expected one of {}",
                    FAMILIES.join(", ")
                )))
            }
        };
        let index_edge = if key == "soliton" { c.p.unwrap_or(1) } else { need(c.n, "n", &key)? };
        let t = need(c.t, "t", &key)?;
        let positive = |v: Option<usize>, flag: &str| match v {
            Some(0) => Err(CliError::Config(format!("--{flag} must be positive"))),
            _ => Ok(v),
        };
        let quad_panels = positive(c.quad_panels, "quad-panels")?;
        let grid = positive(c.grid, "grid")?.unwrap_or(11);
        if let Some(tol) = c.tol {
            if !(tol > 0.0) {
                return Err(CliError::Config(format!("--tol must be positive, got {tol}")));
            }
        }
        let r = Resolved {
            family,
            index_edge,
            t,
            seed: c.seed.unwrap_or(20240917),
            tol: c.tol,
            quad_panels,
            grid,
            out: c.out,
            perturb: c.perturb,
        };
        r.window()?;
        Ok(r)
    }

    pub fn window(&self) -> Result<BandWindow> {
        self.family.band(self.index_edge, self.t).map_err(config_err)
    }
}

fn matrix_a(c: &RunConfig) -> Result<DMatrix<f64>> {
    match (&c.matrix, c.r) {
        (None, r) => Ok(DMatrix::identity(r.unwrap_or(1), r.unwrap_or(1))),
        (Some(v), r) => {
            let side = (v.len() as f64).sqrt().round() as usize;
            if side * side != v.len() || side == 0 {
                return Err(CliError::Config(format!("--matrix needs r² entries, got {}", v.len())));
            }
            if let Some(r) = r {
                if r != side {
                    return Err(CliError::Config(format!("--r = {r} but --matrix has {side}×{side} entries")));
                }
            }
            Ok(DMatrix::from_row_slice(side, side, v))
        }
    }
}
