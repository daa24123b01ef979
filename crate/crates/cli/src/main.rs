//! `opschur`: norms, Schur products, Toeplitz and multiplier experiments,
//! the example gallery, and the verification battery from the command line.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad input or usage,
//! 3 unknown suite or example name.

mod table;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use opschur::block::Side;
use opschur::gallery::{self, GalleryParams};
use opschur::io;
use opschur::measure::{VinfNorm, DEFAULT_R_LADDER};
use opschur::toeplitz::{build_toeplitz, multiplier_upper_bound, toeplitz_norm_ladder};
use opschur::torus::{tilde_h2_matrix, Grid};
use opschur::verify;
use opschur::{weak_l2_norm, IndexMask, OpMatrix, OpMeasure};

use table::{Cell, Table};

const DEFAULT_SEED: u64 = 0xC0FFEE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    #[default]
    Csv,
    Json,
}

/// Settings shared by every subcommand. Field names are the config file keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RunConfig {
    seed: u64,
    /// Overrides the dimension of the gallery examples.
    d: Option<usize>,
    /// Truncation size for multipliers; overrides the gallery truncation.
    #[serde(rename = "N")]
    n: Option<usize>,
    /// Quadrature grid size for the H̃² norms.
    grid: Option<usize>,
    r_ladder: Vec<f64>,
    #[serde(rename = "N_ladder")]
    n_ladder: Vec<usize>,
    budget: usize,
    restarts: usize,
    format: Format,
    out: Option<PathBuf>,
    threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            d: None,
            n: None,
            grid: None,
            r_ladder: DEFAULT_R_LADDER.to_vec(),
            n_ladder: vec![2, 4, 8, 16, 32, 64],
            budget: 64,
            restarts: 8,
            format: Format::Csv,
            out: None,
            threads: None,
        }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        let positive = [("d", self.d), ("N", self.n), ("grid", self.grid), ("threads", self.threads)];
        for (name, v) in positive {
            if v == Some(0) {
                return Err(CliError::Usage(format!("{name} must be positive")));
            }
        }
        if self.budget == 0 || self.restarts == 0 {
            return Err(CliError::Usage("budget and restarts must be positive".into()));
        }
        if self.n_ladder.is_empty() || self.n_ladder.contains(&0) {
            return Err(CliError::Usage("N_ladder must be a nonempty list of positive sizes".into()));
        }
        if self.r_ladder.is_empty() || self.r_ladder.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return Err(CliError::Usage("r_ladder must be a nonempty list in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "opschur", version, about = "Schur products and multipliers of operator-valued matrices")]
struct Cli {
    /// Seed for every random choice (decimal or 0x-prefixed hex).
    #[arg(long, global = true, value_parser = parse_seed)]
    seed: Option<u64>,
    /// Write the table to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON file with RunConfig fields; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Norms of an operator matrix given as JSON.
    Norms { matrix: PathBuf },
    /// Norms of the Schur products of two operator matrices.
    Product {
        a: PathBuf,
        b: PathBuf,
        /// Also write `A ∗ B` as JSON to this file.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Norms of the Toeplitz truncations of a measure.
    Toeplitz {
        measure: PathBuf,
        /// Truncation sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
    },
    /// Upper bound and sampled lower bounds for the Schur multiplier norm.
    Multiplier {
        measure: PathBuf,
        /// Truncation size (default 8).
        #[arg(long = "size")]
        size: Option<usize>,
    },
    /// Variation, semivariation, sup norm, and Poisson means of a measure.
    Measure {
        measure: PathBuf,
        #[arg(long, value_delimiter = ',')]
        r_ladder: Option<Vec<f64>>,
    },
    /// Run one example by name, or `all`.
    Gallery {
        name: String,
        /// Write the example's operator matrix as JSON (row_rank_one only).
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Run verification criteria: `all`, a number, or a comma list.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Input(opschur::Error),
    /// A check ran and failed; the table was still written.
    Failed,
}

impl From<opschur::Error> for CliError {
    fn from(e: opschur::Error) -> Self {
        CliError::Input(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed => 1,
            CliError::Input(opschur::Error::UnknownName(_)) => 3,
            CliError::Usage(_) | CliError::Input(_) => 2,
        }
    }
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => serde_json::from_str(&read(path)?).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    if let Some(format) = cli.format {
        cfg.format = format;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = Some(threads);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_matrix(path: &Path) -> Result<OpMatrix, CliError> {
    Ok(io::opmatrix_from_json(&read(path)?)?)
}

fn load_measure(path: &Path) -> Result<OpMeasure, CliError> {
    Ok(io::measure_from_json(&read(path)?)?)
}

fn num_or_text(r: opschur::Result<f64>) -> Cell {
    match r {
        Ok(v) => Cell::Num(v),
        Err(e) => Cell::Text(format!("unavailable: {e}")),
    }
}

fn cmd_norms(cfg: &RunConfig, path: &Path) -> Result<Table, CliError> {
    let a = load_matrix(path)?;
    let mut t = Table::new(&["norm", "index", "value"]);
    let grid = Grid::new(cfg.grid.unwrap_or(8 * a.rows().max(a.cols())))?;
    t.push(vec!["opnorm".into(), Cell::Empty, Cell::Num(a.opnorm())]);
    t.push(vec!["sot_matrix".into(), Cell::Empty, Cell::Num(a.sot_norm_matrix())]);
    t.push(vec!["weak_l2_lb".into(), Cell::Empty, Cell::Num(weak_l2_norm(a.blocks(), cfg.restarts)?)]);
    t.push(vec!["tilde_h2".into(), Cell::Empty, Cell::Num(tilde_h2_matrix(&a, grid)?)]);
    t.push(vec!["frobenius".into(), Cell::Empty, Cell::Num(a.flatten().norm())]);
    for l in -(a.rows() as i64 - 1)..a.cols() as i64 {
        t.push(vec!["diagonal_sup".into(), Cell::Int(l), Cell::Num(a.project(&IndexMask::Diagonal(l)).max_block_norm())]);
    }
    Ok(t)
}

fn cmd_product(a: &Path, b: &Path, emit: Option<&Path>) -> Result<Table, CliError> {
    let (a, b) = (load_matrix(a)?, load_matrix(b)?);
    let ab = a.schur_product(&b)?;
    let ba = b.schur_product(&a)?;
    if let Some(path) = emit {
        write(path, &io::opmatrix_to_json(&ab))?;
    }
    let (na, nb) = (a.opnorm(), b.opnorm());
    let mut t = Table::new(&["quantity", "value"]);
    t.push(vec!["norm_a".into(), Cell::Num(na)]);
    t.push(vec!["norm_b".into(), Cell::Num(nb)]);
    t.push(vec!["norm_a_schur_b".into(), Cell::Num(ab.opnorm())]);
    t.push(vec!["norm_b_schur_a".into(), Cell::Num(ba.opnorm())]);
    t.push(vec!["bound".into(), Cell::Num(na * nb)]);
    Ok(t)
}

fn vinf_cells(v: VinfNorm) -> (Cell, Cell) {
    match v {
        VinfNorm::Value(x) => ("value".into(), Cell::Num(x)),
        VinfNorm::LowerBound(x) => ("lower_bound".into(), Cell::Num(x)),
        VinfNorm::Unbounded => ("unbounded".into(), Cell::Num(f64::INFINITY)),
    }
}

fn cmd_toeplitz(cfg: &RunConfig, path: &Path, ladder: Option<&[usize]>) -> Result<Table, CliError> {
    let mu = load_measure(path)?;
    let ladder = ladder.unwrap_or(&cfg.n_ladder);
    if ladder.is_empty() || ladder.contains(&0) {
        return Err(CliError::Usage("ladder sizes must be positive".into()));
    }
    let norms = toeplitz_norm_ladder(&mu, ladder)?;
    let (kind, vinf) = vinf_cells(mu.vinf_norm());
    let mut t = Table::new(&["N", "opnorm", "vinf", "vinf_kind"]);
    for (n, v) in ladder.iter().zip(norms) {
        t.push(vec![Cell::Int(*n as i64), Cell::Num(v), vinf.clone(), kind.clone()]);
    }
    Ok(t)
}

fn cmd_multiplier(cfg: &RunConfig, path: &Path, size: Option<usize>) -> Result<Table, CliError> {
    let mu = load_measure(path)?;
    let n = size.or(cfg.n).unwrap_or(8);
    if n == 0 {
        return Err(CliError::Usage("size must be positive".into()));
    }
    let a = build_toeplitz(&mu, n)?;
    let mut t = Table::new(&["quantity", "value"]);
    t.push(vec!["N".into(), Cell::Int(n as i64)]);
    t.push(vec!["upper_bound".into(), num_or_text(multiplier_upper_bound(&mu))]);
    t.push(vec!["lower_bound_left".into(), Cell::Num(a.multiplier_norm_lb(Side::Left, cfg.budget, cfg.seed))]);
    t.push(vec!["lower_bound_right".into(), Cell::Num(a.multiplier_norm_lb(Side::Right, cfg.budget, cfg.seed))]);
    Ok(t)
}

fn cmd_measure(cfg: &RunConfig, path: &Path, r_ladder: Option<&[f64]>) -> Result<Table, CliError> {
    let mu = load_measure(path)?;
    let ladder = r_ladder.unwrap_or(&cfg.r_ladder);
    let mut t = Table::new(&["quantity", "parameter", "value"]);
    t.push(vec!["variation".into(), Cell::Empty, num_or_text(mu.variation())]);
    t.push(vec!["semivariation_lb".into(), Cell::Empty, num_or_text(mu.semivariation_lb(cfg.budget, cfg.seed))]);
    let (kind, vinf) = vinf_cells(mu.vinf_norm());
    t.push(vec!["vinf".into(), kind, vinf]);
    t.push(vec!["sot_estimate".into(), Cell::Empty, num_or_text(mu.sot_norm_estimate(cfg.budget, cfg.seed))]);
    let poisson = mu.poisson_variation(ladder)?;
    for e in &poisson.entries {
        t.push(vec!["poisson_l1".into(), Cell::Num(e.r), Cell::Num(e.l1)]);
    }
    t.push(vec!["poisson_sup".into(), Cell::Empty, Cell::Num(poisson.sup)]);
    Ok(t)
}

fn gallery_params(cfg: &RunConfig, name: &str) -> Result<GalleryParams, CliError> {
    let mut p = GalleryParams::defaults(name)?;
    p.seed = cfg.seed;
    p.budget = cfg.budget;
    if let Some(d) = cfg.d {
        p.d = d;
    }
    if let Some(n) = cfg.n {
        p.n = n;
    }
    Ok(p)
}

fn cmd_gallery(cfg: &RunConfig, name: &str, export: Option<&Path>) -> Result<(Table, bool), CliError> {
    let names: Vec<&str> = if name == "all" { gallery::EXAMPLES.to_vec() } else { vec![name] };
    if let Some(path) = export {
        if name != "row_rank_one" {
            return Err(CliError::Usage(format!("--export is only available for row_rank_one, not {name:?}")));
        }
        let p = gallery_params(cfg, name)?;
        let (a, _) = gallery::row_rank_one_matrix(p.d, p.n, p.seed)?;
        write(path, &io::opmatrix_to_json(&a))?;
    }
    let mut t = Table::new(&["example", "metric", "kind", "computed", "expected", "tol", "relative", "pass"]);
    let mut ok = true;
    for n in names {
        let report = gallery::run_example(n, &gallery_params(cfg, n)?)?;
        ok &= report.passed();
        for m in &report.metrics {
            t.push(vec![
                n.into(),
                m.name.as_str().into(),
                m.kind.label().into(),
                Cell::Num(m.computed),
                Cell::Num(m.expected),
                Cell::Num(m.tol),
                Cell::Bool(m.relative),
                Cell::Bool(m.pass),
            ]);
        }
    }
    Ok((t, ok))
}

fn cmd_verify(cfg: &RunConfig, suite: &str) -> Result<(Table, bool), CliError> {
    let ids = verify::parse_suite(suite)?;
    let results = verify::run_suite(&ids, cfg.seed)?;
    let mut t = Table::new(&["criterion", "name", "status", "checked", "failures", "worst", "detail"]);
    for r in &results {
        t.push(vec![
            Cell::Int(r.id as i64),
            r.name.into(),
            if r.pass { "PASS" } else { "FAIL" }.into(),
            Cell::Int(r.checked as i64),
            Cell::Int(r.failures as i64),
            Cell::Num(r.worst),
            r.detail.as_str().into(),
        ]);
    }
    Ok((t, results.iter().all(|r| r.pass)))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let (table, ok) = match &cli.command {
        Command::Norms { matrix } => (cmd_norms(&cfg, matrix)?, true),
        Command::Product { a, b, emit } => (cmd_product(a, b, emit.as_deref())?, true),
        Command::Toeplitz { measure, ladder } => (cmd_toeplitz(&cfg, measure, ladder.as_deref())?, true),
        Command::Multiplier { measure, size } => (cmd_multiplier(&cfg, measure, *size)?, true),
        Command::Measure { measure, r_ladder } => (cmd_measure(&cfg, measure, r_ladder.as_deref())?, true),
        Command::Gallery { name, export } => cmd_gallery(&cfg, name, export.as_deref())?,
        Command::Verify { suite } => cmd_verify(&cfg, suite)?,
    };
    let rendered = match cfg.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    match &cfg.out {
        Some(path) => write(path, &rendered)?,
        None => print!("{rendered}"),
    }
    if ok {
        Ok(())
    } else {
        Err(CliError::Failed)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Input(err) => eprintln!("error: {err}"),
                CliError::Failed => eprintln!("error: at least one check failed"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_parse_in_both_bases() {
        assert_eq!(parse_seed("0xC0FFEE").unwrap(), 0xC0FFEE);
        assert_eq!(parse_seed("12").unwrap(), 12);
        assert!(parse_seed("x").is_err());
    }

    #[test]
    fn config_keys_and_validation() {
        let cfg: RunConfig = serde_json::from_str(r#"{"seed": 5, "N": 4, "N_ladder": [2, 3], "format": "json"}"#).unwrap();
        assert_eq!((cfg.seed, cfg.n, cfg.format), (5, Some(4), Format::Json));
        assert!(cfg.validate().is_ok());
        assert!(serde_json::from_str::<RunConfig>(r#"{"sead": 5}"#).is_err());
        let bad = RunConfig { r_ladder: vec![1.0], ..RunConfig::default() };
        assert!(bad.validate().is_err());
        assert_eq!(RunConfig::default().seed, 0xC0FFEE);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Failed.exit_code(), 1);
        assert_eq!(CliError::Input(opschur::Error::Parse("x".into())).exit_code(), 2);
        assert_eq!(CliError::Input(opschur::Error::UnknownName("x".into())).exit_code(), 3);
    }
}
