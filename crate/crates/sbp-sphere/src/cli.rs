//! Command-line interface of the `sbp-sphere` binary.
//!
//! Subcommands: `operators` (build and inspect a 1-D operator family),
//! `spectrum` (interface-corrected Laplace eigenvalues), `grid` (cubed-sphere
//! point and metric dumps), `run` (integrate one shallow-water case), and
//! `converge` (multi-grid convergence study).
//!
//! Conventions shared by all subcommands:
//! - data goes to files, logs go to stderr, short key=value summaries go to
//!   stdout;
//! - floating-point values are written with 17 significant digits so that
//!   files round-trip exactly;
//! - a JSON manifest with the resolved configuration is written before any
//!   computation starts, so interrupted runs still document themselves;
//! - `--config FILE` supplies `key=value` defaults that explicit flags
//!   override; unknown keys are rejected;
//! - exit code 0 on success, 1 on invalid input or I/O failure, 2 on a
//!   numerical failure;
//! - `SBP_THREADS` caps the worker-thread count (0 or unset: automatic);
//! - identical configurations produce bit-identical data files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{self, TestCase};
use crate::grid::{self, CubedSphereGrid};
use crate::sbp1d::{self, InterfaceMethod1D, Operator1DSet, OperatorOrder};
use crate::swe::{self, Model, PointSet};

const MODULE: &str = "cli";

/// Entry point; returns the process exit code.
pub fn run() -> i32 {
    dispatch(std::env::args_os())
}

/// Parses `argv` and executes the selected subcommand.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = init_thread_pool() {
        log(&e);
        return 1;
    }
    let outcome = match cli.command {
        Command::Operators(args) => cmd_operators(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Grid(args) => cmd_grid(args),
        Command::Run(args) => cmd_run(args),
        Command::Converge(args) => cmd_converge(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            log(&e);
            match e {
                Error::Numerical { .. } => 2,
                Error::InvalidInput { .. } | Error::Io { .. } => 1,
            }
        }
    }
}

fn log(msg: &dyn std::fmt::Display) {
    eprintln!("[sbp-sphere] {msg}");
}

/// Applies the `SBP_THREADS` cap once per process; later calls are no-ops so
/// repeated in-process dispatches (tests) stay valid.
fn init_thread_pool() -> Result<()> {
    static ONCE: std::sync::Once = std::sync::Once::new();
    let mut result = Ok(());
    ONCE.call_once(|| {
        let Ok(raw) = std::env::var("SBP_THREADS") else {
            return;
        };
        let n: usize = match raw.trim().parse() {
            Ok(n) => n,
            Err(_) => {
                result = Err(Error::invalid(
                    MODULE,
                    "init_thread_pool",
                    format!("SBP_THREADS must be a non-negative integer, got {raw:?}"),
                ));
                return;
            }
        };
        if n == 0 {
            return;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            // A pool may already exist when dispatch runs inside another
            // process that set one up; the cap is then theirs to manage.
            log(&format!("SBP_THREADS ignored: {e}"));
        }
    });
    result
}

#[derive(Parser)]
#[command(
    name = "sbp-sphere",
    version,
    about = "Staggered mimetic finite differences and shallow-water runs on the cubed sphere"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a 1-D operator family; optionally dump matrices or verify
    /// the defining identities.
    Operators(OperatorsArgs),
    /// Eigenvalues of the interface-corrected second derivative on [0, 1].
    Spectrum(SpectrumArgs),
    /// Dump cubed-sphere point coordinates or metric samples.
    Grid(GridArgs),
    /// Integrate one test case and write snapshots plus diagnostics.
    Run(RunArgs),
    /// Run a case on several grids and fit convergence rates.
    Converge(ConvergeArgs),
}

#[derive(Args)]
struct OperatorsArgs {
    /// key=value defaults, overridden by explicit flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Operator family: 21, 42, 63-poly, or 63-wave
    #[arg(long)]
    order: Option<String>,
    /// Cell count (there are n+1 vertices)
    #[arg(long)]
    n: Option<usize>,
    /// Dump format; only "csv" is defined
    #[arg(long)]
    dump: Option<String>,
    /// Destination of the dump; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check the algebraic identities and accuracy orders
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct SpectrumArgs {
    /// key=value defaults, overridden by explicit flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Operator family: 21, 42, 63-poly, or 63-wave
    #[arg(long)]
    order: Option<String>,
    /// Cell count per block
    #[arg(long)]
    n: Option<usize>,
    /// Interface treatment: sat or sat-proj
    #[arg(long)]
    method: Option<String>,
    /// Output CSV, one eigenvalue of dx².L per line, ascending
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// key=value defaults, overridden by explicit flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cells per panel edge
    #[arg(long)]
    nc: Option<usize>,
    /// What to dump: points or metric
    #[arg(long)]
    dump: Option<String>,
    /// Output CSV path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// key=value defaults, overridden by explicit flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Test case: gauss1, gauss2, gauss3, solid, or poor:NU
    #[arg(long)]
    case: Option<String>,
    /// Operator family: 21, 42, 63-poly, or 63-wave
    #[arg(long)]
    order: Option<String>,
    /// Cells per panel edge
    #[arg(long)]
    nc: Option<usize>,
    /// Simulated span in days; defaults to the case's standard span
    #[arg(long)]
    days: Option<f64>,
    /// Output directory (created if missing)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    /// key=value defaults, overridden by explicit flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Test case: gauss1, gauss2, gauss3, or solid
    #[arg(long)]
    case: Option<String>,
    /// Operator family: 21, 42, 63-poly, or 63-wave
    #[arg(long)]
    order: Option<String>,
    /// Comma-separated ascending cell counts, e.g. 24,48,96
    #[arg(long)]
    nc_list: Option<String>,
    /// Reference resolution for the cases without an exact solution
    #[arg(long)]
    ref_nc: Option<usize>,
    /// Output directory (created if missing)
    #[arg(long)]
    out: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Config files and flag resolution

/// `key=value` defaults loaded from `--config`. Every key must be consumed
/// by the subcommand; leftovers are reported as unknown.
struct ConfigFile {
    map: BTreeMap<String, String>,
}

impl ConfigFile {
    fn load(path: Option<&Path>) -> Result<Self> {
        let op = "load_config";
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::io(MODULE, op, path.display().to_string(), e))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    return Err(Error::invalid(
                        MODULE,
                        op,
                        format!("{}:{}: expected key=value", path.display(), lineno + 1),
                    ));
                };
                let key = key.trim().to_string();
                if map.insert(key.clone(), value.trim().to_string()).is_some() {
                    return Err(Error::invalid(
                        MODULE,
                        op,
                        format!("{}:{}: duplicate key {key:?}", path.display(), lineno + 1),
                    ));
                }
            }
        }
        Ok(ConfigFile { map })
    }

    /// Resolves one option: explicit flag first, then the config file.
    fn resolve<T: std::str::FromStr>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        let from_file = self.map.remove(key);
        if let Some(v) = flag {
            return Ok(Some(v));
        }
        match from_file {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                Error::invalid(
                    MODULE,
                    "resolve_config",
                    format!("config value {key}={raw:?} does not parse"),
                )
            }),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some(key) = self.map.keys().next() {
            return Err(Error::invalid(
                MODULE,
                "resolve_config",
                format!("unknown config key {key:?}"),
            ));
        }
        Ok(())
    }
}

fn require<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| {
        Error::invalid(
            MODULE,
            "resolve_config",
            format!("missing required option --{key} (or config key {key})"),
        )
    })
}

fn parse_order(s: &str) -> Result<OperatorOrder> {
    s.parse()
}

fn parse_case(s: &str) -> Result<TestCase> {
    s.parse()
}

fn parse_nc_list(s: &str) -> Result<Vec<usize>> {
    let op = "parse_nc_list";
    let mut list = Vec::new();
    for part in s.split(',') {
        let nc: usize = part.trim().parse().map_err(|_| {
            Error::invalid(MODULE, op, format!("bad cell count {:?} in {s:?}", part.trim()))
        })?;
        list.push(nc);
    }
    if list.len() < 2 {
        return Err(Error::invalid(MODULE, op, "need at least two cell counts"));
    }
    if !list.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid(MODULE, op, "cell counts must be strictly ascending"));
    }
    Ok(list)
}

// ---------------------------------------------------------------------------
// Run manifests

/// Reproducibility record written before any computation: the fully
/// resolved configuration, the code version, the wall-clock start time, and
/// the files the command intends to produce.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub created_unix_seconds: u64,
    pub config: BTreeMap<String, String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: BTreeMap<String, String>, outputs: &[String]) -> Self {
        let created_unix_seconds = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix_seconds,
            config,
            outputs: outputs.to_vec(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let op = "write_manifest";
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::invalid(MODULE, op, e.to_string()))?;
        std::fs::write(path, json + "\n")
            .map_err(|e| Error::io(MODULE, op, path.display().to_string(), e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let op = "read_manifest";
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(MODULE, op, path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| Error::invalid(MODULE, op, e.to_string()))
    }
}

/// Manifest path for a command whose output is a single file: the file's
/// name with the extension replaced by `manifest.json`.
fn sibling_manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn create_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::io(MODULE, "create_out_dir", dir.display().to_string(), e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| Error::io(MODULE, "write_file", path.display().to_string(), e))
}

// ---------------------------------------------------------------------------
// operators

fn cmd_operators(args: OperatorsArgs) -> Result<()> {
    let op = "operators";
    let mut cfg = ConfigFile::load(args.config.as_deref())?;
    let order = require(cfg.resolve("order", args.order)?, "order")?;
    let order = parse_order(&order)?;
    let n = require(cfg.resolve("n", args.n)?, "n")?;
    let dump = cfg.resolve("dump", args.dump)?;
    let out: Option<PathBuf> = cfg.resolve("out", args.out)?;
    let verify = args.verify || cfg.resolve("verify", None::<bool>)?.unwrap_or(false);
    cfg.finish()?;

    if let Some(fmt) = &dump {
        if fmt != "csv" {
            return Err(Error::invalid(MODULE, op, format!("unknown dump format {fmt:?}")));
        }
    }

    let set = sbp1d::build_operator_set(order, n, 1.0 / n as f64)?;
    log(&format!("built order {order} family with n = {n} cells"));

    if dump.is_some() {
        let csv = operator_csv(&set);
        match &out {
            Some(path) => {
                let mut config = BTreeMap::new();
                config.insert("order".into(), order.to_string());
                config.insert("n".into(), n.to_string());
                config.insert("dump".into(), "csv".into());
                let outputs = [path.display().to_string()];
                RunManifest::new("operators", config, &outputs)
                    .write(&sibling_manifest_path(path))?;
                write_text(path, &csv)?;
                log(&format!("wrote {}", path.display()));
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(csv.as_bytes())
                    .map_err(|e| Error::io(MODULE, op, "stdout".to_string(), e))?;
            }
        }
    }

    if verify {
        report_operator_checks(&set)?;
    } else if dump.is_none() {
        println!("order={order}");
        println!("n={n}");
        println!("dx={:.16e}", set.dx);
    }
    Ok(())
}

/// All matrices of a family in one CSV: structural nonzeros of the banded
/// operators plus the norm diagonals and the extrapolation rows.
fn operator_csv(set: &Operator1DSet) -> String {
    let mut out = String::from("matrix,row,col,value\n");
    let banded = [
        ("dcv", &set.dcv),
        ("dvc", &set.dvc),
        ("pvc", &set.pvc),
        ("pcv", &set.pcv),
    ];
    for (name, op) in banded {
        for i in 0..op.n_out() {
            let (start, coeffs) = op.row(i);
            for (k, &c) in coeffs.iter().enumerate() {
                if c != 0.0 {
                    let _ = writeln!(out, "{name},{i},{},{c:.16e}", start + k);
                }
            }
        }
    }
    for (name, diag) in [("hv", &set.hv), ("hc", &set.hc)] {
        for (i, &v) in diag.iter().enumerate() {
            let _ = writeln!(out, "{name},{i},{i},{v:.16e}");
        }
    }
    for (name, row) in [("l", &set.l), ("r", &set.r)] {
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                let _ = writeln!(out, "{name},0,{j},{v:.16e}");
            }
        }
    }
    out
}

/// Prints the identity residuals and accuracy orders as key=value lines and
/// fails when any of them misses its defining target.
fn report_operator_checks(set: &Operator1DSet) -> Result<()> {
    let op = "verify";
    let s = set.order.s();
    let sbp = sbp1d::sbp_identity_residual(set);
    let duality = sbp1d::interp_duality_residual(set);
    let acc = sbp1d::verify_accuracy_orders(set);
    let obj = sbp1d::evaluate_objectives(set);

    println!("order={}", set.order);
    println!("n={}", set.n);
    println!("sbp_identity_residual={sbp:.16e}");
    println!("interp_duality_residual={duality:.16e}");
    println!("dcv_interior_degree={}", acc.dcv.interior);
    println!("dcv_boundary_degree={}", acc.dcv.boundary);
    println!("dvc_interior_degree={}", acc.dvc.interior);
    println!("dvc_boundary_degree={}", acc.dvc.boundary);
    println!("pvc_interior_degree={}", acc.pvc.interior);
    println!("pvc_boundary_degree={}", acc.pvc.boundary);
    println!("pcv_interior_degree={}", acc.pcv.interior);
    println!("pcv_boundary_degree={}", acc.pcv.boundary);
    println!("extrapolation_degree={}", acc.extrapolation);
    println!("objective_poly={:.16e}", obj.poly63);
    println!("objective_wave={:.16e}", obj.wave63);

    let identities_ok = sbp <= 1e-12 && duality <= 1e-12;
    let derivative_ok = acc.dcv.interior >= 2 * s
        && acc.dcv.boundary >= s
        && acc.dvc.interior >= 2 * s
        && acc.dvc.boundary >= s;
    let interp_ok = acc.pvc.interior >= 2 * s - 1
        && acc.pvc.boundary >= s - 1
        && acc.pcv.interior >= 2 * s - 1
        && acc.pcv.boundary >= s - 1;
    let extrap_ok = acc.extrapolation >= s;
    let all_ok = identities_ok && derivative_ok && interp_ok && extrap_ok;
    println!("identities_ok={identities_ok}");
    println!("accuracy_ok={}", derivative_ok && interp_ok && extrap_ok);
    println!("all_ok={all_ok}");
    if !all_ok {
        return Err(Error::numerical(MODULE, op, 0, "operator verification failed"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// spectrum

fn cmd_spectrum(args: SpectrumArgs) -> Result<()> {
    let mut cfg = ConfigFile::load(args.config.as_deref())?;
    let order = require(cfg.resolve("order", args.order)?, "order")?;
    let order = parse_order(&order)?;
    let n = require(cfg.resolve("n", args.n)?, "n")?;
    let method = require(cfg.resolve("method", args.method)?, "method")?;
    let out: PathBuf = require(cfg.resolve("out", args.out)?, "out")?;
    cfg.finish()?;

    let method_enum = match method.as_str() {
        "sat" => InterfaceMethod1D::Sat,
        "sat-proj" => InterfaceMethod1D::SatProjection,
        other => {
            return Err(Error::invalid(
                MODULE,
                "spectrum",
                format!("unknown method {other:?} (expected sat or sat-proj)"),
            ));
        }
    };

    let mut config = BTreeMap::new();
    config.insert("order".into(), order.to_string());
    config.insert("n".into(), n.to_string());
    config.insert("method".into(), method.clone());
    let outputs = [out.display().to_string()];
    RunManifest::new("spectrum", config, &outputs).write(&sibling_manifest_path(&out))?;

    let set = sbp1d::build_operator_set(order, n, 1.0 / n as f64)?;
    let eigs = sbp1d::laplace_spectrum(&set, method_enum)?;
    let mut text = String::new();
    for ev in &eigs {
        let _ = writeln!(text, "{ev:.16e}");
    }
    write_text(&out, &text)?;
    log(&format!("wrote {} eigenvalues to {}", eigs.len(), out.display()));
    println!("eigenvalues={}", eigs.len());
    println!("min={:.16e}", eigs.first().copied().unwrap_or(0.0));
    println!("max={:.16e}", eigs.last().copied().unwrap_or(0.0));
    Ok(())
}

// ---------------------------------------------------------------------------
// grid

fn cmd_grid(args: GridArgs) -> Result<()> {
    let op = "grid";
    let mut cfg = ConfigFile::load(args.config.as_deref())?;
    let nc = require(cfg.resolve("nc", args.nc)?, "nc")?;
    let dump = require(cfg.resolve("dump", args.dump)?, "dump")?;
    let out: PathBuf = require(cfg.resolve("out", args.out)?, "out")?;
    cfg.finish()?;

    if dump != "points" && dump != "metric" {
        return Err(Error::invalid(
            MODULE,
            op,
            format!("unknown dump kind {dump:?} (expected points or metric)"),
        ));
    }

    let mut config = BTreeMap::new();
    config.insert("nc".into(), nc.to_string());
    config.insert("dump".into(), dump.clone());
    let outputs = [out.display().to_string()];
    RunManifest::new("grid", config, &outputs).write(&sibling_manifest_path(&out))?;

    let g = grid::build_cubed_sphere(nc, grid::EARTH_RADIUS)?;
    let text = if dump == "points" {
        grid_points_csv(&g)
    } else {
        grid_metric_csv(&g)
    };
    write_text(&out, &text)?;
    log(&format!("wrote {}", out.display()));
    Ok(())
}

/// Iterates every point of every point set as (set name, i, j, x1, x2,
/// linear index).
fn for_each_grid_point(g: &CubedSphereGrid, mut f: impl FnMut(&str, usize, usize, usize, f64, f64, usize)) {
    let nc = g.nc;
    for p in 0..grid::PANEL_COUNT {
        for j in 0..=nc {
            for i in 0..=nc {
                f("h", p, i, j, g.xv(i), g.xv(j), g.idx_h(p, i, j));
            }
        }
    }
    for p in 0..grid::PANEL_COUNT {
        for j in 0..=nc {
            for i in 0..nc {
                f("x1", p, i, j, g.xc(i), g.xv(j), g.idx_1(p, i, j));
            }
        }
    }
    for p in 0..grid::PANEL_COUNT {
        for j in 0..nc {
            for i in 0..=nc {
                f("x2", p, i, j, g.xv(i), g.xc(j), g.idx_2(p, i, j));
            }
        }
    }
    for p in 0..grid::PANEL_COUNT {
        for j in 0..nc {
            for i in 0..nc {
                f("zeta", p, i, j, g.xc(i), g.xc(j), g.idx_z(p, i, j));
            }
        }
    }
}

fn grid_points_csv(g: &CubedSphereGrid) -> String {
    let mut out = String::from("panel,i,j,pointset,x,y,z\n");
    for_each_grid_point(g, |set, p, i, j, _x1, _x2, idx| {
        let xyz = match set {
            "h" => g.xh[idx],
            "x1" => g.x1[idx],
            "x2" => g.x2[idx],
            _ => g.xz[idx],
        };
        let _ = writeln!(
            out,
            "{p},{i},{j},{set},{:.16e},{:.16e},{:.16e}",
            xyz[0], xyz[1], xyz[2]
        );
    });
    out
}

fn grid_metric_csv(g: &CubedSphereGrid) -> String {
    let mut out = String::from("panel,i,j,pointset,J,Q11,Q12,Q22\n");
    for_each_grid_point(g, |set, p, i, j, x1, x2, _idx| {
        let m = grid::metric_at(p, x1, x2, g.a);
        let _ = writeln!(
            out,
            "{p},{i},{j},{set},{:.16e},{:.16e},{:.16e},{:.16e}",
            m.j, m.q11, m.q12, m.q22
        );
    });
    out
}

// ---------------------------------------------------------------------------
// run

fn cmd_run(args: RunArgs) -> Result<()> {
    let op = "run";
    let mut cfg = ConfigFile::load(args.config.as_deref())?;
    let case = require(cfg.resolve("case", args.case)?, "case")?;
    let case = parse_case(&case)?;
    let order = cfg.resolve("order", args.order)?.unwrap_or_else(|| "63-wave".into());
    let order = parse_order(&order)?;
    let default_nc = match case {
        TestCase::PoorlyResolved(_) => 64,
        _ => 48,
    };
    let nc = cfg.resolve("nc", args.nc)?.unwrap_or(default_nc);
    let days = cfg
        .resolve("days", args.days)?
        .unwrap_or(case.span_seconds() / experiments::DAY_SECONDS);
    let out: PathBuf = require(cfg.resolve("out", args.out)?, "out")?;
    cfg.finish()?;

    if !(days > 0.0) {
        return Err(Error::invalid(MODULE, op, "days must be positive"));
    }
    let model_config = case.model_config(order, nc);
    let t_end = days * experiments::DAY_SECONDS;

    let file_names = [
        "manifest.json",
        "diagnostics.csv",
        "h_initial.bin",
        "v1_initial.bin",
        "v2_initial.bin",
        "h_final.bin",
        "v1_final.bin",
        "v2_final.bin",
        "h_time_mean.bin",
    ];
    create_out_dir(&out)?;
    let mut config = BTreeMap::new();
    config.insert("case".into(), case.to_string());
    config.insert("order".into(), order.to_string());
    config.insert("nc".into(), nc.to_string());
    config.insert("days".into(), format!("{days:.16e}"));
    config.insert("dt".into(), format!("{:.16e}", model_config.dt));
    let outputs: Vec<String> = file_names[1..].iter().map(|s| s.to_string()).collect();
    RunManifest::new("run", config, &outputs).write(&out.join(file_names[0]))?;

    let started = std::time::Instant::now();
    let model = Model::new(model_config)?;
    let ic = experiments::initial_condition(case, &model.grid);
    let steps = (t_end / model.config.dt).round() as usize;
    log(&format!(
        "case {case}, order {order}, nc = {nc}: {steps} steps of dt = {} s",
        model.config.dt
    ));

    swe::write_snapshot(&out.join("h_initial.bin"), nc, PointSet::H, &ic.h.values)?;
    swe::write_snapshot(&out.join("v1_initial.bin"), nc, PointSet::X1, &ic.v.v1)?;
    swe::write_snapshot(&out.join("v2_initial.bin"), nc, PointSet::X2, &ic.v.v2)?;

    let sample_every = ((experiments::SAMPLE_SECONDS / model.config.dt).round() as usize).max(1);
    let progress_every = (steps / 10).max(1);
    let mut series = Vec::new();
    let mut mean = vec![0.0; model.grid.nh()];
    let mut count = 0usize;
    let mut max_rel_jump = 0.0f64;
    let finale = swe::integrate(&model, ic, t_end, |step, state| {
        for (m, h) in mean.iter_mut().zip(&state.h.values) {
            *m += h;
        }
        count += 1;
        if step % sample_every == 0 || step == steps {
            let d = swe::diagnostics(state, &model)?;
            let vmax = state
                .v
                .v1
                .iter()
                .chain(&state.v.v2)
                .fold(0.0f64, |acc, &v| acc.max(v.abs()));
            if vmax > 0.0 {
                max_rel_jump = max_rel_jump.max(d.tangential_jump / vmax);
            }
            series.push(swe::DiagnosticSample { t: state.t, diagnostics: d });
        }
        if step % progress_every == 0 && step > 0 {
            log(&format!("step {step}/{steps} (t = {:.2} d)", state.t / experiments::DAY_SECONDS));
        }
        Ok(())
    })?;
    for m in mean.iter_mut() {
        *m /= count as f64;
    }

    swe::write_snapshot(&out.join("h_final.bin"), nc, PointSet::H, &finale.h.values)?;
    swe::write_snapshot(&out.join("v1_final.bin"), nc, PointSet::X1, &finale.v.v1)?;
    swe::write_snapshot(&out.join("v2_final.bin"), nc, PointSet::X2, &finale.v.v2)?;
    swe::write_snapshot(&out.join("h_time_mean.bin"), nc, PointSet::H, &mean)?;
    swe::write_diagnostics_csv(&out.join("diagnostics.csv"), &series)?;

    let first = &series.first().expect("series has the initial sample").diagnostics;
    let last = &series.last().expect("series has the final sample").diagnostics;
    let mass_drift = ((last.mass - first.mass) / first.mass).abs();
    let energy_drift = (last.energy - first.energy) / first.energy;
    let checkerboard = experiments::checkerboard_fraction(&mean, &model.grid, &model.ops);
    println!("steps={steps}");
    println!("dt={:.16e}", model.config.dt);
    println!("mass_drift_rel={mass_drift:.16e}");
    println!("energy_drift_rel={energy_drift:.16e}");
    println!("max_tangential_jump_rel={max_rel_jump:.16e}");
    println!("time_mean_checkerboard_fraction={checkerboard:.16e}");
    println!("wall_seconds={:.3}", started.elapsed().as_secs_f64());
    log(&format!("finished; outputs in {}", out.display()));
    Ok(())
}

// ---------------------------------------------------------------------------
// converge

fn cmd_converge(args: ConvergeArgs) -> Result<()> {
    let mut cfg = ConfigFile::load(args.config.as_deref())?;
    let case = require(cfg.resolve("case", args.case)?, "case")?;
    let case = parse_case(&case)?;
    let order = cfg.resolve("order", args.order)?.unwrap_or_else(|| "63-wave".into());
    let order = parse_order(&order)?;
    let nc_list = cfg
        .resolve("nc-list", args.nc_list)?
        .unwrap_or_else(|| "24,48,96".into());
    let nc_list = parse_nc_list(&nc_list)?;
    let ref_nc = cfg.resolve("ref-nc", args.ref_nc)?.unwrap_or(192);
    let out: PathBuf = require(cfg.resolve("out", args.out)?, "out")?;
    cfg.finish()?;

    create_out_dir(&out)?;
    let mut config = BTreeMap::new();
    config.insert("case".into(), case.to_string());
    config.insert("order".into(), order.to_string());
    config.insert(
        "nc-list".into(),
        nc_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
    );
    config.insert("ref-nc".into(), ref_nc.to_string());
    let outputs = ["rates.csv".to_string()];
    RunManifest::new("converge", config, &outputs).write(&out.join("manifest.json"))?;

    let started = std::time::Instant::now();
    log(&format!(
        "case {case}, order {order}, grids {nc_list:?}, reference nc = {ref_nc}"
    ));
    let result = experiments::convergence_study(case, order, &nc_list, ref_nc)?;
    experiments::write_convergence_csv(&out.join("rates.csv"), &result)?;

    for (i, row) in result.rows.iter().enumerate() {
        let fmt = |r: Option<f64>| r.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
        log(&format!(
            "nc = {:3}: l2 = {:.6e}, linf = {:.6e}, rates {}/{}",
            row.nc,
            row.errors.l2,
            row.errors.linf,
            fmt(result.rates_l2[i]),
            fmt(result.rates_linf[i]),
        ));
    }
    let fmt_mean = |r: Option<f64>| r.map(|v| format!("{v:.16e}")).unwrap_or_else(|| "nan".into());
    println!("mean_rate_l2={}", fmt_mean(result.mean_rate_l2()));
    println!("mean_rate_linf={}", fmt_mean(result.mean_rate_linf()));
    println!("wall_seconds={:.3}", started.elapsed().as_secs_f64());
    log(&format!("finished; outputs in {}", out.display()));
    Ok(())
}

// ---------------------------------------------------------------------------
