//! Command-line driver. The binary is a thin wrapper around [`run`].
//!
//! Every flag can also come from a JSON config file (`--config`) whose keys
//! are the flag names with `-` replaced by `_`; flags given on the command
//! line win.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::channels::{kraus_to_choi, nqubit_ad};
use crate::codes::{leung_code, optimized_code, CodePair};
use crate::error::{QecError, Result};
use crate::experiments::{
    compare_codewords, default_grid, fit_infidelity_with, linspace, sweep, write_csv, CodewordComparison, FitResult,
    Scheme, SweepConfig, SweepOutput,
};
use crate::fidelity::{scheme_fidelity, Decoding, Recovery, SchemeSpec};
use crate::optimizer::{alternate_optimize, OptimizationResult, SdpSettings};
use crate::qec_criteria::{
    deviation_max, fit_power_law, qec_matrices, subset_residual, DeviationReport, ErrorSubset, QecMatrices, ResidualFit,
};
use crate::recovery::{analytical_recovery, fitted_recovery, verify_first_order, FirstOrderReport, RecoveryFixture};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "adqec", version, about = "Noise-adapted error correction for amplitude damping")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GlobalArgs {
    /// JSON file with default values for any flag.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Single damping probability.
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Grid `a:b:n` of n evenly spaced points from a to b.
    #[arg(long, global = true, value_name = "A:B:N")]
    pub gamma_range: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Subproblem tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub outer_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
    #[arg(long, global = true)]
    pub max_rounds: Option<usize>,
    #[arg(long, global = true)]
    pub inner_iters: Option<usize>,
    /// Try extrapolated encodings during the alternation.
    #[arg(long, global = true)]
    #[serde(default)]
    pub extrapolate: bool,
    /// Output file; stdout if absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Subcommand-specific values, keyed like the subcommand flags.
    #[arg(skip)]
    pub sweep: SweepArgs,
    #[arg(skip)]
    pub criteria: CriteriaArgs,
    #[arg(skip)]
    pub recover: RecoverArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Entanglement fidelity of code/recovery schemes over a γ grid.
    Sweep(SweepArgs),
    /// Alternating optimization of encoding and recovery.
    Optimize,
    /// QEC matrices, their deviation from correctability and residual orders.
    Criteria(CriteriaArgs),
    /// Closed-form recovery channels and their first-order checks.
    Recover(RecoverArgs),
    /// Compares optimized code spaces with the closed-form code.
    CompareCodewords,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepArgs {
    /// Schemes to evaluate (comma separated); all except custom by default.
    #[arg(long, value_delimiter = ',')]
    pub scheme: Vec<String>,
    /// Codeword JSON for the custom scheme.
    #[arg(long)]
    pub code: Option<PathBuf>,
    /// Fit a cubic term alongside γ².
    #[arg(long)]
    pub cubic: bool,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CriteriaArgs {
    /// `optimized`, `leung`, or a codeword JSON file.
    #[arg(long)]
    pub code: Option<String>,
    /// `e01` or `all`.
    #[arg(long)]
    pub subset: Option<String>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecoverArgs {
    /// `analytical` or `fitted`.
    #[arg(long)]
    pub fixture: Option<String>,
}

/// Fully resolved options shared by the subcommands.
#[derive(Debug, Clone)]
struct Resolved {
    grid: Option<Vec<f64>>,
    settings: SdpSettings,
    out: Option<PathBuf>,
    format: Option<Format>,
}

/// Outcome of a subcommand: the bytes to emit and whether every solve converged.
struct Output {
    body: Vec<u8>,
    sidecar: Option<Vec<u8>>,
    converged: bool,
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("warning: a solver stopped at its iteration cap");
            EXIT_NONCONVERGENCE
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error.
pub fn exit_code(e: &QecError) -> i32 {
    match e {
        QecError::Io(_) => EXIT_IO,
        QecError::NonConvergence(..) => EXIT_NONCONVERGENCE,
        _ => EXIT_VALIDATION,
    }
}

fn execute(cli: Cli) -> Result<bool> {
    let global = merge_config(cli.global)?;
    let resolved = resolve(&global)?;
    for w in resolved.settings.validate()? {
        eprintln!("warning: {w}");
    }
    let output = match cli.command {
        Command::Sweep(a) => run_sweep(&resolved, &merge_sweep(a, global.sweep))?,
        Command::Optimize => run_optimize(&resolved)?,
        Command::Criteria(a) => run_criteria(&resolved, &merge_criteria(a, global.criteria))?,
        Command::Recover(a) => run_recover(&resolved, &merge_recover(a, global.recover))?,
        Command::CompareCodewords => run_compare(&resolved)?,
    };
    emit(&resolved, &output)?;
    Ok(output.converged)
}

fn merge_config(cli: GlobalArgs) -> Result<GlobalArgs> {
    let Some(path) = cli.config.clone() else { return Ok(cli) };
    let file: GlobalArgs = serde_json::from_str(&fs::read_to_string(&path)?)
        .map_err(|e| QecError::Invalid(format!("config {}: {e}", path.display())))?;
    Ok(GlobalArgs {
        config: Some(path),
        gamma: cli.gamma.or(file.gamma),
        gamma_range: cli.gamma_range.or(file.gamma_range),
        seed: cli.seed.or(file.seed),
        restarts: cli.restarts.or(file.restarts),
        tol: cli.tol.or(file.tol),
        outer_tol: cli.outer_tol.or(file.outer_tol),
        max_iters: cli.max_iters.or(file.max_iters),
        max_rounds: cli.max_rounds.or(file.max_rounds),
        inner_iters: cli.inner_iters.or(file.inner_iters),
        extrapolate: cli.extrapolate || file.extrapolate,
        out: cli.out.or(file.out),
        format: cli.format.or(file.format),
        sweep: file.sweep,
        criteria: file.criteria,
        recover: file.recover,
    })
}

fn merge_sweep(cli: SweepArgs, file: SweepArgs) -> SweepArgs {
    SweepArgs {
        scheme: if cli.scheme.is_empty() { file.scheme } else { cli.scheme },
        code: cli.code.or(file.code),
        cubic: cli.cubic || file.cubic,
    }
}

fn merge_criteria(cli: CriteriaArgs, file: CriteriaArgs) -> CriteriaArgs {
    CriteriaArgs { code: cli.code.or(file.code), subset: cli.subset.or(file.subset) }
}

fn merge_recover(cli: RecoverArgs, file: RecoverArgs) -> RecoverArgs {
    RecoverArgs { fixture: cli.fixture.or(file.fixture) }
}

/// Parses `a:b:n`.
pub fn parse_gamma_range(s: &str) -> Result<Vec<f64>> {
    let bad = || QecError::Invalid(format!("gamma range {s:?} is not of the form a:b:n"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a = f64::from_str(parts[0].trim()).map_err(|_| bad())?;
    let b = f64::from_str(parts[1].trim()).map_err(|_| bad())?;
    let n = usize::from_str(parts[2].trim()).map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() || b < a || (n > 1 && a == b) {
        return Err(bad());
    }
    Ok(linspace(a, b, n))
}

fn resolve(g: &GlobalArgs) -> Result<Resolved> {
    let grid = match (g.gamma, &g.gamma_range) {
        (Some(_), Some(_)) => return Err(QecError::Invalid("give either --gamma or --gamma-range, not both".into())),
        (Some(x), None) => Some(vec![x]),
        (None, Some(r)) => Some(parse_gamma_range(r)?),
        (None, None) => None,
    };
    if let Some(x) = grid.iter().flatten().find(|x| !x.is_finite() || !(0.0..=1.0).contains(*x)) {
        return Err(QecError::Domain(format!("γ = {x} outside [0, 1]")));
    }
    let d = SdpSettings::default();
    let settings = SdpSettings {
        tol: g.tol.unwrap_or(d.tol),
        max_iters: g.max_iters.unwrap_or(d.max_iters),
        outer_tol: g.outer_tol.unwrap_or(d.outer_tol),
        max_rounds: g.max_rounds.unwrap_or(d.max_rounds),
        inner_iters: g.inner_iters.unwrap_or(d.inner_iters),
        extrapolate: g.extrapolate,
        restarts: g.restarts.unwrap_or(d.restarts),
        seed: g.seed.unwrap_or(d.seed),
    };
    Ok(Resolved { grid, settings, out: g.out.clone(), format: g.format })
}

fn emit(r: &Resolved, output: &Output) -> Result<()> {
    match &r.out {
        Some(path) => {
            fs::write(path, &output.body)?;
            if let Some(side) = &output.sidecar {
                fs::write(sidecar_path(path)?, side)?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&output.body)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// `results.csv` gets its full record in `results.json`.
fn sidecar_path(path: &Path) -> Result<PathBuf> {
    let side = path.with_extension("json");
    if side == path {
        return Err(QecError::Invalid(format!("{} would be overwritten by its JSON sidecar", path.display())));
    }
    Ok(side)
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| QecError::Io(e.into_error()))
}

fn read_code(path: &Path) -> Result<CodePair> {
    serde_json::from_str(&fs::read_to_string(path)?)
        .map_err(|e| QecError::Invalid(format!("code file {}: {e}", path.display())))
}

#[derive(Serialize)]
struct SchemeFit {
    scheme: String,
    fit: Option<FitResult>,
    /// Why no fit was made, if it was skipped.
    note: Option<String>,
}

#[derive(Serialize)]
struct SweepReport<'a> {
    #[serde(flatten)]
    output: &'a SweepOutput,
    fits: Vec<SchemeFit>,
}

fn run_sweep(r: &Resolved, a: &SweepArgs) -> Result<Output> {
    let schemes: Vec<Scheme> = if a.scheme.is_empty() {
        let mut s: Vec<Scheme> = Scheme::ALL.into_iter().filter(|s| *s != Scheme::Custom).collect();
        if a.code.is_some() {
            s.push(Scheme::Custom);
        }
        s
    } else {
        a.scheme.iter().map(|s| s.trim().parse()).collect::<Result<_>>()?
    };
    let custom_code = a.code.as_deref().map(read_code).transpose()?;
    let config = SweepConfig {
        grid: r.grid.clone().unwrap_or_else(default_grid),
        schemes: schemes.clone(),
        settings: r.settings.clone(),
        custom_code,
    };
    let output = sweep(&config)?;
    let fits = schemes
        .iter()
        .map(|s| {
            let rows: Vec<_> =
                output.records.iter().filter(|x| x.scheme == s.name() && x.gamma > 0.0).cloned().collect();
            match fit_infidelity_with(&rows, a.cubic) {
                Ok(fit) => {
                    eprintln!("{}: 1 - F ≈ {:.4} γ²", s.name(), fit.coefficient);
                    SchemeFit { scheme: s.name().into(), fit: Some(fit), note: None }
                }
                Err(e) => SchemeFit { scheme: s.name().into(), fit: None, note: Some(e.to_string()) },
            }
        })
        .collect();
    let report = to_json(&SweepReport { output: &output, fits })?;
    let (body, sidecar) = match r.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut body = Vec::new();
            write_csv(&output.records, &mut body)?;
            (body, r.out.as_ref().map(|_| report))
        }
        Format::Json => (report, None),
    };
    Ok(Output { body, sidecar, converged: output.converged() })
}

fn require_grid(r: &Resolved, what: &str) -> Result<Vec<f64>> {
    r.grid.clone().ok_or_else(|| QecError::Invalid(format!("{what} needs --gamma or --gamma-range")))
}

fn run_optimize(r: &Resolved) -> Result<Output> {
    let grid = require_grid(r, "optimize")?;
    let results = grid
        .iter()
        .map(|&g| alternate_optimize(&kraus_to_choi(&nqubit_ad(g, 4)?), &r.settings).map(|res| (g, res)))
        .collect::<Result<Vec<(f64, OptimizationResult)>>>()?;
    let converged = results.iter().all(|(_, x)| x.converged);
    for (g, res) in &results {
        eprintln!(
            "γ = {g}: F = {:.10} after {} rounds (restart {}{})",
            res.fidelity,
            res.rounds,
            res.restart_index,
            if res.outer_converged { "" } else { ", round cap reached" }
        );
    }
    let body = match r.format.unwrap_or(Format::Json) {
        Format::Json => {
            #[derive(Serialize)]
            struct Entry<'a> {
                gamma: f64,
                result: &'a OptimizationResult,
            }
            to_json(&results.iter().map(|(gamma, result)| Entry { gamma: *gamma, result }).collect::<Vec<_>>())?
        }
        Format::Csv => {
            let mut rows = Vec::new();
            for (g, res) in &results {
                for t in &res.restarts {
                    for (round, f) in t.fidelity_trace.iter().enumerate() {
                        rows.push(vec![
                            g.to_string(),
                            t.restart_index.to_string(),
                            (round + 1).to_string(),
                            format!("{f:.11e}"),
                        ]);
                    }
                }
            }
            csv_bytes(&["gamma", "restart", "round", "fidelity"], rows)?
        }
    };
    Ok(Output { body, sidecar: None, converged })
}

#[derive(Serialize)]
struct CriteriaPoint {
    gamma: f64,
    residual: f64,
    matrices: QecMatrices,
    deviation: DeviationReport,
}

#[derive(Serialize)]
struct CriteriaReport {
    code: String,
    subset: ErrorSubset,
    points: Vec<CriteriaPoint>,
    /// Log-log slope of the residual, when the grid allows a fit.
    fit: Option<ResidualFit>,
    note: Option<String>,
}

fn run_criteria(r: &Resolved, a: &CriteriaArgs) -> Result<Output> {
    let subset: ErrorSubset = a.subset.as_deref().unwrap_or("all").parse()?;
    let code_name = a.code.clone().unwrap_or_else(|| "optimized".into());
    let file_code = match code_name.as_str() {
        "optimized" | "leung" => None,
        path => Some(read_code(Path::new(path))?),
    };
    let code_at = |g: f64| -> Result<CodePair> {
        match code_name.as_str() {
            "optimized" => optimized_code(g),
            "leung" => Ok(leung_code()),
            _ => Ok(file_code.clone().expect("code file was read")),
        }
    };
    let grid = r.grid.clone().unwrap_or_else(default_grid);
    let points = grid
        .iter()
        .map(|&g| {
            let matrices = qec_matrices(&code_at(g)?, g)?;
            Ok(CriteriaPoint {
                gamma: g,
                residual: subset_residual(&matrices, subset),
                deviation: deviation_max(&matrices),
                matrices,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fit_input: Vec<(f64, f64)> = points.iter().filter(|p| p.gamma > 0.0).map(|p| (p.gamma, p.residual)).collect();
    let (fit, note) = if fit_input.len() >= 6 {
        match fit_power_law(fit_input) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, Some("a residual fit needs at least 6 positive grid points".to_string()))
    };
    let body = match r.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&CriteriaReport { code: code_name, subset, points, fit, note })?,
        Format::Csv => csv_bytes(
            &["gamma", "residual", "deviation_max"],
            points
                .iter()
                .map(|p| {
                    vec![p.gamma.to_string(), format!("{:.11e}", p.residual), format!("{:.11e}", p.deviation.max_abs)]
                })
                .collect(),
        )?,
    };
    Ok(Output { body, sidecar: None, converged: true })
}

#[derive(Serialize)]
struct RecoverPoint {
    gamma: f64,
    /// Entanglement fidelity of the optimized code with this recovery.
    fidelity: f64,
    report: FirstOrderReport,
    fixture: RecoveryFixture,
}

fn run_recover(r: &Resolved, a: &RecoverArgs) -> Result<Output> {
    let kind = a.fixture.as_deref().unwrap_or("analytical");
    let build: fn(f64) -> Result<RecoveryFixture> = match kind {
        "analytical" => analytical_recovery,
        "fitted" => fitted_recovery,
        other => return Err(QecError::Invalid(format!("unknown fixture {other:?} (expected analytical or fitted)"))),
    };
    let grid = require_grid(r, "recover")?;
    let points = grid
        .iter()
        .map(|&g| {
            let fixture = build(g)?;
            if fixture.outside_fit_range {
                eprintln!("warning: γ = {g} lies outside the range the fitted constants cover");
            }
            let code = optimized_code(g)?;
            let report = verify_first_order(&code, &fixture, g)?;
            let spec = SchemeSpec::new(
                code,
                nqubit_ad(g, 4)?,
                Recovery::Physical(fixture.channel.clone(), Decoding::InverseEncoding),
            )?;
            Ok(RecoverPoint { gamma: g, fidelity: scheme_fidelity(&spec)?, report, fixture })
        })
        .collect::<Result<Vec<_>>>()?;
    let body = match r.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&points)?,
        Format::Csv => csv_bytes(
            &["gamma", "fixture", "fidelity", "completeness_defect", "first_order_min_fidelity"],
            points
                .iter()
                .map(|p| {
                    vec![
                        p.gamma.to_string(),
                        kind.to_string(),
                        format!("{:.11e}", p.fidelity),
                        format!("{:.11e}", p.fixture.completeness_defect),
                        format!("{:.11e}", p.report.min_fidelity),
                    ]
                })
                .collect(),
        )?,
    };
    Ok(Output { body, sidecar: None, converged: true })
}

fn run_compare(r: &Resolved) -> Result<Output> {
    let grid = r.grid.clone().unwrap_or_else(default_grid);
    let results: Vec<CodewordComparison> = compare_codewords(&grid, &r.settings)?;
    let converged = results.iter().all(|c| c.converged);
    let body = match r.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&results)?,
        Format::Csv => csv_bytes(
            &["gamma", "overlap", "raw_overlap", "fidelity"],
            results
                .iter()
                .map(|c| {
                    vec![
                        c.gamma.to_string(),
                        format!("{:.11e}", c.overlap),
                        format!("{:.11e}", c.raw_overlap),
                        format!("{:.11e}", c.fidelity),
                    ]
                })
                .collect(),
        )?,
    };
    Ok(Output { body, sidecar: None, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_range_parsing() {
        assert_eq!(parse_gamma_range("0:0.1:3").unwrap(), vec![0.0, 0.05, 0.1]);
        assert_eq!(parse_gamma_range("0.02:0.02:1").unwrap(), vec![0.02]);
        for bad in ["0:1", "a:1:2", "0:1:0", "1:0:3", "0.1:0.1:4"] {
            assert!(parse_gamma_range(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(exit_code(&QecError::Invalid("x".into())), EXIT_VALIDATION);
        assert_eq!(exit_code(&QecError::NonConvergence("solver", 3)), EXIT_NONCONVERGENCE);
        assert_eq!(exit_code(&QecError::Io(std::io::Error::other("x"))), EXIT_IO);
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"seed": 5, "tol": 1e-6, "recover": {"fixture": "fitted"}}"#).unwrap();
        let cli = Cli::try_parse_from(["adqec", "--config", path.to_str().unwrap(), "--seed", "9", "recover"]).unwrap();
        let g = merge_config(cli.global).unwrap();
        assert_eq!(g.seed, Some(9));
        assert_eq!(g.tol, Some(1e-6));
        assert_eq!(g.recover.fixture.as_deref(), Some("fitted"));

        fs::write(&path, r#"{"sede": 5}"#).unwrap();
        let cli = Cli::try_parse_from(["adqec", "--config", path.to_str().unwrap(), "optimize"]).unwrap();
        assert!(matches!(merge_config(cli.global), Err(QecError::Invalid(_))));
    }

    #[test]
    fn sidecar_cannot_overwrite_output() {
        assert_eq!(sidecar_path(Path::new("r.csv")).unwrap(), PathBuf::from("r.json"));
        assert!(sidecar_path(Path::new("r.json")).is_err());
    }
}
