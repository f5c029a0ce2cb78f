//! Command-line front end for `spheresos-core`: rate tables, certificate
//! construction and checking, and best-separable-state bounds, with JSON and
//! CSV output.
//!
//! Exit codes: 0 on success, 1 when the inputs could not be read or the
//! computation could not be carried out, 2 when a certificate, witness or
//! extension was computed but failed verification.

pub mod schema;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;
use spheresos_core::certificate::{build_certificate, verify_certificate, CertOptions, Certifiable, Certificate};
use spheresos_core::gegenbauer::{nodes_for_degree, GegenbauerBasis};
use spheresos_core::harmonic::Form;
use spheresos_core::quantum::{
    bss_gap_certificate, check_dps_conditions, monomial_count, verify_rsos_witness, QOperator, DPS_TOL,
    WITNESS_DISCREPANCY_TOL,
};
use spheresos_core::rho::rate_row;
use spheresos_core::{MatPoly, Poly};

use schema::*;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MAX_DEGREE_ENV: &str = "SPHERESOS_MAX_DEGREE";
pub const DEFAULT_MAX_DEGREE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "spheresos", version, about = "Sum-of-squares certificates on the unit sphere")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for every randomized search; recorded in the outputs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for grid sweeps (default: logical cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output format (csv only for rho-table).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Pass threshold override for the check being run.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the primary artifact here (and metadata to `<path>.meta.json`)
    /// instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Convergence-rate table over a (d, ell, n) grid.
    RhoTable(RhoTableArgs),
    /// Build and verify a certificate for a polynomial.
    Certify(CertifyArgs),
    /// Re-check a certificate, or a real-sum-of-squares witness.
    Verify(VerifyArgs),
    /// Best-separable-state bounds, or DPS extension checks.
    Qsep(QsepArgs),
    /// Gegenbauer data for one dimension.
    BasisDebug(BasisArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RhoTableArgs {
    /// Dimensions, e.g. `3:8` or `3,5,7`.
    #[arg(long)]
    pub d: String,
    /// Degrees ell as multiples of d, e.g. `2:10` gives ell = 2d, 3d, …, 10d.
    #[arg(long, conflicts_with = "ell")]
    pub ell_mult: Option<String>,
    /// Explicit degrees ell.
    #[arg(long)]
    pub ell: Option<String>,
    /// Half-degrees n of the target forms.
    #[arg(long, default_value = "1")]
    pub n: String,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub ell: usize,
    /// The input is a matrix polynomial.
    #[arg(long)]
    pub matrix: bool,
    /// Known range `m,M` of the form on the sphere (estimated otherwise).
    #[arg(long, value_parser = parse_bounds, allow_hyphen_values = true)]
    pub bounds: Option<(f64, f64)>,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Polynomial the certificate is for.
    #[arg(long, requires = "cert")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub cert: Option<PathBuf>,
    /// Bipartite operator the witness is for.
    #[arg(long, requires = "witness", conflicts_with = "input")]
    pub op: Option<PathBuf>,
    #[arg(long)]
    pub witness: Option<PathBuf>,
    /// Witness sample count (default: ten times the monomial count).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
}

#[derive(Debug, Clone, Args)]
pub struct QsepArgs {
    #[arg(long, requires = "ell")]
    pub op: Option<PathBuf>,
    #[arg(long)]
    pub ell: Option<usize>,
    /// Extension and state files to check against the DPS conditions.
    #[arg(long, num_args = 2, value_names = ["EXT", "RHO"], conflicts_with = "op")]
    pub check_extension: Option<Vec<PathBuf>>,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
}

#[derive(Debug, Clone, Args)]
pub struct BasisArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub max_degree: usize,
    /// Gauss rule size (default: exact for degree 2·max_degree).
    #[arg(long)]
    pub nodes: Option<usize>,
}

fn parse_bounds(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected m,M")?;
    let m = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let big_m = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((m, big_m))
}

/// `3:8`, `1,2` or a mix such as `1,4:6`; ranges are inclusive.
pub fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad number {t:?} in {s:?}: {e}"));
        match part.split_once(':') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(format!("empty range {part:?}"));
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    if out.is_empty() {
        return Err(format!("empty list {s:?}"));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid input; one message per problem found.
    Input(Vec<String>),
    /// The computation itself failed.
    Compute(spheresos_core::Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(v) => write!(f, "{}", v.join("\n")),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<spheresos_core::Error> for CliError {
    fn from(e: spheresos_core::Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn input_error(msg: impl Into<String>) -> CliError {
    CliError::Input(vec![msg.into()])
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        1
    }
}

/// What a successful run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Primary artifact (JSON or CSV text).
    pub artifact: String,
    /// Short human-readable summary, if any.
    pub summary: Option<String>,
    /// Whether the computed object passed verification.
    pub passed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.passed {
            0
        } else {
            2
        }
    }
}

fn max_degree() -> Result<usize, CliError> {
    match std::env::var(MAX_DEGREE_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| input_error(format!("{MAX_DEGREE_ENV}: not a number: {v:?}"))),
        Err(_) => Ok(DEFAULT_MAX_DEGREE),
    }
}

fn check_degree(what: &str, degree: usize) -> Result<(), CliError> {
    let cap = max_degree()?;
    if degree > cap {
        return Err(input_error(format!("{what} = {degree} exceeds the cap {cap} set by {MAX_DEGREE_ENV}")));
    }
    Ok(())
}

/// Reads and parses a JSON file. Syntax errors carry line and column;
/// type errors are reported with the serde path and position.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    parse_json(&text).map_err(|e| match e {
        CliError::Input(v) => CliError::Input(v.into_iter().map(|m| format!("{}: {m}", path.display())).collect()),
        other => other,
    })
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| {
        let kind = match e.classify() {
            serde_json::error::Category::Syntax | serde_json::error::Category::Eof => "malformed JSON",
            _ => "schema violation",
        };
        // serde's message already ends with "at line L column C"
        input_error(format!("{kind}: {e}"))
    })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

fn violations(path: &Path, v: Violations) -> CliError {
    CliError::Input(v.into_iter().map(|m| format!("{}: {m}", path.display())).collect())
}

fn json_only(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.format {
        Some(Format::Csv) => Err(input_error("--format csv is only available for rho-table")),
        _ => Ok(()),
    }
}

fn tol_override(cfg: &RunConfig) -> Result<Option<f64>, CliError> {
    match cfg.tol {
        Some(t) if !(t >= 0.0 && t.is_finite()) => Err(input_error("--tol must be a nonnegative number")),
        t => Ok(t),
    }
}

/// Runs one command. Errors map to exit code 1; a returned outcome that did
/// not pass maps to 2.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match &cfg.command {
        Command::RhoTable(a) => rho_table(cfg, a),
        Command::Certify(a) => certify(cfg, a),
        Command::Verify(a) => verify(cfg, a),
        Command::Qsep(a) => qsep(cfg, a),
        Command::BasisDebug(a) => basis_debug(cfg, a),
    }
}

fn rho_table(cfg: &RunConfig, a: &RhoTableArgs) -> Result<Outcome, CliError> {
    let ds = parse_list(&a.d).map_err(input_error)?;
    let ns = parse_list(&a.n).map_err(input_error)?;
    let mut grid = Vec::new();
    match (&a.ell, &a.ell_mult) {
        (Some(ells), None) => {
            let ells = parse_list(ells).map_err(input_error)?;
            for &d in &ds {
                grid.extend(ells.iter().flat_map(|&l| ns.iter().map(move |&n| (d, l, n))));
            }
        }
        (None, Some(mults)) => {
            let mults = parse_list(mults).map_err(input_error)?;
            for &d in &ds {
                grid.extend(mults.iter().flat_map(|&m| ns.iter().map(move |&n| (d, m * d, n))));
            }
        }
        _ => return Err(input_error("give exactly one of --ell and --ell-mult")),
    }
    grid.sort_unstable();
    grid.dedup();
    for &(_, ell, n) in &grid {
        check_degree("ell", ell)?;
        check_degree("2n", 2 * n)?;
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        if j == 0 {
            return Err(input_error("--jobs must be at least 1"));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| input_error(e.to_string()))?;
    let rows = pool.install(|| grid.par_iter().map(|&(d, ell, n)| rate_row(d, ell, n)).collect::<Result<Vec<_>, _>>())?;

    let artifact = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => rate_csv(&rows, cfg.seed)?,
        Format::Json => to_json(&RateTableJson {
            seed: cfg.seed,
            version: VERSION.to_string(),
            rows: rows.iter().map(RateRowJson::from_row).collect(),
        }),
    };
    Ok(Outcome { artifact, summary: Some(format!("{} rows", rows.len())), passed: true })
}

/// The first line is a `#` comment carrying the version and seed; the header
/// follows.
fn rate_csv(rows: &[spheresos_core::rho::RateRow], seed: u64) -> Result<String, CliError> {
    let mut out = format!("# spheresos {VERSION} seed={seed}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for r in rows {
            w.serialize(RateCsvRow::from_row(r)).map_err(|e| input_error(e.to_string()))?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(out).expect("csv output is utf-8"))
}

/// Parses a CSV rate table written by `rho-table`.
pub fn parse_rate_csv(text: &str) -> Result<Vec<RateCsvRow>, CliError> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    r.deserialize().collect::<Result<Vec<_>, _>>().map_err(|e| input_error(e.to_string()))
}

fn apply_witness_tol(report: &mut spheresos_core::certificate::VerificationReport, tol: Option<f64>) {
    if let Some(t) = tol {
        report.witness_ok = report.witness_min >= -t;
        report.passed = report.shape_ok && report.kernel_ok && report.funk_hecke_ok && report.witness_ok && report.margin_ok;
    }
}

fn certify_form<F>(cfg: &RunConfig, a: &CertifyArgs, f: &F) -> Result<Outcome, CliError>
where
    F: Certifiable + FormJson,
{
    let opts = CertOptions { restarts: a.restarts, seed: cfg.seed, delta: None };
    let mut cert = build_certificate(f, a.ell, a.bounds, &opts)?;
    apply_witness_tol(&mut cert.verification, tol_override(cfg)?);
    let summary = summarize(&cert);
    let passed = cert.verification.passed;
    Ok(Outcome { artifact: to_json(&CertificateJson::from_certificate(&cert, cfg.seed)), summary: Some(summary), passed })
}

fn summarize<F: Form>(c: &Certificate<F>) -> String {
    let v = &c.verification;
    format!(
        "certificate: d={} ell={} degree={} delta={:.6e} range=[{:.6e}, {:.6e}]\n\
         checks: shape={} kernel={} funk-hecke={} (residual {:.2e}) witness={} (min {:.3e}) margin={} ({:.2e})\n\
         result: {}",
        c.spec.d,
        c.spec.ell,
        2 * c.spec.n,
        c.delta,
        c.normalization.m,
        c.normalization.big_m,
        v.shape_ok,
        v.kernel_ok,
        v.funk_hecke_ok,
        v.funk_hecke_residual,
        v.witness_ok,
        v.witness_min,
        v.margin_ok,
        v.margin,
        if v.passed { "PASSED" } else { "FAILED" }
    )
}

fn certify(cfg: &RunConfig, a: &CertifyArgs) -> Result<Outcome, CliError> {
    json_only(cfg)?;
    check_degree("ell", a.ell)?;
    if a.matrix {
        let j: MatPolyJson = read_json(&a.input)?;
        check_degree("degree", j.degree)?;
        let f = j.to_matpoly().map_err(|v| violations(&a.input, v))?;
        certify_form(cfg, a, &f)
    } else {
        let j: PolyJson = read_json(&a.input)?;
        check_degree("degree", j.degree)?;
        let f = j.to_poly().map_err(|v| violations(&a.input, v))?;
        certify_form(cfg, a, &f)
    }
}

fn verify_form<F>(cfg: &RunConfig, a: &VerifyArgs, input: &Path, cert_path: &Path) -> Result<Outcome, CliError>
where
    F: Certifiable + FormJson,
{
    let fj: F::Json = read_json(input)?;
    let f = F::from_json(&fj).map_err(|v| violations(input, v))?;
    let cj: CertificateJson<F::Json> = read_json(cert_path)?;
    let mut cert: Certificate<F> = cj.to_certificate().map_err(|v| violations(cert_path, v))?;
    let opts = CertOptions { restarts: a.restarts, seed: cfg.seed, delta: None };
    cert.verification = verify_certificate(&f, &cert, &opts);
    apply_witness_tol(&mut cert.verification, tol_override(cfg)?);
    let summary = summarize(&cert);
    let passed = cert.verification.passed;
    Ok(Outcome { artifact: to_json(&VerificationJson::from_report(&cert.verification)), summary: Some(summary), passed })
}

fn verify(cfg: &RunConfig, a: &VerifyArgs) -> Result<Outcome, CliError> {
    json_only(cfg)?;
    match (&a.input, &a.cert, &a.op, &a.witness) {
        (Some(input), Some(cert), None, None) => {
            // the certificate says which kind of form it covers
            let text = std::fs::read_to_string(cert).map_err(|e| input_error(format!("{}: {e}", cert.display())))?;
            let value: serde_json::Value = parse_json(&text).map_err(|e| match e {
                CliError::Input(v) => CliError::Input(v.into_iter().map(|m| format!("{}: {m}", cert.display())).collect()),
                other => other,
            })?;
            match value.get("kind").and_then(|k| k.as_str()) {
                Some("matrix") => verify_form::<MatPoly>(cfg, a, input, cert),
                Some("scalar") => verify_form::<Poly>(cfg, a, input, cert),
                _ => Err(input_error(format!("{}: kind: expected \"scalar\" or \"matrix\"", cert.display()))),
            }
        }
        (None, None, Some(op), Some(w)) => {
            let m = read_json::<QOperatorJson>(op)?.to_operator().map_err(|v| violations(op, v))?;
            let blocks = read_json::<WitnessJson>(w)?.to_operators().map_err(|v| violations(w, v))?;
            let (da, db) = match m.dims() {
                [a, b] => (*a, *b),
                _ => return Err(input_error(format!("{}: expected a bipartite operator", op.display()))),
            };
            let ell = blocks.len().saturating_sub(1);
            if ell == 0 {
                return Err(input_error(format!("{}: blocks: need W_0, …, W_ell with ell >= 1", w.display())));
            }
            let samples = a.samples.unwrap_or(10 * monomial_count(da, db, ell));
            let mut r = verify_rsos_witness(&m, &blocks, samples, cfg.seed)?;
            let tol = tol_override(cfg)?.unwrap_or(WITNESS_DISCREPANCY_TOL);
            r.passed = r.non_psd.is_empty() && r.max_discrepancy <= tol;
            let summary = format!(
                "witness: ell={ell} samples={} max discrepancy {:.3e} non-PSD blocks {:?}\nresult: {}",
                r.samples,
                r.max_discrepancy,
                r.non_psd,
                if r.passed { "PASSED" } else { "FAILED" }
            );
            Ok(Outcome { artifact: to_json(&WitnessReportJson::from_report(&r, cfg.seed)), summary: Some(summary), passed: r.passed })
        }
        _ => Err(input_error("verify needs either --input and --cert, or --op and --witness")),
    }
}

fn qsep(cfg: &RunConfig, a: &QsepArgs) -> Result<Outcome, CliError> {
    json_only(cfg)?;
    if let Some(paths) = &a.check_extension {
        let (ext_path, rho_path) = (&paths[0], &paths[1]);
        let ext = read_json::<QOperatorJson>(ext_path)?.to_operator().map_err(|v| violations(ext_path, v))?;
        let rho = read_json::<QOperatorJson>(rho_path)?.to_operator().map_err(|v| violations(rho_path, v))?;
        let mut r = check_dps_conditions(&ext, &rho)?;
        if let Some(t) = tol_override(cfg)? {
            let ok = |v: f64| v >= -t;
            r.positivity_ok = ok(r.positivity);
            r.reduction_ok = ok(r.reduction);
            r.symmetry_ok = ok(r.symmetry);
            r.ppt_ok = r.ppt.iter().all(|&v| ok(v));
            r.passed = r.positivity_ok && r.reduction_ok && r.symmetry_ok && r.ppt_ok;
        }
        let summary = format!(
            "extension: positivity {:.2e} reduction {:.2e} symmetry {:.2e} ppt {:?} (tolerance {:.0e})\nresult: {}",
            r.positivity,
            r.reduction,
            r.symmetry,
            r.ppt,
            cfg.tol.unwrap_or(DPS_TOL),
            if r.passed { "PASSED" } else { "FAILED" }
        );
        return Ok(Outcome { artifact: to_json(&DpsJson::from_report(&r, cfg.seed)), summary: Some(summary), passed: r.passed });
    }
    let (Some(op_path), Some(ell)) = (&a.op, a.ell) else {
        return Err(input_error("qsep needs --op and --ell, or --check-extension EXT RHO"));
    };
    check_degree("ell", ell)?;
    let op: QOperator = read_json::<QOperatorJson>(op_path)?.to_operator().map_err(|v| violations(op_path, v))?;
    let g = bss_gap_certificate(&op, ell, a.restarts, cfg.seed)?;
    let passed = g.cert.verification.passed;
    let summary = format!(
        "h_sep in [{:.9}, {:.9}] (level {:.9}, {} doublings)\nresult: {}",
        g.h_lower,
        g.h_certified_upper,
        g.h_hat,
        g.doublings,
        if passed { "PASSED" } else { "FAILED" }
    );
    Ok(Outcome { artifact: to_json(&GapJson::from_gap(&g, op.dims(), ell, cfg.seed)), summary: Some(summary), passed })
}

fn basis_debug(cfg: &RunConfig, a: &BasisArgs) -> Result<Outcome, CliError> {
    json_only(cfg)?;
    check_degree("max-degree", a.max_degree)?;
    let basis = GegenbauerBasis::new(a.d, a.max_degree)?;
    let nodes = a.nodes.unwrap_or_else(|| nodes_for_degree(2 * a.max_degree));
    let rule = basis.gauss_rule(nodes)?;
    let endpoint_values = (0..=a.max_degree).map(|k| basis.endpoint_value(k)).collect::<Result<Vec<_>, _>>()?;
    let recurrence = basis.recurrence().iter().enumerate().map(|(k, r)| RecurrenceRowJson { k, a: r.a, b: r.b, c: r.c }).collect();
    let out = BasisJson {
        seed: cfg.seed,
        version: VERSION.to_string(),
        d: a.d,
        max_degree: a.max_degree,
        endpoint_values,
        recurrence,
        gauss_rule: GaussRuleJson { nodes: rule.nodes, weights: rule.weights },
    };
    Ok(Outcome { artifact: to_json(&out), summary: None, passed: true })
}

/// Writes the artifact to `--output` (with a metadata sidecar) or stdout,
/// and the summary to stderr.
pub fn emit(cfg: &RunConfig, outcome: &Outcome, started: Instant, args: &[String]) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, &outcome.artifact)?;
            let meta = serde_json::json!({
                "version": VERSION,
                "seed": cfg.seed,
                "args": args,
                "unix_time": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
                "elapsed_ms": started.elapsed().as_millis() as u64,
                "passed": outcome.passed,
            });
            std::fs::write(sidecar_path(path), to_json(&meta))?;
        }
        None => std::io::stdout().write_all(outcome.artifact.as_bytes())?,
    }
    if let Some(s) = &outcome.summary {
        eprintln!("{s}");
    }
    Ok(())
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}
