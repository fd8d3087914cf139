use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use l0pen::spo::spo_objective;
use l0pen::verify::{complementarity_sum, StationarityCertificate, ORACLE_MAX_DIM};
use l0pen::{
    certificate, exact_penalty_solve, gen_dictionary, gen_portfolio, instance_hash, load_instance,
    save_instance, spo_bruteforce, threshold_solve, ComplementarityMeasure, InnerSolver, Instance,
    SolveReport, SolveStatus, ThresholdKind,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{Config, Dims, Kind, Method};
use crate::error::{CliError, CliResult};
use crate::profile;

/// JSON file written by `solve` and read back by `verify`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub instance_hash: String,
    pub config_hash: String,
    pub config: Config,
    pub method: Method,
    pub report: SolveReport,
    /// Present for the penalty methods.
    pub certificate: Option<StationarityCertificate>,
}

pub fn gen(inst: &Instance, out: &Path, force: bool) -> CliResult<String> {
    if out.exists() && !force {
        return Err(CliError::Usage(format!(
            "{} already exists (pass --force to overwrite)",
            out.display()
        )));
    }
    save_instance(out, inst)?;
    Ok(instance_hash(inst))
}

pub fn gen_instance(kind: Kind, dims: Dims, seed: u64) -> CliResult<Instance> {
    Ok(match (kind, dims) {
        (Kind::Portfolio, Dims::Assets(n)) => Instance::Portfolio(gen_portfolio(n, seed)?),
        (Kind::Dictionary, Dims::Dictionary { n, l, m }) => {
            Instance::Dictionary(gen_dictionary(n, l, m, seed)?)
        }
        (Kind::Portfolio, _) => return Err(CliError::Usage("portfolio needs --n only".into())),
        (Kind::Dictionary, _) => {
            return Err(CliError::Usage("dictionary needs --n, --l and --m".into()))
        }
    })
}

fn kind_of(inst: &Instance) -> Kind {
    match inst {
        Instance::Portfolio(_) => Kind::Portfolio,
        Instance::Dictionary(_) => Kind::Dictionary,
    }
}

/// Config for solving `inst`: the file at `path` if given, with `kind`
/// filled in from the instance when absent.
pub fn config_for(inst: &Instance, path: Option<&Path>, profile: Option<&str>) -> CliResult<Config> {
    let kind = kind_of(inst);
    let mut value = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| {
                CliError::Config(format!("{}: line {}, column {}: {e}", p.display(), e.line(), e.column()))
            })?
        }
        None => Value::Object(Default::default()),
    };
    if let Value::Object(map) = &mut value {
        map.entry("kind")
            .or_insert_with(|| serde_json::to_value(kind).expect("kind serializes"));
    }
    let config = Config::from_value(value, profile)?;
    if config.kind != Some(kind) {
        return Err(CliError::Config(format!(
            "config is for {:?} but the instance is a {}",
            config.kind,
            inst.kind()
        )));
    }
    Ok(config)
}

/// Runs one method from the instance's start point.
pub fn run_method(inst: &Instance, config: &Config, method: Method) -> CliResult<SolveReport> {
    let problem = inst.problem()?;
    let start = inst.start_point();
    let p = &config.protocol;
    let report = match method {
        Method::PenSpg | Method::PenProx => {
            let inner = if method == Method::PenSpg {
                InnerSolver::Spg
            } else {
                InnerSolver::Prox
            };
            let family = config.family(inst.rho())?;
            exact_penalty_solve(&problem, &family, &start, inner, &p.inner, &p.outer)?
        }
        Method::L0Prox | Method::L1Prox => {
            let kind = if method == Method::L0Prox {
                ThresholdKind::Hard
            } else {
                ThresholdKind::Soft
            };
            threshold_solve(&problem, kind, &start, &p.baseline, p.outer.zero_tol)?
        }
    };
    Ok(report)
}

/// Complementarity in the configured measure.
pub fn comp_of(report: &SolveReport, config: &Config) -> f64 {
    match config.protocol.outer.measure {
        ComplementarityMeasure::Max => report.complementarity,
        ComplementarityMeasure::Sum => {
            complementarity_sum(report.final_iterate.x(), &report.final_iterate.y)
        }
    }
}

fn certificate_of(inst: &Instance, config: &Config, method: Method, report: &SolveReport) -> Option<StationarityCertificate> {
    if !method.is_penalty() {
        return None;
    }
    let problem = inst.problem().ok()?;
    let family = config.family(inst.rho()).ok()?;
    certificate(
        &problem,
        &family,
        &report.final_iterate,
        report.alpha_final,
        config.protocol.outer.zero_tol,
    )
    .ok()
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn default_report_path(instance: &Path) -> PathBuf {
    let stem = instance
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into());
    instance.with_file_name(format!("{stem}.report.json"))
}

/// Solves, writes the report and prints a summary to `log`. A run that ends
/// without meeting the complementarity tolerance is returned as
/// [`CliError::Flagged`] after the report is written.
pub fn solve(
    inst: &Instance,
    config: &Config,
    method: Method,
    out: &Path,
    log: &mut impl Write,
) -> CliResult<ReportFile> {
    let report = run_method(inst, config, method)?;
    let file = ReportFile {
        instance_hash: instance_hash(inst),
        config_hash: config.hash(),
        config: config.clone(),
        method,
        certificate: certificate_of(inst, config, method, &report),
        report,
    };
    write_json(out, &file)?;
    let r = &file.report;
    let _ = writeln!(log, "method       {method}");
    let _ = writeln!(log, "spo_value    {:.10e}", r.spo_value);
    let _ = writeln!(log, "l0           {}", r.l0);
    let _ = writeln!(log, "comp         {:.3e}", comp_of(r, config));
    let _ = writeln!(log, "stationarity {:.3e}", r.stationarity);
    let _ = writeln!(log, "outer/inner  {}/{}", r.outer_iterations, r.inner_iterations);
    let _ = writeln!(log, "time         {:.3}s", r.wall_time);
    let _ = writeln!(log, "status       {}", status_name(r.status));
    let _ = writeln!(log, "report       {}", out.display());
    if r.status == SolveStatus::MaxOuterReached {
        return Err(CliError::Flagged(format!(
            "outer loop stopped at alpha = {:e} with complementarity {:.3e} above {:e}",
            r.alpha_final,
            comp_of(r, config),
            config.protocol.outer.comp_tol
        )));
    }
    Ok(file)
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Converged | SolveStatus::Finished => "ok",
        SolveStatus::MaxOuterReached => "max_outer",
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOutcome {
    pub spo_value: f64,
    pub recomputed: f64,
    pub oracle_gap: Option<f64>,
}

/// Recomputes the objective and certificate of a saved report and, with
/// `oracle`, compares against the brute-force global minimum. The gap is
/// flagged above `gap_tol · max(1, |oracle value|)`.
pub fn verify(
    inst: &Instance,
    report_path: &Path,
    oracle: bool,
    gap_tol: f64,
    log: &mut impl Write,
) -> CliResult<VerifyOutcome> {
    let text = fs::read_to_string(report_path).map_err(|e| CliError::io(report_path, e))?;
    let file: ReportFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("malformed report {}: {e}", report_path.display())))?;
    let hash = instance_hash(inst);
    if hash != file.instance_hash {
        return Err(CliError::Usage(format!(
            "instance hash mismatch: report was made for {} but the instance hashes to {hash}",
            file.instance_hash
        )));
    }
    if oracle {
        match inst {
            Instance::Portfolio(p) if p.dim() <= ORACLE_MAX_DIM => {}
            Instance::Portfolio(p) => {
                return Err(CliError::Usage(format!(
                    "oracle refused: n = {} exceeds {ORACLE_MAX_DIM}",
                    p.dim()
                )))
            }
            Instance::Dictionary(_) => {
                return Err(CliError::Usage("oracle refused: only portfolio instances are supported".into()))
            }
        }
    }
    let config = &file.config;
    config.validate()?;
    let r = &file.report;
    let problem = inst.problem()?;
    let recomputed = spo_objective(&problem, &r.final_iterate.primal, config.protocol.outer.zero_tol)?;
    let _ = writeln!(log, "spo_value    {:.10e} (recomputed {:.10e})", r.spo_value, recomputed);
    let mut problems = Vec::new();
    if (recomputed - r.spo_value).abs() > 1e-9 * r.spo_value.abs().max(1.0) {
        problems.push("reported objective does not match the stored point".to_string());
    }
    if let Some(cert) = certificate_of(inst, config, file.method, r) {
        let _ = writeln!(log, "comp         {:.3e}", cert.comp_residual);
        let _ = writeln!(log, "pg residual  {:.3e}", cert.pg_residual);
        let _ = writeln!(log, "tnlp         {:.3e}", cert.tnlp_residual);
        let _ = writeln!(log, "zero set     {} of {}", cert.zero_set.len(), r.final_iterate.y.len());
    }
    let mut oracle_gap = None;
    if oracle {
        let Instance::Portfolio(p) = inst else { unreachable!() };
        let sol = spo_bruteforce(p, p.rho)?;
        let gap = r.spo_value - sol.value;
        let _ = writeln!(log, "oracle       {:.10e} (support {:?})", sol.value, sol.support);
        let _ = writeln!(log, "gap          {gap:.3e}");
        if gap > gap_tol * sol.value.abs().max(1.0) {
            problems.push(format!(
                "gap {gap:.3e} to the global minimum exceeds {gap_tol:e} relative"
            ));
        }
        oracle_gap = Some(gap);
    }
    if !problems.is_empty() {
        return Err(CliError::Flagged(problems.join("; ")));
    }
    Ok(VerifyOutcome {
        spo_value: r.spo_value,
        recomputed,
        oracle_gap,
    })
}

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub instance_id: String,
    pub method: String,
    pub spo_value: Option<f64>,
    pub l0: Option<usize>,
    pub comp: Option<f64>,
    pub stat: Option<f64>,
    pub wall_ms: f64,
    /// `ok`, `max_outer`, `unsupported` or `error`.
    pub status: String,
}

impl ResultRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Serialize)]
struct CurveRow<'a> {
    method: &'a str,
    tau: f64,
    fraction: f64,
}

#[derive(Debug, Serialize)]
struct RatioRow<'a> {
    instance_id: &'a str,
    method: &'a str,
    value_ratio: f64,
    time_ratio: f64,
}

pub fn instance_id(dims: Dims, seed: u64) -> String {
    match dims {
        Dims::Assets(n) => format!("portfolio-n{n}-s{seed}"),
        Dims::Dictionary { n, l, m } => format!("dictionary-n{n}-l{l}-m{m}-s{seed}"),
    }
}

fn run_cell(inst: &CliResult<Instance>, id: &str, config: &Config, method: Method) -> ResultRow {
    let clock = Instant::now();
    let mut row = ResultRow {
        instance_id: id.to_string(),
        method: method.to_string(),
        spo_value: None,
        l0: None,
        comp: None,
        stat: None,
        wall_ms: 0.0,
        status: "error".into(),
    };
    let Ok(inst) = inst else {
        return row;
    };
    match run_method(inst, config, method) {
        Ok(r) => {
            row.spo_value = Some(r.spo_value);
            row.l0 = Some(r.l0);
            row.comp = Some(comp_of(&r, config));
            row.stat = Some(r.stationarity);
            row.wall_ms = r.wall_time * 1e3;
            row.status = status_name(r.status).into();
        }
        Err(e) => {
            row.wall_ms = clock.elapsed().as_secs_f64() * 1e3;
            if matches!(e, CliError::Solver(l0pen::Error::Unsupported(_))) {
                row.status = "unsupported".into();
            }
        }
    }
    row
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        other => CliError::Usage(format!("cannot write {}: {other:?}", path.display())),
    }
}

/// Runs every (instance × method) cell in parallel and writes
/// `results.csv`, `profile_value.csv`, `profile_time.csv`, `ratios.csv`
/// and the resolved `config.json` into `out_dir`. Returns the rows in
/// instance-major order.
pub fn bench(config: &Config, out_dir: &Path, log: &mut impl Write) -> CliResult<Vec<ResultRow>> {
    let kind = config.validate_bench()?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    write_json(&out_dir.join("config.json"), config)?;

    let mut instances = Vec::new();
    for &dims in &config.dims {
        for &seed in &config.seeds {
            instances.push((instance_id(dims, seed), gen_instance(kind, dims, seed)));
        }
    }
    let methods = &config.methods;
    let cells: Vec<(usize, Method)> = (0..instances.len())
        .flat_map(|i| methods.iter().map(move |&m| (i, m)))
        .collect();
    let rows: Vec<ResultRow> = cells
        .par_iter()
        .map(|&(i, m)| run_cell(&instances[i].1, &instances[i].0, config, m))
        .collect();

    let path = out_dir.join("results.csv");
    let mut w = csv_writer(&path)?;
    for row in &rows {
        w.serialize(row).map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;

    let nm = methods.len();
    let table = |f: &dyn Fn(&ResultRow) -> f64| -> Vec<Vec<Option<f64>>> {
        rows.chunks(nm)
            .map(|c| c.iter().map(|r| r.ok().then(|| f(r))).collect())
            .collect()
    };
    let value_ratios = profile::ratios(&profile::shift_values(&table(&|r| r.spo_value.unwrap())));
    let time_ratios = profile::ratios(&table(&|r| r.wall_ms.max(1e-6)));
    let names: Vec<String> = methods.iter().map(|m| m.to_string()).collect();
    for (file, ratios) in [("profile_value.csv", &value_ratios), ("profile_time.csv", &time_ratios)] {
        let path = out_dir.join(file);
        let mut w = csv_writer(&path)?;
        for p in profile::curves(&names, ratios) {
            w.serialize(CurveRow {
                method: &p.method,
                tau: p.tau,
                fraction: p.fraction,
            })
            .map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
    }
    let path = out_dir.join("ratios.csv");
    let mut w = csv_writer(&path)?;
    for (p, (id, _)) in instances.iter().enumerate() {
        for (s, name) in names.iter().enumerate() {
            w.serialize(RatioRow {
                instance_id: id,
                method: name,
                value_ratio: value_ratios[p][s],
                time_ratio: time_ratios[p][s],
            })
            .map_err(|e| csv_error(&path, e))?;
        }
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;

    for (s, m) in methods.iter().enumerate() {
        let mine: Vec<&ResultRow> = rows.iter().skip(s).step_by(nm).collect();
        let ok = mine.iter().filter(|r| r.ok()).count();
        let _ = writeln!(log, "{m:<8} ok {ok}/{}", mine.len());
    }
    let _ = writeln!(log, "wrote {} rows to {}", rows.len(), out_dir.display());
    Ok(rows)
}

pub fn load(path: &Path) -> CliResult<Instance> {
    Ok(load_instance(path)?)
}
