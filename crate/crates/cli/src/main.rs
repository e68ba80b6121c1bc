mod grid;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use qgs_core::graph::{parse_graph, spanning_tree, MetricGraph};
use qgs_core::highcontrast::{
    convergence_study, write_convergence_csv, DispersionTable, HighContrastCell, Model,
};
use qgs_core::inverse::{
    reconstruct, ForwardOracle, ForwardRoute, LadderOptions, RtdOracle, SampledOracle,
};
use qgs_core::scattering::{sweep, write_sweep_csv};
use qgs_core::selfcheck;
use qgs_core::weyl::{
    compact_spectrum, first_eigenvalues, write_spectrum_csv, CouplingMatrix, SpectrumMode,
    SpectrumOptions,
};

#[derive(Parser, Debug)]
#[command(
    name = "qgs",
    version,
    about = "Quantum graph spectra, scattering, inversion and high-contrast homogenisation"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues of the compact graph below a threshold.
    Spectrum(SpectrumArgs),
    /// Scattering matrix on the external vertices over an energy grid.
    Smatrix(SmatrixArgs),
    /// Recover vertex couplings from Robin-to-Dirichlet data.
    Invert(InvertArgs),
    /// Bloch spectra of the high-contrast medium and its limit models.
    Homog(HomogArgs),
    /// Run the invariant suite.
    Check,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    zmax: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    mode: ModeArg,
    /// Output CSV (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-8)]
    merge_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    kernel_tol: f64,
    /// Root-scan step in √z as a fraction of π/Σl.
    #[arg(long, default_value_t = 0.125)]
    step_fraction: f64,
    /// Largest tolerated weyl/matching difference in `both` mode.
    #[arg(long, default_value_t = 1e-8)]
    agree_tol: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Weyl,
    Matching,
    Both,
}

#[derive(Args, Debug)]
struct SmatrixArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Energy grid `a:b:step`, or one energy for a JSON dump.
    #[arg(long)]
    s: String,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest tolerated unitarity defect for real couplings.
    #[arg(long, default_value_t = 1e-8)]
    unitarity_tol: f64,
}

#[derive(Args, Debug)]
struct InvertArgs {
    /// Graph geometry; its couplings are used as the truth unless
    /// `--true-couplings` is given.
    #[arg(long)]
    graph_topology: PathBuf,
    #[arg(long, value_enum, default_value_t = OracleArg::Forward)]
    oracle: OracleArg,
    /// Real couplings in vertex-id order.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    true_couplings: Option<Vec<f64>>,
    /// Samples CSV (`target,z_re,z_im,f1_re,f1_im`) for `--oracle samples`.
    #[arg(long)]
    rtd_samples: Option<PathBuf>,
    /// Tabulate the forward model on the τ ladder into this CSV.
    #[arg(long)]
    write_samples: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = RouteArg::Scattering)]
    route: RouteArg,
    #[arg(long, default_value_t = 32.0)]
    tau0: f64,
    #[arg(long, default_value_t = 6)]
    levels: usize,
    #[arg(long, default_value_t = 3)]
    terms: usize,
    /// Recovered couplings JSON (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-path diagnostics CSV.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum OracleArg {
    Forward,
    Samples,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum RouteArg {
    Scattering,
    Direct,
}

#[derive(Args, Debug)]
struct HomogArgs {
    #[arg(long)]
    l1: f64,
    #[arg(long)]
    l2: f64,
    #[arg(long)]
    a: f64,
    /// Decreasing ε values; the smallest is used for the dispersion table.
    #[arg(long, value_delimiter = ',', required = true)]
    eps_list: Vec<f64>,
    /// `a:b:step` or a point count on `[−π, π)`.
    #[arg(long, default_value = "64")]
    tau_grid: String,
    #[arg(long, default_value_t = 3)]
    bands: usize,
    /// Dispersion CSV (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Convergence CSV; needs at least three ε.
    #[arg(long)]
    convergence: Option<PathBuf>,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Validation(anyhow::Error),
    Numerical(anyhow::Error),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<qgs_core::Error>() {
            Some(qgs_core::Error::Io(_) | qgs_core::Error::Csv(_)) => Failure::Other(e),
            Some(c) if c.is_numerical() => Failure::Numerical(e),
            Some(_) => Failure::Validation(e),
            None => Failure::Other(e),
        }
    }
}

impl From<qgs_core::Error> for Failure {
    fn from(e: qgs_core::Error) -> Self {
        Failure::from(anyhow::Error::new(e))
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QGS_LOG", "warn"))
        .format_timestamp(None)
        .init();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Spectrum(a) => run_spectrum(a),
        Command::Smatrix(a) => run_smatrix(a),
        Command::Invert(a) => run_invert(a),
        Command::Homog(a) => run_homog(a),
        Command::Check => run_check(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, e) = match f {
                Failure::Validation(e) => (2, e),
                Failure::Numerical(e) => (3, e),
                Failure::Other(e) => (1, e),
            };
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(anyhow!(msg.into()))
}

fn load_graph(path: &Path) -> Result<MetricGraph, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Other)?;
    let graph = parse_graph(&text)
        .map_err(|e| Failure::Validation(anyhow!(e).context(format!("{}", path.display()))))?;
    let report = graph.validate();
    for w in &report.warnings {
        log::warn!("{w}");
    }
    report.into_result()?;
    Ok(graph)
}

/// Output sink: a file or stdout.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p)
                .with_context(|| format!("creating {}", p.display()))
                .map_err(Failure::Other)?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

/// `<out>.meta.json` next to a written file.
fn write_meta(out: Option<&Path>, command: &str, meta: Value) -> Outcome {
    let Some(out) = out else { return Ok(()) };
    let path = out.with_extension("meta.json");
    let doc = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "meta": meta,
    });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Other(e.into()))? + "\n";
    fs::write(&path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Other)
}

fn run_spectrum(a: SpectrumArgs) -> Outcome {
    let graph = load_graph(&a.graph)?;
    if !a.zmax.is_finite() {
        return Err(invalid("--zmax must be finite"));
    }
    let opts = SpectrumOptions {
        merge_tol: a.merge_tol,
        kernel_tol: a.kernel_tol,
        step_fraction: a.step_fraction,
    };
    if !(opts.step_fraction > 0.0 && opts.step_fraction <= 1.0) {
        return Err(invalid("--step-fraction must lie in (0, 1]"));
    }
    let kappa = CouplingMatrix::from_graph(&graph);
    let modes: &[SpectrumMode] = match a.mode {
        ModeArg::Weyl => &[SpectrumMode::Weyl],
        ModeArg::Matching => &[SpectrumMode::Matching],
        ModeArg::Both => &[SpectrumMode::Weyl, SpectrumMode::Matching],
    };
    let spectra = modes
        .iter()
        .map(|&m| compact_spectrum(&graph, &kappa, a.zmax, m, &opts))
        .collect::<qgs_core::Result<Vec<_>>>()?;
    let mut warnings: Vec<String> = spectra
        .iter()
        .flat_map(|s| s.warnings.iter().cloned())
        .collect();
    let mut max_diff = None;
    if let [w, m] = spectra.as_slice() {
        let (w, m) = (
            first_eigenvalues(w, usize::MAX),
            first_eigenvalues(m, usize::MAX),
        );
        if w.len() != m.len() {
            warnings.push(format!(
                "weyl finds {} eigenvalues, matching {}",
                w.len(),
                m.len()
            ));
        }
        let d = w
            .iter()
            .zip(&m)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        if d > a.agree_tol {
            warnings.push(format!("weyl and matching differ by {d:.3e}"));
        }
        max_diff = Some(d);
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    write_spectrum_csv(sink(a.out.as_deref())?, &spectra)?;
    let counts: BTreeMap<String, usize> = spectra
        .iter()
        .map(|s| (s.mode.to_string(), first_eigenvalues(s, usize::MAX).len()))
        .collect();
    write_meta(
        a.out.as_deref(),
        "spectrum",
        json!({
            "graph": a.graph,
            "zmax": a.zmax,
            "mode": a.mode,
            "tolerances": {
                "merge_tol": opts.merge_tol,
                "kernel_tol": opts.kernel_tol,
                "step_fraction": opts.step_fraction,
                "agree_tol": a.agree_tol,
            },
            "eigenvalue_counts": counts,
            "max_abs_diff": max_diff,
            "warnings": warnings,
        }),
    )
}

fn run_smatrix(a: SmatrixArgs) -> Outcome {
    let graph = load_graph(&a.graph)?;
    if graph.lead_count() == 0 {
        return Err(qgs_core::Error::NoLeads.into());
    }
    let kappa = CouplingMatrix::from_graph(&graph);
    if !a.s.contains(':') {
        let s: f64 =
            a.s.trim()
                .parse()
                .map_err(|e| invalid(format!("--s `{}`: {e}", a.s)))?;
        return smatrix_point(&graph, &kappa, s, a.out.as_deref());
    }
    let grid = grid::parse_range(&a.s).map_err(invalid)?;
    if grid[0] <= 0.0 {
        return Err(invalid("scattering energies must be positive"));
    }
    let points = sweep(&graph, &kappa, &grid);
    let mut skipped = Vec::new();
    let mut max_defect: f64 = 0.0;
    for p in &points {
        match &p.result {
            Ok(m) => max_defect = max_defect.max(m.unitarity_defect()),
            Err(e) => {
                log::warn!("skipping s = {}: {e}", p.s);
                skipped.push(json!({"s": p.s, "reason": e.to_string()}));
            }
        }
    }
    if skipped.len() == points.len() {
        let e = points.into_iter().next().and_then(|p| p.result.err());
        return Err(match e {
            Some(e) => e.into(),
            None => invalid("empty grid"),
        });
    }
    if kappa.is_real() && max_defect > a.unitarity_tol {
        log::warn!(
            "unitarity defect {max_defect:.3e} exceeds {:e}",
            a.unitarity_tol
        );
    }
    write_sweep_csv(sink(a.out.as_deref())?, graph.lead_count(), &points)?;
    write_meta(
        a.out.as_deref(),
        "smatrix",
        json!({
            "graph": a.graph,
            "s": a.s,
            "external_ids": graph.external_ids(),
            "points": points.len(),
            "skipped": skipped,
            "max_unitarity_defect": max_defect,
            "tolerances": {
                "unitarity_tol": a.unitarity_tol,
                "factorisation_tol": qgs_core::scattering::FACTORISATION_TOL,
                "pole_tol": qgs_core::weyl::POLE_TOL,
            },
        }),
    )
}

fn c_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn matrix_json(m: &qgs_core::CMatrix) -> Value {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| c_json(m[(i, j)]))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// JSON dump of the scattering matrix at one energy.
fn smatrix_point(
    graph: &MetricGraph,
    kappa: &CouplingMatrix,
    s: f64,
    out: Option<&Path>,
) -> Outcome {
    let m = qgs_core::scattering::sigma_external(graph, kappa, s)?;
    let doc = json!({
        "s": s,
        "external_ids": m.ids,
        "entries": matrix_json(&m.entries),
        "factorised": matrix_json(&m.factorised),
        "factorisation_mismatch": m.mismatch,
        "unitarity_defect": m.unitarity_defect(),
    });
    let mut w = sink(out)?;
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Other(e.into()))?;
    writeln!(w, "{text}").map_err(|e| Failure::Other(e.into()))?;
    w.flush().map_err(|e| Failure::Other(e.into()))
}

fn run_invert(a: InvertArgs) -> Outcome {
    let mut graph = load_graph(&a.graph_topology)?;
    if let Some(tc) = &a.true_couplings {
        if tc.len() != graph.vertex_count() {
            return Err(invalid(format!(
                "--true-couplings has {} values for {} vertices",
                tc.len(),
                graph.vertex_count()
            )));
        }
        let c: Vec<Complex64> = tc.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        graph = graph.with_couplings(&c)?;
    }
    let opts = LadderOptions {
        tau0: a.tau0,
        levels: a.levels,
        terms: a.terms,
    };
    if !(opts.tau0 > 0.0) || opts.terms == 0 || opts.levels + 1 < opts.terms {
        return Err(invalid(
            "ladder needs tau0 > 0, terms ≥ 1 and levels + 1 ≥ terms",
        ));
    }
    let route = match a.route {
        RouteArg::Scattering => ForwardRoute::Scattering,
        RouteArg::Direct => ForwardRoute::Direct,
    };
    let truth = matches!(a.oracle, OracleArg::Forward) || a.true_couplings.is_some();
    let forward = ForwardOracle::new(graph.clone(), route);
    let root = graph
        .external_ids()
        .into_iter()
        .next()
        .ok_or(qgs_core::Error::NoLeads)?;
    if let Some(path) = &a.write_samples {
        let paths = spanning_tree(&graph, &root)?;
        let samples = SampledOracle::tabulate(&forward, &paths, &opts.points())?;
        samples.write_csv(sink(Some(path))?)?;
    }
    let sampled;
    let oracle: &dyn RtdOracle = match a.oracle {
        OracleArg::Forward => &forward,
        OracleArg::Samples => {
            let path = a
                .rtd_samples
                .as_ref()
                .ok_or_else(|| invalid("--oracle samples needs --rtd-samples"))?;
            let file = File::open(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(Failure::Other)?;
            sampled = SampledOracle::read_csv(file)?;
            &sampled
        }
    };
    let topology = graph.with_couplings(&vec![Complex64::new(0.0, 0.0); graph.vertex_count()])?;
    let rec = reconstruct(&topology, oracle, opts)?;
    let ids: Vec<&str> = graph.vertices().iter().map(|v| v.id.as_str()).collect();
    let truth_values = graph.couplings();
    let mut max_err: Option<f64> = None;
    let couplings: Vec<Value> = ids
        .iter()
        .zip(&rec.couplings.diagonal)
        .zip(&truth_values)
        .map(|((id, got), want)| {
            let mut v = json!({"vertex": id, "recovered": c_json(*got)});
            if truth {
                let err = (got - want).norm();
                max_err = Some(max_err.map_or(err, |m: f64| m.max(err)));
                v["true"] = c_json(*want);
                v["abs_error"] = json!(err);
            }
            v
        })
        .collect();
    let doc = json!({"root": root, "couplings": couplings, "max_abs_error": max_err});
    let mut out = sink(a.out.as_deref())?;
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Other(e.into()))?;
    writeln!(out, "{text}").map_err(|e| Failure::Other(e.into()))?;
    out.flush().map_err(|e| Failure::Other(e.into()))?;
    if let Some(path) = &a.diagnostics {
        let mut w = csv::Writer::from_writer(sink(Some(path))?);
        let mut rows = || -> csv::Result<()> {
            w.write_record([
                "target",
                "path",
                "vertex_count",
                "degree_correction",
                "path_sum_re",
                "path_sum_im",
                "residual",
            ])?;
            for p in &rec.path_sums {
                w.write_record([
                    p.target.clone(),
                    p.path.vertices_on_path.join(";"),
                    p.path.vertex_count.to_string(),
                    format!("{}", p.degree_correction),
                    format!("{:.15e}", p.value.re),
                    format!("{:.15e}", p.value.im),
                    format!("{:.3e}", p.residual),
                ])?;
            }
            w.flush()?;
            Ok(())
        };
        rows().map_err(|e| Failure::Other(e.into()))?;
    }
    write_meta(
        a.out.as_deref(),
        "invert",
        json!({
            "graph_topology": a.graph_topology,
            "oracle": a.oracle,
            "route": a.route,
            "rtd_samples": a.rtd_samples,
            "ladder": {"tau0": opts.tau0, "levels": opts.levels, "terms": opts.terms, "taus": opts.taus()},
            "extrapolation_residual_tol": "1e-3·(1+|value|)",
        }),
    )
}

fn run_homog(a: HomogArgs) -> Outcome {
    let eps_min = a.eps_list.iter().copied().fold(f64::INFINITY, f64::min);
    let cell = HighContrastCell::from_l1_l2(a.l1, a.l2, a.a, eps_min)?;
    let taus = grid::parse_tau_grid(&a.tau_grid).map_err(invalid)?;
    if a.bands == 0 {
        return Err(invalid("--bands must be positive"));
    }
    let table = DispersionTable::compute(
        &cell,
        &taus,
        a.bands,
        &[Model::Eps, Model::HomTau, Model::HomDprime],
    )?;
    table.write_csv(sink(a.out.as_deref())?)?;
    let mut orders = Value::Null;
    if let Some(path) = &a.convergence {
        let rows = convergence_study(&cell, &a.eps_list, &taus, a.bands)?;
        write_convergence_csv(sink(Some(path))?, &rows)?;
        let fitted: Vec<f64> = rows.iter().filter_map(|r| r.order).collect();
        orders = json!({
            "min": fitted.iter().copied().fold(f64::INFINITY, f64::min),
            "max": fitted.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            "exact_rows": rows.len() - fitted.len(),
        });
    }
    write_meta(
        a.out.as_deref(),
        "homog",
        json!({
            "cell": {"l1": cell.l1, "l2": cell.l2, "l3": cell.l3, "a": cell.a},
            "eps_list": a.eps_list,
            "dispersion_eps": eps_min,
            "tau_grid": a.tau_grid,
            "bands": a.bands,
            "convergence_orders": orders,
        }),
    )
}

fn run_check() -> Outcome {
    let report = selfcheck::run_all();
    let mut out = io::stdout().lock();
    let mut line = |s: String| writeln!(out, "{s}").map_err(|e| Failure::Other(e.into()));
    for o in &report.outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        line(format!("{tag} {}: {}: {}", o.module, o.name, o.detail))?;
    }
    line(format!(
        "{} passed, {} failed",
        report.passed(),
        report.failed()
    ))?;
    if report.failed() > 0 {
        return Err(Failure::Other(anyhow!(
            "{} invariant checks failed",
            report.failed()
        )));
    }
    Ok(())
}
