mod args;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use fpa_core::bounds::{ell_table, phi_constant, PhiConfig};
use fpa_core::equilibrium::{best_response_report, solve_instance, ResidualGrid, SolverOptions};
use fpa_core::report::{format_sig, to_report_json};
use fpa_core::welfare::{audit_lemmas, equilibrium_welfare, AuditConfig, Method};
use fpa_core::{Error, Instance, Strategy, Tolerances, VERSION};
use serde_json::{json, Value};

use args::{Cli, Command, StrategySource, WelfareMethod};

/// Constant asserted by `constant`.
const PHI_TARGET: f64 = 0.743;

/// A failed run: exit status plus the stage that failed.
struct Failure {
    code: u8,
    stage: &'static str,
    message: String,
}

impl Failure {
    fn bad_args(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            stage: "arguments",
            message: message.into(),
        }
    }

    fn assertion(stage: &'static str, message: impl Into<String>) -> Self {
        Self {
            code: 5,
            stage,
            message: message.into(),
        }
    }

    fn from_error(stage: &'static str, e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => 3,
            Error::SolverNonConvergence(_) | Error::QuadratureNonConvergence { .. } => 4,
            Error::Io(_) if stage == "write output" => 1,
            _ => 2,
        };
        Self {
            code,
            stage,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn at<T>(stage: &'static str, r: fpa_core::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::from_error(stage, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error [arguments]: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error [arguments]: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Constant(a) => constant(a),
        Command::EllTable(a) => ell_table_cmd(a),
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::Poa(a) => poa(a),
        Command::Audit(a) => audit(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error [{}]: {}", f.stage, f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Canonical command line that reproduces a report.
fn command_line(
    sub: &str,
    flags: &[(&str, Option<String>)],
    files: &[(&str, &[PathBuf])],
) -> String {
    let mut parts = vec!["fpa".to_string(), sub.to_string()];
    for (flag, value) in flags {
        if let Some(v) = value {
            parts.push(format!("--{flag}"));
            parts.push(v.clone());
        }
    }
    for (flag, paths) in files {
        if !paths.is_empty() {
            parts.push(format!("--{flag}"));
            parts.extend(paths.iter().map(|p| p.display().to_string()));
        }
    }
    parts.join(" ")
}

fn path_arg(p: &Path) -> Option<String> {
    Some(p.display().to_string())
}

fn tolerances_json(t: &Tolerances) -> Value {
    json!({"abs_tol": t.abs_tol, "rel_tol": t.rel_tol, "max_iter": t.max_iter})
}

fn emit(mut report: Value, command: String, out: Option<&Path>) -> Outcome {
    if let Value::Object(map) = &mut report {
        map.insert("tool".into(), json!("fpa"));
        map.insert("version".into(), json!(VERSION));
        map.insert("command".into(), json!(command));
    }
    let text =
        to_report_json(&report).map_err(|e| Failure::from_error("write output", e.into()))?;
    write_text(&text, out)
}

fn write_text(text: &str, out: Option<&Path>) -> Outcome {
    match out {
        Some(path) => fs::write(path, format!("{text}\n")).map_err(|e| {
            Failure::from_error(
                "write output",
                Error::Io(format!("{}: {e}", path.display())),
            )
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")
                .map_err(|e| Failure::from_error("write output", Error::Io(e.to_string())))
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    at("load instance", Instance::load(path))
}

/// Supplied strategies, or a freshly solved equilibrium; with its residual.
fn strategies_for(
    instance: &Instance,
    source: &StrategySource,
    tol: Option<f64>,
) -> Result<(Vec<Strategy>, f64), Failure> {
    if source.strategies.is_empty() {
        let opts = solver_options(instance, tol, 1024)?;
        let sol = at("solve", solve_instance(instance, Some(&opts)))?;
        return Ok((sol.strategies, sol.residual));
    }
    let strategies = load_strategies(instance, &source.strategies)?;
    let residual = at(
        "verify",
        best_response_report(instance, &strategies, ResidualGrid::default()),
    )?
    .residual;
    Ok((strategies, residual))
}

fn load_strategies(instance: &Instance, paths: &[PathBuf]) -> Result<Vec<Strategy>, Failure> {
    let n = instance.n();
    if paths.len() != 1 && paths.len() != n {
        return Err(Failure::bad_args(format!(
            "expected 1 or {n} strategy files, got {}",
            paths.len()
        )));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let path = &paths[if paths.len() == 1 { 0 } else { i }];
        let file = fs::File::open(path).map_err(|e| {
            Failure::from_error(
                "load strategies",
                Error::Io(format!("{}: {e}", path.display())),
            )
        })?;
        let s = Strategy::read_csv(file).map_err(|e| {
            let e = match e {
                Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
                other => other,
            };
            Failure::from_error("load strategies", e)
        })?;
        out.push(s);
    }
    at("load strategies", instance.validate_profile(&out))?;
    Ok(out)
}

fn solver_options(
    instance: &Instance,
    tol: Option<f64>,
    knots: usize,
) -> Result<SolverOptions<f64>, Failure> {
    let mut opts = if instance.is_symmetric() {
        SolverOptions::symmetric()
    } else {
        SolverOptions::asymmetric()
    };
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::bad_args(format!(
                "--tol must be positive, got {t}"
            )));
        }
        opts.residual_tol = t;
    }
    if knots < 2 {
        return Err(Failure::bad_args("--knots must be at least 2"));
    }
    opts.knots = knots;
    Ok(opts)
}

fn require_seed(seed: Option<u64>, sub: &str) -> Result<u64, Failure> {
    seed.ok_or_else(|| Failure::bad_args(format!("`{sub}` draws samples and needs --seed")))
}

fn require_samples(samples: usize) -> Outcome {
    if samples < 2 {
        return Err(Failure::bad_args("--samples must be at least 2"));
    }
    Ok(())
}

fn constant(a: &args::ConstantArgs) -> Outcome {
    let mut cfg = PhiConfig::<f64>::default();
    cfg.quadrature = at(
        "arguments",
        Tolerances::new(a.tol, cfg.quadrature.rel_tol, cfg.quadrature.max_iter),
    )?;
    if a.grid < 2 {
        return Err(Failure::bad_args("--grid must be at least 2"));
    }
    cfg.grid_points = a.grid;
    let report = at("constant", phi_constant(&cfg))?;
    let command = command_line(
        "constant",
        &[
            ("tol", Some(format!("{:e}", a.tol))),
            ("grid", Some(a.grid.to_string())),
            ("out", a.out.as_deref().and_then(path_arg)),
        ],
        &[],
    );
    let passed = report.phi >= PHI_TARGET;
    let body = json!({
        "phi": report.phi,
        "argmin_x": report.outer_argmin_x,
        "grid": a.grid,
        "target": PHI_TARGET,
        "passed": passed,
        "ell_at_zero": report.ell_table[0].ell,
        "tolerances": {
            "quadrature": tolerances_json(&cfg.quadrature),
            "minimization": tolerances_json(&cfg.minimization),
        },
    });
    emit(body, command, a.out.as_deref())?;
    if !passed {
        return Err(Failure::assertion(
            "constant",
            format!("phi = {} is below {PHI_TARGET}", format_sig(report.phi)),
        ));
    }
    Ok(())
}

fn ell_table_cmd(a: &args::EllTableArgs) -> Outcome {
    if a.points < 2 {
        return Err(Failure::bad_args("--points must be at least 2"));
    }
    let base = Tolerances::minimization();
    let tol = at(
        "arguments",
        Tolerances::new(a.tol, base.rel_tol, base.max_iter),
    )?;
    let rows = at("ell-table", ell_table(a.points, &tol))?;
    let mut csv = String::from("q,ell,argmin_r\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{}\n",
            format_sig(r.q),
            format_sig(r.ell),
            format_sig(r.argmin_r)
        ));
    }
    write_text(csv.trim_end(), a.out.as_deref())
}

fn solve(a: &args::SolveArgs) -> Outcome {
    let instance = load_instance(&a.instance)?;
    let opts = solver_options(&instance, a.tol, a.knots)?;
    let sol = at("solve", solve_instance(&instance, Some(&opts)))?;
    let command = command_line(
        "solve",
        &[
            ("instance", path_arg(&a.instance)),
            ("tol", a.tol.map(|t| format!("{t:e}"))),
            ("knots", Some(a.knots.to_string())),
            ("out", a.out.as_deref().and_then(path_arg)),
        ],
        &[],
    );
    let mut body = sol.summary_json();
    if let Value::Object(map) = &mut body {
        map.insert(
            "tolerances".into(),
            json!({"residual_tol": opts.residual_tol, "quadrature": tolerances_json(&opts.quadrature)}),
        );
    }
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).map_err(|e| {
            Failure::from_error("write output", Error::Io(format!("{}: {e}", dir.display())))
        })?;
        for (i, s) in sol.strategies.iter().enumerate() {
            let path = dir.join(format!("strategy-{i}.csv"));
            let file = fs::File::create(&path).map_err(|e| {
                Failure::from_error(
                    "write output",
                    Error::Io(format!("{}: {e}", path.display())),
                )
            })?;
            at("write output", s.write_csv(file))?;
        }
        emit(
            body.clone(),
            command.clone(),
            Some(&dir.join("solution.json")),
        )?;
    }
    emit(body, command, None)
}

fn verify(a: &args::VerifyArgs) -> Outcome {
    let instance = load_instance(&a.instance)?;
    if a.source.strategies.is_empty() {
        return Err(Failure::bad_args("`verify` needs --strategies"));
    }
    if a.value_grid < 2 || a.bid_grid < 2 {
        return Err(Failure::bad_args("grids need at least two points"));
    }
    let strategies = load_strategies(&instance, &a.source.strategies)?;
    let grid = ResidualGrid {
        values: a.value_grid,
        bids: a.bid_grid,
    };
    let r = at("verify", best_response_report(&instance, &strategies, grid))?;
    let command = command_line(
        "verify",
        &[
            ("instance", path_arg(&a.instance)),
            ("tol", a.tol.map(|t| format!("{t:e}"))),
            ("value-grid", Some(a.value_grid.to_string())),
            ("bid-grid", Some(a.bid_grid.to_string())),
            ("out", a.out.as_deref().and_then(path_arg)),
        ],
        &[("strategies", &a.source.strategies)],
    );
    let body = json!({
        "residual": r.residual,
        "worst_bidder": r.bidder,
        "worst_value": r.value,
        "best_deviation": r.deviation,
        "grid": {"values": grid.values, "bids": grid.bids},
        "tolerances": {"tol": a.tol},
    });
    emit(body, command, a.out.as_deref())?;
    match a.tol {
        Some(t) if r.residual > t => Err(Failure::assertion(
            "verify",
            format!(
                "residual {} exceeds {}",
                format_sig(r.residual),
                format_sig(t)
            ),
        )),
        _ => Ok(()),
    }
}

fn poa(a: &args::PoaArgs) -> Outcome {
    let (method, seed) = match a.method {
        WelfareMethod::Quadrature => (Method::Quadrature, a.seed),
        WelfareMethod::MonteCarlo => {
            let seed = require_seed(a.seed, "poa --method monte-carlo")?;
            require_samples(a.samples)?;
            (
                Method::MonteCarlo {
                    seed,
                    samples: a.samples,
                },
                Some(seed),
            )
        }
    };
    let instance = load_instance(&a.instance)?;
    let (strategies, residual) = strategies_for(&instance, &a.source, a.tol)?;
    let w = at(
        "welfare",
        equilibrium_welfare(&instance, &strategies, method),
    )?;
    let sampled = a.method == WelfareMethod::MonteCarlo;
    let command = command_line(
        "poa",
        &[
            ("instance", path_arg(&a.instance)),
            (
                "method",
                Some(if sampled { "monte-carlo" } else { "quadrature" }.into()),
            ),
            ("seed", seed.map(|s| s.to_string())),
            ("samples", sampled.then(|| a.samples.to_string())),
            ("tol", a.tol.map(|t| format!("{t:e}"))),
            ("out", a.out.as_deref().and_then(path_arg)),
        ],
        &[("strategies", &a.source.strategies)],
    );
    let body = json!({
        "welf": w.welf,
        "opt": w.opt,
        "ratio": w.ratio,
        "ci": w.ci_halfwidth,
        "welf_std_err": w.welf_std_err,
        "method": w.method,
        "samples": w.samples,
        "seed": seed,
        "residual": residual,
        "tolerances": {"residual_tol": a.tol},
    });
    emit(body, command, a.out.as_deref())
}

fn audit(a: &args::AuditArgs) -> Outcome {
    let seed = require_seed(a.seed, "audit")?;
    require_samples(a.samples)?;
    if !(a.tol >= 0.0 && a.tol.is_finite()) {
        return Err(Failure::bad_args(format!(
            "--tol must be nonnegative, got {}",
            a.tol
        )));
    }
    let instance = load_instance(&a.instance)?;
    let (strategies, residual) = strategies_for(&instance, &a.source, None)?;
    let cfg = AuditConfig::new(seed, a.samples, a.tol);
    let report = at(
        "audit",
        audit_lemmas(&instance, &strategies, residual, &cfg),
    )?;
    let command = command_line(
        "audit",
        &[
            ("instance", path_arg(&a.instance)),
            ("seed", Some(seed.to_string())),
            ("samples", Some(a.samples.to_string())),
            ("tol", Some(format!("{:e}", a.tol))),
            ("out", a.out.as_deref().and_then(path_arg)),
        ],
        &[("strategies", &a.source.strategies)],
    );
    let mut body =
        serde_json::to_value(&report).map_err(|e| Failure::from_error("write output", e.into()))?;
    if let Value::Object(map) = &mut body {
        map.insert(
            "tolerances".into(),
            json!({"tol": a.tol, "value_grid": cfg.value_grid, "z_grid": cfg.z_grid}),
        );
    }
    emit(body, command, a.out.as_deref())?;
    let violations = report.violations();
    if violations > 0 {
        return Err(Failure::assertion(
            "audit",
            format!("{violations} lemma violations beyond slack"),
        ));
    }
    Ok(())
}
