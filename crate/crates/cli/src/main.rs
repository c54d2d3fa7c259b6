//! Command-line front end: classify energy models, evaluate analytic
//! series and limit shapes, run Monte Carlo campaigns, and emit curves and
//! verification reports for plotting and CI.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use gibbs_partitions::{
    analytics, bell_step_report, condensation_report, convergence_study, critical_process_report,
    empirical_scaled_f, limit_shape, sample, special, EnergyModel, EnsembleKind, Grid,
    RegimeRow, SamplerConfig, ShapeOutcome,
};

use config::{CommonArgs, RunConfig};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Machine-readable CLI error: printed as JSON on stderr.
#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    fn config(message: String) -> Self {
        CliError {
            kind: "config",
            message,
        }
    }

    fn io(message: String) -> Self {
        CliError {
            kind: "io",
            message,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "gibbs-partitions",
    version,
    about = "Gibbs ensembles of integer partitions: analytics, sampling, verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the energy model: scenario, regime, ground state, shape.
    Classify,
    /// Emit the analytic limit-shape curve as CSV.
    Shape,
    /// Evaluate analytic series values (grand potential, masses, moments).
    Expect,
    /// Draw partitions and dump them as newline-delimited JSON.
    Sample,
    /// Monte Carlo limit-shape verification across a μ-sequence.
    Converge,
    /// Condensation statistics for models with finite ground states.
    Condense,
    /// Critical-regime interval counts against the Poisson law.
    Critical,
    /// Step-shape verification for uniform set partitions.
    Bell,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(all_verdicts_pass) => {
            if all_verdicts_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            let payload = serde_json::to_string(&json!({
                "error": err.kind,
                "message": err.message,
            }))
            .expect("error payload serializes");
            eprintln!("{payload}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let config = cli.common.resolve()?;
    if let Some(threads) = config.threads {
        // Ignore failure when a pool is already installed (e.g. in tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match cli.command {
        Command::Classify => cmd_classify(&cli.common, &config),
        Command::Shape => cmd_shape(&cli.common, &config),
        Command::Expect => cmd_expect(&cli.common, &config),
        Command::Sample => cmd_sample(&cli.common, &config),
        Command::Converge => cmd_converge(&cli.common, &config),
        Command::Condense => cmd_condense(&cli.common, &config),
        Command::Critical => cmd_critical(&cli.common, &config),
        Command::Bell => cmd_bell(&cli.common, &config),
    }
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io(e.to_string()))
        }
    }
}

/// 17 significant digits, '.' decimal separator, no locale.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn report_envelope<T: Serialize>(config: &RunConfig, kind: &str, body: &T) -> String {
    let mut value = serde_json::to_value(body).expect("report serializes");
    let envelope = json!({
        "tool": "gibbs-partitions",
        "version": VERSION,
        "kind": kind,
        "config": config,
        "seed": config.resolved_seed(),
    });
    if let (Some(obj), Some(env)) = (value.as_object_mut(), envelope.as_object()) {
        for (k, v) in env {
            obj.insert(k.clone(), v.clone());
        }
    }
    let mut text = serde_json::to_string_pretty(&value).expect("report serializes");
    text.push('\n');
    text
}

fn cmd_classify(args: &CommonArgs, config: &RunConfig) -> Result<bool, CliError> {
    let model = config.energy_model()?;
    let tag = model.classify();
    let ground = model.ground_state();
    let outcome = limit_shape(&model);
    let reason = match &outcome {
        ShapeOutcome::NoLimitShape { reason } | ShapeOutcome::Indeterminate { reason } => {
            Some(reason.clone())
        }
        ShapeOutcome::NoThermodynamicLimit => {
            Some("expected mass stays bounded as mu -> 0".to_string())
        }
        ShapeOutcome::NoGrandCanonicalMeasure => {
            Some("per-monomer energy unbounded below".to_string())
        }
        ShapeOutcome::Shape(_) => None,
    };
    let body = json!({
        "scenario": format!("{:?}", tag.scenario),
        "regime": tag.row.tag(),
        "eps_star": ground.eps_star,
        "mu_star": ground.mu_star,
        "finite_minimizers": ground.finite_minimizers,
        "attained_at_infinity": ground.attained_at_infinity,
        "thermo_limit": tag.thermodynamic_limit,
        "limit_shape": outcome.tag(),
        "reason": reason,
    });
    write_output(&args.out, &report_envelope(config, "classify", &body))?;
    Ok(true)
}

fn cmd_shape(args: &CommonArgs, config: &RunConfig) -> Result<bool, CliError> {
    let model = config.energy_model()?;
    let mus = config.resolve_mu_sequence(&model)?;
    let mu = mus[0];
    let outcome = limit_shape(&model);
    let shape = match &outcome {
        ShapeOutcome::Shape(s) => s,
        other => {
            // Typed classification, not an error: report and exit 0.
            let body = json!({
                "limit_shape": other.tag(),
                "reason": match other {
                    ShapeOutcome::NoLimitShape { reason }
                    | ShapeOutcome::Indeterminate { reason } => reason.clone(),
                    _ => String::new(),
                },
            });
            write_output(&args.out, &report_envelope(config, "shape", &body))?;
            return Ok(true);
        }
    };
    let grid = match config.grid {
        Some(g) => Grid::geometric(
            g.min,
            g.max.unwrap_or_else(|| shape.support_bound(1e-6)),
            g.points,
        )
        .map_err(CliError::from_core)?,
        None => Grid::for_shape(shape, 1e-3).map_err(CliError::from_core)?,
    };
    let echo = json!({
        "tool": "gibbs-partitions",
        "version": VERSION,
        "config": config,
        "regime": shape.regime.tag(),
        "mu": mu,
        "cell_width": shape.cell_width(mu),
        "cell_height": shape.cell_height(mu),
    });
    let mut csv = format!("# {}\n", serde_json::to_string(&echo).expect("echo"));
    csv.push_str("x,F_analytic\n");
    for &x in grid.points() {
        csv.push_str(&format!("{},{}\n", fmt_float(x), fmt_float(shape.f(x))));
    }
    write_output(&args.out, &csv)?;
    Ok(true)
}

fn cmd_expect(args: &CommonArgs, config: &RunConfig) -> Result<bool, CliError> {
    let model = config.energy_model()?;
    let mus = config.resolve_mu_sequence(&model)?;
    let mu = mus[0];
    let tol = config.tol.unwrap_or(1e-9);
    let ln_xi = analytics::log_grand_potential(&model, mu, tol).map_err(CliError::from_core)?;
    let emon = analytics::expected_monomers(&model, mu, tol).map_err(CliError::from_core)?;
    let u0 = model.u_at(-mu.ln());
    let scaled_mass = mu * mu * (model.beta() * u0).exp() * emon.value;
    let lambda_predicted = regime_lambda(&model);
    let xs: Vec<f64> = match config.grid {
        Some(g) => Grid::geometric(g.min, g.max.unwrap_or(4.0), g.points)
            .map_err(CliError::from_core)?
            .points()
            .to_vec(),
        None => vec![0.25, 0.5, 1.0, 2.0],
    };
    let mut expected_f = Vec::with_capacity(xs.len());
    let mut variance_f = Vec::with_capacity(xs.len());
    for &x in &xs {
        match analytics::expected_scaled_f(&model, mu, x, tol) {
            Ok(v) => expected_f.push(json!({
                "x": x, "value": v.value, "K": v.truncation_index, "tail_bound": v.tail_bound,
            })),
            Err(e) => expected_f.push(json!({ "x": x, "error": e.to_string() })),
        }
        match analytics::variance_scaled_f(&model, mu, x, tol) {
            Ok(v) => variance_f.push(json!({
                "x": x, "value": v.value, "K": v.truncation_index, "tail_bound": v.tail_bound,
            })),
            Err(e) => variance_f.push(json!({ "x": x, "error": e.to_string() })),
        }
    }
    let body = json!({
        "mu": mu,
        "grand_potential_log": {
            "value": ln_xi.value, "K": ln_xi.truncation_index, "tail_bound": ln_xi.tail_bound,
        },
        "expected_monomers": {
            "value": emon.value, "K": emon.truncation_index, "tail_bound": emon.tail_bound,
        },
        "scaled_mass_law": {
            "value": scaled_mass,
            "lambda_predicted": lambda_predicted,
        },
        "expected_f": expected_f,
        "variance_f": variance_f,
    });
    write_output(&args.out, &report_envelope(config, "expect", &body))?;
    Ok(true)
}

fn regime_lambda(model: &EnergyModel) -> Option<f64> {
    let tag = model.classify();
    match tag.row {
        RegimeRow::Decay => Some(std::f64::consts::PI.powi(2) / 6.0),
        RegimeRow::Constant => {
            let beta_c = model.beta() * model.u_at(50.0);
            let q = (-beta_c).exp();
            Some(beta_c.exp() * special::dilog(q).ok()?)
        }
        RegimeRow::Subcritical => Some(1.0),
        RegimeRow::Critical => {
            if model.beta() < 2.0 {
                Some(special::gamma(2.0 - model.beta()))
            } else {
                None
            }
        }
        RegimeRow::Supercritical => None,
    }
}

fn cmd_sample(args: &CommonArgs, config: &RunConfig) -> Result<bool, CliError> {
    let model = config.energy_model()?;
    let ensemble = config.ensemble()?;
    let mu = match ensemble {
        EnsembleKind::Canonical { .. } => config.mu.unwrap_or(0.0),
        _ => config.resolve_mu_sequence(&model)?[0],
    };
    let sampler = SamplerConfig::new(model, mu, ensemble)
        .with_seed(config.resolved_seed())
        .with_replicas(config.samples.unwrap_or(1))
        .with_truncation_tol(config.tol.unwrap_or(1e-9))
        .with_strategy(config.canonical_strategy()?);
    let run = sample(&sampler).map_err(CliError::from_core)?;
    let header = json!({
        "tool": "gibbs-partitions",
        "version": VERSION,
        "kind": "sample_dump",
        "config": config,
        "seed": config.resolved_seed(),
        "acceptance_rate": run.acceptance_rate,
    });
    let mut text = serde_json::to_string(&header).expect("header serializes");
    text.push('\n');
    for p in &run.partitions {
        text.push_str(&serde_json::to_string(p).expect("partition serializes"));
        text.push('\n');
    }
    write_output(&args.out, &text)?;
    Ok(true)
}

fn cmd_converge(args: &CommonArgs, config: &RunConfig) -> Result<bool, CliError> {
    let model = config.energy_model()?;
    let mus = config.resolve_mu_sequence(&model)?;
    let replicas = config.samples.unwrap_or(2000);
    let y = config.y.unwrap_or(0.1);
    let epsilon = config.epsilon.unwrap_or(0.1);
    let report = convergence_study(&model, &mus, replicas, y, epsilon, config.resolved_seed())
        .map_err(CliError::from_core)?;
    if let Some(curve_path) = &args.curve_out {
        let mut csv = String::from("mu,x,mean_F,var_F,F_analytic\n");
        let outcome = limit_shape(&model);
        for (i, &mu) in mus.iter().enumerate() {
            let sampler = SamplerConfig::new(
                model.clone(),
                mu,
                EnsembleKind::QuantumGrandCanonical,
            )
            .with_replicas(replicas)
            .with_seed(config.resolved_seed().wrapping_add(i as u64));
            let run = sample(&sampler).map_err(CliError::from_core)?;
            let grid = match &outcome {
                ShapeOutcome::Shape(s) => Grid::for_shape(s, y).map_err(CliError::from_core)?,
                _ => Grid::geometric(y, 20.0, 256).map_err(CliError::from_core)?,
            };
            let emp =
                empirical_scaled_f(&run.partitions, &model, mu, &grid).map_err(CliError::from_core)?;
            for (j, &x) in emp.grid.iter().enumerate() {
                let analytic = match &outcome {
                    ShapeOutcome::Shape(s) => s.f_mu_scaled(x),
                    _ => f64::NAN,
                };
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_float(mu),
                    fmt_float(x),
                    fmt_float(emp.mean_f[j]),
                    fmt_float(emp.var_f[j]),
                    fmt_float(analytic),
                ));
            }
        }
        write_output(&Some(curve_path.clone()), &csv)?;
    }
    let pass = report.runs.iter().all(|r| r.report.bound_satisfied);
    write_output(&args.out, &report_envelope(config, "converge", &report))?;
    Ok(pass)
}

fn cmd_condense(args: &CommonArgs, config: &RunConfig) -> Result<bool, CliError> {
    let model = config.energy_model()?;
    let mus = config.resolve_mu_sequence(&model)?;
    let samples = config.samples.unwrap_or(100_000);
    let report = condensation_report(&model, &mus, samples, config.resolved_seed())
        .map_err(CliError::from_core)?;
    let pass = report.verdict_pass;
    write_output(&args.out, &report_envelope(config, "condense", &report))?;
    Ok(pass)
}

fn cmd_critical(args: &CommonArgs, config: &RunConfig) -> Result<bool, CliError> {
    let model = config.energy_model()?;
    let mus = config.resolve_mu_sequence(&model)?;
    let samples = config.samples.unwrap_or(100_000);
    let intervals = config
        .intervals
        .clone()
        .unwrap_or_else(|| vec![(0.5, 1.0), (1.0, 2.0)]);
    let report = critical_process_report(
        &model,
        mus[mus.len() - 1],
        samples,
        &intervals,
        config.resolved_seed(),
    )
    .map_err(CliError::from_core)?;
    let pass = report.verdict_pass;
    write_output(&args.out, &report_envelope(config, "critical", &report))?;
    Ok(pass)
}

fn cmd_bell(args: &CommonArgs, config: &RunConfig) -> Result<bool, CliError> {
    let masses = config
        .target_mass
        .clone()
        .ok_or_else(|| CliError::config("bell needs target_mass (one or more masses)".into()))?;
    let replicas = config.samples.unwrap_or(2000);
    let report = bell_step_report(&masses, replicas, config.resolved_seed())
        .map_err(CliError::from_core)?;
    let pass = report.verdict_pass;
    write_output(&args.out, &report_envelope(config, "bell", &report))?;
    Ok(pass)
}
