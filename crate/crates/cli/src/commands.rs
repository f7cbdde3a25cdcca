//! One function per subcommand, each producing a finished report.

use std::time::Instant;

use fracpow::acceptance::{run_suite_with, CRITERIA};
use fracpow::balakrishnan::{balakrishnan_power, eps_sequence, shifted_power, PowerResult};
use fracpow::extension::{dtn_extract_with, extension_trace, geometric_grid, ode_residual, DtnConfig, Extension};
use fracpow::operator::{default_lambda_grid, spectral_power_oracle, validate_nonnegativity, OperatorKind};
use fracpow::report::{to_json_pretty, vec_of, Check, ConvergenceReport, RouteValue, Sample, StageTime, Table};
use fracpow::{Error, Operator, Vector};

use crate::input::{load_operator, load_vector, CliError};
use crate::{RunArgs, SelftestArgs, ValidateArgs};

pub struct Outcome {
    pub json: String,
    pub csv: String,
    pub pass: bool,
}

impl Outcome {
    fn of(report: ConvergenceReport) -> Self {
        let report = report.finish();
        Self {
            json: to_json_pretty(&report),
            csv: report.to_csv(),
            pass: report.pass,
        }
    }
}

/// Route discrepancies are judged at this multiple of the quadrature tolerance.
const ROUTE_TOL_FACTOR: f64 = 100.0;

/// Largest relative ODE residual `extend` accepts.
const ODE_TOL: f64 = 1e-5;

struct Stages {
    enabled: bool,
    times: Vec<StageTime>,
}

impl Stages {
    fn new(enabled: bool) -> Self {
        Self {
            enabled,
            times: Vec::new(),
        }
    }

    fn run<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if self.enabled {
            self.times.push(StageTime {
                stage: stage.to_string(),
                seconds: start.elapsed().as_secs_f64(),
            });
        }
        out
    }

    fn attach(self, report: &mut ConvergenceReport) {
        if self.enabled {
            report.timings = Some(self.times);
        }
    }
}

fn rel(a: &Vector, b: &Vector) -> f64 {
    (a - b).norm() / b.norm().max(a.norm()).max(f64::MIN_POSITIVE)
}

struct Setup {
    op: Operator,
    x: Vector,
    report: ConvergenceReport,
    stages: Stages,
}

fn setup(command: &str, args: &RunArgs) -> Result<Setup, CliError> {
    let op = load_operator(&args.op)?;
    let x = load_vector(args.vector.as_deref(), op.dim())?;
    let mut report = ConvergenceReport::new(command, &args.op, Some(args.alpha.alpha()), Some(args.tol), Some(&x));
    if let OperatorKind::Multiplication(sym) = op.kind() {
        report.notes.push(format!(
            "multiplication operator sampled at {} points; sup norms are maxima over these points",
            sym.len()
        ));
    }
    Ok(Setup {
        op,
        x,
        report,
        stages: Stages::new(args.output.timings),
    })
}

fn power_route(name: &str, p: &PowerResult) -> RouteValue {
    RouteValue::new(name, &p.value, p.est_error, p.node_count_used)
}

/// The spectral oracle, or `None` with a note when the eigenbasis is refused.
fn oracle(s: &mut Setup, args: &RunArgs) -> Result<Option<Vector>, CliError> {
    match s
        .stages
        .run("spectral_oracle", || spectral_power_oracle(&s.op, &args.alpha, &s.x))
    {
        Ok(v) => Ok(Some(v)),
        Err(e @ Error::IllConditioned { .. }) => {
            s.report.notes.push(format!("spectral oracle unavailable: {e}"));
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn power(args: &RunArgs) -> Result<Outcome, CliError> {
    let mut s = setup("power", args)?;
    let p = s.stages.run("balakrishnan", || {
        balakrishnan_power(&s.op, &args.alpha, &s.x, args.tol)
    })?;
    s.report.routes.push(power_route("balakrishnan", &p));
    if let Some(o) = oracle(&mut s, args)? {
        s.report.routes.push(RouteValue::new("spectral_oracle", &o, 0.0, 0));
        s.report.checks.push(Check::at_most(
            "balakrishnan_vs_spectral_oracle",
            rel(&p.value, &o),
            ROUTE_TOL_FACTOR * args.tol,
        ));
    }
    let Setup { mut report, stages, .. } = s;
    stages.attach(&mut report);
    Ok(Outcome::of(report))
}

pub fn extend(args: &RunArgs) -> Result<Outcome, CliError> {
    let mut s = setup("extend", args)?;
    let grid = geometric_grid(args.t0, args.ratio, args.steps)?;
    let ext = Extension::new(&s.op, &args.alpha, &s.x)?;
    let trace = s.stages.run("trace", || extension_trace(&ext, &grid, args.tol, true))?;
    let residuals = s.stages.run("ode_residual", || {
        grid.iter()
            .map(|&t| ode_residual(&s.op, &args.alpha, &s.x, t))
            .collect::<fracpow::Result<Vec<f64>>>()
    })?;
    let mut rows = Vec::with_capacity(grid.len());
    for (k, &t) in grid.iter().enumerate() {
        let (u, du) = (&trace.u_values[k], &trace.du_values[k]);
        s.report.samples.push(Sample {
            t,
            u: vec_of(u),
            du: vec_of(du),
            est_error: trace.quad_errors[k],
        });
        s.report
            .checks
            .push(Check::at_most(format!("ode_residual t={t:e}"), residuals[k], ODE_TOL));
        rows.push(vec![
            t,
            s.op.norm_of(u),
            s.op.norm_of(du),
            trace.quad_errors[k],
            residuals[k],
        ]);
    }
    s.report.table = Some(Table {
        columns: ["t", "u_norm", "du_norm", "est_error", "ode_residual"]
            .map(String::from)
            .to_vec(),
        rows,
    });
    let Setup { mut report, stages, .. } = s;
    stages.attach(&mut report);
    Ok(Outcome::of(report))
}

fn dtn_config(args: &RunArgs) -> DtnConfig {
    DtnConfig {
        t0: args.t0,
        ratio: args.ratio,
        steps: args.steps,
        tol: args.tol,
        ..DtnConfig::default()
    }
}

fn dtn_section(s: &mut Setup, args: &RunArgs, with_table: bool) -> Result<(), CliError> {
    let cfg = dtn_config(args);
    let d = s
        .stages
        .run("dtn", || dtn_extract_with(&s.op, &args.alpha, &s.x, &cfg))?;
    s.report.routes.push(RouteValue::new(
        "dtn",
        &d.extrapolated_limit,
        d.max_sample_error,
        d.fit_samples,
    ));
    s.report.routes.push(RouteValue::new(
        "c_alpha_balakrishnan",
        &d.reference,
        d.reference_power.est_error,
        d.reference_power.node_count_used,
    ));
    s.report
        .checks
        .push(Check::at_most("dtn_vs_c_alpha_balakrishnan", d.rel_error, d.pass_tol));
    s.report.metric("fitted_exponent", d.fitted_exponent);
    s.report.metric("expected_exponent", 2.0 - 2.0 * args.alpha.re());
    s.report.metric("phi_spread", d.phi_spread);
    s.report.metric("max_sample_error", d.max_sample_error);
    if with_table {
        let limit_norm = s.op.norm_of(&d.extrapolated_limit).max(f64::MIN_POSITIVE);
        let rows = d
            .trace
            .t_grid
            .iter()
            .zip(&d.phi)
            .zip(&d.trace.quad_errors)
            .map(|((&t, phi), &err)| vec![t, s.op.norm_of(&(phi - &d.extrapolated_limit)) / limit_norm, err])
            .collect();
        s.report.table = Some(Table {
            columns: ["t", "phi_rel_distance", "est_error"].map(String::from).to_vec(),
            rows,
        });
    }
    Ok(())
}

pub fn dtn(args: &RunArgs) -> Result<Outcome, CliError> {
    let mut s = setup("dtn", args)?;
    dtn_section(&mut s, args, true)?;
    let Setup { mut report, stages, .. } = s;
    stages.attach(&mut report);
    Ok(Outcome::of(report))
}

pub fn compare(args: &RunArgs) -> Result<Outcome, CliError> {
    let mut s = setup("compare", args)?;
    let limit = ROUTE_TOL_FACTOR * args.tol;
    let p = s.stages.run("balakrishnan", || {
        balakrishnan_power(&s.op, &args.alpha, &s.x, args.tol)
    })?;
    s.report.routes.push(power_route("balakrishnan", &p));
    let shifted = s.stages.run("shifted_limit", || {
        shifted_power(&s.op, &args.alpha, &s.x, &eps_sequence(args.shift_depth), args.tol)
    })?;
    s.report.routes.push(power_route("shifted_limit", &shifted.result));
    s.report.checks.push(Check::at_most(
        "balakrishnan_vs_shifted_limit",
        rel(&shifted.result.value, &p.value),
        limit,
    ));
    if let Some(e) = shifted.fitted_exponent {
        s.report.metric("shift_exponent", e);
    }
    if let Some(o) = oracle(&mut s, args)? {
        s.report.routes.push(RouteValue::new("spectral_oracle", &o, 0.0, 0));
        s.report.checks.push(Check::at_most(
            "balakrishnan_vs_spectral_oracle",
            rel(&p.value, &o),
            limit,
        ));
    }
    if args.alpha.re() <= DtnConfig::default().alpha_guard {
        dtn_section(&mut s, args, false)?;
    } else {
        s.report
            .notes
            .push("dtn route skipped: Re(alpha) above the extraction guard".to_string());
    }
    let Setup { mut report, stages, .. } = s;
    stages.attach(&mut report);
    Ok(Outcome::of(report))
}

pub fn validate(args: &ValidateArgs) -> Result<Outcome, CliError> {
    let op = load_operator(&args.op)?;
    let mut stages = Stages::new(args.output.timings);
    let grid = default_lambda_grid();
    let rep = stages.run("resolvent_sampling", || validate_nonnegativity(&op, &grid))?;
    let mut report = ConvergenceReport::new("validate", &args.op, None, None, None);
    report.metric("sampled_max", rep.sampled_max);
    report.metric("m_estimate", rep.m_estimate);
    if let Some(declared) = op.declared_nonneg_constant() {
        report
            .checks
            .push(Check::at_most("sampled_max_within_declared", rep.sampled_max, declared));
    }
    if !rep.note.is_empty() {
        report.notes.push(rep.note.clone());
    }
    report.table = Some(Table {
        columns: ["lambda", "resolvent_norm"].map(String::from).to_vec(),
        rows: rep
            .sampled_lambdas
            .iter()
            .zip(&rep.norms)
            .map(|(&l, &n)| vec![l, n])
            .collect(),
    });
    stages.attach(&mut report);
    Ok(Outcome::of(report))
}

pub fn selftest(args: &SelftestArgs) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let suite = run_suite_with(args.seed, |c| eprintln!("{}", c.line()));
    eprintln!(
        "{} of {} criteria passed",
        suite.criteria.iter().filter(|c| c.pass).count(),
        CRITERIA.len()
    );
    let json = if args.output.timings {
        let mut value = serde_json::to_value(&suite).map_err(|e| CliError::usage(e.to_string()))?;
        value["timings"] = serde_json::json!([{ "stage": "suite", "seconds": start.elapsed().as_secs_f64() }]);
        to_json_pretty(&value)
    } else {
        to_json_pretty(&suite)
    };
    let csv = suite.to_csv();
    Ok(Outcome {
        json,
        csv,
        pass: suite.pass,
    })
}
