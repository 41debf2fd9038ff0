mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use exclusion_core::{int, parse_rational, to_f64, Field, Rational};
use exclusion_integrable::ansatz::{
    check_gz, check_inhomogeneous_eigenvector, check_rd_relations, check_zf_monodromy, check_zf_rd,
    max_relative_difference, rd_closed_forms, rd_steady_converged, steady_from_ansatz, tasep_representation,
    RdClosedForm, RdConstants, RD_CHECK_TRUNCATION,
};
use exclusion_integrable::markov::{observables, steady_state, Distribution, Observables};
use exclusion_integrable::transfer::{
    build_transfer, check_commutation, check_crossing_symmetry_t, check_eigenpair, lambda_eigenvalue,
    lambda_eigenvector, markov_from_transfer, ssep_conjugated, Side, TransferSpec,
};
use exclusion_integrable::verifier::{run_suite, sample_points, CheckReport, Status};
use exclusion_integrable::{Error, Model, ModelKind, Rates};
use serde::Serialize;

use output::{cell, emit, float, json, report_document, reports_csv, table_csv, Summary, SCHEMA};

#[derive(Parser, Debug)]
#[command(name = "exclusion", version, about = "Exact integrability checks and stationary states for open exclusion processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the bulk and boundary identity suite at seeded rational points.
    Verify(VerifyArgs),
    /// Stationary distribution, densities and currents.
    Steady(SteadyArgs),
    /// RD density and current profiles from the closed forms.
    Profile(ProfileArgs),
    /// Transfer-matrix and matrix-product identities.
    Transfer(TransferArgs),
    /// Timings of the exact solvers.
    Bench(BenchArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ModelName {
    Asep,
    Tasep,
    Ssep,
    Rd,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: ModelName,
    #[arg(long, default_value = "1", value_parser = rational)]
    alpha: Rational,
    #[arg(long, default_value = "1", value_parser = rational)]
    beta: Rational,
    #[arg(long, default_value = "0", value_parser = rational)]
    gamma: Rational,
    #[arg(long, default_value = "0", value_parser = rational)]
    delta: Rational,
    /// ASEP asymmetry.
    #[arg(long, default_value = "2", value_parser = rational)]
    q: Rational,
    /// RD diffusion constant.
    #[arg(long, default_value = "3", value_parser = rational)]
    kappa: Rational,
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Print numbers as exact rationals where available.
    #[arg(long)]
    exact: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 5)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Method {
    Nullspace,
    Ansatz,
    Both,
}

#[derive(Args, Debug)]
struct SteadyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long = "L", short = 'L')]
    l: usize,
    #[arg(long, value_enum, default_value = "nullspace")]
    method: Method,
    /// Largest L accepted by the exact solver.
    #[arg(long, default_value_t = 10)]
    max_l: usize,
    #[arg(long, default_value_t = 256)]
    truncation_cap: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long = "L", short = 'L')]
    l: usize,
    /// Append the large-L density.
    #[arg(long)]
    asymptotics: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TransferCheck {
    Commutation,
    MarkovDerivative,
    Eigenvalue,
    Crossing,
    SsepConjugation,
    InhomogeneousEigenvector,
    Zf,
    All,
}

#[derive(Args, Debug)]
struct TransferArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long = "L", short = 'L')]
    l: Option<usize>,
    /// Comma-separated inhomogeneities; homogeneous when omitted.
    #[arg(long, value_delimiter = ',', value_parser = rational)]
    theta: Vec<Rational>,
    #[arg(long, value_enum, default_value = "all")]
    check: TransferCheck,
    #[arg(long, default_value = "2", value_parser = rational)]
    x: Rational,
    #[arg(long, default_value = "5", value_parser = rational)]
    x2: Rational,
    #[arg(long, default_value_t = 256)]
    truncation_cap: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Largest chain length timed.
    #[arg(long = "L", short = 'L', default_value_t = 6)]
    l: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn build_model(a: &ModelArgs) -> CliResult<Model> {
    let rates = Rates::new(a.alpha.clone(), a.beta.clone(), a.gamma.clone(), a.delta.clone());
    let usage = |e: Error| CliError::Usage(e.to_string());
    match a.model {
        ModelName::Asep => Model::asep(rates, a.q.clone()).map_err(usage),
        ModelName::Tasep => {
            if !Field::is_zero(&a.gamma) || !Field::is_zero(&a.delta) {
                return Err(CliError::Usage("TASEP has no γ or δ; leave them at 0".into()));
            }
            Ok(Model::tasep(a.alpha.clone(), a.beta.clone()))
        }
        ModelName::Ssep => Ok(Model::ssep(rates)),
        ModelName::Rd => Model::rd(rates, a.kappa.clone()).map_err(usage),
    }
}

fn format_or(out: &OutArgs, default: Format) -> Format {
    out.format.unwrap_or(default)
}

fn write_reports(
    command: &'static str,
    model: &Model,
    seed: Option<u64>,
    reports: &[CheckReport],
    out: &OutArgs,
) -> CliResult<()> {
    let bytes = match format_or(out, Format::Json) {
        Format::Json => json(&report_document(command, model, seed, reports))?,
        Format::Csv => reports_csv(reports)?,
    };
    emit(out.out.as_deref(), &bytes)?;
    Ok(())
}

fn verify(args: &VerifyArgs) -> CliResult<u8> {
    let model = build_model(&args.model)?;
    let points = sample_points(&model, args.seed, args.samples)?;
    let reports = run_suite(&model, &points);
    write_reports("verify", &model, Some(args.seed), &reports, &args.out)?;
    Ok(if Summary::of(&reports).fail > 0 { 1 } else { 0 })
}

fn configuration_label(d_len: usize, idx: usize) -> String {
    (0..d_len).map(|s| if (idx >> (d_len - 1 - s)) & 1 == 1 { '1' } else { '0' }).collect()
}

/// One quantity in exact and floating form.
#[derive(Clone, Debug)]
struct Value {
    exact: Option<Rational>,
    approx: f64,
}

impl Value {
    fn exact(q: &Rational) -> Self {
        Value { exact: Some(q.clone()), approx: to_f64(q) }
    }

    fn approx(x: f64) -> Self {
        Value { exact: None, approx: x }
    }

    fn render(&self, exact: bool) -> String {
        match &self.exact {
            Some(q) => cell(q, exact),
            None => float(self.approx),
        }
    }
}

/// Rows `(quantity, label, value)` for weights and observables.
fn steady_rows(probabilities: Vec<Value>, obs: Observables<Value>, l: usize) -> Vec<(String, String, Value)> {
    let mut rows = Vec::new();
    for (i, p) in probabilities.into_iter().enumerate() {
        rows.push(("weight".into(), configuration_label(l, i), p));
    }
    for (i, d) in obs.density.into_iter().enumerate() {
        rows.push(("density".into(), (i + 1).to_string(), d));
    }
    for (i, c) in obs.current_lat.into_iter().enumerate() {
        rows.push(("current_lat".into(), (i + 1).to_string(), c));
    }
    for (i, c) in obs.current_eva.into_iter().enumerate() {
        rows.push(("current_eva".into(), (i + 1).to_string(), c));
    }
    rows
}

fn exact_steady(model: &Model, l: usize) -> CliResult<Vec<(String, String, Value)>> {
    let d = steady_state(model, l)?;
    Ok(exact_rows(&d, model))
}

fn exact_rows(d: &Distribution, model: &Model) -> Vec<(String, String, Value)> {
    let obs = observables(d, model);
    let conv = |v: Vec<Rational>| v.iter().map(Value::exact).collect::<Vec<_>>();
    let obs = Observables {
        density: conv(obs.density),
        current_lat: conv(obs.current_lat),
        current_eva: conv(obs.current_eva),
    };
    steady_rows(conv(d.probabilities()), obs, d.l)
}

fn ansatz_steady(model: &Model, l: usize, cap: usize) -> CliResult<Vec<(String, String, Value)>> {
    match model.kind() {
        ModelKind::Tasep => {
            let r = model.rates();
            let rep = tasep_representation(&r.alpha, &r.beta, l + 1)?;
            Ok(exact_rows(&steady_from_ansatz(&rep, l)?, model))
        }
        ModelKind::Rd => {
            let (d, n) = rd_steady_converged(model, l, cap)?;
            eprintln!("truncation converged at N = {n}");
            let obs = observables(&d, model);
            let conv = |v: Vec<f64>| v.into_iter().map(Value::approx).collect::<Vec<_>>();
            let obs = Observables {
                density: conv(obs.density),
                current_lat: conv(obs.current_lat),
                current_eva: conv(obs.current_eva),
            };
            Ok(steady_rows(conv(d.probabilities()), obs, l))
        }
        _ => Err(CliError::Domain(format!("no explicit matrix product representation for {}", model.name()))),
    }
}

#[derive(Serialize)]
struct SteadyRow {
    quantity: String,
    label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nullspace: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ansatz: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rel_diff: Option<String>,
}

#[derive(Serialize)]
struct SteadyDocument {
    schema: u32,
    command: &'static str,
    model: String,
    params: Vec<output::Param>,
    l: usize,
    method: String,
    rows: Vec<SteadyRow>,
}

fn steady(args: &SteadyArgs) -> CliResult<u8> {
    let model = build_model(&args.model)?;
    let l = args.l;
    if l == 0 {
        return Err(CliError::Usage("L must be at least 1".into()));
    }
    let ansatz_cap = 8.min(args.max_l);
    if l > args.max_l || (args.method != Method::Nullspace && l > ansatz_cap) {
        return Err(CliError::Usage(format!(
            "L = {l} exceeds the cap ({} for the exact solver, {ansatz_cap} for the ansatz cross-check)",
            args.max_l
        )));
    }
    let exact = args.out.exact;
    let rows: Vec<SteadyRow> = match args.method {
        Method::Nullspace | Method::Ansatz => {
            let values =
                if args.method == Method::Nullspace { exact_steady(&model, l)? } else { ansatz_steady(&model, l, args.truncation_cap)? };
            values
                .into_iter()
                .map(|(quantity, label, v)| SteadyRow {
                    quantity,
                    label,
                    value: Some(v.render(exact)),
                    nullspace: None,
                    ansatz: None,
                    rel_diff: None,
                })
                .collect()
        }
        Method::Both => {
            let a = exact_steady(&model, l)?;
            let b = ansatz_steady(&model, l, args.truncation_cap)?;
            a.into_iter()
                .zip(b)
                .map(|((quantity, label, x), (_, _, y))| SteadyRow {
                    quantity,
                    label,
                    value: None,
                    rel_diff: Some(float(max_relative_difference(&[x.approx], &[y.approx]))),
                    nullspace: Some(x.render(exact)),
                    ansatz: Some(y.render(exact)),
                })
                .collect()
        }
    };
    let bytes = match format_or(&args.out, Format::Csv) {
        Format::Csv => {
            let both = args.method == Method::Both;
            let header: &[&str] = if both {
                &["quantity", "label", "nullspace", "ansatz", "rel_diff"]
            } else {
                &["quantity", "label", "value"]
            };
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut cells = vec![r.quantity.clone(), r.label.clone()];
                    for c in [&r.value, &r.nullspace, &r.ansatz, &r.rel_diff].into_iter().flatten() {
                        cells.push(c.clone());
                    }
                    cells
                })
                .collect();
            table_csv(header, &table)?
        }
        Format::Json => json(&SteadyDocument {
            schema: SCHEMA,
            command: "steady",
            model: model.name().to_string(),
            params: output::params(&model),
            l,
            method: format!("{:?}", args.method).to_lowercase(),
            rows,
        })?,
    };
    emit(args.out.out.as_deref(), &bytes)?;
    Ok(0)
}

fn profile(args: &ProfileArgs) -> CliResult<u8> {
    let model = build_model(&args.model)?;
    if model.kind() != ModelKind::Rd {
        return Err(CliError::Usage("profile is defined for the RD model only".into()));
    }
    let l = args.l;
    if l < 2 {
        return Err(CliError::Usage("profile needs L ≥ 2".into()));
    }
    let k = RdConstants::new(&model)?;
    if Field::is_zero(&k.c) || Field::is_zero(&k.d) {
        return Err(CliError::Domain(
            "c = 0 or d = 0 (α = γ or β = δ): the matrix product construction behind the closed forms degenerates"
                .into(),
        ));
    }
    let exact = args.out.exact;
    let mut rows = Vec::with_capacity(l);
    let opt = |v: Option<String>| v.unwrap_or_default();
    for i in 1..=l {
        let mut row = vec![i.to_string()];
        if exact {
            let cf: RdClosedForm<Rational> = rd_closed_forms(&model, l, i)?;
            row.push(cf.exact.density.to_string());
            row.push(opt(cf.exact.current_lat.map(|v| v.to_string())));
            row.push(opt(cf.exact.current_eva.map(|v| v.to_string())));
            if args.asymptotics {
                row.push(cf.asymptotic.density.to_string());
            }
        } else {
            let cf: RdClosedForm<f64> = rd_closed_forms(&model, l, i)?;
            row.push(float(cf.exact.density));
            row.push(opt(cf.exact.current_lat.map(float)));
            row.push(opt(cf.exact.current_eva.map(float)));
            if args.asymptotics {
                row.push(float(cf.asymptotic.density));
            }
        }
        rows.push(row);
    }
    let mut header = vec!["site", "density", "current_lat", "current_eva"];
    if args.asymptotics {
        header.push("density_asymptotic");
    }
    let bytes = match format_or(&args.out, Format::Csv) {
        Format::Csv => table_csv(&header, &rows)?,
        Format::Json => {
            #[derive(Serialize)]
            struct ProfileDocument<'a> {
                schema: u32,
                command: &'static str,
                params: Vec<output::Param>,
                l: usize,
                columns: Vec<&'a str>,
                rows: Vec<Vec<String>>,
            }
            json(&ProfileDocument { schema: SCHEMA, command: "profile", params: output::params(&model), l, columns: header, rows })?
        }
    };
    emit(args.out.out.as_deref(), &bytes)?;
    Ok(0)
}

fn transfer_spec(model: &Model, args: &TransferArgs) -> CliResult<TransferSpec> {
    if args.theta.is_empty() {
        let l = args.l.ok_or_else(|| CliError::Usage("give --L or --theta".into()))?;
        if l == 0 {
            return Err(CliError::Usage("L must be at least 1".into()));
        }
        return Ok(TransferSpec::homogeneous(model.clone(), l));
    }
    if let Some(l) = args.l {
        if l != args.theta.len() {
            return Err(CliError::Usage(format!("--L {l} but {} inhomogeneities", args.theta.len())));
        }
    }
    Ok(TransferSpec::inhomogeneous(model.clone(), args.theta.clone()))
}

fn eigenvalue_reports(spec: &TransferSpec, x: &Rational, x2: &Rational) -> Vec<CheckReport> {
    let model = &spec.model;
    let lam = lambda_eigenvalue(model, x, &spec.thetas);
    let mut out = vec![CheckReport::run(model.name(), "transfer.eigenvalue", vec![x.to_string()], || {
        lambda_eigenvalue(model, x, &spec.thetas).map(|_| Status::Pass)
    })];
    if let Ok(l) = &lam {
        out[0] = out[0].clone().with_detail(format!("lambda={l}"));
    }
    let ones = vec![int(1); 1 << spec.l];
    out.push(check_eigenpair(spec, x, &ones, Side::Left));
    let other = if x2 == x { x + int(1) } else { x2.clone() };
    match lambda_eigenvector(spec, [x, &other]) {
        Ok(v) => out.push(check_eigenpair(spec, x, &v, Side::Right)),
        Err(e) => out.push(CheckReport::run(model.name(), "transfer.right_eigenvector", vec![x.to_string()], || Err(e))),
    }
    for th in &spec.thetas {
        out.push(CheckReport::run(model.name(), "transfer.lambda_at_theta", vec![th.to_string()], || {
            let v = lambda_eigenvalue(model, th, &spec.thetas)?;
            Ok(if v == int(1) {
                Status::Pass
            } else {
                Status::Fail { witness: None, message: format!("λ(θ) = {v}") }
            })
        }));
    }
    out
}

fn transfer(args: &TransferArgs) -> CliResult<u8> {
    let model = build_model(&args.model)?;
    let spec = transfer_spec(&model, args)?;
    if spec.l > 5 {
        return Err(CliError::Usage(format!("L = {} exceeds the transfer cap of 5", spec.l)));
    }
    let (x, x2) = (&args.x, &args.x2);
    let wants = |c: TransferCheck| args.check == c || args.check == TransferCheck::All;
    let kind = model.kind();
    let mut reports = Vec::new();
    if wants(TransferCheck::Commutation) {
        reports.push(check_commutation(&spec, x, x2));
    }
    if wants(TransferCheck::MarkovDerivative) {
        reports.push(markov_from_transfer(&model, spec.l));
    }
    if wants(TransferCheck::Eigenvalue) && matches!(kind, ModelKind::Ssep | ModelKind::Asep) {
        reports.extend(eigenvalue_reports(&spec, x, x2));
    }
    if wants(TransferCheck::Crossing) && matches!(kind, ModelKind::Ssep | ModelKind::Asep) {
        reports.push(check_crossing_symmetry_t(&spec, x));
    }
    if wants(TransferCheck::SsepConjugation) && kind == ModelKind::Ssep {
        reports.extend(ssep_conjugated(&spec, x));
    }
    if wants(TransferCheck::InhomogeneousEigenvector) && kind == ModelKind::Rd {
        let thetas = if args.theta.is_empty() { vec![int(1); spec.l] } else { args.theta.clone() };
        reports.extend(check_inhomogeneous_eigenvector(&model, &thetas, args.truncation_cap, 1e-10));
    }
    if wants(TransferCheck::Zf) {
        if kind == ModelKind::Rd {
            reports.extend(check_rd_relations(&model, RD_CHECK_TRUNCATION));
            reports.extend(check_zf_rd(&model, RD_CHECK_TRUNCATION, x, x2));
            reports.extend(check_gz(&model, RD_CHECK_TRUNCATION, x));
        } else {
            reports.extend(check_zf_monodromy(&model, spec.l.min(3), x, x2));
        }
    }
    if reports.is_empty() {
        return Err(CliError::Usage(format!("check {:?} does not apply to {}", args.check, model.name())));
    }
    write_reports("transfer", &model, None, &reports, &args.out)?;
    let summary = Summary::of(&reports);
    if summary.fail > 0 {
        return Ok(1);
    }
    if summary.poles > 0 {
        for r in &reports {
            if let Status::Skipped(reason) = &r.status {
                eprintln!("{} at {}: {reason}", r.check, r.points.join(" "));
            }
        }
        return Ok(3);
    }
    Ok(0)
}

fn bench(args: &BenchArgs) -> CliResult<u8> {
    let model = build_model(&args.model)?;
    let mut rows = Vec::new();
    for l in 1..=args.l {
        let t0 = Instant::now();
        steady_state(&model, l)?;
        let steady = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        build_transfer(&TransferSpec::homogeneous(model.clone(), l), &int(2))?;
        let tr = t1.elapsed().as_secs_f64();
        rows.push(vec![l.to_string(), float(steady), float(tr)]);
    }
    let bytes = table_csv(&["L", "steady_seconds", "transfer_seconds"], &rows)?;
    emit(args.out.out.as_deref(), &bytes)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify(a) => verify(a),
        Command::Steady(a) => steady(a),
        Command::Profile(a) => profile(a),
        Command::Transfer(a) => transfer(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("usage error: {m}"),
                CliError::Domain(m) => eprintln!("error: {m}"),
                CliError::Io(m) => eprintln!("i/o error: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
