//! The `koenigs` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 mathematical obstruction (zero or
//! resonant multiplier), 3 verification failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::Error;
use crate::json;
use crate::linearization::{
    conjugacy_defect, elliptic_schedule, linearize, search_hyperbolic_certificate, verify_bounds,
    BoundsReport, LinearizationResult, Method, RadiusCertificate, Settings,
};
use crate::multipliers::{bruno_sum, multiplier_from_angle, small_divisors};
use crate::precise::compose_precise;
use crate::series::TruncatedSeries;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_OBSTRUCTION: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

/// Environment variable overriding the residual tolerance.
pub const TOLERANCE_VAR: &str = "KOENIGS_TOL";

#[derive(Debug, Parser)]
#[command(name = "koenigs", version, about = "Linearization of holomorphic germs λz + O(z²)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the conjugacy h with h⁻¹ ∘ f ∘ h = λI for f = λz + F.
    Linearize(LinearizeArgs),
    /// Tabulate ω_n = |λⁿ − 1| and the running minima Ω_n.
    Divisors(DivisorArgs),
    /// Partial Bruno sum b_K = Σ 2^{−k} ln(1/Ω_{2^k}).
    Bruno(BrunoArgs),
    /// Recheck a result file written by `linearize --format json`.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct MultiplierArgs {
    /// Multiplier as a complex literal, e.g. 2, 0.5-0.3i, i.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    lambda: Option<Complex64>,
    /// Multiplier e^{2πit} given by its angle t in turns.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_finite)]
    angle: Option<f64>,
}

impl MultiplierArgs {
    fn value(&self) -> Complex64 {
        match (self.lambda, self.angle) {
            (Some(lambda), _) => lambda,
            (None, Some(t)) => multiplier_from_angle(t),
            (None, None) => unreachable!("clap requires one of --lambda and --angle"),
        }
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to FILE instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
struct LinearizeArgs {
    #[command(flatten)]
    multiplier: MultiplierArgs,
    /// `quadratic` for F = z², or the coefficients c2,c3,... of F from degree 2.
    #[arg(long, default_value = "quadratic", allow_hyphen_values = true)]
    map: String,
    /// Truncation order N.
    #[arg(long, default_value_t = 64, value_parser = parse_order)]
    order: usize,
    /// Stages K of the radius schedule (elliptic multipliers).
    #[arg(long, default_value_t = 20, value_parser = parse_stages)]
    stages: usize,
    /// Initial radius r0 of the schedule: `auto` or a positive number.
    #[arg(long, default_value = "auto", value_parser = parse_r0)]
    r0: R0,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct DivisorArgs {
    #[command(flatten)]
    multiplier: MultiplierArgs,
    /// Number of rows n = 1..N.
    #[arg(long, default_value_t = 64, value_parser = parse_positive)]
    order: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct BrunoArgs {
    #[command(flatten)]
    multiplier: MultiplierArgs,
    /// Number of terms K.
    #[arg(long, default_value_t = 20, value_parser = parse_bruno_terms)]
    stages: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Result file in JSON format.
    file: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum R0 {
    Auto,
    Value(f64),
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let z: Complex64 = compact
        .parse()
        .map_err(|_| format!("`{s}` is not a complex number (expected e.g. 2, 0.5-0.3i, i)"))?;
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_finite(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("`{s}` is not a finite number")),
    }
}

fn parse_bounded(s: &str, lo: usize, hi: usize) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(n) if (lo..=hi).contains(&n) => Ok(n),
        _ => Err(format!("expected an integer in {lo}..={hi}, got `{s}`")),
    }
}

fn parse_order(s: &str) -> Result<usize, String> {
    parse_bounded(s, 2, 1 << 16)
}

fn parse_positive(s: &str) -> Result<usize, String> {
    parse_bounded(s, 1, 1 << 26)
}

fn parse_stages(s: &str) -> Result<usize, String> {
    parse_bounded(s, 1, crate::linearization::MAX_SCHEDULE_STAGES)
}

fn parse_bruno_terms(s: &str) -> Result<usize, String> {
    parse_bounded(s, 1, 40)
}

fn parse_r0(s: &str) -> Result<R0, String> {
    if s.trim() == "auto" {
        return Ok(R0::Auto);
    }
    match parse_finite(s) {
        Ok(r) if r > 0.0 => Ok(R0::Value(r)),
        _ => Err(format!("r0 must be `auto` or a positive number, got `{s}`")),
    }
}

/// `F` from a map spec at truncation order `n`.
fn parse_map(spec: &str, n: usize) -> Result<TruncatedSeries, String> {
    if spec.trim() == "quadratic" {
        return Ok(TruncatedSeries::monomial(n, 2, Complex64::new(1.0, 0.0)));
    }
    let tail = spec
        .split(',')
        .map(parse_complex)
        .collect::<Result<Vec<_>, _>>()?;
    if tail.len() > n - 1 {
        return Err(format!(
            "map has {} coefficients but order {n} holds at most {}",
            tail.len(),
            n - 1
        ));
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2];
    coeffs.extend(tail);
    Ok(TruncatedSeries::from_coeffs(coeffs).with_trunc_order(n))
}

fn settings_from_env(stages: usize) -> Result<Settings, Failure> {
    let mut settings = Settings {
        schedule_stages: stages,
        ..Settings::default()
    };
    if let Some(raw) = std::env::var_os(TOLERANCE_VAR) {
        let raw = raw.to_string_lossy();
        match parse_finite(&raw) {
            Ok(tol) if tol > 0.0 => settings.residual_tol = tol,
            _ => {
                return Err(Failure::usage(format!(
                    "{TOLERANCE_VAR} must be a positive number, got `{raw}`"
                )))
            }
        }
    }
    Ok(settings)
}

/// A command that could not produce its output.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn obstruction(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_OBSTRUCTION,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ZeroMultiplier
            | Error::ResonantDivisor { .. }
            | Error::RootOfUnityDivisor { .. }
            | Error::ScheduleCollapse { .. } => EXIT_OBSTRUCTION,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Output of a command; `code` is nonzero when a check failed.
struct Report {
    body: String,
    code: i32,
    warning: Option<String>,
}

impl Report {
    fn ok(body: String) -> Self {
        Self {
            body,
            code: EXIT_OK,
            warning: None,
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (outcome, out) = match &cli.command {
        Command::Linearize(a) => (cmd_linearize(a), &a.output.out),
        Command::Divisors(a) => (cmd_divisors(a), &a.output.out),
        Command::Bruno(a) => (cmd_bruno(a), &a.output.out),
        Command::Verify(a) => (cmd_verify(a), &a.output.out),
    };
    match outcome {
        Ok(report) => {
            if let Err(e) = emit(&report.body, out.as_deref()) {
                eprintln!("koenigs: cannot write output: {e}");
                return EXIT_USAGE;
            }
            if let Some(w) = report.warning {
                eprintln!("koenigs: {w}");
            }
            report.code
        }
        Err(f) => {
            eprintln!("koenigs: {}", f.message);
            f.code
        }
    }
}

fn emit(body: &str, out: Option<&Path>) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, body),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = json::to_string(value).expect("results serialize to JSON");
    s.push('\n');
    s
}

fn csv_rows(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory CSV write");
    for row in rows {
        w.write_record(&row).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV output is UTF-8")
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_complex(z: Complex64) -> String {
    format!("{:.16e} {:+.16e}i", z.re, z.im)
}

fn cmd_linearize(args: &LinearizeArgs) -> Result<Report, Failure> {
    let lambda = args.multiplier.value();
    let f = parse_map(&args.map, args.order).map_err(Failure::usage)?;
    let settings = settings_from_env(args.stages)?;
    let r0 = match args.r0 {
        R0::Auto => None,
        R0::Value(r) => Some(r),
    };
    let result = linearize(lambda, &f, r0, &settings).map_err(|e| match e {
        Error::RootOfUnityDivisor { n } => {
            Failure::obstruction(format!("lambda = {lambda} is a root of unity of order {n}"))
        }
        e => e.into(),
    })?;
    let body = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&result),
        Format::Csv => linearize_csv(&result),
        Format::Text => linearize_text(&result),
    };
    let mut report = Report::ok(body);
    if !result.converged() {
        report.code = EXIT_VERIFICATION;
        report.warning = Some(format!(
            "residual {:e} exceeds tolerance {:e}",
            result.residual, result.tolerance
        ));
    }
    Ok(report)
}

fn linearize_csv(result: &LinearizationResult) -> String {
    match result.schedule() {
        Some(schedule) => csv_rows(
            &["stage", "order", "r_k", "residual"],
            result.stages.iter().map(|st| {
                vec![
                    st.stage.to_string(),
                    st.f_order().to_string(),
                    fmt_f64(schedule.radii[st.stage]),
                    fmt_f64(st.residual),
                ]
            }),
        ),
        None => csv_rows(
            &["m", "re", "im"],
            result
                .h
                .coeffs()
                .iter()
                .enumerate()
                .map(|(m, c)| vec![m.to_string(), fmt_f64(c.re), fmt_f64(c.im)]),
        ),
    }
}

fn linearize_text(result: &LinearizationResult) -> String {
    let mut s = String::new();
    let method = match result.method {
        Method::Direct => "direct",
        Method::Quadratic => "quadratic",
    };
    let _ = writeln!(s, "lambda     {}", fmt_complex(result.lambda));
    let _ = writeln!(s, "method     {method}");
    let _ = writeln!(s, "order      {}", result.h.trunc_order());
    let _ = writeln!(s, "iterations {}", result.iterations);
    let _ = writeln!(s, "residual   {:e}", result.residual);
    let _ = writeln!(s, "tolerance  {:e}", result.tolerance);
    match &result.certificate {
        Some(RadiusCertificate::Hyperbolic(c)) => {
            let _ = writeln!(
                s,
                "radius     {:e} (omega {}, alpha {:e}, r {:e}, holds {}, rigorous {})",
                c.radius,
                c.omega,
                c.alpha,
                c.r,
                c.holds(),
                c.rigorous
            );
        }
        Some(RadiusCertificate::Elliptic(sch)) => {
            let _ = writeln!(
                s,
                "r0 {:e}  r_K {:e}  K {}  b_K {:e}  bound {:e}",
                sch.r0, sch.r_infinity, sch.k, sch.bruno.partial_sum, sch.bruno_bound
            );
        }
        None => {}
    }
    let _ = writeln!(s, "h coefficients:");
    for (m, c) in result.h.coeffs().iter().enumerate() {
        let _ = writeln!(s, "{m:>5}  {}", fmt_complex(*c));
    }
    s
}

#[derive(Serialize)]
struct DivisorJson<'a> {
    #[serde(with = "crate::json::complex_pair")]
    lambda: Complex64,
    omega: &'a [f64],
    #[serde(rename = "Omega")]
    running_min: &'a [f64],
}

fn cmd_divisors(args: &DivisorArgs) -> Result<Report, Failure> {
    let lambda = args.multiplier.value();
    let table = small_divisors(lambda, args.order);
    let body = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            table
                .write_csv(&mut buf)
                .map_err(|e| Failure::usage(e.to_string()))?;
            String::from_utf8(buf).expect("CSV output is UTF-8")
        }
        Format::Json => to_json(&DivisorJson {
            lambda,
            omega: table.omegas(),
            running_min: table.running_mins(),
        }),
        Format::Text => {
            let mut s = format!("{:>8}  {:>24}  {:>24}\n", "n", "omega", "Omega");
            for n in 1..=table.n_max() {
                let _ = writeln!(
                    s,
                    "{n:>8}  {:>24}  {:>24}",
                    fmt_f64(table.omega(n)),
                    fmt_f64(table.running_min(n))
                );
            }
            s
        }
    };
    Ok(Report::ok(body))
}

fn cmd_bruno(args: &BrunoArgs) -> Result<Report, Failure> {
    let lambda = args.multiplier.value();
    let estimate = bruno_sum(lambda, args.stages)?;
    let body = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&estimate),
        Format::Csv => csv_rows(
            &["k", "term", "partial_sum"],
            estimate
                .terms
                .iter()
                .zip(estimate.partial_sums())
                .enumerate()
                .map(|(i, (t, b))| vec![(i + 1).to_string(), fmt_f64(*t), fmt_f64(b)]),
        ),
        Format::Text => {
            let mut s = String::new();
            for (i, (t, b)) in estimate.terms.iter().zip(estimate.partial_sums()).enumerate() {
                let _ = writeln!(s, "{:>4}  {:>24}  {:>24}", i + 1, fmt_f64(*t), fmt_f64(b));
            }
            let _ = writeln!(s, "b_{} = {}", estimate.k, fmt_f64(estimate.partial_sum));
            s
        }
    };
    Ok(Report::ok(body))
}

/// Independent recheck of a stored linearization result.
#[derive(Debug, Serialize)]
struct VerifyReport {
    method: Method,
    /// `h(0) = 0` and `h'(0) = 1`.
    normalized: bool,
    /// Largest coefficient of `[h⁻¹ ∘ f ∘ h − λI]_N`, recomputed.
    residual: f64,
    /// Largest coefficient of `[h ∘ h⁻¹ − I]_N` for the stored `h⁻¹`.
    inverse_defect: f64,
    tolerance: f64,
    /// `tol · (1 + max(|h_m|, |h⁻¹_m|))²`.
    inverse_tolerance: f64,
    residual_holds: bool,
    /// Every degree-`m` coefficient of both defects is within
    /// `tol · (1 + M_m)²`, `M_m` the largest `|h_j|, |h⁻¹_j|` with `j ≤ m`.
    graded_holds: bool,
    /// The stored radius schedule equals a fresh one for the same `λ, r0, K`.
    #[serde(skip_serializing_if = "Option::is_none")]
    schedule_matches: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bounds: Option<BoundsReport>,
    /// The stored hyperbolic certificate equals a fresh one and holds.
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate_holds: Option<bool>,
    verified: bool,
}

fn cmd_verify(args: &VerifyArgs) -> Result<Report, Failure> {
    let text = fs::read_to_string(&args.file)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", args.file.display())))?;
    let result: LinearizationResult = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("{} is not a result file: {e}", args.file.display())))?;
    let settings = settings_from_env(Settings::default().schedule_stages)?;
    let report = verify_result(&result, &settings)?;
    let body = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report),
        Format::Csv => verify_csv(&report),
        Format::Text => verify_text(&report),
    };
    Ok(Report {
        body,
        code: if report.verified { EXIT_OK } else { EXIT_VERIFICATION },
        warning: (!report.verified).then(|| "verification failed".to_string()),
    })
}

fn verify_result(result: &LinearizationResult, settings: &Settings) -> Result<VerifyReport, Failure> {
    let h = &result.h;
    let n = h.trunc_order();
    if result.nonlinearity.trunc_order() != n || result.h_inverse.trunc_order() != n {
        return Err(Failure::usage("series in the result file have different orders"));
    }
    let normalized = h.coeff(0) == Complex64::new(0.0, 0.0) && h.coeff(1) == Complex64::new(1.0, 0.0);
    let defect = conjugacy_defect(result.lambda, &result.nonlinearity, h)?;
    let inverse = &compose_precise(h, &result.h_inverse)? - &TruncatedSeries::identity(n);
    let (residual, inverse_defect) = (defect.max_abs(), inverse.max_abs());
    let tolerance = settings.residual_bound(h);
    let scale = h.max_abs().max(result.h_inverse.max_abs());
    let inverse_tolerance = settings.residual_tol * (1.0 + scale).powi(2);
    let residual_holds = normalized && residual <= tolerance && inverse_defect <= inverse_tolerance;
    let graded_holds = graded_check(&[&defect, &inverse], &[h, &result.h_inverse], settings.residual_tol);

    let mut schedule_matches = None;
    let mut bounds = None;
    let mut certificate_holds = None;
    match (&result.method, &result.certificate) {
        (Method::Quadratic, Some(RadiusCertificate::Elliptic(stored))) => {
            let fresh = elliptic_schedule(result.lambda, stored.r0, stored.k)?;
            schedule_matches = Some(fresh == *stored);
            bounds = Some(verify_bounds(result)?);
        }
        (Method::Quadratic, _) => schedule_matches = Some(false),
        (Method::Direct, Some(RadiusCertificate::Hyperbolic(stored))) => {
            let tail = h - &TruncatedSeries::identity(n);
            let fresh =
                search_hyperbolic_certificate(result.lambda, &result.nonlinearity, Some(&tail), settings)?;
            certificate_holds = Some(fresh == *stored && fresh.holds());
        }
        (Method::Direct, None) => {}
        (Method::Direct, Some(_)) => certificate_holds = Some(false),
    }
    let verified = residual_holds
        && graded_holds
        && schedule_matches.unwrap_or(true)
        && bounds.as_ref().is_none_or(BoundsReport::all_hold)
        && certificate_holds.unwrap_or(true);
    Ok(VerifyReport {
        method: result.method,
        normalized,
        residual,
        inverse_defect,
        tolerance,
        inverse_tolerance,
        residual_holds,
        graded_holds,
        schedule_matches,
        bounds,
        certificate_holds,
        verified,
    })
}

fn graded_check(defects: &[&TruncatedSeries], scales: &[&TruncatedSeries], tol: f64) -> bool {
    let n = defects[0].trunc_order();
    let mut running = 0.0f64;
    (0..=n).all(|m| {
        running = scales.iter().fold(running, |acc, s| acc.max(s.coeff(m).norm()));
        let bound = tol * (1.0 + running).powi(2);
        defects.iter().all(|d| d.coeff(m).norm() <= bound)
    })
}

fn verify_csv(report: &VerifyReport) -> String {
    let opt = |b: Option<bool>| b.map_or(String::new(), |b| b.to_string());
    csv_rows(
        &["check", "value"],
        [
            vec!["normalized".into(), report.normalized.to_string()],
            vec!["residual".into(), fmt_f64(report.residual)],
            vec!["inverse_defect".into(), fmt_f64(report.inverse_defect)],
            vec!["tolerance".into(), fmt_f64(report.tolerance)],
            vec!["inverse_tolerance".into(), fmt_f64(report.inverse_tolerance)],
            vec!["residual_holds".into(), report.residual_holds.to_string()],
            vec!["graded_holds".into(), report.graded_holds.to_string()],
            vec!["schedule_matches".into(), opt(report.schedule_matches)],
            vec!["bounds_hold".into(), opt(report.bounds.as_ref().map(BoundsReport::all_hold))],
            vec!["certificate_holds".into(), opt(report.certificate_holds)],
            vec!["verified".into(), report.verified.to_string()],
        ],
    )
}

fn verify_text(report: &VerifyReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "residual       {:e} (tolerance {:e})", report.residual, report.tolerance);
    let _ = writeln!(
        s,
        "inverse defect {:e} (tolerance {:e})",
        report.inverse_defect, report.inverse_tolerance
    );
    let _ = writeln!(s, "normalized     {}", report.normalized);
    let _ = writeln!(s, "graded         {}", report.graded_holds);
    if let Some(m) = report.schedule_matches {
        let _ = writeln!(s, "schedule       {}", if m { "matches" } else { "differs" });
    }
    if let Some(b) = &report.bounds {
        for st in &b.stages {
            let _ = writeln!(
                s,
                "stage {:>2}  F(r_k) {:e} <= {:e}  P(r_k+1) {:e} <= {:e}  {}",
                st.stage,
                st.f_hat_at_r_k,
                st.r_k,
                st.p_hat_at_r_next,
                st.a_k_r_k,
                st.f_bound_holds && st.f_scaled_holds && st.p_bound_holds
            );
        }
        let _ = writeln!(
            s,
            "h(r_inf) {:e} <= r0 {:e}  {}",
            b.h_hat_at_r_infinity, b.r0, b.h_bound_holds
        );
    }
    if let Some(c) = report.certificate_holds {
        let _ = writeln!(s, "certificate    {c}");
    }
    let _ = writeln!(s, "{}", if report.verified { "verified" } else { "FAILED" });
    s
}
