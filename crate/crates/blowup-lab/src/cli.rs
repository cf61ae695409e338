//! Command-line front end: builds solutions from flags, runs the
//! verification suite, and writes profiles, reports, and sweep tables.
//!
//! Output contract:
//! - CSV files: header row, `\n` line endings, `.` decimal separator,
//!   floats printed as `{:.16e}` (17 significant digits, lossless);
//! - JSON files: one top-level object, fixed field order, trailing newline;
//! - identical invocations (including `--seed`) produce byte-identical
//!   files — no timestamps, no environment leakage;
//! - exit codes: 0 pass, 1 verification failure, 2 config error,
//!   3 numeric failure, 4 I/O failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::defaults;
use crate::error::{Error, Result};
use crate::families::{
    build_blowup_solution, isothermal_problem, lane_emden_analytic, lane_emden_analytic_zero,
    polytropic_problem, StationaryStar,
};
use crate::model::{ForceSign, ModelParams};
use crate::ode::{
    first_zero, integrate_profile, integrate_scale_factor, EmdenProblem, RadialProfile,
};
use crate::verify;

/// Environment variable capping sweep worker threads.
pub const THREADS_ENV: &str = "BLOWUP_LAB_THREADS";

/// Note printed in every report header: the profile ODE coefficient as
/// adopted here, flagged because the two displays of it in the source
/// derivation disagree and the Q-functional derivation fixes the factor 5.
const COEFFICIENT_NOTE: &str = "profile ODE coefficient adopted as alpha(4)/(5*C*kappa); \
     the Q-functional derivation pins the viscous factor 5, and the variant display \
     alpha(4)/(C*kappa) is treated as a typographical slip";

#[derive(Debug, Parser)]
#[command(
    name = "blowup-lab",
    version,
    about = "Self-similar blowup solutions of the 4-d pressureless Navier-Stokes-Poisson \
             system with density-dependent viscosity, with numerical certification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a solution-family profile and write CSV (+ JSON sidecar).
    Profile(ProfileArgs),
    /// Run the verification suite and write a JSON report.
    Verify(VerifyArgs),
    /// Integrate the Lane-Emden equation; compare against closed forms for n in {0, 1, 5}.
    LaneEmden(LaneEmdenArgs),
    /// Integrate the collapse scale factor ä = -λ/a^(N-1).
    ScaleFactor(ScaleFactorArgs),
    /// Cartesian parameter sweep over C × κ × α.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FamilyArg {
    /// Theorem-1 self-similar family (global/repulsive via --C sign and --repulsive).
    Blowup4d,
    /// Classical Lane-Emden polytrope (use --n).
    LaneEmden,
    /// Polytropic background family in N ≥ 3 dimensions.
    Polytropic,
    /// Isothermal background family in N = 2 dimensions.
    Isothermal,
}

/// Self-similar model flags shared by profile/verify.
#[derive(Debug, Args)]
pub struct ModelFlags {
    /// Similarity drift C (> 0: blowup at T/C; < 0: global solution).
    #[arg(long = "C", default_value_t = 1.0, allow_negative_numbers = true)]
    pub big_c: f64,
    /// Time-scale offset T > 0.
    #[arg(long = "T", default_value_t = 1.0)]
    pub big_t: f64,
    /// Viscosity constant κ > 0.
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Central profile value α > 0.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Flip the force sign (repulsive variant; requires C > 0).
    #[arg(long)]
    pub repulsive: bool,
}

impl ModelFlags {
    fn params(&self) -> ModelParams {
        let mut params = ModelParams::theorem1(self.big_c, self.big_t, self.kappa, self.alpha);
        if self.repulsive {
            params.force_sign = ForceSign::Repulsive;
        }
        params
    }
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Solution family to integrate.
    #[arg(long, value_enum, default_value_t = FamilyArg::Blowup4d)]
    pub family: FamilyArg,
    #[command(flatten)]
    pub model: ModelFlags,
    /// Polytropic index for --family lane-emden (fractional allowed).
    #[arg(long, default_value_t = 1.0)]
    pub n: f64,
    /// Spatial dimension for --family polytropic (N ≥ 3).
    #[arg(long, default_value_t = 3)]
    pub dim: u32,
    /// Pressure constant K for the background families.
    #[arg(long = "K", default_value_t = 1.0)]
    pub big_k: f64,
    /// Gravitational coupling λ for the background families.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Integration horizon for the non-blowup families.
    #[arg(long, default_value_t = 10.0)]
    pub z_max: f64,
    /// ODE tolerance.
    #[arg(long, default_value_t = defaults::TOL)]
    pub tol: f64,
    /// Maximum integrator step.
    #[arg(long, default_value_t = defaults::MAX_STEP)]
    pub max_step: f64,
    /// Bisection tolerance for the reported first zero.
    #[arg(long, default_value_t = defaults::ZERO_TOL)]
    pub zero_tol: f64,
    /// Primary output format (csv writes a .json sidecar alongside).
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Output path.
    #[arg(long, short = 'o')]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    /// Table as CSV plus a JSON sidecar with the scalar summary.
    Csv,
    /// Single JSON document embedding the table.
    Json,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    /// Verify the γ = 6/5 stationary star instead of a self-similar family.
    #[arg(long)]
    pub stationary: bool,
    /// Pressure constant K for --stationary.
    #[arg(long = "K", default_value_t = 2.0 * std::f64::consts::PI / 3.0)]
    pub big_k: f64,
    /// Scale constant A for --stationary.
    #[arg(long = "A", default_value_t = 1.0, allow_negative_numbers = true)]
    pub big_a: f64,
    /// Simpson panels for the momentum/hydrostatic quadratures.
    #[arg(long, default_value_t = defaults::QUAD_POINTS)]
    pub quad_points: usize,
    /// ODE tolerance for the profile build.
    #[arg(long, default_value_t = defaults::TOL)]
    pub tol: f64,
    /// Jitter the default sample grids reproducibly (same seed, same grids).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Inject a known defect as a negative control (supported:
    /// coefficient=4Ckappa). The report must then fail with exit 1.
    #[arg(long)]
    pub inject_error: Option<String>,
    /// Output path for the JSON report; when omitted the report is written
    /// to stdout (and the human-readable summary to stderr).
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LaneEmdenArgs {
    /// Polytropic index (closed-form comparison for n in {0, 1, 5}).
    #[arg(long, default_value_t = 1.0)]
    pub n: f64,
    /// Integration horizon.
    #[arg(long, default_value_t = 10.0)]
    pub z_max: f64,
    /// ODE tolerance.
    #[arg(long, default_value_t = defaults::TOL)]
    pub tol: f64,
    /// Maximum integrator step.
    #[arg(long, default_value_t = defaults::MAX_STEP)]
    pub max_step: f64,
    /// Bisection tolerance for the reported first zero.
    #[arg(long, default_value_t = defaults::ZERO_TOL)]
    pub zero_tol: f64,
    /// Primary output format (csv writes a .json sidecar alongside).
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Output path.
    #[arg(long, short = 'o')]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScaleFactorArgs {
    /// Gravitational coupling λ (sign free).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Spatial dimension N ≥ 2.
    #[arg(long, default_value_t = 3)]
    pub dim: u32,
    /// Initial scale factor a(0) > 0.
    #[arg(long, default_value_t = 1.0)]
    pub a0: f64,
    /// Initial rate ȧ(0).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub a1: f64,
    /// Integration horizon in t.
    #[arg(long, default_value_t = 2.0)]
    pub t_max: f64,
    /// ODE tolerance.
    #[arg(long, default_value_t = defaults::TOL)]
    pub tol: f64,
    /// Primary output format (csv writes a .json sidecar alongside).
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Output path.
    #[arg(long, short = 'o')]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated C values.
    #[arg(long = "C", value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub big_c: Vec<f64>,
    /// Comma-separated κ values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub kappa: Vec<f64>,
    /// Comma-separated α values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub alpha: Vec<f64>,
    /// Time-scale offset T > 0 (fixed across the sweep).
    #[arg(long = "T", default_value_t = 1.0)]
    pub big_t: f64,
    /// Sweep the repulsive variant.
    #[arg(long)]
    pub repulsive: bool,
    /// ODE tolerance.
    #[arg(long, default_value_t = defaults::TOL)]
    pub tol: f64,
    /// Simpson panels for the per-row residuals.
    #[arg(long, default_value_t = 512)]
    pub quad_points: usize,
    /// Output path for the CSV table (JSON sidecar alongside).
    #[arg(long, short = 'o')]
    pub output: PathBuf,
}

/// Parse argv, dispatch, and map the outcome to an exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

/// Run a parsed command. `Ok(false)` means a verification check failed
/// (exit 1) as opposed to an operational error.
pub fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Profile(args) => cmd_profile(&args).map(|()| true),
        Command::Verify(args) => cmd_verify(&args),
        Command::LaneEmden(args) => cmd_lane_emden(&args).map(|()| true),
        Command::ScaleFactor(args) => cmd_scale_factor(&args).map(|()| true),
        Command::Sweep(args) => cmd_sweep(&args).map(|()| true),
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

/// Quote a CSV field if it contains a delimiter, quote, or newline.
fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc)
        .map_err(|e| Error::Numeric(format!("report serialization failed: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}

/// Sidecar path for CSV outputs; rejects outputs that would collide with it.
fn sidecar_path(output: &Path) -> Result<PathBuf> {
    if output.extension().is_some_and(|e| e == "json") {
        return Err(Error::Config(format!(
            "CSV output {} must not use the .json extension (it is reserved for the sidecar)",
            output.display()
        )));
    }
    Ok(output.with_extension("json"))
}

fn profile_csv(profile: &RadialProfile) -> String {
    let mut out = String::from("z,y,dy\n");
    for (z, y, dy) in profile.nodes() {
        out.push_str(&format!("{},{},{}\n", fmt_f(z), fmt_f(y), fmt_f(dy)));
    }
    out
}

#[derive(Serialize)]
struct ProfileTableRow {
    z: f64,
    y: f64,
    dy: f64,
}

fn profile_table(profile: &RadialProfile) -> Vec<ProfileTableRow> {
    profile.nodes().map(|(z, y, dy)| ProfileTableRow { z, y, dy }).collect()
}

#[derive(Serialize)]
struct ProfileSummary {
    family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<ModelParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coefficient_note: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    big_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    tol: f64,
    max_step: f64,
    zero_tol: f64,
    nodes: usize,
    z_end: f64,
    end_event: crate::ode::EndEvent,
    first_zero: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    blowup_time: Option<f64>,
}

#[derive(Serialize)]
struct ProfileDocument<'a> {
    #[serde(flatten)]
    summary: &'a ProfileSummary,
    table: Vec<ProfileTableRow>,
}

/// Write a profile either as CSV + JSON sidecar or as a single JSON doc.
fn emit_profile(
    args_format: FormatArg,
    output: &Path,
    profile: &RadialProfile,
    summary: &ProfileSummary,
) -> Result<()> {
    match args_format {
        FormatArg::Csv => {
            let sidecar = sidecar_path(output)?;
            write_text(output, &profile_csv(profile))?;
            write_json(&sidecar, summary)?;
            println!(
                "wrote {} ({} nodes) and sidecar {}",
                output.display(),
                profile.len(),
                sidecar.display()
            );
        }
        FormatArg::Json => {
            write_json(output, &ProfileDocument { summary, table: profile_table(profile) })?;
            println!("wrote {} ({} nodes)", output.display(), profile.len());
        }
    }
    Ok(())
}

fn cmd_profile(args: &ProfileArgs) -> Result<()> {
    let (profile, summary) = match args.family {
        FamilyArg::Blowup4d => {
            let sol = build_blowup_solution(&args.model.params(), args.tol)?;
            let summary = ProfileSummary {
                family: format!("{:?}", sol.family()).to_lowercase(),
                params: Some(*sol.params()),
                coefficient_note: Some(COEFFICIENT_NOTE),
                n: None,
                dim: None,
                big_k: None,
                lambda: None,
                tol: args.tol,
                max_step: defaults::MAX_STEP,
                zero_tol: args.zero_tol,
                nodes: sol.profile().len(),
                z_end: sol.profile().z_end(),
                end_event: sol.profile().end_event(),
                first_zero: first_zero(sol.profile(), args.zero_tol),
                blowup_time: sol.blowup_time(),
            };
            (sol.profile().clone(), summary)
        }
        FamilyArg::LaneEmden => {
            let problem = EmdenProblem::lane_emden(args.n, args.z_max);
            let profile = integrate_profile(&problem, args.tol, args.max_step)?;
            let summary = ProfileSummary {
                family: "lane-emden".into(),
                params: None,
                coefficient_note: None,
                n: Some(args.n),
                dim: None,
                big_k: None,
                lambda: None,
                tol: args.tol,
                max_step: args.max_step,
                zero_tol: args.zero_tol,
                nodes: profile.len(),
                z_end: profile.z_end(),
                end_event: profile.end_event(),
                first_zero: first_zero(&profile, args.zero_tol),
                blowup_time: None,
            };
            (profile, summary)
        }
        FamilyArg::Polytropic => {
            let problem = polytropic_problem(
                args.dim,
                args.big_k,
                args.lambda,
                args.model.alpha,
                args.z_max,
            )?;
            let profile = integrate_profile(&problem, args.tol, args.max_step)?;
            let summary = ProfileSummary {
                family: "polytropic".into(),
                params: None,
                coefficient_note: None,
                n: None,
                dim: Some(args.dim),
                big_k: Some(args.big_k),
                lambda: Some(args.lambda),
                tol: args.tol,
                max_step: args.max_step,
                zero_tol: args.zero_tol,
                nodes: profile.len(),
                z_end: profile.z_end(),
                end_event: profile.end_event(),
                first_zero: first_zero(&profile, args.zero_tol),
                blowup_time: None,
            };
            (profile, summary)
        }
        FamilyArg::Isothermal => {
            let problem =
                isothermal_problem(args.big_k, args.lambda, args.model.alpha, args.z_max)?;
            let profile = integrate_profile(&problem, args.tol, args.max_step)?;
            let summary = ProfileSummary {
                family: "isothermal".into(),
                params: None,
                coefficient_note: None,
                n: None,
                dim: Some(2),
                big_k: Some(args.big_k),
                lambda: Some(args.lambda),
                tol: args.tol,
                max_step: args.max_step,
                zero_tol: args.zero_tol,
                nodes: profile.len(),
                z_end: profile.z_end(),
                end_event: profile.end_event(),
                first_zero: first_zero(&profile, args.zero_tol),
                blowup_time: None,
            };
            (profile, summary)
        }
    };
    emit_profile(args.format, &args.output, &profile, &summary)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

/// Fixed thresholds of the verification suite; also echoed in the report
/// header so a report is self-describing.
#[derive(Serialize)]
struct Thresholds {
    continuity_max_rel: f64,
    q_identity_max_rel: f64,
    q_ode_max_rel: f64,
    momentum_max_rel: f64,
    momentum_factorization_max_rel: f64,
    momentum_order_min: f64,
    blowup_rate_max_rel: f64,
    hydrostatic_max_rel: f64,
    hydrostatic_order_min: f64,
}

const THRESHOLDS: Thresholds = Thresholds {
    continuity_max_rel: 1e-12,
    q_identity_max_rel: 1e-8,
    q_ode_max_rel: 1e-4,
    momentum_max_rel: 1e-6,
    momentum_factorization_max_rel: 1e-10,
    momentum_order_min: 3.9,
    blowup_rate_max_rel: 1e-12,
    hydrostatic_max_rel: 1e-6,
    hydrostatic_order_min: 3.9,
};

/// Panel count for the Q-identity scan; fixed rather than tied to
/// --quad-points because its threshold is calibrated at this resolution.
const Q_SCAN_PANELS: usize = 2048;

#[derive(Debug, Serialize)]
struct CheckRow {
    name: &'static str,
    /// Human-readable pass criterion, e.g. "max_rel <= 1e-12".
    criterion: String,
    /// The measured quantity the criterion applies to.
    value: f64,
    pass: bool,
    grid_spec: String,
    quad_points: usize,
    max_abs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    convergence_order: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    factorization_max_rel: Option<f64>,
}

impl CheckRow {
    fn upper(name: &'static str, report: &verify::ResidualReport, threshold: f64) -> Self {
        Self::upper_value(name, report, "max_rel", report.max_rel, threshold)
    }

    /// Upper-bound row against an explicitly named value from the report.
    fn upper_value(
        name: &'static str,
        report: &verify::ResidualReport,
        what: &str,
        value: f64,
        threshold: f64,
    ) -> Self {
        CheckRow {
            name,
            criterion: format!("{what} <= {threshold:e}"),
            value,
            pass: value <= threshold,
            grid_spec: report.grid_spec.clone(),
            quad_points: report.quad_points,
            max_abs: report.max_abs,
            convergence_order: report.convergence_order,
            factorization_max_rel: report.factorization_max_rel,
        }
    }

    fn lower(
        name: &'static str,
        report: &verify::ResidualReport,
        value: f64,
        threshold: f64,
        what: &str,
    ) -> Self {
        CheckRow {
            name,
            criterion: format!("{what} >= {threshold}"),
            value,
            pass: value >= threshold,
            grid_spec: report.grid_spec.clone(),
            quad_points: report.quad_points,
            max_abs: report.max_abs,
            convergence_order: report.convergence_order,
            factorization_max_rel: report.factorization_max_rel,
        }
    }
}

#[derive(Serialize)]
struct VerifyReport {
    tool: &'static str,
    coefficient_note: &'static str,
    mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<ModelParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    star: Option<StationaryStar>,
    quad_points: usize,
    tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inject_error: Option<String>,
    thresholds: Thresholds,
    checks: Vec<CheckRow>,
    pass: bool,
}

/// Multiplicative ±2% jitter; keeps every default grid inside its validity
/// window (the outermost default z sample sits at 31/32 of it).
fn jitter(values: &mut [f64], rng: &mut ChaCha8Rng) {
    for v in values.iter_mut() {
        *v *= 1.0 + rng.gen_range(-0.02..0.02);
    }
}

fn verify_family_checks(args: &VerifyArgs) -> Result<Vec<CheckRow>> {
    let params = args.model.params();
    let sol = build_blowup_solution(&params, args.tol)?;

    let mut scalings = verify::default_scalings(&params, 8);
    let mut z_samples = verify::default_z_samples(&sol);
    let mut rate_scalings = verify::default_scalings(&params, 7);
    if let Some(seed) = args.seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        jitter(&mut scalings, &mut rng);
        jitter(&mut z_samples, &mut rng);
        jitter(&mut rate_scalings, &mut rng);
    }
    let to_times =
        |ss: &[f64]| ss.iter().map(|s| (params.big_t - s) / params.big_c).collect::<Vec<_>>();
    let times = to_times(&scalings);
    let rate_times = to_times(&rate_scalings);

    let continuity = verify::continuity_residual(&sol, &times, &z_samples)?;
    let q_factor = match args.inject_error.as_deref() {
        None => 5.0,
        Some("coefficient=4Ckappa") => 4.0,
        Some(other) => {
            return Err(Error::Config(format!(
                "unknown --inject-error value {other:?}; supported: coefficient=4Ckappa"
            )))
        }
    };
    let q = verify::q_scan_with(sol.profile(), &params, &z_samples, Q_SCAN_PANELS, q_factor)?;
    let q_ode = verify::q_ode_check(sol.profile(), &params, &z_samples, args.quad_points)?;
    let momentum = verify::momentum_residual(&sol, &times, &z_samples, args.quad_points)?;
    let ladder =
        verify::momentum_convergence(&sol, &times, &z_samples, &defaults::RESOLUTIONS)?;
    let order = ladder.convergence_order.ok_or_else(|| {
        Error::Numeric("momentum convergence order could not be measured".into())
    })?;
    let rate = verify::blowup_rate_check(&sol, &rate_times)?;

    Ok(vec![
        CheckRow::upper("continuity", &continuity, THRESHOLDS.continuity_max_rel),
        CheckRow::upper("q_identity", &q, THRESHOLDS.q_identity_max_rel),
        CheckRow::upper("q_ode", &q_ode, THRESHOLDS.q_ode_max_rel),
        CheckRow::upper("momentum", &momentum, THRESHOLDS.momentum_max_rel),
        CheckRow::upper_value(
            "momentum_factorization",
            &momentum,
            "factorization_max_rel",
            momentum.factorization_max_rel.unwrap_or(f64::INFINITY),
            THRESHOLDS.momentum_factorization_max_rel,
        ),
        CheckRow::lower(
            "momentum_order",
            &ladder,
            order,
            THRESHOLDS.momentum_order_min,
            "convergence_order",
        ),
        CheckRow::upper("blowup_rate", &rate, THRESHOLDS.blowup_rate_max_rel),
    ])
}

fn verify_star_checks(args: &VerifyArgs) -> Result<(Vec<CheckRow>, StationaryStar)> {
    if args.inject_error.is_some() {
        return Err(Error::Config(
            "--inject-error only applies to the self-similar suite, not --stationary".into(),
        ));
    }
    let star = StationaryStar::new(args.big_k, args.big_a)?;
    let mut radii = verify::default_star_radii();
    if let Some(seed) = args.seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        jitter(&mut radii, &mut rng);
    }
    let balance = verify::hydrostatic_check(&star, &radii, args.quad_points)?;
    let ladder = verify::hydrostatic_convergence(&star, &radii, &defaults::RESOLUTIONS)?;
    let order = ladder.convergence_order.ok_or_else(|| {
        Error::Numeric("hydrostatic convergence order could not be measured".into())
    })?;
    Ok((
        vec![
            CheckRow::upper("hydrostatic", &balance, THRESHOLDS.hydrostatic_max_rel),
            CheckRow::lower(
                "hydrostatic_order",
                &ladder,
                order,
                THRESHOLDS.hydrostatic_order_min,
                "convergence_order",
            ),
        ],
        star,
    ))
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let (checks, mode, params, star) = if args.stationary {
        let (checks, star) = verify_star_checks(args)?;
        (checks, "stationary".to_string(), None, Some(star))
    } else {
        let params = args.model.params();
        (verify_family_checks(args)?, "self-similar".to_string(), Some(params), None)
    };
    let pass = checks.iter().all(|c| c.pass);
    let report = VerifyReport {
        tool: "blowup-lab",
        coefficient_note: COEFFICIENT_NOTE,
        mode,
        params,
        star,
        quad_points: args.quad_points,
        tol: args.tol,
        seed: args.seed,
        inject_error: args.inject_error.clone(),
        thresholds: THRESHOLDS,
        checks,
        pass,
    };
    // With -o the JSON goes to the file and the summary to stdout; without
    // it stdout *is* the report (machine-consumable), summary on stderr.
    let mut summary: Box<dyn Write> = match &args.output {
        Some(path) => {
            write_json(path, &report)?;
            Box::new(std::io::stdout())
        }
        None => {
            let doc = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Numeric(format!("report serialization failed: {e}")))?;
            println!("{doc}");
            Box::new(std::io::stderr())
        }
    };
    for check in &report.checks {
        writeln!(
            summary,
            "{} {:<24} {:<28} value = {:.3e}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.criterion,
            check.value
        )?;
    }
    let target = match &args.output {
        Some(path) => format!("report {}", path.display()),
        None => "report on stdout".to_string(),
    };
    writeln!(summary, "verdict: {} ({target})", if pass { "pass" } else { "FAIL" })?;
    Ok(pass)
}

// ---------------------------------------------------------------------------
// lane-emden
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct LaneEmdenSummary {
    n: f64,
    tol: f64,
    max_step: f64,
    zero_tol: f64,
    z_max: f64,
    nodes: usize,
    first_zero: Option<f64>,
    /// Closed-form first zero, for n in {0, 1, 5} (null inside that set
    /// means the closed form has no zero).
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic_zero: Option<Option<f64>>,
    /// Max |y_numeric - y_closed_form| over nodes, for n in {0, 1, 5}.
    #[serde(skip_serializing_if = "Option::is_none")]
    max_abs_error: Option<f64>,
}

#[derive(Serialize)]
struct LaneEmdenRow {
    z: f64,
    y: f64,
    dy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    y_exact: Option<f64>,
}

#[derive(Serialize)]
struct LaneEmdenDocument<'a> {
    #[serde(flatten)]
    summary: &'a LaneEmdenSummary,
    table: Vec<LaneEmdenRow>,
}

fn cmd_lane_emden(args: &LaneEmdenArgs) -> Result<()> {
    let problem = EmdenProblem::lane_emden(args.n, args.z_max);
    let profile = integrate_profile(&problem, args.tol, args.max_step)?;
    let analytic_n =
        (args.n.fract() == 0.0 && [0.0, 1.0, 5.0].contains(&args.n)).then_some(args.n as u32);

    let mut rows = Vec::with_capacity(profile.len());
    let mut max_err: Option<f64> = None;
    for (z, y, dy) in profile.nodes() {
        let y_exact = match analytic_n {
            // The n = 0 and n = 1 forms remain valid past their zeros; the
            // comparison tracks the numeric continuation there too.
            Some(n) => Some(lane_emden_analytic(n, z)?),
            None => None,
        };
        if let Some(exact) = y_exact {
            let err = (y - exact).abs();
            max_err = Some(max_err.unwrap_or(0.0).max(err));
        }
        rows.push(LaneEmdenRow { z, y, dy, y_exact });
    }
    let summary = LaneEmdenSummary {
        n: args.n,
        tol: args.tol,
        max_step: args.max_step,
        zero_tol: args.zero_tol,
        z_max: args.z_max,
        nodes: profile.len(),
        first_zero: first_zero(&profile, args.zero_tol),
        analytic_zero: match analytic_n {
            Some(n) => Some(lane_emden_analytic_zero(n)?),
            None => None,
        },
        max_abs_error: max_err,
    };

    match args.format {
        FormatArg::Csv => {
            let sidecar = sidecar_path(&args.output)?;
            let mut csv = if analytic_n.is_some() {
                String::from("z,y,dy,y_exact,abs_err\n")
            } else {
                String::from("z,y,dy\n")
            };
            for row in &rows {
                match row.y_exact {
                    Some(exact) => csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        fmt_f(row.z),
                        fmt_f(row.y),
                        fmt_f(row.dy),
                        fmt_f(exact),
                        fmt_f((row.y - exact).abs())
                    )),
                    None => csv.push_str(&format!(
                        "{},{},{}\n",
                        fmt_f(row.z),
                        fmt_f(row.y),
                        fmt_f(row.dy)
                    )),
                }
            }
            write_text(&args.output, &csv)?;
            write_json(&sidecar, &summary)?;
            println!(
                "wrote {} ({} nodes) and sidecar {}",
                args.output.display(),
                rows.len(),
                sidecar.display()
            );
        }
        FormatArg::Json => {
            write_json(&args.output, &LaneEmdenDocument { summary: &summary, table: rows })?;
            println!("wrote {}", args.output.display());
        }
    }
    if let Some(err) = max_err {
        println!("max |y - closed form| = {err:.3e}");
    }
    if let Some(z0) = profile.first_zero() {
        println!("first zero at z = {z0:.12}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// scale-factor
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ScaleFactorSummary {
    lambda: f64,
    dim: u32,
    a0: f64,
    a1: f64,
    t_max: f64,
    tol: f64,
    nodes: usize,
    t_end: f64,
    collapse: Option<(f64, f64)>,
    energy_drift: f64,
}

#[derive(Serialize)]
struct ScaleFactorRow {
    t: f64,
    a: f64,
    da: f64,
}

#[derive(Serialize)]
struct ScaleFactorDocument<'a> {
    #[serde(flatten)]
    summary: &'a ScaleFactorSummary,
    table: Vec<ScaleFactorRow>,
}

fn cmd_scale_factor(args: &ScaleFactorArgs) -> Result<()> {
    let state =
        integrate_scale_factor(args.lambda, args.dim, args.a0, args.a1, args.t_max, args.tol)?;
    let rows: Vec<ScaleFactorRow> = state
        .nodes()
        .map(|(t, a, da)| ScaleFactorRow { t, a, da })
        .collect();
    let summary = ScaleFactorSummary {
        lambda: args.lambda,
        dim: args.dim,
        a0: args.a0,
        a1: args.a1,
        t_max: args.t_max,
        tol: args.tol,
        nodes: rows.len(),
        t_end: state.t_end(),
        collapse: state.collapse(),
        energy_drift: state.energy_drift(),
    };
    match args.format {
        FormatArg::Csv => {
            let sidecar = sidecar_path(&args.output)?;
            let mut csv = String::from("t,a,da\n");
            for row in &rows {
                csv.push_str(&format!("{},{},{}\n", fmt_f(row.t), fmt_f(row.a), fmt_f(row.da)));
            }
            write_text(&args.output, &csv)?;
            write_json(&sidecar, &summary)?;
            println!(
                "wrote {} ({} nodes) and sidecar {}",
                args.output.display(),
                rows.len(),
                sidecar.display()
            );
        }
        FormatArg::Json => {
            write_json(&args.output, &ScaleFactorDocument { summary: &summary, table: rows })?;
            println!("wrote {}", args.output.display());
        }
    }
    match summary.collapse {
        Some((lo, hi)) => println!("collapse bracketed in [{lo:.9}, {hi:.9}]"),
        None => println!("no collapse before t = {:.6}", summary.t_end),
    }
    println!("energy drift = {:.3e}", summary.energy_drift);
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepJob {
    big_c: f64,
    kappa: f64,
    alpha: f64,
}

struct SweepRow {
    big_c: f64,
    kappa: f64,
    alpha: f64,
    status: String,
    family: String,
    blowup_time: Option<f64>,
    first_zero: Option<f64>,
    z_end: Option<f64>,
    continuity_max_rel: Option<f64>,
    q_max_rel: Option<f64>,
    momentum_max_rel: Option<f64>,
    /// Measured rate constant ρ(t,0)(T-Ct)⁴ at the deepest time sample
    /// (equals α⁴ for every member of the family).
    blowup_rate: Option<f64>,
    rate_max_rel: Option<f64>,
}

impl SweepRow {
    fn failed(job: &SweepJob, err: &Error) -> Self {
        SweepRow {
            big_c: job.big_c,
            kappa: job.kappa,
            alpha: job.alpha,
            status: format!("error: {err}"),
            family: String::new(),
            blowup_time: None,
            first_zero: None,
            z_end: None,
            continuity_max_rel: None,
            q_max_rel: None,
            momentum_max_rel: None,
            blowup_rate: None,
            rate_max_rel: None,
        }
    }

    fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt_f(self.big_c),
            fmt_f(self.kappa),
            fmt_f(self.alpha),
            csv_escape(&self.status),
            csv_escape(&self.family),
            fmt_opt(self.blowup_time),
            fmt_opt(self.first_zero),
            fmt_opt(self.z_end),
            fmt_opt(self.continuity_max_rel),
            fmt_opt(self.q_max_rel),
            fmt_opt(self.momentum_max_rel),
            fmt_opt(self.blowup_rate),
            fmt_opt(self.rate_max_rel),
        )
    }
}

fn sweep_row(job: &SweepJob, args: &SweepArgs) -> SweepRow {
    let run = || -> Result<SweepRow> {
        let mut params = ModelParams::theorem1(job.big_c, args.big_t, job.kappa, job.alpha);
        if args.repulsive {
            params.force_sign = ForceSign::Repulsive;
        }
        let sol = build_blowup_solution(&params, args.tol)?;
        let times = verify::default_time_samples(&params, 8);
        let zs = verify::default_z_samples(&sol);
        let continuity = verify::continuity_residual(&sol, &times, &zs)?;
        let q = verify::q_scan(sol.profile(), &params, &zs, args.quad_points)?;
        let momentum = verify::momentum_residual(&sol, &times, &zs, args.quad_points)?;
        let rate =
            verify::blowup_rate_check(&sol, &verify::default_time_samples(&params, 7))?;
        // Measured rate constant at the deepest sample; α⁴ up to roundoff.
        let t_deep = *times.last().expect("default grid is nonempty");
        let blowup_rate = sol.density(t_deep, 0.0)? * sol.scaling(t_deep)?.powi(4);
        Ok(SweepRow {
            big_c: job.big_c,
            kappa: job.kappa,
            alpha: job.alpha,
            status: "ok".into(),
            family: format!("{:?}", sol.family()).to_lowercase(),
            blowup_time: sol.blowup_time(),
            first_zero: sol.profile().first_zero(),
            z_end: Some(sol.profile().z_end()),
            continuity_max_rel: Some(continuity.max_rel),
            q_max_rel: Some(q.max_rel),
            momentum_max_rel: Some(momentum.max_rel),
            blowup_rate: Some(blowup_rate),
            rate_max_rel: Some(rate.max_rel),
        })
    };
    run().unwrap_or_else(|err| SweepRow::failed(job, &err))
}

/// Worker cap: BLOWUP_LAB_THREADS when set (must parse to ≥ 1), otherwise
/// the machine's available parallelism.
fn sweep_workers(jobs: usize) -> Result<usize> {
    let cap = match std::env::var(THREADS_ENV) {
        Ok(text) => match text.parse::<usize>() {
            Ok(n) if n >= 1 => n,
            _ => {
                return Err(Error::Config(format!(
                    "{THREADS_ENV} must be a positive integer, got {text:?}"
                )))
            }
        },
        Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    Ok(cap.min(jobs).max(1))
}

#[derive(Serialize)]
struct SweepSidecar<'a> {
    coefficient_note: &'static str,
    big_c: &'a [f64],
    kappa: &'a [f64],
    alpha: &'a [f64],
    big_t: f64,
    repulsive: bool,
    tol: f64,
    quad_points: usize,
    rows: usize,
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    if args.big_c.is_empty() || args.kappa.is_empty() || args.alpha.is_empty() {
        return Err(Error::Config("sweep needs at least one value per parameter list".into()));
    }
    let mut jobs = Vec::new();
    for &big_c in &args.big_c {
        for &kappa in &args.kappa {
            for &alpha in &args.alpha {
                jobs.push(SweepJob { big_c, kappa, alpha });
            }
        }
    }
    let workers = sweep_workers(jobs.len())?;

    let mut slots: Vec<Option<SweepRow>> = Vec::new();
    slots.resize_with(jobs.len(), || None);
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, SweepRow)>();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let jobs = &jobs;
            let next = &next;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                // A send can only fail if the receiver is gone, which
                // cannot happen while we hold the scope open.
                let _ = tx.send((i, sweep_row(&jobs[i], args)));
            });
        }
        drop(tx);
        for (i, row) in rx {
            slots[i] = Some(row);
        }
    });

    let mut csv = String::from(
        "C,kappa,alpha,status,family,blowup_time,first_zero,z_end,\
         continuity_max_rel,q_max_rel,momentum_max_rel,blowup_rate,rate_max_rel\n",
    );
    for slot in &slots {
        let row = slot.as_ref().expect("every job sends exactly one row");
        csv.push_str(&row.to_csv());
    }
    write_text(&args.output, &csv)?;
    let sidecar = sidecar_path(&args.output)?;
    write_json(
        &sidecar,
        &SweepSidecar {
            coefficient_note: COEFFICIENT_NOTE,
            big_c: &args.big_c,
            kappa: &args.kappa,
            alpha: &args.alpha,
            big_t: args.big_t,
            repulsive: args.repulsive,
            tol: args.tol,
            quad_points: args.quad_points,
            rows: jobs.len(),
        },
    )?;
    println!(
        "wrote {} ({} rows) and sidecar {}",
        args.output.display(),
        jobs.len(),
        sidecar.display()
    );
    Ok(())
}
