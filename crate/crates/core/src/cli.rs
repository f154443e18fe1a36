//! Command-line front end.
//!
//! Frequencies are given in Hz and times accept `ms`/`s` suffixes. Exit
//! codes: 0 success, 2 invalid parameters, 3 numerical failure, 64 usage
//! error, 65 unreadable configuration, 74 I/O failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dynamics::{
    simulate_bloch, simulate_lindblad, simulate_rotating, uniform_times, IntegrateError, IntegratorConfig,
};
use crate::io::csv::{write_sweep_csv, write_table_csv, CsvSchema, Table};
use crate::io::{
    builtin_manifest, default_out_dir, load_manifest, parse_time, ExperimentManifest, IoError, SweepKind,
    BUILTIN_MANIFESTS,
};
use crate::params::{hz_to_rad, rad_to_hz, ParamError, SystemParams};
use crate::pulse_sim::{
    carr_purcell, fit_t1, fit_t2, inversion_recovery, log_delays, long_pulse_response_with, measure_relaxation,
    IsochromatEnsemble, NoiseSpec, PulseError, RelaxationProtocol,
};
use crate::relaxation::{psd_check, relaxation_matrix, HERMITIAN_TOL};
use crate::sr_analysis::{
    linspace, logspace, optimal_omega1, sweep, sweep_numeric, AnalysisError, Control, ExtremumKind,
};
use crate::state::{bloch_components, bloch_to_density, BlochState, RotatingState};
use crate::steady_state::{steady_state_rotating, SteadyStateError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_CONFIG: i32 = 65;
pub const EXIT_IO: i32 = 74;

/// Largest number of Larmor cycles a lab-frame run may cover.
const MAX_LAB_CYCLES: f64 = 1e5;
/// Points in the time-domain cross-check of `reproduce --numeric`.
const NUMERIC_SUBGRID: usize = 20;
/// Allowed gap between numeric and closed-form η/s_eq in that cross-check.
const NUMERIC_AGREEMENT: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "bloch-sr",
    version,
    about = "Stochastic resonance in Bloch-equation two-level systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the closed-form rotating-frame steady state.
    Steady(SystemArgs),
    /// Sweep the common relaxation time at fixed drive and write a CSV.
    SweepT12(SweepT12Args),
    /// Sweep the drive amplitude at fixed relaxation times and write a CSV.
    SweepOmega1(SweepOmega1Args),
    /// Integrate the equations of motion and write the trajectory.
    Simulate(SimulateArgs),
    /// Simulate inversion recovery and fit T1.
    MeasureT1(MeasureT1Args),
    /// Simulate a Carr-Purcell echo train and fit T2.
    MeasureT2(MeasureT2Args),
    /// Drive continuously from equilibrium and record the transverse signal.
    LongPulse(LongPulseArgs),
    /// Regenerate a canned experiment (fig1, fig2, table1) or a manifest file.
    Reproduce(ReproduceArgs),
    /// Check parameters and relaxation-matrix positivity.
    Validate(ValidateArgs),
}

fn time_arg(s: &str) -> Result<f64, String> {
    parse_time(s)
}

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    /// Longitudinal relaxation time, e.g. 36.5ms.
    #[arg(long, value_parser = time_arg)]
    pub t1: Option<f64>,
    /// Transverse relaxation time.
    #[arg(long, value_parser = time_arg)]
    pub t2: Option<f64>,
    /// Common relaxation time (sets T1 = T2).
    #[arg(long, value_parser = time_arg, conflicts_with_all = ["t1", "t2"])]
    pub t12: Option<f64>,
    /// Drive amplitude ω₁/2π in Hz.
    #[arg(long, default_value_t = 0.0)]
    pub rabi_hz: f64,
    /// Equilibrium polarization s_eq.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub seq: f64,
    /// Larmor frequency ω₀/2π in Hz.
    #[arg(long, default_value_t = 400e6)]
    pub larmor_hz: f64,
    /// Detuning (ω₀ − Ω)/2π in Hz.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub detuning_hz: f64,
}

impl SystemArgs {
    fn times(&self) -> Result<(f64, f64), CliError> {
        match (self.t12, self.t1, self.t2) {
            (Some(t), _, _) => Ok((t, t)),
            (None, Some(t1), Some(t2)) => Ok((t1, t2)),
            (None, Some(t), None) | (None, None, Some(t)) => Ok((t, t)),
            (None, None, None) => Err(CliError::Usage("give --t12, or --t1 and --t2".into())),
        }
    }

    fn params(&self) -> Result<SystemParams, CliError> {
        let (t1, t2) = self.times()?;
        let p = SystemParams::resonant(hz_to_rad(self.larmor_hz), hz_to_rad(self.rabi_hz), t1, t2, self.seq)?;
        Ok(p.with_detuning(hz_to_rad(self.detuning_hz)).validate()?)
    }
}

#[derive(Debug, Args)]
pub struct SweepT12Args {
    #[arg(long)]
    pub rabi_hz: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub seq: f64,
    /// Constraint T1 = ratio·T2 (the swept value is T2).
    #[arg(long, default_value_t = 1.0)]
    pub ratio: f64,
    #[arg(long, value_parser = time_arg, default_value = "5ms")]
    pub min: f64,
    #[arg(long, value_parser = time_arg, default_value = "80ms")]
    pub max: f64,
    #[arg(long, default_value_t = 1501)]
    pub points: usize,
    /// Log-spaced grid.
    #[arg(long)]
    pub log: bool,
    /// Output CSV (default: sweep_t12.csv in $BLOCHSR_OUT_DIR or .).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepOmega1Args {
    #[arg(long, value_parser = time_arg)]
    pub t1: Option<f64>,
    #[arg(long, value_parser = time_arg)]
    pub t2: Option<f64>,
    #[arg(long, value_parser = time_arg, conflicts_with_all = ["t1", "t2"])]
    pub t12: Option<f64>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub seq: f64,
    #[arg(long, default_value_t = 0.1)]
    pub min_hz: f64,
    #[arg(long, default_value_t = 20.0)]
    pub max_hz: f64,
    #[arg(long, default_value_t = 1991)]
    pub points: usize,
    #[arg(long)]
    pub log: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Frame {
    /// RWA equations in the frame rotating with the drive.
    Rotating,
    /// Lab-frame Bloch equations (needs a scaled --larmor-hz).
    Lab,
    /// Master equation for the density matrix, reported as a Bloch vector.
    Lindblad,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, value_parser = time_arg, default_value = "200ms")]
    pub duration: f64,
    /// Number of output intervals.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = Frame::Rotating)]
    pub frame: Frame,
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    /// Output CSV; the table goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Additive Gaussian noise, in units of s_eq.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl NoiseArgs {
    fn spec(&self, s_eq: f64) -> Result<Option<NoiseSpec>, CliError> {
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(CliError::Validation(format!(
                "--noise must be non-negative, got {}",
                self.noise
            )));
        }
        Ok((self.noise > 0.0).then(|| NoiseSpec {
            seed: self.seed,
            sigma: self.noise * s_eq.abs(),
        }))
    }
}

#[derive(Debug, Args)]
pub struct MeasureT1Args {
    #[arg(long, value_parser = time_arg)]
    pub t1: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub seq: f64,
    /// Shortest inversion delay (default T1/50).
    #[arg(long, value_parser = time_arg)]
    pub min: Option<f64>,
    /// Longest inversion delay (default 5·T1).
    #[arg(long, value_parser = time_arg)]
    pub max: Option<f64>,
    #[arg(long, default_value_t = 16)]
    pub points: usize,
    #[command(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Debug, Args)]
pub struct MeasureT2Args {
    #[arg(long, value_parser = time_arg)]
    pub t2: f64,
    /// Defaults to T2.
    #[arg(long, value_parser = time_arg)]
    pub t1: Option<f64>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub seq: f64,
    /// Echo half-spacing τ (default T2/20).
    #[arg(long, value_parser = time_arg)]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub echoes: usize,
    /// Standard deviation of the static field inhomogeneity, in Hz.
    #[arg(long, default_value_t = 50.0)]
    pub linewidth_hz: f64,
    #[command(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Debug, Args)]
pub struct LongPulseArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, value_parser = time_arg, default_value = "200ms")]
    pub duration: f64,
    #[arg(long, value_parser = time_arg, default_value = "1ms")]
    pub stride: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// fig1, fig2, table1, or a path to a manifest file.
    pub target: String,
    /// Also run the time-domain cross-check on a 20-point subgrid.
    #[arg(long)]
    pub numeric: bool,
    /// Output directory (default $BLOCHSR_OUT_DIR or .).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Built-in manifest name or manifest path; omit to check the flags.
    pub target: Option<String>,
    #[command(flatten)]
    pub system: SystemArgs,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Numeric(String),
    Config(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Validation(m)
            | CliError::Numeric(m)
            | CliError::Config(m)
            | CliError::Io(m) => m,
        }
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Numeric(n) => n.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<SteadyStateError> for CliError {
    fn from(e: SteadyStateError) -> Self {
        match e {
            SteadyStateError::ZeroDrive | SteadyStateError::ZeroPolarization => CliError::Validation(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<IntegrateError> for CliError {
    fn from(e: IntegrateError) -> Self {
        match e {
            IntegrateError::InvalidConfig(_) | IntegrateError::InvalidSpan(_) => CliError::Validation(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<PulseError> for CliError {
    fn from(e: PulseError) -> Self {
        match e {
            PulseError::Integrate(i) => i.into(),
            PulseError::Fit(f) => CliError::Numeric(f.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::ConfigParse(_) => CliError::Config(e.to_string()),
            IoError::ValidationFailed { .. } => CliError::Validation(e.to_string()),
            IoError::IoFailure { .. } | IoError::MalformedCsv { .. } => CliError::Io(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    /// Positivity diagnostic for the textbook relaxation matrix; a warning,
    /// never an error.
    fn psd_warning(&mut self, p: &SystemParams) -> std::io::Result<bool> {
        match psd_check(&relaxation_matrix(p), HERMITIAN_TOL) {
            Ok(r) if !r.is_psd => {
                writeln!(
                    self.err,
                    "warning: relaxation matrix is not positive semidefinite at s_eq = {} (min eigenvalue {:.6e} 1/s)",
                    p.s_eq, r.min_eigenvalue
                )?;
                Ok(true)
            }
            Ok(_) => Ok(false),
            Err(e) => {
                writeln!(self.err, "warning: {e}")?;
                Ok(true)
            }
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let target: &mut dyn Write = if code == EXIT_OK { out } else { err };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let mut ctx = Ctx { out, err };
    match dispatch(cli.command, &mut ctx) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(ctx.err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, ctx: &mut Ctx) -> CliResult {
    match cmd {
        Command::Steady(a) => steady(&a, ctx),
        Command::SweepT12(a) => sweep_t12_cmd(&a, ctx),
        Command::SweepOmega1(a) => sweep_omega1_cmd(&a, ctx),
        Command::Simulate(a) => simulate(&a, ctx),
        Command::MeasureT1(a) => measure_t1(&a, ctx),
        Command::MeasureT2(a) => measure_t2(&a, ctx),
        Command::LongPulse(a) => long_pulse(&a, ctx),
        Command::Reproduce(a) => reproduce(&a, ctx),
        Command::Validate(a) => validate(&a, ctx),
    }
}

fn out_path(explicit: &Option<PathBuf>, default_name: &str) -> PathBuf {
    explicit.clone().unwrap_or_else(|| default_out_dir().join(default_name))
}

fn grid(lo: f64, hi: f64, n: usize, log: bool) -> Result<Vec<f64>, CliError> {
    if !(lo > 0.0 && hi > lo) || n < 3 {
        return Err(CliError::Validation(format!(
            "sweep needs 0 < min < max and at least 3 points (got [{lo}, {hi}], {n})"
        )));
    }
    Ok(if log { logspace(lo, hi, n) } else { linspace(lo, hi, n) })
}

fn steady(a: &SystemArgs, ctx: &mut Ctx) -> CliResult {
    let p = a.params()?;
    ctx.psd_warning(&p)?;
    let ss = steady_state_rotating(&p, p.detuning());
    let o = &mut ctx.out;
    writeln!(o, "eta = {:.5}", ss.eta)?;
    writeln!(o, "eta_exact = {:.16e}", ss.eta)?;
    if p.s_eq != 0.0 {
        writeln!(o, "eta_over_seq = {:.16e}", ss.eta / p.s_eq.abs())?;
    }
    writeln!(o, "u = {:.16e}", ss.u)?;
    writeln!(o, "v = {:.16e}", ss.v)?;
    writeln!(o, "w = {:.16e}", ss.w)?;
    writeln!(o, "chi_prime = {:.16e}", ss.chi_prime)?;
    writeln!(o, "chi_double_prime = {:.16e}", ss.chi_double_prime)?;
    writeln!(o, "optimal_rabi_hz = {:.16e}", rad_to_hz(optimal_omega1(p.t1, p.t2)))?;
    writeln!(o, "weak_drive = {}", p.is_weak_drive())?;
    Ok(())
}

fn report_peak(ctx: &mut Ctx, table: &Table, unit: &str, path: &Path) -> CliResult {
    let loc = table.metadata_value("extremum", "location").unwrap_or(f64::NAN);
    let val = table.metadata_value("extremum", "value").unwrap_or(f64::NAN);
    let kind = if table.metadata.first().is_some_and(|m| m.contains("kind=max")) {
        "peak"
    } else {
        "no interior peak; best grid point"
    };
    writeln!(
        ctx.out,
        "{kind}: {} = {loc:.9e} {unit}, eta/s_eq = {val:.12}",
        table.schema.header[0]
    )?;
    writeln!(ctx.out, "wrote {}", path.display())?;
    Ok(())
}

fn sweep_t12_cmd(a: &SweepT12Args, ctx: &mut Ctx) -> CliResult {
    let g = grid(a.min, a.max, a.points, a.log)?;
    let r = crate::sr_analysis::sweep_t12_ratio(hz_to_rad(a.rabi_hz), a.seq, a.ratio, &g)?;
    ctx.psd_warning(&r.base.with_times(a.ratio, 1.0))?;
    if !r.physical {
        writeln!(ctx.err, "warning: part of the grid violates T2 <= 2·T1")?;
    }
    let path = out_path(&a.out, "sweep_t12.csv");
    write_sweep_csv(&r, &path)?;
    report_peak(ctx, &Table::from_sweep(&r), "s", &path)
}

fn sweep_omega1_cmd(a: &SweepOmega1Args, ctx: &mut Ctx) -> CliResult {
    let times = SystemArgs {
        t1: a.t1,
        t2: a.t2,
        t12: a.t12,
        rabi_hz: 0.0,
        seq: a.seq,
        larmor_hz: 400e6,
        detuning_hz: 0.0,
    };
    let p = times.params()?;
    ctx.psd_warning(&p)?;
    let g = grid(hz_to_rad(a.min_hz), hz_to_rad(a.max_hz), a.points, a.log)?;
    let r = crate::sr_analysis::sweep_omega1(p.t1, p.t2, p.s_eq, &g)?;
    let path = out_path(&a.out, "sweep_omega1.csv");
    write_sweep_csv(&r, &path)?;
    report_peak(ctx, &Table::from_sweep(&r), "Hz", &path)
}

fn simulate(a: &SimulateArgs, ctx: &mut Ctx) -> CliResult {
    let p = a.system.params()?;
    ctx.psd_warning(&p)?;
    if !(a.duration > 0.0) || a.samples == 0 {
        return Err(CliError::Validation(
            "--duration must be positive and --samples at least 1".into(),
        ));
    }
    if a.frame != Frame::Rotating && a.system.larmor_hz * a.duration > MAX_LAB_CYCLES {
        return Err(CliError::Validation(format!(
            "{:.3e} Larmor cycles is too many for a lab-frame run; scale --larmor-hz down (limit {MAX_LAB_CYCLES:e})",
            a.system.larmor_hz * a.duration
        )));
    }
    let cfg = IntegratorConfig::adaptive(a.tolerance);
    let times = uniform_times(0.0, a.duration, a.samples);
    let span = (0.0, a.duration);
    let mut table;
    match a.frame {
        Frame::Rotating => {
            let tr = simulate_rotating(
                &p,
                p.detuning(),
                RotatingState::new(0.0, 0.0, p.s_eq),
                span,
                &times,
                &cfg,
            )?;
            table = Table::new(CsvSchema::columns(&["time_s", "u", "v", "w"]));
            for (t, m) in tr.iter() {
                table.push_row(vec![t, m.u, m.v, m.w]);
            }
        }
        Frame::Lab => {
            let tr = simulate_bloch(&p, BlochState::new(0.0, 0.0, p.s_eq), span, &times, &cfg)?;
            table = Table::new(CsvSchema::columns(&["time_s", "s1", "s2", "s3"]));
            for (t, s) in tr.iter() {
                table.push_row(vec![t, s.s1, s.s2, s.s3]);
            }
        }
        Frame::Lindblad => {
            let rho0 = bloch_to_density(&BlochState::new(0.0, 0.0, p.s_eq));
            let tr = simulate_lindblad(&p, rho0, span, &times, &cfg)?;
            table = Table::new(CsvSchema::columns(&["time_s", "s1", "s2", "s3", "trace_error"]));
            for (t, rho) in tr.iter() {
                let s = bloch_components(rho);
                table.push_row(vec![t, s.s1, s.s2, s.s3, (rho.trace().re - 1.0).abs()]);
            }
        }
    }
    match &a.out {
        Some(path) => {
            write_table_csv(&table, path)?;
            writeln!(ctx.out, "wrote {} ({} samples)", path.display(), table.rows.len())?;
        }
        None => ctx.out.write_all(table.render().as_bytes())?,
    }
    Ok(())
}

fn measure_t1(a: &MeasureT1Args, ctx: &mut Ctx) -> CliResult {
    let p = SystemParams::resonant(0.0, 0.0, a.t1, a.t1, a.seq)?;
    ctx.psd_warning(&p)?;
    let lo = a.min.unwrap_or(a.t1 / 50.0);
    let hi = a.max.unwrap_or(5.0 * a.t1);
    if !(lo > 0.0 && hi > lo) {
        return Err(CliError::Validation(format!(
            "need 0 < --min < --max, got [{lo}, {hi}]"
        )));
    }
    let mut rec = inversion_recovery(&p, &log_delays(lo, hi, a.points))?;
    if let Some(n) = a.noise.spec(a.seq)? {
        rec = rec.with_noise(n.seed, n.sigma);
    }
    let fit = fit_t1(&rec).map_err(PulseError::from)?;
    writeln!(ctx.out, "t1_hat_ms = {:.6}", fit.t1_hat * 1e3)?;
    writeln!(ctx.out, "m0_hat = {:.9}", fit.m0_hat)?;
    writeln!(ctx.out, "residual_norm = {:.3e}", fit.residual_norm)?;
    Ok(())
}

fn measure_t2(a: &MeasureT2Args, ctx: &mut Ctx) -> CliResult {
    let t1 = a.t1.unwrap_or(a.t2);
    let p = SystemParams::resonant(0.0, 0.0, t1, a.t2, a.seq)?;
    ctx.psd_warning(&p)?;
    let ens = IsochromatEnsemble::gaussian(hz_to_rad(a.linewidth_hz.abs()), crate::pulse_sim::DEFAULT_ISOCHROMATS);
    let mut rec = carr_purcell(&p, &ens, a.tau.unwrap_or(a.t2 / 20.0), a.echoes)?;
    if let Some(n) = a.noise.spec(a.seq)? {
        rec = rec.with_noise(n.seed, n.sigma);
    }
    let fit = fit_t2(&rec).map_err(PulseError::from)?;
    writeln!(ctx.out, "t2_hat_ms = {:.6}", fit.t2_hat * 1e3)?;
    writeln!(ctx.out, "amplitude_hat = {:.9}", fit.amplitude_hat)?;
    writeln!(ctx.out, "residual_norm = {:.3e}", fit.residual_norm)?;
    Ok(())
}

fn long_pulse(a: &LongPulseArgs, ctx: &mut Ctx) -> CliResult {
    let p = a.system.params()?;
    ctx.psd_warning(&p)?;
    let rec = long_pulse_response_with(&p, a.duration, a.stride, &IntegratorConfig::adaptive(1e-11))?;
    let analytic = steady_state_rotating(&p, p.detuning()).eta;
    let last = *rec.values.last().unwrap_or(&f64::NAN);
    writeln!(ctx.out, "final_amplitude = {last:.12e}")?;
    writeln!(ctx.out, "steady_state_eta = {analytic:.12e}")?;
    writeln!(ctx.out, "difference = {:.3e}", (last - analytic).abs())?;
    if let Some(path) = &a.out {
        let mut table = Table::new(CsvSchema::columns(&["time_s", "transverse"]));
        for (t, v) in rec.times.iter().zip(&rec.values) {
            table.push_row(vec![*t, *v]);
        }
        write_table_csv(&table, path)?;
        writeln!(ctx.out, "wrote {}", path.display())?;
    }
    Ok(())
}

fn manifests_for(target: &str) -> Result<Vec<ExperimentManifest>, CliError> {
    if let Some(m) = builtin_manifest(target) {
        return Ok(vec![m]);
    }
    let path = Path::new(target);
    if !path.exists() {
        let names: Vec<&str> = BUILTIN_MANIFESTS.iter().map(|(n, _)| *n).collect();
        return Err(CliError::Usage(format!(
            "`{target}` is neither a built-in experiment ({}) nor a manifest file",
            names.join(", ")
        )));
    }
    Ok(load_manifest(path)?)
}

fn reproduce(a: &ReproduceArgs, ctx: &mut Ctx) -> CliResult {
    let dir = a.out_dir.clone().unwrap_or_else(default_out_dir);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    for m in manifests_for(&a.target)? {
        if m.sweep.is_some() {
            reproduce_sweep(&m, a.numeric || m.numeric, &dir, ctx)?;
        } else {
            reproduce_table(&m, &dir, ctx)?;
        }
    }
    Ok(())
}

fn reproduce_sweep(m: &ExperimentManifest, numeric: bool, dir: &Path, ctx: &mut Ctx) -> CliResult {
    let spec = m.sweep.expect("sweep manifest");
    let grid = spec.grid();
    let control = match spec.kind {
        SweepKind::T12 => Control::T12 { ratio: 1.0 },
        SweepKind::Omega1 => Control::Omega1,
    };
    for (i, p) in m.params.iter().enumerate() {
        ctx.psd_warning(p)?;
        let r = sweep(control, p, &grid)?;
        let path = dir.join(m.file_name(i, ""));
        write_sweep_csv(&r, &path)?;
        let unit = if control.is_frequency() { "Hz" } else { "s" };
        report_peak(ctx, &Table::from_sweep(&r), unit, &path)?;
        if r.extremum.kind != ExtremumKind::Max {
            writeln!(ctx.err, "warning: {} has no interior maximum on the grid", m.labels[i])?;
        }
        if numeric {
            let step = (grid.len() - 1) as f64 / (NUMERIC_SUBGRID - 1) as f64;
            let sub: Vec<f64> = (0..NUMERIC_SUBGRID)
                .map(|k| grid[(k as f64 * step).round() as usize])
                .collect();
            let num = sweep_numeric(control, p, &sub, &m.integrator)?;
            let closed = sweep(control, p, &sub)?;
            let worst = num
                .normalized()
                .iter()
                .zip(closed.normalized())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let path = dir.join(m.file_name(i, "_numeric"));
            write_sweep_csv(&num, &path)?;
            writeln!(
                ctx.out,
                "numeric cross-check: max |diff| = {worst:.3e} over {NUMERIC_SUBGRID} points"
            )?;
            writeln!(ctx.out, "wrote {}", path.display())?;
            if !(worst < NUMERIC_AGREEMENT) {
                return Err(CliError::Numeric(format!(
                    "time-domain response deviates from the closed form by {worst:.3e} (limit {NUMERIC_AGREEMENT:e})"
                )));
            }
        }
    }
    Ok(())
}

fn reproduce_table(m: &ExperimentManifest, dir: &Path, ctx: &mut Ctx) -> CliResult {
    let protocol = RelaxationProtocol::default();
    let mut table = Table::new(CsvSchema::columns(&[
        "concentration_mm",
        "t1_s",
        "t2_s",
        "t1_fit_s",
        "t2_fit_s",
        "t1_fit_noisy_s",
        "t2_fit_noisy_s",
        "eta_over_seq",
    ]));
    for (i, p) in m.params.iter().enumerate() {
        ctx.psd_warning(p)?;
        let clean = measure_relaxation(p, &protocol, None)?;
        let noisy = if m.noise_sigma > 0.0 {
            let seed = m.seed.unwrap_or(0).wrapping_add(2 * i as u64);
            Some(measure_relaxation(
                p,
                &protocol,
                Some(NoiseSpec {
                    seed,
                    sigma: m.noise_sigma * p.s_eq.abs(),
                }),
            )?)
        } else {
            None
        };
        let conc = m.concentrations_mm.as_ref().map_or(f64::NAN, |c| c[i]);
        let eta = if p.s_eq != 0.0 {
            steady_state_rotating(p, 0.0).eta / p.s_eq.abs()
        } else {
            0.0
        };
        let (n1, n2) = noisy.map_or((f64::NAN, f64::NAN), |n| (n.t1.t1_hat, n.t2.t2_hat));
        table.push_row(vec![conc, p.t1, p.t2, clean.t1.t1_hat, clean.t2.t2_hat, n1, n2, eta]);
        writeln!(
            ctx.out,
            "{conc} mM: T1 {:.3} ms -> fit {:.3} ms (noisy {:.3}), T2 {:.3} ms -> fit {:.3} ms (noisy {:.3}), eta/s_eq = {eta:.6}",
            p.t1 * 1e3,
            clean.t1.t1_hat * 1e3,
            n1 * 1e3,
            p.t2 * 1e3,
            clean.t2.t2_hat * 1e3,
            n2 * 1e3
        )?;
    }
    let path = dir.join(format!("{}.csv", m.output));
    write_table_csv(&table, &path)?;
    writeln!(ctx.out, "wrote {}", path.display())?;
    Ok(())
}

fn validate(a: &ValidateArgs, ctx: &mut Ctx) -> CliResult {
    let Some(target) = &a.target else {
        let p = a.system.params()?;
        let warned = ctx.psd_warning(&p)?;
        writeln!(
            ctx.out,
            "ok: parameters valid (weak_drive = {}, relaxation matrix {})",
            p.is_weak_drive(),
            if warned {
                "NOT positive semidefinite"
            } else {
                "positive semidefinite"
            }
        )?;
        return Ok(());
    };
    for m in manifests_for(target)? {
        let mut warnings = 0;
        for p in &m.params {
            warnings += ctx.psd_warning(p)? as usize;
            if !p.is_weak_drive() && p.omega1 > 0.0 {
                writeln!(
                    ctx.err,
                    "warning: {}: drive is not weak relative to the Larmor frequency",
                    m.id
                )?;
                warnings += 1;
            }
        }
        writeln!(
            ctx.out,
            "ok: {} ({} parameter sets, {warnings} warnings)",
            m.id,
            m.params.len()
        )?;
    }
    Ok(())
}
