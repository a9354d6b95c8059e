//! Command-line front end: reads measure spec files, runs one convolution or
//! power, and writes a density grid and a JSON report.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dwolff::SolverConfig;
use crate::error::{Error, Result};
use crate::freeconv::{self, AtomEntry};
use crate::measure::{Domain, Measure};
use crate::otherconv;
use crate::recovery::{self, DensityGrid, GridSpec, MassAccount, RecoverOptions, Schedule};
use crate::semigroup;
use crate::transforms::{self, continuous_log, DomainTag, TransformHandle};

/// Residuals above this are flagged in the report.
pub const RESIDUAL_FLAG: f64 = 1e-8;
/// Residuals above this make the run fail with exit status 3.
pub const RESIDUAL_FAIL: f64 = 1e-6;
pub const SCHEMA: u32 = 1;

const MAX_PROBES: usize = 64;

#[derive(Debug, Parser)]
#[command(name = "freeconv", version, about = "Free, boolean and monotone convolutions of probability measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Free additive convolution of two measures on the line.
    AddFree(BinaryArgs),
    /// Free multiplicative convolution of two half-line or two circle measures.
    MultFree(BinaryArgs),
    /// Boolean additive convolution.
    AddBoolean(BinaryArgs),
    /// Boolean multiplicative convolution on the circle.
    MultBoolean(BinaryArgs),
    /// Monotone additive convolution.
    AddMonotone(BinaryArgs),
    /// Monotone multiplicative convolution on the half-line.
    MultMonotone(BinaryArgs),
    /// Free additive convolution power `mu^{⊞t}`.
    PowerAdd(UnaryArgs),
    /// Free multiplicative convolution power `mu^{⊠t}` (half-line or circle).
    PowerMult(UnaryArgs),
    /// Boolean-to-free map `Psi_t` (line or circle).
    PsiMap(UnaryArgs),
}

#[derive(Debug, Args)]
pub struct BinaryArgs {
    /// Measure spec files.
    #[arg(num_args = 2, required = true, value_names = ["MU", "NU"])]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct UnaryArgs {
    /// Measure spec file.
    pub input: PathBuf,
    /// Exponent.
    #[arg(long, allow_negative_numbers = true)]
    pub t: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Line grid: N equally spaced points on [LO, HI].
    #[arg(long, num_args = 3, value_names = ["LO", "HI", "N"], allow_negative_numbers = true, conflicts_with = "circle")]
    pub grid: Option<Vec<f64>>,
    /// Circle grid: N equally spaced angles on [0, 2pi).
    #[arg(long, value_name = "N")]
    pub circle: Option<usize>,
    /// Fixed-point solver tolerance.
    #[arg(long, value_name = "X")]
    pub tol: Option<f64>,
    /// First height of the boundary-limit schedule.
    #[arg(long, value_name = "Y")]
    pub seed_height: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (standard output if omitted).
    #[arg(short = 'o', value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    AddFree,
    MultFree,
    AddBoolean,
    MultBoolean,
    AddMonotone,
    MultMonotone,
    PowerAdd,
    PowerMult,
    PsiMap,
}

impl Operation {
    pub fn arity(self) -> usize {
        match self {
            Operation::PowerAdd | Operation::PowerMult | Operation::PsiMap => 1,
            _ => 2,
        }
    }

    pub fn takes_exponent(self) -> bool {
        self.arity() == 1
    }
}

/// One CLI invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub operation: Operation,
    pub inputs: Vec<PathBuf>,
    pub t: Option<f64>,
    pub grid: Option<GridSpec>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub tol: Option<f64>,
    pub seed_height: Option<f64>,
}

impl Job {
    pub fn from_cli(cli: Cli) -> Result<Job> {
        let (operation, inputs, t, common) = match cli.command {
            Command::AddFree(a) => (Operation::AddFree, a.inputs, None, a.common),
            Command::MultFree(a) => (Operation::MultFree, a.inputs, None, a.common),
            Command::AddBoolean(a) => (Operation::AddBoolean, a.inputs, None, a.common),
            Command::MultBoolean(a) => (Operation::MultBoolean, a.inputs, None, a.common),
            Command::AddMonotone(a) => (Operation::AddMonotone, a.inputs, None, a.common),
            Command::MultMonotone(a) => (Operation::MultMonotone, a.inputs, None, a.common),
            Command::PowerAdd(a) => (Operation::PowerAdd, vec![a.input], Some(a.t), a.common),
            Command::PowerMult(a) => (Operation::PowerMult, vec![a.input], Some(a.t), a.common),
            Command::PsiMap(a) => (Operation::PsiMap, vec![a.input], Some(a.t), a.common),
        };
        let grid = match (&common.grid, common.circle) {
            (Some(g), _) => {
                let n = g[2];
                if !(n >= 2.0 && n.fract() == 0.0 && n <= 1e8) {
                    return Err(Error::BadParameters(format!("grid point count {n} is not an integer >= 2")));
                }
                Some(GridSpec::Line { lo: g[0], hi: g[1], n: n as usize })
            }
            (None, Some(n)) => Some(GridSpec::Circle { n }),
            (None, None) => None,
        };
        let job = Job {
            operation,
            inputs,
            t,
            grid,
            output: common.output,
            format: common.format,
            tol: common.tol,
            seed_height: common.seed_height,
        };
        job.validate()?;
        Ok(job)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.len() != self.operation.arity() {
            return Err(Error::BadParameters(format!(
                "{:?} takes {} measure(s), got {}",
                self.operation,
                self.operation.arity(),
                self.inputs.len()
            )));
        }
        if self.t.is_some() != self.operation.takes_exponent() {
            return Err(Error::BadParameters("--t is only valid for power-add, power-mult and psi-map".into()));
        }
        if let Some(g) = &self.grid {
            g.validate()?;
        }
        self.solver_config().validate()?;
        self.options().schedule.validate()
    }

    fn solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some(tol) = self.tol {
            cfg.tolerance = tol;
        }
        cfg
    }

    fn options(&self) -> RecoverOptions {
        let mut opts = RecoverOptions::default();
        if let Some(y) = self.seed_height {
            opts.schedule = Schedule::with_y0(y);
            opts.atom_schedule.y0 = opts.atom_schedule.y0.min(y);
        }
        opts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualDiagnostics {
    /// Largest `residual / max(1, |z|)` over the probe points.
    pub max_residual: f64,
    pub probe_count: usize,
    pub probe_height: f64,
    /// What the residual measures: "subordination", "inversion" or "none".
    pub kind: &'static str,
    /// `max_residual > 1e-8`.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub operation: Operation,
    pub inputs: Vec<String>,
    pub t: Option<f64>,
    pub grid: GridSpec,
    pub atoms: Vec<AtomEntry>,
    pub mass_account: MassAccount,
    pub residual_diagnostics: ResidualDiagnostics,
    pub branch_note: Option<String>,
}

#[derive(Serialize)]
struct JsonOutput<'a> {
    #[serde(flatten)]
    report: &'a Report,
    x: &'a [f64],
    density: &'a [f64],
}

/// Result of a successful computation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub grid: DensityGrid,
}

impl Outcome {
    /// Columns `x,density`, 17 significant digits.
    pub fn csv(&self) -> String {
        let mut s = String::from("x,density\n");
        for (x, d) in self.grid.abscissae.iter().zip(&self.grid.densities) {
            let _ = writeln!(s, "{x:.16e},{d:.16e}");
        }
        s
    }

    pub fn report_json(&self) -> String {
        serde_json::to_string_pretty(&self.report).expect("report serializes")
    }

    pub fn full_json(&self) -> String {
        let out = JsonOutput { report: &self.report, x: &self.grid.abscissae, density: &self.grid.densities };
        serde_json::to_string_pretty(&out).expect("report serializes")
    }

    pub fn failed_residual(&self) -> bool {
        !(self.report.residual_diagnostics.max_residual <= RESIDUAL_FAIL)
    }
}

type Probe = Box<dyn Fn(C64) -> Result<f64> + Send + Sync>;

struct Computed {
    handle: TransformHandle,
    rule_atoms: Option<Vec<AtomEntry>>,
    probe: Option<(Probe, &'static str)>,
    branch_note: Option<String>,
}

fn load(path: &Path) -> Result<Measure> {
    Measure::from_spec_file(path)
}

fn on_line(mu: &Measure, what: &str) -> Result<Measure> {
    mu.as_real().map_err(|_| Error::DomainMismatch(format!("{what} needs measures on the line, got a circle measure")))
}

fn additive_inversion_probe(f: TransformHandle, psi: TransformHandle, t: f64) -> Probe {
    Box::new(move |z| {
        let o = psi.eval(z)?;
        Ok((o * t + (1.0 - t) * f.eval(o)? - z).norm())
    })
}

fn circle_psi_probe(mu: Measure, psi: TransformHandle, t: f64) -> Probe {
    let log0 = mu.first_moment().ln();
    Box::new(move |z| {
        let o = psi.eval(z)?;
        let l = continuous_log(|w| Ok(transforms::eta_over_z(&mu, w)), C64::new(0.0, 0.0), o, log0)?;
        Ok((o - z * (l * (t - 1.0)).exp()).norm())
    })
}

fn compute(job: &Job, measures: &[Measure]) -> Result<Computed> {
    let cfg = job.solver_config();
    let op = job.operation;
    let name = format!("{op:?}");
    let computed = match op {
        Operation::AddFree => {
            let (mu, nu) = (on_line(&measures[0], &name)?, on_line(&measures[1], &name)?);
            let pair = freeconv::free_add_with(&mu, &nu, cfg)?;
            Computed {
                handle: pair.convolved.clone(),
                rule_atoms: Some(freeconv::atoms_free_add(&mu, &nu).entries),
                probe: Some((Box::new(move |z| pair.residual(z)), "subordination")),
                branch_note: None,
            }
        }
        Operation::MultFree => {
            let (mu, nu) = (&measures[0], &measures[1]);
            if mu.domain() != nu.domain() || mu.domain() == Domain::Real {
                return Err(Error::DomainMismatch("mult-free needs two half-line or two circle measures".into()));
            }
            let pair = if mu.domain() == Domain::Circle {
                freeconv::free_mult_circle_with(mu, nu, cfg)?
            } else {
                freeconv::free_mult_halfline_with(mu, nu, cfg)?
            };
            Computed {
                handle: pair.convolved.clone(),
                rule_atoms: Some(freeconv::atoms_free_mult(mu, nu)?.entries),
                probe: Some((Box::new(move |z| pair.residual(z)), "subordination")),
                branch_note: None,
            }
        }
        Operation::AddBoolean => Computed {
            handle: otherconv::boolean_add(&on_line(&measures[0], &name)?, &on_line(&measures[1], &name)?)?,
            rule_atoms: None,
            probe: None,
            branch_note: None,
        },
        Operation::MultBoolean => Computed {
            handle: otherconv::boolean_mult_circle(&measures[0], &measures[1])?,
            rule_atoms: None,
            probe: None,
            branch_note: None,
        },
        Operation::AddMonotone => Computed {
            handle: otherconv::monotone_add(&on_line(&measures[0], &name)?, &on_line(&measures[1], &name)?)?,
            rule_atoms: None,
            probe: None,
            branch_note: None,
        },
        Operation::MultMonotone => Computed {
            handle: otherconv::monotone_mult_halfline(&measures[0], &measures[1])?,
            rule_atoms: None,
            probe: None,
            branch_note: None,
        },
        Operation::PowerAdd => {
            let t = job.t.unwrap_or(f64::NAN);
            let mu = on_line(&measures[0], &name)?;
            let p = semigroup::free_add_power_with(&mu, t, cfg)?;
            Computed {
                handle: p.transformed.clone(),
                rule_atoms: Some(semigroup::atoms_add_power(&mu, t)?.entries),
                branch_note: p.branch_note.clone(),
                probe: Some((Box::new(move |z| p.residual(z)), "inversion")),
            }
        }
        Operation::PowerMult => {
            let t = job.t.unwrap_or(f64::NAN);
            let mu = &measures[0];
            let (p, atoms) = match mu.domain() {
                Domain::Circle => (
                    semigroup::free_mult_power_circle_with(mu, t, cfg)?,
                    semigroup::atoms_mult_power_circle(mu, t)?,
                ),
                Domain::Halfline => (
                    semigroup::free_mult_power_halfline_with(mu, t, cfg)?,
                    semigroup::atoms_mult_power_halfline(mu, t)?,
                ),
                Domain::Real => {
                    return Err(Error::DomainMismatch("power-mult needs a half-line or circle measure".into()))
                }
            };
            Computed {
                handle: p.transformed.clone(),
                rule_atoms: Some(atoms.entries),
                branch_note: p.branch_note.clone(),
                probe: Some((Box::new(move |z| p.residual(z)), "inversion")),
            }
        }
        Operation::PsiMap => {
            let t = job.t.unwrap_or(f64::NAN);
            let mu = &measures[0];
            if mu.domain() == Domain::Circle {
                let h = semigroup::boolean_to_free_mult_circle_with(mu, t, cfg)?;
                let probe = if h.provenance().contains("Haar") {
                    None
                } else {
                    Some((circle_psi_probe(mu.clone(), h.clone(), t), "inversion"))
                };
                Computed { handle: h, rule_atoms: None, probe, branch_note: None }
            } else {
                let mu = on_line(mu, &name)?;
                let f = transforms::f_handle(&mu)?;
                let h = semigroup::boolean_to_free_add_handle(&f, t, cfg)?;
                Computed {
                    handle: h.clone(),
                    rule_atoms: None,
                    probe: Some((additive_inversion_probe(f, h, t), "inversion")),
                    branch_note: None,
                }
            }
        }
    };
    Ok(computed)
}

/// Probe point in the domain of the result's transform for abscissa `x`.
fn probe_point(tag: DomainTag, x: f64, y: f64) -> C64 {
    match tag {
        DomainTag::UnitDisk => C64::from_polar(1.0 - y, -x),
        DomainTag::SlitPlane => C64::new(x, y).inv(),
        _ => C64::new(x, y),
    }
}

/// Runs a job without touching the file system except to read the inputs.
pub fn run(job: &Job) -> Result<Outcome> {
    job.validate()?;
    let measures = job.inputs.iter().map(|p| load(p)).collect::<Result<Vec<_>>>()?;
    run_measures(job, &measures)
}

/// As [`run`], with the input measures already in memory. `job.inputs` only
/// labels them in the report.
pub fn run_measures(job: &Job, measures: &[Measure]) -> Result<Outcome> {
    job.validate()?;
    let computed = compute(job, measures)?;
    let tag = computed.handle.domain();
    let circle_result = tag == DomainTag::UnitDisk;
    let grid = match job.grid {
        Some(g) => g,
        None if circle_result => return Err(Error::BadParameters("missing --circle N".into())),
        None => return Err(Error::BadParameters("missing --grid LO HI N".into())),
    };
    if circle_result != matches!(grid, GridSpec::Circle { .. }) {
        let want = if circle_result { "--circle" } else { "--grid" };
        return Err(Error::DomainMismatch(format!("the result lives on {tag:?}; use {want}")));
    }
    let opts = job.options();
    let heights = opts.schedule.heights();
    let probe_height = heights[heights.len() - 1];
    let candidates = match computed.rule_atoms {
        Some(a) => a,
        None => recovery::detect_atoms(&computed.handle, &grid, probe_height)?,
    };
    let density = recovery::recover_grid(&computed.handle, &grid, &candidates, &opts)?;

    let xs = &density.abscissae;
    let n = xs.len();
    let count = n.min(MAX_PROBES);
    let near_atom = |x: f64| {
        density.atoms.entries.iter().any(|a| {
            let d = (x - a.location).abs();
            let d = if circle_result { d.min(TAU - d) } else { d };
            d < opts.mask_radius
        })
    };
    let mut max_residual: f64 = 0.0;
    let mut probes = 0;
    let kind = match &computed.probe {
        Some((probe, kind)) => {
            for k in 0..count {
                let x = xs[if count == 1 { 0 } else { k * (n - 1) / (count - 1) }];
                if near_atom(x) || (tag == DomainTag::SlitPlane && x == 0.0) {
                    continue;
                }
                let z = probe_point(tag, x, probe_height);
                let r = probe(z)? / z.norm().max(1.0);
                max_residual = if r.is_nan() { f64::NAN } else { max_residual.max(r) };
                probes += 1;
            }
            *kind
        }
        None => "none",
    };
    let report = Report {
        schema: SCHEMA,
        operation: job.operation,
        inputs: job.inputs.iter().map(|p| p.display().to_string()).collect(),
        t: job.t,
        grid,
        atoms: density.atoms.entries.clone(),
        mass_account: density.mass_account,
        residual_diagnostics: ResidualDiagnostics {
            max_residual,
            probe_count: probes,
            probe_height,
            kind,
            flagged: !(max_residual <= RESIDUAL_FLAG),
        },
        branch_note: computed.branch_note,
    };
    Ok(Outcome { report, grid: density })
}

/// Path of the JSON report written next to a CSV output.
pub fn report_path(csv: &Path) -> PathBuf {
    if csv.extension().is_some_and(|e| e == "json") {
        csv.with_extension("report.json")
    } else {
        csv.with_extension("json")
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes the artifacts of a finished run.
pub fn emit(job: &Job, outcome: &Outcome) -> Result<()> {
    match (job.format, &job.output) {
        (Format::Csv, Some(path)) => {
            write_file(path, &outcome.csv())?;
            write_file(&report_path(path), &(outcome.report_json() + "\n"))
        }
        (Format::Csv, None) => {
            print!("{}", outcome.csv());
            eprintln!("{}", outcome.report_json());
            Ok(())
        }
        (Format::Json, Some(path)) => write_file(path, &(outcome.full_json() + "\n")),
        (Format::Json, None) => {
            println!("{}", outcome.full_json());
            Ok(())
        }
    }
}

/// Exit status for an error: 2 for invalid input, 3 for solver failures.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        2
    } else {
        3
    }
}

/// Entry point shared by the binary: parses `args`, runs, writes outputs and
/// returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let job = match Job::from_cli(cli) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let outcome = match run(&job) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if let Err(e) = emit(&job, &outcome) {
        eprintln!("error: {e}");
        return exit_code(&e);
    }
    let diag = &outcome.report.residual_diagnostics;
    if outcome.failed_residual() {
        eprintln!("error: subordination residual {:e} exceeds {RESIDUAL_FAIL:e}", diag.max_residual);
        return 3;
    }
    if diag.flagged {
        eprintln!("warning: residual {:e} exceeds {RESIDUAL_FLAG:e}", diag.max_residual);
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn spec(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
        let p = dir.path().join(name);
        std::fs::File::create(&p).unwrap().write_all(text.as_bytes()).unwrap();
        p
    }

    fn parse(args: &[&str]) -> std::result::Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("freeconv").chain(args.iter().copied()))
    }

    const BERNOULLI: &str = r#"{"domain":"real","atoms":[{"pos":0,"mass":0.5},{"pos":2,"mass":0.5}]}"#;

    #[test]
    fn parses_flags() {
        let cli = parse(&["add-free", "a.json", "b.json", "--grid", "-1", "4", "11", "--tol", "1e-12", "-o", "x.csv"]).unwrap();
        let job = Job::from_cli(cli).unwrap();
        assert_eq!(job.operation, Operation::AddFree);
        assert_eq!(job.grid, Some(GridSpec::Line { lo: -1.0, hi: 4.0, n: 11 }));
        assert_eq!(job.tol, Some(1e-12));
        assert_eq!(job.format, Format::Csv);
        assert_eq!(job.output, Some(PathBuf::from("x.csv")));

        let job = Job::from_cli(parse(&["psi-map", "a.json", "--t", "2", "--circle", "90", "--format", "json"]).unwrap()).unwrap();
        assert_eq!(job.t, Some(2.0));
        assert_eq!(job.grid, Some(GridSpec::Circle { n: 90 }));
        assert_eq!(job.format, Format::Json);
    }

    #[test]
    fn arity_and_exponent_are_enforced() {
        assert!(parse(&["add-free", "a.json"]).is_err());
        assert!(parse(&["add-free", "a.json", "b.json", "--t", "2"]).is_err());
        assert!(parse(&["power-add", "a.json"]).is_err());
        assert!(parse(&["power-add", "a.json", "b.json", "--t", "2"]).is_err());
        assert!(parse(&["add-free", "a.json", "b.json", "--grid", "0", "1", "3", "--circle", "8"]).is_err());
        let job = Job {
            operation: Operation::AddFree,
            inputs: vec!["a".into(), "b".into()],
            t: Some(2.0),
            grid: None,
            output: None,
            format: Format::Csv,
            tol: None,
            seed_height: None,
        };
        assert!(matches!(job.validate(), Err(Error::BadParameters(_))));
    }

    #[test]
    fn bad_grid_count_is_a_validation_error() {
        let e = Job::from_cli(parse(&["add-free", "a", "b", "--grid", "0", "1", "2.5"]).unwrap()).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        let e = Job::from_cli(parse(&["add-free", "a", "b", "--grid", "1", "0", "5"]).unwrap()).unwrap_err();
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn csv_uses_seventeen_digits() {
        let dir = tempfile::tempdir().unwrap();
        let b = spec(&dir, "b.json", BERNOULLI);
        let cli = parse(&["add-free", b.to_str().unwrap(), b.to_str().unwrap(), "--grid", "0.5", "3.5", "7"]).unwrap();
        let job = Job::from_cli(cli).unwrap();
        let out = run(&job).unwrap();
        let csv = out.csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x,density"));
        for line in lines {
            let (x, d) = line.split_once(',').unwrap();
            let mantissa = d.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17, "{line}");
            let (x, d): (f64, f64) = (x.parse().unwrap(), d.parse().unwrap());
            let exact = 1.0 / (std::f64::consts::PI * (x * (4.0 - x)).sqrt());
            assert!((d - exact).abs() < 1e-6);
        }
        assert_eq!(out.report.schema, 1);
        assert!(out.report.atoms.is_empty());
        assert!(!out.report.residual_diagnostics.flagged);
    }

    #[test]
    fn missing_or_wrong_grid() {
        let dir = tempfile::tempdir().unwrap();
        let b = spec(&dir, "b.json", BERNOULLI);
        let b = b.to_str().unwrap();
        let e = run(&Job::from_cli(parse(&["add-free", b, b]).unwrap()).unwrap()).unwrap_err();
        assert!(matches!(e, Error::BadParameters(_)));
        let e = run(&Job::from_cli(parse(&["add-free", b, b, "--circle", "16"]).unwrap()).unwrap()).unwrap_err();
        assert!(matches!(e, Error::DomainMismatch(_)));
    }

    #[test]
    fn report_paths() {
        assert_eq!(report_path(Path::new("out.csv")), PathBuf::from("out.json"));
        assert_eq!(report_path(Path::new("dir/out")), PathBuf::from("dir/out.json"));
        assert_eq!(report_path(Path::new("out.json")), PathBuf::from("out.report.json"));
    }

    #[test]
    fn solver_errors_map_to_three() {
        assert_eq!(exit_code(&Error::SolverFailure("x".into())), 3);
        assert_eq!(exit_code(&Error::DomainMismatch("x".into())), 2);
        assert_eq!(exit_code(&Error::Spec("x".into())), 2);
    }
}
