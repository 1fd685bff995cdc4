//! `cheshire`: weak values, pointer profiles, shot simulations and circuit
//! checks from the command line.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 I/O error, 4 zero
//! post-selection acceptance under `--strict`, 5 circuit verification
//! failure.

mod record;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use cheshire_core::circuit::{self, parse_phase, CircuitError};
use cheshire_core::experiments::{
    build_operator, build_states, polarisation_sweep, weak_value_report, ExperimentKind, OperatorName, QccConfig,
};
use cheshire_core::montecarlo::{self, MonteCarloError, RunConfig};
use cheshire_core::pointer::conditional_state;
use cheshire_core::weak::{
    detection_probability_no_interaction, disturbance_ratio_first_order, pointer_momentum_weak_value, weak_value,
    CouplingConfig,
};
use cheshire_core::{GaussianPointer, Readout};
use clap::{Args, Parser, Subcommand, ValueEnum};
use indexmap::IndexMap;
use serde_json::{json, Value};

use record::{complex, csv, OutputRecord, Row};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_STRICT: u8 = 4;
const EXIT_VERIFY: u8 = 5;

#[derive(Parser)]
#[command(
    name = "cheshire",
    version,
    about = "Weak measurements on pre- and post-selected interferometers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weak values of the four observables, with closed-form references.
    Weak(WeakArgs),
    /// CSV of the two phase-sensitive weak values over a φ grid.
    Sweep(SweepArgs),
    /// CSV of the exact post-selected pointer density on a reading grid.
    Pointer(PointerArgs),
    /// Shot-by-shot simulation of post-selected pointer readings.
    Montecarlo(MonteCarloArgs),
    /// Optical-table circuits.
    Circuit {
        #[command(subcommand)]
        action: CircuitAction,
    },
}

#[derive(Subcommand)]
enum CircuitAction {
    /// Check that detector D1 post-selects |Φ_f⟩ = (|A,H⟩ + |B,V⟩)/√2.
    Verify {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Qcc,
    Dual,
}

impl From<Kind> for ExperimentKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Qcc => ExperimentKind::GeneralisedQcc,
            Kind::Dual => ExperimentKind::DualQcc,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReadoutArg {
    Position,
    Momentum,
}

impl From<ReadoutArg> for Readout {
    fn from(r: ReadoutArg) -> Self {
        match r {
            ReadoutArg::Position => Readout::Position,
            ReadoutArg::Momentum => Readout::Momentum,
        }
    }
}

/// Angle in radians: a decimal literal or `[-][k*]pi[/n]`.
fn angle(s: &str) -> Result<f64, String> {
    parse_phase(s).map(|p| p.radians())
}

fn finite(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("expected a finite number, got `{s}`"))
}

#[derive(Clone, Copy)]
struct Grid {
    min: f64,
    max: f64,
    n: usize,
}

impl Grid {
    fn points(self) -> impl Iterator<Item = f64> {
        let step = (self.max - self.min) / (self.n - 1) as f64;
        (0..self.n).map(move |k| {
            if k + 1 == self.n {
                self.max
            } else {
                self.min + step * k as f64
            }
        })
    }
}

fn grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [min, max, n] = parts[..] else {
        return Err(format!("expected MIN:MAX:N, got `{s}`"));
    };
    let (min, max) = (finite(min)?, finite(max)?);
    let n: usize = n.parse().map_err(|_| format!("bad point count `{n}`"))?;
    if n < 2 || min.partial_cmp(&max) != Some(std::cmp::Ordering::Less) {
        return Err("grid needs MIN < MAX and N >= 2".into());
    }
    Ok(Grid { min, max, n })
}

#[derive(Args)]
struct Phases {
    /// Relative phase θ between the arms.
    #[arg(long, value_parser = angle, allow_hyphen_values = true)]
    theta: f64,
    /// Basis phase φ.
    #[arg(long, value_parser = angle, allow_hyphen_values = true)]
    phi: f64,
}

#[derive(Args)]
struct WeakArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[command(flatten)]
    phases: Phases,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, value_parser = angle, allow_hyphen_values = true)]
    theta: f64,
    #[arg(long, value_parser = angle, allow_hyphen_values = true)]
    phi_start: f64,
    #[arg(long, value_parser = angle, allow_hyphen_values = true)]
    phi_end: f64,
    /// Number of φ values, endpoints included.
    #[arg(long)]
    steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PointerSetup {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Observable coupled to the pointer, e.g. `sigma_B` or `H`.
    #[arg(long)]
    operator: String,
    #[command(flatten)]
    phases: Phases,
    /// Coupling strength.
    #[arg(long, value_parser = finite)]
    g: f64,
    /// Pointer width.
    #[arg(long, value_parser = finite, default_value = "1")]
    sigma: f64,
    /// Pointer centre.
    #[arg(long, value_parser = finite, default_value = "0", allow_hyphen_values = true)]
    x0: f64,
    #[arg(long, value_enum, default_value = "position")]
    readout: ReadoutArg,
}

#[derive(Args)]
struct PointerArgs {
    #[command(flatten)]
    setup: PointerSetup,
    /// Reading grid `MIN:MAX:N`.
    #[arg(long, value_parser = grid, allow_hyphen_values = true)]
    grid: Grid,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MonteCarloArgs {
    #[command(flatten)]
    setup: PointerSetup,
    #[arg(long)]
    shots: u64,
    /// RNG seed; falls back to `CHESHIRE_SEED`, then 0.
    #[arg(long, env = "CHESHIRE_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    shards: usize,
    /// Exit with code 4 when no shot passes post-selection.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Io(String),
    /// The record is still written before exiting with this code.
    WithRecord(u8, String),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn params(pairs: &[(&str, Value)]) -> IndexMap<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn cmd_weak(args: &WeakArgs) -> Result<(), Failure> {
    let kind = ExperimentKind::from(args.kind);
    let cfg = QccConfig::new(args.phases.theta, args.phases.phi)?;
    let report = weak_value_report(kind, &cfg)?;
    let mut record = OutputRecord::new(
        "weak",
        params(&[
            ("kind", json!(kind.as_str())),
            ("theta", json!(cfg.theta)),
            ("phi", json!(cfg.phi)),
        ]),
    );
    for (name, entry) in &report.entries {
        let mut row = Row::new();
        row.insert("operator".into(), json!(name.as_str()));
        row.insert("weak_value".into(), complex(entry.computed.value()));
        row.insert("reference".into(), complex(entry.reference));
        row.insert("deviation".into(), json!(entry.deviation()));
        record.rows.push(row);
    }
    if let Some(note) = report.note {
        record.report = Some(json!({ "note": note }));
    }
    emit(&record.to_json(), args.out.as_ref())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    if args.steps < 2 {
        return Err(Failure::Usage(format!(
            "--steps must be at least 2, got {}",
            args.steps
        )));
    }
    let kind = ExperimentKind::from(args.kind);
    let grid = Grid {
        min: args.phi_start,
        max: args.phi_end,
        n: args.steps,
    };
    let phis: Vec<f64> = grid.points().collect();
    let rows: Vec<Vec<f64>> = polarisation_sweep(kind, args.theta, &phis)?
        .iter()
        .map(|r| vec![r.phi, r.first.re(), r.first.im(), r.second.re(), r.second.im()])
        .collect();
    let [_, _, first, second] = kind.operators();
    let parameters = params(&[
        ("command", json!("sweep")),
        ("kind", json!(kind.as_str())),
        ("theta", json!(args.theta)),
        ("phi_start", json!(args.phi_start)),
        ("phi_end", json!(args.phi_end)),
        ("steps", json!(args.steps)),
        ("sigma_first", json!(first.as_str())),
        ("sigma_second", json!(second.as_str())),
    ]);
    let header = [
        "phi",
        "re_sigma_first",
        "im_sigma_first",
        "re_sigma_second",
        "im_sigma_second",
    ];
    emit(&csv(&parameters, &header, &rows), args.out.as_ref())
}

struct Setup {
    kind: ExperimentKind,
    cfg: QccConfig,
    operator: OperatorName,
    pointer: GaussianPointer,
}

impl PointerSetup {
    fn resolve(&self) -> Result<Setup, Failure> {
        let kind = ExperimentKind::from(self.kind);
        let operator: OperatorName = self.operator.parse()?;
        if operator.kind() != kind {
            return Err(Failure::Usage(format!(
                "operator {operator} belongs to the {} experiment, not {kind}",
                operator.kind()
            )));
        }
        Ok(Setup {
            kind,
            cfg: QccConfig::new(self.phases.theta, self.phases.phi)?,
            operator,
            pointer: GaussianPointer::new(self.sigma, self.x0)?,
        })
    }

    fn echo(&self, s: &Setup) -> Vec<(&'static str, Value)> {
        vec![
            ("kind", json!(s.kind.as_str())),
            ("operator", json!(s.operator.as_str())),
            ("theta", json!(s.cfg.theta)),
            ("phi", json!(s.cfg.phi)),
            ("g", json!(self.g)),
            ("sigma", json!(self.sigma)),
            ("x0", json!(self.x0)),
            ("readout", json!(Readout::from(self.readout))),
        ]
    }
}

fn cmd_pointer(args: &PointerArgs) -> Result<(), Failure> {
    let setup = args.setup.resolve()?;
    let readout = Readout::from(args.setup.readout);
    let g = args.setup.g;
    let coupling = CouplingConfig::new(g, readout, 0.0)?;
    if let Some(warning) = coupling.weak_regime_warning(&setup.pointer) {
        eprintln!("warning: {warning}");
    }
    let pair = build_states(setup.kind, &setup.cfg);
    let op = build_operator(setup.operator, &setup.cfg);
    let ow = weak_value(&op, &pair)?;
    let state = conditional_state(&op, &pair, &setup.pointer, g)?.in_basis(readout);
    let rows: Vec<Vec<f64>> = args
        .grid
        .points()
        .map(|q| {
            let density = state.density(q);
            let bare = detection_probability_no_interaction(&pair, setup.pointer.amplitude(readout, q));
            let ratio = if bare > 0.0 { density / bare - 1.0 } else { f64::NAN };
            let pw = pointer_momentum_weak_value(&setup.pointer, readout, q);
            vec![q, density, ratio, disturbance_ratio_first_order(ow, pw, g)]
        })
        .collect();
    let mut parameters = vec![("command", json!("pointer"))];
    parameters.extend(args.setup.echo(&setup));
    parameters.push((
        "grid",
        json!(format!("{}:{}:{}", args.grid.min, args.grid.max, args.grid.n)),
    ));
    parameters.push(("weak_value_re", json!(ow.re())));
    parameters.push(("weak_value_im", json!(ow.im())));
    let header = [
        "q",
        "conditional_density",
        "ratio_to_g0_minus_1",
        "first_order_prediction",
    ];
    emit(&csv(&params(&parameters), &header, &rows), args.out.as_ref())
}

fn cmd_montecarlo(args: &MonteCarloArgs) -> Result<(), Failure> {
    let setup = args.setup.resolve()?;
    let config = RunConfig::new(
        setup.kind,
        setup.cfg,
        setup.operator.as_str(),
        args.setup.g,
        setup.pointer,
        args.shots,
        args.seed,
        args.setup.readout.into(),
    )?
    .with_shards(args.shards);
    let mut parameters = args.setup.echo(&setup);
    parameters.extend([
        ("shots", json!(args.shots)),
        ("seed", json!(args.seed)),
        ("shards", json!(args.shards)),
        ("strict", json!(args.strict)),
    ]);
    let mut record = OutputRecord::new("montecarlo", params(&parameters));
    let outcome = match montecarlo::run(&config) {
        Ok(result) => {
            let Value::Object(fields) = json!(result) else {
                unreachable!("run results serialise as objects")
            };
            let mut row: Row = fields.into_iter().collect();
            row.insert("rate_stderr".into(), json!(result.rate_stderr()));
            record.rows.push(row);
            record.report = Some(json!({ "status": "ok" }));
            Ok(())
        }
        Err(MonteCarloError::ZeroAcceptance { total }) => {
            let message = format!("no shot out of {total} passed post-selection");
            record.report = Some(json!({ "status": "zero_acceptance", "total": total, "message": message }));
            if args.strict {
                Err(Failure::WithRecord(EXIT_STRICT, message))
            } else {
                eprintln!("warning: {message}");
                Ok(())
            }
        }
        Err(e) => return Err(e.into()),
    };
    emit(&record.to_json(), args.out.as_ref())?;
    outcome
}

fn cmd_verify(path: &PathBuf, out: Option<&PathBuf>) -> Result<(), Failure> {
    let source = fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let spec = circuit::parse(&source).map_err(|e| {
        let expected = if e.expected.is_empty() {
            String::new()
        } else {
            format!(" (expected one of: {})", e.expected.join(", "))
        };
        Failure::Usage(format!(
            "{}:{}:{}: {}{expected}",
            path.display(),
            e.line,
            e.column,
            e.message
        ))
    })?;
    let mut record = OutputRecord::new("circuit verify", params(&[("path", json!(path.display().to_string()))]));
    let (report, outcome) = match circuit::verify(&spec) {
        Ok(report) => (report, Ok(())),
        Err(CircuitError::VerificationFailed { trigger, report }) => {
            let message = format!(
                "{}: detector {trigger} does not select |Φ_f⟩ under any calibration",
                path.display()
            );
            (*report, Err(Failure::WithRecord(EXIT_VERIFY, message)))
        }
        Err(e) => return Err(e.into()),
    };
    for (detector, probabilities) in &report.detector_matrix {
        let mut row = Row::new();
        row.insert("detector".into(), json!(detector));
        for (label, p) in report.basis.iter().zip(probabilities) {
            row.insert(label.clone(), json!(p));
        }
        record.rows.push(row);
    }
    record.report = Some(json!(report));
    emit(&record.to_json(), out)?;
    outcome
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match &cli.command {
        Command::Weak(a) => cmd_weak(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Pointer(a) => cmd_pointer(a),
        Command::Montecarlo(a) => cmd_montecarlo(a),
        Command::Circuit {
            action: CircuitAction::Verify { path, out },
        } => cmd_verify(path, out.as_ref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::WithRecord(code, m)) => {
            eprintln!("error: {m}");
            ExitCode::from(code)
        }
    }
}
