//! `stokes`: monodromy and Stokes data of rank-one systems from a JSON job.

mod job;
mod report;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use stokes_core::pipeline::{self, Analysis, Options};
use stokes_core::{critical_directions, CMat, Error, RankOneSystem};

use job::JobSpec;
use report::{Item, Section};

/// Largest oracle discrepancy accepted by `verify`.
const VERIFY_TOL: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(name = "stokes", version, about = "Stokes matrices and monodromy data of dY/dz = (A0 + A1/z) Y")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON job file (stdin when omitted or `-`)
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Report destination (stdout when omitted)
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Cut direction, overrides the job
    #[arg(long, global = true, allow_negative_numbers = true)]
    eta: Option<f64>,

    /// Local series order, overrides the job
    #[arg(long, global = true)]
    order: Option<usize>,

    /// Integration tolerance, overrides the job
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Critical directions, Stokes rays and the dominance order
    Rays,
    /// Connection matrix C
    Connection,
    /// Monodromy matrices, traces and monodromy at infinity
    Monodromy,
    /// Stokes matrices and Stokes factors
    Stokes,
    /// Stokes matrices checked against direct integration
    Verify,
    /// Everything
    Analyze,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

/// Failure with the exit code it maps to.
enum Failure {
    Usage(String),
    Numeric { operation: &'static str, error: Error },
}

impl Failure {
    fn numeric(operation: &'static str) -> impl FnOnce(Error) -> Failure {
        move |error| Failure::Numeric { operation, error }
    }
}

fn module_of(operation: &str) -> &'static str {
    match operation {
        "frame" => "core",
        "local_bases" => "local",
        "connection_matrix" => "continuation",
        "stokes_factors" => "monodromy",
        "verify" => "oracle",
        _ => "cli",
    }
}

fn read_input(path: Option<&PathBuf>) -> Result<String, Failure> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            fs::read_to_string(p).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::Usage(format!("cannot read stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn mats(v: &[CMat]) -> Item {
    Item::List(v.iter().cloned().map(Item::Matrix).collect())
}

fn rays_section(sys: &RankOneSystem, eta: Option<f64>, rep: &mut Section) -> Result<stokes_core::DirectionFrame, Failure> {
    let n = sys.n();
    rep.push(
        "case_tags",
        Item::List((0..n).map(|k| Item::Text(sys.case(k).label())).collect()),
    );
    let crit = critical_directions(sys);
    let frame = pipeline::frame_for(sys, eta).map_err(Failure::numeric("frame"))?;
    let mut c = Section::default();
    c.push("criticals", Item::Reals(crit.values().to_vec()));
    c.push("tau", Item::Reals(crit.tau_values()));
    c.push("m", Item::Int(crit.m as i64));
    c.push("mu", Item::Int(crit.mu as i64));
    c.push("nu", Item::Int(frame.nu));
    c.push("eta", Item::Real(frame.eta));
    let (a, b) = frame.stokes_rays();
    c.push("stokes_rays", Item::Reals(vec![a, b]));
    rep.push("critical_directions", Item::Section(c));
    let mut d = Section::default();
    d.push("order", Item::Ints(frame.dominance_order().iter().map(|&k| k as i64).collect()));
    d.push("rank", Item::Ints(frame.rank().iter().map(|&k| k as i64).collect()));
    d.push("eta_jk", Item::RealMatrix(frame.eta_jk.clone()));
    rep.push("dominance", Item::Section(d));
    Ok(frame)
}

fn connection_section(an: &Analysis, rep: &mut Section) {
    let cm = &an.connection;
    rep.push("C", Item::Matrix(cm.c.clone()));
    rep.push("err_C", Item::RealMatrix(cm.err.clone()));
    rep.push("zero_rows", Item::List(cm.zero_rows.iter().map(|&b| Item::Bool(b)).collect()));
    rep.push("zero_cols", Item::List(cm.zero_cols.iter().map(|&b| Item::Bool(b)).collect()));
    if let Some(e) = cm.integer_eigenvalue {
        rep.push("integer_eigenvalue", Item::Complex(e));
    }
    let warnings: Vec<Item> = an
        .bases
        .iter()
        .flat_map(|b| b.warnings.iter().map(move |w| Item::Text(format!("pole {}: {w}", b.k))))
        .collect();
    if !warnings.is_empty() {
        rep.push("warnings", Item::List(warnings));
    }
}

fn monodromy_section(an: &Analysis, rep: &mut Section) {
    let md = &an.monodromy;
    rep.push("alpha", Item::Complexes(md.alpha.clone()));
    rep.push("beta", Item::Complexes(md.beta.clone()));
    rep.push("M", mats(&md.m));
    rep.push("M_inv", mats(&md.m_inv));
    match &md.m_star {
        Ok(ms) => rep.push("M_star", mats(ms)),
        Err(e) => rep.push("M_star", Item::Text(format!("unavailable: {e}"))),
    }
    let mut t = Section::default();
    t.push("tr_M", Item::Complexes(md.traces.tr.clone()));
    t.push("tr_M_closed", Item::Complexes(md.traces.tr_closed.clone()));
    t.push("tr_MjMk", Item::Matrix(md.traces.tr_pair.clone()));
    t.push("tr_MjMk_closed", Item::Matrix(md.traces.tr_pair_closed.clone()));
    t.push("max_diff", Item::Real(md.traces.max_diff));
    rep.push("traces", Item::Section(t));
    let inf = &md.infinity;
    let mut i = Section::default();
    i.push("M_inf", Item::Matrix(inf.m_inf.clone()));
    i.push("eigenvalues", Item::Complexes(inf.eigenvalues.clone()));
    i.push("expected", Item::Complexes(inf.expected.clone()));
    i.push("distance", Item::Real(inf.distance));
    i.push("fundamental", Item::Bool(inf.fundamental));
    rep.push("infinity", Item::Section(i));
}

fn stokes_section(an: &Analysis, rep: &mut Section) {
    let md = &an.monodromy;
    rep.push("S_plus", Item::Matrix(md.s_plus.clone()));
    rep.push("S_minus_inv", Item::Matrix(md.s_minus_inv.clone()));
    if !md.w.is_empty() {
        let w = md
            .w
            .iter()
            .map(|(nu, m)| {
                let mut s = Section::default();
                s.push("nu", Item::Int(*nu));
                s.push("W", Item::Matrix(m.clone()));
                Item::Section(s)
            })
            .collect();
        rep.push("W", Item::List(w));
    }
}

/// Runs the job; `Ok(false)` means the verification threshold was missed.
fn run(cli: &Cli) -> Result<(Section, bool), Failure> {
    let text = read_input(cli.input.as_ref())?;
    let spec = JobSpec::parse(&text)
        .and_then(|j| j.resolve(cli.eta, cli.order, cli.tol))
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let sys = spec.system().map_err(|e| Failure::Usage(e.to_string()))?;
    let mut rep = Section::default();
    let echo = serde_json::to_value(&spec).map_err(|e| Failure::Usage(e.to_string()))?;
    rep.push("input", Item::Raw(echo));
    rep.push("command", Item::Text(format!("{:?}", cli.command).to_lowercase()));
    rays_section(&sys, spec.eta, &mut rep)?;
    if cli.command == Command::Rays {
        return Ok((rep, true));
    }
    let opts = Options {
        eta: spec.eta,
        order: spec.order(),
        tol: spec.tolerance(),
        factors: matches!(cli.command, Command::Stokes | Command::Analyze),
    };
    let an = pipeline::analyze(&sys, &opts).map_err(|error| {
        let operation = match error {
            Error::SeriesDivergence { .. } | Error::OutOfRadius { .. } => "local_bases",
            _ => "connection_matrix",
        };
        Failure::Numeric { operation, error }
    })?;
    connection_section(&an, &mut rep);
    if matches!(cli.command, Command::Monodromy | Command::Analyze) {
        monodromy_section(&an, &mut rep);
    }
    if matches!(cli.command, Command::Stokes | Command::Verify | Command::Analyze) {
        stokes_section(&an, &mut rep);
    }
    let mut ok = true;
    if matches!(cli.command, Command::Verify | Command::Analyze) {
        let v = pipeline::verify(&sys, &an, spec.tolerance()).map_err(Failure::numeric("verify"))?;
        ok = v.max_diff() <= VERIFY_TOL;
        let mut s = Section::default();
        s.push("S_plus_oracle", Item::Matrix(v.s_plus_oracle.clone()));
        s.push("S_minus_inv_oracle", Item::Matrix(v.s_minus_inv_oracle.clone()));
        s.push("diff_plus", Item::Real(v.diff_plus));
        s.push("diff_minus", Item::Real(v.diff_minus));
        s.push("spread", Item::Real(v.spread));
        s.push("threshold", Item::Real(VERIFY_TOL));
        s.push("pass", Item::Bool(ok));
        rep.push("verify", Item::Section(s));
    }
    Ok((rep, ok))
}

fn emit(cli: &Cli, rep: &Section) -> io::Result<()> {
    let mut buf = Vec::new();
    match cli.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &rep.to_json())?;
            buf.push(b'\n');
        }
        Format::Csv => rep.write_csv(&mut buf).map_err(io::Error::other)?,
    }
    match &cli.output {
        Some(p) => fs::write(p, buf),
        None => io::stdout().write_all(&buf),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok((rep, ok)) => {
            if let Err(e) = emit(&cli, &rep) {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(1);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: verification above {VERIFY_TOL:e}");
                ExitCode::from(3)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numeric { operation, error }) => {
            let body = json!({
                "error": {
                    "module": module_of(operation),
                    "operation": operation,
                    "message": error.to_string(),
                }
            });
            eprintln!("{body}");
            ExitCode::from(2)
        }
    }
}
