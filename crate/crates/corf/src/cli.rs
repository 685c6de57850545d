//! Argument parsing and dispatch. Every output embeds the command's
//! configuration and seed.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use corf_core::lorentz::GEOM_TOL;
use corf_core::polyhedron::validate_polyhedron;
use corf_core::separator::{build_certificate, verify_certificate, SeparatorConfig};
use serde_json::{json, Value};

use crate::experiments;
use crate::formats::{load_polyhedron, CertificateFile, PolyhedronFile, Table};
use crate::{exit, CliError};

/// Environment variable overriding the geometric tolerance.
pub const TOL_VAR: &str = "CORF_TOL";

#[derive(Debug, Parser)]
#[command(name = "corf", version, about = "Residual finiteness certificates for right-angled reflection groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Separation thresholds and inradii against their closed forms.
    Thresholds,
    /// Tube volume: closed form against Monte Carlo.
    Volumes(VolumesArgs),
    /// Certificate that an element lies outside a finite-index subgroup.
    Separate(SeparateArgs),
    /// Re-check a certificate file.
    Verify(VerifyArgs),
    /// Growth experiments, as CSV.
    Growth(GrowthArgs),
    /// Tiles near the reference point, in ball-model coordinates.
    TilingExport(TilingArgs),
    /// Print a polyhedron file with its recomputed data.
    Polyhedron(PolyhedronArgs),
}

#[derive(Debug, Args)]
pub struct VolumesArgs {
    #[arg(long)]
    pub dim: usize,
    /// Tube radius.
    #[arg(long)]
    pub b: f64,
    /// Length of the core segment.
    #[arg(long)]
    pub ell: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct SeparateArgs {
    /// Builtin name or polyhedron file.
    #[arg(long, default_value = "pentagon")]
    pub polyhedron: String,
    /// Face indices, e.g. "1 3".
    #[arg(long)]
    pub word: String,
    /// Refuse axes lying inside a wall.
    #[arg(long)]
    pub strict_axis: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Defaults to the polyhedron named in the certificate.
    #[arg(long)]
    pub polyhedron: Option<String>,
    #[arg(long)]
    pub certificate: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Example62,
    Bruteforce,
    CoverTransfer,
    SvarcMilnor,
    CertificateCurve,
}

#[derive(Debug, Args)]
pub struct GrowthArgs {
    pub experiment: Experiment,
    /// Defaults to 10 for example62 and 6 otherwise.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, default_value_t = 6)]
    pub max_index: usize,
    #[arg(long, default_value_t = 5)]
    pub max_len: usize,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value = "pentagon")]
    pub polyhedron: String,
    #[arg(long, default_value = "0 2")]
    pub word: String,
}

#[derive(Debug, Args)]
pub struct TilingArgs {
    #[arg(long, default_value = "pentagon")]
    pub polyhedron: String,
    #[arg(long, default_value_t = 1.5)]
    pub radius: f64,
    #[arg(long, default_value_t = 200_000)]
    pub frontier_bound: usize,
}

#[derive(Debug, Args)]
pub struct PolyhedronArgs {
    #[arg(long, default_value = "pentagon")]
    pub polyhedron: String,
}

/// What a command printed and the exit code it asks for.
#[derive(Debug)]
pub struct Outcome {
    pub body: String,
    pub code: u8,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Self { body, code: exit::OK }
    }
}

/// Face indices separated by whitespace.
pub fn parse_word(s: &str) -> Result<Vec<usize>, CliError> {
    s.split_whitespace()
        .map(|t| t.parse().map_err(|_| CliError::Input(format!("bad letter {t:?} in word {s:?}"))))
        .collect()
}

/// The tolerance, from `CORF_TOL` if set.
pub fn tolerance() -> Result<f64, CliError> {
    match std::env::var(TOL_VAR) {
        Ok(v) => match v.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t < 1e-3 => Ok(t),
            _ => Err(CliError::Input(format!("{TOL_VAR}={v:?} is not a tolerance in (0, 1e-3)"))),
        },
        Err(_) => Ok(GEOM_TOL),
    }
}

fn config(cli: &Cli, name: &str, tol: f64, extra: Value) -> Value {
    let mut c = json!({
        "command": name,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cli.seed,
        "tol": tol,
    });
    if let (Some(m), Value::Object(e)) = (c.as_object_mut(), extra) {
        m.extend(e);
    }
    c
}

fn with_config(mut report: Value, config: Value) -> String {
    if let Some(m) = report.as_object_mut() {
        m.insert("config".into(), config);
    }
    serde_json::to_string_pretty(&report).expect("reports serialize")
}

fn table_with_config(mut t: Table, config: &Value) -> String {
    let mut lines = vec![format!("config={config}")];
    lines.append(&mut t.comments);
    t.comments = lines;
    t.to_csv()
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let tol = tolerance()?;
    let sep_cfg = |strict_axis| SeparatorConfig {
        tol,
        strict_axis,
        ..SeparatorConfig::default()
    };
    match &cli.command {
        Command::Thresholds => {
            let (report, worst) = experiments::thresholds()?;
            let code = if worst > 1e-10 { exit::NUMERICAL } else { exit::OK };
            let body = with_config(report, config(cli, "thresholds", tol, json!({})));
            Ok(Outcome { body, code })
        }
        Command::Volumes(a) => {
            let report = experiments::volumes(a.dim, a.b, a.ell, a.samples, cli.seed)?;
            let cfg = config(cli, "volumes", tol, json!({ "dim": a.dim, "b": a.b, "ell": a.ell, "samples": a.samples }));
            Ok(Outcome::ok(with_config(report, cfg)))
        }
        Command::Separate(a) => {
            let p = load_polyhedron(&a.polyhedron)?;
            let word = parse_word(&a.word)?;
            let cert = build_certificate(&p, &word, &sep_cfg(a.strict_axis))?;
            let cfg = config(
                cli,
                "separate",
                tol,
                json!({ "polyhedron": a.polyhedron, "word": word, "strict_axis": a.strict_axis }),
            );
            Ok(Outcome::ok(CertificateFile::new(&cert, Some(cfg)).to_json()))
        }
        Command::Verify(a) => {
            let file = CertificateFile::read(&a.certificate)?;
            let source = a.polyhedron.clone().unwrap_or_else(|| file.polyhedron.clone());
            let p = load_polyhedron(&source)?;
            let cert = file.certificate()?;
            let rep = verify_certificate(&p, &cert, &sep_cfg(false));
            let checks: Vec<Value> = rep
                .checks
                .iter()
                .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
                .collect();
            let cfg = config(
                cli,
                "verify",
                tol,
                json!({ "polyhedron": source, "certificate": a.certificate.display().to_string() }),
            );
            let body = with_config(json!({ "passed": rep.passed(), "checks": checks }), cfg);
            let code = if rep.passed() { exit::OK } else { exit::VERIFY };
            Ok(Outcome { body, code })
        }
        Command::Growth(a) => {
            let name = a.experiment.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
            let n_max = a.n_max.unwrap_or(if a.experiment == Experiment::Example62 { 10 } else { 6 });
            let cfg = config(
                cli,
                "growth",
                tol,
                json!({
                    "experiment": name,
                    "n_max": n_max,
                    "max_index": a.max_index,
                    "max_len": a.max_len,
                    "samples": a.samples,
                    "polyhedron": a.polyhedron,
                    "word": a.word,
                }),
            );
            let (table, code) = match a.experiment {
                Experiment::Example62 => (experiments::example62(n_max as u64)?, exit::OK),
                Experiment::Bruteforce => (experiments::bruteforce(a.max_len, a.max_index)?, exit::OK),
                Experiment::CoverTransfer => {
                    let (t, holds) = experiments::cover_transfer(n_max, a.max_index)?;
                    (t, if holds { exit::OK } else { exit::VERIFY })
                }
                Experiment::SvarcMilnor => {
                    let p = load_polyhedron(&a.polyhedron)?;
                    (experiments::svarc_milnor(&p, a.samples, a.max_len, cli.seed)?, exit::OK)
                }
                Experiment::CertificateCurve => {
                    let p = load_polyhedron(&a.polyhedron)?;
                    let word = parse_word(&a.word)?;
                    (experiments::certificate_curve_table(&p, &word, n_max, &sep_cfg(false))?, exit::OK)
                }
            };
            Ok(Outcome {
                body: table_with_config(table, &cfg),
                code,
            })
        }
        Command::TilingExport(a) => {
            let p = load_polyhedron(&a.polyhedron)?;
            let report = experiments::tiling_export(&p, a.radius, a.frontier_bound)?;
            let cfg = config(
                cli,
                "tiling-export",
                tol,
                json!({ "polyhedron": a.polyhedron, "radius": a.radius, "frontier_bound": a.frontier_bound }),
            );
            Ok(Outcome::ok(with_config(report, cfg)))
        }
        Command::Polyhedron(a) => {
            let p = load_polyhedron(&a.polyhedron)?;
            let v = validate_polyhedron(&p).map_err(corf_core::Error::from)?;
            let mut report = serde_json::to_value(PolyhedronFile::from_polyhedron(&p)).expect("serializes");
            report["derived"] = json!({
                "vertices": p.vertices().iter().map(|x| x.coords().to_vec()).collect::<Vec<_>>(),
                "diameter": p.diameter(),
                "volume": p.volume(),
                "volume_std_error": p.volume_std_error(),
                "max_angle_deviation": v.max_angle_deviation,
            });
            let cfg = config(cli, "polyhedron", tol, json!({ "polyhedron": a.polyhedron }));
            Ok(Outcome::ok(with_config(report, cfg)))
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn main_with(args: impl IntoIterator<Item = std::ffi::OsString>) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::INPUT } else { exit::OK };
        }
    };
    match run(&cli) {
        Ok(out) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &out.body),
                None => {
                    use std::io::Write;
                    match writeln!(std::io::stdout().lock(), "{}", out.body.trim_end()) {
                        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                        r => r,
                    }
                }
            };
            match written {
                Ok(()) => out.code,
                Err(e) => {
                    eprintln!("corf: {e}");
                    exit::INPUT
                }
            }
        }
        Err(e) => {
            eprintln!("corf: {e}");
            e.exit_code()
        }
    }
}
