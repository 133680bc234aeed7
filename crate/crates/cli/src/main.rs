mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use woundlab::Error;

#[derive(Parser)]
#[command(name = "woundlab", version, about = "Wound unipotent groups over F_q(t): checks and witnesses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Field, Frobenius and derivation axioms; group laws for extensions.
    VerifyAxioms(Params),
    /// Points of a curve with coordinates of bounded height.
    SearchPoints(Params),
    /// Adjoins the point of a curve above `--y0`.
    AdjoinPoint(Params),
    /// Bi-additivity, cocycle, containment and symmetry of a pairing.
    CheckCocycle(Params),
    /// The p = 2 descent computations.
    CheckDescent(Params),
    /// Norm laws for a constant field extension.
    NormCheck(Params),
    /// Polynomial maps from the line into a curve.
    ConstancySearch(Params),
    /// Non-commuting points over an étale algebra; homotopy chains.
    RequivWitness(Params),
    /// A point over k[[u]] by fixed-point iteration.
    LaurentPoint(Params),
    /// Search, witness, constancy and Laurent point in one report.
    TheoremScenario(Params),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Params {
    /// Curve variant, pairing kind (endo, gabber, twisted, descended), or ga/ga2/a1.
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub p: u64,
    /// Modulus of F_q over F_p, e.g. `z^2+z+1` or `1,1,1` (little-endian).
    #[arg(long)]
    pub q_modulus: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, default_value = "1")]
    pub a: String,
    #[arg(long, default_value = "1")]
    pub b: String,
    /// Element of F_4 with zeta^2 + zeta + 1 = 0 (default `z`).
    #[arg(long)]
    pub zeta: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub deg_bound: usize,
    #[arg(long, default_value_t = 2)]
    pub dv: usize,
    #[arg(long, default_value_t = 1)]
    pub dt: usize,
    #[arg(long, default_value_t = 27)]
    pub precision: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `y`-value for adjoin-point (element of k) or laurent-point (series in u).
    #[arg(long)]
    pub y0: Option<String>,
    /// Specialization value for requiv-witness.
    #[arg(long)]
    pub u0: Option<String>,
    /// Chain witness file for requiv-witness.
    #[arg(long)]
    pub chain: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    #[serde(skip)]
    pub format: Format,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// What a command hands back: the result block, witnesses, and whether
/// every asserted check passed.
pub struct Outcome {
    pub result: Value,
    pub witnesses: Value,
    pub ok: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Arith(_) => 2,
        Error::Budget { .. } => 3,
        Error::Verification(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, params) = match &cli.command {
        Command::VerifyAxioms(p) => ("verify-axioms", p),
        Command::SearchPoints(p) => ("search-points", p),
        Command::AdjoinPoint(p) => ("adjoin-point", p),
        Command::CheckCocycle(p) => ("check-cocycle", p),
        Command::CheckDescent(p) => ("check-descent", p),
        Command::NormCheck(p) => ("norm-check", p),
        Command::ConstancySearch(p) => ("constancy-search", p),
        Command::RequivWitness(p) => ("requiv-witness", p),
        Command::LaurentPoint(p) => ("laurent-point", p),
        Command::TheoremScenario(p) => ("theorem-scenario", p),
    };
    let start = Instant::now();
    let outcome = match name {
        "verify-axioms" => commands::run_verify_axioms(params),
        "search-points" => commands::run_search_points(params),
        "adjoin-point" => commands::run_adjoin_point(params),
        "check-cocycle" => commands::run_check_cocycle(params),
        "check-descent" => commands::run_check_descent(params),
        "norm-check" => commands::run_norm_check(params),
        "constancy-search" => commands::run_constancy_search(params),
        "requiv-witness" => commands::run_requiv_witness(params),
        "laurent-point" => commands::run_laurent_point(params),
        _ => commands::run_theorem_scenario(params),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("woundlab {name}: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let report = json!({
        "command": name,
        "params": params,
        "seed": params.seed,
        "elapsed_ms": start.elapsed().as_millis() as u64,
        "result": outcome.result,
        "witnesses": outcome.witnesses,
    });
    let body = match params.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        Format::Text => render::text(&report),
    };
    match &params.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &body) {
                eprintln!("woundlab {name}: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{body}"),
    }
    if outcome.ok {
        ExitCode::SUCCESS
    } else {
        eprintln!("woundlab {name}: verification failed");
        ExitCode::from(4)
    }
}
