mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::Settings;

pub const SCHEMA: &str = "foelner-rank/1";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Precondition(String),
}

impl From<foelner_rank::Error> for CliError {
    fn from(e: foelner_rank::Error) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Precondition(e.to_string())
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Precondition(_) => 2,
        }
    }
}

/// Rank estimates over group rings of amenable groups.
#[derive(Parser, Debug)]
#[command(name = "foelner-rank", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Følner kernel and image estimates of rk(Δ).
    Rank(Common),
    /// Følner estimate against finite-quotient kernel dimensions.
    Luck(Common),
    /// Greedy ε-quasitiling of a box by box shapes.
    Quasitile(Common),
    /// Bratteli tiling system with empirical harmonic weights.
    Bratteli(Common),
    /// Defects of the level maps and, optionally, of sofic approximations.
    EmbedCheck(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Key/value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Group descriptor, e.g. "Z^2", "Z^1 x C2", "H3".
    #[arg(long, allow_hyphen_values = true)]
    group: Option<String>,
    /// Coefficient field: Q, Q(i) or F<p>.
    #[arg(long)]
    field: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    elem: Option<String>,
    /// Second element for the homomorphism defect.
    #[arg(long = "elem-b", allow_hyphen_values = true)]
    elem_b: Option<String>,
    /// Matrix text `[[a, b], [c, d]]`.
    #[arg(long, allow_hyphen_values = true)]
    matrix: Option<String>,
    /// File holding an element or matrix.
    #[arg(long)]
    input: Option<String>,
    /// Følner stages.
    #[arg(long)]
    n: Option<String>,
    /// Quotient moduli; `a:b` for a vector modulus.
    #[arg(long)]
    m: Option<String>,
    /// Levels for the level-rank series.
    #[arg(long)]
    i: Option<String>,
    /// r, r+1 (or strict), or a number.
    #[arg(long)]
    window: Option<String>,
    /// kernel or image (luck).
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    depth: Option<String>,
    /// folner or interval:<step>.
    #[arg(long)]
    driver: Option<String>,
    /// Host multipliers for the harmonic weights.
    #[arg(long)]
    hosts: Option<String>,
    /// Host box, e.g. 20x20.
    #[arg(long)]
    host: Option<String>,
    /// Shape boxes, e.g. 8x8,4x4.
    #[arg(long)]
    shapes: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// json or csv (rank and luck only).
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "group", "field", "elem", "elem-b", "matrix", "input", "n", "m", "i", "window", "method", "eps", "depth",
    "driver", "hosts", "host", "shapes", "seed", "format",
];

impl Common {
    fn settings(self) -> Result<(Settings, Option<PathBuf>), CliError> {
        let flags = vec![
            ("group", self.group),
            ("field", self.field),
            ("elem", self.elem),
            ("elem-b", self.elem_b),
            ("matrix", self.matrix),
            ("input", self.input),
            ("n", self.n),
            ("m", self.m),
            ("i", self.i),
            ("window", self.window),
            ("method", self.method),
            ("eps", self.eps),
            ("depth", self.depth),
            ("driver", self.driver),
            ("hosts", self.hosts),
            ("host", self.host),
            ("shapes", self.shapes),
            ("seed", self.seed),
            ("format", self.format),
        ];
        let s = Settings::load(KEYS, self.config.as_deref(), flags)?;
        Ok((s, self.output))
    }
}

type Runner = fn(&Settings) -> Result<commands::Outcome, CliError>;

fn run(cli: Cli) -> Result<u8, CliError> {
    let (name, common, run): (&str, Common, Runner) = match cli.command {
        Command::Rank(c) => ("rank", c, commands::rank),
        Command::Luck(c) => ("luck", c, commands::luck),
        Command::Quasitile(c) => ("quasitile", c, commands::quasitile_cmd),
        Command::Bratteli(c) => ("bratteli", c, commands::bratteli),
        Command::EmbedCheck(c) => ("embed-check", c, commands::embed_check),
    };
    let (settings, output) = common.settings()?;
    let seed = settings.seed()?;
    let csv = match settings.get("format").unwrap_or("json") {
        "json" => false,
        "csv" if matches!(name, "rank" | "luck") => true,
        "csv" => return Err(CliError::Usage("--format csv is only available for rank and luck".to_string())),
        other => return Err(CliError::Usage(format!("unknown --format `{other}`"))),
    };
    let outcome = run(&settings)?;
    let text = if csv {
        outcome.csv.unwrap_or_default()
    } else {
        let doc = json!({
            "schema": SCHEMA,
            "command": name,
            "seed": seed,
            "config": settings.to_json(),
            "result": outcome.json,
        });
        serde_json::to_string_pretty(&doc).expect("json values serialize") + "\n"
    };
    let written = match output {
        Some(path) => std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| format!("stdout: {e}")),
    };
    written.map_err(CliError::Precondition)?;
    Ok(outcome.code as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
