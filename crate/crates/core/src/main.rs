use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use motivic_ext::chartcli::{self, Algebra, CliError, Command, Engine, Format, RunConfig, Suite};
use motivic_ext::ext_engine::Span;

/// Ext over the motivic Hopf algebroids E(n) and A(1) over the reals.
///
/// Exit codes: 0 success, 1 verification failure or I/O error, 2 usage
/// error, 3 resource limit.
#[derive(Parser)]
#[command(name = "motivic-ext", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ext groups with names and rho-torsion orders, as JSON.
    Ext(Flags),
    /// Pages and differentials of the rho-Bockstein spectral sequence, as JSON.
    Bockstein(Flags),
    /// Run a verification suite; exits 1 if any check fails.
    Verify(Flags),
    /// An Adams-style chart, as SVG or JSON.
    Chart(Flags),
}

#[derive(Args)]
struct Flags {
    /// JSON file with any of the options below; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// E0, E1, E2, E3 or A1.
    #[arg(long)]
    algebra: Option<Algebra>,
    /// The complex-point variant (rho = 0).
    #[arg(long)]
    complex_point: bool,
    /// Stem range, e.g. 0..12.
    #[arg(long, allow_hyphen_values = true)]
    stem: Option<Span>,
    /// Filtration range, e.g. 0..8.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<Span>,
    /// Weight range, e.g. -12..8.
    #[arg(long, allow_hyphen_values = true)]
    weight: Option<Span>,
    /// Last Bockstein page to report.
    #[arg(long)]
    max_page: Option<u32>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or svg.
    #[arg(long)]
    format: Option<Format>,
    /// e1-theorem, en-differentials, a1-pages, a1-hidden-extensions,
    /// a1-relations, massey, change-of-rings, structural, collapse or all.
    #[arg(long)]
    suite: Option<Suite>,
    /// Leave rho-torsion classes off the chart.
    #[arg(long)]
    hide_rho_torsion: bool,
    /// auto, cobar or resolution.
    #[arg(long)]
    engine: Option<Engine>,
    /// Presentation file for the e1-theorem suite.
    #[arg(long)]
    presentation: Option<PathBuf>,
    /// Chart a single weight instead of tau-families.
    #[arg(long, allow_hyphen_values = true)]
    fixed_weight: Option<i32>,
}

impl Flags {
    /// The flags that were given, keyed like a config file.
    fn overrides(&self) -> Map<String, Value> {
        let mut m = Map::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), Value::String(v));
            }
        };
        put("algebra", self.algebra.map(|a| a.to_string()));
        put("stem", self.stem.map(|x| x.to_string()));
        put("s", self.s.map(|x| x.to_string()));
        put("weight", self.weight.map(|x| x.to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("presentation", self.presentation.as_ref().map(|p| p.display().to_string()));
        put("suite", self.suite.map(Suite::name));
        let typed = [
            ("format", self.format.map(|f| serde_json::to_value(f).expect("enum"))),
            ("engine", self.engine.map(|e| serde_json::to_value(e).expect("enum"))),
            ("max-page", self.max_page.map(Value::from)),
            ("fixed-weight", self.fixed_weight.map(Value::from)),
            ("complex-point", self.complex_point.then_some(Value::Bool(true))),
            ("hide-rho-torsion", self.hide_rho_torsion.then_some(Value::Bool(true))),
        ];
        for (k, v) in typed {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        }
        m
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (cmd, flags) = match cli.command {
        Cmd::Ext(f) => (Command::Ext, f),
        Cmd::Bockstein(f) => (Command::Bockstein, f),
        Cmd::Verify(f) => (Command::Verify, f),
        Cmd::Chart(f) => (Command::Chart, f),
    };
    let file = match &flags.config {
        Some(p) => Some(std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?),
        None => None,
    };
    let cfg = RunConfig::layered(file.as_deref(), flags.overrides())?;
    let out = chartcli::run(cmd, &cfg)?;
    match &cfg.out {
        Some(p) => std::fs::write(p, &out.text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{}", out.text),
    }
    Ok(out.success)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.downcast_ref::<CliError>().map_or(1, CliError::exit_code))
        }
    }
}
