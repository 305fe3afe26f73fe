//! `heightlab`: canonical heights, torsor heights, lattice enumeration and
//! Manin-Dem'janenko reports from the command line.

mod commands;
mod config;
mod input;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heightlab::{Error, Result};
use serde_json::Value;

use config::Config;

#[derive(Parser, Debug)]
#[command(name = "heightlab", version, about = "Canonical heights and Manin-Dem'janenko bounds")]
struct Cli {
    /// Decimal digits of working precision (at least 10).
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Print JSON instead of the text outline.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `key = value` file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Invariants, minimal model, torsion and reduction types.
    Curve { curve: String },
    /// Canonical height of a point, optionally with its local heights.
    Height {
        curve: String,
        point: String,
        #[arg(long)]
        local: bool,
    },
    /// Coordinates of points over a Mordell-Weil basis.
    Decompose {
        basis: String,
        #[arg(required = true)]
        points: Vec<String>,
    },
    /// Height of a point of the Gm-torsor of O(d(O)).
    Torsor {
        curve: String,
        torsor: String,
        #[arg(long, default_value_t = 2)]
        degree: u32,
        #[arg(long)]
        basis: Option<String>,
        /// Random rescalings of the fiber coordinate to compare.
        #[arg(long, default_value_t = 10)]
        lifts: usize,
    },
    /// Lattice points of height at most B in (1/n) Z^r.
    Enumerate {
        basis: String,
        bound: String,
        #[arg(long, default_value_t = 1)]
        n: u32,
    },
    /// Additivity or degree-ratio diagnostic for Weil heights.
    Diag {
        #[arg(required_unless_present = "demo", conflicts_with = "demo")]
        file: Option<String>,
        #[arg(long, value_parser = commands::DIAG_DEMOS)]
        demo: Option<String>,
    },
    /// Manin-Dem'janenko report for a curve with maps to an elliptic curve.
    Md {
        #[arg(required_unless_present = "demo", conflicts_with = "demo")]
        system: Option<String>,
        #[arg(long, value_parser = commands::MD_DEMOS)]
        demo: Option<String>,
        /// Print the system as JSON instead of running it.
        #[arg(long)]
        emit_system: bool,
    },
}

fn config(cli: &Cli) -> Result<Config> {
    let mut c = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(p) = cli.precision {
        c.precision = p;
    }
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    c.validate()?;
    Ok(c)
}

fn run(cli: &Cli) -> Result<Value> {
    let cfg = config(cli)?;
    match &cli.command {
        Command::Curve { curve } => commands::curve(&cfg, curve),
        Command::Height { curve, point, local } => commands::height(&cfg, curve, point, *local),
        Command::Decompose { basis, points } => commands::decompose(&cfg, basis, points),
        Command::Torsor { curve, torsor, degree, basis, lifts } => {
            commands::torsor(&cfg, curve, torsor, *degree, basis.as_deref(), *lifts)
        }
        Command::Enumerate { basis, bound, n } => commands::enumerate(&cfg, basis, bound, *n),
        Command::Diag { file, demo } => match (file, demo) {
            (_, Some(d)) => commands::diag_demo(&cfg, d),
            (Some(f), None) => commands::diag_file(&cfg, f),
            (None, None) => Err(Error::Input("a file or --demo is required".into())),
        },
        Command::Md { system, demo, emit_system } => {
            let s = match (system, demo) {
                (_, Some(d)) => commands::md_demo_system(d)?,
                (Some(f), None) => commands::md_system(f)?,
                (None, None) => return Err(Error::Input("a system or --demo is required".into())),
            };
            commands::md(&cfg, &s, *emit_system)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(v) => {
            let out = if cli.json { heightlab::json::render(&v) } else { render::text(&v) };
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e) as u8)
        }
    }
}
