//! `freenc`: JSON front end to the freenc library.
//!
//! Inputs are read from `--input` or stdin, results go to stdout, and
//! diagnostics to stderr. Exit codes: 0 success, 1 parse or usage error,
//! 2 domain error, 3 precondition failure.

mod commands;

use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use freenc::{Field, NcError};

use commands::CliError;

#[derive(Parser, Debug)]
#[command(name = "freenc", version, about = "Noncommutative function toolkit over JSON")]
pub struct Cli {
    /// Scalar backend for matrix inputs.
    #[arg(long, global = true, default_value = "rational")]
    pub field: Field,

    /// Seed for randomized commands; echoed in their output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Read JSON input from this file instead of stdin.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ExprArgs {
    /// An nc rational expression, e.g. "x1*x2 - inv(1 - x1)".
    #[arg(long)]
    pub expr: String,

    /// Number of variables.
    #[arg(long, short)]
    pub d: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate an expression on a matrix tuple.
    Eval(ExprArgs),
    /// Difference-differential block of an expression.
    ///
    /// Input: {"points": [tuple, ...], "directions": [...]}. With --order the
    /// directions are rectangular tuples; with --word they are plain matrices,
    /// one per letter.
    Ddiff {
        #[command(flatten)]
        expr: ExprArgs,
        #[arg(long, conflicts_with = "word")]
        order: Option<usize>,
        /// Word such as "g1.g2"; the result is the operator of the transposed word.
        #[arg(long)]
        word: Option<String>,
    },
    /// Taylor-Taylor coefficients about the center read from input.
    Expand {
        #[command(flatten)]
        expr: ExprArgs,
        #[arg(long)]
        max_deg: usize,
    },
    /// Sum a series at a point. Input: {"series": ..., "point": ...}.
    ///
    /// Without --n the point must be jointly nilpotent about the center and
    /// the finite sum is exact.
    Sum {
        /// Truncate at degree N instead of requiring a nilpotent point.
        #[arg(long, short, visible_alias = "N")]
        n: Option<usize>,
    },
    /// Radius and growth estimators for a coefficient rule.
    Radius(RadiusArgs),
    /// Standard identity check: vanishing on k x k pairs, witness on (k+1) x (k+1).
    Identity {
        #[arg(long, short)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
}

#[derive(Args, Debug)]
pub struct RadiusArgs {
    /// "geometric", "zero", or "powers:<word>" (coefficient 1 on powers of the word).
    #[arg(long, default_value = "geometric")]
    pub rule: String,

    /// rho_point, spectral_radius or resolvent (point tuple on input), rho_m,
    /// mu_r or mu_diamond. spectral_radius reports that of Z_1 + ... + Z_d.
    #[arg(long, default_value = "mu_r")]
    pub estimator: String,

    #[arg(long, short, default_value_t = 1)]
    pub d: usize,

    /// Largest degree L; the tail window is [ceil(L/2), L].
    #[arg(long, default_value_t = 48)]
    pub window: usize,

    /// Comma separated radii for mu_r and mu_diamond.
    #[arg(long, value_delimiter = ',')]
    pub radii: Vec<f64>,

    /// Matrix size for rho_m.
    #[arg(long, default_value_t = 1)]
    pub m: usize,

    #[arg(long, default_value_t = 64)]
    pub samples: usize,

    /// Tolerance for spectral_radius and resolvent.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

fn read_input(path: Option<&PathBuf>) -> Result<serde_json::Value, CliError> {
    let mut text = String::new();
    match path {
        Some(p) => text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
        None => {
            io::stdin().read_to_string(&mut text).map_err(|e| CliError::Usage(e.to_string()))?;
        }
    }
    serde_json::from_str(&text).map_err(|e| CliError::from(NcError::from(e)))
}

fn run(cli: &Cli) -> Result<serde_json::Value, CliError> {
    let input = || read_input(cli.input.as_ref());
    match &cli.command {
        Command::Eval(e) => commands::eval(cli.field, e, &input()?),
        Command::Ddiff { expr, order, word } => commands::ddiff(cli.field, expr, *order, word.as_deref(), &input()?),
        Command::Expand { expr, max_deg } => commands::expand(cli.field, expr, *max_deg, &input()?),
        Command::Sum { n } => commands::sum(cli.field, *n, &input()?),
        Command::Radius(args) => {
            let point = if matches!(args.estimator.as_str(), "rho_point" | "spectral_radius" | "resolvent") { Some(input()?) } else { None };
            commands::radius(args, cli.seed, point.as_ref())
        }
        Command::Identity { n, trials } => commands::identity(*n, *trials, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(value) => {
            let mut out = io::stdout().lock();
            let text = serde_json::to_string_pretty(&value).expect("values serialize");
            let _ = writeln!(out, "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("freenc: {e}");
            if let Some(context) = e.context() {
                eprintln!("{context}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
