//! `lchi`: reproducible runs of the Dirichlet L-function lab.
//!
//! Exit status: 0 when everything ran and every check passed, 2 when a
//! mathematical check failed, 1 when the run could not be carried out.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "lchi", version, about = "Numerical lab for Dirichlet L-function explicit formulas")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Flat key=value file; flags override it
    #[arg(long, global = true)]
    config: Option<String>,
    /// Worker threads (defaults to all cores)
    #[arg(long, global = true)]
    threads: Option<String>,
    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<String>,
    /// Seed for random spot checks
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Multiplier k in "<= k * bound" checks
    #[arg(long, global = true)]
    k: Option<String>,
    /// Panel budget of the oscillatory quadrature
    #[arg(long, global = true)]
    budget: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Character value table as CSV
    Chars(Params),
    /// Gauss sum, root number and identity residuals as JSON
    Gauss(Params),
    /// L, L'/L, X-factors and functional-equation residual at one point
    Eval(Params),
    /// Critical-line zeros up to height T as CSV
    Zeros(Params),
    /// Zero and prime sums, sharp or smooth, as CSV
    Sums(Params),
    /// Run one experiment and write its JSON report
    Verify {
        /// thm31, corB, superbound, lemma23, lemma22, cross or chebyshev
        experiment: String,
        #[command(flatten)]
        params: Params,
    },
}

#[derive(Args, Debug, Default)]
struct Params {
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    chi: Option<String>,
    /// h/k or a positive real
    #[arg(long)]
    xi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<String>,
    #[arg(long = "t", allow_hyphen_values = true)]
    t_lower: Option<String>,
    /// Height, or a comma-separated list of heights for `sums`
    #[arg(long = "T")]
    t_upper: Option<String>,
    #[arg(long)]
    step: Option<String>,
    /// Smooth-weight sums instead of sharp cutoffs
    #[arg(long)]
    smooth: bool,
    /// Comma-separated list of scales X
    #[arg(long = "X")]
    x: Option<String>,
    /// Bump support a,b
    #[arg(long)]
    bump: Option<String>,
    #[arg(long = "Tmin")]
    t_min: Option<String>,
    #[arg(long = "Tmax")]
    t_max: Option<String>,
    #[arg(long = "Xmin")]
    x_min: Option<String>,
    #[arg(long = "Xmax")]
    x_max: Option<String>,
    #[arg(long)]
    points: Option<String>,
    /// Modulus of the second character
    #[arg(long)]
    qt: Option<String>,
    /// Label of the second character
    #[arg(long)]
    psi: Option<String>,
    #[arg(long)]
    v: Option<String>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    u: Option<String>,
    /// Random samples in spot checks
    #[arg(long)]
    samples: Option<String>,
}

impl Params {
    fn pairs(self) -> Vec<(&'static str, String)> {
        let Params {
            q, chi, xi, sigma, t_lower, t_upper, step, smooth, x, bump, t_min, t_max, x_min, x_max,
            points, qt, psi, v, c, a, b, u, samples,
        } = self;
        let mut out: Vec<(&'static str, String)> = [
            ("q", q), ("chi", chi), ("xi", xi), ("sigma", sigma), ("t", t_lower), ("T", t_upper),
            ("step", step), ("X", x), ("bump", bump), ("Tmin", t_min), ("Tmax", t_max),
            ("Xmin", x_min), ("Xmax", x_max), ("points", points), ("qt", qt), ("psi", psi),
            ("v", v), ("c", c), ("a", a), ("b", b), ("u", u), ("samples", samples),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect();
        if smooth {
            out.push(("smooth", "true".into()));
        }
        out
    }
}

/// Whether the run finished with every check satisfied.
pub enum Outcome {
    Passed,
    ChecksFailed,
}

fn run(cli: Cli) -> Result<Outcome> {
    let Global { config, threads, out, seed, k, budget } = cli.global;
    let (subcommand, experiment, params) = match cli.command {
        Command::Chars(p) => ("chars", None, p),
        Command::Gauss(p) => ("gauss", None, p),
        Command::Eval(p) => ("eval", None, p),
        Command::Zeros(p) => ("zeros", None, p),
        Command::Sums(p) => ("sums", None, p),
        Command::Verify { experiment, params } => ("verify", Some(experiment), params),
    };
    let mut overrides = vec![("subcommand", subcommand.to_string())];
    if let Some(e) = experiment {
        overrides.push(("experiment", e));
    }
    for (key, value) in [("threads", threads), ("out", out), ("seed", seed), ("k", k), ("budget", budget)] {
        if let Some(v) = value {
            overrides.push((key, v));
        }
    }
    overrides.extend(params.pairs());

    let file_text = match &config {
        Some(path) => Some(std::fs::read_to_string(path).with_context(|| format!("cannot read config {path}"))?),
        None => None,
    };
    let cfg = RunConfig::from_sources(file_text.as_deref(), overrides)?;

    if let Some(n) = cfg.get::<usize>("threads")? {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot configure the worker pool")?;
    }
    commands::dispatch(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Outcome::Passed) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
