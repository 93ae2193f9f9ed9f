//! `padic-gas`: enumeration dumps, evaluation, region queries, sampling and a
//! cross-check battery, with JSON or CSV output.

mod commands;
mod output;
mod params;
mod verify;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use padic_gas::Error;

use params::{CliError, CliResult, Flags, Params};

const EXIT_DOMAIN: u8 = 2;
const EXIT_SIZE: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "padic-gas", version, about = "Exact partition functions of p-adic log-gases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List splitting filtrations of [n].
    Enumerate(Flags),
    /// Counts and multiplicity totals for [n].
    Stats(Flags),
    /// Evaluate an integral or a derived quantity.
    Evaluate(Flags),
    /// Test membership in the convergence region.
    Domain(Flags),
    /// Run the cross-check battery.
    Verify(Flags),
    /// Oracle integration by digit enumeration or sampling.
    Sample(Flags),
}

impl Command {
    fn parts(&self) -> (&'static str, &Flags) {
        match self {
            Command::Enumerate(f) => ("enumerate", f),
            Command::Stats(f) => ("stats", f),
            Command::Evaluate(f) => ("evaluate", f),
            Command::Domain(f) => ("domain", f),
            Command::Verify(f) => ("verify", f),
            Command::Sample(f) => ("sample", f),
        }
    }
}

fn run(cli: &Cli) -> CliResult<(String, bool)> {
    let (name, flags) = cli.command.parts();
    let limits = Params::limits(flags.config.as_deref())?;
    padic_gas::configure_threads()?;
    let base = match &flags.from_json {
        Some(path) => params::load_params(path, name)?,
        None => Params::default(),
    };
    let mut p = base.overlay(flags);
    p.reduced |= flags.reduced;
    log::debug!("{name} with {p:?}");
    let out = match name {
        "enumerate" => commands::enumerate(&mut p, &limits)?,
        "stats" => commands::stats(&mut p, &limits)?,
        "evaluate" => commands::evaluate(&mut p, &limits)?,
        "domain" => commands::domain(&mut p, &limits)?,
        "verify" => verify::verify(&mut p, &limits)?,
        _ => commands::sample(&mut p, &limits)?,
    };
    let ok = name != "verify" || verify::failures(&out.result) == 0;
    Ok((output::render(name, &p, &out, flags.format)?, ok))
}

fn exit_code(e: &CliError) -> u8 {
    match e {
        CliError::Usage(_) => EXIT_USAGE,
        CliError::Core(Error::SizeLimit { .. }) => EXIT_SIZE,
        CliError::Core(e) if e.is_domain_like() => EXIT_DOMAIN,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok((text, ok)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("padic-gas: {e}");
            if let CliError::Core(Error::Convergence(w)) = &e {
                if let Ok(json) = serde_json::to_string(w) {
                    eprintln!("witness: {json}");
                }
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
