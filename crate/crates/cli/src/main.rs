//! `addvar`: command-line front end of `addvar-core`.
//!
//! Every subcommand prints one JSON envelope. Orbit commands also write CSV;
//! when the CSV goes to stdout the envelope goes to stderr instead.

mod args;
mod commands;
mod report;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::Value;

use args::{Cli, Command};
use report::{Envelope, Failure, Outcome, Status, Timing, TOOL, VERSION};

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Test(_) => "test",
        Command::El(_) => "el",
        Command::Family(_) => "family",
        Command::Classify(_) => "classify",
        Command::Poisson(_) => "poisson",
        Command::Involution(_) => "involution",
        Command::Iterate(_) => "iterate",
        Command::Volume(_) => "volume",
        Command::Contlim(_) => "contlim",
        Command::Certify(_) => "certify",
        Command::PlotData(_) => "plot-data",
    }
}

fn dispatch(cli: &Cli) -> Result<(Outcome, Option<String>), Failure> {
    let seed = cli.seed;
    let plain = |o: Result<Outcome, Failure>| o.map(|o| (o, None));
    match &cli.command {
        Command::Test(a) => plain(commands::test(a)),
        Command::El(a) => plain(commands::el(a)),
        Command::Family(a) => plain(commands::family(a, seed)),
        Command::Classify(a) => plain(commands::classify(a)),
        Command::Poisson(a) => plain(commands::poisson(a)),
        Command::Involution(a) => plain(commands::involution(a, seed)),
        Command::Certify(a) => plain(commands::certify(a, seed)),
        Command::Contlim(a) => plain(commands::contlim(a)),
        Command::Iterate(a) => commands::iterate_cmd(a),
        Command::Volume(a) => commands::volume(a),
        Command::PlotData(a) => commands::plot_data(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = dispatch(&cli);
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let (status, error, result, csv) = match outcome {
        Ok((o, csv)) => (if o.positive { Status::Ok } else { Status::Negative }, None, o.result, csv),
        Err(f) => (f.status(), Some(f.message().to_string()), Value::Null, None),
    };
    let input = match serde_json::to_value(&cli.command) {
        Ok(Value::Object(mut m)) => {
            m.remove("name");
            Value::Object(m)
        }
        Ok(v) => v,
        Err(_) => Value::Null,
    };
    let env = Envelope {
        tool: TOOL,
        version: VERSION,
        command: command_name(&cli.command).to_string(),
        input,
        seed: cli.seed,
        status,
        exit_code: status.exit_code(),
        timing: Timing { elapsed_ms },
        error: error.clone(),
        result,
    };
    let json = if cli.compact { serde_json::to_string(&env) } else { serde_json::to_string_pretty(&env) };
    let json = match json {
        Ok(j) => j,
        Err(e) => {
            eprintln!("addvar: cannot serialize the report: {e}");
            return ExitCode::from(Status::InternalError.exit_code() as u8);
        }
    };
    let write = match &csv {
        Some(text) => {
            let mut out = std::io::stdout().lock();
            let a = out.write_all(text.as_bytes()).and_then(|_| out.flush());
            let b = writeln!(std::io::stderr(), "{json}");
            a.and(b)
        }
        None => writeln!(std::io::stdout(), "{json}"),
    };
    if let Some(msg) = &error {
        let _ = writeln!(std::io::stderr(), "addvar: {msg}");
    }
    if write.is_err() {
        return ExitCode::from(Status::InternalError.exit_code() as u8);
    }
    ExitCode::from(status.exit_code() as u8)
}
