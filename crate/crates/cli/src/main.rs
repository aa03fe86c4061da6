//   Copyright 2026 corrfix developers
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use corrfix_cli::{emit, parse_mesh, run_scenario, CliError, Command, Format, Overrides, Scenario, EXIT_INVALID};

/// Check convexity classes, build selections, and solve fixed-point and
/// equilibrium problems declared in a scenario file.
#[derive(Debug, Parser)]
#[command(name = "corrfix", version)]
struct Args {
    command: Command,
    scenario: PathBuf,
    /// Grid order `m`, as `64`, `1/64` or `0.015625`.
    #[arg(long, value_parser = parse_mesh)]
    mesh: Option<usize>,
    /// Membership tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Fixed-point residual and equilibrium merit tolerance.
    #[arg(long)]
    eps: Option<f64>,
    /// Closure and equilibrium slack.
    #[arg(long)]
    eta: Option<f64>,
    /// Write the structured report here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[arg(long)]
    seed: Option<u64>,
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("CORRFIX_THREADS") {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Invalid(format!("CORRFIX_THREADS must be a positive integer, got {v:?}"))),
        },
        _ => Ok(None),
    }
}

fn run(args: &Args) -> Result<i32, CliError> {
    let cap = thread_cap()?;
    #[cfg(feature = "parallel")]
    if let Some(n) = cap {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = cap;
    let (sc, bytes) = Scenario::load(&args.scenario)?;
    let ov = Overrides { mesh: args.mesh, tol: args.tol, eps: args.eps, eta: args.eta, seed: args.seed };
    let report = run_scenario(&sc, &bytes, args.command, ov)?;
    if let Some(p) = &args.out {
        emit::write_structured(&report, p)?;
    }
    print!("{}", emit::render(&report, args.format));
    Ok(report.exit_code)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("corrfix: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
