//! `fpaut`: checks presentations, fundamental domains, heights and peak
//! reduction for pure symmetric outer automorphisms of free products.
//!
//! Every subcommand prints a JSON report. Exit status: 0 when every check
//! passes, 1 when a check fails, 2 on malformed input, 3 on an internal error.

mod commands;
mod report;
mod selftest;

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use report::{write_json, Failure, Report};

#[derive(Parser, Debug)]
#[command(name = "fpaut", version, about)]
struct Cli {
    /// Seed for every random choice; equal seeds give identical reports.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Print one line per result to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the relations of the presentation for a factor system.
    Relations {
        #[arg(long)]
        system: PathBuf,
        /// n3, n4 or n5; defaults to the rank of the system.
        #[arg(long)]
        case: Option<String>,
        /// Write the report here (same as --report).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the stabilizer presentations of fundamental domain vertices.
    Stabilizers {
        #[arg(long)]
        system: PathBuf,
        /// Shape family name (alpha, rho, ..., A, B, C); one vertex per family by default.
        #[arg(long)]
        shape: Option<String>,
        /// Comma-separated 1-based indices of the shape.
        #[arg(long, requires = "shape")]
        indices: Option<String>,
        /// Check every vertex of the fundamental domain.
        #[arg(long, conflicts_with = "shape")]
        all: bool,
    },
    /// Build the fundamental domain complex for n factors.
    Fundomain {
        #[arg(long)]
        n: usize,
        /// Report the vertex count of each shape family.
        #[arg(long)]
        counts: bool,
        /// Compute H1 by Smith normal form and require it to vanish.
        #[arg(long)]
        h1: bool,
        /// Export vertices, edges, faces and boundary matrices.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Height of a domain and its distance table.
    Height {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        domain: PathBuf,
    },
    /// Tree distance between two factor vertices of a domain.
    Dist {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
    },
    /// Write an automorphism as a word in the presentation generators.
    Factorize {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        aut: PathBuf,
        /// Write the generator word here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce a closed path of Type A moves to a point.
    ReduceLoop {
        #[arg(long)]
        system: PathBuf,
        #[arg(long = "loop")]
        loop_file: PathBuf,
        /// Write the reduction trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run the property suite on built-in factor systems.
    Selftest {
        /// Random instances per property.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let seed = cli.seed;
    let report = match &cli.command {
        Command::Relations { system, case, out } => {
            let r = commands::relations(seed, system, case.as_deref())?;
            if let Some(path) = out {
                write_json(path, &r.to_json())?;
            }
            r
        }
        Command::Stabilizers {
            system,
            shape,
            indices,
            all,
        } => commands::stabilizers(seed, system, shape.as_deref(), indices.as_deref(), *all)?,
        Command::Fundomain { n, counts, h1, json } => {
            commands::fundomain(seed, *n, *counts, *h1, json.as_deref())?
        }
        Command::Height { system, domain } => commands::height(seed, system, domain)?,
        Command::Dist { system, domain, i, j } => commands::dist(seed, system, domain, *i, *j)?,
        Command::Factorize { system, aut, out } => {
            commands::factorize(seed, system, aut, out.as_deref())?
        }
        Command::ReduceLoop {
            system,
            loop_file,
            trace,
        } => commands::reduce_loop(seed, system, loop_file, trace.as_deref())?,
        Command::Selftest { samples } => selftest::run(seed, *samples)?,
    };
    if let Some(path) = &cli.report {
        write_json(path, &report.to_json())?;
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| run(&cli)));
    match outcome {
        Ok(Ok(report)) => {
            print!("{}", report.to_json());
            if cli.verbose {
                for r in &report.results {
                    eprintln!("{} {}", if r.pass { "pass" } else { "FAIL" }, r.id);
                }
            }
            if report.pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Ok(Err(failure)) => {
            eprintln!("fpaut: {failure}");
            ExitCode::from(failure.exit_code())
        }
        Err(_) => {
            eprintln!("fpaut: internal error: a computation panicked");
            ExitCode::from(3)
        }
    }
}
