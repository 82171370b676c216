//! `santa`: generate instances, solve them, verify solutions and compute
//! exact ground truth. Exit codes: 0 ok, 1 violation or stage failure,
//! 2 parse or usage error, 3 oracle budget exceeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use santa_core::generate::{hypergraph_grouped, hypergraph_regular, santa_instance, OracleKind};
use santa_core::io::{read_instance, read_json, to_json_bytes, Instance, SolutionFile};
use santa_core::pipeline::{oracle_solution, solve_instance, verify_solution, OracleChoice, Profile, SolveOptions};
use santa_core::{Error, RngSeed};

#[derive(Parser)]
#[command(name = "santa", version, about = "Max-min fair allocation and relaxed hypergraph matching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    SantaLinear,
    SantaCoverage,
    SantaBudgeted,
    SantaMatroid,
    HypergraphRegular,
    HypergraphGrouped,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Theory,
    Practical,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    SantaOpt,
    MinAlpha,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance.
    Generate {
        #[arg(value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 4)]
        players: usize,
        #[arg(long, default_value_t = 8)]
        resources: usize,
        /// Probability that a player may use a resource besides its home.
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, default_value_t = 4)]
        ell: usize,
        #[arg(long, default_value_t = 4)]
        max_size: usize,
        #[arg(long, default_value_t = 2)]
        group_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the pipeline and write the solution and report.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "practical")]
        profile: ProfileArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        gamma: Option<u64>,
        #[arg(long)]
        ell: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        slack: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_rounds: usize,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        /// Add wall-clock stage timings to the report.
        #[arg(long)]
        timings: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check a solution against its instance.
    Verify { instance: PathBuf, solution: PathBuf },
    /// Exact optimum or exact minimum alpha with a witness.
    Oracle {
        instance: PathBuf,
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{}", String::from_utf8_lossy(bytes));
            Ok(())
        }
    }
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Structural(_) => 2,
        Error::Budget(_) => 3,
        _ => 1,
    }
}

fn load(path: &Path) -> Result<Instance, u8> {
    read_instance(path).map_err(|e| {
        eprintln!("error: {e}");
        exit_for(&e)
    })
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Generate { kind, players, resources, density, ell, max_size, group_size, seed, out } => {
            let seed = RngSeed(seed);
            let santa = |k| santa_instance(k, players, resources, density, seed).map(Instance::Santa);
            let made = match kind {
                Kind::SantaLinear => santa(OracleKind::Linear),
                Kind::SantaCoverage => santa(OracleKind::Coverage),
                Kind::SantaBudgeted => santa(OracleKind::BudgetedAdditive),
                Kind::SantaMatroid => santa(OracleKind::MatroidRank),
                Kind::HypergraphRegular => hypergraph_regular(players, ell, max_size, seed).map(Instance::Hypergraph),
                Kind::HypergraphGrouped => {
                    let groups = players.div_ceil(group_size.max(1));
                    hypergraph_grouped(groups, group_size, ell, max_size, resources, seed).map(Instance::Hypergraph)
                }
            };
            match made {
                Ok(inst) => {
                    emit(out.as_deref(), &to_json_bytes(&inst.to_file())?)?;
                    Ok(0)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(2)
                }
            }
        }
        Command::Solve { instance, profile, seed, gamma, ell, slack, tol, max_rounds, restarts, timings, out, report } => {
            let inst = match load(&instance) {
                Ok(i) => i,
                Err(code) => return Ok(code),
            };
            let opts = SolveOptions {
                profile: match profile {
                    ProfileArg::Theory => Profile::Theory,
                    ProfileArg::Practical => Profile::Practical,
                },
                seed: RngSeed(seed),
                gamma,
                ell,
                slack,
                tol,
                max_rounds,
                restarts,
                timings,
                ..SolveOptions::default()
            };
            match solve_instance(&inst, &opts) {
                Ok((sol, rep)) => {
                    emit(out.as_deref(), &to_json_bytes(&sol)?)?;
                    match report {
                        Some(p) => emit(Some(&p), &to_json_bytes(&rep)?)?,
                        None => eprint!("{}", String::from_utf8_lossy(&to_json_bytes(&rep)?)),
                    }
                    Ok(0)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(1)
                }
            }
        }
        Command::Verify { instance, solution } => {
            let inst = match load(&instance) {
                Ok(i) => i,
                Err(code) => return Ok(code),
            };
            let sol: SolutionFile = match read_json(&solution) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(2);
                }
            };
            match verify_solution(&inst, &sol) {
                Ok(problems) if problems.is_empty() => {
                    println!("ok");
                    Ok(0)
                }
                Ok(problems) => {
                    for p in &problems {
                        println!("violation: {p}");
                    }
                    Ok(1)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(exit_for(&e))
                }
            }
        }
        Command::Oracle { instance, which, out } => {
            let inst = match load(&instance) {
                Ok(i) => i,
                Err(code) => return Ok(code),
            };
            let which = match which {
                Which::SantaOpt => OracleChoice::SantaOpt,
                Which::MinAlpha => OracleChoice::MinAlpha,
            };
            match oracle_solution(&inst, which) {
                Ok(sol) => {
                    emit(out.as_deref(), &to_json_bytes(&sol)?)?;
                    Ok(0)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(match e {
                        Error::Budget(_) => 3,
                        Error::Contract(_) => 2,
                        other => exit_for(&other),
                    })
                }
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SANTA_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
