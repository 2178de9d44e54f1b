//! `conc`: experiments and evaluators for dependent-data concentration
//! bounds.
//!
//! Every subcommand reads a JSON config (see the guide's experiments
//! chapter and the README for schemas) and writes CSV or JSON to --out or
//! stdout. Exit codes: 0 success, 2 config/validation error, 3 infeasible
//! parameters, 4 i/o error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use conc::bounds::{theorem_bound, BoundInputs};
use conc::error::{Error, Result};
use conc::harness::{
    emit_results, fmt_float17, run_beta_profile, run_concentration_experiment,
    run_erm_experiment, run_gamma_profile, BetaProfileConfig, ConcentrationConfig, ErmConfig,
    GammaProfileConfig, GeneratorConfig, OutputFormat, SimulateConfig,
};
use conc::mixing::{simulate_ar1, simulate_markov_chain};

#[derive(Parser)]
#[command(
    name = "conc",
    about = "Concentration bounds and experiments for dependent empirical processes",
    version
)]
struct Cli {
    /// JSON configuration document for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed; overrides the config's `seed` field.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for replication-level parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output format for tabular results.
    #[arg(long, global = true, default_value = "csv")]
    format: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a Markov-chain or AR(1) trajectory.
    Simulate,
    /// Exact beta-mixing coefficients of a finite-state chain (CSV `l,beta`).
    Beta,
    /// Talagrand functionals of a finite metric space.
    Gamma,
    /// Evaluate the concentration inequality for a set of bound inputs.
    Bound,
    /// ERM oracle-inequality experiment on AR(1)-driven perceptron data.
    Erm,
    /// Concentration-dominance experiment on a Markov chain.
    Concentration,
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) =
            rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()
        {
            eprintln!("conc: failed to configure {threads} threads: {e}");
            std::process::exit(2);
        }
    }
    if let Err(err) = run(&cli) {
        eprintln!("conc: {err}");
        std::process::exit(err.exit_code());
    }
}

fn run(cli: &Cli) -> Result<()> {
    let format: OutputFormat = cli.format.parse()?;
    match cli.command {
        Command::Simulate => {
            let cfg: SimulateConfig = load_config(cli)?;
            let seed = cli.seed.or(cfg.seed).unwrap_or(0);
            let text = match &cfg.generator {
                GeneratorConfig::Markov { spec } => {
                    let traj = simulate_markov_chain(spec, cfg.t, seed)?;
                    match format {
                        OutputFormat::Csv => {
                            let mut out = String::from("t,state\n");
                            for (t, state) in traj.values().iter().enumerate() {
                                let _ = writeln!(out, "{},{}", t + 1, state);
                            }
                            out
                        }
                        OutputFormat::Json => serde_json::to_string_pretty(traj.values())
                            .map_err(|e| Error::Invalid(e.to_string()))?,
                    }
                }
                GeneratorConfig::Ar1 { phi, sigma, d } => {
                    let traj = simulate_ar1(*phi, *sigma, *d, cfg.t, seed)?;
                    match format {
                        OutputFormat::Csv => {
                            let mut out = String::from("t");
                            for j in 0..*d {
                                let _ = write!(out, ",x{j}");
                            }
                            out.push('\n');
                            for (t, x) in traj.values().iter().enumerate() {
                                let _ = write!(out, "{}", t + 1);
                                for v in x {
                                    let _ = write!(out, ",{}", fmt_float17(*v));
                                }
                                out.push('\n');
                            }
                            out
                        }
                        OutputFormat::Json => serde_json::to_string_pretty(traj.values())
                            .map_err(|e| Error::Invalid(e.to_string()))?,
                    }
                }
            };
            write_output(cli.out.as_deref(), &text)
        }
        Command::Beta => {
            let cfg: BetaProfileConfig = load_config(cli)?;
            let rows = run_beta_profile(&cfg);
            let text = match format {
                OutputFormat::Csv => {
                    let mut out = String::from("l,beta\n");
                    for (l, beta) in rows {
                        let _ = writeln!(out, "{l},{}", fmt_float17(beta));
                    }
                    out
                }
                OutputFormat::Json => {
                    let objects: Vec<serde_json::Value> = rows
                        .iter()
                        .map(|(l, beta)| serde_json::json!({"l": l, "beta": beta}))
                        .collect();
                    serde_json::to_string_pretty(&objects)
                        .map_err(|e| Error::Invalid(e.to_string()))?
                }
            };
            write_output(cli.out.as_deref(), &text)
        }
        Command::Gamma => {
            let cfg: GammaProfileConfig = load_config(cli)?;
            let rows = run_gamma_profile(&cfg)?;
            let text = match format {
                OutputFormat::Csv => {
                    let mut out = String::from("alpha,gamma_greedy,entropy_bound,gamma_exact\n");
                    for row in rows {
                        let exact =
                            row.gamma_exact.map(fmt_float17).unwrap_or_default();
                        let _ = writeln!(
                            out,
                            "{},{},{},{exact}",
                            fmt_float17(row.alpha),
                            fmt_float17(row.gamma_greedy),
                            fmt_float17(row.entropy_bound)
                        );
                    }
                    out
                }
                OutputFormat::Json => {
                    let objects: Vec<serde_json::Value> = rows
                        .iter()
                        .map(|row| {
                            serde_json::json!({
                                "alpha": row.alpha,
                                "gamma_greedy": row.gamma_greedy,
                                "entropy_bound": row.entropy_bound,
                                "gamma_exact": row.gamma_exact,
                            })
                        })
                        .collect();
                    serde_json::to_string_pretty(&objects)
                        .map_err(|e| Error::Invalid(e.to_string()))?
                }
            };
            write_output(cli.out.as_deref(), &text)
        }
        Command::Bound => {
            let inputs: BoundInputs = load_config(cli)?;
            let result = theorem_bound(&inputs)?;
            let text = serde_json::to_string_pretty(&result)
                .map_err(|e| Error::Invalid(e.to_string()))?;
            write_output(cli.out.as_deref(), &text)
        }
        Command::Erm => {
            let cfg: ErmConfig = load_config(cli)?;
            let seed = cli.seed.or(cfg.seed).unwrap_or(0);
            let records = run_erm_experiment(&cfg, seed)?;
            emit_results(&records, format, cli.out.as_deref())
        }
        Command::Concentration => {
            let cfg: ConcentrationConfig = load_config(cli)?;
            let seed = cli.seed.or(cfg.seed).unwrap_or(0);
            let records = run_concentration_experiment(&cfg, seed)?;
            emit_results(&records, format, cli.out.as_deref())
        }
    }
}

fn load_config<T: serde::de::DeserializeOwned>(cli: &Cli) -> Result<T> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Invalid("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Invalid(format!("config {}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => {
            let mut owned = text.to_string();
            if !owned.ends_with('\n') {
                owned.push('\n');
            }
            std::fs::write(path, owned).map_err(|e| Error::io(path, e))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

