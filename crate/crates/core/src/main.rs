use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rou_falsify::falsifier::comp_falsify;
use rou_falsify::mlanalyzer::analyze;
use rou_falsify::scenario::Scenario;
use rou_falsify::stl::{eval_qualitative, eval_robustness, parse};
use rou_falsify::trace::Trace;

#[derive(Parser)]
#[command(name = "rou-falsify", version, about = "Compositional falsification of CPS with ML perception")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunOpts {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, env = "ROU_FALSIFY_JOBS")]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an STL formula on a trace CSV. Exits 0 if satisfied, 1 if not.
    Monitor {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long, default_value_t = 0.0)]
        at: f64,
    },
    /// Approximate the scenario's classifier and extract misclassification regions.
    AnalyzeMl {
        #[command(flatten)]
        run: RunOpts,
        /// Directory for ml_report.json and samples.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the full pipeline and write the report, grids and counterexample traces.
    Falsify {
        #[command(flatten)]
        run: RunOpts,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(run: &RunOpts) -> Result<(Scenario, rayon::ThreadPool)> {
    let mut scenario =
        Scenario::load(&run.scenario).with_context(|| format!("loading {}", run.scenario.display()))?;
    if let Some(seed) = run.seed {
        scenario.seed = seed;
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(run.jobs.unwrap_or(0)).build()?;
    Ok((scenario, pool))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Monitor { trace, formula, at } => {
            let text = std::fs::read_to_string(&trace).with_context(|| format!("reading {}", trace.display()))?;
            let trace = Trace::from_csv(&text)?;
            let formula = parse(&formula)?;
            let rho = eval_robustness(&formula, &trace, at)?;
            let sat = eval_qualitative(&formula, &trace, at)?;
            println!("rho = {rho}");
            println!("{}", if sat { "sat" } else { "unsat" });
            Ok(if sat { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::AnalyzeMl { run, out } => {
            let (sc, pool) = load(&run)?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let f = sc.classifier();
            let report = pool.install(|| {
                analyze(&sc.space(), &sc.concretizer, f.as_ref(), &sc.truth, &sc.approx_config(), sc.link_radius)
            })?;
            std::fs::write(out.join("ml_report.json"), serde_json::to_string_pretty(&report)?)?;
            std::fs::write(out.join("samples.csv"), report.samples_csv())?;
            println!(
                "{} samples, error {} after {} iterations{}, {} misclassified, {} regions",
                report.samples.len(),
                report.error,
                report.iterations,
                if report.converged { "" } else { " (not converged)" },
                report.misclassified,
                report.regions.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Falsify { run, out } => {
            let (sc, pool) = load(&run)?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            match pool.install(|| comp_falsify(&sc)) {
                Ok(report) => {
                    report.write_to(&out).with_context(|| format!("writing to {}", out.display()))?;
                    let rou = report.rou.as_ref().map_or(0, |r| r.cells.len());
                    println!(
                        "ROU {rou} cells, {} abstraction counterexamples ({} confirmed), {} ML-driven counterexamples",
                        report.abstraction_counterexamples.len(),
                        report.confirmed_abstraction_counterexamples.len(),
                        report.ml_counterexamples.len()
                    );
                    if let Some(why) = &report.ml_skipped {
                        println!("ML analysis skipped: {why}");
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    e.partial.write_to(&out).with_context(|| format!("writing to {}", out.display()))?;
                    Err(e.into())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
