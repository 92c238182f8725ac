use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boa::cost::GeoBoundingBox;
use boa::genbench::{gen_synthetic, ingest_pickups_csv, HourWindow, IngestOptions, InstanceDoc, Provenance, SyntheticConfig};
use boa::harness::{
    evaluate, oracle_check, run_real, run_sweep, rt_seed, self_guided_threshold, write_real_csv, write_sweep_csv,
    Algorithm, ArrivalModel, Evaluation, RealOptions, SweepSpec,
};
use boa::{Error, Result};
use chrono::NaiveDate;
use clap::{Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "boa", version, about = "Budget-aware online task assignment experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance from a JSON config.
    Gen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one algorithm on an instance and write its trace.
    Run {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        algo: Algorithm,
        #[arg(long)]
        order: ArrivalModel,
        /// Seed of Greedy-RT's threshold draw.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instance whose exact optimum sets Greedy-OT's threshold; defaults
        /// to the instance itself.
        #[arg(long)]
        ot_history: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep one parameter; writes a CSV plus a `.spec.json` sidecar.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Add wall-clock columns (output is then no longer reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Cross-check the solvers and bounds on small random instances.
    OracleCheck {
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 6)]
        max_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the full report, including failing instances, as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Turn a pickup CSV into workers.
    Ingest {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "40.5998,-74.0701,40.8998,-73.7701")]
        bbox: String,
        /// Hours of the day, e.g. `0-12`.
        #[arg(long, default_value = "0-12")]
        window: String,
        /// Keep one date only (YYYY-MM-DD).
        #[arg(long)]
        date: Option<NaiveDate>,
        /// Skip malformed rows instead of failing.
        #[arg(long)]
        lenient: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Real-data table: pickups as workers, seeded tasks, every algorithm.
    Real {
        #[arg(long)]
        pickups: PathBuf,
        #[arg(long)]
        history: PathBuf,
        /// Total budget in km.
        #[arg(long)]
        budget: f64,
        #[arg(long)]
        tasks: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "40.5998,-74.0701,40.8998,-73.7701")]
        bbox: String,
        #[arg(long, default_value = "0-12")]
        window: String,
        #[arg(long)]
        lenient: bool,
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct RunOutput<'a> {
    instance: &'a Path,
    order: ArrivalModel,
    seed: u64,
    #[serde(flatten)]
    evaluation: Evaluation,
}

#[derive(Serialize)]
struct IngestOutput<'a> {
    source: &'a Path,
    bbox: GeoBoundingBox,
    window: HourWindow,
    #[serde(flatten)]
    ingested: boa::genbench::Ingested,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.spec.json"))
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Gen { config, out } => {
            let cfg: SyntheticConfig = serde_json::from_str(&fs::read_to_string(&config)?)?;
            let inst = gen_synthetic(&cfg)?;
            println!("{} workers, {} tasks, c_max {}", inst.workers.len(), inst.tasks().len(), inst.c_max);
            InstanceDoc::new(inst, Provenance::Synthetic { config: cfg }).write(&out)
        }
        Command::Run {
            instance,
            algo,
            order,
            seed,
            ot_history,
            out,
        } => {
            let (inst, stream) = order.arrange(&InstanceDoc::read(&instance)?.instance);
            let tau = match (algo, ot_history) {
                (Algorithm::GreedyOt, Some(h)) => Some(self_guided_threshold(&order.arrange(&InstanceDoc::read(&h)?.instance).0)?),
                (Algorithm::GreedyOt, None) => Some(self_guided_threshold(&inst)?),
                _ => None,
            };
            let evaluation = evaluate(algo, &inst, &stream, rt_seed(seed), tau)?;
            println!("{algo}: size {} used budget {}", evaluation.size, evaluation.used_budget);
            write_json(
                &out,
                &RunOutput {
                    instance: &instance,
                    order,
                    seed,
                    evaluation,
                },
            )
        }
        Command::Sweep { spec, out, timing } => {
            let spec: SweepSpec = serde_json::from_str(&fs::read_to_string(&spec)?)?;
            let rows = run_sweep(&spec)?;
            write_sweep_csv(BufWriter::new(fs::File::create(&out)?), &rows, timing)?;
            write_json(&sidecar_path(&out), &spec)?;
            let failed: usize = rows.iter().map(|r| r.failed).sum();
            println!("{} rows, {failed} failed runs", rows.len());
            Ok(())
        }
        Command::OracleCheck {
            trials,
            max_size,
            seed,
            report,
        } => {
            let r = oracle_check(trials, max_size, seed)?;
            if let Some(path) = report {
                write_json(&path, &r)?;
            }
            println!(
                "{} trials, {} violations, overlap checked on {}, max algorithm-1 gap {} ({} trials)",
                r.trials,
                r.violations.len(),
                r.overlap_checked,
                r.max_alg1_gap,
                r.alg1_gap_trials
            );
            println!(
                "toy: opt {}/{} greedy {}/{} grades {:?} expectation {} ot {}/{}",
                r.toy.opt_size,
                r.toy.opt_cost,
                r.toy.greedy_size,
                r.toy.greedy_cost,
                r.toy.grade_sizes,
                r.toy.rt_expectation,
                r.toy.ot_size,
                r.toy.ot_cost
            );
            match r.violations.first() {
                None => Ok(()),
                Some(v) => {
                    eprintln!("trial {} failed {:?}: {}", v.trial, v.check, v.detail);
                    eprintln!("{}", serde_json::to_string(&v.instance)?);
                    Err(Error::Validation(format!("{} oracle violations", r.violations.len())))
                }
            }
        }
        Command::Ingest {
            csv,
            bbox,
            window,
            date,
            lenient,
            out,
        } => {
            let opts = IngestOptions {
                date,
                lenient,
                ..IngestOptions::new(GeoBoundingBox::parse(&bbox)?, HourWindow::parse(&window)?)
            };
            let ingested = ingest_pickups_csv(&csv, &opts)?;
            println!(
                "{} workers, {} filtered, {} malformed",
                ingested.workers.len(),
                ingested.filtered,
                ingested.malformed
            );
            write_json(
                &out,
                &IngestOutput {
                    source: &csv,
                    bbox: opts.bbox,
                    window: opts.window,
                    ingested,
                },
            )
        }
        Command::Real {
            pickups,
            history,
            budget,
            tasks,
            seed,
            bbox,
            window,
            lenient,
            timing,
            out,
        } => {
            let opts = RealOptions {
                bbox: GeoBoundingBox::parse(&bbox)?,
                window: HourWindow::parse(&window)?,
                lenient,
                ..RealOptions::new(budget, tasks, seed)
            };
            let table = run_real(&pickups, &history, &opts)?;
            for r in &table.rows {
                println!("{:<14} size {:>8} used {:.4}", r.algorithm.name(), r.size, r.used_budget);
            }
            write_real_csv(BufWriter::new(fs::File::create(&out)?), &table, timing)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
