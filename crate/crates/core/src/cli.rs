//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation failure, 2 bad input or
//! configuration, 3 training divergence. Machine-readable output goes to
//! stdout; diagnostics go to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{run_bench, BenchConfig};
use crate::checkpoint::Checkpoint;
use crate::error::{DybmError, Result};
use crate::generator::{eval_prediction, rollout_from, RolloutConfig, RolloutMode};
use crate::io::{read_series_file, write_series, RunConfig};
use crate::json::format_real;
use crate::learning::{train_with, TrainMode};
use crate::oracle::expand::kernel_rows;
use crate::oracle::validate::{run_validation, Fault, ValidationOptions, DEFAULT_SEED};
use crate::params::Parameters;
use crate::slice::TimeSlice;
use crate::trace::TraceState;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dybm", version, about = "Dynamic Boltzmann machine for binary time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Online,
    FullBatch,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenModeArg {
    Sample,
    Argmax,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FaultArg {
    ScaledAlphaRecursion,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model and write a checkpoint; metrics stream to stdout as JSON lines.
    Train {
        /// Run configuration (JSON). Defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Training series (CSV); repeat for several series.
        #[arg(long = "data", required = true)]
        data: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Seed for the per-epoch series order in online mode.
        #[arg(long)]
        seed: Option<u64>,
        /// Store the trace state reached at the end of the last series.
        #[arg(long)]
        save_state: bool,
    },
    /// Score a model on a series.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Generate a series as CSV on stdout.
    Generate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 32)]
        horizon: usize,
        #[arg(long, value_enum, default_value = "argmax")]
        mode: GenModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Series absorbed before generating.
        #[arg(long)]
        primer: Option<PathBuf>,
        /// Start from the trace state stored in the checkpoint instead of zeros.
        #[arg(long)]
        from_state: bool,
    },
    /// Run the oracle suite; exit 1 if any property fails.
    Validate {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
    /// Weight kernel curves of one synapse as CSV.
    KernelDump {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        pre: usize,
        #[arg(long)]
        post: usize,
        #[arg(long, default_value_t = 20)]
        max_delta: usize,
    },
    /// Per-synapse update time and storage audit across network sizes.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = vec![8, 32, 128])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 4)]
        fan_in: usize,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn exit_code(e: &DybmError) -> i32 {
    match e {
        DybmError::Divergence { .. } => EXIT_DIVERGED,
        _ => EXIT_BAD_INPUT,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Train {
            config,
            data,
            out: out_path,
            epochs,
            learning_rate,
            mode,
            seed,
            save_state,
        } => {
            let run_cfg = match config {
                Some(p) => RunConfig::load(p)?,
                None => RunConfig::default(),
            };
            let dataset = data.iter().map(read_series_file).collect::<Result<Vec<_>>>()?;
            let width = dataset[0][0].len();
            if let Some((i, _)) = dataset.iter().enumerate().find(|(_, s)| s[0].len() != width) {
                return Err(DybmError::Data(format!(
                    "{} has {} units, {} has {width}",
                    data[i].display(),
                    dataset[i][0].len(),
                    data[0].display()
                )));
            }
            let model_cfg = run_cfg.model_config(width)?;
            let mut trainer = run_cfg.trainer_config();
            if let Some(e) = epochs {
                trainer.epochs = e;
            }
            if let Some(lr) = learning_rate {
                trainer.learning_rate = lr;
            }
            if let Some(m) = mode {
                trainer.mode = match m {
                    ModeArg::Online => TrainMode::Online,
                    ModeArg::FullBatch => TrainMode::FullBatch,
                };
            }
            trainer.shuffle_seed = seed;

            let init = Parameters::zeros(&model_cfg);
            let mut write_err = None;
            let (params, metrics) = train_with(&init, &model_cfg, &dataset, &trainer, |rec| {
                let line = serde_json::to_string(rec).expect("metrics serialize");
                if let Err(e) = writeln!(out, "{line}") {
                    write_err.get_or_insert(e);
                }
            })?;
            if let Some(e) = write_err {
                return Err(e.into());
            }
            let state = if save_state {
                let mut st = TraceState::new(&model_cfg);
                for slice in dataset.last().expect("non-empty dataset") {
                    st.advance(&model_cfg, slice)?;
                }
                Some(st)
            } else {
                None
            };
            Checkpoint::new(model_cfg, params, state).save(&out_path)?;
            writeln!(
                err,
                "trained {} epochs; final log-likelihood {:.6}; wrote {}",
                trainer.epochs,
                metrics.final_log_likelihood,
                out_path.display()
            )?;
            Ok(EXIT_OK)
        }

        Command::Eval { model, data } => {
            let ck = Checkpoint::load(model)?;
            let series = read_series_file(&data)?;
            check_width(&ck, &series[0])?;
            let metrics = eval_prediction(&ck.params, &ck.config, &series)?;
            writeln!(out, "{}", serde_json::to_string(&metrics)?)?;
            Ok(EXIT_OK)
        }

        Command::Generate {
            model,
            horizon,
            mode,
            seed,
            primer,
            from_state,
        } => {
            let ck = Checkpoint::load(model)?;
            let primer = match primer {
                Some(p) => {
                    let s = read_series_file(p)?;
                    check_width(&ck, &s[0])?;
                    s
                }
                None => Vec::new(),
            };
            let start = if from_state {
                ck.state
                    .clone()
                    .ok_or_else(|| DybmError::InvalidArgument("checkpoint carries no trace state".into()))?
            } else {
                TraceState::new(&ck.config)
            };
            let cfg = RolloutConfig {
                horizon,
                mode: match mode {
                    GenModeArg::Sample => RolloutMode::Sample,
                    GenModeArg::Argmax => RolloutMode::Argmax,
                },
                seed,
                primer,
            };
            let series = rollout_from(&ck.params, &ck.config, start, &cfg)?;
            write_series(out, ck.config.n_units(), &series)?;
            Ok(EXIT_OK)
        }

        Command::Validate { seed, inject_fault } => {
            let opts = ValidationOptions {
                seed,
                fault: inject_fault.map(|FaultArg::ScaledAlphaRecursion| Fault::ScaledAlphaRecursion),
                ..ValidationOptions::default()
            };
            let report = run_validation(&opts);
            for check in &report.checks {
                writeln!(out, "{check}")?;
            }
            let passed = report.all_passed();
            writeln!(
                out,
                "{} seed={} checks={} wall_ms={:.0}",
                if passed { "ALL PASS" } else { "FAILED" },
                report.seed,
                report.checks.len(),
                report.wall_ms
            )?;
            Ok(if passed { EXIT_OK } else { EXIT_VALIDATION_FAILED })
        }

        Command::KernelDump {
            model,
            pre,
            post,
            max_delta,
        } => {
            let ck = Checkpoint::load(model)?;
            let rows = kernel_rows(&ck.params, &ck.config, pre, post, max_delta)?;
            writeln!(out, "delta,w_hat_forward,w_hat_backward,w")?;
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{}",
                    r.delta,
                    format_real(r.forward),
                    format_real(r.backward),
                    format_real(r.total)
                )?;
            }
            Ok(EXIT_OK)
        }

        Command::Bench {
            sizes,
            fan_in,
            steps,
            seed,
        } => {
            let report = run_bench(&BenchConfig {
                sizes,
                fan_in,
                steps,
                seed,
                ..BenchConfig::default()
            })?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            Ok(EXIT_OK)
        }
    }
}

fn check_width(ck: &Checkpoint, slice: &TimeSlice) -> Result<()> {
    if slice.len() != ck.config.n_units() {
        return Err(DybmError::Data(format!(
            "model has {} units but the data has {}",
            ck.config.n_units(),
            slice.len()
        )));
    }
    Ok(())
}
