//! Command-line front end: train, eval, predict, robustness, personalize and
//! synth subcommands over CSV recordings.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error
//! (including model/data configuration mismatches), 3 model or report file I/O.

pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hdwear_core::synthetic::SignalSpec;

pub use config::{Mode, Overrides, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "hdwear",
    version,
    about = "Hyperdimensional classifiers for wearable sensor data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and write it with a training report
    Train(Overrides),
    /// Score a model on a split and print the confusion matrix
    Eval(Overrides),
    /// Print one predicted label per window
    Predict(Overrides),
    /// Bit-flip fault injection on the 1-bit quantized model
    Robustness(Overrides),
    /// General versus personalized models for every subject
    Personalize(Overrides),
    /// Write a synthetic multi-subject recording and its schema
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// schema path [default: <out>.schema]
    #[arg(long)]
    pub schema_out: Option<PathBuf>,
    #[arg(long, default_value_t = SignalSpec::default().subjects)]
    pub subjects: usize,
    #[arg(long, default_value_t = SignalSpec::default().classes)]
    pub classes: usize,
    #[arg(long, default_value_t = SignalSpec::default().channels)]
    pub channels: usize,
    /// activity bouts per class and subject
    #[arg(long, default_value_t = SignalSpec::default().bouts_per_class)]
    pub bouts: usize,
    #[arg(long, default_value_t = SignalSpec::default().bout_samples)]
    pub bout_samples: usize,
    #[arg(long, default_value_t = SignalSpec::default().sample_rate_hz)]
    pub sample_rate: f64,
    #[arg(long, default_value_t = SignalSpec::default().noise_sd)]
    pub noise: f64,
    #[arg(long, default_value_t = SignalSpec::default().subject_bias)]
    pub subject_bias: f64,
    #[arg(long, default_value_t = SignalSpec::default().seed)]
    pub seed: u64,
}

impl SynthArgs {
    pub fn spec(&self) -> SignalSpec {
        SignalSpec {
            subjects: self.subjects,
            classes: self.classes,
            channels: self.channels,
            bouts_per_class: self.bouts,
            bout_samples: self.bout_samples,
            sample_rate_hz: self.sample_rate,
            noise_sd: self.noise,
            subject_bias: self.subject_bias,
            seed: self.seed,
        }
    }
}

fn execute(command: Command, env_seed: Option<&str>, out: &mut dyn Write) -> Result<(), CliError> {
    let print = |out: &mut dyn Write, text: &dyn std::fmt::Display| {
        writeln!(out, "{text}").map_err(|source| CliError::Output {
            path: PathBuf::from("<stdout>"),
            source,
        })
    };
    let report_note = |out: &mut dyn Write, path: &Option<PathBuf>| match path {
        Some(p) => print(out, &format!("report          {}", p.display())),
        None => Ok(()),
    };
    match command {
        Command::Train(flags) => {
            let r = commands::cmd_train(&RunConfig::resolve("train", flags, env_seed)?)?;
            print(out, &r)?;
            report_note(out, &r.report_path)
        }
        Command::Eval(flags) => {
            let r = commands::cmd_eval(&RunConfig::resolve("eval", flags, env_seed)?)?;
            print(out, &r.report)?;
            report_note(out, &r.report_path)
        }
        Command::Predict(flags) => {
            commands::cmd_predict(&RunConfig::resolve("predict", flags, env_seed)?, out)?;
            Ok(())
        }
        Command::Robustness(flags) => {
            let r = commands::cmd_robustness(&RunConfig::resolve("robustness", flags, env_seed)?)?;
            print(out, &r.report)?;
            report_note(out, &r.report_path)
        }
        Command::Personalize(flags) => {
            let r = commands::cmd_personalize(&RunConfig::resolve("personalize", flags, env_seed)?)?;
            print(out, &r)?;
            report_note(out, &r.report_path)
        }
        Command::Synth(args) => {
            let schema = args
                .schema_out
                .clone()
                .unwrap_or_else(|| args.out.with_extension("schema"));
            let rows = commands::cmd_synth(&args.spec(), &args.out, &schema)?;
            print(
                out,
                &format!(
                    "wrote {rows} rows to {} and schema {}",
                    args.out.display(),
                    schema.display()
                ),
            )
        }
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I, env_seed: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                error::EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(cli.command, env_seed, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
