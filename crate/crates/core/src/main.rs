use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use har::eval::{compare_runs, RunReport};
use har::har::{AttentionMode, Granularity, Variant};
use har::pipeline::{self, Paths, RunConfig, Workspace};
use har::{HarError, Result};

#[derive(Parser, Debug)]
#[command(name = "har", version, about = "History attentive dense retrieval for conversational QA")]
struct Cli {
    /// JSON config merged over the selected profile
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Base profile when no config file is given (desk, paper-defaults)
    #[arg(long, global = true)]
    profile: Option<String>,

    /// Put data, store, checkpoints and reports under this directory
    #[arg(long, global = true)]
    root: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for encoding and search
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Overwrite existing outputs
    #[arg(long, global = true)]
    force: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the synthetic topic-return corpus
    GenData,
    /// Encode passages into the vector store
    #[command(alias = "build-index")]
    EncodePassages,
    /// Train one variant and keep the best checkpoint
    Train(VariantArgs),
    /// Evaluate a trained variant on a split
    Eval {
        #[command(flatten)]
        variant: VariantArgs,
        #[arg(long, default_value = "test")]
        split: String,
    },
    /// Rank passages for one turn of a dialog
    Retrieve {
        #[command(flatten)]
        variant: VariantArgs,
        /// Dialog JSONL file
        #[arg(long)]
        dialogs: PathBuf,
        /// Defaults to the first dialog in the file
        #[arg(long)]
        dialog_id: Option<String>,
        /// 1-based turn index
        #[arg(long, short)]
        k: usize,
    },
    /// Train and evaluate the full ablation matrix
    Ablate {
        #[arg(long)]
        train_missing: bool,
        #[arg(long, default_value = "test")]
        split: String,
    },
    /// Per-metric and per-query differences between two reports (A - B)
    Compare { a: PathBuf, b: PathBuf },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModeArg {
    Fine,
    Coarse,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum AttentionArg {
    Soft,
    AlphaOne,
    Uniform,
}

#[derive(Args, Debug, Clone, Copy)]
struct VariantArgs {
    #[arg(long, value_enum, default_value = "fine")]
    mode: ModeArg,
    #[arg(long)]
    no_posseg: bool,
    #[arg(long, value_enum, default_value = "soft")]
    attention_mode: AttentionArg,
    /// Restrict the batch to the current turn's row
    #[arg(long)]
    current_only: bool,
}

impl VariantArgs {
    fn variant(self) -> Variant {
        let mode = match self.mode {
            ModeArg::Fine => Granularity::Fine,
            ModeArg::Coarse => Granularity::Coarse,
        };
        let attention = match self.attention_mode {
            AttentionArg::Soft => AttentionMode::Soft,
            AttentionArg::AlphaOne => AttentionMode::AlphaOne,
            AttentionArg::Uniform => AttentionMode::Uniform,
        };
        let v = Variant::new(mode, !self.no_posseg, attention);
        if self.current_only {
            v.current_only()
        } else {
            v
        }
    }
}

fn run_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match (&cli.config, &cli.profile) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(name)) => RunConfig::profile(name)?,
        (None, None) => RunConfig::desk(),
    };
    if let Some(seed) = cli.seed {
        config = config.with_seed(seed);
    }
    if let Some(root) = &cli.root {
        config.paths = Paths::under(root);
    }
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }
    config.validate()?;
    Ok(config)
}

fn print_text(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(HarError::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        }),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    print_text(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn run(cli: Cli) -> Result<()> {
    let config = run_config(&cli)?;
    if let Some(n) = config.threads {
        // only fails if a pool was already installed
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::GenData => print_json(&pipeline::cmd_gen_data(&config, cli.force)?),
        Command::EncodePassages => print_json(&pipeline::cmd_encode_passages(&config, cli.force)?),
        Command::Train(v) => {
            let ws = Workspace::open(&config)?;
            let (_, summary) = pipeline::cmd_train(&ws, v.variant())?;
            print_json(&summary)
        }
        Command::Eval { variant, split } => {
            let ws = Workspace::open(&config)?;
            let (report, path) = pipeline::cmd_eval(&ws, variant.variant(), &split)?;
            eprintln!("wrote {}", path.display());
            print_json(&serde_json::json!({
                "variant": report.variant,
                "config_hash": report.config_hash,
                "mrr": report.mrr,
                "recall": report.recall,
            }))
        }
        Command::Retrieve {
            variant,
            dialogs,
            dialog_id,
            k,
        } => {
            let ws = Workspace::open(&config)?;
            let out = pipeline::cmd_retrieve(&ws, variant.variant(), &dialogs, dialog_id.as_deref(), k)?;
            print_json(&out)
        }
        Command::Ablate { train_missing, split } => {
            let ws = Workspace::open(&config)?;
            let (table, _) = pipeline::cmd_ablate(&ws, train_missing, &split)?;
            print_text(&table.render())
        }
        Command::Compare { a, b } => {
            let delta = compare_runs(&RunReport::load(&a)?, &RunReport::load(&b)?)?;
            print_json(&delta)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("har").chain(args.iter().copied()))
    }

    #[test]
    fn variant_flags_set_label() {
        let cli = parse(&["eval", "--mode", "coarse", "--no-posseg"]).unwrap();
        match cli.command {
            Command::Eval { variant, split } => {
                assert_eq!(variant.variant().label(), "coarse,no-posseg,soft");
                assert_eq!(split, "test");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let err = parse(&["eval", "--bogus"]).unwrap_err();
        assert_eq!(err.kind(), clap::error::ErrorKind::UnknownArgument);
    }

    #[test]
    fn build_index_alias() {
        let cli = parse(&["build-index", "--force"]).unwrap();
        assert!(matches!(cli.command, Command::EncodePassages));
        assert!(cli.force);
    }

    #[test]
    fn defaults_are_fine_posseg_soft() {
        let cli = parse(&["train"]).unwrap();
        match cli.command {
            Command::Train(v) => assert_eq!(v.variant().label(), "fine,posseg,soft"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn current_only_label() {
        let cli = parse(&["train", "--mode", "coarse", "--current-only"]).unwrap();
        match cli.command {
            Command::Train(v) => assert_eq!(v.variant().label(), "coarse,posseg,soft,current-only"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
