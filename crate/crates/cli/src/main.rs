//! `clinote`: train, evaluate and apply clinical-narrative classifiers.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numerical divergence.

mod commands;
mod config;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use clinote_core::corpus::CorpusFormat;
use clinote_core::Error;

use config::load_app_config;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for CorpusFormat {
    fn from(f: FormatArg) -> CorpusFormat {
        match f {
            FormatArg::Csv => CorpusFormat::Csv,
            FormatArg::Jsonl => CorpusFormat::Jsonl,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "clinote",
    version,
    about = "Detect a binary patient condition from short clinical narratives"
)]
struct Cli {
    /// Configuration file (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override every seed in the configuration
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Fold-level parallelism for cross-validation
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Output file or directory, depending on the command
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic corpus to --out
    Generate,
    /// Fit the pipeline on a group-wise split and save a model bundle
    Train {
        corpus: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// k-fold cross-validation; writes JSON + CSV reports
    Cv {
        corpus: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Override the configured fold count
        #[arg(long)]
        k: Option<usize>,
    },
    /// Score notes with a saved model bundle
    Predict {
        input: PathBuf,
        /// Model bundle directory written by `train`
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Corpus statistics and diagnostic reports
    Report {
        #[command(subcommand)]
        kind: ReportKind,
    },
}

#[derive(Subcommand)]
enum ReportKind {
    /// Per-class note statistics
    Stats {
        corpus: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long, default_value_t = 20)]
        top_n: usize,
        /// Skip preprocessing; count plain lowercased tokens
        #[arg(long)]
        raw_tokens: bool,
    },
    /// Bayes imbalance impact index of the configured representation
    Bi3 {
        corpus: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Train/validation score against growing training sizes
    LearningCurve {
        corpus: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Comma-separated ascending training sizes
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 1,
        Error::Divergence { .. } => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> clinote_core::Result<()> {
    let mut app = load_app_config(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        app.evaluation.seed = seed;
        if let Some(synthetic) = &mut app.synthetic {
            synthetic.seed = seed;
        }
    }
    let mut pipeline_config = app.pipeline();
    let out = cli.out.as_deref();

    match cli.command {
        Command::Generate => commands::cmd_generate(&app, out),
        Command::Train { corpus, format } => {
            commands::cmd_train(&pipeline_config, &corpus, format.map(Into::into), out)
        }
        Command::Cv { corpus, format, k } => {
            if let Some(k) = k {
                pipeline_config.evaluation.k = k;
            }
            commands::cmd_cv(
                &pipeline_config,
                &corpus,
                format.map(Into::into),
                out,
                cli.threads.max(1),
            )
        }
        Command::Predict {
            input,
            model,
            format,
        } => commands::cmd_predict(&model, &input, format.map(Into::into), out),
        Command::Report { kind } => match kind {
            ReportKind::Stats {
                corpus,
                format,
                top_n,
                raw_tokens,
            } => commands::cmd_report_stats(
                &app,
                &corpus,
                format.map(Into::into),
                top_n,
                raw_tokens,
                out,
            ),
            ReportKind::Bi3 { corpus, format } => {
                commands::cmd_report_bi3(&app, &corpus, format.map(Into::into), out)
            }
            ReportKind::LearningCurve {
                corpus,
                format,
                sizes,
            } => commands::cmd_report_learning_curve(
                &pipeline_config,
                &corpus,
                format.map(Into::into),
                &sizes,
                out,
            ),
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not failures.
            if err.use_stderr() {
                eprint!("{err}");
                return ExitCode::from(1);
            }
            print!("{err}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
