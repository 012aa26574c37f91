use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use subtab_core::corpus::{load_corpus, Example};
use subtab_core::fixtures;

mod cmd;

#[derive(Parser)]
#[command(name = "subtab", version, about = "Windowed subtable selection for table QA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run subtable selection over a corpus.
    Select(cmd::select::SelectArgs),
    /// Generate selector training pairs.
    Datagen(cmd::datagen::DatagenArgs),
    /// Score selected subtables against a corpus.
    Eval(cmd::eval::EvalArgs),
    /// Dump the windows of one record.
    Windows(cmd::windows::WindowsArgs),
}

/// Where the examples come from.
#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// JSON-lines corpus file.
    #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
    pub corpus: Option<PathBuf>,
    /// Bundled fixture: dance-scores, war-losses or engines.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Skip malformed corpus lines instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

impl InputArgs {
    pub fn load(&self) -> Result<Vec<Example>> {
        if let Some(name) = &self.fixture {
            return match fixtures::by_name(name) {
                Some(ex) => Ok(vec![ex]),
                None => bail!("unknown fixture '{name}' (expected dance-scores, war-losses or engines)"),
            };
        }
        let path = self.corpus.as_ref().expect("clap enforces corpus or fixture");
        let corpus = load_corpus(path, self.lenient).with_context(|| format!("loading {}", path.display()))?;
        for (line, message) in &corpus.skipped {
            log::warn!("{}:{line}: skipped: {message}", path.display());
        }
        Ok(corpus.examples)
    }
}

#[derive(Args, Debug, Clone, Copy)]
pub struct WindowArgs {
    /// Window size w.
    #[arg(long, default_value_t = subtab_core::window::DEFAULT_WINDOW)]
    pub window: usize,
    /// Let windows span every column (w x n windows).
    #[arg(long)]
    pub full_width: bool,
}

impl WindowArgs {
    pub fn config(&self) -> Result<subtab_core::WindowConfig> {
        let cfg = if self.full_width {
            subtab_core::WindowConfig::full_width(self.window)?
        } else {
            subtab_core::WindowConfig::square(self.window)?
        };
        Ok(cfg)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectorKind {
    Oracle,
    Remote,
}

fn init_logging(verbose: bool) {
    let default = if verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(default))
        .format_timestamp(None)
        .try_init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbose = matches!(&cli.command, Command::Select(a) if a.trace);
    init_logging(verbose);
    let result = match cli.command {
        Command::Select(args) => cmd::select::run(args),
        Command::Datagen(args) => cmd::datagen::run(args),
        Command::Eval(args) => cmd::eval::run(args),
        Command::Windows(args) => cmd::windows::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
