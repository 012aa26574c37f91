use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use subtab_core::corpus::{write_jsonl_file, SubtableRecord};
use subtab_core::pipeline::{select_subtable, PipelineConfig, DEFAULT_MAX_ITERATIONS};
use subtab_core::repr::PromptTemplate;
use subtab_core::selector::{OracleSelector, RemoteSelector, RemoteSelectorConfig, Selector};

use crate::{InputArgs, SelectorKind, WindowArgs};

#[derive(Args, Debug)]
pub struct SelectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, value_enum, default_value_t = SelectorKind::Oracle)]
    pub selector: SelectorKind,
    #[command(flatten)]
    pub remote: RemoteArgs,
    #[arg(long = "max-iters", default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub max_iters: usize,
    /// Log every iteration to stderr.
    #[arg(long)]
    pub trace: bool,
    /// Write subtables as JSON lines instead of printing them.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads over records (0 = all cores).
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Args, Debug, Clone)]
pub struct RemoteArgs {
    /// JSON file with remote selector settings; flags and env vars override it.
    #[arg(long)]
    pub selector_config: Option<PathBuf>,
    #[arg(long, env = "SELECTOR_ENDPOINT")]
    pub endpoint: Option<String>,
    #[arg(long, env = "SELECTOR_MODEL")]
    pub model: Option<String>,
    #[arg(long, env = "SELECTOR_API_KEY", hide_env_values = true)]
    pub api_key: Option<String>,
    /// Prompt template file with {question} and {table} placeholders.
    #[arg(long)]
    pub template: Option<PathBuf>,
    #[arg(long)]
    pub retries: Option<usize>,
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    #[arg(long)]
    pub max_tokens: Option<u32>,
    /// Upper bound on concurrent requests.
    #[arg(long)]
    pub max_in_flight: Option<usize>,
}

impl RemoteArgs {
    pub fn build(&self) -> Result<RemoteSelector> {
        let mut cfg = match &self.selector_config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str::<RemoteSelectorConfig>(&text)
                    .with_context(|| format!("parsing {}", path.display()))?
            }
            None => {
                let endpoint = self
                    .endpoint
                    .clone()
                    .ok_or_else(|| anyhow!("remote selector needs --endpoint or SELECTOR_ENDPOINT"))?;
                let model = self
                    .model
                    .clone()
                    .ok_or_else(|| anyhow!("remote selector needs --model or SELECTOR_MODEL"))?;
                RemoteSelectorConfig::new(endpoint, model)
            }
        };
        if let Some(v) = &self.endpoint {
            cfg.endpoint = v.clone();
        }
        if let Some(v) = &self.model {
            cfg.model = v.clone();
        }
        if self.api_key.is_some() {
            cfg.api_key = self.api_key.clone();
        }
        if let Some(v) = self.retries {
            cfg.retries = v;
        }
        if let Some(v) = self.timeout_ms {
            cfg.timeout = Duration::from_millis(v);
        }
        if let Some(v) = self.max_tokens {
            cfg.max_tokens = v;
        }
        if let Some(v) = self.max_in_flight {
            cfg.max_in_flight = v;
        }
        let template = match &self.template {
            Some(path) => PromptTemplate::from_file(path).with_context(|| format!("reading {}", path.display()))?,
            None => PromptTemplate::default(),
        };
        Ok(RemoteSelector::new(cfg, template)?)
    }
}

pub fn run(args: SelectArgs) -> Result<()> {
    let examples = args.input.load()?;
    let selector: Box<dyn Selector> = match args.selector {
        SelectorKind::Oracle => Box::new(OracleSelector),
        SelectorKind::Remote => Box::new(args.remote.build()?),
    };
    let uses_annotation = args.selector == SelectorKind::Oracle;
    let cfg = PipelineConfig {
        window: args.window.config()?,
        max_iterations: args.max_iters,
        trace: args.trace,
        parallel: examples.len() == 1,
    };
    if cfg.max_iterations == 0 {
        bail!("--max-iters must be at least 1");
    }

    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build()?;
    let results: Vec<Result<SubtableRecord>> = pool.install(|| {
        examples
            .par_iter()
            .map(|ex| {
                let ann = uses_annotation.then_some(&ex.annotation);
                let outcome = select_subtable(&ex.table, &ex.question, ann, &selector, &cfg)
                    .with_context(|| format!("record {}", ex.question_id))?;
                if outcome.trace.empty_result {
                    log::warn!("{}: selector deselected every column", ex.question_id);
                }
                if !outcome.trace.converged {
                    log::warn!("{}: no fixed point after {} iterations", ex.question_id, cfg.max_iterations);
                }
                Ok(SubtableRecord::new(
                    ex,
                    &outcome.table,
                    outcome.trace.converged,
                    outcome.trace.iterations.len(),
                ))
            })
            .collect()
    });
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;

    match &args.out {
        Some(path) => {
            write_jsonl_file(path, &records).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {} subtables to {}", records.len(), path.display());
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            for rec in &records {
                let table = rec.to_table()?;
                writeln!(
                    out,
                    "# {} / {} ({}x{}, {} iteration(s){})",
                    rec.table_id,
                    rec.question_id,
                    table.n_rows(),
                    table.n_cols(),
                    rec.iterations,
                    if rec.converged { "" } else { ", not converged" }
                )?;
                writeln!(out, "{}\n", table.to_pipe_text())?;
            }
        }
    }
    Ok(())
}
