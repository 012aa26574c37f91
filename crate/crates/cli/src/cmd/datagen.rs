use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use subtab_core::corpus::write_jsonl_file;
use subtab_core::datagen::{
    augment_same_value, balance_pairs, generate_pairs, histogram, supply, synthesize_example, BucketSpec,
    TrainingPair,
};
use subtab_core::repr::PromptTemplate;
use subtab_core::table::Question;

use crate::{InputArgs, WindowArgs};

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Balance {
    Uniform,
    None,
}

#[derive(Args, Debug)]
pub struct DatagenArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, value_enum, default_value_t = Balance::None)]
    pub balance: Balance,
    /// Pairs per (m, n) bucket; defaults to the smallest bucket supply.
    #[arg(long)]
    pub per_bucket: Option<usize>,
    /// Fill short buckets with synthetic windows.
    #[arg(long)]
    pub topup: bool,
    /// Also mark cells equal to a target cell as targets.
    #[arg(long)]
    pub augment: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Prompt template file with {question} and {table} placeholders.
    #[arg(long)]
    pub template: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Histogram output; defaults to <out>.histogram.json.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

pub fn run(args: DatagenArgs) -> Result<()> {
    let window = args.window.config()?;
    if window.span_all_columns && args.balance == Balance::Uniform {
        bail!("--balance uniform needs square windows");
    }
    let w = window.size;
    let template = match &args.template {
        Some(path) => PromptTemplate::from_file(path).with_context(|| format!("reading {}", path.display()))?,
        None => PromptTemplate::default(),
    };
    let examples = args.input.load()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build()?;
    let generated: Vec<Vec<TrainingPair>> = pool.install(|| {
        examples
            .par_iter()
            .map(|ex| {
                generate_pairs(
                    &ex.table,
                    &ex.question,
                    &ex.annotation,
                    window,
                    &template,
                    &ex.table_id,
                    &ex.question_id,
                )
                .with_context(|| format!("record {}", ex.question_id))
            })
            .collect::<Result<_>>()
    })?;
    let mut pairs: Vec<TrainingPair> = generated.into_iter().flatten().collect();
    let raw = pairs.len();
    pairs.retain(TrainingPair::is_trainable);
    eprintln!("{raw} windows, {} with at least one target column", pairs.len());

    if args.augment {
        let (augmented, stats) = augment_same_value(pairs);
        eprintln!(
            "augmentation changed {} of {} pairs ({:.2}%)",
            stats.changed,
            stats.total,
            100.0 * stats.fraction_changed
        );
        pairs = augmented;
    }

    let spec_probe = BucketSpec::uniform(w, 0);
    let (pairs, hist) = match args.balance {
        Balance::None => {
            let hist = histogram(&spec_probe, &pairs);
            (pairs, hist)
        }
        Balance::Uniform => {
            let available = supply(&spec_probe, &pairs);
            let per_bucket = match args.per_bucket {
                Some(n) => n,
                None => available.values().copied().min().unwrap_or(0),
            };
            if per_bucket == 0 {
                log::warn!("some (m,n) bucket has no supply; balanced output is empty (use --per-bucket with --topup)");
            }
            let spec = BucketSpec::uniform(w, per_bucket);
            let (mut balanced, _) = balance_pairs(pairs, &spec, args.seed);
            if args.topup {
                balanced.extend(topup(&spec, &balanced, &template, args.seed)?);
            }
            let hist = histogram(&spec, &balanced);
            (balanced, hist)
        }
    };

    write_jsonl_file(&args.out, &pairs).with_context(|| format!("writing {}", args.out.display()))?;
    let hist_path = args
        .histogram
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.histogram.json", args.out.display())));
    std::fs::write(&hist_path, serde_json::to_string_pretty(&hist)? + "\n")
        .with_context(|| format!("writing {}", hist_path.display()))?;
    eprintln!(
        "wrote {} pairs to {} ({} buckets in {})",
        pairs.len(),
        args.out.display(),
        hist.len(),
        hist_path.display()
    );
    Ok(())
}

/// Synthesizes pairs for every bucket below its requested count.
fn topup(spec: &BucketSpec, have: &[TrainingPair], template: &PromptTemplate, seed: u64) -> Result<Vec<TrainingPair>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_70b0);
    let mut counts: BTreeMap<_, usize> = BTreeMap::new();
    for p in have {
        *counts.entry(p.bucket()).or_default() += 1;
    }
    let question = Question::new("Which cells answer the question?")?;
    let window = subtab_core::WindowConfig::square(spec.w)?;
    let mut out = Vec::new();
    for (&bucket, &want) in &spec.counts {
        let missing = want.saturating_sub(counts.get(&bucket).copied().unwrap_or(0));
        for i in 0..missing {
            let (table, ann) = synthesize_example(spec.w, bucket, &mut rng);
            let id = format!("synthetic-{}-{}-{i}", bucket.0, bucket.1);
            out.extend(generate_pairs(&table, &question, &ann, window, template, &id, &id)?);
        }
    }
    Ok(out)
}
