use std::collections::HashMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use subtab_core::corpus::{read_jsonl_file, AnswerRecord, SubtableRecord};
use subtab_core::eval::{corpus_report, exact_match, gold_table, score_selection, RecordResult};

use crate::InputArgs;

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Subtables written by `select --out`.
    #[arg(long)]
    pub subtables: PathBuf,
    /// Optional predicted answers: JSON lines {question_id, answer}.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Per-record results as JSON lines.
    #[arg(long)]
    pub records: Option<PathBuf>,
}

pub fn run(args: EvalArgs) -> Result<()> {
    let examples = args.input.load()?;
    let subtables: Vec<SubtableRecord> =
        read_jsonl_file(&args.subtables).with_context(|| format!("reading {}", args.subtables.display()))?;
    let by_question: HashMap<&str, &SubtableRecord> =
        subtables.iter().map(|s| (s.question_id.as_str(), s)).collect();
    let answers: HashMap<String, String> = match &args.predictions {
        Some(path) => read_jsonl_file::<AnswerRecord>(path)
            .with_context(|| format!("reading {}", path.display()))?
            .into_iter()
            .map(|a| (a.question_id, a.answer))
            .collect(),
        None => HashMap::new(),
    };

    let mut results = Vec::new();
    let mut missing = 0;
    for ex in &examples {
        let Some(sub) = by_question.get(ex.question_id.as_str()) else {
            missing += 1;
            continue;
        };
        let predicted = sub
            .to_table()
            .with_context(|| format!("subtable for {}", ex.question_id))?;
        if let Some(coord) = predicted.coords().find(|&c| !ex.table.contains(c)) {
            bail!("subtable for {} references {:?} outside its source table", ex.question_id, coord);
        }
        let gold = gold_table(&ex.table, &ex.annotation);
        results.push(RecordResult {
            table_id: ex.table_id.clone(),
            question_id: ex.question_id.clone(),
            source_cells: ex.table.n_cells(),
            subtable_cells: predicted.n_cells(),
            score: score_selection(&predicted, &gold),
            iterations: sub.iterations,
            converged: sub.converged,
            relevant_columns: ex.annotation.relevant_columns().len(),
            answer_rows: gold.rows.len(),
            exact_match: answers
                .get(&ex.question_id)
                .map(|a| exact_match(a, &ex.annotation.gold_answers)),
        });
    }
    if missing > 0 {
        log::warn!("{missing} corpus record(s) have no subtable");
    }
    if results.is_empty() {
        bail!("no corpus record has a matching subtable");
    }
    let report = corpus_report(&results);
    print!("{}", report.to_text());
    if let Some(path) = &args.json {
        std::fs::write(path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.records {
        subtab_core::corpus::write_jsonl_file(path, &results)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
