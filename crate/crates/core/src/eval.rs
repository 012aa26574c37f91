//! Cell-level precision/recall against the gold table, exact-match answer
//! scoring, and corpus-level reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::condition::{condition_satisfied, parse_number, Annotation};
use crate::table::{Coord, Table};

/// Rows satisfying every condition, crossed with condition and answer columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldTable {
    pub rows: BTreeSet<usize>,
    pub columns: BTreeSet<usize>,
}

impl GoldTable {
    pub fn cells(&self) -> impl Iterator<Item = Coord> + '_ {
        self.rows
            .iter()
            .flat_map(move |&r| self.columns.iter().map(move |&c| (r, c)))
    }

    pub fn n_cells(&self) -> usize {
        self.rows.len() * self.columns.len()
    }

    pub fn contains(&self, (r, c): Coord) -> bool {
        self.rows.contains(&r) && self.columns.contains(&c)
    }
}

pub fn gold_table(table: &Table, ann: &Annotation) -> GoldTable {
    let columns: BTreeSet<usize> = ann
        .relevant_columns()
        .into_iter()
        .filter(|&c| table.local_col(c).is_some())
        .collect();
    let rows = table
        .row_ids()
        .iter()
        .copied()
        .filter(|&row| {
            ann.conditions.iter().all(|cond| {
                table
                    .get((row, cond.column))
                    .is_some_and(|cell| condition_satisfied(cell, cond))
            })
        })
        .collect();
    GoldTable { rows, columns }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionScore {
    pub precision: f64,
    pub recall: f64,
    pub true_positive: usize,
    pub predicted: usize,
    pub gold: usize,
}

/// Precision is 0 for an empty prediction; recall is 1 for an empty gold table.
pub fn score_selection(predicted: &Table, gold: &GoldTable) -> SelectionScore {
    let predicted_cells = predicted.n_cells();
    let true_positive = predicted.coords().filter(|&c| gold.contains(c)).count();
    let gold_cells = gold.n_cells();
    SelectionScore {
        precision: if predicted_cells == 0 {
            0.0
        } else {
            true_positive as f64 / predicted_cells as f64
        },
        recall: if gold_cells == 0 {
            1.0
        } else {
            true_positive as f64 / gold_cells as f64
        },
        true_positive,
        predicted: predicted_cells,
        gold: gold_cells,
    }
}

/// Lowercase, trim, collapse whitespace, and print numbers canonically.
pub fn normalize_answer(s: &str) -> String {
    let collapsed = s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    match parse_number(&collapsed) {
        Some(v) if v == v.trunc() && v.abs() < 1e15 => format!("{}", v as i64),
        Some(v) => format!("{v}"),
        None => collapsed,
    }
}

/// Exact match after normalization. With several gold answers the
/// prediction is split on `|` or `", "` and compared as a multiset.
pub fn exact_match(predicted: &str, gold_answers: &[String]) -> bool {
    match gold_answers {
        [] => false,
        [single] => normalize_answer(predicted) == normalize_answer(single),
        many => {
            let mut pred: Vec<String> = predicted
                .split('|')
                .flat_map(|part| part.split(", "))
                .map(normalize_answer)
                .collect();
            let mut gold: Vec<String> = many.iter().map(|g| normalize_answer(g)).collect();
            pred.sort();
            gold.sort();
            pred == gold
        }
    }
}

/// Everything the corpus report needs about one scored record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordResult {
    pub table_id: String,
    pub question_id: String,
    pub source_cells: usize,
    pub subtable_cells: usize,
    pub score: SelectionScore,
    pub iterations: usize,
    pub converged: bool,
    /// Distinct condition and answer columns.
    pub relevant_columns: usize,
    /// Rows of the gold table.
    pub answer_rows: usize,
    #[serde(default)]
    pub exact_match: Option<bool>,
}

impl RecordResult {
    pub fn reduction_ratio(&self) -> f64 {
        if self.source_cells == 0 {
            0.0
        } else {
            self.subtable_cells as f64 / self.source_cells as f64
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BucketStats {
    pub count: usize,
    pub precision: f64,
    pub recall: f64,
    pub reduction_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub records: usize,
    pub mean_precision: f64,
    pub mean_recall: f64,
    /// Over records with a scored answer; `None` when none were scored.
    pub exact_match: Option<f64>,
    pub mean_reduction_ratio: f64,
    pub converged: usize,
    pub by_table_size: BTreeMap<String, BucketStats>,
    pub iteration_histogram: BTreeMap<usize, usize>,
    pub by_relevant_columns: BTreeMap<usize, BucketStats>,
    pub by_answer_rows: BTreeMap<usize, BucketStats>,
}

/// Upper bounds (exclusive) of the table-size buckets, in cells.
pub const SIZE_BUCKETS: [usize; 6] = [32, 64, 128, 256, 512, 1024];

pub fn size_bucket(cells: usize) -> String {
    let mut lower = 0;
    for upper in SIZE_BUCKETS {
        if cells < upper {
            return format!("{lower:04}-{:04}", upper - 1);
        }
        lower = upper;
    }
    format!("{lower:04}+")
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn bucket_stats<'a>(items: impl Iterator<Item = &'a RecordResult> + Clone) -> BucketStats {
    BucketStats {
        count: items.clone().count(),
        precision: mean(items.clone().map(|r| r.score.precision)),
        recall: mean(items.clone().map(|r| r.score.recall)),
        reduction_ratio: mean(items.map(RecordResult::reduction_ratio)),
    }
}

fn grouped<K: Ord + Clone>(results: &[RecordResult], key: impl Fn(&RecordResult) -> K) -> BTreeMap<K, BucketStats> {
    let mut groups: BTreeMap<K, Vec<&RecordResult>> = BTreeMap::new();
    for r in results {
        groups.entry(key(r)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(k, v)| (k, bucket_stats(v.into_iter())))
        .collect()
}

pub fn corpus_report(results: &[RecordResult]) -> Report {
    let scored: Vec<bool> = results.iter().filter_map(|r| r.exact_match).collect();
    let mut iteration_histogram = BTreeMap::new();
    for r in results {
        *iteration_histogram.entry(r.iterations).or_insert(0) += 1;
    }
    Report {
        records: results.len(),
        mean_precision: mean(results.iter().map(|r| r.score.precision)),
        mean_recall: mean(results.iter().map(|r| r.score.recall)),
        exact_match: (!scored.is_empty()).then(|| mean(scored.iter().map(|&b| f64::from(u8::from(b))))),
        mean_reduction_ratio: mean(results.iter().map(RecordResult::reduction_ratio)),
        converged: results.iter().filter(|r| r.converged).count(),
        by_table_size: grouped(results, |r| size_bucket(r.source_cells)),
        iteration_histogram,
        by_relevant_columns: grouped(results, |r| r.relevant_columns),
        by_answer_rows: grouped(results, |r| r.answer_rows),
    }
}

impl Report {
    /// Aligned plain-text summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "records            {}", self.records);
        let _ = writeln!(out, "converged          {}", self.converged);
        let _ = writeln!(out, "precision          {:.4}", self.mean_precision);
        let _ = writeln!(out, "recall             {:.4}", self.mean_recall);
        match self.exact_match {
            Some(em) => {
                let _ = writeln!(out, "exact match        {em:.4}");
            }
            None => {
                let _ = writeln!(out, "exact match        n/a");
            }
        }
        let _ = writeln!(out, "reduction ratio    {:.4}", self.mean_reduction_ratio);
        section(&mut out, "table size (cells)", &self.by_table_size);
        section(&mut out, "cond. & ans. columns", &self.by_relevant_columns);
        section(&mut out, "answer rows", &self.by_answer_rows);
        let _ = writeln!(out, "\n{:<22}{:>8}", "iterations", "count");
        for (k, v) in &self.iteration_histogram {
            let _ = writeln!(out, "{k:<22}{v:>8}");
        }
        out
    }
}

fn section<K: std::fmt::Display>(out: &mut String, title: &str, rows: &BTreeMap<K, BucketStats>) {
    let _ = writeln!(
        out,
        "\n{title:<22}{:>8}{:>11}{:>11}{:>11}",
        "count", "precision", "recall", "ratio"
    );
    for (k, s) in rows {
        let _ = writeln!(
            out,
            "{:<22}{:>8}{:>11.4}{:>11.4}{:>11.4}",
            k.to_string(),
            s.count,
            s.precision,
            s.recall,
            s.reduction_ratio
        );
    }
}
