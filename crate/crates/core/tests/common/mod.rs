//! Test-only reference code, written directly from the algorithm
//! description and sharing nothing with the library beyond its input types.

#![allow(dead_code)]

pub mod stub;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use subtab_core::{Annotation, Condition, Op, Table};

/// Literal window enumeration: loop over every start position, clamp the
/// ones that run past the edge, and keep the distinct results.
pub fn reference_origins(rows: usize, cols: usize, w: usize) -> BTreeSet<(usize, usize)> {
    let mut origins = BTreeSet::new();
    for i in 0..=rows {
        for j in 0..=cols {
            let mut i = i as isize;
            let mut j = j as isize;
            if i + w as isize > rows as isize {
                i = rows as isize - w as isize;
            }
            if j + w as isize > cols as isize {
                j = cols as isize - w as isize;
            }
            // tables smaller than the window start at the edge
            origins.insert((i.max(0) as usize, j.max(0) as usize));
        }
    }
    origins
}

fn number(s: &str) -> Option<f64> {
    let t = s.trim();
    if !t.chars().any(|c| c.is_ascii_digit()) {
        return None;
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Some(v),
        _ => None,
    }
}

pub fn reference_satisfies(cell: &str, cond: &Condition) -> bool {
    let (a, b) = (number(cell), number(&cond.value));
    let (x, y) = (cell.trim().to_lowercase(), cond.value.trim().to_lowercase());
    match cond.op {
        Op::Equals => match (a, b) {
            (Some(a), Some(b)) => a == b,
            _ => x == y,
        },
        Op::GreaterThan => match (a, b) {
            (Some(a), Some(b)) => a > b,
            _ => x > y,
        },
        Op::LessThan => match (a, b) {
            (Some(a), Some(b)) => a < b,
            _ => x < y,
        },
    }
}

/// A table state as the rows and columns of the original table it keeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefState {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct RefRun {
    pub states: Vec<RefState>,
    pub empty: bool,
}

impl RefRun {
    pub fn last(&self) -> &RefState {
        self.states.last().unwrap()
    }
}

/// One iteration: every window's target cells, unioned.
pub fn reference_union(
    original: &Table,
    state: &RefState,
    ann: &Annotation,
    w: usize,
) -> (BTreeSet<usize>, BTreeSet<(usize, usize)>) {
    let relevant: BTreeSet<usize> = ann
        .conditions
        .iter()
        .map(|c| c.column)
        .chain(ann.answer_columns.iter().copied())
        .collect();
    let mut columns = BTreeSet::new();
    let mut cells = BTreeSet::new();
    for (i, j) in reference_origins(state.rows.len(), state.cols.len(), w) {
        let win_rows = &state.rows[i..(i + w).min(state.rows.len())];
        let win_cols = &state.cols[j..(j + w).min(state.cols.len())];
        let picked: Vec<usize> = win_cols.iter().copied().filter(|c| relevant.contains(c)).collect();
        columns.extend(picked.iter().copied());
        for &r in win_rows {
            let ok = ann
                .conditions
                .iter()
                .filter(|c| win_cols.contains(&c.column))
                .all(|c| reference_satisfies(&original.rows()[r][c.column], c));
            if ok {
                for &c in &picked {
                    cells.insert((r, c));
                }
            }
        }
    }
    (columns, cells)
}

/// Runs the loop on an original (un-sliced) table until nothing changes.
pub fn reference_pipeline(original: &Table, ann: &Annotation, w: usize, cap: usize) -> RefRun {
    let mut state = RefState {
        rows: (0..original.n_rows()).collect(),
        cols: (0..original.n_cols()).collect(),
    };
    let mut states = Vec::new();
    for _ in 0..cap {
        let (columns, cells) = reference_union(original, &state, ann, w);
        if columns.is_empty() {
            states.push(RefState {
                rows: vec![],
                cols: vec![],
            });
            return RefRun { states, empty: true };
        }
        let rows: BTreeSet<usize> = cells.iter().map(|&(r, _)| r).collect();
        let next = RefState {
            rows: rows.into_iter().collect(),
            cols: columns.into_iter().collect(),
        };
        states.push(next.clone());
        if next == state || next.rows.is_empty() {
            break;
        }
        state = next;
    }
    RefRun { states, empty: false }
}

/// Materializes a reference state from the original table.
pub fn reference_table(original: &Table, state: &RefState) -> Table {
    Table::from_parts(
        state.cols.iter().map(|&c| original.headers()[c].clone()).collect(),
        state
            .rows
            .iter()
            .map(|&r| state.cols.iter().map(|&c| original.rows()[r][c].clone()).collect())
            .collect(),
        state.rows.clone(),
        state.cols.clone(),
    )
    .unwrap()
}

/// Rows meeting every condition, by definition.
pub fn reference_gold(original: &Table, ann: &Annotation) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let rows = (0..original.n_rows())
        .filter(|&r| {
            ann.conditions
                .iter()
                .all(|c| reference_satisfies(&original.rows()[r][c.column], c))
        })
        .collect();
    let cols = ann
        .conditions
        .iter()
        .map(|c| c.column)
        .chain(ann.answer_columns.iter().copied())
        .collect();
    (rows, cols)
}

const VOCAB: [&str; 9] = ["0", "1", "2", "3", "4", "a", "b", "c", "2.0"];

/// Random table with at most `max_dim` rows and columns and a small value
/// vocabulary, so conditions match a fair share of cells.
pub fn random_table(rng: &mut impl Rng, max_dim: usize) -> Table {
    let rows = rng.random_range(1..=max_dim);
    let cols = rng.random_range(1..=max_dim);
    let headers = (0..cols).map(|c| format!("col{c}")).collect();
    let cells = (0..rows)
        .map(|_| (0..cols).map(|_| VOCAB[rng.random_range(0..VOCAB.len())].to_string()).collect())
        .collect();
    Table::new(headers, cells).unwrap()
}

/// Up to `max_conditions` conditions and one or two answer columns.
pub fn random_annotation(rng: &mut impl Rng, table: &Table, max_conditions: usize) -> Annotation {
    let cols = table.n_cols();
    let n_cond = rng.random_range(0..=max_conditions);
    let ops = [Op::Equals, Op::Equals, Op::GreaterThan, Op::LessThan];
    let conditions = (0..n_cond)
        .map(|_| {
            let column = rng.random_range(0..cols);
            let op = ops[rng.random_range(0..ops.len())];
            // Prefer values present in the column so conditions can match.
            let value = if rng.random_bool(0.8) && table.n_rows() > 0 {
                table.rows()[rng.random_range(0..table.n_rows())][column].clone()
            } else {
                VOCAB[rng.random_range(0..VOCAB.len())].to_string()
            };
            Condition::new(column, op, value).unwrap()
        })
        .collect();
    let mut all: Vec<usize> = (0..cols).collect();
    all.shuffle(rng);
    let n_ans = rng.random_range(1..=2.min(cols));
    let answer_columns = all[..n_ans].iter().copied().collect();
    Annotation::new(conditions, answer_columns, vec![]).unwrap()
}

/// Histogram helper for reports.
pub fn count_by<K: Ord>(items: impl IntoIterator<Item = K>) -> BTreeMap<K, usize> {
    let mut out = BTreeMap::new();
    for k in items {
        *out.entry(k).or_insert(0) += 1;
    }
    out
}
