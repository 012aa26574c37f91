//! The iterative divide / select / combine loop.
//!
//! Each iteration windows the current table, asks the selector for a
//! subwindow of every window, unions the selections and materializes the
//! union as the next table. The loop stops once an iteration reproduces its
//! input table.

use std::time::{Duration, Instant};

use log::info;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::condition::Annotation;
use crate::selector::{Selector, SelectorError, WindowSelection};
use crate::table::{CellSelection, Question, Table, TableError};
use crate::window::{divide_table, WindowConfig, WindowError};

pub const DEFAULT_MAX_ITERATIONS: usize = 16;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error(transparent)]
    Selector(#[from] SelectorError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("max_iterations must be at least 1")]
    ZeroIterations,
}

#[derive(Debug, Clone, Copy)]
pub struct PipelineConfig {
    pub window: WindowConfig,
    pub max_iterations: usize,
    /// Keep a copy of every intermediate table and log each iteration.
    pub trace: bool,
    /// Run the selector on the windows of one iteration in parallel.
    pub parallel: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            window: WindowConfig::default(),
            max_iterations: DEFAULT_MAX_ITERATIONS,
            trace: false,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub input_rows: usize,
    pub input_cols: usize,
    pub windows: usize,
    /// Distinct selected cells before rectangularization.
    pub union_cells: usize,
    pub union_columns: usize,
    /// Cells of the materialized output table.
    pub output_cells: usize,
    #[serde(serialize_with = "as_micros")]
    pub elapsed: Duration,
    pub warnings: usize,
    /// Output table, kept only when tracing.
    #[serde(skip)]
    pub table: Option<Table>,
}

fn as_micros<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(d.as_micros() as u64)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PipelineTrace {
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    /// The selectors deselected every column.
    pub empty_result: bool,
}

impl PipelineTrace {
    pub fn warnings(&self) -> usize {
        self.iterations.iter().map(|r| r.warnings).sum()
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub table: Table,
    pub trace: PipelineTrace,
}

/// Runs the selection loop on `table` until it reaches a fixed point or the
/// iteration cap. `annotation` is passed through to the selector and only
/// matters for the oracle.
pub fn select_subtable<S: Selector + ?Sized>(
    table: &Table,
    question: &Question,
    annotation: Option<&Annotation>,
    selector: &S,
    cfg: &PipelineConfig,
) -> Result<PipelineOutcome, PipelineError> {
    if cfg.max_iterations == 0 {
        return Err(PipelineError::ZeroIterations);
    }
    let mut trace = PipelineTrace::default();
    let mut current = table.clone();
    // Nothing to window: an earlier run already ended here.
    if current.n_rows() == 0 || current.n_cols() == 0 {
        trace.converged = true;
        trace.empty_result = current.n_cols() == 0;
        return Ok(PipelineOutcome { table: current, trace });
    }

    for iteration in 1..=cfg.max_iterations {
        let started = Instant::now();
        let windows = divide_table(&current, cfg.window)?;
        let run = |w: &crate::table::Window<'_>| -> Result<WindowSelection, SelectorError> {
            // Clamp to the window so a misbehaving selector cannot grow the table.
            selector.select(w, question, annotation).map(|mut s| {
                s.selection = s.selection.restrict_to(w);
                s
            })
        };
        let selections: Vec<WindowSelection> = if cfg.parallel {
            windows.par_iter().map(run).collect::<Result<_, _>>()?
        } else {
            windows.iter().map(run).collect::<Result<_, _>>()?
        };

        let mut union = CellSelection::default();
        let mut warnings = 0;
        for s in &selections {
            union.extend(&s.selection);
            warnings += s.warnings;
        }

        let next = if union.is_empty() {
            Table::empty()
        } else {
            current.materialize(&union)?
        };
        let record = IterationRecord {
            input_rows: current.n_rows(),
            input_cols: current.n_cols(),
            windows: windows.len(),
            union_cells: union.cells().len(),
            union_columns: union.columns().len(),
            output_cells: next.n_cells(),
            elapsed: started.elapsed(),
            warnings,
            table: cfg.trace.then(|| next.clone()),
        };
        if cfg.trace {
            info!(
                "iteration {iteration}: {}x{} -> {}x{} ({} windows, {} selected cells, {} warnings)",
                record.input_rows,
                record.input_cols,
                next.n_rows(),
                next.n_cols(),
                record.windows,
                record.union_cells,
                record.warnings
            );
        }
        trace.iterations.push(record);

        if union.is_empty() {
            trace.empty_result = true;
            trace.converged = true;
            return Ok(PipelineOutcome { table: next, trace });
        }
        // A header-only table cannot be windowed again; it is terminal.
        if next == current || next.n_rows() == 0 {
            trace.converged = true;
            return Ok(PipelineOutcome { table: next, trace });
        }
        current = next;
    }
    Ok(PipelineOutcome {
        table: current,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition::{Condition, Op};
    use crate::selector::OracleSelector;
    use crate::table::Window;

    fn numbered(rows: usize, cols: usize) -> Table {
        Table::new(
            (0..cols).map(|c| format!("h{c}")).collect(),
            (0..rows)
                .map(|r| (0..cols).map(|c| format!("{}", (r * 7 + c * 3) % 5)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn all_answer_columns_is_identity() {
        let t = numbered(6, 5);
        let ann = Annotation::new(vec![], (0..5).collect(), vec![]).unwrap();
        let q = Question::new("everything").unwrap();
        let out = select_subtable(&t, &q, Some(&ann), &OracleSelector, &PipelineConfig::default()).unwrap();
        assert_eq!(out.table, t);
        assert!(out.trace.converged);
        assert!(out.trace.iterations.len() <= 2);
    }

    #[test]
    fn oracle_without_annotation_fails() {
        let t = numbered(3, 3);
        let q = Question::new("q").unwrap();
        let err = select_subtable(&t, &q, None, &OracleSelector, &PipelineConfig::default()).unwrap_err();
        assert!(matches!(err, PipelineError::Selector(SelectorError::MissingAnnotation)));
    }

    #[test]
    fn fixed_point_is_idempotent() {
        let t = numbered(9, 7);
        let ann = Annotation::new(
            vec![Condition::new(1, Op::Equals, "3").unwrap(), Condition::new(5, Op::LessThan, "2").unwrap()],
            [3].into(),
            vec![],
        )
        .unwrap();
        let q = Question::new("q").unwrap();
        let cfg = PipelineConfig::default();
        let first = select_subtable(&t, &q, Some(&ann), &OracleSelector, &cfg).unwrap();
        assert!(first.trace.converged);
        if first.table.n_rows() > 0 {
            let again = select_subtable(&first.table, &q, Some(&ann), &OracleSelector, &cfg).unwrap();
            assert_eq!(again.table, first.table);
            assert_eq!(again.trace.iterations.len(), 1);
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let t = numbered(12, 9);
        let ann = Annotation::new(vec![Condition::new(2, Op::GreaterThan, "2").unwrap()], [7].into(), vec![]).unwrap();
        let q = Question::new("q").unwrap();
        let seq = select_subtable(&t, &q, Some(&ann), &OracleSelector, &PipelineConfig::default()).unwrap();
        let par_cfg = PipelineConfig {
            parallel: true,
            ..PipelineConfig::default()
        };
        let par = select_subtable(&t, &q, Some(&ann), &OracleSelector, &par_cfg).unwrap();
        assert_eq!(seq.table, par.table);
    }

    struct Nothing;

    impl Selector for Nothing {
        fn select(&self, _: &Window<'_>, _: &Question, _: Option<&Annotation>) -> Result<WindowSelection, SelectorError> {
            Ok(WindowSelection {
                selection: CellSelection::default(),
                warnings: 2,
            })
        }
    }

    #[test]
    fn empty_union_is_flagged() {
        let t = numbered(5, 5);
        let q = Question::new("q").unwrap();
        let out = select_subtable(&t, &q, None, &Nothing, &PipelineConfig::default()).unwrap();
        assert!(out.trace.empty_result);
        assert_eq!(out.table.n_cols(), 0);
        assert_eq!(out.trace.warnings(), 2 * 4);
    }

    /// Drops one more row per call: never converges.
    struct Shrinking;

    impl Selector for Shrinking {
        fn select(&self, w: &Window<'_>, _: &Question, _: Option<&Annotation>) -> Result<WindowSelection, SelectorError> {
            let skip = w.global_rows()[0];
            Ok(WindowSelection {
                selection: CellSelection::from_cells(w.coords().filter(|&(r, _)| r != skip)),
                warnings: 0,
            })
        }
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let t = numbered(30, 2);
        let q = Question::new("q").unwrap();
        let cfg = PipelineConfig {
            max_iterations: 2,
            trace: true,
            ..PipelineConfig::default()
        };
        let out = select_subtable(&t, &q, None, &Shrinking, &cfg).unwrap();
        assert!(!out.trace.converged);
        assert_eq!(out.trace.iterations.len(), 2);
        assert!(out.trace.iterations.iter().all(|r| r.table.is_some()));
        assert!(out.table.n_rows() < 30);
    }

    /// Claims cells far outside its window.
    struct Greedy;

    impl Selector for Greedy {
        fn select(&self, w: &Window<'_>, _: &Question, _: Option<&Annotation>) -> Result<WindowSelection, SelectorError> {
            let mut sel = CellSelection::from_cells(w.coords().take(1));
            sel.insert_cell((1000, 1000));
            Ok(WindowSelection { selection: sel, warnings: 0 })
        }
    }

    #[test]
    fn selections_are_clamped_to_windows() {
        let t = numbered(4, 4);
        let q = Question::new("q").unwrap();
        let out = select_subtable(&t, &q, None, &Greedy, &PipelineConfig::default()).unwrap();
        assert_eq!(out.table.n_cells(), 1);
    }
}
