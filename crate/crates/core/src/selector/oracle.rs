use std::collections::BTreeSet;

use super::{Selector, SelectorError, WindowSelection};
use crate::condition::{condition_satisfied, Annotation, Condition};
use crate::table::{CellSelection, Question, Window};

/// Builds the target subwindow from an annotation.
///
/// Columns are the condition and answer columns inside the window. Rows are
/// those satisfying every condition whose column is inside the window; with
/// no such condition every row qualifies. No qualifying row gives a
/// headers-only selection, and a window without any relevant column gives
/// an empty one.
pub fn oracle_select(window: &Window<'_>, ann: &Annotation) -> CellSelection {
    let relevant = ann.relevant_columns();
    let columns: Vec<usize> = window
        .global_cols()
        .iter()
        .copied()
        .filter(|c| relevant.contains(c))
        .collect();
    if columns.is_empty() {
        return CellSelection::default();
    }
    let active: Vec<(usize, &Condition)> = ann
        .conditions
        .iter()
        .filter_map(|cond| window.local_col_of(cond.column).map(|c| (c, cond)))
        .collect();

    let mut cells = BTreeSet::new();
    for r in 0..window.height() {
        if active
            .iter()
            .all(|&(c, cond)| condition_satisfied(window.cell(r, c), cond))
        {
            let row = window.global_row(r);
            cells.extend(columns.iter().map(|&c| (row, c)));
        }
    }
    CellSelection::new(columns.into_iter().collect(), cells).expect("cells lie in selected columns")
}

/// Deterministic selector executing the target-construction rule.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleSelector;

impl Selector for OracleSelector {
    fn select(
        &self,
        window: &Window<'_>,
        _question: &Question,
        annotation: Option<&Annotation>,
    ) -> Result<WindowSelection, SelectorError> {
        let ann = annotation.ok_or(SelectorError::MissingAnnotation)?;
        Ok(WindowSelection {
            selection: oracle_select(window, ann),
            warnings: 0,
        })
    }
}
