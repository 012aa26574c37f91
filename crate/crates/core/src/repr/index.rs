//! The index representation: selected window-local row indices plus the
//! headers of the selected columns. It can only express rectangles.

use serde::{Deserialize, Serialize};

use super::{Decoded, ReprError};
use crate::table::{CellSelection, Window};

#[derive(Debug, Serialize, Deserialize)]
struct IndexForm {
    rows: Vec<usize>,
    columns: Vec<String>,
}

pub fn encode_index(window: &Window<'_>, selection: &CellSelection) -> Result<String, ReprError> {
    let mut rows = Vec::new();
    for &coord in selection.cells() {
        let (r, _) = window
            .locate(coord)
            .ok_or(ReprError::CellOutsideWindow(coord.0, coord.1))?;
        rows.push(r);
    }
    rows.sort_unstable();
    rows.dedup();
    let mut columns = Vec::new();
    for &col in selection.columns() {
        let c = window
            .local_col_of(col)
            .ok_or(ReprError::ColumnOutsideWindow(col))?;
        columns.push(window.headers()[c].clone());
    }
    Ok(serde_json::to_string(&IndexForm { rows, columns }).expect("plain data serializes"))
}

/// Cells are the full cross product of the listed rows and columns.
/// Headers resolve to the first matching window column.
pub fn decode_index(text: &str, window: &Window<'_>) -> Decoded {
    let Ok(form) = serde_json::from_str::<IndexForm>(text.trim()) else {
        return Decoded {
            warnings: 1,
            ..Decoded::default()
        };
    };
    let mut warnings = 0;
    let rows: Vec<usize> = form
        .rows
        .iter()
        .copied()
        .filter(|&r| {
            let ok = r < window.height();
            warnings += usize::from(!ok);
            ok
        })
        .collect();
    let mut selection = CellSelection::default();
    for name in &form.columns {
        let Some(c) = window.headers().iter().position(|h| h == name) else {
            warnings += 1;
            continue;
        };
        selection.insert_column(window.global_col(c));
        for &r in &rows {
            selection.insert_cell((window.global_row(r), window.global_col(c)));
        }
    }
    Decoded {
        selection,
        warnings,
        ambiguous: 0,
    }
}
