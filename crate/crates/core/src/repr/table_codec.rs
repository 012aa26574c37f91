//! The table representation: the selected cells written out as a small
//! pipe-delimited table. Decoding has to find each value again in the
//! window, which is where this representation loses information.

use std::collections::BTreeSet;

use super::{escape_cell, join_row, split_row, Decoded, ReprError};
use crate::table::{CellSelection, Window};

/// Header line of the selected columns, then one line per row owning a
/// selected cell. Unselected cells inside that rectangle are left blank.
pub fn encode_table(window: &Window<'_>, selection: &CellSelection) -> Result<String, ReprError> {
    let mut cols = Vec::new();
    for &col in selection.columns() {
        cols.push(
            window
                .local_col_of(col)
                .ok_or(ReprError::ColumnOutsideWindow(col))?,
        );
    }
    let mut rows = BTreeSet::new();
    for &coord in selection.cells() {
        let (r, _) = window
            .locate(coord)
            .ok_or(ReprError::CellOutsideWindow(coord.0, coord.1))?;
        rows.insert(r);
    }
    let mut lines = vec![join_row(cols.iter().map(|&c| &window.headers()[c]))];
    for &r in &rows {
        let fields: Vec<String> = cols
            .iter()
            .map(|&c| {
                let coord = (window.global_row(r), window.global_col(c));
                if selection.cells().contains(&coord) {
                    escape_cell(window.cell(r, c))
                } else {
                    String::new()
                }
            })
            .collect();
        lines.push(fields.join(" | "));
    }
    Ok(lines.join("\n"))
}

/// Re-identifies each non-blank value by header and content. When several
/// window cells match, the first in raster order wins and the value is
/// counted as ambiguous.
pub fn decode_table(text: &str, window: &Window<'_>) -> Decoded {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    // No header line is how an empty selection is written.
    let Some(header_line) = lines.next() else {
        return Decoded::default();
    };
    let headers = split_row(header_line);
    let mut selection = CellSelection::default();
    let mut warnings = 0;
    let mut ambiguous = 0;

    for name in &headers {
        match window.headers().iter().position(|h| h.trim() == name) {
            Some(c) => selection.insert_column(window.global_col(c)),
            None => warnings += 1,
        }
    }
    for line in lines {
        let fields = split_row(line);
        if fields.len() != headers.len() {
            warnings += 1;
        }
        for (name, value) in headers.iter().zip(&fields) {
            if value.is_empty() {
                continue;
            }
            let mut matches = (0..window.height()).flat_map(|r| {
                (0..window.width())
                    .filter(move |&c| {
                        window.headers()[c].trim() == name && window.cell(r, c).trim() == value
                    })
                    .map(move |c| (r, c))
            });
            match matches.next() {
                Some((r, c)) => {
                    if matches.next().is_some() {
                        ambiguous += 1;
                    }
                    selection.insert_cell((window.global_row(r), window.global_col(c)));
                }
                None => warnings += 1,
            }
        }
    }
    Decoded {
        selection,
        warnings,
        ambiguous,
    }
}
