//! Prompt rendering and the three selector output representations.

mod coordinate;
mod index;
mod prompt;
mod table_codec;

use thiserror::Error;

use crate::table::CellSelection;

pub use coordinate::{decode_coordinate, encode_coordinate, EMPTY_TOKEN};
pub use index::{decode_index, encode_index};
pub use prompt::{serialize_window, PromptTemplate, DEFAULT_TEMPLATE};
pub use table_codec::{decode_table, encode_table};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReprError {
    #[error("selected cell ({0}, {1}) lies outside the window")]
    CellOutsideWindow(usize, usize),
    #[error("selected column {0} lies outside the window")]
    ColumnOutsideWindow(usize),
    #[error("prompt template is missing the {0} placeholder")]
    MissingPlaceholder(&'static str),
    #[error("prompt template contains the {0} placeholder more than once")]
    DuplicatePlaceholder(&'static str),
}

/// Result of decoding untrusted selector output.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Decoded {
    pub selection: CellSelection,
    /// Tokens or lines that were dropped, plus shape mismatches.
    pub warnings: usize,
    /// Table-codec only: values that matched more than one window cell.
    pub ambiguous: usize,
}

/// Escapes the cell delimiter, newlines and backslashes.
pub(crate) fn escape_cell(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '|' => out.push_str("\\|"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            _ => out.push(ch),
        }
    }
    out
}

/// Splits a serialized row on unescaped `|`, trims and unescapes each field.
pub(crate) fn split_row(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut current = String::new();
    let mut chars = line.chars();
    while let Some(ch) = chars.next() {
        match ch {
            '\\' => match chars.next() {
                Some('n') => current.push('\n'),
                Some('r') => current.push('\r'),
                Some(other) => current.push(other),
                None => current.push('\\'),
            },
            '|' => fields.push(std::mem::take(&mut current)),
            _ => current.push(ch),
        }
    }
    fields.push(current);
    fields.iter().map(|f| f.trim().to_string()).collect()
}

pub(crate) fn join_row<'a>(cells: impl IntoIterator<Item = &'a String>) -> String {
    cells
        .into_iter()
        .map(|c| escape_cell(c))
        .collect::<Vec<_>>()
        .join(" | ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escape_round_trip() {
        let cells = vec!["a|b".to_string(), "line\nbreak".into(), "back\\slash".into(), "".into()];
        assert_eq!(split_row(&join_row(&cells)), cells);
    }
}
