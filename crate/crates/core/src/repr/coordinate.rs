//! The coordinate representation: a grid shaped like the window where each
//! selected cell is written `<r,c>` (window-local, 0-based) and every other
//! cell `<empty,empty>`.

use std::collections::BTreeSet;

use super::{Decoded, ReprError};
use crate::table::{CellSelection, Window};

pub const EMPTY_TOKEN: &str = "<empty,empty>";
const HEADER_MARKER: &str = "headers:";

pub fn encode_coordinate(window: &Window<'_>, selection: &CellSelection) -> Result<String, ReprError> {
    let mut selected = vec![vec![false; window.width()]; window.height()];
    for &coord in selection.cells() {
        let (r, c) = window
            .locate(coord)
            .ok_or(ReprError::CellOutsideWindow(coord.0, coord.1))?;
        selected[r][c] = true;
    }
    let mut header_only = Vec::new();
    let cell_columns: BTreeSet<usize> = selection.cells().iter().map(|&(_, c)| c).collect();
    for &col in selection.columns() {
        let local = window
            .local_col_of(col)
            .ok_or(ReprError::ColumnOutsideWindow(col))?;
        if !cell_columns.contains(&col) {
            header_only.push(local);
        }
    }

    let mut lines: Vec<String> = selected
        .iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(|(c, &on)| if on { format!("<{r},{c}>") } else { EMPTY_TOKEN.to_string() })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    if !header_only.is_empty() {
        let marks: Vec<String> = header_only.iter().map(|c| format!("<header,{c}>")).collect();
        lines.push(format!("{HEADER_MARKER} {}", marks.join(" ")));
    }
    Ok(lines.join("\n"))
}

enum Piece<'s> {
    Token(&'s str),
    Stray,
}

/// Splits a line into `<...>` tokens and runs of stray text.
fn scan(line: &str) -> Vec<Piece<'_>> {
    let mut pieces = Vec::new();
    let mut rest = line.trim_start();
    while !rest.is_empty() {
        if let Some(body) = rest.strip_prefix('<') {
            if let Some(end) = body.find('>') {
                pieces.push(Piece::Token(&body[..end]));
                rest = body[end + 1..].trim_start();
                continue;
            }
            pieces.push(Piece::Stray);
            break;
        }
        let end = rest
            .find(|ch: char| ch == '<' || ch.is_whitespace())
            .unwrap_or(rest.len());
        pieces.push(Piece::Stray);
        rest = rest[end.max(1)..].trim_start();
    }
    pieces
}

fn parse_pair(token: &str) -> Option<(&str, &str)> {
    let (a, b) = token.split_once(',')?;
    Some((a.trim(), b.trim()))
}

/// Decodes model output against `window`. Never fails: malformed tokens,
/// tokens whose indices disagree with their grid position and shape
/// mismatches are each counted as one warning.
pub fn decode_coordinate(text: &str, window: &Window<'_>) -> Decoded {
    let (height, width) = (window.height(), window.width());
    let mut selection = CellSelection::default();
    let mut warnings = 0;
    let mut grid_row = 0;

    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(rest) = line.strip_prefix(HEADER_MARKER) {
            for piece in scan(rest) {
                let col = match piece {
                    Piece::Token(tok) => match parse_pair(tok) {
                        Some(("header", c)) => c.parse::<usize>().ok().filter(|&c| c < width),
                        _ => None,
                    },
                    Piece::Stray => None,
                };
                match col {
                    Some(c) => selection.insert_column(window.global_col(c)),
                    None => warnings += 1,
                }
            }
            continue;
        }

        let r = grid_row;
        grid_row += 1;
        if r >= height {
            warnings += 1;
            continue;
        }
        let pieces = scan(line);
        let mut tokens = 0;
        for piece in pieces {
            let tok = match piece {
                Piece::Token(tok) => tok,
                Piece::Stray => {
                    warnings += 1;
                    continue;
                }
            };
            let c = tokens;
            tokens += 1;
            match parse_pair(tok) {
                Some(("empty", "empty")) => {}
                Some((a, b)) => match (a.parse::<usize>(), b.parse::<usize>()) {
                    (Ok(a), Ok(b)) if a == r && b == c && c < width => {
                        selection.insert_cell((window.global_row(r), window.global_col(c)));
                    }
                    _ => warnings += 1,
                },
                None => warnings += 1,
            }
        }
        if tokens != width {
            warnings += 1;
        }
    }
    if grid_row < height {
        warnings += height - grid_row;
    }
    Decoded {
        selection,
        warnings,
        ambiguous: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Table;

    fn table(rows: usize, cols: usize) -> Table {
        Table::new(
            (0..cols).map(|c| format!("h{c}")).collect(),
            (0..rows)
                .map(|r| (0..cols).map(|c| format!("{r}{c}")).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn empty_selection() {
        let t = table(3, 3);
        let text = encode_coordinate(&t.as_window(), &CellSelection::default()).unwrap();
        assert_eq!(text.matches(EMPTY_TOKEN).count(), 9);
        let d = decode_coordinate(&text, &t.as_window());
        assert!(d.selection.is_empty());
        assert_eq!(d.warnings, 0);
    }

    #[test]
    fn full_selection() {
        let t = table(2, 2);
        let text = encode_coordinate(&t.as_window(), &t.full_selection()).unwrap();
        assert_eq!(text, "<0,0> <0,1>\n<1,0> <1,1>");
    }

    #[test]
    fn maps_local_tokens_to_global() {
        let t = table(6, 6);
        let w = Window::new(&t, 2, 3, 2, 2);
        let d = decode_coordinate("<empty,empty> <0,1>\n<1,0> <empty,empty>", &w);
        assert_eq!(d.warnings, 0);
        assert_eq!(
            d.selection.cells().iter().copied().collect::<Vec<_>>(),
            vec![(2, 4), (3, 3)]
        );
    }

    #[test]
    fn drops_out_of_range_and_misplaced_tokens() {
        let t = table(4, 4);
        let w = t.as_window();
        let mut lines: Vec<String> = (0..4)
            .map(|_| vec![EMPTY_TOKEN; 4].join(" "))
            .collect();
        lines[0] = format!("<9,9> {0} {0} {0}", EMPTY_TOKEN);
        let d = decode_coordinate(&lines.join("\n"), &w);
        assert!(d.selection.is_empty());
        assert_eq!(d.warnings, 1);

        // right grid position, wrong stated indices
        lines[0] = format!("<0,1> {0} {0} {0}", EMPTY_TOKEN);
        assert_eq!(decode_coordinate(&lines.join("\n"), &w).warnings, 1);
    }

    #[test]
    fn garbage_is_total() {
        let t = table(3, 3);
        let d = decode_coordinate("I think the answer is 42 <<<", &t.as_window());
        assert!(d.selection.is_empty());
        assert!(d.warnings > 0);
        assert!(decode_coordinate("", &t.as_window()).warnings > 0);
    }

    #[test]
    fn tolerates_spaces_inside_tokens() {
        let t = table(1, 2);
        let d = decode_coordinate("< 0 , 0 > <empty, empty>", &t.as_window());
        assert_eq!(d.warnings, 0);
        assert_eq!(d.selection.cells().len(), 1);
    }

    #[test]
    fn shape_mismatch_is_warned() {
        let t = table(2, 2);
        let w = t.as_window();
        assert_eq!(decode_coordinate("<0,0> <0,1>", &w).warnings, 1);
        assert_eq!(decode_coordinate("<0,0> <0,1> <empty,empty>\n<1,0> <1,1>", &w).warnings, 1);
        let extra = "<0,0> <0,1>\n<1,0> <1,1>\n<empty,empty> <empty,empty>";
        let d = decode_coordinate(extra, &w);
        assert_eq!(d.warnings, 1);
        assert_eq!(d.selection.cells().len(), 4);
    }

    #[test]
    fn headers_only_round_trip() {
        let t = table(3, 4);
        let w = Window::new(&t, 0, 1, 3, 3);
        let sel = CellSelection::headers_only([1, 3]);
        let text = encode_coordinate(&w, &sel).unwrap();
        assert!(text.ends_with("headers: <header,0> <header,2>"));
        let d = decode_coordinate(&text, &w);
        assert_eq!(d.warnings, 0);
        assert_eq!(d.selection, sel);
    }

    #[test]
    fn encode_rejects_outside_cells() {
        let t = table(5, 5);
        let w = Window::new(&t, 0, 0, 2, 2);
        assert_eq!(
            encode_coordinate(&w, &CellSelection::from_cells([(3, 0)])).unwrap_err(),
            ReprError::CellOutsideWindow(3, 0)
        );
        assert_eq!(
            encode_coordinate(&w, &CellSelection::headers_only([4])).unwrap_err(),
            ReprError::ColumnOutsideWindow(4)
        );
    }
}
