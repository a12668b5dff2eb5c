//! Comma-separated numeric tables with a header row. Floats are written in
//! shortest round-trip decimal form so a write/read cycle reproduces the
//! matrix bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};
use opcost_core::model::{Dataset, UnlabeledSet};

use crate::CliError;

pub const LABEL_COLUMN: &str = "y";

/// A parsed table: header names plus a dense row-major body.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                first = false;
                if v.is_nan() {
                    out.push_str("nan");
                } else {
                    let _ = write!(out, "{v}");
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Parse CSV text. Rejects ragged rows and non-numeric cells with the
/// offending line number (1-based, header is line 1).
pub fn parse_table(text: &str) -> Result<Table, CliError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::Parse("empty table: missing header row".into()))?;
    let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
    if columns.iter().any(|c| c.is_empty()) {
        return Err(CliError::Parse("line 1: empty column name".into()));
    }
    {
        let mut seen = std::collections::HashSet::new();
        for c in &columns {
            if !seen.insert(c) {
                return Err(CliError::Parse(format!("line 1: duplicate column name '{c}'")));
            }
        }
    }
    let mut table = Table::new(columns);
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != table.columns.len() {
            return Err(CliError::Parse(format!(
                "line {lineno}: {} cells, expected {}",
                cells.len(),
                table.columns.len()
            )));
        }
        let mut row = Vec::with_capacity(cells.len());
        for cell in cells {
            let trimmed = cell.trim();
            let value: f64 = trimmed
                .parse()
                .map_err(|_| CliError::Parse(format!("line {lineno}: non-numeric cell '{trimmed}'")))?;
            row.push(value);
        }
        table.rows.push(row);
    }
    Ok(table)
}

/// Parse labeled data: requires a column named `y`, all other columns become
/// features in header order.
pub fn parse_dataset_str(text: &str) -> Result<Dataset, CliError> {
    let table = parse_table(text)?;
    let Some(label_at) = table.column_index(LABEL_COLUMN) else {
        return Err(CliError::Parse(format!(
            "labeled data needs a '{LABEL_COLUMN}' column; found: {}",
            table.columns.join(",")
        )));
    };
    if table.columns.len() < 2 {
        return Err(CliError::Parse("labeled data needs at least one feature column".into()));
    }
    if table.rows.is_empty() {
        return Err(CliError::Parse("labeled data has no rows".into()));
    }
    let p = table.columns.len() - 1;
    let n = table.rows.len();
    let feature_names: Vec<String> = table
        .columns
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != label_at)
        .map(|(_, c)| c.clone())
        .collect();
    let mut x = Array2::zeros((n, p));
    let mut y = Array1::zeros(n);
    for (i, row) in table.rows.iter().enumerate() {
        let mut col = 0;
        for (j, &v) in row.iter().enumerate() {
            if j == label_at {
                y[i] = v;
            } else {
                x[(i, col)] = v;
                col += 1;
            }
        }
    }
    Dataset::new(x, y, feature_names).map_err(CliError::from)
}

/// Parse unlabeled instances: a `y` column is an error here.
pub fn parse_unlabeled_str(text: &str) -> Result<UnlabeledSet, CliError> {
    let table = parse_table(text)?;
    if table.column_index(LABEL_COLUMN).is_some() {
        return Err(CliError::Parse(format!(
            "unlabeled data must not carry a '{LABEL_COLUMN}' column"
        )));
    }
    if table.rows.is_empty() {
        return Err(CliError::Parse("unlabeled data has no rows".into()));
    }
    let n = table.rows.len();
    let p = table.columns.len();
    let mut x = Array2::zeros((n, p));
    for (i, row) in table.rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    UnlabeledSet::new(x).map_err(CliError::from)
}

pub fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_dataset_str(&text).map_err(|e| e.with_context(path))
}

pub fn load_unlabeled(path: &Path) -> Result<UnlabeledSet, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_unlabeled_str(&text).map_err(|e| e.with_context(path))
}

/// Serialize a dataset with the label in the last column.
pub fn dataset_to_csv(data: &Dataset) -> String {
    let mut columns = data.feature_names.clone();
    columns.push(LABEL_COLUMN.to_string());
    let mut table = Table::new(columns);
    for i in 0..data.n() {
        let mut row: Vec<f64> = data.x.row(i).to_vec();
        row.push(data.y[i]);
        table.push_row(row);
    }
    table.to_csv()
}

pub fn unlabeled_to_csv(unl: &UnlabeledSet, feature_names: &[String]) -> String {
    let mut table = Table::new(feature_names.to_vec());
    for i in 0..unl.m() {
        table.push_row(unl.x.row(i).to_vec());
    }
    table.to_csv()
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_row_dataset() {
        let data = parse_dataset_str("x1,x2,y\n1,2,3\n4,5,6\n").unwrap();
        assert_eq!(data.n(), 2);
        assert_eq!(data.p(), 2);
        assert_eq!(data.y.to_vec(), vec![3.0, 6.0]);
        assert_eq!(data.feature_names, vec!["x1", "x2"]);
    }

    #[test]
    fn label_column_position_is_free() {
        let data = parse_dataset_str("y,x1\n3,1\n6,4\n").unwrap();
        assert_eq!(data.y.to_vec(), vec![3.0, 6.0]);
        assert_eq!(data.x.column(0).to_vec(), vec![1.0, 4.0]);
    }

    #[test]
    fn missing_label_is_an_error() {
        let err = parse_dataset_str("x1,x2\n1,2\n").unwrap_err();
        assert!(err.to_string().contains("'y' column"));
    }

    #[test]
    fn unlabeled_rejects_label() {
        let err = parse_unlabeled_str("x1,y\n1,2\n").unwrap_err();
        assert!(err.to_string().contains("must not carry"));
    }

    #[test]
    fn ragged_row_reports_line_number() {
        let err = parse_dataset_str("x1,y\n1,2\n3\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn non_numeric_cell_reports_line_number() {
        let err = parse_dataset_str("x1,y\n1,two\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(err.to_string().contains("two"));
    }

    #[test]
    fn nan_cells_parse_in_generic_tables() {
        let t = parse_table("a,b\n1,nan\n").unwrap();
        assert!(t.rows[0][1].is_nan());
    }

    proptest! {
        /// Write-then-parse reproduces the dataset bit-exactly.
        #[test]
        fn dataset_roundtrip(raw in proptest::collection::vec(
            proptest::collection::vec(-1e12f64..1e12, 3), 1..20)) {
            let n = raw.len();
            let mut x = Array2::zeros((n, 2));
            let mut y = Array1::zeros(n);
            for (i, row) in raw.iter().enumerate() {
                x[(i, 0)] = row[0];
                x[(i, 1)] = row[1];
                y[i] = row[2];
            }
            let data = Dataset::new(x, y, vec!["x1".into(), "x2".into()]).unwrap();
            let text = dataset_to_csv(&data);
            let back = parse_dataset_str(&text).unwrap();
            prop_assert_eq!(data.x, back.x);
            prop_assert_eq!(data.y, back.y);
        }

        /// The parser never panics on arbitrary input.
        #[test]
        fn parser_total_on_arbitrary_text(text in ".{0,400}") {
            let _ = parse_dataset_str(&text);
            let _ = parse_unlabeled_str(&text);
            let _ = parse_table(&text);
        }
    }
}
