//! Reader for the sparse `label idx:val ...` text format.

use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};

/// Parses a file of lines `label idx:val idx:val ...` with 1-based feature
/// indices.
///
/// Labels `-1`/`0` map to `0.0` and `1`/`+1` to `1.0`; missing indices are
/// zero; rows are densified to the maximum seen (or `expected_dim`) width.
/// Malformed tokens fail with the offending line number.
pub fn parse_libsvm(path: &Path, expected_dim: Option<usize>) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let file = std::fs::File::open(path)?;
    parse_libsvm_reader(std::io::BufReader::new(file), expected_dim, &path.display().to_string())
}

pub(crate) fn parse_libsvm_reader<R: BufRead>(
    reader: R,
    expected_dim: Option<usize>,
    path: &str,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_string(),
        line,
        msg,
    };
    let mut sparse_rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;
    for (line_no, line) in reader.lines().enumerate() {
        let line_no = line_no + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().unwrap();
        let label = match label_tok {
            "-1" | "-1.0" | "0" | "0.0" => 0.0,
            "1" | "+1" | "1.0" | "+1.0" => 1.0,
            other => {
                return Err(err(line_no, format!("unsupported label {other:?}")));
            }
        };
        let mut row = Vec::new();
        for tok in tokens {
            let (idx_str, val_str) = tok
                .split_once(':')
                .ok_or_else(|| err(line_no, format!("malformed feature token {tok:?}")))?;
            let idx: i64 = idx_str
                .parse()
                .map_err(|_| err(line_no, format!("non-integer feature index {idx_str:?}")))?;
            if idx <= 0 {
                return Err(err(line_no, format!("feature index must be positive, got {idx}")));
            }
            let idx = idx as usize;
            let val: f64 = val_str
                .parse()
                .map_err(|_| err(line_no, format!("non-numeric feature value {val_str:?}")))?;
            if let Some(dim) = expected_dim {
                if idx > dim {
                    return Err(err(
                        line_no,
                        format!("feature index {idx} exceeds expected dimension {dim}"),
                    ));
                }
            }
            max_index = max_index.max(idx);
            row.push((idx, val));
        }
        sparse_rows.push(row);
        labels.push(label);
    }
    let dim = expected_dim.unwrap_or(max_index);
    let rows = sparse_rows
        .into_iter()
        .map(|row| {
            let mut dense = vec![0.0; dim];
            for (idx, val) in row {
                dense[idx - 1] = val;
            }
            dense
        })
        .collect();
    Ok((rows, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str, dim: Option<usize>) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        parse_libsvm_reader(Cursor::new(text), dim, "<test>")
    }

    #[test]
    fn sparse_row_densifies() {
        let (rows, labels) = parse("1 3:0.5\n", Some(4)).unwrap();
        assert_eq!(labels, vec![1.0]);
        assert_eq!(rows[0], vec![0.0, 0.0, 0.5, 0.0]);
    }

    #[test]
    fn negative_label_maps_to_zero() {
        let (rows, labels) = parse("-1 1:2 2:-1\n", None).unwrap();
        assert_eq!(labels, vec![0.0]);
        assert_eq!(rows[0], vec![2.0, -1.0]);
    }

    #[test]
    fn bare_label_gives_zero_row() {
        let (rows, labels) = parse("1\n-1 2:3\n", None).unwrap();
        assert_eq!(labels, vec![1.0, 0.0]);
        assert_eq!(rows[0], vec![0.0, 0.0]);
        assert_eq!(rows[1], vec![0.0, 3.0]);
    }

    #[test]
    fn malformed_tokens_carry_line_numbers() {
        for (text, needle) in [
            ("1 0:2\n", "positive"),
            ("1 a:2\n", "non-integer"),
            ("1 1:x\n", "non-numeric"),
            ("2 1:1\n", "label"),
            ("1 1:1 2\n", "malformed"),
        ] {
            match parse(text, None) {
                Err(Error::Parse { line, msg, .. }) => {
                    assert_eq!(line, 1);
                    assert!(msg.contains(needle), "{msg}");
                }
                other => panic!("expected parse failure, got {other:?}"),
            }
        }
    }

    #[test]
    fn index_beyond_expected_dim_fails() {
        assert!(parse("1 5:1\n", Some(4)).is_err());
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let (rows, labels) = parse("# header\n\n1 1:1 # trailing\n", None).unwrap();
        assert_eq!(labels, vec![1.0]);
        assert_eq!(rows[0], vec![1.0]);
    }
}
