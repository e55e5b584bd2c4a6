//! Plain-text lifetime data: whitespace- or comma-separated positive
//! decimals, with `#` comment lines.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

const TABLE1: &str = include_str!("../data/table1.txt");

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: '{token}' is not a number")]
    NonNumeric { line: usize, column: usize, token: String },
    #[error("value {index} is {value}; lifetimes must be positive")]
    NonPositive { index: usize, value: f64 },
    #[error("line {line}: expected 2 columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("no values found")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    File,
    Embedded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub values: Vec<f64>,
    pub source: Source,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Rows of tokens with their 1-based line number and per-token column.
fn tokenize(text: &str) -> impl Iterator<Item = (usize, Vec<(usize, &str)>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        if line.trim_start().starts_with('#') {
            return None;
        }
        let mut toks = Vec::new();
        let mut start = None;
        for (pos, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
            let sep = ch.is_whitespace() || ch == ',';
            match (sep, start) {
                (false, None) => start = Some(pos),
                (true, Some(s)) => {
                    toks.push((line[..s].chars().count() + 1, &line[s..pos]));
                    start = None;
                }
                _ => {}
            }
        }
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

fn number(line: usize, column: usize, token: &str) -> Result<f64, DatasetError> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(DatasetError::NonNumeric {
            line,
            column,
            token: token.to_string(),
        }),
    }
}

/// Parses every token in order. Nonpositive values are reported by their
/// 1-based position in the value sequence.
pub fn parse_values(text: &str) -> Result<Vec<f64>, DatasetError> {
    let mut out = Vec::new();
    for (line, toks) in tokenize(text) {
        for (column, tok) in toks {
            let v = number(line, column, tok)?;
            if v <= 0.0 {
                return Err(DatasetError::NonPositive {
                    index: out.len() + 1,
                    value: v,
                });
            }
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(out)
}

/// Two-column variant; every data line must hold exactly one pair.
/// Nonpositive values are indexed in row-major order.
pub fn parse_pairs(text: &str) -> Result<Vec<[f64; 2]>, DatasetError> {
    let mut out = Vec::new();
    for (line, toks) in tokenize(text) {
        if toks.len() != 2 {
            return Err(DatasetError::ColumnCount {
                line,
                found: toks.len(),
            });
        }
        let mut pair = [0.0; 2];
        for (j, (column, tok)) in toks.into_iter().enumerate() {
            let v = number(line, column, tok)?;
            if v <= 0.0 {
                return Err(DatasetError::NonPositive {
                    index: 2 * out.len() + j + 1,
                    value: v,
                });
            }
            pair[j] = v;
        }
        out.push(pair);
    }
    if out.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String, DatasetError> {
    std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    Ok(Dataset {
        name: path.display().to_string(),
        values: parse_values(&read(path)?)?,
        source: Source::File,
    })
}

pub fn load_pairs(path: impl AsRef<Path>) -> Result<Vec<[f64; 2]>, DatasetError> {
    parse_pairs(&read(path.as_ref())?)
}

/// Birnbaum and Saunders (1958) fatigue lifetimes of 101 aluminum
/// 6061-T6 specimens at 31,000 psi, in thousands of cycles.
pub fn embedded_table1() -> Dataset {
    Dataset {
        name: "table1".into(),
        values: parse_values(TABLE1).expect("embedded table parses"),
        source: Source::Embedded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whitespace_and_newlines() {
        assert_eq!(parse_values("70 90 96\n97").unwrap(), vec![70.0, 90.0, 96.0, 97.0]);
    }

    #[test]
    fn comments_and_commas() {
        assert_eq!(parse_values("# header\n1.5, 2.5").unwrap(), vec![1.5, 2.5]);
        assert_eq!(parse_values("1,2,,3\t4\r\n").unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn nonpositive_value_names_its_index() {
        match parse_values("1 -2 3") {
            Err(DatasetError::NonPositive { index, value }) => assert_eq!((index, value), (2, -2.0)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_values("0"), Err(DatasetError::NonPositive { index: 1, .. })));
    }

    #[test]
    fn non_numeric_token_has_position() {
        match parse_values("1 2\n3 abc") {
            Err(DatasetError::NonNumeric { line, column, token }) => {
                assert_eq!((line, column, token.as_str()), (2, 3, "abc"))
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_values("inf"), Err(DatasetError::NonNumeric { .. })));
    }

    #[test]
    fn empty_input() {
        assert!(matches!(parse_values("# nothing\n\n"), Err(DatasetError::Empty)));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(load_dataset("/nonexistent/x.txt"), Err(DatasetError::Io { .. })));
    }

    #[test]
    fn pairs() {
        assert_eq!(parse_pairs("1 2\n3,4").unwrap(), vec![[1.0, 2.0], [3.0, 4.0]]);
        assert!(matches!(parse_pairs("1 2 3"), Err(DatasetError::ColumnCount { line: 1, found: 3 })));
        assert!(matches!(parse_pairs("1 2\n3 -4"), Err(DatasetError::NonPositive { index: 4, .. })));
    }

    #[test]
    fn table1_contents() {
        let d = embedded_table1();
        assert_eq!(d.len(), 101);
        assert_eq!(d.values[0], 70.0);
        assert_eq!(d.values[100], 212.0);
        assert_eq!(d.values.iter().cloned().fold(f64::INFINITY, f64::min), 70.0);
        assert_eq!(d.values.iter().cloned().fold(0.0, f64::max), 212.0);
        assert_eq!(d.values.iter().sum::<f64>(), 13507.0);
        assert!(d.values.windows(2).all(|w| w[0] <= w[1]));
    }
}
