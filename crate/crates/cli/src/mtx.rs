//! Matrix Market reader for real dense matrices (`coordinate` and `array`
//! layouts, `general` and `symmetric` storage).

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MtxError {
    #[error("{path}: {source}")]
    Io { path: String, source: IoMessage },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// `std::io::Error` is not `PartialEq`; keep its message only.
#[derive(Debug, Error, PartialEq)]
#[error("{0}")]
pub struct IoMessage(pub String);

fn parse_err(line: usize, message: impl Into<String>) -> MtxError {
    MtxError::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Storage {
    General,
    Symmetric,
}

pub fn read_file(path: &Path) -> Result<DMatrix<f64>, MtxError> {
    let text = fs::read_to_string(path).map_err(|e| MtxError::Io {
        path: path.display().to_string(),
        source: IoMessage(e.to_string()),
    })?;
    parse(&text)
}

fn parse_header(line: &str) -> Result<(Layout, Storage), MtxError> {
    let words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(parse_err(1, "expected a %%MatrixMarket header"));
    }
    if words.len() != 5 {
        return Err(parse_err(
            1,
            format!("header needs 4 fields after %%MatrixMarket, found {}", words.len() - 1),
        ));
    }
    if words[1] != "matrix" {
        return Err(parse_err(1, format!("unsupported object `{}`", words[1])));
    }
    let layout = match words[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(1, format!("unsupported format `{other}`"))),
    };
    match words[3].as_str() {
        "real" | "double" | "integer" => {}
        other => {
            return Err(parse_err(
                1,
                format!("unsupported field `{other}` (need real or integer)"),
            ))
        }
    }
    let storage = match words[4].as_str() {
        "general" => Storage::General,
        "symmetric" => Storage::Symmetric,
        other => return Err(parse_err(1, format!("unsupported symmetry `{other}`"))),
    };
    Ok((layout, storage))
}

fn number<T: std::str::FromStr>(token: Option<&str>, line: usize, what: &str) -> Result<T, MtxError> {
    let token = token.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from `{token}`")))
}

/// Parses Matrix Market text into a dense matrix. Symmetric storage is
/// expanded; entries above the diagonal in symmetric files are rejected.
pub fn parse(text: &str) -> Result<DMatrix<f64>, MtxError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let (layout, storage) = parse_header(header)?;
    let mut data = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));

    let (size_line, size) = data.next().ok_or_else(|| parse_err(1, "missing size line"))?;
    let mut it = size.split_whitespace();
    let rows: usize = number(it.next(), size_line, "row count")?;
    let cols: usize = number(it.next(), size_line, "column count")?;
    let nnz = match layout {
        Layout::Coordinate => Some(number::<usize>(it.next(), size_line, "entry count")?),
        Layout::Array => None,
    };
    if it.next().is_some() {
        return Err(parse_err(size_line, "unexpected extra fields on size line"));
    }
    if storage == Storage::Symmetric && rows != cols {
        return Err(parse_err(
            size_line,
            format!("symmetric matrix must be square, got {rows}x{cols}"),
        ));
    }

    let mut a = DMatrix::zeros(rows, cols);
    match layout {
        Layout::Coordinate => {
            let nnz = nnz.unwrap_or(0);
            let mut seen = 0;
            for (line, text) in data {
                if seen == nnz {
                    return Err(parse_err(line, format!("more than the declared {nnz} entries")));
                }
                let mut it = text.split_whitespace();
                let i: usize = number(it.next(), line, "row index")?;
                let j: usize = number(it.next(), line, "column index")?;
                let v: f64 = number(it.next(), line, "value")?;
                if it.next().is_some() {
                    return Err(parse_err(line, "unexpected extra fields"));
                }
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(line, format!("index ({i}, {j}) outside {rows}x{cols}")));
                }
                if storage == Storage::Symmetric && j > i {
                    return Err(parse_err(
                        line,
                        format!("entry ({i}, {j}) above the diagonal in symmetric storage"),
                    ));
                }
                a[(i - 1, j - 1)] += v;
                if storage == Storage::Symmetric && i != j {
                    a[(j - 1, i - 1)] += v;
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(parse_err(size_line, format!("declared {nnz} entries, found {seen}")));
            }
        }
        Layout::Array => {
            let slots: Vec<(usize, usize)> = match storage {
                Storage::General => (0..cols).flat_map(|j| (0..rows).map(move |i| (i, j))).collect(),
                Storage::Symmetric => (0..cols).flat_map(|j| (j..rows).map(move |i| (i, j))).collect(),
            };
            let mut slot = slots.iter();
            for (line, text) in data {
                for token in text.split_whitespace() {
                    let &(i, j) = slot
                        .next()
                        .ok_or_else(|| parse_err(line, format!("more than the expected {} values", slots.len())))?;
                    let v: f64 = number(Some(token), line, "value")?;
                    a[(i, j)] = v;
                    if storage == Storage::Symmetric {
                        a[(j, i)] = v;
                    }
                }
            }
            let missing = slot.count();
            if missing > 0 {
                return Err(parse_err(
                    size_line,
                    format!("{missing} values missing from array data"),
                ));
            }
        }
    }
    Ok(a)
}
