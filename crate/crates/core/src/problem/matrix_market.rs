//! Matrix Market exchange format: `array` and `coordinate` layouts with
//! `real`/`integer` fields and `general`/`symmetric` symmetry, densified.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// Largest row or column count accepted when densifying.
pub const MAX_DENSE_DIM: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Array,
    Coordinate,
}

pub fn load_matrix_market<T: Scalar>(path: impl AsRef<Path>) -> Result<DenseMatrix<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix_market(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

/// Non-comment, non-blank lines with their 1-based line numbers.
struct DataLines<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> DataLines<R> {
    fn next_data(&mut self) -> Result<Option<(usize, String)>> {
        for line in self.lines.by_ref() {
            self.line_no += 1;
            let line = line.map_err(|source| Error::Io {
                path: Default::default(),
                source,
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('%') {
                continue;
            }
            return Ok(Some((self.line_no, trimmed.to_string())));
        }
        Ok(None)
    }
}

fn parse_index(token: &str, line: usize) -> Result<usize> {
    token.parse::<usize>().map_err(|_| Error::Parse {
        line,
        token: token.to_string(),
    })
}

fn parse_value(token: &str, line: usize) -> Result<f64> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            line,
            token: token.to_string(),
        }),
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> Error {
    Error::MalformedFile {
        line,
        reason: reason.into(),
    }
}

pub fn parse_matrix_market<T: Scalar, R: BufRead>(reader: R) -> Result<DenseMatrix<T>> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|source| Error::Io {
            path: Default::default(),
            source,
        })?,
        None => return Err(Error::UnsupportedFormat("missing %%MatrixMarket header".into())),
    };
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::UnsupportedFormat(format!("bad header {header:?}")));
    }
    let layout = match fields[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(Error::UnsupportedFormat(format!("layout {other:?}"))),
    };
    match fields[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(Error::UnsupportedFormat(format!("field {other:?}"))),
    }
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::UnsupportedFormat(format!("symmetry {other:?}"))),
    };

    let mut data = DataLines { lines, line_no: 1 };
    let (size_line, size) = data
        .next_data()?
        .ok_or_else(|| malformed(data.line_no, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| parse_index(t, size_line))
        .collect::<Result<_>>()?;
    let expected_dims = if layout == Layout::Array { 2 } else { 3 };
    if dims.len() != expected_dims {
        return Err(malformed(size_line, format!("size line needs {expected_dims} integers")));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if rows > MAX_DENSE_DIM || cols > MAX_DENSE_DIM {
        return Err(Error::SizeLimit(format!(
            "{rows}x{cols} exceeds the {MAX_DENSE_DIM}x{MAX_DENSE_DIM} densification limit"
        )));
    }
    if symmetric && rows != cols {
        return Err(malformed(size_line, "symmetric matrix must be square"));
    }
    let mut m = DenseMatrix::<T>::zeros(rows, cols);

    match layout {
        Layout::Array => {
            // column-major; symmetric stores the lower triangle only
            let mut slots = Vec::new();
            for j in 0..cols {
                let start = if symmetric { j } else { 0 };
                for i in start..rows {
                    slots.push((i, j));
                }
            }
            let mut filled = 0;
            while let Some((line, text)) = data.next_data()? {
                for token in text.split_whitespace() {
                    let v = parse_value(token, line)?;
                    let &(i, j) = slots
                        .get(filled)
                        .ok_or_else(|| malformed(line, "more values than the declared size"))?;
                    m[(i, j)] = T::of(v);
                    if symmetric {
                        m[(j, i)] = T::of(v);
                    }
                    filled += 1;
                }
            }
            if filled != slots.len() {
                return Err(malformed(
                    data.line_no,
                    format!("expected {} values, found {filled}", slots.len()),
                ));
            }
        }
        Layout::Coordinate => {
            let nnz = dims[2];
            let mut seen = 0;
            while let Some((line, text)) = data.next_data()? {
                let tokens: Vec<&str> = text.split_whitespace().collect();
                if tokens.len() != 3 {
                    return Err(malformed(line, "coordinate entry needs `row col value`"));
                }
                let i = parse_index(tokens[0], line)?;
                let j = parse_index(tokens[1], line)?;
                let v = T::of(parse_value(tokens[2], line)?);
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(malformed(
                        line,
                        format!("index ({i}, {j}) outside {rows}x{cols}"),
                    ));
                }
                seen += 1;
                if seen > nnz {
                    return Err(malformed(line, format!("more than {nnz} entries")));
                }
                let (i, j) = (i - 1, j - 1);
                m[(i, j)] += v;
                if symmetric && i != j {
                    m[(j, i)] += v;
                }
            }
            if seen != nnz {
                return Err(malformed(
                    data.line_no,
                    format!("declared {nnz} entries, found {seen}"),
                ));
            }
        }
    }
    if !m.data().iter().all(|v| v.is_finite()) {
        return Err(malformed(data.line_no, "entry overflows the scalar type"));
    }
    Ok(m)
}

/// Writes `m` in `array real general` layout with 17 significant digits,
/// enough to reproduce every `f64` exactly.
pub fn write_matrix_market_array<T: Scalar, W: Write>(m: &DenseMatrix<T>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix array real general")?;
    writeln!(out, "{} {}", m.rows(), m.cols())?;
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            writeln!(out, "{:.16e}", m[(i, j)].as_f64())?;
        }
    }
    out.flush()
}

pub fn save_matrix_market_array<T: Scalar>(m: &DenseMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_matrix_market_array(m, BufWriter::new(file)).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<DenseMatrix<f64>> {
        parse_matrix_market(text.as_bytes())
    }

    #[test]
    fn coordinate_symmetric_mirrors() {
        let m = parse("%%MatrixMarket matrix coordinate real symmetric\n% c\n2 2 3\n1 1 2.0\n2 1 1.0\n2 2 2.0\n").unwrap();
        assert_eq!(m.data(), &[2.0, 1.0, 1.0, 2.0]);
        let m = parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 2.0\n2 1 1.0\n").unwrap();
        assert_eq!(m.data(), &[2.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn array_is_column_major() {
        let m = parse("%%MatrixMarket matrix array real general\n2 1\n3\n4\n").unwrap();
        assert_eq!(m.shape(), (2, 1));
        assert_eq!(m.data(), &[3.0, 4.0]);
        let m = parse("%%MatrixMarket matrix array real general\n2 2\n1 2 3 4\n").unwrap();
        assert_eq!(m.data(), &[1.0, 3.0, 2.0, 4.0]);
        let m = parse("%%MatrixMarket matrix array integer symmetric\n2 2\n1\n2\n3\n").unwrap();
        assert_eq!(m.data(), &[1.0, 2.0, 2.0, 3.0]);
    }

    #[test]
    fn empty_coordinate_list_is_zero() {
        let m = parse("%%MatrixMarket matrix coordinate real general\n3 3 0\n").unwrap();
        assert_eq!(m, DenseMatrix::zeros(3, 3));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate complex general\n1 1 0\n"),
            Err(Error::UnsupportedFormat(_))
        ));
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate pattern general\n1 1 0\n"),
            Err(Error::UnsupportedFormat(_))
        ));
        assert!(matches!(parse("hello\n"), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n"),
            Err(Error::MalformedFile { line: 3, .. })
        ));
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse("%%MatrixMarket matrix array real general\n2 2\n1 2 3\n"),
            Err(Error::MalformedFile { .. })
        ));
        assert!(matches!(
            parse("%%MatrixMarket matrix array real general\n6000 1\n"),
            Err(Error::SizeLimit(_))
        ));
    }

    #[test]
    fn array_round_trip_is_exact() {
        let m = DenseMatrix::from_rows(&[
            vec![0.1, -1.0 / 3.0, 1e-300],
            vec![std::f64::consts::PI, 12345.678901234567, -0.0],
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_matrix_market_array(&m, &mut buf).unwrap();
        let back: DenseMatrix<f64> = parse_matrix_market(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }
}
