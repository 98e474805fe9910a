//! LIBSVM text format: `label idx:val idx:val ...` with 1-based, strictly
//! increasing feature indices. Labels are discarded.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use log::warn;

use super::MAX_DENSE_DIM;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LibsvmOptions {
    /// Stop after this many kept rows.
    pub max_rows: Option<usize>,
    /// Column count; defaults to the largest index seen.
    pub n_features: Option<usize>,
}

pub fn load_libsvm<T: Scalar>(path: impl AsRef<Path>, opts: LibsvmOptions) -> Result<DenseMatrix<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_libsvm(BufReader::new(file), opts).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

pub fn parse_libsvm<T: Scalar, R: BufRead>(reader: R, opts: LibsvmOptions) -> Result<DenseMatrix<T>> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut max_index = 0;
    let mut dropped = 0;
    for (line_idx, line) in reader.lines().enumerate() {
        if opts.max_rows.is_some_and(|limit| rows.len() >= limit) {
            break;
        }
        let line_no = line_idx + 1;
        let line = line.map_err(|source| Error::Io {
            path: Default::default(),
            source,
        })?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label = tokens.next().expect("nonempty line has a token");
        if label.parse::<f64>().is_err() {
            return Err(Error::Parse {
                line: line_no,
                token: label.to_string(),
            });
        }
        let mut entries = Vec::new();
        let mut last = 0;
        for token in tokens {
            let (idx, val) = token.split_once(':').ok_or_else(|| Error::MalformedFile {
                line: line_no,
                reason: format!("feature {token:?} is not idx:val"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line: line_no,
                token: idx.to_string(),
            })?;
            let val: f64 = match val.parse::<f64>() {
                Ok(v) if v.is_finite() => v,
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        token: val.to_string(),
                    })
                }
            };
            if idx <= last {
                return Err(Error::MalformedFile {
                    line: line_no,
                    reason: format!("feature index {idx} does not increase past {last}"),
                });
            }
            if let Some(n) = opts.n_features {
                if idx > n {
                    return Err(Error::MalformedFile {
                        line: line_no,
                        reason: format!("feature index {idx} exceeds declared {n} features"),
                    });
                }
            }
            last = idx;
            if val != 0.0 {
                entries.push((idx - 1, val));
            }
        }
        if entries.is_empty() {
            dropped += 1;
            continue;
        }
        max_index = max_index.max(last);
        rows.push(entries);
    }
    if dropped > 0 {
        warn!("dropped {dropped} all-zero LIBSVM rows");
    }
    let cols = opts.n_features.unwrap_or(max_index);
    if rows.is_empty() || cols == 0 {
        return Err(Error::EmptyMatrix);
    }
    if rows.len() > MAX_DENSE_DIM || cols > MAX_DENSE_DIM {
        return Err(Error::SizeLimit(format!(
            "{}x{cols} exceeds the {MAX_DENSE_DIM}x{MAX_DENSE_DIM} densification limit",
            rows.len()
        )));
    }
    let mut m = DenseMatrix::zeros(rows.len(), cols);
    for (i, entries) in rows.iter().enumerate() {
        for &(j, v) in entries {
            m[(i, j)] = T::of(v);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<DenseMatrix<f64>> {
        parse_libsvm(text.as_bytes(), LibsvmOptions::default())
    }

    #[test]
    fn expands_sparse_rows() {
        let m = parse("1 1:2 3:1\n0 2:5\n").unwrap();
        assert_eq!(m.shape(), (2, 3));
        assert_eq!(m.data(), &[2.0, 0.0, 1.0, 0.0, 5.0, 0.0]);
    }

    #[test]
    fn drops_zero_rows_and_honours_options() {
        let m = parse("1 1:0 2:0\n-1 2:3\n").unwrap();
        assert_eq!(m.shape(), (1, 2));
        let opts = LibsvmOptions {
            max_rows: Some(1),
            n_features: Some(4),
        };
        let m: DenseMatrix<f64> = parse_libsvm("1 1:1\n1 2:1\n".as_bytes(), opts).unwrap();
        assert_eq!(m.shape(), (1, 4));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse(""), Err(Error::EmptyMatrix)));
        assert!(matches!(parse("1 2:1 2:3\n"), Err(Error::MalformedFile { line: 1, .. })));
        assert!(matches!(parse("1 3:1 2:3\n"), Err(Error::MalformedFile { .. })));
        assert!(matches!(parse("1 1:x\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("abc 1:1\n"), Err(Error::Parse { .. })));
    }
}
