//! Matrix Market (`.mtx`) reading and writing.
//!
//! Supports `coordinate` and `array` storage with `real` or `integer` fields
//! and `general`, `symmetric` or `skew-symmetric` symmetry. Indices are
//! 1-based on disk and 0-based in memory. Duplicate coordinate entries are
//! summed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{DdpsError, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

#[derive(Debug)]
struct Header {
    format: Format,
    symmetry: Symmetry,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DdpsError + '_ {
    move |source| DdpsError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_header(line: &str) -> Result<Header> {
    let tokens: Vec<String> = line
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(DdpsError::parse(1, "missing %%MatrixMarket banner"));
    }
    if tokens[1] != "matrix" {
        return Err(DdpsError::UnsupportedField(format!(
            "object '{}'",
            tokens[1]
        )));
    }
    let format = match tokens[2].as_str() {
        "coordinate" => Format::Coordinate,
        "array" => Format::Array,
        other => return Err(DdpsError::parse(1, format!("unknown format '{other}'"))),
    };
    match tokens[3].as_str() {
        "real" | "double" | "integer" => {}
        other => return Err(DdpsError::UnsupportedField(format!("field '{other}'"))),
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(DdpsError::UnsupportedField(format!("symmetry '{other}'"))),
    };
    Ok(Header { format, symmetry })
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'))
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.ok_or_else(|| DdpsError::parse(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| DdpsError::parse(line, format!("invalid {what}")))
}

/// Parses Matrix Market text into a canonical matrix.
pub fn parse_matrix_market(text: &str) -> Result<CsrMatrix> {
    let first = text
        .lines()
        .next()
        .ok_or_else(|| DdpsError::parse(1, "empty file"))?;
    let header = parse_header(first)?;
    let mut lines = data_lines(text);
    let (size_line, size) = lines
        .next()
        .ok_or_else(|| DdpsError::parse(2, "missing size line"))?;
    let mut tok = size.split_whitespace();
    let n_rows: usize = parse_num(tok.next(), size_line, "row count")?;
    let n_cols: usize = parse_num(tok.next(), size_line, "column count")?;
    if header.symmetry != Symmetry::General && n_rows != n_cols {
        return Err(DdpsError::parse(
            size_line,
            "symmetric storage needs a square matrix",
        ));
    }

    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut push = |i: usize, j: usize, v: f64, line: usize| -> Result<()> {
        match header.symmetry {
            Symmetry::General => entries.push((i, j, v)),
            Symmetry::Symmetric => {
                entries.push((i, j, v));
                if i != j {
                    entries.push((j, i, v));
                }
            }
            Symmetry::SkewSymmetric => {
                if i == j {
                    if v != 0.0 {
                        return Err(DdpsError::parse(
                            line,
                            "nonzero diagonal in skew-symmetric matrix",
                        ));
                    }
                } else {
                    entries.push((i, j, v));
                    entries.push((j, i, -v));
                }
            }
        }
        Ok(())
    };

    match header.format {
        Format::Coordinate => {
            let nnz: usize = parse_num(tok.next(), size_line, "entry count")?;
            let mut seen = 0;
            for (line, l) in lines {
                if seen == nnz {
                    return Err(DdpsError::parse(line, "more entries than declared"));
                }
                let mut t = l.split_whitespace();
                let i: usize = parse_num(t.next(), line, "row index")?;
                let j: usize = parse_num(t.next(), line, "column index")?;
                let v: f64 = parse_num(t.next(), line, "value")?;
                if i == 0 || j == 0 || i > n_rows || j > n_cols {
                    return Err(DdpsError::parse(
                        line,
                        format!("index ({i}, {j}) out of range"),
                    ));
                }
                if header.symmetry != Symmetry::General && j > i {
                    return Err(DdpsError::parse(
                        line,
                        "entry above the diagonal in symmetric storage",
                    ));
                }
                push(i - 1, j - 1, v, line)?;
                seen += 1;
            }
            if seen != nnz {
                return Err(DdpsError::parse(
                    text.lines().count(),
                    format!("expected {nnz} entries, found {seen}"),
                ));
            }
        }
        Format::Array => {
            // column-major; symmetric variants list only the lower triangle
            let mut slots = Vec::new();
            for j in 0..n_cols {
                let start = match header.symmetry {
                    Symmetry::General => 0,
                    Symmetry::Symmetric => j,
                    Symmetry::SkewSymmetric => j + 1,
                };
                slots.extend((start..n_rows).map(|i| (i, j)));
            }
            let mut slot = slots.iter();
            for (line, l) in lines {
                for t in l.split_whitespace() {
                    let &(i, j) = slot.next().ok_or_else(|| {
                        DdpsError::parse(line, "more values than the matrix holds")
                    })?;
                    let v: f64 = parse_num(Some(t), line, "value")?;
                    push(i, j, v, line)?;
                }
            }
            if slot.next().is_some() {
                return Err(DdpsError::parse(text.lines().count(), "too few values"));
            }
        }
    }
    CsrMatrix::from_triplets(n_rows, n_cols, &entries)
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    parse_matrix_market(&read_to_string(path.as_ref())?)
}

/// Reads a vector stored as an `n × 1` (or `1 × n`) Matrix Market matrix.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_vector(&read_to_string(path.as_ref())?)
}

pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let m = parse_matrix_market(text)?;
    if m.n_cols() == 1 {
        let mut v = vec![0.0; m.n_rows()];
        for (i, _, x) in m.triplets() {
            v[i] = x;
        }
        Ok(v)
    } else if m.n_rows() == 1 {
        let mut v = vec![0.0; m.n_cols()];
        for (_, j, x) in m.triplets() {
            v[j] = x;
        }
        Ok(v)
    } else {
        Err(DdpsError::DimensionMismatch {
            expected: 1,
            got: m.n_cols(),
        })
    }
}

/// Writes `a` as `coordinate real general`.
pub fn write_matrix_market(path: impl AsRef<Path>, a: &CsrMatrix) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz())?;
        for (i, j, v) in a.triplets() {
            writeln!(w, "{} {} {}", i + 1, j + 1, v)?;
        }
        w.flush()
    };
    body().map_err(io_err(path))
}

/// Writes `x` as an `n × 1` `array real general` matrix.
pub fn write_vector(path: impl AsRef<Path>, x: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix array real general")?;
        writeln!(w, "{} 1", x.len())?;
        for v in x {
            writeln!(w, "{v}")?;
        }
        w.flush()
    };
    body().map_err(io_err(path))
}
