//! Matrix Market ingestion: coordinate and array files, real or complex,
//! with symmetry unfolded into explicit general storage.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::{Cx, Real};
use crate::sparse::{SparseError, SparseMatrix};

#[derive(Debug, Error)]
pub enum MmError {
    #[error("i/o error reading matrix file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },
    #[error("pattern-only matrices carry no numeric content")]
    PatternUnsupported,
    #[error(transparent)]
    Construction(#[from] SparseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

fn malformed(line: usize, msg: impl Into<String>) -> MmError {
    MmError::Malformed {
        line,
        msg: msg.into(),
    }
}

/// Loads a Matrix Market file into a square complex CSR matrix.
/// Real input is promoted to complex; symmetric/hermitian/skew storage is
/// expanded into explicit entries; duplicate coordinates are summed.
pub fn mm_load<T: Real, P: AsRef<Path>>(path: P) -> Result<SparseMatrix<T>, MmError> {
    let file = File::open(path)?;
    mm_read(BufReader::new(file))
}

/// Parser entry point over any buffered reader (testable from strings).
pub fn mm_read<T: Real, R: BufRead>(reader: R) -> Result<SparseMatrix<T>, MmError> {
    let mut lines = reader.lines().enumerate();

    let (banner_no, banner) = match lines.next() {
        Some((no, line)) => (no + 1, line?),
        None => return Err(malformed(1, "empty file")),
    };
    let tokens: Vec<String> = banner.split_whitespace().map(|t| t.to_lowercase()).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(malformed(
            banner_no,
            "expected banner '%%MatrixMarket matrix <format> <field> <symmetry>'",
        ));
    }
    let format = match tokens[2].as_str() {
        "coordinate" => Format::Coordinate,
        "array" => Format::Array,
        other => return Err(malformed(banner_no, format!("unknown format '{other}'"))),
    };
    let field = match tokens[3].as_str() {
        "real" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        "pattern" => return Err(MmError::PatternUnsupported),
        other => return Err(malformed(banner_no, format!("unknown field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(malformed(banner_no, format!("unknown symmetry '{other}'"))),
    };

    // skip comments, find the size line
    let (size_no, size_line) = loop {
        match lines.next() {
            Some((no, line)) => {
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('%') {
                    continue;
                }
                break (no + 1, line);
            }
            None => return Err(malformed(banner_no + 1, "missing size line")),
        }
    };
    let size_tokens: Vec<&str> = size_line.split_whitespace().collect();

    match format {
        Format::Coordinate => {
            if size_tokens.len() != 3 {
                return Err(malformed(size_no, "expected 'rows cols nnz'"));
            }
            let rows = parse_usize(size_tokens[0], size_no)?;
            let cols = parse_usize(size_tokens[1], size_no)?;
            let nnz = parse_usize(size_tokens[2], size_no)?;
            if rows != cols {
                return Err(MmError::NonSquare { rows, cols });
            }
            let n = rows;
            let mut triplets: Vec<(usize, usize, Cx<T>)> = Vec::with_capacity(2 * nnz);
            let mut seen = 0usize;
            for (no, line) in lines {
                let line_no = no + 1;
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('%') {
                    continue;
                }
                let toks: Vec<&str> = trimmed.split_whitespace().collect();
                let expected = match field {
                    Field::Complex => 4,
                    _ => 3,
                };
                if toks.len() != expected {
                    return Err(malformed(
                        line_no,
                        format!("expected {expected} tokens, found {}", toks.len()),
                    ));
                }
                let i = parse_usize(toks[0], line_no)?;
                let j = parse_usize(toks[1], line_no)?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(malformed(line_no, format!("index ({i}, {j}) out of range")));
                }
                let value = parse_value::<T>(&toks[2..], field, line_no)?;
                let (i, j) = (i - 1, j - 1);
                triplets.push((i, j, value));
                if i != j {
                    match symmetry {
                        Symmetry::General => {}
                        Symmetry::Symmetric => triplets.push((j, i, value)),
                        Symmetry::SkewSymmetric => triplets.push((j, i, -value)),
                        Symmetry::Hermitian => triplets.push((j, i, value.conj())),
                    }
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(malformed(
                    size_no,
                    format!("header declares {nnz} entries, file holds {seen}"),
                ));
            }
            Ok(SparseMatrix::from_triplets(n, triplets)?)
        }
        Format::Array => {
            if size_tokens.len() != 2 {
                return Err(malformed(size_no, "expected 'rows cols'"));
            }
            let rows = parse_usize(size_tokens[0], size_no)?;
            let cols = parse_usize(size_tokens[1], size_no)?;
            if rows != cols {
                return Err(MmError::NonSquare { rows, cols });
            }
            let n = rows;
            // stored entries run column-major; non-general files keep only
            // the lower triangle (skew-symmetric omits the diagonal)
            let mut slots: Vec<(usize, usize)> = Vec::new();
            for j in 0..n {
                let start = match symmetry {
                    Symmetry::General => 0,
                    Symmetry::Symmetric | Symmetry::Hermitian => j,
                    Symmetry::SkewSymmetric => j + 1,
                };
                for i in start..n {
                    slots.push((i, j));
                }
            }
            let mut triplets: Vec<(usize, usize, Cx<T>)> = Vec::with_capacity(2 * slots.len());
            let mut k = 0usize;
            for (no, line) in lines {
                let line_no = no + 1;
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('%') {
                    continue;
                }
                let toks: Vec<&str> = trimmed.split_whitespace().collect();
                let expected = match field {
                    Field::Complex => 2,
                    _ => 1,
                };
                if toks.len() != expected {
                    return Err(malformed(
                        line_no,
                        format!("expected {expected} tokens, found {}", toks.len()),
                    ));
                }
                if k >= slots.len() {
                    return Err(malformed(line_no, "more entries than the header declares"));
                }
                let value = parse_value::<T>(&toks, field, line_no)?;
                let (i, j) = slots[k];
                k += 1;
                triplets.push((i, j, value));
                if i != j {
                    match symmetry {
                        Symmetry::General => {}
                        Symmetry::Symmetric => triplets.push((j, i, value)),
                        Symmetry::SkewSymmetric => triplets.push((j, i, -value)),
                        Symmetry::Hermitian => triplets.push((j, i, value.conj())),
                    }
                }
            }
            if k != slots.len() {
                return Err(malformed(
                    size_no,
                    format!("expected {} stored entries, file holds {k}", slots.len()),
                ));
            }
            Ok(SparseMatrix::from_triplets(n, triplets)?)
        }
    }
}

fn parse_usize(tok: &str, line: usize) -> Result<usize, MmError> {
    tok.parse::<usize>()
        .map_err(|_| malformed(line, format!("invalid integer '{tok}'")))
}

fn parse_real<T: Real>(tok: &str, line: usize) -> Result<T, MmError> {
    let x: f64 = tok
        .parse()
        .map_err(|_| malformed(line, format!("invalid number '{tok}'")))?;
    Ok(T::real(x))
}

fn parse_value<T: Real>(toks: &[&str], field: Field, line: usize) -> Result<Cx<T>, MmError> {
    match field {
        Field::Real | Field::Integer => {
            Ok(Complex::new(parse_real::<T>(toks[0], line)?, T::zero()))
        }
        Field::Complex => Ok(Complex::new(
            parse_real::<T>(toks[0], line)?,
            parse_real::<T>(toks[1], line)?,
        )),
    }
}
