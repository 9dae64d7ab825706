//! Matrix Market reader and writer.
//!
//! Coordinate and array formats, `real` field only, `general` or `symmetric`
//! storage. Indices are 1-based on disk and 0-based in memory. The writer
//! always emits coordinate/general with `{}`-formatted values, which parse
//! back bitwise, so write-then-read is the identity on entries.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use softsvd::linalg::{DenseMatrix, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

pub fn read_matrix_market(path: &Path) -> Result<SparseMatrix<f64>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_matrix_market(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_matrix_market(path: &Path, m: &SparseMatrix<f64>) -> Result<()> {
    fs::write(path, to_coordinate_string(m))
        .with_context(|| format!("writing {}", path.display()))
}

pub fn to_coordinate_string(m: &SparseMatrix<f64>) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    out.push_str(&format!("{} {} {}\n", m.nrows(), m.ncols(), m.nnz()));
    for (i, j, v) in m.iter_entries() {
        out.push_str(&format!("{} {} {}\n", i + 1, j + 1, v));
    }
    out
}

pub fn parse_matrix_market(text: &str) -> Result<SparseMatrix<f64>> {
    let mut lines = text.lines().enumerate();

    let header = lines.next().ok_or_else(|| anyhow!("line 1: empty file"))?.1;
    let (format, symmetry) = parse_header(header)?;

    let (size_no, size_line) = next_content(&mut lines)
        .ok_or_else(|| anyhow!("unexpected end of file: missing size line"))?;

    match format {
        Format::Coordinate => parse_coordinate(size_no, size_line, symmetry, &mut lines),
        Format::Array => parse_array(size_no, size_line, symmetry, &mut lines),
    }
}

/// Next non-blank, non-comment line as `(1-based line number, trimmed text)`.
fn next_content<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
) -> Option<(usize, &'a str)> {
    for (idx, line) in lines {
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('%') {
            return Some((idx + 1, t));
        }
    }
    None
}

fn parse_header(header: &str) -> Result<(Format, Symmetry)> {
    let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if tokens.first().map(String::as_str) != Some("%%matrixmarket") {
        bail!("line 1: missing `%%MatrixMarket` banner");
    }
    if tokens.len() != 5 {
        bail!("line 1: expected `%%MatrixMarket matrix <format> <field> <symmetry>`");
    }
    if tokens[1] != "matrix" {
        bail!("line 1: unsupported object `{}` (only `matrix`)", tokens[1]);
    }
    let format = match tokens[2].as_str() {
        "coordinate" => Format::Coordinate,
        "array" => Format::Array,
        other => bail!("line 1: unsupported format `{other}` (only `coordinate` or `array`)"),
    };
    if tokens[3] != "real" {
        bail!("line 1: unsupported field `{}` (only `real`)", tokens[3]);
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => bail!("line 1: unsupported symmetry `{other}` (only `general` or `symmetric`)"),
    };
    Ok((format, symmetry))
}

fn parse_value(no: usize, token: &str) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| anyhow!("line {no}: `{token}` is not a real value"))?;
    if !v.is_finite() {
        bail!("line {no}: non-finite value `{token}`");
    }
    Ok(v)
}

fn parse_coordinate<'a>(
    size_no: usize,
    size_line: &str,
    symmetry: Symmetry,
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
) -> Result<SparseMatrix<f64>> {
    let size_err = || anyhow!("line {size_no}: malformed size line (expected `rows cols nnz`)");
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| size_err()))
        .collect::<Result<_>>()?;
    let [nrows, ncols, nnz] = dims[..] else {
        return Err(size_err());
    };
    if symmetry == Symmetry::Symmetric && nrows != ncols {
        bail!("line {size_no}: symmetric header requires a square matrix, got {nrows}x{ncols}");
    }

    let mut triplets = Vec::with_capacity(nnz);
    let mut seen = HashSet::with_capacity(nnz);
    for k in 0..nnz {
        let (no, line) = next_content(lines).ok_or_else(|| {
            anyhow!("unexpected end of file: expected {nnz} entries, found {k}")
        })?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let [i, j, v] = tokens[..] else {
            bail!("line {no}: malformed entry (expected `row col value`)");
        };
        let entry_err = |what: &str, tok: &str| {
            anyhow!("line {no}: {what} index `{tok}` is not a positive integer")
        };
        let i: usize = i.parse().map_err(|_| entry_err("row", i))?;
        let j: usize = j.parse().map_err(|_| entry_err("column", j))?;
        let v = parse_value(no, v)?;
        if i < 1 || i > nrows {
            bail!("line {no}: row index {i} out of range for {nrows}x{ncols} matrix");
        }
        if j < 1 || j > ncols {
            bail!("line {no}: column index {j} out of range for {nrows}x{ncols} matrix");
        }
        if symmetry == Symmetry::Symmetric && j > i {
            bail!("line {no}: symmetric storage must reference the lower triangle");
        }
        if !seen.insert((i, j)) {
            bail!("line {no}: duplicate entry ({i}, {j})");
        }
        triplets.push((i - 1, j - 1, v));
        if symmetry == Symmetry::Symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
    }
    if let Some((no, _)) = next_content(lines) {
        bail!("line {no}: unexpected data after {nnz} entries");
    }
    SparseMatrix::from_triplets(nrows, ncols, triplets).map_err(|e| anyhow!("{e}"))
}

fn parse_array<'a>(
    size_no: usize,
    size_line: &str,
    symmetry: Symmetry,
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
) -> Result<SparseMatrix<f64>> {
    let size_err = || anyhow!("line {size_no}: malformed size line (expected `rows cols`)");
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| size_err()))
        .collect::<Result<_>>()?;
    let [nrows, ncols] = dims[..] else {
        return Err(size_err());
    };
    if symmetry == Symmetry::Symmetric && nrows != ncols {
        bail!("line {size_no}: symmetric header requires a square matrix, got {nrows}x{ncols}");
    }
    let expected = match symmetry {
        Symmetry::General => nrows * ncols,
        Symmetry::Symmetric => ncols * (ncols + 1) / 2,
    };

    let mut values = Vec::with_capacity(expected);
    while values.len() < expected {
        let (no, line) = next_content(lines).ok_or_else(|| {
            anyhow!(
                "unexpected end of file: expected {expected} values, found {}",
                values.len()
            )
        })?;
        for token in line.split_whitespace() {
            if values.len() == expected {
                bail!("line {no}: unexpected data after {expected} values");
            }
            values.push(parse_value(no, token)?);
        }
    }
    if let Some((no, _)) = next_content(lines) {
        bail!("line {no}: unexpected data after {expected} values");
    }

    // Values run down each column.
    let mut dense = DenseMatrix::zeros(nrows, ncols);
    match symmetry {
        Symmetry::General => {
            for (k, &v) in values.iter().enumerate() {
                dense[(k % nrows, k / nrows)] = v;
            }
        }
        Symmetry::Symmetric => {
            let mut k = 0;
            for j in 0..ncols {
                for i in j..nrows {
                    dense[(i, j)] = values[k];
                    dense[(j, i)] = values[k];
                    k += 1;
                }
            }
        }
    }
    Ok(SparseMatrix::from_dense(&dense))
}
