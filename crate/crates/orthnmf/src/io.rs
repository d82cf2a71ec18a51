//! File ingestion and emission.
//!
//! Data matrices travel as MatrixMarket files (coordinate or array layout,
//! real general), labels as one token per line, and traces as CSV. Numbers
//! are written with 17 significant digits so re-reading reproduces them
//! bit-exactly. Parsers reject malformed input with the offending position
//! rather than repairing it.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::factors::FactorSet;
use crate::matrix::DataMatrix;
use crate::trace::IterationTrace;

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

enum MmLayout {
    Coordinate,
    Array,
}

/// Reads a real general MatrixMarket file in coordinate or array layout.
/// Coordinate duplicates are summed; negative entries are rejected.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<DataMatrix> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let header = header?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "%%MatrixMarket" || fields[1] != "matrix" {
        return Err(parse_err(
            path,
            1,
            "expected '%%MatrixMarket matrix <layout> real general'",
        ));
    }
    let layout = match fields[2] {
        "coordinate" => MmLayout::Coordinate,
        "array" => MmLayout::Array,
        other => return Err(parse_err(path, 1, format!("unsupported layout '{other}'"))),
    };
    if fields[3] != "real" {
        return Err(parse_err(
            path,
            1,
            format!("unsupported field '{}'", fields[3]),
        ));
    }
    if fields[4] != "general" {
        return Err(parse_err(
            path,
            1,
            format!("unsupported symmetry '{}'", fields[4]),
        ));
    }

    // Skip comments, find the size line.
    let (size_lineno, size_line) = loop {
        match lines.next() {
            Some((idx, line)) => {
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('%') {
                    continue;
                }
                break (idx + 1, line);
            }
            None => return Err(parse_err(path, 2, "missing size line")),
        }
    };
    let dims: Vec<&str> = size_line.split_whitespace().collect();

    let parse_usize = |tok: &str, lineno: usize| -> Result<usize> {
        tok.parse::<usize>()
            .map_err(|_| parse_err(path, lineno, format!("invalid integer '{tok}'")))
    };
    let parse_f64 = |tok: &str, lineno: usize| -> Result<f64> {
        tok.parse::<f64>()
            .map_err(|_| parse_err(path, lineno, format!("invalid number '{tok}'")))
    };

    match layout {
        MmLayout::Coordinate => {
            if dims.len() != 3 {
                return Err(parse_err(
                    path,
                    size_lineno,
                    "size line must be 'rows cols nnz'",
                ));
            }
            let rows = parse_usize(dims[0], size_lineno)?;
            let cols = parse_usize(dims[1], size_lineno)?;
            let nnz = parse_usize(dims[2], size_lineno)?;
            let mut triplets = Vec::with_capacity(nnz);
            for (idx, line) in lines {
                let lineno = idx + 1;
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('%') {
                    continue;
                }
                let toks: Vec<&str> = trimmed.split_whitespace().collect();
                if toks.len() != 3 {
                    return Err(parse_err(path, lineno, "entry must be 'row col value'"));
                }
                let r = parse_usize(toks[0], lineno)?;
                let c = parse_usize(toks[1], lineno)?;
                if r == 0 || c == 0 || r > rows || c > cols {
                    return Err(parse_err(
                        path,
                        lineno,
                        format!("index ({r}, {c}) outside 1..={rows} x 1..={cols}"),
                    ));
                }
                let v = parse_f64(toks[2], lineno)?;
                if v < 0.0 {
                    return Err(Error::Domain(format!(
                        "{}:{lineno}: negative value {v}",
                        path.display()
                    )));
                }
                if !v.is_finite() {
                    return Err(Error::Domain(format!(
                        "{}:{lineno}: non-finite value {v}",
                        path.display()
                    )));
                }
                triplets.push((r - 1, c - 1, v));
            }
            if triplets.len() != nnz {
                return Err(parse_err(
                    path,
                    size_lineno,
                    format!(
                        "header promises {nnz} entries, file holds {}",
                        triplets.len()
                    ),
                ));
            }
            DataMatrix::from_triplets(rows, cols, triplets)
        }
        MmLayout::Array => {
            if dims.len() != 2 {
                return Err(parse_err(
                    path,
                    size_lineno,
                    "size line must be 'rows cols'",
                ));
            }
            let rows = parse_usize(dims[0], size_lineno)?;
            let cols = parse_usize(dims[1], size_lineno)?;
            let mut values = Vec::with_capacity(rows * cols);
            for (idx, line) in lines {
                let lineno = idx + 1;
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('%') {
                    continue;
                }
                for tok in trimmed.split_whitespace() {
                    let v = parse_f64(tok, lineno)?;
                    if v < 0.0 {
                        return Err(Error::Domain(format!(
                            "{}:{lineno}: negative value {v}",
                            path.display()
                        )));
                    }
                    if !v.is_finite() {
                        return Err(Error::Domain(format!(
                            "{}:{lineno}: non-finite value {v}",
                            path.display()
                        )));
                    }
                    values.push(v);
                }
            }
            if values.len() != rows * cols {
                return Err(parse_err(
                    path,
                    size_lineno,
                    format!("expected {} values, found {}", rows * cols, values.len()),
                ));
            }
            // Array layout is column-major.
            let triplets = values.iter().enumerate().map(|(k, &v)| {
                let c = k / rows;
                let r = k % rows;
                (r, c, v)
            });
            DataMatrix::from_triplets(rows, cols, triplets)
        }
    }
}

/// Writes a dense matrix as a MatrixMarket array file (column-major, 17
/// significant digits).
pub fn write_matrix_market_array(path: impl AsRef<Path>, m: &Array2<f64>) -> Result<()> {
    let path = path.as_ref();
    let mut out = BufWriter::new(File::create(path)?);
    let (rows, cols) = m.dim();
    writeln!(out, "%%MatrixMarket matrix array real general")?;
    writeln!(out, "{rows} {cols}")?;
    for c in 0..cols {
        for r in 0..rows {
            writeln!(out, "{:.16e}", m[[r, c]])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a label file (one token per line) into dense class indices in
/// first-appearance order, returning the index vector and the token table.
pub fn read_labels(path: impl AsRef<Path>) -> Result<(Vec<usize>, Vec<String>)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut raw: Vec<(usize, &str)> = text.lines().map(str::trim).enumerate().collect();
    while matches!(raw.last(), Some((_, t)) if t.is_empty()) {
        raw.pop();
    }
    if raw.is_empty() {
        return Err(Error::Degenerate(format!(
            "label file {} holds no labels",
            path.display()
        )));
    }
    let mut names: Vec<String> = Vec::new();
    let mut indices = Vec::with_capacity(raw.len());
    for (idx, tok) in raw {
        if tok.is_empty() {
            return Err(parse_err(path, idx + 1, "blank line inside label file"));
        }
        let id = match names.iter().position(|n| n == tok) {
            Some(id) => id,
            None => {
                names.push(tok.to_string());
                names.len() - 1
            }
        };
        indices.push(id);
    }
    Ok((indices, names))
}

/// Writes a run trace as CSV. Row 0 carries the objective of the initial
/// factors; `inner_iters` sums the per-factor damped retries of the
/// iteration.
pub fn write_trace_csv(trace: &IterationTrace, path: impl AsRef<Path>) -> Result<()> {
    if trace.is_empty() {
        return Err(Error::Degenerate("empty trace".into()));
    }
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    writeln!(out, "iter,objective,inner_iters,violation")?;
    for (k, rec) in trace.records.iter().enumerate() {
        writeln!(
            out,
            "{k},{:.16e},{},{}",
            rec.objective,
            rec.total_inner(),
            rec.violation as u8
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Writes the factors as MatrixMarket array files `B.mtx`, `C.mtx`, and
/// `S.mtx` when present.
pub fn write_factors(f: &FactorSet, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_matrix_market_array(dir.join("B.mtx"), &f.b)?;
    write_matrix_market_array(dir.join("C.mtx"), &f.c)?;
    if let Some(s) = &f.s {
        write_matrix_market_array(dir.join("S.mtx"), s)?;
    }
    Ok(())
}

/// Reads factors previously written by `write_factors`; `S.mtx` is optional.
pub fn read_factors(dir: impl AsRef<Path>) -> Result<FactorSet> {
    let dir = dir.as_ref();
    let b = read_matrix_market(dir.join("B.mtx"))?.to_dense();
    let c = read_matrix_market(dir.join("C.mtx"))?.to_dense();
    let s_path = dir.join("S.mtx");
    let s = if s_path.exists() {
        Some(read_matrix_market(s_path)?.to_dense())
    } else {
        None
    };
    Ok(FactorSet { b, c, s })
}
