//! Matrix Market text exchange.
//!
//! Matrices use the coordinate format (`real`/`complex`/`integer` with
//! `general`, `symmetric` or `hermitian` symmetry). Vectors use the array
//! format, or plain whitespace-separated real numbers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::sparse::CsrMatrix;

use super::HermitianOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
}

fn mm_err(msg: impl Into<String>) -> Error {
    Error::MatrixMarket(msg.into())
}

struct Header {
    array: bool,
    field: Field,
    symmetry: Symmetry,
}

fn parse_header(line: &str) -> Result<Header> {
    let toks: Vec<String> = line.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(mm_err(format!("malformed header: {line:?}")));
    }
    let array = match toks[2].as_str() {
        "coordinate" => false,
        "array" => true,
        f => return Err(mm_err(format!("unsupported format {f:?}"))),
    };
    let field = match toks[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        f => return Err(mm_err(format!("unsupported field {f:?}"))),
    };
    let symmetry = match toks[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        s => return Err(mm_err(format!("unsupported symmetry {s:?}"))),
    };
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        return Err(mm_err("hermitian symmetry requires a complex field"));
    }
    Ok(Header { array, field, symmetry })
}

fn num(tok: Option<&str>) -> Result<f64> {
    tok.ok_or_else(|| mm_err("truncated entry"))?
        .parse::<f64>()
        .map_err(|e| mm_err(format!("bad number: {e}")))
}

fn index(tok: Option<&str>, n: usize) -> Result<usize> {
    let i: usize = tok
        .ok_or_else(|| mm_err("truncated entry"))?
        .parse()
        .map_err(|e| mm_err(format!("bad index: {e}")))?;
    if i == 0 || i > n {
        return Err(mm_err(format!("index {i} outside 1..={n}")));
    }
    Ok(i - 1)
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().skip(1).map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('%'))
}

/// Parse a Hermitian matrix from Matrix Market coordinate text.
pub fn parse_matrix_market(text: &str) -> Result<HermitianOperator> {
    let first = text.lines().next().ok_or_else(|| mm_err("empty file"))?;
    let header = parse_header(first)?;
    if header.array {
        return Err(mm_err("expected coordinate format for a matrix"));
    }
    let mut lines = data_lines(text);
    let size = lines.next().ok_or_else(|| mm_err("missing size line"))?;
    let mut st = size.split_whitespace();
    let parse_count = |t: Option<&str>| -> Result<usize> {
        t.ok_or_else(|| mm_err("malformed size line"))?
            .parse()
            .map_err(|e| mm_err(format!("bad size: {e}")))
    };
    let (rows, cols, nnz) = (parse_count(st.next())?, parse_count(st.next())?, parse_count(st.next())?);
    if rows != cols {
        return Err(mm_err(format!("matrix is {rows}x{cols}, not square")));
    }
    let n = rows;
    let mut entries: BTreeMap<(usize, usize), C64> = BTreeMap::new();
    let mut count = 0;
    for line in lines {
        let mut t = line.split_whitespace();
        let i = index(t.next(), n)?;
        let j = index(t.next(), n)?;
        let re = num(t.next())?;
        let im = if header.field == Field::Complex { num(t.next())? } else { 0.0 };
        let v = C64::new(re, im);
        if entries.insert((i, j), v).is_some() {
            return Err(mm_err(format!("duplicate entry ({}, {})", i + 1, j + 1)));
        }
        count += 1;
    }
    if count != nnz {
        return Err(mm_err(format!("header declares {nnz} entries, found {count}")));
    }
    let mut triplets = Vec::with_capacity(2 * entries.len());
    for (&(i, j), &v) in &entries {
        if header.symmetry == Symmetry::General || i == j {
            triplets.push((i, j, v));
            continue;
        }
        let mirror = if header.symmetry == Symmetry::Hermitian { v.conj() } else { v };
        match entries.get(&(j, i)) {
            Some(&w) if w != mirror => {
                return Err(mm_err(format!(
                    "entries ({}, {}) and ({}, {}) conflict with the declared symmetry",
                    i + 1,
                    j + 1,
                    j + 1,
                    i + 1
                )));
            }
            // both triangles present and consistent: each contributes itself
            Some(_) => triplets.push((i, j, v)),
            None => {
                triplets.push((i, j, v));
                triplets.push((j, i, mirror));
            }
        }
    }
    HermitianOperator::sparse(CsrMatrix::from_triplets(n, &triplets)?)
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<HermitianOperator> {
    parse_matrix_market(&std::fs::read_to_string(path)?)
}

/// Matrix Market text for a Hermitian operator: lower triangle only, with
/// 17 significant digits.
pub fn format_matrix_market(op: &HermitianOperator) -> String {
    let a = op.to_csr();
    let real = op.is_real();
    let lower: Vec<(usize, usize, C64)> = a.triplets().filter(|&(i, j, _)| i >= j).collect();
    let mut out = String::new();
    let kind = if real { "real symmetric" } else { "complex hermitian" };
    let _ = writeln!(out, "%%MatrixMarket matrix coordinate {kind}");
    let _ = writeln!(out, "{} {} {}", a.dim(), a.dim(), lower.len());
    for (i, j, v) in lower {
        if real {
            let _ = writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v.re);
        } else {
            let _ = writeln!(out, "{} {} {:.16e} {:.16e}", i + 1, j + 1, v.re, v.im);
        }
    }
    out
}

pub fn write_matrix_market(op: &HermitianOperator, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_matrix_market(op))?;
    Ok(())
}

/// Parse a vector: Matrix Market array (real or complex, one column) or
/// plain whitespace-separated reals.
pub fn parse_vector(text: &str) -> Result<Vec<C64>> {
    let first = text.lines().next().unwrap_or("");
    if !first.trim_start().starts_with("%%") {
        return text
            .split_whitespace()
            .map(|t| t.parse::<f64>().map(|v| C64::new(v, 0.0)).map_err(|e| mm_err(format!("bad number {t:?}: {e}"))))
            .collect();
    }
    let header = parse_header(first)?;
    if !header.array {
        return Err(mm_err("expected array format for a vector"));
    }
    let mut lines = data_lines(text);
    let size = lines.next().ok_or_else(|| mm_err("missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|e| mm_err(format!("bad size: {e}"))))
        .collect::<Result<_>>()?;
    if dims.len() != 2 || dims[1] != 1 {
        return Err(mm_err(format!("vector must have one column, size line {size:?}")));
    }
    let mut out = Vec::with_capacity(dims[0]);
    for line in lines {
        let mut t = line.split_whitespace();
        let re = num(t.next())?;
        let im = if header.field == Field::Complex { num(t.next())? } else { 0.0 };
        out.push(C64::new(re, im));
    }
    if out.len() != dims[0] {
        return Err(mm_err(format!("declared {} entries, found {}", dims[0], out.len())));
    }
    Ok(out)
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<C64>> {
    parse_vector(&std::fs::read_to_string(path)?)
}

pub fn format_vector(x: &[C64]) -> String {
    let real = x.iter().all(|v| v.im == 0.0);
    let mut out = String::new();
    let field = if real { "real" } else { "complex" };
    let _ = writeln!(out, "%%MatrixMarket matrix array {field} general");
    let _ = writeln!(out, "{} 1", x.len());
    for v in x {
        if real {
            let _ = writeln!(out, "{:.16e}", v.re);
        } else {
            let _ = writeln!(out, "{:.16e} {:.16e}", v.re, v.im);
        }
    }
    out
}

pub fn write_vector(x: &[C64], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_vector(x))?;
    Ok(())
}
