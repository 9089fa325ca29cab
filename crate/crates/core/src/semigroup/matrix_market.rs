//! MatrixMarket coordinate text format (`real general`), 1-based indices.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

use super::matrix::GeneratorMatrix;

pub fn write_matrix_market<W: Write>(a: &GeneratorMatrix, mut w: W) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.dim(), a.dim(), a.nnz())?;
    for (i, j, v) in a.triplets() {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

pub fn read_matrix_market<R: BufRead>(r: R) -> Result<GeneratorMatrix> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty MatrixMarket input".into()))??;
    let lower = header.to_ascii_lowercase();
    if !lower.starts_with("%%matrixmarket matrix coordinate")
        || !(lower.contains("real") || lower.contains("integer"))
        || !lower.contains("general")
    {
        return Err(Error::Parse(format!("unsupported MatrixMarket header: {header}")));
    }

    let mut size: Option<(usize, usize)> = None;
    let mut triplets = Vec::new();
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                let [rows, cols, nnz] = fields[..] else {
                    return Err(Error::Parse(format!("bad size line: {line}")));
                };
                let rows: usize = rows.parse().map_err(|_| Error::Parse(line.into()))?;
                let cols: usize = cols.parse().map_err(|_| Error::Parse(line.into()))?;
                let nnz: usize = nnz.parse().map_err(|_| Error::Parse(line.into()))?;
                if rows != cols {
                    return Err(Error::InvalidMatrix(format!("{rows}x{cols} is not square")));
                }
                size = Some((rows, nnz));
                triplets.reserve(nnz);
            }
            Some(_) => {
                let [i, j, v] = fields[..] else {
                    return Err(Error::Parse(format!("bad entry line: {line}")));
                };
                let i: usize = i.parse().map_err(|_| Error::Parse(line.into()))?;
                let j: usize = j.parse().map_err(|_| Error::Parse(line.into()))?;
                let v: f64 = v.parse().map_err(|_| Error::Parse(line.into()))?;
                if i == 0 || j == 0 {
                    return Err(Error::Parse(format!("indices are 1-based: {line}")));
                }
                triplets.push((i - 1, j - 1, v));
            }
        }
    }
    let (n, nnz) = size.ok_or_else(|| Error::Parse("missing size line".into()))?;
    if triplets.len() != nnz {
        return Err(Error::Parse(format!(
            "expected {nnz} entries, found {}",
            triplets.len()
        )));
    }
    GeneratorMatrix::from_triplets(n, triplets)
}
