//! Matrix Market coordinate-format import/export (real general).

use super::{SparseError, SparseMatrixCsr};
use std::io::{BufRead, Write};

/// Writes `a` in "%%MatrixMarket matrix coordinate real general" form with
/// 1-based indices.
pub fn write_matrix_market<W: Write>(w: &mut W, a: &SparseMatrixCsr) -> Result<(), SparseError> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j, v) in a.to_triplets() {
        writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Reads a coordinate-format real general matrix. Duplicate entries are
/// summed, matching assembly semantics.
pub fn read_matrix_market<R: BufRead>(r: R) -> Result<SparseMatrixCsr, SparseError> {
    let mut lines = r.lines().enumerate();
    let (mut nrows, mut ncols, mut nnz) = (0usize, 0usize, 0usize);
    let mut header_seen = false;
    let mut size_seen = false;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    while let Some((lineno, line)) = lines.next() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('%') {
            if !header_seen {
                let lower = trimmed.to_ascii_lowercase();
                if lower.starts_with("%%matrixmarket")
                    && !(lower.contains("coordinate") && lower.contains("real"))
                {
                    return Err(SparseError::Parse {
                        line: lineno,
                        msg: "only 'matrix coordinate real general' is supported".into(),
                    });
                }
                header_seen = true;
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if !size_seen {
            if fields.len() != 3 {
                return Err(SparseError::Parse {
                    line: lineno,
                    msg: "expected 'nrows ncols nnz'".into(),
                });
            }
            nrows = parse_usize(fields[0], lineno)?;
            ncols = parse_usize(fields[1], lineno)?;
            nnz = parse_usize(fields[2], lineno)?;
            triplets.reserve(nnz);
            size_seen = true;
            continue;
        }
        if fields.len() != 3 {
            return Err(SparseError::Parse {
                line: lineno,
                msg: "expected 'row col value'".into(),
            });
        }
        let i = parse_usize(fields[0], lineno)?;
        let j = parse_usize(fields[1], lineno)?;
        let v: f64 = fields[2].parse().map_err(|_| SparseError::Parse {
            line: lineno,
            msg: format!("bad value '{}'", fields[2]),
        })?;
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(SparseError::Parse {
                line: lineno,
                msg: format!("index ({i},{j}) out of bounds for {nrows}x{ncols}"),
            });
        }
        triplets.push((i - 1, j - 1, v));
    }
    if !size_seen {
        return Err(SparseError::Parse {
            line: 0,
            msg: "missing size line".into(),
        });
    }
    if triplets.len() != nnz {
        return Err(SparseError::Parse {
            line: 0,
            msg: format!("entry count {} != declared nnz {}", triplets.len(), nnz),
        });
    }
    SparseMatrixCsr::from_triplets(nrows, ncols, &triplets)
}

/// Reads a dense vector: either a Matrix Market array header followed by one
/// value per line, or a bare list of numbers (one per line).
pub fn read_vector<R: BufRead>(r: R) -> Result<Vec<f64>, SparseError> {
    let mut out = Vec::new();
    let mut dims: Option<usize> = None;
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if dims.is_none() && fields.len() == 2 {
            // Array-format size line "n 1".
            dims = Some(parse_usize(fields[0], lineno)?);
            continue;
        }
        for f in fields {
            out.push(f.parse().map_err(|_| SparseError::Parse {
                line: lineno,
                msg: format!("bad value '{f}'"),
            })?);
        }
    }
    if let Some(n) = dims {
        if out.len() != n {
            return Err(SparseError::Parse {
                line: 0,
                msg: format!("vector has {} entries, header declared {}", out.len(), n),
            });
        }
    }
    Ok(out)
}

fn parse_usize(s: &str, line: usize) -> Result<usize, SparseError> {
    s.parse().map_err(|_| SparseError::Parse {
        line,
        msg: format!("bad integer '{s}'"),
    })
}
