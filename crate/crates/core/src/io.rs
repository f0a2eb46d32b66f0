//! Matrix Market coordinate format (.mtx), real field, "general" or
//! "symmetric" qualifier. Indices are 1-based on disk. Values are written
//! with 17 significant decimal digits so read(write(X)) reproduces the
//! matrix bit-exactly.

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub fn write_matrix_market(x: &BandedMatrix, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    let qualifier = if x.is_symmetric() { "symmetric" } else { "general" };
    writeln!(w, "%%MatrixMarket matrix coordinate real {qualifier}")?;
    let entries: Vec<(usize, usize, f64)> = if x.is_symmetric() {
        x.iter().filter(|&(i, j, _)| i >= j).collect()
    } else {
        x.iter().collect()
    };
    writeln!(w, "{} {} {}", x.dim(), x.dim(), entries.len())?;
    for (i, j, v) in entries {
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite value at ({}, {})",
                i + 1,
                j + 1
            )));
        }
        writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_market(path: &Path) -> Result<BandedMatrix> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let (line_no, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let symmetric = parse_header(&header, line_no + 1)?;

    // size line, skipping comments and blanks
    let mut size_line = None;
    for (n, line) in lines.by_ref() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        size_line = Some((n + 1, line));
        break;
    }
    let (size_no, size_line) = size_line.ok_or_else(|| parse_err(2, "missing size line"))?;
    let sizes: Vec<&str> = size_line.split_whitespace().collect();
    if sizes.len() != 3 {
        return Err(parse_err(size_no, "size line must be 'rows cols nnz'"));
    }
    let rows: usize = sizes[0]
        .parse()
        .map_err(|_| parse_err(size_no, "bad row count"))?;
    let cols: usize = sizes[1]
        .parse()
        .map_err(|_| parse_err(size_no, "bad column count"))?;
    let nnz: usize = sizes[2]
        .parse()
        .map_err(|_| parse_err(size_no, "bad nonzero count"))?;
    if rows != cols {
        return Err(parse_err(size_no, "matrix must be square"));
    }
    let dim = rows;

    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(nnz);
    let mut seen = 0usize;
    for (n, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let line_no = n + 1;
        let parts: Vec<&str> = t.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(line_no, "entry line must be 'i j value'"));
        }
        let i: i64 = parts[0]
            .parse()
            .map_err(|_| parse_err(line_no, "bad row index"))?;
        let j: i64 = parts[1]
            .parse()
            .map_err(|_| parse_err(line_no, "bad column index"))?;
        if i < 1 || j < 1 || i as usize > dim || j as usize > dim {
            return Err(parse_err(line_no, "index out of range (format is 1-based)"));
        }
        let v: f64 = parts[2]
            .parse()
            .map_err(|_| parse_err(line_no, "non-real field"))?;
        let (i, j) = (i as usize - 1, j as usize - 1);
        triplets.push((i, j, v));
        if symmetric && i != j {
            triplets.push((j, i, v));
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(parse_err(0, &format!("expected {nnz} entries, found {seen}")));
    }
    let m = BandedMatrix::from_triplets(dim, &triplets)?;
    if symmetric {
        m.into_symmetric()
    } else {
        Ok(m)
    }
}

fn parse_header(header: &str, line_no: usize) -> Result<bool> {
    let parts: Vec<String> = header
        .split_whitespace()
        .map(|s| s.to_ascii_lowercase())
        .collect();
    if parts.len() != 5 || parts[0] != "%%matrixmarket" {
        return Err(parse_err(line_no, "malformed MatrixMarket header"));
    }
    if parts[1] != "matrix" || parts[2] != "coordinate" {
        return Err(parse_err(line_no, "only coordinate matrices are supported"));
    }
    if parts[3] != "real" {
        return Err(parse_err(line_no, "non-real field"));
    }
    match parts[4].as_str() {
        "general" => Ok(false),
        "symmetric" => Ok(true),
        other => Err(parse_err(
            line_no,
            &format!("unsupported qualifier '{other}'"),
        )),
    }
}

fn parse_err(line: usize, msg: &str) -> Error {
    Error::Parse {
        line,
        msg: msg.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("i3.mtx");
        let i3 = BandedMatrix::identity(3);
        write_matrix_market(&i3, &path).unwrap();
        let back = read_matrix_market(&path).unwrap();
        assert_eq!(back, i3);
    }

    #[test]
    fn zero_index_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.mtx");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "%%MatrixMarket matrix coordinate real general").unwrap();
        writeln!(f, "2 2 1").unwrap();
        writeln!(f, "0 1 3.5").unwrap();
        let err = read_matrix_market(&path).unwrap_err();
        match err {
            Error::Parse { line, msg } => {
                assert_eq!(line, 3);
                assert!(msg.contains("out of range"));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn malformed_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.mtx");
        std::fs::write(&path, "%%MatrixMarket tensor whatever\n1 1 0\n").unwrap();
        assert!(matches!(
            read_matrix_market(&path),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn complex_field_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.mtx");
        std::fs::write(
            &path,
            "%%MatrixMarket matrix coordinate complex general\n1 1 0\n",
        )
        .unwrap();
        assert!(matches!(
            read_matrix_market(&path),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn symmetric_round_trip_bit_exact() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let dim = 12;
        let mut t = Vec::new();
        for i in 0..dim {
            t.push((i, i, rng.gen::<f64>() * 1e3 - 500.0));
            if i + 1 < dim {
                let v = rng.gen::<f64>() / 3.0;
                t.push((i, i + 1, v));
                t.push((i + 1, i, v));
            }
        }
        let x = BandedMatrix::from_triplets(dim, &t)
            .unwrap()
            .into_symmetric()
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sym.mtx");
        write_matrix_market(&x, &path).unwrap();
        let back = read_matrix_market(&path).unwrap();
        assert_eq!(back, x);
        assert!(back.is_symmetric());
    }
}
