//! Sparse square matrices with banded or multi-banded structural patterns.
//!
//! Storage is a per-row compressed layout with sorted column indices.
//! Patterns are structural: explicit zeros are kept unless removed through
//! one of the projection operators. Indices are 0-based internally.
//!
//! Bandwidths follow the even-`s` convention: an `s`-banded matrix keeps
//! entry `(i, j)` iff `|i - j| <= s/2`. A tridiagonal matrix is 2-banded.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Structural index set over a `dim x dim` grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    dim: usize,
    rows: Vec<Vec<usize>>,
}

impl SparsityPattern {
    pub fn empty(dim: usize) -> Self {
        SparsityPattern {
            dim,
            rows: vec![Vec::new(); dim],
        }
    }

    pub fn full(dim: usize) -> Self {
        SparsityPattern {
            dim,
            rows: vec![(0..dim).collect(); dim],
        }
    }

    /// The exactly `s`-banded pattern: `(i, j)` present iff `|i - j| <= s/2`.
    pub fn banded(dim: usize, bandwidth: usize) -> Result<Self> {
        if bandwidth % 2 != 0 {
            return Err(Error::OddBandwidth(bandwidth));
        }
        let h = bandwidth / 2;
        let rows = (0..dim)
            .map(|i| (i.saturating_sub(h)..dim.min(i + h + 1)).collect())
            .collect();
        Ok(SparsityPattern { dim, rows })
    }

    /// Builds a pattern from `(i, j)` index pairs; duplicates are merged.
    pub fn from_entries<I: IntoIterator<Item = (usize, usize)>>(
        dim: usize,
        entries: I,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); dim];
        for (i, j) in entries {
            if i >= dim || j >= dim {
                return Err(Error::IndexOutOfRange { i, j, dim });
            }
            rows[i].push(j);
        }
        for r in &mut rows {
            r.sort_unstable();
            r.dedup();
        }
        Ok(SparsityPattern { dim, rows })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.rows[i].binary_search(&j).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&j| (i, j)))
    }

    /// Largest structural offset `|i - j|`, or `None` for an empty pattern.
    pub fn max_offset(&self) -> Option<usize> {
        self.iter().map(|(i, j)| i.abs_diff(j)).max()
    }

    /// `Some(s)` when the pattern is exactly `s`-banded.
    pub fn exact_bandwidth(&self) -> Option<usize> {
        let h = self.max_offset()?;
        let expected = SparsityPattern::banded(self.dim, 2 * h).ok()?;
        (self == &expected).then_some(2 * h)
    }

    pub fn union(&self, other: &SparsityPattern) -> Result<SparsityPattern> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| merge_sorted(a, b))
            .collect();
        Ok(SparsityPattern {
            dim: self.dim,
            rows,
        })
    }

    /// Structural product pattern: `(i, j)` present iff some `k` has
    /// `(i, k)` in `self` and `(k, j)` in `other`.
    pub fn product(&self, other: &SparsityPattern) -> Result<SparsityPattern> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let mut marked = vec![false; self.dim];
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut cols: Vec<usize> = Vec::new();
                for &k in row {
                    for &j in &other.rows[k] {
                        if !marked[j] {
                            marked[j] = true;
                            cols.push(j);
                        }
                    }
                }
                for &j in &cols {
                    marked[j] = false;
                }
                cols.sort_unstable();
                cols
            })
            .collect();
        Ok(SparsityPattern {
            dim: self.dim,
            rows,
        })
    }

    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|(i, j)| self.contains(j, i))
    }

    /// Closes the pattern under transposition.
    pub fn symmetrized(&self) -> SparsityPattern {
        let mut rows = self.rows.clone();
        for (i, j) in self.iter() {
            if !self.contains(j, i) {
                rows[j].push(i);
            }
        }
        for r in &mut rows {
            r.sort_unstable();
            r.dedup();
        }
        SparsityPattern {
            dim: self.dim,
            rows,
        }
    }

    pub fn is_subset_of(&self, other: &SparsityPattern) -> bool {
        self.dim == other.dim && self.iter().all(|(i, j)| other.contains(i, j))
    }
}

fn merge_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut x, mut y) = (0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => {
                out.push(a[x]);
                x += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[y]);
                y += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[x]);
                x += 1;
                y += 1;
            }
        }
    }
    out.extend_from_slice(&a[x..]);
    out.extend_from_slice(&b[y..]);
    out
}

/// Square sparse matrix with an explicit structural pattern.
///
/// Arithmetic never drops structural entries silently: `add` produces the
/// union pattern, `mul` the product pattern. Entries leave the structure
/// only through [`BandedMatrix::project_band`] / [`BandedMatrix::project_pattern`].
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, f64)>>,
    symmetric: bool,
}

impl BandedMatrix {
    pub fn zeros(pattern: &SparsityPattern) -> Self {
        let rows = (0..pattern.dim())
            .map(|i| pattern.row(i).iter().map(|&j| (j, 0.0)).collect())
            .collect();
        BandedMatrix {
            dim: pattern.dim(),
            rows,
            symmetric: pattern.is_symmetric(),
        }
    }

    /// Builds from values listed in row-major pattern order.
    pub fn from_pattern_values(pattern: &SparsityPattern, values: &[f64]) -> Self {
        assert_eq!(values.len(), pattern.nnz(), "value count must match pattern");
        let mut it = values.iter();
        let rows = (0..pattern.dim())
            .map(|i| {
                pattern
                    .row(i)
                    .iter()
                    .map(|&j| (j, *it.next().unwrap()))
                    .collect()
            })
            .collect();
        BandedMatrix {
            dim: pattern.dim(),
            rows,
            symmetric: false,
        }
    }

    pub fn identity(dim: usize) -> Self {
        BandedMatrix {
            dim,
            rows: (0..dim).map(|i| vec![(i, 1.0)]).collect(),
            symmetric: true,
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        BandedMatrix {
            dim: values.len(),
            rows: values.iter().enumerate().map(|(i, &v)| vec![(i, v)]).collect(),
            symmetric: true,
        }
    }

    /// Builds from `(i, j, value)` triplets; duplicate indices are rejected.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for &(i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(Error::IndexOutOfRange { i, j, dim });
            }
            rows[i].push((j, v));
        }
        for (i, r) in rows.iter_mut().enumerate() {
            r.sort_unstable_by_key(|&(j, _)| j);
            if r.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate entry in row {i}"
                )));
            }
        }
        Ok(BandedMatrix {
            dim,
            rows,
            symmetric: false,
        })
    }

    /// Builds from a dense matrix, keeping only nonzero entries.
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let dim = m.nrows();
        assert_eq!(dim, m.ncols(), "matrix must be square");
        let rows = (0..dim)
            .map(|i| {
                (0..dim)
                    .filter(|&j| m[(i, j)] != 0.0)
                    .map(|j| (j, m[(i, j)]))
                    .collect()
            })
            .collect();
        BandedMatrix {
            dim,
            rows,
            symmetric: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Verifies bitwise structural symmetry and sets the flag.
    pub fn into_symmetric(mut self) -> Result<Self> {
        for i in 0..self.dim {
            for &(j, v) in &self.rows[i] {
                match self.rows[j].binary_search_by_key(&i, |&(c, _)| c) {
                    Ok(p) if self.rows[j][p].1.to_bits() == v.to_bits() => {}
                    _ => return Err(Error::NotSymmetric { i, j }),
                }
            }
        }
        self.symmetric = true;
        Ok(self)
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.rows[i].binary_search_by_key(&j, |&(c, _)| c) {
            Ok(p) => self.rows[i][p].1,
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&(j, v)| (i, j, v)))
    }

    pub fn pattern(&self) -> SparsityPattern {
        SparsityPattern {
            dim: self.dim,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&(j, _)| j).collect())
                .collect(),
        }
    }

    pub fn max_offset(&self) -> Option<usize> {
        self.iter().map(|(i, j, _)| i.abs_diff(j)).max()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn transpose(&self) -> BandedMatrix {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.dim];
        for (i, j, v) in self.iter() {
            rows[j].push((i, v));
        }
        // column order within a source row is ascending, so rows stay sorted
        BandedMatrix {
            dim: self.dim,
            rows,
            symmetric: self.symmetric,
        }
    }

    pub fn scale(&self, alpha: f64) -> BandedMatrix {
        BandedMatrix {
            dim: self.dim,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&(j, v)| (j, alpha * v)).collect())
            .collect(),
            symmetric: self.symmetric,
        }
    }

    /// `alpha * self + beta * other` on the union pattern.
    pub fn add(&self, other: &BandedMatrix, alpha: f64, beta: f64) -> Result<BandedMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut out = Vec::with_capacity(a.len() + b.len());
                let (mut x, mut y) = (0, 0);
                while x < a.len() && y < b.len() {
                    match a[x].0.cmp(&b[y].0) {
                        std::cmp::Ordering::Less => {
                            out.push((a[x].0, alpha * a[x].1));
                            x += 1;
                        }
                        std::cmp::Ordering::Greater => {
                            out.push((b[y].0, beta * b[y].1));
                            y += 1;
                        }
                        std::cmp::Ordering::Equal => {
                            out.push((a[x].0, alpha * a[x].1 + beta * b[y].1));
                            x += 1;
                            y += 1;
                        }
                    }
                }
                out.extend(a[x..].iter().map(|&(j, v)| (j, alpha * v)));
                out.extend(b[y..].iter().map(|&(j, v)| (j, beta * v)));
                out
            })
            .collect();
        Ok(BandedMatrix {
            dim: self.dim,
            rows,
            symmetric: self.symmetric && other.symmetric,
        })
    }

    /// Structural matrix product. Accumulation order is fixed (ascending
    /// inner index `k` per output row) so results are bit-reproducible.
    /// The result is never flagged symmetric: a product of symmetric
    /// matrices is symmetric only when they commute.
    pub fn mul(&self, other: &BandedMatrix) -> Result<BandedMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let mut acc = vec![0.0f64; self.dim];
        let mut touched = vec![false; self.dim];
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut cols: Vec<usize> = Vec::new();
                for &(k, v) in row {
                    for &(j, w) in &other.rows[k] {
                        if !touched[j] {
                            touched[j] = true;
                            cols.push(j);
                        }
                        acc[j] += v * w;
                    }
                }
                cols.sort_unstable();
                let out: Vec<(usize, f64)> = cols
                    .iter()
                    .map(|&j| {
                        let v = acc[j];
                        acc[j] = 0.0;
                        touched[j] = false;
                        (j, v)
                    })
                    .collect();
                out
            })
            .collect();
        Ok(BandedMatrix {
            dim: self.dim,
            rows,
            symmetric: false,
        })
    }

    /// The bandwidth projection operator: keeps `(i, j)` iff `|i - j| <= d/2`.
    pub fn project_band(&self, bandwidth: usize) -> Result<BandedMatrix> {
        if bandwidth % 2 != 0 {
            return Err(Error::OddBandwidth(bandwidth));
        }
        let h = bandwidth / 2;
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.iter()
                    .copied()
                    .filter(|&(j, _)| i.abs_diff(j) <= h)
                    .collect()
            })
            .collect();
        Ok(BandedMatrix {
            dim: self.dim,
            rows,
            symmetric: self.symmetric,
        })
    }

    /// Generalized dropping: keeps exactly the entries whose indices lie in `s`.
    pub fn project_pattern(&self, s: &SparsityPattern) -> Result<BandedMatrix> {
        if self.dim != s.dim() {
            return Err(Error::DimensionMismatch(self.dim, s.dim()));
        }
        let rows: Vec<Vec<(usize, f64)>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.iter()
                    .copied()
                    .filter(|&(j, _)| s.contains(i, j))
                    .collect()
            })
            .collect();
        Ok(BandedMatrix {
            dim: self.dim,
            rows,
            symmetric: self.symmetric && s.is_symmetric(),
        })
    }

    /// `sum_{i,j} X_ij * Y_ij` over the pattern intersection (= trace(X^T Y)).
    pub fn frobenius_inner(&self, other: &BandedMatrix) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let mut sum = 0.0;
        for (a, b) in self.rows.iter().zip(&other.rows) {
            let (mut x, mut y) = (0, 0);
            while x < a.len() && y < b.len() {
                match a[x].0.cmp(&b[y].0) {
                    std::cmp::Ordering::Less => x += 1,
                    std::cmp::Ordering::Greater => y += 1,
                    std::cmp::Ordering::Equal => {
                        sum += a[x].1 * b[y].1;
                        x += 1;
                        y += 1;
                    }
                }
            }
        }
        Ok(sum)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.iter().map(|(_, _, v)| v * v).sum::<f64>().sqrt()
    }

    /// `(X + X^T) / 2` on the symmetrized pattern; flagged symmetric.
    pub fn symmetrize(&self) -> BandedMatrix {
        let p = self.pattern().symmetrized();
        let mut out = BandedMatrix::zeros(&p);
        for i in 0..self.dim {
            for e in &mut out.rows[i] {
                let j = e.0;
                e.1 = 0.5 * (self.get(i, j) + self.get(j, i));
            }
        }
        out.symmetric = true;
        out
    }

    /// Largest absolute asymmetry `max |X_ij - X_ji|`.
    pub fn asymmetry(&self) -> f64 {
        self.iter()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    /// Matrix-vector product `y = X v`.
    pub fn matvec(&self, v: &[f64], y: &mut [f64]) {
        assert_eq!(v.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            let mut s = 0.0;
            for &(j, w) in row {
                s += w * v[j];
            }
            y[i] = s;
        }
    }
}
