//! Exact sparse linear algebra: rank and kernel dimension over ℚ, ℚ(i) and
//! prime fields.

mod eliminate;
mod multimodular;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::groupring::parse_scalar;

pub use eliminate::{markowitz_rank, EliminationField, ModP};
pub use multimodular::{rank_modulo, rank_multimodular, Certainty, MultimodularMode, MultimodularRank};

/// Accumulates entries before freezing into a [`SparseMatrix`].
#[derive(Clone, Debug)]
pub struct SparseMatrixBuilder {
    rows: usize,
    cols: usize,
    field: Field,
    entries: BTreeMap<(usize, usize), Scalar>,
}

impl SparseMatrixBuilder {
    pub fn new(rows: usize, cols: usize, field: Field) -> Self {
        SparseMatrixBuilder { rows, cols, field, entries: BTreeMap::new() }
    }

    fn check(&self, r: usize, c: usize, v: &Scalar) -> Result<()> {
        if r >= self.rows || c >= self.cols {
            return Err(Error::ShapeMismatch(format!(
                "entry ({r}, {c}) outside {}x{}",
                self.rows, self.cols
            )));
        }
        if !self.field.contains(v) {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    /// Overwrites the entry at (r, c).
    pub fn set(&mut self, r: usize, c: usize, v: Scalar) -> Result<&mut Self> {
        self.check(r, c, &v)?;
        if self.field.is_zero(&v) {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), v);
        }
        Ok(self)
    }

    /// Adds `v` to the entry at (r, c).
    pub fn add(&mut self, r: usize, c: usize, v: &Scalar) -> Result<&mut Self> {
        self.check(r, c, v)?;
        let f = self.field;
        let new = match self.entries.get(&(r, c)) {
            Some(old) => f.add(old, v),
            None => v.clone(),
        };
        if f.is_zero(&new) {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), new);
        }
        Ok(self)
    }

    pub fn build(self) -> SparseMatrix {
        SparseMatrix { rows: self.rows, cols: self.cols, field: self.field, entries: self.entries }
    }
}

/// An immutable sparse matrix. Stored entries are never zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    field: Field,
    entries: BTreeMap<(usize, usize), Scalar>,
}

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize, field: Field) -> Self {
        SparseMatrixBuilder::new(rows, cols, field).build()
    }

    pub fn identity(n: usize, field: Field) -> Self {
        let mut b = SparseMatrixBuilder::new(n, n, field);
        for i in 0..n {
            b.entries.insert((i, i), field.one());
        }
        b.build()
    }

    pub fn from_dense(field: Field, rows: &[Vec<Scalar>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        let mut b = SparseMatrixBuilder::new(r, c, field);
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                b.set(i, j, v.clone())?;
            }
        }
        Ok(b.build())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, r: usize, c: usize) -> Scalar {
        self.entries.get(&(r, c)).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Scalar)> {
        self.entries.iter().map(|(&(r, c), v)| (r, c, v))
    }

    pub fn to_dense(&self) -> Vec<Vec<Scalar>> {
        let mut out = vec![vec![self.field.zero(); self.cols]; self.rows];
        for (r, c, v) in self.entries() {
            out[r][c] = v.clone();
        }
        out
    }

    pub fn rank(&self) -> usize {
        let field = self.field;
        markowitz_rank(&field, self.rows, self.cols, self.entries().map(|(r, c, v)| (r, c, v.clone())))
    }

    pub fn kernel_dim(&self) -> usize {
        self.cols - self.rank()
    }

    /// Ranks of many matrices, computed in parallel.
    pub fn rank_many(matrices: &[SparseMatrix]) -> Vec<usize> {
        matrices.par_iter().map(SparseMatrix::rank).collect()
    }

    pub fn transpose(&self) -> Self {
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            field: self.field,
            entries: self.entries.iter().map(|(&(r, c), v)| ((c, r), v.clone())).collect(),
        }
    }

    pub fn conj_transpose(&self) -> Self {
        let f = self.field;
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            field: f,
            entries: self.entries.iter().map(|(&(r, c), v)| ((c, r), f.conj(v))).collect(),
        }
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} + {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut b = SparseMatrixBuilder { entries: self.entries.clone(), ..SparseMatrixBuilder::new(self.rows, self.cols, self.field) };
        for (r, c, v) in other.entries() {
            b.add(r, c, v)?;
        }
        Ok(b.build())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&self.field.from_i64(-1)))
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let f = self.field;
        let entries = self
            .entries
            .iter()
            .map(|(&k, v)| (k, f.mul(v, s)))
            .filter(|(_, v)| !f.is_zero(v))
            .collect();
        SparseMatrix { entries, ..self.clone() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut other_rows: Vec<Vec<(usize, &Scalar)>> = vec![Vec::new(); other.rows];
        for (r, c, v) in other.entries() {
            other_rows[r].push((c, v));
        }
        let f = self.field;
        let mut b = SparseMatrixBuilder::new(self.rows, other.cols, f);
        for (i, k, a) in self.entries() {
            for &(j, v) in &other_rows[k] {
                b.add(i, j, &f.mul(a, v))?;
            }
        }
        Ok(b.build())
    }

    /// Reindexes so that entry (r, c) moves to (row_perm[r], col_perm[c]).
    pub fn permute(&self, row_perm: &[usize], col_perm: &[usize]) -> Result<Self> {
        if row_perm.len() != self.rows || col_perm.len() != self.cols {
            return Err(Error::ShapeMismatch("permutation length".into()));
        }
        let entries = self.entries.iter().map(|(&(r, c), v)| ((row_perm[r], col_perm[c]), v.clone())).collect();
        Ok(SparseMatrix { entries, ..self.clone() })
    }

    /// Coordinate text: a header `rows cols field`, then `row col value` per
    /// stored entry.
    pub fn to_dump(&self) -> String {
        let mut out = format!("{} {} {}\n", self.rows, self.cols, self.field);
        for (r, c, v) in self.entries() {
            let _ = writeln!(out, "{r} {c} {}", v.render());
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse(0, "missing header"))?;
        let mut parts = header.split_whitespace();
        let mut dim = |what: &str| -> Result<usize> {
            parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(0, format!("header: bad {what}")))
        };
        let rows = dim("row count")?;
        let cols = dim("column count")?;
        let field: Field = parts.collect::<Vec<_>>().join("").parse()?;
        let mut b = SparseMatrixBuilder::new(rows, cols, field);
        for (line_no, line) in lines {
            let line = line.trim();
            let bad = || Error::parse(line_no, format!("line {}: expected `row col value`", line_no + 1));
            let (r, rest) = line.split_once(char::is_whitespace).ok_or_else(bad)?;
            let (c, v) = rest.trim_start().split_once(char::is_whitespace).ok_or_else(bad)?;
            let r: usize = r.parse().map_err(|_| bad())?;
            let c: usize = c.parse().map_err(|_| bad())?;
            let v = parse_scalar(field, v.trim())?;
            b.add(r, c, &v)?;
        }
        Ok(b.build())
    }
}
