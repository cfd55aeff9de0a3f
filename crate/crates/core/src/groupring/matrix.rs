use std::fmt;

use super::GroupRingElement;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::groups::MarkedGroup;

/// A rows×cols matrix over KΓ, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRingMatrix {
    rows: usize,
    cols: usize,
    group: MarkedGroup,
    field: Field,
    entries: Vec<GroupRingElement>,
}

impl GroupRingMatrix {
    pub fn from_rows(rows: Vec<Vec<GroupRingElement>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::ShapeMismatch("matrix must be nonempty".into()));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        let first = rows[0][0].clone();
        let entries: Vec<_> = rows.into_iter().flatten().collect();
        for e in &entries {
            first.check(e)?;
        }
        Ok(GroupRingMatrix { rows: r, cols: c, group: first.group.clone(), field: first.field, entries })
    }

    pub fn zero(group: &MarkedGroup, field: Field, rows: usize, cols: usize) -> Self {
        GroupRingMatrix {
            rows,
            cols,
            group: group.clone(),
            field,
            entries: vec![GroupRingElement::zero(group, field); rows * cols],
        }
    }

    pub fn identity(group: &MarkedGroup, field: Field, k: usize) -> Self {
        let mut m = Self::zero(group, field, k, k);
        for i in 0..k {
            m.entries[i * k + i] = GroupRingElement::one(group, field);
        }
        m
    }

    pub fn diagonal(entries: Vec<GroupRingElement>) -> Result<Self> {
        let k = entries.len();
        let first = entries.first().ok_or_else(|| Error::ShapeMismatch("empty diagonal".into()))?.clone();
        let mut m = Self::zero(&first.group, first.field, k, k);
        for (i, e) in entries.into_iter().enumerate() {
            first.check(&e)?;
            m.entries[i * k + i] = e;
        }
        Ok(m)
    }

    /// A 1×1 matrix.
    pub fn scalar(a: GroupRingElement) -> Self {
        GroupRingMatrix { rows: 1, cols: 1, group: a.group.clone(), field: a.field, entries: vec![a] }
    }

    /// Parses rows separated by `;` with entries separated by `,`.
    pub fn parse(group: &MarkedGroup, field: Field, text: &str) -> Result<Self> {
        let mut offset = 0;
        let mut rows = Vec::new();
        for row in text.split(';') {
            let mut entries = Vec::new();
            for entry in row.split(',') {
                let e = GroupRingElement::parse(group, field, entry).map_err(|err| match err {
                    Error::Parse { pos, msg } => Error::Parse { pos: pos + offset, msg },
                    other => other,
                })?;
                entries.push(e);
                offset += entry.len() + 1;
            }
            rows.push(entries);
        }
        Self::from_rows(rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn group(&self) -> &MarkedGroup {
        &self.group
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn get(&self, i: usize, j: usize) -> &GroupRingElement {
        &self.entries[i * self.cols + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(GroupRingElement::is_zero)
    }

    pub fn support_radius(&self) -> usize {
        self.entries.iter().map(GroupRingElement::support_radius).max().unwrap_or(0)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.group != other.group {
            return Err(Error::OwnerMismatch);
        }
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} + {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(GroupRingMatrix { entries, ..self.clone() })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zero(&self.group, self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = GroupRingElement::zero(&self.group, self.field);
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j))?)?;
                }
                out.entries[i * other.cols + j] = acc;
            }
        }
        Ok(out)
    }

    /// Conjugate transpose with the group-ring involution on entries.
    pub fn star(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).star());
            }
        }
        GroupRingMatrix { rows: self.cols, cols: self.rows, entries, ..self.clone() }
    }

    pub fn render(&self) -> String {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).render()).collect::<Vec<_>>().join(", "))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

impl fmt::Display for GroupRingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
