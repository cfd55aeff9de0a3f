//! Sparse Gaussian elimination with Markowitz pivoting. Generic over the
//! coefficient arithmetic so the exact and modular paths share one kernel.

use std::collections::{BTreeMap, BTreeSet};

use crate::field::{add_mod, inv_mod, mul_mod, Field, Scalar};

pub trait EliminationField {
    type Elem: Clone;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
}

impl EliminationField for Field {
    type Elem = Scalar;

    fn is_zero(&self, a: &Scalar) -> bool {
        Field::is_zero(*self, a)
    }

    fn inv(&self, a: &Scalar) -> Scalar {
        Field::inv(*self, a).expect("pivot is nonzero")
    }

    fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Field::mul(*self, a, b)
    }

    fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Field::sub(*self, a, b)
    }

    fn neg(&self, a: &Scalar) -> Scalar {
        Field::neg(*self, a)
    }
}

/// Arithmetic modulo a word-sized prime.
#[derive(Clone, Copy, Debug)]
pub struct ModP(pub u64);

impl EliminationField for ModP {
    type Elem = u64;

    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }

    fn inv(&self, a: &u64) -> u64 {
        inv_mod(*a, self.0)
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mul_mod(*a, *b, self.0)
    }

    fn sub(&self, a: &u64, b: &u64) -> u64 {
        add_mod(*a, self.neg(b), self.0)
    }

    fn neg(&self, a: &u64) -> u64 {
        (self.0 - a % self.0) % self.0
    }
}

/// Rank of the matrix given by `(row, col, value)` triplets with nonzero
/// values and distinct positions.
///
/// Each step pivots on the entry minimising the Markowitz cost
/// (r_i - 1)(c_j - 1), ties broken by the lowest (row, col).
pub fn markowitz_rank<F: EliminationField>(
    field: &F,
    rows: usize,
    cols: usize,
    entries: impl IntoIterator<Item = (usize, usize, F::Elem)>,
) -> usize {
    let mut row_data: Vec<BTreeMap<usize, F::Elem>> = vec![BTreeMap::new(); rows];
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); cols];
    for (r, c, v) in entries {
        if !field.is_zero(&v) {
            row_data[r].insert(c, v);
            col_rows[c].insert(r);
        }
    }
    let mut active: BTreeSet<usize> = (0..rows).filter(|&r| !row_data[r].is_empty()).collect();
    let mut rank = 0;
    loop {
        let mut best: Option<(usize, usize, usize)> = None;
        'search: for &r in &active {
            let rl = row_data[r].len() - 1;
            for &c in row_data[r].keys() {
                let cost = rl * (col_rows[c].len() - 1);
                if best.is_none_or(|(b, _, _)| cost < b) {
                    best = Some((cost, r, c));
                    if cost == 0 {
                        break 'search;
                    }
                }
            }
        }
        let Some((_, pr, pc)) = best else { break };
        let pivot_row = std::mem::take(&mut row_data[pr]);
        active.remove(&pr);
        for c in pivot_row.keys() {
            col_rows[*c].remove(&pr);
        }
        let pivot_inv = field.inv(&pivot_row[&pc]);
        let targets: Vec<usize> = col_rows[pc].iter().copied().collect();
        for r in targets {
            let factor = field.mul(&row_data[r][&pc], &pivot_inv);
            for (c, v) in &pivot_row {
                let delta = field.mul(&factor, v);
                let row = &mut row_data[r];
                match row.get_mut(c) {
                    Some(old) => {
                        let new = field.sub(old, &delta);
                        if field.is_zero(&new) || *c == pc {
                            row.remove(c);
                            col_rows[*c].remove(&r);
                        } else {
                            *old = new;
                        }
                    }
                    None => {
                        row.insert(*c, field.neg(&delta));
                        col_rows[*c].insert(r);
                    }
                }
            }
            if row_data[r].is_empty() {
                active.remove(&r);
            }
        }
        rank += 1;
    }
    rank
}
