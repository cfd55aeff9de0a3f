//! Rank over ℚ or ℚ(i) by reduction modulo random word-sized primes.
//!
//! Reduction is a ring map from the coefficients with denominators prime
//! to p, so each modular rank is at most the true rank and the maximum over
//! several primes is a certified lower bound.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{markowitz_rank, ModP, SparseMatrix};
use crate::error::{Error, Result};
use crate::field::{inv_mod, is_prime, mul_mod, pow_mod, reduce_bigint, Field, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certainty {
    /// Lower bound, equal to the rank unless every prime was unlucky.
    Probabilistic,
    /// Confirmed by exact elimination.
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultimodularMode {
    Probabilistic { primes: usize },
    Exact { primes: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultimodularRank {
    pub rank: usize,
    pub certainty: Certainty,
    pub primes: Vec<u64>,
}

const PRIME_LOW: u64 = 1 << 30;
const PRIME_HIGH: u64 = 1 << 31;

fn reduce_rational(q: &BigRational, p: u64) -> Option<u64> {
    let d = reduce_bigint(q.denom(), p);
    if d == 0 {
        return None;
    }
    Some(mul_mod(reduce_bigint(q.numer(), p), inv_mod(d, p), p))
}

/// A square root of −1 modulo p ≡ 1 (mod 4).
fn sqrt_minus_one(p: u64, rng: &mut ChaCha8Rng) -> u64 {
    loop {
        let x = rng.gen_range(2..p - 1);
        let s = pow_mod(x, (p - 1) / 4, p);
        if mul_mod(s, s, p) == p - 1 {
            return s;
        }
    }
}

fn reduce_scalar(v: &Scalar, p: u64, i_root: u64) -> Option<u64> {
    match v {
        Scalar::Rat(q) => reduce_rational(q, p),
        Scalar::Gauss(re, im) => {
            let a = reduce_rational(re, p)?;
            let b = reduce_rational(im, p)?;
            Some((a + mul_mod(b, i_root, p)) % p)
        }
        Scalar::Mod(_) => None,
    }
}

/// Rank of the reduction modulo `p`, or `None` when `p` divides a
/// denominator. Gaussian matrices need p ≡ 1 (mod 4).
pub fn rank_modulo(m: &SparseMatrix, p: u64) -> Option<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(p);
    rank_modulo_with(m, p, &mut rng)
}

fn rank_modulo_with(m: &SparseMatrix, p: u64, rng: &mut ChaCha8Rng) -> Option<usize> {
    let i_root = match m.field() {
        Field::Gaussian if p % 4 != 1 => return None,
        Field::Gaussian => sqrt_minus_one(p, rng),
        _ => 0,
    };
    let mut entries = Vec::with_capacity(m.nnz());
    for (r, c, v) in m.entries() {
        let x = reduce_scalar(v, p, i_root)?;
        if x != 0 {
            entries.push((r, c, x));
        }
    }
    Some(markowitz_rank(&ModP(p), m.rows(), m.cols(), entries))
}

fn next_prime(rng: &mut ChaCha8Rng, gaussian: bool) -> u64 {
    loop {
        let p = rng.gen_range(PRIME_LOW..PRIME_HIGH) | 1;
        if (!gaussian || p % 4 == 1) && is_prime(p) {
            return p;
        }
    }
}

/// Rank via reduction modulo primes drawn from a seeded generator. Primes
/// dividing a denominator are skipped and redrawn.
pub fn rank_multimodular(m: &SparseMatrix, seed: u64, mode: MultimodularMode) -> Result<MultimodularRank> {
    let gaussian = match m.field() {
        Field::Rational => false,
        Field::Gaussian => true,
        f @ Field::Prime(_) => return Err(Error::UnsupportedField(f.to_string())),
    };
    let count = match mode {
        MultimodularMode::Probabilistic { primes } | MultimodularMode::Exact { primes } => primes.max(1),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut primes = Vec::with_capacity(count);
    let mut best = 0;
    let mut rejected = 0;
    while primes.len() < count {
        let p = next_prime(&mut rng, gaussian);
        match rank_modulo_with(m, p, &mut rng) {
            Some(r) => {
                best = best.max(r);
                primes.push(p);
            }
            None => {
                rejected += 1;
                log::debug!("prime {p} divides a denominator, skipped ({rejected} so far)");
            }
        }
    }
    match mode {
        MultimodularMode::Probabilistic { .. } => {
            Ok(MultimodularRank { rank: best, certainty: Certainty::Probabilistic, primes })
        }
        MultimodularMode::Exact { .. } => {
            let exact = m.rank();
            debug_assert!(exact >= best);
            Ok(MultimodularRank { rank: exact, certainty: Certainty::Exact, primes })
        }
    }
}
