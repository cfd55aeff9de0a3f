use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::render_rational;
use crate::rank::decimal;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BratteliVertex {
    pub label: String,
    pub size: u64,
}

/// A finite Bratteli diagram. `multiplicities[n][a][b]` is K(α, β) for α
/// the a-th vertex of level n and β the b-th vertex of level n + 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BratteliDiagram {
    pub levels: Vec<Vec<BratteliVertex>>,
    pub multiplicities: Vec<Vec<Vec<u64>>>,
    pub weights: Option<Vec<Vec<BigRational>>>,
}

impl BratteliDiagram {
    pub fn new(
        levels: Vec<Vec<BratteliVertex>>,
        multiplicities: Vec<Vec<Vec<u64>>>,
        weights: Option<Vec<Vec<BigRational>>>,
    ) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidParameter("a Bratteli diagram needs a level".into()));
        }
        if multiplicities.len() + 1 != levels.len() {
            return Err(Error::ShapeMismatch("one multiplicity table per pair of levels".into()));
        }
        for (n, k) in multiplicities.iter().enumerate() {
            if k.len() != levels[n].len() || k.iter().any(|row| row.len() != levels[n + 1].len()) {
                return Err(Error::ShapeMismatch(format!("multiplicity table {n} has the wrong shape")));
            }
        }
        if let Some(w) = &weights {
            if w.len() != levels.len() || w.iter().zip(&levels).any(|(w, l)| w.len() != l.len()) {
                return Err(Error::WeightMismatch("one weight per vertex".into()));
            }
        }
        Ok(BratteliDiagram { levels, multiplicities, weights })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "levels": self.levels.iter().map(|l| l.iter().map(|v| json!({
                "label": v.label,
                "size": v.size,
            })).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "multiplicities": self.multiplicities,
            "weights": self.weights.as_ref().map(|w| w.iter().map(|l| l.iter().map(render_rational).collect::<Vec<_>>()).collect::<Vec<_>>()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BratteliReport {
    /// Per transition n → n+1, per β: S(β) − Σ_α S(α)K(α,β).
    pub size_residuals: Vec<Vec<BigInt>>,
    /// Vertices (level, index) below the top level without an outgoing edge.
    pub dead_ends: Vec<(usize, usize)>,
    /// Σ_α P_n(α) per level, when weights are present.
    pub weight_sums: Vec<BigRational>,
    /// Per transition: max_α |P_n(α) − Σ_β S(α)K(α,β)/S(β)·P_{n+1}(β)|.
    pub harmonic_residuals: Vec<BigRational>,
    pub tolerance: BigRational,
    pub size_consistent: bool,
    pub normalized: bool,
    pub harmonic: bool,
}

impl BratteliReport {
    pub fn valid(&self) -> bool {
        self.size_consistent && self.dead_ends.is_empty() && self.normalized && self.harmonic
    }

    pub fn max_harmonic_residual(&self) -> BigRational {
        self.harmonic_residuals.iter().cloned().max().unwrap_or_else(BigRational::zero)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "size_residuals": self.size_residuals.iter().map(|l| l.iter().map(BigInt::to_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "dead_ends": self.dead_ends,
            "weight_sums": self.weight_sums.iter().map(render_rational).collect::<Vec<_>>(),
            "harmonic_residuals": self.harmonic_residuals.iter().map(render_rational).collect::<Vec<_>>(),
            "harmonic_residuals_decimal": self.harmonic_residuals.iter().map(decimal).collect::<Vec<_>>(),
            "tolerance": render_rational(&self.tolerance),
            "size_consistent": self.size_consistent,
            "normalized": self.normalized,
            "harmonic": self.harmonic,
            "valid": self.valid(),
        })
    }
}

/// Checks size consistency exactly and harmonicity of the weights (if any)
/// against `tol`.
pub fn validate_bratteli(d: &BratteliDiagram, tol: &BigRational) -> BratteliReport {
    let mut size_residuals = Vec::new();
    let mut dead_ends = Vec::new();
    for (n, k) in d.multiplicities.iter().enumerate() {
        let lower = &d.levels[n];
        let upper = &d.levels[n + 1];
        let res = upper
            .iter()
            .enumerate()
            .map(|(b, beta)| {
                let sum: BigInt = lower.iter().enumerate().map(|(a, alpha)| BigInt::from(alpha.size) * k[a][b]).sum();
                BigInt::from(beta.size) - sum
            })
            .collect();
        size_residuals.push(res);
        for (a, row) in k.iter().enumerate() {
            if row.iter().all(|&m| m == 0) {
                dead_ends.push((n, a));
            }
        }
    }
    let size_consistent = size_residuals.iter().flatten().all(Zero::is_zero);
    let mut weight_sums = Vec::new();
    let mut harmonic_residuals = Vec::new();
    if let Some(w) = &d.weights {
        weight_sums = w.iter().map(|l| l.iter().sum()).collect();
        for (n, k) in d.multiplicities.iter().enumerate() {
            let mut worst = BigRational::zero();
            for (a, alpha) in d.levels[n].iter().enumerate() {
                let mut pushed = BigRational::zero();
                for (b, beta) in d.levels[n + 1].iter().enumerate() {
                    if k[a][b] > 0 {
                        pushed += BigRational::new((alpha.size * k[a][b]).into(), beta.size.into()) * &w[n + 1][b];
                    }
                }
                let r = (&w[n][a] - pushed).abs();
                if r > worst {
                    worst = r;
                }
            }
            harmonic_residuals.push(worst);
        }
    }
    let normalized = weight_sums.iter().all(One::is_one);
    let harmonic = harmonic_residuals.iter().all(|r| r <= tol);
    BratteliReport {
        size_residuals,
        dead_ends,
        weight_sums,
        harmonic_residuals,
        tolerance: tol.clone(),
        size_consistent,
        normalized,
        harmonic,
    }
}
