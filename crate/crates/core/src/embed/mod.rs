//! Level algebras of a Bratteli tiling system: the maps π_i from KΓ into
//! ⊕_A Mat_{|A|}(K), the diagonal embeddings φ_i between levels and the
//! rank function rk_φ, with their defect bounds. The sofic side is in
//! [`sofic`].
//!
//! Blocks use the column convention of the rank estimators: column x of
//! π^A(a) holds a_γ at row xγ. Composition therefore reverses order, and
//! π(ab) is compared with π(b)·π(a).

mod sofic;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactla::{SparseMatrix, SparseMatrixBuilder};
use crate::field::{render_rational, Field};
use crate::folner::FiniteSubset;
use crate::groupring::GroupRingElement;
use crate::rank::{decimal, folner_rank_kernel, ConvergenceReport, Method, RankEstimate, Verdict};
use crate::tiling::{BratteliTilingSystem, SystemLevel};

pub use sofic::{
    first_identity_defect, psi_hom_defect, psi_map, sofic_from_folner, sofic_from_quotient, tau_map,
    tau_rank_convergence, tile_counts, IdentityDefect, SoficGraph,
};

/// An element of ⊕_{A ∈ Z_i} Mat_{|A|×|A|}(K), one block per vertex of
/// level i in diagram order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelElement {
    level: usize,
    field: Field,
    blocks: Vec<SparseMatrix>,
}

impl LevelElement {
    /// Fails on a non-square block or a block over another field.
    pub fn new(level: usize, field: Field, blocks: Vec<SparseMatrix>) -> Result<Self> {
        for (k, b) in blocks.iter().enumerate() {
            if b.rows() != b.cols() {
                return Err(Error::ShapeMismatch(format!("block {k} is {}x{}", b.rows(), b.cols())));
            }
            if b.field() != field {
                return Err(Error::FieldMismatch);
            }
        }
        Ok(LevelElement { level, field, blocks })
    }

    pub fn zero(system: &BratteliTilingSystem, level: usize, field: Field) -> Result<Self> {
        let sizes = system.level(level)?.sizes();
        let blocks = sizes.iter().map(|&d| SparseMatrix::zero(d as usize, d as usize, field)).collect();
        Ok(LevelElement { level, field, blocks })
    }

    pub fn identity(system: &BratteliTilingSystem, level: usize, field: Field) -> Result<Self> {
        let sizes = system.level(level)?.sizes();
        let blocks = sizes.iter().map(|&d| SparseMatrix::identity(d as usize, field)).collect();
        Ok(LevelElement { level, field, blocks })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn blocks(&self) -> &[SparseMatrix] {
        &self.blocks
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(SparseMatrix::rows).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|b| b.nnz() == 0)
    }

    pub fn ranks(&self) -> Vec<usize> {
        SparseMatrix::rank_many(&self.blocks)
    }

    fn zip(&self, other: &Self, f: impl Fn(&SparseMatrix, &SparseMatrix) -> Result<SparseMatrix>) -> Result<Self> {
        if self.level != other.level || self.blocks.len() != other.blocks.len() {
            return Err(Error::ShapeMismatch("level elements live on different levels".into()));
        }
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect::<Result<_>>()?;
        LevelElement::new(self.level, self.field, blocks)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, SparseMatrix::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, SparseMatrix::sub)
    }

    /// Blockwise matrix product self·other.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip(other, SparseMatrix::mul)
    }

    /// Blockwise conjugate transpose.
    pub fn star(&self) -> Self {
        LevelElement {
            level: self.level,
            field: self.field,
            blocks: self.blocks.iter().map(SparseMatrix::conj_transpose).collect(),
        }
    }

    fn check_level(&self, level: &SystemLevel) -> Result<()> {
        let want: Vec<usize> = level.sizes().iter().map(|&d| d as usize).collect();
        if self.sizes() != want {
            return Err(Error::ShapeMismatch(format!(
                "block sizes {:?} do not match level {} sizes {want:?}",
                self.sizes(),
                self.level
            )));
        }
        Ok(())
    }
}

fn boundary_count(shape: &FiniteSubset, r: usize) -> usize {
    shape.boundary_mask(r).iter().filter(|&&m| m).count()
}

/// π^A(a): e_x ↦ Σ a_γ e_{xγ} for x ∈ A \ ∂_r A, zero on ∂_r A.
fn shape_block(a: &GroupRingElement, shape: &FiniteSubset, r: usize) -> Result<SparseMatrix> {
    let g = shape.group();
    let mask = shape.boundary_mask(r);
    let mut b = SparseMatrixBuilder::new(shape.len(), shape.len(), a.field());
    for (x, elem) in shape.iter().enumerate() {
        if mask[x] {
            continue;
        }
        for (gamma, c) in a.terms() {
            let y = shape.index_of(&g.mul(elem, gamma)).expect("interior points keep their r-ball");
            b.add(y, x, c)?;
        }
    }
    Ok(b.build())
}

/// π_i(a), with r the support radius of a.
pub fn pi_level(a: &GroupRingElement, system: &BratteliTilingSystem, i: usize) -> Result<LevelElement> {
    if a.group() != system.group() {
        return Err(Error::OwnerMismatch);
    }
    let level = system.level(i)?;
    let r = a.support_radius();
    let blocks = level
        .shapes
        .par_iter()
        .map(|s| shape_block(a, s.shape(), r))
        .collect::<Result<Vec<_>>>()?;
    LevelElement::new(i, a.field(), blocks)
}

/// φ_i: each B-block of the result is the block diagonal of x's A-blocks
/// over the pieces δ·A of B, in the stored decomposition order.
pub fn phi_embed(x: &LevelElement, system: &BratteliTilingSystem) -> Result<LevelElement> {
    let below = system.level(x.level)?;
    x.check_level(below)?;
    let above = system.level(x.level + 1)?;
    let g = system.group();
    let blocks = above
        .shapes
        .iter()
        .zip(&above.decompositions)
        .map(|(b, dec)| {
            let target = b.shape();
            let mut out = SparseMatrixBuilder::new(b.size(), b.size(), x.field);
            for (a, delta) in dec {
                let pos: Vec<usize> = below.shapes[*a]
                    .shape()
                    .iter()
                    .map(|h| target.index_of(&g.mul(delta, h)).expect("pieces lie inside their shape"))
                    .collect();
                for (r, c, v) in x.blocks[*a].entries() {
                    out.set(pos[r], pos[c], v.clone())?;
                }
            }
            Ok(out.build())
        })
        .collect::<Result<Vec<_>>>()?;
    LevelElement::new(x.level + 1, x.field, blocks)
}

/// rk_φ(x) = Σ_A m(A)·rank(x_A)/|A|. The weights must sum to 1.
pub fn rk_phi(x: &LevelElement, weights: &[BigRational]) -> Result<BigRational> {
    if weights.len() != x.blocks.len() {
        return Err(Error::WeightMismatch(format!("{} weights for {} blocks", weights.len(), x.blocks.len())));
    }
    if !weights.iter().sum::<BigRational>().is_one() {
        return Err(Error::WeightMismatch("weights do not sum to 1".into()));
    }
    Ok(x
        .ranks()
        .into_iter()
        .zip(weights)
        .zip(x.sizes())
        .map(|((rank, m), d)| m * BigRational::new(rank.into(), d.into()))
        .sum())
}

/// The attached weights of level i.
pub fn level_weights(system: &BratteliTilingSystem, i: usize) -> Result<&[BigRational]> {
    let w = system.weights().ok_or_else(|| Error::WeightMismatch("the system carries no weights".into()))?;
    w.get(i.wrapping_sub(1)).map(Vec::as_slice).ok_or(Error::MissingLevel(i))
}

/// A measured defect and the bound it must respect. `terms` carries
/// further reported quantities, such as a coarser bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Defect {
    pub defect: BigRational,
    pub bound: BigRational,
    pub terms: Vec<(String, BigRational)>,
}

impl Defect {
    pub fn holds(&self) -> bool {
        self.defect <= self.bound
    }

    pub fn to_json(&self) -> Value {
        let terms: serde_json::Map<String, Value> =
            self.terms.iter().map(|(k, v)| (k.clone(), Value::String(render_rational(v)))).collect();
        json!({
            "defect": render_rational(&self.defect),
            "defect_decimal": decimal(&self.defect),
            "bound": render_rational(&self.bound),
            "bound_decimal": decimal(&self.bound),
            "slack_terms": terms,
            "holds": self.holds(),
        })
    }
}

fn pow2_inv(n: usize) -> BigRational {
    BigRational::new(1.into(), num_bigint::BigInt::from(2u32).pow(n as u32))
}

/// rk_φ(φ_i(π_i(a)) − π_{i+1}(a)) under the level-(i+1) weights.
///
/// The two sides agree on every column outside ∂_r B and outside the
/// pieces' boundaries δ·∂_r A, so the asserted bound is
/// Σ_B m(B)·min(|B|, |∂_r B| + Σ_A K(A,B)|∂_r A|)/|B|. The coarse bound
/// 2^-(i+1) + Σ_{|B|>1} m(B)(2^-(i+1)(d+1)^(r+1) + 2^-(i+1) + 2^-i(d+1)^(r+1))
/// is reported under `coarse`.
pub fn cauchy_defect(a: &GroupRingElement, system: &BratteliTilingSystem, i: usize) -> Result<Defect> {
    let embedded = phi_embed(&pi_level(a, system, i)?, system)?;
    let direct = pi_level(a, system, i + 1)?;
    let m = level_weights(system, i + 1)?;
    let defect = rk_phi(&embedded.sub(&direct)?, m)?;

    let r = a.support_radius();
    let below = system.level(i)?;
    let above = system.level(i + 1)?;
    let below_bd: Vec<usize> = below.shapes.iter().map(|s| boundary_count(s.shape(), r)).collect();
    let mut sharp = BigRational::zero();
    for ((b, dec), mb) in above.shapes.iter().zip(&above.decompositions).zip(m) {
        let miss = boundary_count(b.shape(), r) + dec.iter().map(|(a, _)| below_bd[*a]).sum::<usize>();
        sharp += mb * BigRational::new(miss.min(b.size()).into(), b.size().into());
    }

    let d = system.group().degree() as u64;
    let c = BigRational::from_integer(num_bigint::BigInt::from(d + 1).pow(r as u32 + 1));
    let h = pow2_inv(i + 1);
    let per_b = &h * &c + &h + pow2_inv(i) * &c;
    let mut coarse = h.clone();
    for (b, mb) in above.shapes.iter().zip(m) {
        if b.size() > 1 {
            coarse += mb * &per_b;
        }
    }
    Ok(Defect { defect, bound: sharp, terms: vec![("coarse".into(), coarse)] })
}

fn boundary_bound(level: &SystemLevel, m: &[BigRational], radius: usize) -> BigRational {
    level
        .shapes
        .iter()
        .zip(m)
        .map(|(s, w)| w * BigRational::new(boundary_count(s.shape(), radius).into(), s.size().into()))
        .sum()
}

/// rk_φ(π_i(b)·π_i(a) − π_i(ab)) against Σ_A m(A)|∂_{r+s}A|/|A|, with
/// r, s the support radii of a and b.
pub fn hom_defect(
    a: &GroupRingElement,
    b: &GroupRingElement,
    system: &BratteliTilingSystem,
    i: usize,
) -> Result<Defect> {
    let pa = pi_level(a, system, i)?;
    let pb = pi_level(b, system, i)?;
    let pab = pi_level(&a.mul(b)?, system, i)?;
    let m = level_weights(system, i)?;
    let defect = rk_phi(&pb.mul(&pa)?.sub(&pab)?, m)?;
    let bound = boundary_bound(system.level(i)?, m, a.support_radius() + b.support_radius());
    Ok(Defect { defect, bound, terms: Vec::new() })
}

/// rk_φ(π_i(a*) − π_i(a)*) against Σ_A m(A)|∂_{2r}A|/|A|.
pub fn star_defect(a: &GroupRingElement, system: &BratteliTilingSystem, i: usize) -> Result<Defect> {
    let m = level_weights(system, i)?;
    let diff = pi_level(&a.star(), system, i)?.sub(&pi_level(a, system, i)?.star())?;
    let defect = rk_phi(&diff, m)?;
    let bound = boundary_bound(system.level(i)?, m, 2 * a.support_radius());
    Ok(Defect { defect, bound, terms: Vec::new() })
}

/// Values per stage against a target, each with the slack that should
/// cover its deviation. `tolerance` is added to every slack; it carries
/// the error bracket of an estimated target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectSeries {
    pub report: ConvergenceReport,
    pub target: BigRational,
    pub reference: Option<RankEstimate>,
    pub deviations: Vec<BigRational>,
    pub slacks: Vec<BigRational>,
    pub tolerance: BigRational,
}

impl DefectSeries {
    fn new(
        estimates: Vec<RankEstimate>,
        target: BigRational,
        reference: Option<RankEstimate>,
        slacks: Vec<BigRational>,
    ) -> Self {
        let deviations: Vec<BigRational> = estimates.iter().map(|e| (&e.value - &target).abs()).collect();
        let tolerance = reference.as_ref().map(|r| r.bound.clone()).unwrap_or_else(BigRational::zero);
        let mut report = ConvergenceReport::from_estimates(estimates);
        report.final_gap = deviations.last().cloned();
        report.gap_bound = slacks.last().map(|s| s + &tolerance);
        let mut series = DefectSeries { report, target, reference, deviations, slacks, tolerance };
        series.report.verdict = if series.holds() { Verdict::Consistent } else { Verdict::Inconsistent };
        series
    }

    pub fn holds(&self) -> bool {
        self.deviations.iter().zip(&self.slacks).all(|(d, s)| *d <= s + &self.tolerance)
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.report.to_json();
        v["target"] = json!(render_rational(&self.target));
        v["target_decimal"] = json!(decimal(&self.target));
        v["reference"] = self.reference.as_ref().map_or(Value::Null, RankEstimate::to_json);
        v["deviations"] = json!(self.deviations.iter().map(render_rational).collect::<Vec<_>>());
        v["slack_terms"] = json!({
            "slacks": self.slacks.iter().map(render_rational).collect::<Vec<_>>(),
            "tolerance": render_rational(&self.tolerance),
        });
        v["holds"] = json!(self.holds());
        v
    }
}

/// Estimate for a rational value in [0, k], as a reduced fraction.
pub(crate) fn rational_estimate(method: Method, parameter: u64, value: &BigRational, bound: BigRational) -> RankEstimate {
    let num: u64 = value.numer().try_into().expect("rank fractions fit in u64");
    let den: u64 = value.denom().try_into().expect("rank fractions fit in u64");
    RankEstimate::new(method, vec![parameter], None, 1, num, den, bound)
}

/// rk_φ(π_i(a)) per level i, against the Følner kernel estimate at
/// stage `reference_n`. The slack at level i is m(E_i) plus
/// Σ_{A ≠ E_i} m(A)|∂_r A|/|A|; the reference's own bound is the
/// tolerance.
pub fn rank_convergence(
    a: &GroupRingElement,
    system: &BratteliTilingSystem,
    i_list: &[usize],
    reference_n: usize,
) -> Result<DefectSeries> {
    if i_list.is_empty() {
        return Err(Error::InvalidParameter("no levels given".into()));
    }
    let reference = folner_rank_kernel(a, &[reference_n])?.estimates.remove(0);
    let r = a.support_radius();
    let mut estimates = Vec::new();
    let mut slacks = Vec::new();
    for &i in i_list {
        let level = system.level(i)?;
        let m = level_weights(system, i)?;
        let value = rk_phi(&pi_level(a, system, i)?, m)?;
        let e = level.singleton_index();
        let mut slack = m[e].clone();
        for (s, w) in level.shapes.iter().zip(m).take(e) {
            slack += w * BigRational::new(boundary_count(s.shape(), r).into(), s.size().into());
        }
        estimates.push(rational_estimate(Method::Level, i as u64, &value, slack.clone()));
        slacks.push(slack);
    }
    Ok(DefectSeries::new(estimates, reference.value.clone(), Some(reference), slacks))
}

#[cfg(test)]
mod tests;
