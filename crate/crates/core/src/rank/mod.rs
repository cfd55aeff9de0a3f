//! Rank estimators for elements and matrices over KΓ: Følner image and
//! kernel estimators and the finite-quotient estimator.
//!
//! Matrices act on row vectors, z ↦ z·Δ, so right multiplication by an
//! element a sends the basis vector x to Σ a_γ xγ. In the coordinate
//! matrices below column (i, x) holds the image of x in the i-th copy.

mod report;

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::Signed;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactla::{SparseMatrix, SparseMatrixBuilder};
use crate::folner::{folner_set, FiniteSubset};
use crate::groupring::{GroupRingElement, GroupRingMatrix};
use crate::groups::{GroupElement, MarkedGroup};

pub use report::{decimal, ConvergenceReport, Method, RankEstimate, Verdict, CSV_HEADER, DECIMAL_PLACES};

/// Window default: s = r, or s = r + 1 in strict mode.
pub fn default_window(radius: usize, strict: bool) -> usize {
    radius + usize::from(strict)
}

/// Matrix of z ↦ z·Δ from the coordinates on `domain` (k copies) into the
/// coordinates on `codomain` (k copies). Every product x·γ must land in the
/// codomain.
fn block_matrix(
    delta: &GroupRingMatrix,
    group: &MarkedGroup,
    domain: &[GroupElement],
    codomain: &HashMap<GroupElement, usize>,
) -> Result<SparseMatrix> {
    let k = delta.rows();
    let (nd, nc) = (domain.len(), codomain.len());
    let mut b = SparseMatrixBuilder::new(k * nc, k * nd, delta.field());
    for i in 0..k {
        for j in 0..k {
            for (gamma, a) in delta.get(i, j).terms() {
                for (xi, x) in domain.iter().enumerate() {
                    let y = group.mul(x, gamma);
                    let yi = codomain.get(&y).ok_or_else(|| {
                        Error::InvalidParameter("product leaves the codomain; window too large for F".into())
                    })?;
                    b.add(j * nc + yi, i * nd + xi, a)?;
                }
            }
        }
    }
    Ok(b.build())
}

fn index(set: &FiniteSubset) -> HashMap<GroupElement, usize> {
    set.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect()
}

fn check_square(delta: &GroupRingMatrix) -> Result<()> {
    if delta.rows() != delta.cols() {
        return Err(Error::ShapeMismatch(format!("expected a square matrix, got {}x{}", delta.rows(), delta.cols())));
    }
    Ok(())
}

fn check_window(delta: &GroupRingMatrix, s: usize) -> Result<()> {
    let r = delta.support_radius();
    if s < r {
        return Err(Error::WindowTooSmall { window: s, radius: r });
    }
    Ok(())
}

fn window_of(f: &FiniteSubset, s: usize) -> Vec<GroupElement> {
    let mask = f.boundary_mask(s);
    f.iter().zip(&mask).filter(|(_, &m)| !m).map(|(g, _)| g.clone()).collect()
}

/// Right multiplication by `a` from the span of F \ ∂_s F into the span of
/// F. Columns follow F \ ∂_s F, rows follow F, both in sorted order.
pub fn right_mult_matrix(a: &GroupRingElement, f: &FiniteSubset, s: usize) -> Result<SparseMatrix> {
    matrix_right_mult(&GroupRingMatrix::scalar(a.clone()), f, s)
}

/// Block version of [`right_mult_matrix`] for a k×k matrix: columns
/// (i, x) for x in the window, rows (j, y) for y in F.
pub fn matrix_right_mult(delta: &GroupRingMatrix, f: &FiniteSubset, s: usize) -> Result<SparseMatrix> {
    check_square(delta)?;
    check_window(delta, s)?;
    if f.group() != delta.group() {
        return Err(Error::OwnerMismatch);
    }
    block_matrix(delta, f.group(), &window_of(f, s), &index(f))
}

/// (|∂_s F| + |F \ window|)·k / |F|.
fn stage_bound(f: &FiniteSubset, s: usize, k: usize) -> BigRational {
    let boundary = f.boundary_mask(s).iter().filter(|&&m| m).count();
    BigRational::new((2 * boundary * k).into(), f.len().into())
}

fn stages(n_list: &[usize]) -> Result<Vec<usize>> {
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.is_empty() || ns[0] == 0 {
        return Err(Error::InvalidParameter("stage list must be nonempty and positive".into()));
    }
    Ok(ns)
}

fn image_stage(delta: &GroupRingMatrix, n: usize, s: usize) -> Result<RankEstimate> {
    let f = folner_set(delta.group(), n)?;
    let m = matrix_right_mult(delta, &f, s)?;
    let k = delta.rows();
    Ok(RankEstimate::new(
        Method::FolnerImage,
        vec![n as u64],
        Some(s),
        k,
        m.rank() as u64,
        f.len() as u64,
        stage_bound(&f, s, k),
    ))
}

/// Per stage n: rank(z ↦ zΔ on the window) / |F_n|, in [0, k].
pub fn matrix_rank_estimate(delta: &GroupRingMatrix, n_list: &[usize], s: usize) -> Result<ConvergenceReport> {
    check_square(delta)?;
    check_window(delta, s)?;
    let ests = stages(n_list)?
        .into_par_iter()
        .map(|n| image_stage(delta, n, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::from_estimates(ests))
}

/// Per stage n: rank(right_mult_matrix(a, F_n, s)) / |F_n|.
pub fn folner_rank_image(a: &GroupRingElement, n_list: &[usize], s: usize) -> Result<ConvergenceReport> {
    matrix_rank_estimate(&GroupRingMatrix::scalar(a.clone()), n_list, s)
}

/// Right multiplication on all of F_n (k copies) into F_n·supp(Δ), so that
/// the kernel is the true kernel {z : zΔ = 0} restricted to F_n.
pub fn full_right_mult(delta: &GroupRingMatrix, f: &FiniteSubset) -> Result<SparseMatrix> {
    check_square(delta)?;
    let g = f.group();
    let mut support: Vec<GroupElement> = Vec::new();
    for i in 0..delta.rows() {
        for j in 0..delta.cols() {
            support.extend(delta.get(i, j).support().cloned());
        }
    }
    support.sort();
    support.dedup();
    let codomain = FiniteSubset::new(g, f.iter().flat_map(|x| support.iter().map(move |s| g.mul(x, s))));
    block_matrix(delta, g, f.elements(), &index(&codomain))
}

fn kernel_stage(delta: &GroupRingMatrix, n: usize) -> Result<RankEstimate> {
    let f = folner_set(delta.group(), n)?;
    let m = full_right_mult(delta, &f)?;
    let k = delta.rows();
    let r = delta.support_radius();
    Ok(RankEstimate::new(
        Method::FolnerKernel,
        vec![n as u64],
        None,
        k,
        m.rank() as u64,
        f.len() as u64,
        stage_bound(&f, r, k),
    ))
}

/// Per stage n: k − dim{z on F_n : zΔ = 0}/|F_n|.
pub fn matrix_rank_kernel(delta: &GroupRingMatrix, n_list: &[usize]) -> Result<ConvergenceReport> {
    check_square(delta)?;
    let ests = stages(n_list)?
        .into_par_iter()
        .map(|n| kernel_stage(delta, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::from_estimates(ests))
}

/// Per stage n: 1 − dim{z supported on F_n : za = 0}/|F_n|.
pub fn folner_rank_kernel(a: &GroupRingElement, n_list: &[usize]) -> Result<ConvergenceReport> {
    matrix_rank_kernel(&GroupRingMatrix::scalar(a.clone()), n_list)
}

/// The convolution matrix of π(Δ) acting on K[Γ/N]^k.
pub fn quotient_matrix(delta: &GroupRingMatrix, moduli: &[u64]) -> Result<(SparseMatrix, u64)> {
    check_square(delta)?;
    let (target, proj) = delta.group().quotient(moduli)?;
    let r = delta.support_radius();
    let diam = target.diameter()?;
    if diam <= 2 * r {
        log::warn!(
            "quotient {target} has diameter {diam} <= 2·{r}; the projection may identify support elements"
        );
    }
    let k = delta.rows();
    let mut rows = Vec::with_capacity(k);
    for i in 0..k {
        rows.push((0..k).map(|j| delta.get(i, j).map_support(&target, |g| proj.apply(g))).collect());
    }
    let projected = GroupRingMatrix::from_rows(rows)?;
    let elements = target.elements()?;
    let m = block_matrix(&projected, &target, elements.elements(), &index(&elements))?;
    Ok((m, elements.len() as u64))
}

/// rank of π(Δ) on K[Γ/N]^k divided by |Γ/N|.
pub fn quotient_rank(delta: &GroupRingMatrix, moduli: &[u64]) -> Result<RankEstimate> {
    let (m, order) = quotient_matrix(delta, moduli)?;
    Ok(RankEstimate::new(
        Method::Quotient,
        moduli.to_vec(),
        None,
        delta.rows(),
        m.rank() as u64,
        order,
        BigRational::from_integer(0.into()),
    ))
}

pub fn quotient_report(delta: &GroupRingMatrix, quotients: &[Vec<u64>]) -> Result<ConvergenceReport> {
    if quotients.is_empty() {
        return Err(Error::InvalidParameter("no quotients given".into()));
    }
    let ests = quotients.par_iter().map(|m| quotient_rank(delta, m)).collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::from_estimates(ests))
}

/// Følner-side settings for [`compare_report`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FolnerParams {
    pub n_list: Vec<usize>,
    pub window: usize,
    /// [`Method::FolnerImage`] or [`Method::FolnerKernel`].
    pub method: Method,
}

/// Følner estimates and quotient estimates side by side. The final gap is
/// compared against the last Følner stage bound; quotient stages carry no
/// bound of their own.
pub fn compare_report(
    delta: &GroupRingMatrix,
    folner: &FolnerParams,
    quotients: &[Vec<u64>],
) -> Result<ConvergenceReport> {
    let side = match folner.method {
        Method::FolnerImage => matrix_rank_estimate(delta, &folner.n_list, folner.window)?,
        Method::FolnerKernel => matrix_rank_kernel(delta, &folner.n_list)?,
        Method::Quotient | Method::Level | Method::Sofic => {
            return Err(Error::InvalidParameter("the Følner side needs a Følner method".into()));
        }
    };
    let quotient = quotient_report(delta, quotients)?;
    let mut all = side.estimates;
    all.extend(quotient.estimates);
    let mut report = ConvergenceReport::from_estimates(all);
    let f = report.last(folner.method).expect("nonempty stages");
    let q = report.last(Method::Quotient).expect("nonempty quotients");
    let gap = (&f.value - &q.value).abs();
    let bound = &f.bound + &q.bound;
    report.verdict = if gap <= bound { Verdict::Consistent } else { Verdict::Inconsistent };
    report.final_gap = Some(gap);
    report.gap_bound = Some(bound);
    Ok(report)
}
