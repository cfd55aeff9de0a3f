//! Finite subsets of catalog groups, r-boundaries, isoperimetric constants
//! and the canonical Følner boxes.

use std::collections::HashMap;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::groups::{box_coordinates, GroupElement, GroupKind, MarkedGroup};

/// A deduplicated finite set of group elements, kept in sorted normal form.
#[derive(Clone, Debug)]
pub struct FiniteSubset {
    group: MarkedGroup,
    elements: Vec<GroupElement>,
    index: HashMap<GroupElement, usize>,
}

impl PartialEq for FiniteSubset {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.elements == other.elements
    }
}

impl Eq for FiniteSubset {}

impl FiniteSubset {
    pub fn new(group: &MarkedGroup, elements: impl IntoIterator<Item = GroupElement>) -> Self {
        let mut elements: Vec<GroupElement> = elements.into_iter().collect();
        elements.sort();
        elements.dedup();
        let index = elements.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        FiniteSubset { group: group.clone(), elements, index }
    }

    pub fn from_coords<I, C>(group: &MarkedGroup, coords: I) -> Result<Self>
    where
        I: IntoIterator<Item = C>,
        C: AsRef<[i64]>,
    {
        let elements = coords
            .into_iter()
            .map(|c| group.element(c.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(group, elements))
    }

    /// The box [0, d_1) × … × [0, d_k) in normal-form coordinates.
    pub fn from_box(group: &MarkedGroup, dims: &[u64]) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidParameter("box sides must be positive".into()));
        }
        let elements = box_coordinates(dims).map(|c| group.element(&c)).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(group, elements))
    }

    pub fn group(&self) -> &MarkedGroup {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroupElement> {
        self.elements.iter()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.index.contains_key(g)
    }

    /// Position of `g` in the sorted order.
    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn is_subset_of(&self, other: &FiniteSubset) -> bool {
        self.iter().all(|x| other.contains(x))
    }

    /// F \ other.
    pub fn difference(&self, other: &FiniteSubset) -> FiniteSubset {
        FiniteSubset::new(&self.group, self.iter().filter(|x| !other.contains(x)).cloned())
    }

    /// The left translate γF.
    pub fn translate(&self, gamma: &GroupElement) -> FiniteSubset {
        FiniteSubset::new(&self.group, self.iter().map(|x| self.group.mul(gamma, x)))
    }

    /// Whether this set is the whole (finite) group.
    pub fn is_whole_group(&self) -> bool {
        self.group.order() == Some(self.len() as u64)
    }

    /// ∂_r F: the points of F within word distance r of the complement.
    pub fn boundary(&self, r: usize) -> FiniteSubset {
        let marks = self.boundary_mask(r);
        FiniteSubset::new(
            &self.group,
            self.elements.iter().zip(&marks).filter(|(_, &m)| m).map(|(e, _)| e.clone()),
        )
    }

    /// Membership of each element (in sorted order) in ∂_r F.
    pub fn boundary_mask(&self, r: usize) -> Vec<bool> {
        if r == 0 {
            return vec![false; self.len()];
        }
        let g = &self.group;
        let neighbours = |i: usize| {
            (0..g.degree()).map(move |s| self.index_of(&g.mul(&self.elements[i], g.letter_element(s))))
        };
        // Exterior boundary layer, then BFS inside F for the remaining r-1 steps.
        let mut dist: Vec<Option<usize>> = (0..self.len())
            .map(|i| neighbours(i).any(|n| n.is_none()).then_some(0))
            .collect();
        let mut frontier: Vec<usize> = (0..self.len()).filter(|&i| dist[i].is_some()).collect();
        for d in 1..r {
            let mut next = Vec::new();
            for &i in &frontier {
                for j in neighbours(i).flatten() {
                    if dist[j].is_none() {
                        dist[j] = Some(d);
                        next.push(j);
                    }
                }
            }
            frontier = next;
        }
        dist.into_iter().map(|d| d.is_some()).collect()
    }

    /// i(F) = |∂F| / |F|.
    pub fn isoperimetric(&self) -> Result<BigRational> {
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        let b = self.boundary_mask(1).iter().filter(|&&m| m).count();
        Ok(BigRational::new(b.into(), self.len().into()))
    }
}

/// The n-th canonical Følner set: `[0,n)^d` for free abelian groups, the
/// box times the finite factor for products, and
/// `{x^a y^b z^c : 0 ≤ a,b < n, 0 ≤ c < n²}` for the Heisenberg group.
/// For finite groups the whole group is returned and a warning is logged;
/// check with [`FiniteSubset::is_whole_group`].
pub fn folner_set(group: &MarkedGroup, n: usize) -> Result<FiniteSubset> {
    if n == 0 {
        return Err(Error::InvalidParameter("Følner index must be positive".into()));
    }
    let n = n as u64;
    let ranges: Vec<u64> = match group.kind() {
        GroupKind::FreeAbelian(d) => vec![n; *d],
        GroupKind::FreeAbelianTimesFinite { rank, orders } => {
            let mut r = vec![n; *rank];
            r.extend(orders);
            r
        }
        GroupKind::Heisenberg3 => vec![n, n, n * n],
        GroupKind::FiniteAbelian(_) | GroupKind::HeisenbergMod(_) => {
            log::warn!("{group} is finite; returning the whole group as its Følner set");
            return group.elements();
        }
    };
    Ok(FiniteSubset::new(group, box_coordinates(&ranges).map(GroupElement)))
}
