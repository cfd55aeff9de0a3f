//! ε-quasitilings of labeled graphs, Bratteli diagrams, and Bratteli tiling
//! systems built from Følner sets.

mod bratteli;
mod system;

use num_rational::BigRational;
use num_traits::One;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::folner::FiniteSubset;
use crate::groups::{GroupElement, LabeledGraph, MarkedGroup};

pub use bratteli::{validate_bratteli, BratteliDiagram, BratteliReport, BratteliVertex};
pub use system::{
    build_bratteli_tiling_system, default_driver, empirical_harmonic, interval_driver, BratteliTilingSystem,
    HarmonicWeights, HierarchicalTiling, PlacedTile, SystemLevel, SystemReport, MAX_ESCALATIONS,
};

/// A finite shape containing the identity, with a spanning tree rooted at
/// the identity used to transport the shape onto a labeled graph.
#[derive(Clone, Debug)]
pub struct TileShape {
    pub id: usize,
    shape: FiniteSubset,
    /// BFS order of element indices; the root is the identity.
    order: Vec<usize>,
    /// (parent index, letter) for every non-root element.
    parent: Vec<Option<(usize, usize)>>,
    /// Edges (from, to, letter) between shape elements.
    edges: Vec<(usize, usize, usize)>,
}

impl TileShape {
    /// Fails unless the shape contains the identity and is connected in the
    /// Cayley graph.
    pub fn new(id: usize, shape: FiniteSubset) -> Result<Self> {
        let g = shape.group().clone();
        let root = shape
            .index_of(&g.identity())
            .ok_or_else(|| Error::InvalidParameter("tile shape must contain the identity".into()))?;
        let graph = g.induced_labeled_graph(&shape);
        let mut parent = vec![None; shape.len()];
        let mut seen = vec![false; shape.len()];
        let mut order = vec![root];
        seen[root] = true;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for s in 0..graph.degree() {
                if let Some(w) = graph.step(v, s) {
                    if !seen[w] {
                        seen[w] = true;
                        parent[w] = Some((v, s));
                        order.push(w);
                    }
                }
            }
        }
        if order.len() != shape.len() {
            return Err(Error::InvalidParameter("tile shape must be connected".into()));
        }
        let edges = graph.edges().collect();
        Ok(TileShape { id, shape, order, parent, edges })
    }

    pub fn singleton(id: usize, group: &MarkedGroup) -> Self {
        TileShape::new(id, FiniteSubset::new(group, [group.identity()])).expect("identity is a valid shape")
    }

    pub fn shape(&self) -> &FiniteSubset {
        &self.shape
    }

    pub fn size(&self) -> usize {
        self.shape.len()
    }

    pub fn is_singleton(&self) -> bool {
        self.size() == 1
    }

    /// Images of the shape elements (in sorted order) when the identity is
    /// sent to `anchor`, or `None` if the copy does not fit: an edge is
    /// missing, two elements collide, or a labeled edge is not preserved.
    pub fn place(&self, host: &LabeledGraph, anchor: usize) -> Option<Vec<usize>> {
        let mut image = vec![usize::MAX; self.size()];
        for &v in &self.order {
            image[v] = match self.parent[v] {
                None => anchor,
                Some((p, s)) => host.step(image[p], s)?,
            };
        }
        let mut sorted = image.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        for &(a, b, s) in &self.edges {
            if host.step(image[a], s) != Some(image[b]) {
                return None;
            }
        }
        Some(image)
    }
}

/// One tile: a shape copy anchored at a host vertex. `covered[i]` is the
/// image of the i-th shape element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    pub shape_id: usize,
    pub anchor: usize,
    pub covered: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Tiling {
    pub host: LabeledGraph,
    pub placements: Vec<Placement>,
    pub uncovered: Vec<usize>,
}

impl Tiling {
    fn new(host: LabeledGraph, placements: Vec<Placement>) -> Self {
        let mut hit = vec![false; host.vertex_count()];
        for p in &placements {
            for &v in &p.covered {
                hit[v] = true;
            }
        }
        let uncovered = (0..host.vertex_count()).filter(|&v| !hit[v]).collect();
        Tiling { host, placements, uncovered }
    }

    /// Whether the placements are pairwise disjoint.
    pub fn is_disjoint(&self) -> bool {
        let mut hit = vec![false; self.host.vertex_count()];
        for v in self.placements.iter().flat_map(|p| &p.covered) {
            if std::mem::replace(&mut hit[*v], true) {
                return false;
            }
        }
        true
    }

    pub fn cover(&self, eps: &BigRational) -> (bool, BigRational) {
        check_epsilon_cover(self.host.vertex_count(), &self.placements, eps)
    }

    pub fn disjoint(&self, eps: &BigRational) -> DisjointCheck {
        check_epsilon_disjoint(&self.placements, eps)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "vertices": self.host.vertex_count(),
            "placements": self.placements.iter().map(|p| json!({
                "shape_id": p.shape_id,
                "anchor": p.anchor,
                "covered": p.covered,
            })).collect::<Vec<_>>(),
            "uncovered": self.uncovered,
        })
    }
}

/// |∪ covered| / |host|, and whether it exceeds 1 − ε. A full cover holds
/// for every ε ≥ 0, so ε = 0 checks an exact cover.
pub fn check_epsilon_cover(host_size: usize, placements: &[Placement], eps: &BigRational) -> (bool, BigRational) {
    if host_size == 0 {
        return (true, BigRational::one());
    }
    let mut hit = vec![false; host_size];
    for v in placements.iter().flat_map(|p| &p.covered) {
        hit[*v] = true;
    }
    let union = hit.iter().filter(|&&h| h).count();
    let ratio = BigRational::new(union.into(), host_size.into());
    let holds = ratio.is_one() || ratio > BigRational::one() - eps;
    (holds, ratio)
}

/// Result of the greedy ε-disjointness check. `holds == false` means the
/// greedy witness failed, not that no witness exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisjointCheck {
    pub holds: bool,
    /// B_i ⊆ A_i, pairwise disjoint.
    pub shrunk: Vec<Vec<usize>>,
    /// min |B_i| / |A_i|, or 1 when there are no placements.
    pub worst_ratio: BigRational,
}

/// Builds disjoint B_i ⊆ A_i by first claim in placement order and checks
/// |B_i|/|A_i| > 1 − ε for every i. As with the cover check an untouched
/// tile passes at ε = 0.
pub fn check_epsilon_disjoint(placements: &[Placement], eps: &BigRational) -> DisjointCheck {
    let mut claimed = std::collections::HashSet::new();
    let mut shrunk = Vec::with_capacity(placements.len());
    let mut worst = BigRational::one();
    let threshold = BigRational::one() - eps;
    let mut holds = true;
    for p in placements {
        let b: Vec<usize> = p.covered.iter().copied().filter(|v| claimed.insert(*v)).collect();
        let ratio = if p.covered.is_empty() {
            BigRational::one()
        } else {
            BigRational::new(b.len().into(), p.covered.len().into())
        };
        holds &= ratio.is_one() || ratio > threshold;
        if ratio < worst {
            worst = ratio;
        }
        shrunk.push(b);
    }
    DisjointCheck { holds, shrunk, worst_ratio: worst }
}

/// Greedy quasitiling. Shapes are tried largest first (ties keep the given
/// order); for each, anchors are scanned in vertex order and a copy is
/// placed when it fits and fewer than ε|A| of its vertices are already
/// covered (a fully fresh copy is always accepted, so ε = 0 yields a
/// disjoint tiling).
pub fn quasitile(host: &LabeledGraph, shapes: &[TileShape], eps: &BigRational) -> Tiling {
    let mut order: Vec<&TileShape> = shapes.iter().collect();
    order.sort_by_key(|s| std::cmp::Reverse(s.size()));
    let mut hit = vec![false; host.vertex_count()];
    let mut placements = Vec::new();
    for shape in order {
        let limit = eps * BigRational::from_integer(shape.size().into());
        for anchor in 0..host.vertex_count() {
            let Some(covered) = shape.place(host, anchor) else { continue };
            let already = covered.iter().filter(|&&v| hit[v]).count();
            let fresh = already == 0 || BigRational::from_integer(already.into()) < limit;
            if !fresh {
                continue;
            }
            for &v in &covered {
                hit[v] = true;
            }
            placements.push(Placement { shape_id: shape.id, anchor, covered });
        }
    }
    Tiling::new(host.clone(), placements)
}

/// The host graph of a finite subset of a group.
pub fn host_graph(set: &FiniteSubset) -> LabeledGraph {
    set.group().induced_labeled_graph(set)
}

/// Left translate of a shape copy: the group element naming each covered
/// vertex of a placement in a group-induced host.
pub fn placement_elements<'a>(host: &'a LabeledGraph, p: &'a Placement) -> impl Iterator<Item = &'a GroupElement> {
    p.covered.iter().map(move |&v| host.element(v))
}
