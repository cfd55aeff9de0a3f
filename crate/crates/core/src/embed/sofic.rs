//! Sofic representations: ψ(a) on a graph that locally looks like the
//! Cayley graph, and τ(x) placing level blocks along a tiling of the graph.

use std::borrow::Cow;
use std::collections::{HashMap, HashSet, VecDeque};

use num_rational::BigRational;
use num_traits::Signed;
use serde_json::{json, Value};

use super::{level_weights, rational_estimate, rk_phi, Defect, DefectSeries, LevelElement};
use crate::error::{Error, Result};
use crate::exactla::{SparseMatrix, SparseMatrixBuilder};
use crate::field::render_rational;
use crate::folner::folner_set;
use crate::groupring::GroupRingElement;
use crate::groups::{GroupElement, LabeledGraph, MarkedGroup};
use crate::rank::{decimal, Method};
use crate::tiling::{BratteliTilingSystem, HierarchicalTiling, PlacedTile};

/// A finite labeled graph over the generators of Γ, with the vertices
/// whose r-balls are labeled-isomorphic to B_r(1) in Cay(Γ, S).
#[derive(Clone, Debug)]
pub struct SoficGraph {
    group: MarkedGroup,
    graph: LabeledGraph,
    /// good[r][v]: v ∈ V^r, for r up to the construction radius.
    good: Vec<Vec<bool>>,
}

/// Ball of radius r in the graph around x, by BFS along out-edges.
fn graph_ball(graph: &LabeledGraph, x: usize, r: usize) -> HashSet<usize> {
    let mut seen = HashSet::from([x]);
    let mut queue = VecDeque::from([(x, 0)]);
    while let Some((v, d)) = queue.pop_front() {
        if d == r {
            continue;
        }
        for s in 0..graph.degree() {
            if let Some(w) = graph.step(v, s) {
                if seen.insert(w) {
                    queue.push_back((w, d + 1));
                }
            }
        }
    }
    seen
}

/// The ball B_r(1) with a geodesic word per element, in a fixed order.
struct GroupBall {
    elements: Vec<GroupElement>,
    words: Vec<Vec<usize>>,
    index: HashMap<GroupElement, usize>,
}

impl GroupBall {
    fn new(group: &MarkedGroup, r: usize) -> Self {
        let mut pairs: Vec<(GroupElement, Vec<usize>)> = group.geodesic_words(r).into_iter().collect();
        pairs.sort();
        let index = pairs.iter().enumerate().map(|(k, (g, _))| (g.clone(), k)).collect();
        let (elements, words) = pairs.into_iter().unzip();
        GroupBall { elements, words, index }
    }

    /// Whether the r-ball of x is labeled-isomorphic to B_r(1) by the map
    /// sending 1 to x.
    fn matches(&self, group: &MarkedGroup, graph: &LabeledGraph, x: usize, r: usize) -> bool {
        let ball = graph_ball(graph, x, r);
        if ball.len() != self.elements.len() {
            return false;
        }
        let mut image = Vec::with_capacity(self.words.len());
        for w in &self.words {
            match graph.follow(x, w) {
                Some(v) if ball.contains(&v) => image.push(v),
                _ => return false,
            }
        }
        let pos: HashMap<usize, usize> = image.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        if pos.len() != image.len() {
            return false;
        }
        for (k, g) in self.elements.iter().enumerate() {
            for s in 0..group.degree() {
                let in_group = self.index.get(&group.mul(g, group.letter_element(s))).copied();
                let in_graph = graph.step(image[k], s).and_then(|v| pos.get(&v).copied());
                if in_group != in_graph {
                    return false;
                }
            }
        }
        true
    }
}

fn good_mask(group: &MarkedGroup, graph: &LabeledGraph, r: usize) -> Vec<bool> {
    let ball = GroupBall::new(group, r);
    (0..graph.vertex_count()).map(|x| ball.matches(group, graph, x, r)).collect()
}

impl SoficGraph {
    /// Computes V^0, …, V^radius by the ball-isomorphism check.
    pub fn new(group: &MarkedGroup, graph: LabeledGraph, radius: usize) -> Result<Self> {
        if graph.degree() != group.degree() {
            return Err(Error::ShapeMismatch(format!(
                "graph has {} labels, the group {} letters",
                graph.degree(),
                group.degree()
            )));
        }
        let good = (0..=radius).map(|r| good_mask(group, &graph, r)).collect();
        Ok(SoficGraph { group: group.clone(), graph, good })
    }

    pub fn group(&self) -> &MarkedGroup {
        &self.group
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    /// Largest radius with a cached V^r.
    pub fn radius(&self) -> usize {
        self.good.len() - 1
    }

    /// Membership in V^r; radii beyond the cached ones are computed afresh.
    pub fn good_mask(&self, r: usize) -> Cow<'_, [bool]> {
        match self.good.get(r) {
            Some(m) => Cow::Borrowed(m),
            None => Cow::Owned(good_mask(&self.group, &self.graph, r)),
        }
    }

    pub fn good_vertices(&self, r: usize) -> Vec<usize> {
        self.good_mask(r).iter().enumerate().filter(|(_, &g)| g).map(|(v, _)| v).collect()
    }
}

/// Cay(Γ/N, S) for the catalog quotient with the given moduli.
pub fn sofic_from_quotient(group: &MarkedGroup, moduli: &[u64], r: usize) -> Result<SoficGraph> {
    let (target, _) = group.quotient(moduli)?;
    let diam = target.diameter()?;
    if diam <= 2 * r {
        log::warn!("quotient {target} has diameter {diam} <= 2·{r}; V^{r} may be small");
    }
    SoficGraph::new(group, target.cayley_graph()?, r)
}

/// The induced graph of the n-th Følner set.
pub fn sofic_from_folner(group: &MarkedGroup, n: usize, r: usize) -> Result<SoficGraph> {
    let f = folner_set(group, n)?;
    SoficGraph::new(group, group.induced_labeled_graph(&f), r)
}

/// ψ(a): column x holds a_γ at row xγ for x ∈ V^r, and is zero otherwise.
pub fn psi_map(a: &GroupRingElement, graph: &SoficGraph) -> Result<SparseMatrix> {
    if a.group() != graph.group() {
        return Err(Error::OwnerMismatch);
    }
    let r = a.support_radius();
    let words = graph.group.geodesic_words(r);
    let good = graph.good_mask(r);
    let n = graph.vertex_count();
    let mut b = SparseMatrixBuilder::new(n, n, a.field());
    for x in (0..n).filter(|&x| good[x]) {
        for (gamma, c) in a.terms() {
            let y = graph.graph.follow(x, &words[gamma]).expect("good vertices carry a full r-ball");
            b.add(y, x, c)?;
        }
    }
    Ok(b.build())
}

/// rank(ψ(b)ψ(a) − ψ(ab))/|V| against |V \ V^{r+s}|/|V|.
pub fn psi_hom_defect(a: &GroupRingElement, b: &GroupRingElement, graph: &SoficGraph) -> Result<Defect> {
    let diff = psi_map(b, graph)?.mul(&psi_map(a, graph)?)?.sub(&psi_map(&a.mul(b)?, graph)?)?;
    let n = graph.vertex_count();
    let bad = graph.good_mask(a.support_radius() + b.support_radius()).iter().filter(|&&g| !g).count();
    Ok(Defect {
        defect: BigRational::new(diff.rank().into(), n.into()),
        bound: BigRational::new(bad.into(), n.into()),
        terms: Vec::new(),
    })
}

/// Host vertices covered by the top-level singleton tiles: the part left
/// over by the large shapes.
fn leftovers(system: &BratteliTilingSystem, tiling: &HierarchicalTiling) -> Result<Vec<bool>> {
    if tiling.levels.len() != system.depth() {
        return Err(Error::TilingFailure("tiling depth differs from the system depth".into()));
    }
    let top = system.levels().last().expect("depth >= 1").singleton_index();
    let mut out = vec![false; tiling.vertex_count];
    for t in tiling.levels.last().expect("nonempty").iter().filter(|t| t.vertex == top) {
        out[t.covered[0]] = true;
    }
    Ok(out)
}

/// The level-k tiles that carry blocks: all of them except singletons on
/// leftover vertices.
fn live_tiles<'a>(
    system: &BratteliTilingSystem,
    tiling: &'a HierarchicalTiling,
    k: usize,
) -> Result<impl Iterator<Item = &'a PlacedTile>> {
    let left = leftovers(system, tiling)?;
    let e = system.level(k)?.singleton_index();
    let tiles = tiling.levels.get(k - 1).ok_or(Error::MissingLevel(k))?;
    Ok(tiles.iter().filter(move |t| !(t.vertex == e && left[t.covered[0]])))
}

/// Q(A): vertices covered by live A-tiles at level k.
pub fn tile_counts(system: &BratteliTilingSystem, tiling: &HierarchicalTiling, k: usize) -> Result<Vec<u64>> {
    let mut q = vec![0u64; system.level(k)?.shapes.len()];
    for t in live_tiles(system, tiling, k)? {
        q[t.vertex] += t.covered.len() as u64;
    }
    Ok(q)
}

/// τ(x): x's A-block on every live A-tile of level k = x.level(), zero on
/// the leftover vertices.
pub fn tau_map(
    x: &LevelElement,
    system: &BratteliTilingSystem,
    graph: &SoficGraph,
    tiling: &HierarchicalTiling,
) -> Result<SparseMatrix> {
    x.check_level(system.level(x.level())?)?;
    let n = graph.vertex_count();
    if tiling.vertex_count != n {
        return Err(Error::TilingFailure("tiling belongs to another graph".into()));
    }
    let mut b = SparseMatrixBuilder::new(n, n, x.field());
    for t in live_tiles(system, tiling, x.level())? {
        for (r, c, v) in x.blocks()[t.vertex].entries() {
            b.set(t.covered[r], t.covered[c], v.clone())?;
        }
    }
    Ok(b.build())
}

/// Per graph: rank(τ(x))/|V| against rk_φ(x), with slack the frequency
/// deviation Σ_A |Q(A)/|V| − m(A)|.
pub fn tau_rank_convergence(
    x: &LevelElement,
    system: &BratteliTilingSystem,
    graphs: &[SoficGraph],
) -> Result<DefectSeries> {
    if graphs.is_empty() {
        return Err(Error::InvalidParameter("no graphs given".into()));
    }
    let k = x.level();
    let m = level_weights(system, k)?;
    let target = rk_phi(x, m)?;
    let mut estimates = Vec::new();
    let mut slacks = Vec::new();
    for g in graphs {
        let tiling = system.tile_host(g.graph())?;
        let n = g.vertex_count();
        let rank = tau_map(x, system, g, &tiling)?.rank();
        let value = BigRational::new(rank.into(), n.into());
        let slack: BigRational = tile_counts(system, &tiling, k)?
            .into_iter()
            .zip(m)
            .map(|(q, w)| (BigRational::new(q.into(), n.into()) - w).abs())
            .sum();
        estimates.push(rational_estimate(Method::Sofic, n as u64, &value, slack.clone()));
        slacks.push(slack);
    }
    Ok(DefectSeries::new(estimates, target, None, slacks))
}

/// Agreement of ψ with its tile-restricted variant ψ', which keeps column
/// x only when x ∈ V^r and the r-ball of x stays inside x's tile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityDefect {
    /// z(a)/|V|: columns where ψ' equals ψ.
    pub agree_fraction: BigRational,
    /// rank(ψ − ψ')/|V|.
    pub rank_defect: BigRational,
}

impl IdentityDefect {
    pub fn holds(&self) -> bool {
        self.rank_defect <= BigRational::from_integer(1.into()) - &self.agree_fraction
    }

    pub fn to_json(&self) -> Value {
        json!({
            "agree_fraction": render_rational(&self.agree_fraction),
            "agree_fraction_decimal": decimal(&self.agree_fraction),
            "rank_defect": render_rational(&self.rank_defect),
            "rank_defect_decimal": decimal(&self.rank_defect),
            "holds": self.holds(),
        })
    }
}

/// Vertices of each tile whose r-ball leaves the tile (or the graph).
fn tile_interior(graph: &LabeledGraph, tiles: &[PlacedTile], r: usize) -> Vec<bool> {
    let n = graph.vertex_count();
    let mut owner = vec![usize::MAX; n];
    for (k, t) in tiles.iter().enumerate() {
        for &v in &t.covered {
            owner[v] = k;
        }
    }
    let mut interior = vec![false; n];
    for (k, t) in tiles.iter().enumerate() {
        let mut dist: HashMap<usize, usize> = HashMap::new();
        let mut frontier = Vec::new();
        for &v in &t.covered {
            let exits = (0..graph.degree()).any(|s| graph.step(v, s).is_none_or(|w| owner[w] != k));
            if r > 0 && exits {
                dist.insert(v, 0);
                frontier.push(v);
            }
        }
        for d in 1..r {
            let mut next = Vec::new();
            for &v in &frontier {
                for w in (0..graph.degree()).filter_map(|s| graph.step(v, s)) {
                    if owner[w] == k && !dist.contains_key(&w) {
                        dist.insert(w, d);
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        for &v in &t.covered {
            interior[v] = !dist.contains_key(&v);
        }
    }
    interior
}

/// Compares ψ(a) with ψ'(a) built from the tiles J_α.
pub fn first_identity_defect(a: &GroupRingElement, graph: &SoficGraph, tiles: &[PlacedTile]) -> Result<IdentityDefect> {
    let psi = psi_map(a, graph)?;
    let n = graph.vertex_count();
    if n == 0 {
        return Err(Error::EmptySet);
    }
    let keep = tile_interior(&graph.graph, tiles, a.support_radius());
    let mut occupied = vec![false; n];
    let mut restricted = SparseMatrixBuilder::new(n, n, psi.field());
    for (r, c, v) in psi.entries() {
        occupied[c] = true;
        if keep[c] {
            restricted.set(r, c, v.clone())?;
        }
    }
    let restricted = restricted.build();
    let agree = (0..n).filter(|&x| keep[x] || !occupied[x]).count();
    let diff = psi.sub(&restricted)?;
    let rank_defect = BigRational::new(diff.rank().into(), n.into());
    Ok(IdentityDefect { agree_fraction: BigRational::new(agree.into(), n.into()), rank_defect })
}
