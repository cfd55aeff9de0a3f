//! Bratteli tiling systems: per level a Følner shape F^n plus the singleton
//! E_n, each level-(n+1) shape strictly tiled by level-n shapes with the
//! leftover points counted as E_n singletons.

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

use super::{host_graph, quasitile, validate_bratteli, BratteliDiagram, BratteliReport, BratteliVertex, TileShape};
use crate::error::{Error, Result};
use crate::field::render_rational;
use crate::folner::{folner_set, FiniteSubset};
use crate::groups::{GroupElement, GroupKind, LabeledGraph, MarkedGroup};

/// Candidate shapes rejected by the singleton bound before a level gives up.
pub const MAX_ESCALATIONS: usize = 8;
/// Candidates scanned per level while looking for a small enough i(F).
const MAX_SCAN: usize = 4096;

/// The canonical Følner sets j ↦ F_j.
pub fn default_driver(group: &MarkedGroup) -> impl Fn(usize) -> Result<Option<FiniteSubset>> + '_ {
    move |j| folner_set(group, j).map(Some)
}

/// Intervals [0, step·j) of the first free coordinate, times the finite
/// factor if there is one.
pub fn interval_driver(group: &MarkedGroup, step: usize) -> Result<impl Fn(usize) -> Result<Option<FiniteSubset>> + '_> {
    let finite = match group.kind() {
        GroupKind::FreeAbelian(1) => Vec::new(),
        GroupKind::FreeAbelianTimesFinite { rank: 1, orders } => orders.clone(),
        _ => return Err(Error::InvalidParameter("interval shapes need a group of the form Z or Z x finite".into())),
    };
    if step == 0 {
        return Err(Error::InvalidParameter("interval step must be positive".into()));
    }
    Ok(move |j: usize| {
        let mut ranges = vec![(step * j) as u64];
        ranges.extend(&finite);
        Ok(Some(FiniteSubset::new(group, crate::groups::box_coordinates(&ranges).map(GroupElement))))
    })
}

/// One level of a tiling system. The last shape is the singleton E_n.
#[derive(Clone, Debug)]
pub struct SystemLevel {
    pub shapes: Vec<TileShape>,
    /// Driver indices the non-singleton shapes came from.
    pub candidates: Vec<usize>,
    pub isoperimetric: Vec<BigRational>,
    /// For levels above the first: each shape as a disjoint union of
    /// translates δ·A of level-below vertices A, as (vertex index, δ).
    pub decompositions: Vec<Vec<(usize, GroupElement)>>,
    /// Candidates rejected by the singleton bound at this level.
    pub escalations: usize,
}

impl SystemLevel {
    pub fn singleton_index(&self) -> usize {
        self.shapes.len() - 1
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.shapes.iter().map(|s| s.size() as u64).collect()
    }
}

#[derive(Clone, Debug)]
pub struct BratteliTilingSystem {
    group: MarkedGroup,
    levels: Vec<SystemLevel>,
    diagram: BratteliDiagram,
}

fn threshold(n: usize) -> BigRational {
    BigRational::new(1.into(), num_bigint::BigInt::from(2u32).pow(n as u32))
}

fn labels(n: usize, count: usize) -> Vec<String> {
    let mut out: Vec<String> = if count == 1 {
        vec![format!("F{n}")]
    } else {
        (0..count).map(|j| format!("F{n}_{j}")).collect()
    };
    out.push(format!("E{n}"));
    out
}

/// Builds a depth-N system from the candidates `driver(1), driver(2), …`.
/// Level n takes the first candidate (after the previous level's) with
/// i(F) ≤ 2^-n whose strict tiling by level n-1 shapes leaves at most
/// 2^-(n-1)·|F| singletons; up to [`MAX_ESCALATIONS`] candidates may fail
/// the singleton bound.
pub fn build_bratteli_tiling_system(
    group: &MarkedGroup,
    depth: usize,
    driver: &dyn Fn(usize) -> Result<Option<FiniteSubset>>,
) -> Result<BratteliTilingSystem> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    let mut levels: Vec<SystemLevel> = Vec::new();
    let mut cursor = 1;
    for n in 1..=depth {
        let bound = threshold(n);
        let mut escalations = 0;
        let mut chosen = None;
        for j in cursor..cursor + MAX_SCAN {
            let Some(cand) = driver(j)? else { break };
            if cand.group() != group {
                return Err(Error::OwnerMismatch);
            }
            if cand.is_empty() {
                continue;
            }
            let i = cand.isoperimetric()?;
            if i > bound {
                continue;
            }
            let shape = match TileShape::new(0, cand) {
                Ok(s) => s,
                Err(e) => {
                    log::debug!("level {n}: candidate {j} rejected: {e}");
                    continue;
                }
            };
            let decomposition = match levels.last() {
                None => Vec::new(),
                Some(below) => {
                    let d = decompose(&shape, below);
                    let singles = d.iter().filter(|(a, _)| *a == below.singleton_index()).count();
                    let allowed = threshold(n - 1) * BigRational::from_integer(shape.size().into());
                    if BigRational::from_integer(singles.into()) > allowed {
                        escalations += 1;
                        log::info!(
                            "level {n}: candidate {j} leaves {singles} singletons, over {}; escalating",
                            render_rational(&allowed)
                        );
                        if escalations > MAX_ESCALATIONS {
                            return Err(Error::Exhausted {
                                level: n,
                                bound: format!("K(E{}, F{n}) <= 2^-{}·|F{n}|", n - 1, n - 1),
                            });
                        }
                        continue;
                    }
                    d
                }
            };
            chosen = Some((j, shape, i, decomposition));
            break;
        }
        let Some((j, shape, i, decomposition)) = chosen else {
            return Err(Error::Exhausted { level: n, bound: format!("i(F{n}) <= 1/{}", 1u64 << n) });
        };
        cursor = j + 1;
        let singleton = TileShape::singleton(1, group);
        let mut decompositions = Vec::new();
        if let Some(below) = levels.last() {
            decompositions.push(decomposition);
            decompositions.push(vec![(below.singleton_index(), group.identity())]);
        }
        levels.push(SystemLevel {
            shapes: vec![shape, singleton],
            candidates: vec![j],
            isoperimetric: vec![i],
            decompositions,
            escalations,
        });
    }
    let diagram = diagram_of(&levels)?;
    Ok(BratteliTilingSystem { group: group.clone(), levels, diagram })
}

/// Strict greedy tiling of `shape` by the non-singleton shapes of `below`,
/// leftover points becoming singletons.
fn decompose(shape: &TileShape, below: &SystemLevel) -> Vec<(usize, GroupElement)> {
    let host = host_graph(shape.shape());
    let tiles: Vec<TileShape> = below.shapes[..below.singleton_index()]
        .iter()
        .enumerate()
        .map(|(k, s)| TileShape { id: k, ..s.clone() })
        .collect();
    let tiling = quasitile(&host, &tiles, &BigRational::zero());
    let mut out: Vec<(usize, GroupElement)> =
        tiling.placements.iter().map(|p| (p.shape_id, host.element(p.anchor).clone())).collect();
    out.extend(tiling.uncovered.iter().map(|&v| (below.singleton_index(), host.element(v).clone())));
    out
}

fn diagram_of(levels: &[SystemLevel]) -> Result<BratteliDiagram> {
    let verts = levels
        .iter()
        .enumerate()
        .map(|(n, l)| {
            labels(n + 1, l.singleton_index())
                .into_iter()
                .zip(l.sizes())
                .map(|(label, size)| BratteliVertex { label, size })
                .collect()
        })
        .collect();
    let mut mults = Vec::new();
    for w in levels.windows(2) {
        let mut k = vec![vec![0u64; w[1].shapes.len()]; w[0].shapes.len()];
        for (b, dec) in w[1].decompositions.iter().enumerate() {
            for (a, _) in dec {
                k[*a][b] += 1;
            }
        }
        mults.push(k);
    }
    BratteliDiagram::new(verts, mults, None)
}

/// Invariant checks of a built system.
#[derive(Clone, Debug)]
pub struct SystemReport {
    /// Per level: max i(F^n_j) and whether it is ≤ 2^-n.
    pub isoperimetric: Vec<(BigRational, bool)>,
    /// Per level above the first: max K(E_{n-1}, F^n_j)/|F^n_j| and whether
    /// it is ≤ 2^-(n-1).
    pub singleton_ratio: Vec<(BigRational, bool)>,
    /// Every decomposition is a partition of its shape.
    pub partitions: bool,
    pub bratteli: BratteliReport,
    /// m(E_n) is nonincreasing in n, when weights are attached.
    pub singleton_weights_decrease: Option<bool>,
}

impl SystemReport {
    pub fn holds(&self) -> bool {
        self.isoperimetric.iter().all(|x| x.1)
            && self.singleton_ratio.iter().all(|x| x.1)
            && self.partitions
            && self.bratteli.valid()
            && self.singleton_weights_decrease != Some(false)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "isoperimetric": self.isoperimetric.iter().map(|(v, ok)| json!({"max": render_rational(v), "holds": ok})).collect::<Vec<_>>(),
            "singleton_ratio": self.singleton_ratio.iter().map(|(v, ok)| json!({"max": render_rational(v), "holds": ok})).collect::<Vec<_>>(),
            "partitions": self.partitions,
            "bratteli": self.bratteli.to_json(),
            "singleton_weights_decrease": self.singleton_weights_decrease,
            "holds": self.holds(),
        })
    }
}

impl BratteliTilingSystem {
    pub fn group(&self) -> &MarkedGroup {
        &self.group
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Level n, counted from 1.
    pub fn level(&self, n: usize) -> Result<&SystemLevel> {
        n.checked_sub(1).and_then(|i| self.levels.get(i)).ok_or(Error::MissingLevel(n))
    }

    pub fn levels(&self) -> &[SystemLevel] {
        &self.levels
    }

    pub fn diagram(&self) -> &BratteliDiagram {
        &self.diagram
    }

    /// K(α, β) for α at level n and β at level n + 1.
    pub fn multiplicity(&self, n: usize, alpha: usize, beta: usize) -> Result<u64> {
        let k = self.diagram.multiplicities.get(n.wrapping_sub(1)).ok_or(Error::MissingLevel(n + 1))?;
        Ok(k[alpha][beta])
    }

    /// Attaches level weights (one vector per level) to the diagram.
    pub fn with_weights(mut self, weights: Vec<Vec<BigRational>>) -> Result<Self> {
        self.diagram = BratteliDiagram::new(self.diagram.levels, self.diagram.multiplicities, Some(weights))?;
        Ok(self)
    }

    pub fn weights(&self) -> Option<&Vec<Vec<BigRational>>> {
        self.diagram.weights.as_ref()
    }

    pub fn verify(&self) -> SystemReport {
        let g = &self.group;
        let mut iso = Vec::new();
        let mut single = Vec::new();
        let mut partitions = true;
        for (idx, level) in self.levels.iter().enumerate() {
            let n = idx + 1;
            let worst = level.isoperimetric.iter().max().cloned().unwrap_or_else(BigRational::zero);
            iso.push((worst.clone(), worst <= threshold(n)));
            if idx == 0 {
                continue;
            }
            let below = &self.levels[idx - 1];
            let mut worst = BigRational::zero();
            for (j, dec) in level.decompositions.iter().enumerate().take(level.singleton_index()) {
                let singles = dec.iter().filter(|(a, _)| *a == below.singleton_index()).count();
                let r = BigRational::new(singles.into(), level.shapes[j].size().into());
                if r > worst {
                    worst = r;
                }
            }
            single.push((worst.clone(), worst <= threshold(n - 1)));
            for (j, dec) in level.decompositions.iter().enumerate() {
                let target = level.shapes[j].shape();
                let mut pieces = Vec::new();
                for (a, delta) in dec {
                    pieces.extend(below.shapes[*a].shape().iter().map(|h| g.mul(delta, h)));
                }
                let count = pieces.len();
                let covered = FiniteSubset::new(g, pieces);
                partitions &= covered.len() == count && covered.elements() == target.elements();
            }
        }
        let singleton_weights_decrease = self.weights().map(|w| {
            let e: Vec<&BigRational> =
                w.iter().zip(&self.levels).map(|(l, lev)| &l[lev.singleton_index()]).collect();
            e.windows(2).all(|p| p[1] <= p[0])
        });
        SystemReport {
            isoperimetric: iso,
            singleton_ratio: single,
            partitions,
            bratteli: validate_bratteli(&self.diagram, &BigRational::zero()),
            singleton_weights_decrease,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "group": self.group.to_string(),
            "levels": self.levels.iter().enumerate().map(|(i, l)| json!({
                "level": i + 1,
                "sizes": l.sizes(),
                "candidates": l.candidates,
                "isoperimetric": l.isoperimetric.iter().map(render_rational).collect::<Vec<_>>(),
                "escalations": l.escalations,
            })).collect::<Vec<_>>(),
            "diagram": self.diagram.to_json(),
        })
    }

    /// Tiles a host by top-level shapes (strictly, leftover as singletons)
    /// and refines every tile through the stored decompositions, giving a
    /// partition of the host at every level.
    pub fn tile_host(&self, host: &LabeledGraph) -> Result<HierarchicalTiling> {
        let top = self.levels.last().expect("depth >= 1");
        let shapes: Vec<TileShape> = top.shapes[..top.singleton_index()]
            .iter()
            .enumerate()
            .map(|(k, s)| TileShape { id: k, ..s.clone() })
            .collect();
        let tiling = quasitile(host, &shapes, &BigRational::zero());
        let mut current: Vec<PlacedTile> = tiling
            .placements
            .into_iter()
            .map(|p| PlacedTile { vertex: p.shape_id, anchor: p.anchor, covered: p.covered })
            .collect();
        current.extend(tiling.uncovered.iter().map(|&v| PlacedTile {
            vertex: top.singleton_index(),
            anchor: v,
            covered: vec![v],
        }));
        let mut levels = vec![current];
        for idx in (1..self.levels.len()).rev() {
            let upper = &self.levels[idx];
            let lower = &self.levels[idx - 1];
            let mut next = Vec::new();
            for tile in levels.last().expect("nonempty") {
                let shape = upper.shapes[tile.vertex].shape();
                for (a, delta) in &upper.decompositions[tile.vertex] {
                    let pos = shape.index_of(delta).expect("decomposition anchors lie in the shape");
                    let anchor = tile.covered[pos];
                    let covered = lower.shapes[*a].place(host, anchor).ok_or_else(|| {
                        Error::TilingFailure(format!("level {idx}: sub-tile does not fit at vertex {anchor}"))
                    })?;
                    next.push(PlacedTile { vertex: *a, anchor, covered });
                }
            }
            levels.push(next);
        }
        levels.reverse();
        Ok(HierarchicalTiling { vertex_count: host.vertex_count(), levels })
    }
}

/// A tile of a hierarchical tiling: diagram vertex, anchor and covered
/// host vertices (in shape element order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlacedTile {
    pub vertex: usize,
    pub anchor: usize,
    pub covered: Vec<usize>,
}

/// Partitions of one host, one per level (index 0 is level 1).
#[derive(Clone, Debug)]
pub struct HierarchicalTiling {
    pub vertex_count: usize,
    pub levels: Vec<Vec<PlacedTile>>,
}

impl HierarchicalTiling {
    /// c_n(A): host vertices covered by A-tiles at level n (from 1).
    pub fn coverage(&self, n: usize, vertices: usize) -> Vec<u64> {
        let mut c = vec![0u64; vertices];
        for t in &self.levels[n - 1] {
            c[t.vertex] += t.covered.len() as u64;
        }
        c
    }
}

/// Empirical frequencies m_k(A) = c_k(A)/|H_k|.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarmonicWeights {
    /// For each H_k, for each level, one weight per vertex.
    pub per_host: Vec<Vec<Vec<BigRational>>>,
    pub host_sizes: Vec<usize>,
}

impl HarmonicWeights {
    /// Weights for the largest host.
    pub fn last(&self) -> &Vec<Vec<BigRational>> {
        self.per_host.last().expect("at least one host")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "host_sizes": self.host_sizes,
            "weights": self.per_host.iter().map(|h| h.iter().map(|l| l.iter().map(render_rational).collect::<Vec<_>>()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// Tiles each H_k through the system and records the level frequencies.
pub fn empirical_harmonic(system: &BratteliTilingSystem, hosts: &[FiniteSubset]) -> Result<HarmonicWeights> {
    if hosts.is_empty() {
        return Err(Error::InvalidParameter("no host sets given".into()));
    }
    let mut per_host = Vec::new();
    let mut host_sizes = Vec::new();
    for (k, h) in hosts.iter().enumerate() {
        if h.is_empty() {
            return Err(Error::TilingFailure(format!("host {k} is empty")));
        }
        let tiling = system
            .tile_host(&host_graph(h))
            .map_err(|e| Error::TilingFailure(format!("host {k}: {e}")))?;
        let size = BigRational::from_integer(h.len().into());
        let weights = system
            .levels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                tiling
                    .coverage(i + 1, l.shapes.len())
                    .into_iter()
                    .map(|c| BigRational::from_integer(c.into()) / &size)
                    .collect()
            })
            .collect();
        per_host.push(weights);
        host_sizes.push(h.len());
    }
    Ok(HarmonicWeights { per_host, host_sizes })
}
