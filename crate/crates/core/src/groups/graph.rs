use std::collections::VecDeque;

use super::{GroupElement, MarkedGroup};
use crate::folner::FiniteSubset;

/// A finite graph whose directed edges carry letters of a symmetric
/// generating set, with at most one outgoing edge per letter per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    out: Vec<Vec<Option<usize>>>,
    inverse_label: Vec<usize>,
    elements: Vec<GroupElement>,
}

impl LabeledGraph {
    /// Builds a graph from an explicit partial action `step(v, s)`.
    pub fn from_action(
        elements: Vec<GroupElement>,
        inverse_label: Vec<usize>,
        mut step: impl FnMut(usize, usize) -> Option<usize>,
    ) -> Self {
        let degree = inverse_label.len();
        let out = (0..elements.len())
            .map(|v| (0..degree).map(|s| step(v, s)).collect())
            .collect();
        LabeledGraph { out, inverse_label, elements }
    }

    pub(super) fn induced(group: &MarkedGroup, set: &FiniteSubset) -> Self {
        let inverse = (0..group.degree()).map(|s| group.inverse_letter(s)).collect();
        LabeledGraph::from_action(set.elements().to_vec(), inverse, |v, s| {
            set.index_of(&group.mul(&set.elements()[v], group.letter_element(s)))
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn degree(&self) -> usize {
        self.inverse_label.len()
    }

    pub fn inverse_label(&self, s: usize) -> usize {
        self.inverse_label[s]
    }

    /// The endpoint of the s-edge leaving `v`, if any.
    pub fn step(&self, v: usize, s: usize) -> Option<usize> {
        self.out[v][s]
    }

    /// Follows a word of labels from `v`.
    pub fn follow(&self, v: usize, word: &[usize]) -> Option<usize> {
        word.iter().try_fold(v, |x, &s| self.step(x, s))
    }

    /// The group element naming each vertex.
    pub fn element(&self, v: usize) -> &GroupElement {
        &self.elements[v]
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    /// All directed edges `(from, to, label)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(v, row)| row.iter().enumerate().filter_map(move |(s, t)| t.map(|t| (v, t, s))))
    }

    /// Edge (x,y,s) present iff (y,x,s⁻¹) present.
    pub fn is_label_symmetric(&self) -> bool {
        self.edges().all(|(x, y, s)| self.step(y, self.inverse_label[s]) == Some(x))
    }

    /// Graph distances from `sources`, not exceeding `limit`.
    pub fn distances_from(&self, sources: &[usize], limit: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            if d == limit {
                continue;
            }
            for t in self.out[v].iter().flatten() {
                if dist[*t].is_none() {
                    dist[*t] = Some(d + 1);
                    queue.push_back(*t);
                }
            }
        }
        dist
    }

    /// Vertices missing at least one outgoing edge.
    pub fn incomplete_vertices(&self) -> Vec<usize> {
        (0..self.vertex_count()).filter(|&v| self.out[v].iter().any(Option::is_none)).collect()
    }
}
