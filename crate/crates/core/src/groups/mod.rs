//! A closed catalog of finitely generated amenable groups with canonical
//! normal forms, and their residually finite quotients.

mod descriptor;
mod graph;

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::folner::FiniteSubset;

pub use graph::LabeledGraph;

/// The arithmetic behind a [`MarkedGroup`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupKind {
    FreeAbelian(usize),
    FreeAbelianTimesFinite { rank: usize, orders: Vec<u64> },
    Heisenberg3,
    FiniteAbelian(Vec<u64>),
    /// The integral Heisenberg group with every coordinate reduced mod `m`.
    HeisenbergMod(u64),
}

impl GroupKind {
    pub fn is_finite(&self) -> bool {
        matches!(self, GroupKind::FiniteAbelian(_) | GroupKind::HeisenbergMod(_))
    }

    fn arity(&self) -> usize {
        match self {
            GroupKind::FreeAbelian(d) => *d,
            GroupKind::FreeAbelianTimesFinite { rank, orders } => rank + orders.len(),
            GroupKind::FiniteAbelian(orders) => orders.len(),
            GroupKind::Heisenberg3 | GroupKind::HeisenbergMod(_) => 3,
        }
    }

    /// Per-coordinate modulus, `None` for free (unbounded) coordinates.
    fn moduli(&self) -> Vec<Option<u64>> {
        match self {
            GroupKind::FreeAbelian(d) => vec![None; *d],
            GroupKind::FreeAbelianTimesFinite { rank, orders } => {
                let mut m = vec![None; *rank];
                m.extend(orders.iter().map(|&o| Some(o)));
                m
            }
            GroupKind::FiniteAbelian(orders) => orders.iter().map(|&o| Some(o)).collect(),
            GroupKind::Heisenberg3 => vec![None; 3],
            GroupKind::HeisenbergMod(m) => vec![Some(*m); 3],
        }
    }

    fn is_heisenberg(&self) -> bool {
        matches!(self, GroupKind::Heisenberg3 | GroupKind::HeisenbergMod(_))
    }
}

/// Canonical coordinates of a group element. Equality of tuples is equality
/// of elements; the derived order is the "sorted normal form" order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(pub SmallVec<[i64; 4]>);

impl GroupElement {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

/// One entry of the symmetric generating set S: a named generator or its
/// formal inverse.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

#[derive(Debug, PartialEq, Eq, Hash)]
struct GroupData {
    kind: GroupKind,
    descriptor: String,
    generator_names: Vec<String>,
    generators: Vec<GroupElement>,
    letters: Vec<Letter>,
    letter_elements: Vec<GroupElement>,
    inverse_letter: Vec<usize>,
}

/// A catalog group together with its ordered symmetric generating set.
/// Cloning is cheap; clones compare equal.
#[derive(Clone, Debug)]
pub struct MarkedGroup(Arc<GroupData>);

impl PartialEq for MarkedGroup {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for MarkedGroup {}

impl fmt::Display for MarkedGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.descriptor)
    }
}

impl MarkedGroup {
    /// Builds a catalog group. Generator names: `g0, g1, ...` for the free
    /// abelian part, `t` (or `t0, t1, ...`) for finite cyclic factors and
    /// `x, y, z` for the Heisenberg group.
    pub fn new(kind: GroupKind) -> Result<Self> {
        let names = default_names(&kind);
        Self::with_names(kind, names, None)
    }

    /// Parses a descriptor such as `Z^2`, `Z^1 x C2`, `H3` or `Z^2 % (5,5)`.
    pub fn parse(descriptor: &str) -> Result<Self> {
        descriptor::parse(descriptor)
    }

    fn with_names(kind: GroupKind, names: Vec<String>, descriptor: Option<String>) -> Result<Self> {
        validate(&kind)?;
        let arity = kind.arity();
        let generators: Vec<GroupElement> = (0..names.len())
            .map(|i| {
                let mut c = SmallVec::from_elem(0, arity);
                c[i] = 1;
                GroupElement(c)
            })
            .collect();
        let descriptor = descriptor.unwrap_or_else(|| describe(&kind));
        let mut data = GroupData {
            kind,
            descriptor,
            generator_names: names,
            generators,
            letters: Vec::new(),
            letter_elements: Vec::new(),
            inverse_letter: Vec::new(),
        };
        for (i, g) in data.generators.clone().iter().enumerate() {
            let inv = invert(&data.kind, g);
            data.letters.push(Letter { generator: i, inverse: false });
            data.letter_elements.push(g.clone());
            if inv != *g {
                data.letters.push(Letter { generator: i, inverse: true });
                data.letter_elements.push(inv);
            }
        }
        data.inverse_letter = data
            .letter_elements
            .iter()
            .map(|e| {
                let inv = invert(&data.kind, e);
                data.letter_elements.iter().position(|x| *x == inv).expect("S is symmetric")
            })
            .collect();
        Ok(MarkedGroup(Arc::new(data)))
    }

    pub fn kind(&self) -> &GroupKind {
        &self.0.kind
    }

    pub fn is_finite(&self) -> bool {
        self.0.kind.is_finite()
    }

    /// |S|, the out-degree of every Cayley-graph vertex.
    pub fn degree(&self) -> usize {
        self.0.letters.len()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0.letters
    }

    pub fn letter_element(&self, s: usize) -> &GroupElement {
        &self.0.letter_elements[s]
    }

    pub fn inverse_letter(&self, s: usize) -> usize {
        self.0.inverse_letter[s]
    }

    pub fn generator_names(&self) -> &[String] {
        &self.0.generator_names
    }

    pub fn generator(&self, i: usize) -> &GroupElement {
        &self.0.generators[i]
    }

    pub fn letter_name(&self, s: usize) -> String {
        let l = &self.0.letters[s];
        let name = &self.0.generator_names[l.generator];
        if l.inverse {
            format!("{name}^-1")
        } else {
            name.clone()
        }
    }

    /// Index of a named generator.
    pub fn generator_index(&self, name: &str) -> Result<usize> {
        self.0
            .generator_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    /// Resolves `g0` or `g0^-1` to a letter of S.
    pub fn letter_by_name(&self, symbol: &str) -> Result<usize> {
        let (name, inverse) = match symbol.strip_suffix("^-1") {
            Some(base) => (base, true),
            None => (symbol, false),
        };
        let g = self.generator_index(name)?;
        let target = if inverse {
            self.inverse(&self.0.generators[g])
        } else {
            self.0.generators[g].clone()
        };
        self.0
            .letter_elements
            .iter()
            .position(|e| *e == target)
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(SmallVec::from_elem(0, self.0.kind.arity()))
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let kind = &self.0.kind;
        let mut c: SmallVec<[i64; 4]> = a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect();
        if kind.is_heisenberg() {
            // x^a y^b z^c · x^a' y^b' z^c' = x^(a+a') y^(b+b') z^(c+c'-a'b)
            c[2] -= b.0[0] * a.0[1];
        }
        reduce(kind, &mut c);
        GroupElement(c)
    }

    pub fn inverse(&self, a: &GroupElement) -> GroupElement {
        invert(&self.0.kind, a)
    }

    pub fn pow(&self, a: &GroupElement, e: i64) -> GroupElement {
        let base = if e < 0 { self.inverse(a) } else { a.clone() };
        let mut acc = self.identity();
        let mut sq = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &sq);
            }
            sq = self.mul(&sq, &sq);
            k >>= 1;
        }
        acc
    }

    /// Builds an element from raw coordinates, reducing finite coordinates.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.0.kind.arity() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coordinates, got {}",
                self.0.kind.arity(),
                coords.len()
            )));
        }
        let mut c: SmallVec<[i64; 4]> = coords.iter().copied().collect();
        reduce(&self.0.kind, &mut c);
        Ok(GroupElement(c))
    }

    /// Product of letters in left-to-right order.
    pub fn word_eval(&self, word: &[usize]) -> Result<GroupElement> {
        let mut acc = self.identity();
        for &s in word {
            let e = self
                .0
                .letter_elements
                .get(s)
                .ok_or_else(|| Error::UnknownSymbol(format!("letter #{s}")))?;
            acc = self.mul(&acc, e);
        }
        Ok(acc)
    }

    /// Like [`word_eval`](Self::word_eval) with symbols given by name.
    pub fn word_eval_named(&self, word: &[&str]) -> Result<GroupElement> {
        let letters = word.iter().map(|s| self.letter_by_name(s)).collect::<Result<Vec<_>>>()?;
        self.word_eval(&letters)
    }

    /// Word-metric length with respect to S.
    pub fn word_length(&self, g: &GroupElement) -> usize {
        match &self.0.kind {
            GroupKind::Heisenberg3 | GroupKind::HeisenbergMod(_) => self.bfs_distance(g),
            kind => kind
                .moduli()
                .iter()
                .zip(&g.0)
                .map(|(m, &c)| match m {
                    None => c.unsigned_abs() as usize,
                    Some(2) => c as usize,
                    Some(m) => (c as u64).min(m - c as u64) as usize,
                })
                .sum(),
        }
    }

    fn bfs_distance(&self, target: &GroupElement) -> usize {
        let id = self.identity();
        if *target == id {
            return 0;
        }
        let mut dist: HashMap<GroupElement, usize> = HashMap::from([(id.clone(), 0)]);
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            let d = dist[&x];
            for s in &self.0.letter_elements {
                let y = self.mul(&x, s);
                if dist.contains_key(&y) {
                    continue;
                }
                if y == *target {
                    return d + 1;
                }
                dist.insert(y.clone(), d + 1);
                queue.push_back(y);
            }
        }
        unreachable!("S generates the group")
    }

    /// Elements at word distance at most `r` from the identity, by labeled BFS.
    pub fn ball(&self, r: usize) -> FiniteSubset {
        FiniteSubset::new(self, self.ball_with_distances(r).into_keys())
    }

    /// The r-ball keyed by distance from the identity.
    pub fn ball_with_distances(&self, r: usize) -> HashMap<GroupElement, usize> {
        let id = self.identity();
        let mut dist = HashMap::from([(id.clone(), 0usize)]);
        let mut frontier = vec![id];
        for d in 1..=r {
            let mut next = Vec::new();
            for x in &frontier {
                for s in &self.0.letter_elements {
                    let y = self.mul(x, s);
                    if !dist.contains_key(&y) {
                        dist.insert(y.clone(), d);
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        dist
    }

    /// A geodesic word (as letters) for every element of the r-ball.
    pub fn geodesic_words(&self, r: usize) -> HashMap<GroupElement, Vec<usize>> {
        let id = self.identity();
        let mut words = HashMap::from([(id.clone(), Vec::new())]);
        let mut frontier = vec![id];
        for _ in 1..=r {
            let mut next = Vec::new();
            for x in &frontier {
                for (s, e) in self.0.letter_elements.iter().enumerate() {
                    let y = self.mul(x, e);
                    if !words.contains_key(&y) {
                        let mut w = words[x].clone();
                        w.push(s);
                        words.insert(y.clone(), w);
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        words
    }

    /// The group order, when finite.
    pub fn order(&self) -> Option<u64> {
        match &self.0.kind {
            GroupKind::FiniteAbelian(orders) => Some(orders.iter().product()),
            GroupKind::HeisenbergMod(m) => Some(m * m * m),
            _ => None,
        }
    }

    /// All elements of a finite group, sorted by normal form.
    pub fn elements(&self) -> Result<FiniteSubset> {
        let moduli = self.0.kind.moduli();
        if moduli.iter().any(Option::is_none) {
            return Err(Error::InvalidParameter(format!("{self} is infinite")));
        }
        let ranges: Vec<u64> = moduli.into_iter().flatten().collect();
        Ok(FiniteSubset::new(self, box_coordinates(&ranges).map(GroupElement)))
    }

    /// Diameter of the Cayley graph of a finite group.
    pub fn diameter(&self) -> Result<usize> {
        let order = self.order().ok_or_else(|| Error::InvalidParameter(format!("{self} is infinite")))?;
        let mut r = 0;
        loop {
            let ball = self.ball_with_distances(r);
            if ball.len() as u64 == order {
                return Ok(r);
            }
            r += 1;
        }
    }

    /// The quotient by the kernel of coordinatewise reduction modulo
    /// `moduli`, with its projection. A single modulus is broadcast to
    /// every reducible coordinate.
    pub fn quotient(&self, moduli: &[u64]) -> Result<(MarkedGroup, Projection)> {
        if moduli.is_empty() {
            return Err(Error::InvalidParameter("empty modulus vector".into()));
        }
        if let Some(m) = moduli.iter().find(|&&m| m < 2) {
            return Err(Error::InvalidParameter(format!("modulus {m} < 2")));
        }
        let broadcast = |n: usize| -> Result<Vec<u64>> {
            match moduli.len() {
                1 => Ok(vec![moduli[0]; n]),
                k if k == n => Ok(moduli.to_vec()),
                k => Err(Error::InvalidParameter(format!("expected 1 or {n} moduli, got {k}"))),
            }
        };
        let divides = |m: u64, o: u64| -> Result<()> {
            if !o.is_multiple_of(m) {
                return Err(Error::InvalidParameter(format!("modulus {m} does not divide order {o}")));
            }
            Ok(())
        };
        let (kind, reduction) = match &self.0.kind {
            GroupKind::FreeAbelian(d) => {
                let m = broadcast(*d)?;
                (GroupKind::FiniteAbelian(m.clone()), m)
            }
            GroupKind::FreeAbelianTimesFinite { rank, orders } => {
                let mut m = if moduli.len() == rank + orders.len() && moduli.len() != 1 {
                    moduli.to_vec()
                } else {
                    let mut m = broadcast(*rank)?;
                    m.extend(orders);
                    m
                };
                for (mi, o) in m[*rank..].iter().zip(orders) {
                    divides(*mi, *o)?;
                }
                m.truncate(rank + orders.len());
                (GroupKind::FiniteAbelian(m.clone()), m)
            }
            GroupKind::FiniteAbelian(orders) => {
                let m = broadcast(orders.len())?;
                for (mi, o) in m.iter().zip(orders) {
                    divides(*mi, *o)?;
                }
                (GroupKind::FiniteAbelian(m.clone()), m)
            }
            GroupKind::Heisenberg3 => {
                let m = single(moduli)?;
                (GroupKind::HeisenbergMod(m), vec![m; 3])
            }
            GroupKind::HeisenbergMod(m0) => {
                let m = single(moduli)?;
                divides(m, *m0)?;
                (GroupKind::HeisenbergMod(m), vec![m; 3])
            }
        };
        let descriptor = format!(
            "{} % ({})",
            self.0.descriptor,
            moduli.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
        );
        let target = MarkedGroup::with_names(kind, self.0.generator_names.clone(), Some(descriptor))?;
        Ok((target.clone(), Projection { target, moduli: reduction }))
    }

    /// Uniformly random word of the given length over S.
    pub fn random_word<R: rand::Rng>(&self, rng: &mut R, len: usize) -> Vec<usize> {
        (0..len).map(|_| rng.gen_range(0..self.degree())).collect()
    }

    /// The Cayley graph of a finite group, vertices in sorted normal form.
    pub fn cayley_graph(&self) -> Result<LabeledGraph> {
        Ok(LabeledGraph::induced(self, &self.elements()?))
    }

    /// The labeled graph on the set F with an s-edge a→b iff a·s = b.
    pub fn induced_labeled_graph(&self, set: &FiniteSubset) -> LabeledGraph {
        LabeledGraph::induced(self, set)
    }
}

fn single(moduli: &[u64]) -> Result<u64> {
    match moduli {
        [m] => Ok(*m),
        [m, rest @ ..] if rest.iter().all(|x| x == m) => Ok(*m),
        _ => Err(Error::InvalidParameter("Heisenberg quotients take a single modulus".into())),
    }
}

/// The quotient map Γ → Γ/N of a catalog quotient.
#[derive(Clone, Debug)]
pub struct Projection {
    target: MarkedGroup,
    moduli: Vec<u64>,
}

impl Projection {
    pub fn target(&self) -> &MarkedGroup {
        &self.target
    }

    pub fn apply(&self, g: &GroupElement) -> GroupElement {
        GroupElement(
            g.0.iter()
                .zip(&self.moduli)
                .map(|(&c, &m)| c.rem_euclid(m as i64))
                .collect(),
        )
    }
}

fn validate(kind: &GroupKind) -> Result<()> {
    let bad_order = |orders: &[u64]| orders.iter().any(|&o| o < 2);
    match kind {
        GroupKind::FreeAbelian(0) => Err(Error::InvalidParameter("rank must be at least 1".into())),
        GroupKind::FreeAbelianTimesFinite { rank: 0, .. } => {
            Err(Error::InvalidParameter("rank must be at least 1".into()))
        }
        GroupKind::FreeAbelianTimesFinite { orders, .. } | GroupKind::FiniteAbelian(orders)
            if orders.is_empty() || bad_order(orders) =>
        {
            Err(Error::InvalidParameter("finite factor orders must be at least 2".into()))
        }
        GroupKind::HeisenbergMod(m) if *m < 2 => Err(Error::InvalidParameter(format!("modulus {m} < 2"))),
        _ => Ok(()),
    }
}

fn default_names(kind: &GroupKind) -> Vec<String> {
    let free = |d: usize| (0..d).map(|i| format!("g{i}")).collect::<Vec<_>>();
    let finite = |k: usize| {
        if k == 1 {
            vec!["t".to_string()]
        } else {
            (0..k).map(|i| format!("t{i}")).collect()
        }
    };
    match kind {
        GroupKind::FreeAbelian(d) => free(*d),
        GroupKind::FreeAbelianTimesFinite { rank, orders } => {
            let mut n = free(*rank);
            n.extend(finite(orders.len()));
            n
        }
        GroupKind::FiniteAbelian(orders) => finite(orders.len()),
        GroupKind::Heisenberg3 | GroupKind::HeisenbergMod(_) => {
            vec!["x".into(), "y".into(), "z".into()]
        }
    }
}

fn describe(kind: &GroupKind) -> String {
    let cyclic = |o: &[u64]| o.iter().map(|o| format!("C{o}")).collect::<Vec<_>>().join(" x ");
    match kind {
        GroupKind::FreeAbelian(d) => format!("Z^{d}"),
        GroupKind::FreeAbelianTimesFinite { rank, orders } => format!("Z^{rank} x {}", cyclic(orders)),
        GroupKind::FiniteAbelian(orders) => cyclic(orders),
        GroupKind::Heisenberg3 => "H3".into(),
        GroupKind::HeisenbergMod(m) => format!("H3 % {m}"),
    }
}

fn reduce(kind: &GroupKind, c: &mut [i64]) {
    for (x, m) in c.iter_mut().zip(kind.moduli()) {
        if let Some(m) = m {
            *x = x.rem_euclid(m as i64);
        }
    }
}

fn invert(kind: &GroupKind, a: &GroupElement) -> GroupElement {
    let mut c: SmallVec<[i64; 4]> = a.0.iter().map(|x| -x).collect();
    if kind.is_heisenberg() {
        c[2] = -a.0[2] - a.0[0] * a.0[1];
    }
    reduce(kind, &mut c);
    GroupElement(c)
}

/// All integer points of the box `[0, r_0) × ... × [0, r_k)` in lexicographic order.
pub(crate) fn box_coordinates(ranges: &[u64]) -> impl Iterator<Item = SmallVec<[i64; 4]>> + '_ {
    let total: u64 = ranges.iter().product();
    (0..total).map(move |mut idx| {
        let mut c: SmallVec<[i64; 4]> = SmallVec::from_elem(0, ranges.len());
        for (slot, &r) in c.iter_mut().zip(ranges).rev() {
            *slot = (idx % r) as i64;
            idx /= r;
        }
        c
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn catalog() -> Vec<MarkedGroup> {
        ["Z^1", "Z^2", "Z^1 x C2", "H3", "C2 x C3", "H3 % 3", "Z^2 % (5,5)"]
            .iter()
            .map(|d| MarkedGroup::parse(d).unwrap())
            .collect()
    }

    /// H₃(ℤ) as upper unitriangular integer matrices [[1,p,q],[0,1,r],[0,0,1]].
    fn matrix_model(word: &[&str]) -> (i64, i64, i64) {
        let mul = |a: (i64, i64, i64), b: (i64, i64, i64)| (a.0 + b.0, a.1 + b.1 + a.0 * b.2, a.2 + b.2);
        word.iter().fold((0, 0, 0), |acc, s| {
            let m = match *s {
                "x" => (1, 0, 0),
                "x^-1" => (-1, 0, 0),
                "y" => (0, 0, 1),
                "y^-1" => (0, 0, -1),
                "z" => (0, 1, 0),
                "z^-1" => (0, -1, 0),
                _ => unreachable!(),
            };
            mul(acc, m)
        })
    }

    /// Normal form x^a y^b z^c read off the matrix model.
    fn matrix_to_normal_form((p, q, r): (i64, i64, i64)) -> Vec<i64> {
        vec![p, r, q - p * r]
    }

    #[test]
    fn generating_set_sizes() {
        assert_eq!(MarkedGroup::parse("Z^2").unwrap().degree(), 4);
        assert_eq!(MarkedGroup::parse("H3").unwrap().degree(), 6);
        assert_eq!(MarkedGroup::new(GroupKind::FiniteAbelian(vec![2])).unwrap().degree(), 1);
        assert_eq!(MarkedGroup::parse("Z^1 x C2").unwrap().degree(), 3);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(MarkedGroup::new(GroupKind::FreeAbelian(0)).is_err());
        assert!(MarkedGroup::new(GroupKind::FiniteAbelian(vec![1])).is_err());
        assert!(MarkedGroup::new(GroupKind::FiniteAbelian(vec![])).is_err());
    }

    #[test]
    fn generating_set_is_symmetric_without_identity() {
        for g in catalog() {
            let id = g.identity();
            for s in 0..g.degree() {
                assert_ne!(*g.letter_element(s), id);
                let inv = g.inverse_letter(s);
                assert_eq!(g.mul(g.letter_element(s), g.letter_element(inv)), id);
            }
        }
    }

    #[test]
    fn word_eval_examples() {
        let z2 = MarkedGroup::parse("Z^2").unwrap();
        let e = z2.word_eval_named(&["g0", "g1", "g0^-1"]).unwrap();
        assert_eq!(e.coords(), &[0, 1]);
        assert_eq!(z2.word_eval(&[]).unwrap(), z2.identity());
        assert!(matches!(z2.word_eval_named(&["q"]), Err(Error::UnknownSymbol(_))));

        let h = MarkedGroup::parse("H3").unwrap();
        let comm = ["x", "y", "x^-1", "y^-1"];
        let e = h.word_eval_named(&comm).unwrap();
        assert_eq!(e.coords().to_vec(), matrix_to_normal_form(matrix_model(&comm)));
        assert_eq!(e, h.word_eval_named(&["z"]).unwrap());
    }

    #[test]
    fn heisenberg_agrees_with_matrix_model_on_random_words() {
        let h = MarkedGroup::parse("H3").unwrap();
        let names = ["x", "x^-1", "y", "y^-1", "z", "z^-1"];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let len = rand::Rng::gen_range(&mut rng, 0..12);
            let w: Vec<&str> = (0..len).map(|_| names[rand::Rng::gen_range(&mut rng, 0..6)]).collect();
            let e = h.word_eval_named(&w).unwrap();
            assert_eq!(e.coords().to_vec(), matrix_to_normal_form(matrix_model(&w)), "{w:?}");
        }
    }

    #[test]
    fn group_axioms_on_random_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for g in catalog() {
            for _ in 0..50 {
                let [a, b, c] = [0, 1, 2].map(|_| {
                    let w = g.random_word(&mut rng, 6);
                    g.word_eval(&w).unwrap()
                });
                assert_eq!(g.mul(&g.mul(&a, &b), &c), g.mul(&a, &g.mul(&b, &c)));
                assert_eq!(g.mul(&a, &g.inverse(&a)), g.identity());
                assert_eq!(g.inverse(&g.inverse(&a)), a);
                assert_eq!(g.mul(&a, &g.identity()), a);
            }
        }
    }

    #[test]
    fn ball_sizes() {
        let z2 = MarkedGroup::parse("Z^2").unwrap();
        assert_eq!(z2.ball(0).len(), 1);
        for r in 0..6 {
            assert_eq!(z2.ball(r).len(), 2 * r * r + 2 * r + 1);
        }
        assert_eq!(MarkedGroup::parse("Z^1").unwrap().ball(3).len(), 7);
    }

    #[test]
    fn balls_nest_and_grow_for_infinite_kinds() {
        for d in ["Z^1", "Z^2", "Z^1 x C2", "H3"] {
            let g = MarkedGroup::parse(d).unwrap();
            let mut prev = g.ball(0);
            for r in 1..4 {
                let b = g.ball(r);
                assert!(prev.iter().all(|x| b.contains(x)));
                assert!(b.len() > prev.len());
                prev = b;
            }
        }
    }

    #[test]
    fn word_length_matches_bfs_distance() {
        for g in catalog() {
            for (e, d) in g.ball_with_distances(3) {
                assert_eq!(g.word_length(&e), d, "{g} {e:?}");
            }
        }
    }

    #[test]
    fn quotient_orders() {
        let z = MarkedGroup::parse("Z^1").unwrap();
        assert_eq!(z.quotient(&[5]).unwrap().0.order(), Some(5));
        let z2 = MarkedGroup::parse("Z^2").unwrap();
        assert_eq!(z2.quotient(&[3, 3]).unwrap().0.order(), Some(9));
        assert!(z.quotient(&[1]).is_err());
        assert!(z2.quotient(&[3, 3, 3]).is_err());
    }

    #[test]
    fn heisenberg_mod_3_is_closed_of_order_27() {
        let h = MarkedGroup::parse("H3").unwrap();
        let (q, _) = h.quotient(&[3]).unwrap();
        let all = q.elements().unwrap();
        assert_eq!(all.len(), 27);
        for a in all.iter() {
            for b in all.iter() {
                assert!(all.contains(&q.mul(a, b)));
            }
        }
        assert_eq!(q.ball(q.diameter().unwrap()).len(), 27);
    }

    #[test]
    fn quotient_projection_is_a_homomorphism_on_short_words() {
        for (d, m) in [("Z^1", vec![5]), ("Z^2", vec![3, 4]), ("Z^1 x C2", vec![4]), ("H3", vec![3]), ("H3", vec![2])] {
            let g = MarkedGroup::parse(d).unwrap();
            let (q, pi) = g.quotient(&m).unwrap();
            let short: Vec<GroupElement> = g.ball(3).iter().cloned().collect();
            for a in &short {
                for b in &short {
                    assert_eq!(q.mul(&pi.apply(a), &pi.apply(b)), pi.apply(&g.mul(a, b)));
                }
            }
            let image: std::collections::HashSet<_> = short.iter().map(|x| pi.apply(x)).collect();
            let order = q.order().unwrap() as usize;
            if order <= image.len() {
                assert_eq!(image.len(), order);
            }
            for s in 0..g.degree() {
                assert!(q.elements().unwrap().contains(&pi.apply(g.letter_element(s))));
            }
        }
    }
}
