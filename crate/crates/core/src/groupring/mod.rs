//! Exact arithmetic in the group algebra KΓ and in matrices over it.

mod matrix;
mod parse;

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::groups::{GroupElement, MarkedGroup};

pub use matrix::GroupRingMatrix;
pub use parse::parse_scalar;

/// A finitely supported sum Σ a_γ γ. No stored coefficient is zero.
#[derive(Clone, Debug)]
pub struct GroupRingElement {
    group: MarkedGroup,
    field: Field,
    terms: BTreeMap<GroupElement, Scalar>,
}

impl PartialEq for GroupRingElement {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.field == other.field && self.terms == other.terms
    }
}

impl Eq for GroupRingElement {}

impl GroupRingElement {
    pub fn zero(group: &MarkedGroup, field: Field) -> Self {
        GroupRingElement { group: group.clone(), field, terms: BTreeMap::new() }
    }

    pub fn one(group: &MarkedGroup, field: Field) -> Self {
        Self::monomial(group, field, group.identity(), field.one())
    }

    pub fn monomial(group: &MarkedGroup, field: Field, g: GroupElement, c: Scalar) -> Self {
        Self::from_terms(group, field, [(g, c)])
    }

    /// Sums the given terms, dropping zeros.
    pub fn from_terms(
        group: &MarkedGroup,
        field: Field,
        terms: impl IntoIterator<Item = (GroupElement, Scalar)>,
    ) -> Self {
        let mut out = Self::zero(group, field);
        for (g, c) in terms {
            out.add_term(g, &c);
        }
        out
    }

    pub fn parse(group: &MarkedGroup, field: Field, text: &str) -> Result<Self> {
        parse::parse_element(group, field, text)
    }

    fn add_term(&mut self, g: GroupElement, c: &Scalar) {
        debug_assert!(self.field.contains(c), "{c:?} not in {}", self.field);
        let f = self.field;
        match self.terms.get_mut(&g) {
            Some(old) => {
                let s = f.add(old, c);
                if f.is_zero(&s) {
                    self.terms.remove(&g);
                } else {
                    *old = s;
                }
            }
            None if !f.is_zero(c) => {
                self.terms.insert(g, c.clone());
            }
            None => {}
        }
    }

    pub fn group(&self) -> &MarkedGroup {
        &self.group
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient a_γ (zero off the support).
    pub fn coefficient(&self, g: &GroupElement) -> Scalar {
        self.terms.get(g).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// Terms in normal-form order.
    pub fn terms(&self) -> impl Iterator<Item = (&GroupElement, &Scalar)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &GroupElement> {
        self.terms.keys()
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    /// Largest word length over the support; 0 for the zero element.
    pub fn support_radius(&self) -> usize {
        self.terms.keys().map(|g| self.group.word_length(g)).max().unwrap_or(0)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.group != other.group {
            return Err(Error::OwnerMismatch);
        }
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.add_term(g.clone(), c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let f = self.field;
        GroupRingElement {
            group: self.group.clone(),
            field: f,
            terms: self.terms.iter().map(|(g, c)| (g.clone(), f.neg(c))).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let f = self.field;
        Self::from_terms(&self.group, f, self.terms.iter().map(|(g, a)| (g.clone(), f.mul(c, a))))
    }

    /// Convolution product: (ab)_γ = Σ_{στ=γ} a_σ b_τ.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let f = self.field;
        let mut out = Self::zero(&self.group, f);
        for (s, a) in &self.terms {
            for (t, b) in &other.terms {
                out.add_term(self.group.mul(s, t), &f.mul(a, b));
            }
        }
        Ok(out)
    }

    /// The involution (a*)_γ = conj(a_{γ⁻¹}); without conjugation in prime
    /// fields.
    pub fn star(&self) -> Self {
        let f = self.field;
        Self::from_terms(
            &self.group,
            f,
            self.terms.iter().map(|(g, c)| (self.group.inverse(g), f.conj(c))),
        )
    }

    /// Left translate γ·a.
    pub fn left_translate(&self, gamma: &GroupElement) -> Self {
        Self::from_terms(
            &self.group,
            self.field,
            self.terms.iter().map(|(g, c)| (self.group.mul(gamma, g), c.clone())),
        )
    }

    /// Image under a map of groups applied to the support.
    pub fn map_support(&self, target: &MarkedGroup, f: impl Fn(&GroupElement) -> GroupElement) -> Self {
        Self::from_terms(target, self.field, self.terms.iter().map(|(g, c)| (f(g), c.clone())))
    }

    /// Canonical rendering in the element grammar; terms ordered by word
    /// length, then normal form.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by_cached_key(|(g, _)| (self.group.word_length(g), (*g).clone()));
        let mut out = String::new();
        for (i, (g, c)) in terms.into_iter().enumerate() {
            let negative = c.is_negative_real();
            let magnitude = if negative { self.field.neg(c) } else { c.clone() };
            match (i, negative) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let word = render_word(&self.group, g);
            match (word.is_empty(), magnitude.is_one()) {
                (true, _) => out.push_str(&magnitude.render()),
                (false, true) => out.push_str(&word),
                (false, false) => {
                    out.push_str(&magnitude.render());
                    out.push('*');
                    out.push_str(&word);
                }
            }
        }
        out
    }
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Normal form as a product of generator powers; empty for the identity.
pub fn render_word(group: &MarkedGroup, g: &GroupElement) -> String {
    g.coords()
        .iter()
        .zip(group.generator_names())
        .filter(|(&e, _)| e != 0)
        .map(|(&e, name)| if e == 1 { name.clone() } else { format!("{name}^{e}") })
        .collect::<Vec<_>>()
        .join("*")
}
