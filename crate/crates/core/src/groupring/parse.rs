//! Element grammar:
//!
//! ```text
//! element := [sign] term { sign term }
//! term    := factor { "*" factor }
//! factor  := int [ "/" int ] | "(" complex ")" | generator [ "^" [ "-" ] int ]
//! complex := [sign] cterm { sign cterm }
//! cterm   := int [ "/" int ] [ "*" ] [ "i" ] | "i"
//! ```
//!
//! `1` is the identity; a term without a word is a scalar multiple of it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::GroupRingElement;
use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::groups::{GroupElement, MarkedGroup};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().map(|x| x.1).collect();
            out.push((pos, Tok::Int(s.parse().expect("digits"))));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            out.push((pos, Tok::Ident(chars[start..i].iter().map(|x| x.1).collect())));
        } else if "+-*/^()".contains(c) {
            out.push((pos, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(Error::parse(pos, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    group: Option<&'a MarkedGroup>,
    field: Field,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::parse(self.pos(), format!("expected `{c}`")))
        }
    }

    fn int(&mut self) -> Result<BigInt> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = v.clone();
                self.at += 1;
                Ok(v)
            }
            _ => Err(Error::parse(self.pos(), "expected an integer")),
        }
    }

    fn rational(&mut self) -> Result<BigRational> {
        let n = self.int()?;
        if self.eat('/') {
            let pos = self.pos();
            let d = self.int()?;
            if d.is_zero() {
                return Err(Error::parse(pos, "zero denominator"));
            }
            Ok(BigRational::new(n, d))
        } else {
            Ok(BigRational::from_integer(n))
        }
    }

    fn element(&mut self) -> Result<GroupRingElement> {
        let group = self.group.expect("element parsing needs a group");
        let mut acc = GroupRingElement::zero(group, self.field);
        let mut negative = self.eat('-');
        if !negative {
            self.eat('+');
        }
        loop {
            let (g, mut c) = self.term()?;
            if negative {
                c = self.field.neg(&c);
            }
            acc.add_term(g, &c);
            negative = match self.peek() {
                Some(Tok::Sym('+')) => false,
                Some(Tok::Sym('-')) => true,
                None => return Ok(acc),
                _ => return Err(Error::parse(self.pos(), "expected `+` or `-`")),
            };
            self.at += 1;
        }
    }

    fn term(&mut self) -> Result<(GroupElement, Scalar)> {
        let f = self.field;
        let mut coef = f.one();
        let group = self.group.expect("element parsing needs a group");
        let mut word = group.identity();
        loop {
            match self.peek().cloned() {
                Some(Tok::Int(_)) => {
                    let pos = self.pos();
                    let q = self.rational()?;
                    let s = f.from_rational(&q).map_err(|e| Error::parse(pos, e.to_string()))?;
                    coef = f.mul(&coef, &s);
                }
                Some(Tok::Sym('(')) => {
                    self.at += 1;
                    let s = self.complex()?;
                    self.expect(')')?;
                    coef = f.mul(&coef, &s);
                }
                Some(Tok::Ident(name)) => {
                    self.at += 1;
                    let gi = group.generator_index(&name)?;
                    let mut exp = BigInt::one();
                    if self.eat('^') {
                        let neg = self.eat('-');
                        exp = self.int()?;
                        if neg {
                            exp = -exp;
                        }
                    }
                    let e: i64 = exp
                        .try_into()
                        .map_err(|_| Error::parse(self.pos(), "exponent out of range"))?;
                    word = group.mul(&word, &group.pow(group.generator(gi), e));
                }
                _ => return Err(Error::parse(self.pos(), "expected a coefficient or generator")),
            }
            if !self.eat('*') {
                return Ok((word, coef));
            }
        }
    }

    fn complex(&mut self) -> Result<Scalar> {
        let mut re = BigRational::zero();
        let mut im = BigRational::zero();
        let mut negative = self.eat('-');
        if !negative {
            self.eat('+');
        }
        loop {
            let mut v = BigRational::one();
            let mut seen_number = false;
            if matches!(self.peek(), Some(Tok::Int(_))) {
                v = self.rational()?;
                seen_number = true;
            }
            let star = seen_number && self.eat('*');
            let imaginary = if self.peek() == Some(&Tok::Ident("i".into())) {
                self.at += 1;
                true
            } else {
                false
            };
            if (!seen_number && !imaginary) || (star && !imaginary) {
                return Err(Error::parse(self.pos(), "expected a rational or `i`"));
            }
            if negative {
                v = -v;
            }
            if imaginary {
                im += v;
            } else {
                re += v;
            }
            negative = match self.peek() {
                Some(Tok::Sym('+')) => false,
                Some(Tok::Sym('-')) => true,
                _ => break,
            };
            self.at += 1;
        }
        let pos = self.pos();
        self.field.gaussian(re, im).map_err(|e| Error::parse(pos, e.to_string()))
    }
}

pub(super) fn parse_element(group: &MarkedGroup, field: Field, text: &str) -> Result<GroupRingElement> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(Error::parse(0, "empty element"));
    }
    let mut p = Parser { toks, at: 0, end: text.len(), group: Some(group), field };
    p.element()
}

/// Parses a lone scalar: `[-]a[/b]` or `(re + im i)`.
pub fn parse_scalar(field: Field, text: &str) -> Result<Scalar> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, end: text.len(), group: None, field };
    let s = if p.eat('(') {
        let s = p.complex()?;
        p.expect(')')?;
        s
    } else {
        let negative = p.eat('-');
        let pos = p.pos();
        let q = p.rational()?;
        let s = field.from_rational(&q).map_err(|e| Error::parse(pos, e.to_string()))?;
        if negative {
            field.neg(&s)
        } else {
            s
        }
    };
    if p.at != p.toks.len() {
        return Err(Error::parse(p.pos(), "trailing input after scalar"));
    }
    Ok(s)
}
