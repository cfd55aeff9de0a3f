//! Group descriptor grammar:
//!
//! ```text
//! descriptor := product [ "%" moduli ]
//! product    := factor { "x" factor }
//! factor     := "Z" [ "^" int ] | "C" int | "H3"
//! moduli     := int | "(" int { "," int } ")"
//! ```
//!
//! `H3` cannot be combined with other factors.

use super::{GroupKind, MarkedGroup};
use crate::error::{Error, Result};

pub(super) fn parse(text: &str) -> Result<MarkedGroup> {
    let (base, moduli) = match text.split_once('%') {
        Some((b, m)) => (b, Some((b.len() + 1, m))),
        None => (text, None),
    };
    let kind = parse_product(base)?;
    let group = MarkedGroup::new(kind)?;
    match moduli {
        None => Ok(group),
        Some((offset, m)) => {
            let moduli = parse_moduli(m, offset)?;
            Ok(group.quotient(&moduli)?.0)
        }
    }
}

fn parse_product(text: &str) -> Result<GroupKind> {
    let mut rank = 0usize;
    let mut orders = Vec::new();
    let mut heisenberg = false;
    let mut offset = 0;
    let factors: Vec<&str> = text.split('x').collect();
    for raw in &factors {
        let f = raw.trim();
        let pos = offset + raw.len() - raw.trim_start().len();
        offset += raw.len() + 1;
        if f.eq_ignore_ascii_case("h3") {
            heisenberg = true;
        } else if let Some(rest) = f.strip_prefix('Z') {
            let d = match rest.trim().strip_prefix('^') {
                Some(e) => e.trim().parse::<usize>().map_err(|_| Error::parse(pos, format!("bad exponent in `{f}`")))?,
                None if rest.trim().is_empty() => 1,
                None => return Err(Error::parse(pos, format!("unexpected `{rest}`"))),
            };
            rank += d;
        } else if let Some(rest) = f.strip_prefix('C') {
            let o = rest.trim().parse::<u64>().map_err(|_| Error::parse(pos, format!("bad cyclic order in `{f}`")))?;
            orders.push(o);
        } else if f.is_empty() {
            return Err(Error::parse(pos, "empty factor"));
        } else {
            return Err(Error::UnknownKind(f.to_string()));
        }
    }
    if heisenberg {
        if factors.len() > 1 {
            return Err(Error::UnknownKind(text.trim().to_string()));
        }
        return Ok(GroupKind::Heisenberg3);
    }
    Ok(match (rank, orders.is_empty()) {
        (0, _) => GroupKind::FiniteAbelian(orders),
        (d, true) => GroupKind::FreeAbelian(d),
        (d, false) => GroupKind::FreeAbelianTimesFinite { rank: d, orders },
    })
}

fn parse_moduli(text: &str, offset: usize) -> Result<Vec<u64>> {
    let t = text.trim();
    let inner = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(t);
    inner
        .split(',')
        .map(|m| {
            m.trim()
                .parse::<u64>()
                .map_err(|_| Error::parse(offset, format!("bad modulus `{}`", m.trim())))
        })
        .collect()
}
