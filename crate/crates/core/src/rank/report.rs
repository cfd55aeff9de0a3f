//! Rank estimates and convergence reports, with JSON and CSV renderings.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::field::render_rational;

pub const DECIMAL_PLACES: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FolnerKernel,
    FolnerImage,
    Quotient,
    /// rk_φ of a level element.
    Level,
    /// Normalized rank of a matrix on a sofic graph.
    Sofic,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::FolnerKernel => "folner_kernel",
            Method::FolnerImage => "folner_image",
            Method::Quotient => "quotient",
            Method::Level => "level",
            Method::Sofic => "sofic",
        }
    }
}

/// One stage of an estimator: value = numerator / denominator, where the
/// numerator is a rank and the denominator |F_n| or |Γ/N|.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankEstimate {
    pub method: Method,
    /// `[n]` for Følner stages, the moduli for quotient stages.
    pub parameter: Vec<u64>,
    pub window: Option<usize>,
    /// Matrix size; 1 for elements.
    pub k: usize,
    pub numerator: u64,
    pub denominator: u64,
    pub value: BigRational,
    /// Heuristic error bracket for this stage.
    pub bound: BigRational,
}

impl RankEstimate {
    pub fn new(
        method: Method,
        parameter: Vec<u64>,
        window: Option<usize>,
        k: usize,
        numerator: u64,
        denominator: u64,
        bound: BigRational,
    ) -> Self {
        assert!(denominator > 0 && numerator <= k as u64 * denominator);
        let value = BigRational::new(numerator.into(), denominator.into());
        RankEstimate { method, parameter, window, k, numerator, denominator, value, bound }
    }

    pub fn stage(&self) -> String {
        let p: Vec<String> = self.parameter.iter().map(u64::to_string).collect();
        match self.method {
            Method::Quotient => format!("m={}", p.join(",")),
            Method::Level => format!("i={}", p.join(",")),
            Method::Sofic => format!("V={}", p.join(",")),
            _ => format!("n={}", p.join(",")),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "method": self.method.as_str(),
            "stage": self.stage(),
            "parameter": self.parameter,
            "window": self.window,
            "k": self.k,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "value": render_rational(&self.value),
            "value_decimal": decimal(&self.value),
            "bound": render_rational(&self.bound),
            "bound_decimal": decimal(&self.bound),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    /// Single-method report; nothing to compare.
    NotCompared,
}

/// A sequence of estimates ordered by (method, parameter), with
/// consecutive gaps inside each method.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergenceReport {
    pub estimates: Vec<RankEstimate>,
    pub gaps: Vec<(Method, BigRational)>,
    pub final_gap: Option<BigRational>,
    pub gap_bound: Option<BigRational>,
    pub verdict: Verdict,
}

impl ConvergenceReport {
    pub fn from_estimates(mut estimates: Vec<RankEstimate>) -> Self {
        estimates.sort_by(|a, b| (a.method, &a.parameter).cmp(&(b.method, &b.parameter)));
        let gaps = estimates
            .windows(2)
            .filter(|w| w[0].method == w[1].method)
            .map(|w| (w[0].method, (&w[1].value - &w[0].value).abs()))
            .collect();
        ConvergenceReport { estimates, gaps, final_gap: None, gap_bound: None, verdict: Verdict::NotCompared }
    }

    pub fn last(&self, method: Method) -> Option<&RankEstimate> {
        self.estimates.iter().rev().find(|e| e.method == method)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "estimates": self.estimates.iter().map(RankEstimate::to_json).collect::<Vec<_>>(),
            "gaps": self.gaps.iter().map(|(m, g)| json!({
                "method": m.as_str(),
                "gap": render_rational(g),
                "gap_decimal": decimal(g),
            })).collect::<Vec<_>>(),
            "final_gap": self.final_gap.as_ref().map(render_rational),
            "final_gap_decimal": self.final_gap.as_ref().map(decimal),
            "gap_bound": self.gap_bound.as_ref().map(render_rational),
            "gap_bound_decimal": self.gap_bound.as_ref().map(decimal),
            "bound_kind": "heuristic",
            "verdict": self.verdict,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for e in &self.estimates {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                e.method.as_str(),
                e.stage().replace(',', ";"),
                e.numerator,
                e.denominator,
                render_rational(&e.value),
                decimal(&e.value),
                render_rational(&e.bound),
                decimal(&e.bound),
            );
        }
        out
    }
}

pub const CSV_HEADER: &str = "method,stage,numerator,denominator,value,value_decimal,bound,bound_decimal";

/// Exact round-half-away-from-zero to [`DECIMAL_PLACES`] places.
pub fn decimal(q: &BigRational) -> String {
    let scale = BigInt::from(10u32).pow(DECIMAL_PLACES as u32);
    let scaled = q.abs() * BigRational::from_integer(scale.clone());
    let rounded = (scaled + BigRational::new(1.into(), 2.into())).floor().to_integer();
    let (int, frac) = rounded.div_rem(&scale);
    let sign = if q.is_negative() && !rounded.is_zero() { "-" } else { "" };
    format!("{sign}{int}.{:0>width$}", frac.to_string(), width = DECIMAL_PLACES)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(decimal(&r(38, 40)), "0.950000");
        assert_eq!(decimal(&r(1, 3)), "0.333333");
        assert_eq!(decimal(&r(2, 3)), "0.666667");
        assert_eq!(decimal(&r(-1, 8)), "-0.125000");
        assert_eq!(decimal(&r(3, 2)), "1.500000");
        assert_eq!(decimal(&r(0, 1)), "0.000000");
        assert_eq!(decimal(&r(-1, 10_000_000)), "0.000000");
    }

    #[test]
    fn report_orders_and_gaps() {
        let e = |n: u64, num: u64| RankEstimate::new(Method::FolnerImage, vec![n], Some(1), 1, num, n, r(0, 1));
        let rep = ConvergenceReport::from_estimates(vec![e(20, 18), e(10, 8)]);
        assert_eq!(rep.estimates[0].parameter, vec![10]);
        assert_eq!(rep.gaps, vec![(Method::FolnerImage, r(1, 10))]);
        let csv = rep.to_csv();
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(csv.lines().nth(1).unwrap(), "folner_image,n=10,8,10,4/5,0.800000,0,0.000000");
    }
}
