//! Exact coefficient fields: the rationals, prime fields and the Gaussian
//! rationals. There is no floating point anywhere below this module.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The field a scalar, element or matrix lives over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    Rational,
    Prime(u64),
    Gaussian,
}

/// A field element. Which variant is legal is decided by the owning [`Field`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rat(BigRational),
    Mod(u64),
    Gauss(BigRational, BigRational),
}

impl Field {
    pub fn prime(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("{p} is not prime")));
        }
        Ok(Field::Prime(p))
    }

    pub fn has_conjugation(self) -> bool {
        !matches!(self, Field::Prime(_))
    }

    pub fn zero(self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(self, v: i64) -> Scalar {
        match self {
            Field::Rational => Scalar::Rat(BigRational::from_integer(v.into())),
            Field::Prime(p) => Scalar::Mod(v.rem_euclid(p as i64) as u64),
            Field::Gaussian => Scalar::Gauss(BigRational::from_integer(v.into()), BigRational::zero()),
        }
    }

    /// Embeds a rational. Fails in a prime field when `p` divides the denominator.
    pub fn from_rational(self, q: &BigRational) -> Result<Scalar> {
        match self {
            Field::Rational => Ok(Scalar::Rat(q.clone())),
            Field::Gaussian => Ok(Scalar::Gauss(q.clone(), BigRational::zero())),
            Field::Prime(p) => {
                let num = reduce_bigint(q.numer(), p);
                let den = reduce_bigint(q.denom(), p);
                if den == 0 {
                    return Err(Error::InvalidParameter(format!(
                        "denominator {} vanishes modulo {p}",
                        q.denom()
                    )));
                }
                Ok(Scalar::Mod(mul_mod(num, inv_mod(den, p), p)))
            }
        }
    }

    /// `re + im·i`; only meaningful over the Gaussian rationals.
    pub fn gaussian(self, re: BigRational, im: BigRational) -> Result<Scalar> {
        match self {
            Field::Gaussian => Ok(Scalar::Gauss(re, im)),
            _ if im.is_zero() => self.from_rational(&re),
            _ => Err(Error::UnsupportedField(format!("{self} (imaginary coefficient)"))),
        }
    }

    pub fn is_zero(self, a: &Scalar) -> bool {
        match a {
            Scalar::Rat(q) => q.is_zero(),
            Scalar::Mod(r) => *r == 0,
            Scalar::Gauss(re, im) => re.is_zero() && im.is_zero(),
        }
    }

    pub fn add(self, a: &Scalar, b: &Scalar) -> Scalar {
        match (a, b) {
            (Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x + y),
            (Scalar::Mod(x), Scalar::Mod(y)) => Scalar::Mod(add_mod(*x, *y, self.modulus())),
            (Scalar::Gauss(a, b), Scalar::Gauss(c, d)) => Scalar::Gauss(a + c, b + d),
            _ => mixed(a, b),
        }
    }

    pub fn sub(self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn neg(self, a: &Scalar) -> Scalar {
        match a {
            Scalar::Rat(x) => Scalar::Rat(-x),
            Scalar::Mod(x) => {
                let p = self.modulus();
                Scalar::Mod(if *x == 0 { 0 } else { p - x })
            }
            Scalar::Gauss(re, im) => Scalar::Gauss(-re, -im),
        }
    }

    pub fn mul(self, a: &Scalar, b: &Scalar) -> Scalar {
        match (a, b) {
            (Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x * y),
            (Scalar::Mod(x), Scalar::Mod(y)) => Scalar::Mod(mul_mod(*x, *y, self.modulus())),
            (Scalar::Gauss(a, b), Scalar::Gauss(c, d)) => {
                Scalar::Gauss(a * c - b * d, a * d + b * c)
            }
            _ => mixed(a, b),
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self, a: &Scalar) -> Option<Scalar> {
        if self.is_zero(a) {
            return None;
        }
        Some(match a {
            Scalar::Rat(x) => Scalar::Rat(x.recip()),
            Scalar::Mod(x) => Scalar::Mod(inv_mod(*x, self.modulus())),
            Scalar::Gauss(re, im) => {
                let norm = re * re + im * im;
                Scalar::Gauss(re / &norm, -im / &norm)
            }
        })
    }

    /// Complex conjugation; the identity on fields without an involution.
    pub fn conj(self, a: &Scalar) -> Scalar {
        match a {
            Scalar::Gauss(re, im) => Scalar::Gauss(re.clone(), -im),
            other => other.clone(),
        }
    }

    fn modulus(self) -> u64 {
        match self {
            Field::Prime(p) => p,
            _ => unreachable!("modular scalar outside a prime field"),
        }
    }

    pub fn contains(self, a: &Scalar) -> bool {
        match (self, a) {
            (Field::Rational, Scalar::Rat(_)) | (Field::Gaussian, Scalar::Gauss(..)) => true,
            (Field::Prime(p), Scalar::Mod(r)) => *r < p,
            _ => false,
        }
    }
}

fn mixed(a: &Scalar, b: &Scalar) -> Scalar {
    panic!("scalars from different fields: {a:?} and {b:?}")
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "Q"),
            Field::Prime(p) => write!(f, "GF({p})"),
            Field::Gaussian => write!(f, "Q(i)"),
        }
    }
}

impl FromStr for Field {
    type Err = Error;

    /// Accepts `Q`, `Q(i)` / `QI`, and `GF(p)` / `Fp`, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        match t.as_str() {
            "q" | "rational" => return Ok(Field::Rational),
            "q(i)" | "qi" | "gaussian" => return Ok(Field::Gaussian),
            _ => {}
        }
        let digits = t
            .strip_prefix("gf(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| t.strip_prefix("gf"))
            .or_else(|| t.strip_prefix('f'));
        match digits.map(str::parse::<u64>) {
            Some(Ok(p)) => Field::prime(p),
            _ => Err(Error::parse(0, format!("unknown field `{s}`"))),
        }
    }
}

impl Scalar {
    /// Renders in the element grammar: integers bare, fractions as `a/b`,
    /// Gaussian values as `(re + im i)`.
    pub fn render(&self) -> String {
        match self {
            Scalar::Rat(q) => render_rational(q),
            Scalar::Mod(r) => r.to_string(),
            Scalar::Gauss(re, im) if im.is_zero() => render_rational(re),
            Scalar::Gauss(re, im) => {
                let sign = if im.is_negative() { "-" } else { "+" };
                format!("({} {} {} i)", render_rational(re), sign, render_rational(&im.abs()))
            }
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(q) => q.is_one(),
            Scalar::Mod(r) => *r == 1,
            Scalar::Gauss(re, im) => re.is_one() && im.is_zero(),
        }
    }

    /// Whether the scalar reads as negative when printed with a leading sign,
    /// so the printer can emit `- 2*g0` instead of `+ -2*g0`.
    pub fn is_negative_real(&self) -> bool {
        match self {
            Scalar::Rat(q) => q.is_negative(),
            Scalar::Gauss(re, im) => im.is_zero() && re.is_negative(),
            Scalar::Mod(_) => false,
        }
    }
}

pub fn render_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `a/b`, an integer, or a terminating decimal such as `0.2`
/// into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::parse(0, format!("not a rational number: `{text}`"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (negative, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty()) || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}0").parse().map_err(|_| bad())?;
    let scale = BigInt::from(10u32).pow(frac.len() as u32 + 1);
    let q = BigRational::new(digits, scale);
    Ok(if negative { -q } else { q })
}

pub(crate) fn reduce_bigint(v: &BigInt, p: u64) -> u64 {
    let m = BigInt::from(p);
    let r = ((v % &m) + &m) % &m;
    r.try_into().expect("residue fits in u64")
}

pub(crate) fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % p as u128) as u64
}

pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p - 2, p)
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rationals_are_kept_reduced() {
        let f = Field::Rational;
        let a = f.from_rational(&q(2, 4)).unwrap();
        assert_eq!(a, Scalar::Rat(q(1, 2)));
        assert_eq!(f.mul(&a, &f.from_i64(-2)), f.from_i64(-1));
    }

    #[test]
    fn prime_field_inverse_and_rejection() {
        let f = Field::prime(7).unwrap();
        let three = f.from_i64(3);
        assert_eq!(f.mul(&three, &f.inv(&three).unwrap()), f.one());
        assert_eq!(f.from_i64(-1), Scalar::Mod(6));
        assert!(f.from_rational(&q(1, 7)).is_err());
        assert_eq!(f.from_rational(&q(1, 2)).unwrap(), Scalar::Mod(4));
        assert!(Field::prime(9).is_err());
    }

    #[test]
    fn gaussian_inverse_and_conjugate() {
        let f = Field::Gaussian;
        let z = f.gaussian(q(2, 1), q(1, 1)).unwrap();
        assert_eq!(f.mul(&z, &f.inv(&z).unwrap()), f.one());
        assert_eq!(f.conj(&z), Scalar::Gauss(q(2, 1), q(-1, 1)));
        assert_eq!(z.render(), "(2 + 1 i)");
    }

    #[test]
    fn field_tags_parse() {
        assert_eq!("Q".parse::<Field>().unwrap(), Field::Rational);
        assert_eq!("Q(i)".parse::<Field>().unwrap(), Field::Gaussian);
        assert_eq!("GF(101)".parse::<Field>().unwrap(), Field::Prime(101));
        assert_eq!("f7".parse::<Field>().unwrap(), Field::Prime(7));
        assert!("R".parse::<Field>().is_err());
    }

    #[test]
    fn rationals_parse_from_decimals_and_fractions() {
        assert_eq!(parse_rational("0.2").unwrap(), q(1, 5));
        assert_eq!(parse_rational("-1.25").unwrap(), q(-5, 4));
        assert_eq!(parse_rational("3").unwrap(), q(3, 1));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        assert_eq!(parse_rational("2/6").unwrap(), q(1, 3));
        for bad in ["", ".", "1/0", "0.2.1", "abc", "1e3"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn miller_rabin_small_range() {
        let sieve: Vec<u64> = (0..200).filter(|&n| n >= 2 && (2..n).all(|d| n % d != 0)).collect();
        let mr: Vec<u64> = (0..200).filter(|&n| is_prime(n)).collect();
        assert_eq!(sieve, mr);
        assert!(is_prime(2_147_483_647));
        assert!(!is_prime(2_147_483_649));
    }
}
