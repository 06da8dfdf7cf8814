//! Exact scalars for the two built-in non-Archimedean domains and their
//! valuations.
//!
//! Two backends are supported:
//!
//! * [`Backend::Padic`]: rationals viewed inside `Q_p`, with `|x| = p^(-v_p(x))`.
//! * [`Backend::Laurent`]: finite Laurent polynomials over `Q` with the
//!   `t`-adic valuation. Sums of squares of rationals never vanish unless
//!   every term does, so leading coefficients of `Σ λ_j²` cannot cancel and
//!   `|Σ λ_j²| = max |λ_j|²` holds for every tuple.
//!
//! Absolute values are never turned into floats. They are carried as
//! extended-integer valuations and compared as integers.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid rational literal {0:?}")]
    BadRational(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("invalid Laurent exponent {0:?}")]
    BadExponent(String),
    #[error("element {0} does not belong to the p-adic backend (non-constant Laurent polynomial)")]
    NotInBackend(String),
    #[error("cannot invert {0}: only rationals and Laurent monomials are invertible")]
    NotInvertible(String),
    #[error("input list is empty")]
    Empty,
    #[error("the field condition holds on the Laurent backend; no counterexample exists")]
    ConditionHoldsEverywhere,
    #[error("binomial C({n}, {k}) requested with k > n")]
    BinomialOutOfRange { n: u64, k: u64 },
}

/// A prime checked by trial division.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self, ScalarError> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(ScalarError::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Prime {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(self.0)
    }
}

impl<'de> Deserialize<'de> for Prime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let p = u64::deserialize(d)?;
        Prime::new(p).map_err(de::Error::custom)
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut q = 2u64;
    while q.saturating_mul(q) <= p {
        if p.is_multiple_of(q) {
            return false;
        }
        q += 1;
    }
    true
}

/// Scalar domain descriptor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Padic(Prime),
    Laurent,
}

impl Backend {
    pub fn padic(p: u64) -> Result<Self, ScalarError> {
        Prime::new(p).map(Backend::Padic)
    }

    pub fn prime(&self) -> Option<Prime> {
        match self {
            Backend::Padic(p) => Some(*p),
            Backend::Laurent => None,
        }
    }

    /// Valuation of `x` in this backend.
    pub fn valuation(&self, x: &Scalar) -> Result<Valuation, ScalarError> {
        match (self, x) {
            (_, x) if x.is_zero() => Ok(Valuation::Infinite),
            (Backend::Padic(p), Scalar::Rational(r)) => Ok(Valuation::Finite(padic_valuation(r, *p))),
            (Backend::Padic(_), Scalar::Laurent(l)) => Err(ScalarError::NotInBackend(l.to_string())),
            (Backend::Laurent, Scalar::Rational(_)) => Ok(Valuation::Finite(0)),
            (Backend::Laurent, Scalar::Laurent(l)) => Ok(l.valuation()),
        }
    }

    pub fn abs(&self, x: &Scalar) -> Result<AbsValue, ScalarError> {
        self.valuation(x).map(AbsValue)
    }

    /// Valuation of the integer `n` viewed as a scalar.
    pub fn integer_valuation(&self, n: &BigInt) -> Valuation {
        if n.is_zero() {
            return Valuation::Infinite;
        }
        match self {
            Backend::Padic(p) => Valuation::Finite(int_valuation(n, *p) as i64),
            Backend::Laurent => Valuation::Finite(0),
        }
    }

    /// Whether `x` is an element this backend can value.
    pub fn admits(&self, x: &Scalar) -> bool {
        matches!(self, Backend::Laurent) || matches!(x, Scalar::Rational(_))
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Padic(p) => write!(f, "padic({p})"),
            Backend::Laurent => write!(f, "laurent"),
        }
    }
}

/// Additive valuation; `Infinite` is the valuation of zero.
///
/// The derived order puts every finite value below `Infinite`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    /// Valuation of `x^k`.
    pub fn times(self, k: u32) -> Valuation {
        match self {
            Valuation::Finite(v) => Valuation::Finite(v * k as i64),
            Valuation::Infinite if k == 0 => Valuation::Finite(0),
            Valuation::Infinite => Valuation::Infinite,
        }
    }

    /// Valuation of a quotient; `None` when the divisor is zero.
    pub fn checked_sub(self, rhs: Valuation) -> Option<Valuation> {
        match (self, rhs) {
            (_, Valuation::Infinite) => None,
            (Valuation::Infinite, _) => Some(Valuation::Infinite),
            (Valuation::Finite(a), Valuation::Finite(b)) => Some(Valuation::Finite(a - b)),
        }
    }
}

impl Add for Valuation {
    type Output = Valuation;

    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => s.serialize_i64(*v),
            Valuation::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Valuation;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer valuation or \"inf\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Valuation, E> {
                Ok(Valuation::Finite(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Valuation, E> {
                i64::try_from(v).map(Valuation::Finite).map_err(E::custom)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Valuation, E> {
                if v == "inf" {
                    Ok(Valuation::Infinite)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// An absolute value `base^(-v)`, stored only through its valuation.
///
/// Ordering is the ordering of absolute values: larger valuation, smaller
/// absolute value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AbsValue(pub Valuation);

impl AbsValue {
    pub const ZERO: AbsValue = AbsValue(Valuation::Infinite);
    pub const ONE: AbsValue = AbsValue(Valuation::Finite(0));

    pub fn valuation(self) -> Valuation {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0.is_infinite()
    }

    pub fn pow(self, k: u32) -> AbsValue {
        AbsValue(self.0.times(k))
    }

    /// `None` when dividing by `|0|`.
    pub fn checked_div(self, rhs: AbsValue) -> Option<AbsValue> {
        self.0.checked_sub(rhs.0).map(AbsValue)
    }
}

impl Mul for AbsValue {
    type Output = AbsValue;

    // |x|·|y| = p^-(v(x) + v(y))
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: AbsValue) -> AbsValue {
        AbsValue(self.0 + rhs.0)
    }
}

impl Ord for AbsValue {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.cmp(&self.0)
    }
}

impl PartialOrd for AbsValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Laurent polynomial over `Q` with no zero coefficients stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, Rational>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }

    pub fn monomial(coeff: Rational, exponent: i64) -> Self {
        let mut p = LaurentPoly::zero();
        p.add_term(exponent, coeff);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, Rational)>>(terms: I) -> Self {
        let mut p = LaurentPoly::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, exponent: i64, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exponent).or_insert_with(Rational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&exponent);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rational)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    /// `t`-adic valuation: the least exponent present.
    pub fn valuation(&self) -> Valuation {
        self.terms
            .keys()
            .next()
            .map_or(Valuation::Infinite, |e| Valuation::Finite(*e))
    }

    pub fn leading_coefficient(&self) -> Option<&Rational> {
        self.terms.values().next()
    }

    /// The constant, if the support is contained in `{0}`.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    fn mul_ref(&self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match e {
                0 => write!(f, "{}", format_rational(c))?,
                1 => write!(f, "({})t", format_rational(c))?,
                _ => write!(f, "({})t^{}", format_rational(c), e)?,
            }
        }
        Ok(())
    }
}

/// An exact scalar.
///
/// Constants are always stored as `Rational`; the `Laurent` variant is used
/// only when some nonzero exponent is present, so equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(Rational),
    Laurent(LaurentPoly),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rational(Rational::zero())
    }

    pub fn one() -> Self {
        Scalar::Rational(Rational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Rational(Rational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Rational(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// The indeterminate `t` of the Laurent backend.
    pub fn t() -> Self {
        Scalar::from_laurent(LaurentPoly::monomial(Rational::one(), 1))
    }

    pub fn from_laurent(p: LaurentPoly) -> Self {
        match p.as_constant() {
            Some(c) => Scalar::Rational(c),
            None => Scalar::Laurent(p),
        }
    }

    pub fn to_laurent(&self) -> LaurentPoly {
        match self {
            Scalar::Rational(r) => LaurentPoly::monomial(r.clone(), 0),
            Scalar::Laurent(l) => l.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Laurent(l) => l.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Scalar::Rational(r) if r.is_one())
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Rational(r) => Some(r),
            Scalar::Laurent(_) => None,
        }
    }

    pub fn pow(&self, k: u32) -> Scalar {
        let mut acc = Scalar::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Multiplicative inverse of a nonzero rational or a Laurent monomial.
    pub fn inv(&self) -> Result<Scalar, ScalarError> {
        match self {
            Scalar::Rational(r) if !r.is_zero() => Ok(Scalar::Rational(r.recip())),
            Scalar::Laurent(l) if l.terms.len() == 1 => {
                let (e, c) = l.terms.iter().next().expect("one term");
                Ok(Scalar::from_laurent(LaurentPoly::monomial(c.recip(), -e)))
            }
            _ => Err(ScalarError::NotInvertible(self.to_string())),
        }
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::Rational(r)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;

    fn add(self, rhs: &'a Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            _ => {
                let mut out = self.to_laurent();
                for (e, c) in rhs.to_laurent().terms {
                    out.add_term(e, c);
                }
                Scalar::from_laurent(out)
            }
        }
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;

    fn mul(self, rhs: &'a Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            (Scalar::Rational(a), Scalar::Laurent(l)) | (Scalar::Laurent(l), Scalar::Rational(a)) => {
                if a.is_zero() {
                    return Scalar::zero();
                }
                let terms = l.terms.iter().map(|(e, c)| (*e, c * a)).collect();
                Scalar::Laurent(LaurentPoly { terms })
            }
            (Scalar::Laurent(a), Scalar::Laurent(b)) => Scalar::from_laurent(a.mul_ref(b)),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(-r),
            Scalar::Laurent(l) => Scalar::Laurent(LaurentPoly {
                terms: l.terms.iter().map(|(e, c)| (*e, -c)).collect(),
            }),
        }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;

    fn sub(self, rhs: &'a Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Add for Scalar {
    type Output = Scalar;

    fn add(self, rhs: Scalar) -> Scalar {
        &self + &rhs
    }
}

impl Sub for Scalar {
    type Output = Scalar;

    fn sub(self, rhs: Scalar) -> Scalar {
        &self - &rhs
    }
}

impl Mul for Scalar {
    type Output = Scalar;

    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl Neg for Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        -&self
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| &acc + &x)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => f.write_str(&format_rational(r)),
            Scalar::Laurent(l) => write!(f, "{l}"),
        }
    }
}

impl FromStr for Scalar {
    type Err = ScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s).map(Scalar::Rational)
    }
}

/// Text form `"a"` or `"a/b"`.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"a"` or `"a/b"` with an optional sign on `a` and decimal digits.
pub fn parse_rational(s: &str) -> Result<Rational, ScalarError> {
    let bad = || ScalarError::BadRational(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let digits = num.strip_prefix(['-', '+']).unwrap_or(num);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let numer: BigInt = num.parse().map_err(|_| bad())?;
    let denom: BigInt = match den {
        None => BigInt::one(),
        Some(d) => {
            if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            d.parse().map_err(|_| bad())?
        }
    };
    if denom.is_zero() {
        return Err(ScalarError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(numer, denom))
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Rational(r) => s.serialize_str(&format_rational(r)),
            Scalar::Laurent(l) => {
                let mut map = s.serialize_map(Some(l.terms.len()))?;
                for (e, c) in &l.terms {
                    map.serialize_entry(&e.to_string(), &format_rational(c))?;
                }
                map.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Scalar;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational string \"a/b\" or a map {\"exponent\": \"rational\"}")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Scalar, E> {
                parse_rational(v).map(Scalar::Rational).map_err(E::custom)
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Scalar, A::Error> {
                let mut poly = LaurentPoly::zero();
                while let Some((k, v)) = map.next_entry::<String, String>()? {
                    let e: i64 = k
                        .parse()
                        .map_err(|_| de::Error::custom(ScalarError::BadExponent(k.clone())))?;
                    let c = parse_rational(&v).map_err(de::Error::custom)?;
                    poly.add_term(e, c);
                }
                Ok(Scalar::from_laurent(poly))
            }
        }
        d.deserialize_any(V)
    }
}

/// `v_p` of a nonzero integer.
pub fn int_valuation(n: &BigInt, p: Prime) -> u64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p.get());
    let mut m = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// `v_p(a/b) = v_p(a) - v_p(b)` for nonzero `r`.
pub fn padic_valuation(r: &Rational, p: Prime) -> i64 {
    int_valuation(r.numer(), p) as i64 - int_valuation(r.denom(), p) as i64
}

/// Free-function form of [`Backend::valuation`].
pub fn valuation(x: &Scalar, backend: &Backend) -> Result<Valuation, ScalarError> {
    backend.valuation(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldConditionCheck {
    pub holds: bool,
    /// `|Σ λ_j²|`
    pub lhs: AbsValue,
    /// `max_j |λ_j|²`
    pub rhs: AbsValue,
}

/// Tests `|Σ λ_j²| = max_j |λ_j|²` on one tuple.
pub fn check_field_condition(
    lambdas: &[Scalar],
    backend: &Backend,
) -> Result<FieldConditionCheck, ScalarError> {
    if lambdas.is_empty() {
        return Err(ScalarError::Empty);
    }
    let sum: Scalar = lambdas.iter().map(|l| l * l).sum();
    let lhs = backend.abs(&sum)?;
    let mut rhs = AbsValue::ZERO;
    for l in lambdas {
        rhs = rhs.max(backend.abs(l)?.pow(2));
    }
    Ok(FieldConditionCheck { holds: lhs == rhs, lhs, rhs })
}

/// Searches nondecreasing tuples of `p`-units in `[1, search_bound]`, of length
/// 2 to 4, whose squares sum to a multiple of `p`.
///
/// Units are required: a tuple containing non-units can satisfy `p | Σ λ²`
/// while still meeting the condition (e.g. the single entry `p`).
pub fn find_field_condition_counterexample(
    backend: &Backend,
    search_bound: u64,
) -> Result<Option<Vec<u64>>, ScalarError> {
    let p = match backend {
        Backend::Padic(p) => p.get(),
        Backend::Laurent => return Err(ScalarError::ConditionHoldsEverywhere),
    };
    let units: Vec<u64> = (1..=search_bound).filter(|x| x % p != 0).collect();
    for len in 2..=4 {
        let mut tuple = Vec::with_capacity(len);
        if let Some(found) = extend_counterexample(&units, 0, len, 0, p, &mut tuple) {
            return Ok(Some(found));
        }
    }
    Ok(None)
}

fn extend_counterexample(
    units: &[u64],
    start: usize,
    len: usize,
    residue: u64,
    p: u64,
    tuple: &mut Vec<u64>,
) -> Option<Vec<u64>> {
    if tuple.len() == len {
        return (residue == 0).then(|| tuple.clone());
    }
    for (i, &u) in units.iter().enumerate().skip(start) {
        tuple.push(u);
        let r = (residue + (u % p) * (u % p)) % p;
        if let Some(found) = extend_counterexample(units, i, len, r, p, tuple) {
            return Some(found);
        }
        tuple.pop();
    }
    None
}

/// `v_p(C(n, k))` as the number of carries when adding `k` and `n - k` in
/// base `p`.
pub fn binomial_valuation(n: u64, k: u64, p: Prime) -> Result<u64, ScalarError> {
    if k > n {
        return Err(ScalarError::BinomialOutOfRange { n, k });
    }
    let p = p.get();
    let (mut a, mut b) = (k, n - k);
    let mut carry = 0;
    let mut carries = 0;
    while a > 0 || b > 0 || carry > 0 {
        let s = a % p + b % p + carry;
        carry = u64::from(s >= p);
        carries += carry;
        a /= p;
        b /= p;
    }
    Ok(carries)
}

/// Binomial coefficient as an exact big integer.
pub fn binomial(n: u64, k: u64) -> num_bigint::BigUint {
    if k > n {
        return num_bigint::BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = num_bigint::BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}
