//! Numeric tower shared by every analysis.
//!
//! Scale factors and diameters enter either as exact rationals or as
//! floats. When every input of a structure is rational, the
//! combinatorial identities (matrix powers, subdivision sums) are
//! checked exactly: a [`PowerSum`] keeps a quantity of the form
//! `Σ cᵢ·bᵢ^d` as a formal object indexed by its rational bases, so two
//! routes to the same quantity are compared base by base instead of
//! through `f64` at a particular exponent. Equality of power sums is
//! equality for *every* d at once.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A numeric input: exact rational when the source data allowed it,
/// plain float otherwise. Integer JSON numbers are promoted to
/// rationals; fractional JSON numbers stay floats (the decimal the user
/// typed is rarely the rational they meant).
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Rational(BigRational),
    Float(f64),
}

impl Scalar {
    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::BadArgument("rational with zero denominator".into()));
        }
        Ok(Scalar::Rational(BigRational::new(
            BigInt::from(num),
            BigInt::from(den),
        )))
    }

    pub fn integer(n: i64) -> Self {
        Scalar::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn one() -> Self {
        Scalar::integer(1)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Float(x) => *x,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Scalar::Rational(_))
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_positive(),
            Scalar::Float(x) => *x > 0.0,
        }
    }

    /// Strictly inside (0, 1), the admissible range for inverse scale factors.
    pub fn in_open_unit_interval(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_positive() && *r < BigRational::one(),
            Scalar::Float(x) => *x > 0.0 && *x < 1.0,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Float(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RatioRepr {
    num: i64,
    den: i64,
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Rational(r) => match (r.numer().to_i64(), r.denom().to_i64()) {
                (Some(num), Some(1)) => ser.serialize_i64(num),
                (Some(num), Some(den)) => RatioRepr { num, den }.serialize(ser),
                _ => ser.serialize_f64(self.to_f64()),
            },
            Scalar::Float(x) => ser.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(de)?;
        match v {
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Scalar::integer(i))
                } else {
                    Ok(Scalar::Float(
                        n.as_f64().ok_or_else(|| D::Error::custom("bad number"))?,
                    ))
                }
            }
            serde_json::Value::Object(_) => {
                let r: RatioRepr =
                    serde_json::from_value(v).map_err(|e| D::Error::custom(e.to_string()))?;
                Scalar::ratio(r.num, r.den).map_err(|e| D::Error::custom(e.to_string()))
            }
            other => Err(D::Error::custom(format!(
                "expected number or {{\"num\", \"den\"}}, got {other}"
            ))),
        }
    }
}

/// Formal sum `Σ cᵢ·bᵢ^d` with rational coefficients over positive
/// rational bases, as a function of the exponent d. Addition merges
/// terms; multiplication convolves bases (`b₁^d·b₂^d = (b₁b₂)^d`).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PowerSum {
    terms: BTreeMap<BigRational, BigRational>,
}

impl PowerSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// `base^d` for a single positive base.
    pub fn power_of(base: BigRational) -> Result<Self> {
        if !base.is_positive() {
            return Err(Error::BadArgument(format!(
                "power sum base {base} must be positive"
            )));
        }
        let mut terms = BTreeMap::new();
        terms.insert(base, BigRational::one());
        Ok(PowerSum { terms })
    }

    /// A constant, independent of d (base 1).
    pub fn constant(c: BigRational) -> Self {
        let mut s = PowerSum::new();
        s.push(BigRational::one(), c);
        s
    }

    fn push(&mut self, base: BigRational, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(base) {
            Entry::Vacant(slot) => {
                slot.insert(coeff);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coeff;
                // drop cancelled terms so equality stays canonical
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigRational, &BigRational)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Evaluate at a concrete exponent.
    pub fn eval(&self, d: f64) -> f64 {
        self.terms
            .iter()
            .map(|(b, c)| c.to_f64().unwrap_or(f64::NAN) * b.to_f64().unwrap_or(f64::NAN).powf(d))
            .sum()
    }

    /// Value at d = 0: the plain sum of coefficients (every base^0 = 1).
    pub fn count_value(&self) -> BigRational {
        let mut total = BigRational::zero();
        for c in self.terms.values() {
            total += c;
        }
        total
    }
}

impl Add for PowerSum {
    type Output = PowerSum;
    fn add(mut self, rhs: PowerSum) -> PowerSum {
        for (b, c) in rhs.terms {
            self.push(b, c);
        }
        self
    }
}

impl AddAssign for PowerSum {
    fn add_assign(&mut self, rhs: PowerSum) {
        for (b, c) in rhs.terms {
            self.push(b, c);
        }
    }
}

impl Mul for PowerSum {
    type Output = PowerSum;
    fn mul(self, rhs: PowerSum) -> PowerSum {
        &self * &rhs
    }
}

impl Mul for &PowerSum {
    type Output = PowerSum;
    fn mul(self, rhs: &PowerSum) -> PowerSum {
        let mut out = PowerSum::new();
        for (b1, c1) in &self.terms {
            for (b2, c2) in &rhs.terms {
                out.push(b1 * b2, c1 * c2);
            }
        }
        out
    }
}

impl Zero for PowerSum {
    fn zero() -> Self {
        PowerSum::new()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for PowerSum {
    fn one() -> Self {
        PowerSum::constant(BigRational::one())
    }
}

impl fmt::Display for PowerSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // largest base first reads naturally: (1/3)^d + (1/7)^d
        for (i, (b, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let base = if b.is_integer() {
                format!("{}", b.numer())
            } else {
                format!("{}/{}", b.numer(), b.denom())
            };
            if b.is_one() {
                write!(f, "{}", Scalar::Rational(c.clone()))?;
            } else if c.is_one() {
                write!(f, "({base})^d")?;
            } else {
                write!(f, "{}*({base})^d", Scalar::Rational(c.clone()))?;
            }
        }
        Ok(())
    }
}

/// Dense square matrix over any semiring-ish scalar. Row-major; only
/// the handful of operations the spectral analyses need.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Mat<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Clone + Zero + Add<Output = T>> Mat<T> {
    pub fn zero(n: usize) -> Self {
        Mat {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "square matrix required");
        Mat {
            n,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.n + j]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Mat::zero(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                *t.at_mut(j, i) = self.at(i, j).clone();
            }
        }
        t
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.at(i, j).clone()).collect())
            .collect()
    }
}

impl<T> Mat<T>
where
    T: Clone + Zero + Add<Output = T>,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    pub fn mul_mat(&self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!(self.n, rhs.n);
        let mut out: Mat<T> = Mat::zero(self.n);
        for i in 0..self.n {
            for k in 0..self.n {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..self.n {
                    let add = a * rhs.at(k, j);
                    let cur = out.at(i, j).clone();
                    *out.at_mut(i, j) = cur + add;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| {
                let mut acc = T::zero();
                for (j, x) in v.iter().enumerate() {
                    acc = acc + self.at(i, j) * x;
                }
                acc
            })
            .collect()
    }
}

impl<T> Mat<T>
where
    T: Clone + Zero + One + Add<Output = T>,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zero(n);
        for i in 0..n {
            *m.at_mut(i, i) = T::one();
        }
        m
    }

    pub fn pow(&self, k: usize) -> Mat<T> {
        let mut out = Mat::identity(self.n);
        for _ in 0..k {
            out = out.mul_mat(self);
        }
        out
    }
}
