//! Pluggable scalar rings: `f64`, exact rationals and multivariate polynomials
//! in the loop fugacities `x, y, l, m` and the boundary coupling `lambda`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which arithmetic a computation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RingMode {
    F64,
    Rational,
    Poly,
}

impl fmt::Display for RingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RingMode::F64 => "f64",
            RingMode::Rational => "rational",
            RingMode::Poly => "poly",
        })
    }
}

impl FromStr for RingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f64" | "float" => Ok(RingMode::F64),
            "rational" | "exact" => Ok(RingMode::Rational),
            "poly" | "polynomial" => Ok(RingMode::Poly),
            other => Err(Error::InvalidArgument(format!("unknown ring `{other}`"))),
        }
    }
}

/// Commutative ring used for transfer-matrix entries.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const RING: RingMode;

    fn from_i64(v: i64) -> Self;

    fn add_ref(&mut self, other: &Self);

    fn mul_ref(&self, other: &Self) -> Self;

    /// `self += a * b`
    fn add_mul(&mut self, a: &Self, b: &Self) {
        let p = a.mul_ref(b);
        self.add_ref(&p);
    }

    /// Canonical text form used in serialized output.
    fn render(&self) -> String;
}

impl Scalar for f64 {
    const RING: RingMode = RingMode::F64;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn add_ref(&mut self, other: &Self) {
        *self += *other;
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }

    fn render(&self) -> String {
        format!("{self:.17e}")
    }
}

impl Scalar for BigRational {
    const RING: RingMode = RingMode::Rational;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn add_ref(&mut self, other: &Self) {
        *self += other;
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn render(&self) -> String {
        self.to_string()
    }
}

/// Convenience constructor for exact rationals.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Polynomial variables, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    X,
    Y,
    L,
    M,
    Lambda,
}

pub const N_VARS: usize = 5;

impl Var {
    pub const ALL: [Var; N_VARS] = [Var::X, Var::Y, Var::L, Var::M, Var::Lambda];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::L => "l",
            Var::M => "m",
            Var::Lambda => "lambda",
        }
    }

    fn from_name(s: &str) -> Option<Var> {
        Var::ALL.into_iter().find(|v| v.name() == s)
    }
}

/// Exponent vector over [`Var::ALL`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub [u16; N_VARS]);

impl Monomial {
    pub fn one() -> Self {
        Monomial([0; N_VARS])
    }

    pub fn var(v: Var) -> Self {
        let mut e = [0; N_VARS];
        e[v.index()] = 1;
        Monomial(e)
    }

    pub fn degree(&self, v: Var) -> u16 {
        self.0[v.index()]
    }

    pub fn with_degree(mut self, v: Var, d: u16) -> Self {
        self.0[v.index()] = d;
        self
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0) {
            *a += b;
        }
        Monomial(e)
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&d| d == 0)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let mut first = true;
        for v in Var::ALL {
            let d = self.degree(v);
            if d > 0 {
                if !first {
                    f.write_str("*")?;
                }
                write!(f, "{}^{}", v.name(), d)?;
                first = false;
            }
        }
        Ok(())
    }
}

impl FromStr for Monomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "1" {
            return Ok(Monomial::one());
        }
        let mut m = Monomial::one();
        for factor in s.split('*') {
            let (name, deg) = factor
                .split_once('^')
                .ok_or_else(|| Error::Ring(format!("bad factor `{factor}`")))?;
            let v = Var::from_name(name.trim())
                .ok_or_else(|| Error::Ring(format!("unknown variable `{name}`")))?;
            let d: u16 = deg
                .trim()
                .parse()
                .map_err(|_| Error::Ring(format!("bad exponent `{deg}`")))?;
            m.0[v.index()] += d;
        }
        Ok(m)
    }
}

/// Sparse multivariate polynomial with exact rational coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn var(v: Var) -> Self {
        Poly::monomial(Monomial::var(v), BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Poly::monomial(Monomial::one(), c)
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn degree(&self, v: Var) -> u16 {
        self.terms.keys().map(|m| m.degree(v)).max().unwrap_or(0)
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..e {
            out = out.mul_ref(self);
        }
        out
    }

    fn add_term(&mut self, m: Monomial, c: &BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Groups terms by their `(l, m)` exponents; the values are polynomials in
    /// the remaining variables.
    pub fn split_lm(&self) -> BTreeMap<(u16, u16), Poly> {
        let mut out: BTreeMap<(u16, u16), Poly> = BTreeMap::new();
        for (mono, c) in &self.terms {
            let key = (mono.degree(Var::L), mono.degree(Var::M));
            let rest = mono.with_degree(Var::L, 0).with_degree(Var::M, 0);
            out.entry(key).or_default().add_term(rest, c);
        }
        out
    }

    /// All coefficients are integers.
    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    pub fn has_nonnegative_coefficients(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// Sum of all coefficients.
    pub fn coefficient_sum(&self) -> BigRational {
        self.terms.values().fold(BigRational::zero(), |acc, c| acc + c)
    }

    pub fn eval_with<T, F>(&self, vals: &[T; N_VARS], coeff: F) -> T
    where
        T: Clone + Zero + One + Mul<Output = T> + Add<Output = T>,
        F: Fn(&BigRational) -> T,
    {
        let mut acc = T::zero();
        for (mono, c) in &self.terms {
            let mut t = coeff(c);
            for v in Var::ALL {
                for _ in 0..mono.degree(v) {
                    t = t * vals[v.index()].clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    pub fn eval_f64(&self, vals: &[f64; N_VARS]) -> f64 {
        self.eval_with(vals, |c| c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn eval_complex(&self, vals: &[Complex64; N_VARS]) -> Complex64 {
        self.eval_with(vals, |c| Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0))
    }

    pub fn eval_rational(&self, vals: &[BigRational; N_VARS]) -> BigRational {
        self.eval_with(vals, |c| c.clone())
    }

    /// Replaces one variable by a polynomial.
    pub fn substitute(&self, v: Var, value: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (mono, c) in &self.terms {
            let d = mono.degree(v) as u32;
            let base = Poly::monomial(mono.with_degree(v, 0), c.clone());
            out.add_ref(&base.mul_ref(&value.pow(d)));
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                f.write_str(", ")?;
            }
            write!(f, "{m}: {c}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Poly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut p = Poly::zero();
        if s == "0" || s.is_empty() {
            return Ok(p);
        }
        for term in s.split(", ") {
            let (mono, coeff) = term
                .rsplit_once(':')
                .ok_or_else(|| Error::Ring(format!("bad term `{term}`")))?;
            let m: Monomial = mono.parse()?;
            let c: BigRational = coeff
                .trim()
                .parse()
                .map_err(|_| Error::Ring(format!("bad coefficient `{coeff}`")))?;
            p.add_term(m, &c);
        }
        Ok(p)
    }
}

impl Zero for Poly {
    fn zero() -> Self {
        Poly::default()
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Poly {
    fn one() -> Self {
        Poly::constant(BigRational::one())
    }
}

impl Add for Poly {
    type Output = Poly;

    fn add(mut self, rhs: Poly) -> Poly {
        self.add_ref(&rhs);
        self
    }
}

impl Sub for Poly {
    type Output = Poly;

    fn sub(mut self, rhs: Poly) -> Poly {
        for (m, c) in rhs.terms {
            self.add_term(m, &-c);
        }
        self
    }
}

impl Neg for Poly {
    type Output = Poly;

    fn neg(mut self) -> Poly {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Mul for Poly {
    type Output = Poly;

    fn mul(self, rhs: Poly) -> Poly {
        self.mul_ref(&rhs)
    }
}

impl From<BigRational> for Poly {
    fn from(c: BigRational) -> Self {
        Poly::constant(c)
    }
}

impl Scalar for Poly {
    const RING: RingMode = RingMode::Poly;

    fn from_i64(v: i64) -> Self {
        Poly::constant(BigRational::from_i64(v))
    }

    fn add_ref(&mut self, other: &Self) {
        for (m, c) in &other.terms {
            self.add_term(*m, c);
        }
    }

    fn mul_ref(&self, other: &Self) -> Self {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), &(ca * cb));
            }
        }
        out
    }

    fn add_mul(&mut self, a: &Self, b: &Self) {
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                self.add_term(ma.mul(mb), &(ca * cb));
            }
        }
    }

    fn render(&self) -> String {
        self.to_string()
    }
}

/// Exact binomial coefficient; zero outside `0 <= k <= n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}
