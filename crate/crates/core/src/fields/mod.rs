//! The supported tower of fields and exact element arithmetic.
//!
//! A [`Field`] is a cheap, shareable handle to an immutable [`FieldDesc`].
//! Elements carry their owner, so arithmetic between elements of different
//! fields is rejected. Internally all arithmetic runs on the raw [`Repr`]
//! payload with the owning field passed as context.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

mod bivar;
mod display;
pub mod factor;
pub mod place;
pub mod poly;
pub mod twovar;

pub use factor::{factor_poly, is_irreducible, Factorization};
pub use place::{Intrinsic, Place, PlaceKind, Valuation};
pub use poly::PolyR;

/// Raw element payload. Its meaning depends on the owning field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Repr {
    /// Residue in a prime field, in `0..p`.
    Int(u64),
    /// Element of a finite extension: polynomial over the base of degree
    /// below the modulus degree.
    Poly(Vec<Repr>),
    /// Exact rational, read p-adically.
    Rat(BigRational),
    /// `t^val * (c_0 + c_1 t + ...)` with `c_0 != 0`; zero has no coefficients.
    Laurent { val: i64, coeffs: Vec<Repr> },
    /// Reduced fraction with monic denominator.
    Frac { num: Vec<Repr>, den: Vec<Repr> },
    /// Sparse bivariate polynomial keyed by `(deg_x1, deg_x2)`.
    Bivar(BTreeMap<(u32, u32), Repr>),
}

/// A natural number, infinity or an unknown value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Count {
    Finite(u64),
    Infinite,
    Unknown,
}

impl Count {
    pub fn finite(&self) -> Option<u64> {
        match self {
            Count::Finite(n) => Some(*n),
            _ => None,
        }
    }

    fn doubled(&self) -> Count {
        match self {
            Count::Finite(n) => Count::Finite(2 * n),
            c => *c,
        }
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Finite(n) => write!(f, "{n}"),
            Count::Infinite => write!(f, "inf"),
            Count::Unknown => write!(f, "unknown"),
        }
    }
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Count::Finite(n) => s.serialize_u64(*n),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

/// Cached invariants of a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Profile {
    pub u: Count,
    pub m: Count,
    /// The `i` with the field in the class A_i(2), when known.
    pub a2_index: Option<u32>,
    pub square_classes: Count,
}

#[derive(Debug, PartialEq, Eq, Hash)]
pub struct FiniteData {
    pub p: u64,
    /// `None` for the prime field.
    pub base: Option<Field>,
    /// Monic modulus over the base (empty for the prime field).
    pub modulus: Vec<Repr>,
    /// Name of the generator (the class of the variable of the modulus).
    pub gen: String,
    pub order: u128,
    /// Degree over the prime field.
    pub degree: u32,
}

#[derive(Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Finite(FiniteData),
    PAdic { p: u64, residue: Field },
    Laurent { base: Field, var: String },
    RationalFunction { base: Field, var: String },
    TwoVar { base: Field, x1: String, x2: String },
}

#[derive(Debug, PartialEq, Eq, Hash)]
pub struct FieldDesc {
    pub kind: FieldKind,
    pub profile: Profile,
}

/// Shared handle to a field descriptor.
#[derive(Clone)]
pub struct Field(Arc<FieldDesc>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}
impl Eq for Field {}

impl Hash for Field {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({self})")
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn check_odd_prime(p: u64) -> Result<()> {
    if p == 2 {
        return Err(Error::EvenCharacteristic);
    }
    if !is_prime(p) {
        return Err(Error::CompositeP(p));
    }
    Ok(())
}

impl Field {
    fn build(kind: FieldKind, profile: Profile) -> Field {
        Field(Arc::new(FieldDesc { kind, profile }))
    }

    /// The prime field `F_p`.
    pub fn finite(p: u64) -> Result<Field> {
        check_odd_prime(p)?;
        Ok(Self::prime_unchecked(p))
    }

    fn prime_unchecked(p: u64) -> Field {
        Self::build(
            FieldKind::Finite(FiniteData {
                p,
                base: None,
                modulus: Vec::new(),
                gen: String::new(),
                order: p as u128,
                degree: 1,
            }),
            Profile {
                u: Count::Finite(2),
                m: Count::Finite(2),
                a2_index: Some(1),
                square_classes: Count::Finite(2),
            },
        )
    }

    /// `F_{p^d}` presented over `F_p` by the lexicographically smallest
    /// monic irreducible of degree `d`, with generator `z`.
    pub fn finite_ext(p: u64, d: u32) -> Result<Field> {
        check_odd_prime(p)?;
        let fp = Self::prime_unchecked(p);
        if d == 1 {
            return Ok(fp);
        }
        if d == 0 {
            return Err(Error::OutOfRange("extension degree must be at least 1".into()));
        }
        let modulus = factor::smallest_irreducible(&fp, d as usize)?;
        Self::extension_unchecked(&fp, modulus, "z")
    }

    /// Finite extension of a finite field by a monic irreducible modulus.
    pub fn extension(base: &Field, modulus: PolyR, gen: &str) -> Result<Field> {
        if !base.is_finite() {
            return Err(Error::UnsupportedField("extension base must be finite".into()));
        }
        let (_, monic) = poly::monic(base, &modulus)?;
        if !is_irreducible(base, &monic)? {
            return Err(Error::UnsupportedShape("extension modulus is reducible".into()));
        }
        Self::extension_unchecked(base, monic, gen)
    }

    pub(crate) fn extension_unchecked(base: &Field, modulus: PolyR, gen: &str) -> Result<Field> {
        let bd = base.finite_data().expect("finite base");
        let d = (modulus.len() - 1) as u32;
        if d == 1 {
            return Ok(base.clone());
        }
        let order = bd
            .order
            .checked_pow(d)
            .filter(|o| *o < (1u128 << 120))
            .ok_or_else(|| Error::UnsupportedField("finite field too large".into()))?;
        if base.generator_names().iter().any(|g| g == gen) {
            return Err(Error::UnsupportedField(format!("generator name {gen} already used")));
        }
        Ok(Self::build(
            FieldKind::Finite(FiniteData {
                p: bd.p,
                base: Some(base.clone()),
                modulus,
                gen: gen.to_string(),
                order,
                degree: bd.degree * d,
            }),
            base.profile(),
        ))
    }

    /// The p-adic numbers, with elements represented by exact rationals.
    pub fn padic(p: u64) -> Result<Field> {
        check_odd_prime(p)?;
        Ok(Self::build(
            FieldKind::PAdic {
                p,
                residue: Self::prime_unchecked(p),
            },
            Profile {
                u: Count::Finite(4),
                m: Count::Finite(4),
                a2_index: Some(2),
                square_classes: Count::Finite(4),
            },
        ))
    }

    /// Laurent series field `base((var))`, elements restricted to finite
    /// Laurent polynomials.
    pub fn laurent(base: &Field, var: &str) -> Result<Field> {
        if matches!(base.kind(), FieldKind::TwoVar { .. }) {
            return Err(Error::UnsupportedField("Laurent field over a two-variable field".into()));
        }
        base.check_fresh(var)?;
        let bp = base.profile();
        Ok(Self::build(
            FieldKind::Laurent {
                base: base.clone(),
                var: var.to_string(),
            },
            Profile {
                u: bp.u.doubled(),
                m: bp.m.doubled(),
                a2_index: bp.a2_index.map(|i| i + 1),
                square_classes: bp.square_classes.doubled(),
            },
        ))
    }

    /// Rational function field over a finite field.
    pub fn rational_function(base: &Field, var: &str) -> Result<Field> {
        if !base.is_finite() {
            return Err(Error::UnsupportedField(
                "rational function fields are supported over finite fields only".into(),
            ));
        }
        base.check_fresh(var)?;
        Ok(Self::build(
            FieldKind::RationalFunction {
                base: base.clone(),
                var: var.to_string(),
            },
            Profile {
                u: Count::Finite(4),
                m: Count::Finite(4),
                a2_index: Some(2),
                square_classes: Count::Infinite,
            },
        ))
    }

    /// `F_q(x1, x2)`; elements are polynomials in `x1`, `x2`.
    pub fn two_var(base: &Field, x1: &str, x2: &str) -> Result<Field> {
        if !base.is_finite() {
            return Err(Error::UnsupportedField("two-variable base must be finite".into()));
        }
        base.check_fresh(x1)?;
        base.check_fresh(x2)?;
        if x1 == x2 {
            return Err(Error::UnsupportedField("variables must differ".into()));
        }
        Ok(Self::build(
            FieldKind::TwoVar {
                base: base.clone(),
                x1: x1.to_string(),
                x2: x2.to_string(),
            },
            Profile {
                u: Count::Finite(8),
                m: Count::Unknown,
                a2_index: Some(3),
                square_classes: Count::Infinite,
            },
        ))
    }

    fn check_fresh(&self, var: &str) -> Result<()> {
        if var.is_empty() || !var.chars().next().unwrap().is_ascii_alphabetic() {
            return Err(Error::Parse(format!("invalid variable name {var:?}")));
        }
        if self.generator_names().iter().any(|g| g == var) {
            return Err(Error::UnsupportedField(format!("variable {var} already used")));
        }
        Ok(())
    }

    pub fn desc(&self) -> &FieldDesc {
        &self.0
    }

    pub fn kind(&self) -> &FieldKind {
        &self.0.kind
    }

    pub fn profile(&self) -> Profile {
        self.0.profile
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind(), FieldKind::Finite(_))
    }

    pub fn finite_data(&self) -> Option<&FiniteData> {
        match self.kind() {
            FieldKind::Finite(d) => Some(d),
            _ => None,
        }
    }

    /// Base field of a Laurent, rational function, two-variable or
    /// extension field.
    pub fn base(&self) -> Option<&Field> {
        match self.kind() {
            FieldKind::Finite(d) => d.base.as_ref(),
            FieldKind::PAdic { .. } => None,
            FieldKind::Laurent { base, .. }
            | FieldKind::RationalFunction { base, .. }
            | FieldKind::TwoVar { base, .. } => Some(base),
        }
    }

    pub fn characteristic(&self) -> u64 {
        match self.kind() {
            FieldKind::Finite(d) => d.p,
            FieldKind::PAdic { .. } => 0,
            FieldKind::Laurent { base, .. }
            | FieldKind::RationalFunction { base, .. }
            | FieldKind::TwoVar { base, .. } => base.characteristic(),
        }
    }

    /// Names of all generators available in the tower, outermost first.
    pub fn generator_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self.kind() {
            FieldKind::Finite(d) => {
                if d.base.is_some() {
                    out.push(d.gen.clone());
                }
            }
            FieldKind::PAdic { .. } => {}
            FieldKind::Laurent { var, .. } | FieldKind::RationalFunction { var, .. } => {
                out.push(var.clone())
            }
            FieldKind::TwoVar { x1, x2, .. } => {
                out.push(x1.clone());
                out.push(x2.clone());
            }
        }
        if let Some(b) = self.base() {
            out.extend(b.generator_names());
        }
        out
    }

    // ----- raw arithmetic -------------------------------------------------

    pub fn zero_r(&self) -> Repr {
        match self.kind() {
            FieldKind::Finite(d) => {
                if d.base.is_none() {
                    Repr::Int(0)
                } else {
                    Repr::Poly(Vec::new())
                }
            }
            FieldKind::PAdic { .. } => Repr::Rat(BigRational::zero()),
            FieldKind::Laurent { .. } => Repr::Laurent {
                val: 0,
                coeffs: Vec::new(),
            },
            FieldKind::RationalFunction { base, .. } => Repr::Frac {
                num: Vec::new(),
                den: poly::one(base),
            },
            FieldKind::TwoVar { .. } => Repr::Bivar(BTreeMap::new()),
        }
    }

    pub fn one_r(&self) -> Repr {
        self.from_i64_r(1)
    }

    pub fn is_zero_r(&self, a: &Repr) -> bool {
        match a {
            Repr::Int(n) => *n == 0,
            Repr::Poly(c) => c.is_empty(),
            Repr::Rat(r) => r.is_zero(),
            Repr::Laurent { coeffs, .. } => coeffs.is_empty(),
            Repr::Frac { num, .. } => num.is_empty(),
            Repr::Bivar(m) => m.is_empty(),
        }
    }

    pub fn from_i64_r(&self, n: i64) -> Repr {
        match self.kind() {
            FieldKind::Finite(d) => match &d.base {
                None => Repr::Int(n.rem_euclid(d.p as i64) as u64),
                Some(b) => Repr::Poly(poly::constant(b, b.from_i64_r(n))),
            },
            FieldKind::PAdic { .. } => Repr::Rat(BigRational::from_integer(BigInt::from(n))),
            _ => {
                let b = self.base().unwrap();
                self.embed_base_r(b.from_i64_r(n))
            }
        }
    }

    /// Image of a base-field payload as a constant of this field.
    pub fn embed_base_r(&self, r: Repr) -> Repr {
        match self.kind() {
            FieldKind::Finite(d) => {
                let b = d.base.as_ref().expect("extension field");
                Repr::Poly(poly::constant(b, r))
            }
            FieldKind::PAdic { .. } => panic!("Q_p has no base field"),
            FieldKind::Laurent { base, .. } => {
                if base.is_zero_r(&r) {
                    self.zero_r()
                } else {
                    Repr::Laurent {
                        val: 0,
                        coeffs: vec![r],
                    }
                }
            }
            FieldKind::RationalFunction { base, .. } => Repr::Frac {
                num: poly::constant(base, r),
                den: poly::one(base),
            },
            FieldKind::TwoVar { base, .. } => {
                let mut m = BTreeMap::new();
                if !base.is_zero_r(&r) {
                    m.insert((0, 0), r);
                }
                Repr::Bivar(m)
            }
        }
    }

    pub fn add_r(&self, a: &Repr, b: &Repr) -> Repr {
        match (self.kind(), a, b) {
            (FieldKind::Finite(d), Repr::Int(x), Repr::Int(y)) => {
                let s = x + y;
                Repr::Int(if s >= d.p { s - d.p } else { s })
            }
            (FieldKind::Finite(d), Repr::Poly(x), Repr::Poly(y)) => {
                Repr::Poly(poly::add(d.base.as_ref().unwrap(), x, y))
            }
            (FieldKind::PAdic { .. }, Repr::Rat(x), Repr::Rat(y)) => Repr::Rat(x + y),
            (FieldKind::Laurent { base, .. }, Repr::Laurent { val: v1, coeffs: c1 }, Repr::Laurent { val: v2, coeffs: c2 }) => {
                laurent_add(base, *v1, c1, *v2, c2)
            }
            (FieldKind::RationalFunction { base, .. }, Repr::Frac { num: n1, den: d1 }, Repr::Frac { num: n2, den: d2 }) => {
                if d1 == d2 {
                    return frac_normalize(base, poly::add(base, n1, n2), d1.clone());
                }
                let num = poly::add(base, &poly::mul(base, n1, d2), &poly::mul(base, n2, d1));
                frac_normalize(base, num, poly::mul(base, d1, d2))
            }
            (FieldKind::TwoVar { base, .. }, Repr::Bivar(x), Repr::Bivar(y)) => {
                Repr::Bivar(bivar::add(base, x, y))
            }
            _ => panic!("representation does not match field {self}"),
        }
    }

    pub fn neg_r(&self, a: &Repr) -> Repr {
        match (self.kind(), a) {
            (FieldKind::Finite(d), Repr::Int(x)) => Repr::Int(if *x == 0 { 0 } else { d.p - x }),
            (FieldKind::Finite(d), Repr::Poly(x)) => Repr::Poly(poly::neg(d.base.as_ref().unwrap(), x)),
            (FieldKind::PAdic { .. }, Repr::Rat(x)) => Repr::Rat(-x),
            (FieldKind::Laurent { base, .. }, Repr::Laurent { val, coeffs }) => Repr::Laurent {
                val: *val,
                coeffs: poly::neg(base, coeffs),
            },
            (FieldKind::RationalFunction { base, .. }, Repr::Frac { num, den }) => Repr::Frac {
                num: poly::neg(base, num),
                den: den.clone(),
            },
            (FieldKind::TwoVar { base, .. }, Repr::Bivar(x)) => {
                Repr::Bivar(x.iter().map(|(k, c)| (*k, base.neg_r(c))).collect())
            }
            _ => panic!("representation does not match field {self}"),
        }
    }

    pub fn sub_r(&self, a: &Repr, b: &Repr) -> Repr {
        self.add_r(a, &self.neg_r(b))
    }

    pub fn mul_r(&self, a: &Repr, b: &Repr) -> Repr {
        match (self.kind(), a, b) {
            (FieldKind::Finite(d), Repr::Int(x), Repr::Int(y)) => {
                Repr::Int(((*x as u128 * *y as u128) % d.p as u128) as u64)
            }
            (FieldKind::Finite(d), Repr::Poly(x), Repr::Poly(y)) => {
                let b = d.base.as_ref().unwrap();
                Repr::Poly(poly::mulmod(b, x, y, &d.modulus))
            }
            (FieldKind::PAdic { .. }, Repr::Rat(x), Repr::Rat(y)) => Repr::Rat(x * y),
            (FieldKind::Laurent { base, .. }, Repr::Laurent { val: v1, coeffs: c1 }, Repr::Laurent { val: v2, coeffs: c2 }) => {
                let coeffs = poly::mul(base, c1, c2);
                if coeffs.is_empty() {
                    self.zero_r()
                } else {
                    Repr::Laurent {
                        val: v1 + v2,
                        coeffs,
                    }
                }
            }
            (FieldKind::RationalFunction { base, .. }, Repr::Frac { num: n1, den: d1 }, Repr::Frac { num: n2, den: d2 }) => {
                frac_normalize(base, poly::mul(base, n1, n2), poly::mul(base, d1, d2))
            }
            (FieldKind::TwoVar { base, .. }, Repr::Bivar(x), Repr::Bivar(y)) => {
                Repr::Bivar(bivar::mul(base, x, y))
            }
            _ => panic!("representation does not match field {self}"),
        }
    }

    pub fn inv_r(&self, a: &Repr) -> Result<Repr> {
        if self.is_zero_r(a) {
            return Err(Error::DivisionByZero);
        }
        Ok(match (self.kind(), a) {
            (FieldKind::Finite(d), Repr::Int(x)) => Repr::Int(inv_mod(*x, d.p)),
            (FieldKind::Finite(d), Repr::Poly(x)) => {
                let b = d.base.as_ref().unwrap();
                let (g, s, _) = poly::ext_gcd(b, x, &d.modulus)?;
                debug_assert!(poly::is_one(b, &g));
                Repr::Poly(s)
            }
            (FieldKind::PAdic { .. }, Repr::Rat(x)) => Repr::Rat(x.recip()),
            (FieldKind::Laurent { base, .. }, Repr::Laurent { val, coeffs }) => {
                if coeffs.len() != 1 {
                    return Err(Error::DivisionUnrepresentable(
                        "Laurent division by a non-monomial".into(),
                    ));
                }
                Repr::Laurent {
                    val: -val,
                    coeffs: vec![base.inv_r(&coeffs[0])?],
                }
            }
            (FieldKind::RationalFunction { base, .. }, Repr::Frac { num, den }) => {
                frac_normalize(base, den.clone(), num.clone())
            }
            (FieldKind::TwoVar { base, .. }, Repr::Bivar(x)) => {
                if x.len() != 1 || !x.contains_key(&(0, 0)) {
                    return Err(Error::DivisionUnrepresentable(
                        "two-variable division by a non-constant".into(),
                    ));
                }
                let mut m = BTreeMap::new();
                m.insert((0, 0), base.inv_r(&x[&(0, 0)])?);
                Repr::Bivar(m)
            }
            _ => panic!("representation does not match field {self}"),
        })
    }

    pub fn pow_r(&self, a: &Repr, mut e: u128) -> Repr {
        let mut acc = self.one_r();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_r(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul_r(&base, &base);
            }
        }
        acc
    }

    // ----- elements -------------------------------------------------------

    pub fn elem(&self, repr: Repr) -> Elem {
        Elem {
            field: self.clone(),
            repr,
        }
    }

    pub fn zero(&self) -> Elem {
        self.elem(self.zero_r())
    }

    pub fn one(&self) -> Elem {
        self.elem(self.one_r())
    }

    pub fn int(&self, n: i64) -> Elem {
        self.elem(self.from_i64_r(n))
    }

    pub fn from_bigint(&self, n: &BigInt) -> Elem {
        match self.kind() {
            FieldKind::PAdic { .. } => self.elem(Repr::Rat(BigRational::from_integer(n.clone()))),
            _ => {
                let p = BigInt::from(self.characteristic());
                let r = n.mod_floor(&p).to_i64().expect("reduced below p");
                self.int(r)
            }
        }
    }

    /// A rational number; only Q_p and fields whose characteristic does not
    /// divide the denominator accept it.
    pub fn rational(&self, num: i64, den: i64) -> Result<Elem> {
        let n = self.int(num);
        let d = self.int(den);
        n.div(&d)
    }

    /// Generator of the tower by name, embedded into this field.
    pub fn gen(&self, name: &str) -> Result<Elem> {
        let r = self.gen_r(name).ok_or_else(|| Error::Parse(format!("unknown generator {name}")))?;
        Ok(self.elem(r))
    }

    fn gen_r(&self, name: &str) -> Option<Repr> {
        match self.kind() {
            FieldKind::Finite(d) => {
                let b = d.base.as_ref()?;
                if d.gen == name {
                    return Some(Repr::Poly(poly::x(b)));
                }
                b.gen_r(name).map(|r| self.embed_base_r(r))
            }
            FieldKind::PAdic { .. } => None,
            FieldKind::Laurent { base, var } => {
                if var == name {
                    return Some(Repr::Laurent {
                        val: 1,
                        coeffs: vec![base.one_r()],
                    });
                }
                base.gen_r(name).map(|r| self.embed_base_r(r))
            }
            FieldKind::RationalFunction { base, var } => {
                if var == name {
                    return Some(Repr::Frac {
                        num: poly::x(base),
                        den: poly::one(base),
                    });
                }
                base.gen_r(name).map(|r| self.embed_base_r(r))
            }
            FieldKind::TwoVar { base, x1, x2 } => {
                let key = if x1 == name {
                    (1, 0)
                } else if x2 == name {
                    (0, 1)
                } else {
                    return base.gen_r(name).map(|r| self.embed_base_r(r));
                };
                let mut m = BTreeMap::new();
                m.insert(key, base.one_r());
                Some(Repr::Bivar(m))
            }
        }
    }

    /// Embed an element of the base field.
    pub fn embed(&self, a: &Elem) -> Result<Elem> {
        match self.base() {
            Some(b) if b == a.field() => Ok(self.elem(self.embed_base_r(a.repr.clone()))),
            _ => Err(Error::MixedFields),
        }
    }

    /// The intrinsic uniformizer of Q_p or a Laurent field.
    pub fn uniformizer(&self) -> Result<Elem> {
        match self.kind() {
            FieldKind::PAdic { p, .. } => Ok(self.int(*p as i64)),
            FieldKind::Laurent { base, .. } => Ok(self.elem(Repr::Laurent {
                val: 1,
                coeffs: vec![base.one_r()],
            })),
            _ => Err(Error::UnsupportedField(format!("{self} has no intrinsic valuation"))),
        }
    }

    /// Residue field of the intrinsic valuation.
    pub fn residue_field(&self) -> Result<Field> {
        match self.kind() {
            FieldKind::PAdic { residue, .. } => Ok(residue.clone()),
            FieldKind::Laurent { base, .. } => Ok(base.clone()),
            _ => Err(Error::UnsupportedField(format!("{self} has no intrinsic valuation"))),
        }
    }

    /// Canonical lift of a residue-field element to a unit.
    pub fn lift_residue(&self, r: &Elem) -> Result<Elem> {
        match self.kind() {
            FieldKind::PAdic { residue, .. } if residue == r.field() => match r.repr {
                Repr::Int(n) => Ok(self.int(n as i64)),
                _ => unreachable!(),
            },
            FieldKind::Laurent { base, .. } if base == r.field() => {
                Ok(self.elem(self.embed_base_r(r.repr.clone())))
            }
            _ => Err(Error::MixedFields),
        }
    }

    // ----- finite fields --------------------------------------------------

    /// Element of a finite field with the given enumeration index
    /// (digits in base `q_base` give the coefficients).
    pub fn finite_from_index(&self, n: u128) -> Repr {
        let d = self.finite_data().expect("finite field");
        match &d.base {
            None => Repr::Int((n % d.p as u128) as u64),
            Some(b) => {
                let q = b.finite_data().unwrap().order;
                let mut coeffs = Vec::new();
                let mut n = n;
                for _ in 0..(d.modulus.len() - 1) {
                    coeffs.push(b.finite_from_index(n % q));
                    n /= q;
                }
                Repr::Poly(poly::trim(b, coeffs))
            }
        }
    }

    pub fn finite_index(&self, r: &Repr) -> u128 {
        let d = self.finite_data().expect("finite field");
        match (&d.base, r) {
            (None, Repr::Int(n)) => *n as u128,
            (Some(b), Repr::Poly(c)) => {
                let q = b.finite_data().unwrap().order;
                c.iter().rev().fold(0u128, |acc, x| acc * q + b.finite_index(x))
            }
            _ => panic!("representation does not match field"),
        }
    }

    /// All elements of a finite field in enumeration order.
    pub fn finite_elements(&self) -> Result<Vec<Elem>> {
        let d = self.finite_data().ok_or(Error::UnsupportedField("not finite".into()))?;
        if d.order > 1 << 20 {
            return Err(Error::UnsupportedField("finite field too large to enumerate".into()));
        }
        Ok((0..d.order).map(|n| self.elem(self.finite_from_index(n))).collect())
    }

    /// A nonsquare unit: the first in enumeration order for finite fields,
    /// the least positive non-residue for Q_p, the base's for Laurent fields.
    pub fn canonical_nonsquare(&self) -> Result<Elem> {
        match self.kind() {
            FieldKind::Finite(d) => {
                for n in 1..d.order {
                    let e = self.elem(self.finite_from_index(n));
                    if !e.is_square()? {
                        return Ok(e);
                    }
                }
                unreachable!("odd order finite fields have nonsquares")
            }
            FieldKind::PAdic { p, residue } => {
                let nu = residue.canonical_nonsquare()?;
                match nu.repr {
                    Repr::Int(n) => {
                        debug_assert!(n < *p);
                        Ok(self.int(n as i64))
                    }
                    _ => unreachable!(),
                }
            }
            FieldKind::Laurent { base, .. } => {
                let nu = base.canonical_nonsquare()?;
                self.embed(&nu)
            }
            _ => Err(Error::InfiniteSquareClassGroup),
        }
    }

    /// Representatives of the square classes in canonical order: 1, the
    /// nonsquare unit(s), then uniformizer multiples.
    pub fn square_class_reps(&self) -> Result<Vec<Elem>> {
        match self.kind() {
            FieldKind::Finite(_) => Ok(vec![self.one(), self.canonical_nonsquare()?]),
            FieldKind::PAdic { p, .. } => {
                let nu = self.canonical_nonsquare()?;
                let pe = self.int(*p as i64);
                Ok(vec![self.one(), nu.clone(), pe.clone(), &nu * &pe])
            }
            FieldKind::Laurent { base, .. } => {
                let inner = base.square_class_reps()?;
                let t = self.uniformizer()?;
                let units: Vec<Elem> = inner.iter().map(|e| self.embed(e).unwrap()).collect();
                let mut out = units.clone();
                out.extend(units.iter().map(|u| u * &t));
                Ok(out)
            }
            _ => Err(Error::InfiniteSquareClassGroup),
        }
    }
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, a as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1);
    t.rem_euclid(p as i128) as u64
}

fn laurent_add(base: &Field, v1: i64, c1: &[Repr], v2: i64, c2: &[Repr]) -> Repr {
    if c1.is_empty() {
        return Repr::Laurent {
            val: v2,
            coeffs: c2.to_vec(),
        };
    }
    if c2.is_empty() {
        return Repr::Laurent {
            val: v1,
            coeffs: c1.to_vec(),
        };
    }
    let v = v1.min(v2);
    let a = poly::shift(base, c1, (v1 - v) as usize);
    let b = poly::shift(base, c2, (v2 - v) as usize);
    laurent_normalize(base, v, poly::add(base, &a, &b))
}

pub(crate) fn laurent_normalize(base: &Field, mut val: i64, coeffs: Vec<Repr>) -> Repr {
    let coeffs = poly::trim(base, coeffs);
    let lead = coeffs.iter().take_while(|c| base.is_zero_r(c)).count();
    if lead == coeffs.len() {
        return Repr::Laurent {
            val: 0,
            coeffs: Vec::new(),
        };
    }
    val += lead as i64;
    Repr::Laurent {
        val,
        coeffs: coeffs[lead..].to_vec(),
    }
}

pub(crate) fn frac_normalize(base: &Field, num: PolyR, den: PolyR) -> Repr {
    if num.is_empty() {
        return Repr::Frac {
            num,
            den: poly::one(base),
        };
    }
    let g = poly::gcd(base, &num, &den);
    let (num, den) = if poly::is_one(base, &g) {
        (num, den)
    } else {
        (
            poly::div_exact(base, &num, &g).unwrap(),
            poly::div_exact(base, &den, &g).unwrap(),
        )
    };
    let lc = den.last().expect("nonzero denominator").clone();
    if lc == base.one_r() {
        return Repr::Frac { num, den };
    }
    let inv = base.inv_r(&lc).unwrap();
    Repr::Frac {
        num: poly::scale(base, &inv, &num),
        den: poly::scale(base, &inv, &den),
    }
}

/// An exact element of a supported field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Elem {
    field: Field,
    repr: Repr,
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Elem {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn is_zero(&self) -> bool {
        self.field.is_zero_r(&self.repr)
    }

    pub fn is_one(&self) -> bool {
        self.repr == self.field.one_r()
    }

    fn same(&self, o: &Elem) -> Result<()> {
        if self.field == o.field {
            Ok(())
        } else {
            Err(Error::MixedFields)
        }
    }

    pub fn try_add(&self, o: &Elem) -> Result<Elem> {
        self.same(o)?;
        Ok(self.field.elem(self.field.add_r(&self.repr, &o.repr)))
    }

    pub fn try_sub(&self, o: &Elem) -> Result<Elem> {
        self.same(o)?;
        Ok(self.field.elem(self.field.sub_r(&self.repr, &o.repr)))
    }

    pub fn try_mul(&self, o: &Elem) -> Result<Elem> {
        self.same(o)?;
        Ok(self.field.elem(self.field.mul_r(&self.repr, &o.repr)))
    }

    pub fn div(&self, o: &Elem) -> Result<Elem> {
        self.same(o)?;
        let inv = self.field.inv_r(&o.repr)?;
        Ok(self.field.elem(self.field.mul_r(&self.repr, &inv)))
    }

    pub fn inv(&self) -> Result<Elem> {
        Ok(self.field.elem(self.field.inv_r(&self.repr)?))
    }

    pub fn pow(&self, e: i64) -> Result<Elem> {
        let b = if e < 0 { self.inv()? } else { self.clone() };
        Ok(self.field.elem(self.field.pow_r(&b.repr, e.unsigned_abs() as u128)))
    }

    /// Whether the element is a nonzero square in its field.
    pub fn is_square(&self) -> Result<bool> {
        if self.is_zero() {
            return Err(Error::ZeroElement);
        }
        match self.field.kind() {
            FieldKind::Finite(d) => {
                Ok(self.field.pow_r(&self.repr, (d.order - 1) / 2) == self.field.one_r())
            }
            FieldKind::PAdic { .. } | FieldKind::Laurent { .. } => {
                let v = self.valuation()?;
                Ok(v % 2 == 0 && self.unit_residue()?.is_square()?)
            }
            FieldKind::RationalFunction { base, .. } => {
                let Repr::Frac { num, den } = &self.repr else { unreachable!() };
                let prod = poly::mul(base, num, den);
                let f = factor_poly(base, &prod)?;
                Ok(f.factors.iter().all(|(_, m)| m % 2 == 0)
                    && base.elem(f.unit.clone()).is_square()?)
            }
            FieldKind::TwoVar { base, .. } => {
                let Repr::Bivar(m) = &self.repr else { unreachable!() };
                bivar::is_square(base, m)
            }
        }
    }

    /// Intrinsic valuation of a Q_p or Laurent element.
    pub fn valuation(&self) -> Result<i64> {
        if self.is_zero() {
            return Err(Error::ZeroElement);
        }
        match (self.field.kind(), &self.repr) {
            (FieldKind::PAdic { p, .. }, Repr::Rat(r)) => Ok(padic_split(r, *p).0),
            (FieldKind::Laurent { .. }, Repr::Laurent { val, .. }) => Ok(*val),
            _ => Err(Error::UnsupportedField(format!(
                "{} has no intrinsic valuation; use a place",
                self.field
            ))),
        }
    }

    /// Residue of `a / pi^{v(a)}` for the intrinsic valuation.
    pub fn unit_residue(&self) -> Result<Elem> {
        if self.is_zero() {
            return Err(Error::ZeroElement);
        }
        match (self.field.kind(), &self.repr) {
            (FieldKind::PAdic { p, residue }, Repr::Rat(r)) => {
                let (_, n, d) = padic_split(r, *p);
                let pb = BigInt::from(*p);
                let nm = n.mod_floor(&pb).to_u64().unwrap();
                let dm = d.mod_floor(&pb).to_u64().unwrap();
                Ok(residue.elem(Repr::Int(
                    ((nm as u128 * inv_mod(dm, *p) as u128) % *p as u128) as u64,
                )))
            }
            (FieldKind::Laurent { base, .. }, Repr::Laurent { coeffs, .. }) => {
                Ok(base.elem(coeffs[0].clone()))
            }
            _ => Err(Error::UnsupportedField(format!(
                "{} has no intrinsic valuation; use a place",
                self.field
            ))),
        }
    }

    /// Residue of a unit for the intrinsic valuation.
    pub fn residue(&self) -> Result<Elem> {
        if self.valuation()? != 0 {
            return Err(Error::NotAUnit);
        }
        self.unit_residue()
    }
}

/// Split a nonzero rational as `p^v * n / d` with `p` dividing neither.
pub(crate) fn padic_split(r: &BigRational, p: u64) -> (i64, BigInt, BigInt) {
    let pb = BigInt::from(p);
    let mut v = 0i64;
    let mut n = r.numer().clone();
    let mut d = r.denom().clone();
    while (&n % &pb).is_zero() {
        n /= &pb;
        v += 1;
    }
    while (&d % &pb).is_zero() {
        d /= &pb;
        v -= 1;
    }
    if d.is_negative() {
        n = -n;
        d = -d;
    }
    (v, n, d)
}

macro_rules! binop {
    ($tr:ident, $m:ident, $raw:ident) => {
        impl std::ops::$tr<&Elem> for &Elem {
            type Output = Elem;
            fn $m(self, o: &Elem) -> Elem {
                assert!(self.field == o.field, "operands belong to different fields");
                self.field.elem(self.field.$raw(&self.repr, &o.repr))
            }
        }
        impl std::ops::$tr<Elem> for Elem {
            type Output = Elem;
            fn $m(self, o: Elem) -> Elem {
                (&self).$m(&o)
            }
        }
        impl std::ops::$tr<&Elem> for Elem {
            type Output = Elem;
            fn $m(self, o: &Elem) -> Elem {
                (&self).$m(o)
            }
        }
    };
}

binop!(Add, add, add_r);
binop!(Sub, sub, sub_r);
binop!(Mul, mul, mul_r);

impl std::ops::Neg for &Elem {
    type Output = Elem;
    fn neg(self) -> Elem {
        self.field.elem(self.field.neg_r(&self.repr))
    }
}

impl std::ops::Neg for Elem {
    type Output = Elem;
    fn neg(self) -> Elem {
        -(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_arithmetic() {
        let f = Field::finite(7).unwrap();
        let a = f.int(3);
        let b = f.int(5);
        assert_eq!(&a + &b, f.int(1));
        assert_eq!(&a * &b, f.int(1));
        assert_eq!(a.inv().unwrap(), f.int(5));
        assert_eq!(-&a, f.int(4));
    }

    #[test]
    fn constructors_validate_p() {
        assert_eq!(Field::finite(2).unwrap_err(), Error::EvenCharacteristic);
        assert_eq!(Field::padic(9).unwrap_err(), Error::CompositeP(9));
        assert_eq!(Field::finite(1).unwrap_err(), Error::CompositeP(1));
    }

    #[test]
    fn f9_modulus_and_inverse() {
        let f9 = Field::finite_ext(3, 2).unwrap();
        let d = f9.finite_data().unwrap();
        let b = d.base.as_ref().unwrap();
        assert_eq!(d.modulus, vec![b.int(1).repr, b.int(0).repr, b.int(1).repr]);
        let z = f9.gen("z").unwrap();
        assert_eq!((&z * &z), f9.int(-1));
        for e in f9.finite_elements().unwrap().into_iter().skip(1) {
            assert!((&e * &e.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn f25_uses_x2_plus_2() {
        let f = Field::finite_ext(5, 2).unwrap();
        let d = f.finite_data().unwrap();
        let b = d.base.as_ref().unwrap();
        assert_eq!(d.modulus, vec![b.int(2).repr, b.int(0).repr, b.int(1).repr]);
    }

    #[test]
    fn laurent_division_only_by_monomials() {
        let k = Field::laurent(&Field::finite(3).unwrap(), "t").unwrap();
        let t = k.gen("t").unwrap();
        let one = k.one();
        assert_eq!(one.div(&t).unwrap().valuation().unwrap(), -1);
        let u = &one + &t;
        assert!(matches!(one.div(&u), Err(Error::DivisionUnrepresentable(_))));
        assert_eq!(-&t, &k.int(2) * &t);
    }

    #[test]
    fn mixed_fields_rejected() {
        let a = Field::finite(3).unwrap().one();
        let b = Field::finite(5).unwrap().one();
        assert_eq!(a.try_add(&b).unwrap_err(), Error::MixedFields);
    }

    #[test]
    fn padic_valuation_and_residue() {
        let q3 = Field::padic(3).unwrap();
        assert_eq!(q3.int(18).valuation().unwrap(), 2);
        assert_eq!(q3.int(10).residue().unwrap(), Field::finite(3).unwrap().int(1));
        assert_eq!(q3.rational(1, 9).unwrap().valuation().unwrap(), -2);
        assert!(q3.int(4).is_square().unwrap());
        assert!(!q3.int(3).is_square().unwrap());
        assert!(q3.int(7).is_square().unwrap());
        assert!(!q3.int(2).is_square().unwrap());
    }

    #[test]
    fn square_classes() {
        let f3 = Field::finite(3).unwrap();
        let reps: Vec<String> = f3.square_class_reps().unwrap().iter().map(|e| e.to_string()).collect();
        assert_eq!(reps, ["1", "2"]);
        let q3 = Field::padic(3).unwrap();
        let reps: Vec<String> = q3.square_class_reps().unwrap().iter().map(|e| e.to_string()).collect();
        assert_eq!(reps, ["1", "2", "3", "6"]);
        let l = Field::laurent(&f3, "t").unwrap();
        let reps: Vec<String> = l.square_class_reps().unwrap().iter().map(|e| e.to_string()).collect();
        assert_eq!(reps, ["1", "2", "t", "2*t"]);
        let rf = Field::rational_function(&f3, "x").unwrap();
        assert_eq!(rf.square_class_reps().unwrap_err(), Error::InfiniteSquareClassGroup);
    }

    #[test]
    fn rational_function_arithmetic() {
        let k = Field::rational_function(&Field::finite(3).unwrap(), "x").unwrap();
        let x = k.gen("x").unwrap();
        let one = k.one();
        assert_eq!((&x + &one) * (&x - &one), &(&x * &x) + &k.int(2));
        let q = one.div(&x).unwrap();
        assert_eq!(q.to_string(), "1/x");
        assert!((&(&x * &x) * &k.int(4)).is_square().unwrap());
        assert!(!x.is_square().unwrap());
        assert!(!k.int(2).is_square().unwrap());
    }

    #[test]
    fn profiles() {
        let f3 = Field::finite(3).unwrap();
        let p = f3.profile();
        assert_eq!((p.u, p.m, p.a2_index, p.square_classes), (Count::Finite(2), Count::Finite(2), Some(1), Count::Finite(2)));
        let l = Field::laurent(&f3, "t").unwrap();
        assert_eq!(l.profile().u, Count::Finite(4));
        assert_eq!(l.profile().square_classes, Count::Finite(4));
        let ll = Field::laurent(&l, "s").unwrap();
        assert_eq!(ll.profile().m, Count::Finite(8));
        assert_eq!(ll.profile().a2_index, Some(3));
        let q5 = Field::padic(5).unwrap();
        assert_eq!(q5.profile().u, Count::Finite(4));
    }
}
