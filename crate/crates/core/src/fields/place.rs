//! Discrete valuations: the intrinsic ones of Q_p and Laurent fields, and
//! the places of a rational function field over a finite field.

use std::fmt;

use super::display::poly_string;
use super::factor::{factor_poly, is_irreducible};
use super::poly::{self, PolyR};
use super::{Elem, Field, FieldKind, Repr};
use crate::error::{Error, Result};

/// A normalized discrete valuation with a computable residue map.
pub trait Valuation {
    fn residue_field(&self) -> Field;
    fn valuation(&self, a: &Elem) -> Result<i64>;
    /// Residue of `a / pi^{v(a)}`.
    fn unit_residue(&self, a: &Elem) -> Result<Elem>;
    fn label(&self) -> String;

    fn residue(&self, a: &Elem) -> Result<Elem> {
        if self.valuation(a)? != 0 {
            return Err(Error::NotAUnit);
        }
        self.unit_residue(a)
    }
}

/// The built-in valuation of Q_p or `k((t))`.
#[derive(Clone, Debug)]
pub struct Intrinsic {
    field: Field,
    residue: Field,
}

impl Intrinsic {
    pub fn new(field: &Field) -> Result<Intrinsic> {
        Ok(Intrinsic {
            residue: field.residue_field()?,
            field: field.clone(),
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
}

impl Valuation for Intrinsic {
    fn residue_field(&self) -> Field {
        self.residue.clone()
    }

    fn valuation(&self, a: &Elem) -> Result<i64> {
        if a.field() != &self.field {
            return Err(Error::MixedFields);
        }
        a.valuation()
    }

    fn unit_residue(&self, a: &Elem) -> Result<Elem> {
        if a.field() != &self.field {
            return Err(Error::MixedFields);
        }
        a.unit_residue()
    }

    fn label(&self) -> String {
        match self.field.kind() {
            FieldKind::PAdic { p, .. } => format!("v_{p}"),
            FieldKind::Laurent { var, .. } => format!("v_{var}"),
            _ => unreachable!(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PlaceKind {
    /// The valuation attached to a monic irreducible polynomial.
    Finite(PolyR),
    /// The degree valuation, uniformizer `1/x`.
    Infinite,
}

/// A place of a rational function field `F_q(x)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Place {
    owner: Field,
    kind: PlaceKind,
    residue: Field,
}

fn rf_parts(k: &Field) -> Result<(&Field, &str)> {
    match k.kind() {
        FieldKind::RationalFunction { base, var } => Ok((base, var)),
        _ => Err(Error::UnsupportedField(format!("{k} is not a rational function field"))),
    }
}

impl Place {
    /// The place of a monic irreducible `pi` (coefficients over the base).
    pub fn finite(owner: &Field, pi: PolyR) -> Result<Place> {
        let (base, _) = rf_parts(owner)?;
        let (_, pi) = poly::monic(base, &pi)?;
        if !is_irreducible(base, &pi)? {
            return Err(Error::UnsupportedShape("place polynomial is reducible".into()));
        }
        Ok(Self::finite_unchecked(owner, pi))
    }

    pub(crate) fn finite_unchecked(owner: &Field, pi: PolyR) -> Place {
        let (base, var) = rf_parts(owner).expect("rational function field");
        let residue = if pi.len() == 2 {
            base.clone()
        } else {
            Field::extension_unchecked(base, pi.clone(), var).expect("residue field")
        };
        Place {
            owner: owner.clone(),
            kind: PlaceKind::Finite(pi),
            residue,
        }
    }

    /// The place given by a monic irreducible element of `F_q[x]`.
    pub fn from_elem(pi: &Elem) -> Result<Place> {
        match pi.repr() {
            Repr::Frac { num, den } if den.len() == 1 => Self::finite(pi.field(), num.clone()),
            _ => Err(Error::UnsupportedShape("place generator must be a polynomial".into())),
        }
    }

    pub fn infinite(owner: &Field) -> Result<Place> {
        let (base, _) = rf_parts(owner)?;
        Ok(Place {
            owner: owner.clone(),
            kind: PlaceKind::Infinite,
            residue: base.clone(),
        })
    }

    pub fn owner(&self) -> &Field {
        &self.owner
    }

    pub fn kind(&self) -> &PlaceKind {
        &self.kind
    }

    pub fn degree(&self) -> usize {
        match &self.kind {
            PlaceKind::Finite(pi) => pi.len() - 1,
            PlaceKind::Infinite => 1,
        }
    }

    fn parts<'a>(&self, a: &'a Elem) -> Result<(&'a PolyR, &'a PolyR)> {
        if a.field() != &self.owner {
            return Err(Error::MixedFields);
        }
        if a.is_zero() {
            return Err(Error::ZeroElement);
        }
        match a.repr() {
            Repr::Frac { num, den } => Ok((num, den)),
            _ => unreachable!(),
        }
    }

    fn reduce(&self, f: &[Repr]) -> Repr {
        let base = self.owner.base().unwrap();
        match &self.kind {
            PlaceKind::Finite(pi) if pi.len() == 2 => {
                let root = base.neg_r(&pi[0]);
                poly::eval(base, f, &root)
            }
            PlaceKind::Finite(pi) => Repr::Poly(poly::rem(base, f, pi).unwrap()),
            PlaceKind::Infinite => unreachable!(),
        }
    }

    /// All places where some of the given elements are not units, plus the
    /// infinite place (always listed last).
    pub fn relevant(owner: &Field, elems: &[Elem]) -> Result<Vec<Place>> {
        let (base, _) = rf_parts(owner)?;
        let mut pis: Vec<PolyR> = Vec::new();
        for e in elems {
            if e.field() != owner {
                return Err(Error::MixedFields);
            }
            if e.is_zero() {
                return Err(Error::ZeroElement);
            }
            let Repr::Frac { num, den } = e.repr() else { unreachable!() };
            for part in [num, den] {
                for (g, _) in factor_poly(base, part)?.factors {
                    if !pis.contains(&g) {
                        pis.push(g);
                    }
                }
            }
        }
        pis.sort_by_key(|g| (g.len(), g.iter().rev().map(|c| base.finite_index(c)).collect::<Vec<_>>()));
        let mut out: Vec<Place> = pis.into_iter().map(|g| Self::finite_unchecked(owner, g)).collect();
        out.push(Self::infinite(owner)?);
        Ok(out)
    }
}

impl Valuation for Place {
    fn residue_field(&self) -> Field {
        self.residue.clone()
    }

    fn valuation(&self, a: &Elem) -> Result<i64> {
        let (num, den) = self.parts(a)?;
        let base = self.owner.base().unwrap();
        Ok(match &self.kind {
            PlaceKind::Finite(pi) => {
                poly::strip_factor(base, num, pi).0 as i64 - poly::strip_factor(base, den, pi).0 as i64
            }
            PlaceKind::Infinite => (den.len() as i64) - (num.len() as i64),
        })
    }

    fn unit_residue(&self, a: &Elem) -> Result<Elem> {
        let (num, den) = self.parts(a)?;
        let base = self.owner.base().unwrap();
        match &self.kind {
            PlaceKind::Finite(pi) => {
                let n = self.reduce(&poly::strip_factor(base, num, pi).1);
                let d = self.reduce(&poly::strip_factor(base, den, pi).1);
                let r = &self.residue;
                Ok(r.elem(r.mul_r(&n, &r.inv_r(&d)?)))
            }
            PlaceKind::Infinite => {
                let n = num.last().unwrap();
                let d = den.last().unwrap();
                Ok(base.elem(base.mul_r(n, &base.inv_r(d)?)))
            }
        }
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (base, var) = rf_parts(&self.owner).unwrap();
        match &self.kind {
            PlaceKind::Finite(pi) => write!(f, "v_({})", poly_string(base, pi, var)),
            PlaceKind::Infinite => write!(f, "v_inf"),
        }
    }
}
