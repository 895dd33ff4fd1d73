//! Diagonal quadratic forms and their classical invariants.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::brauer::SymbolSum;
use crate::error::{Error, Result};
use crate::fields::{Elem, Field};

/// The diagonal form `<a_1, ..., a_n>` with nonzero entries.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QForm {
    field: Field,
    entries: Vec<Elem>,
}

impl QForm {
    pub fn new(field: &Field, entries: Vec<Elem>) -> Result<QForm> {
        for e in &entries {
            if e.field() != field {
                return Err(Error::MixedFields);
            }
            if e.is_zero() {
                return Err(Error::ZeroEntry);
            }
        }
        Ok(QForm {
            field: field.clone(),
            entries,
        })
    }

    pub fn from_ints(field: &Field, entries: &[i64]) -> Result<QForm> {
        Self::new(field, entries.iter().map(|n| field.int(*n)).collect())
    }

    pub fn empty(field: &Field) -> QForm {
        QForm {
            field: field.clone(),
            entries: Vec::new(),
        }
    }

    /// The hyperbolic plane `<1, -1>`.
    pub fn hyperbolic(field: &Field) -> QForm {
        QForm {
            field: field.clone(),
            entries: vec![field.one(), field.int(-1)],
        }
    }

    /// `n` copies of the hyperbolic plane.
    pub fn hyperbolic_space(field: &Field, n: usize) -> QForm {
        let mut entries = Vec::with_capacity(2 * n);
        for _ in 0..n {
            entries.push(field.one());
            entries.push(field.int(-1));
        }
        QForm {
            field: field.clone(),
            entries,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn entries(&self) -> &[Elem] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn orth_sum(&self, other: &QForm) -> Result<QForm> {
        if self.field != other.field {
            return Err(Error::MixedFields);
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Ok(QForm {
            field: self.field.clone(),
            entries,
        })
    }

    /// `self` with one more entry.
    pub fn with(&self, a: &Elem) -> Result<QForm> {
        self.orth_sum(&QForm::new(&self.field, vec![a.clone()])?)
    }

    pub fn scale(&self, a: &Elem) -> Result<QForm> {
        if a.field() != &self.field {
            return Err(Error::MixedFields);
        }
        if a.is_zero() {
            return Err(Error::ZeroScalar);
        }
        Ok(QForm {
            field: self.field.clone(),
            entries: self.entries.iter().map(|e| e * a).collect(),
        })
    }

    pub fn neg(&self) -> QForm {
        QForm {
            field: self.field.clone(),
            entries: self.entries.iter().map(|e| -e).collect(),
        }
    }

    pub fn tensor(&self, other: &QForm) -> Result<QForm> {
        if self.field != other.field {
            return Err(Error::MixedFields);
        }
        let mut entries = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.entries {
            for b in &other.entries {
                entries.push(a * b);
            }
        }
        Ok(QForm {
            field: self.field.clone(),
            entries,
        })
    }

    /// `<<a_1, ..., a_n>> ⊗ q`, entries ordered by a binary counter over
    /// subsets of the generators (subset bit `i` selects `a_{i+1}`), each
    /// block a scaled copy of `q`.
    pub fn tensor_pfister(gens: &[Elem], q: &QForm) -> Result<QForm> {
        let mut coeffs = Vec::with_capacity(1 << gens.len());
        for g in gens {
            if g.field() != &q.field {
                return Err(Error::MixedFields);
            }
            if g.is_zero() {
                return Err(Error::ZeroScalar);
            }
        }
        for mask in 0u64..(1 << gens.len()) {
            let mut c = q.field.one();
            for (i, g) in gens.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    c = &c * g;
                }
            }
            coeffs.push(c);
        }
        let mut entries = Vec::with_capacity(coeffs.len() * q.dim());
        for c in &coeffs {
            for e in &q.entries {
                entries.push(c * e);
            }
        }
        Ok(QForm {
            field: q.field.clone(),
            entries,
        })
    }

    /// The Pfister form `<<a_1, ..., a_n>>`.
    pub fn pfister(field: &Field, gens: &[Elem]) -> Result<QForm> {
        Self::tensor_pfister(gens, &QForm::new(field, vec![field.one()])?)
    }

    /// Product of the entries, a representative of the determinant class.
    pub fn determinant(&self) -> Result<Elem> {
        if self.entries.is_empty() {
            return Err(Error::EmptyForm);
        }
        Ok(self.product())
    }

    /// Product of the entries; 1 for the empty form.
    pub fn product(&self) -> Elem {
        self.entries.iter().fold(self.field.one(), |acc, e| &acc * e)
    }

    /// `(-1)^{n(n-1)/2} det q`.
    pub fn signed_determinant(&self) -> Result<Elem> {
        let d = self.determinant()?;
        let n = self.dim();
        Ok(if (n * (n - 1) / 2) % 2 == 1 { -d } else { d })
    }

    /// The formal sum of the symbols `(a_i, a_j)`, `i < j`.
    pub fn hasse_invariant(&self) -> Result<SymbolSum> {
        if self.entries.is_empty() {
            return Err(Error::EmptyForm);
        }
        let mut s = SymbolSum::new(&self.field);
        for i in 0..self.dim() {
            for j in i + 1..self.dim() {
                s.push_raw(self.entries[i].clone(), self.entries[j].clone());
            }
        }
        Ok(s)
    }

    /// The Witt invariant, from the Hasse invariant by the correction that
    /// depends on the dimension modulo 8.
    pub fn witt_invariant(&self) -> Result<SymbolSum> {
        let mut s = self.hasse_invariant()?;
        for (a, b) in witt_correction(&self.field, self.dim(), &self.determinant()?) {
            s.push_raw(a, b);
        }
        Ok(s)
    }

    /// Form obtained by removing the entry at `idx`.
    pub fn without(&self, idx: usize) -> QForm {
        let mut entries = self.entries.clone();
        entries.remove(idx);
        QForm {
            field: self.field.clone(),
            entries,
        }
    }
}

/// Symbols added to the Hasse invariant of a form of dimension `n` and
/// determinant `d` to obtain its Witt invariant.
pub fn witt_correction(k: &Field, n: usize, d: &Elem) -> Vec<(Elem, Elem)> {
    let m1 = k.int(-1);
    match n % 8 {
        1 | 2 => vec![],
        3 | 4 => vec![(m1.clone(), -d)],
        5 | 6 => vec![(m1.clone(), m1)],
        _ => vec![(m1, d.clone())],
    }
}

/// Whether `a` and `b` lie in the same square class.
pub fn same_square_class(a: &Elem, b: &Elem) -> Result<bool> {
    a.div(b)?.is_square()
}

impl fmt::Display for QForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
        write!(f, "<{}>", parts.join(", "))
    }
}

impl fmt::Debug for QForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over {}", self, self.field)
    }
}

impl Serialize for QForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("QForm", 2)?;
        st.serialize_field("field", &self.field.to_string())?;
        let entries: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
        st.serialize_field("entries", &entries)?;
        st.end()
    }
}
