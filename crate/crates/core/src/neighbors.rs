//! Membership in powers of the fundamental ideal and `I^n`-neighbors.

use serde::Serialize;

use crate::brauer;
use crate::error::{Error, Result};
use crate::fields::Elem;
use crate::forms::QForm;
use crate::witt;

/// Whether `q` lies in `I^n` for `n` in 1..=3.
pub fn in_fundamental_power(q: &QForm, n: u32) -> Result<bool> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedShape(format!("I^{n} membership needs 1 <= n <= 3")));
    }
    if q.dim() % 2 == 1 {
        return Ok(false);
    }
    if n == 1 || q.dim() == 0 {
        return Ok(true);
    }
    if !q.signed_determinant()?.is_square()? {
        return Ok(false);
    }
    if n == 2 {
        return Ok(true);
    }
    brauer::is_trivial(&q.witt_invariant()?)
}

/// Result of `I^n`-neighbor detection.
#[derive(Clone, Debug, Serialize)]
pub struct NeighborVerdict {
    /// `None` when the tested criteria do not settle the question.
    pub is_neighbor: Option<bool>,
    pub n: u32,
    pub comp_dim: Option<usize>,
    pub complement: Option<QForm>,
    /// The pair `(r, s)` of the LGP guarantee.
    pub guarantee: Option<(u32, u32)>,
    pub note: String,
}

impl NeighborVerdict {
    fn no(n: u32, note: &str) -> NeighborVerdict {
        NeighborVerdict {
            is_neighbor: Some(false),
            n,
            comp_dim: None,
            complement: None,
            guarantee: None,
            note: note.into(),
        }
    }

    fn undecided(n: u32, note: &str) -> NeighborVerdict {
        NeighborVerdict {
            is_neighbor: None,
            ..NeighborVerdict::no(n, note)
        }
    }

    fn found(q: &QForm, n: u32, complement: QForm, note: &str) -> Result<NeighborVerdict> {
        let r = complement.dim();
        Ok(NeighborVerdict {
            is_neighbor: Some(true),
            n,
            comp_dim: Some(r),
            guarantee: Some(lgp_guarantee(q.dim(), r, n)?),
            complement: Some(complement),
            note: note.into(),
        })
    }
}

fn sign(q: &QForm, odd: bool) -> Elem {
    let k = q.field();
    if odd {
        k.int(-1)
    } else {
        k.one()
    }
}

/// Smallest complementary dimension, tried in increasing order up to 4.
pub fn detect_neighbor(q: &QForm, n: u32) -> Result<NeighborVerdict> {
    let k = q.field();
    let dim = q.dim();
    match n {
        1 | 2 => {
            let d = if dim == 0 { k.one() } else { q.determinant()? };
            let cands: Vec<Vec<Elem>> = if dim.is_multiple_of(2) {
                vec![vec![], vec![k.one(), d.clone()], vec![k.one(), -&d]]
            } else {
                vec![vec![d.clone()], vec![-&d]]
            };
            for c in cands {
                if c.len() >= dim {
                    continue;
                }
                let sigma = QForm::new(k, c)?;
                if in_fundamental_power(&q.orth_sum(&sigma)?, n)? {
                    return NeighborVerdict::found(q, n, sigma, "determinant complement");
                }
            }
            Ok(NeighborVerdict::no(n, "no complement of dimension below dim q"))
        }
        3 => detect_i3(q),
        _ => Err(Error::UnsupportedShape(format!("I^{n}-neighbors need n <= 3"))),
    }
}

fn detect_i3(q: &QForm) -> Result<NeighborVerdict> {
    let k = q.field();
    let dim = q.dim();
    if in_fundamental_power(q, 3)? && dim > 0 {
        return NeighborVerdict::found(q, 3, QForm::empty(k), "q lies in I^3");
    }
    if dim < 2 {
        return Ok(NeighborVerdict::no(3, "no complementary dimension below dim q"));
    }
    let d = q.determinant()?;
    let c = q.witt_invariant()?;
    if dim % 2 == 1 {
        // comp dim 1
        let alpha = &sign(q, dim.div_ceil(2) % 2 == 1) * &d;
        if brauer::is_trivial(&c)? {
            let sigma = QForm::new(k, vec![alpha])?;
            return checked(q, sigma, "trivial Witt invariant");
        }
        if dim < 5 {
            return Ok(NeighborVerdict::no(3, "Witt invariant nontrivial"));
        }
        // comp dim 3
        let v = brauer::is_quaternion_class(&c)?;
        if v.value {
            return match v.witness {
                Some((a, b)) => {
                    let sigma = QForm::new(k, vec![a.clone(), b.clone(), -(&a * &b)])?.scale(&alpha)?;
                    checked(q, sigma, "Witt invariant is a quaternion class")
                }
                None => Ok(NeighborVerdict {
                    is_neighbor: Some(true),
                    comp_dim: Some(3),
                    guarantee: Some(lgp_guarantee(dim, 3, 3)?),
                    ..NeighborVerdict::no(3, "Witt invariant is a quaternion class; no explicit witness")
                }),
            };
        }
        if dim == 5 {
            return Ok(NeighborVerdict::no(3, "Witt invariant is not a quaternion class"));
        }
        return Ok(NeighborVerdict::undecided(3, "complementary dimensions above 3 are not tested"));
    }
    if dim < 4 {
        return Ok(NeighborVerdict::no(3, "q not in I^3 and no smaller even complement"));
    }
    // comp dim 2
    let dpm = q.signed_determinant()?;
    let v = brauer::split_by_sqrt(&c, &dpm)?;
    if v.value {
        return match v.witness {
            Some(a) => {
                let t = &(&sign(q, (dim / 2) % 2 == 1) * &a) * &d;
                let sigma = QForm::new(k, vec![-&a, t])?;
                checked(q, sigma, "Witt invariant has the signed determinant as a slot")
            }
            None => Ok(NeighborVerdict {
                is_neighbor: Some(true),
                comp_dim: Some(2),
                guarantee: Some(lgp_guarantee(dim, 2, 3)?),
                ..NeighborVerdict::no(3, "Witt invariant has the signed determinant as a slot; no explicit witness")
            }),
        };
    }
    if dim < 6 {
        return Ok(NeighborVerdict::no(3, "Witt invariant is not split by the square root of the signed determinant"));
    }
    // comp dim 4, through the odd form q ⊥ <±d>
    let pd = &sign(q, (dim / 2) % 2 == 1) * &d;
    let q1 = q.with(&pd)?;
    let v = brauer::is_quaternion_class(&q1.witt_invariant()?)?;
    if v.value {
        if let Some((a, b)) = v.witness {
            let d1 = q1.determinant()?;
            let alpha = &sign(&q1, ((dim + 2) / 2) % 2 == 1) * &d1;
            let sigma3 = QForm::new(k, vec![a.clone(), b.clone(), -(&a * &b)])?.scale(&alpha)?;
            let sigma = QForm::new(k, vec![pd])?.orth_sum(&sigma3)?;
            return checked(q, sigma, "Witt invariant is a quaternion class");
        }
        return Ok(NeighborVerdict {
            is_neighbor: Some(true),
            comp_dim: Some(4),
            guarantee: Some(lgp_guarantee(dim, 4, 3)?),
            ..NeighborVerdict::no(3, "Witt invariant is a quaternion class; no explicit witness")
        });
    }
    Ok(NeighborVerdict::undecided(
        3,
        "no complement of dimension <= 4 representing its determinant; other complements are not tested",
    ))
}

/// Complement of dimension `r` in {1, 3} for an odd-dimensional `q`, built
/// from the Witt invariant and checked to land in `I^3`. `Ok(None)` when the
/// invariant rules the dimension out. Unlike [`detect_neighbor`] this does
/// not require `r < dim q`.
pub fn odd_i3_complement(q: &QForm, r: usize) -> Result<Option<QForm>> {
    let k = q.field();
    let dim = q.dim();
    if dim.is_multiple_of(2) {
        return Err(Error::ParityMismatch(format!("dim {dim} is even")));
    }
    let alpha = &sign(q, dim.div_ceil(2) % 2 == 1) * &q.determinant()?;
    let c = q.witt_invariant()?;
    let sigma = match r {
        1 => {
            if !brauer::is_trivial(&c)? {
                return Ok(None);
            }
            QForm::new(k, vec![alpha])?
        }
        3 => {
            let v = brauer::is_quaternion_class(&c)?;
            if !v.value {
                return Ok(None);
            }
            let (a, b) = v
                .witness
                .ok_or_else(|| Error::Undecided(format!("quaternion class of {q} has no explicit witness")))?;
            QForm::new(k, vec![a.clone(), b.clone(), -(&a * &b)])?.scale(&alpha)?
        }
        _ => return Err(Error::OutOfRange(format!("complementary dimension {r}; expected 1 or 3"))),
    };
    if !in_fundamental_power(&q.orth_sum(&sigma)?, 3)? {
        return Err(Error::InconsistentFacts(format!(
            "constructed complement {sigma} of {q} does not land in I^3"
        )));
    }
    Ok(Some(sigma))
}

fn checked(q: &QForm, sigma: QForm, note: &str) -> Result<NeighborVerdict> {
    if !in_fundamental_power(&q.orth_sum(&sigma)?, 3)? {
        return Err(Error::InconsistentFacts(format!(
            "constructed complement {sigma} of {q} does not land in I^3"
        )));
    }
    NeighborVerdict::found(q, 3, sigma, note)
}

/// `(dim q - r)/2` when `2^n > dim q + r`.
pub fn small_dim_witt_bound(q: &QForm, n: u32, r: usize) -> Option<u32> {
    let dim = q.dim();
    if (1usize << n) > dim + r && dim >= r {
        Some(((dim - r) / 2) as u32)
    } else {
        None
    }
}

/// The pair `(r, s)` such that every `I^n`-neighbor of dimension `dim_q`
/// and complementary dimension `r` satisfies `LGP(r, s)` when isometry
/// satisfies the local-global principle.
pub fn lgp_guarantee(dim_q: usize, r: usize, n: u32) -> Result<(u32, u32)> {
    if dim_q <= r {
        return Err(Error::OutOfRange(format!("complementary dimension {r} must be below {dim_q}")));
    }
    if (dim_q - r) % 2 == 1 {
        return Err(Error::ParityMismatch(format!("dim {dim_q} and complementary dimension {r}")));
    }
    let top = (dim_q + r) as i64 - (1i64 << n);
    let first = (top.div_euclid(2) + 1).max(1) as u32;
    Ok((first, ((dim_q - r) / 2) as u32))
}

/// Whether two complements of the same dimension are isometric. When
/// `r < 2^{n-1}` they must be.
pub fn complement_uniqueness_check(q: &QForm, n: u32, r: usize, s1: &QForm, s2: &QForm) -> Result<bool> {
    if s1.dim() != r || s2.dim() != r {
        return Err(Error::UnsupportedShape("complements must have dimension r".into()));
    }
    for s in [s1, s2] {
        if n <= 3 && !in_fundamental_power(&q.orth_sum(s)?, n)? {
            return Err(Error::UnsupportedShape(format!("{s} is not a complement of {q}")));
        }
    }
    witt::is_isometric(s1, s2)
}

/// Whether complements of dimension `r` are forced to be isometric.
pub fn complement_is_unique(n: u32, r: usize) -> bool {
    r < 1usize << (n - 1)
}
