//! Witt index engines: the finite-field classification, Springer's
//! recursion along a discrete valuation, the min-over-places rule over
//! `F_q(x)` and certified bounds elsewhere.

use serde::Serialize;

use crate::cert::Certificate;
use crate::error::{Error, Result};
use crate::fields::place::{Intrinsic, Place, Valuation};
use crate::fields::{twovar, Count, Elem, Field, FieldKind};
use crate::forms::QForm;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    FiniteClassification,
    Springer,
    HasseMinkowski,
    UCertificate,
    DimBound,
}

/// An exact Witt index or a certified interval containing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WittAnswer {
    pub lo: u32,
    pub hi: u32,
    pub exact: bool,
    pub provenance: Vec<Provenance>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
}

impl WittAnswer {
    pub(crate) fn new(lo: u32, hi: u32, provenance: Vec<Provenance>, certificate: Option<Certificate>) -> WittAnswer {
        let mut provenance = provenance;
        provenance.sort();
        provenance.dedup();
        WittAnswer {
            lo,
            hi,
            exact: lo == hi,
            provenance,
            certificate,
        }
    }

    pub fn value(&self) -> Option<u32> {
        self.exact.then_some(self.lo)
    }

    fn add(&self, other: &WittAnswer) -> (u32, u32, Vec<Provenance>) {
        let mut p = self.provenance.clone();
        p.extend(other.provenance.iter().copied());
        (self.lo + other.lo, self.hi + other.hi, p)
    }
}

fn claim(q: &QForm, lo: u32, hi: u32) -> String {
    if lo == hi {
        format!("i_W({q}) = {lo} over {}", q.field())
    } else {
        format!("{lo} <= i_W({q}) <= {hi} over {}", q.field())
    }
}

/// Witt index with a certificate tree.
pub fn witt_index(q: &QForm) -> WittAnswer {
    compute(q, true)
}

/// Witt index bounds without building certificates.
pub fn witt_bounds(q: &QForm) -> (u32, u32) {
    let a = compute(q, false);
    (a.lo, a.hi)
}

/// Exact Witt index or `Undecided`.
pub fn witt_value(q: &QForm) -> Result<u32> {
    let (lo, hi) = witt_bounds(q);
    if lo == hi {
        Ok(lo)
    } else {
        Err(Error::Undecided(format!("{lo} <= i_W <= {hi} for {q}")))
    }
}

/// The largest `j` with `dim >= u + 2j - 1`.
pub fn u_certificate(dim: usize, u: u64) -> u32 {
    let d = dim as i64;
    let u = u as i64;
    if d + 1 > u {
        ((d + 1 - u) / 2) as u32
    } else {
        0
    }
}

pub(crate) fn compute(q: &QForm, trace: bool) -> WittAnswer {
    let dim = q.dim();
    let cap = (dim / 2) as u32;
    let mut ans = match compute_inner(q, trace) {
        Ok(a) => a,
        Err(e) => WittAnswer::new(
            0,
            cap,
            vec![Provenance::DimBound],
            trace.then(|| Certificate::new("dim-bound", claim(q, 0, cap)).assume(format!("engine gave up: {e}"))),
        ),
    };
    if let Count::Finite(u) = q.field().profile().u {
        let j = u_certificate(dim, u).min(cap);
        if j > ans.lo {
            ans.lo = j;
            ans.provenance.push(Provenance::UCertificate);
            ans.provenance.sort();
            ans.provenance.dedup();
            ans.exact = ans.lo == ans.hi;
            if let Some(c) = ans.certificate.take() {
                let node = Certificate::new(
                    "u-certificate",
                    format!("dim {dim} >= u + 2*{j} - 1 with u = {u}, so i_W >= {j}"),
                );
                ans.certificate = Some(
                    Certificate::new("combine", claim(q, ans.lo, ans.hi)).child(c).child(node),
                );
            }
        }
    }
    debug_assert!(ans.lo <= ans.hi && ans.hi <= cap, "bad answer for {q:?}");
    ans
}

fn compute_inner(q: &QForm, trace: bool) -> Result<WittAnswer> {
    if q.dim() == 0 {
        return Ok(WittAnswer::new(
            0,
            0,
            Vec::new(),
            trace.then(|| Certificate::new("empty", "empty form")),
        ));
    }
    match q.field().kind() {
        FieldKind::Finite(_) => finite_index(q, trace),
        FieldKind::PAdic { .. } | FieldKind::Laurent { .. } => {
            let v = Intrinsic::new(q.field())?;
            springer(q, &v, trace)
        }
        FieldKind::RationalFunction { .. } => rf_index(q, trace),
        FieldKind::TwoVar { .. } => two_var_index(q, trace),
    }
}

fn finite_index(q: &QForm, trace: bool) -> Result<WittAnswer> {
    let n = q.dim() as u32;
    let dpm_square = q.signed_determinant()?.is_square()?;
    let v = if n % 2 == 1 {
        (n - 1) / 2
    } else if dpm_square {
        n / 2
    } else {
        n / 2 - 1
    };
    Ok(WittAnswer::new(
        v,
        v,
        vec![Provenance::FiniteClassification],
        trace.then(|| {
            Certificate::new(
                "finite-classification",
                format!(
                    "{}; dim {n}, signed determinant {}",
                    claim(q, v, v),
                    if dpm_square { "square" } else { "nonsquare" }
                ),
            )
        }),
    ))
}

/// The two residue forms of `q` with respect to `v`.
pub fn residue_forms(q: &QForm, v: &dyn Valuation) -> Result<(QForm, QForm)> {
    let r = v.residue_field();
    let mut q1 = Vec::new();
    let mut q2 = Vec::new();
    for e in q.entries() {
        let val = v.valuation(e)?;
        let res = v.unit_residue(e)?;
        if val.rem_euclid(2) == 0 {
            q1.push(res);
        } else {
            q2.push(res);
        }
    }
    Ok((QForm::new(&r, q1)?, QForm::new(&r, q2)?))
}

/// Springer's additivity along one valuation.
pub fn springer(q: &QForm, v: &dyn Valuation, trace: bool) -> Result<WittAnswer> {
    let (q1, q2) = residue_forms(q, v)?;
    let a1 = compute(&q1, trace);
    let a2 = compute(&q2, trace);
    let (lo, hi, mut prov) = a1.add(&a2);
    prov.push(Provenance::Springer);
    let cert = trace.then(|| {
        Certificate::new(
            "springer",
            format!(
                "{} at {}; first residue {}, second residue {}",
                claim(q, lo, hi),
                v.label(),
                q1,
                q2
            ),
        )
        .children(a1.certificate.clone())
        .children(a2.certificate.clone())
    });
    Ok(WittAnswer::new(lo, hi, prov, cert))
}

/// Local answers at the relevant places of a form over `F_q(x)` together
/// with the common value at every other place.
#[derive(Clone, Debug, Serialize)]
pub struct LocalProfile {
    pub places: Vec<(String, WittAnswer)>,
    /// Answer shared by all places where every entry is a unit.
    pub good_places: WittAnswer,
}

impl LocalProfile {
    pub fn min_lo(&self) -> u32 {
        self.places
            .iter()
            .map(|(_, a)| a.lo)
            .chain(std::iter::once(self.good_places.lo))
            .min()
            .unwrap()
    }

    pub fn min_hi(&self) -> u32 {
        self.places
            .iter()
            .map(|(_, a)| a.hi)
            .chain(std::iter::once(self.good_places.hi))
            .min()
            .unwrap()
    }
}

fn good_place_answer(q: &QForm, trace: bool) -> Result<WittAnswer> {
    let n = q.dim() as u32;
    let (v, why) = if n == 0 {
        (0, "empty form".to_string())
    } else if n % 2 == 1 {
        ((n - 1) / 2, "odd dimension: unit forms over finite residue fields have anisotropic part of dimension 1".to_string())
    } else if q.signed_determinant()?.is_square()? {
        (n / 2, "signed determinant is a global square, so every good residue form is hyperbolic".to_string())
    } else {
        (
            n / 2 - 1,
            "signed determinant is not a global square, so it is a nonsquare residue at infinitely many good places".to_string(),
        )
    };
    Ok(WittAnswer::new(
        v,
        v,
        vec![Provenance::FiniteClassification],
        trace.then(|| Certificate::new("good-places", format!("i_W = {v} at every place where all entries are units; {why}"))),
    ))
}

/// Local profile of a form over `F_q(x)`.
pub fn local_profile(q: &QForm) -> Result<LocalProfile> {
    local_profile_traced(q, true)
}

fn local_profile_traced(q: &QForm, trace: bool) -> Result<LocalProfile> {
    let k = q.field();
    if !matches!(k.kind(), FieldKind::RationalFunction { .. }) {
        return Err(Error::UnsupportedField(format!("{k} is not a rational function field")));
    }
    let mut places = Vec::new();
    for v in Place::relevant(k, q.entries())? {
        places.push((v.to_string(), springer(q, &v, trace)?));
    }
    Ok(LocalProfile {
        places,
        good_places: good_place_answer(q, trace)?,
    })
}

/// Local answer of `q` at one place of `F_q(x)`.
pub fn local_index(q: &QForm, v: &Place) -> Result<WittAnswer> {
    springer(q, v, true)
}

fn rf_index(q: &QForm, trace: bool) -> Result<WittAnswer> {
    let lp = local_profile_traced(q, trace)?;
    let lo = lp.min_lo();
    let hi = lp.min_hi();
    let cert = trace.then(|| {
        Certificate::new(
            "hasse-minkowski",
            format!("{}; minimum of the local indices over all places", claim(q, lo, hi)),
        )
        .children(lp.places.iter().filter_map(|(_, a)| a.certificate.clone()))
        .children(lp.good_places.certificate.clone())
    });
    Ok(WittAnswer::new(lo, hi, vec![Provenance::HasseMinkowski, Provenance::Springer], cert))
}

/// Image of a two-variable form in a Laurent completion.
pub fn map_form(q: &QForm, target: &Field, f: impl Fn(&Elem, &Field) -> Result<Elem>) -> Result<QForm> {
    let entries = q.entries().iter().map(|e| f(e, target)).collect::<Result<Vec<_>>>()?;
    QForm::new(target, entries)
}

fn two_var_index(q: &QForm, trace: bool) -> Result<WittAnswer> {
    let k = q.field();
    let l1 = twovar::x1_adic_field(k)?;
    let l2 = twovar::x2_adic_field(k)?;
    let a1 = compute(&map_form(q, &l1, twovar::to_x1_adic)?, trace);
    let a2 = compute(&map_form(q, &l2, twovar::to_x2_adic)?, trace);
    let hi = a1.hi.min(a2.hi).min((q.dim() / 2) as u32);
    let cert = trace.then(|| {
        Certificate::new(
            "completion-bound",
            format!("{}; the global index is at most each completion's index", claim(q, 0, hi)),
        )
        .children(a1.certificate.clone())
        .children(a2.certificate.clone())
    });
    Ok(WittAnswer::new(0, hi, vec![Provenance::DimBound, Provenance::Springer], cert))
}

fn need_exact(a: &WittAnswer, what: &str, q: &QForm) -> Error {
    Error::Undecided(format!("{what} of {q}: {} <= i_W <= {}", a.lo, a.hi))
}

pub fn is_isotropic(q: &QForm) -> Result<bool> {
    let a = compute(q, false);
    if a.lo >= 1 {
        Ok(true)
    } else if a.hi == 0 {
        Ok(false)
    } else {
        Err(need_exact(&a, "isotropy", q))
    }
}

pub fn is_anisotropic(q: &QForm) -> Result<bool> {
    Ok(!is_isotropic(q)?)
}

pub fn is_hyperbolic(q: &QForm) -> Result<bool> {
    if q.dim() % 2 == 1 {
        return Ok(false);
    }
    let half = (q.dim() / 2) as u32;
    let a = compute(q, false);
    if a.lo == half {
        Ok(true)
    } else if a.hi < half {
        Ok(false)
    } else {
        Err(need_exact(&a, "hyperbolicity", q))
    }
}

/// `q1 ≅ q2` iff the dimensions agree and `q1 ⊥ -q2` is hyperbolic.
pub fn is_isometric(q1: &QForm, q2: &QForm) -> Result<bool> {
    if q1.field() != q2.field() {
        return Err(Error::MixedFields);
    }
    if q1.dim() != q2.dim() {
        return Ok(false);
    }
    is_hyperbolic(&q1.orth_sum(&q2.neg())?)
}

/// Witt equivalence: the anisotropic parts agree.
pub fn is_witt_equivalent(q1: &QForm, q2: &QForm) -> Result<bool> {
    if q1.field() != q2.field() {
        return Err(Error::MixedFields);
    }
    if q1.dim() % 2 != q2.dim() % 2 {
        return Ok(false);
    }
    is_hyperbolic(&q1.orth_sum(&q2.neg())?)
}

/// Invariants of the anisotropic part.
#[derive(Clone, Debug, Serialize)]
pub struct Kernel {
    pub dim: usize,
    /// Representative of the determinant class (1 for the zero form).
    pub det: String,
    /// Witt invariant of the kernel as a formal symbol sum.
    pub hasse: Vec<(String, String)>,
    pub owner: String,
}

/// `q ≅ copies·ℍ ⊥ q_an`, with `q_an` described by its invariants.
pub fn witt_decompose(q: &QForm) -> Result<(u32, Kernel)> {
    let c = witt_value(q)?;
    let k = q.field();
    let dim = q.dim() - 2 * c as usize;
    let sign = if c % 2 == 1 { k.int(-1) } else { k.one() };
    let det = &q.product() * &sign;
    let mut hasse = Vec::new();
    if dim > 0 {
        // The kernel's Hasse invariant is its Witt invariant minus the
        // correction for its own dimension and determinant.
        let mut s = q.witt_invariant()?;
        for (a, b) in crate::forms::witt_correction(k, dim, &det) {
            s.push_raw(a, b);
        }
        hasse = s.symbols().iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    }
    Ok((
        c,
        Kernel {
            dim,
            det: det.to_string(),
            hasse,
            owner: k.to_string(),
        },
    ))
}

/// Complete isometry invariant of the Witt class over fields with finitely
/// many square classes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WittKey {
    /// Anisotropic dimension and whether its determinant is a square.
    Finite(u8, bool),
    /// Keys of the two residue forms.
    Valued(Box<WittKey>, Box<WittKey>),
}

/// Witt class of `q`, for finite, p-adic and Laurent-over-those fields.
pub fn witt_class_key(q: &QForm) -> Result<WittKey> {
    match q.field().kind() {
        FieldKind::Finite(_) => {
            if q.dim() == 0 {
                return Ok(WittKey::Finite(0, true));
            }
            let i = witt_value(q)?;
            let dim = q.dim() as u32 - 2 * i;
            let det = q.product();
            let det_an = if i % 2 == 1 { -det } else { det };
            Ok(WittKey::Finite(dim as u8, dim == 0 || det_an.is_square()?))
        }
        FieldKind::PAdic { .. } | FieldKind::Laurent { .. } => {
            let v = Intrinsic::new(q.field())?;
            let (q1, q2) = residue_forms(q, &v)?;
            Ok(WittKey::Valued(Box::new(witt_class_key(&q1)?), Box::new(witt_class_key(&q2)?)))
        }
        _ => Err(Error::InfiniteSquareClassGroup),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> Field {
        Field::finite(p).unwrap()
    }

    #[test]
    fn spec_examples() {
        let f3 = f(3);
        assert_eq!(witt_index(&QForm::hyperbolic(&f3)).value(), Some(1));
        assert_eq!(witt_index(&QForm::from_ints(&f3, &[1, 1]).unwrap()).value(), Some(0));
        let q3 = Field::padic(3).unwrap();
        let a = witt_index(&QForm::from_ints(&q3, &[1, 1, 1, 1]).unwrap());
        assert_eq!(a.value(), Some(2));
        assert!(a.provenance.contains(&Provenance::Springer));
        let l = Field::laurent(&f3, "t").unwrap();
        let t = l.gen("t").unwrap();
        assert_eq!(witt_index(&QForm::new(&l, vec![l.one(), t.clone()]).unwrap()).value(), Some(0));
        // 2 = -1 in F_3, so <1, 2> is already hyperbolic
        let q = QForm::new(&l, vec![l.one(), l.int(2), t.clone(), &l.int(2) * &t]).unwrap();
        assert!(is_isotropic(&q).unwrap());
        let q = QForm::new(&l, vec![l.one(), l.one(), t.clone(), t.clone()]).unwrap();
        assert!(is_anisotropic(&q).unwrap());
        assert!(is_isotropic(&QForm::from_ints(&q3, &[1, 1, 1]).unwrap()).unwrap());
        assert!(is_hyperbolic(&QForm::from_ints(&f3, &[1, -1, 1, -1]).unwrap()).unwrap());
    }

    #[test]
    fn isometry_examples() {
        let f5 = f(5);
        assert!(is_isometric(&QForm::from_ints(&f5, &[1, 1]).unwrap(), &QForm::from_ints(&f5, &[2, 2]).unwrap()).unwrap());
        let f3 = f(3);
        assert!(!is_isometric(&QForm::from_ints(&f3, &[1, 1]).unwrap(), &QForm::from_ints(&f3, &[1, 2]).unwrap()).unwrap());
    }

    #[test]
    fn rf_local_profile_examples() {
        let k = Field::rational_function(&f(3), "x").unwrap();
        let x = k.gen("x").unwrap();
        let q = QForm::new(&k, vec![k.one(), x.clone(), -&x, k.int(-1)]).unwrap();
        let lp = local_profile(&q).unwrap();
        let vx = lp.places.iter().find(|(n, _)| n == "v_(x)").unwrap();
        assert_eq!(vx.1.value(), Some(2));
        let q = QForm::from_ints(&k, &[1, 1]).unwrap();
        let lp = local_profile(&q).unwrap();
        let inf = lp.places.iter().find(|(n, _)| n == "v_inf").unwrap();
        assert_eq!(inf.1.value(), Some(0));
        let q = QForm::new(&k, (1..=8).map(|_| k.one()).collect()).unwrap();
        let lp = local_profile(&q).unwrap();
        assert!(lp.good_places.lo >= 3);
    }

    #[test]
    fn decompose_examples() {
        let f3 = f(3);
        let (c, ker) = witt_decompose(&QForm::from_ints(&f3, &[1, 1, 1]).unwrap()).unwrap();
        assert_eq!((c, ker.dim, ker.det.as_str()), (1, 1, "2"));
        let (c, ker) = witt_decompose(&QForm::from_ints(&f3, &[1, -1, 1]).unwrap()).unwrap();
        assert_eq!((c, ker.dim, ker.det.as_str()), (1, 1, "1"));
        let q3 = Field::padic(3).unwrap();
        let (c, ker) = witt_decompose(&QForm::from_ints(&q3, &[1, 1, 1, 1]).unwrap()).unwrap();
        assert_eq!((c, ker.dim), (2, 0));
    }

    #[test]
    fn u_certificate_threshold() {
        assert_eq!(u_certificate(8, 8), 0);
        assert_eq!(u_certificate(9, 8), 1);
        assert_eq!(u_certificate(8, 4), 2);
        assert_eq!(u_certificate(3, 2), 1);
    }
}
