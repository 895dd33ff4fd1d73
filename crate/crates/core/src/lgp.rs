//! Refined local-global principle LGP(r, s).
//!
//! Verdicts are available over `F_q(x)` with all places and over
//! `F_q(x1, x2)` with the places trivial on `F_q(x1)`. The module also builds
//! and verifies the two-variable counterexample family, and keeps a small
//! fact store closed under the shifting and going-down rules.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cert::Certificate;
use crate::error::{Error, Result};
use crate::fields::place::{Intrinsic, Place};
use crate::fields::{twovar, Count, Elem, Field, FieldKind};
use crate::forms::QForm;
use crate::minv::MVal;
use crate::witt::{self, map_form, u_certificate, witt_index, LocalProfile, Provenance, WittAnswer};

/// u-invariant assumed for residue fields of `F_q(x1)(x2)` at places of
/// degree at least 2 over `F_q(x1)`.
pub const RESIDUE_U: u64 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LgpStatus {
    Satisfied,
    Vacuous,
    Violated,
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlaceAnswer {
    pub place: String,
    pub answer: WittAnswer,
}

#[derive(Clone, Debug, Serialize)]
pub struct LgpVerdict {
    pub r: u32,
    pub s: u32,
    /// `None` when some local interval straddles `r`.
    pub local_ok: Option<bool>,
    pub places: Vec<PlaceAnswer>,
    pub global_witt: WittAnswer,
    pub status: LgpStatus,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub assumptions: Vec<String>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

fn local_condition(places: &[PlaceAnswer], r: u32) -> Option<bool> {
    if places.iter().all(|p| p.answer.lo >= r) {
        Some(true)
    } else if places.iter().any(|p| p.answer.hi < r) {
        Some(false)
    } else {
        None
    }
}

fn classify(local_ok: Option<bool>, global: &WittAnswer, s: u32) -> LgpStatus {
    match local_ok {
        Some(false) => LgpStatus::Vacuous,
        _ if global.lo >= s => LgpStatus::Satisfied,
        Some(true) if global.hi < s => LgpStatus::Violated,
        _ => LgpStatus::Undecided,
    }
}

fn collect_assumptions(places: &[PlaceAnswer], global: &WittAnswer) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let certs = places.iter().filter_map(|p| p.answer.certificate.as_ref()).chain(global.certificate.as_ref());
    for c in certs {
        for a in c.all_assumptions() {
            if !out.contains(&a) {
                out.push(a);
            }
        }
    }
    out
}

/// LGP(r, s) for `q` over `F_q(x)` (all places) or `F_q(x1, x2)` (places
/// trivial on `F_q(x1)`).
pub fn lgp_check(q: &QForm, r: u32, s: u32) -> Result<LgpVerdict> {
    let (places, note) = match q.field().kind() {
        FieldKind::RationalFunction { .. } => (rf_places(&witt::local_profile(q)?), String::new()),
        FieldKind::TwoVar { .. } => match two_var_places(q) {
            Ok(p) => (p, String::new()),
            Err(Error::UnsupportedShape(why)) => (Vec::new(), why),
            Err(e) => return Err(e),
        },
        _ => {
            return Err(Error::UnsupportedField(format!(
                "{} carries no supported place set",
                q.field()
            )))
        }
    };
    let global_witt = witt_index(q);
    let local_ok = if places.is_empty() { None } else { local_condition(&places, r) };
    let status = classify(local_ok, &global_witt, s);
    Ok(LgpVerdict {
        r,
        s,
        local_ok,
        assumptions: collect_assumptions(&places, &global_witt),
        places,
        global_witt,
        status,
        note,
    })
}

fn rf_places(lp: &LocalProfile) -> Vec<PlaceAnswer> {
    lp.places
        .iter()
        .map(|(l, a)| PlaceAnswer {
            place: l.clone(),
            answer: a.clone(),
        })
        .chain(std::iter::once(PlaceAnswer {
            place: "every other place".into(),
            answer: lp.good_places.clone(),
        }))
        .collect()
}

/// A place of `F_q(x1)(x2)` trivial on `F_q(x1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum V2Place {
    /// The place of `x2 - f` with `f` in `F_q(x1)`.
    Linear(Elem),
    /// The degree valuation, uniformizer `1/x2`.
    Infinity,
    /// The place of an irreducible `x2^2 + b x2 + c`.
    Quadratic { b: Elem, c: Elem },
}

impl V2Place {
    pub fn linear(f: &Elem) -> V2Place {
        V2Place::Linear(f.clone())
    }

    /// Rejects reducible quadratics.
    pub fn quadratic(b: &Elem, c: &Elem) -> Result<V2Place> {
        let four = b.field().int(4);
        let disc = &(b * b) - &(&four * c);
        if disc.is_zero() || disc.is_square()? {
            return Err(Error::UnsupportedShape(format!("x2^2 + ({b}) x2 + ({c}) is reducible")));
        }
        Ok(V2Place::Quadratic { b: b.clone(), c: c.clone() })
    }

    pub fn degree(&self) -> usize {
        match self {
            V2Place::Quadratic { .. } => 2,
            _ => 1,
        }
    }

    pub fn label(&self) -> String {
        fn term(c: &Elem, suffix: &str) -> String {
            if c.is_zero() {
                String::new()
            } else {
                format!(" + ({c}){suffix}")
            }
        }
        match self {
            V2Place::Infinity => "v_inf".into(),
            V2Place::Linear(f) => {
                let g = -f;
                format!("v_(x2{})", term(&g, ""))
            }
            V2Place::Quadratic { b, c } => format!("v_(x2^2{}{})", term(b, "*x2"), term(c, "")),
        }
    }
}

fn linear_answer(q: &QForm, f: &Elem) -> Result<WittAnswer> {
    let pf = twovar::place_field(q.field())?;
    Ok(witt_index(&map_form(q, &pf, |e, t| twovar::at_linear_place(e, f, t))?))
}

fn infinity_answer(q: &QForm) -> Result<WittAnswer> {
    let pf = twovar::place_field(q.field())?;
    Ok(witt_index(&map_form(q, &pf, twovar::at_infinity)?))
}

fn poly_rem(a: &[Elem], m: &[Elem]) -> Vec<Elem> {
    // m is monic
    let mut a = a.to_vec();
    let dm = m.len() - 1;
    while a.len() > dm {
        let lead = a.pop().unwrap();
        let shift = a.len() - dm;
        for (k, mk) in m.iter().take(dm).enumerate() {
            a[shift + k] = &a[shift + k] - &(&lead * mk);
        }
    }
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

fn poly_div_exact(a: &[Elem], m: &[Elem]) -> Vec<Elem> {
    let mut a = a.to_vec();
    let dm = m.len() - 1;
    let mut out = vec![a[0].field().zero(); a.len() - dm];
    while a.len() > dm {
        let lead = a.pop().unwrap();
        let shift = a.len() - dm;
        out[shift] = lead.clone();
        for (k, mk) in m.iter().take(dm).enumerate() {
            a[shift + k] = &a[shift + k] - &(&lead * mk);
        }
    }
    out
}

fn pi_valuation(e: &Elem, pi: &[Elem]) -> Result<u32> {
    let mut cs = twovar::coefficients_in_x2(e)?;
    while cs.last().is_some_and(|c| c.is_zero()) {
        cs.pop();
    }
    if cs.is_empty() {
        return Err(Error::ZeroEntry);
    }
    let mut v = 0;
    while cs.len() >= pi.len() && poly_rem(&cs, pi).is_empty() {
        cs = poly_div_exact(&cs, pi);
        v += 1;
    }
    Ok(v)
}

fn residue_assumption(label: &str) -> String {
    format!("u(kappa) <= {RESIDUE_U} for the residue field kappa at {label}")
}

fn quadratic_answer(q: &QForm, b: &Elem, c: &Elem, label: &str) -> Result<WittAnswer> {
    let one = b.field().one();
    let pi = [c.clone(), b.clone(), one];
    let mut counts = [0usize; 2];
    for e in q.entries() {
        counts[(pi_valuation(e, &pi)? % 2) as usize] += 1;
    }
    let lo = u_certificate(counts[0], RESIDUE_U) + u_certificate(counts[1], RESIDUE_U);
    let hi = (counts[0] / 2 + counts[1] / 2) as u32;
    let cert = Certificate::new(
        "u-certificate",
        format!(
            "i_W >= {lo} at {label}: residue forms of dimensions {} and {}, each with i_W >= (dim + 1 - u)/2",
            counts[0], counts[1]
        ),
    )
    .assume(residue_assumption(label));
    Ok(WittAnswer::new(lo, hi, vec![Provenance::Springer, Provenance::UCertificate], Some(cert)))
}

/// Local answer at one place of V2.
pub fn v2_local(q: &QForm, v: &V2Place) -> Result<WittAnswer> {
    twovar::parts(q.field())?;
    match v {
        V2Place::Linear(f) => linear_answer(q, f),
        V2Place::Infinity => infinity_answer(q),
        V2Place::Quadratic { b, c } => quadratic_answer(q, b, c, &v.label()),
    }
}

/// The places of V2 where some entry of `q` is not a unit. Entries must have
/// degree at most 1 in `x2`.
pub fn special_places(q: &QForm) -> Result<Vec<V2Place>> {
    twovar::parts(q.field())?;
    let mut out: Vec<V2Place> = Vec::new();
    for e in q.entries() {
        let mut cs = twovar::coefficients_in_x2(e)?;
        while cs.last().is_some_and(|c| c.is_zero()) {
            cs.pop();
        }
        match cs.len() {
            0 => return Err(Error::ZeroEntry),
            1 => {}
            2 => {
                let f = -&cs[0].div(&cs[1])?;
                let v = V2Place::Linear(f);
                if !out.contains(&v) {
                    out.push(v);
                }
            }
            _ => {
                return Err(Error::UnsupportedShape(format!(
                    "entry {e} has degree {} in x2; only linear entries are localized",
                    cs.len() - 1
                )))
            }
        }
    }
    out.push(V2Place::Infinity);
    Ok(out)
}

fn extra_offsets(k: &Field) -> Result<Vec<Elem>> {
    let rf = twovar::x1_field(k)?;
    let x1 = rf.gen(twovar::parts(k)?.1)?;
    let one = rf.one();
    let sq = &x1 * &x1;
    Ok(vec![
        rf.zero(),
        one.clone(),
        -&one,
        x1.clone(),
        -&x1,
        &x1 + &one,
        &x1 - &one,
        sq.clone(),
        &sq + &one,
        -&sq,
        &sq * &x1,
    ])
}

/// Default sample: the special places of the counterexample family, the
/// degree place, `x2 - f` for a fixed list of `f` and two quadratic places.
pub fn default_sample(k: &Field) -> Result<Vec<V2Place>> {
    let rf = twovar::x1_field(k)?;
    let x1 = rf.gen(twovar::parts(k)?.1)?;
    let one = rf.one();
    let mut out = vec![
        V2Place::Linear(rf.zero()),
        V2Place::Linear(-&one),
        V2Place::Linear(-&x1),
        V2Place::Infinity,
    ];
    for f in extra_offsets(k)? {
        let v = V2Place::Linear(f);
        if !out.contains(&v) {
            out.push(v);
        }
    }
    let nu = rf.embed(&rf.base().unwrap().canonical_nonsquare()?)?;
    out.push(V2Place::quadratic(&rf.zero(), &-&x1)?);
    out.push(V2Place::quadratic(&rf.zero(), &-&nu)?);
    Ok(out)
}

fn two_var_places(q: &QForm) -> Result<Vec<PlaceAnswer>> {
    let special = special_places(q)?;
    let mut places: Vec<PlaceAnswer> = special
        .par_iter()
        .map(|v| {
            Ok(PlaceAnswer {
                place: v.label(),
                answer: v2_local(q, v)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // every other place: all entries are units
    let good = extra_offsets(q.field())?
        .into_iter()
        .map(V2Place::Linear)
        .find(|v| !special.contains(v))
        .unwrap();
    let sample = v2_local(q, &good)?;
    let lo = u_certificate(q.dim(), RESIDUE_U).min(sample.hi);
    let what = "every place where all entries are units";
    let cert = Certificate::new(
        "good-places",
        format!(
            "{lo} <= i_W <= {} at {what}; lower bound from dim {} and u(kappa) <= {RESIDUE_U}, upper bound attained at {}",
            sample.hi,
            q.dim(),
            good.label()
        ),
    )
    .assume(residue_assumption(what))
    .children(sample.certificate.clone());
    places.push(PlaceAnswer {
        place: what.into(),
        answer: WittAnswer::new(lo, sample.hi, vec![Provenance::UCertificate, Provenance::Springer], Some(cert)),
    });
    Ok(places)
}

/// The counterexample form over `F_q(x1, x2)`.
#[derive(Clone, Debug, Serialize)]
pub struct CeForm {
    pub form: QForm,
    /// The anisotropic binary form over `F_q` that is tensored in.
    pub binary: QForm,
    pub n: u32,
    /// The pair (r, s) claimed to be violated.
    pub claimed: (u32, u32),
}

/// Anisotropic `<1, c>` over `F_q` with the smallest integer `c >= 1`, or
/// `<1, -nu>` when every integer is a square.
pub fn anisotropic_binary(ell: &Field) -> Result<QForm> {
    let p = ell
        .finite_data()
        .ok_or_else(|| Error::UnsupportedField(format!("{ell} is not finite")))?
        .p;
    for c in 1..p as i64 {
        if !ell.int(-c).is_square()? {
            return QForm::from_ints(ell, &[1, c]);
        }
    }
    QForm::new(ell, vec![ell.one(), -&ell.canonical_nonsquare()?])
}

/// `<x2 + 1, -x1 - x2, x1, x1 x2> ⊗ q` with the last `n` entries dropped.
pub fn build_ce_form(ell: &Field, n: u32) -> Result<CeForm> {
    build_ce_form_with(&anisotropic_binary(ell)?, n)
}

/// As [`build_ce_form`] with a chosen binary form over `F_q`.
pub fn build_ce_form_with(binary: &QForm, n: u32) -> Result<CeForm> {
    let ell = binary.field();
    if !ell.is_finite() {
        return Err(Error::UnsupportedField(format!("{ell} is not finite")));
    }
    if n >= 2 {
        return Err(Error::OutOfRange(format!("n = {n}; the family is defined for n < 2")));
    }
    let k = Field::two_var(ell, "x1", "x2")?;
    let x1 = k.gen("x1")?;
    let x2 = k.gen("x2")?;
    let one = k.one();
    let outer = QForm::new(&k, vec![&x2 + &one, -&(&x1 + &x2), x1.clone(), &x1 * &x2])?;
    let inner = QForm::new(&k, binary.entries().iter().map(|e| k.embed(e)).collect::<Result<Vec<_>>>()?)?;
    let mut form = outer.tensor(&inner)?;
    for _ in 0..n {
        form = form.without(form.dim() - 1);
    }
    Ok(CeForm {
        form,
        binary: binary.clone(),
        n,
        claimed: (2 - n, 1),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AnisotropyReport {
    pub anisotropic: bool,
    pub certificate: Certificate,
}

fn leaf_check(psi: &QForm, role: &str) -> Result<(bool, Certificate)> {
    let x = psi.field().gen(match psi.field().kind() {
        FieldKind::RationalFunction { var, .. } => var,
        _ => unreachable!(),
    })?;
    let layer = witt::springer(psi, &Place::from_elem(&x)?, true)?;
    let global = witt_index(psi);
    let aniso = (layer.lo == layer.hi && layer.hi == 0) || (global.exact && global.hi == 0);
    let cert = Certificate::new(
        "residue-leaf",
        format!(
            "{role} residue form {psi} is {}",
            if aniso { "anisotropic" } else { "not shown anisotropic" }
        ),
    )
    .children(layer.certificate)
    .children(global.certificate);
    Ok((aniso, cert))
}

/// Layered Springer argument: anisotropy over `F_q(x2)((x1))`, which implies
/// anisotropy over `F_q(x1, x2)`.
pub fn verify_ce_anisotropy(phi: &QForm) -> Result<AnisotropyReport> {
    let k = phi.field();
    if !matches!(k.kind(), FieldKind::TwoVar { .. }) {
        return Err(Error::UnsupportedShape(format!("{k} is not a two-variable field")));
    }
    if !k.base().is_some_and(Field::is_finite) {
        return Err(Error::UnsupportedShape("the base must be finite".into()));
    }
    let l1 = twovar::x1_adic_field(k)?;
    let img = map_form(phi, &l1, twovar::to_x1_adic)?;
    let (psi1, psi2) = witt::residue_forms(&img, &Intrinsic::new(&l1)?)?;
    let (a1, c1) = leaf_check(&psi1, "first")?;
    let (a2, c2) = leaf_check(&psi2, "second")?;
    let anisotropic = a1 && a2;
    let certificate = Certificate::new(
        "layered-springer",
        format!(
            "{phi} is {} over {l1}, hence over {k}",
            if anisotropic { "anisotropic" } else { "not shown anisotropic" }
        ),
    )
    .child(c1)
    .child(c2);
    Ok(AnisotropyReport {
        anisotropic,
        certificate,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleReport {
    pub places: Vec<PlaceAnswer>,
    pub min_lo: u32,
    pub assumptions: Vec<String>,
}

/// Local Witt indices of `phi` at the sampled places of V2, which must
/// include every place where an entry of `phi` is not a unit.
pub fn verify_ce_local(phi: &QForm, sample: &[V2Place]) -> Result<SampleReport> {
    let missing: Vec<String> = special_places(phi)?
        .into_iter()
        .filter(|v| !sample.contains(v))
        .map(|v| v.label())
        .collect();
    if !missing.is_empty() {
        return Err(Error::SampleMissingSpecialPlaces(missing.join(", ")));
    }
    let places = sample
        .par_iter()
        .map(|v| {
            Ok(PlaceAnswer {
                place: v.label(),
                answer: v2_local(phi, v)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_lo = places.iter().map(|p| p.answer.lo).min().unwrap_or(0);
    let mut assumptions: Vec<String> = Vec::new();
    for p in &places {
        for a in p.answer.certificate.iter().flat_map(|c| c.all_assumptions()) {
            if !assumptions.contains(&a) {
                assumptions.push(a);
            }
        }
    }
    Ok(SampleReport {
        places,
        min_lo,
        assumptions,
    })
}

/// A statement about all forms over a field with a fixed place set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Statement {
    /// Every form (of dimension `dim`, if given) satisfies LGP(r, s).
    Lgp {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<u32>,
        r: u32,
        s: u32,
    },
    /// Some form of dimension `dim` violates LGP(r, s).
    Counterexample { dim: u32, r: u32, s: u32 },
    /// `lo <= m_{i,j} <= hi`, with `hi = None` for no upper bound.
    MBound {
        i: u32,
        j: u32,
        lo: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hi: Option<u32>,
    },
}

impl Statement {
    fn lgp_covers(&self, n: u32) -> Option<(u32, u32)> {
        match *self {
            Statement::Lgp { dim, r, s } if dim.is_none_or(|d| d == n) => Some((r, s)),
            _ => None,
        }
    }
}

fn given() -> String {
    "given".into()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fact {
    pub statement: Statement,
    #[serde(default = "given")]
    pub rule: String,
    #[serde(default)]
    pub premises: Vec<usize>,
}

/// Append-only ledger of facts about one field and place set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactStore {
    #[serde(default)]
    pub field: String,
    #[serde(default)]
    pub places: String,
    pub facts: Vec<Fact>,
}

impl FactStore {
    pub fn new(field: &str, places: &str) -> FactStore {
        FactStore {
            field: field.into(),
            places: places.into(),
            facts: Vec::new(),
        }
    }

    pub fn find(&self, st: &Statement) -> Option<usize> {
        self.facts.iter().position(|f| &f.statement == st)
    }

    pub fn add_given(&mut self, st: Statement) -> usize {
        self.record(st, "given", Vec::new()).0
    }

    fn record(&mut self, st: Statement, rule: &str, premises: Vec<usize>) -> (usize, bool) {
        if let Some(i) = self.find(&st) {
            return (i, false);
        }
        self.facts.push(Fact {
            statement: st,
            rule: rule.into(),
            premises,
        });
        (self.facts.len() - 1, true)
    }

    pub fn statements(&self) -> Vec<&Statement> {
        self.facts.iter().map(|f| &f.statement).collect()
    }

    /// Rejects stores whose facts contradict each other.
    pub fn check_consistency(&self) -> Result<()> {
        for (a, fa) in self.facts.iter().enumerate() {
            match fa.statement {
                Statement::Counterexample { dim, r, s } => {
                    if r == 0 || s == 0 || dim < 2 * r {
                        return Err(Error::InconsistentFacts(format!(
                            "fact {a}: no form of dimension {dim} violates LGP({r}, {s})"
                        )));
                    }
                    for (b, fb) in self.facts.iter().enumerate() {
                        if let Some((r2, s2)) = fb.statement.lgp_covers(dim) {
                            if r2 <= r && s2 >= s {
                                return Err(Error::InconsistentFacts(format!(
                                    "fact {a} exhibits a counterexample at dimension {dim} that fact {b} rules out"
                                )));
                            }
                        }
                    }
                }
                Statement::MBound { i, j, lo, .. } => {
                    let mut best_lo = lo;
                    let mut best_hi: Option<u32> = None;
                    for fb in &self.facts {
                        if let Statement::MBound { i: i2, j: j2, lo, hi } = fb.statement {
                            if (i2, j2) == (i, j) {
                                best_lo = best_lo.max(lo);
                                best_hi = match (best_hi, hi) {
                                    (Some(x), Some(y)) => Some(x.min(y)),
                                    (x, y) => x.or(y),
                                };
                            }
                        }
                    }
                    if best_hi.is_some_and(|h| h < best_lo) {
                        return Err(Error::InconsistentFacts(format!(
                            "m_{{{i},{j}}} bounds are contradictory: lo {best_lo} > hi {}",
                            best_hi.unwrap()
                        )));
                    }
                }
                Statement::Lgp { s: 0, .. } => {
                    return Err(Error::InconsistentFacts(format!("fact {a}: LGP needs s >= 1")));
                }
                Statement::Lgp { .. } => {}
            }
        }
        Ok(())
    }
}

/// LGP(r + j, s + j) from LGP(r, s) for all forms.
pub fn shift_statement(st: &Statement, j: i64) -> Result<Statement> {
    let Statement::Lgp { dim: None, r, s } = *st else {
        return Err(Error::UnsupportedShape("shifting applies to statements about all forms".into()));
    };
    let (r2, s2) = (r as i64 + j, s as i64 + j);
    if r2 < 1 || s2 < 1 {
        return Err(Error::OutOfRange(format!("LGP({r2}, {s2})")));
    }
    Ok(Statement::Lgp {
        dim: None,
        r: r2 as u32,
        s: s2 as u32,
    })
}

/// Records the shift of fact `id` by `j` and returns the index of the result.
pub fn shift_lgp(store: &mut FactStore, id: usize, j: i64) -> Result<usize> {
    let st = store
        .facts
        .get(id)
        .ok_or_else(|| Error::OutOfRange(format!("no fact {id}")))?
        .statement
        .clone();
    let out = shift_statement(&st, j)?;
    let rule = if j >= 0 { "increase-r-and-s" } else { "decrease-r-and-s" };
    Ok(store.record(out, rule, vec![id]).0)
}

/// Closes the store under the going-down family of rules and returns the
/// indices of the new facts.
pub fn going_down_rule(store: &mut FactStore) -> Result<Vec<usize>> {
    store.check_consistency()?;
    let mut added = Vec::new();
    loop {
        let mut pending: Vec<(Statement, &'static str, Vec<usize>)> = Vec::new();
        let facts = store.facts.clone();
        for (a, fa) in facts.iter().enumerate() {
            for (b, fb) in facts.iter().enumerate() {
                match (&fa.statement, &fb.statement) {
                    (&Statement::Counterexample { dim: n, r, s: j }, &Statement::MBound { i, j: j2, lo, .. })
                        if j2 == j && n < lo =>
                    {
                        for s in 1..=i {
                            pending.push((Statement::Counterexample { dim: n + s, r, s: j }, "new-ce-from-old", vec![a, b]));
                        }
                    }
                    (&Statement::Lgp { dim: Some(n), r, s: j }, &Statement::MBound { j: j2, lo, .. })
                        if j2 == j && n <= lo =>
                    {
                        for d in 1..n {
                            pending.push((Statement::Lgp { dim: Some(d), r, s: j }, "less-than-refined-m", vec![a, b]));
                        }
                    }
                    _ => {}
                }
                if let (&Statement::Lgp { dim: Some(big), r, s: j }, &Statement::MBound { i, j: j2, lo, hi: Some(hi) }) =
                    (&fa.statement, &fb.statement)
                {
                    if j2 == j && lo == hi && big >= lo && big < lo + i {
                        for d in 1..lo {
                            pending.push((Statement::Lgp { dim: Some(d), r, s: j }, "going-down", vec![a, b]));
                        }
                    }
                }
                // all (n + i)-dim forms satisfy LGP(j, j) and an n-dim form has
                // local index >= j everywhere and global index < j
                if let (&Statement::Lgp { dim: Some(big), r: r0, s: s0 }, &Statement::Counterexample { dim: n, r: r1, s: s1 }) =
                    (&fa.statement, &fb.statement)
                {
                    if big > n {
                        let i = big - n;
                        for j in s1.max(r0)..=r1.min(s0) {
                            pending.push((Statement::MBound { i, j, lo: 1, hi: Some(n) }, "using-lgp-for-m", vec![a, b]));
                        }
                    }
                }
            }
        }
        let mut progress = false;
        for (st, rule, prem) in pending {
            let (id, new) = store.record(st, rule, prem);
            if new {
                added.push(id);
                progress = true;
            }
        }
        store.check_consistency()?;
        if !progress {
            return Ok(added);
        }
    }
}

/// Kind of place set for [`l_invariant_bounds`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlaceSetKind {
    /// Any non-empty set of non-trivial discrete valuations.
    Discrete,
    /// All discrete valuations of a one-variable function field over a
    /// complete discretely valued field.
    Semiglobal,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LExtras {
    #[serde(default)]
    pub isometry_lgp_holds: bool,
    /// A form violating LGP(r, 1) is known for this `r`.
    #[serde(default)]
    pub known_ce_at_r: Option<u32>,
    /// Whether the reduction graph of a regular model is a tree.
    #[serde(default)]
    pub semiglobal_tree: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LBounds {
    pub lo: u32,
    pub hi: MVal,
    pub rules: Vec<String>,
}

/// Bounds on `l(k, V)`, the least `r` such that every form satisfies LGP(r, 1).
pub fn l_invariant_bounds(u: Count, kind: PlaceSetKind, extras: &LExtras) -> Result<LBounds> {
    let mut lo = 1;
    let mut hi = MVal::Inf;
    let mut rules = Vec::new();
    if let Count::Finite(u) = u {
        let u = u as u32;
        hi = MVal::Fin((u + 2) / 2);
        rules.push(format!("u = {u}: hi = ceil((u + 1)/2)"));
        if extras.isometry_lgp_holds && u >= 2 && u.is_multiple_of(2) {
            hi = MVal::Fin(u / 2);
            rules.push("u even and isometry LGP holds: hi = u/2".into());
        }
    }
    if let Some(r) = extras.known_ce_at_r {
        lo = lo.max(r + 1);
        rules.push(format!("a form violates LGP({r}, 1): lo = {}", r + 1));
    }
    if kind == PlaceSetKind::Semiglobal {
        hi = hi.min(MVal::Fin(2));
        rules.push("semi-global field with all places: hi = 2".into());
        match extras.semiglobal_tree {
            Some(true) => {
                hi = MVal::Fin(1);
                rules.push("reduction graph is a tree: l = 1".into());
            }
            Some(false) => {
                lo = lo.max(2);
                rules.push("reduction graph is not a tree: l = 2".into());
            }
            None => {}
        }
    }
    if hi < MVal::Fin(lo) {
        return Err(Error::InconsistentFacts(format!("l bounds {lo} > {hi:?}")));
    }
    Ok(LBounds { lo, hi, rules })
}

/// `l` bounds for `L_r = ell(x1, ..., xr)` with `u(ell) = 2^i`, places
/// trivial on `L_{r-1}`.
pub fn rational_tower_l_bounds(i: u32, r: u32) -> Result<LBounds> {
    if r < 2 {
        return Err(Error::OutOfRange(format!("r = {r}; need r >= 2")));
    }
    l_invariant_bounds(
        Count::Finite(1u64 << (i + r)),
        PlaceSetKind::Discrete,
        &LExtras {
            isometry_lgp_holds: true,
            known_ce_at_r: Some(1 << (i + r - 2)),
            semiglobal_tree: None,
        },
    )
}

/// The counterexample theorem over `L_r = ell(x1, ..., xr)` for a base with
/// `u(ell) = 2^i` in the class A_i(2), emitted symbolically.
#[derive(Clone, Debug, Serialize)]
pub struct SymbolicCe {
    pub base: String,
    pub i: u32,
    pub r: u32,
    pub n: u64,
    pub dim: u64,
    /// The pair (r, s) claimed to be violated with respect to `V_r`.
    pub claimed: (u64, u64),
    /// Anisotropic form of dimension `2^i` over the base, found and checked
    /// by the Witt engine.
    pub base_form: QForm,
    pub form: String,
    pub certificate: Certificate,
    pub assumptions: Vec<String>,
}

fn anisotropic_of_dim(ell: &Field, dim: usize) -> Result<Option<QForm>> {
    fn go(ell: &Field, reps: &[Elem], start: usize, cur: &mut Vec<Elem>, dim: usize) -> Result<bool> {
        if cur.len() == dim {
            return Ok(true);
        }
        for idx in start..reps.len() {
            cur.push(reps[idx].clone());
            let q = QForm::new(ell, cur.clone())?;
            let w = witt_index(&q);
            if w.exact && w.hi == 0 && go(ell, reps, idx, cur, dim)? {
                return Ok(true);
            }
            cur.pop();
        }
        Ok(false)
    }
    let reps = ell.square_class_reps()?;
    let mut cur = Vec::new();
    if go(ell, &reps, 0, &mut cur, dim)? {
        Ok(Some(QForm::new(ell, cur)?))
    } else {
        Ok(None)
    }
}

/// Certificate for a `(2^{i+r} - n)`-dimensional form over `L_r` violating
/// LGP(2^{i+r-2} - n, 1) with respect to the places trivial on `L_{r-1}`.
///
/// Only the base form is computed. Everything over `L_r` is derived by rule,
/// and the inputs that cannot be checked here are listed as assumptions.
pub fn ce_theorem_certificate(ell: &Field, r: u32, n: u64) -> Result<SymbolicCe> {
    let prof = ell.profile();
    let i = prof
        .a2_index
        .ok_or_else(|| Error::UnsupportedField(format!("no A_i(2) class known for {ell}")))?;
    if r < 2 {
        return Err(Error::OutOfRange(format!("r = {r}; need r >= 2")));
    }
    let top = i + r - 2;
    if i + r > 40 {
        return Err(Error::OutOfRange(format!("2^{} is too large", i + r)));
    }
    if prof.u != Count::Finite(1 << i) {
        return Err(Error::UnsupportedField(format!("u({ell}) is not 2^{i}")));
    }
    let r_loc = 1u64 << top;
    if n >= r_loc {
        return Err(Error::OutOfRange(format!("n = {n}; need n < 2^{top}")));
    }
    let base_form = anisotropic_of_dim(ell, 1 << i)?
        .ok_or_else(|| Error::InconsistentFacts(format!("no anisotropic form of dimension 2^{i} over {ell}")))?;
    let base_cert = Certificate::new("witt-engine", format!("q = {base_form} is anisotropic over {ell}"))
        .children(witt_index(&base_form).certificate);

    let (xa, xb) = (format!("x{}", r - 1), format!("x{r}"));
    let lower = if r == 2 { "ell".to_string() } else { format!("L_{}", r - 2) };
    let inner = if r == 2 {
        "q".to_string()
    } else {
        let gens: Vec<String> = (1..=r - 2).map(|t| format!("x{t}")).collect();
        format!("q ⊗ <<{}>>", gens.join(", "))
    };
    let form = format!("<{xb} + 1, -{xa} - {xb}, {xa}, {xa}*{xb}> ⊗ {inner}");
    let big = 1u64 << (top + 2);
    let u_res = 1u64 << (top + 1);

    let mut lift = Certificate::new(
        "pfister-tensor",
        format!("Q = {inner} is anisotropic of dimension 2^{top} over {lower}, so u({lower}) = 2^{top}"),
    )
    .child(base_cert);
    if r > 2 {
        lift = lift.assume(format!("{lower} is in A_{top}(2)"));
    }

    let aniso = Certificate::new(
        "layered-springer",
        format!("{form} is anisotropic over {lower}({xb})(({xa})), hence over L_{r}"),
    )
    .child(Certificate::new(
        "residue-leaf",
        format!("second residue <1, {xb}> ⊗ Q is anisotropic over {lower}({xb})"),
    ))
    .child(
        Certificate::new(
            "layered-springer",
            format!("first residue <{xb} + 1, -{xb}> ⊗ Q is anisotropic over {lower}(({xb}))"),
        )
        .child(Certificate::new("residue-leaf", "residue Q is anisotropic over the base"))
        .child(Certificate::new("residue-leaf", "residue -Q is anisotropic over the base")),
    )
    .assume("Springer's theorem holds for complete discretely valued fields of residue characteristic != 2");

    let generic = u_certificate(big as usize, u_res) as u64;
    if generic < r_loc {
        return Err(Error::InconsistentFacts(format!(
            "dimension {big} with u = {u_res} only certifies Witt index {generic}"
        )));
    }
    let cases = vec![
        Certificate::new(
            "case-infinity",
            format!("at v_inf the form <{xb} + 1, -{xa} - {xb}> has isotropic residue <1, -1>, so i_W >= dim Q = {r_loc}"),
        ),
        Certificate::new(
            "case-special",
            format!(
                "at v_{xb}, v_({xb} + 1), v_({xa} + {xb}) a binary or ternary subform reduces to an isotropic form, so i_W >= {r_loc}"
            ),
        ),
        Certificate::new(
            "case-generic",
            format!(
                "at other pi every entry is a unit; dim {big} >= u(kappa_pi) + 2*2^{top} gives i_W >= {generic} >= {r_loc}"
            ),
        )
        .assume(format!(
            "u(kappa_pi) <= 2^{} = {u_res} for every residue field kappa_pi of L_{} over L_{}",
            top + 1,
            r,
            r - 1
        )),
    ];
    let local = Certificate::new("local-isotropy", format!("i_W(phi_v) >= {r_loc} for every v in V_{r}"))
        .children(cases)
        .assume(format!("L_{} is in A_{}(2)", r - 1, top + 1));

    let mut root = Certificate::new(
        "ce-theorem",
        format!(
            "a {}-dimensional subform of {form} violates LGP({}, 1) over L_{r} with respect to V_{r}",
            big - n,
            r_loc - n
        ),
    )
    .assume(format!("{ell} is in A_{i}(2)"))
    .child(lift)
    .child(aniso)
    .child(local);
    if n > 0 {
        root = root.child(Certificate::new(
            "witt-index-of-sum",
            format!("dropping {n} entries keeps anisotropy and lowers every local index by at most {n}"),
        ));
    }
    let assumptions = root.all_assumptions();
    Ok(SymbolicCe {
        base: ell.to_string(),
        i,
        r,
        n,
        dim: big - n,
        claimed: (r_loc - n, 1),
        base_form,
        form,
        certificate: root,
        assumptions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3x() -> Field {
        Field::rational_function(&Field::finite(3).unwrap(), "x").unwrap()
    }

    #[test]
    fn rf_verdicts() {
        let k = f3x();
        let x = k.gen("x").unwrap();
        let q = QForm::hyperbolic(&k).with(&k.one()).unwrap();
        assert_eq!(lgp_check(&q, 1, 1).unwrap().status, LgpStatus::Satisfied);
        let q = QForm::new(&k, vec![k.one(), k.one(), x.clone()]).unwrap();
        let v = lgp_check(&q, 1, 1).unwrap();
        assert_ne!(v.status, LgpStatus::Violated);
        assert!(v.local_ok.is_some());
    }

    #[test]
    fn ce_family_shape() {
        let f3 = Field::finite(3).unwrap();
        let ce = build_ce_form(&f3, 0).unwrap();
        assert_eq!(ce.form.dim(), 8);
        assert_eq!(ce.binary.to_string(), "<1, 1>");
        assert_eq!(ce.claimed, (2, 1));
        let ce1 = build_ce_form(&f3, 1).unwrap();
        assert_eq!(ce1.form.dim(), 7);
        assert_eq!(ce1.claimed, (1, 1));
        let f5 = Field::finite(5).unwrap();
        assert_eq!(build_ce_form(&f5, 0).unwrap().binary.to_string(), "<1, 2>");
        assert!(matches!(build_ce_form(&f3, 2), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn ce_anisotropy() {
        for p in [3, 5] {
            let ell = Field::finite(p).unwrap();
            let ce = build_ce_form(&ell, 0).unwrap();
            assert!(verify_ce_anisotropy(&ce.form).unwrap().anisotropic, "p = {p}");
        }
        let f3 = Field::finite(3).unwrap();
        let h = build_ce_form_with(&QForm::hyperbolic(&f3), 0).unwrap();
        assert!(!verify_ce_anisotropy(&h.form).unwrap().anisotropic);
    }

    #[test]
    fn ce_local_sample() {
        let f3 = Field::finite(3).unwrap();
        let ce = build_ce_form(&f3, 0).unwrap();
        let k = ce.form.field();
        let sample = default_sample(k).unwrap();
        let rep = verify_ce_local(&ce.form, &sample).unwrap();
        assert!(rep.min_lo >= 2, "{:?}", rep.places.iter().map(|p| (&p.place, p.answer.lo)).collect::<Vec<_>>());
        assert!(!rep.assumptions.is_empty());
        let err = verify_ce_local(&ce.form, &sample[1..]).unwrap_err();
        assert!(matches!(err, Error::SampleMissingSpecialPlaces(_)));
    }

    #[test]
    fn ce_violates() {
        let f3 = Field::finite(3).unwrap();
        for n in [0, 1] {
            let ce = build_ce_form(&f3, n).unwrap();
            let (r, s) = ce.claimed;
            let v = lgp_check(&ce.form, r, s).unwrap();
            assert_eq!(v.status, LgpStatus::Violated, "n = {n}");
        }
    }

    #[test]
    fn shifting() {
        let mut st = FactStore::new("k", "V");
        let a = st.add_given(Statement::Lgp { dim: None, r: 1, s: 1 });
        let b = shift_lgp(&mut st, a, 2).unwrap();
        assert_eq!(st.facts[b].statement, Statement::Lgp { dim: None, r: 3, s: 3 });
        assert_eq!(shift_lgp(&mut st, b, -2).unwrap(), a);
        let c = st.add_given(Statement::Lgp { dim: None, r: 2, s: 1 });
        assert!(matches!(shift_lgp(&mut st, c, -1), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn going_down_rules() {
        let mut st = FactStore::new("k", "V");
        st.add_given(Statement::MBound { i: 2, j: 1, lo: 5, hi: Some(5) });
        st.add_given(Statement::Lgp { dim: Some(6), r: 1, s: 1 });
        going_down_rule(&mut st).unwrap();
        for d in 1..5 {
            assert!(st.find(&Statement::Lgp { dim: Some(d), r: 1, s: 1 }).is_some(), "dim {d}");
        }

        let mut st = FactStore::new("k", "V");
        st.add_given(Statement::MBound { i: 2, j: 1, lo: 6, hi: None });
        st.add_given(Statement::Counterexample { dim: 3, r: 1, s: 1 });
        going_down_rule(&mut st).unwrap();
        for d in [4, 5, 6, 7] {
            assert!(st.find(&Statement::Counterexample { dim: d, r: 1, s: 1 }).is_some(), "dim {d}");
        }

        let mut st = FactStore::new("k", "V");
        st.add_given(Statement::Lgp { dim: Some(7), r: 1, s: 1 });
        st.add_given(Statement::Counterexample { dim: 4, r: 1, s: 1 });
        going_down_rule(&mut st).unwrap();
        assert!(st.find(&Statement::MBound { i: 3, j: 1, lo: 1, hi: Some(4) }).is_some());

        let mut st = FactStore::new("k", "V");
        st.add_given(Statement::MBound { i: 1, j: 1, lo: 5, hi: None });
        st.add_given(Statement::Counterexample { dim: 3, r: 1, s: 1 });
        st.add_given(Statement::Lgp { dim: Some(4), r: 1, s: 1 });
        assert!(matches!(going_down_rule(&mut st), Err(Error::InconsistentFacts(_))));
    }

    #[test]
    fn l_bounds() {
        let e = LExtras {
            isometry_lgp_holds: true,
            ..Default::default()
        };
        let b = l_invariant_bounds(Count::Finite(8), PlaceSetKind::Discrete, &e).unwrap();
        assert_eq!(b.hi, MVal::Fin(4));
        let b = l_invariant_bounds(Count::Finite(8), PlaceSetKind::Discrete, &LExtras::default()).unwrap();
        assert_eq!(b.hi, MVal::Fin(5));
        let b = rational_tower_l_bounds(1, 2).unwrap();
        assert_eq!((b.lo, b.hi), (3, MVal::Fin(4)));
        let e = LExtras {
            semiglobal_tree: Some(false),
            ..Default::default()
        };
        let b = l_invariant_bounds(Count::Infinite, PlaceSetKind::Semiglobal, &e).unwrap();
        assert_eq!((b.lo, b.hi), (2, MVal::Fin(2)));
    }

    #[test]
    fn symbolic_family() {
        let q3 = Field::padic(3).unwrap();
        let c = ce_theorem_certificate(&q3, 2, 0).unwrap();
        assert_eq!((c.i, c.dim, c.claimed), (2, 16, (4, 1)));
        assert_eq!(c.base_form.dim(), 4);
        assert!(c.assumptions.iter().any(|a| a.starts_with("u(kappa_pi) <= 2^3 ")));
        let f3 = Field::finite(3).unwrap();
        let c = ce_theorem_certificate(&f3, 3, 1).unwrap();
        assert_eq!((c.dim, c.claimed), (15, (3, 1)));
        assert!(c.form.contains("<<x1>>"));
        assert!(matches!(ce_theorem_certificate(&f3, 2, 2), Err(Error::OutOfRange(_))));
    }
}
