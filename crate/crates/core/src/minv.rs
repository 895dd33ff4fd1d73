//! Refined m-invariants `m_{i,j}`: the closed form, the recursion over a
//! complete discretely valued field, exhaustive enumeration over fields
//! with finitely many square classes, and audits of the known inequalities.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fields::{Count, Elem, Field, FieldKind, Profile};
use crate::forms::QForm;
use crate::witt::{self, WittKey};

/// A value of `m_{i,j}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MVal {
    Fin(u32),
    Inf,
}

impl MVal {
    pub fn finite(self) -> Option<u32> {
        match self {
            MVal::Fin(n) => Some(n),
            MVal::Inf => None,
        }
    }
}

impl fmt::Display for MVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MVal::Fin(n) => write!(f, "{n}"),
            MVal::Inf => write!(f, "inf"),
        }
    }
}

impl Serialize for MVal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MVal::Fin(n) => s.serialize_u32(*n),
            MVal::Inf => s.serialize_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MProvenance {
    ClosedForm,
    Recursion,
    Enumeration,
    BoundsOnly,
    Hypothetical,
}

/// An `(i, j)`-realizing form found by enumeration.
#[derive(Clone, Debug, Serialize)]
pub struct RealizingWitness {
    pub form: QForm,
    pub i: u32,
    pub j: u32,
    pub checked_sigmas: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MEntry {
    pub lo: MVal,
    pub hi: MVal,
    pub provenance: MProvenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<RealizingWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl MEntry {
    pub fn exact(v: u32, provenance: MProvenance) -> MEntry {
        MEntry {
            lo: MVal::Fin(v),
            hi: MVal::Fin(v),
            provenance,
            witness: None,
            note: None,
        }
    }

    pub fn bounds(lo: MVal, hi: MVal, note: &str) -> MEntry {
        MEntry {
            lo,
            hi,
            provenance: MProvenance::BoundsOnly,
            witness: None,
            note: Some(note.into()),
        }
    }

    pub fn value(&self) -> Option<MVal> {
        (self.lo == self.hi).then_some(self.lo)
    }
}

/// A partial table of `m_{i,j}` for one field or hypothetical profile.
#[derive(Clone, Debug)]
pub struct MTable {
    pub label: String,
    pub u: Option<u64>,
    pub m: Option<u64>,
    pub entries: BTreeMap<(u32, u32), MEntry>,
}

impl MTable {
    pub fn new(label: &str, u: Option<u64>, m: Option<u64>) -> MTable {
        MTable {
            label: label.into(),
            u,
            m,
            entries: BTreeMap::new(),
        }
    }

    pub fn for_field(k: &Field) -> MTable {
        let p = k.profile();
        MTable::new(&k.to_string(), p.u.finite(), p.m.finite())
    }

    pub fn set(&mut self, i: u32, j: u32, e: MEntry) {
        self.entries.insert((i, j), e);
    }

    pub fn get(&self, i: u32, j: u32) -> Option<&MEntry> {
        self.entries.get(&(i, j))
    }

    pub fn value(&self, i: u32, j: u32) -> Option<MVal> {
        self.get(i, j).and_then(|e| e.value())
    }

    /// The exact finite value, if present.
    pub fn fin(&self, i: u32, j: u32) -> Option<u32> {
        self.value(i, j).and_then(|v| v.finite())
    }

    /// Row of exact values at fixed `j` for `i = 1..=imax`.
    pub fn column(&self, j: u32, imax: u32) -> Vec<Option<MVal>> {
        (1..=imax).map(|i| self.value(i, j)).collect()
    }
}

impl Serialize for MTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Row<'a> {
            i: u32,
            j: u32,
            #[serde(flatten)]
            entry: &'a MEntry,
        }
        let rows: Vec<Row> = self.entries.iter().map(|(&(i, j), entry)| Row { i, j, entry }).collect();
        let mut st = s.serialize_struct("MTable", 4)?;
        st.serialize_field("label", &self.label)?;
        st.serialize_field("u", &self.u)?;
        st.serialize_field("m", &self.m)?;
        st.serialize_field("entries", &rows)?;
        st.end()
    }
}

fn clamp1(x: i64) -> u32 {
    x.max(1) as u32
}

/// `max{1, m + 2j - 1 - i}` when the bounds coincide, and the pair of
/// bounds otherwise.
pub fn m_closed_form(profile: &Profile, i: u32, j: u32) -> MEntry {
    closed_from(profile.u.finite(), profile.m.finite(), i, j)
}

fn closed_from(u: Option<u64>, m: Option<u64>, i: u32, j: u32) -> MEntry {
    let Some(u) = u else {
        return MEntry::bounds(MVal::Fin(1), MVal::Inf, "u-invariant not finite or unknown");
    };
    let shift = 2 * j as i64 - 1 - i as i64;
    let hi = clamp1(u as i64 + shift);
    let lo = match m {
        Some(m) => clamp1(m as i64 + shift),
        None => 1,
    };
    if lo == hi || hi == 1 {
        MEntry::exact(hi, MProvenance::ClosedForm)
    } else {
        MEntry::bounds(MVal::Fin(lo), MVal::Fin(hi), "m < u: only the general bounds apply")
    }
}

/// Closed-form table for a profile.
pub fn closed_table(label: &str, u: Option<u64>, m: Option<u64>, imax: u32, jmax: u32) -> MTable {
    let mut t = MTable::new(label, u, m);
    for i in 1..=imax {
        for j in 1..=jmax {
            t.set(i, j, closed_from(u, m, i, j));
        }
    }
    t
}

/// `m_{i,1}(K)` for the complete discretely valued field `K` whose residue
/// field has the values `residue(r) = m_{r,1}(k)` and `u(k) = u_k`.
pub fn m_cdvf_values(residue: &dyn Fn(u32) -> Option<u32>, u_k: u32, i: u32) -> Result<u32> {
    if i == 0 {
        return Err(Error::OutOfRange("i must be positive".into()));
    }
    let m = |r: u32| residue(r).ok_or_else(|| Error::IncompleteTable(format!("m_{{{r},1}} of the residue field")));
    if i >= 2 * u_k {
        return Ok(1);
    }
    if i <= u_k {
        let mut best = u32::MAX;
        for r in 1..=i {
            best = best.min(m(r)? + m(i - r + 1)?);
        }
        return Ok(best);
    }
    let mut best = m(i - u_k)?;
    for s in i.div_ceil(2)..=u_k {
        best = best.min(m(s)? + m(i - s + 1)?);
    }
    Ok(best)
}

/// `m_{i,1}(K)` from a table of the residue field.
pub fn m_cdvf(residue: &MTable, i: u32) -> Result<u32> {
    let u_k = residue
        .u
        .ok_or_else(|| Error::IncompleteTable("residue u-invariant unknown".into()))? as u32;
    // m_{r,1} = 1 for r >= u(k) whether or not it was recorded
    let f = |r: u32| residue.fin(r, 1).or((r >= u_k).then_some(1));
    m_cdvf_values(&f, u_k, i)
}

/// Table of `m_{i,1}` by recursion down to a finite field, which is
/// enumerated.
pub fn recursion_table(k: &Field, imax: u32) -> Result<MTable> {
    let mut t = MTable::for_field(k);
    match k.kind() {
        FieldKind::PAdic { .. } | FieldKind::Laurent { .. } => {
            let rk = k.residue_field()?;
            let u_k = rk
                .profile()
                .u
                .finite()
                .ok_or_else(|| Error::UnsupportedField(format!("{rk} has no finite u-invariant")))?
                as u32;
            let rt = recursion_table(&rk, u_k)?;
            for i in 1..=imax {
                let mut e = MEntry::exact(m_cdvf(&rt, i)?, MProvenance::Recursion);
                e.note = Some(format!("residue field {rk}"));
                t.set(i, 1, e);
            }
            Ok(t)
        }
        FieldKind::Finite(_) => {
            for i in 1..=imax {
                t.set(i, 1, m_enumerate(k, i, 1, None)?);
            }
            Ok(t)
        }
        _ => Err(Error::UnsupportedField(format!("no recursion for {k}"))),
    }
}

/// Table by enumeration.
pub fn enumerate_table(k: &Field, imax: u32, jmax: u32) -> Result<MTable> {
    let mut t = MTable::for_field(k);
    let cells: Vec<(u32, u32)> = (1..=imax).flat_map(|i| (1..=jmax).map(move |j| (i, j))).collect();
    let out: Vec<Result<((u32, u32), MEntry)>> = cells
        .par_iter()
        .map(|&(i, j)| Ok(((i, j), m_enumerate(k, i, j, None)?)))
        .collect();
    for r in out {
        let ((i, j), e) = r?;
        t.set(i, j, e);
    }
    Ok(t)
}

/// Witt-class arithmetic on keys over one leaf finite field.
struct KeyAlgebra {
    leaf: Field,
    nonsquare: Elem,
}

fn leaf_field(k: &Field) -> Result<Field> {
    match k.kind() {
        FieldKind::Finite(_) => Ok(k.clone()),
        FieldKind::PAdic { .. } | FieldKind::Laurent { .. } => leaf_field(&k.residue_field()?),
        _ => Err(Error::InfiniteSquareClassGroup),
    }
}

impl KeyAlgebra {
    fn new(k: &Field) -> Result<KeyAlgebra> {
        let leaf = leaf_field(k)?;
        let nonsquare = leaf.canonical_nonsquare()?;
        Ok(KeyAlgebra { leaf, nonsquare })
    }

    fn leaf_rep(&self, dim: u8, square: bool) -> Vec<Elem> {
        match (dim, square) {
            (0, _) => vec![],
            (1, true) => vec![self.leaf.one()],
            (1, false) => vec![self.nonsquare.clone()],
            _ => vec![self.leaf.one(), -&self.nonsquare],
        }
    }

    fn sum(&self, a: &WittKey, b: &WittKey) -> Result<WittKey> {
        match (a, b) {
            (WittKey::Finite(da, sa), WittKey::Finite(db, sb)) => {
                let mut e = self.leaf_rep(*da, *sa);
                e.extend(self.leaf_rep(*db, *sb));
                witt::witt_class_key(&QForm::new(&self.leaf, e)?)
            }
            (WittKey::Valued(a1, a2), WittKey::Valued(b1, b2)) => Ok(WittKey::Valued(
                Box::new(self.sum(a1, b1)?),
                Box::new(self.sum(a2, b2)?),
            )),
            _ => Err(Error::MixedFields),
        }
    }
}

/// Dimension of the anisotropic part of a Witt class.
pub fn anisotropic_dim(k: &WittKey) -> u32 {
    match k {
        WittKey::Finite(d, _) => *d as u32,
        WittKey::Valued(a, b) => anisotropic_dim(a) + anisotropic_dim(b),
    }
}

/// A Witt class and the indices of the representatives that sum to it.
type Rung = (WittKey, Vec<usize>);

/// Isometry classes of forms of each dimension `0..=dmax`, each with a
/// representative built from square-class representatives.
pub struct ClassLadder {
    pub reps: Vec<Elem>,
    /// `levels[d]`: Witt key of each class of dimension `d` and the indices
    /// into `reps` of a representative.
    pub levels: Vec<Vec<(WittKey, Vec<usize>)>>,
}

impl ClassLadder {
    pub fn build(k: &Field, dmax: usize) -> Result<ClassLadder> {
        let reps = k.square_class_reps()?;
        let alg = KeyAlgebra::new(k)?;
        let rep_keys = reps
            .iter()
            .map(|a| witt::witt_class_key(&QForm::new(k, vec![a.clone()])?))
            .collect::<Result<Vec<_>>>()?;
        let mut levels = vec![vec![(witt::witt_class_key(&QForm::empty(k))?, vec![])]];
        for _ in 0..dmax {
            let prev = levels.last().unwrap();
            let ext: Vec<Result<Vec<Rung>>> = prev
                .par_iter()
                .map(|(key, idx)| {
                    let start = idx.last().copied().unwrap_or(0);
                    let mut out = Vec::new();
                    for (r, rk) in rep_keys.iter().enumerate().skip(start) {
                        let mut nidx = idx.clone();
                        nidx.push(r);
                        out.push((alg.sum(key, rk)?, nidx));
                    }
                    Ok(out)
                })
                .collect();
            let mut seen: BTreeMap<WittKey, Vec<usize>> = BTreeMap::new();
            for chunk in ext {
                for (key, idx) in chunk? {
                    seen.entry(key).or_insert(idx);
                }
            }
            levels.push(seen.into_iter().collect());
        }
        Ok(ClassLadder { reps, levels })
    }

    pub fn form(&self, k: &Field, idx: &[usize]) -> QForm {
        QForm::new(k, idx.iter().map(|&r| self.reps[r].clone()).collect()).unwrap()
    }
}

/// Exhaustive search for the least dimension of an `(i, j)`-realizing form.
pub fn m_enumerate(k: &Field, i: u32, j: u32, dim_cap: Option<u32>) -> Result<MEntry> {
    if i == 0 || j == 0 {
        return Err(Error::OutOfRange("i and j must be positive".into()));
    }
    if k.square_class_reps().is_err() {
        return Err(Error::InfiniteSquareClassGroup);
    }
    let cap = match dim_cap {
        Some(c) => c,
        None => {
            let u = k
                .profile()
                .u
                .finite()
                .ok_or_else(|| Error::UnsupportedField(format!("{k} needs an explicit dimension cap")))?;
            clamp1(u as i64 + 2 * j as i64 - 1 - i as i64)
        }
    };
    let alg = KeyAlgebra::new(k)?;
    let ladder = ClassLadder::build(k, cap.max(i) as usize)?;
    let sigmas = &ladder.levels[i as usize];
    for d in 1..=cap {
        let cands: Vec<&(WittKey, Vec<usize>)> = ladder.levels[d as usize]
            .iter()
            .filter(|(key, _)| (d - anisotropic_dim(key)) / 2 < j)
            .collect();
        let hits: Vec<Result<Option<usize>>> = cands
            .par_iter()
            .map(|(key, _)| {
                for (skey, _) in sigmas {
                    let an = anisotropic_dim(&alg.sum(key, skey)?);
                    if (d + i - an) / 2 < j {
                        return Ok(None);
                    }
                }
                Ok(Some(sigmas.len()))
            })
            .collect();
        for (c, h) in cands.iter().zip(hits) {
            if let Some(n) = h? {
                let form = ladder.form(k, &c.1);
                return Ok(MEntry {
                    lo: MVal::Fin(d),
                    hi: MVal::Fin(d),
                    provenance: MProvenance::Enumeration,
                    witness: Some(RealizingWitness {
                        form,
                        i,
                        j,
                        checked_sigmas: n,
                    }),
                    note: None,
                });
            }
        }
    }
    Ok(MEntry {
        lo: MVal::Fin(cap + 1),
        hi: MVal::Inf,
        provenance: MProvenance::Enumeration,
        witness: None,
        note: Some(format!("no realizing form of dimension <= {cap}")),
    })
}

/// Check a candidate realizing form directly with the Witt engine, over all
/// `i`-dimensional forms with square-class representative entries.
pub fn check_realizing(q: &QForm, i: u32, j: u32) -> Result<bool> {
    let k = q.field();
    if witt::witt_value(q)? >= j {
        return Ok(false);
    }
    let ladder = ClassLadder::build(k, i as usize)?;
    for (_, idx) in &ladder.levels[i as usize] {
        let s = ladder.form(k, idx);
        if witt::witt_value(&q.orth_sum(&s)?)? < j {
            return Ok(false);
        }
    }
    Ok(true)
}

/// How a table should be filled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Auto,
    Enumerate,
    Recursion,
    Closed,
}

pub fn m_table(k: &Field, imax: u32, jmax: u32, method: Method) -> Result<MTable> {
    match method {
        Method::Closed => {
            let p = k.profile();
            let mut t = closed_table(&k.to_string(), p.u.finite(), p.m.finite(), imax, jmax);
            t.label = k.to_string();
            Ok(t)
        }
        Method::Enumerate => enumerate_table(k, imax, jmax),
        Method::Recursion => {
            if jmax > 1 {
                return Err(Error::UnsupportedShape("the recursion covers j = 1 only".into()));
            }
            recursion_table(k, imax)
        }
        Method::Auto => {
            let p = k.profile();
            let mut t = MTable::for_field(k);
            for i in 1..=imax {
                for j in 1..=jmax {
                    let c = m_closed_form(&p, i, j);
                    let e = if c.value().is_some() || k.square_class_reps().is_err() {
                        c
                    } else {
                        m_enumerate(k, i, j, None)?
                    };
                    t.set(i, j, e);
                }
            }
            Ok(t)
        }
    }
}

/// The table forced by the hypotheses of a non-real linked field with
/// `m = 6`.
pub fn linked_m6_table(imax: u32) -> MTable {
    let mut t = MTable::new("non-real linked field with m = 6 (hypothetical)", Some(8), Some(6));
    for i in 1..=imax {
        let v = match i {
            1..=3 => 6,
            4..=7 => 9 - i,
            _ => 1,
        };
        let mut e = MEntry::exact(v, MProvenance::Hypothetical);
        e.note = Some("forced by linkage and m = 6".into());
        t.set(i, 1, e);
    }
    t
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub rule: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AuditReport {
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    fn check(&mut self, ok: bool, rule: &str, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations.push(Violation {
                rule: rule.into(),
                detail: detail(),
            });
        }
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every recorded exact entry against the known inequalities.
pub fn monotonicity_audit(t: &MTable) -> AuditReport {
    let mut rep = AuditReport::default();
    let vals: BTreeMap<(u32, u32), MVal> =
        t.entries.iter().filter_map(|(&k, e)| e.value().map(|v| (k, v))).collect();
    let fin = |i: u32, j: u32| vals.get(&(i, j)).and_then(|v| v.finite());
    let any_inf = vals.values().any(|v| *v == MVal::Inf);
    if any_inf {
        for (&(i, j), v) in &vals {
            rep.check(*v == MVal::Inf, "infinite-propagation", || {
                format!("m_{{{i},{j}}} = {v} while another entry is infinite")
            });
        }
        return rep;
    }
    for &(i, j) in vals.keys() {
        let v = fin(i, j).unwrap() as i64;
        rep.check(v >= 1, "positive", || format!("m_{{{i},{j}}} = {v}"));
        for &(i2, j2) in vals.keys() {
            let w = fin(i2, j2).unwrap() as i64;
            if j2 == j && i2 > i {
                rep.check(w <= v, "initial-inequalities-a", || {
                    format!("m_{{{i2},{j}}} = {w} > m_{{{i},{j}}} = {v}")
                });
                let r = (i2 - i) as i64;
                rep.check(w >= v - r, "decreasing-i", || {
                    format!("m_{{{i2},{j}}} = {w} < m_{{{i},{j}}} - {r} = {}", v - r)
                });
            }
            if i2 == i && j2 > j {
                let s = (j2 - j) as i64;
                rep.check(w >= v, "initial-inequalities-b", || {
                    format!("m_{{{i},{j2}}} = {w} < m_{{{i},{j}}} = {v}")
                });
                rep.check(w <= v + 2 * s, "increasing-j", || {
                    format!("m_{{{i},{j2}}} = {w} > m_{{{i},{j}}} + 2*{s}")
                });
                // stripping s hyperbolic planes must leave a non-zero form;
                // otherwise only the upper bound holds (u = 1)
                if j >= i.div_ceil(2) && w > 2 * s {
                    rep.check(w == v + 2 * s, "large-j", || {
                        format!("m_{{{i},{j2}}} = {w} but m_{{{i},{j}}} + 2*{s} = {}", v + 2 * s)
                    });
                }
                if let Some(u) = t.u {
                    if j2 == j + 1 && (i as u64) < u + 2 * j as u64 {
                        rep.check(w > v, "increases-by-1", || {
                            format!("m_{{{i},{j2}}} = {w} < m_{{{i},{j}}} + 1")
                        });
                    }
                }
            }
        }
        if i == 1 {
            if let Some(m11) = fin(1, 1) {
                let m11 = m11 as i64;
                rep.check(v >= m11 + 2 * j as i64 - 2, "decreasing-j-at-i-1", || {
                    format!("m_{{1,{j}}} = {v} < m_{{1,1}} + 2*{j} - 2")
                });
            }
        }
        if let Some(m1j) = fin(1, j) {
            let m1j = m1j as i64;
            rep.check(v > m1j - i as i64, "decreasing-i-to-1", || {
                format!("m_{{{i},{j}}} = {v} < m_{{1,{j}}} - {i} + 1")
            });
        }
        let shift = 2 * j as i64 - 1 - i as i64;
        if let Some(m) = t.m {
            rep.check(v >= (m as i64 + shift).max(1), "lower-bound", || {
                format!("m_{{{i},{j}}} = {v} below max(1, m + 2j - 1 - i)")
            });
        }
        if let Some(u) = t.u {
            rep.check(v <= (u as i64 + shift).max(1), "upper-bound", || {
                format!("m_{{{i},{j}}} = {v} above max(1, u + 2j - 1 - i)")
            });
            if (i as i64) < u as i64 + 2 * j as i64 - 2 {
                rep.check(v >= 2, "at-least-2", || format!("m_{{{i},{j}}} = {v} with i < u + 2j - 2"));
            }
            if j == 1 && u >= 2 && (i as u64) < u {
                rep.check(v >= 2, "small-i-at-least-2", || format!("m_{{{i},1}} = {v} with i < u"));
            }
            if let Some(m) = t.m {
                if m == u || u as i64 + shift <= 1 {
                    rep.check(v == (m as i64 + shift).max(1), "equality-case", || {
                        format!("m_{{{i},{j}}} = {v} but the bounds coincide")
                    });
                }
            }
        }
    }
    rep
}

/// The u-invariant read off a `j = 1` column: the least `i` with
/// `m_{i,1} = 1`.
pub fn u_from_column(t: &MTable) -> Option<u32> {
    t.entries
        .iter()
        .filter(|(&(_, j), e)| j == 1 && e.value() == Some(MVal::Fin(1)))
        .map(|(&(i, _), _)| i)
        .min()
}

#[derive(Clone, Debug, Serialize)]
pub struct UAudit {
    pub consistent: bool,
    pub columns_agree: bool,
    pub detail: String,
}

/// If the `j = 1` columns agree, the u-invariants must too.
pub fn u_from_m_audit(a: &MTable, b: &MTable) -> UAudit {
    let common: Vec<u32> = a
        .entries
        .keys()
        .filter(|(_, j)| *j == 1)
        .map(|(i, _)| *i)
        .filter(|i| b.value(*i, 1).is_some() && a.value(*i, 1).is_some())
        .collect();
    let agree = !common.is_empty() && common.iter().all(|&i| a.value(i, 1) == b.value(i, 1));
    if !agree {
        return UAudit {
            consistent: true,
            columns_agree: false,
            detail: "columns differ, no constraint".into(),
        };
    }
    let consistent = a.u == b.u;
    UAudit {
        consistent,
        columns_agree: true,
        detail: match (consistent, a.u, b.u) {
            (true, _, _) => "columns agree and so do the u-invariants".into(),
            (false, x, y) => format!("columns agree but u = {x:?} vs {y:?}"),
        },
    }
}

impl From<Count> for MVal {
    fn from(c: Count) -> MVal {
        match c {
            Count::Finite(n) => MVal::Fin(n as u32),
            _ => MVal::Inf,
        }
    }
}
