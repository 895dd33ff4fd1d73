//! Embeddings of `F_q(x1, x2)` polynomials into Laurent completions: along
//! `x1`, along `x2 - f(x1)` and at the degree place of `x2`.

use super::{poly, Elem, Field, FieldKind, Repr};
use crate::error::{Error, Result};

pub(crate) fn parts(k: &Field) -> Result<(&Field, &str, &str)> {
    match k.kind() {
        FieldKind::TwoVar { base, x1, x2 } => Ok((base, x1, x2)),
        _ => Err(Error::UnsupportedField(format!("{k} is not a two-variable field"))),
    }
}

fn fresh_var(base: &Field, x1: &str, x2: &str) -> String {
    let used = base.generator_names();
    for cand in ["t", "u", "w", "s", "y"] {
        if cand != x1 && cand != x2 && !used.iter().any(|g| g == cand) {
            return cand.to_string();
        }
    }
    "tt".to_string()
}

/// `F_q(x2)((x1))`.
pub fn x1_adic_field(k: &Field) -> Result<Field> {
    let (base, x1, x2) = parts(k)?;
    Field::laurent(&Field::rational_function(base, x2)?, x1)
}

/// `F_q(x1)((x2))`.
pub fn x2_adic_field(k: &Field) -> Result<Field> {
    let (base, x1, x2) = parts(k)?;
    Field::laurent(&Field::rational_function(base, x1)?, x2)
}

/// `F_q(x1)`.
pub fn x1_field(k: &Field) -> Result<Field> {
    let (base, x1, _) = parts(k)?;
    Field::rational_function(base, x1)
}

/// Completion `F_q(x1)((t))` used for places `x2 - f(x1)` and infinity.
pub fn place_field(k: &Field) -> Result<Field> {
    let (base, x1, x2) = parts(k)?;
    Field::laurent(&Field::rational_function(base, x1)?, &fresh_var(base, x1, x2))
}

fn bivar(e: &Elem) -> Result<&std::collections::BTreeMap<(u32, u32), Repr>> {
    parts(e.field())?;
    match e.repr() {
        Repr::Bivar(m) => Ok(m),
        _ => unreachable!(),
    }
}

/// Write `e` as a polynomial in `x2` with coefficients in `F_q[x1]`
/// (as elements of `F_q(x1)`), lowest degree first.
pub fn coefficients_in_x2(e: &Elem) -> Result<Vec<Elem>> {
    let rf = x1_field(e.field())?;
    let base = rf.base().unwrap().clone();
    let m = bivar(e)?;
    let top = m.keys().map(|(_, b)| *b).max().unwrap_or(0) as usize;
    let mut polys: Vec<Vec<Repr>> = vec![Vec::new(); top + 1];
    for ((a, b), c) in m {
        let p = &mut polys[*b as usize];
        if p.len() <= *a as usize {
            p.resize(*a as usize + 1, base.zero_r());
        }
        p[*a as usize] = c.clone();
    }
    Ok(polys
        .into_iter()
        .map(|p| {
            rf.elem(Repr::Frac {
                num: poly::trim(&base, p),
                den: poly::one(&base),
            })
        })
        .collect())
}

/// Image in `F_q(x2)((x1))`.
pub fn to_x1_adic(e: &Elem, target: &Field) -> Result<Elem> {
    swap_embed(e, target, true)
}

/// Image in `F_q(x1)((x2))`.
pub fn to_x2_adic(e: &Elem, target: &Field) -> Result<Elem> {
    swap_embed(e, target, false)
}

fn swap_embed(e: &Elem, target: &Field, along_x1: bool) -> Result<Elem> {
    let m = bivar(e)?;
    let FieldKind::Laurent { base: rf, .. } = target.kind() else {
        return Err(Error::MixedFields);
    };
    let fq = rf.base().unwrap().clone();
    if m.is_empty() {
        return Ok(target.zero());
    }
    let key = |&(a, b): &(u32, u32)| if along_x1 { (a, b) } else { (b, a) };
    let lo = m.keys().map(|k| key(k).0).min().unwrap();
    let hi = m.keys().map(|k| key(k).0).max().unwrap();
    let mut coeffs: Vec<Vec<Repr>> = vec![Vec::new(); (hi - lo + 1) as usize];
    for (k, c) in m {
        let (t, o) = key(k);
        let p = &mut coeffs[(t - lo) as usize];
        if p.len() <= o as usize {
            p.resize(o as usize + 1, fq.zero_r());
        }
        p[o as usize] = c.clone();
    }
    let reprs: Vec<Repr> = coeffs
        .into_iter()
        .map(|p| Repr::Frac {
            num: poly::trim(&fq, p),
            den: poly::one(&fq),
        })
        .collect();
    Ok(target.elem(super::laurent_normalize(rf, lo as i64, reprs)))
}

/// Image in `F_q(x1)((t))` under `x2 = t + f`.
pub fn at_linear_place(e: &Elem, f: &Elem, target: &Field) -> Result<Elem> {
    let cs = coefficients_in_x2(e)?;
    let t = target.uniformizer()?;
    let x2 = &t + &target.embed(f)?;
    let mut acc = target.zero();
    for c in cs.iter().rev() {
        acc = &(&acc * &x2) + &target.embed(c)?;
    }
    Ok(acc)
}

/// Image in `F_q(x1)((t))` under `x2 = 1/t`.
pub fn at_infinity(e: &Elem, target: &Field) -> Result<Elem> {
    let cs = coefficients_in_x2(e)?;
    let tinv = target.uniformizer()?.inv()?;
    let mut acc = target.zero();
    for c in cs.iter().rev() {
        acc = &(&acc * &tinv) + &target.embed(c)?;
    }
    Ok(acc)
}
