//! Sparse bivariate polynomials over a finite field.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::{Field, Repr};
use crate::error::Result;

pub type Bivar = BTreeMap<(u32, u32), Repr>;

pub fn add(k: &Field, a: &Bivar, b: &Bivar) -> Bivar {
    let mut out = a.clone();
    for (m, c) in b {
        let s = match out.get(m) {
            Some(x) => k.add_r(x, c),
            None => c.clone(),
        };
        if k.is_zero_r(&s) {
            out.remove(m);
        } else {
            out.insert(*m, s);
        }
    }
    out
}

pub fn mul(k: &Field, a: &Bivar, b: &Bivar) -> Bivar {
    let mut out = Bivar::new();
    for ((a1, a2), x) in a {
        for ((b1, b2), y) in b {
            let m = (a1 + b1, a2 + b2);
            let t = k.mul_r(x, y);
            let s = match out.get(&m) {
                Some(z) => k.add_r(z, &t),
                None => t,
            };
            if k.is_zero_r(&s) {
                out.remove(&m);
            } else {
                out.insert(m, s);
            }
        }
    }
    out
}

/// Graded order: total degree, then degree in the second variable.
fn grade_cmp(a: &(u32, u32), b: &(u32, u32)) -> Ordering {
    (a.0 + a.1, a.1).cmp(&(b.0 + b.1, b.1))
}

fn leading(f: &Bivar) -> Option<((u32, u32), &Repr)> {
    f.iter().max_by(|x, y| grade_cmp(x.0, y.0)).map(|(m, c)| (*m, c))
}

fn field_sqrt(k: &Field, c: &Repr) -> Result<Option<Repr>> {
    for e in k.finite_elements()? {
        if k.mul_r(e.repr(), e.repr()) == *c {
            return Ok(Some(e.repr().clone()));
        }
    }
    Ok(None)
}

/// `f` is a square in `k(x1, x2)` iff it is the square of a polynomial,
/// which is recovered term by term from the top.
pub fn is_square(k: &Field, f: &Bivar) -> Result<bool> {
    let Some((m0, c0)) = leading(f) else {
        return Ok(false);
    };
    if m0.0 % 2 == 1 || m0.1 % 2 == 1 {
        return Ok(false);
    }
    let Some(s0) = field_sqrt(k, c0)? else {
        return Ok(false);
    };
    let g0 = (m0.0 / 2, m0.1 / 2);
    let two_s0_inv = k.inv_r(&k.add_r(&s0, &s0))?;
    let mut g = Bivar::new();
    g.insert(g0, s0);
    let mut last = g0;
    loop {
        let sq = mul(k, &g, &g);
        let neg: Bivar = sq.iter().map(|(m, c)| (*m, k.neg_r(c))).collect();
        let r = add(k, f, &neg);
        let Some((mr, cr)) = leading(&r) else {
            return Ok(true);
        };
        if mr.0 < g0.0 || mr.1 < g0.1 {
            return Ok(false);
        }
        let mn = (mr.0 - g0.0, mr.1 - g0.1);
        if grade_cmp(&mn, &last) != Ordering::Less {
            return Ok(false);
        }
        g.insert(mn, k.mul_r(cr, &two_s0_inv));
        last = mn;
    }
}
