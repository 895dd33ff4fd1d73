//! Generators and independent oracles shared by the property suites and the
//! acceptance runner.
#![allow(dead_code)]

use proptest::prelude::*;
use qfwitt::lgp::{shift_lgp, shift_statement, FactStore, Statement};
use qfwitt::witt::{self, witt_index};
use qfwitt::{Elem, Field, QForm};

/// Raw entry `(c0 + c1 t + c2 t^2) t^e`, read in each field as described in
/// [`entry`].
#[derive(Clone, Copy, Debug)]
pub struct EntrySpec {
    pub c0: i64,
    pub c1: i64,
    pub c2: i64,
    pub e: i64,
}

pub fn entry_spec() -> impl Strategy<Value = EntrySpec> {
    (1i64..=2, 0i64..3, 0i64..3, -1i64..=2).prop_map(|(c0, c1, c2, e)| EntrySpec { c0, c1, c2, e })
}

pub fn entry_spec_with_exp(exps: &'static [i64]) -> impl Strategy<Value = EntrySpec> {
    (1i64..=2, 0i64..3, 0i64..3, proptest::sample::select(exps))
        .prop_map(|(c0, c1, c2, e)| EntrySpec { c0, c1, c2, e })
}

pub fn test_fields() -> Vec<Field> {
    let f3 = Field::finite(3).unwrap();
    vec![
        f3.clone(),
        Field::finite(5).unwrap(),
        Field::padic(3).unwrap(),
        Field::laurent(&f3, "t").unwrap(),
    ]
}

/// Finite fields take the integer `c0 (1 + c1 + c2)` (or 1 if it vanishes),
/// `Q_p` takes `(c0 + c1 p + c2 p^2) p^e`, and `F((t))` takes the Laurent
/// element itself.
pub fn entry(k: &Field, s: &EntrySpec) -> Elem {
    if k.is_finite() {
        let v = k.int(s.c0 * (1 + s.c1 + s.c2));
        return if v.is_zero() { k.one() } else { v };
    }
    let pi = k.uniformizer().unwrap();
    let unit = &(&k.int(s.c0) + &(&k.int(s.c1) * &pi)) + &(&k.int(s.c2) * &(&pi * &pi));
    &unit * &pi.pow(s.e).unwrap()
}

pub fn form(k: &Field, specs: &[EntrySpec]) -> QForm {
    QForm::new(k, specs.iter().map(|s| entry(k, s)).collect()).unwrap()
}

pub fn u_of(k: &Field) -> u64 {
    k.profile().u.finite().unwrap()
}

/// `i_W(q) <= i_W(q ⊥ phi) <= i_W(q) + dim phi`.
pub fn check_sum_inequality(k: &Field, a: &[EntrySpec], b: &[EntrySpec]) -> Result<(), String> {
    let q = form(k, a);
    let phi = form(k, b);
    let iq = witt::witt_value(&q).map_err(|e| e.to_string())?;
    let is = witt::witt_value(&q.orth_sum(&phi).unwrap()).map_err(|e| e.to_string())?;
    if is > iq + phi.dim() as u32 || is < iq {
        return Err(format!("{k}: i_W({q}) = {iq}, i_W(q ⊥ {phi}) = {is}"));
    }
    Ok(())
}

/// `dim q >= u + 2j - 1` forces `i_W(q) >= j`, checked for the largest such `j`.
pub fn check_large_dim(k: &Field, a: &[EntrySpec]) -> Result<(), String> {
    let q = form(k, a);
    let u = u_of(k) as i64;
    let j = (q.dim() as i64 + 1 - u) / 2;
    let w = witt::witt_value(&q).map_err(|e| e.to_string())?;
    if j >= 1 && (w as i64) < j {
        return Err(format!("{k}: dim {} >= u + 2*{j} - 1 but i_W = {w}", q.dim()));
    }
    Ok(())
}

/// Truncated polynomials in `t` over `F_3`, lowest degree first.
fn poly_mod3(coeffs: &[i64]) -> Vec<i64> {
    coeffs.iter().map(|c| c.rem_euclid(3)).collect()
}

fn val(p: &[i64]) -> Option<usize> {
    p.iter().position(|&c| c != 0)
}

/// Exhaustive isotropy search over `F_3((t))`.
///
/// After rescaling each variable by a power of `t` every entry is
/// `u_i t^{e_i}` with `e_i` in {0, 1}. A vector with coordinates in `F_3` lifts
/// to a zero when `v(q(x)) > 2 v(2 u_i t^{e_i} x_i)` for some coordinate with
/// `x_i != 0` (Hensel). The search runs on `q` and on `t^-1 q`. An isotropic
/// form has a primitive zero with a unit coordinate at some `e_i = 0`, in one
/// of the two scalings, and its reduction modulo `t` passes the test.
pub fn brute_isotropic_f3t(specs: &[EntrySpec]) -> bool {
    let shifted: Vec<EntrySpec> = specs.iter().map(|s| EntrySpec { e: s.e - 1, ..*s }).collect();
    search_f3t(specs) || search_f3t(&shifted)
}

fn search_f3t(specs: &[EntrySpec]) -> bool {
    let n = specs.len();
    let norm: Vec<(Vec<i64>, usize)> = specs
        .iter()
        .map(|s| {
            let e = s.e.rem_euclid(2) as usize;
            (poly_mod3(&[s.c0, s.c1, s.c2]), e)
        })
        .collect();
    let total = 3usize.pow(n as u32);
    for idx in 1..total {
        let mut x = vec![0i64; n];
        let mut m = idx;
        for xi in x.iter_mut() {
            *xi = (m % 3) as i64;
            m /= 3;
        }
        let mut q = vec![0i64; 4];
        for (i, (u, e)) in norm.iter().enumerate() {
            let c2 = x[i] * x[i];
            for (d, uc) in u.iter().enumerate() {
                q[d + e] = (q[d + e] + uc * c2).rem_euclid(3);
            }
        }
        let vq = val(&q);
        let lifts = (0..n).any(|i| {
            x[i] != 0
                && match vq {
                    None => true,
                    Some(v) => v > 2 * norm[i].1,
                }
        });
        if lifts {
            return true;
        }
    }
    false
}

/// `i_W` over `F_3` of a diagonal form of dimension at most 3 by search.
pub fn brute_witt_f3(coeffs: &[i64]) -> u32 {
    assert!(coeffs.len() <= 3);
    let n = coeffs.len();
    for idx in 1..3usize.pow(n as u32) {
        let mut m = idx;
        let mut s = 0;
        for c in coeffs {
            let xi = (m % 3) as i64;
            m /= 3;
            s += c * xi * xi;
        }
        if s.rem_euclid(3) == 0 {
            return 1;
        }
    }
    0
}

/// Residue forms read off the raw entries, then the sum of their indices.
pub fn residue_sum_f3t(specs: &[EntrySpec]) -> u32 {
    let first: Vec<i64> = specs.iter().filter(|s| s.e.rem_euclid(2) == 0).map(|s| s.c0).collect();
    let second: Vec<i64> = specs.iter().filter(|s| s.e.rem_euclid(2) == 1).map(|s| s.c0).collect();
    brute_witt_f3(&first) + brute_witt_f3(&second)
}

pub fn check_springer_f3t(specs: &[EntrySpec]) -> Result<(), String> {
    let k = Field::laurent(&Field::finite(3).unwrap(), "t").unwrap();
    let q = form(&k, specs);
    let w = witt_index(&q);
    let brute = brute_isotropic_f3t(specs);
    let res = residue_sum_f3t(specs);
    if !w.exact || w.hi != res {
        return Err(format!("{q}: engine [{}, {}], residue oracle {res}", w.lo, w.hi));
    }
    if brute != (res > 0) || witt::is_isotropic(&q).unwrap() != brute {
        return Err(format!("{q}: isotropy search {brute}, residue oracle {res}"));
    }
    Ok(())
}

/// Forms over `F_3((t))` whose two residue forms have dimension at most 3.
pub fn springer_case() -> impl Strategy<Value = Vec<EntrySpec>> {
    (
        proptest::collection::vec(entry_spec_with_exp(&[-2, 0, 2]), 0..=3),
        proptest::collection::vec(entry_spec_with_exp(&[-1, 1, 3]), 0..=3),
        any::<bool>(),
    )
        .prop_filter("non-empty", |(a, b, _)| !a.is_empty() || !b.is_empty())
        .prop_map(|(a, b, interleave)| {
            if interleave {
                let mut out = Vec::new();
                for i in 0..a.len().max(b.len()) {
                    out.extend(b.get(i).copied());
                    out.extend(a.get(i).copied());
                }
                out
            } else {
                a.into_iter().chain(b).collect()
            }
        })
}

/// Shifting an all-forms LGP fact up and then down lands on the original.
pub fn check_shift_round_trip(facts: &[(u32, u32)], pick: usize, j: i64) -> Result<(), String> {
    let mut store = FactStore::new("k", "V");
    let ids: Vec<usize> = facts
        .iter()
        .map(|&(r, s)| store.add_given(Statement::Lgp { dim: None, r, s }))
        .collect();
    let id = ids[pick % ids.len()];
    let orig = store.facts[id].statement.clone();
    let up = shift_lgp(&mut store, id, j).map_err(|e| e.to_string())?;
    let down = shift_lgp(&mut store, up, -j).map_err(|e| e.to_string())?;
    if store.facts[down].statement != orig {
        return Err(format!("{orig:?} shifted by {j} and back gave {:?}", store.facts[down].statement));
    }
    let back = shift_statement(&shift_statement(&orig, j).unwrap(), -j).unwrap();
    if back != orig {
        return Err(format!("{orig:?} round trip gave {back:?}"));
    }
    Ok(())
}

pub fn multisets(reps: &[Elem], n: usize) -> Vec<Vec<Elem>> {
    fn go(reps: &[Elem], n: usize, start: usize, cur: &mut Vec<Elem>, out: &mut Vec<Vec<Elem>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..reps.len() {
            cur.push(reps[i].clone());
            go(reps, n, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(reps, n, 0, &mut Vec::new(), &mut out);
    out
}
