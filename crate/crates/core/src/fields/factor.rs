//! Polynomial factorization over finite fields: squarefree decomposition,
//! distinct-degree splitting and Cantor-Zassenhaus equal-degree splitting.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::{self, PolyR};
use super::{Elem, Field, Repr};
use crate::error::{Error, Result};

/// Seed of the equal-degree splitting. The output is sorted, so it does not
/// depend on the seed; only the running time does.
const SPLIT_SEED: u64 = 0;

/// `f = unit * prod(g^e)` with monic irreducible `g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub field: Field,
    pub unit: Repr,
    pub factors: Vec<(PolyR, u32)>,
}

impl Factorization {
    pub fn unit_elem(&self) -> Elem {
        self.field.elem(self.unit.clone())
    }

    /// Multiply the factorization back out.
    pub fn expand(&self) -> PolyR {
        let k = &self.field;
        let mut acc = poly::constant(k, self.unit.clone());
        for (g, e) in &self.factors {
            acc = poly::mul(k, &acc, &poly::pow(k, g, *e));
        }
        acc
    }
}

fn order(k: &Field) -> Result<u128> {
    Ok(k
        .finite_data()
        .ok_or_else(|| Error::UnsupportedField("factorization needs a finite field".into()))?
        .order)
}

/// Sort key making factor lists canonical.
fn poly_key(k: &Field, f: &[Repr]) -> (usize, Vec<u128>) {
    (f.len(), f.iter().rev().map(|c| k.finite_index(c)).collect())
}

/// `x^(Q^i) mod f` for `i = 1..=n`.
fn frobenius_powers(k: &Field, f: &[Repr], n: usize, q: u128) -> Vec<PolyR> {
    let mut out = Vec::with_capacity(n);
    let mut h = poly::rem(k, &poly::x(k), f).unwrap();
    for _ in 0..n {
        h = poly::powmod_u128(k, &h, q, f);
        out.push(h.clone());
    }
    out
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's irreducibility test.
pub fn is_irreducible(k: &Field, f: &[Repr]) -> Result<bool> {
    let q = order(k)?;
    let n = poly::deg(f).ok_or(Error::ZeroPolynomial)?;
    if n == 0 {
        return Ok(false);
    }
    if n == 1 {
        return Ok(true);
    }
    let (_, f) = poly::monic(k, f)?;
    let pows = frobenius_powers(k, &f, n, q);
    let x = poly::rem(k, &poly::x(k), &f)?;
    if pows[n - 1] != x {
        return Ok(false);
    }
    for r in prime_divisors(n) {
        let h = poly::sub(k, &pows[n / r - 1], &x);
        if !poly::is_one(k, &poly::gcd(k, &h, &f)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The least monic irreducible of degree `d`, ordering by the coefficient
/// vector read from the top.
pub fn smallest_irreducible(k: &Field, d: usize) -> Result<PolyR> {
    let q = order(k)?;
    let total = q
        .checked_pow(d as u32)
        .ok_or_else(|| Error::UnsupportedField("degree too large".into()))?;
    for n in 0..total {
        let mut coeffs = Vec::with_capacity(d + 1);
        let mut m = n;
        for _ in 0..d {
            coeffs.push(k.finite_from_index(m % q));
            m /= q;
        }
        coeffs.push(k.one_r());
        if is_irreducible(k, &coeffs)? {
            return Ok(coeffs);
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

fn pth_root_poly(k: &Field, f: &[Repr], p: usize, q: u128) -> PolyR {
    let e = q / p as u128;
    let out = f
        .iter()
        .step_by(p)
        .map(|c| k.pow_r(c, e))
        .collect();
    poly::trim(k, out)
}

fn squarefree(k: &Field, f: &[Repr], p: usize, q: u128) -> Vec<(PolyR, u32)> {
    let mut out = Vec::new();
    let df = poly::deriv(k, f);
    let mut c = poly::gcd(k, f, &df);
    let mut w = poly::div_exact(k, f, &c).unwrap();
    let mut i = 1;
    while !poly::is_one(k, &w) {
        let y = poly::gcd(k, &w, &c);
        let z = poly::div_exact(k, &w, &y).unwrap();
        if !poly::is_one(k, &z) {
            out.push((z, i));
        }
        i += 1;
        w = y;
        c = poly::div_exact(k, &c, &w).unwrap();
    }
    if !poly::is_one(k, &c) {
        let root = pth_root_poly(k, &c, p, q);
        for (g, m) in squarefree(k, &root, p, q) {
            out.push((g, m * p as u32));
        }
    }
    out
}

fn distinct_degree(k: &Field, f: &[Repr], q: u128) -> Vec<(PolyR, usize)> {
    let mut out = Vec::new();
    let mut g = f.to_vec();
    let mut h = poly::rem(k, &poly::x(k), &g).unwrap();
    let mut d = 1;
    while poly::deg(&g).unwrap() >= 2 * d {
        h = poly::powmod_u128(k, &h, q, &g);
        let fd = poly::gcd(k, &poly::sub(k, &h, &poly::x(k)), &g);
        if !poly::is_one(k, &fd) {
            g = poly::div_exact(k, &g, &fd).unwrap();
            h = poly::rem(k, &h, &g).unwrap();
            out.push((fd, d));
        }
        d += 1;
    }
    if poly::deg(&g).unwrap() > 0 {
        let dg = poly::deg(&g).unwrap();
        out.push((g, dg));
    }
    out
}

fn equal_degree(k: &Field, f: &[Repr], d: usize, q: u128, rng: &mut ChaCha8Rng, out: &mut Vec<PolyR>) {
    let n = poly::deg(f).unwrap();
    if n == d {
        out.push(f.to_vec());
        return;
    }
    let e = (BigUint::from(q).pow(d as u32) - 1u32) / 2u32;
    loop {
        let a: PolyR = poly::trim(
            k,
            (0..n).map(|_| k.finite_from_index(rng.gen_range(0..q))).collect(),
        );
        if poly::deg(&a).unwrap_or(0) == 0 {
            continue;
        }
        let b = poly::sub(k, &poly::powmod_big(k, &a, &e, f), &poly::one(k));
        let g = poly::gcd(k, &b, f);
        let dg = poly::deg(&g).unwrap_or(0);
        if dg > 0 && dg < n {
            let h = poly::div_exact(k, f, &g).unwrap();
            equal_degree(k, &g, d, q, rng, out);
            equal_degree(k, &h, d, q, rng, out);
            return;
        }
    }
}

type CacheKey = (Field, PolyR);

fn cache() -> &'static RwLock<HashMap<CacheKey, Factorization>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Factorization>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Factor a nonzero polynomial over a finite field.
pub fn factor_poly(k: &Field, f: &[Repr]) -> Result<Factorization> {
    let q = order(k)?;
    if f.is_empty() {
        return Err(Error::ZeroPolynomial);
    }
    let key = (k.clone(), f.to_vec());
    if let Some(hit) = cache().read().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let (unit, monic) = poly::monic(k, f)?;
    let p = k.characteristic() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(SPLIT_SEED);
    let mut factors: Vec<(PolyR, u32)> = Vec::new();
    if poly::deg(&monic).unwrap() > 0 {
        for (s, mult) in squarefree(k, &monic, p, q) {
            for (g, d) in distinct_degree(k, &s, q) {
                let mut parts = Vec::new();
                equal_degree(k, &g, d, q, &mut rng, &mut parts);
                for part in parts {
                    match factors.iter_mut().find(|(h, _)| *h == part) {
                        Some(entry) => entry.1 += mult,
                        None => factors.push((part, mult)),
                    }
                }
            }
        }
    }
    factors.sort_by_key(|(g, _)| poly_key(k, g));
    let out = Factorization {
        field: k.clone(),
        unit,
        factors,
    };
    let mut w = cache().write().unwrap();
    if w.len() > 200_000 {
        w.clear();
    }
    w.insert(key, out.clone());
    Ok(out)
}

/// Monic irreducible factors of a polynomial, without multiplicities.
pub fn irreducible_divisors(k: &Field, f: &[Repr]) -> Result<Vec<PolyR>> {
    Ok(factor_poly(k, f)?.factors.into_iter().map(|(g, _)| g).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(k: &Field, c: &[i64]) -> PolyR {
        poly::trim(k, c.iter().map(|n| k.from_i64_r(*n)).collect())
    }

    #[test]
    fn small_factorizations() {
        let f3 = Field::finite(3).unwrap();
        let f = factor_poly(&f3, &p(&f3, &[1, 0, 1])).unwrap();
        assert_eq!(f.factors, vec![(p(&f3, &[1, 0, 1]), 1)]);
        let f = factor_poly(&f3, &p(&f3, &[2, 0, 1])).unwrap();
        assert_eq!(f.factors, vec![(p(&f3, &[1, 1]), 1), (p(&f3, &[2, 1]), 1)]);
        let f5 = Field::finite(5).unwrap();
        let f = factor_poly(&f5, &p(&f5, &[0, 0, 0, 1])).unwrap();
        assert_eq!(f.factors, vec![(p(&f5, &[0, 1]), 3)]);
    }

    #[test]
    fn pth_power_and_expand() {
        let f3 = Field::finite(3).unwrap();
        // (x^2+1)^3 (x+1)^2 * 2
        let a = poly::pow(&f3, &p(&f3, &[1, 0, 1]), 3);
        let b = poly::pow(&f3, &p(&f3, &[1, 1]), 2);
        let f = poly::scale(&f3, &f3.from_i64_r(2), &poly::mul(&f3, &a, &b));
        let fac = factor_poly(&f3, &f).unwrap();
        assert_eq!(fac.factors, vec![(p(&f3, &[1, 1]), 2), (p(&f3, &[1, 0, 1]), 3)]);
        assert_eq!(fac.expand(), f);
    }

    #[test]
    fn over_extension_field() {
        let f9 = Field::finite_ext(3, 2).unwrap();
        // x^2 + 1 splits over F_9
        let f = p(&f9, &[1, 0, 1]);
        let fac = factor_poly(&f9, &f).unwrap();
        assert_eq!(fac.factors.len(), 2);
        assert_eq!(fac.expand(), f);
    }

    #[test]
    fn irreducibility() {
        let f3 = Field::finite(3).unwrap();
        assert!(is_irreducible(&f3, &p(&f3, &[1, 2, 0, 1])).unwrap());
        assert!(!is_irreducible(&f3, &p(&f3, &[0, 1, 0, 1])).unwrap());
        assert_eq!(smallest_irreducible(&f3, 2).unwrap(), p(&f3, &[1, 0, 1]));
    }
}
