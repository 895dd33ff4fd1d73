//! Dense univariate polynomials over a [`Field`], stored as coefficient
//! vectors of raw representations, lowest degree first and trimmed.

use num_bigint::BigUint;

use super::{Field, Repr};
use crate::error::{Error, Result};

pub type PolyR = Vec<Repr>;

pub fn trim(k: &Field, mut a: PolyR) -> PolyR {
    while let Some(last) = a.last() {
        if k.is_zero_r(last) {
            a.pop();
        } else {
            break;
        }
    }
    a
}

pub fn is_zero(a: &[Repr]) -> bool {
    a.is_empty()
}

pub fn deg(a: &[Repr]) -> Option<usize> {
    if a.is_empty() {
        None
    } else {
        Some(a.len() - 1)
    }
}

pub fn constant(k: &Field, c: Repr) -> PolyR {
    trim(k, vec![c])
}

pub fn one(k: &Field) -> PolyR {
    vec![k.one_r()]
}

/// The monomial `x`.
pub fn x(k: &Field) -> PolyR {
    vec![k.zero_r(), k.one_r()]
}

pub fn is_one(k: &Field, a: &[Repr]) -> bool {
    a.len() == 1 && a[0] == k.one_r()
}

pub fn add(k: &Field, a: &[Repr], b: &[Repr]) -> PolyR {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let c = match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => k.add_r(x, y),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!(),
        };
        out.push(c);
    }
    trim(k, out)
}

pub fn neg(k: &Field, a: &[Repr]) -> PolyR {
    a.iter().map(|c| k.neg_r(c)).collect()
}

pub fn sub(k: &Field, a: &[Repr], b: &[Repr]) -> PolyR {
    add(k, a, &neg(k, b))
}

pub fn scale(k: &Field, c: &Repr, a: &[Repr]) -> PolyR {
    if k.is_zero_r(c) {
        return Vec::new();
    }
    trim(k, a.iter().map(|x| k.mul_r(c, x)).collect())
}

pub fn mul(k: &Field, a: &[Repr], b: &[Repr]) -> PolyR {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![k.zero_r(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if k.is_zero_r(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let t = k.mul_r(x, y);
            out[i + j] = k.add_r(&out[i + j], &t);
        }
    }
    trim(k, out)
}

/// Multiply by `x^n`.
pub fn shift(k: &Field, a: &[Repr], n: usize) -> PolyR {
    if a.is_empty() {
        return Vec::new();
    }
    let mut out = vec![k.zero_r(); n];
    out.extend_from_slice(a);
    out
}

pub fn divrem(k: &Field, a: &[Repr], b: &[Repr]) -> Result<(PolyR, PolyR)> {
    if b.is_empty() {
        return Err(Error::DivisionByZero);
    }
    let db = b.len() - 1;
    let lc_inv = k.inv_r(&b[db])?;
    let mut r: PolyR = a.to_vec();
    if r.len() < b.len() {
        return Ok((Vec::new(), r));
    }
    let mut q = vec![k.zero_r(); r.len() - db];
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let c = k.mul_r(&r[dr], &lc_inv);
        let s = dr - db;
        for (i, bc) in b.iter().enumerate() {
            let t = k.mul_r(&c, bc);
            r[s + i] = k.sub_r(&r[s + i], &t);
        }
        q[s] = c;
        r = trim(k, r);
    }
    Ok((trim(k, q), r))
}

pub fn rem(k: &Field, a: &[Repr], b: &[Repr]) -> Result<PolyR> {
    Ok(divrem(k, a, b)?.1)
}

/// Exact quotient; errors if the division leaves a remainder.
pub fn div_exact(k: &Field, a: &[Repr], b: &[Repr]) -> Result<PolyR> {
    let (q, r) = divrem(k, a, b)?;
    if !r.is_empty() {
        return Err(Error::DivisionUnrepresentable("inexact polynomial division".into()));
    }
    Ok(q)
}

/// Leading coefficient and monic associate.
pub fn monic(k: &Field, a: &[Repr]) -> Result<(Repr, PolyR)> {
    let lc = a.last().ok_or(Error::ZeroPolynomial)?.clone();
    let inv = k.inv_r(&lc)?;
    Ok((lc, scale(k, &inv, a)))
}

/// Monic gcd (zero if both inputs are zero).
pub fn gcd(k: &Field, a: &[Repr], b: &[Repr]) -> PolyR {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    while !b.is_empty() {
        let r = rem(k, &a, &b).expect("nonzero divisor");
        a = b;
        b = r;
    }
    if a.is_empty() {
        a
    } else {
        monic(k, &a).expect("nonzero").1
    }
}

/// Returns `(g, s, t)` with `s*a + t*b = g` and `g` monic.
pub fn ext_gcd(k: &Field, a: &[Repr], b: &[Repr]) -> Result<(PolyR, PolyR, PolyR)> {
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    let (mut s0, mut s1) = (one(k), Vec::new());
    let (mut t0, mut t1) = (Vec::new(), one(k));
    while !r1.is_empty() {
        let (q, r) = divrem(k, &r0, &r1)?;
        let s2 = sub(k, &s0, &mul(k, &q, &s1));
        let t2 = sub(k, &t0, &mul(k, &q, &t1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if r0.is_empty() {
        return Err(Error::ZeroPolynomial);
    }
    let inv = k.inv_r(r0.last().unwrap())?;
    Ok((scale(k, &inv, &r0), scale(k, &inv, &s0), scale(k, &inv, &t0)))
}

pub fn deriv(k: &Field, a: &[Repr]) -> PolyR {
    let out: PolyR = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| k.mul_r(&k.from_i64_r(i as i64), c))
        .collect();
    trim(k, out)
}

pub fn eval(k: &Field, a: &[Repr], x: &Repr) -> Repr {
    let mut acc = k.zero_r();
    for c in a.iter().rev() {
        acc = k.add_r(&k.mul_r(&acc, x), c);
    }
    acc
}

pub fn mulmod(k: &Field, a: &[Repr], b: &[Repr], m: &[Repr]) -> PolyR {
    rem(k, &mul(k, a, b), m).expect("nonzero modulus")
}

pub fn powmod_u128(k: &Field, a: &[Repr], mut e: u128, m: &[Repr]) -> PolyR {
    let mut base = rem(k, a, m).expect("nonzero modulus");
    let mut acc = rem(k, &one(k), m).expect("nonzero modulus");
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(k, &acc, &base, m);
        }
        e >>= 1;
        if e > 0 {
            base = mulmod(k, &base, &base, m);
        }
    }
    acc
}

pub fn powmod_big(k: &Field, a: &[Repr], e: &BigUint, m: &[Repr]) -> PolyR {
    let mut acc = rem(k, &one(k), m).expect("nonzero modulus");
    let base = rem(k, a, m).expect("nonzero modulus");
    for i in (0..e.bits()).rev() {
        acc = mulmod(k, &acc, &acc, m);
        if e.bit(i) {
            acc = mulmod(k, &acc, &base, m);
        }
    }
    acc
}

pub fn pow(k: &Field, a: &[Repr], e: u32) -> PolyR {
    let mut acc = one(k);
    for _ in 0..e {
        acc = mul(k, &acc, a);
    }
    acc
}

/// Multiplicity of `p` in `a` together with the cofactor.
pub fn strip_factor(k: &Field, a: &[Repr], p: &[Repr]) -> (u32, PolyR) {
    let mut a = a.to_vec();
    let mut n = 0;
    if a.is_empty() || p.len() < 2 {
        return (0, a);
    }
    loop {
        let (q, r) = divrem(k, &a, p).expect("nonzero");
        if !r.is_empty() {
            return (n, a);
        }
        a = q;
        n += 1;
    }
}
