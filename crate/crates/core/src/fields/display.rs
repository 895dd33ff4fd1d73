//! Printing of fields and elements in the input grammar, so that parsing
//! the printed text reproduces the value.

use std::fmt;

use super::{factor, Elem, Field, FieldKind, Repr};

fn coeff_needs_parens(s: &str) -> bool {
    s.contains('+') || s.contains('-') || s.contains('/')
}

fn operand_needs_parens(s: &str) -> bool {
    s.contains(['+', '-', '*', '/'])
}

fn term(coeff: &str, var_part: &str) -> String {
    match (coeff, var_part) {
        (c, "") => c.to_string(),
        ("1", v) => v.to_string(),
        (c, v) if coeff_needs_parens(c) => format!("({c})*{v}"),
        (c, v) => format!("{c}*{v}"),
    }
}

fn power(var: &str, k: i64) -> String {
    match k {
        0 => String::new(),
        1 => var.to_string(),
        k => format!("{var}^{k}"),
    }
}

fn join(terms: Vec<String>) -> String {
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join("+")
    }
}

/// Polynomial over `k` in the variable `var`, highest degree first.
pub(crate) fn poly_string(k: &Field, coeffs: &[Repr], var: &str) -> String {
    let terms = coeffs
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, c)| !k.is_zero_r(c))
        .map(|(i, c)| term(&repr_string(k, c), &power(var, i as i64)))
        .collect();
    join(terms)
}

pub(crate) fn repr_string(k: &Field, r: &Repr) -> String {
    match (k.kind(), r) {
        (_, Repr::Int(n)) => n.to_string(),
        (FieldKind::Finite(d), Repr::Poly(c)) => poly_string(d.base.as_ref().unwrap(), c, &d.gen),
        (_, Repr::Rat(q)) => {
            if q.is_integer() {
                q.numer().to_string()
            } else {
                format!("{}/{}", q.numer(), q.denom())
            }
        }
        (FieldKind::Laurent { base, var }, Repr::Laurent { val, coeffs }) => {
            let terms = coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !base.is_zero_r(c))
                .map(|(i, c)| term(&repr_string(base, c), &power(var, val + i as i64)))
                .collect();
            join(terms)
        }
        (FieldKind::RationalFunction { base, var }, Repr::Frac { num, den }) => {
            let n = poly_string(base, num, var);
            if super::poly::is_one(base, den) {
                return n;
            }
            let d = poly_string(base, den, var);
            let n = if n.contains(['+', '-']) { format!("({n})") } else { n };
            let d = if operand_needs_parens(&d) { format!("({d})") } else { d };
            format!("{n}/{d}")
        }
        (FieldKind::TwoVar { base, x1, x2 }, Repr::Bivar(m)) => {
            let terms = m
                .iter()
                .rev()
                .map(|((a, b), c)| {
                    let mut v = Vec::new();
                    if *a > 0 {
                        v.push(power(x1, *a as i64));
                    }
                    if *b > 0 {
                        v.push(power(x2, *b as i64));
                    }
                    term(&repr_string(base, c), &v.join("*"))
                })
                .collect();
            join(terms)
        }
        _ => panic!("representation does not match field"),
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&repr_string(self.field(), self.repr()))
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            FieldKind::Finite(d) => match &d.base {
                None => write!(f, "F({})", d.p),
                Some(b) => {
                    let standard = d.gen == "z"
                        && b.finite_data().unwrap().base.is_none()
                        && factor::smallest_irreducible(b, d.modulus.len() - 1).ok().as_ref()
                            == Some(&d.modulus);
                    if standard {
                        write!(f, "F({},{})", d.p, d.degree)
                    } else {
                        write!(f, "Ext({};{})", b, poly_string(b, &d.modulus, &d.gen))
                    }
                }
            },
            FieldKind::PAdic { p, .. } => write!(f, "Qp({p})"),
            FieldKind::Laurent { base, var } => write!(f, "LS({base};{var})"),
            FieldKind::RationalFunction { base, var } => write!(f, "RF({base};{var})"),
            FieldKind::TwoVar { base, x1, x2 } => write!(f, "TwoVar({base};{x1},{x2})"),
        }
    }
}
