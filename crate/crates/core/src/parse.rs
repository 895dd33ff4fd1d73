//! Text syntax for fields, elements and forms; the inverse of `Display`.
//!
//! Fields: `F(3)`, `F(9)`, `F(3,2)`, `Ext(F(3);z^2+1)`, `Qp(5)`, `LS(F(3);t)`,
//! `RF(F(3);x)`, `TwoVar(F(3);x1,x2)`. Elements: `+ - * / ^`, parentheses,
//! integers and generator names, e.g. `2*t^-1+1` or `-(x1+x2)`.

use num_bigint::BigInt;

use crate::brauer::SymbolSum;
use crate::error::{Error, Result};
use crate::fields::{Elem, Field, Repr};
use crate::forms::QForm;

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Cursor<'a> {
        Cursor { s: s.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn error(&self, what: &str) -> Error {
        let src = String::from_utf8_lossy(self.s);
        Error::Parse(format!("{what} at offset {} in {src:?}", self.pos))
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            if self.pos == start && !self.s[self.pos].is_ascii_alphabetic() {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a name"));
        }
        Ok(String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }

    fn digits(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a number"));
        }
        Ok(String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }

    fn small(&mut self) -> Result<u64> {
        let d = self.digits()?;
        d.parse().map_err(|_| self.error("number too large"))
    }

    /// Raw text up to the matching close parenthesis at depth zero.
    fn until_close(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        let mut depth = 0i32;
        while self.pos < self.s.len() {
            match self.s[self.pos] {
                b'(' => depth += 1,
                b')' if depth == 0 => break,
                b')' => depth -= 1,
                _ => {}
            }
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.s[start..self.pos]).trim().to_string()
    }
}

fn prime_power(n: u64) -> Result<(u64, u32)> {
    if n < 2 {
        return Err(Error::Parse(format!("{n} is not a field order")));
    }
    let p = (2..).take_while(|d| d * d <= n).find(|d| n.is_multiple_of(*d)).unwrap_or(n);
    if p == 2 {
        return Err(Error::EvenCharacteristic);
    }
    let (mut m, mut d) = (n, 0);
    while m % p == 0 {
        m /= p;
        d += 1;
    }
    if m != 1 {
        return Err(Error::CompositeP(n));
    }
    Ok((p, d))
}

/// Parses a field descriptor.
pub fn parse_field(src: &str) -> Result<Field> {
    let mut c = Cursor::new(src);
    let k = field(&mut c)?;
    if !c.at_end() {
        return Err(c.error("trailing input"));
    }
    Ok(k)
}

fn field(c: &mut Cursor) -> Result<Field> {
    let head = c.ident()?;
    c.expect(b'(')?;
    let k = match head.as_str() {
        "F" => {
            let n = c.small()?;
            if c.eat(b',') {
                let d = c.small()?;
                Field::finite_ext(n, u32::try_from(d).map_err(|_| c.error("degree too large"))?)?
            } else {
                let (p, d) = prime_power(n)?;
                Field::finite_ext(p, d)?
            }
        }
        "Qp" => Field::padic(c.small()?)?,
        "LS" | "RF" | "Ext" => {
            let base = field(c)?;
            c.expect(b';')?;
            match head.as_str() {
                "LS" => Field::laurent(&base, &c.ident()?)?,
                "RF" => Field::rational_function(&base, &c.ident()?)?,
                _ => extension(c, &base)?,
            }
        }
        "TwoVar" => {
            let base = field(c)?;
            c.expect(b';')?;
            let x1 = c.ident()?;
            c.expect(b',')?;
            let x2 = c.ident()?;
            Field::two_var(&base, &x1, &x2)?
        }
        _ => return Err(c.error(&format!("unknown field constructor {head}"))),
    };
    c.expect(b')')?;
    Ok(k)
}

fn extension(c: &mut Cursor, base: &Field) -> Result<Field> {
    let text = c.until_close();
    let gen = text
        .split(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
        .find(|w| w.chars().next().is_some_and(|ch| ch.is_ascii_alphabetic()))
        .ok_or_else(|| c.error("modulus has no variable"))?
        .to_string();
    let carrier = Field::rational_function(base, &gen)?;
    let m = parse_elem(&text, &carrier)?;
    match m.repr() {
        Repr::Frac { num, den } if den.len() == 1 => Field::extension(base, num.clone(), &gen),
        _ => Err(c.error("modulus must be a polynomial")),
    }
}

/// Parses an element of `k`.
pub fn parse_elem(src: &str, k: &Field) -> Result<Elem> {
    let mut c = Cursor::new(src);
    let e = expr(&mut c, k)?;
    if !c.at_end() {
        return Err(c.error("trailing input"));
    }
    Ok(e)
}

fn expr(c: &mut Cursor, k: &Field) -> Result<Elem> {
    let mut acc = if c.eat(b'-') { -&term(c, k)? } else { term(c, k)? };
    loop {
        if c.eat(b'+') {
            acc = &acc + &term(c, k)?;
        } else if c.eat(b'-') {
            acc = &acc - &term(c, k)?;
        } else {
            return Ok(acc);
        }
    }
}

fn term(c: &mut Cursor, k: &Field) -> Result<Elem> {
    let mut acc = unary(c, k)?;
    loop {
        if c.eat(b'*') {
            acc = &acc * &unary(c, k)?;
        } else if c.eat(b'/') {
            acc = acc.div(&unary(c, k)?)?;
        } else {
            return Ok(acc);
        }
    }
}

fn unary(c: &mut Cursor, k: &Field) -> Result<Elem> {
    if c.eat(b'-') {
        return Ok(-&unary(c, k)?);
    }
    let base = atom(c, k)?;
    if c.eat(b'^') {
        let neg = c.eat(b'-');
        let e = c.small()? as i64;
        return base.pow(if neg { -e } else { e });
    }
    Ok(base)
}

fn atom(c: &mut Cursor, k: &Field) -> Result<Elem> {
    match c.peek() {
        Some(b'(') => {
            c.pos += 1;
            let e = expr(c, k)?;
            c.expect(b')')?;
            Ok(e)
        }
        Some(ch) if ch.is_ascii_digit() => {
            let d = c.digits()?;
            let n: BigInt = d.parse().map_err(|_| c.error("bad integer"))?;
            Ok(k.from_bigint(&n))
        }
        Some(ch) if ch.is_ascii_alphabetic() => {
            let name = c.ident()?;
            k.gen(&name)
        }
        _ => Err(c.error("expected an operand")),
    }
}

/// Parses `<e1, ..., en>` over `k`.
pub fn parse_form(src: &str, k: &Field) -> Result<QForm> {
    let mut c = Cursor::new(src);
    c.expect(b'<')?;
    let mut entries = Vec::new();
    if !c.eat(b'>') {
        loop {
            let e = expr(&mut c, k)?;
            if e.is_zero() {
                return Err(Error::ZeroEntry);
            }
            entries.push(e);
            if c.eat(b'>') {
                break;
            }
            c.expect(b',')?;
        }
    }
    if !c.at_end() {
        return Err(c.error("trailing input"));
    }
    QForm::new(k, entries)
}

/// Parses a list of forms separated by `;` over `k`.
pub fn parse_forms(src: &str, k: &Field) -> Result<Vec<QForm>> {
    src.split(';').filter(|s| !s.trim().is_empty()).map(|s| parse_form(s, k)).collect()
}

/// Parses a Brauer class `(a1,b1)+(a2,b2)+...` over `k`; `0` is the
/// trivial class.
pub fn parse_symbols(src: &str, k: &Field) -> Result<SymbolSum> {
    let mut c = Cursor::new(src);
    let mut out = SymbolSum::new(k);
    if c.eat(b'0') {
        return if c.at_end() { Ok(out) } else { Err(c.error("trailing input")) };
    }
    loop {
        c.expect(b'(')?;
        let a = expr(&mut c, k)?;
        c.expect(b',')?;
        let b = expr(&mut c, k)?;
        c.expect(b')')?;
        if a.is_zero() || b.is_zero() {
            return Err(Error::ZeroElement);
        }
        out.push_raw(a, b);
        if c.at_end() {
            return Ok(out);
        }
        c.expect(b'+')?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields() {
        assert_eq!(parse_field("LS(LS(F(3);t);s)").unwrap().to_string(), "LS(LS(F(3);t);s)");
        assert_eq!(parse_field("Qp(2)").unwrap_err(), Error::EvenCharacteristic);
        assert_eq!(parse_field("F(4)").unwrap_err(), Error::EvenCharacteristic);
        assert_eq!(parse_field("Qp(9)").unwrap_err(), Error::CompositeP(9));
        assert_eq!(parse_field("F(15)").unwrap_err(), Error::CompositeP(15));
        let k = parse_field("RF(F(9);x)").unwrap();
        assert_eq!(k.to_string(), "RF(F(3,2);x)");
        // lexicographically smallest monic irreducible quadratic over F_3
        assert_eq!(k.base().unwrap().finite_data().unwrap().modulus.len(), 3);
        assert_eq!(parse_field("F(3,2)").unwrap(), k.base().unwrap().clone());
        let e = parse_field("Ext(F(3); w^2 + 1)").unwrap();
        assert_eq!(e.to_string(), "Ext(F(3);w^2+1)");
        assert!(matches!(parse_field("Ext(F(3);w^2+2)"), Err(Error::UnsupportedShape(_))));
        assert!(matches!(parse_field("G(3)"), Err(Error::Parse(_))));
        assert!(matches!(parse_field("F(3) x"), Err(Error::Parse(_))));
        assert_eq!(
            parse_field(" TwoVar( F(5) ; a , b ) ").unwrap().to_string(),
            "TwoVar(F(5);a,b)"
        );
    }

    #[test]
    fn elements_and_forms() {
        let k = parse_field("LS(F(3);t)").unwrap();
        let e = parse_elem("2*t^-1+1", &k).unwrap();
        assert_eq!(e.valuation().unwrap(), -1);
        assert_eq!(parse_elem(&e.to_string(), &k).unwrap(), e);
        let q = parse_field("Qp(3)").unwrap();
        assert_eq!(parse_elem("7/9", &q).unwrap().valuation().unwrap(), -2);
        let f3 = parse_field("F(3)").unwrap();
        let h = parse_form("<1,-1>", &f3).unwrap();
        assert_eq!(h, QForm::hyperbolic(&f3));
        assert_eq!(parse_form("<0,1>", &f3).unwrap_err(), Error::ZeroEntry);
        let tv = parse_field("TwoVar(F(3);x1,x2)").unwrap();
        let phi = parse_form("<x2+1, -(x1+x2), x1, x1*x2>", &tv).unwrap();
        assert_eq!(parse_form(&phi.to_string(), &tv).unwrap(), phi);
        assert!(matches!(parse_form("<1,", &f3), Err(Error::Parse(_))));
        assert!(matches!(parse_elem("y", &f3), Err(Error::Parse(_))));
        assert_eq!(parse_form("<>", &f3).unwrap().dim(), 0);
        let rf = parse_field("RF(F(3);x)").unwrap();
        let s = parse_symbols("(x, -1) + (x+1, x)", &rf).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(parse_symbols(&s.to_string(), &rf).unwrap(), s);
        assert!(parse_symbols("0", &rf).unwrap().is_empty());
        assert_eq!(parse_symbols("(0,1)", &rf).unwrap_err(), Error::ZeroElement);
    }
}
