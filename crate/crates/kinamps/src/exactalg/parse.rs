//! Canonical text grammar for expressions, e.g.
//! `(3/2)*k[1,2]^2*e[3,4] - c[2,1]` or `(num)/(den)`.
//!
//! Variables are written `k[i,j]`, `c[i,j]`, `e[i,j]` with integer leg labels,
//! or `c[i,*]`, `e[i,*]` for the distinguished-particle variables. Printing
//! emits terms in descending canonical (graded-lex) order; parsing accepts
//! any expression built from `+ - * / ^` and parentheses.

use num::{BigInt, One, Signed};

use super::poly::Polynomial;
use super::ratfn::RationalFunction;
use super::{Rational, VarId};
use crate::error::{Error, Result};

/// Name lookup between variable ids and the `k[i,j]` surface syntax.
pub trait VarResolver {
    /// Resolve a variable like `("c", "2", "*")` to its id.
    fn resolve_var(&self, kind: char, i: &str, j: &str) -> Option<VarId>;
    /// Render a variable id in the surface syntax.
    fn var_display(&self, v: VarId) -> Option<String>;
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Var(VarId),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str, r: &dyn VarResolver) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = bytes[start..i].iter().collect();
                let n = text
                    .parse::<BigInt>()
                    .map_err(|e| Error::Parse(format!("bad integer {text}: {e}")))?;
                out.push(Tok::Num(n));
            }
            'k' | 'c' | 'e' => {
                let kind = c;
                i += 1;
                if i >= bytes.len() || bytes[i] != '[' {
                    return Err(Error::Parse(format!("expected '[' after '{kind}'")));
                }
                i += 1;
                let mut labels: Vec<String> = vec![String::new()];
                while i < bytes.len() && bytes[i] != ']' {
                    match bytes[i] {
                        ',' => labels.push(String::new()),
                        ch if ch.is_ascii_digit() || ch == '*' => {
                            labels.last_mut().unwrap().push(ch)
                        }
                        ch => return Err(Error::Parse(format!("bad index char '{ch}'"))),
                    }
                    i += 1;
                }
                if i >= bytes.len() {
                    return Err(Error::Parse("unterminated variable index".into()));
                }
                i += 1; // consume ']'
                if labels.len() != 2 || labels.iter().any(|l| l.is_empty()) {
                    return Err(Error::Parse(format!(
                        "variable '{kind}[..]' needs exactly two indices"
                    )));
                }
                let v = r
                    .resolve_var(kind, &labels[0], &labels[1])
                    .ok_or_else(|| {
                        Error::Parse(format!("unknown variable {kind}[{},{}]", labels[0], labels[1]))
                    })?;
                out.push(Tok::Var(v));
            }
            other => return Err(Error::Parse(format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<RationalFunction> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RationalFunction> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = acc.mul(&self.factor()?);
                }
                Some(Tok::Slash) => {
                    self.bump();
                    acc = acc.div(&self.factor()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<RationalFunction> {
        let base = self.base()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let exp = match self.bump() {
                Some(Tok::Num(n)) => n.clone(),
                _ => return Err(Error::Parse("expected integer exponent after '^'".into())),
            };
            if exp.is_negative() {
                return Err(Error::Parse("negative exponents are not supported".into()));
            }
            let e: u32 = exp
                .to_string()
                .parse()
                .map_err(|_| Error::Parse("exponent too large".into()))?;
            let mut acc = RationalFunction::one();
            for _ in 0..e {
                acc = acc.mul(&base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<RationalFunction> {
        match self.bump().cloned() {
            Some(Tok::Num(n)) => Ok(RationalFunction::constant(Rational::from_integer(n))),
            Some(Tok::Var(v)) => Ok(RationalFunction::var(v)),
            Some(Tok::Minus) => Ok(self.factor()?.neg()),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(Error::Parse("expected ')'".into())),
                }
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

/// Parse an expression in the canonical grammar into a reduced rational function.
pub fn parse_ratfn(src: &str, r: &dyn VarResolver) -> Result<RationalFunction> {
    let toks = tokenize(src, r)?;
    let mut p = Parser { toks: &toks, pos: 0 };
    let f = p.expr()?;
    if p.pos != toks.len() {
        return Err(Error::Parse(format!(
            "trailing input at token {}",
            p.pos
        )));
    }
    Ok(f)
}

fn format_coeff(c: &Rational) -> String {
    if c.is_integer() {
        format!("{}", c.numer())
    } else {
        format!("({}/{})", c.numer(), c.denom())
    }
}

/// Canonical polynomial serialization: terms in descending graded-lex order.
pub fn format_poly(p: &Polynomial, r: &dyn VarResolver) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (idx, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if idx == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut parts: Vec<String> = Vec::new();
        if !abs.is_one() || m.is_one() {
            parts.push(format_coeff(&abs));
        }
        for &(v, e) in m.pairs() {
            let name = r
                .var_display(VarId(v))
                .unwrap_or_else(|| format!("v{v}"));
            if e == 1 {
                parts.push(name);
            } else {
                parts.push(format!("{name}^{e}"));
            }
        }
        out.push_str(&parts.join("*"));
    }
    out
}

/// Canonical rational-function serialization: `num` if the denominator is 1,
/// `(num)/(den)` otherwise.
pub fn format_ratfn(f: &RationalFunction, r: &dyn VarResolver) -> String {
    if f.den().as_constant().map_or(false, |c| c.is_one()) {
        format_poly(f.num(), r)
    } else {
        format!("({})/({})", format_poly(f.num(), r), format_poly(f.den(), r))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use std::collections::BTreeMap;

    /// Toy resolver mapping k/c/e with single-digit labels onto a flat id space.
    pub(crate) struct ToyResolver;

    impl VarResolver for ToyResolver {
        fn resolve_var(&self, kind: char, i: &str, j: &str) -> Option<VarId> {
            let fam = match kind {
                'k' => 0u32,
                'c' => 1,
                'e' => 2,
                _ => return None,
            };
            let i: u32 = i.parse().ok()?;
            let j: u32 = j.parse().ok()?;
            if !(1..=9).contains(&i) || !(1..=9).contains(&j) {
                return None;
            }
            Some(VarId(fam * 100 + (i - 1) * 10 + (j - 1)))
        }

        fn var_display(&self, v: VarId) -> Option<String> {
            let fam = v.0 / 100;
            let rest = v.0 % 100;
            let (i, j) = (rest / 10 + 1, rest % 10 + 1);
            let kind = ['k', 'c', 'e'].get(fam as usize)?;
            Some(format!("{kind}[{i},{j}]"))
        }
    }

    #[test]
    fn roundtrip_spec_example() {
        let src = "(3/2)*k[1,2]^2*e[3,4] - c[2,1]";
        let f = parse_ratfn(src, &ToyResolver).unwrap();
        let printed = format_ratfn(&f, &ToyResolver);
        assert_eq!(printed, src);
        let f2 = parse_ratfn(&printed, &ToyResolver).unwrap();
        assert_eq!(f, f2);
    }

    #[test]
    fn division_and_powers() {
        let f = parse_ratfn("(k[1,2]^2 - e[1,2]^2)/(k[1,2] - e[1,2])", &ToyResolver).unwrap();
        let g = parse_ratfn("k[1,2] + e[1,2]", &ToyResolver).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn unary_minus_and_constants() {
        let f = parse_ratfn("-3*c[1,2] + 1/2", &ToyResolver).unwrap();
        let mut map = BTreeMap::new();
        map.insert(
            ToyResolver.resolve_var('c', "1", "2").unwrap(),
            crate::exactalg::rat_int(1),
        );
        assert_eq!(f.evaluate(&map).unwrap(), crate::exactalg::rat(-5, 2));
    }
}
