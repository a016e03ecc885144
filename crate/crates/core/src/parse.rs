//! Parser for the weight grammar
//!
//! ```text
//! expr   := factor ('*' factor)*
//! factor := ('n' | 'ln(n)' | 'lnln(n)' | number) ['^' signed-number]
//! ```
//!
//! Numbers accept an optional fraction and a decimal exponent (`1.5e-3`), so
//! the canonical printed form of a [`WeightExpr`] parses back to itself.

use alloc::string::{String, ToString};

use crate::error::{Error, Result};
use crate::math;
use crate::weight::{Base, WeightExpr};

pub fn parse_weight(text: &str) -> Result<WeightExpr> {
    let mut p = Parser { src: text, pos: 0 };
    let expr = p.expr()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

enum Atom {
    Base(Base),
    Number(f64),
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax { offset: self.pos, message: message.to_string() }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<WeightExpr> {
        let mut out = WeightExpr::one();
        self.factor(&mut out)?;
        loop {
            self.skip_ws();
            if !self.eat("*") {
                break;
            }
            self.factor(&mut out)?;
        }
        Ok(out)
    }

    fn factor(&mut self, out: &mut WeightExpr) -> Result<()> {
        self.skip_ws();
        let start = self.pos;
        let atom = if self.eat("lnln(n)") {
            Atom::Base(Base::LnLn)
        } else if self.eat("ln(n)") {
            Atom::Base(Base::Ln)
        } else if self.eat("n") {
            Atom::Base(Base::N)
        } else if matches!(self.peek(), Some(b'0'..=b'9' | b'.')) {
            Atom::Number(self.number()?)
        } else if self.peek().is_none() {
            return Err(self.error("unexpected end of input, expected a factor"));
        } else {
            return Err(self.error("expected `n`, `ln(n)`, `lnln(n)` or a number"));
        };

        self.skip_ws();
        let exponent = if self.eat("^") {
            self.skip_ws();
            let neg = if self.eat("-") {
                true
            } else {
                self.eat("+");
                false
            };
            let v = self.number()?;
            if neg {
                -v
            } else {
                v
            }
        } else {
            1.0
        };

        match atom {
            Atom::Base(b) => {
                let e = &mut out.exps[b as usize];
                *e += exponent;
                if !e.is_finite() {
                    self.pos = start;
                    return Err(self.error("exponent is not finite"));
                }
            }
            Atom::Number(v) => {
                if v <= 0.0 {
                    self.pos = start;
                    return Err(self.error("numeric factor must be positive"));
                }
                out.scale *= math::powf(v, exponent);
                if !(out.scale.is_finite() && out.scale > 0.0) {
                    self.pos = start;
                    return Err(self.error("scale overflows or underflows"));
                }
            }
        }
        Ok(())
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut digits = 0usize;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
            digits += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
                digits += 1;
            }
        }
        if digits == 0 {
            self.pos = start;
            return Err(self.error("expected a number"));
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
            if self.pos == exp_start {
                self.pos = mark;
                return Err(self.error("malformed number exponent"));
            }
        }
        let text = core::str::from_utf8(&bytes[start..self.pos]).map_err(|_| self.error("invalid utf-8"))?;
        let v: f64 = text.parse().map_err(|_| {
            let mut e = self.error("malformed number");
            if let Error::Syntax { offset, .. } = &mut e {
                *offset = start;
            }
            e
        })?;
        if !v.is_finite() {
            self.pos = start;
            return Err(self.error("number out of range"));
        }
        Ok(v)
    }
}

/// Replaces each `<name>` placeholder with the canonical text of a weight.
pub fn substitute(text: &str, name: &str, with: &WeightExpr) -> String {
    let mut key = String::from("<");
    key.push_str(name);
    key.push('>');
    text.replace(&key, &with.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn offset(e: Error) -> usize {
        match e {
            Error::Syntax { offset, .. } => offset,
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn reads_terms_and_scale() {
        let e = parse_weight("n^0.5 * ln(n)^1.3").unwrap();
        assert_eq!(e.exps, [0.5, 1.3, 0.0]);
        assert_eq!(e.scale, 1.0);

        let e = parse_weight("2 * n^-1").unwrap();
        assert_eq!(e.scale, 2.0);
        assert_eq!(e.exps, [-1.0, 0.0, 0.0]);
    }

    #[test]
    fn merges_duplicate_bases() {
        let e = parse_weight("n^0.25 * n^0.25").unwrap();
        assert_eq!(e.exps, [0.5, 0.0, 0.0]);
        let single = parse_weight("n^0.5").unwrap();
        for n in [10.0, 100.0] {
            assert_eq!(e.value_at(n), single.value_at(n));
        }
    }

    #[test]
    fn lnln_is_not_mistaken_for_ln() {
        let e = parse_weight("lnln(n)^2*ln(n)").unwrap();
        assert_eq!(e.exps, [0.0, 1.0, 2.0]);
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(offset(parse_weight("n^").unwrap_err()), 2);
        assert_eq!(offset(parse_weight("n * x").unwrap_err()), 4);
        assert_eq!(offset(parse_weight("").unwrap_err()), 0);
        assert_eq!(offset(parse_weight("n n").unwrap_err()), 2);
        assert_eq!(offset(parse_weight("0 * n").unwrap_err()), 0);
        assert_eq!(offset(parse_weight("n^1e").unwrap_err()), 3);
        assert_eq!(offset(parse_weight("ln(m)").unwrap_err()), 0);
    }

    #[test]
    fn placeholder_substitution() {
        let g = parse_weight("ln(n)").unwrap();
        let text = substitute("n^2*<G>", "G", &g);
        let w = parse_weight(&text).unwrap();
        assert_eq!(w.exps, [2.0, 1.0, 0.0]);
    }
}
