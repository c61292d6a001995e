//! A small expression language for coefficient fields.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*        (divisors must be constant)
//! unary := '-' unary | power
//! power := atom ('^' '-'? integer)?
//! atom  := number | 'x' integer | ('sin' | 'cos' | 'exp') '(' expr ')' | '(' expr ')'
//! ```
//!
//! Forms are `;`-separated pieces `dxI dxJ ...: expr`; a piece without a
//! `dx` prefix is a 0-form coefficient, e.g. `dx1: -x2; dx2: x1`.

use crate::error::{Error, Result};
use crate::exterior::{merge_sign, MultiIndex};

use super::field::Field;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
    line_base: usize,
    col_base: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line_base, col: self.col_base + self.pos + 1, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_alphabetic() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn integer(&mut self) -> Result<usize> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                self.pos = start;
                self.err("expected an integer")
            })
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let bytes = self.src;
        let mut i = self.pos;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                i = j;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
        }
        self.pos = i;
        std::str::from_utf8(&bytes[start..i]).ok().and_then(|s| s.parse().ok()).ok_or_else(|| {
            self.pos = start;
            self.err("malformed number")
        })
    }

    fn expr(&mut self) -> Result<Field> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Field> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.unary()?);
            } else if self.peek() == Some(b'/') {
                let at = self.pos;
                self.pos += 1;
                let d = self.unary()?;
                match d.as_const() {
                    Some(c) if c != 0.0 => acc = acc.scale(1.0 / c),
                    _ => {
                        self.pos = at;
                        return Err(self.err("division only by nonzero constants"));
                    }
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Field> {
        if self.eat(b'-') {
            Ok(self.unary()?.scale(-1.0))
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Field> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            self.skip_ws();
            let k = self.integer()? as i32;
            Ok(base.powi(if neg { -k } else { k }))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Field> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Field::constant(self.number()?)),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.ident();
                match name.as_str() {
                    "x" => {
                        let axis = self.integer()?;
                        if axis == 0 || axis > self.dim {
                            self.pos = start;
                            return Err(self.err(format!("coordinate x{axis} outside 1..={}", self.dim)));
                        }
                        Ok(Field::coord(axis))
                    }
                    "pi" => Ok(Field::constant(std::f64::consts::PI)),
                    "sin" | "cos" | "exp" => {
                        if !self.eat(b'(') {
                            return Err(self.err(format!("expected `(` after {name}")));
                        }
                        let arg = self.expr()?;
                        if !self.eat(b')') {
                            return Err(self.err("expected `)`"));
                        }
                        Ok(match name.as_str() {
                            "sin" => arg.sin(),
                            "cos" => arg.cos(),
                            _ => arg.exp(),
                        })
                    }
                    _ => {
                        self.pos = start;
                        Err(self.err(format!("unknown identifier `{name}`")))
                    }
                }
            }
            Some(c) => Err(self.err(format!("unexpected `{}`", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

fn parse_at(src: &str, dim: usize, line: usize, col: usize) -> Result<Field> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, dim, line_base: line, col_base: col };
    let f = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(f)
}

/// Parses a scalar expression over `x1..x_dim`.
pub fn parse_field(src: &str, dim: usize) -> Result<Field> {
    parse_at(src, dim, 1, 0)
}

/// Parses a form source into `(grade, [(index, sign·field)])`.
pub fn parse_form_pieces(src: &str, dim: usize) -> Result<(usize, Vec<(MultiIndex, Field)>)> {
    let mut grade = None;
    let mut out = Vec::new();
    let mut offset = 0usize;
    for (ln, line) in src.lines().enumerate() {
        for piece in line.split(';') {
            let col = offset;
            offset += piece.len() + 1;
            if piece.trim().is_empty() {
                continue;
            }
            let (idx, sign, body, body_col) = match piece.find(':') {
                Some(c) => {
                    let (idx, sign) = parse_dx(&piece[..c], dim, ln + 1, col)?;
                    (idx, sign, &piece[c + 1..], col + c + 1)
                }
                None => (MultiIndex::EMPTY, 1.0, piece, col),
            };
            match grade {
                None => grade = Some(idx.grade()),
                Some(g) if g != idx.grade() => {
                    return Err(Error::Parse {
                        line: ln + 1,
                        col: col + 1,
                        msg: format!("mixed grades {g} and {}", idx.grade()),
                    })
                }
                _ => {}
            }
            out.push((idx, parse_at(body, dim, ln + 1, body_col)?.scale(sign)));
        }
        offset = 0;
    }
    let grade = grade.ok_or_else(|| Error::Parse { line: 1, col: 1, msg: "empty form".into() })?;
    Ok((grade, out))
}

/// Parses `dx1 dx3` or `dx1^dx3` into a sorted index and reordering sign.
fn parse_dx(src: &str, dim: usize, line: usize, col: usize) -> Result<(MultiIndex, f64)> {
    let mut idx = MultiIndex::EMPTY;
    let mut sign = 1.0;
    let bytes = src.as_bytes();
    let mut i = 0;
    let err = |i: usize, msg: &str| Error::Parse { line, col: col + i + 1, msg: msg.into() };
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() || c == b'^' || c == b'*' {
            i += 1;
            continue;
        }
        if !src[i..].starts_with("dx") {
            return Err(err(i, "expected `dx<axis>`"));
        }
        let start = i;
        i += 2;
        let ds = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let axis: usize = src[ds..i].parse().map_err(|_| err(start, "expected axis after dx"))?;
        if axis == 0 || axis > dim {
            return Err(err(start, "axis outside the ambient dimension"));
        }
        let e = MultiIndex::single(axis);
        let s = merge_sign(idx, e);
        if s == 0.0 {
            return Err(err(start, "repeated dx"));
        }
        sign *= s;
        idx = idx.union(e);
    }
    Ok((idx, sign))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::Degree;

    fn eval(s: &str, p: &[f64]) -> f64 {
        parse_field(s, p.len()).unwrap().value(p)
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(eval("1 + 2*3", &[0.0]), 7.0);
        assert_eq!(eval("-x1^2", &[3.0]), -9.0);
        assert_eq!(eval("(x1 + x2)^2 / 2", &[1.0, 2.0]), 4.5);
        assert_eq!(eval("x1^-1", &[4.0]), 0.25);
        assert!((eval("sin(x1)*cos(x2) + exp(0)", &[0.5, 0.25]) - (0.5f64.sin() * 0.25f64.cos() + 1.0)).abs() < 1e-15);
        assert_eq!(eval("2e-1*x1", &[10.0]), 2.0);
    }

    #[test]
    fn exact_derivatives_from_text() {
        let f = parse_field("x1^3*x2 - 2*x2^2", 2).unwrap();
        let p = [0.5, 1.5];
        assert_eq!(f.partial(&Degree::new(&[1, 0]), &p).unwrap(), 3.0 * 0.25 * 1.5);
        assert_eq!(f.partial(&Degree::new(&[2, 1]), &p).unwrap(), 6.0 * 0.5);
        assert_eq!(f.partial(&Degree::new(&[0, 2]), &p).unwrap(), -4.0);
    }

    #[test]
    fn parse_errors_report_columns() {
        match parse_field("x1 + y", 2) {
            Err(Error::Parse { line: 1, col: 6, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_field("x3", 2), Err(Error::Parse { col: 1, .. })));
        assert!(parse_field("x1/x2", 2).is_err());
        assert!(parse_field("(x1", 2).is_err());
        assert!(parse_field("x1 x2", 2).is_err());
    }

    #[test]
    fn form_pieces() {
        let (g, pieces) = parse_form_pieces("dx1: -x2; dx2: x1", 2).unwrap();
        assert_eq!(g, 1);
        assert_eq!(pieces.len(), 2);
        let (g, pieces) = parse_form_pieces("dx2^dx1: 3", 2).unwrap();
        assert_eq!(g, 2);
        assert_eq!(pieces[0].1.value(&[0.0, 0.0]), -3.0);
        let (g, _) = parse_form_pieces("x1^2", 1).unwrap();
        assert_eq!(g, 0);
        assert!(parse_form_pieces("dx1: 1; dx1dx2: 1", 2).is_err());
        assert!(matches!(parse_form_pieces("dx3: 1", 2), Err(Error::Parse { .. })));
    }
}
