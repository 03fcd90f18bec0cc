//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := ('-' | '+') factor | base ('^' exponent)?
//! exponent := ['-' | '+'] integer | '(' ['-' | '+'] integer ')'
//! base   := number | name | '(' expr ')' | func '(' expr ')'
//! ```
//!
//! Numbers may carry a trailing `i` (`2.5i`) to make them imaginary; the bare
//! name `i` is the imaginary unit and `pi` is the constant. Multiplication is
//! always explicit.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;
use thiserror::Error;

use super::{Expr, Func};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedEnd,
    UnexpectedToken(String),
    UnknownIdentifier(String),
    NonIntegerExponent,
    InvalidNumber,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} at offset {offset}", describe(.kind))]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::UnexpectedEnd => "unexpected end of input".to_string(),
        ParseErrorKind::UnexpectedToken(t) => alloc::format!("unexpected token `{t}`"),
        ParseErrorKind::UnknownIdentifier(n) => alloc::format!("unknown identifier `{n}`"),
        ParseErrorKind::NonIntegerExponent => "exponent must be an integer".to_string(),
        ParseErrorKind::InvalidNumber => "invalid number".to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num {
        value: f64,
        imag: bool,
        integral: bool,
    },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Num { value, imag, .. } => {
                let mut s = alloc::format!("{value}");
                if *imag {
                    s.push('i');
                }
                s
            }
            Tok::Ident(n) => n.clone(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::End => "<end>".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        if ch.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match ch {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let value: f64 = lit.parse().map_err(|_| ParseError {
                    kind: ParseErrorKind::InvalidNumber,
                    offset: start,
                })?;
                let integral = !lit.contains(['.', 'e', 'E']);
                let imag = i < bytes.len()
                    && bytes[i] == b'i'
                    && !(i + 1 < bytes.len() && is_ident_char(bytes[i + 1]));
                if imag {
                    i += 1;
                }
                out.push((
                    Tok::Num {
                        value,
                        imag,
                        integral,
                    },
                    start,
                ));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && is_ident_char(bytes[i]) {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let t = text[start..]
                    .chars()
                    .next()
                    .map(String::from)
                    .unwrap_or_default();
                return Err(ParseError {
                    kind: ParseErrorKind::UnexpectedToken(t),
                    offset: start,
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    names: &'a [&'a str],
    bindings: &'a [(&'a str, Expr)],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self) -> ParseError {
        let kind = match self.peek() {
            Tok::End => ParseErrorKind::UnexpectedEnd,
            t => ParseErrorKind::UnexpectedToken(t.text()),
        };
        ParseError {
            kind,
            offset: self.offset(),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::add(lhs, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::mul(lhs, self.factor()?);
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::div(lhs, self.factor()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                return Ok(Expr::neg(self.factor()?));
            }
            Tok::Plus => {
                self.bump();
                return self.factor();
            }
            _ => {}
        }
        let base = self.base()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let n = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let paren = *self.peek() == Tok::LParen;
        if paren {
            self.bump();
        }
        let sign = match self.peek() {
            Tok::Minus => {
                self.bump();
                -1
            }
            Tok::Plus => {
                self.bump();
                1
            }
            _ => 1,
        };
        let at = self.offset();
        let n = match self.bump() {
            Tok::Num {
                value, imag: false, ..
            } if num_traits::Float::fract(value) == 0.0 && value.abs() <= i32::MAX as f64 => {
                sign * value as i32
            }
            Tok::Num { .. } | Tok::Ident(_) | Tok::LParen => {
                return Err(ParseError {
                    kind: ParseErrorKind::NonIntegerExponent,
                    offset: at,
                })
            }
            Tok::End => {
                return Err(ParseError {
                    kind: ParseErrorKind::UnexpectedEnd,
                    offset: at,
                })
            }
            t => {
                return Err(ParseError {
                    kind: ParseErrorKind::UnexpectedToken(t.text()),
                    offset: at,
                })
            }
        };
        if paren {
            self.expect(Tok::RParen)?;
        }
        Ok(n)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num { value, imag, .. } => {
                self.bump();
                Ok(Expr::Const(if imag {
                    Complex64::new(0.0, value)
                } else {
                    Complex64::new(value, 0.0)
                }))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(f) = Func::from_name(&name) {
                    self.expect(Tok::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Expr::func(f, arg));
                }
                if let Some(j) = self.names.iter().position(|n| *n == name) {
                    return Ok(Expr::Var(j));
                }
                if let Some((_, e)) = self.bindings.iter().find(|(n, _)| *n == name) {
                    return Ok(e.clone());
                }
                match name.as_str() {
                    "i" => Ok(Expr::Const(Complex64::i())),
                    "pi" => Ok(Expr::real(core::f64::consts::PI)),
                    _ => Err(ParseError {
                        kind: ParseErrorKind::UnknownIdentifier(name),
                        offset: at,
                    }),
                }
            }
            _ => Err(self.unexpected()),
        }
    }
}

/// Parse `text` over the variables `names` (variable `j` is `names[j]`).
pub fn parse(text: &str, names: &[&str]) -> Result<Expr, ParseError> {
    parse_with(text, names, &[])
}

/// Like [`parse`], with extra names bound to pre-built sub-expressions.
pub fn parse_with(
    text: &str,
    names: &[&str],
    bindings: &[(&str, Expr)],
) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        names,
        bindings,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected());
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parses_polynomial() {
        let e = parse("x^2 + i*x^3", &["x"]).unwrap();
        let want = Expr::add(
            Expr::pow(Expr::Var(0), 2),
            Expr::mul(Expr::Const(Complex64::i()), Expr::pow(Expr::Var(0), 3)),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn parses_with_bindings() {
        let v1 = parse("exp(i*t)", &["p", "t"]).unwrap();
        let v2 = parse("(1 + exp(3*i*t))/2", &["p", "t"]).unwrap();
        let e = parse_with(
            "log((1-p)*v1 + p*v2)",
            &["p", "t"],
            &[("v1", v1.clone()), ("v2", v2.clone())],
        )
        .unwrap();
        let manual = Expr::func(
            Func::Log,
            Expr::add(
                Expr::mul(Expr::sub(Expr::real(1.0), Expr::Var(0)), v1),
                Expr::mul(Expr::Var(0), v2),
            ),
        );
        assert_eq!(e, manual);
    }

    #[test]
    fn syntax_error_offset() {
        let err = parse("x +", &["x"]).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(err.offset, 3);
    }

    #[test]
    fn unknown_identifier() {
        let err = parse("x + y", &["x"]).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("y".into()));
        assert_eq!(err.offset, 4);
        let err = parse("foo(x)", &["x"]).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("foo".into()));
    }

    #[test]
    fn non_integer_exponent() {
        let err = parse("x^0.5", &["x"]).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonIntegerExponent);
        assert_eq!(err.offset, 2);
        assert!(parse("x^y", &["x", "y"]).is_err());
    }

    #[test]
    fn negative_exponents_and_unary_minus() {
        assert_eq!(parse("x^-2", &["x"]).unwrap(), Expr::pow(Expr::Var(0), -2));
        assert_eq!(
            parse("x^(-2)", &["x"]).unwrap(),
            Expr::pow(Expr::Var(0), -2)
        );
        assert_eq!(
            parse("-x^2", &["x"]).unwrap(),
            Expr::neg(Expr::pow(Expr::Var(0), 2))
        );
    }

    #[test]
    fn complex_literals() {
        let e = parse("3+2i", &[]).unwrap();
        assert_eq!(e.eval(&[]).unwrap(), c(3.0, 2.0));
        let e = parse("1.5e-3i * pi", &[]).unwrap();
        let v = e.eval(&[]).unwrap();
        assert!((v - c(0.0, 1.5e-3 * core::f64::consts::PI)).norm() < 1e-18);
    }

    #[test]
    fn juxtaposition_rejected() {
        assert!(parse("2 x", &["x"]).is_err());
        assert!(parse("2x", &["x"]).is_err());
    }

    fn arb_expr() -> impl Strategy<Value = String> {
        let leaf = prop_oneof![
            Just("x".to_string()),
            Just("y".to_string()),
            Just("i".to_string()),
            (0u32..100).prop_map(|n| alloc::format!("{n}")),
            (0u32..100).prop_map(|n| alloc::format!("{}.25i", n)),
            (1e-6f64..1e6).prop_map(|v| alloc::format!("{v:e}")),
        ];
        leaf.prop_recursive(4, 32, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| alloc::format!("{a} + {b}")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| alloc::format!("{a} - {b}")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| alloc::format!("({a}) * {b}")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| alloc::format!("{a} / ({b})")),
                (inner.clone(), -3i32..4).prop_map(|(a, n)| alloc::format!("({a})^{n}")),
                inner.clone().prop_map(|a| alloc::format!("-({a})")),
                inner.clone().prop_map(|a| alloc::format!("exp({a})")),
                inner.clone().prop_map(|a| alloc::format!("log({a})")),
                inner.clone().prop_map(|a| alloc::format!("sqrt({a})")),
                inner.clone().prop_map(|a| alloc::format!("sin({a})")),
                inner.prop_map(|a| alloc::format!("cos({a})")),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_is_idempotent(text in arb_expr()) {
            let names = ["x", "y"];
            let first = parse(&text, &names).unwrap();
            let printed = first.to_text(&names);
            let second = parse(&printed, &names).unwrap();
            prop_assert_eq!(&first, &second);
            prop_assert_eq!(printed, second.to_text(&names));
        }
    }
}
