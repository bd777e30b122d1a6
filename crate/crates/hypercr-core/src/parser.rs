//! Text grammar for equations and point transformations.
//!
//! ```text
//! expr     := term {('+'|'-') term}
//! term     := unary {('*'|'/') unary}
//! unary    := ['-'] factor
//! factor   := base ['^' exponent]
//! base     := RATIONAL | 't' | 'x' | "x'" | "x''" | 'x0' | 'x1' | 'x2'
//!           | '(' expr ')' | 'sqrt' '(' expr ')'
//! exponent := ['-'] INTEGER | '(' ['-'] INTEGER ['/' INTEGER] ')'
//! ```
//!
//! `sqrt(u)` is sugar for `u^(1/2)`; `x`, `x'`, `x''` alias `x0`, `x1`,
//! `x2`. Implicit multiplication is rejected so every error has a sharp
//! position. The pretty-printer (`render`) emits text that reparses to a
//! structurally equal expression.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::{Equation, PointMap};
use crate::rat::{self, Rat};
use crate::sample::SamplePlan;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use num_traits::Zero;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rat),
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

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let b = *self.src.get(self.pos)?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn error(&self, message: &str) -> Error {
        Error::SyntaxError {
            line: self.line,
            column: self.col,
            message: message.to_string(),
        }
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>> {
        let mut out = Vec::new();
        loop {
            while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
                self.bump();
            }
            let (line, col) = (self.line, self.col);
            let Some(b) = self.peek() else {
                out.push(Spanned {
                    tok: Tok::End,
                    line,
                    col,
                });
                return Ok(out);
            };
            let tok = match b {
                b'+' => {
                    self.bump();
                    Tok::Plus
                }
                b'-' => {
                    self.bump();
                    Tok::Minus
                }
                b'*' => {
                    self.bump();
                    Tok::Star
                }
                b'/' => {
                    self.bump();
                    Tok::Slash
                }
                b'^' => {
                    self.bump();
                    Tok::Caret
                }
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b'0'..=b'9' | b'.' => {
                    let start = self.pos;
                    while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
                        self.bump();
                    }
                    let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    match rat::parse_rat(text) {
                        Some(q) => Tok::Num(q),
                        None => {
                            return Err(Error::SyntaxError {
                                line,
                                column: col,
                                message: format!("bad number literal '{text}'"),
                            })
                        }
                    }
                }
                c if c.is_ascii_alphabetic() => {
                    let start = self.pos;
                    while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_')
                    {
                        self.bump();
                    }
                    // primes attach to the identifier: x', x''
                    while self.peek() == Some(b'\'') {
                        self.bump();
                    }
                    let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    Tok::Ident(text.to_string())
                }
                _ => return Err(self.error("unexpected character")),
            };
            out.push(Spanned { tok, line, col });
        }
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: &str) -> Error {
        let s = self.peek();
        Error::SyntaxError {
            line: s.line,
            column: s.col,
            message: message.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(what))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = &acc + &rhs;
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = &acc - &rhs;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = &acc * &rhs;
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = &acc / &rhs;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            let f = self.factor()?;
            Ok(-&f)
        } else {
            self.factor()
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            let e = self.exponent()?;
            Ok(Expr::pow(base, e))
        } else {
            Ok(base)
        }
    }

    fn exponent(&mut self) -> Result<Rat> {
        let negate = if self.peek().tok == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let q = match self.bump() {
            Spanned { tok: Tok::Num(q), line, col } => {
                if !rat::is_integer(&q) {
                    return Err(Error::SyntaxError {
                        line,
                        column: col,
                        message: "exponent must be an integer or (p/q)".to_string(),
                    });
                }
                q
            }
            Spanned { tok: Tok::LParen, .. } => {
                let inner_neg = if self.peek().tok == Tok::Minus {
                    self.bump();
                    true
                } else {
                    false
                };
                let num = match self.bump() {
                    Spanned { tok: Tok::Num(q), line, col } => {
                        if !rat::is_integer(&q) {
                            return Err(Error::SyntaxError {
                                line,
                                column: col,
                                message: "exponent must be an integer or (p/q)".to_string(),
                            });
                        }
                        q
                    }
                    s => {
                        return Err(Error::SyntaxError {
                            line: s.line,
                            column: s.col,
                            message: "expected rational exponent".to_string(),
                        })
                    }
                };
                let full = if self.peek().tok == Tok::Slash {
                    self.bump();
                    match self.bump() {
                        Spanned { tok: Tok::Num(q), line, col } => {
                            if !rat::is_integer(&q) || q.is_zero() {
                                return Err(Error::SyntaxError {
                                    line,
                                    column: col,
                                    message: "exponent denominator must be a nonzero integer"
                                        .to_string(),
                                });
                            }
                            num / q
                        }
                        s => {
                            return Err(Error::SyntaxError {
                                line: s.line,
                                column: s.col,
                                message: "expected integer denominator".to_string(),
                            })
                        }
                    }
                } else {
                    num
                };
                self.expect(Tok::RParen, "expected ')' after exponent")?;
                if inner_neg {
                    -full
                } else {
                    full
                }
            }
            s => {
                return Err(Error::SyntaxError {
                    line: s.line,
                    column: s.col,
                    message: "expected rational exponent".to_string(),
                })
            }
        };
        Ok(if negate { -q } else { q })
    }

    fn base(&mut self) -> Result<Expr> {
        match self.bump() {
            Spanned { tok: Tok::Num(q), .. } => Ok(Expr::num(q)),
            Spanned { tok: Tok::Ident(name), line, col } => match name.as_str() {
                "t" => Ok(Expr::t()),
                "x" => Ok(Expr::x0()),
                "x'" => Ok(Expr::x1()),
                "x''" => Ok(Expr::x2()),
                "x0" => Ok(Expr::x0()),
                "x1" => Ok(Expr::x1()),
                "x2" => Ok(Expr::x2()),
                "sqrt" => {
                    self.expect(Tok::LParen, "expected '(' after sqrt")?;
                    let inner = self.expr()?;
                    self.expect(Tok::RParen, "expected ')' after sqrt argument")?;
                    Ok(Expr::sqrt(inner))
                }
                _ => Err(Error::UnknownSymbol {
                    line,
                    column: col,
                    symbol: name,
                }),
            },
            Spanned { tok: Tok::LParen, .. } => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "expected ')'")?;
                Ok(inner)
            }
            s => Err(Error::SyntaxError {
                line: s.line,
                column: s.col,
                message: "expected a number, variable or '('".to_string(),
            }),
        }
    }
}

/// Parses a bare expression over {t, x0, x1, x2}.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let toks = Lexer::new(src).tokenize()?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.peek().tok != Tok::End {
        return Err(p.error_here("unexpected trailing input"));
    }
    Ok(e)
}

/// Parses the right-hand side of `x''' = F(t, x, x', x'')`.
pub fn parse_equation(src: &str) -> Result<Equation> {
    let f = parse_expr(src)?;
    f.simplify()?;
    Ok(Equation::new(f))
}

/// Parses a point transformation from its four components (forward pair
/// and user-supplied inverse pair, all functions of t and x only) and
/// validates it numerically.
pub fn parse_transformation(
    t_src: &str,
    x_src: &str,
    t_inv_src: &str,
    x_inv_src: &str,
) -> Result<PointMap> {
    parse_transformation_with_plan(t_src, x_src, t_inv_src, x_inv_src, &SamplePlan::default())
}

pub fn parse_transformation_with_plan(
    t_src: &str,
    x_src: &str,
    t_inv_src: &str,
    x_inv_src: &str,
    plan: &SamplePlan,
) -> Result<PointMap> {
    let t_fwd = parse_expr(t_src)?;
    let x_fwd = parse_expr(x_src)?;
    let t_inv = parse_expr(t_inv_src)?;
    let x_inv = parse_expr(x_inv_src)?;
    PointMap::new(t_fwd, x_fwd, t_inv, x_inv, plan)
}

/// Canonical text for an expression; `parse_expr(render(e))` equals `e`.
pub fn render(e: &Expr) -> String {
    e.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;
    use alloc::vec;

    #[test]
    fn parses_power_equation() {
        let eq = parse_equation("x2^(3/2)").unwrap();
        assert_eq!(*eq.f(), Expr::pow(Expr::x2(), rat(3, 2)));
    }

    #[test]
    fn parses_primes_and_aliases() {
        assert_eq!(parse_expr("x''").unwrap(), Expr::x2());
        assert_eq!(parse_expr("x'").unwrap(), Expr::x1());
        assert_eq!(parse_expr("x").unwrap(), Expr::x0());
        assert_eq!(
            parse_expr("x'''").err().map(|e| matches!(e, Error::UnknownSymbol { .. })),
            Some(true)
        );
    }

    #[test]
    fn parses_example_one() {
        let src = "24*x2^3/(-3+sqrt(9-2*x1*x2))^3 + 12*x1*x2^4/(-3+sqrt(9-2*x1*x2))^4";
        let f = parse_expr(src).unwrap();
        // spot value at a point where the radical is rational:
        // x1 = 4, x2 = 1 gives sqrt(9-8) = 1, denominator -2.
        let p = crate::expr::JetPoint::from_ints(0, 0, 4, 1);
        let v = f.eval_float(&p).unwrap();
        let expect = 24.0 / (-8.0) + 12.0 * 4.0 / 16.0;
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn precedence_fixture_table() {
        let cases = [
            ("1+2*3", 7.0),
            ("2*3^2", 18.0),
            ("-3^2", -9.0),
            ("(-3)^2", 9.0),
            ("2-3-4", -5.0),
            ("24/2/3", 4.0),
            ("24/2*3", 36.0),
            ("2^-2", 0.25),
            ("x2^(-1/2)*x2^(3/2)", 5.0), // x2 = 5 below
            ("sqrt(4)*x2", 10.0),
        ];
        let p = crate::expr::JetPoint::from_ints(0, 0, 0, 5);
        for (src, want) in cases {
            let e = parse_expr(src).unwrap();
            let got = e.eval_float(&p).unwrap();
            assert!((got - want).abs() < 1e-12, "{src}: got {got}, want {want}");
        }
    }

    #[test]
    fn implicit_multiplication_rejected() {
        assert!(matches!(
            parse_expr("2x1"),
            Err(Error::SyntaxError { line: 1, column: 2, .. })
        ));
    }

    #[test]
    fn unknown_symbol_has_position() {
        match parse_expr("x1 + y") {
            Err(Error::UnknownSymbol { line, column, symbol }) => {
                assert_eq!((line, column), (1, 6));
                assert_eq!(symbol, "y");
            }
            other => panic!("expected UnknownSymbol, got {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_have_positions() {
        for src in ["x2 +", "(x1", "x2^x1", "x2^(1/x1)", ")", "3..5"] {
            match parse_expr(src) {
                Err(Error::SyntaxError { line, column, .. }) => {
                    assert!(line >= 1 && column >= 1, "{src}");
                }
                Err(Error::UnknownSymbol { .. }) => {}
                other => panic!("{src}: expected error, got {other:?}"),
            }
        }
    }

    #[test]
    fn render_round_trips() {
        let exprs = vec![
            Expr::zero(),
            Expr::pow(Expr::x2(), rat(3, 2)),
            parse_expr("24*x2^3/(-3+sqrt(9-2*x1*x2))^3 + 12*x1*x2^4/(-3+sqrt(9-2*x1*x2))^4")
                .unwrap(),
            parse_expr("-t^3 + x0*x1 - 7/3*x2^(-2)").unwrap(),
            parse_expr("(1/2)^(1/2) + 2^(1/2)").unwrap(),
        ];
        for e in exprs {
            let text = render(&e);
            let back = parse_expr(&text).unwrap();
            assert_eq!(back, e, "round trip of {text}");
        }
        assert_eq!(render(&Expr::zero()), "0");
        assert_eq!(render(&Expr::pow(Expr::x2(), rat(3, 2))), "x2^(3/2)");
    }
}
