//! Lexer and precedence-climbing parser shared by the summand grammar and
//! the closed-form grammar. Precedence, loosest first: `+ -`, `* /`,
//! unary `-`, `^`; all binary operators associate to the left, and the
//! exponent of `^` may carry its own unary minus (`2^-n`).

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::exact::{BigRational, Polynomial};
use crate::series::{Expr, TermExpr};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

fn syntax(pos: Pos, message: impl Into<String>) -> Error {
    Error::Syntax { line: pos.line, column: pos.column, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, column };
        if c == '\n' {
            chars.next();
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            column += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                s.push(d);
                chars.next();
                column += 1;
            }
            out.push((Tok::Num(s.parse().expect("digits")), pos));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if !(d.is_ascii_alphanumeric() || d == '_') {
                    break;
                }
                s.push(d);
                chars.next();
                column += 1;
            }
            out.push((Tok::Ident(s), pos));
            continue;
        }
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            _ => return Err(syntax(pos, format!("unexpected character `{c}`"))),
        };
        chars.next();
        column += 1;
        out.push((tok, pos));
    }
    out.push((Tok::End, Pos { line, column }));
    Ok(out)
}

/// Untyped syntax tree; each grammar lowers it with its own rules.
#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Num(BigInt),
    Ident(String, Pos),
    Neg(Box<Ast>),
    Bin(char, Box<Ast>, Box<Ast>),
    Call(String, Vec<Ast>, Pos),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.pos(), format!("expected {what}, found {}", describe(self.peek()))))
        }
    }

    fn expr(&mut self) -> Result<Ast> {
        let mut lhs = self.term()?;
        while let Tok::Op(op @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            lhs = Ast::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Ast> {
        let mut lhs = self.unary()?;
        while let Tok::Op(op @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            lhs = Ast::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ast> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast> {
        let mut base = self.primary()?;
        while *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = if *self.peek() == Tok::Op('-') {
                self.bump();
                Ast::Neg(Box::new(self.primary()?))
            } else {
                self.primary()?
            };
            base = Ast::Bin('^', Box::new(base), Box::new(exp));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Ast> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Ast::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() != Tok::LParen {
                    return Ok(Ast::Ident(name, pos));
                }
                self.bump();
                let mut args = vec![self.expr()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.expr()?);
                }
                self.expect(Tok::RParen, "`,` or `)`")?;
                Ok(Ast::Call(name, args, pos))
            }
            other => Err(syntax(pos, format!("expected a number, name or `(`, found {}", describe(&other)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number `{v}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::End => "end of input".into(),
    }
}

pub fn parse_ast(text: &str) -> Result<Ast> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.pos(), format!("unexpected {} after expression", describe(p.peek()))));
    }
    Ok(e)
}

fn lower_term(ast: &Ast) -> Result<Expr> {
    let b = |a: &Ast| lower_term(a).map(Box::new);
    Ok(match ast {
        Ast::Num(v) => Expr::Lit(BigRational::from_integer(v.clone())),
        Ast::Ident(name, _) if name == "n" => Expr::N,
        Ast::Ident(name, pos) => {
            return Err(Error::Semantic(format!(
                "unknown name `{name}` at {}:{} (only `n` is allowed)",
                pos.line, pos.column
            )))
        }
        Ast::Neg(a) => Expr::neg(lower_term(a)?),
        Ast::Bin('/', x, y) => Expr::div(lower_term(x)?, lower_term(y)?),
        Ast::Bin(op, x, y) => {
            let (x, y) = (b(x)?, b(y)?);
            match op {
                '+' => Expr::Add(x, y),
                '-' => Expr::Sub(x, y),
                '*' => Expr::Mul(x, y),
                _ => Expr::Pow(x, y),
            }
        }
        Ast::Call(name, args, pos) => {
            let arity = |k: usize| -> Result<()> {
                if args.len() == k {
                    Ok(())
                } else {
                    Err(Error::Semantic(format!(
                        "`{name}` at {}:{} takes {k} argument(s), got {}",
                        pos.line,
                        pos.column,
                        args.len()
                    )))
                }
            };
            match name.as_str() {
                "fact" => {
                    arity(1)?;
                    Expr::Fact(b(&args[0])?)
                }
                "binom" => {
                    arity(2)?;
                    Expr::Binom(b(&args[0])?, b(&args[1])?)
                }
                "poch" => {
                    arity(2)?;
                    Expr::Poch(b(&args[0])?, b(&args[1])?)
                }
                _ => {
                    return Err(Error::Semantic(format!(
                        "unknown function `{name}` at {}:{} (expected fact, binom or poch)",
                        pos.line, pos.column
                    )))
                }
            }
        }
    })
}

/// Parses a summand in `n`, e.g. `fact(2*n)*(130*n+109)/(poch(7/6,n)*poch(11/6,n)*(-1296)^n)`.
pub fn parse_term_expr(text: &str) -> Result<TermExpr> {
    TermExpr::new(lower_term(&parse_ast(text)?)?)
}

fn lower_w(ast: &Ast) -> Result<Polynomial> {
    Ok(match ast {
        Ast::Num(v) => Polynomial::constant(BigRational::from_integer(v.clone())),
        Ast::Ident(name, _) if name == "w" => Polynomial::x(),
        Ast::Neg(a) => -&lower_w(a)?,
        Ast::Bin(op, x, y) => {
            let (x, y) = (lower_w(x)?, lower_w(y)?);
            match op {
                '+' => &x + &y,
                '-' => &x - &y,
                '*' => &x * &y,
                '/' => match (y.is_constant(), y.coeff(0)) {
                    (true, c) if !c.is_zero() => x.scale(&c.recip()),
                    _ => return Err(Error::Semantic("only division by a nonzero constant is allowed in w".into())),
                },
                _ => {
                    let e = y.coeff(0);
                    if !y.is_constant() || !e.is_integer() || e.is_negative() || e > BigRational::from_integer(64.into()) {
                        return Err(Error::Semantic("exponents in w must be integers in 0..=64".into()));
                    }
                    x.pow(e.to_integer().try_into().expect("small"))
                }
            }
        }
        Ast::Ident(name, pos) | Ast::Call(name, _, pos) => {
            return Err(Error::Semantic(format!(
                "`{name}` at {}:{} is not allowed in a polynomial in w",
                pos.line, pos.column
            )))
        }
    })
}

/// Parses a polynomial in the parameter `w`, e.g. `w^2 - 1/3`.
pub fn parse_w_polynomial(text: &str) -> Result<Polynomial> {
    lower_w(&parse_ast(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, ratio};

    #[test]
    fn w_polynomials() {
        assert_eq!(parse_w_polynomial("(w-1)^2/2").unwrap(), Polynomial::new(vec![ratio(1, 2), rat(-1), ratio(1, 2)]));
        assert_eq!(parse_w_polynomial("-3").unwrap(), Polynomial::from_i64(&[-3]));
        assert!(parse_w_polynomial("1/w").is_err());
        assert!(parse_w_polynomial("x").is_err());
        assert!(parse_w_polynomial("w^-1").is_err());
    }

    #[test]
    fn leading_example() {
        let e = parse_term_expr("fact(2*n)*(130*n+109)/(poch(7/6,n)*poch(11/6,n)*(-1296)^n)").unwrap();
        assert_eq!(e.eval_at(0).unwrap(), rat(109));
        // 2 * 239 / ((7/6)(11/6)(-1296))
        assert_eq!(e.eval_at(1).unwrap(), rat(2 * 239) / (ratio(7, 6) * ratio(11, 6) * rat(-1296)));
    }

    #[test]
    fn small_examples() {
        assert_eq!(parse_term_expr("1").unwrap().eval_at(5).unwrap(), rat(1));
        assert_eq!(parse_term_expr("binom(8*n,4*n)/9^n").unwrap().eval_at(1).unwrap(), ratio(70, 9));
        assert_eq!(parse_term_expr("2^-n").unwrap().eval_at(3).unwrap(), ratio(1, 8));
        assert_eq!(parse_term_expr("-2^2").unwrap().eval_at(0).unwrap(), rat(-4));
        assert_eq!(parse_term_expr("2^3^2").unwrap().eval_at(0).unwrap(), rat(64));
        assert_eq!(parse_term_expr("8-3-2").unwrap().eval_at(0).unwrap(), rat(3));
        assert_eq!(parse_term_expr("12/3/2").unwrap().eval_at(0).unwrap(), rat(2));
        assert_eq!(parse_term_expr(" n *\n n ").unwrap().eval_at(4).unwrap(), rat(16));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let cases = [("1 +", 1, 4), ("fact(n", 1, 7), ("(n))", 1, 4), ("n\n  $", 2, 3), ("2 ^ * n", 1, 5)];
        for (text, line, column) in cases {
            match parse_term_expr(text) {
                Err(Error::Syntax { line: l, column: c, .. }) => assert_eq!((l, c), (line, column), "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn semantic_errors() {
        for text in ["fact(n/2)", "fact(n-1)", "binom(n, 2*n)", "gamma(n)", "m", "fact(n, n)", "poch(n, n)"] {
            assert!(matches!(parse_term_expr(text), Err(Error::Semantic(_))), "{text}");
        }
    }

    #[test]
    fn round_trip() {
        for text in [
            "fact(2*n)*(130*n+109)/(poch(7/6,n)*poch(11/6,n)*(-1296)^n)",
            "-(n+1)/(-7/6)",
            "2^-n*binom(3*n+1,n)",
            "(63*n^2-27*n+4)/binom(6*n,3*n)",
        ] {
            let e = parse_term_expr(text).unwrap();
            let again = parse_term_expr(&e.to_string()).unwrap();
            assert_eq!(e, again, "{text} -> {e}");
        }
    }
}
