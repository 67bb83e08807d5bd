//! Closed-form summand expressions in the index `n`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exact::{factorial, format_rational, rational_powi, BigRational};
use crate::{Error, Result};

use super::pochhammer;

/// Syntax tree of a summand. Literal folding (`-lit`, `lit/lit`) happens in
/// the constructors used by the parser, so printing and re-parsing is the
/// identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Lit(BigRational),
    N,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Fact(Box<Expr>),
    Binom(Box<Expr>, Box<Expr>),
    Poch(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn lit(q: BigRational) -> Expr {
        Expr::Lit(q)
    }

    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Lit(q) => Expr::Lit(-q),
            e => Expr::Neg(Box::new(e)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Lit(p), Expr::Lit(q)) if !q.is_zero() => Expr::Lit(p / q),
            (a, b) => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    fn has_n(&self) -> bool {
        match self {
            Expr::Lit(_) => false,
            Expr::N => true,
            Expr::Neg(a) | Expr::Fact(a) => a.has_n(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b)
            | Expr::Binom(a, b)
            | Expr::Poch(a, b) => a.has_n() || b.has_n(),
        }
    }

    /// `(alpha, beta)` with `self = alpha n + beta`, if affine.
    fn affine(&self) -> Option<(BigRational, BigRational)> {
        Some(match self {
            Expr::Lit(q) => (BigRational::zero(), q.clone()),
            Expr::N => (BigRational::one(), BigRational::zero()),
            Expr::Neg(a) => {
                let (x, y) = a.affine()?;
                (-x, -y)
            }
            Expr::Add(a, b) => {
                let ((x1, y1), (x2, y2)) = (a.affine()?, b.affine()?);
                (x1 + x2, y1 + y2)
            }
            Expr::Sub(a, b) => {
                let ((x1, y1), (x2, y2)) = (a.affine()?, b.affine()?);
                (x1 - x2, y1 - y2)
            }
            Expr::Mul(a, b) => {
                let ((x1, y1), (x2, y2)) = (a.affine()?, b.affine()?);
                if x1.is_zero() {
                    (&y1 * x2, y1 * y2)
                } else if x2.is_zero() {
                    (x1 * &y2, y1 * y2)
                } else {
                    return None;
                }
            }
            Expr::Div(a, b) => {
                let ((x1, y1), (x2, y2)) = (a.affine()?, b.affine()?);
                if !x2.is_zero() || y2.is_zero() {
                    return None;
                }
                (x1 / &y2, y1 / y2)
            }
            _ if !self.has_n() => (BigRational::zero(), self.eval_at(0).ok()?),
            _ => return None,
        })
    }

    /// Evaluates from scratch at index `n`.
    pub fn eval_at(&self, n: u64) -> Result<BigRational> {
        Ok(match self {
            Expr::Lit(q) => q.clone(),
            Expr::N => BigRational::from_integer(n.into()),
            Expr::Neg(a) => -a.eval_at(n)?,
            Expr::Add(a, b) => a.eval_at(n)? + b.eval_at(n)?,
            Expr::Sub(a, b) => a.eval_at(n)? - b.eval_at(n)?,
            Expr::Mul(a, b) => a.eval_at(n)? * b.eval_at(n)?,
            Expr::Div(a, b) => {
                let d = b.eval_at(n)?;
                if d.is_zero() {
                    return Err(Error::Eval(format!("division by zero at n = {n}")));
                }
                a.eval_at(n)? / d
            }
            Expr::Pow(a, b) => {
                let base = a.eval_at(n)?;
                let e = integer_value(&b.eval_at(n)?, "exponent")?;
                if base.is_zero() && e < 0 {
                    return Err(Error::Eval(format!("zero to a negative power at n = {n}")));
                }
                rational_powi(&base, e)
            }
            Expr::Fact(a) => {
                let m = natural_value(&a.eval_at(n)?, "factorial argument")?;
                BigRational::from_integer(factorial(m))
            }
            Expr::Binom(a, b) => {
                let top = natural_value(&a.eval_at(n)?, "binomial top")?;
                let bot = natural_value(&b.eval_at(n)?, "binomial bottom")?;
                if bot > top {
                    BigRational::zero()
                } else {
                    BigRational::from_integer(crate::exact::binomial(top, bot))
                }
            }
            Expr::Poch(a, b) => {
                let len = natural_value(&b.eval_at(n)?, "pochhammer length")?;
                pochhammer(&a.eval_at(n)?, len)
            }
        })
    }
}

fn integer_value(q: &BigRational, what: &str) -> Result<i64> {
    if !q.is_integer() {
        return Err(Error::Eval(format!("{what} {} is not an integer", format_rational(q))));
    }
    q.to_integer().to_i64().ok_or_else(|| Error::Eval(format!("{what} too large")))
}

fn natural_value(q: &BigRational, what: &str) -> Result<u64> {
    let v = integer_value(q, what)?;
    u64::try_from(v).map_err(|_| Error::Eval(format!("{what} {v} is negative")))
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        _ => 4,
    }
}

/// Fully parenthesized canonical form.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(q) if q.is_integer() && !q.is_negative() => write!(f, "{}", q.numer()),
            Expr::Lit(q) => write!(f, "({})", format_rational(q)),
            Expr::N => write!(f, "n"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Sub(a, b) => write!(f, "({a}-{b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Pow(a, b) => write!(f, "({a}^{b})"),
            Expr::Fact(a) => write!(f, "fact({a})"),
            Expr::Binom(a, b) => write!(f, "binom({a},{b})"),
            Expr::Poch(a, b) => write!(f, "poch({a},{b})"),
        }
    }
}

/// A validated summand: factorial, binomial and Pochhammer arguments are
/// affine in `n` with integer coefficients and stay nonnegative, and `n`
/// appears in exponents only linearly over a constant base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermExpr {
    expr: Expr,
}

/// Integer affine form `alpha n + beta` with `alpha, beta >= 0`.
fn natural_affine(e: &Expr, what: &str) -> Result<(u64, u64)> {
    let (a, b) = e
        .affine()
        .ok_or_else(|| Error::Semantic(format!("{what} `{e}` is not affine in n")))?;
    let conv = |q: &BigRational| -> Option<u64> { q.is_integer().then(|| q.to_integer().to_u64()).flatten() };
    match (conv(&a), conv(&b)) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::Semantic(format!(
            "{what} `{e}` must be alpha*n + beta with nonnegative integers alpha, beta"
        ))),
    }
}

fn check(e: &Expr) -> Result<()> {
    match e {
        Expr::Lit(_) | Expr::N => Ok(()),
        Expr::Neg(a) => check(a),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            check(a)?;
            check(b)
        }
        Expr::Pow(a, b) => {
            check(a)?;
            check(b)?;
            if b.has_n() {
                if a.has_n() {
                    return Err(Error::Semantic(format!("`{e}`: n in both base and exponent")));
                }
                let (x, y) = b
                    .affine()
                    .ok_or_else(|| Error::Semantic(format!("exponent `{b}` is not affine in n")))?;
                if !x.is_integer() || !y.is_integer() {
                    return Err(Error::Semantic(format!("exponent `{b}` must have integer coefficients")));
                }
                Ok(())
            } else {
                let v = b.eval_at(0).map_err(|err| Error::Semantic(err.to_string()))?;
                if !v.is_integer() {
                    return Err(Error::Semantic(format!("exponent `{b}` is not an integer")));
                }
                Ok(())
            }
        }
        Expr::Fact(a) => {
            check(a)?;
            natural_affine(a, "factorial argument").map(|_| ())
        }
        Expr::Binom(a, b) => {
            check(a)?;
            check(b)?;
            natural_affine(b, "binomial bottom")?;
            let diff = Expr::Sub(a.clone(), b.clone());
            natural_affine(&diff, "binomial top minus bottom").map(|_| ())
        }
        Expr::Poch(a, b) => {
            check(a)?;
            check(b)?;
            if a.has_n() {
                return Err(Error::Semantic(format!("pochhammer base `{a}` depends on n")));
            }
            natural_affine(b, "pochhammer length").map(|_| ())
        }
    }
}

impl TermExpr {
    pub fn new(expr: Expr) -> Result<TermExpr> {
        check(&expr)?;
        Ok(TermExpr { expr })
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval_at(&self, n: u64) -> Result<BigRational> {
        self.expr.eval_at(n)
    }

    /// Incremental evaluator positioned at `n = start`.
    pub fn cursor(&self, start: u64) -> Result<TermCursor> {
        Ok(TermCursor { root: compile(&self.expr, start)?, n: start })
    }
}

impl fmt::Display for TermExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // drop the outermost parentheses
        let s = self.expr.to_string();
        if prec(&self.expr) < 4 || matches!(self.expr, Expr::Pow(..) | Expr::Neg(..)) {
            write!(f, "{}", &s[1..s.len() - 1])
        } else {
            write!(f, "{s}")
        }
    }
}

/// `(alpha n + beta)!` kept up to date as `n` grows.
#[derive(Clone, Debug)]
struct FactState {
    alpha: u64,
    beta: u64,
    arg: u64,
    value: BigInt,
}

impl FactState {
    fn new(alpha: u64, beta: u64, n: u64) -> Self {
        let arg = alpha * n + beta;
        FactState { alpha, beta, arg, value: factorial(arg) }
    }

    fn advance(&mut self, n: u64) {
        let target = self.alpha * n + self.beta;
        while self.arg < target {
            self.arg += 1;
            self.value *= self.arg;
        }
    }
}

#[derive(Clone, Debug)]
enum Node {
    Lit(BigRational),
    N,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    PowConst(Box<Node>, i64),
    PowLinear { step: BigRational, value: BigRational },
    Fact(FactState),
    Binom { top: FactState, bot: FactState, diff: FactState },
    Poch { base: BigRational, alpha: u64, beta: u64, len: u64, value: BigRational },
}

fn compile(e: &Expr, n: u64) -> Result<Node> {
    let bx = |x: &Expr| compile(x, n).map(Box::new);
    Ok(match e {
        Expr::Lit(q) => Node::Lit(q.clone()),
        Expr::N => Node::N,
        Expr::Neg(a) => Node::Neg(bx(a)?),
        Expr::Add(a, b) => Node::Add(bx(a)?, bx(b)?),
        Expr::Sub(a, b) => Node::Sub(bx(a)?, bx(b)?),
        Expr::Mul(a, b) => Node::Mul(bx(a)?, bx(b)?),
        Expr::Div(a, b) => Node::Div(bx(a)?, bx(b)?),
        Expr::Pow(a, b) if b.has_n() => {
            let base = a.eval_at(0)?;
            let (x, _) = b.affine().expect("validated");
            let x = integer_value(&x, "exponent slope")?;
            if base.is_zero() && x < 0 {
                return Err(Error::Eval("zero base with decreasing exponent".into()));
            }
            Node::PowLinear { step: rational_powi(&base, x), value: e.eval_at(n)? }
        }
        Expr::Pow(a, b) => Node::PowConst(bx(a)?, integer_value(&b.eval_at(0)?, "exponent")?),
        Expr::Fact(a) => {
            let (x, y) = natural_affine(a, "factorial argument")?;
            Node::Fact(FactState::new(x, y, n))
        }
        Expr::Binom(a, b) => {
            let (x1, y1) = natural_affine(b, "binomial bottom")?;
            let (x2, y2) = natural_affine(&Expr::Sub(a.clone(), b.clone()), "binomial top minus bottom")?;
            Node::Binom {
                top: FactState::new(x1 + x2, y1 + y2, n),
                bot: FactState::new(x1, y1, n),
                diff: FactState::new(x2, y2, n),
            }
        }
        Expr::Poch(a, b) => {
            let base = a.eval_at(0)?;
            let (alpha, beta) = natural_affine(b, "pochhammer length")?;
            let len = alpha * n + beta;
            Node::Poch { value: pochhammer(&base, len), base, alpha, beta, len }
        }
    })
}

impl Node {
    fn value(&self, n: u64) -> Result<BigRational> {
        Ok(match self {
            Node::Lit(q) => q.clone(),
            Node::N => BigRational::from_integer(n.into()),
            Node::Neg(a) => -a.value(n)?,
            Node::Add(a, b) => a.value(n)? + b.value(n)?,
            Node::Sub(a, b) => a.value(n)? - b.value(n)?,
            Node::Mul(a, b) => a.value(n)? * b.value(n)?,
            Node::Div(a, b) => {
                let d = b.value(n)?;
                if d.is_zero() {
                    return Err(Error::Eval(format!("division by zero at n = {n}")));
                }
                a.value(n)? / d
            }
            Node::PowConst(a, e) => {
                let base = a.value(n)?;
                if base.is_zero() && *e < 0 {
                    return Err(Error::Eval(format!("zero to a negative power at n = {n}")));
                }
                rational_powi(&base, *e)
            }
            Node::PowLinear { value, .. } => value.clone(),
            Node::Fact(st) => BigRational::from_integer(st.value.clone()),
            Node::Binom { top, bot, diff } => {
                BigRational::from_integer(&top.value / (&bot.value * &diff.value))
            }
            Node::Poch { value, .. } => value.clone(),
        })
    }

    fn advance(&mut self, n: u64) {
        match self {
            Node::Lit(_) | Node::N => {}
            Node::Neg(a) | Node::PowConst(a, _) => a.advance(n),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.advance(n);
                b.advance(n);
            }
            Node::PowLinear { step, value } => *value *= &*step,
            Node::Fact(st) => st.advance(n),
            Node::Binom { top, bot, diff } => {
                top.advance(n);
                bot.advance(n);
                diff.advance(n);
            }
            Node::Poch { base, alpha, beta, len, value } => {
                let target = *alpha * n + *beta;
                while *len < target {
                    *value *= &*base + BigRational::from_integer((*len).into());
                    *len += 1;
                }
            }
        }
    }
}

/// Produces `e(start), e(start+1), ...`, updating factorials, Pochhammer
/// symbols and powers by one multiplication step per index.
#[derive(Clone, Debug)]
pub struct TermCursor {
    root: Node,
    n: u64,
}

impl TermCursor {
    pub fn index(&self) -> u64 {
        self.n
    }

    pub fn next_term(&mut self) -> Result<BigRational> {
        let v = self.root.value(self.n)?;
        self.n += 1;
        self.root.advance(self.n);
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, ratio};

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    /// `fact(n)^2 * 4^n / fact(2n) / (2n+1)`
    fn central() -> Expr {
        let two_n = Expr::Mul(b(Expr::Lit(rat(2))), b(Expr::N));
        Expr::Div(
            b(Expr::Div(
                b(Expr::Mul(
                    b(Expr::Pow(b(Expr::Fact(b(Expr::N))), b(Expr::Lit(rat(2))))),
                    b(Expr::Pow(b(Expr::Lit(rat(4))), b(Expr::N))),
                )),
                b(Expr::Fact(b(two_n.clone()))),
            )),
            b(Expr::Add(b(two_n), b(Expr::Lit(rat(1))))),
        )
    }

    #[test]
    fn cursor_matches_scratch() {
        let t = TermExpr::new(central()).unwrap();
        for start in [0, 3] {
            let mut c = t.cursor(start).unwrap();
            for n in start..start + 15 {
                assert_eq!(c.next_term().unwrap(), t.eval_at(n).unwrap());
            }
        }
        assert_eq!(t.eval_at(1).unwrap(), ratio(2, 3));
    }

    #[test]
    fn binomial_and_pochhammer_nodes() {
        let e = Expr::Mul(
            b(Expr::Binom(
                b(Expr::Add(b(Expr::Mul(b(Expr::Lit(rat(3))), b(Expr::N))), b(Expr::Lit(rat(1))))),
                b(Expr::N),
            )),
            b(Expr::Poch(b(Expr::Lit(ratio(1, 3))), b(Expr::Mul(b(Expr::Lit(rat(2))), b(Expr::N))))),
        );
        let t = TermExpr::new(e).unwrap();
        let mut c = t.cursor(0).unwrap();
        for n in 0..12 {
            assert_eq!(c.next_term().unwrap(), t.eval_at(n).unwrap());
        }
    }

    #[test]
    fn semantic_errors() {
        let bad = [
            Expr::Fact(b(Expr::Mul(b(Expr::N), b(Expr::N)))),
            Expr::Fact(b(Expr::Sub(b(Expr::N), b(Expr::Lit(rat(1)))))),
            Expr::Fact(b(Expr::Div(b(Expr::N), b(Expr::Lit(rat(2)))))),
            Expr::Pow(b(Expr::N), b(Expr::N)),
            Expr::Pow(b(Expr::N), b(Expr::Lit(ratio(1, 2)))),
            Expr::Poch(b(Expr::N), b(Expr::N)),
            Expr::Binom(b(Expr::N), b(Expr::Mul(b(Expr::Lit(rat(2))), b(Expr::N)))),
        ];
        for e in bad {
            assert!(matches!(TermExpr::new(e.clone()), Err(Error::Semantic(_))), "{e}");
        }
    }

    #[test]
    fn literal_folding() {
        assert_eq!(Expr::neg(Expr::Lit(rat(3))), Expr::Lit(rat(-3)));
        assert_eq!(Expr::div(Expr::Lit(rat(3)), Expr::Lit(rat(6))), Expr::Lit(ratio(1, 2)));
        assert_eq!(Expr::Lit(ratio(-7, 6)).to_string(), "(-7/6)");
    }

    #[test]
    fn negative_exponent_of_constant() {
        let e = Expr::Pow(b(Expr::Lit(rat(2))), b(Expr::Neg(b(Expr::N))));
        let t = TermExpr::new(e).unwrap();
        let mut c = t.cursor(0).unwrap();
        for n in 0..6 {
            assert_eq!(c.next_term().unwrap(), rational_powi(&ratio(1, 2), n));
        }
    }
}
