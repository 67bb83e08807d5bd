//! Right-hand sides: rationals combined with reference constants and
//! elementary functions, evaluated only through [`crate::oracle`].

use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exact::{format_rational, rational_powi, BigRational};
use crate::float::{bits_for_digits, BigFloat};
use crate::oracle::{self, elementary, Constant, GammaTag};
use crate::{Error, Result};

use super::syntax::{parse_ast, Ast};

#[derive(Clone, Debug, PartialEq)]
pub enum ClosedForm {
    Rat(BigRational),
    Const(Constant),
    Gamma(GammaTag),
    Neg(Box<ClosedForm>),
    Add(Box<ClosedForm>, Box<ClosedForm>),
    Sub(Box<ClosedForm>, Box<ClosedForm>),
    Mul(Box<ClosedForm>, Box<ClosedForm>),
    Div(Box<ClosedForm>, Box<ClosedForm>),
    /// The exponent must reduce to a rational.
    Pow(Box<ClosedForm>, Box<ClosedForm>),
    Sqrt(Box<ClosedForm>),
    Ln(Box<ClosedForm>),
    Atan(Box<ClosedForm>),
    Asin(Box<ClosedForm>),
}

fn semantic(msg: String) -> Error {
    Error::Semantic(msg)
}

fn exact_arg(ast: &Ast, what: &str) -> Result<BigRational> {
    lower(ast)?
        .as_rational()
        .ok_or_else(|| semantic(format!("{what} needs a rational argument")))
}

fn lower(ast: &Ast) -> Result<ClosedForm> {
    use ClosedForm as C;
    let b = |a: &Ast| lower(a).map(Box::new);
    Ok(match ast {
        Ast::Num(v) => C::Rat(BigRational::from_integer(v.clone())),
        Ast::Ident(name, pos) => match name.as_str() {
            "pi" => C::Const(Constant::Pi),
            "ln2" => C::Const(Constant::Ln2),
            "catalan" => C::Const(Constant::Catalan),
            "G13cubed" => C::Gamma(GammaTag::G13Cubed),
            "G14sq" => C::Gamma(GammaTag::G14Sq),
            "G34sq" => C::Gamma(GammaTag::G34Sq),
            _ => return Err(semantic(format!("unknown constant `{name}` at {}:{}", pos.line, pos.column))),
        },
        Ast::Neg(a) => C::Neg(b(a)?),
        Ast::Bin(op, x, y) => {
            let (x, y) = (b(x)?, b(y)?);
            match op {
                '+' => C::Add(x, y),
                '-' => C::Sub(x, y),
                '*' => C::Mul(x, y),
                '/' => C::Div(x, y),
                _ => {
                    if y.as_rational().is_none() {
                        return Err(semantic("exponent must be rational".into()));
                    }
                    C::Pow(x, y)
                }
            }
        }
        Ast::Call(name, args, pos) => {
            let want = match name.as_str() {
                "beta" => 2,
                "sqrt" | "ln" | "atan" | "asin" | "kummer" => 1,
                _ => return Err(semantic(format!("unknown function `{name}` at {}:{}", pos.line, pos.column))),
            };
            if args.len() != want {
                return Err(semantic(format!("`{name}` takes {want} argument(s), got {}", args.len())));
            }
            match name.as_str() {
                "beta" => {
                    let (p, q) = (exact_arg(&args[0], "beta")?, exact_arg(&args[1], "beta")?);
                    C::Const(format!("beta({},{})", format_rational(&p), format_rational(&q)).parse()?)
                }
                "kummer" => {
                    let h = exact_arg(&args[0], "kummer")?;
                    C::Gamma(format!("kummer({})", format_rational(&h)).parse()?)
                }
                "sqrt" => C::Sqrt(b(&args[0])?),
                "ln" => C::Ln(b(&args[0])?),
                "atan" => C::Atan(b(&args[0])?),
                _ => C::Asin(b(&args[0])?),
            }
        }
    })
}

/// Parses a closed form such as `pi*sqrt(3)/9` or `sqrt(pi)/(2^(1/4)*G34sq)`.
pub fn parse_closed_form(text: &str) -> Result<ClosedForm> {
    lower(&parse_ast(text)?)
}

/// `x^(1/q)` for `x > 0` by Newton's iteration.
fn nth_root(x: &BigFloat, q: u32, prec: usize) -> BigFloat {
    let p = prec + 16;
    let x = x.with_precision(p);
    let e = x.exponent().expect("nonzero");
    let e_q = e.div_euclid(q as i32) * q as i32;
    let m = x.mul_pow2(-e_q);
    let mut r = BigFloat::from_f64(m.to_f64().powf(1.0 / q as f64), p).mul_pow2(e_q / q as i32);
    let qf = BigFloat::from_i64(q as i64, p);
    let qm1 = BigFloat::from_i64(q as i64 - 1, p);
    let mut bits = 45usize;
    while bits < 2 * p {
        r = &(&(&qm1 * &r) + &(&x / &r.powi(q - 1))) / &qf;
        bits *= 2;
    }
    r = &(&(&qm1 * &r) + &(&x / &r.powi(q - 1))) / &qf;
    r.with_precision(prec)
}

impl ClosedForm {
    /// The exact value when the tree involves no constants or functions.
    pub fn as_rational(&self) -> Option<BigRational> {
        use ClosedForm as C;
        Some(match self {
            C::Rat(q) => q.clone(),
            C::Neg(a) => -a.as_rational()?,
            C::Add(a, b) => a.as_rational()? + b.as_rational()?,
            C::Sub(a, b) => a.as_rational()? - b.as_rational()?,
            C::Mul(a, b) => a.as_rational()? * b.as_rational()?,
            C::Div(a, b) => {
                let d = b.as_rational()?;
                if d.is_zero() {
                    return None;
                }
                a.as_rational()? / d
            }
            C::Pow(a, b) => {
                let e = b.as_rational()?;
                if !e.is_integer() {
                    return None;
                }
                let base = a.as_rational()?;
                let e = e.to_integer().to_i64()?;
                if base.is_zero() && e < 0 {
                    return None;
                }
                rational_powi(&base, e)
            }
            _ => return None,
        })
    }

    /// The value to `digits` significant decimals (guarded internally).
    pub fn eval(&self, digits: usize) -> Result<BigFloat> {
        self.eval_at(digits + 15)
    }

    fn eval_at(&self, d: usize) -> Result<BigFloat> {
        use ClosedForm as C;
        let prec = bits_for_digits(d);
        Ok(match self {
            C::Rat(q) => BigFloat::from_rational(q, prec),
            C::Const(c) => oracle::reference(c, d)?,
            C::Gamma(g) => oracle::gamma_combination(g, d)?,
            C::Neg(a) => -a.eval_at(d)?,
            C::Add(a, b) => &a.eval_at(d)? + &b.eval_at(d)?,
            C::Sub(a, b) => &a.eval_at(d)? - &b.eval_at(d)?,
            C::Mul(a, b) => &a.eval_at(d)? * &b.eval_at(d)?,
            C::Div(a, b) => {
                let den = b.eval_at(d)?;
                if den.is_zero() {
                    return Err(Error::Eval(format!("division by zero in `{self}`")));
                }
                &a.eval_at(d)? / &den
            }
            C::Pow(a, b) => {
                let e = b.as_rational().expect("checked at parse time");
                if let Some(q) = self.as_rational() {
                    return Ok(BigFloat::from_rational(&q, prec));
                }
                let base = a.eval_at(d)?;
                let num = e.numer().to_i64().filter(|v| v.unsigned_abs() <= 1 << 16);
                let den = e.denom().to_u32().filter(|v| *v <= 1 << 10);
                let (Some(num), Some(den)) = (num, den) else {
                    return Err(Error::Eval(format!("exponent {} is too large", format_rational(&e))));
                };
                if den > 1 && (base.is_negative() || base.is_zero()) {
                    return Err(Error::Eval(format!("fractional power of a nonpositive value in `{self}`")));
                }
                if base.is_zero() && num < 0 {
                    return Err(Error::Eval(format!("zero to a negative power in `{self}`")));
                }
                let root = if den == 1 { base } else { nth_root(&base, den, prec) };
                let p = root.powi(num.unsigned_abs() as u32);
                if num < 0 {
                    &BigFloat::from_i64(1, prec) / &p
                } else {
                    p
                }
            }
            C::Sqrt(a) => {
                if let Some(q) = a.as_rational() {
                    if q.is_negative() {
                        return Err(Error::Eval(format!("sqrt of negative {}", format_rational(&q))));
                    }
                    return oracle::reference(&Constant::Sqrt(q), d);
                }
                let v = a.eval_at(d)?;
                if v.is_negative() {
                    return Err(Error::Eval(format!("sqrt of a negative value in `{self}`")));
                }
                elementary::sqrt(&v, prec)
            }
            C::Ln(a) => {
                let v = a.eval_at(d + 10)?;
                if v.is_negative() || v.is_zero() {
                    return Err(Error::Eval(format!("ln of a nonpositive value in `{self}`")));
                }
                elementary::ln(&v, prec)
            }
            C::Atan(a) => elementary::atan(&a.eval_at(d)?, prec),
            C::Asin(a) => {
                let v = a.eval_at(d)?;
                if v.abs() > BigFloat::from_i64(1, prec) {
                    return Err(Error::Eval(format!("asin argument outside [-1, 1] in `{self}`")));
                }
                elementary::asin(&v, prec)
            }
        })
    }

    /// Reference constants the value depends on, for reporting.
    pub fn references(&self) -> Vec<String> {
        use ClosedForm as C;
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            match e {
                C::Rat(_) => {}
                C::Const(c) => out.push(c.to_string()),
                C::Gamma(g) => out.push(g.to_string()),
                C::Neg(a) | C::Sqrt(a) | C::Ln(a) | C::Atan(a) | C::Asin(a) => stack.push(a),
                C::Add(a, b) | C::Sub(a, b) | C::Mul(a, b) | C::Div(a, b) | C::Pow(a, b) => {
                    stack.push(a);
                    stack.push(b)
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ClosedForm as C;
        match self {
            C::Rat(q) if q.denom().is_one() && !q.is_negative() => write!(f, "{}", q.numer()),
            C::Rat(q) => write!(f, "({})", format_rational(q)),
            C::Const(c) => write!(f, "{c}"),
            C::Gamma(g) => write!(f, "{g}"),
            C::Neg(a) => write!(f, "(-{a})"),
            C::Add(a, b) => write!(f, "({a}+{b})"),
            C::Sub(a, b) => write!(f, "({a}-{b})"),
            C::Mul(a, b) => write!(f, "({a}*{b})"),
            C::Div(a, b) => write!(f, "({a}/{b})"),
            C::Pow(a, b) => write!(f, "({a}^{b})"),
            C::Sqrt(a) => write!(f, "sqrt({a})"),
            C::Ln(a) => write!(f, "ln({a})"),
            C::Atan(a) => write!(f, "atan({a})"),
            C::Asin(a) => write!(f, "asin({a})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(text: &str, digits: usize) -> BigFloat {
        parse_closed_form(text).unwrap().eval(digits).unwrap()
    }

    fn close(a: &BigFloat, b: &BigFloat, digits: usize) -> bool {
        (a - b).abs().log10_abs() < -(digits as f64)
    }

    #[test]
    fn elementary_identities() {
        assert!(close(&value("4*atan(1)", 40), &value("pi", 40), 40));
        assert!(close(&value("6*asin(1/2)", 40), &value("pi", 40), 40));
        assert!(close(&value("ln(8)", 40), &value("3*ln2", 40), 40));
        assert!(close(&value("2^(1/3)^3", 40), &value("2", 40), 40));
        assert!(close(&value("sqrt(2)*sqrt(8)", 40), &value("4", 40), 40));
        assert!(close(&value("27^(-2/3)", 40), &value("1/9", 40), 40));
        assert!(close(&value("ln(2-sqrt(3)) + ln(2+sqrt(3))", 40), &BigFloat::zero(200), 40));
        assert!(close(&value("kummer(1/2)", 30), &value("pi/2", 30), 30));
    }

    #[test]
    fn rational_folding() {
        assert_eq!(parse_closed_form("(1/2)^2 - 3/4").unwrap().as_rational(), Some(crate::exact::ratio(-1, 2)));
        assert_eq!(parse_closed_form("pi").unwrap().as_rational(), None);
        assert_eq!(value("1/3", 30).to_decimal(10), "0.3333333333");
    }

    #[test]
    fn errors() {
        for text in ["zeta(3)", "e", "2^pi", "sqrt(1,2)", "beta(pi,1)", "kummer(2)"] {
            assert!(parse_closed_form(text).is_err(), "{text}");
        }
        for text in ["ln(0)", "sqrt(-2)", "asin(2)", "(-8)^(1/3)", "1/(1-1)"] {
            assert!(parse_closed_form(text).unwrap().eval(20).is_err(), "{text}");
        }
        assert!(matches!(parse_closed_form("pi +"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn display_round_trip() {
        for text in ["7*sqrt(3)*G13cubed/(pi*2^(1/3))", "-15*asin(1/2)/(1/2)*sqrt(1-(1/2)^2)", "pi/3*ln(2-sqrt(3))+8/3*catalan"] {
            let e = parse_closed_form(text).unwrap();
            assert_eq!(parse_closed_form(&e.to_string()).unwrap(), e, "{text}");
        }
    }
}
