//! JSON wire formats. Every rational travels as a `"num/den"` string.

use serde::{Deserialize, Serialize};

use crate::accel::{group, GroupedSeries, HypSeriesSpec};
use crate::derivation::{solve_seed, DerivedSeries, ParamDerivedSeries, SeedIntegral};
use crate::exact::{format_rational, parse_rational, BigRational, ParamPolynomial, Polynomial};
use crate::oracle::{Denominator, QuadratureProblem};
use crate::series::TermExpr;
use crate::{Error, Result};

use super::syntax::parse_term_expr;

pub(crate) fn rationals(v: &[String]) -> Result<Vec<BigRational>> {
    v.iter().map(|s| parse_rational(s)).collect()
}

pub(crate) fn strings(v: &[BigRational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

pub(crate) fn poly(v: &[String]) -> Result<Polynomial> {
    Ok(Polynomial::new(rationals(v)?))
}

/// Table `t[i][j]` = coefficient of `x^i w^j`.
pub(crate) fn param_poly(t: &[Vec<String>]) -> Result<ParamPolynomial> {
    Ok(ParamPolynomial::new(t.iter().map(|row| poly(row)).collect::<Result<_>>()?))
}

pub(crate) fn param_table(p: &ParamPolynomial) -> Vec<Vec<String>> {
    p.coeffs().iter().map(|c| strings(c.coeffs())).collect()
}

/// A derived series: the seed `x^a (1-x)^b / P(x)` and kernel exponents.
/// `z` and `qcoeffs` are filled in by the solver; when present on input
/// they must match it exactly (or supply `z` for a constant `P`). `expr`
/// optionally restates the summand `base(n) w(n)` in the term grammar and
/// must then agree with it term by term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    pub a: String,
    pub b: String,
    pub k: u32,
    pub s: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qcoeffs: Option<Vec<String>>,
    pub seed_p_coeffs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
}

/// Terms compared when a [`SeriesSpec`] carries `expr`.
const EXPR_CHECK_TERMS: u64 = 20;

impl SeriesSpec {
    pub fn from_derived(ds: &DerivedSeries) -> SeriesSpec {
        SeriesSpec {
            a: format_rational(&ds.a),
            b: format_rational(&ds.b),
            k: ds.k,
            s: ds.s,
            z: Some(format_rational(&ds.z)),
            qcoeffs: Some(strings(ds.qcoeffs())),
            seed_p_coeffs: strings(ds.p.coeffs()),
            expr: None,
        }
    }

    pub fn seed(&self) -> Result<SeedIntegral> {
        SeedIntegral::new(parse_rational(&self.a)?, parse_rational(&self.b)?, poly(&self.seed_p_coeffs)?)
    }

    pub fn derive(&self) -> Result<DerivedSeries> {
        let seed = self.seed()?;
        let given_z = self.z.as_deref().map(parse_rational).transpose()?;
        let ds = match (solve_seed(&seed, self.k, self.s), given_z.clone()) {
            (Ok(ds), _) => ds,
            (Err(Error::Undetermined), Some(z)) => DerivedSeries::with_z(&seed, self.k, self.s, z)?,
            (Err(e), _) => return Err(e),
        };
        if let Some(z) = given_z {
            if z != ds.z {
                return Err(Error::InvalidParameter(format!(
                    "spec gives z = {} but the seed determines z = {}",
                    format_rational(&z),
                    format_rational(&ds.z)
                )));
            }
        }
        if let Some(q) = &self.qcoeffs {
            let q = poly(q)?;
            if q != ds.q {
                return Err(Error::InvalidParameter(format!("spec gives Q = {q} but the solver gives Q = {}", ds.q)));
            }
        }
        if let Some(text) = &self.expr {
            let e = parse_term_expr(text)?;
            let mut cursor = crate::series::DerivedTerms::new(&ds);
            let mut alt = e.cursor(0)?;
            for n in 0..EXPR_CHECK_TERMS {
                if cursor.next_term()? != alt.next_term()? {
                    return Err(Error::InvalidParameter(format!("`expr` disagrees with the derived summand at n = {n}")));
                }
            }
        }
        Ok(ds)
    }
}

/// `{"upper": [...], "lower": [...], "z": "1/4", "m": 2}`; `m` defaults to 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypSpec {
    pub upper: Vec<String>,
    pub lower: Vec<String>,
    pub z: String,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub m: u32,
}

fn one() -> u32 {
    1
}

fn is_one(m: &u32) -> bool {
    *m == 1
}

impl HypSpec {
    pub fn base(&self) -> Result<HypSeriesSpec> {
        HypSeriesSpec::new(rationals(&self.upper)?, rationals(&self.lower)?, parse_rational(&self.z)?)
    }

    pub fn grouped(&self) -> Result<GroupedSeries> {
        group(&self.base()?, self.m)
    }
}

/// A summand in the term grammar summed from `start`. `ratio`, when
/// given, is the limit of `|t_n / t_(n+1)|`, i.e. the rate is `log10(ratio)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExprSpec {
    pub expr: String,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub start: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<String>,
}

fn is_zero(v: &u64) -> bool {
    *v == 0
}

impl ExprSpec {
    pub fn term_expr(&self) -> Result<TermExpr> {
        parse_term_expr(&self.expr)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub z: String,
    pub k: u32,
    pub s: u32,
}

/// `∫ x^a (1-x)^b N(x) / D(x)` with `D` either a polynomial (`p`) or a
/// kernel `z - x^k (1-x)^s`, or absent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSpec {
    pub a: String,
    pub b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numerator: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
}

impl QuadSpec {
    pub fn problem(&self) -> Result<QuadratureProblem> {
        let numerator = match &self.numerator {
            Some(v) => poly(v)?,
            None => Polynomial::one(),
        };
        let denominator = match (&self.p, &self.kernel) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidParameter("give either `p` or `kernel`, not both".into()))
            }
            (Some(p), None) => Denominator::Poly(poly(p)?),
            (None, Some(KernelSpec { z, k, s })) => Denominator::Kernel { z: parse_rational(z)?, k: *k, s: *s },
            (None, None) => Denominator::None,
        };
        QuadratureProblem::new(parse_rational(&self.a)?, parse_rational(&self.b)?, numerator, denominator)
    }
}

/// Whatever `eval --spec` accepts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnySeries {
    Derived(SeriesSpec),
    Hyp(HypSpec),
    Expr(ExprSpec),
}

/// A parameterized derivation on the wire (tables as in [`param_poly`]).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    pub k: u32,
    pub s: u32,
    pub seed_p_coeffs: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qcoeffs: Option<Vec<Vec<String>>>,
}

impl ParamSpec {
    pub fn from_derived(p: &ParamDerivedSeries) -> ParamSpec {
        ParamSpec {
            k: p.k,
            s: p.s,
            seed_p_coeffs: param_table(&p.p),
            z: Some(strings(p.z.coeffs())),
            qcoeffs: Some(param_table(&p.q)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_spec_round_trip() {
        let text = r#"{"a":"-1/2","b":"0","k":1,"s":2,"seed_p_coeffs":["1","1/3"]}"#;
        let spec: SeriesSpec = serde_json::from_str(text).unwrap();
        let ds = spec.derive().unwrap();
        let full = SeriesSpec::from_derived(&ds);
        assert_eq!(full.z.as_deref(), Some("-48"));
        assert_eq!(full.qcoeffs.as_deref().unwrap(), ["-48", "15", "-3"]);
        let json = serde_json::to_string(&full).unwrap();
        let back: SeriesSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, full);
        assert_eq!(back.derive().unwrap(), ds);
    }

    #[test]
    fn mismatched_expectations_are_rejected() {
        let mut spec: SeriesSpec =
            serde_json::from_str(r#"{"a":"-1/2","b":"0","k":1,"s":2,"seed_p_coeffs":["1","1/3"],"z":"-47"}"#).unwrap();
        assert!(matches!(spec.derive(), Err(Error::InvalidParameter(_))));
        spec.z = None;
        spec.qcoeffs = Some(vec!["-48".into(), "15".into()]);
        assert!(matches!(spec.derive(), Err(Error::InvalidParameter(_))));
        spec.qcoeffs = None;
        // t_n = -(2/5) (2n)!(130n+109)/((7/6)_n (11/6)_n (-1296)^n)
        spec.expr = Some("(-2/5)*fact(2*n)*(130*n+109)/(poch(7/6,n)*poch(11/6,n)*(-1296)^n)".into());
        spec.derive().unwrap();
        spec.expr = Some("fact(2*n)*(130*n+109)/(poch(7/6,n)*poch(11/6,n)*(-1296)^n)".into());
        assert!(spec.derive().is_err());
    }

    #[test]
    fn any_series_dispatch() {
        let d: AnySeries = serde_json::from_str(r#"{"a":"0","b":"0","k":1,"s":1,"seed_p_coeffs":["1","1"]}"#).unwrap();
        assert!(matches!(d, AnySeries::Derived(_)));
        let h: AnySeries = serde_json::from_str(r#"{"upper":["1/2"],"lower":["3/2"],"z":"1/4","m":2}"#).unwrap();
        assert!(matches!(h, AnySeries::Hyp(HypSpec { m: 2, .. })));
        let e: AnySeries = serde_json::from_str(r#"{"expr":"1/2^n"}"#).unwrap();
        assert!(matches!(e, AnySeries::Expr(_)));
        for v in [d, h, e] {
            let back: AnySeries = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
            assert_eq!(back, v);
        }
    }

    #[test]
    fn quad_spec_forms() {
        let q: QuadSpec = serde_json::from_str(r#"{"a":"-1/2","b":"0","kernel":{"z":"-48","k":1,"s":2},"numerator":["16","-5","1"]}"#).unwrap();
        q.problem().unwrap();
        let bad: QuadSpec = serde_json::from_str(r#"{"a":"0","b":"0","p":["1"],"kernel":{"z":"1","k":1,"s":1}}"#).unwrap();
        assert!(bad.problem().is_err());
    }
}
