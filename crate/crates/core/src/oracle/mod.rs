//! Independent references: quadrature plus classical constant recipes.
//!
//! Gamma values enter only through Beta integrals:
//! `Γ(1/3)^3 = B(1/3,1/3) 2π/√3`, `Γ(1/4)^2 = B(1/4,1/4) √π`,
//! `Γ(3/4)^2 = 2π^2 / Γ(1/4)^2`, and Kummer's right side
//! `√π Γ(2-2h) Γ(h) / (2 Γ(3/2-h)) = π B(h, 2-2h) / (2 B(1/2, 3/2-h))`.

pub mod elementary;
mod quad;

pub use quad::{integrate, integrate_with_levels, Denominator, QuadratureProblem, MAX_LEVELS};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{OnceLock, RwLock};

use crate::exact::{format_rational, parse_rational, rat, BigRational};
use crate::float::{bits_for_digits, BigFloat};
use crate::{Error, Result};

/// A named reference value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Constant {
    Pi,
    Ln2,
    Catalan,
    Sqrt(BigRational),
    Beta(BigRational, BigRational),
}

impl Constant {
    pub fn recipe(&self) -> &'static str {
        match self {
            Constant::Pi => "Machin arctangent formula",
            Constant::Ln2 => "2 atanh(1/3) series",
            Constant::Catalan => "accelerated alternating series",
            Constant::Sqrt(_) => "Newton iteration",
            Constant::Beta(..) => "tanh-sinh quadrature",
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Pi => write!(f, "pi"),
            Constant::Ln2 => write!(f, "ln2"),
            Constant::Catalan => write!(f, "catalan"),
            Constant::Sqrt(r) => write!(f, "sqrt({})", format_rational(r)),
            Constant::Beta(p, q) => write!(f, "beta({},{})", format_rational(p), format_rational(q)),
        }
    }
}

fn call_args<'a>(s: &'a str, name: &str) -> Option<Vec<&'a str>> {
    let inner = s.strip_prefix(name)?.trim().strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.split(',').map(str::trim).collect())
}

impl FromStr for Constant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Constant> {
        let s = s.trim();
        match s {
            "pi" => return Ok(Constant::Pi),
            "ln2" => return Ok(Constant::Ln2),
            "catalan" => return Ok(Constant::Catalan),
            _ => {}
        }
        if let Some(args) = call_args(s, "sqrt") {
            if let [r] = args.as_slice() {
                let r = parse_rational(r)?;
                if r < rat(0) {
                    return Err(Error::InvalidParameter("sqrt of a negative rational".into()));
                }
                return Ok(Constant::Sqrt(r));
            }
        }
        if let Some(args) = call_args(s, "beta") {
            if let [p, q] = args.as_slice() {
                let (p, q) = (parse_rational(p)?, parse_rational(q)?);
                if p <= rat(0) || q <= rat(0) {
                    return Err(Error::InvalidParameter("beta arguments must be positive".into()));
                }
                return Ok(Constant::Beta(p, q));
            }
        }
        Err(Error::Unsupported(format!("unknown reference `{s}`")))
    }
}

/// A cached reference value.
#[derive(Clone, Debug)]
pub struct ReferenceConstant {
    pub name: String,
    pub recipe: &'static str,
    pub digits: usize,
    pub value: BigFloat,
}

type Cache = RwLock<HashMap<String, ReferenceConstant>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Looks up `key` at `digits`, computing (outside the lock) on a miss.
fn cached(key: String, recipe: &'static str, digits: usize, compute: impl FnOnce() -> Result<BigFloat>) -> Result<BigFloat> {
    let prec = bits_for_digits(digits + 5);
    if let Some(hit) = cache().read().expect("cache lock").get(&key) {
        if hit.digits >= digits {
            return Ok(hit.value.with_precision(prec));
        }
    }
    let value = compute()?;
    let mut map = cache().write().expect("cache lock");
    let keep = map.get(&key).map_or(true, |old| old.digits < digits);
    if keep {
        map.insert(key.clone(), ReferenceConstant { name: key, recipe, digits, value: value.clone() });
    }
    Ok(value.with_precision(prec))
}

/// Snapshot of everything cached so far.
pub fn cached_constants() -> Vec<ReferenceConstant> {
    let mut v: Vec<_> = cache().read().expect("cache lock").values().cloned().collect();
    v.sort_by(|a, b| a.name.cmp(&b.name));
    v
}

/// The value of `c` to `digits` decimal digits.
pub fn reference(c: &Constant, digits: usize) -> Result<BigFloat> {
    let prec = bits_for_digits(digits + 10);
    cached(c.to_string(), c.recipe(), digits, || {
        Ok(match c {
            Constant::Pi => elementary::pi(prec),
            Constant::Ln2 => elementary::ln2(prec),
            Constant::Catalan => elementary::catalan(prec),
            Constant::Sqrt(r) => elementary::sqrt_rational(r, prec),
            Constant::Beta(p, q) => integrate(&QuadratureProblem::beta(p, q)?, digits + 5)?,
        })
    })
}

/// As [`reference`], by name (`pi`, `ln2`, `catalan`, `sqrt(r)`, `beta(p,q)`).
pub fn reference_named(name: &str, digits: usize) -> Result<BigFloat> {
    reference(&name.parse()?, digits)
}

/// Gamma products reachable from Beta integrals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GammaTag {
    /// `Γ(1/3)^3`
    G13Cubed,
    /// `Γ(1/4)^2`
    G14Sq,
    /// `Γ(3/4)^2`
    G34Sq,
    /// `√π Γ(2-2h) Γ(h) / (2 Γ(3/2-h))` for `0 < h < 1`
    Kummer(BigRational),
}

impl fmt::Display for GammaTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaTag::G13Cubed => write!(f, "G13cubed"),
            GammaTag::G14Sq => write!(f, "G14sq"),
            GammaTag::G34Sq => write!(f, "G34sq"),
            GammaTag::Kummer(h) => write!(f, "kummer({})", format_rational(h)),
        }
    }
}

impl FromStr for GammaTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<GammaTag> {
        let s = s.trim();
        match s {
            "G13cubed" => Ok(GammaTag::G13Cubed),
            "G14sq" => Ok(GammaTag::G14Sq),
            "G34sq" => Ok(GammaTag::G34Sq),
            _ => match call_args(s, "kummer").as_deref() {
                Some([h]) => {
                    let h = parse_rational(h)?;
                    if h <= rat(0) || h >= rat(1) {
                        return Err(Error::InvalidParameter(format!(
                            "kummer(h) needs 0 < h < 1, got {}",
                            format_rational(&h)
                        )));
                    }
                    Ok(GammaTag::Kummer(h))
                }
                _ => Err(Error::Unsupported(format!("unknown gamma combination `{s}`"))),
            },
        }
    }
}

pub fn gamma_combination(tag: &GammaTag, digits: usize) -> Result<BigFloat> {
    let d = digits + 5;
    let prec = bits_for_digits(d + 5);
    let beta = |p: BigRational, q: BigRational| reference(&Constant::Beta(p, q), d);
    let pi = || reference(&Constant::Pi, d);
    let q = |n: i64, m: i64| crate::exact::ratio(n, m);
    cached(tag.to_string(), "Beta quadrature", digits, || {
        Ok(match tag {
            GammaTag::G13Cubed => {
                let s3 = reference(&Constant::Sqrt(rat(3)), d)?;
                &(&beta(q(1, 3), q(1, 3))? * &pi()?.mul_pow2(1)) / &s3
            }
            GammaTag::G14Sq => &beta(q(1, 4), q(1, 4))? * &elementary::sqrt(&pi()?, prec),
            GammaTag::G34Sq => {
                let g14 = &beta(q(1, 4), q(1, 4))? * &elementary::sqrt(&pi()?, prec);
                let p = pi()?;
                &(&p * &p).mul_pow2(1) / &g14
            }
            GammaTag::Kummer(h) => {
                let num = beta(h.clone(), rat(2) - h * rat(2))?;
                let den = beta(q(1, 2), q(3, 2) - h)?;
                (&(&pi()? * &num) / &den).mul_pow2(-1)
            }
        })
    })
}

/// As [`gamma_combination`], by tag text.
pub fn gamma_named(tag: &str, digits: usize) -> Result<BigFloat> {
    gamma_combination(&tag.parse()?, digits)
}

#[cfg(test)]
mod tests {
    use super::*;
    fn agree(a: &BigFloat, b: &BigFloat, digits: usize) -> bool {
        (a - b).abs().log10_abs() < -(digits as f64)
    }

    #[test]
    fn names_round_trip() {
        for s in ["pi", "ln2", "catalan", "sqrt(3)", "beta(1/4,1/4)"] {
            assert_eq!(s.parse::<Constant>().unwrap().to_string(), s);
        }
        for s in ["G13cubed", "G14sq", "G34sq", "kummer(1/3)"] {
            assert_eq!(s.parse::<GammaTag>().unwrap().to_string(), s);
        }
        assert!(matches!("zeta(3)".parse::<Constant>(), Err(Error::Unsupported(_))));
        assert!(matches!("kummer(1)".parse::<GammaTag>(), Err(Error::InvalidParameter(_))));
        assert!("beta(0,1)".parse::<Constant>().is_err());
    }

    #[test]
    fn kummer_half_is_half_pi() {
        let v = gamma_named("kummer(1/2)", 30).unwrap();
        let want = reference(&Constant::Pi, 40).unwrap().mul_pow2(-1);
        assert!(agree(&v, &want, 30));
    }

    #[test]
    fn gamma_quarter_reflection() {
        // Γ(1/4)^2 Γ(3/4)^2 = 2π^2
        let a = gamma_named("G14sq", 30).unwrap();
        let b = gamma_named("G34sq", 30).unwrap();
        let p = reference(&Constant::Pi, 40).unwrap();
        assert!(agree(&(&a * &b), &(&p * &p).mul_pow2(1), 28));
        // Γ(1/4)^2 = 13.14504720659687441285...
        assert_eq!(a.to_decimal(20), "13.14504720659687441286");
    }

    #[test]
    fn gamma_third_cubed() {
        let v = gamma_named("G13cubed", 30).unwrap();
        let g = parse_rational(&format!("2678938534707747633655692940974677644129/1{}", "0".repeat(39))).unwrap();
        let g = BigFloat::from_rational(&g, 200);
        assert!(agree(&v, &g.powi(3), 30));
    }

    #[test]
    fn cache_serves_lower_precision() {
        let hi = reference(&Constant::Ln2, 60).unwrap();
        let lo = reference(&Constant::Ln2, 20).unwrap();
        assert!(agree(&hi, &lo, 20));
        assert!(cached_constants().iter().any(|c| c.name == "ln2" && c.digits >= 60));
    }
}
