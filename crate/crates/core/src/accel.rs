//! The m-step grouping transform for `q+1Fq{1, x_1..x_q; y_1..y_q; z}`.
//!
//! With the unit upper parameter implicit, the base terms are
//! `t_n = prod_g (x_g)_n / (y_g)_n * z^n`. Grouping `m` consecutive terms
//! gives
//!
//! ```text
//! T_n = prod_g (x_g)_{mn}/(y_g)_{mn} z^{mn} * sum_{j<m} z^j prod_g (x_g+mn)_j/(y_g+mn)_j
//! ```
//!
//! so `T_0 + ... + T_n` equals the base partial sum through index `m(n+1) - 1`
//! and the series gains `m` times as many digits per term.

use num_traits::{One, Signed, Zero};

use crate::exact::{format_rational, is_nonpositive_integer, rat, BigRational};
use crate::float::{rational_to_f64, BigFloat};
use crate::series::{measured_rate_from, sum_exact, EvalResult, SumPolicy};
use crate::{Error, Result};

/// `q+1Fq{1, upper; lower; z}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypSeriesSpec {
    pub upper: Vec<BigRational>,
    pub lower: Vec<BigRational>,
    pub z: BigRational,
}

impl HypSeriesSpec {
    pub fn new(upper: Vec<BigRational>, lower: Vec<BigRational>, z: BigRational) -> Result<Self> {
        if upper.len() != lower.len() {
            return Err(Error::InvalidParameter(format!(
                "{} upper but {} lower parameters (besides the unit one)",
                upper.len(),
                lower.len()
            )));
        }
        if let Some(y) = lower.iter().find(|y| is_nonpositive_integer(y)) {
            return Err(Error::InvalidParameter(format!(
                "lower parameter {} is zero or a negative integer",
                format_rational(y)
            )));
        }
        let terminating = upper.iter().any(is_nonpositive_integer);
        let az = z.abs();
        if !terminating {
            if az > rat(1) {
                return Err(Error::InvalidParameter(format!("|z| = {} exceeds 1", format_rational(&az))));
            }
            if az == rat(1) {
                let excess = lower.iter().sum::<BigRational>() - upper.iter().sum::<BigRational>();
                if excess <= rat(1) {
                    return Err(Error::InvalidParameter(format!(
                        "|z| = 1 needs sum(lower) - sum(upper) > 1, got {}",
                        format_rational(&excess)
                    )));
                }
            }
        }
        Ok(HypSeriesSpec { upper, lower, z })
    }

    /// `t_{n+1} / t_n`.
    fn ratio(&self, n: u64) -> BigRational {
        let nn = BigRational::from_integer(n.into());
        let mut r = self.z.clone();
        for (x, y) in self.upper.iter().zip(&self.lower) {
            r = r * (x + &nn) / (y + &nn);
        }
        r
    }

    /// `t_n` from scratch.
    pub fn term(&self, n: u64) -> BigRational {
        let mut t = crate::exact::rational_powi(&self.z, n as i64);
        for (x, y) in self.upper.iter().zip(&self.lower) {
            t = t * crate::series::pochhammer(x, n) / crate::series::pochhammer(y, n);
        }
        t
    }

    /// `-log10 |z|`.
    pub fn predicted_rate(&self) -> f64 {
        -rational_to_f64(&self.z.abs()).log10()
    }
}

/// A base series with its terms grouped `m` at a time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupedSeries {
    pub base: HypSeriesSpec,
    pub m: u32,
}

pub fn group(base: &HypSeriesSpec, m: u32) -> Result<GroupedSeries> {
    if m == 0 {
        return Err(Error::InvalidParameter("grouping step m must be at least 1".into()));
    }
    Ok(GroupedSeries { base: base.clone(), m })
}

impl GroupedSeries {
    /// `prod_g (x_g)_{mn}/(y_g)_{mn} z^{mn}`, i.e. the base term at `mn`.
    pub fn outer(&self, n: u64) -> BigRational {
        self.base.term(self.m as u64 * n)
    }

    /// `sum_{j<m} z^j prod_g (x_g+mn)_j/(y_g+mn)_j`.
    pub fn inner_weight(&self, n: u64) -> BigRational {
        let mn = BigRational::from_integer((self.m as u64 * n).into());
        let mut total = BigRational::zero();
        let mut prod = BigRational::one();
        for j in 0..self.m {
            total += &prod;
            if j + 1 < self.m {
                let jj = BigRational::from_integer(j.into());
                prod *= &self.base.z;
                for (x, y) in self.base.upper.iter().zip(&self.base.lower) {
                    prod = prod * (x + &mn + &jj) / (y + &mn + &jj);
                }
            }
        }
        total
    }

    /// `T_n` from scratch.
    pub fn term(&self, n: u64) -> BigRational {
        self.outer(n) * self.inner_weight(n)
    }

    pub fn predicted_rate(&self) -> f64 {
        self.m as f64 * self.base.predicted_rate()
    }
}

/// Incremental terms of a base or grouped series.
pub struct HypTerms<'a> {
    base: &'a HypSeriesSpec,
    m: Option<&'a GroupedSeries>,
    n: u64,
    outer: BigRational,
}

impl<'a> HypTerms<'a> {
    pub fn base(spec: &'a HypSeriesSpec) -> Self {
        HypTerms { base: spec, m: None, n: 0, outer: BigRational::one() }
    }

    pub fn grouped(g: &'a GroupedSeries) -> Self {
        HypTerms { base: &g.base, m: Some(g), n: 0, outer: BigRational::one() }
    }

    pub fn next_term(&mut self) -> BigRational {
        let t = match self.m {
            None => {
                let t = self.outer.clone();
                self.outer = &self.outer * self.base.ratio(self.n);
                t
            }
            Some(g) => {
                let t = &self.outer * g.inner_weight(self.n);
                let m = g.m as u64;
                for j in 0..m {
                    self.outer = &self.outer * self.base.ratio(m * self.n + j);
                }
                t
            }
        };
        self.n += 1;
        t
    }
}

/// Either form, for [`eval_hyp`].
#[derive(Clone, Copy, Debug)]
pub enum HypInput<'a> {
    Base(&'a HypSeriesSpec),
    Grouped(&'a GroupedSeries),
}

impl<'a> From<&'a HypSeriesSpec> for HypInput<'a> {
    fn from(s: &'a HypSeriesSpec) -> Self {
        HypInput::Base(s)
    }
}

impl<'a> From<&'a GroupedSeries> for HypInput<'a> {
    fn from(g: &'a GroupedSeries) -> Self {
        HypInput::Grouped(g)
    }
}

pub fn eval_hyp<'a>(input: impl Into<HypInput<'a>>, target_digits: usize) -> Result<EvalResult> {
    let input = input.into();
    let (mut terms, rate) = match input {
        HypInput::Base(s) => (HypTerms::base(s), s.predicted_rate()),
        HypInput::Grouped(g) => (HypTerms::grouped(g), g.predicted_rate()),
    };
    let expected = if rate > 0.0 && rate.is_finite() { Some(target_digits as f64 / rate + 10.0) } else { None };
    sum_exact(|_| Ok(terms.next_term()), target_digits, expected, SumPolicy::default())
}

/// First `n <= n_max` where the grouped term differs from the sum of its
/// `m` base terms, or `None` when all agree exactly.
pub fn first_grouping_mismatch(g: &GroupedSeries, n_max: u64) -> Option<u64> {
    let mut base = HypTerms::base(&g.base);
    let mut grouped = HypTerms::grouped(g);
    for n in 0..=n_max {
        let block: BigRational = (0..g.m).map(|_| base.next_term()).sum();
        if block != grouped.next_term() || block != g.term(n) {
            return Some(n);
        }
    }
    None
}

/// Result of [`verify_grouping`].
#[derive(Clone, Debug)]
pub struct GroupingReport {
    pub m: u32,
    pub digits: usize,
    pub base_value: BigFloat,
    pub grouped_value: BigFloat,
    pub abs_diff: BigFloat,
    pub base_terms: usize,
    pub grouped_terms: usize,
    pub base_rate: f64,
    pub grouped_rate: f64,
    pub failures: Vec<String>,
}

impl GroupingReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Preasymptotic terms excluded from rate fits.
const RATE_SKIP: usize = 10;

fn fitted_rate(r: &EvalResult, reference: &BigFloat, fallback: f64) -> f64 {
    measured_rate_from(&r.partial_sums, reference, RATE_SKIP.min(r.partial_sums.len() / 2))
        .or_else(|_| r.measured_rate.ok_or(()))
        .unwrap_or(fallback)
}

/// Sums base and grouped forms to `digits`, compares them, and compares
/// their measured rates (`grouped ≈ m * base` within 0.05). Rates are
/// measured against a `digits + 20` reference.
pub fn verify_grouping(base: &HypSeriesSpec, m: u32, digits: usize) -> Result<GroupingReport> {
    let g = group(base, m)?;
    let rb = eval_hyp(base, digits + 5)?;
    let rg = eval_hyp(&g, digits + 5)?;
    let reference = eval_hyp(&g, digits + 20)?.value;
    let abs_diff = (&rb.value - &rg.value).abs();
    let mut failures = Vec::new();
    if !abs_diff.is_zero() && abs_diff.log10_abs() >= -(digits as f64) {
        failures.push(format!(
            "values differ by {}: base {} vs grouped {}",
            abs_diff.to_sci(3),
            rb.value.to_decimal(digits),
            rg.value.to_decimal(digits)
        ));
    }
    let base_rate = fitted_rate(&rb, &reference, f64::NAN);
    let grouped_rate = fitted_rate(&rg, &reference, f64::NAN);
    // with m = 1 the two evaluations are the same series
    if m > 1 && rb.terms_used >= 2 * RATE_SKIP && rg.terms_used >= RATE_SKIP {
        let want = m as f64 * base_rate;
        if !((grouped_rate - want).abs() <= 0.05) {
            failures.push(format!(
                "grouped rate {grouped_rate:.4} is not {m} x base rate {base_rate:.4} = {want:.4}"
            ));
        }
    }
    Ok(GroupingReport {
        m,
        digits,
        base_value: rb.value,
        grouped_value: rg.value,
        abs_diff,
        base_terms: rb.terms_used,
        grouped_terms: rg.terms_used,
        base_rate,
        grouped_rate,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    /// `sum 1/((2n+1)^2 C(2n,n))` as `3F2{1,1,1/2; 3/2,3/2; 1/4}`
    fn catalan_base() -> HypSeriesSpec {
        HypSeriesSpec::new(vec![rat(1), ratio(1, 2)], vec![ratio(3, 2), ratio(3, 2)], ratio(1, 4)).unwrap()
    }

    #[test]
    fn base_terms_are_central_binomial_form() {
        let s = catalan_base();
        for n in 0..12u64 {
            let c = crate::exact::binomial(2 * n, n);
            let want = BigRational::new(1.into(), c * (2 * n + 1) * (2 * n + 1));
            assert_eq!(s.term(n), want);
        }
    }

    #[test]
    fn m2_inner_weight_is_bracket() {
        let g = group(&catalan_base(), 2).unwrap();
        for n in 0..8i64 {
            let two_n = rat(2 * n);
            let bracket = ratio(1, 4) * (rat(1) + &two_n) * (ratio(1, 2) + &two_n)
                / ((ratio(3, 2) + &two_n) * (ratio(3, 2) + &two_n))
                + rat(1);
            assert_eq!(g.inner_weight(n as u64), bracket);
        }
    }

    #[test]
    fn m1_is_identity() {
        let g = group(&catalan_base(), 1).unwrap();
        for n in 0..10 {
            assert_eq!(g.inner_weight(n), rat(1));
            assert_eq!(g.term(n), g.base.term(n));
        }
        assert!(verify_grouping(&catalan_base(), 1, 20).unwrap().passed());
    }

    #[test]
    fn exact_grouping() {
        for m in 1..=4 {
            let g = group(&catalan_base(), m).unwrap();
            assert_eq!(first_grouping_mismatch(&g, 30), None, "m = {m}");
        }
        assert!(group(&catalan_base(), 0).is_err());
    }

    #[test]
    fn validation() {
        assert!(HypSeriesSpec::new(vec![rat(1)], vec![], ratio(1, 2)).is_err());
        assert!(HypSeriesSpec::new(vec![rat(1)], vec![rat(-2)], ratio(1, 2)).is_err());
        assert!(HypSeriesSpec::new(vec![rat(1)], vec![rat(2)], ratio(3, 2)).is_err());
        assert!(HypSeriesSpec::new(vec![rat(1)], vec![rat(2)], rat(-1)).is_err());
        assert!(HypSeriesSpec::new(vec![rat(1)], vec![ratio(7, 2)], rat(-1)).is_ok());
        // terminating series may use any z
        assert!(HypSeriesSpec::new(vec![rat(-3)], vec![rat(2)], rat(5)).is_ok());
    }

    #[test]
    fn log_series() {
        // 2F1{1,1;2;1/2} = 2 ln 2
        let s = HypSeriesSpec::new(vec![rat(1)], vec![rat(2)], ratio(1, 2)).unwrap();
        let r = eval_hyp(&s, 30).unwrap();
        let want = crate::oracle::elementary::ln2(r.precision_bits).mul_pow2(1);
        assert!((&r.value - &want).abs() < r.tail_bound);
        assert!(r.tail_bound.log10_abs() < -30.0);
    }

    #[test]
    fn catalan_grouping_report() {
        let rep = verify_grouping(&catalan_base(), 2, 40).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        assert!((rep.base_rate - 0.602).abs() < 0.05, "{}", rep.base_rate);
    }
}
