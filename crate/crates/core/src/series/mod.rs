//! Arbitrary-precision summation of series with exact rational terms.
//!
//! Every term is produced exactly (by a recurrence) and rounded once into
//! the running [`BigFloat`] sum. Summation stops when the geometric tail
//! estimate drops below `10^-target_digits`: with `r` the largest of the
//! last five term ratios, inflated by 10%, the tail after the last nonzero
//! term `t_L` is bounded by `|t_L| r^(N-L+1) / (1 - r)`.

mod expr;

pub use expr::{Expr, TermCursor, TermExpr};

use num_traits::{One, Signed, Zero};

use crate::derivation::{convergence_bound, weight_values, DerivedSeries};
use crate::exact::{rat, BigRational};
use crate::float::{bits_for_digits, rational_to_f64, BigFloat};
use crate::{Error, Result};

/// Rising factorial `(x)_m = x (x+1) ... (x+m-1)`, with `(x)_0 = 1`.
pub fn pochhammer(x: &BigRational, m: u64) -> BigRational {
    let mut acc = BigRational::one();
    let mut f = x.clone();
    for _ in 0..m {
        acc *= &f;
        f += BigRational::one();
    }
    acc
}

/// Outcome of a summation.
#[derive(Clone, Debug)]
pub struct EvalResult {
    pub value: BigFloat,
    pub terms_used: usize,
    /// Bound on `|value - true sum|`: the geometric tail estimate plus the
    /// accumulated rounding error. Always positive.
    pub tail_bound: BigFloat,
    /// Decimal digits per term from a least-squares fit of `-log10 |t_n|`
    /// over the last half of the nonzero terms.
    pub measured_rate: Option<f64>,
    /// `S_0, S_1, ...` at working precision.
    pub partial_sums: Vec<BigFloat>,
    pub precision_bits: usize,
}

/// Knobs for the summation driver.
#[derive(Clone, Copy, Debug)]
pub struct SumPolicy {
    /// Number of most recent ratios whose maximum estimates the tail ratio.
    pub window: usize,
    /// Multiplicative inflation of the estimated ratio.
    pub inflation: f64,
    /// Consecutive ratios `>= 1` that count as divergence.
    pub divergence_run: usize,
    /// Consecutive exact zeros after which the series counts as terminated.
    pub zero_run: usize,
    pub max_terms: usize,
}

impl Default for SumPolicy {
    fn default() -> Self {
        SumPolicy { window: 5, inflation: 1.1, divergence_run: 8, zero_run: 16, max_terms: 20_000 }
    }
}

/// `10^x` as a [`BigFloat`] at `prec` bits (relative accuracy ~1e-15).
pub(crate) fn pow10(x: f64, prec: usize) -> BigFloat {
    let whole = x.floor();
    let frac = BigFloat::from_f64(10f64.powf(x - whole), prec);
    let scale = BigFloat::from_bigint(&num_bigint::BigInt::from(10).pow(whole.abs() as u32), prec);
    if whole >= 0.0 {
        &frac * &scale
    } else {
        &frac / &scale
    }
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Sums exact terms `term(0), term(1), ...` to `target_digits` absolute digits.
///
/// `expected_terms` feeds the guard-digit count; `None` assumes up to 10^4.
pub fn sum_exact<F>(mut term: F, target_digits: usize, expected_terms: Option<f64>, policy: SumPolicy) -> Result<EvalResult>
where
    F: FnMut(u64) -> Result<BigRational>,
{
    let target_digits = target_digits.max(1);
    let t0 = term(0)?;
    let magnitude = if t0.is_zero() { 0.0 } else { rational_to_f64(&t0.abs()).log10().max(0.0) };
    let expected = expected_terms.unwrap_or(1.0e4).max(1.0);
    let guard = 10 + expected.log10().ceil() as usize + magnitude.ceil() as usize;
    let work_digits = target_digits + guard;
    let prec = bits_for_digits(work_digits);

    let mut sum = BigFloat::zero(prec);
    let mut partial_sums = Vec::new();
    // (n, log10 |t_n|) for nonzero terms
    let mut logs: Vec<(u64, f64)> = Vec::new();
    let mut ratios: Vec<f64> = Vec::new();
    let mut above_one = 0usize;
    let mut zeros = 0usize;
    let mut sum_abs_log: f64 = f64::NEG_INFINITY;
    let mut max_partial_log: f64 = f64::NEG_INFINITY;
    let log_add = |a: f64, b: f64| -> f64 {
        if a == f64::NEG_INFINITY {
            return b;
        }
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        hi + (1.0 + 10f64.powf(lo - hi)).log10()
    };

    let mut t = t0;
    let mut n: u64 = 0;
    let tail_log: f64;
    loop {
        if t.is_zero() {
            zeros += 1;
        } else {
            zeros = 0;
            let f = BigFloat::from_rational(&t, prec);
            let lg = f.log10_abs();
            sum = &sum + &f;
            sum_abs_log = log_add(sum_abs_log, lg);
            if let Some(&(m, prev)) = logs.last() {
                let r = 10f64.powf((lg - prev) / (n - m) as f64);
                ratios.push(r);
                if r >= 1.0 {
                    above_one += 1;
                    if above_one >= policy.divergence_run {
                        return Err(Error::NonConvergent(format!(
                            "term ratio >= 1 for {above_one} consecutive terms at n = {n}"
                        )));
                    }
                } else {
                    above_one = 0;
                }
            }
            logs.push((n, lg));
        }
        if !sum.is_zero() {
            max_partial_log = max_partial_log.max(sum.log10_abs());
        }
        partial_sums.push(sum.clone());

        if zeros >= policy.zero_run || (logs.is_empty() && zeros > 0 && n as usize >= policy.zero_run) {
            tail_log = f64::NEG_INFINITY;
            break;
        }
        if ratios.len() >= policy.window {
            let r = ratios[ratios.len() - policy.window..].iter().cloned().fold(0.0, f64::max) * policy.inflation;
            if r < 1.0 {
                let &(last, lg) = logs.last().expect("nonzero term seen");
                let gap = (n - last + 1) as f64;
                let bound = if r == 0.0 { f64::NEG_INFINITY } else { lg + gap * r.log10() - (1.0 - r).log10() };
                if bound < -(target_digits as f64) {
                    tail_log = bound;
                    break;
                }
            }
        }
        n += 1;
        if n as usize >= policy.max_terms {
            return Err(Error::NonConvergent(format!(
                "no tail bound below 1e-{target_digits} after {n} terms"
            )));
        }
        t = term(n)?;
    }

    // each rounding contributes at most one ulp of the term or the partial sum
    let terms_used = n as usize + 1;
    let round_log = log_add(sum_abs_log, max_partial_log + (terms_used as f64).log10())
        - prec as f64 * std::f64::consts::LOG10_2
        + 1.0;
    let floor_log = -(work_digits as f64);
    let total_log = log_add(log_add(tail_log, round_log), floor_log);
    let tail_bound = pow10(total_log, 64);

    let rate_points: Vec<(f64, f64)> = logs[logs.len() / 2..].iter().map(|&(m, lg)| (m as f64, -lg)).collect();
    Ok(EvalResult {
        value: sum,
        terms_used,
        tail_bound,
        measured_rate: slope(&rate_points),
        partial_sums,
        precision_bits: prec,
    })
}

/// Exact terms of a derived series via the ratio recurrence on the base
/// Pochhammer quotient; `t_n = base(n) w(n)`.
pub struct DerivedTerms<'a> {
    ds: &'a DerivedSeries,
    n: u64,
    base: BigRational,
}

impl<'a> DerivedTerms<'a> {
    pub fn new(ds: &'a DerivedSeries) -> Self {
        DerivedTerms { ds, n: 0, base: BigRational::one() }
    }

    /// `base(n+1) / base(n)`.
    fn base_ratio(&self) -> BigRational {
        let ds = self.ds;
        let (k, s, n) = (ds.k as i64, ds.s as i64, self.n as i64);
        let one = rat(1);
        let mut num = BigRational::one();
        for j in 0..k {
            num *= &ds.a + &one + rat(k * n + j);
        }
        for j in 0..s {
            num *= &ds.b + &one + rat(s * n + j);
        }
        let mut den = ds.z.clone();
        for j in 0..(k + s) {
            den *= &ds.a + &ds.b + rat(2 + (k + s) * n + j);
        }
        num / den
    }

    pub fn next_term(&mut self) -> Result<BigRational> {
        let t = &self.base * weight_values(self.ds, self.n)?;
        self.base = &self.base * self.base_ratio();
        self.n += 1;
        Ok(t)
    }
}

/// `log10(|z| / M(k, s))`.
pub fn predicted_rate(ds: &DerivedSeries) -> f64 {
    let m = convergence_bound(ds.k, ds.s);
    (rational_to_f64(&ds.z.abs()) / rational_to_f64(&m)).log10()
}

/// Sums `Σ base(n) w(n)`; the series value is this times `B(a+1, b+1)/z`.
pub fn evaluate_derived(ds: &DerivedSeries, target_digits: usize) -> Result<EvalResult> {
    let rate = predicted_rate(ds);
    if rate.is_nan() || rate <= 0.0 {
        return Err(Error::NonConvergent(format!("predicted rate {rate} digits/term")));
    }
    let expected = target_digits as f64 / rate + 10.0;
    let mut terms = DerivedTerms::new(ds);
    sum_exact(|_| terms.next_term(), target_digits, Some(expected), SumPolicy::default())
}

/// Sums a [`TermExpr`] from `n = 0`.
pub fn evaluate_expr(e: &TermExpr, target_digits: usize) -> Result<EvalResult> {
    evaluate_expr_from(e, 0, target_digits)
}

/// Sums a [`TermExpr`] from `n = start`.
pub fn evaluate_expr_from(e: &TermExpr, start: u64, target_digits: usize) -> Result<EvalResult> {
    let mut cursor = e.cursor(start)?;
    sum_exact(|_| cursor.next_term(), target_digits, None, SumPolicy::default())
}

/// Least-squares slope of `-log10 |S_n - reference|` against `n` over the
/// last half of the partial sums. Points where `S_n` equals the reference
/// are dropped.
pub fn measured_rate(partial_sums: &[BigFloat], reference: &BigFloat) -> Result<f64> {
    measured_rate_from(partial_sums, reference, 0)
}

/// As [`measured_rate`], ignoring the first `skip` partial sums.
pub fn measured_rate_from(partial_sums: &[BigFloat], reference: &BigFloat, skip: usize) -> Result<f64> {
    if partial_sums.len() < 10 {
        return Err(Error::InvalidParameter(format!(
            "measured rate needs at least 10 partial sums, got {}",
            partial_sums.len()
        )));
    }
    let from = (partial_sums.len() / 2).max(skip);
    let points: Vec<(f64, f64)> = partial_sums
        .iter()
        .enumerate()
        .skip(from)
        .filter_map(|(n, s)| {
            let d = s - reference;
            (!d.is_zero()).then(|| (n as f64, -d.log10_abs()))
        })
        .collect();
    slope(&points).ok_or_else(|| Error::InvalidParameter("fewer than two usable partial sums".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::{solve_seed, SeedIntegral};
    use crate::exact::{ratio, Polynomial};

    fn arcsine_series() -> DerivedSeries {
        let seed = SeedIntegral::new(ratio(-1, 2), rat(0), Polynomial::new(vec![rat(1), ratio(1, 3)])).unwrap();
        solve_seed(&seed, 1, 2).unwrap()
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(&ratio(1, 2), 3), ratio(15, 8));
        assert_eq!(pochhammer(&ratio(-7, 3), 0), rat(1));
        assert_eq!(pochhammer(&rat(1), 5), rat(120));
        assert_eq!(pochhammer(&rat(-2), 4), rat(0));
    }

    #[test]
    fn multisection_small_cases() {
        // (a)_{nk} = prod_{y<k} ((a+y)/k)_n * k^{kn}
        for a in [ratio(1, 3), ratio(-5, 7), rat(2), ratio(9, 4)] {
            for k in 1..=4u64 {
                for n in 0..=6u64 {
                    let lhs = pochhammer(&a, n * k);
                    let mut rhs = crate::exact::rational_powi(&rat(k as i64), (k * n) as i64);
                    for y in 0..k {
                        rhs *= pochhammer(&((&a + rat(y as i64)) / rat(k as i64)), n);
                    }
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn recurrence_matches_scratch() {
        let ds = arcsine_series();
        let mut cur = DerivedTerms::new(&ds);
        for n in 0..=20 {
            let scratch = ds.base_term(n) * weight_values(&ds, n).unwrap();
            assert_eq!(cur.next_term().unwrap(), scratch, "n = {n}");
        }
    }

    #[test]
    fn rates() {
        assert!((predicted_rate(&arcsine_series()) - 324f64.log10()).abs() < 1e-12);
        let seed = SeedIntegral::new(rat(0), rat(0), Polynomial::one()).unwrap();
        let ds = DerivedSeries::with_z(&seed, 1, 0, rat(10)).unwrap();
        assert!((predicted_rate(&ds) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_sum_and_rate() {
        // sum (1/10)^n = 10/9
        let r = sum_exact(|n| Ok(crate::exact::rational_powi(&ratio(1, 10), n as i64)), 40, None, SumPolicy::default())
            .unwrap();
        let exact = BigFloat::from_rational(&ratio(10, 9), r.precision_bits + 64);
        let err = (&r.value - &exact).abs();
        assert!(err < r.tail_bound);
        assert!(err.log10_abs() < -40.0);
        let rate = measured_rate(&r.partial_sums, &exact).unwrap();
        assert!((rate - 1.0).abs() < 0.01, "{rate}");
        assert!((r.measured_rate.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn finite_expression_terminates() {
        let r = sum_exact(|n| Ok(if n == 0 { ratio(7, 3) } else { rat(0) }), 30, None, SumPolicy::default()).unwrap();
        assert_eq!(r.value, BigFloat::from_rational(&ratio(7, 3), r.precision_bits));
        assert!(!r.tail_bound.is_zero());
    }

    #[test]
    fn divergence_detected() {
        let e = sum_exact(|n| Ok(rat(n as i64 + 1)), 10, None, SumPolicy::default());
        assert!(matches!(e, Err(Error::NonConvergent(_))));
    }

    #[test]
    fn isolated_zero_terms_do_not_stop_early() {
        // every third term vanishes
        let term = |n: u64| Ok(if n % 3 == 1 { rat(0) } else { crate::exact::rational_powi(&ratio(1, 2), n as i64) });
        let r = sum_exact(term, 30, None, SumPolicy::default()).unwrap();
        // sum over n != 1 mod 3 of 2^-n = 2 - (1/2)/(1 - 1/8) = 2 - 4/7
        let exact = BigFloat::from_rational(&ratio(10, 7), r.precision_bits);
        assert!((&r.value - &exact).abs() < r.tail_bound);
        assert!(r.tail_bound.log10_abs() < -30.0);
    }

    #[test]
    fn measured_rate_needs_ten_points() {
        let sums: Vec<BigFloat> = (0..5).map(|i| BigFloat::from_i64(i, 64)).collect();
        assert!(measured_rate(&sums, &BigFloat::zero(64)).is_err());
    }

    #[test]
    fn measured_rate_skips_exact_hits() {
        let reference = BigFloat::from_i64(1, 256);
        let sums: Vec<BigFloat> = (0..20)
            .map(|n| {
                if n == 15 {
                    reference.clone()
                } else {
                    &reference + &pow10(-(2.0 * n as f64), 256)
                }
            })
            .collect();
        let r = measured_rate(&sums, &reference).unwrap();
        assert!((r - 2.0).abs() < 1e-6, "{r}");
    }
}
