//! The identity catalog and its verification driver.
//!
//! A record equates two or more *sides*; each side is a sum of terms
//! `coef × component`, where `coef` is a closed form and the component is
//! a series (derived, hypergeometric, or a summand expression) or an
//! integral. A side made only of closed forms is the reference value.
//! Exact records instead check polynomial identities.

mod closed;
mod syntax;
mod wire;

pub use closed::{parse_closed_form, ClosedForm};
pub use syntax::{parse_term_expr, parse_w_polynomial};
pub use wire::{AnySeries, ExprSpec, HypSpec, KernelSpec, ParamSpec, QuadSpec, SeriesSpec};

use std::cmp::Ordering;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::accel::{eval_hyp, first_grouping_mismatch, group, verify_grouping, GroupedSeries, HypSeriesSpec, HypTerms};
use crate::derivation::{series_value_contract, solve_seed_param, weight_values, DerivedSeries};
use crate::exact::{parse_rational, BigRational};
use crate::float::{bits_for_digits, BigFloat};
use crate::oracle::{self, integrate, Constant, QuadratureProblem};
use crate::series::{evaluate_derived, evaluate_expr_from, measured_rate_from, predicted_rate, DerivedTerms, EvalResult, TermExpr};
use crate::{Error, Result};

const CATALOG_JSON: &str = include_str!("../../catalog/identities.json");

/// Preasymptotic terms excluded from measured rates.
pub const RATE_SKIP: usize = 10;
/// Extra digits of the re-evaluation that checks tail bounds.
pub const SOUNDNESS_EXTRA_DIGITS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Numeric,
    ExactParam,
    RationalIdentity,
    Grouping,
}

/// One `coef × component` summand of a side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    #[serde(default = "unit", skip_serializing_if = "is_unit")]
    pub coef: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<ExprSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived: Option<SeriesSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyp: Option<HypSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad: Option<QuadSpec>,
}

fn unit() -> String {
    "1".into()
}

fn is_unit(s: &String) -> bool {
    s == "1"
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalCheck {
    pub lhs_num: Vec<Vec<String>>,
    pub lhs_den: Vec<Vec<String>>,
    pub rhs_num: Vec<Vec<String>>,
    pub rhs_den: Vec<Vec<String>>,
    pub samples: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupingCheck {
    pub upper: Vec<String>,
    pub lower: Vec<String>,
    pub z: String,
    pub m: Vec<u32>,
    pub n_max: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityRecord {
    pub id: String,
    pub title: String,
    pub provenance: String,
    pub required_digits: usize,
    pub check: CheckKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lhs: Vec<Term>,
    /// Intermediate sides, each equal to `lhs` and `rhs`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub also: Vec<Vec<Term>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rhs: Vec<Term>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<ParamSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rational: Option<RationalCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grouping: Option<GroupingCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl IdentityRecord {
    pub fn sides(&self) -> Vec<&[Term]> {
        let mut v: Vec<&[Term]> = vec![&self.lhs];
        v.extend(self.also.iter().map(Vec::as_slice));
        v.push(&self.rhs);
        v
    }
}

/// Natural order on ids: digit runs compare numerically.
pub fn compare_ids(a: &str, b: &str) -> Ordering {
    fn chunks(s: &str) -> Vec<(bool, &str)> {
        let mut out = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for i in 1..=bytes.len() {
            if i == bytes.len() || bytes[i].is_ascii_digit() != bytes[start].is_ascii_digit() {
                out.push((bytes[start].is_ascii_digit(), &s[start..i]));
                start = i;
            }
        }
        out
    }
    let (ca, cb) = (chunks(a), chunks(b));
    for (x, y) in ca.iter().zip(&cb) {
        let o = match (x, y) {
            ((true, p), (true, q)) => {
                let (p, q) = (p.trim_start_matches('0'), q.trim_start_matches('0'));
                p.len().cmp(&q.len()).then_with(|| p.cmp(q))
            }
            ((_, p), (_, q)) => p.cmp(q),
        };
        if o != Ordering::Equal {
            return o;
        }
    }
    ca.len().cmp(&cb.len()).then_with(|| a.cmp(b))
}

/// Parses a catalog document (a JSON array of records), sorted by id.
pub fn parse_catalog(text: &str) -> Result<Vec<IdentityRecord>> {
    let mut records: Vec<IdentityRecord> = serde_json::from_str(text)?;
    records.sort_by(|a, b| compare_ids(&a.id, &b.id));
    if let Some(w) = records.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(Error::Json(format!("duplicate id {:?}", w[0].id)));
    }
    Ok(records)
}

/// The built-in catalog.
pub fn catalog() -> &'static [IdentityRecord] {
    static CATALOG: OnceLock<Vec<IdentityRecord>> = OnceLock::new();
    CATALOG.get_or_init(|| parse_catalog(CATALOG_JSON).expect("built-in catalog is valid"))
}

pub fn find(id: &str) -> Result<&'static IdentityRecord> {
    catalog().iter().find(|r| r.id == id).ok_or_else(|| Error::UnknownIdentity(id.into()))
}

/// A summable series with exact terms.
#[derive(Clone, Debug)]
pub enum Series {
    Derived(DerivedSeries),
    Expr { expr: TermExpr, start: u64, ratio: Option<BigRational> },
    Hyp(HypSeriesSpec),
    Grouped(GroupedSeries),
}

impl Series {
    pub fn from_any(spec: &AnySeries) -> Result<Series> {
        match spec {
            AnySeries::Derived(s) => Ok(Series::Derived(s.derive()?)),
            AnySeries::Hyp(h) => Series::from_hyp(h),
            AnySeries::Expr(e) => Series::from_expr(e),
        }
    }

    fn from_hyp(h: &HypSpec) -> Result<Series> {
        Ok(if h.m == 1 { Series::Hyp(h.base()?) } else { Series::Grouped(h.grouped()?) })
    }

    fn from_expr(e: &ExprSpec) -> Result<Series> {
        let ratio = e.ratio.as_deref().map(parse_rational).transpose()?;
        Ok(Series::Expr { expr: e.term_expr()?, start: e.start, ratio })
    }

    /// Digits gained per term, when known in closed form.
    pub fn predicted_rate(&self) -> Option<f64> {
        match self {
            Series::Derived(ds) => Some(predicted_rate(ds)),
            Series::Expr { ratio, .. } => ratio.as_ref().map(|r| crate::float::rational_to_f64(r).abs().log10()),
            Series::Hyp(h) => Some(h.predicted_rate()),
            Series::Grouped(g) => Some(g.predicted_rate()),
        }
    }

    /// The raw sum `Σ t_n` (for derived series, without the Beta prefactor).
    pub fn sum(&self, target_digits: usize) -> Result<EvalResult> {
        match self {
            Series::Derived(ds) => evaluate_derived(ds, target_digits),
            Series::Expr { expr, start, .. } => evaluate_expr_from(expr, *start, target_digits),
            Series::Hyp(h) => eval_hyp(h, target_digits),
            Series::Grouped(g) => eval_hyp(g, target_digits),
        }
    }

    /// The first `count` terms from the incremental recurrences.
    pub fn terms(&self, count: usize) -> Result<Vec<BigRational>> {
        let mut out = Vec::with_capacity(count);
        match self {
            Series::Derived(ds) => {
                let mut t = DerivedTerms::new(ds);
                for _ in 0..count {
                    out.push(t.next_term()?);
                }
            }
            Series::Expr { expr, start, .. } => {
                let mut c = expr.cursor(*start)?;
                for _ in 0..count {
                    out.push(c.next_term()?);
                }
            }
            Series::Hyp(h) => {
                let mut t = HypTerms::base(h);
                out.extend((0..count).map(|_| t.next_term()));
            }
            Series::Grouped(g) => {
                let mut t = HypTerms::grouped(g);
                out.extend((0..count).map(|_| t.next_term()));
            }
        }
        Ok(out)
    }

    /// Term `n` (counted from the first summed index) computed from scratch.
    pub fn term_from_scratch(&self, n: u64) -> Result<BigRational> {
        match self {
            Series::Derived(ds) => Ok(ds.base_term(n) * weight_values(ds, n)?),
            Series::Expr { expr, start, .. } => expr.eval_at(start + n),
            Series::Hyp(h) => Ok(h.term(n)),
            Series::Grouped(g) => Ok(g.term(n)),
        }
    }
}

/// `B(a+1, b+1) / z` for a derived series.
pub fn derived_prefactor(ds: &DerivedSeries, digits: usize) -> Result<BigFloat> {
    let c = series_value_contract(ds);
    let prec = bits_for_digits(digits + 10);
    if let Some(q) = c.rational_prefactor() {
        return Ok(BigFloat::from_rational(&q, prec));
    }
    let (p, q) = c.beta_args;
    let beta = oracle::reference(&Constant::Beta(p, q), digits + 5)?;
    Ok(&beta / &BigFloat::from_rational(&c.z, prec))
}

fn ceil_log10(v: &BigFloat) -> usize {
    if v.is_zero() {
        0
    } else {
        v.log10_abs().max(0.0).ceil() as usize
    }
}

/// A summed series scaled to its stated value, with its summation record.
#[derive(Clone, Debug)]
pub struct SeriesValue {
    /// `B(a+1,b+1)/z · Σ` for derived series, `Σ` otherwise.
    pub value: BigFloat,
    /// Bound on the error of `value`.
    pub error_bound: BigFloat,
    pub sum: EvalResult,
    pub scale: BigFloat,
}

/// Sums `series` so that its stated value is good to `digits` absolute digits.
pub fn series_value(series: &Series, digits: usize) -> Result<SeriesValue> {
    let scale = match series {
        Series::Derived(ds) => derived_prefactor(ds, digits + 10)?,
        _ => BigFloat::from_i64(1, bits_for_digits(digits + 10)),
    };
    let sum = series.sum(digits + ceil_log10(&scale))?;
    let value = &sum.value * &scale;
    let error_bound = (&sum.tail_bound * &scale).abs();
    Ok(SeriesValue { value, error_bound, sum, scale })
}

/// Per-component details in a [`VerifyReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub side: usize,
    pub kind: String,
    pub coef: String,
    pub value: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured_rate: Option<f64>,
    /// `|value - value at +20 digits|` for series.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recheck_diff: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub id: String,
    pub status: Status,
    pub digits: usize,
    pub lhs: String,
    pub rhs: String,
    pub abs_err: String,
    pub terms: usize,
    pub measured_rate: Option<f64>,
    pub predicted_rate: Option<f64>,
    pub sides: Vec<String>,
    pub components: Vec<ComponentReport>,
    pub failures: Vec<String>,
}

/// One line of the [`run_all`] summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryLine {
    pub id: String,
    pub status: Status,
    pub lhs: String,
    pub rhs: String,
    pub abs_err: String,
    pub terms: usize,
    pub measured_rate: Option<f64>,
}

impl From<&VerifyReport> for SummaryLine {
    fn from(r: &VerifyReport) -> Self {
        SummaryLine {
            id: r.id.clone(),
            status: r.status,
            lhs: r.lhs.clone(),
            rhs: r.rhs.clone(),
            abs_err: r.abs_err.clone(),
            terms: r.terms,
            measured_rate: r.measured_rate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub digits: usize,
    pub passed: usize,
    pub failed: usize,
    pub records: Vec<SummaryLine>,
}

impl Summary {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

fn round_rate(r: f64) -> f64 {
    (r * 1e4).round() / 1e4
}

fn measure(sum: &EvalResult, reference: &BigFloat) -> Option<f64> {
    let skip = RATE_SKIP.min(sum.partial_sums.len() / 2);
    measured_rate_from(&sum.partial_sums, reference, skip).ok().or(sum.measured_rate).map(round_rate)
}

fn component_of(t: &Term) -> Result<Option<(String, Option<Series>, Option<QuadratureProblem>)>> {
    let given = [t.series.is_some(), t.derived.is_some(), t.hyp.is_some(), t.quad.is_some()];
    if given.iter().filter(|g| **g).count() > 1 {
        return Err(Error::InvalidParameter("a term names more than one component".into()));
    }
    Ok(if let Some(e) = &t.series {
        Some((format!("series {}", e.expr), Some(Series::from_expr(e)?), None))
    } else if let Some(d) = &t.derived {
        let ds = d.derive()?;
        Some((format!("derived k={} s={} z={}", ds.k, ds.s, crate::exact::format_rational(&ds.z)), Some(Series::Derived(ds)), None))
    } else if let Some(h) = &t.hyp {
        Some((format!("hypergeometric m={}", h.m), Some(Series::from_hyp(h)?), None))
    } else if let Some(q) = &t.quad {
        Some(("integral".to_string(), None, Some(q.problem()?)))
    } else {
        None
    })
}

struct SideOutcome {
    value: BigFloat,
    terms: usize,
    measured: Option<f64>,
    predicted: Option<f64>,
}

fn context(id: &str, side: usize, e: Error) -> Error {
    match e {
        Error::Eval(m) => Error::Eval(format!("{id}, side {side}: {m}")),
        other => Error::Eval(format!("{id}, side {side}: {other}")),
    }
}

fn eval_side(id: &str, idx: usize, side: &[Term], digits: usize, comps: &mut Vec<ComponentReport>, failures: &mut Vec<String>) -> Result<SideOutcome> {
    let prec = bits_for_digits(digits + 30);
    let mut total = BigFloat::zero(prec);
    let mut out = SideOutcome { value: BigFloat::zero(prec), terms: 0, measured: None, predicted: None };
    for t in side {
        let coef_form = parse_closed_form(&t.coef).map_err(|e| context(id, idx, e))?;
        let coef = coef_form.eval(digits + 25).map_err(|e| context(id, idx, e))?;
        let guard = digits + 5 + ceil_log10(&coef);
        let Some((kind, series, quad)) = component_of(t).map_err(|e| context(id, idx, e))? else {
            total = &total + &coef;
            comps.push(ComponentReport {
                side: idx,
                kind: "closed form".into(),
                coef: t.coef.clone(),
                value: coef.to_decimal(digits + 5),
                terms: None,
                tail_bound: None,
                predicted_rate: None,
                measured_rate: None,
                recheck_diff: None,
            });
            continue;
        };
        let mut report = ComponentReport {
            side: idx,
            kind,
            coef: t.coef.clone(),
            value: String::new(),
            terms: None,
            tail_bound: None,
            predicted_rate: None,
            measured_rate: None,
            recheck_diff: None,
        };
        let value = if let Some(series) = series {
            let sv = series_value(&series, guard).map_err(|e| context(id, idx, e))?;
            let fine = series_value(&series, guard + SOUNDNESS_EXTRA_DIGITS).map_err(|e| context(id, idx, e))?;
            let diff = (&sv.value - &fine.value).abs();
            if diff > sv.error_bound {
                failures.push(format!(
                    "side {idx}: tail bound {} understates the error {} of {}",
                    sv.error_bound.to_sci(3),
                    diff.to_sci(3),
                    report.kind
                ));
            }
            let measured = measure(&sv.sum, &fine.sum.value);
            let predicted = series.predicted_rate().map(round_rate);
            report.terms = Some(sv.sum.terms_used);
            report.tail_bound = Some(sv.error_bound.to_sci(3));
            report.recheck_diff = Some(diff.to_sci(3));
            report.measured_rate = measured;
            report.predicted_rate = predicted;
            out.terms += sv.sum.terms_used;
            if out.measured.is_none() {
                out.measured = measured;
                out.predicted = predicted;
            }
            sv.value
        } else {
            integrate(&quad.expect("component"), guard).map_err(|e| context(id, idx, e))?
        };
        report.value = value.to_decimal(digits + 5);
        total = &total + &(&coef * &value);
        comps.push(report);
    }
    out.value = total;
    Ok(out)
}

fn fail_report(id: &str, digits: usize, failures: Vec<String>) -> VerifyReport {
    VerifyReport {
        id: id.into(),
        status: Status::Fail,
        digits,
        lhs: String::new(),
        rhs: String::new(),
        abs_err: String::new(),
        terms: 0,
        measured_rate: None,
        predicted_rate: None,
        sides: Vec::new(),
        components: Vec::new(),
        failures,
    }
}

fn verify_numeric(r: &IdentityRecord, digits: usize) -> Result<VerifyReport> {
    let mut comps = Vec::new();
    let mut failures = Vec::new();
    let mut outcomes = Vec::new();
    for (i, side) in r.sides().into_iter().enumerate() {
        if side.is_empty() {
            return Err(Error::InvalidParameter(format!("{}: side {i} is empty", r.id)));
        }
        outcomes.push(eval_side(&r.id, i, side, digits, &mut comps, &mut failures)?);
    }
    let rhs = &outcomes.last().expect("two sides").value;
    let mut worst = BigFloat::zero(rhs.precision());
    for (i, o) in outcomes.iter().enumerate().take(outcomes.len() - 1) {
        let d = (&o.value - rhs).abs();
        if !d.is_zero() && d.log10_abs() >= -(digits as f64) {
            failures.push(format!("side {i} differs from the right side by {}", d.to_sci(3)));
        }
        if d > worst {
            worst = d;
        }
    }
    let first_series = outcomes.iter().find(|o| o.measured.is_some() || o.predicted.is_some());
    Ok(VerifyReport {
        id: r.id.clone(),
        status: if failures.is_empty() { Status::Pass } else { Status::Fail },
        digits,
        lhs: outcomes[0].value.to_decimal(digits),
        rhs: rhs.to_decimal(digits),
        abs_err: worst.to_sci(3),
        terms: outcomes.iter().map(|o| o.terms).sum(),
        measured_rate: first_series.and_then(|o| o.measured),
        predicted_rate: first_series.and_then(|o| o.predicted),
        sides: outcomes.iter().map(|o| o.value.to_decimal(digits)).collect(),
        components: comps,
        failures,
    })
}

fn exact_report(r: &IdentityRecord, digits: usize, lhs: String, rhs: String, failures: Vec<String>) -> VerifyReport {
    VerifyReport {
        id: r.id.clone(),
        status: if failures.is_empty() { Status::Pass } else { Status::Fail },
        digits,
        abs_err: if failures.is_empty() { "0".into() } else { "nonzero".into() },
        sides: vec![lhs.clone(), rhs.clone()],
        lhs,
        rhs,
        terms: 0,
        measured_rate: None,
        predicted_rate: None,
        components: Vec::new(),
        failures,
    }
}

fn verify_param(r: &IdentityRecord, digits: usize) -> Result<VerifyReport> {
    let spec = r.param.as_ref().ok_or_else(|| Error::InvalidParameter(format!("{}: missing `param`", r.id)))?;
    let p = wire::param_poly(&spec.seed_p_coeffs)?;
    let got = solve_seed_param(&p, spec.k, spec.s)?;
    let mut failures = Vec::new();
    if !got.identity_holds() {
        failures.push("P Q = z - x^k (1-x)^s does not hold".into());
    }
    if let Some(z) = &spec.z {
        if wire::poly(z)? != got.z {
            failures.push(format!("z(w) = {} differs from the expected value", got.z));
        }
    }
    if let Some(q) = &spec.qcoeffs {
        if wire::param_poly(q)? != got.q {
            failures.push(format!("Q(x, w) = {} differs from the expected value", got.q));
        }
    }
    Ok(exact_report(r, digits, format!("z(w) = {}; Q = {}", got.z, got.q), format!("{}", ParamSpecDisplay(spec)), failures))
}

struct ParamSpecDisplay<'a>(&'a ParamSpec);

impl std::fmt::Display for ParamSpecDisplay<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let z = self.0.z.as_deref().map(wire::poly).transpose().ok().flatten();
        let q = self.0.qcoeffs.as_deref().map(wire::param_poly).transpose().ok().flatten();
        match (z, q) {
            (Some(z), Some(q)) => write!(f, "z(w) = {z}; Q = {q}"),
            (Some(z), None) => write!(f, "z(w) = {z}"),
            _ => write!(f, "identity P Q = z - x^k (1-x)^s"),
        }
    }
}

fn verify_rational(r: &IdentityRecord, digits: usize) -> Result<VerifyReport> {
    let spec = r.rational.as_ref().ok_or_else(|| Error::InvalidParameter(format!("{}: missing `rational`", r.id)))?;
    let ln = wire::param_poly(&spec.lhs_num)?;
    let ld = wire::param_poly(&spec.lhs_den)?;
    let rn = wire::param_poly(&spec.rhs_num)?;
    let rd = wire::param_poly(&spec.rhs_den)?;
    let left = &ln * &rd;
    let right = &rn * &ld;
    let mut failures = Vec::new();
    if left != right {
        failures.push(format!("cross products differ: {left} vs {right}"));
    }
    for w in &spec.samples {
        let w0 = parse_rational(w)?;
        let (a, b) = (left.specialize(&w0), right.specialize(&w0));
        if ld.specialize(&w0).is_zero() || rd.specialize(&w0).is_zero() {
            failures.push(format!("a denominator vanishes identically at w = {w}"));
        } else if a != b {
            failures.push(format!("cross products differ at w = {w}: {a} vs {b}"));
        }
    }
    Ok(exact_report(r, digits, format!("({ln}) ({rd})"), format!("({rn}) ({ld})"), failures))
}

fn verify_group(r: &IdentityRecord, digits: usize) -> Result<VerifyReport> {
    let spec = r.grouping.as_ref().ok_or_else(|| Error::InvalidParameter(format!("{}: missing `grouping`", r.id)))?;
    let base = HypSeriesSpec::new(wire::rationals(&spec.upper)?, wire::rationals(&spec.lower)?, parse_rational(&spec.z)?)?;
    let mut failures = Vec::new();
    let mut comps = Vec::new();
    let mut lhs = String::new();
    let mut rhs = String::new();
    let mut worst = BigFloat::zero(64);
    let mut terms = 0;
    let mut measured = None;
    let mut predicted = None;
    for &m in &spec.m {
        let g = group(&base, m)?;
        if let Some(n) = first_grouping_mismatch(&g, spec.n_max) {
            failures.push(format!("m = {m}: grouped term {n} is not the sum of its base terms"));
        }
        let rep = verify_grouping(&base, m, digits)?;
        failures.extend(rep.failures.iter().map(|f| format!("m = {m}: {f}")));
        lhs = rep.base_value.to_decimal(digits);
        rhs = rep.grouped_value.to_decimal(digits);
        if rep.abs_diff > worst {
            worst = rep.abs_diff.clone();
        }
        terms = rep.base_terms;
        measured = Some(round_rate(rep.grouped_rate));
        predicted = Some(round_rate(g.predicted_rate()));
        comps.push(ComponentReport {
            side: 1,
            kind: format!("grouped m={m}"),
            coef: "1".into(),
            value: rep.grouped_value.to_decimal(digits + 5),
            terms: Some(rep.grouped_terms),
            tail_bound: None,
            predicted_rate: predicted,
            measured_rate: measured,
            recheck_diff: None,
        });
    }
    Ok(VerifyReport {
        id: r.id.clone(),
        status: if failures.is_empty() { Status::Pass } else { Status::Fail },
        digits,
        sides: vec![lhs.clone(), rhs.clone()],
        lhs,
        rhs,
        abs_err: worst.to_sci(3),
        terms,
        measured_rate: measured,
        predicted_rate: predicted,
        components: comps,
        failures,
    })
}

/// Verifies one record to `digits` absolute digits.
pub fn verify_record(r: &IdentityRecord, digits: usize) -> Result<VerifyReport> {
    let digits = digits.max(1);
    match r.check {
        CheckKind::Numeric => verify_numeric(r, digits),
        CheckKind::ExactParam => verify_param(r, digits),
        CheckKind::RationalIdentity => verify_rational(r, digits),
        CheckKind::Grouping => verify_group(r, digits),
    }
}

/// Verifies the catalog record `id`.
pub fn verify(id: &str, digits: usize) -> Result<VerifyReport> {
    verify_record(find(id)?, digits)
}

/// Shell-style `*` / `?` match against ids.
pub fn id_matches(pattern: &str, id: &str) -> bool {
    glob::Pattern::new(pattern).map(|p| p.matches(id)).unwrap_or(false)
}

/// Verifies every record whose id matches `only` (all when `None`),
/// concurrently, returning reports in id order. Evaluation errors become
/// failed reports.
pub fn run_all(digits: usize, only: Option<&str>) -> Summary {
    let records: Vec<&IdentityRecord> = catalog().iter().filter(|r| only.map_or(true, |p| id_matches(p, &r.id))).collect();
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism().map_or(4, |n| n.get()).min(records.len().max(1));
    let mut results: Vec<(usize, VerifyReport)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut mine = Vec::new();
                    loop {
                        let i = next.fetch_add(1, AtomicOrdering::Relaxed);
                        let Some(r) = records.get(i) else { break };
                        let report = verify_record(r, digits).unwrap_or_else(|e| fail_report(&r.id, digits, vec![e.to_string()]));
                        mine.push((i, report));
                    }
                    mine
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker")).collect()
    });
    results.sort_by_key(|(i, _)| *i);
    let lines: Vec<SummaryLine> = results.iter().map(|(_, r)| SummaryLine::from(r)).collect();
    let passed = lines.iter().filter(|l| l.status == Status::Pass).count();
    Summary { digits, passed, failed: lines.len() - passed, records: lines }
}

/// A derived series checked against both of its integral forms.
#[derive(Clone, Debug)]
pub struct DualityReport {
    pub series: BigFloat,
    pub seed_integral: BigFloat,
    pub transformed_integral: BigFloat,
    pub max_diff: BigFloat,
    pub digits: usize,
}

impl DualityReport {
    pub fn agrees(&self) -> bool {
        self.max_diff.is_zero() || self.max_diff.log10_abs() < -(self.digits as f64)
    }
}

pub fn duality(ds: &DerivedSeries, digits: usize) -> Result<DualityReport> {
    let series = series_value(&Series::Derived(ds.clone()), digits + 5)?.value;
    let seed = integrate(&QuadratureProblem::seed(&crate::derivation::SeedIntegral::new(ds.a.clone(), ds.b.clone(), ds.p.clone())?)?, digits + 5)?;
    let transformed = integrate(&QuadratureProblem::transformed(ds)?, digits + 5)?;
    let d1 = (&series - &seed).abs();
    let d2 = (&series - &transformed).abs();
    let max_diff = if d1 > d2 { d1 } else { d2 };
    Ok(DualityReport { series, seed_integral: seed, transformed_integral: transformed, max_diff, digits })
}

/// Every derived series named in the catalog, with its record id.
pub fn derived_series() -> Result<Vec<(String, DerivedSeries)>> {
    let mut out = Vec::new();
    for r in catalog() {
        for side in r.sides() {
            for t in side {
                if let Some(d) = &t.derived {
                    out.push((r.id.clone(), d.derive()?));
                }
            }
        }
    }
    Ok(out)
}

/// Every series component in the catalog (grouping records contribute
/// the base and each grouped form).
pub fn all_series() -> Result<Vec<(String, Series)>> {
    let mut out = Vec::new();
    for r in catalog() {
        for side in r.sides() {
            for t in side {
                if let Some((_, Some(s), _)) = component_of(t)? {
                    out.push((r.id.clone(), s));
                }
            }
        }
        if let Some(g) = &r.grouping {
            let base = HypSeriesSpec::new(wire::rationals(&g.upper)?, wire::rationals(&g.lower)?, parse_rational(&g.z)?)?;
            for &m in &g.m {
                out.push((r.id.clone(), Series::Grouped(group(&base, m)?)));
            }
            out.push((r.id.clone(), Series::Hyp(base)));
        }
    }
    Ok(out)
}

/// Every summand expression and closed form text in the catalog.
pub fn all_texts() -> (Vec<String>, Vec<String>) {
    let mut exprs = Vec::new();
    let mut closed = Vec::new();
    for r in catalog() {
        for side in r.sides() {
            for t in side {
                closed.push(t.coef.clone());
                if let Some(e) = &t.series {
                    exprs.push(e.expr.clone());
                }
                if let Some(e) = t.derived.as_ref().and_then(|d| d.expr.clone()) {
                    exprs.push(e);
                }
            }
        }
    }
    (exprs, closed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_id_order() {
        let mut ids = vec!["eq-2.10", "eq-2.9@w=1/2", "eq-1.1", "eq-10.1", "eq-2.11", "eq-1.1-seed"];
        ids.sort_by(|a, b| compare_ids(a, b));
        assert_eq!(ids, ["eq-1.1", "eq-1.1-seed", "eq-2.9@w=1/2", "eq-2.10", "eq-2.11", "eq-10.1"]);
    }

    #[test]
    fn catalog_loads() {
        assert!(catalog().len() >= 30);
        assert!(find("eq-1.1").is_ok());
        assert!(matches!(find("eq-99"), Err(Error::UnknownIdentity(_))));
    }

    #[test]
    fn globbing() {
        assert!(id_matches("eq-5.*", "eq-5.14"));
        assert!(!id_matches("eq-5.*", "eq-4.5"));
        assert!(id_matches("eq-3.1@w=?", "eq-3.1@w=2"));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let r = r#"{"id":"x","title":"t","provenance":"p","required_digits":5,"check":"numeric","lhs":[{"coef":"1"}],"rhs":[{"coef":"1"}]}"#;
        assert!(parse_catalog(&format!("[{r},{r}]")).is_err());
        assert_eq!(parse_catalog(&format!("[{r}]")).unwrap().len(), 1);
    }

    #[test]
    fn closed_sides_compare() {
        let doc = r#"[{"id":"t","title":"t","provenance":"p","required_digits":20,"check":"numeric",
            "lhs":[{"coef":"4*atan(1)"}],"rhs":[{"coef":"pi"}]},
            {"id":"u","title":"u","provenance":"p","required_digits":20,"check":"numeric",
            "lhs":[{"coef":"3"}],"rhs":[{"coef":"pi"}]}]"#;
        let recs = parse_catalog(doc).unwrap();
        assert_eq!(verify_record(&recs[0], 20).unwrap().status, Status::Pass);
        let bad = verify_record(&recs[1], 20).unwrap();
        assert_eq!(bad.status, Status::Fail);
        assert!(bad.abs_err.starts_with("1.42e-1"));
    }
}
