use betaseries::catalog::{
    all_series, all_texts, catalog, parse_catalog, parse_closed_form, parse_term_expr, run_all, series_value,
    AnySeries, CheckKind, IdentityRecord, Series, Summary,
};
use betaseries::series::measured_rate_from;

#[test]
fn required_records_present() {
    let mut required = vec![
        "eq-1.1", "eq-1.2", "eq-2.8", "eq-2.10", "eq-2.11", "eq-2.12", "eq-3.3", "eq-3.6", "eq-3.7", "eq-3.8", "eq-3.9",
        "eq-4.4", "eq-4.5", "eq-5.6", "eq-5.7", "eq-5.8", "eq-5.9", "eq-5.10", "eq-5.11", "eq-5.12", "eq-5.13",
        "eq-5.14",
    ]
    .into_iter()
    .map(String::from)
    .collect::<Vec<_>>();
    for w in ["1/2", "1/3", "2/5"] {
        required.push(format!("eq-2.9@w={w}"));
    }
    for w in ["1", "2", "13/4"] {
        required.push(format!("eq-3.1@w={w}"));
    }
    for h in ["1/3", "1/4", "1/5"] {
        required.push(format!("eq-4.2@h={h}"));
        required.push(format!("eq-4.3@h={h}"));
    }
    let ids: Vec<&str> = catalog().iter().map(|r| r.id.as_str()).collect();
    for id in &required {
        assert!(ids.contains(&id.as_str()), "missing {id}");
    }
    let kind = |id: &str| catalog().iter().find(|r| r.id == id).unwrap().check;
    assert_eq!(kind("eq-2.10"), CheckKind::RationalIdentity);
    assert_eq!(kind("eq-3.3"), CheckKind::ExactParam);
    assert_eq!(kind("eq-3.8"), CheckKind::ExactParam);
    assert_eq!(kind("eq-5.6"), CheckKind::Grouping);
    assert_eq!(kind("eq-5.7"), CheckKind::Grouping);
    assert_eq!(catalog().iter().find(|r| r.id == "eq-2.10").unwrap().rational.as_ref().unwrap().samples.len(), 5);
}

#[test]
fn catalog_texts_round_trip() {
    let (exprs, closed) = all_texts();
    assert!(exprs.len() > 20 && closed.len() > 40);
    for text in exprs {
        let parsed = parse_term_expr(&text).unwrap();
        assert_eq!(parse_term_expr(&parsed.to_string()).unwrap(), parsed, "{text}");
    }
    for text in closed {
        let parsed = parse_closed_form(&text).unwrap();
        assert_eq!(parse_closed_form(&parsed.to_string()).unwrap(), parsed, "{text}");
    }
}

#[test]
fn records_serialize_round_trip() {
    let text = serde_json::to_string(catalog()).unwrap();
    let back: Vec<IdentityRecord> = parse_catalog(&text).unwrap();
    assert_eq!(back.as_slice(), catalog());
}

#[test]
fn full_run_passes_with_summary_schema() {
    let summary = run_all(30, None);
    let failing: Vec<_> = summary.records.iter().filter(|l| l.status != betaseries::catalog::Status::Pass).collect();
    assert!(summary.all_passed(), "{failing:?}");
    let json = serde_json::to_value(&summary).unwrap();
    for line in json["records"].as_array().unwrap() {
        let keys: Vec<&str> = line.as_object().unwrap().keys().map(String::as_str).collect();
        for k in ["id", "status", "lhs", "rhs", "abs_err", "terms", "measured_rate"] {
            assert!(keys.contains(&k), "{k} missing from {line}");
        }
    }
    let back: Summary = serde_json::from_value(json).unwrap();
    assert_eq!(back, summary);
}

#[test]
fn run_all_is_deterministic_and_sorted() {
    let a = serde_json::to_string(&run_all(12, Some("eq-4.*"))).unwrap();
    let b = serde_json::to_string(&run_all(12, Some("eq-4.*"))).unwrap();
    assert_eq!(a, b);
    let ids: Vec<String> = run_all(12, Some("eq-4.*")).records.into_iter().map(|l| l.id).collect();
    assert_eq!(ids.first().map(String::as_str), Some("eq-4.2@h=1/3"));
    assert_eq!(ids.last().map(String::as_str), Some("eq-4.5"));
}

/// Predicted and measured rates agree past the preasymptotic window.
#[test]
fn measured_rates_match_predictions() {
    const FROM: usize = 40;
    for (id, s) in all_series().unwrap() {
        let Some(predicted) = s.predicted_rate() else { continue };
        let digits = ((2 * FROM) as f64 * predicted).ceil() as usize + 10;
        let v = series_value(&s, digits).unwrap();
        let reference = series_value(&s, digits + 20).unwrap().sum.value;
        let measured = measured_rate_from(&v.sum.partial_sums, &reference, FROM).unwrap();
        assert!((measured - predicted).abs() <= 0.05, "{id}: predicted {predicted:.4}, measured {measured:.4}");
    }
}

/// The summand with `448n^2 + 448n + 127` misses the closed form at the
/// fifth significant digit; the catalog's `496n` matches it.
#[test]
fn printed_448_summand_disagrees() {
    let rec = catalog().iter().find(|r| r.id == "eq-5.14").unwrap();
    let term = &rec.lhs[0];
    let spec = term.series.clone().unwrap();
    assert!(spec.expr.contains("496*n"));
    let coef = parse_closed_form(&term.coef).unwrap().eval(30).unwrap();
    let rhs = parse_closed_form(&rec.rhs[0].coef).unwrap().eval(30).unwrap();
    let value = |expr: String| {
        let mut s = spec.clone();
        s.expr = expr;
        let v = series_value(&Series::from_any(&AnySeries::Expr(s)).unwrap(), 30).unwrap();
        let rel = &(&(&v.value * &coef) - &rhs) / &rhs;
        rel.abs().log10_abs()
    };
    assert!(value(spec.expr.clone()) < -29.0);
    let printed = value(spec.expr.replace("496*n", "448*n"));
    assert!(printed > -6.0 && printed < -4.0, "relative error 1e{printed:.1}");
}

/// At each sample `w` of the rational identity, `1 - w^2 x` divides
/// `z - x^2 (1-x)` exactly for `z = (w^2 - 1) / w^6`.
#[test]
fn rational_identity_samples_divide_kernel() {
    use betaseries::exact::{expand_kernel, parse_rational, rat, rational_powi, Polynomial};
    let rec = catalog().iter().find(|r| r.id == "eq-2.10").unwrap();
    let kernel = expand_kernel(2, 1).unwrap();
    for w in &rec.rational.as_ref().unwrap().samples {
        let w = parse_rational(w).unwrap();
        let w2 = &w * &w;
        let z = (&w2 - rat(1)) / rational_powi(&w, 6);
        let p = Polynomial::new(vec![rat(1), -w2]);
        let (_, r) = (&kernel + &Polynomial::constant(z)).divmod(&p).unwrap();
        assert!(r.is_zero(), "w = {w}");
    }
}
