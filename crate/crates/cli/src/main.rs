use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use betaseries::accel::verify_grouping;
use betaseries::catalog::{
    self, parse_closed_form, parse_w_polynomial, series_value, AnySeries, ExprSpec, HypSpec, KernelSpec, ParamSpec, QuadSpec,
    Series, SeriesSpec,
};
use betaseries::derivation::solve_seed_param;
use betaseries::exact::{parse_rational, ParamPolynomial, Polynomial};
use betaseries::oracle::integrate;
use betaseries::series::measured_rate_from;
use betaseries::Error;

const GRAMMAR: &str = "\
summand grammar (in n):
  expr   := expr ('+'|'-') term | term
  term   := term ('*'|'/') unary | unary
  unary  := '-' unary | power
  power  := primary ('^' ['-'] primary)*
  primary:= integer | 'n' | '(' expr ')' | fact(e) | binom(e, e) | poch(e, e)
  fact/binom arguments and poch lengths must be affine in n with natural values;
  an exponent depending on n needs a constant base.
closed forms add: pi ln2 catalan G13cubed G14sq G34sq sqrt() ln() atan() asin()
  beta(p,q) kummer(h), rational exponents.";

#[derive(Parser)]
#[command(name = "betaseries", version, about = "Derive, evaluate and verify Beta-integral series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve P Q = z - x^k (1-x)^s for a seed x^a (1-x)^b / P(x) and print the series spec.
    Derive(DeriveArgs),
    /// Sum a series spec file or a summand expression.
    Eval(EvalArgs),
    /// Predicted and measured digits per term of a series spec.
    Rate(RateArgs),
    /// Integrate x^a (1-x)^b N(x) / D(x) over [0, 1].
    Integrate(IntegrateArgs),
    /// Group a hypergeometric series m terms at a time and compare.
    Accelerate(AccelerateArgs),
    /// Verify catalog identities.
    Verify(VerifyArgs),
    /// Print the catalog.
    List,
}

#[derive(Args)]
struct DeriveArgs {
    /// Coefficients of P, constant first, comma separated (polynomials in w with --param).
    #[arg(long, allow_hyphen_values = true)]
    p: String,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    s: u32,
    /// Treat P as a polynomial in x and a parameter w.
    #[arg(long)]
    param: bool,
    /// z for a constant P.
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["spec", "expr"])))]
struct EvalArgs {
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    expr: Option<String>,
    /// First summed index for --expr.
    #[arg(long, default_value_t = 0)]
    start: u64,
    /// Closed-form factor applied to the value.
    #[arg(long, allow_hyphen_values = true)]
    scale: Option<String>,
    #[arg(long, default_value_t = 30)]
    digits: usize,
}

#[derive(Args)]
struct RateArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 50)]
    digits: usize,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("denominator").args(["p", "kernel"])))]
struct IntegrateArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    #[arg(long, allow_hyphen_values = true)]
    b: String,
    /// Polynomial denominator, constant first.
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    /// Kernel denominator z - x^k (1-x)^s as z,k,s.
    #[arg(long, allow_hyphen_values = true)]
    kernel: Option<String>,
    /// Numerator coefficients, constant first.
    #[arg(long, allow_hyphen_values = true)]
    numerator: Option<String>,
    #[arg(long, default_value_t = 30)]
    digits: usize,
}

#[derive(Args)]
struct AccelerateArgs {
    #[arg(long)]
    hyp: PathBuf,
    #[arg(long)]
    m: u32,
    #[arg(long, default_value_t = 30)]
    digits: usize,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("which").required(true).args(["id", "all"])))]
struct VerifyArgs {
    #[arg(long)]
    id: Option<String>,
    #[arg(long)]
    all: bool,
    /// Glob on ids, with --all.
    #[arg(long)]
    only: Option<String>,
    /// Defaults to the record's own precision with --id, 30 with --all.
    #[arg(long)]
    digits: Option<usize>,
}

enum Failure {
    Usage(String),
    Failed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. } | Error::Semantic(_) => Failure::Usage(format!("{e}\n\n{GRAMMAR}")),
            Error::BadRational(_)
            | Error::Json(_)
            | Error::InvalidParameter(_)
            | Error::UnknownIdentity(_)
            | Error::Unsupported(_) => Failure::Usage(e.to_string()),
            other => Failure::Failed(other.to_string()),
        }
    }
}

type Outcome = Result<(Value, bool), Failure>;

fn coeffs(text: &str) -> Result<Vec<String>, Failure> {
    let v: Vec<String> = text.split(',').map(|c| c.trim().to_string()).collect();
    for c in &v {
        parse_rational(c)?;
    }
    Ok(v)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text).map_err(Error::from)?)
}

fn rate(r: Option<f64>) -> Value {
    r.map_or(Value::Null, |v| json!((v * 1e4).round() / 1e4))
}

fn derive(args: DeriveArgs) -> Outcome {
    if args.param {
        let p = args
            .p
            .split(',')
            .map(|c| parse_w_polynomial(c.trim()))
            .collect::<Result<Vec<Polynomial>, _>>()?;
        let pd = solve_seed_param(&ParamPolynomial::new(p), args.k, args.s)?;
        let mut v = serde_json::to_value(ParamSpec::from_derived(&pd)).expect("serializable");
        v["z_text"] = json!(pd.z.to_string().replace('x', "w"));
        return Ok((v, true));
    }
    let (Some(a), Some(b)) = (args.a, args.b) else {
        return Err(Failure::Usage("--a and --b are required without --param".into()));
    };
    let spec = SeriesSpec {
        a,
        b,
        k: args.k,
        s: args.s,
        z: args.z,
        qcoeffs: None,
        seed_p_coeffs: coeffs(&args.p)?,
        expr: None,
    };
    let ds = spec.derive()?;
    Ok((serde_json::to_value(SeriesSpec::from_derived(&ds)).expect("serializable"), true))
}

fn eval(args: EvalArgs) -> Outcome {
    let spec = match (&args.spec, &args.expr) {
        (Some(path), _) => read_json::<AnySeries>(path)?,
        (None, Some(e)) => AnySeries::Expr(ExprSpec { expr: e.clone(), start: args.start, ratio: None }),
        (None, None) => unreachable!("clap requires one source"),
    };
    let series = Series::from_any(&spec)?;
    let sv = series_value(&series, args.digits + 5)?;
    let mut value = sv.value.clone();
    if let Some(scale) = &args.scale {
        value = &value * &parse_closed_form(scale)?.eval(args.digits + 10)?;
    }
    Ok((
        json!({
            "value": value.to_decimal(args.digits),
            "digits": args.digits,
            "terms": sv.sum.terms_used,
            "error_bound": sv.error_bound.to_sci(3),
            "predicted_rate": rate(series.predicted_rate()),
            "measured_rate": rate(sv.sum.measured_rate),
        }),
        true,
    ))
}

fn rate_cmd(args: RateArgs) -> Outcome {
    let series = Series::from_any(&read_json::<AnySeries>(&args.spec)?)?;
    let sv = series.sum(args.digits)?;
    let reference = series.sum(args.digits + 20)?;
    let skip = catalog::RATE_SKIP.min(sv.partial_sums.len() / 2);
    let measured = measured_rate_from(&sv.partial_sums, &reference.value, skip).ok();
    Ok((
        json!({
            "predicted_rate": rate(series.predicted_rate()),
            "measured_rate": rate(measured),
            "terms": sv.terms_used,
            "digits": args.digits,
        }),
        true,
    ))
}

fn integrate_cmd(args: IntegrateArgs) -> Outcome {
    let kernel = match &args.kernel {
        None => None,
        Some(t) => {
            let parts: Vec<&str> = t.split(',').map(str::trim).collect();
            let [z, k, s] = parts.as_slice() else {
                return Err(Failure::Usage("--kernel takes z,k,s".into()));
            };
            let bad = |_| Failure::Usage(format!("bad kernel exponents in {t:?}"));
            parse_rational(z)?;
            Some(KernelSpec { z: z.to_string(), k: k.parse().map_err(bad)?, s: s.parse().map_err(bad)? })
        }
    };
    let spec = QuadSpec {
        a: args.a,
        b: args.b,
        numerator: args.numerator.as_deref().map(coeffs).transpose()?,
        p: args.p.as_deref().map(coeffs).transpose()?,
        kernel,
    };
    let v = integrate(&spec.problem()?, args.digits)?;
    Ok((json!({ "value": v.to_decimal(args.digits), "digits": args.digits }), true))
}

fn accelerate(args: AccelerateArgs) -> Outcome {
    let spec: HypSpec = read_json(&args.hyp)?;
    let rep = verify_grouping(&spec.base()?, args.m, args.digits)?;
    let ok = rep.passed();
    Ok((
        json!({
            "m": rep.m,
            "digits": rep.digits,
            "status": if ok { "PASS" } else { "FAIL" },
            "base_value": rep.base_value.to_decimal(args.digits),
            "grouped_value": rep.grouped_value.to_decimal(args.digits),
            "abs_diff": rep.abs_diff.to_sci(3),
            "base_terms": rep.base_terms,
            "grouped_terms": rep.grouped_terms,
            "base_rate": rate(Some(rep.base_rate)),
            "grouped_rate": rate(Some(rep.grouped_rate)),
            "predicted_grouped_rate": rate(Some(args.m as f64 * spec.base()?.predicted_rate())),
            "failures": rep.failures,
        }),
        ok,
    ))
}

fn verify(args: VerifyArgs) -> Outcome {
    if let Some(id) = &args.id {
        let rec = catalog::find(id)?;
        let rep = catalog::verify_record(rec, args.digits.unwrap_or(rec.required_digits))?;
        let ok = rep.status == catalog::Status::Pass;
        return Ok((serde_json::to_value(rep).expect("serializable"), ok));
    }
    if let Some(p) = &args.only {
        glob::Pattern::new(p).map_err(|e| Failure::Usage(format!("bad --only pattern: {e}")))?;
    }
    let summary = catalog::run_all(args.digits.unwrap_or(30), args.only.as_deref());
    let ok = summary.all_passed();
    Ok((serde_json::to_value(summary).expect("serializable"), ok))
}

fn list() -> Outcome {
    let v: Vec<Value> = catalog::catalog()
        .iter()
        .map(|r| {
            json!({
                "id": r.id,
                "title": r.title,
                "provenance": r.provenance,
                "check": r.check,
                "required_digits": r.required_digits,
            })
        })
        .collect();
    Ok((Value::Array(v), true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Derive(a) => derive(a),
        Command::Eval(a) => eval(a),
        Command::Rate(a) => rate_cmd(a),
        Command::Integrate(a) => integrate_cmd(a),
        Command::Accelerate(a) => accelerate(a),
        Command::Verify(a) => verify(a),
        Command::List => list(),
    };
    match out {
        Ok((v, ok)) => {
            let text = serde_json::to_string_pretty(&v).expect("serializable");
            // a closed pipe downstream is not an error of ours
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Failed(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
