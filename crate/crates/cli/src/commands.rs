use std::fmt;

use freenc::convergence::{self, CoeffRule, ConvergenceReport};
use freenc::diffcalc::{delta_r_higher, delta_r_word};
use freenc::ncalg::{find_nonvanishing_witness, standard_identity};
use freenc::ncexpr::parse;
use freenc::ttseries::{eval_nilpotent, series_partial_sum, tt_expand};
use freenc::{sample, Complex, Field, MatTuple, Matrix, NcError, NcExpr, NcFunction, Rational, RectTuple, Scalar, TTSeries, Word};
use serde_json::{json, Value};

use crate::{ExprArgs, RadiusArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib { err: NcError, source: Option<String> },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib { err, .. } => match err {
                NcError::Argument(_) | NcError::Parse(_) | NcError::Json(_) => 1,
                NcError::Domain { .. } => 2,
                NcError::Precondition(_) | NcError::MissingCoefficient(_) => 3,
            },
        }
    }

    /// The expression with a marker under the failing part, when known.
    pub fn context(&self) -> Option<String> {
        let CliError::Lib { err, source: Some(src) } = self else {
            return None;
        };
        let (start, end) = match err {
            NcError::Parse(p) => (p.offset, p.offset + 1),
            NcError::Domain { span: Some(s), .. } => (s.start, s.end),
            _ => return None,
        };
        let width = end.saturating_sub(start).max(1);
        Some(format!("  {src}\n  {}{}", " ".repeat(start), "^".repeat(width)))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Lib { err, .. } => write!(f, "{err}"),
        }
    }
}

impl From<NcError> for CliError {
    fn from(err: NcError) -> Self {
        CliError::Lib { err, source: None }
    }
}

fn with_source<T>(r: freenc::Result<T>, src: &str) -> Result<T, CliError> {
    r.map_err(|err| CliError::Lib { err, source: Some(src.to_string()) })
}

fn parse_expr(e: &ExprArgs) -> Result<NcExpr, CliError> {
    with_source(parse(&e.expr, e.d).map_err(NcError::from), &e.expr)
}

fn field_of(v: &Value, key: &str) -> Result<Value, CliError> {
    v.get(key).cloned().ok_or_else(|| NcError::Json(format!("missing '{key}'")).into())
}

fn array_of(v: &Value, key: &str) -> Result<Vec<Value>, CliError> {
    match v.get(key) {
        Some(Value::Array(items)) => Ok(items.clone()),
        _ => Err(NcError::Json(format!("'{key}' must be an array")).into()),
    }
}

pub fn eval(field: Field, e: &ExprArgs, input: &Value) -> Result<Value, CliError> {
    match field {
        Field::Rational => eval_in::<Rational>(e, input),
        Field::Complex => eval_in::<Complex>(e, input),
    }
}

fn eval_in<S: Scalar>(e: &ExprArgs, input: &Value) -> Result<Value, CliError> {
    let expr = parse_expr(e)?;
    let x = MatTuple::<S>::from_json(input)?;
    Ok(with_source(expr.eval(&x), &e.expr)?.to_json())
}

pub fn ddiff(field: Field, e: &ExprArgs, order: Option<usize>, word: Option<&str>, input: &Value) -> Result<Value, CliError> {
    match field {
        Field::Rational => ddiff_in::<Rational>(e, order, word, input),
        Field::Complex => ddiff_in::<Complex>(e, order, word, input),
    }
}

fn ddiff_in<S: Scalar>(e: &ExprArgs, order: Option<usize>, word: Option<&str>, input: &Value) -> Result<Value, CliError> {
    let f = NcFunction::<S>::from_expr(parse_expr(e)?);
    let points = array_of(input, "points")?
        .iter()
        .map(MatTuple::<S>::from_json)
        .collect::<freenc::Result<Vec<_>>>()?;
    let directions = if order == Some(0) && input.get("directions").is_none() { Vec::new() } else { array_of(input, "directions")? };
    match (order, word) {
        (_, Some(w)) => {
            let w: Word = w.parse()?;
            let mats = directions
                .iter()
                .map(|m| Matrix::<S>::from_entries_json(m, None))
                .collect::<freenc::Result<Vec<_>>>()?;
            let block = with_source(delta_r_word(&f, &w, &points, &mats), &e.expr)?;
            Ok(json!({
                "word": w.to_string(),
                "operator_word": w.transpose().to_string(),
                "note": "transposed-word: the block is the difference-differential operator of the reversed word",
                "block": block.to_json(),
            }))
        }
        (Some(l), None) => {
            let zs = directions
                .iter()
                .map(RectTuple::<S>::from_json)
                .collect::<freenc::Result<Vec<_>>>()?;
            if points.len() != l + 1 || zs.len() != l {
                return Err(CliError::Usage(format!("order {l} needs {} points and {l} directions", l + 1)));
            }
            let block = with_source(delta_r_higher(&f, &points, &zs), &e.expr)?;
            Ok(json!({ "order": l, "block": block.to_json() }))
        }
        (None, None) => Err(CliError::Usage("ddiff needs --order or --word".into())),
    }
}

pub fn expand(field: Field, e: &ExprArgs, max_deg: usize, input: &Value) -> Result<Value, CliError> {
    match field {
        Field::Rational => expand_in::<Rational>(e, max_deg, input),
        Field::Complex => expand_in::<Complex>(e, max_deg, input),
    }
}

fn expand_in<S: Scalar>(e: &ExprArgs, max_deg: usize, input: &Value) -> Result<Value, CliError> {
    let f = NcFunction::<S>::from_expr(parse_expr(e)?);
    let center = MatTuple::<S>::from_json(input)?;
    Ok(with_source(tt_expand(&f, &center, max_deg), &e.expr)?.to_json())
}

pub fn sum(field: Field, n: Option<usize>, input: &Value) -> Result<Value, CliError> {
    match field {
        Field::Rational => sum_in::<Rational>(n, input),
        Field::Complex => sum_in::<Complex>(n, input),
    }
}

fn sum_in<S: Scalar>(n: Option<usize>, input: &Value) -> Result<Value, CliError> {
    let series = TTSeries::<S>::from_json(&field_of(input, "series")?)?;
    let x = MatTuple::<S>::from_json(&field_of(input, "point")?)?;
    let value = match n {
        Some(n) => series_partial_sum(&series, &x, n)?,
        None => eval_nilpotent(&series, &x)?,
    };
    Ok(value.to_json())
}

fn parse_rule(spec: &str, d: usize) -> Result<CoeffRule, CliError> {
    match spec.split_once(':') {
        None if spec == "geometric" => Ok(CoeffRule::geometric(d)),
        None if spec == "zero" => Ok(CoeffRule::zero(d)),
        Some(("powers", w)) => Ok(CoeffRule::powers_of(d, &w.parse()?)?),
        _ => Err(CliError::Usage(format!("unknown rule '{spec}'; use geometric, zero or powers:<word>"))),
    }
}

fn radii_text(r: &[f64]) -> String {
    let parts: Vec<String> = r.iter().map(|x| x.to_string()).collect();
    format!("r = ({})", parts.join(", "))
}

fn point_sum(point: Option<&Value>) -> Result<Matrix<Complex>, CliError> {
    let z = MatTuple::<Complex>::from_json(point.expect("point estimators read a point"))?;
    let mut total = Matrix::zeros(z.n(), z.n());
    for m in z.mats() {
        total.add_assign(m);
    }
    Ok(total)
}

pub fn radius(args: &RadiusArgs, seed: u64, point: Option<&Value>) -> Result<Value, CliError> {
    let l = args.window;
    match args.estimator.as_str() {
        "spectral_radius" => {
            let est = convergence::spectral_radius(&point_sum(point)?, args.tol);
            return Ok(json!({ "estimator": "spectral_radius", "estimate": est, "tol": args.tol }));
        }
        "resolvent" => {
            let z = MatTuple::<Complex>::from_json(point.expect("point estimators read a point"))?;
            let pass = convergence::geometric_resolvent_check(&z, l, args.tol)?;
            return Ok(json!({ "estimator": "geometric_resolvent", "terms": l + 1, "tol": args.tol, "pass": pass }));
        }
        _ => {}
    }
    let rule = parse_rule(&args.rule, args.d)?;
    let report = match args.estimator.as_str() {
        "rho_point" => {
            let z = MatTuple::<Complex>::from_json(point.expect("rho_point reads a point"))?;
            let est = convergence::rho_point(&rule, &z, l)?;
            ConvergenceReport::new("rho_point", &rule, format!("point of size {}", z.n()), est, l)
        }
        "rho_m" => {
            let est = convergence::rho_m(&rule, args.m, args.samples, l, seed)?;
            let input = format!("m = {}, samples = {}", args.m, args.samples);
            ConvergenceReport::new("rho_m", &rule, input, est, l).with_seed(seed)
        }
        "mu_r" => ConvergenceReport::new("mu_r", &rule, radii_text(&args.radii), convergence::mu_r(&rule, &args.radii, l)?, l),
        "mu_diamond" => {
            let est = convergence::mu_diamond(&rule, &args.radii, l)?;
            ConvergenceReport::new("mu_diamond", &rule, radii_text(&args.radii), est, l)
        }
        other => return Err(CliError::Usage(format!("unknown estimator '{other}'"))),
    };
    Ok(serde_json::to_value(report).expect("reports serialize"))
}

pub fn identity(n: usize, trials: usize, seed: u64) -> Result<Value, CliError> {
    let p = standard_identity::<Rational>(n)?;
    let mut rng = sample::rng(seed);
    let mut vanishes = true;
    for _ in 0..trials {
        let x = sample::int_tuple::<Rational>(&mut rng, 2, n, 3);
        if !p.eval(&x)?.is_zero() {
            vanishes = false;
            break;
        }
    }
    let witness = find_nonvanishing_witness(&p, n + 1, 64, &mut rng)?;
    let found = witness.is_some();
    Ok(json!({
        "n": n,
        "degree": p.degree().to_string(),
        "trials": trials,
        "vanishes": vanishes,
        "witness_size": n + 1,
        "witness_found": found,
        "witness": witness.map(|w| w.to_json()),
        "pass": vanishes && found,
        "seed": seed,
    }))
}
