//! Taylor-Taylor expansions about a matrix center.
//!
//! The coefficient stored under a word `w` is `Δ_R^{w^T} f(Y, ..., Y)`, the
//! corner obtained by reading `w` left to right along a block bidiagonal
//! (see [`delta_r_word`]). With that convention the series term of `w` is
//! `(X - ⊕Y)^{⊙_s w}` contracted against the coefficient, exactly as the
//! word is written.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::blockops::{blocks_per_side, direct_sum_copies, is_jointly_nilpotent, DenseFauxMatrix, MatTuple};
use crate::diffcalc::delta_r_word;
use crate::error::{NcError, Result};
use crate::matrix::Matrix;
use crate::ncalg::NcPoly;
use crate::ncexpr::NcFunction;
use crate::scalar::Scalar;
use crate::words::{words_of_length, words_up_to, Word};

/// Tolerance for condition residuals on the float backend.
pub const FLOAT_CONDITION_TOL: f64 = 1e-8;

/// A multilinear map `(R^{s x s})^l -> R^{s x s}`, stored by its values on
/// tuples of matrix units `E_{ab}`; the unit index is `a s + b` and the
/// first argument is the most significant digit.
#[derive(Clone, PartialEq, Debug)]
pub struct CoeffTensor<S> {
    s: usize,
    degree: usize,
    table: Vec<Matrix<S>>,
}

impl<S: Scalar> CoeffTensor<S> {
    pub fn new(s: usize, degree: usize, table: Vec<Matrix<S>>) -> Result<Self> {
        if table.len() != (s * s).pow(degree as u32) {
            return Err(NcError::argument(format!(
                "a degree-{degree} tensor at s = {s} needs {} entries, found {}",
                (s * s).pow(degree as u32),
                table.len()
            )));
        }
        if table.iter().any(|m| m.shape() != (s, s)) {
            return Err(NcError::argument(format!("tensor entries must be {s}x{s}")));
        }
        Ok(CoeffTensor { s, degree, table })
    }

    pub fn zero(s: usize, degree: usize) -> Self {
        CoeffTensor { s, degree, table: vec![Matrix::zeros(s, s); (s * s).pow(degree as u32)] }
    }

    /// The `s = 1` tensor with value `c`.
    pub fn scalar(degree: usize, c: S) -> Self {
        CoeffTensor { s: 1, degree, table: vec![Matrix::scalar(1, c)] }
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn table(&self) -> &[Matrix<S>] {
        &self.table
    }

    pub fn table_mut(&mut self) -> &mut [Matrix<S>] {
        &mut self.table
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(Matrix::is_zero)
    }

    /// The single value at `s = 1`.
    pub fn as_scalar(&self) -> Option<&S> {
        (self.s == 1).then(|| self.table[0].get(0, 0))
    }

    /// Evaluates at `(A^1, ..., A^l)` by expanding each argument over matrix units.
    pub fn apply(&self, args: &[Matrix<S>]) -> Result<Matrix<S>> {
        if args.len() != self.degree || args.iter().any(|a| a.shape() != (self.s, self.s)) {
            return Err(NcError::argument(format!("expected {} arguments of size {}", self.degree, self.s)));
        }
        let mut out = Matrix::zeros(self.s, self.s);
        self.apply_rec(args, 0, 0, S::one(), &mut out);
        Ok(out)
    }

    fn apply_rec(&self, args: &[Matrix<S>], k: usize, idx: usize, weight: S, out: &mut Matrix<S>) {
        if k == args.len() {
            out.add_assign(&self.table[idx].scale(&weight));
            return;
        }
        for (u, a) in args[k].entries().iter().enumerate() {
            if !a.is_zero() {
                self.apply_rec(args, k + 1, idx * self.s * self.s + u, weight.mul_ref(a), out);
            }
        }
    }

    /// Contracts against a tensor given in matrix-unit coordinates.
    pub fn apply_dense(&self, coords: &[S]) -> Matrix<S> {
        debug_assert_eq!(coords.len(), self.table.len());
        let mut out = Matrix::zeros(self.s, self.s);
        for (c, m) in coords.iter().zip(&self.table) {
            if !c.is_zero() {
                out.add_assign(&m.scale(c));
            }
        }
        out
    }

    /// Nested arrays of depth `l` over the `s^2` unit indices with matrix
    /// leaves; a bare scalar when `s = 1`.
    pub fn to_json(&self) -> Value {
        if self.s == 1 {
            return self.table[0].get(0, 0).to_json();
        }
        self.nest_json(0, 0)
    }

    fn nest_json(&self, depth: usize, idx: usize) -> Value {
        if depth == self.degree {
            return self.table[idx].entries_json();
        }
        let s2 = self.s * self.s;
        Value::Array((0..s2).map(|u| self.nest_json(depth + 1, idx * s2 + u)).collect())
    }

    pub fn from_json(v: &Value, s: usize, degree: usize) -> Result<Self> {
        if s == 1 {
            return Ok(Self::scalar(degree, S::from_json(v)?));
        }
        let mut table = Vec::with_capacity((s * s).pow(degree as u32));
        Self::unnest_json(v, s, degree, &mut table)?;
        Self::new(s, degree, table)
    }

    fn unnest_json(v: &Value, s: usize, remaining: usize, out: &mut Vec<Matrix<S>>) -> Result<()> {
        if remaining == 0 {
            let m = Matrix::from_entries_json(v, Some(s))?;
            if m.rows() != s {
                return Err(NcError::Json(format!("tensor leaf must be {s}x{s}")));
            }
            out.push(m);
            return Ok(());
        }
        let arr = v
            .as_array()
            .filter(|a| a.len() == s * s)
            .ok_or_else(|| NcError::Json(format!("tensor level must have {} entries", s * s)))?;
        for item in arr {
            Self::unnest_json(item, s, remaining - 1, out)?;
        }
        Ok(())
    }
}

type Generator<S> = dyn Fn(&Word) -> CoeffTensor<S> + Send + Sync;

/// `Σ_w (X - ⊕Y)^{⊙_s w} f_w` about a center `Y` of size `s`.
///
/// `coeffs` holds every word up to `max_deg`, zeros included; an optional
/// generator supplies coefficients beyond it.
#[derive(Clone)]
pub struct TTSeries<S> {
    d: usize,
    s: usize,
    center: MatTuple<S>,
    coeffs: BTreeMap<Word, CoeffTensor<S>>,
    max_deg: usize,
    verified: bool,
    generator: Option<Arc<Generator<S>>>,
}

impl<S: Scalar> fmt::Debug for TTSeries<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TTSeries")
            .field("d", &self.d)
            .field("s", &self.s)
            .field("max_deg", &self.max_deg)
            .field("verified", &self.verified)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl<S: Scalar> PartialEq for TTSeries<S> {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d
            && self.s == other.s
            && self.center == other.center
            && self.max_deg == other.max_deg
            && self.coeffs == other.coeffs
    }
}

impl<S: Scalar> TTSeries<S> {
    /// Builds a series from explicit coefficients; missing words up to
    /// `max_deg` are zero. Verification runs for `s > 1`.
    pub fn from_coeffs(
        center: MatTuple<S>,
        max_deg: usize,
        coeffs: impl IntoIterator<Item = (Word, CoeffTensor<S>)>,
    ) -> Result<Self> {
        let (d, s) = (center.d(), center.n());
        let mut table: BTreeMap<Word, CoeffTensor<S>> =
            words_up_to(d, max_deg)?.into_iter().map(|w| { let l = w.len(); (w, CoeffTensor::zero(s, l)) }).collect();
        for (w, c) in coeffs {
            w.check(d)?;
            if c.s != s || c.degree != w.len() {
                return Err(NcError::argument(format!("coefficient for {w} has the wrong shape")));
            }
            if w.len() > max_deg {
                return Err(NcError::argument(format!("word {w} exceeds max_deg = {max_deg}")));
            }
            table.insert(w, c);
        }
        let mut series = TTSeries { d, s, center, coeffs: table, max_deg, verified: false, generator: None };
        series.verified = s == 1 || check_conditions(&series).passed();
        Ok(series)
    }

    /// A scalar-center series whose coefficients come from `rule` on demand.
    pub fn from_rule(
        center: MatTuple<S>,
        rule: impl Fn(&Word) -> S + Send + Sync + 'static,
    ) -> Result<Self> {
        if center.n() != 1 {
            return Err(NcError::argument("rule-generated series need a scalar center"));
        }
        let d = center.d();
        let rule = Arc::new(rule);
        let f_empty = CoeffTensor::scalar(0, rule(&Word::empty()));
        let mut coeffs = BTreeMap::new();
        coeffs.insert(Word::empty(), f_empty);
        let generator: Arc<Generator<S>> = Arc::new(move |w: &Word| CoeffTensor::scalar(w.len(), rule(w)));
        Ok(TTSeries { d, s: 1, center, coeffs, max_deg: 0, verified: true, generator: Some(generator) })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn center(&self) -> &MatTuple<S> {
        &self.center
    }

    pub fn max_deg(&self) -> usize {
        self.max_deg
    }

    pub fn verified(&self) -> bool {
        self.verified
    }

    pub fn coeffs(&self) -> &BTreeMap<Word, CoeffTensor<S>> {
        &self.coeffs
    }

    /// Words with a nonzero stored coefficient.
    pub fn support(&self) -> Vec<Word> {
        self.coeffs.iter().filter(|(_, c)| !c.is_zero()).map(|(w, _)| w.clone()).collect()
    }

    pub fn coeff(&self, w: &Word) -> Result<CoeffTensor<S>> {
        if let Some(c) = self.coeffs.get(w) {
            return Ok(c.clone());
        }
        match &self.generator {
            Some(g) if w.max_letter() <= self.d => Ok(g(w)),
            _ => Err(NcError::MissingCoefficient(w.clone())),
        }
    }

    /// Replaces one coefficient, clearing the verified flag for `s > 1`.
    pub fn with_coeff(&self, w: Word, c: CoeffTensor<S>) -> Result<Self> {
        if !self.coeffs.contains_key(&w) || c.s != self.s || c.degree != w.len() {
            return Err(NcError::argument(format!("cannot replace the coefficient of {w}")));
        }
        let mut out = self.clone();
        out.coeffs.insert(w, c);
        out.verified = self.s == 1;
        Ok(out)
    }

    fn has_through(&self, len: usize) -> bool {
        self.generator.is_some() || len <= self.max_deg
    }

    pub fn to_json(&self) -> Value {
        let coeffs: serde_json::Map<String, Value> =
            self.coeffs.iter().map(|(w, c)| (w.to_string(), c.to_json())).collect();
        json!({
            "d": self.d,
            "s": self.s,
            "max_deg": self.max_deg,
            "center": self.center.to_json(),
            "coeffs": coeffs,
            "verified": self.verified,
        })
    }

    /// Parses a series; the verified flag is recomputed rather than trusted.
    pub fn from_json(v: &Value) -> Result<Self> {
        let center = MatTuple::from_json(v.get("center").ok_or_else(|| NcError::Json("missing 'center'".into()))?)?;
        let s = center.n();
        if let Some(d) = v.get("d").and_then(Value::as_u64) {
            if d as usize != center.d() {
                return Err(NcError::Json("'d' disagrees with the center".into()));
            }
        }
        if let Some(declared) = v.get("s").and_then(Value::as_u64) {
            if declared as usize != s {
                return Err(NcError::Json("'s' disagrees with the center".into()));
            }
        }
        let obj = v
            .get("coeffs")
            .and_then(Value::as_object)
            .ok_or_else(|| NcError::Json("missing 'coeffs' object".into()))?;
        let parsed = obj
            .iter()
            .map(|(k, c)| {
                let w: Word = k.parse()?;
                let t = CoeffTensor::from_json(c, s, w.len())?;
                Ok((w, t))
            })
            .collect::<Result<Vec<_>>>()?;
        let max_deg = match v.get("max_deg").and_then(Value::as_u64) {
            Some(m) => m as usize,
            None => parsed.iter().map(|(w, _)| w.len()).max().unwrap_or(0),
        };
        Self::from_coeffs(center, max_deg, parsed)
    }
}

/// `Δ_R^{w^T} f(Y, ..., Y)` as a multilinear map on `s x s` matrices.
pub fn tt_coefficient<S: Scalar>(f: &NcFunction<S>, y: &MatTuple<S>, w: &Word) -> Result<CoeffTensor<S>> {
    let s = y.n();
    let l = w.len();
    let xs = vec![y.clone(); l + 1];
    let units: Vec<Matrix<S>> = (0..s * s).map(|u| Matrix::unit(s, s, u / s, u % s)).collect();
    let count = (s * s).pow(l as u32);
    let mut table = Vec::with_capacity(count);
    let mut args = Vec::with_capacity(l);
    for idx in 0..count {
        args.clear();
        let mut rest = idx;
        let mut digits = vec![0; l];
        for k in (0..l).rev() {
            digits[k] = rest % (s * s);
            rest /= s * s;
        }
        args.extend(digits.iter().map(|&u| units[u].clone()));
        table.push(delta_r_word(f, w, &xs, &args)?);
    }
    CoeffTensor::new(s, l, table)
}

/// Coefficients of every word of length `<= max_deg`.
pub fn tt_expand<S: Scalar>(f: &NcFunction<S>, y: &MatTuple<S>, max_deg: usize) -> Result<TTSeries<S>> {
    if f.d() != y.d() {
        return Err(NcError::argument("center and function differ in d"));
    }
    let coeffs = words_up_to(y.d(), max_deg)?
        .into_iter()
        .map(|w| tt_coefficient(f, y, &w).map(|c| (w, c)))
        .collect::<Result<Vec<_>>>()?;
    TTSeries::from_coeffs(y.clone(), max_deg, coeffs)
}

fn check_point<S: Scalar>(series: &TTSeries<S>, x: &MatTuple<S>) -> Result<(usize, MatTuple<S>)> {
    if x.d() != series.d {
        return Err(NcError::argument("point and series differ in d"));
    }
    let m = blocks_per_side(x.n(), series.s)?;
    if m == 0 {
        return Err(NcError::argument("empty point"));
    }
    let diff = x.sub(&direct_sum_copies(&series.center, m)?)?;
    Ok((m, diff))
}

fn contract<S: Scalar>(coeff: &CoeffTensor<S>, power: &DenseFauxMatrix<S>) -> Matrix<S> {
    let (s, m) = (power.s, power.m);
    let mut out = Matrix::zeros(s * m, s * m);
    for a in 0..m {
        for b in 0..m {
            out.set_block(a * s, b * s, &coeff.apply_dense(power.entry(a, b)));
        }
    }
    out
}

/// The term of `w` at `X`; the empty word gives `⊕ f_∅`.
pub fn series_term<S: Scalar>(series: &TTSeries<S>, w: &Word, x: &MatTuple<S>) -> Result<Matrix<S>> {
    let (m, diff) = check_point(series, x)?;
    let coeff = series.coeff(w)?;
    if w.is_empty() {
        return Ok(coeff.table[0].direct_sum_copies(m));
    }
    let power = crate::blockops::dense_power_word(&diff, series.s, w)?;
    Ok(contract(&coeff, &power))
}

/// Sum of all terms with `|w| <= max_len`, walking words by prefix and
/// skipping those whose faux power already vanished.
fn sum_terms<S: Scalar>(series: &TTSeries<S>, x: &MatTuple<S>, max_len: usize) -> Result<Matrix<S>> {
    let (m, diff) = check_point(series, x)?;
    let s = series.s;
    let mut total = series.coeff(&Word::empty())?.table[0].direct_sum_copies(m);
    let mut frontier = vec![(Word::empty(), DenseFauxMatrix::unit(s, m))];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (w, p) in &frontier {
            for j in 1..=series.d {
                let q = p.odot_matrix(diff.coord(j - 1));
                if q.is_zero() {
                    continue;
                }
                let word = w.push(j);
                total.add_assign(&contract(&series.coeff(&word)?, &q));
                next.push((word, q));
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(total)
}

/// `Σ_{|w| <= N}` of the series terms at `X`.
pub fn series_partial_sum<S: Scalar>(series: &TTSeries<S>, x: &MatTuple<S>, n: usize) -> Result<Matrix<S>> {
    if !series.has_through(n) {
        let missing = words_of_length(series.d, series.max_deg + 1)?.remove(0);
        return Err(NcError::MissingCoefficient(missing));
    }
    sum_terms(series, x, n)
}

/// The exact finite sum at a point jointly nilpotent about the center.
pub fn eval_nilpotent<S: Scalar>(series: &TTSeries<S>, x: &MatTuple<S>) -> Result<Matrix<S>> {
    let kappa = is_jointly_nilpotent(x, series.s, &series.center)?
        .ok_or_else(|| NcError::precondition("point is not jointly nilpotent about the center"))?;
    sum_terms(series, x, kappa - 1)
}

/// Checks the expansion with remainder at a scalar center `μ`:
/// `f(X) = Σ_{|w| <= N} (X - μ I)^w f_w + Σ_{|w| = N+1} (X - μ I)^w R_w`,
/// where row `i` of `R_w` is the corner of `f` at the bidiagonal with
/// diagonal `(μ, ..., μ, X)` and superdiagonal `(e_{i_1}, ..., e_i^T e_{i_{N+1}})`.
pub fn tt_identity_check<S: Scalar>(f: &NcFunction<S>, mu: &[S], x: &MatTuple<S>, n: usize) -> Result<bool> {
    let center = MatTuple::scalars(mu.to_vec())?;
    if center.d() != f.d() || x.d() != f.d() {
        return Err(NcError::argument("center, point and function must share d"));
    }
    let m = x.n();
    let series = tt_expand(f, &center, n)?;
    let lhs = f.eval(x)?;
    let mut rhs = series_partial_sum(&series, x, n)?;
    let diff = x.sub(&direct_sum_copies(&center, m)?)?;
    let mut diags = vec![center.clone(); n + 1];
    diags.push(x.clone());
    let ones = vec![Matrix::identity(1); n];
    for w in words_of_length(f.d(), n + 1)? {
        let power = w
            .letters()
            .iter()
            .fold(Matrix::identity(m), |acc, &l| acc.mul(diff.coord(l - 1)));
        if power.is_zero() {
            continue;
        }
        let mut remainder = Matrix::zeros(m, m);
        for i in 0..m {
            let mut dirs = ones.clone();
            dirs.push(Matrix::unit(1, m, 0, i));
            let row = delta_r_word(f, &w, &diags, &dirs)?;
            remainder.set_block(i, 0, &row);
        }
        rhs.add_assign(&power.mul(&remainder));
    }
    Ok(rhs.approx_eq(&lhs, FLOAT_CONDITION_TOL))
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConditionReport {
    pub checks: usize,
    pub failures: usize,
    /// Conditions that need coefficients beyond `max_deg`.
    pub skipped: usize,
    pub max_residual: f64,
    pub first_failure: Option<String>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Verifies the compatibility conditions linking `f_w` to the coefficients
/// one degree higher, for every matrix unit `S` and unit arguments:
///
/// * `S f_∅ - f_∅ S = Σ_k f_{g_k}(S Y_k - Y_k S)`
/// * `S f_w(A^1, ...) - f_w(S A^1, ...) = Σ_k f_{g_k w}(S Y_k - Y_k S, A^1, ...)`
/// * `f_w(..., A^j S, A^{j+1}, ...) - f_w(..., A^j, S A^{j+1}, ...)
///    = Σ_k f_{u g_k v}(..., A^j, S Y_k - Y_k S, A^{j+1}, ...)` for `w = u v`, `|u| = j`
/// * `f_w(..., A^l S) - f_w(..., A^l) S = Σ_k f_{w g_k}(..., A^l, S Y_k - Y_k S)`
///
/// At `s = 1` all of them hold trivially.
pub fn check_conditions<S: Scalar>(series: &TTSeries<S>) -> ConditionReport {
    let mut report = ConditionReport { checks: 0, failures: 0, skipped: 0, max_residual: 0.0, first_failure: None };
    let s = series.s;
    if s == 1 {
        return report;
    }
    let d = series.d;
    let units: Vec<Matrix<S>> = (0..s * s).map(|u| Matrix::unit(s, s, u / s, u % s)).collect();
    let record = |report: &mut ConditionReport, lhs: Matrix<S>, rhs: Matrix<S>, label: &dyn Fn() -> String| {
        report.checks += 1;
        let residual = lhs.sub(&rhs).max_abs();
        report.max_residual = report.max_residual.max(residual);
        if !lhs.approx_eq(&rhs, FLOAT_CONDITION_TOL) {
            report.failures += 1;
            if report.first_failure.is_none() {
                report.first_failure = Some(label());
            }
        }
    };
    for (w, fw) in &series.coeffs {
        let l = w.len();
        if l + 1 > series.max_deg && series.generator.is_none() {
            report.skipped += 1;
            continue;
        }
        let higher = |word: &Word| series.coeff(word).expect("coefficients through max_deg are stored");
        for (su, sm) in units.iter().enumerate() {
            let comms: Vec<Matrix<S>> = series
                .center
                .mats()
                .iter()
                .map(|yk| sm.mul(yk).sub(&yk.mul(sm)))
                .collect();
            let count = (s * s).pow(l as u32);
            for idx in 0..count {
                let mut rest = idx;
                let mut args = vec![Matrix::zeros(s, s); l];
                for k in (0..l).rev() {
                    args[k] = units[rest % (s * s)].clone();
                    rest /= s * s;
                }
                let apply = |c: &CoeffTensor<S>, a: &[Matrix<S>]| c.apply(a).expect("shapes match");
                // Insert the commutator at position `pos` and sum over k.
                let inserted = |pos: usize| {
                    let mut acc = Matrix::zeros(s, s);
                    for k in 1..=d {
                        let mut a = args.clone();
                        a.insert(pos, comms[k - 1].clone());
                        acc.add_assign(&apply(&higher(&w.insert(pos, k)), &a));
                    }
                    acc
                };
                let label = |cond: &str| format!("{cond} at word {w}, S = E{su}, arguments #{idx}");
                if l == 0 {
                    let f0 = &fw.table[0];
                    record(&mut report, sm.mul(f0).sub(&f0.mul(sm)), inserted(0), &|| label("first"));
                    continue;
                }
                let mut first = args.clone();
                first[0] = sm.mul(&first[0]);
                let lhs = sm.mul(&apply(fw, &args)).sub(&apply(fw, &first));
                record(&mut report, lhs, inserted(0), &|| label("left"));
                for j in 1..l {
                    let mut a = args.clone();
                    a[j - 1] = a[j - 1].mul(sm);
                    let mut b = args.clone();
                    b[j] = sm.mul(&b[j]);
                    let lhs = apply(fw, &a).sub(&apply(fw, &b));
                    record(&mut report, lhs, inserted(j), &|| label("middle"));
                }
                let mut last = args.clone();
                last[l - 1] = last[l - 1].mul(sm);
                let lhs = apply(fw, &last).sub(&apply(fw, &args).mul(sm));
                record(&mut report, lhs, inserted(l), &|| label("right"));
            }
        }
    }
    report
}

/// The sum of the series as a function on tuples jointly nilpotent about
/// the center; other points are outside its domain.
pub fn series_as_ncfunction<S: Scalar>(series: &TTSeries<S>) -> Result<NcFunction<S>> {
    if series.s > 1 && !series.verified {
        return Err(NcError::precondition("series coefficients do not satisfy the compatibility conditions"));
    }
    let series = series.clone();
    Ok(NcFunction::new(series.d, move |x| {
        eval_nilpotent(&series, x).map_err(|e| match e {
            NcError::Precondition(msg) => NcError::domain(msg),
            other => other,
        })
    }))
}

/// `Σ_{|w| <= L} Δ_R^{w^T} f(0, ..., 0) x^w`.
pub fn reconstruct_poly<S: Scalar>(f: &NcFunction<S>, l: usize) -> Result<NcPoly<S>> {
    let parts = homogeneous_expansion(f, l)?;
    parts.iter().try_fold(NcPoly::zero(f.d()), |acc, p| acc.add(p))
}

/// Homogeneous parts `f_0, ..., f_L` of the expansion about `0`.
pub fn homogeneous_expansion<S: Scalar>(f: &NcFunction<S>, l: usize) -> Result<Vec<NcPoly<S>>> {
    let d = f.d();
    let zero = MatTuple::zeros(d, 1);
    let mut parts = Vec::with_capacity(l + 1);
    for len in 0..=l {
        let xs = vec![zero.clone(); len + 1];
        let ones = vec![Matrix::identity(1); len];
        let mut terms = Vec::new();
        for w in words_of_length(d, len)? {
            let c = delta_r_word(f, &w, &xs, &ones)?.get(0, 0).clone();
            terms.push((w, c));
        }
        parts.push(NcPoly::from_terms(d, terms)?);
    }
    Ok(parts)
}
