//! Convergence numerics for nc power series on the float backend.
//!
//! Tuple norms are `max_j ‖X_j‖` with the operator 2-norm. Limsup quantities
//! are replaced by the maximum over the tail window `[⌈L/2⌉, L]`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::blockops::{blocks_per_side, direct_sum_copies, MatTuple};
use crate::error::{NcError, Result};
use crate::matrix::Matrix;
use crate::sample;
use crate::scalar::Complex;
use crate::words::Word;

/// Power-iteration steps for the operator 2-norm.
pub const NORM_STEPS: usize = 200;
/// Upper limit on repeated squarings in the Gelfand iteration.
pub const GELFAND_MAX_SQUARINGS: usize = 20;
/// Largest number of words a brute-force sum may visit.
pub const MAX_ENUMERATED_WORDS: usize = 1 << 22;

const NORM_SEED: u64 = 0x6e6f_726d;

fn conj_transpose(m: &Matrix<Complex>) -> Matrix<Complex> {
    m.map(|z| z.conj()).transpose()
}

/// Operator 2-norm by power iteration on `M* M` from a fixed start vector.
pub fn op_norm2(m: &Matrix<Complex>) -> f64 {
    if m.is_zero() {
        return 0.0;
    }
    if m.shape() == (1, 1) {
        return m.get(0, 0).norm();
    }
    let mut rng = sample::rng(NORM_SEED);
    let mut v = Matrix::from_fn(m.cols(), 1, |_, _| Complex::new(rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5)));
    let mh = conj_transpose(m);
    let mut best: f64 = 0.0;
    for _ in 0..NORM_STEPS {
        let norm = v.frobenius();
        if norm == 0.0 {
            break;
        }
        v = v.scale(&Complex::new(1.0 / norm, 0.0));
        let mv = m.mul(&v);
        best = best.max(mv.frobenius());
        v = mh.mul(&mv);
    }
    best
}

/// `max_j ‖X_j‖`.
pub fn tuple_norm(x: &MatTuple<Complex>) -> f64 {
    x.mats().iter().map(op_norm2).fold(0.0, f64::max)
}

/// Gelfand estimate `‖Z^{2^k}‖^{1/2^k}`, run until successive values differ
/// by less than `tol` or `k` reaches its cap. Powers are rescaled after each
/// squaring so that large or small spectra neither overflow nor underflow.
/// No stop happens before `2^k >= n`, so nilpotent inputs reach zero.
pub fn spectral_radius(z: &Matrix<Complex>, tol: f64) -> f64 {
    if z.is_zero() {
        return 0.0;
    }
    let mut w = z.clone();
    let mut log_scale = 0.0;
    let mut est = op_norm2(&w);
    let min_k = z.rows().next_power_of_two().trailing_zeros() as usize;
    for k in 1..=GELFAND_MAX_SQUARINGS {
        w = w.mul(&w);
        log_scale *= 2.0;
        let peak = w.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        w = w.scale(&Complex::new(1.0 / peak, 0.0));
        log_scale += peak.ln();
        let next = ((op_norm2(&w).ln() + log_scale) / (1u64 << k) as f64).exp();
        let done = k >= min_k && (next - est).abs() < tol;
        est = next;
        if done {
            break;
        }
    }
    est
}

/// `f_w = α^T A_{w_1} ... A_{w_l} β`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedAutomaton {
    pub initial: Vec<Complex>,
    pub transitions: Vec<Matrix<Complex>>,
    pub terminal: Vec<Complex>,
}

impl WeightedAutomaton {
    pub fn new(initial: Vec<Complex>, transitions: Vec<Matrix<Complex>>, terminal: Vec<Complex>) -> Result<Self> {
        let k = initial.len();
        if k == 0 || terminal.len() != k || transitions.is_empty() || transitions.iter().any(|a| a.shape() != (k, k)) {
            return Err(NcError::argument("automaton vectors and transitions must share one state count"));
        }
        Ok(WeightedAutomaton { initial, transitions, terminal })
    }

    pub fn states(&self) -> usize {
        self.initial.len()
    }

    pub fn weight(&self, w: &Word) -> Complex {
        let mut row = self.initial.clone();
        for &l in w.letters() {
            let a = &self.transitions[l - 1];
            row = (0..row.len())
                .map(|q| (0..row.len()).map(|p| row[p] * a.get(p, q)).sum())
                .collect();
        }
        row.iter().zip(&self.terminal).map(|(a, b)| a * b).sum()
    }

    fn nonnegative(&self) -> bool {
        let ok = |z: &Complex| z.im == 0.0 && z.re >= 0.0;
        self.initial.iter().all(ok)
            && self.terminal.iter().all(ok)
            && self.transitions.iter().all(|a| a.entries().iter().all(ok))
    }

    /// `Σ_{|w| = l} Z^w f_w` for `l = 0..=max_len`, from the transfer
    /// recursion `U_{l+1}[q] = Σ_j Σ_p (A_j)_{qp} Z_j U_l[p]`.
    fn graded_sums(&self, z: &MatTuple<Complex>, max_len: usize) -> Vec<Matrix<Complex>> {
        let n = z.n();
        let k = self.states();
        let mut u: Vec<Matrix<Complex>> = self.terminal.iter().map(|b| Matrix::scalar(n, *b)).collect();
        let mut out = Vec::with_capacity(max_len + 1);
        let collapse = |u: &[Matrix<Complex>]| {
            let mut t = Matrix::zeros(n, n);
            for (a, m) in self.initial.iter().zip(u) {
                t.add_assign(&m.scale(a));
            }
            t
        };
        out.push(collapse(&u));
        for _ in 0..max_len {
            let mut next = vec![Matrix::zeros(n, n); k];
            for (j, a) in self.transitions.iter().enumerate() {
                let zj = z.coord(j);
                for (q, slot) in next.iter_mut().enumerate() {
                    let mut inner = Matrix::zeros(n, n);
                    for (p, up) in u.iter().enumerate() {
                        let c = a.get(q, p);
                        if *c != Complex::new(0.0, 0.0) {
                            inner.add_assign(&up.scale(c));
                        }
                    }
                    if !inner.is_zero() {
                        slot.add_assign(&zj.mul(&inner));
                    }
                }
            }
            u = next;
            out.push(collapse(&u));
        }
        out
    }

    /// `Σ_{|w| = l} r^w |f_w|`, exact when every weight is a nonnegative real.
    fn graded_weights(&self, r: &[f64], max_len: usize) -> Vec<f64> {
        let k = self.states();
        let mut u: Vec<f64> = self.terminal.iter().map(|b| b.norm()).collect();
        let collapse = |u: &[f64]| self.initial.iter().zip(u).map(|(a, x)| a.norm() * x).sum::<f64>();
        let mut out = vec![collapse(&u)];
        for _ in 0..max_len {
            let mut next = vec![0.0; k];
            for (a, &rj) in self.transitions.iter().zip(r) {
                for (q, slot) in next.iter_mut().enumerate() {
                    *slot += rj * (0..k).map(|p| a.get(q, p).norm() * u[p]).sum::<f64>();
                }
            }
            u = next;
            out.push(collapse(&u));
        }
        out
    }
}

/// A coefficient rule `w ↦ f_w` for a series about a scalar center.
#[derive(Clone)]
pub struct CoeffRule {
    d: usize,
    name: String,
    rule: Arc<dyn Fn(&Word) -> Complex + Send + Sync>,
    support_bound: Option<usize>,
    automaton: Option<WeightedAutomaton>,
}

impl fmt::Debug for CoeffRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoeffRule")
            .field("d", &self.d)
            .field("name", &self.name)
            .field("support_bound", &self.support_bound)
            .finish()
    }
}

impl CoeffRule {
    pub fn from_fn(d: usize, name: impl Into<String>, rule: impl Fn(&Word) -> Complex + Send + Sync + 'static) -> Self {
        CoeffRule { d, name: name.into(), rule: Arc::new(rule), support_bound: None, automaton: None }
    }

    pub fn from_automaton(name: impl Into<String>, automaton: WeightedAutomaton) -> Self {
        let d = automaton.transitions.len();
        let a = automaton.clone();
        CoeffRule {
            d,
            name: name.into(),
            rule: Arc::new(move |w| a.weight(w)),
            support_bound: None,
            automaton: Some(automaton),
        }
    }

    /// `f_w = 1` for every word.
    pub fn geometric(d: usize) -> Self {
        let one = Complex::new(1.0, 0.0);
        let a = WeightedAutomaton::new(vec![one], vec![Matrix::scalar(1, one); d], vec![one]).expect("d >= 1");
        Self::from_automaton("geometric", a)
    }

    /// `f_w = 1` when `w` is a power of `u` (including the empty word), else 0.
    pub fn powers_of(d: usize, u: &Word) -> Result<Self> {
        u.check(d)?;
        if u.is_empty() {
            return Err(NcError::argument("the repeated word must be nonempty"));
        }
        let k = u.len();
        let one = Complex::new(1.0, 0.0);
        let mut transitions = vec![Matrix::zeros(k, k); d];
        for (q, &l) in u.letters().iter().enumerate() {
            transitions[l - 1].set(q, (q + 1) % k, one);
        }
        let mut e0 = vec![Complex::new(0.0, 0.0); k];
        e0[0] = one;
        let a = WeightedAutomaton::new(e0.clone(), transitions, e0)?;
        Ok(Self::from_automaton(format!("powers of {u}"), a))
    }

    pub fn zero(d: usize) -> Self {
        let mut r = Self::from_fn(d, "zero", |_| Complex::new(0.0, 0.0));
        r.support_bound = Some(0);
        r
    }

    /// Declares `f_w = 0` for `|w| > bound`.
    pub fn with_support_bound(mut self, bound: usize) -> Self {
        self.support_bound = Some(bound);
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coeff(&self, w: &Word) -> Complex {
        match self.support_bound {
            Some(b) if w.len() > b => Complex::new(0.0, 0.0),
            _ => (self.rule)(w),
        }
    }

    fn beyond_support(&self, len: usize) -> bool {
        self.support_bound.is_some_and(|b| len > b)
    }

    fn enumeration_fits(&self, max_len: usize) -> Result<()> {
        let mut total: usize = 0;
        let mut layer: usize = 1;
        for _ in 0..=max_len {
            total = total.saturating_add(layer);
            layer = layer.saturating_mul(self.d);
        }
        if total > MAX_ENUMERATED_WORDS {
            return Err(NcError::argument(format!(
                "rule '{}' has no automaton and d = {} needs too many words up to length {max_len}",
                self.name, self.d
            )));
        }
        Ok(())
    }

    /// `T_l(Z) = Σ_{|w| = l} Z^w f_w` for `l = 0..=max_len`.
    pub fn graded_sums(&self, z: &MatTuple<Complex>, max_len: usize) -> Result<Vec<Matrix<Complex>>> {
        if z.d() != self.d {
            return Err(NcError::argument("point and rule differ in d"));
        }
        let mut out = match &self.automaton {
            Some(a) => a.graded_sums(z, max_len),
            None => {
                self.enumeration_fits(max_len)?;
                let n = z.n();
                let mut out = vec![Matrix::zeros(n, n); max_len + 1];
                let mut frontier = vec![(Word::empty(), Matrix::identity(n))];
                for len in 0..=max_len {
                    let mut next = Vec::new();
                    for (w, p) in &frontier {
                        let c = self.coeff(w);
                        if c != Complex::new(0.0, 0.0) {
                            out[len].add_assign(&p.scale(&c));
                        }
                        if len < max_len {
                            for j in 1..=self.d {
                                let q = p.mul(z.coord(j - 1));
                                if !q.is_zero() {
                                    next.push((w.push(j), q));
                                }
                            }
                        }
                    }
                    frontier = next;
                }
                out
            }
        };
        for (len, t) in out.iter_mut().enumerate() {
            if self.beyond_support(len) {
                *t = Matrix::zeros(z.n(), z.n());
            }
        }
        Ok(out)
    }

    /// Per-degree `Σ_{|w| = l} r^w |f_w|` (when `sum`) or `max_{|w| = l} r^w |f_w|`.
    fn graded_weights(&self, r: &[f64], max_len: usize, sum: bool) -> Result<Vec<f64>> {
        if r.len() != self.d || r.iter().any(|x| !(*x >= 0.0)) {
            return Err(NcError::argument(format!("need {} nonnegative radii", self.d)));
        }
        let mut out = match &self.automaton {
            Some(a) if sum && a.nonnegative() => a.graded_weights(r, max_len),
            Some(a) if !sum && a.states() == 1 && a.nonnegative() => {
                let scale = (a.initial[0] * a.terminal[0]).norm();
                let step = a.transitions.iter().zip(r).map(|(m, x)| m.get(0, 0).norm() * x).fold(0.0, f64::max);
                (0..=max_len).map(|l| scale * step.powi(l as i32)).collect()
            }
            _ => {
                self.enumeration_fits(max_len)?;
                let mut out = vec![0.0; max_len + 1];
                let mut frontier = vec![(Word::empty(), 1.0)];
                for len in 0..=max_len {
                    let mut next = Vec::new();
                    for (w, weight) in &frontier {
                        let v = weight * self.coeff(w).norm();
                        out[len] = if sum { out[len] + v } else { out[len].max(v) };
                        if len < max_len {
                            for (j, rj) in r.iter().enumerate() {
                                next.push((w.push(j + 1), weight * rj));
                            }
                        }
                    }
                    frontier = next;
                }
                out
            }
        };
        for (len, t) in out.iter_mut().enumerate() {
            if self.beyond_support(len) {
                *t = 0.0;
            }
        }
        Ok(out)
    }
}

/// The degrees `⌈L/2⌉..=L`.
pub fn tail_window(l: usize) -> (usize, usize) {
    (l.div_ceil(2), l)
}

fn check_window(l: usize) -> Result<()> {
    if l < 8 {
        return Err(NcError::argument(format!("tail window needs L >= 8, got {l}")));
    }
    Ok(())
}

fn window_root_max(values: impl Iterator<Item = (usize, f64)>, l: usize) -> f64 {
    let (lo, hi) = tail_window(l);
    values
        .filter(|(len, _)| (lo..=hi).contains(len) && *len > 0)
        .map(|(len, v)| if v == 0.0 { 0.0 } else { (v.ln() / len as f64).exp() })
        .fold(0.0, f64::max)
}

fn reciprocal(mu: f64) -> f64 {
    if mu == 0.0 {
        f64::INFINITY
    } else {
        1.0 / mu
    }
}

fn point_mu(rule: &CoeffRule, z: &MatTuple<Complex>, l: usize) -> Result<f64> {
    let sums = rule.graded_sums(z, l)?;
    Ok(window_root_max(sums.iter().enumerate().map(|(len, t)| (len, op_norm2(t))), l))
}

/// Pointwise radius `1 / max_{l in window} ‖T_l(Z)‖^{1/l}`; infinite when
/// every tail term vanishes.
pub fn rho_point(rule: &CoeffRule, z: &MatTuple<Complex>, l: usize) -> Result<f64> {
    check_window(l)?;
    Ok(reciprocal(point_mu(rule, z, l)?))
}

/// A random tuple of `m x m` matrices normalized to `max_j ‖Z_j‖ = 1`.
fn unit_tuple(rng: &mut impl Rng, d: usize, m: usize) -> Option<MatTuple<Complex>> {
    let mats: Vec<Matrix<Complex>> = (0..d)
        .map(|_| Matrix::from_fn(m, m, |_, _| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    let x = MatTuple::new(m, mats).ok()?;
    let norm = tuple_norm(&x);
    (norm > 0.0).then(|| x.scale(&Complex::new(1.0 / norm, 0.0)))
}

/// Sampled upper estimate of `ρ_m`: the reciprocal of the largest tail-window
/// quantity over `samples` random unit-norm tuples of size `m`.
pub fn rho_m(rule: &CoeffRule, m: usize, samples: usize, l: usize, seed: u64) -> Result<f64> {
    check_window(l)?;
    if samples == 0 || m == 0 {
        return Err(NcError::argument("rho_m needs m >= 1 and samples >= 1"));
    }
    let mut rng = sample::rng(seed);
    let mut mu: f64 = 0.0;
    for _ in 0..samples {
        if let Some(z) = unit_tuple(&mut rng, rule.d, m) {
            mu = mu.max(point_mu(rule, &z, l)?);
        }
    }
    Ok(reciprocal(mu))
}

/// `max_{l in window} (Σ_{|w| = l} r^w |f_w|)^{1/l}`.
pub fn mu_r(rule: &CoeffRule, r: &[f64], l: usize) -> Result<f64> {
    check_window(l)?;
    let weights = rule.graded_weights(r, l, true)?;
    Ok(window_root_max(weights.into_iter().enumerate(), l))
}

/// `max_{l in window} (max_{|w| = l} r^w |f_w|)^{1/l}`.
pub fn mu_diamond(rule: &CoeffRule, r: &[f64], l: usize) -> Result<f64> {
    check_window(l)?;
    let weights = rule.graded_weights(r, l, false)?;
    Ok(window_root_max(weights.into_iter().enumerate(), l))
}

fn center_distances(x: &MatTuple<Complex>, y: &MatTuple<Complex>) -> Result<Vec<f64>> {
    if x.d() != y.d() {
        return Err(NcError::argument("point and center differ in d"));
    }
    let m = blocks_per_side(x.n(), y.n())?;
    if m == 0 {
        return Err(NcError::argument("empty point"));
    }
    let diff = x.sub(&direct_sum_copies(y, m)?)?;
    Ok(diff.mats().iter().map(op_norm2).collect())
}

/// `‖X - ⊕Y‖ < r` in the max norm.
pub fn in_ball(x: &MatTuple<Complex>, y: &MatTuple<Complex>, r: f64) -> Result<bool> {
    Ok(center_distances(x, y)?.into_iter().fold(0.0, f64::max) < r)
}

/// `‖X_j - ⊕Y_j‖ < r_j` for every `j`.
pub fn in_polydisk(x: &MatTuple<Complex>, y: &MatTuple<Complex>, r: &[f64]) -> Result<bool> {
    if r.len() != x.d() {
        return Err(NcError::argument(format!("need {} radii", x.d())));
    }
    Ok(center_distances(x, y)?.iter().zip(r).all(|(a, b)| a < b))
}

/// `Σ_j ‖X_j - ⊕Y_j‖ < r`.
pub fn in_diamond(x: &MatTuple<Complex>, y: &MatTuple<Complex>, r: f64) -> Result<bool> {
    Ok(center_distances(x, y)?.iter().sum::<f64>() < r)
}

/// Membership in the similarity invariant envelope of the unit ball (`d = 1`).
pub fn envelope_ball_member(z: &Matrix<Complex>) -> bool {
    spectral_radius(z, 1e-9) < 1.0
}

/// Compares `Σ_{l <= L} (Z_1 + ... + Z_d)^l` with `(I - Z_1 - ... - Z_d)^{-1}`.
pub fn geometric_resolvent_check(z: &MatTuple<Complex>, l: usize, tol: f64) -> Result<bool> {
    let n = z.n();
    let mut total = Matrix::zeros(n, n);
    for m in z.mats() {
        total.add_assign(m);
    }
    let rho = spectral_radius(&total, 1e-12);
    if rho >= 1.0 {
        return Err(NcError::precondition(format!("spectral radius of the sum is {rho:.6}, not below 1")));
    }
    let resolvent = Matrix::identity(n)
        .sub(&total)
        .inverse()
        .ok_or_else(|| NcError::domain("I - (Z_1 + ... + Z_d) is singular"))?;
    let mut partial = Matrix::identity(n);
    let mut power = Matrix::identity(n);
    for _ in 0..l {
        power = power.mul(&total);
        partial.add_assign(&power);
    }
    Ok(op_norm2(&partial.sub(&resolvent)) < tol)
}

/// Abel-type check on the nc diamond `Σ_j ‖X_j‖ / |μ_j| < 1`.
///
/// The terms `|μ^w f_w|` for `|w| <= L` must look bounded: the largest value
/// in the tail window may exceed the largest earlier value by at most a
/// factor of 1.5. With `B` their maximum and `q = Σ_j ‖X_j‖ / |μ_j|`, each
/// degree must then satisfy `Σ_{|w| = l} ‖X^w‖ |f_w| <= B q^l`, which makes
/// the partial sums Cauchy with a geometric tail.
pub fn abel_diamond_check(rule: &CoeffRule, mu: &[Complex], x: &MatTuple<Complex>, l: usize) -> Result<bool> {
    let d = rule.d;
    if mu.len() != d || x.d() != d {
        return Err(NcError::argument(format!("need {d} center scalars and a {d}-tuple")));
    }
    let moduli: Vec<f64> = mu.iter().map(|m| m.norm()).collect();
    let maxima = rule.graded_weights(&moduli, l, false)?;
    let (lo, _) = tail_window(l);
    let head = maxima[..lo.max(1)].iter().copied().fold(0.0, f64::max);
    let tail = maxima[lo.max(1)..].iter().copied().fold(0.0, f64::max);
    if tail > 1.5 * head {
        return Err(NcError::precondition(format!(
            "terms |mu^w f_w| grow from {head:.3e} to {tail:.3e}; they do not look bounded"
        )));
    }
    let bound = head.max(tail);
    let norms: Vec<f64> = x.mats().iter().map(op_norm2).collect();
    let mut q = 0.0;
    for (nj, mj) in norms.iter().zip(&moduli) {
        if *nj > 0.0 {
            if *mj == 0.0 {
                return Err(NcError::precondition("point leaves the diamond: a coordinate with mu_j = 0 is nonzero"));
            }
            q += nj / mj;
        }
    }
    if q >= 1.0 {
        return Err(NcError::precondition(format!("point is not inside the diamond (q = {q:.6})")));
    }
    rule.enumeration_fits(l)?;
    let n = x.n();
    let mut frontier = vec![(Word::empty(), Matrix::<Complex>::identity(n))];
    for len in 0..=l {
        let mut degree_sum = 0.0;
        let mut next = Vec::new();
        for (w, p) in &frontier {
            degree_sum += op_norm2(p) * rule.coeff(w).norm();
            if len < l {
                for j in 1..=d {
                    let np = p.mul(x.coord(j - 1));
                    if !np.is_zero() {
                        next.push((w.push(j), np));
                    }
                }
            }
        }
        if degree_sum > bound * q.powi(len as i32) * (1.0 + 1e-9) + 1e-300 {
            return Ok(false);
        }
        frontier = next;
    }
    Ok(true)
}

fn serialize_estimate<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

/// One estimator invocation, as printed by the command line front end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub estimator: String,
    pub rule: String,
    pub input: String,
    #[serde(serialize_with = "serialize_estimate")]
    pub estimate: f64,
    pub window: (usize, usize),
    pub terms: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ConvergenceReport {
    pub fn new(estimator: &str, rule: &CoeffRule, input: String, estimate: f64, l: usize) -> Self {
        ConvergenceReport {
            estimator: estimator.to_string(),
            rule: rule.name.clone(),
            input,
            estimate,
            window: tail_window(l),
            terms: l + 1,
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}
