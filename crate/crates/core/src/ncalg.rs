//! Noncommutative polynomials with scalar coefficients.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde_json::{json, Value};

use crate::blockops::MatTuple;
use crate::error::{NcError, Result};
use crate::matrix::Matrix;
use crate::sample;
use crate::scalar::Scalar;
use crate::words::Word;

/// Degree of a polynomial; the zero polynomial has degree `-∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Degree {
    NegInfinity,
    Finite(usize),
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInfinity => f.write_str("-inf"),
            Degree::Finite(k) => write!(f, "{k}"),
        }
    }
}

/// `Σ_w c_w x^w` over `d` letters; zero coefficients are never stored.
#[derive(Clone, PartialEq, Debug)]
pub struct NcPoly<S> {
    d: usize,
    coeffs: BTreeMap<Word, S>,
}

impl<S: Scalar> NcPoly<S> {
    pub fn zero(d: usize) -> Self {
        NcPoly { d, coeffs: BTreeMap::new() }
    }

    pub fn constant(d: usize, c: S) -> Self {
        Self::monomial(d, Word::empty(), c).expect("empty word fits any d")
    }

    /// The coordinate `x_j`, 1-based.
    pub fn var(d: usize, j: usize) -> Result<Self> {
        if j < 1 || j > d {
            return Err(NcError::argument(format!("variable x{j} out of range for d = {d}")));
        }
        Self::monomial(d, Word::letter(j), S::one())
    }

    pub fn monomial(d: usize, w: Word, c: S) -> Result<Self> {
        Self::from_terms(d, [(w, c)])
    }

    /// Sums repeated words and drops zeros.
    pub fn from_terms(d: usize, terms: impl IntoIterator<Item = (Word, S)>) -> Result<Self> {
        let mut p = Self::zero(d);
        for (w, c) in terms {
            w.check(d)?;
            p.add_term(w, &c);
        }
        Ok(p)
    }

    fn add_term(&mut self, w: Word, c: &S) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry(w) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coeff(&self, w: &Word) -> S {
        self.coeffs.get(w).cloned().unwrap_or_else(S::zero)
    }

    /// Nonzero terms in graded order.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &S)> {
        self.coeffs.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Degree {
        self.coeffs.keys().map(Word::len).max().map_or(Degree::NegInfinity, Degree::Finite)
    }

    fn same_d(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            return Err(NcError::argument(format!("polynomials over d = {} and d = {}", self.d, other.d)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_d(other)?;
        let mut out = self.clone();
        for (w, c) in &other.coeffs {
            out.add_term(w.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        NcPoly { d: self.d, coeffs: self.coeffs.iter().map(|(w, c)| (w.clone(), -c.clone())).collect() }
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.d);
        }
        NcPoly { d: self.d, coeffs: self.coeffs.iter().map(|(w, v)| (w.clone(), v.mul_ref(c))).collect() }
    }

    /// Convolution over concatenation: `(pq)_w = Σ_{uv = w} p_u q_v`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_d(other)?;
        let mut out = Self::zero(self.d);
        for (u, a) in &self.coeffs {
            for (v, b) in &other.coeffs {
                out.add_term(u.concat(v), &a.mul_ref(b));
            }
        }
        Ok(out)
    }

    pub fn homogeneous_part(&self, j: usize) -> Self {
        NcPoly {
            d: self.d,
            coeffs: self.coeffs.iter().filter(|(w, _)| w.len() == j).map(|(w, c)| (w.clone(), c.clone())).collect(),
        }
    }

    /// `Σ_w c_w X^w` with `X^∅ = I_n`.
    pub fn eval(&self, x: &MatTuple<S>) -> Result<Matrix<S>> {
        if x.d() != self.d {
            return Err(NcError::argument(format!("polynomial has d = {}, point has d = {}", self.d, x.d())));
        }
        let terms: Vec<(&[usize], &S)> = self.coeffs.iter().map(|(w, c)| (w.letters(), c)).collect();
        Ok(eval_terms(&terms, x))
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .coeffs
            .iter()
            .map(|(w, c)| {
                let (re, im) = c.to_re_im_json();
                json!({ "word": w.to_string(), "re": re, "im": im })
            })
            .collect();
        json!({ "d": self.d, "terms": terms })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let d = v.get("d").and_then(Value::as_u64).ok_or_else(|| NcError::Json("missing 'd'".into()))? as usize;
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| NcError::Json("missing 'terms' array".into()))?;
        let parsed = terms
            .iter()
            .map(|t| {
                let w: Word = t
                    .get("word")
                    .and_then(Value::as_str)
                    .ok_or_else(|| NcError::Json("term without 'word'".into()))?
                    .parse()?;
                let re = t.get("re").ok_or_else(|| NcError::Json("term without 're'".into()))?;
                Ok((w, S::from_re_im_json(re, t.get("im"))?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(d, parsed)
    }
}

/// `Σ c_w X^w = c_∅ I + Σ_j X_j (Σ_{w = g_j v} c_w X^v)`, grouping by first letter.
fn eval_terms<S: Scalar>(terms: &[(&[usize], &S)], x: &MatTuple<S>) -> Matrix<S> {
    let n = x.n();
    let mut out: Matrix<S> = Matrix::zeros(n, n);
    let mut groups: BTreeMap<usize, Vec<(&[usize], &S)>> = BTreeMap::new();
    for &(letters, c) in terms {
        match letters.split_first() {
            None => {
                for i in 0..n {
                    let mut v = out.get(i, i).clone();
                    v += c;
                    out.set(i, i, v);
                }
            }
            Some((&first, rest)) => groups.entry(first).or_default().push((rest, c)),
        }
    }
    for (letter, group) in groups {
        let inner = eval_terms(&group, x);
        out.add_assign(&x.coord(letter - 1).mul(&inner));
    }
    out
}

/// `p_n = Σ_{π ∈ S_{n+1}} sign(π) y_{π(1)} ··· y_{π(n+1)}` with `y_j = x1^{j-1} x2`.
pub fn standard_identity<S: Scalar>(n: usize) -> Result<NcPoly<S>> {
    if n < 1 {
        return Err(NcError::argument("standard identity index must be at least 1"));
    }
    let k = n + 1;
    let mut p = NcPoly::zero(2);
    let mut perm: Vec<usize> = (1..=k).collect();
    for_each_permutation(&mut perm, 0, 1, &mut |perm, sign| {
        let mut letters = Vec::new();
        for &j in perm.iter() {
            letters.extend(std::iter::repeat(1).take(j - 1));
            letters.push(2);
        }
        p.add_term(Word::new(letters).expect("letters are 1 or 2"), &S::from_i64(sign));
    });
    Ok(p)
}

/// Enumerates permutations by transpositions, tracking the sign.
fn for_each_permutation(perm: &mut Vec<usize>, start: usize, sign: i64, f: &mut impl FnMut(&[usize], i64)) {
    if start == perm.len() {
        f(perm, sign);
        return;
    }
    for i in start..perm.len() {
        perm.swap(start, i);
        for_each_permutation(perm, start + 1, if i == start { sign } else { -sign }, f);
        perm.swap(start, i);
    }
}

/// `Σ_{k=1}^{n-1} p_k(X)` for a pair of `n x n` matrices.
///
/// Uses the subset recursion `F[S] = Σ_{j ∈ S} ± F[S \ {j}] y_j`, so that
/// `p_k = F[{1, ..., k+1}]`; zero partial products are skipped.
pub fn example63_eval<S: Scalar>(x: &MatTuple<S>) -> Result<Matrix<S>> {
    if x.d() != 2 {
        return Err(NcError::argument("the standard-identity series is defined for d = 2"));
    }
    let n = x.n();
    let mut out = Matrix::zeros(n, n);
    if n < 2 {
        return Ok(out);
    }
    if n > 24 {
        return Err(NcError::argument("subset recursion limited to n <= 24"));
    }
    let (x1, x2) = (x.coord(0), x.coord(1));
    let mut ys = Vec::with_capacity(n);
    let mut power = Matrix::identity(n);
    for _ in 0..n {
        ys.push(power.mul(x2));
        power = power.mul(x1);
    }
    let full = 1usize << n;
    let mut table: Vec<Option<Matrix<S>>> = vec![None; full];
    table[0] = Some(Matrix::identity(n));
    for set in 1..full {
        let mut acc: Option<Matrix<S>> = None;
        for j in 0..n {
            if set & (1 << j) == 0 || ys[j].is_zero() {
                continue;
            }
            let Some(prev) = &table[set & !(1 << j)] else { continue };
            let later = (set >> (j + 1)).count_ones();
            let term = prev.mul(&ys[j]);
            let acc = acc.get_or_insert_with(|| Matrix::zeros(n, n));
            if later % 2 == 0 {
                acc.add_assign(&term);
            } else {
                acc.add_assign(&term.neg());
            }
        }
        table[set] = acc.filter(|m| !m.is_zero());
    }
    for k in 1..n {
        if let Some(pk) = &table[(1 << (k + 1)) - 1] {
            out.add_assign(pk);
        }
    }
    Ok(out)
}

/// Searches for a point of size `n` where `p` does not vanish, drawing
/// entries from `{-2, ..., 2}` for up to `trials` attempts.
pub fn find_nonvanishing_witness<S: Scalar>(
    p: &NcPoly<S>,
    n: usize,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<Option<MatTuple<S>>> {
    for _ in 0..trials {
        let x = sample::int_tuple(rng, p.d(), n, 2);
        if !p.eval(&x)?.is_zero() {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Random polynomial with `terms` words of length `<= max_deg` and small
/// integer coefficients.
pub fn random_poly<S: Scalar>(rng: &mut impl Rng, d: usize, max_deg: usize, terms: usize) -> NcPoly<S> {
    let mut p = NcPoly::zero(d);
    for _ in 0..terms {
        let len = rng.gen_range(0..=max_deg);
        let letters = (0..len).map(|_| rng.gen_range(1..=d)).collect();
        let c = S::from_i64(rng.gen_range(-3..=3));
        p.add_term(Word::new(letters).expect("positive letters"), &c);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use proptest::prelude::*;

    type P = NcPoly<Rational>;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn x(j: usize) -> P {
        P::var(2, j).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        assert!(x(1).add(&x(1).neg()).unwrap().is_zero());
        let sym = x(1).mul(&x(2)).unwrap().add(&x(2).mul(&x(1)).unwrap()).unwrap();
        assert_eq!(sym.num_terms(), 2);
        assert_eq!(x(1).scale(&q(2)).add(&x(1).scale(&q(3))).unwrap(), x(1).scale(&q(5)));
        let prod = x(1).add(&x(2)).unwrap().mul(&x(1).sub(&x(2)).unwrap()).unwrap();
        let expected = P::from_terms(
            2,
            [(w("g1.g1"), q(1)), (w("g1.g2"), q(-1)), (w("g2.g1"), q(1)), (w("g2.g2"), q(-1))],
        )
        .unwrap();
        assert_eq!(prod, expected);
        let p = sym.clone();
        assert_eq!(P::constant(2, q(1)).mul(&p).unwrap(), p);
        assert!(x(1).mul(&P::var(3, 1).unwrap()).is_err());
    }

    #[test]
    fn degrees_and_parts() {
        assert_eq!(P::zero(2).degree(), Degree::NegInfinity);
        let p = P::from_terms(2, [(w("g1.g2.g1"), q(1)), (w("g2"), q(1))]).unwrap();
        assert_eq!(p.degree(), Degree::Finite(3));
        assert_eq!(P::constant(2, q(5)).degree(), Degree::Finite(0));
        let r = x(1).add(&x(1).mul(&x(2)).unwrap()).unwrap();
        assert_eq!(r.homogeneous_part(2), x(1).mul(&x(2)).unwrap());
        assert!(r.homogeneous_part(0).is_zero());
    }

    #[test]
    fn evaluation_examples() {
        let mut rng = sample::rng(1);
        let pt: MatTuple<Rational> = sample::int_tuple(&mut rng, 2, 2, 3);
        assert_eq!(P::constant(2, q(7)).eval(&pt).unwrap(), Matrix::scalar(2, q(7)));
        assert_eq!(x(2).eval(&pt).unwrap(), *pt.coord(1));
        let a = sample::int_matrix::<Rational>(&mut rng, 2, 2, 3);
        let commuting = MatTuple::from_mats(vec![a.clone(), a.mul(&a)]).unwrap();
        let comm = x(1).mul(&x(2)).unwrap().sub(&x(2).mul(&x(1)).unwrap()).unwrap();
        assert!(comm.eval(&commuting).unwrap().is_zero());
        assert!(x(1).eval(&MatTuple::zeros(3, 2)).is_err());
    }

    #[test]
    fn standard_identity_small_cases() {
        let p1 = standard_identity::<Rational>(1).unwrap();
        let expected = P::from_terms(2, [(w("g2.g1.g2"), q(1)), (w("g1.g2.g2"), q(-1))]).unwrap();
        assert_eq!(p1, expected);
        let p2 = standard_identity::<Rational>(2).unwrap();
        assert_eq!(p2.degree(), Degree::Finite(6));
        assert_eq!(p2.num_terms(), 6);
        assert!(standard_identity::<Rational>(0).is_err());
    }

    #[test]
    fn standard_identity_vanishes_and_has_witness() {
        let mut rng = sample::rng(11);
        for n in 1..=3 {
            let p = standard_identity::<Rational>(n).unwrap();
            for _ in 0..5 {
                let pt = sample::int_tuple(&mut rng, 2, n, 4);
                assert!(p.eval(&pt).unwrap().is_zero(), "p_{n} must vanish at size {n}");
            }
            assert!(find_nonvanishing_witness(&p, n + 1, 64, &mut rng).unwrap().is_some());
        }
    }

    #[test]
    fn example63_matches_direct_sum_of_identities() {
        let mut rng = sample::rng(5);
        assert!(example63_eval(&sample::int_tuple::<Rational>(&mut rng, 2, 1, 3)).unwrap().is_zero());
        for n in 2..=4 {
            let pt = sample::int_tuple::<Rational>(&mut rng, 2, n, 2);
            let mut oracle = Matrix::zeros(n, n);
            for k in 1..n {
                oracle.add_assign(&standard_identity::<Rational>(k).unwrap().eval(&pt).unwrap());
            }
            assert_eq!(example63_eval(&pt).unwrap(), oracle);
        }
    }

    #[test]
    fn json_round_trip() {
        let p = P::from_terms(2, [(w("g1.g2"), Rational::new(1.into(), 3.into())), (Word::empty(), q(-2))]).unwrap();
        let v = p.to_json();
        assert_eq!(v["terms"][0]["word"], json!("e"));
        assert_eq!(v["terms"][1]["re"], json!("1/3"));
        assert_eq!(P::from_json(&v).unwrap(), p);
    }

    fn arb_poly() -> impl Strategy<Value = P> {
        any::<u64>().prop_map(|seed| random_poly(&mut sample::rng(seed), 2, 3, 5))
    }

    fn arb_point(n: usize) -> impl Strategy<Value = MatTuple<Rational>> {
        any::<u64>().prop_map(move |seed| sample::int_tuple(&mut sample::rng(seed), 2, n, 3))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn eval_is_multiplicative(p in arb_poly(), r in arb_poly(), pt in arb_point(3)) {
            let prod = p.mul(&r).unwrap().eval(&pt).unwrap();
            prop_assert_eq!(prod, p.eval(&pt).unwrap().mul(&r.eval(&pt).unwrap()));
            prop_assert_eq!(P::constant(2, q(1)).eval(&pt).unwrap(), Matrix::identity(3));
        }

        #[test]
        fn eval_respects_direct_sums(p in arb_poly(), a in arb_point(2), b in arb_point(1)) {
            let sum = crate::blockops::direct_sum(&a, &b).unwrap();
            prop_assert_eq!(p.eval(&sum).unwrap(), p.eval(&a).unwrap().direct_sum(&p.eval(&b).unwrap()));
        }

        #[test]
        fn eval_respects_similarity(p in arb_poly(), pt in arb_point(3), seed in any::<u64>()) {
            let (t, t_inv) = sample::unimodular::<Rational>(&mut sample::rng(seed), 3);
            let lhs = p.eval(&pt.conjugate(&t, &t_inv)).unwrap();
            prop_assert_eq!(lhs, t.mul(&p.eval(&pt).unwrap()).mul(&t_inv));
        }

        #[test]
        fn eval_respects_intertwining(p in arb_poly(), a in arb_point(2), b in arb_point(1), seed in any::<u64>()) {
            // X = [[A, B], [0, C]] and T = [I; 0] satisfy X T = T A.
            let mut rng = sample::rng(seed);
            let bmat = sample::int_rect::<Rational>(&mut rng, 2, 2, 1, 2);
            let big = crate::blockops::upper_block(&a, &bmat, &b).unwrap();
            let t = Matrix::from_fn(3, 2, |i, j| if i == j { q(1) } else { q(0) });
            prop_assert_eq!(p.eval(&big).unwrap().mul(&t), t.mul(&p.eval(&a).unwrap()));
        }

        #[test]
        fn homogeneous_parts_partition(p in arb_poly()) {
            let mut total = P::zero(2);
            for j in 0..=3 {
                total = total.add(&p.homogeneous_part(j)).unwrap();
            }
            prop_assert_eq!(total, p);
        }

        #[test]
        fn no_zero_coefficients(p in arb_poly(), r in arb_poly()) {
            let s = p.mul(&r).unwrap().add(&p.neg()).unwrap();
            prop_assert!(s.terms().all(|(_, c)| !num_traits::Zero::is_zero(c)));
        }

        #[test]
        fn json_round_trips(p in arb_poly()) {
            prop_assert_eq!(P::from_json(&p.to_json()).unwrap(), p);
        }
    }
}
