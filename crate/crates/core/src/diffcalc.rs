//! Right and left nc difference-differential operators, read off from
//! evaluations on block triangular and block bidiagonal matrices.

use crate::blockops::{bidiagonal, block_extract, lower_block, MatTuple, RectTuple};
use crate::error::{NcError, Result};
use crate::matrix::Matrix;
use crate::ncexpr::NcFunction;
use crate::scalar::{Complex, Rational, Scalar};
use crate::words::Word;

/// Scalings `r = 2^{-k}`, `k = 0..=RETRY_STEPS`, tried when the block
/// matrix falls outside the domain.
pub const RETRY_STEPS: u32 = 16;

/// Tolerance used by pattern checks on the float backend.
pub const FLOAT_PATTERN_TOL: f64 = 1e-9;

fn retry_scale<S: Scalar>(k: u32) -> S {
    S::from_rational(&Rational::new(1.into(), num_bigint::BigInt::from(1u64 << k)))
}

/// Evaluates `f(build(r))` for the first admissible `r` in the retry
/// schedule and returns `(r, value)`.
fn eval_with_retry<S: Scalar>(
    f: &NcFunction<S>,
    build: impl Fn(&S) -> Result<MatTuple<S>>,
) -> Result<(S, Matrix<S>)> {
    let mut last = None;
    for k in 0..=RETRY_STEPS {
        let r = retry_scale::<S>(k);
        match f.eval(&build(&r)?) {
            Ok(v) => return Ok((r, v)),
            Err(e) if e.is_domain() => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    let (span, detail) = match last {
        Some(NcError::Domain { span, detail }) => (span, detail),
        _ => (None, String::new()),
    };
    Err(NcError::Domain { span, detail: format!("no admissible scaling down to 2^-{RETRY_STEPS}: {detail}") })
}

fn unscale<S: Scalar>(m: Matrix<S>, r: &S, power: usize) -> Matrix<S> {
    if r.is_one() || power == 0 {
        return m;
    }
    let inv = r.recip().expect("retry scalings are nonzero");
    let mut factor = S::one();
    for _ in 0..power {
        factor = factor.mul_ref(&inv);
    }
    m.scale(&factor)
}

/// `Δ_R f(X, Y)(Z)`: the `(1,2)` block of `f([[X, Z], [0, Y]])`.
pub fn delta_r<S: Scalar>(f: &NcFunction<S>, x: &MatTuple<S>, y: &MatTuple<S>, z: &RectTuple<S>) -> Result<Matrix<S>> {
    delta_r_higher(f, &[x.clone(), y.clone()], std::slice::from_ref(z))
}

/// `Δ_L f(X, Y)(Z)`: the `(2,1)` block of `f([[X, 0], [Z, Y]])`, `Z` of shape `m x n`.
pub fn delta_l<S: Scalar>(f: &NcFunction<S>, x: &MatTuple<S>, y: &MatTuple<S>, z: &RectTuple<S>) -> Result<Matrix<S>> {
    lower_block(x, z, y)?;
    let (r, v) = eval_with_retry(f, |r| lower_block(x, &z.scale(r), y))?;
    let block = block_extract(&v, &[x.n(), y.n()], &[x.n(), y.n()], 1, 0)?;
    Ok(unscale(block, &r, 1))
}

/// `Δ_R^l f(X^0, ..., X^l)(Z^1, ..., Z^l)`: the `(1, l+1)` block of `f` at
/// the block bidiagonal tuple.
pub fn delta_r_higher<S: Scalar>(f: &NcFunction<S>, xs: &[MatTuple<S>], zs: &[RectTuple<S>]) -> Result<Matrix<S>> {
    bidiagonal(xs, zs)?;
    let sizes: Vec<usize> = xs.iter().map(MatTuple::n).collect();
    let (r, v) = eval_with_retry(f, |r| {
        let scaled: Vec<_> = zs.iter().map(|z| z.scale(r)).collect();
        bidiagonal(xs, &scaled)
    })?;
    let block = block_extract(&v, &sizes, &sizes, 0, zs.len())?;
    Ok(unscale(block, &r, zs.len()))
}

/// `Δ_{R,j} f(X, Y)(A) = Δ_R f(X, Y)(A e_j)`, `j` 1-based.
pub fn delta_r_partial<S: Scalar>(
    f: &NcFunction<S>,
    j: usize,
    x: &MatTuple<S>,
    y: &MatTuple<S>,
    a: &Matrix<S>,
) -> Result<Matrix<S>> {
    if j < 1 || j > f.d() {
        return Err(NcError::argument(format!("direction {j} out of range for d = {}", f.d())));
    }
    delta_r(f, x, y, &RectTuple::single(f.d(), j - 1, a.clone()))
}

/// Corner block of `f` at the bidiagonal with superdiagonal `A^k e_{i_k}`,
/// for `w = g_{i_1} ... g_{i_l}` read left to right.
///
/// The value is `Δ_R^{w^T} f(X^0, ..., X^l)(A^1, ..., A^l)`, the operator
/// of the *transposed* word; pass `w.transpose()` to obtain `Δ_R^w`.
pub fn delta_r_word<S: Scalar>(
    f: &NcFunction<S>,
    w: &Word,
    xs: &[MatTuple<S>],
    a_s: &[Matrix<S>],
) -> Result<Matrix<S>> {
    w.check(f.d())?;
    if a_s.len() != w.len() {
        return Err(NcError::argument(format!("word of length {} needs {} directions", w.len(), w.len())));
    }
    let zs: Vec<_> = w
        .letters()
        .iter()
        .zip(a_s)
        .map(|(&l, a)| RectTuple::single(f.d(), l - 1, a.clone()))
        .collect();
    delta_r_higher(f, xs, &zs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternMismatch {
    /// 0-based block row and column.
    pub row: usize,
    pub col: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternReport {
    pub blocks_checked: usize,
    pub mismatches: Vec<PatternMismatch>,
}

impl PatternReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares every block of `f` at the bidiagonal tuple with the expected
/// pattern: `f(X^i)` on the diagonal, `Δ_R^{j-i} f(X^i, ..., X^j)(Z^{i+1}, ..., Z^j)`
/// above it, zeros below. Exact over rationals.
pub fn full_pattern_check<S: Scalar>(f: &NcFunction<S>, xs: &[MatTuple<S>], zs: &[RectTuple<S>]) -> Result<PatternReport> {
    bidiagonal(xs, zs)?;
    let sizes: Vec<usize> = xs.iter().map(MatTuple::n).collect();
    let (r, v) = eval_with_retry(f, |r| {
        let scaled: Vec<_> = zs.iter().map(|z| z.scale(r)).collect();
        bidiagonal(xs, &scaled)
    })?;
    let blocks = xs.len();
    let mut report = PatternReport { blocks_checked: 0, mismatches: Vec::new() };
    for i in 0..blocks {
        for j in 0..blocks {
            let got = block_extract(&v, &sizes, &sizes, i, j)?;
            let expected = match i.cmp(&j) {
                std::cmp::Ordering::Greater => Matrix::zeros(sizes[i], sizes[j]),
                std::cmp::Ordering::Equal => f.eval(&xs[i])?,
                std::cmp::Ordering::Less => delta_r_higher(f, &xs[i..=j], &zs[i..j])?,
            };
            let got = if i < j { unscale(got, &r, j - i) } else { got };
            report.blocks_checked += 1;
            if !got.approx_eq(&expected, FLOAT_PATTERN_TOL) {
                report.mismatches.push(PatternMismatch { row: i, col: j, residual: got.sub(&expected).max_abs() });
            }
        }
    }
    Ok(report)
}

/// `‖(f(Y + hZ) - f(Y)) / h - Δ_R f(Y, Y)(Z)‖_F`, expected to be `O(h)`.
pub fn directional_derivative_check(
    f: &NcFunction<Complex>,
    y: &MatTuple<Complex>,
    z: &MatTuple<Complex>,
    h: f64,
) -> Result<f64> {
    let shifted = y.add(&z.scale(&Complex::new(h, 0.0)))?;
    let quotient = f.eval(&shifted)?.sub(&f.eval(y)?).scale(&Complex::new(1.0 / h, 0.0));
    let derivative = delta_r(f, y, y, &z.as_rect())?;
    Ok(quotient.sub(&derivative).frobenius())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncalg::{random_poly, NcPoly};
    use crate::ncexpr::parse;
    use crate::sample;
    use proptest::prelude::*;

    type Q = Rational;

    fn expr_fn(text: &str, d: usize) -> NcFunction<Q> {
        NcFunction::from_expr(parse(text, d).unwrap())
    }

    fn q(n: i64) -> Q {
        Q::from_i64(n)
    }

    #[test]
    fn first_order_examples() {
        let mut rng = sample::rng(4);
        let x = sample::int_tuple::<Q>(&mut rng, 1, 2, 3);
        let y = sample::int_tuple::<Q>(&mut rng, 1, 3, 3);
        let z = sample::int_rect::<Q>(&mut rng, 1, 2, 3, 3);
        assert!(delta_r(&NcFunction::constant(1, q(4)), &x, &y, &z).unwrap().is_zero());
        assert_eq!(delta_r(&expr_fn("x1", 1), &x, &y, &z).unwrap(), *z.coord(0));
        // (x^2): X Z + Z Y.
        let sq = delta_r(&expr_fn("x1*x1", 1), &x, &y, &z).unwrap();
        assert_eq!(sq, x.coord(0).mul(z.coord(0)).add(&z.coord(0).mul(y.coord(0))));
        let zl = sample::int_rect::<Q>(&mut rng, 1, 3, 2, 3);
        let left = delta_l(&expr_fn("x1*x1", 1), &x, &y, &zl).unwrap();
        assert_eq!(left, zl.coord(0).mul(x.coord(0)).add(&y.coord(0).mul(zl.coord(0))));
        assert!(delta_l(&NcFunction::constant(1, q(4)), &x, &y, &zl).unwrap().is_zero());
    }

    #[test]
    fn higher_order_square() {
        let mut rng = sample::rng(8);
        let xs: Vec<_> = (0..3).map(|_| sample::int_tuple::<Q>(&mut rng, 1, 2, 3)).collect();
        let zs: Vec<_> = (0..2).map(|_| sample::int_rect::<Q>(&mut rng, 1, 2, 2, 3)).collect();
        let v = delta_r_higher(&expr_fn("x1*x1", 1), &xs, &zs).unwrap();
        assert_eq!(v, zs[0].coord(0).mul(zs[1].coord(0)));
        let one = delta_r_higher(&expr_fn("x1*x1*x1", 1), &xs[..2], &zs[..1]).unwrap();
        assert_eq!(one, delta_r(&expr_fn("x1*x1*x1", 1), &xs[0], &xs[1], &zs[0]).unwrap());
    }

    #[test]
    fn partial_operators() {
        let mut rng = sample::rng(12);
        let x = sample::int_tuple::<Q>(&mut rng, 2, 2, 3);
        let y = sample::int_tuple::<Q>(&mut rng, 2, 2, 3);
        let a = sample::int_matrix::<Q>(&mut rng, 2, 2, 3);
        for i in 1..=2 {
            for j in 1..=2 {
                let v = delta_r_partial(&NcFunction::coordinate(2, i).unwrap(), j, &x, &y, &a).unwrap();
                assert_eq!(v, if i == j { a.clone() } else { Matrix::zeros(2, 2) });
            }
        }
        let prod = delta_r_partial(&expr_fn("x1*x2", 2), 1, &x, &y, &a).unwrap();
        assert_eq!(prod, a.mul(y.coord(1)));
        assert!(delta_r_partial(&expr_fn("x1", 2), 3, &x, &y, &a).is_err());
    }

    #[test]
    fn word_operator_reads_transposed_word() {
        let f = expr_fn("x1*x2", 2);
        let zero = MatTuple::<Q>::zeros(2, 1);
        let xs = vec![zero.clone(), zero.clone(), zero];
        let ones = vec![Matrix::identity(1), Matrix::identity(1)];
        let v12 = delta_r_word(&f, &"g1.g2".parse().unwrap(), &xs, &ones).unwrap();
        let v21 = delta_r_word(&f, &"g2.g1".parse().unwrap(), &xs, &ones).unwrap();
        assert_eq!(v12, Matrix::identity(1));
        assert!(v21.is_zero());
        let mut rng = sample::rng(3);
        let x = sample::int_tuple::<Q>(&mut rng, 2, 2, 2);
        let y = sample::int_tuple::<Q>(&mut rng, 2, 2, 2);
        let a = sample::int_matrix::<Q>(&mut rng, 2, 2, 2);
        assert_eq!(
            delta_r_word(&f, &Word::letter(2), &[x.clone(), y.clone()], &[a.clone()]).unwrap(),
            delta_r_partial(&f, 2, &x, &y, &a).unwrap()
        );
    }

    #[test]
    fn retry_scaling_shrinks_the_corner() {
        // Identity on the open box max|x_ij| < 2: the corner 10 only fits after r = 1/8.
        let boxed = NcFunction::new(1, |x: &MatTuple<Q>| {
            if x.coord(0).max_abs() < 2.0 {
                Ok(x.coord(0).clone())
            } else {
                Err(NcError::domain("outside the box"))
            }
        });
        let zero = MatTuple::<Q>::zeros(1, 1);
        let z = RectTuple::new(1, 1, vec![Matrix::scalar(1, q(10))]).unwrap();
        assert_eq!(delta_r(&boxed, &zero, &zero, &z).unwrap(), Matrix::scalar(1, q(10)));
        let far = MatTuple::scalars(vec![q(5)]).unwrap();
        assert!(delta_r(&boxed, &far, &zero, &z).unwrap_err().is_domain());
    }

    #[test]
    fn singular_point_is_a_domain_error() {
        let f = expr_fn("inv(x1)", 1);
        let zero = MatTuple::<Q>::zeros(1, 2);
        let z = RectTuple::zeros(1, 2, 2);
        let err = delta_r(&f, &zero, &zero, &z).unwrap_err();
        assert!(matches!(err, NcError::Domain { span: Some(s), .. } if s == crate::Span::new(0, 7)));
    }

    #[test]
    fn float_derivative_check() {
        let f = NcFunction::<Complex>::from_expr(parse("x1*x1", 1).unwrap());
        let mut rng = sample::rng(21);
        let y = sample::int_tuple::<Complex>(&mut rng, 1, 3, 2);
        let z = sample::int_tuple::<Complex>(&mut rng, 1, 3, 2);
        let r1 = directional_derivative_check(&f, &y, &z, 1e-3).unwrap();
        let r2 = directional_derivative_check(&f, &y, &z, 5e-4).unwrap();
        // For x^2 the residual is exactly h ‖Z^2‖.
        assert!((r1 / r2 - 2.0).abs() < 1e-3, "ratio {}", r1 / r2);
        let c = NcFunction::<Complex>::constant(1, Complex::new(2.0, 0.0));
        assert!(directional_derivative_check(&c, &y, &z, 1e-6).unwrap() < 1e-12);
    }

    #[test]
    fn pattern_examples() {
        let mut rng = sample::rng(30);
        let xs: Vec<_> = (0..4).map(|k| sample::int_tuple::<Q>(&mut rng, 2, 1 + k % 2, 2)).collect();
        let zs: Vec<_> = (0..3)
            .map(|k| sample::int_rect::<Q>(&mut rng, 2, xs[k].n(), xs[k + 1].n(), 2))
            .collect();
        let p = NcFunction::from_poly(random_poly::<Q>(&mut rng, 2, 4, 6));
        let report = full_pattern_check(&p, &xs, &zs).unwrap();
        assert!(report.passed());
        assert_eq!(report.blocks_checked, 16);
        let c = full_pattern_check(&NcFunction::constant(2, q(3)), &xs, &zs).unwrap();
        assert!(c.passed());
        let single = full_pattern_check(&p, &xs[..1], &[]).unwrap();
        assert_eq!(single.blocks_checked, 1);
        // A function that ignores upper triangular structure must fail.
        let bad = NcFunction::new(2, |x: &MatTuple<Q>| Ok(x.coord(0).transpose()));
        assert!(!full_pattern_check(&bad, &xs, &zs).unwrap().passed());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn linear_in_direction(seed in any::<u64>()) {
            let mut rng = sample::rng(seed);
            let f = NcFunction::from_poly(random_poly::<Q>(&mut rng, 2, 3, 5));
            let x = sample::int_tuple::<Q>(&mut rng, 2, 2, 2);
            let y = sample::int_tuple::<Q>(&mut rng, 2, 1, 2);
            let z1 = sample::int_rect::<Q>(&mut rng, 2, 2, 1, 2);
            let z2 = sample::int_rect::<Q>(&mut rng, 2, 2, 1, 2);
            let (a, b) = (q(3), Q::new((-1).into(), 2.into()));
            let lhs = delta_r(&f, &x, &y, &z1.scale(&a).add(&z2.scale(&b)).unwrap()).unwrap();
            let rhs = delta_r(&f, &x, &y, &z1).unwrap().scale(&a)
                .add(&delta_r(&f, &x, &y, &z2).unwrap().scale(&b));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn first_difference_formula(seed in any::<u64>()) {
            let mut rng = sample::rng(seed);
            let f = NcFunction::from_poly(random_poly::<Q>(&mut rng, 2, 4, 6));
            let x = sample::int_tuple::<Q>(&mut rng, 2, 2, 2);
            let y = sample::int_tuple::<Q>(&mut rng, 2, 2, 2);
            let diff = x.sub(&y).unwrap().as_rect();
            let lhs = f.eval(&x).unwrap().sub(&f.eval(&y).unwrap());
            prop_assert_eq!(&lhs, &delta_r(&f, &y, &x, &diff).unwrap());
            prop_assert_eq!(&lhs, &delta_r(&f, &x, &y, &diff).unwrap());
        }

        #[test]
        fn symmetry(seed in any::<u64>()) {
            let mut rng = sample::rng(seed);
            let f = NcFunction::<Q>::from_poly(random_poly(&mut rng, 2, 3, 5));
            let x = sample::int_tuple::<Q>(&mut rng, 2, 2, 2);
            let y = sample::int_tuple::<Q>(&mut rng, 2, 3, 2);
            let z = sample::int_rect::<Q>(&mut rng, 2, 2, 3, 2);
            prop_assert_eq!(delta_r(&f, &x, &y, &z).unwrap(), delta_l(&f, &y, &x, &z).unwrap());
        }

        #[test]
        fn partials_sum_to_full(seed in any::<u64>()) {
            let mut rng = sample::rng(seed);
            let f = NcFunction::<Q>::from_poly(random_poly(&mut rng, 3, 3, 6));
            let x = sample::int_tuple::<Q>(&mut rng, 3, 1, 2);
            let y = sample::int_tuple::<Q>(&mut rng, 3, 2, 2);
            let z = sample::int_rect::<Q>(&mut rng, 3, 1, 2, 2);
            let mut total = Matrix::zeros(1, 2);
            for j in 1..=3 {
                total.add_assign(&delta_r_partial(&f, j, &x, &y, z.coord(j - 1)).unwrap());
            }
            prop_assert_eq!(total, delta_r(&f, &x, &y, &z).unwrap());
        }

        #[test]
        fn higher_order_splits_over_words(seed in any::<u64>()) {
            let mut rng = sample::rng(seed);
            let f = NcFunction::<Q>::from_poly(random_poly(&mut rng, 2, 4, 8));
            let xs: Vec<_> = (0..3).map(|_| sample::int_tuple::<Q>(&mut rng, 2, 1, 2)).collect();
            let zs: Vec<_> = (0..2).map(|_| sample::int_rect::<Q>(&mut rng, 2, 1, 1, 2)).collect();
            let mut total = Matrix::zeros(1, 1);
            for w in crate::words::words_of_length(2, 2).unwrap() {
                let a_s: Vec<_> = w.letters().iter().enumerate().map(|(k, &l)| zs[k].coord(l - 1).clone()).collect();
                total.add_assign(&delta_r_word(&f, &w, &xs, &a_s).unwrap());
            }
            prop_assert_eq!(total, delta_r_higher(&f, &xs, &zs).unwrap());
        }

        #[test]
        fn monomial_word_coefficients(letters in prop::collection::vec(1usize..=2, 1..5)) {
            // The corner at word w of x^u (all points 0, unit directions) is
            // 1 exactly when u = w.
            let u = Word::new(letters).unwrap();
            let f = NcFunction::from_poly(NcPoly::<Q>::monomial(2, u.clone(), q(1)).unwrap());
            let zero = MatTuple::<Q>::zeros(2, 1);
            let xs = vec![zero; u.len() + 1];
            let ones = vec![Matrix::identity(1); u.len()];
            for w in crate::words::words_of_length(2, u.len()).unwrap() {
                let v = delta_r_word(&f, &w, &xs, &ones).unwrap();
                prop_assert_eq!(v.get(0, 0).clone(), if w == u { q(1) } else { q(0) });
            }
        }
    }
}
