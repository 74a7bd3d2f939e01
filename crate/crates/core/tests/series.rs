//! Expansions, sums and radii across module boundaries.

use freenc::convergence::{self, CoeffRule};
use freenc::ttseries::{eval_nilpotent, series_as_ncfunction, series_partial_sum, tt_expand};
use freenc::{sample, Complex, MatTuple, Matrix, NcExpr, NcFunction, Rational, Scalar, TTSeries, Word};

type Q = Rational;

fn q(v: i64) -> Q {
    Q::from_i64(v)
}

#[test]
fn product_about_a_scalar_center() {
    // (1 + a1)(2 + a2) = 2 + 2 a1 + a2 + a1 a2
    let f = NcFunction::<Q>::from_expr(NcExpr::parse("x1*x2", 2).unwrap());
    let center = MatTuple::scalars(vec![q(1), q(2)]).unwrap();
    let series = tt_expand(&f, &center, 3).unwrap();
    let expected = [("", 2), ("g1", 2), ("g2", 1), ("g1.g2", 1), ("g2.g1", 0), ("g1.g1", 0)];
    for (w, c) in expected {
        let w: Word = if w.is_empty() { Word::empty() } else { w.parse().unwrap() };
        assert_eq!(series.coeff(&w).unwrap().as_scalar(), Some(&q(c)), "{w}");
    }
    assert!(series.coeffs().iter().filter(|(w, _)| w.len() == 3).all(|(_, c)| c.is_zero()));
}

#[test]
fn json_round_trip_then_sum_at_a_nilpotent_point() {
    let mut rng = sample::rng(17);
    let f = NcFunction::<Q>::from_expr(NcExpr::parse("x1*inv(2 + x2) - x2*x1*x2", 2).unwrap());
    let y = sample::int_tuple::<Q>(&mut rng, 2, 2, 1);
    let series = tt_expand(&f, &y, 2).unwrap();
    assert!(series.verified());
    let text = serde_json::to_string(&series.to_json()).unwrap();
    let back = TTSeries::<Q>::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back, series);
    assert!(back.verified());

    let x = sample::nilpotent_about(&y, 3, &mut rng);
    let expected = f.eval(&x).unwrap();
    assert_eq!(eval_nilpotent(&back, &x).unwrap(), expected);
    assert_eq!(series_as_ncfunction(&back).unwrap().eval(&x).unwrap(), expected);
}

#[test]
fn geometric_rule_sums_to_the_resolvent() {
    // Σ_w x^w over all words is (1 - x1 - x2)^{-1}
    let center = MatTuple::scalars(vec![q(0), q(0)]).unwrap();
    let series = TTSeries::from_rule(center, |_| q(1)).unwrap();
    let x = MatTuple::from_mats(vec![
        Matrix::from_fn(3, 3, |i, j| if j == i + 1 { q(1) } else { q(0) }),
        Matrix::from_fn(3, 3, |i, j| if j == i + 2 { q(2) } else { q(0) }),
    ])
    .unwrap();
    let mut total = Matrix::<Q>::identity(3);
    for m in x.mats() {
        total = total.sub(m);
    }
    let resolvent = total.inverse().unwrap();
    assert_eq!(eval_nilpotent(&series, &x).unwrap(), resolvent);
    assert_eq!(series_partial_sum(&series, &x, 2).unwrap(), resolvent);
}

#[test]
fn radius_estimates_agree_on_a_diagonal_point() {
    let z = MatTuple::from_mats(vec![Matrix::from_fn(2, 2, |i, j| {
        if i == j {
            Complex::new(0.5 - 0.25 * i as f64, 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    })])
    .unwrap();
    let rule = CoeffRule::geometric(1);
    let rho = convergence::rho_point(&rule, &z, 32).unwrap();
    assert!((rho - 2.0).abs() < 1e-9, "{rho}");
    assert!((convergence::mu_r(&rule, &[0.5], 32).unwrap() - 0.5).abs() < 1e-12);
    assert!(convergence::geometric_resolvent_check(&z, 64, 1e-12).unwrap());
}
