//! Seeded random generators for test inputs, witness searches and sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blockops::{direct_sum_copies, MatTuple, RectTuple};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform integer entries in `[-k, k]`.
pub fn int_matrix<S: Scalar>(rng: &mut impl Rng, rows: usize, cols: usize, k: i64) -> Matrix<S> {
    Matrix::from_fn(rows, cols, |_, _| S::from_i64(rng.gen_range(-k..=k)))
}

pub fn int_tuple<S: Scalar>(rng: &mut impl Rng, d: usize, n: usize, k: i64) -> MatTuple<S> {
    MatTuple::new(n, (0..d).map(|_| int_matrix(rng, n, n, k)).collect()).expect("d >= 1")
}

pub fn int_rect<S: Scalar>(rng: &mut impl Rng, d: usize, rows: usize, cols: usize, k: i64) -> RectTuple<S> {
    RectTuple::new(rows, cols, (0..d).map(|_| int_matrix(rng, rows, cols, k)).collect()).expect("d >= 1")
}

/// A random integer matrix with determinant one, returned with its inverse.
pub fn unimodular<S: Scalar>(rng: &mut impl Rng, n: usize) -> (Matrix<S>, Matrix<S>) {
    let lower = Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => S::one(),
        std::cmp::Ordering::Greater => S::from_i64(rng.gen_range(-1..=1)),
        std::cmp::Ordering::Less => S::zero(),
    });
    let upper = Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => S::one(),
        std::cmp::Ordering::Less => S::from_i64(rng.gen_range(-1..=1)),
        std::cmp::Ordering::Greater => S::zero(),
    });
    let t = lower.mul(&upper);
    let t_inv = t.inverse().expect("unit triangular product is invertible");
    (t, t_inv)
}

/// `T ⊗ I_s`: replaces each entry of `t` by that multiple of `I_s`.
pub fn kron_identity<S: Scalar>(t: &Matrix<S>, s: usize) -> Matrix<S> {
    Matrix::from_fn(t.rows() * s, t.cols() * s, |i, j| {
        if i % s == j % s {
            t.get(i / s, j / s).clone()
        } else {
            S::zero()
        }
    })
}

/// A random tuple jointly nilpotent about the size-`s` center `y`, made of
/// `m` blocks: `⊕Y` plus a strictly block upper triangular part, conjugated
/// by `T ⊗ I_s` for a random unimodular `T`.
pub fn nilpotent_about<S: Scalar>(y: &MatTuple<S>, m: usize, rng: &mut impl Rng) -> MatTuple<S> {
    let s = y.n();
    let base = direct_sum_copies(y, m).expect("m >= 1");
    let mats = base
        .mats()
        .iter()
        .map(|b| {
            let mut x = b.clone();
            for alpha in 0..m {
                for beta in alpha + 1..m {
                    x.set_block(alpha * s, beta * s, &int_matrix(rng, s, s, 2));
                }
            }
            x
        })
        .collect();
    let x = MatTuple::new(s * m, mats).expect("consistent sizes");
    let (t, t_inv) = unimodular::<S>(rng, m);
    x.conjugate(&kron_identity(&t, s), &kron_identity(&t_inv, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn unimodular_inverse() {
        let mut r = rng(7);
        let (t, t_inv) = unimodular::<Rational>(&mut r, 4);
        assert_eq!(t.mul(&t_inv), Matrix::identity(4));
    }

    #[test]
    fn seeded_is_deterministic() {
        let a: MatTuple<Rational> = int_tuple(&mut rng(3), 2, 3, 5);
        let b: MatTuple<Rational> = int_tuple(&mut rng(3), 2, 3, 5);
        assert_eq!(a, b);
    }
}
