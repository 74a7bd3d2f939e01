//! Scalar backends: exact rationals and double-precision complex numbers.

use std::fmt::Debug;
use std::ops::{AddAssign, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{NcError, Result};
use crate::matrix::Matrix;

pub type Rational = BigRational;
pub type Complex = Complex64;

/// Relative pivot threshold below which a float matrix counts as singular.
pub const FLOAT_PIVOT_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Rational,
    Complex,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::Rational => "rational",
            Field::Complex => "complex",
        }
    }
}

impl FromStr for Field {
    type Err = NcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" => Ok(Field::Rational),
            "complex" => Ok(Field::Complex),
            other => Err(NcError::argument(format!("unknown field '{other}'"))),
        }
    }
}

/// Coefficient field for matrices, polynomials and series.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + std::ops::Neg<Output = Self>
    + std::ops::Sub<Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
{
    const FIELD: Field;

    fn mul_ref(&self, other: &Self) -> Self;

    fn from_i64(v: i64) -> Self;

    fn from_rational(q: &Rational) -> Self;

    /// Absolute value as a float, used for pivoting and residual reports.
    fn magnitude(&self) -> f64;

    fn recip(&self) -> Option<Self>;

    /// Exact equality for rationals; absolute tolerance for floats.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;

    /// Inverse of a square matrix, `None` when singular.
    fn invert_matrix(m: &Matrix<Self>) -> Option<Matrix<Self>>;

    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self>;

    /// Separate real and imaginary parts, as used by polynomial term lists.
    fn to_re_im_json(&self) -> (Value, Value);

    fn from_re_im_json(re: &Value, im: Option<&Value>) -> Result<Self>;
}

/// Parses `p/q`, an integer, or a terminating decimal into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || NcError::argument(format!("invalid rational literal '{text}'"));
    let t = text.trim();
    if let Some((num, den)) = t.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(NcError::argument(format!("zero denominator in '{text}'")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit()) || frac.is_empty() && int_digits.is_empty() {
            return Err(bad());
        }
        let whole = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(int_digits).map_err(|_| bad())?
        };
        let frac_num = if frac.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(frac).map_err(|_| bad())?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let value = BigRational::new(whole * &scale + frac_num, scale);
        return Ok(if negative { -value } else { value });
    }
    BigInt::from_str(t).map(BigRational::from_integer).map_err(|_| bad())
}

fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

impl Scalar for Rational {
    const FIELD: Field = Field::Rational;

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn magnitude(&self) -> f64 {
        rational_to_f64(&self.abs())
    }

    fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(num_traits::Inv::inv(self.clone()))
        }
    }

    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn invert_matrix(m: &Matrix<Self>) -> Option<Matrix<Self>> {
        fraction_free_inverse(m)
    }

    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Self::from_i64(i))
                } else {
                    parse_rational(&n.to_string())
                }
            }
            Value::Object(obj) => {
                if let Some(im) = obj.get("im") {
                    if !Self::from_json(im)?.is_zero() {
                        return Err(NcError::Json("rational field has no imaginary part".into()));
                    }
                }
                let re = obj.get("re").ok_or_else(|| NcError::Json("missing 're'".into()))?;
                Self::from_json(re)
            }
            other => Err(NcError::Json(format!("expected rational scalar, got {other}"))),
        }
    }

    fn to_re_im_json(&self) -> (Value, Value) {
        (self.to_json(), Value::String("0".into()))
    }

    fn from_re_im_json(re: &Value, im: Option<&Value>) -> Result<Self> {
        if let Some(im) = im {
            if !Self::from_json(im)?.is_zero() {
                return Err(NcError::Json("rational field has no imaginary part".into()));
            }
        }
        Self::from_json(re)
    }
}

impl Scalar for Complex {
    const FIELD: Field = Field::Complex;

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn from_rational(q: &Rational) -> Self {
        Complex64::new(rational_to_f64(q), 0.0)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.inv())
        }
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).norm() <= tol
    }

    fn invert_matrix(m: &Matrix<Self>) -> Option<Matrix<Self>> {
        pivoted_inverse(m)
    }

    fn to_json(&self) -> Value {
        serde_json::json!({ "re": self.re, "im": self.im })
    }

    fn from_json(v: &Value) -> Result<Self> {
        let num = |v: &Value| -> Result<f64> {
            match v {
                Value::Number(n) => n.as_f64().ok_or_else(|| NcError::Json("bad number".into())),
                Value::String(s) => parse_rational(s).map(|q| rational_to_f64(&q)),
                other => Err(NcError::Json(format!("expected number, got {other}"))),
            }
        };
        match v {
            Value::Object(obj) => {
                let re = obj.get("re").map(num).transpose()?.unwrap_or(0.0);
                let im = obj.get("im").map(num).transpose()?.unwrap_or(0.0);
                Ok(Complex64::new(re, im))
            }
            Value::Array(parts) if parts.len() == 2 => {
                Ok(Complex64::new(num(&parts[0])?, num(&parts[1])?))
            }
            other => Ok(Complex64::new(num(other)?, 0.0)),
        }
    }

    fn to_re_im_json(&self) -> (Value, Value) {
        (serde_json::json!(self.re), serde_json::json!(self.im))
    }

    fn from_re_im_json(re: &Value, im: Option<&Value>) -> Result<Self> {
        let re = Self::from_json(re)?;
        let im = im.map(Self::from_json).transpose()?.unwrap_or_default();
        Ok(Complex64::new(re.re - im.im, re.im + im.re))
    }
}

/// Exact inverse by fraction-free Gauss-Jordan elimination over the integers.
///
/// Rows are first scaled to clear denominators (`B = D A`), so that
/// `A^{-1} = B^{-1} D`. Every elimination step divides exactly by the
/// previous pivot, keeping intermediate entries integral.
fn fraction_free_inverse(a: &Matrix<Rational>) -> Option<Matrix<Rational>> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "inverse of a non-square matrix");
    let mut row_scale = Vec::with_capacity(n);
    let mut work: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for i in 0..n {
        let lcm = (0..n).fold(BigInt::one(), |acc, j| acc.lcm(a.get(i, j).denom()));
        let mut row = Vec::with_capacity(2 * n);
        for j in 0..n {
            let q = a.get(i, j);
            row.push(q.numer() * (&lcm / q.denom()));
        }
        for j in 0..n {
            row.push(if i == j { BigInt::one() } else { BigInt::zero() });
        }
        work.push(row);
        row_scale.push(lcm);
    }

    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot_row = (k..n).find(|&r| !work[r][k].is_zero())?;
        work.swap(k, pivot_row);
        let pivot = work[k][k].clone();
        for i in 0..n {
            if i == k {
                continue;
            }
            let factor = work[i][k].clone();
            for j in 0..2 * n {
                let t = &pivot * &work[i][j] - &factor * &work[k][j];
                let (q, r) = t.div_rem(&prev);
                debug_assert!(r.is_zero(), "inexact division in fraction-free elimination");
                work[i][j] = q;
            }
        }
        prev = pivot;
    }

    // Left block is now `prev * I`; the right block is `prev * B^{-1}`.
    Some(Matrix::from_fn(n, n, |i, j| {
        BigRational::new(&work[i][n + j] * &row_scale[j], prev.clone())
    }))
}

/// Gauss-Jordan with partial pivoting; a pivot below
/// `FLOAT_PIVOT_THRESHOLD * max|a_ij|` means singular.
fn pivoted_inverse(a: &Matrix<Complex>) -> Option<Matrix<Complex>> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "inverse of a non-square matrix");
    let scale = a.max_abs();
    if n == 0 {
        return Some(Matrix::zeros(0, 0));
    }
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let threshold = FLOAT_PIVOT_THRESHOLD * scale;
    let mut left = a.clone();
    let mut right = Matrix::<Complex>::identity(n);
    for k in 0..n {
        let (p, best) = (k..n)
            .map(|r| (r, left.get(r, k).norm()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best < threshold {
            return None;
        }
        left.swap_rows(k, p);
        right.swap_rows(k, p);
        let inv = left.get(k, k).inv();
        for j in 0..n {
            let l = left.get(k, j) * inv;
            left.set(k, j, l);
            let r = right.get(k, j) * inv;
            right.set(k, j, r);
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            let factor = *left.get(i, k);
            if factor.is_zero() {
                continue;
            }
            for j in 0..n {
                let l = left.get(i, j) - factor * left.get(k, j);
                left.set(i, j, l);
                let r = right.get(i, j) - factor * right.get(k, j);
                right.set(i, j, r);
            }
        }
    }
    Some(right)
}
