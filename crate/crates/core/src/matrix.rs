//! Dense row-major matrices over a [`Scalar`] field.

use serde_json::{json, Value};

use crate::error::{NcError, Result};
use crate::scalar::{Field, Scalar};

#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: std::fmt::Debug> std::fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Matrix {}x{} ", self.rows, self.cols)?;
        f.debug_list()
            .entries((0..self.rows).map(|i| &self.data[i * self.cols..(i + 1) * self.cols]))
            .finish()
    }
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, S::one())
    }

    /// `c * I_n`.
    pub fn scalar(n: usize, c: S) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = c.clone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(NcError::argument("ragged matrix rows"));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// The `E_{ab}` matrix unit of shape `rows x cols`.
    pub fn unit(rows: usize, cols: usize, a: usize, b: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.set(a, b, S::one());
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(S::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "matrix add shape mismatch");
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.shape(), other.shape(), "matrix add shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "matrix sub shape mismatch");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn neg(&self) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().cloned().map(|x| -x).collect() }
    }

    pub fn scale(&self, c: &S) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.mul_ref(c)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other.data[k * other.cols + j];
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += &a.mul_ref(b);
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        S::invert_matrix(self)
    }

    pub fn pow(&self, k: usize) -> Self {
        assert!(self.is_square(), "power of a non-square matrix");
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Self {
        assert!(r0 + h <= self.rows && c0 + w <= self.cols, "block out of range");
        Self::from_fn(h, w, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols, "block out of range");
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.get(i, j).clone());
            }
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn row(&self, i: usize) -> Self {
        self.block(i, 0, 1, self.cols)
    }

    /// Block diagonal `diag(self, other)`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, self.cols, other);
        out
    }

    /// `I_m ⊗ self`, i.e. `m` diagonal copies.
    pub fn direct_sum_copies(&self, m: usize) -> Self {
        let mut out = Self::zeros(self.rows * m, self.cols * m);
        for a in 0..m {
            out.set_block(a * self.rows, a * self.cols, self);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(S::magnitude).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.magnitude().powi(2)).sum::<f64>().sqrt()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.shape() == other.shape() && self.data.iter().zip(&other.data).all(|(a, b)| a.approx_eq(b, tol))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    /// Nested row arrays of scalar JSON values.
    pub fn entries_json(&self) -> Value {
        Value::Array(
            (0..self.rows)
                .map(|i| Value::Array((0..self.cols).map(|j| self.get(i, j).to_json()).collect()))
                .collect(),
        )
    }

    /// Parses nested row arrays; `cols` fixes the width when there are no rows.
    pub fn from_entries_json(v: &Value, cols: Option<usize>) -> Result<Self> {
        let rows = v.as_array().ok_or_else(|| NcError::Json("matrix must be an array of rows".into()))?;
        let parsed = rows
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| NcError::Json("matrix row must be an array".into()))?
                    .iter()
                    .map(S::from_json)
                    .collect::<Result<Vec<S>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if parsed.is_empty() {
            return Ok(Self::zeros(0, cols.unwrap_or(0)));
        }
        let m = Self::from_rows(parsed)?;
        if let Some(c) = cols {
            if m.cols != c {
                return Err(NcError::Json(format!("expected {c} columns, found {}", m.cols)));
            }
        }
        Ok(m)
    }

    /// `{"rows", "cols", "field", "entries"}`.
    pub fn to_json(&self) -> Value {
        json!({
            "rows": self.rows,
            "cols": self.cols,
            "field": S::FIELD.as_str(),
            "entries": self.entries_json(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        if let Some(field) = v.get("field").and_then(Value::as_str) {
            if field.parse::<Field>()? != S::FIELD {
                return Err(NcError::Json(format!("expected field {}, found {field}", S::FIELD.as_str())));
            }
        }
        let dim = |key: &str| v.get(key).and_then(Value::as_u64).map(|x| x as usize);
        let entries = v.get("entries").ok_or_else(|| NcError::Json("missing 'entries'".into()))?;
        let m = Self::from_entries_json(entries, dim("cols"))?;
        if let Some(r) = dim("rows") {
            if r != m.rows {
                return Err(NcError::Json(format!("expected {r} rows, found {}", m.rows)));
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn product_and_blocks() {
        let a = Matrix::from_fn(2, 3, |i, j| q((i * 3 + j) as i64));
        let b = Matrix::from_fn(3, 2, |i, j| q(i as i64 - j as i64));
        let c = a.mul(&b);
        // Hand-computed: [[0,1,2],[3,4,5]] * [[0,-1],[1,0],[2,1]]
        assert_eq!(c, Matrix::from_rows(vec![vec![q(5), q(2)], vec![q(14), q(2)]]).unwrap());
        let s = a.direct_sum(&b);
        assert_eq!(s.shape(), (5, 5));
        assert_eq!(s.block(2, 3, 3, 2), b);
        assert!(s.block(0, 3, 2, 2).is_zero());
    }

    #[test]
    fn json_round_trip() {
        let a = Matrix::from_fn(2, 2, |i, j| Rational::new((i as i64 + 1).into(), (j as i64 + 2).into()));
        let v = a.to_json();
        assert_eq!(v["entries"][0][1], json!("1/3"));
        assert_eq!(Matrix::<Rational>::from_json(&v).unwrap(), a);
        let empty = Matrix::<Rational>::zeros(0, 3);
        assert_eq!(Matrix::<Rational>::from_json(&empty.to_json()).unwrap(), empty);
    }
}
