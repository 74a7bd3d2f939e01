//! Matrix tuples, block assembly, faux (tensor-valued) products and
//! joint-nilpotency detection.

use serde_json::{json, Value};

use crate::error::{NcError, Result};
use crate::matrix::Matrix;
use crate::scalar::{Field, Scalar};
use crate::words::{words_of_length, Word};

/// A `d`-tuple of `n x n` matrices: a point of the nc space at level `n`.
#[derive(Clone, PartialEq, Debug)]
pub struct MatTuple<S> {
    n: usize,
    mats: Vec<Matrix<S>>,
}

/// A `d`-tuple of `rows x cols` matrices, used as directions.
#[derive(Clone, PartialEq, Debug)]
pub struct RectTuple<S> {
    rows: usize,
    cols: usize,
    mats: Vec<Matrix<S>>,
}

impl<S: Scalar> MatTuple<S> {
    pub fn new(n: usize, mats: Vec<Matrix<S>>) -> Result<Self> {
        if mats.is_empty() {
            return Err(NcError::argument("a matrix tuple needs d >= 1"));
        }
        if mats.iter().any(|m| m.shape() != (n, n)) {
            return Err(NcError::argument(format!("every matrix of the tuple must be {n}x{n}")));
        }
        Ok(MatTuple { n, mats })
    }

    /// Builds from non-empty square matrices of a common size.
    pub fn from_mats(mats: Vec<Matrix<S>>) -> Result<Self> {
        let n = mats.first().map_or(0, Matrix::rows);
        Self::new(n, mats)
    }

    pub fn zeros(d: usize, n: usize) -> Self {
        MatTuple { n, mats: vec![Matrix::zeros(n, n); d] }
    }

    /// A level-one point `(z_1, ..., z_d)`.
    pub fn scalars(values: Vec<S>) -> Result<Self> {
        Self::from_mats(values.into_iter().map(|v| Matrix::scalar(1, v)).collect())
    }

    pub fn d(&self) -> usize {
        self.mats.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mats(&self) -> &[Matrix<S>] {
        &self.mats
    }

    /// Coordinate `j`, 0-based.
    pub fn coord(&self, j: usize) -> &Matrix<S> {
        &self.mats[j]
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, Matrix::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, Matrix::sub)
    }

    pub fn scale(&self, c: &S) -> Self {
        MatTuple { n: self.n, mats: self.mats.iter().map(|m| m.scale(c)).collect() }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Matrix<S>, &Matrix<S>) -> Matrix<S>) -> Result<Self> {
        if self.d() != other.d() || self.n != other.n {
            return Err(NcError::argument("matrix tuples differ in d or size"));
        }
        Ok(MatTuple { n: self.n, mats: self.mats.iter().zip(&other.mats).map(|(a, b)| f(a, b)).collect() })
    }

    /// `(T X_1 T^{-1}, ..., T X_d T^{-1})`.
    pub fn conjugate(&self, t: &Matrix<S>, t_inv: &Matrix<S>) -> Self {
        MatTuple { n: self.n, mats: self.mats.iter().map(|m| t.mul(m).mul(t_inv)).collect() }
    }

    /// Left multiplication `T X_j` into a rectangular tuple.
    pub fn left_mul(&self, t: &Matrix<S>) -> RectTuple<S> {
        RectTuple { rows: t.rows(), cols: self.n, mats: self.mats.iter().map(|m| t.mul(m)).collect() }
    }

    pub fn as_rect(&self) -> RectTuple<S> {
        RectTuple { rows: self.n, cols: self.n, mats: self.mats.clone() }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> MatTuple<T> {
        MatTuple { n: self.n, mats: self.mats.iter().map(|m| m.map(&f)).collect() }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d(),
            "n": self.n,
            "field": S::FIELD.as_str(),
            "matrices": self.mats.iter().map(Matrix::entries_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        check_field::<S>(v)?;
        let d = usize_field(v, "d")?;
        let n = usize_field(v, "n")?;
        let mats = parse_mats::<S>(v, d, Some(n))?;
        Self::new(n, mats)
    }
}

impl<S: Scalar> RectTuple<S> {
    pub fn new(rows: usize, cols: usize, mats: Vec<Matrix<S>>) -> Result<Self> {
        if mats.is_empty() {
            return Err(NcError::argument("a matrix tuple needs d >= 1"));
        }
        if mats.iter().any(|m| m.shape() != (rows, cols)) {
            return Err(NcError::argument(format!("every matrix of the tuple must be {rows}x{cols}")));
        }
        Ok(RectTuple { rows, cols, mats })
    }

    pub fn zeros(d: usize, rows: usize, cols: usize) -> Self {
        RectTuple { rows, cols, mats: vec![Matrix::zeros(rows, cols); d] }
    }

    /// `A e_j`: the tuple with `a` in coordinate `j` (0-based), zeros elsewhere.
    pub fn single(d: usize, j: usize, a: Matrix<S>) -> Self {
        let (rows, cols) = a.shape();
        let mut mats = vec![Matrix::zeros(rows, cols); d];
        mats[j] = a;
        RectTuple { rows, cols, mats }
    }

    pub fn d(&self) -> usize {
        self.mats.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mats(&self) -> &[Matrix<S>] {
        &self.mats
    }

    pub fn coord(&self, j: usize) -> &Matrix<S> {
        &self.mats[j]
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.d() != other.d() || self.rows != other.rows || self.cols != other.cols {
            return Err(NcError::argument("rectangular tuples differ in d or shape"));
        }
        let mats = self.mats.iter().zip(&other.mats).map(|(a, b)| a.add(b)).collect();
        Ok(RectTuple { rows: self.rows, cols: self.cols, mats })
    }

    pub fn scale(&self, c: &S) -> Self {
        RectTuple { rows: self.rows, cols: self.cols, mats: self.mats.iter().map(|m| m.scale(c)).collect() }
    }

    pub fn left_mul(&self, t: &Matrix<S>) -> Self {
        RectTuple { rows: t.rows(), cols: self.cols, mats: self.mats.iter().map(|m| t.mul(m)).collect() }
    }

    pub fn right_mul(&self, t: &Matrix<S>) -> Self {
        RectTuple { rows: self.rows, cols: t.cols(), mats: self.mats.iter().map(|m| m.mul(t)).collect() }
    }

    /// Stacks `self` above `other`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.d() != other.d() || self.cols != other.cols {
            return Err(NcError::argument("cannot stack tuples of different width"));
        }
        let rows = self.rows + other.rows;
        let mats = self
            .mats
            .iter()
            .zip(&other.mats)
            .map(|(a, b)| {
                let mut m = Matrix::zeros(rows, self.cols);
                m.set_block(0, 0, a);
                m.set_block(self.rows, 0, b);
                m
            })
            .collect();
        Ok(RectTuple { rows, cols: self.cols, mats })
    }

    /// Places `self` to the left of `other`.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.d() != other.d() || self.rows != other.rows {
            return Err(NcError::argument("cannot join tuples of different height"));
        }
        let cols = self.cols + other.cols;
        let mats = self
            .mats
            .iter()
            .zip(&other.mats)
            .map(|(a, b)| {
                let mut m = Matrix::zeros(self.rows, cols);
                m.set_block(0, 0, a);
                m.set_block(0, self.cols, b);
                m
            })
            .collect();
        Ok(RectTuple { rows: self.rows, cols, mats })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d(),
            "rows": self.rows,
            "cols": self.cols,
            "field": S::FIELD.as_str(),
            "matrices": self.mats.iter().map(Matrix::entries_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        check_field::<S>(v)?;
        let d = usize_field(v, "d")?;
        let rows = usize_field(v, "rows")?;
        let cols = usize_field(v, "cols")?;
        let mats = parse_mats::<S>(v, d, Some(cols))?;
        Self::new(rows, cols, mats)
    }
}

impl<S: Scalar> From<MatTuple<S>> for RectTuple<S> {
    fn from(x: MatTuple<S>) -> Self {
        RectTuple { rows: x.n, cols: x.n, mats: x.mats }
    }
}

fn check_field<S: Scalar>(v: &Value) -> Result<()> {
    if let Some(field) = v.get("field").and_then(Value::as_str) {
        if field.parse::<Field>()? != S::FIELD {
            return Err(NcError::Json(format!("expected field {}, found {field}", S::FIELD.as_str())));
        }
    }
    Ok(())
}

fn usize_field(v: &Value, key: &str) -> Result<usize> {
    v.get(key)
        .and_then(Value::as_u64)
        .map(|x| x as usize)
        .ok_or_else(|| NcError::Json(format!("missing or invalid '{key}'")))
}

fn parse_mats<S: Scalar>(v: &Value, d: usize, cols: Option<usize>) -> Result<Vec<Matrix<S>>> {
    let arr = v
        .get("matrices")
        .and_then(Value::as_array)
        .ok_or_else(|| NcError::Json("missing 'matrices' array".into()))?;
    if arr.len() != d {
        return Err(NcError::Json(format!("expected {d} matrices, found {}", arr.len())));
    }
    arr.iter().map(|m| Matrix::from_entries_json(m, cols)).collect()
}

fn same_d<S>(a: &[Matrix<S>], b: &[Matrix<S>]) -> Result<()> {
    if a.len() != b.len() {
        return Err(NcError::argument(format!("tuples have d = {} and d = {}", a.len(), b.len())));
    }
    Ok(())
}

pub fn direct_sum<S: Scalar>(x: &MatTuple<S>, y: &MatTuple<S>) -> Result<MatTuple<S>> {
    same_d(&x.mats, &y.mats)?;
    let mats = x.mats.iter().zip(&y.mats).map(|(a, b)| a.direct_sum(b)).collect();
    Ok(MatTuple { n: x.n + y.n, mats })
}

/// `Y ⊕ ... ⊕ Y` with `m` summands.
pub fn direct_sum_copies<S: Scalar>(y: &MatTuple<S>, m: usize) -> Result<MatTuple<S>> {
    if m < 1 {
        return Err(NcError::argument("need at least one direct summand"));
    }
    Ok(MatTuple { n: y.n * m, mats: y.mats.iter().map(|a| a.direct_sum_copies(m)).collect() })
}

/// Per coordinate `[[X_j, Z_j], [0, Y_j]]`.
pub fn upper_block<S: Scalar>(x: &MatTuple<S>, z: &RectTuple<S>, y: &MatTuple<S>) -> Result<MatTuple<S>> {
    bidiagonal(&[x.clone(), y.clone()], std::slice::from_ref(z))
}

/// Per coordinate `[[X_j, 0], [Z_j, Y_j]]`; `Z` is `m x n`.
pub fn lower_block<S: Scalar>(x: &MatTuple<S>, z: &RectTuple<S>, y: &MatTuple<S>) -> Result<MatTuple<S>> {
    same_d(&x.mats, &y.mats)?;
    same_d(&x.mats, &z.mats)?;
    if z.rows != y.n || z.cols != x.n {
        return Err(NcError::argument(format!(
            "lower block must be {}x{}, found {}x{}",
            y.n, x.n, z.rows, z.cols
        )));
    }
    let n = x.n + y.n;
    let mats = (0..x.d())
        .map(|j| {
            let mut m = Matrix::zeros(n, n);
            m.set_block(0, 0, &x.mats[j]);
            m.set_block(x.n, 0, &z.mats[j]);
            m.set_block(x.n, x.n, &y.mats[j]);
            m
        })
        .collect();
    Ok(MatTuple { n, mats })
}

/// Block upper bidiagonal tuple with `diags` on the diagonal and `supers`
/// on the superdiagonal; `supers[k]` must be `n_k x n_{k+1}`.
pub fn bidiagonal<S: Scalar>(diags: &[MatTuple<S>], supers: &[RectTuple<S>]) -> Result<MatTuple<S>> {
    let first = diags.first().ok_or_else(|| NcError::argument("bidiagonal needs a diagonal block"))?;
    if supers.len() + 1 != diags.len() {
        return Err(NcError::argument(format!(
            "{} diagonal blocks need {} superdiagonal blocks, found {}",
            diags.len(),
            diags.len() - 1,
            supers.len()
        )));
    }
    let d = first.d();
    for x in diags {
        same_d(&first.mats, &x.mats)?;
    }
    for (k, z) in supers.iter().enumerate() {
        if z.d() != d {
            return Err(NcError::argument("superdiagonal tuple has the wrong d"));
        }
        if z.rows != diags[k].n || z.cols != diags[k + 1].n {
            return Err(NcError::argument(format!(
                "superdiagonal block {k} must be {}x{}, found {}x{}",
                diags[k].n,
                diags[k + 1].n,
                z.rows,
                z.cols
            )));
        }
    }
    let offsets: Vec<usize> = diags
        .iter()
        .scan(0, |acc, x| {
            let o = *acc;
            *acc += x.n;
            Some(o)
        })
        .collect();
    let n: usize = diags.iter().map(|x| x.n).sum();
    let mats = (0..d)
        .map(|j| {
            let mut m = Matrix::zeros(n, n);
            for (k, x) in diags.iter().enumerate() {
                m.set_block(offsets[k], offsets[k], &x.mats[j]);
            }
            for (k, z) in supers.iter().enumerate() {
                m.set_block(offsets[k], offsets[k + 1], &z.mats[j]);
            }
            m
        })
        .collect();
    Ok(MatTuple { n, mats })
}

/// Block `(i, j)` (0-based) of `m` under the given row and column partitions.
pub fn block_extract<S: Scalar>(
    m: &Matrix<S>,
    row_partition: &[usize],
    col_partition: &[usize],
    i: usize,
    j: usize,
) -> Result<Matrix<S>> {
    if row_partition.iter().sum::<usize>() != m.rows() || col_partition.iter().sum::<usize>() != m.cols() {
        return Err(NcError::argument("partition does not match the matrix shape"));
    }
    if i >= row_partition.len() || j >= col_partition.len() {
        return Err(NcError::argument(format!("block index ({i}, {j}) out of range")));
    }
    let r0 = row_partition[..i].iter().sum();
    let c0 = col_partition[..j].iter().sum();
    Ok(m.block(r0, c0, row_partition[i], col_partition[j]))
}

/// Per-coordinate [`block_extract`].
pub fn block_extract_tuple<S: Scalar>(
    x: &MatTuple<S>,
    row_partition: &[usize],
    col_partition: &[usize],
    i: usize,
    j: usize,
) -> Result<RectTuple<S>> {
    let mats = x
        .mats
        .iter()
        .map(|m| block_extract(m, row_partition, col_partition, i, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(RectTuple { rows: row_partition[i], cols: col_partition[j], mats })
}

/// Elementary tensor `A^1 ⊗ ... ⊗ A^l` of `s x s` matrices.
#[derive(Clone, PartialEq, Debug)]
pub struct TensorTerm<S> {
    pub factors: Vec<Matrix<S>>,
}

impl<S: Scalar> TensorTerm<S> {
    pub fn concat(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        TensorTerm { factors }
    }

    /// Coordinates in the matrix-unit basis, first factor most significant.
    pub fn dense(&self, s: usize) -> Vec<S> {
        let mut out = vec![S::one()];
        for f in &self.factors {
            out = tensor_extend(&out, f, s);
        }
        out
    }
}

/// `m x m` grid over `(R^{s x s})^{⊗ l}`, each entry a list of elementary
/// tensors. Terms are not merged.
#[derive(Clone, PartialEq, Debug)]
pub struct FauxTensorMatrix<S> {
    pub s: usize,
    pub m: usize,
    pub degree: usize,
    /// Row-major, `m * m` entries.
    pub entries: Vec<Vec<TensorTerm<S>>>,
}

impl<S: Scalar> FauxTensorMatrix<S> {
    /// Views an `s m x s m` matrix as a degree-one faux matrix; zero blocks
    /// get an empty term list.
    pub fn from_matrix(z: &Matrix<S>, s: usize) -> Result<Self> {
        let m = blocks_per_side(z.rows(), s)?;
        let entries = (0..m * m)
            .map(|idx| {
                let b = z.block((idx / m) * s, (idx % m) * s, s, s);
                if b.is_zero() {
                    Vec::new()
                } else {
                    vec![TensorTerm { factors: vec![b] }]
                }
            })
            .collect();
        Ok(FauxTensorMatrix { s, m, degree: 1, entries })
    }

    pub fn entry(&self, i: usize, j: usize) -> &[TensorTerm<S>] {
        &self.entries[i * self.m + j]
    }

    pub fn is_zero(&self) -> bool {
        self.to_dense().is_zero()
    }

    /// Applies `f` to every term and sums blockwise into an `s m x s m` matrix.
    pub fn contract(&self, f: impl Fn(&TensorTerm<S>) -> Matrix<S>) -> Matrix<S> {
        let (s, m) = (self.s, self.m);
        let mut out = Matrix::zeros(s * m, s * m);
        for i in 0..m {
            for j in 0..m {
                let mut acc = Matrix::zeros(s, s);
                for t in self.entry(i, j) {
                    acc.add_assign(&f(t));
                }
                out.set_block(i * s, j * s, &acc);
            }
        }
        out
    }

    pub fn to_dense(&self) -> DenseFauxMatrix<S> {
        let len = (self.s * self.s).pow(self.degree as u32);
        let entries = self
            .entries
            .iter()
            .map(|terms| {
                let mut acc = vec![S::zero(); len];
                for t in terms {
                    for (a, b) in acc.iter_mut().zip(t.dense(self.s)) {
                        *a += &b;
                    }
                }
                acc
            })
            .collect();
        DenseFauxMatrix { s: self.s, m: self.m, degree: self.degree, entries }
    }
}

/// `A ⊙_s B`: matrix product whose entry products concatenate tensors.
pub fn odot<S: Scalar>(a: &FauxTensorMatrix<S>, b: &FauxTensorMatrix<S>) -> Result<FauxTensorMatrix<S>> {
    if a.s != b.s || a.m != b.m {
        return Err(NcError::argument("faux product needs equal block size and dimension"));
    }
    let m = a.m;
    let mut entries = Vec::with_capacity(m * m);
    for i in 0..m {
        for k in 0..m {
            let mut terms = Vec::new();
            for j in 0..m {
                for ta in a.entry(i, j) {
                    for tb in b.entry(j, k) {
                        terms.push(ta.concat(tb));
                    }
                }
            }
            entries.push(terms);
        }
    }
    Ok(FauxTensorMatrix { s: a.s, m, degree: a.degree + b.degree, entries })
}

/// `Z_{i1} ⊙_s ... ⊙_s Z_{il}` for `w = g_{i1} ... g_{il}`, `l >= 1`.
pub fn nc_power_word<S: Scalar>(z: &MatTuple<S>, s: usize, w: &Word) -> Result<FauxTensorMatrix<S>> {
    if w.is_empty() {
        return Err(NcError::argument("faux powers are defined for non-empty words"));
    }
    w.check(z.d())?;
    let letters = w.letters();
    let mut acc = FauxTensorMatrix::from_matrix(z.coord(letters[0] - 1), s)?;
    for &l in &letters[1..] {
        acc = odot(&acc, &FauxTensorMatrix::from_matrix(z.coord(l - 1), s)?)?;
    }
    Ok(acc)
}

/// A faux matrix with each entry expanded in the matrix-unit basis of
/// `(R^{s x s})^{⊗ l}`: `(s^2)^l` coordinates, first factor most significant.
#[derive(Clone, PartialEq, Debug)]
pub struct DenseFauxMatrix<S> {
    pub s: usize,
    pub m: usize,
    pub degree: usize,
    pub entries: Vec<Vec<S>>,
}

impl<S: Scalar> DenseFauxMatrix<S> {
    /// The degree-zero "identity": the unit tensor on the diagonal.
    pub fn unit(s: usize, m: usize) -> Self {
        let entries = (0..m * m)
            .map(|idx| vec![if idx / m == idx % m { S::one() } else { S::zero() }])
            .collect();
        DenseFauxMatrix { s, m, degree: 0, entries }
    }

    pub fn entry(&self, i: usize, j: usize) -> &[S] {
        &self.entries[i * self.m + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.iter().all(S::is_zero))
    }

    /// `self ⊙_s Z` for an `s m x s m` matrix `Z` of degree one.
    pub fn odot_matrix(&self, z: &Matrix<S>) -> Self {
        let (s, m) = (self.s, self.m);
        let len = (s * s).pow(self.degree as u32 + 1);
        let blocks: Vec<Matrix<S>> = (0..m * m).map(|idx| z.block((idx / m) * s, (idx % m) * s, s, s)).collect();
        let mut entries = vec![vec![S::zero(); len]; m * m];
        for i in 0..m {
            for j in 0..m {
                let left = self.entry(i, j);
                if left.iter().all(S::is_zero) {
                    continue;
                }
                for k in 0..m {
                    let b = &blocks[j * m + k];
                    if b.is_zero() {
                        continue;
                    }
                    let ext = tensor_extend(left, b, s);
                    for (a, e) in entries[i * m + k].iter_mut().zip(ext) {
                        *a += &e;
                    }
                }
            }
        }
        DenseFauxMatrix { s, m, degree: self.degree + 1, entries }
    }
}

/// `t ⊗ b` in coordinates: index `idx * s^2 + (a s + c)`.
fn tensor_extend<S: Scalar>(t: &[S], b: &Matrix<S>, s: usize) -> Vec<S> {
    let s2 = s * s;
    let mut out = vec![S::zero(); t.len() * s2];
    for (idx, x) in t.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (u, y) in b.entries().iter().enumerate() {
            if !y.is_zero() {
                out[idx * s2 + u] = x.mul_ref(y);
            }
        }
    }
    out
}

/// Dense faux power of `z` along `w`; the empty word gives the unit.
pub fn dense_power_word<S: Scalar>(z: &MatTuple<S>, s: usize, w: &Word) -> Result<DenseFauxMatrix<S>> {
    w.check(z.d())?;
    let m = blocks_per_side(z.n(), s)?;
    let mut acc = DenseFauxMatrix::unit(s, m);
    for &l in w.letters() {
        acc = acc.odot_matrix(z.coord(l - 1));
    }
    Ok(acc)
}

pub(crate) fn blocks_per_side(n: usize, s: usize) -> Result<usize> {
    if s == 0 || n % s != 0 {
        return Err(NcError::argument(format!("size {n} is not a multiple of the block size {s}")));
    }
    Ok(n / s)
}

/// Smallest `κ <= m` with `(X - ⊕Y)^{⊙_s w} = 0` for every `|w| = κ`, where
/// `m = n / s`; `None` if there is none.
pub fn is_jointly_nilpotent<S: Scalar>(x: &MatTuple<S>, s: usize, y: &MatTuple<S>) -> Result<Option<usize>> {
    if y.n() != s {
        return Err(NcError::argument(format!("center must have size {s}, found {}", y.n())));
    }
    let m = blocks_per_side(x.n(), s)?;
    if m == 0 {
        return Ok(Some(1));
    }
    let diff = x.sub(&direct_sum_copies(y, m)?)?;
    // Live prefixes: words up to the current length whose power is nonzero.
    let mut live = vec![DenseFauxMatrix::unit(s, m)];
    for kappa in 1..=m {
        let mut next = Vec::new();
        for p in &live {
            for j in 0..diff.d() {
                let q = p.odot_matrix(diff.coord(j));
                if !q.is_zero() {
                    next.push(q);
                }
            }
        }
        if next.is_empty() {
            return Ok(Some(kappa));
        }
        live = next;
    }
    Ok(None)
}

/// Every word of length `l` together with its nonzero dense faux power.
pub fn nonzero_powers_of_length<S: Scalar>(
    z: &MatTuple<S>,
    s: usize,
    l: usize,
) -> Result<Vec<(Word, DenseFauxMatrix<S>)>> {
    let mut out = Vec::new();
    for w in words_of_length(z.d(), l)? {
        let p = dense_power_word(z, s, &w)?;
        if !p.is_zero() {
            out.push((w, p));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn int_matrix(rows: usize, cols: usize, vals: &[i64]) -> Matrix<Rational> {
        Matrix::from_fn(rows, cols, |i, j| q(vals[i * cols + j]))
    }

    fn jordan(n: usize) -> Matrix<Rational> {
        Matrix::from_fn(n, n, |i, j| if j == i + 1 { q(1) } else { q(0) })
    }

    #[test]
    fn direct_sums() {
        let a = MatTuple::scalars(vec![q(1)]).unwrap();
        let b = MatTuple::scalars(vec![q(2)]).unwrap();
        assert_eq!(direct_sum(&a, &b).unwrap().coord(0), &int_matrix(2, 2, &[1, 0, 0, 2]));
        let empty = MatTuple::<Rational>::zeros(1, 0);
        assert_eq!(direct_sum(&a, &empty).unwrap(), a);
        let big = MatTuple::<Rational>::zeros(1, 3);
        assert_eq!(direct_sum(&MatTuple::zeros(1, 2), &big).unwrap().n(), 5);
        assert!(direct_sum(&a, &MatTuple::zeros(2, 1)).is_err());
    }

    #[test]
    fn direct_sum_copies_of_scalar() {
        let mu = MatTuple::scalars(vec![q(3), q(-1)]).unwrap();
        let y = direct_sum_copies(&mu, 4).unwrap();
        assert_eq!(y.coord(0), &Matrix::scalar(4, q(3)));
        assert_eq!(y.coord(1), &Matrix::scalar(4, q(-1)));
        assert_eq!(direct_sum_copies(&mu, 1).unwrap(), mu);
        assert!(direct_sum_copies(&mu, 0).is_err());
    }

    #[test]
    fn block_triangles() {
        let x = MatTuple::scalars(vec![q(1)]).unwrap();
        let y = MatTuple::scalars(vec![q(2)]).unwrap();
        let z = RectTuple::new(1, 1, vec![int_matrix(1, 1, &[5])]).unwrap();
        let up = upper_block(&x, &z, &y).unwrap();
        assert_eq!(up.coord(0), &int_matrix(2, 2, &[1, 5, 0, 2]));
        let low = lower_block(&x, &z, &y).unwrap();
        assert_eq!(low.coord(0), &int_matrix(2, 2, &[1, 0, 5, 2]));
        assert_eq!(block_extract_tuple(&up, &[1, 1], &[1, 1], 0, 1).unwrap(), z);
        assert!(block_extract(up.coord(0), &[1, 1], &[1, 1], 1, 0).unwrap().is_zero());
        assert_eq!(block_extract(up.coord(0), &[2], &[2], 0, 0).unwrap(), *up.coord(0));
        assert!(block_extract(up.coord(0), &[1, 1], &[1, 1], 2, 0).is_err());
        let zero = RectTuple::zeros(1, 1, 1);
        assert_eq!(upper_block(&x, &zero, &y).unwrap(), direct_sum(&x, &y).unwrap());
        let wrong = RectTuple::zeros(1, 2, 1);
        assert!(upper_block(&x, &wrong, &y).is_err());
    }

    #[test]
    fn bidiagonal_layout() {
        let pts: Vec<_> = (0..3).map(|k| MatTuple::scalars(vec![q(10 + k)]).unwrap()).collect();
        let zs: Vec<_> = (1..3).map(|k| RectTuple::new(1, 1, vec![int_matrix(1, 1, &[k])]).unwrap()).collect();
        let b = bidiagonal(&pts, &zs).unwrap();
        assert_eq!(b.coord(0), &int_matrix(3, 3, &[10, 1, 0, 0, 11, 2, 0, 0, 12]));
        assert_eq!(bidiagonal(&pts[..1], &[]).unwrap(), pts[0]);
        assert!(bidiagonal(&pts, &zs[..1]).is_err());
    }

    #[test]
    fn faux_scalar_product() {
        let a = FauxTensorMatrix::from_matrix(&int_matrix(1, 1, &[2]), 1).unwrap();
        let b = FauxTensorMatrix::from_matrix(&int_matrix(1, 1, &[3]), 1).unwrap();
        let c = odot(&a, &b).unwrap();
        assert_eq!(c.degree, 2);
        assert_eq!(c.entry(0, 0), &[TensorTerm { factors: vec![int_matrix(1, 1, &[2]), int_matrix(1, 1, &[3])] }]);
    }

    #[test]
    fn faux_power_reproduces_matrix_power() {
        let z = MatTuple::from_mats(vec![int_matrix(3, 3, &[1, 2, 0, -1, 0, 3, 2, 1, 1])]).unwrap();
        let p = nc_power_word(&z, 1, &Word::power(1, 3)).unwrap();
        let collapsed = p.contract(|t| t.factors.iter().fold(Matrix::identity(1), |acc, f| acc.mul(f)));
        assert_eq!(collapsed, z.coord(0).pow(3));
        assert!(nc_power_word(&z, 1, &Word::empty()).is_err());
        assert!(nc_power_word(&z, 2, &Word::letter(1)).is_err());
    }

    #[test]
    fn nilpotency() {
        let n = MatTuple::from_mats(vec![jordan(3)]).unwrap();
        let zero = MatTuple::zeros(1, 1);
        assert_eq!(is_jointly_nilpotent(&n, 1, &zero).unwrap(), Some(3));
        let y = MatTuple::from_mats(vec![int_matrix(2, 2, &[1, 2, 3, 4]), int_matrix(2, 2, &[0, 1, 1, 0])]).unwrap();
        let x = direct_sum_copies(&y, 2).unwrap();
        assert_eq!(is_jointly_nilpotent(&x, 2, &y).unwrap(), Some(1));
        let ident = MatTuple::from_mats(vec![Matrix::<Rational>::identity(2), Matrix::identity(2)]).unwrap();
        assert_eq!(is_jointly_nilpotent(&ident, 1, &MatTuple::zeros(2, 1)).unwrap(), None);
        // Cancelling paths: N^2 = 0 although every entry of N is nonzero.
        let c = MatTuple::from_mats(vec![int_matrix(2, 2, &[1, 1, -1, -1])]).unwrap();
        assert_eq!(is_jointly_nilpotent(&c, 1, &zero).unwrap(), Some(2));
    }

    fn arb_tuple(d: usize, n: usize) -> impl Strategy<Value = MatTuple<Rational>> {
        prop::collection::vec(-2i64..=2, d * n * n).prop_map(move |v| {
            MatTuple::from_mats((0..d).map(|j| int_matrix(n, n, &v[j * n * n..(j + 1) * n * n])).collect())
                .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn graded_faux_sum_collapses(z in arb_tuple(2, 2), l in 1usize..4) {
            // Summing scalar faux powers over all words of length l gives (Z_1 + Z_2)^l.
            let mut total = Matrix::zeros(2, 2);
            for w in words_of_length(2, l).unwrap() {
                let p = nc_power_word(&z, 1, &w).unwrap();
                total.add_assign(&p.contract(|t| t.factors.iter().fold(Matrix::identity(1), |a, f| a.mul(f))));
            }
            let sum = z.coord(0).add(z.coord(1));
            prop_assert_eq!(total, sum.pow(l));
        }

        #[test]
        fn dense_agrees_with_terms(z in arb_tuple(2, 4), letters in prop::collection::vec(1usize..=2, 1..4)) {
            let w = Word::new(letters).unwrap();
            let terms = nc_power_word(&z, 2, &w).unwrap().to_dense();
            prop_assert_eq!(terms, dense_power_word(&z, 2, &w).unwrap());
        }

        #[test]
        fn zero_supers_give_direct_sum(a in arb_tuple(2, 2), b in arb_tuple(2, 1), c in arb_tuple(2, 2)) {
            let zs = [RectTuple::zeros(2, 2, 1), RectTuple::zeros(2, 1, 2)];
            let bd = bidiagonal(&[a.clone(), b.clone(), c.clone()], &zs).unwrap();
            prop_assert_eq!(bd, direct_sum(&direct_sum(&a, &b).unwrap(), &c).unwrap());
        }

        #[test]
        fn direct_sum_associative(a in arb_tuple(1, 1), b in arb_tuple(1, 2), c in arb_tuple(1, 1)) {
            let left = direct_sum(&direct_sum(&a, &b).unwrap(), &c).unwrap();
            let right = direct_sum(&a, &direct_sum(&b, &c).unwrap()).unwrap();
            prop_assert_eq!(left.n(), 4);
            prop_assert_eq!(left, right);
        }

        #[test]
        fn nilpotency_rank_is_tight(seed in any::<u64>()) {
            let x = crate::sample::nilpotent_about(
                &MatTuple::<Rational>::zeros(2, 1),
                4,
                &mut crate::sample::rng(seed),
            );
            let kappa = is_jointly_nilpotent(&x, 1, &MatTuple::zeros(2, 1)).unwrap();
            prop_assert!(kappa.is_some());
            let k = kappa.unwrap();
            for l in [k, k + 1] {
                prop_assert!(nonzero_powers_of_length(&x, 1, l).unwrap().is_empty());
            }
            if k > 1 {
                prop_assert!(!nonzero_powers_of_length(&x, 1, k - 1).unwrap().is_empty());
            }
        }

        #[test]
        fn json_round_trip(z in arb_tuple(3, 2)) {
            prop_assert_eq!(MatTuple::<Rational>::from_json(&z.to_json()).unwrap(), z);
        }
    }
}
