//! Dense real linear algebra.
//!
//! [`DenseMatrix`] is a plain row-major `f64` matrix. Norms, products and the
//! Toeplitz matvec are implemented here directly; singular value and symmetric
//! eigenvalue decompositions delegate to `faer`.

use std::fmt;
use std::io::{Read, Write};
use std::ops::{Index, IndexMut};
use std::sync::Arc;

use faer::{Mat, MatRef, Side};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Relative cutoff below which singular values are treated as zero by [`pseudoinverse`].
pub const PINV_TOLERANCE: f64 = 1e-12;

/// Absolute asymmetry accepted by [`min_eigenvalue_symmetric`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Row-major real matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major values.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix must have positive dimensions, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Builds a matrix entry by entry.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                values.push(f(i, j));
            }
        }
        Self::new(rows, cols, values)
    }

    /// Builds a matrix from a slice of rows; ragged input is rejected.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, values)
    }

    /// Square diagonal matrix.
    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_fn(
            diag.len(),
            diag.len(),
            |i, j| if i == j { diag[i] } else { 0.0 },
        )
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

    /// Row-major backing storage.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut values = vec![0.0; self.values.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                values[j * self.rows + i] = self[(i, j)];
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            values,
        }
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = vec![0.0; self.rows * rhs.cols];
        for i in 0..self.rows {
            let out_row = &mut out[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        DenseMatrix::new(self.rows, rhs.cols, out)
    }

    /// Matrix-vector product. Each output entry is accumulated left to right over the row.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(0.0, |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    pub fn scale(&self, factor: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Entrywise `self − rhs`.
    pub fn sub(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::Dimension(format!(
                "cannot subtract {}x{} from {}x{}",
                rhs.rows, rhs.cols, self.rows, self.cols
            )));
        }
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            values: self
                .values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Largest absolute entry of `self − rhs`.
    pub fn max_abs_diff(&self, rhs: &DenseMatrix) -> Result<f64> {
        Ok(self
            .sub(rhs)?
            .values
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs())))
    }

    /// Keeps the first `rows` rows and `cols` columns.
    pub fn truncate(&self, rows: usize, cols: usize) -> Result<DenseMatrix> {
        if rows > self.rows || cols > self.cols {
            return Err(Error::Dimension(format!(
                "cannot truncate {}x{} to {rows}x{cols}",
                self.rows, self.cols
            )));
        }
        DenseMatrix::from_fn(rows, cols, |i, j| self[(i, j)])
    }

    fn to_faer(&self) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    fn from_faer(m: MatRef<'_, f64>) -> Result<DenseMatrix> {
        DenseMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Reads a headerless CSV matrix; ragged rows and unparsable fields are errors.
    pub fn read_csv<R: Read>(reader: R) -> Result<DenseMatrix> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let row = record
                .iter()
                .map(|field| {
                    field.parse::<f64>().map_err(|_| {
                        Error::InvalidArgument(format!("row {}: cannot parse {field:?}", i + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Dimension("matrix file is empty".into()));
        }
        DenseMatrix::from_rows(&rows)
    }

    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        for i in 0..self.rows {
            let line = self
                .row(i)
                .iter()
                .map(|v| format!("{v:?}"))
                .collect::<Vec<_>>()
                .join(",");
            writeln!(writer, "{line}")?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.values[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.values[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Singular values sorted in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum(Vec<f64>);

impl SingularSpectrum {
    /// Sorts `values` descending; negative or non-finite entries are rejected.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "singular values must be finite and non-negative".into(),
            ));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest singular value (spectral norm).
    pub fn max(&self) -> f64 {
        self.0.first().copied().unwrap_or(0.0)
    }

    /// Sum of singular values.
    pub fn sum(&self) -> f64 {
        // Smallest first for a slightly more accurate sum.
        self.0.iter().rev().sum()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.0.iter().rev().map(|s| s * s).sum()
    }
}

/// Thin SVD `A = U·diag(s)·Vᵀ` with `k = min(rows, cols)` columns in `U` and `V`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

/// Computes the thin SVD; singular values are not sorted.
pub fn svd(a: &DenseMatrix) -> Result<Svd> {
    let decomposition = a
        .to_faer()
        .thin_svd()
        .map_err(|_| Error::SvdNonConvergence)?;
    let singular_values: Vec<f64> = decomposition.S().column_vector().iter().copied().collect();
    if singular_values.iter().any(|s| !s.is_finite()) {
        return Err(Error::SvdNonConvergence);
    }
    Ok(Svd {
        u: DenseMatrix::from_faer(decomposition.U()).map_err(|_| Error::SvdNonConvergence)?,
        singular_values,
        v: DenseMatrix::from_faer(decomposition.V()).map_err(|_| Error::SvdNonConvergence)?,
    })
}

/// `sqrt(Σ A[i,j]²)`.
pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    a.values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `‖A‖_{1→2}`: the largest Euclidean column norm.
pub fn col_norm_1to2(a: &DenseMatrix) -> f64 {
    let mut sums = vec![0.0; a.cols];
    for i in 0..a.rows {
        for (s, v) in sums.iter_mut().zip(a.row(i)) {
            *s += v * v;
        }
    }
    sums.into_iter().fold(0.0_f64, f64::max).sqrt()
}

/// `‖A‖_{2→∞}`: the largest Euclidean row norm.
pub fn row_norm_2toinf(a: &DenseMatrix) -> f64 {
    (0..a.rows)
        .map(|i| a.row(i).iter().map(|v| v * v).sum::<f64>())
        .fold(0.0_f64, f64::max)
        .sqrt()
}

/// Full descending spectrum with `min(rows, cols)` entries.
pub fn singular_values(a: &DenseMatrix) -> Result<SingularSpectrum> {
    let values = a
        .to_faer()
        .singular_values()
        .map_err(|_| Error::SvdNonConvergence)?;
    SingularSpectrum::new(values.iter().map(|s| s.abs()).collect())
        .map_err(|_| Error::SvdNonConvergence)
}

/// Schatten-1 (trace) norm.
pub fn schatten1(a: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(a)?.sum())
}

/// Moore–Penrose pseudoinverse via SVD, dropping singular values below
/// [`PINV_TOLERANCE`]`·σ_max`.
pub fn pseudoinverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    let Svd {
        u,
        singular_values,
        v,
    } = svd(a)?;
    let sigma_max = singular_values.iter().fold(0.0_f64, |m, s| m.max(*s));
    let cutoff = PINV_TOLERANCE * sigma_max;
    let k = singular_values.len();
    // A⁺ = V · diag(1/σ) · Uᵀ
    let mut out = DenseMatrix::zeros(a.cols, a.rows)?;
    for (idx, &s) in singular_values.iter().enumerate().take(k) {
        if s <= cutoff || s == 0.0 {
            continue;
        }
        let inv = 1.0 / s;
        for i in 0..a.cols {
            let vi = v[(i, idx)] * inv;
            if vi == 0.0 {
                continue;
            }
            for j in 0..a.rows {
                out[(i, j)] += vi * u[(j, idx)];
            }
        }
    }
    Ok(out)
}

/// Largest absolute difference between `H` and `Hᵀ`.
pub fn asymmetry(h: &DenseMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..h.rows {
        for j in (i + 1)..h.cols {
            worst = worst.max((h[(i, j)] - h[(j, i)]).abs());
        }
    }
    worst
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue_symmetric(h: &DenseMatrix) -> Result<f64> {
    if !h.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            h.rows, h.cols
        )));
    }
    let asym = asymmetry(h);
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric(asym));
    }
    h.to_faer()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::EigenNonConvergence)?
        .iter()
        .copied()
        .reduce(f64::min)
        .filter(|v| v.is_finite())
        .ok_or(Error::EigenNonConvergence)
}

/// `y[t] = Σ_{j≤t} coeffs[t−j]·x[j]`, the product of the lower-triangular Toeplitz
/// matrix with first column `coeffs` and `x`.
///
/// Terms are accumulated in increasing `j`, the same order as a dense row-by-vector
/// product, so the result is bit-identical to [`DenseMatrix::matvec`] on the
/// materialized matrix. Cost is `O(n²)`.
pub fn toeplitz_lower_matvec(coeffs: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    check_toeplitz_lengths(coeffs, x)?;
    Ok((0..x.len())
        .map(|t| {
            x[..=t]
                .iter()
                .enumerate()
                .fold(0.0, |acc, (j, xj)| acc + coeffs[t - j] * xj)
        })
        .collect())
}

/// Same product as [`toeplitz_lower_matvec`] computed as a causal convolution with
/// FFTs in `O(n log n)`. Agrees with the direct product to rounding error only.
pub fn toeplitz_lower_matvec_fft(coeffs: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    check_toeplitz_lengths(coeffs, x)?;
    let n = x.len();
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward: Arc<dyn rustfft::Fft<f64>> = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);

    let pad = |v: &[f64]| {
        let mut buf: Vec<Complex<f64>> = v.iter().map(|&r| Complex::new(r, 0.0)).collect();
        buf.resize(size, Complex::new(0.0, 0.0));
        buf
    };
    let mut a = pad(coeffs);
    let mut b = pad(x);
    forward.process(&mut a);
    forward.process(&mut b);
    for (ai, bi) in a.iter_mut().zip(&b) {
        *ai *= bi;
    }
    inverse.process(&mut a);
    let scale = 1.0 / size as f64;
    Ok(a[..n].iter().map(|c| c.re * scale).collect())
}

fn check_toeplitz_lengths(coeffs: &[f64], x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Dimension("Toeplitz product needs n >= 1".into()));
    }
    if coeffs.len() != x.len() {
        return Err(Error::Dimension(format!(
            "coefficient length {} does not match vector length {}",
            coeffs.len(),
            x.len()
        )));
    }
    Ok(())
}

/// Materializes the lower-triangular Toeplitz matrix with first column `coeffs`.
pub fn toeplitz_lower_matrix(coeffs: &[f64]) -> Result<DenseMatrix> {
    let n = coeffs.len();
    DenseMatrix::from_fn(n, n, |i, j| if i >= j { coeffs[i - j] } else { 0.0 })
}
