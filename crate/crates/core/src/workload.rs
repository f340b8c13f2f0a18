//! Counting and parity workloads.
//!
//! Dense constructors are provided for cross-checks; the closed-form evaluators never
//! materialize a matrix and are usable for stream lengths up to `2^30` and beyond.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::mechanism::PrivacyBudget;

/// Relative agreement required between the numeric parity spectrum and `C(d, w)`.
const PARITY_CROSS_CHECK: f64 = 1e-9;

/// The continual counting workload on a stream of length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountingWorkload {
    n: usize,
}

impl CountingWorkload {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "stream length must be at least 1".into(),
            ));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> Result<DenseMatrix> {
        counting_matrix(self.n)
    }
}

/// Weight-`w` parity queries over `d` binary attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParityWorkload {
    d: u32,
    w: u32,
}

impl ParityWorkload {
    pub fn new(d: u32, w: u32) -> Result<Self> {
        if w == 0 || w > d {
            return Err(Error::InvalidArgument(format!(
                "parity weight must satisfy 1 <= w <= d, got d={d}, w={w}"
            )));
        }
        if d > 24 {
            return Err(Error::InvalidArgument(format!(
                "d = {d} is too large for a dense workload"
            )));
        }
        Ok(Self { d, w })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn w(&self) -> u32 {
        self.w
    }

    /// Number of queries, `C(d, w)`.
    pub fn queries(&self) -> u64 {
        binomial(self.d as u64, self.w as u64)
    }

    /// Universe size, `2^d`.
    pub fn universe(&self) -> usize {
        1usize << self.d
    }

    /// Subset masks of size `w` in lexicographic order of their sorted element lists.
    /// Element `i` of `{0, …, d−1}` maps to bit `d−1−i`, matching the column encoding.
    pub fn subsets(&self) -> Vec<usize> {
        let d = self.d as usize;
        let w = self.w as usize;
        let mut out = Vec::with_capacity(self.queries() as usize);
        let mut combo: Vec<usize> = (0..w).collect();
        loop {
            out.push(
                combo
                    .iter()
                    .fold(0usize, |mask, &i| mask | (1 << (d - 1 - i))),
            );
            // advance to the next combination
            let mut pos = w;
            while pos > 0 && combo[pos - 1] == d - w + pos - 1 {
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            combo[pos - 1] += 1;
            for k in pos..w {
                combo[k] = combo[k - 1] + 1;
            }
        }
        out
    }

    pub fn matrix(&self) -> Result<DenseMatrix> {
        let subsets = self.subsets();
        DenseMatrix::from_fn(subsets.len(), self.universe(), |r, x| {
            if (subsets[r] & x).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }
        })
    }
}

/// `n×n` lower-triangular all-ones matrix.
pub fn counting_matrix(n: usize) -> Result<DenseMatrix> {
    CountingWorkload::new(n)?;
    DenseMatrix::from_fn(n, n, |i, j| if i >= j { 1.0 } else { 0.0 })
}

/// Inverse of [`counting_matrix`]: 1 on the diagonal, −1 on the first subdiagonal.
pub fn counting_inverse(n: usize) -> Result<DenseMatrix> {
    CountingWorkload::new(n)?;
    DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else if i == j + 1 {
            -1.0
        } else {
            0.0
        }
    })
}

/// `i`-th largest singular value of `M_count` (1-based `i`):
/// `σ_i = 1 / (2 sin((2i−1)π / (4n+2)))`.
pub fn counting_singular_value(n: usize, i: usize) -> Result<f64> {
    CountingWorkload::new(n)?;
    if i == 0 || i > n {
        return Err(Error::InvalidArgument(format!(
            "singular value index {i} outside 1..={n}"
        )));
    }
    let angle = (2 * i - 1) as f64 * PI / (4 * n + 2) as f64;
    Ok(0.5 / angle.sin())
}

/// All singular values of `M_count`, descending.
pub fn counting_spectrum(n: usize) -> Result<Vec<f64>> {
    (1..=n).map(|i| counting_singular_value(n, i)).collect()
}

/// Schatten-1 norm of `M_count` from the closed-form spectrum.
pub fn counting_schatten1(n: usize) -> Result<f64> {
    let spectrum = counting_spectrum(n)?;
    Ok(spectrum.iter().rev().sum())
}

fn lower_bound_core(n: f64) -> f64 {
    let m = 2.0 * n + 1.0;
    2.0 + (m / 5.0).ln() + m.ln() / (2.0 * n)
}

fn upper_bound_core(n: f64) -> f64 {
    1.0 + (4.0 * n / 5.0).ln() / PI
}

fn check_n(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "stream length must be at least 1".into(),
        ));
    }
    Ok(n as f64)
}

/// Closed-form lower bound on `γ_F(M_count)`:
/// `(√n/π)·(2 + ln((2n+1)/5) + ln(2n+1)/(2n))`.
pub fn gamma_lower_bound_count(n: u64) -> Result<f64> {
    let nf = check_n(n)?;
    Ok(nf.sqrt() / PI * lower_bound_core(nf))
}

/// Closed-form upper bound on `γ_F(M_count)`: `√n·(1 + ln(4n/5)/π)`.
pub fn gamma_upper_bound_count(n: u64) -> Result<f64> {
    let nf = check_n(n)?;
    Ok(nf.sqrt() * upper_bound_core(nf))
}

/// Mean-squared error guaranteed by the square-root factorization mechanism:
/// `C²·(1 + ln(4n/5)/π)²`.
pub fn err_upper_bound(n: u64, budget: &PrivacyBudget) -> Result<f64> {
    let nf = check_n(n)?;
    let c = budget.noise_multiplier();
    Ok(c * c * upper_bound_core(nf).powi(2))
}

/// Lower bound on the mean-squared error of any matrix mechanism:
/// `(C²/π²)·(2 + ln((2n+1)/5) + ln(2n+1)/(2n))²`.
pub fn err_lower_bound_matrix_mech(n: u64, budget: &PrivacyBudget) -> Result<f64> {
    let nf = check_n(n)?;
    let c = budget.noise_multiplier();
    Ok(c * c / (PI * PI) * lower_bound_core(nf).powi(2))
}

/// Lower bound on the mean-squared error of any `(ε, δ)`-private continual counter,
/// with prefactor `1/(e^{4ε} − 1)²`.
///
/// The bound is stated for `δ < c/(2e^ε)` with an unspecified absolute constant `c`;
/// that precondition is not checked here.
pub fn err_lower_bound_any_mechanism(n: u64, epsilon: f64) -> Result<f64> {
    lower_bound_with_prefactor(n, epsilon, 4.0)
}

/// Lower bound for mechanisms whose noise is oblivious of the input, with prefactor
/// `1/(e^{2ε} − 1)²`. Same unchecked `δ` precondition as
/// [`err_lower_bound_any_mechanism`].
pub fn err_lower_bound_input_oblivious(n: u64, epsilon: f64) -> Result<f64> {
    lower_bound_with_prefactor(n, epsilon, 2.0)
}

fn lower_bound_with_prefactor(n: u64, epsilon: f64, multiple: f64) -> Result<f64> {
    let nf = check_n(n)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let denom = (multiple * epsilon).exp_m1();
    Ok(lower_bound_core(nf).powi(2) / (denom * denom * PI * PI))
}

/// `2^d × 2^d` Sylvester–Hadamard matrix, `H[r][c] = (−1)^{popcount(r & c)}`.
pub fn hadamard(d: u32) -> Result<DenseMatrix> {
    if d > 24 {
        return Err(Error::InvalidArgument(format!(
            "d = {d} is too large for a dense matrix"
        )));
    }
    let size = 1usize << d;
    DenseMatrix::from_fn(size, size, |r, c| {
        if (r & c).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    })
}

/// The parity workload: rows of the Hadamard matrix indexed by weight-`w` subsets.
pub fn parity_workload(d: u32, w: u32) -> Result<DenseMatrix> {
    ParityWorkload::new(d, w)?.matrix()
}

/// Lower bound `‖S‖₁/√(2^d)` on `γ_F` of the parity workload, which equals `C(d, w)`.
///
/// The Schatten-1 norm is computed numerically from the constructed workload and
/// must agree with the binomial closed form; the exact integer is returned.
pub fn parity_gamma_lower(d: u32, w: u32) -> Result<f64> {
    let workload = ParityWorkload::new(d, w)?;
    let numeric = linalg::schatten1(&workload.matrix()?)? / (workload.universe() as f64).sqrt();
    let exact = workload.queries() as f64;
    if (numeric - exact).abs() > PARITY_CROSS_CHECK * exact {
        return Err(Error::InvalidArgument(format!(
            "numeric parity bound {numeric} disagrees with C({d},{w}) = {exact}"
        )));
    }
    Ok(exact)
}

/// Binomial coefficient `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}
