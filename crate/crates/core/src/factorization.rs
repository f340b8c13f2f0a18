//! Factorizations `M_count = L·R` of the counting matrix.
//!
//! Three constructions are provided:
//!
//! - the square-root factorization `L = R = T(f)`, where `T(f)` is lower-triangular
//!   Toeplitz with `f(0) = 1` and `f(k) = (1 − 1/(2k))·f(k−1)`;
//! - the binary-tree factorization, `R` mapping inputs to dyadic p-sums and `L`
//!   summing the p-sums covering each prefix;
//! - Honaker's reconstruction `L = M_count·R⁺` paired with the binary-tree `R`.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::mechanism::PrivacyBudget;
use crate::workload::counting_matrix;

/// Largest `n` for which dense factors are materialized.
pub const MAX_DENSE_N: usize = 4096;

/// Coefficients `f(0..n)` of the square-root Toeplitz factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzFactor {
    coeffs: Vec<f64>,
}

impl ToeplitzFactor {
    pub fn new(n: usize) -> Result<Self> {
        sqrt_coefficients(n)
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `‖R‖_{1→2}²` of the factor, which is its last row norm (first column).
    pub fn col_norm_sq(&self) -> f64 {
        self.coeffs.iter().rev().map(|f| f * f).sum()
    }

    /// Dense lower-triangular Toeplitz matrix.
    pub fn to_matrix(&self) -> Result<DenseMatrix> {
        check_dense(self.n())?;
        linalg::toeplitz_lower_matrix(&self.coeffs)
    }
}

/// Evaluates `f(k) = (1 − 1/(2k))·f(k−1)`, `f(0) = 1`, for `k < n`.
pub fn sqrt_coefficients(n: usize) -> Result<ToeplitzFactor> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "stream length must be at least 1".into(),
        ));
    }
    let mut coeffs = Vec::with_capacity(n);
    coeffs.push(1.0);
    for k in 1..n {
        let prev = coeffs[k - 1];
        coeffs.push((1.0 - 1.0 / (2.0 * k as f64)) * prev);
    }
    Ok(ToeplitzFactor { coeffs })
}

/// Exact `(2k−1)!!/(2k)!!`.
pub fn double_factorial_ratio(k: u64) -> BigRational {
    let mut num = BigInt::from(1u8);
    let mut den = BigInt::from(1u8);
    for j in 1..=k {
        num *= 2 * j - 1;
        den *= 2 * j;
    }
    BigRational::new(num, den)
}

/// Squared Euclidean norm of row `t` (1-based) of the factor: `Σ_{i<t} f(i)²`.
pub fn factor_row_norm_sq(factor: &ToeplitzFactor, t: usize) -> Result<f64> {
    if t == 0 || t > factor.n() {
        return Err(Error::InvalidArgument(format!(
            "row index {t} outside 1..={}",
            factor.n()
        )));
    }
    Ok(factor.coeffs[..t].iter().rev().map(|f| f * f).sum())
}

/// Upper bound `1 + ln(4t−3)/π` on [`factor_row_norm_sq`], tight at `t = 1`.
///
/// Follows from `f(i)² ≤ 1/(π(i + 1/4))` summed against `∫₀^{t−1} 4/(π(4x+1)) dx`.
pub fn factor_row_norm_bound(t: usize) -> f64 {
    1.0 + ((4 * t) as f64 - 3.0).ln() / PI
}

/// `‖L‖_F² = Σ_t ‖L[t,:]‖²`, accumulated in `O(n)`.
pub fn factor_frobenius_sq(factor: &ToeplitzFactor) -> f64 {
    let mut row = 0.0;
    let mut total = 0.0;
    for f in &factor.coeffs {
        row += f * f;
        total += row;
    }
    total
}

/// Which construction a [`Factorization`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactorizationKind {
    SqrtToeplitz,
    Binary,
    Honaker,
}

impl FactorizationKind {
    /// Residual tolerance `max|LR − M_count|` allowed for this construction.
    pub fn tolerance(&self, n: usize) -> f64 {
        match self {
            FactorizationKind::SqrtToeplitz => 1e-10 * n as f64,
            FactorizationKind::Binary => 0.0,
            FactorizationKind::Honaker => 1e-8,
        }
    }
}

/// Explicit factors `left` (`n×p`) and `right` (`p×n`) of `M_count`.
#[derive(Debug, Clone)]
pub struct Factorization {
    kind: FactorizationKind,
    n: usize,
    left: DenseMatrix,
    right: DenseMatrix,
}

impl Factorization {
    pub fn kind(&self) -> FactorizationKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn left(&self) -> &DenseMatrix {
        &self.left
    }

    pub fn right(&self) -> &DenseMatrix {
        &self.right
    }

    /// Inner dimension `p`.
    pub fn inner_dim(&self) -> usize {
        self.right.rows()
    }
}

fn check_dense(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "stream length must be at least 1".into(),
        ));
    }
    if n > MAX_DENSE_N {
        return Err(Error::TooLarge {
            n,
            limit: MAX_DENSE_N,
        });
    }
    Ok(())
}

/// `L = R = T(f)`.
pub fn sqrt_factorization(n: usize) -> Result<Factorization> {
    check_dense(n)?;
    let factor = sqrt_coefficients(n)?.to_matrix()?;
    Ok(Factorization {
        kind: FactorizationKind::SqrtToeplitz,
        n,
        left: factor.clone(),
        right: factor,
    })
}

/// A node of the binary tree: the 1-based closed interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicNode {
    pub start: usize,
    pub end: usize,
}

impl DyadicNode {
    pub fn level(&self) -> u32 {
        (self.end - self.start + 1).trailing_zeros()
    }
}

/// Nodes of the complete binary tree over `[1, size]` (`size` a power of two) in
/// post-order: children before parents, left before right. This is also the order
/// in which nodes complete while streaming.
pub fn dyadic_nodes_post_order(size: usize) -> Vec<DyadicNode> {
    debug_assert!(size.is_power_of_two());
    let mut nodes = Vec::with_capacity(2 * size - 1);
    for end in 1..=size {
        // the nodes completing at `end` have sizes 1, 2, …, 2^{trailing_zeros(end)}
        for level in 0..=end.trailing_zeros() {
            nodes.push(DyadicNode {
                start: end + 1 - (1 << level),
                end,
            });
        }
    }
    nodes
}

/// Dyadic nodes whose disjoint union is `[1, t]`, one per set bit of `t`.
pub fn prefix_decomposition(t: usize) -> Vec<DyadicNode> {
    let mut out = Vec::with_capacity(t.count_ones() as usize);
    let mut start = 1;
    for level in (0..usize::BITS).rev() {
        if t & (1 << level) != 0 {
            let end = start + (1 << level) - 1;
            out.push(DyadicNode { start, end });
            start = end + 1;
        }
    }
    out
}

/// Binary-tree factorization: `R` is `p×n` with one dyadic-interval indicator row
/// per node (post-order), `L` is `n×p` selecting the nodes that cover `[1, t]`.
///
/// For `n` not a power of two the tree is built over the next power of two and
/// only nodes starting at or before `n` are kept; `L·R = M_count` still holds exactly.
pub fn binary_factorization(n: usize) -> Result<Factorization> {
    check_dense(n)?;
    let size = n.next_power_of_two();
    let nodes: Vec<DyadicNode> = dyadic_nodes_post_order(size)
        .into_iter()
        .filter(|node| node.start <= n)
        .collect();
    let right = DenseMatrix::from_fn(nodes.len(), n, |k, j| {
        let col = j + 1;
        if nodes[k].start <= col && col <= nodes[k].end {
            1.0
        } else {
            0.0
        }
    })?;
    let index: HashMap<(usize, usize), usize> = nodes
        .iter()
        .enumerate()
        .map(|(k, node)| ((node.start, node.end), k))
        .collect();
    let mut left = DenseMatrix::zeros(n, nodes.len())?;
    for t in 1..=n {
        for node in prefix_decomposition(t) {
            left[(t - 1, index[&(node.start, node.end)])] = 1.0;
        }
    }
    Ok(Factorization {
        kind: FactorizationKind::Binary,
        n,
        left,
        right,
    })
}

/// Honaker's reconstruction `L = M_count·R_binary⁺` paired with the binary `R`.
pub fn honaker_factorization(n: usize) -> Result<Factorization> {
    let binary = binary_factorization(n)?;
    let pinv = linalg::pseudoinverse(&binary.right)?;
    let left = counting_matrix(n)?.matmul(&pinv)?;
    Ok(Factorization {
        kind: FactorizationKind::Honaker,
        n,
        left,
        right: binary.right,
    })
}

/// Builds the factorization of the requested kind.
pub fn build(kind: FactorizationKind, n: usize) -> Result<Factorization> {
    match kind {
        FactorizationKind::SqrtToeplitz => sqrt_factorization(n),
        FactorizationKind::Binary => binary_factorization(n),
        FactorizationKind::Honaker => honaker_factorization(n),
    }
}

/// `max|L·R − M_count|`.
pub fn residual(fact: &Factorization) -> Result<f64> {
    fact.left
        .matmul(&fact.right)?
        .max_abs_diff(&counting_matrix(fact.n)?)
}

/// Expected mean-squared error of the Gaussian matrix mechanism with these factors:
/// `C²·‖R‖²_{1→2}·‖L‖²_F / n`.
pub fn expected_mse(fact: &Factorization, budget: &PrivacyBudget) -> f64 {
    let c = budget.noise_multiplier();
    let col = linalg::col_norm_1to2(&fact.right);
    let frob = linalg::frobenius_norm(&fact.left);
    c * c * col * col * frob * frob / fact.n as f64
}

/// Same quantity as [`expected_mse`] for the square-root factorization, computed from
/// the coefficients alone (any `n`).
pub fn sqrt_expected_mse(n: usize, budget: &PrivacyBudget) -> Result<f64> {
    let factor = sqrt_coefficients(n)?;
    let c = budget.noise_multiplier();
    Ok(c * c * factor.col_norm_sq() * factor_frobenius_sq(&factor) / n as f64)
}

/// `Σ_{t=1}^{n} popcount(t)`, which is `‖L_binary‖_F²` at stream length `n`.
pub fn popcount_prefix_sum(n: u64) -> u128 {
    // ones at bit b among 0..=n: full cycles of 2^{b+1} plus the partial tail
    let total = n as u128 + 1;
    (0..64)
        .map(|b| {
            let cycle = 1u128 << (b + 1);
            let half = 1u128 << b;
            (total / cycle) * half + (total % cycle).saturating_sub(half)
        })
        .sum()
}

/// Expected mean-squared error of the binary mechanism with Gaussian node noise,
/// `C²·(1 + log₂ n')·Σ popcount(t) / n` with `n'` the tree size (any `n`).
pub fn binary_expected_mse(n: u64, budget: &PrivacyBudget) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "stream length must be at least 1".into(),
        ));
    }
    let depth = n.next_power_of_two().trailing_zeros() as f64;
    let c = budget.noise_multiplier();
    Ok(c * c * (1.0 + depth) * popcount_prefix_sum(n) as f64 / n as f64)
}

/// Lower bound on the ratio of the binary mechanism's error to the square-root
/// mechanism's: `log₂n·(1 + log₂n) / (2·(1 + ln(4n/5)/π)²)`.
pub fn suboptimality_ratio(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "stream length must be at least 1".into(),
        ));
    }
    let nf = n as f64;
    let log2n = nf.log2();
    let upper = 1.0 + (4.0 * nf / 5.0).ln() / PI;
    Ok(log2n * (1.0 + log2n) / (2.0 * upper * upper))
}

/// Limit of [`suboptimality_ratio`] as `n → ∞`: `π²/(2 ln²2)`.
pub fn suboptimality_limit() -> f64 {
    PI * PI / (2.0 * LN_2 * LN_2)
}
