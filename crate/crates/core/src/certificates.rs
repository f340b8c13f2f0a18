//! Dual certificates for the factorization norm
//! `γ_F(A) = min { ‖L‖_F·‖R‖_{1→2} : LR = A }`.
//!
//! A certificate is a feasible point of the dual semidefinite program; its objective
//! value is a proven lower bound on `γ_F(A)`. Only the off-diagonal block `Z` of the
//! symmetric dual variable is stored; verification assembles the block matrix.

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};

/// Default feasibility tolerance, scaled by `1 + ‖Z‖_F` during verification.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Smallest weight accepted as strictly positive.
pub const MIN_WEIGHT: f64 = 1e-12;

/// `γ_F(A) ≥ ‖A‖₁/√m` for `A` with `m` columns.
pub fn gamma_lower(a: &DenseMatrix) -> Result<f64> {
    Ok(linalg::schatten1(a)? / (a.cols() as f64).sqrt())
}

/// `γ_F(A) ≤ ‖A‖_F`, witnessed by `L = A`, `R = I`.
pub fn gamma_upper(a: &DenseMatrix) -> f64 {
    linalg::frobenius_norm(a)
}

/// Dual point `(w, Z)` for an `n×m` workload.
#[derive(Debug, Clone)]
pub struct DualCertificate {
    /// length `n + m`, unit norm, strictly positive, first `n` entries equal
    pub weights: Vec<f64>,
    /// `n×m` off-diagonal block
    pub z: DenseMatrix,
    pub claimed_objective: f64,
}

/// Outcome of [`verify_certificate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verification {
    pub feasible: bool,
    pub objective: f64,
    /// smallest eigenvalue of the assembled constraint matrix
    pub min_eigenvalue: f64,
}

/// Builds the SVD certificate: `w = (1_n/√n ; 1_m/√m)/√2`, `Z = √n·U·Vᵀ`.
/// Its objective is `‖A‖₁/√m`.
pub fn build_svd_certificate(a: &DenseMatrix) -> Result<DualCertificate> {
    let (n, m) = a.shape();
    if linalg::frobenius_norm(a) == 0.0 {
        return Err(Error::InvalidArgument(
            "certificate needs a nonzero matrix".into(),
        ));
    }
    let svd = linalg::svd(a)?;
    let k = svd.singular_values.len();
    let root_n = (n as f64).sqrt();
    let mut z = DenseMatrix::zeros(n, m)?;
    for i in 0..n {
        for j in 0..m {
            let mut acc = 0.0;
            for idx in 0..k {
                acc += svd.u[(i, idx)] * svd.v[(j, idx)];
            }
            z[(i, j)] = root_n * acc;
        }
    }
    let w_left = 1.0 / (2.0 * n as f64).sqrt();
    let w_right = 1.0 / (2.0 * m as f64).sqrt();
    let weights = std::iter::repeat_n(w_left, n)
        .chain(std::iter::repeat_n(w_right, m))
        .collect();
    let claimed_objective = svd.singular_values.iter().sum::<f64>() / (m as f64).sqrt();
    Ok(DualCertificate {
        weights,
        z,
        claimed_objective,
    })
}

/// Dual objective `wᵀ(Â ∘ Ẑ)w = 2·Σ_{i,j} w_i·w_{n+j}·A[i,j]·Z[i,j]`.
pub fn certificate_objective(a: &DenseMatrix, cert: &DualCertificate) -> Result<f64> {
    check_dims(a, cert)?;
    let n = a.rows();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..a.cols() {
            total += cert.weights[i] * cert.weights[n + j] * a[(i, j)] * cert.z[(i, j)];
        }
    }
    Ok(2.0 * total)
}

/// The same objective through `(1/(2√(nm)))·Tr(A·Zᵀ + Aᵀ·Z)`, valid for the uniform
/// weights of [`build_svd_certificate`].
pub fn trace_objective(a: &DenseMatrix, z: &DenseMatrix) -> Result<f64> {
    if a.shape() != z.shape() {
        return Err(Error::Dimension(format!(
            "A is {}x{} but Z is {}x{}",
            a.rows(),
            a.cols(),
            z.rows(),
            z.cols()
        )));
    }
    let (n, m) = a.shape();
    // Tr(A Zᵀ) = Tr(Aᵀ Z) = Σ A∘Z
    let inner: f64 = a.values().iter().zip(z.values()).map(|(x, y)| x * y).sum();
    Ok(2.0 * inner / (2.0 * ((n * m) as f64).sqrt()))
}

fn check_dims(a: &DenseMatrix, cert: &DualCertificate) -> Result<()> {
    let (n, m) = a.shape();
    if cert.z.shape() != (n, m) {
        return Err(Error::Dimension(format!(
            "Z is {}x{} but A is {n}x{m}",
            cert.z.rows(),
            cert.z.cols()
        )));
    }
    if cert.weights.len() != n + m {
        return Err(Error::Dimension(format!(
            "weight vector has length {}, expected {}",
            cert.weights.len(),
            n + m
        )));
    }
    Ok(())
}

fn weights_valid(weights: &[f64], n: usize, tol: f64) -> bool {
    let positive = weights.iter().all(|w| *w >= MIN_WEIGHT);
    let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    let unit = (norm - 1.0).abs() <= tol.max(1e-12);
    let first = weights[0];
    let uniform = weights[..n]
        .iter()
        .all(|w| (w - first).abs() <= tol.max(1e-12) * first.abs().max(1.0));
    positive && unit && uniform
}

/// Checks dual feasibility of `cert` for `A` and evaluates its objective.
///
/// Feasible means the weight vector is unit-norm, entrywise `≥` [`MIN_WEIGHT`], constant
/// on its first `n` entries, and `[[n·I, −Z], [−Zᵀ, I]]` has smallest eigenvalue at
/// least `−tol·(1 + ‖Z‖_F)`.
pub fn verify_certificate(
    a: &DenseMatrix,
    cert: &DualCertificate,
    tol: f64,
) -> Result<Verification> {
    check_dims(a, cert)?;
    let (n, m) = a.shape();
    let block = DenseMatrix::from_fn(n + m, n + m, |i, j| match (i < n, j < n) {
        (true, true) => {
            if i == j {
                n as f64
            } else {
                0.0
            }
        }
        (true, false) => -cert.z[(i, j - n)],
        (false, true) => -cert.z[(j, i - n)],
        (false, false) => {
            if i == j {
                1.0
            } else {
                0.0
            }
        }
    })?;
    let min_eigenvalue = linalg::min_eigenvalue_symmetric(&block)?;
    let scale = 1.0 + linalg::frobenius_norm(&cert.z);
    let feasible = min_eigenvalue >= -tol * scale && weights_valid(&cert.weights, n, tol);
    Ok(Verification {
        feasible,
        objective: certificate_objective(a, cert)?,
        min_eigenvalue,
    })
}

/// Dual point `(β, Y, y)` of the unnormalized dual, used for diagonal workloads.
#[derive(Debug, Clone)]
pub struct DiagonalCertificate {
    pub beta: f64,
    pub y_matrix: DenseMatrix,
    pub y: Vec<f64>,
}

/// Builds `β = 1/2`, `Y = A/(2‖A‖_F)`, `y_i = A[i,i]²/(2‖A‖_F²)` for a square diagonal `A`.
/// Its objective `Tr(AYᵀ) + Tr(AᵀY)` equals `‖A‖_F`, matching [`gamma_upper`].
pub fn build_diagonal_certificate(a: &DenseMatrix) -> Result<DiagonalCertificate> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "diagonal certificate needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    for i in 0..n {
        for j in 0..n {
            if i != j && a[(i, j)] != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "matrix is not diagonal: entry ({i}, {j}) = {}",
                    a[(i, j)]
                )));
            }
        }
    }
    let frob = linalg::frobenius_norm(a);
    if frob == 0.0 {
        return Err(Error::InvalidArgument(
            "certificate needs a nonzero matrix".into(),
        ));
    }
    let y = (0..n)
        .map(|i| a[(i, i)].powi(2) / (2.0 * frob * frob))
        .collect();
    Ok(DiagonalCertificate {
        beta: 0.5,
        y_matrix: a.scale(1.0 / (2.0 * frob)),
        y,
    })
}

/// Feasibility of a [`DiagonalCertificate`]: `β, y ≥ 0`, `β + Σy = 1`, and the Schur
/// complement `Δ(y) − β⁻¹·YᵀY ⪰ −tol`. Returns the objective `Tr(AYᵀ) + Tr(AᵀY)`.
pub fn verify_diagonal_certificate(
    a: &DenseMatrix,
    cert: &DiagonalCertificate,
    tol: f64,
) -> Result<Verification> {
    let n = a.rows();
    if !a.is_square() || cert.y_matrix.shape() != (n, n) || cert.y.len() != n {
        return Err(Error::Dimension(
            "certificate does not match the matrix".into(),
        ));
    }
    let objective = 2.0
        * a.values()
            .iter()
            .zip(cert.y_matrix.values())
            .map(|(x, y)| x * y)
            .sum::<f64>();
    let signs_ok = cert.beta > 0.0 && cert.y.iter().all(|v| *v >= 0.0);
    let sum_ok = (cert.beta + cert.y.iter().sum::<f64>() - 1.0).abs() <= tol;
    let min_eigenvalue = if cert.beta > 0.0 {
        let yty = cert.y_matrix.transpose().matmul(&cert.y_matrix)?;
        let schur = DenseMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { cert.y[i] } else { 0.0 };
            diag - yty[(i, j)] / cert.beta
        })?;
        linalg::min_eigenvalue_symmetric(&schur)?
    } else {
        f64::NEG_INFINITY
    };
    Ok(Verification {
        feasible: signs_ok && sum_ok && min_eigenvalue >= -tol,
        objective,
        min_eigenvalue,
    })
}
