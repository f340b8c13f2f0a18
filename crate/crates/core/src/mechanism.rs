//! Private continual counting mechanisms.
//!
//! All randomness comes from [`ChaCha20Rng`] seeded through `seed_from_u64`, with
//! standard normals drawn by `rand_distr`'s ziggurat sampler. Identical seeds give
//! bit-identical outputs on every platform and thread count.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factorization::{
    self, sqrt_coefficients, Factorization, FactorizationKind, MAX_DENSE_N,
};
use crate::linalg::{self, toeplitz_lower_matvec, toeplitz_lower_matvec_fft};

/// Gaussian-mechanism noise multiplier `C_{ε,δ} = (2/ε)·sqrt(4/9 + ln((1/δ)·sqrt(2/π)))`.
pub fn noise_multiplier(epsilon: f64, delta: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let inner = 4.0 / 9.0 + ((1.0 / delta) * (2.0 / PI).sqrt()).ln();
    Ok(2.0 / epsilon * inner.sqrt())
}

/// An `(ε, δ)` pair together with its noise multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyBudget {
    epsilon: f64,
    delta: f64,
    noise_multiplier: f64,
}

impl PrivacyBudget {
    /// Budget with `0 < ε ≤ 1` and `0 < δ < 1`, the range the error guarantees are stated for.
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        Self::with_options(epsilon, delta, false)
    }

    /// Like [`PrivacyBudget::new`]; `allow_large_epsilon` lifts the `ε ≤ 1` restriction
    /// for exploratory runs.
    pub fn with_options(epsilon: f64, delta: f64, allow_large_epsilon: bool) -> Result<Self> {
        if epsilon > 1.0 && !allow_large_epsilon {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be at most 1 (got {epsilon}); enable the large-epsilon override to continue"
            )));
        }
        let noise_multiplier = noise_multiplier(epsilon, delta)?;
        Ok(Self {
            epsilon,
            delta,
            noise_multiplier,
        })
    }

    /// Budget with `C = 0`. Provides no privacy; mechanisms run with it return exact counts.
    pub fn noiseless() -> Self {
        Self {
            epsilon: f64::INFINITY,
            delta: 0.0,
            noise_multiplier: 0.0,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn noise_multiplier(&self) -> f64 {
        self.noise_multiplier
    }
}

/// The deterministic generator behind every mechanism in this crate.
pub fn seeded_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// First `count` standard normal draws of the stream for `seed`.
pub fn standard_normals(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    StandardNormal.sample_iter(&mut rng).take(count).collect()
}

fn check_bit(x: u8) -> Result<u64> {
    match x {
        0 | 1 => Ok(x as u64),
        other => Err(Error::NotABit(other.to_string())),
    }
}

/// Per-round outputs `a_1..a_t`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoisyOutput(pub Vec<f64>);

impl NoisyOutput {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Continual counter over the square-root factorization with `O(1)` work per round.
///
/// The correlated noise `z = C·‖R‖_{1→2}·L·g` is drawn once at construction, so the
/// released sequence is `M_count·x + z`, which has the same distribution as
/// `L(Rx + y)` with `y ~ N(0, C²‖R‖²_{1→2}·I)`.
#[derive(Debug, Clone)]
pub struct StreamingCounter {
    n: usize,
    t: usize,
    running_sum: u64,
    noise: Vec<f64>,
    budget: PrivacyBudget,
    seed: u64,
}

impl StreamingCounter {
    /// Draws `n` standard normals from `seed` and precomputes the noise.
    pub fn new(n: usize, budget: PrivacyBudget, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "stream length must be at least 1".into(),
            ));
        }
        let g = standard_normals(seed, n);
        let mut counter = Self::from_standard_normals(budget, &g)?;
        counter.seed = seed;
        Ok(counter)
    }

    /// Builds the counter from caller-supplied standard normal draws `g`.
    pub fn from_standard_normals(budget: PrivacyBudget, g: &[f64]) -> Result<Self> {
        let noise = correlated_noise(&sqrt_coefficients(g.len())?, budget.noise_multiplier(), g)?;
        Ok(Self {
            n: g.len(),
            t: 0,
            running_sum: 0,
            noise,
            budget,
            seed: 0,
        })
    }

    /// Consumes `x_t` and returns `Σ_{i≤t} x_i + z[t]`.
    pub fn step(&mut self, x: u8) -> Result<f64> {
        if self.t >= self.n {
            return Err(Error::HorizonExceeded(self.n));
        }
        self.running_sum += check_bit(x)?;
        let out = self.running_sum as f64 + self.noise[self.t];
        self.t += 1;
        Ok(out)
    }

    pub fn horizon(&self) -> usize {
        self.n
    }

    /// Rounds consumed so far.
    pub fn round(&self) -> usize {
        self.t
    }

    pub fn running_sum(&self) -> u64 {
        self.running_sum
    }

    pub fn noise(&self) -> &[f64] {
        &self.noise
    }

    pub fn budget(&self) -> &PrivacyBudget {
        &self.budget
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// `C·‖R‖_{1→2}·L·g` for the square-root factor `L = R`.
///
/// Up to [`MAX_DENSE_N`] the product is the direct `O(n²)` Toeplitz matvec; beyond
/// that it switches to the FFT convolution.
pub(crate) fn correlated_noise(
    factor: &factorization::ToeplitzFactor,
    noise_multiplier: f64,
    g: &[f64],
) -> Result<Vec<f64>> {
    let scale = noise_multiplier * factor.col_norm_sq().sqrt();
    let scaled: Vec<f64> = g.iter().map(|v| v * scale).collect();
    if factor.n() <= MAX_DENSE_N {
        toeplitz_lower_matvec(factor.coeffs(), &scaled)
    } else {
        toeplitz_lower_matvec_fft(factor.coeffs(), &scaled)
    }
}

/// Runs the streaming counter over a whole bit sequence.
pub fn streaming_counter_run(x: &[u8], budget: PrivacyBudget, seed: u64) -> Result<NoisyOutput> {
    let mut counter = StreamingCounter::new(x.len(), budget, seed)?;
    x.iter()
        .map(|&bit| counter.step(bit))
        .collect::<Result<Vec<_>>>()
        .map(NoisyOutput)
}

/// Streaming binary (tree) mechanism with Gaussian noise on every node.
///
/// Each node receives noise with standard deviation `C·sqrt(1 + log₂ n')`, `n'` the
/// tree size. Noise is drawn as nodes complete, which is post-order, so the `k`-th
/// draw belongs to row `k` of the binary factorization's `R`.
#[derive(Debug, Clone)]
pub struct BinaryMechanism {
    n: usize,
    t: usize,
    levels: u32,
    node_std: f64,
    rng: ChaCha20Rng,
    /// exact partial sums of the block currently open at each level
    partial: Vec<u64>,
    /// noisy p-sum of the most recently completed node at each level
    completed: Vec<f64>,
}

impl BinaryMechanism {
    pub fn new(n: usize, budget: PrivacyBudget, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "stream length must be at least 1".into(),
            ));
        }
        let levels = n.next_power_of_two().trailing_zeros() + 1;
        Ok(Self {
            n,
            t: 0,
            levels,
            node_std: budget.noise_multiplier() * (levels as f64).sqrt(),
            rng: seeded_rng(seed),
            partial: vec![0; levels as usize],
            completed: vec![0.0; levels as usize],
        })
    }

    /// Standard deviation of each node's noise.
    pub fn node_std(&self) -> f64 {
        self.node_std
    }

    pub fn step(&mut self, x: u8) -> Result<f64> {
        if self.t >= self.n {
            return Err(Error::HorizonExceeded(self.n));
        }
        let bit = check_bit(x)?;
        self.t += 1;
        let t = self.t;
        for p in &mut self.partial {
            *p += bit;
        }
        for level in 0..=t.trailing_zeros().min(self.levels - 1) {
            let l = level as usize;
            let z: f64 = StandardNormal.sample(&mut self.rng);
            self.completed[l] = self.partial[l] as f64 + self.node_std * z;
            self.partial[l] = 0;
        }
        // [1, t] is covered by the latest completed node at every set bit of t
        Ok((0..self.levels)
            .rev()
            .filter(|level| t & (1 << level) != 0)
            .map(|level| self.completed[level as usize])
            .sum())
    }
}

/// Runs the binary mechanism over a whole bit sequence.
pub fn binary_mechanism_run(x: &[u8], budget: PrivacyBudget, seed: u64) -> Result<NoisyOutput> {
    let mut mech = BinaryMechanism::new(x.len(), budget, seed)?;
    x.iter()
        .map(|&bit| mech.step(bit))
        .collect::<Result<Vec<_>>>()
        .map(NoisyOutput)
}

/// `L(Rx + z)` with `z ~ N(0, C²‖R‖²_{1→2}·I)` drawn from `seed`.
pub fn matrix_mechanism_run(
    fact: &Factorization,
    x: &[f64],
    budget: PrivacyBudget,
    seed: u64,
) -> Result<NoisyOutput> {
    if x.len() != fact.n() {
        return Err(Error::Dimension(format!(
            "input of length {} for a factorization with n = {}",
            x.len(),
            fact.n()
        )));
    }
    let std = budget.noise_multiplier() * linalg::col_norm_1to2(fact.right());
    let z = standard_normals(seed, fact.inner_dim());
    let mut strategy = fact.right().matvec(x)?;
    for (s, zi) in strategy.iter_mut().zip(&z) {
        *s += std * zi;
    }
    fact.left().matvec(&strategy).map(NoisyOutput)
}

/// Mechanisms the Monte-Carlo harness and the CLI know how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MechanismKind {
    /// Streaming square-root factorization counter.
    Factorization,
    /// Streaming binary tree mechanism.
    Binary,
    /// Dense matrix mechanism with Honaker's reconstruction.
    Honaker,
}

impl FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "factorization" => Ok(Self::Factorization),
            "binary" => Ok(Self::Binary),
            "honaker" => Ok(Self::Honaker),
            other => Err(Error::InvalidArgument(format!(
                "unknown mechanism {other:?}"
            ))),
        }
    }
}

/// Runs `kind` on a bit stream. Builds the factorization for [`MechanismKind::Honaker`].
pub fn run_mechanism(
    kind: MechanismKind,
    x: &[u8],
    budget: PrivacyBudget,
    seed: u64,
) -> Result<NoisyOutput> {
    match kind {
        MechanismKind::Factorization => streaming_counter_run(x, budget, seed),
        MechanismKind::Binary => binary_mechanism_run(x, budget, seed),
        MechanismKind::Honaker => {
            let fact = factorization::build(FactorizationKind::Honaker, x.len())?;
            let xs: Vec<f64> = x
                .iter()
                .map(|&b| check_bit(b).map(|v| v as f64))
                .collect::<Result<_>>()?;
            matrix_mechanism_run(&fact, &xs, budget, seed)
        }
    }
}

/// Mean and standard error of a Monte-Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Estimates the mean-squared error `(1/n)·Σ_t (a_t − true_t)²` over `trials` runs.
///
/// The input is fixed to all zeros, which is without loss of generality since every
/// mechanism here adds noise independent of the input. Trial `i` uses seed
/// `seed + i`; per-trial errors are collected in trial order before reduction, so the
/// result does not depend on how rayon schedules the work.
pub fn monte_carlo_mse(
    kind: MechanismKind,
    n: usize,
    trials: usize,
    budget: PrivacyBudget,
    seed: u64,
) -> Result<MseEstimate> {
    if n == 0 || trials == 0 {
        return Err(Error::InvalidArgument(
            "n and trials must be positive".into(),
        ));
    }
    let zeros = vec![0u8; n];
    let honaker = match kind {
        MechanismKind::Honaker => Some(factorization::build(FactorizationKind::Honaker, n)?),
        _ => None,
    };
    let per_trial: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let trial_seed = seed.wrapping_add(i as u64);
            let out = match &honaker {
                Some(fact) => matrix_mechanism_run(fact, &vec![0.0; n], budget, trial_seed)?,
                None => run_mechanism(kind, &zeros, budget, trial_seed)?,
            };
            Ok(out.0.iter().map(|a| a * a).sum::<f64>() / n as f64)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mean = per_trial.iter().sum::<f64>() / trials as f64;
    let std_error = if trials > 1 {
        let var = per_trial.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        (var / trials as f64).sqrt()
    } else {
        0.0
    };
    Ok(MseEstimate {
        estimate: mean,
        std_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::{binary_factorization, sqrt_factorization};
    use crate::workload::counting_matrix;

    fn budget() -> PrivacyBudget {
        PrivacyBudget::new(1.0, 1e-10).unwrap()
    }

    #[test]
    fn noise_multiplier_values() {
        let c = noise_multiplier(1.0, 1e-10).unwrap();
        assert!((c - 9.6425).abs() < 1e-3, "{c}");
        assert_eq!(noise_multiplier(0.5, 1e-10).unwrap(), 2.0 * c);
        // pick δ so that 4/9 + ln(sqrt(2/π)/δ) = 1, then C(2, δ) = 1
        let delta = (2.0 / PI).sqrt() / (5.0f64 / 9.0).exp();
        assert!((noise_multiplier(2.0, delta).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn noise_multiplier_rejects_bad_parameters() {
        assert!(noise_multiplier(0.0, 1e-6).is_err());
        assert!(noise_multiplier(-1.0, 1e-6).is_err());
        assert!(noise_multiplier(1.0, 0.0).is_err());
        assert!(noise_multiplier(1.0, 1.0).is_err());
        assert!(PrivacyBudget::new(2.0, 1e-6).is_err());
        let b = PrivacyBudget::with_options(2.0, 1e-6, true).unwrap();
        assert_eq!(b.noise_multiplier(), noise_multiplier(2.0, 1e-6).unwrap());
    }

    #[test]
    fn noiseless_counter_counts_exactly() {
        let mut counter = StreamingCounter::new(3, PrivacyBudget::noiseless(), 7).unwrap();
        assert!(counter.noise().iter().all(|z| *z == 0.0));
        let out: Vec<f64> = [1, 0, 1]
            .iter()
            .map(|&b| counter.step(b).unwrap())
            .collect();
        assert_eq!(out, vec![1.0, 1.0, 2.0]);
        assert!(matches!(counter.step(1), Err(Error::HorizonExceeded(3))));
    }

    #[test]
    fn counter_rejects_non_bits() {
        let mut counter = StreamingCounter::new(3, budget(), 1).unwrap();
        assert!(matches!(counter.step(2), Err(Error::NotABit(_))));
        assert_eq!(counter.round(), 0);
        assert!(StreamingCounter::new(0, budget(), 1).is_err());
    }

    #[test]
    fn zero_stream_outputs_the_noise() {
        let mut counter = StreamingCounter::new(16, budget(), 11).unwrap();
        let noise = counter.noise().to_vec();
        let out: Vec<f64> = (0..16).map(|_| counter.step(0).unwrap()).collect();
        assert_eq!(out, noise);
    }

    #[test]
    fn counter_is_deterministic() {
        let a = StreamingCounter::new(100, budget(), 42).unwrap();
        let b = StreamingCounter::new(100, budget(), 42).unwrap();
        assert_eq!(a.noise(), b.noise());
        let c = StreamingCounter::new(100, budget(), 43).unwrap();
        assert_ne!(a.noise(), c.noise());
    }

    #[test]
    fn counter_matches_dense_oracle() {
        let n = 64;
        let b = budget();
        let x: Vec<u8> = (0..n).map(|i| ((i * 7 + 3) % 5 < 2) as u8).collect();
        let out = streaming_counter_run(&x, b, 5).unwrap();

        let g = standard_normals(5, n);
        let fact = sqrt_factorization(n).unwrap();
        let scale = b.noise_multiplier() * linalg::col_norm_1to2(fact.right());
        let lg = fact.left().matvec(&g).unwrap();
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let mx = counting_matrix(n).unwrap().matvec(&xf).unwrap();
        for t in 0..n {
            let expected = mx[t] + scale * lg[t];
            assert!((out.values()[t] - expected).abs() <= 1e-9, "t={t}");
        }
    }

    #[test]
    fn large_counter_uses_fft_noise() {
        let n = MAX_DENSE_N + 5;
        let g = standard_normals(3, n);
        let counter = StreamingCounter::from_standard_normals(budget(), &g).unwrap();
        let factor = sqrt_coefficients(n).unwrap();
        let scale = budget().noise_multiplier() * factor.col_norm_sq().sqrt();
        let scaled: Vec<f64> = g.iter().map(|v| v * scale).collect();
        let direct = toeplitz_lower_matvec(factor.coeffs(), &scaled).unwrap();
        for (a, b) in counter.noise().iter().zip(&direct) {
            assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn noiseless_binary_mechanism_counts_exactly() {
        let x = [1u8, 0, 1, 1, 0, 1, 1];
        let out = binary_mechanism_run(&x, PrivacyBudget::noiseless(), 0).unwrap();
        assert_eq!(out.values(), &[1.0, 1.0, 2.0, 3.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn binary_mechanism_matches_dense_tree() {
        for n in [4usize, 8, 13] {
            let b = budget();
            let x: Vec<u8> = (0..n).map(|i| (i % 3 == 0) as u8).collect();
            let out = binary_mechanism_run(&x, b, 9).unwrap();

            let fact = binary_factorization(n).unwrap();
            let p = fact.inner_dim();
            let std = b.noise_multiplier() * linalg::col_norm_1to2(fact.right());
            let y: Vec<f64> = standard_normals(9, p).iter().map(|z| z * std).collect();
            let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
            let mut rx = fact.right().matvec(&xf).unwrap();
            for (r, yi) in rx.iter_mut().zip(&y) {
                *r += yi;
            }
            let dense = fact.left().matvec(&rx).unwrap();
            for (t, (a, b)) in out.values().iter().zip(&dense).enumerate() {
                assert!((a - b).abs() <= 1e-9, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn matrix_mechanism_noiseless_and_dims() {
        let fact = sqrt_factorization(5).unwrap();
        let x = [1.0, 0.0, 1.0, 1.0, 0.0];
        let out = matrix_mechanism_run(&fact, &x, PrivacyBudget::noiseless(), 3).unwrap();
        let exact = counting_matrix(5).unwrap().matvec(&x).unwrap();
        for (a, b) in out.values().iter().zip(&exact) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matrix_mechanism_run(&fact, &[1.0], budget(), 3).is_err());
    }

    #[test]
    fn honaker_runs_end_to_end() {
        let x = [1u8, 1, 0, 1, 0, 0, 1, 1];
        let out = run_mechanism(MechanismKind::Honaker, &x, budget(), 4).unwrap();
        assert_eq!(out.len(), 8);
        assert!(out.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn sqrt_matrix_mechanism_equals_streaming_in_distribution() {
        // L(Rx + z) and M x + L z' share mean and covariance; check the empirical
        // per-round variance of both against C²‖R‖²‖L[t,:]‖².
        let n = 6;
        let b = budget();
        let fact = sqrt_factorization(n).unwrap();
        let zeros = vec![0.0; n];
        let trials = 20_000;
        let mut dense_sq = vec![0.0; n];
        let mut stream_sq = vec![0.0; n];
        for s in 0..trials {
            let d = matrix_mechanism_run(&fact, &zeros, b, s).unwrap();
            let st = streaming_counter_run(&[0; 6], b, s + 1_000_000).unwrap();
            for t in 0..n {
                dense_sq[t] += d.values()[t].powi(2);
                stream_sq[t] += st.values()[t].powi(2);
            }
        }
        let col = linalg::col_norm_1to2(fact.right()).powi(2);
        let c2 = b.noise_multiplier().powi(2);
        for t in 0..n {
            let row: f64 = fact.left().row(t).iter().map(|v| v * v).sum();
            let expected = c2 * col * row;
            for acc in [dense_sq[t], stream_sq[t]] {
                let var = acc / trials as f64;
                assert!(
                    (var / expected - 1.0).abs() < 0.05,
                    "t={t}: {var} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn monte_carlo_trivial_case() {
        let est = monte_carlo_mse(
            MechanismKind::Factorization,
            4,
            1,
            PrivacyBudget::noiseless(),
            0,
        )
        .unwrap();
        assert_eq!(
            est,
            MseEstimate {
                estimate: 0.0,
                std_error: 0.0
            }
        );
        assert!(monte_carlo_mse(MechanismKind::Binary, 0, 10, budget(), 0).is_err());
    }

    #[test]
    fn monte_carlo_deterministic() {
        let a = monte_carlo_mse(MechanismKind::Binary, 8, 500, budget(), 17).unwrap();
        let b = monte_carlo_mse(MechanismKind::Binary, 8, 500, budget(), 17).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn monte_carlo_matches_closed_forms() {
        let b = budget();
        for n in [8usize, 64] {
            let sqrt = monte_carlo_mse(MechanismKind::Factorization, n, 20_000, b, 1).unwrap();
            let expected = factorization::sqrt_expected_mse(n, &b).unwrap();
            assert!(
                (sqrt.estimate - expected).abs() <= 3.0 * sqrt.std_error,
                "sqrt n={n}"
            );
            let bin = monte_carlo_mse(MechanismKind::Binary, n, 20_000, b, 2).unwrap();
            let expected = factorization::binary_expected_mse(n as u64, &b).unwrap();
            assert!(
                (bin.estimate - expected).abs() <= 3.0 * bin.std_error,
                "binary n={n}"
            );
        }
    }

    #[test]
    fn honaker_monte_carlo_beats_binary() {
        let b = budget();
        let h = monte_carlo_mse(MechanismKind::Honaker, 8, 4000, b, 3).unwrap();
        let fact = factorization::build(FactorizationKind::Honaker, 8).unwrap();
        let expected = factorization::expected_mse(&fact, &b);
        assert!((h.estimate - expected).abs() <= 3.0 * h.std_error);
        assert!(expected < factorization::binary_expected_mse(8, &b).unwrap());
    }

    #[test]
    fn mechanism_kind_parsing() {
        assert_eq!(
            "binary".parse::<MechanismKind>().unwrap(),
            MechanismKind::Binary
        );
        assert_eq!(
            "factorization".parse::<MechanismKind>().unwrap(),
            MechanismKind::Factorization
        );
        assert_eq!(
            "honaker".parse::<MechanismKind>().unwrap(),
            MechanismKind::Honaker
        );
        assert!("tree".parse::<MechanismKind>().is_err());
    }
}
