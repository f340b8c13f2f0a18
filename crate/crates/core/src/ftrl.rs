//! Private follow-the-regularized-leader.
//!
//! Gradient prefix sums are released through the square-root factorization counter,
//! one independent counter per coordinate, and the iterate is the regularized leader
//! `θ_{t+1} = Π_D(−s_t/λ)` where `s_t` is the noisy prefix sum and `Π_D` projects onto
//! the Euclidean ball of radius `D`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::factorization::sqrt_coefficients;
use crate::mechanism::{correlated_noise, seeded_rng, standard_normals, PrivacyBudget};

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rescales `g` onto the ball of radius `kappa` when it lies outside.
pub fn clip(g: &[f64], kappa: f64) -> Vec<f64> {
    let len = norm(g);
    if len <= kappa {
        g.to_vec()
    } else {
        g.iter().map(|x| x * kappa / len).collect()
    }
}

/// Euclidean projection onto the ball of radius `radius`.
pub fn project_ball(theta: &[f64], radius: f64) -> Vec<f64> {
    clip(theta, radius)
}

fn log_factor(n: usize) -> f64 {
    1.0 + (4.0 * n as f64 / 5.0).ln() / PI
}

fn check_params(n: usize, kappa: f64, d: usize, radius: f64) -> Result<()> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument(
            "horizon and dimension must be positive".into(),
        ));
    }
    if !(kappa > 0.0 && radius > 0.0) {
        return Err(Error::InvalidArgument(
            "clip norm and radius must be positive".into(),
        ));
    }
    Ok(())
}

/// Regularization strength minimizing the regret bound, with `D` standing in for
/// `‖θ_opt‖₂`: `λ = sqrt(2n·(1 + ln(4n/5)/π)·(κ² + κ·C·√d)) / D`.
pub fn lambda_star(
    n: usize,
    kappa: f64,
    d: usize,
    budget: &PrivacyBudget,
    radius: f64,
) -> Result<f64> {
    check_params(n, kappa, d, radius)?;
    let c = budget.noise_multiplier();
    let noise_term = kappa * kappa + kappa * c * (d as f64).sqrt();
    Ok((2.0 * n as f64 * log_factor(n) * noise_term).sqrt() / radius)
}

/// Expected-regret bound `D·sqrt((1 + ln(4n/5)/π)·(κ² + κ·C·√d)/(2n))`.
pub fn regret_bound(
    n: usize,
    kappa: f64,
    d: usize,
    budget: &PrivacyBudget,
    radius: f64,
) -> Result<f64> {
    check_params(n, kappa, d, radius)?;
    let c = budget.noise_multiplier();
    let noise_term = kappa * kappa + kappa * c * (d as f64).sqrt();
    Ok(radius * (log_factor(n) * noise_term / (2.0 * n as f64)).sqrt())
}

/// Learner configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtrlConfig {
    pub horizon: usize,
    pub dim: usize,
    /// gradient clip norm κ
    pub kappa: f64,
    /// feasible-ball radius D
    pub radius: f64,
    /// regularization λ; `None` selects [`lambda_star`]
    pub lambda: Option<f64>,
}

/// State of the private learner.
#[derive(Debug, Clone)]
pub struct OnlineLearnerState {
    dim: usize,
    horizon: usize,
    round: usize,
    lambda: f64,
    kappa: f64,
    radius: f64,
    grad_prefix: Vec<f64>,
    /// row-major `horizon × dim`
    noise_matrix: Vec<f64>,
    theta: Vec<f64>,
    budget: PrivacyBudget,
    seed: u64,
}

impl OnlineLearnerState {
    /// Precomputes the noise: column `k` is `C·κ·‖R‖_{1→2}·L·g_k` with `g_k` the
    /// standard normals of seed `seed + k`.
    pub fn new(config: FtrlConfig, budget: PrivacyBudget, seed: u64) -> Result<Self> {
        let FtrlConfig {
            horizon,
            dim,
            kappa,
            radius,
            lambda,
        } = config;
        check_params(horizon, kappa, dim, radius)?;
        let lambda = match lambda {
            Some(l) if l > 0.0 => l,
            Some(l) => {
                return Err(Error::InvalidArgument(format!(
                    "lambda must be positive, got {l}"
                )))
            }
            None => lambda_star(horizon, kappa, dim, &budget, radius)?,
        };
        let factor = sqrt_coefficients(horizon)?;
        let mut noise_matrix = vec![0.0; horizon * dim];
        for k in 0..dim {
            let g = standard_normals(seed.wrapping_add(k as u64), horizon);
            let column = correlated_noise(&factor, budget.noise_multiplier() * kappa, &g)?;
            for (t, z) in column.into_iter().enumerate() {
                noise_matrix[t * dim + k] = z;
            }
        }
        Ok(Self {
            dim,
            horizon,
            round: 0,
            lambda,
            kappa,
            radius,
            grad_prefix: vec![0.0; dim],
            noise_matrix,
            theta: vec![0.0; dim],
            budget,
            seed,
        })
    }

    /// Current iterate `θ_t`.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn budget(&self) -> &PrivacyBudget {
        &self.budget
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Consumes the gradient of round `t`'s loss at [`theta`](Self::theta) and returns
    /// `θ_{t+1}`.
    pub fn step(&mut self, gradient: &[f64]) -> Result<&[f64]> {
        if self.round >= self.horizon {
            return Err(Error::HorizonExceeded(self.horizon));
        }
        if gradient.len() != self.dim {
            return Err(Error::Dimension(format!(
                "gradient of length {} for dimension {}",
                gradient.len(),
                self.dim
            )));
        }
        let clipped = clip(gradient, self.kappa);
        debug_assert!(norm(&clipped) <= self.kappa * (1.0 + 1e-12));
        let noise = &self.noise_matrix[self.round * self.dim..(self.round + 1) * self.dim];
        let leader: Vec<f64> = self
            .grad_prefix
            .iter_mut()
            .zip(&clipped)
            .zip(noise)
            .map(|((s, g), z)| {
                *s += g;
                -(*s + z) / self.lambda
            })
            .collect();
        self.theta = project_ball(&leader, self.radius);
        self.round += 1;
        Ok(&self.theta)
    }
}

/// A convex loss over data points of type `P`.
pub trait Loss<P> {
    fn value(&self, theta: &[f64], point: &P) -> f64;
    fn gradient(&self, theta: &[f64], point: &P) -> Vec<f64>;
}

/// Labelled example with `‖x‖₂ ≤ 1`, `y ∈ {−1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub x: Vec<f64>,
    pub y: f64,
}

/// `ℓ(θ; (x, y)) = ln(1 + exp(−y⟨θ, x⟩))`, 1-Lipschitz when `‖x‖₂ ≤ 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LogisticLoss;

impl Loss<Example> for LogisticLoss {
    fn value(&self, theta: &[f64], p: &Example) -> f64 {
        let margin = p.y * dot(theta, &p.x);
        // ln(1 + e^{−m}) without overflow
        if margin > 0.0 {
            (-margin).exp().ln_1p()
        } else {
            -margin + margin.exp().ln_1p()
        }
    }

    fn gradient(&self, theta: &[f64], p: &Example) -> Vec<f64> {
        let margin = p.y * dot(theta, &p.x);
        // −y·σ(−m)·x
        let weight = -p.y / (1.0 + margin.exp());
        p.x.iter().map(|xi| weight * xi).collect()
    }
}

/// Average loss `(1/n)Σ ℓ(θ; p_i)`.
pub fn average_loss<P, L: Loss<P>>(loss: &L, theta: &[f64], points: &[P]) -> f64 {
    points.iter().map(|p| loss.value(theta, p)).sum::<f64>() / points.len() as f64
}

fn average_gradient<P, L: Loss<P>>(loss: &L, theta: &[f64], points: &[P]) -> Vec<f64> {
    let mut g = vec![0.0; theta.len()];
    for p in points {
        for (acc, gi) in g.iter_mut().zip(loss.gradient(theta, p)) {
            *acc += gi;
        }
    }
    let n = points.len() as f64;
    g.iter_mut().for_each(|v| *v /= n);
    g
}

/// A synthetic logistic-regression stream.
#[derive(Debug, Clone)]
pub struct LogisticTask {
    pub dim: usize,
    pub examples: Vec<Example>,
}

fn unit_ball_point<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
    let len = norm(&dir).max(f64::MIN_POSITIVE);
    let radius = rng.random::<f64>().powf(1.0 / d as f64);
    dir.iter().map(|v| v * radius / len).collect()
}

impl LogisticTask {
    /// `n` points uniform in the unit ball, labelled by a logistic teacher
    /// `P(y = 1) = σ(4⟨w*, x⟩)` with a random unit `w*`.
    pub fn generate(n: usize, d: usize, seed: u64) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidArgument("n and d must be positive".into()));
        }
        let mut rng = seeded_rng(seed);
        let teacher = unit_ball_direction(&mut rng, d);
        let examples = (0..n)
            .map(|_| {
                let x = unit_ball_point(&mut rng, d);
                let p = 1.0 / (1.0 + (-4.0 * dot(&teacher, &x)).exp());
                let y = if rng.random::<f64>() < p { 1.0 } else { -1.0 };
                Example { x, y }
            })
            .collect();
        Ok(Self { dim: d, examples })
    }

    /// Linearly separable data with margin at least `margin` along a random unit
    /// direction; points are rejection-sampled from the unit ball.
    pub fn generate_separable(n: usize, d: usize, margin: f64, seed: u64) -> Result<Self> {
        if n == 0 || d == 0 || !(0.0..1.0).contains(&margin) {
            return Err(Error::InvalidArgument(
                "need n, d > 0 and margin in [0, 1)".into(),
            ));
        }
        let mut rng = seeded_rng(seed);
        let teacher = unit_ball_direction(&mut rng, d);
        let mut examples = Vec::with_capacity(n);
        while examples.len() < n {
            let x = unit_ball_point(&mut rng, d);
            let score = dot(&teacher, &x);
            if score.abs() >= margin {
                examples.push(Example {
                    x,
                    y: score.signum(),
                });
            }
        }
        Ok(Self { dim: d, examples })
    }
}

fn unit_ball_direction<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
    let len = norm(&v).max(f64::MIN_POSITIVE);
    v.iter().map(|x| x / len).collect()
}

/// Result of [`minimize_in_ball`].
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub theta: Vec<f64>,
    pub loss: f64,
    /// norm of the gradient mapping `(θ − Π(θ − η∇))/η` at the returned point
    pub projected_grad_norm: f64,
    pub iterations: usize,
}

/// Minimizes the average loss over the radius-`radius` ball with accelerated projected
/// gradient descent (gradient-based adaptive restart), stopping once the gradient-mapping norm is
/// at most `tol` or after `max_iter` iterations. `smoothness` is an upper bound on
/// the gradient's Lipschitz constant (1/4 for logistic loss with `‖x‖ ≤ 1`).
pub fn minimize_in_ball<P, L: Loss<P>>(
    loss: &L,
    points: &[P],
    dim: usize,
    radius: f64,
    smoothness: f64,
    tol: f64,
    max_iter: usize,
) -> OracleResult {
    let step = 1.0 / smoothness;
    let mapping = |theta: &[f64]| -> (Vec<f64>, f64) {
        let g = average_gradient(loss, theta, points);
        let moved: Vec<f64> = theta.iter().zip(&g).map(|(t, gi)| t - step * gi).collect();
        let next = project_ball(&moved, radius);
        let gm = theta
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b) / step)
            .collect::<Vec<_>>();
        (next, norm(&gm))
    };

    let mut theta = vec![0.0; dim];
    let mut momentum_point = theta.clone();
    let mut t_k = 1.0_f64;
    let mut iterations = 0;
    while iterations < max_iter {
        let (_, gm_norm) = mapping(&theta);
        if gm_norm <= tol {
            break;
        }
        let (next, _) = mapping(&momentum_point);
        // restart when the step opposes the momentum direction
        let opposing: f64 = momentum_point
            .iter()
            .zip(&next)
            .zip(&theta)
            .map(|((y, x1), x0)| (y - x1) * (x1 - x0))
            .sum();
        if opposing > 0.0 {
            t_k = 1.0;
            momentum_point = next.clone();
        } else {
            let t_next = (1.0 + (1.0 + 4.0 * t_k * t_k).sqrt()) / 2.0;
            momentum_point = next
                .iter()
                .zip(&theta)
                .map(|(a, b)| a + (t_k - 1.0) / t_next * (a - b))
                .collect();
            t_k = t_next;
        }
        theta = next;
        iterations += 1;
    }
    let (_, projected_grad_norm) = mapping(&theta);
    OracleResult {
        loss: average_loss(loss, &theta, points),
        theta,
        projected_grad_norm,
        iterations,
    }
}

/// Regret of a run against a fixed comparator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretReport {
    pub avg_loss: f64,
    pub opt_loss: f64,
    pub regret: f64,
    pub bound: f64,
}

/// `(1/n)Σ ℓ(θ_t; p_t) − (1/n)Σ ℓ(θ_opt; p_t)`, where `thetas[t]` is the iterate
/// played against `points[t]`.
pub fn regret<P, L: Loss<P>>(
    loss: &L,
    points: &[P],
    thetas: &[Vec<f64>],
    theta_opt: &[f64],
    bound: f64,
) -> Result<RegretReport> {
    if points.is_empty() || points.len() != thetas.len() {
        return Err(Error::Dimension(format!(
            "{} points against {} iterates",
            points.len(),
            thetas.len()
        )));
    }
    let n = points.len() as f64;
    let avg_loss = points
        .iter()
        .zip(thetas)
        .map(|(p, th)| loss.value(th, p))
        .sum::<f64>()
        / n;
    let opt_loss = average_loss(loss, theta_opt, points);
    Ok(RegretReport {
        avg_loss,
        opt_loss,
        regret: avg_loss - opt_loss,
        bound,
    })
}

/// A finished run: the iterates played and the regret report.
#[derive(Debug, Clone)]
pub struct FtrlRun {
    pub thetas: Vec<Vec<f64>>,
    pub report: RegretReport,
    pub oracle: OracleResult,
}

/// Oracle tolerance for the comparator in [`run_logistic`].
pub const ORACLE_TOLERANCE: f64 = 1e-8;

/// Plays private FTRL over the task's examples in order and reports regret against
/// the in-ball minimizer.
pub fn run_logistic(
    task: &LogisticTask,
    config: FtrlConfig,
    budget: PrivacyBudget,
    seed: u64,
) -> Result<FtrlRun> {
    if config.horizon != task.examples.len() || config.dim != task.dim {
        return Err(Error::Dimension(
            "configuration does not match the task".into(),
        ));
    }
    let mut learner = OnlineLearnerState::new(config, budget, seed)?;
    let loss = LogisticLoss;
    let mut thetas = Vec::with_capacity(config.horizon);
    for example in &task.examples {
        thetas.push(learner.theta().to_vec());
        let g = loss.gradient(learner.theta(), example);
        learner.step(&g)?;
    }
    let oracle = minimize_in_ball(
        &loss,
        &task.examples,
        task.dim,
        config.radius,
        0.25,
        ORACLE_TOLERANCE,
        200_000,
    );
    let bound = regret_bound(
        config.horizon,
        config.kappa,
        config.dim,
        &budget,
        config.radius,
    )?;
    let report = regret(&loss, &task.examples, &thetas, &oracle.theta, bound)?;
    Ok(FtrlRun {
        thetas,
        report,
        oracle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn clip_examples() {
        let c = clip(&[3.0, 4.0], 1.0);
        assert!(close(c[0], 0.6, 1e-15) && close(c[1], 0.8, 1e-15));
        assert_eq!(clip(&[0.3, 0.4], 1.0), vec![0.3, 0.4]);
        assert_eq!(clip(&[0.0, 0.0], 1.0), vec![0.0, 0.0]);
    }

    #[test]
    fn lambda_and_bound_values() {
        let b = PrivacyBudget::noiseless();
        let lam = lambda_star(5, 1.0, 3, &b, 1.0).unwrap();
        assert!(close(lam, (10.0 * log_factor(5)).sqrt(), 1e-12));
        assert!(close(lam, 3.797, 1e-3));
        assert!(close(
            lambda_star(5, 1.0, 3, &b, 2.0).unwrap(),
            lam / 2.0,
            1e-12
        ));

        let bound = regret_bound(5, 1.0, 3, &b, 1.0).unwrap();
        assert!(close(bound, 0.3797, 1e-4));
        assert!(close(
            regret_bound(5, 1.0, 3, &b, 3.0).unwrap(),
            3.0 * bound,
            1e-12
        ));

        let budget = PrivacyBudget::new(1.0, 1e-6).unwrap();
        let mut prev = regret_bound(2, 1.0, 5, &budget, 1.0).unwrap();
        for n in 3..5000 {
            let cur = regret_bound(n, 1.0, 5, &budget, 1.0).unwrap();
            assert!(cur < prev, "n={n}");
            prev = cur;
        }
        assert!(regret_bound(0, 1.0, 5, &budget, 1.0).is_err());
        assert!(lambda_star(5, 1.0, 0, &budget, 1.0).is_err());
    }

    #[test]
    fn noiseless_single_linear_step() {
        let config = FtrlConfig {
            horizon: 3,
            dim: 2,
            kappa: 1.0,
            radius: 0.5,
            lambda: Some(1.0),
        };
        let mut learner = OnlineLearnerState::new(config, PrivacyBudget::noiseless(), 0).unwrap();
        assert_eq!(learner.theta(), &[0.0, 0.0]);
        // unconstrained argmin is (−1, 0); projection onto the 0.5-ball gives (−0.5, 0)
        assert_eq!(learner.step(&[1.0, 0.0]).unwrap(), &[-0.5, 0.0]);
    }

    #[test]
    fn horizon_and_dimension_errors() {
        let config = FtrlConfig {
            horizon: 1,
            dim: 2,
            kappa: 1.0,
            radius: 1.0,
            lambda: Some(1.0),
        };
        let mut learner = OnlineLearnerState::new(config, PrivacyBudget::noiseless(), 0).unwrap();
        assert!(matches!(learner.step(&[1.0]), Err(Error::Dimension(_))));
        learner.step(&[1.0, 0.0]).unwrap();
        assert!(matches!(
            learner.step(&[1.0, 0.0]),
            Err(Error::HorizonExceeded(1))
        ));
    }

    #[test]
    fn noiseless_matches_classical_ftrl() {
        let task = LogisticTask::generate(300, 3, 5).unwrap();
        let config = FtrlConfig {
            horizon: 300,
            dim: 3,
            kappa: 0.5,
            radius: 1.0,
            lambda: Some(7.0),
        };
        let mut learner = OnlineLearnerState::new(config, PrivacyBudget::noiseless(), 1).unwrap();
        let mut prefix = [0.0; 3];
        let mut reference = vec![0.0; 3];
        for ex in &task.examples {
            let g = LogisticLoss.gradient(learner.theta(), ex);
            let reference_g = LogisticLoss.gradient(&reference, ex);
            for (s, gi) in prefix.iter_mut().zip(clip(&reference_g, 0.5)) {
                *s += gi;
            }
            let leader: Vec<f64> = prefix.iter().map(|s| -s / 7.0).collect();
            reference = project_ball(&leader, 1.0);
            let theta = learner.step(&g).unwrap();
            for (a, b) in theta.iter().zip(&reference) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn iterates_stay_in_ball_and_run_is_reproducible() {
        let task = LogisticTask::generate(256, 4, 3).unwrap();
        let config = FtrlConfig {
            horizon: 256,
            dim: 4,
            kappa: 1.0,
            radius: 0.7,
            lambda: None,
        };
        let budget = PrivacyBudget::new(1.0, 1e-6).unwrap();
        let a = run_logistic(&task, config, budget, 9).unwrap();
        let b = run_logistic(&task, config, budget, 9).unwrap();
        assert_eq!(a.thetas, b.thetas);
        assert!(a.thetas.iter().all(|th| norm(th) <= 0.7 + 1e-12));
    }

    #[test]
    fn logistic_loss_is_stable_and_lipschitz() {
        let p = Example {
            x: vec![1.0, 0.0],
            y: 1.0,
        };
        assert!(close(LogisticLoss.value(&[0.0, 0.0], &p), 2f64.ln(), 1e-15));
        assert!(LogisticLoss.value(&[1000.0, 0.0], &p) >= 0.0);
        assert!(close(LogisticLoss.value(&[-1000.0, 0.0], &p), 1000.0, 1e-9));
        assert!(norm(&LogisticLoss.gradient(&[-3.0, 2.0], &p)) <= 1.0);
    }

    #[test]
    fn oracle_on_separable_data() {
        let task = LogisticTask::generate_separable(200, 3, 0.2, 4).unwrap();
        let res = minimize_in_ball(&LogisticLoss, &task.examples, 3, 40.0, 0.25, 1e-8, 200_000);
        assert!(res.loss < 0.1, "loss {}", res.loss);
    }

    #[test]
    fn oracle_symmetric_labels_give_zero() {
        let points = vec![
            Example {
                x: vec![0.5],
                y: 1.0,
            },
            Example {
                x: vec![0.5],
                y: -1.0,
            },
            Example {
                x: vec![-0.3],
                y: 1.0,
            },
            Example {
                x: vec![-0.3],
                y: -1.0,
            },
        ];
        let res = minimize_in_ball(&LogisticLoss, &points, 1, 1.0, 0.25, 1e-8, 10_000);
        assert!(res.theta[0].abs() < 1e-7);
    }

    #[test]
    fn oracle_reaches_stationarity() {
        let task = LogisticTask::generate(500, 5, 8).unwrap();
        let res = minimize_in_ball(&LogisticLoss, &task.examples, 5, 1.0, 0.25, 1e-8, 200_000);
        assert!(
            res.projected_grad_norm <= 1e-8,
            "{}",
            res.projected_grad_norm
        );
    }

    struct Constant;

    impl Loss<()> for Constant {
        fn value(&self, _: &[f64], _: &()) -> f64 {
            0.25
        }

        fn gradient(&self, theta: &[f64], _: &()) -> Vec<f64> {
            vec![0.0; theta.len()]
        }
    }

    #[test]
    fn regret_trivial_cases() {
        let points = vec![(), (), ()];
        let thetas = vec![vec![1.0], vec![-2.0], vec![0.5]];
        let r = regret(&Constant, &points, &thetas, &[0.0], 0.1).unwrap();
        assert_eq!(r.regret, 0.0);

        let ex = vec![Example {
            x: vec![0.2, 0.1],
            y: -1.0,
        }];
        let theta = vec![vec![0.3, -0.4]];
        let r = regret(&LogisticLoss, &ex, &theta, &[0.3, -0.4], 0.0).unwrap();
        assert_eq!(r.regret, 0.0);
        assert_eq!(r.regret, r.avg_loss - r.opt_loss);

        assert!(regret(&Constant, &points, &thetas[..2], &[0.0], 0.1).is_err());
    }
}
