//! Cross-module invariants, mostly as property tests.

use proptest::prelude::*;

use contcount::certificates::{
    build_diagonal_certificate, build_svd_certificate, gamma_lower, gamma_upper,
    verify_certificate, verify_diagonal_certificate, DEFAULT_TOLERANCE,
};
use contcount::cli::{cmd_ftrl, FtrlArgs};
use contcount::factorization::{build, residual, suboptimality_ratio, FactorizationKind};
use contcount::ftrl::{FtrlConfig, OnlineLearnerState};
use contcount::mechanism::{monte_carlo_mse, MechanismKind, MseEstimate, StreamingCounter};
use contcount::{DenseMatrix, PrivacyBudget};

fn matrix(max_dim: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(|(r, c)| {
        prop::collection::vec(-5.0f64..5.0, r * c)
            .prop_map(move |v| DenseMatrix::new(r, c, v).unwrap())
    })
}

fn budget() -> PrivacyBudget {
    PrivacyBudget::new(1.0, 1e-6).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn svd_certificate_is_feasible_and_tight(a in matrix(12)) {
        prop_assume!(contcount::linalg::frobenius_norm(&a) > 1e-6);
        let cert = build_svd_certificate(&a).unwrap();
        let check = verify_certificate(&a, &cert, DEFAULT_TOLERANCE).unwrap();
        let lower = gamma_lower(&a).unwrap();
        prop_assert!(check.feasible, "min eigenvalue {}", check.min_eigenvalue);
        prop_assert!((check.objective - lower).abs() <= 1e-9 * lower);
        prop_assert!(lower <= gamma_upper(&a) * (1.0 + 1e-12));
    }

    #[test]
    fn diagonal_certificate_pinches(diag in prop::collection::vec(0.05f64..4.0, 1..=12), flips in prop::collection::vec(any::<bool>(), 12)) {
        let signed: Vec<f64> = diag.iter().zip(&flips).map(|(d, f)| if *f { -d } else { *d }).collect();
        let a = DenseMatrix::diagonal(&signed).unwrap();
        let check = verify_diagonal_certificate(&a, &build_diagonal_certificate(&a).unwrap(), DEFAULT_TOLERANCE).unwrap();
        let upper = gamma_upper(&a);
        prop_assert!(check.feasible);
        prop_assert!((check.objective - upper).abs() <= 1e-9 * upper);
    }

    #[test]
    fn ftrl_iterates_stay_in_ball(
        grads in prop::collection::vec(prop::collection::vec(-20.0f64..20.0, 3), 1..64),
        radius in 0.1f64..3.0,
        kappa in 0.1f64..2.0,
        seed in any::<u64>(),
    ) {
        let config = FtrlConfig { horizon: grads.len(), dim: 3, kappa, radius, lambda: None };
        let mut learner = OnlineLearnerState::new(config, budget(), seed).unwrap();
        for g in &grads {
            let theta = learner.step(g).unwrap();
            prop_assert!(theta.iter().map(|v| v * v).sum::<f64>().sqrt() <= radius * (1.0 + 1e-12));
        }
    }

    #[test]
    fn clip_lands_in_ball(g in prop::collection::vec(-100.0f64..100.0, 1..10), kappa in 0.01f64..5.0) {
        let c = contcount::ftrl::clip(&g, kappa);
        prop_assert!(c.iter().map(|v| v * v).sum::<f64>().sqrt() <= kappa * (1.0 + 1e-12));
    }

    #[test]
    fn streaming_matches_dense(bits in prop::collection::vec(0u8..=1, 1..=256), seed in any::<u64>()) {
        let n = bits.len();
        let g = contcount::mechanism::standard_normals(seed, n);
        let mut counter = StreamingCounter::from_standard_normals(budget(), &g).unwrap();
        let fact = build(FactorizationKind::SqrtToeplitz, n).unwrap();
        let x: Vec<f64> = bits.iter().map(|&b| b as f64).collect();
        let c = budget().noise_multiplier() * contcount::linalg::col_norm_1to2(fact.right());
        let noise = fact.left().matvec(&g).unwrap();
        let mut running = 0.0;
        for t in 0..n {
            running += x[t];
            let dense = running + c * noise[t];
            let streamed = counter.step(bits[t]).unwrap();
            prop_assert!((streamed - dense).abs() <= 1e-9 * (1.0 + dense.abs()));
        }
    }
}

#[test]
fn residuals_within_kind_tolerance() {
    for kind in [
        FactorizationKind::SqrtToeplitz,
        FactorizationKind::Binary,
        FactorizationKind::Honaker,
    ] {
        let mut n = 1;
        while n <= 1024 {
            let fact = build(kind, n).unwrap();
            let r = residual(&fact).unwrap();
            assert!(r <= kind.tolerance(n), "{kind:?} n={n}: {r:e}");
            n *= 2;
        }
    }
}

fn within_three_se(est: MseEstimate, expected: f64) -> bool {
    (est.estimate - expected).abs() <= 3.0 * est.std_error
}

#[test]
fn monte_carlo_matches_closed_forms_at_64() {
    let b = budget();
    for (kind, fkind, seed) in [
        (
            MechanismKind::Factorization,
            FactorizationKind::SqrtToeplitz,
            11,
        ),
        (MechanismKind::Binary, FactorizationKind::Binary, 12),
    ] {
        let expected = contcount::factorization::expected_mse(&build(fkind, 64).unwrap(), &b);
        let est = monte_carlo_mse(kind, 64, 20_000, b, seed).unwrap();
        assert!(
            within_three_se(est, expected),
            "{kind:?}: {est:?} vs {expected}"
        );
    }
}

#[test]
fn empirical_ratio_at_1024_respects_suboptimality() {
    let b = budget();
    let binary = monte_carlo_mse(MechanismKind::Binary, 1024, 4000, b, 100).unwrap();
    let sqrt = monte_carlo_mse(MechanismKind::Factorization, 1024, 4000, b, 200_000).unwrap();
    let ratio = binary.estimate / sqrt.estimate;
    let se = ratio
        * ((binary.std_error / binary.estimate).powi(2) + (sqrt.std_error / sqrt.estimate).powi(2))
            .sqrt();
    let floor = suboptimality_ratio(1024).unwrap();
    assert!(
        ratio >= floor - 3.0 * se,
        "ratio {ratio} (se {se}) below {floor}"
    );
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn monte_carlo_independent_of_thread_count() {
    let run = || monte_carlo_mse(MechanismKind::Binary, 16, 500, budget(), 7).unwrap();
    assert_eq!(in_pool(1, run), in_pool(4, run));
}

fn ftrl_args(seeds_count: u64) -> FtrlArgs {
    FtrlArgs {
        n: 2048,
        d: 5,
        eps: 1.0,
        delta: 1e-6,
        seed: 0,
        seeds_count,
        kappa: 1.0,
        radius: 1.0,
        allow_large_epsilon: false,
        out: None,
    }
}

#[test]
fn ftrl_output_independent_of_thread_count() {
    let run = || {
        let mut out = Vec::new();
        cmd_ftrl(&ftrl_args(4), &mut out).unwrap();
        out
    };
    assert_eq!(in_pool(1, run), in_pool(3, run));
}

#[test]
fn ftrl_per_seed_regret_within_slack() {
    let results = cmd_ftrl(&ftrl_args(20), &mut std::io::sink()).unwrap();
    for (seed, r) in &results {
        assert!(
            r.regret <= 1.5 * r.bound,
            "seed {seed}: {} vs {}",
            r.regret,
            r.bound
        );
    }
}
