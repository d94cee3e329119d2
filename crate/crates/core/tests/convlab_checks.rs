//! End-to-end checks of the convergence laboratory: projection distances
//! against exact samplers, coherency behavior, and experiment determinism.

use vmm_core::convlab::{projection_distance, CfGrid, CfGridSpec, CoherencySpec};
use vmm_core::linalg::Matrix;
use vmm_core::randindex::ReplicationInputs;
use vmm_core::{
    run_experiment, DataModel, ExperimentConfig, GhParams, GigParams, LimitLaw,
    MixingLaw, MixtureSpec, MvnParams, NormalizationScheme, RandomStream,
    SignConvention, SizeModel,
};

const MASTER: u64 = 20260815;

/// Kolmogorov bound for one-sample distances at level well under 1e-3.
fn ks_tolerance(samples: usize) -> f64 {
    2.2 / (samples as f64).sqrt()
}

#[test]
fn projection_distance_accepts_exact_closed_form_samples() {
    // Draw from the closed-form law itself: every projection distance must
    // sit inside the Kolmogorov band.
    let gh = GhParams::new(
        -0.5,
        1.0,
        1.25f64.sqrt(),
        vec![0.5, 0.0],
        vec![0.0, 0.0],
        Matrix::identity(2),
    )
    .unwrap();
    let target = LimitLaw::Gh(gh.clone());
    let mut stream = RandomStream::from_master(MASTER, &[11]);
    let samples = vmm_core::mixtures::gh_sample(&gh, 100_000, &mut stream);
    let directions = vec![
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![0.6, 0.8],
        vec![-std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
    ];
    let distances = projection_distance(&samples, &target, &directions).unwrap();
    assert_eq!(distances.len(), 4);
    for (u, d) in directions.iter().zip(&distances) {
        assert!(
            *d <= ks_tolerance(samples.len()),
            "direction {u:?}: distance {d}"
        );
    }
}

#[test]
fn projection_distance_detects_a_wrong_law() {
    // The same draws against a target with a different drift must fail the
    // band by a wide margin along the first axis.
    let gh = GhParams::new(
        -0.5,
        1.0,
        1.25f64.sqrt(),
        vec![0.5, 0.0],
        vec![0.0, 0.0],
        Matrix::identity(2),
    )
    .unwrap();
    let wrong = GhParams::new(
        -0.5,
        1.0,
        1.25f64.sqrt(),
        vec![-0.5, 0.0],
        vec![0.0, 0.0],
        Matrix::identity(2),
    )
    .unwrap();
    let mut stream = RandomStream::from_master(MASTER, &[12]);
    let samples = vmm_core::mixtures::gh_sample(&gh, 20_000, &mut stream);
    let distances =
        projection_distance(&samples, &LimitLaw::Gh(wrong), &[vec![1.0, 0.0]])
            .unwrap();
    assert!(distances[0] > 0.1, "distance {} should be large", distances[0]);
}

#[test]
fn degenerate_mixture_projection_matches_gaussian_samples() {
    // Point mass mixing at one reduces the mixture to a plain Gaussian; a
    // Gaussian sampler must pass the projection test.
    let sigma = Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
    let spec = MixtureSpec::new(
        vec![0.0, 0.0],
        vec![0.0, 0.0],
        sigma.clone(),
        MixingLaw::point_mass(1.0).unwrap(),
    )
    .unwrap();
    let params = MvnParams::new(vec![0.0, 0.0], sigma).unwrap();
    let mut stream = RandomStream::from_master(MASTER, &[13]);
    let samples: Vec<Vec<f64>> = (0..100_000)
        .map(|_| vmm_core::mixtures::mvn_sample(&params, &mut stream))
        .collect();
    let directions = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.6, 0.8]];
    let distances =
        projection_distance(&samples, &LimitLaw::Mixture(spec), &directions).unwrap();
    for d in &distances {
        assert!(*d <= ks_tolerance(samples.len()), "distance {d}");
    }
}

#[test]
fn coherency_shrinks_as_the_sample_size_grows() {
    // Uniform-cube data: sample means are only asymptotically normal, so
    // the coherency estimate at n = 10000 must not exceed the one at
    // n = 100 by more than estimator noise.
    let data = DataModel::IidUniformCube { center: vec![0.0, 0.0], half_width: 1.0 };
    let scheme = NormalizationScheme::new(
        1.0,
        vec![0.0, 0.0],
        vec![0.0, 0.0],
        vec![0.0, 0.0],
        SignConvention::PaperMinus,
    )
    .unwrap();
    let size = SizeModel::MixedPoisson(MixingLaw::Gig(
        GigParams::new(0.5, 1.0, 1.0).unwrap(),
    ));
    let grid = CfGrid::build(2, &CfGridSpec::default()).unwrap();
    let mut estimates = Vec::new();
    for (tag, n) in [(21u64, 100u64), (22, 10_000)] {
        let inputs = ReplicationInputs {
            data_model: &data,
            size_model: &size,
            scheme: &scheme,
            n,
            gaussian_exact: true,
        };
        let mut stream = RandomStream::from_master(MASTER, &[tag]);
        let estimate = vmm_core::convlab::coherency_estimator(
            &inputs, &grid, 1000, 10, &mut stream,
        )
        .unwrap();
        estimates.push(estimate);
    }
    assert!(
        estimates[1].estimate <= estimates[0].estimate + estimates[0].noise_bound,
        "coherency grew: {} at n=100 vs {} at n=10000",
        estimates[0].estimate,
        estimates[1].estimate
    );
}

fn small_config() -> ExperimentConfig {
    let data = DataModel::IidGaussian(MvnParams::standard(2).unwrap());
    let size = SizeModel::MixedPoisson(MixingLaw::Gig(
        GigParams::new(-0.5, 1.0, 1.0).unwrap(),
    ));
    let scheme = NormalizationScheme::new(
        1.0,
        vec![0.5, 0.0],
        vec![0.0, 0.0],
        vec![0.0, 0.0],
        SignConvention::PaperMinus,
    )
    .unwrap();
    ExperimentConfig::new(data, size, scheme, vec![50, 200], 2000)
        .unwrap()
        .with_coherency(CoherencySpec { strata: 10, sizes_per_stratum: 50 })
        .unwrap()
        .with_directions(4)
        .unwrap()
}

#[test]
fn experiment_reports_are_identical_across_worker_counts() {
    let config = small_config();
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_experiment(&config, MASTER))
        .unwrap();
    let triple = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| run_experiment(&config, MASTER))
        .unwrap();
    assert_eq!(
        single.report.to_canonical_json(),
        triple.report.to_canonical_json()
    );
}

#[test]
fn experiment_report_has_the_right_shape_and_sane_distances() {
    let config = small_config();
    let outcome = run_experiment(&config, MASTER).unwrap();
    let report = &outcome.report;
    assert_eq!(report.rows.len(), 2);
    assert_eq!(report.master_seed, MASTER);
    assert_eq!(report.directions.len(), 4);
    assert!(!report.projection_note.is_empty());
    assert!(report.rows.windows(2).all(|w| w[0].n < w[1].n));
    for row in &report.rows {
        assert_eq!(row.replications, 2000);
        assert_eq!(row.ks_projection.len(), 4);
        for d in &row.ks_projection {
            assert!((0.0..=1.0).contains(d));
        }
        assert!(row.ks_projection_max <= 1.0);
        assert!(row.ks_mixing <= 1.0);
        assert!(row.cf_gap.is_finite() && row.cf_gap >= 0.0);
        assert!(row.cf_truncation_bound <= config.cf_tail_mass());
        assert!(row.coherency >= 0.0);
        assert!(row.coherency_noise_bound > 0.0);
    }
    // With 2000 replications the distances at n = 200 should already be
    // moderate; this is a loose sanity band, not a convergence claim.
    let last = report.rows.last().unwrap();
    assert!(last.ks_projection_max < 0.1, "{}", last.ks_projection_max);
    assert!(last.ks_mixing < 0.1, "{}", last.ks_mixing);
    assert!(last.cf_gap < 0.15, "{}", last.cf_gap);
}
