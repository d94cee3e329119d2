//! The experiment driver: replications, distances, and report assembly.

use super::cf::{empirical_cf, AccompanyingCf};
use super::coherency::coherency_estimator;
use super::ks::{ks_one_sample, ks_upper_bound, projection_distance};
use super::report::{ConvergenceReport, ExperimentOutcome, ReportRow, PROJECTION_NOTE};
use super::{CfGrid, ExperimentConfig};
use crate::randindex::{run_replication, Replication, ReplicationInputs};
use crate::rng::RandomStream;
use crate::{MixingLaw, Result};
use rayon::prelude::*;
use std::time::Instant;

/// Stream-address tag for replication draws: the full address is
/// `(master_seed, [TAG_REPLICATION, n, replication_index])`.
const TAG_REPLICATION: u64 = 1;
/// Stream-address tag for the coherency estimator at a given `n`.
const TAG_COHERENCY: u64 = 2;

/// Decimation divisor for the sorted-ratio Kolmogorov-Smirnov bound
/// against quadrature-backed mixing laws: the evaluation count stays near
/// this value and the bound exceeds the exact distance by at most
/// `step / replications`.
const MIXING_CDF_EVALS: usize = 5000;

/// Runs the full convergence experiment described by `config`.
///
/// Replications are evaluated in parallel, but every random draw comes
/// from a stream addressed by `(master_seed, tag, n, replication)`, and
/// the parallel collection preserves index order, so the resulting report
/// is a pure function of `(config, master_seed)` — byte-identical across
/// worker counts and runs.
pub fn run_experiment(
    config: &ExperimentConfig,
    master_seed: u64,
) -> Result<ExperimentOutcome> {
    let fingerprint = config.fingerprint();
    let directions = config.projection_directions();
    let limit_law = config.limit_law()?;
    let grid = CfGrid::build(config.scheme().dim(), config.cf_grid())?;
    let mixing_cdf = config.mixing_cdf();
    let replications = config.replications();
    let ks_step = (replications / MIXING_CDF_EVALS).max(1);

    let mut rows = Vec::with_capacity(config.n_grid().len());
    let mut row_wall_ms = Vec::with_capacity(config.n_grid().len());
    for &n in config.n_grid() {
        let started = Instant::now();
        let inputs = ReplicationInputs {
            data_model: config.data_model(),
            size_model: config.size_model(),
            scheme: config.scheme(),
            n,
            gaussian_exact: config.gaussian_exact(),
        };
        let reps: Vec<Replication> = (0..replications as u64)
            .into_par_iter()
            .map(|rep| {
                let mut stream =
                    RandomStream::from_master(master_seed, &[TAG_REPLICATION, n, rep]);
                run_replication(&inputs, &mut stream)
            })
            .collect::<Result<_>>()?;

        let mut ratios: Vec<f64> =
            reps.iter().map(|r| r.n as f64 / r.size as f64).collect();
        ratios.sort_unstable_by(f64::total_cmp);
        let zs: Vec<Vec<f64>> = reps.into_iter().map(|r| r.z).collect();

        let ks_projection = projection_distance(&zs, &limit_law, &directions)?;
        let ks_projection_max = ks_projection.iter().fold(0.0f64, |a, &d| a.max(d));
        let ks_mixing = match config.size_model().limit_mixing() {
            MixingLaw::Gig(_) => ks_upper_bound(&ratios, ks_step, |x| mixing_cdf(x))?,
            _ => ks_one_sample(&ratios, |x| mixing_cdf(x))?,
        };

        let acf = AccompanyingCf::new(
            config.data_model(),
            config.size_model(),
            config.scheme(),
            n,
            config.cf_tail_mass(),
        )?;
        let mut cf_gap = 0.0f64;
        for t in grid.points() {
            let gap = (empirical_cf(&zs, t)? - acf.evaluate(t)?).norm();
            cf_gap = cf_gap.max(gap);
        }

        let mut coherency_stream =
            RandomStream::from_master(master_seed, &[TAG_COHERENCY, n]);
        let coherency = coherency_estimator(
            &inputs,
            &grid,
            config.coherency().sizes_per_stratum,
            config.coherency().strata,
            &mut coherency_stream,
        )?;

        rows.push(ReportRow {
            n,
            replications,
            ks_projection,
            ks_projection_max,
            ks_mixing,
            cf_gap,
            cf_truncation_bound: acf.truncation_bound(),
            coherency: coherency.estimate,
            coherency_noise_bound: coherency.noise_bound,
        });
        row_wall_ms.push(started.elapsed().as_millis() as u64);
    }

    let report = ConvergenceReport {
        config_fingerprint: format!("{fingerprint:016x}"),
        master_seed,
        directions,
        projection_note: PROJECTION_NOTE.to_string(),
        rows,
    };
    report.validate()?;
    Ok(ExperimentOutcome { report, row_wall_ms })
}
