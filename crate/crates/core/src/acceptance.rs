//! End-to-end acceptance checks for the whole numeric stack.
//!
//! Each criterion exercises one guarantee — special-function accuracy,
//! distribution correctness, limit-law convergence, determinism — with its
//! tolerance pinned as a constant next to the code.  The checks run from
//! the `acceptance` integration test target and from the command-line
//! verifier; both print one pass/fail line per criterion.
//!
//! Monte Carlo criteria use a fixed master seed, so a failure is
//! reproducible, never a flake to be rerun away.  The seed and the
//! thresholds can be overridden (the command-line verifier exposes both),
//! but the defaults are the contract.

use crate::convlab::{
    empirical_cf, ks_upper_bound, projection_distance, AccompanyingCf, CfGrid,
    CfGridSpec, ExperimentConfig, LimitLaw,
};
use crate::gig::{gig_cdf, gig_moment, gig_pdf, gig_reciprocal, gig_sample};
use crate::linalg::Matrix;
use crate::mixtures::{gh_pdf, mvn_pdf};
use crate::quad;
use crate::randindex::{run_replication, ReplicationInputs};
use crate::specfun::bessel_k;
use crate::{
    DataModel, GhParams, GigParams, MixingLaw, MixtureSpec, MvnParams,
    NormalizationScheme, RandomStream, Result, SignConvention, SizeModel,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default master seed for every Monte Carlo criterion.
pub const ACCEPTANCE_SEED: u64 = 271_828;

/// Relative tolerance for half-integer Bessel closed forms.
pub const BESSEL_HALF_INTEGER_RTOL: f64 = 1e-10;
/// Relative tolerance for Bessel symmetry and recurrence identities.
pub const BESSEL_IDENTITY_RTOL: f64 = 1e-9;
/// Relative tolerance against quadrature of the Bessel integral kernel.
pub const BESSEL_INTEGRAL_RTOL: f64 = 1e-9;
/// Absolute tolerance for the GIG density normalization defect.
pub const GIG_NORMALIZATION_ATOL: f64 = 1e-8;
/// Kolmogorov-Smirnov tolerance for GIG sampler draws (1e5 per law).
pub const GIG_SAMPLER_KS_TOL: f64 = 0.01;
/// Relative tolerance between moment closed forms and quadrature.
pub const GIG_MOMENT_RTOL: f64 = 1e-8;
/// Kolmogorov-Smirnov tolerance for reciprocal-law draws.
pub const GIG_RECIPROCAL_KS_TOL: f64 = 0.01;
/// Relative tolerance between the closed-form mixture density and direct
/// mixing-integral quadrature.
pub const GH_QUADRATURE_RTOL: f64 = 1e-6;
/// Supremum tolerance for the accompanying characteristic function gap at
/// 1e5 replications (Monte Carlo budget about 0.012 plus headroom).
pub const CF_GAP_TOL: f64 = 0.02;
/// Kolmogorov-Smirnov tolerance for limit-law distances at n = 1e4.
pub const LIMIT_KS_TOL: f64 = 0.02;
/// Required strict decrease of the distances from n = 1e2 to n = 1e4.
pub const DECREASE_MARGIN: f64 = 0.005;
/// Kolmogorov-Smirnov tolerance for the degenerate-size control, where the
/// statistic is exactly Gaussian at every n (1e5 replications).
pub const DEGENERATE_KS_TOL: f64 = 0.01;
/// Standard-error multiple for the skewness sign checks.
pub const SKEWNESS_SE_MULTIPLE: f64 = 3.0;

/// Replication count for limit-law criteria.
const LIMIT_REPLICATIONS: usize = 20_000;
/// Replication count for the characteristic-function and degenerate
/// criteria.
const DENSE_REPLICATIONS: usize = 100_000;
/// Blocks for the block-resampled skewness standard error.
const SKEWNESS_BLOCKS: usize = 100;

/// Acceptance thresholds; the defaults are the pinned constants above.
///
/// Deserializes from a partial document, so an override file may name only
/// the thresholds it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub bessel_half_integer_rtol: f64,
    pub bessel_identity_rtol: f64,
    pub bessel_integral_rtol: f64,
    pub gig_normalization_atol: f64,
    pub gig_sampler_ks_tol: f64,
    pub gig_moment_rtol: f64,
    pub gig_reciprocal_ks_tol: f64,
    pub gh_quadrature_rtol: f64,
    pub cf_gap_tol: f64,
    pub limit_ks_tol: f64,
    pub decrease_margin: f64,
    pub degenerate_ks_tol: f64,
    pub skewness_se_multiple: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            bessel_half_integer_rtol: BESSEL_HALF_INTEGER_RTOL,
            bessel_identity_rtol: BESSEL_IDENTITY_RTOL,
            bessel_integral_rtol: BESSEL_INTEGRAL_RTOL,
            gig_normalization_atol: GIG_NORMALIZATION_ATOL,
            gig_sampler_ks_tol: GIG_SAMPLER_KS_TOL,
            gig_moment_rtol: GIG_MOMENT_RTOL,
            gig_reciprocal_ks_tol: GIG_RECIPROCAL_KS_TOL,
            gh_quadrature_rtol: GH_QUADRATURE_RTOL,
            cf_gap_tol: CF_GAP_TOL,
            limit_ks_tol: LIMIT_KS_TOL,
            decrease_margin: DECREASE_MARGIN,
            degenerate_ks_tol: DEGENERATE_KS_TOL,
            skewness_se_multiple: SKEWNESS_SE_MULTIPLE,
        }
    }
}

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    /// One-line summary of the measured values against the thresholds.
    pub detail: String,
}

/// The criterion ids and names, in execution order.
pub fn criteria() -> Vec<(usize, &'static str)> {
    (1..=10).map(|id| (id, criterion_name(id))).collect()
}

fn criterion_name(id: usize) -> &'static str {
    match id {
        1 => "bessel-k-accuracy",
        2 => "gig-density-sampler-moments",
        3 => "gig-reciprocal-law",
        4 => "gh-density-vs-mixing-quadrature",
        5 => "accompanying-cf-gap",
        6 => "gh-limit-convergence",
        7 => "student-and-variance-gamma-limits",
        8 => "degenerate-size-control",
        9 => "skewness-direction",
        10 => "worker-count-determinism",
        _ => "unknown",
    }
}

/// Runs one criterion with the pinned seed and thresholds.
pub fn run_criterion(id: usize) -> CriterionOutcome {
    run_criterion_with(id, ACCEPTANCE_SEED, &Tolerances::default())
}

/// Runs one criterion under an explicit seed and threshold set; machinery
/// errors are reported as failures rather than panics so the remaining
/// criteria still run.
pub fn run_criterion_with(id: usize, seed: u64, tol: &Tolerances) -> CriterionOutcome {
    let body = match id {
        1 => bessel_accuracy(tol),
        2 => gig_density_sampler_moments(seed, tol),
        3 => gig_reciprocal_law(seed, tol),
        4 => gh_density_vs_quadrature(seed, tol),
        5 => accompanying_cf_gap(seed, tol),
        6 => gh_limit_convergence(seed, tol),
        7 => student_and_variance_gamma(seed, tol),
        8 => degenerate_size_control(seed, tol),
        9 => skewness_direction(seed, tol),
        10 => worker_count_determinism(seed),
        _ => Err(crate::Error::InvalidParams(format!("no criterion {id}"))),
    };
    let (passed, detail) = match body {
        Ok(pair) => pair,
        Err(e) => (false, format!("failed to evaluate: {e}")),
    };
    CriterionOutcome { id, name: criterion_name(id), passed, detail }
}

/// Runs all criteria in order with the pinned seed and thresholds.
pub fn run_all() -> Vec<CriterionOutcome> {
    criteria().iter().map(|&(id, _)| run_criterion(id)).collect()
}

fn rel_err(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)
}

/// Integral of `f` over the positive axis through the substitution
/// `x = e^u`, which turns power-law tails into exponential ones so the
/// expanding-window sweeps certify them.
fn positive_axis_integral<F: Fn(f64) -> f64>(
    f: F,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    let outcome = quad::integrate_expanding(
        |u: f64| {
            let x = u.exp();
            f(x) * x
        },
        -7.0,
        3.0,
        abs_tol,
        rel_tol,
    )?;
    Ok(outcome.value)
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

// --- criterion 1: Bessel K accuracy -----------------------------------

fn bessel_accuracy(tol: &Tolerances) -> Result<(bool, String)> {
    // Half-integer closed forms: K_{1/2}(z) = sqrt(pi/(2z)) e^{-z} and
    // K_{3/2}(z) = sqrt(pi/(2z)) e^{-z} (1 + 1/z), with K_{-nu} = K_nu.
    let mut worst_half = 0.0f64;
    for &z in &log_grid(0.1, 50.0, 100) {
        let base = (std::f64::consts::PI / (2.0 * z)).sqrt() * (-z).exp();
        let half = base;
        let three_half = base * (1.0 + 1.0 / z);
        for (nu, reference) in
            [(0.5, half), (-0.5, half), (1.5, three_half), (-1.5, three_half)]
        {
            worst_half = worst_half.max(rel_err(bessel_k(nu, z)?, reference));
        }
    }

    // Symmetry and the three-term recurrence
    // K_{nu+1}(z) = K_{nu-1}(z) + (2 nu / z) K_nu(z) on a 100-point grid.
    let mut worst_identity = 0.0f64;
    for &nu in &[0.25, 0.8, 1.3, 2.1, 3.7, 5.5, 8.2, 12.9, 20.4, 33.0] {
        for &z in &log_grid(0.1, 50.0, 10) {
            let km = bessel_k(nu - 1.0, z)?;
            let k0 = bessel_k(nu, z)?;
            let kp = bessel_k(nu + 1.0, z)?;
            worst_identity = worst_identity.max(rel_err(bessel_k(-nu, z)?, k0));
            worst_identity =
                worst_identity.max(rel_err(km + 2.0 * nu / z * k0, kp));
        }
    }

    // Direct quadrature of the defining kernel,
    // K_nu(z) = (1/2) integral over t of exp(nu t - z cosh t).
    let mut worst_integral = 0.0f64;
    for &nu in &[0.0, 0.5, 1.0, 2.5, 4.0] {
        for &z in &[0.1, 0.7, 2.0, 8.0, 30.0] {
            let reference = bessel_k(nu, z)?;
            // Bracket the kernel's peak at t = asinh(nu / z); the closed
            // form supplies only the tolerance scale, never the value.
            let peak = (nu / z).asinh();
            let direct = quad::integrate_expanding(
                |t: f64| (nu * t - z * t.cosh()).exp(),
                -(peak.abs() + 6.0),
                peak.abs() + 6.0,
                2.0 * reference * 1e-11,
                1e-11,
            )?
            .value
                / 2.0;
            worst_integral = worst_integral.max(rel_err(reference, direct));
        }
    }

    let passed = worst_half <= tol.bessel_half_integer_rtol
        && worst_identity <= tol.bessel_identity_rtol
        && worst_integral <= tol.bessel_integral_rtol;
    Ok((
        passed,
        format!(
            "half-integer {worst_half:.2e} <= {:.0e}, identities {worst_identity:.2e} \
             <= {:.0e}, integral {worst_integral:.2e} <= {:.0e}",
            tol.bessel_half_integer_rtol,
            tol.bessel_identity_rtol,
            tol.bessel_integral_rtol
        ),
    ))
}

// --- criteria 2 and 3: the GIG family ----------------------------------

/// Twelve laws spanning the two-sided regime, the gamma boundary
/// (mu = 0), and the inverse-gamma boundary (lambda = 0).
fn gig_grid() -> Vec<GigParams> {
    [
        (-0.5, 1.0, 1.0),
        (0.0, 2.0, 1.0),
        (0.5, 1.0, 2.0),
        (2.0, 3.0, 1.0),
        (-2.0, 2.0, 3.0),
        (5.0, 1.0, 1.0),
        (-5.0, 2.0, 0.5),
        (1.5, 0.5, 4.0),
        (1.0, 0.0, 2.0),
        (3.0, 0.0, 1.0),
        (-1.0, 2.0, 0.0),
        (-2.5, 1.0, 0.0),
    ]
    .iter()
    .map(|&(nu, mu, lambda)| {
        GigParams::new(nu, mu, lambda).expect("grid laws are inside the domain")
    })
    .collect()
}

/// Positive moment orders exist on the boundary branches only while the
/// gamma-function arguments stay positive; `false` marks divergence.
fn moment_exists(p: &GigParams, order: f64) -> bool {
    if p.mu() == 0.0 {
        p.nu() + order > 0.0
    } else if p.lambda() == 0.0 {
        -p.nu() - order > 0.0
    } else {
        true
    }
}

fn sampler_ks(p: &GigParams, seed: u64, tag: u64) -> Result<f64> {
    let mut stream = RandomStream::from_master(seed, &[2, tag]);
    let mut draws = gig_sample(p, DENSE_REPLICATIONS, &mut stream);
    draws.sort_unstable_by(f64::total_cmp);
    // Decimated evaluation keeps the quadrature-backed CDF affordable; the
    // result is an upper bound on the exact distance.
    ks_upper_bound(&draws, 20, |x| gig_cdf(x, p).unwrap_or(f64::NAN))
}

fn gig_density_sampler_moments(seed: u64, tol: &Tolerances) -> Result<(bool, String)> {
    let mut worst_norm = 0.0f64;
    let mut worst_ks = 0.0f64;
    let mut worst_moment = 0.0f64;
    let mut divergence_flags_ok = true;
    for (i, p) in gig_grid().iter().enumerate() {
        // Density normalization by expanding quadrature.
        let total = positive_axis_integral(|x| gig_pdf(x, p), 1e-10, 0.0)?;
        worst_norm = worst_norm.max((total - 1.0).abs());

        worst_ks = worst_ks.max(sampler_ks(p, seed, i as u64)?);

        for order in [-1.0, 1.0, 2.0] {
            let closed = gig_moment(order, p);
            if moment_exists(p, order) {
                let closed = closed?;
                let direct = positive_axis_integral(
                    |x| x.powf(order) * gig_pdf(x, p),
                    closed.abs() * 1e-10,
                    0.0,
                )?;
                worst_moment = worst_moment.max(rel_err(closed, direct));
            } else {
                // The closed form must refuse a divergent moment.
                divergence_flags_ok &= matches!(
                    closed,
                    Err(crate::Error::MomentDiverges { .. })
                );
            }
        }
    }
    let passed = worst_norm <= tol.gig_normalization_atol
        && worst_ks <= tol.gig_sampler_ks_tol
        && worst_moment <= tol.gig_moment_rtol
        && divergence_flags_ok;
    Ok((
        passed,
        format!(
            "normalization {worst_norm:.2e} <= {:.0e}, sampler KS {worst_ks:.4} <= {}, \
             moments {worst_moment:.2e} <= {:.0e}, divergence flags {}",
            tol.gig_normalization_atol,
            tol.gig_sampler_ks_tol,
            tol.gig_moment_rtol,
            if divergence_flags_ok { "correct" } else { "WRONG" }
        ),
    ))
}

fn gig_reciprocal_law(seed: u64, tol: &Tolerances) -> Result<(bool, String)> {
    // Reciprocals of draws must follow the law with (nu, mu, lambda)
    // mapped to (-nu, lambda, mu).
    let mut worst = 0.0f64;
    for (i, p) in gig_grid().iter().enumerate() {
        let flipped = gig_reciprocal(p);
        let mut stream = RandomStream::from_master(seed, &[3, i as u64]);
        let mut recip: Vec<f64> = gig_sample(p, DENSE_REPLICATIONS, &mut stream)
            .into_iter()
            .map(|x| 1.0 / x)
            .collect();
        recip.sort_unstable_by(f64::total_cmp);
        let d =
            ks_upper_bound(&recip, 20, |x| gig_cdf(x, &flipped).unwrap_or(f64::NAN))?;
        worst = worst.max(d);
    }
    Ok((
        worst <= tol.gig_reciprocal_ks_tol,
        format!(
            "worst reciprocal KS {worst:.4} <= {}",
            tol.gig_reciprocal_ks_tol
        ),
    ))
}

// --- criterion 4: closed-form density against the mixing integral ------

fn gh_test_sets() -> Vec<GhParams> {
    let identity = Matrix::identity(2);
    vec![
        GhParams::new(
            -0.5,
            1.0,
            1.25f64.sqrt(),
            vec![0.5, 0.0],
            vec![0.0, 0.0],
            identity.clone(),
        )
        .expect("valid parameters"),
        // Symmetric exponential mixing: the planar Laplace law whose
        // density is K_0(sqrt(2) |x|) / pi.
        GhParams::new(
            1.0,
            0.0,
            2.0f64.sqrt(),
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            identity.clone(),
        )
        .expect("valid parameters"),
        GhParams::new(
            2.0,
            1.5,
            2.0,
            vec![0.3, -0.2],
            vec![0.5, 0.25],
            Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).expect("spd"),
        )
        .expect("valid parameters"),
        GhParams::new(
            -1.5,
            2.0,
            1.0,
            vec![0.0, 0.4],
            vec![0.0, 0.0],
            Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 3.0]]).expect("spd"),
        )
        .expect("valid parameters"),
        GhParams::new(
            0.0,
            1.0,
            1.2,
            vec![0.2, 0.2],
            vec![-1.0, 2.0],
            Matrix::from_rows(&[vec![1.0, -0.3], vec![-0.3, 2.0]]).expect("spd"),
        )
        .expect("valid parameters"),
    ]
}

/// Directly integrates the defining mixture: the Gaussian density with
/// mean `location + z Sigma drift` and covariance `z Sigma`, against the
/// mixing density in `z`.
fn mixture_density_by_quadrature(p: &GhParams, x: &[f64], target: f64) -> Result<f64> {
    let mixing = *p.mixing();
    let sigma = p.sigma().clone();
    let effective = p.effective_drift();
    let location = p.location().to_vec();
    let integrand = move |z: f64| -> f64 {
        let mean: Vec<f64> =
            location.iter().zip(&effective).map(|(b, d)| b + z * d).collect();
        let params = match MvnParams::new(mean, sigma.scaled(z)) {
            Ok(p) => p,
            Err(_) => return 0.0,
        };
        match mvn_pdf(x, &params) {
            Ok(v) => v * gig_pdf(z, &mixing),
            Err(_) => 0.0,
        }
    };
    positive_axis_integral(integrand, target * 1e-9, 1e-9)
}

fn gh_density_vs_quadrature(seed: u64, tol: &Tolerances) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut worst_laplace = 0.0f64;
    for (set_idx, p) in gh_test_sets().iter().enumerate() {
        let mut stream = RandomStream::from_master(seed, &[4, set_idx as u64]);
        // Fifty evaluation points spread over the bulk of the law.
        let points = crate::mixtures::gh_sample(p, 50, &mut stream);
        for x in &points {
            let closed = gh_pdf(x, p)?;
            let direct = mixture_density_by_quadrature(p, x, closed)?;
            worst = worst.max(rel_err(closed, direct));
            if set_idx == 1 {
                // The exponential-mixing set has the textbook closed form.
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                let reference =
                    bessel_k(0.0, 2.0f64.sqrt() * r)? / std::f64::consts::PI;
                worst_laplace = worst_laplace.max(rel_err(closed, reference));
            }
        }
    }
    let passed =
        worst <= tol.gh_quadrature_rtol && worst_laplace <= tol.gh_quadrature_rtol;
    Ok((
        passed,
        format!(
            "mixing quadrature {worst:.2e} <= {:.0e}, planar Laplace form \
             {worst_laplace:.2e} <= {:.0e}",
            tol.gh_quadrature_rtol, tol.gh_quadrature_rtol
        ),
    ))
}

// --- shared Monte Carlo plumbing for the limit criteria -----------------

fn standard_scheme(drift: Vec<f64>) -> Result<NormalizationScheme> {
    let m = drift.len();
    NormalizationScheme::new(
        1.0,
        drift,
        vec![0.0; m],
        vec![0.0; m],
        SignConvention::PaperMinus,
    )
}

/// Draws the normalized statistic `reps` times in parallel; the stream
/// addressing makes the result independent of the worker count.
fn draw_statistics(
    data: &DataModel,
    size: &SizeModel,
    scheme: &NormalizationScheme,
    n: u64,
    reps: usize,
    seed: u64,
    tag: u64,
) -> Result<Vec<Vec<f64>>> {
    let inputs = ReplicationInputs {
        data_model: data,
        size_model: size,
        scheme,
        n,
        gaussian_exact: true,
    };
    (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut stream = RandomStream::from_master(seed, &[tag, n, rep]);
            run_replication(&inputs, &mut stream).map(|r| r.z)
        })
        .collect()
}

fn axis_and_diagonal_directions() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![0.6, 0.8],
        vec![-std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
    ]
}

/// The forward-convergence configuration: standard Gaussian data in the
/// plane, mixed Poisson sizes whose ratio limit is GIG(-0.5, 1, 1), and
/// drift (0.5, 0), so the limit is the closed-form mixture law.
fn gh_limit_config(drift_x: f64) -> Result<ExperimentConfig> {
    ExperimentConfig::new(
        DataModel::IidGaussian(MvnParams::standard(2)?),
        SizeModel::MixedPoisson(MixingLaw::Gig(GigParams::new(0.5, 1.0, 1.0)?)),
        standard_scheme(vec![drift_x, 0.0])?,
        vec![100, 1000, 10_000],
        LIMIT_REPLICATIONS,
    )
}

// --- criterion 5: accompanying characteristic function ------------------

fn accompanying_cf_gap(seed: u64, tol: &Tolerances) -> Result<(bool, String)> {
    // Negative binomial sizes at n = 1000: the empirical characteristic
    // function of the statistic must match the accompanying one on the
    // default grid.
    let data = DataModel::IidGaussian(MvnParams::standard(2)?);
    let size = SizeModel::neg_binomial(2.0)?;
    let scheme = standard_scheme(vec![0.5, 0.0])?;
    let n = 1000u64;
    let zs = draw_statistics(&data, &size, &scheme, n, DENSE_REPLICATIONS, seed, 5)?;
    let acf = AccompanyingCf::new(&data, &size, &scheme, n, 1e-6)?;
    let grid = CfGrid::build(2, &CfGridSpec::default())?;
    let mut gap = 0.0f64;
    for t in grid.points() {
        gap = gap.max((empirical_cf(&zs, t)? - acf.evaluate(t)?).norm());
    }
    let budget = tol.cf_gap_tol + acf.truncation_bound();
    Ok((
        gap <= budget,
        format!(
            "sup characteristic-function gap {gap:.4} <= {} (+ truncation {:.1e}) \
             over {} grid points",
            tol.cf_gap_tol,
            acf.truncation_bound(),
            grid.points().len()
        ),
    ))
}

// --- criterion 6: forward convergence to the closed-form limit ----------

fn gh_limit_convergence(seed: u64, tol: &Tolerances) -> Result<(bool, String)> {
    let config = gh_limit_config(0.5)?;
    if !matches!(config.limit_law()?, LimitLaw::Gh(_)) {
        return Ok((
            false,
            "limit law failed to land in the closed-form family".into(),
        ));
    }
    let outcome = crate::convlab::run_experiment(&config, seed)?;
    let rows = &outcome.report.rows;
    let first = &rows[0];
    let last = &rows[rows.len() - 1];
    let mixing_ok = last.ks_mixing <= tol.limit_ks_tol;
    let projection_ok = last.ks_projection_max <= tol.limit_ks_tol;
    let mixing_drop = first.ks_mixing - last.ks_mixing;
    let projection_drop = first.ks_projection_max - last.ks_projection_max;
    let decreasing =
        mixing_drop >= tol.decrease_margin && projection_drop >= tol.decrease_margin;
    Ok((
        mixing_ok && projection_ok && decreasing,
        format!(
            "at n=1e4: mixing KS {:.4} <= {}, projection KS {:.4} <= {}; decrease \
             from n=1e2: mixing {:.4} >= {}, projection {:.4} >= {}",
            last.ks_mixing,
            tol.limit_ks_tol,
            last.ks_projection_max,
            tol.limit_ks_tol,
            mixing_drop,
            tol.decrease_margin,
            projection_drop,
            tol.decrease_margin
        ),
    ))
}

// --- criterion 7: heavy-tail and exponential-mixing special cases -------

fn student_and_variance_gamma(seed: u64, tol: &Tolerances) -> Result<(bool, String)> {
    let n = 10_000u64;
    let data = DataModel::IidGaussian(MvnParams::standard(2)?);
    let scheme = standard_scheme(vec![0.0, 0.0])?;
    let directions = axis_and_diagonal_directions();

    // Negative binomial sizes with zero drift: the ratio limit is inverse
    // gamma with zero rate, so the limit stays a quadrature mixture with
    // heavy (Student-like) tails.
    let student_size = SizeModel::neg_binomial(2.0)?;
    let student_law = LimitLaw::Mixture(MixtureSpec::new(
        vec![0.0, 0.0],
        vec![0.0, 0.0],
        Matrix::identity(2),
        student_size.limit_mixing(),
    )?);
    let zs =
        draw_statistics(&data, &student_size, &scheme, n, LIMIT_REPLICATIONS, seed, 71)?;
    let student_ks = projection_distance(&zs, &student_law, &directions)?
        .into_iter()
        .fold(0.0f64, f64::max);

    // Scaled rounding of an inverse-exponential mixing variable: the ratio
    // limit is the unit-mean exponential law, giving the planar Laplace
    // (variance-gamma) limit in the closed-form family.
    let vg_size =
        SizeModel::ScaledRound(MixingLaw::Gig(GigParams::new(-1.0, 2.0, 0.0)?));
    let vg_law = LimitLaw::Gh(GhParams::new(
        1.0,
        0.0,
        2.0f64.sqrt(),
        vec![0.0, 0.0],
        vec![0.0, 0.0],
        Matrix::identity(2),
    )?);
    debug_assert_eq!(
        vg_size.limit_mixing(),
        MixingLaw::Gig(GigParams::new(1.0, 0.0, 2.0)?)
    );
    let zs = draw_statistics(&data, &vg_size, &scheme, n, LIMIT_REPLICATIONS, seed, 72)?;
    let vg_ks = projection_distance(&zs, &vg_law, &directions)?
        .into_iter()
        .fold(0.0f64, f64::max);

    Ok((
        student_ks <= tol.limit_ks_tol && vg_ks <= tol.limit_ks_tol,
        format!(
            "Student-type projection KS {student_ks:.4} <= {}, variance-gamma \
             projection KS {vg_ks:.4} <= {}",
            tol.limit_ks_tol, tol.limit_ks_tol
        ),
    ))
}

// --- criterion 8: degenerate-size control -------------------------------

fn degenerate_size_control(seed: u64, tol: &Tolerances) -> Result<(bool, String)> {
    // A unit point mass for the size ratio makes the statistic exactly
    // Gaussian at every n; any normalization-constant error would move
    // every projection off its band.
    let data = DataModel::IidGaussian(MvnParams::standard(2)?);
    let size = SizeModel::ScaledRound(MixingLaw::point_mass(1.0)?);
    let scheme = standard_scheme(vec![0.0, 0.0])?;
    let law = LimitLaw::Mixture(MixtureSpec::new(
        vec![0.0, 0.0],
        vec![0.0, 0.0],
        Matrix::identity(2),
        MixingLaw::point_mass(1.0)?,
    )?);
    let directions = axis_and_diagonal_directions();
    let mut worst = 0.0f64;
    for n in [100u64, 1000, 10_000] {
        let zs = draw_statistics(&data, &size, &scheme, n, DENSE_REPLICATIONS, seed, 8)?;
        let d = projection_distance(&zs, &law, &directions)?
            .into_iter()
            .fold(0.0f64, f64::max);
        worst = worst.max(d);
    }
    Ok((
        worst <= tol.degenerate_ks_tol,
        format!(
            "worst projection KS over n {worst:.4} <= {}",
            tol.degenerate_ks_tol
        ),
    ))
}

// --- criterion 9: skewness direction ------------------------------------

/// Mean block skewness of the first coordinate and its standard error.
fn block_skewness(zs: &[Vec<f64>], blocks: usize) -> (f64, f64) {
    let per = zs.len() / blocks;
    let mut values = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let slice = &zs[b * per..(b + 1) * per];
        let xs: Vec<f64> = slice.iter().map(|z| z[0]).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        let m3 = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / xs.len() as f64;
        values.push(m3 / m2.powf(1.5));
    }
    let mean = values.iter().sum::<f64>() / blocks as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
        / (blocks as f64 - 1.0);
    (mean, (var / blocks as f64).sqrt())
}

fn skewness_direction(seed: u64, tol: &Tolerances) -> Result<(bool, String)> {
    // With drift along the first axis the limit law is right-skewed there;
    // the zero-drift control must be symmetric.
    let data = DataModel::IidGaussian(MvnParams::standard(2)?);
    let size = SizeModel::MixedPoisson(MixingLaw::Gig(GigParams::new(0.5, 1.0, 1.0)?));
    let n = 10_000u64;

    let skewed_scheme = standard_scheme(vec![0.5, 0.0])?;
    let zs =
        draw_statistics(&data, &size, &skewed_scheme, n, LIMIT_REPLICATIONS, seed, 91)?;
    let (skew, se) = block_skewness(&zs, SKEWNESS_BLOCKS);

    let control_scheme = standard_scheme(vec![0.0, 0.0])?;
    let zs =
        draw_statistics(&data, &size, &control_scheme, n, LIMIT_REPLICATIONS, seed, 92)?;
    let (control, control_se) = block_skewness(&zs, SKEWNESS_BLOCKS);

    let k = tol.skewness_se_multiple;
    let skew_positive = skew > k * se;
    let control_flat = control.abs() <= k * control_se;
    Ok((
        skew_positive && control_flat,
        format!(
            "drifted skewness {skew:.3} > {k} x SE {se:.3}; control skewness \
             {control:.3} within {k} x SE {control_se:.3} of zero"
        ),
    ))
}

// --- criterion 10: determinism across worker counts ----------------------

fn worker_count_determinism(seed: u64) -> Result<(bool, String)> {
    let config = gh_limit_config(0.5)?;
    let run_with = |threads: usize| -> Result<String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::Error::InvalidParams(format!("thread pool: {e}")))?;
        let outcome =
            pool.install(|| crate::convlab::run_experiment(&config, seed))?;
        Ok(outcome.report.to_canonical_json())
    };
    let single = run_with(1)?;
    let eight = run_with(8)?;
    let identical = single == eight;
    Ok((
        identical,
        format!(
            "canonical reports with 1 and 8 workers are {} ({} bytes)",
            if identical { "byte-identical" } else { "DIFFERENT" },
            single.len()
        ),
    ))
}
