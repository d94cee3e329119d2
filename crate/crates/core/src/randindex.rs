//! Statistics built from a random number of observations.
//!
//! The object of study is a double array: for each outer index `n` a
//! random sample size `N_n` is drawn, then `N_n` observations, then a
//! statistic of those observations.  The normalized statistic
//!
//! ```text
//! Z_n = sigma * sqrt(n) * (T_{n, N_n} - theta) -+ location_n
//! ```
//!
//! converges (when `n / N_n` converges in law to a mixing variable) to a
//! normal variance-mean mixture, and the compound diagnostic vector
//! `W_n = (U_n, V_n)` with `U_n = sqrt(n / N_n)` and
//! `V_n = U_n^2 * drift_n -+ location_n` records how each replication sat
//! inside the mixture representation.  This module provides the sample
//! size models, the observation models, the statistic with its bias
//! injection, and single-replication execution; experiment drivers batch
//! replications and study the convergence.

use crate::gig::gig_reciprocal;
use crate::linalg::Matrix;
use crate::mixtures::mvn::{check_dim, check_vector};
use crate::mixtures::{standard_normal_vector, MixingLaw, MvnParams};
use crate::rng::RandomStream;
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, Poisson};
use serde::{Deserialize, Serialize};

/// How the random sample size `N_n` is produced from the outer index `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SizeModelRaw", into = "SizeModelRaw")]
pub enum SizeModel {
    /// `N_n = max(1, round(n W))` for a mixing draw `W`.
    ScaledRound(MixingLaw),
    /// `N_n = max(1, Poisson(n W))` for a mixing draw `W`.
    MixedPoisson(MixingLaw),
    /// Negative binomial with `r` successes and success probability
    /// `r / (r + n)`, floored at one; `N_n / n` converges to a Gamma law
    /// with shape `r` and rate `r`.
    NegBinomial { r: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SizeModelRaw {
    ScaledRound { mixing: MixingLaw },
    MixedPoisson { mixing: MixingLaw },
    NegBinomial { r: f64 },
}

impl TryFrom<SizeModelRaw> for SizeModel {
    type Error = Error;
    fn try_from(raw: SizeModelRaw) -> Result<Self> {
        Ok(match raw {
            SizeModelRaw::ScaledRound { mixing } => SizeModel::ScaledRound(mixing),
            SizeModelRaw::MixedPoisson { mixing } => SizeModel::MixedPoisson(mixing),
            SizeModelRaw::NegBinomial { r } => SizeModel::neg_binomial(r)?,
        })
    }
}

impl From<SizeModel> for SizeModelRaw {
    fn from(model: SizeModel) -> Self {
        match model {
            SizeModel::ScaledRound(mixing) => SizeModelRaw::ScaledRound { mixing },
            SizeModel::MixedPoisson(mixing) => SizeModelRaw::MixedPoisson { mixing },
            SizeModel::NegBinomial { r } => SizeModelRaw::NegBinomial { r },
        }
    }
}

impl SizeModel {
    pub fn neg_binomial(r: f64) -> Result<Self> {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "negative binomial size model requires r > 0 (got {r})"
            )));
        }
        Ok(SizeModel::NegBinomial { r })
    }

    /// The limit law of `n / N_n` as `n` grows.
    ///
    /// For the mixing-driven models this is the reciprocal of the mixing
    /// law; for the negative binomial model `N_n / n` tends to a Gamma
    /// law with shape and rate `r`, so `n / N_n` tends to its reciprocal,
    /// an inverse gamma law.
    pub fn limit_mixing(&self) -> MixingLaw {
        match self {
            SizeModel::ScaledRound(mixing) | SizeModel::MixedPoisson(mixing) => {
                mixing.reciprocal()
            }
            SizeModel::NegBinomial { r } => MixingLaw::Gig(
                gig_reciprocal(
                    &crate::gig::GigParams::new(*r, 0.0, 2.0 * r)
                        .expect("gamma parameters are valid for r > 0"),
                ),
            ),
        }
    }
}

/// Saturating Poisson count; for means so large that the relative
/// fluctuation drops below 1e-9 the mean itself stands in for the draw.
fn poisson_count(lambda: f64, stream: &mut RandomStream) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    if lambda >= 1e18 {
        return lambda.min(9.2e18) as u64;
    }
    let law = Poisson::new(lambda).expect("finite positive mean");
    law.sample(stream) as u64
}

/// One draw of the random sample size; always at least one.
pub fn draw_size(model: &SizeModel, n: u64, stream: &mut RandomStream) -> u64 {
    debug_assert!(n >= 1, "outer index must be positive");
    match model {
        SizeModel::ScaledRound(mixing) => {
            let scaled = n as f64 * mixing.draw(stream);
            (scaled.round().min(9.2e18) as u64).max(1)
        }
        SizeModel::MixedPoisson(mixing) => {
            poisson_count(n as f64 * mixing.draw(stream), stream).max(1)
        }
        SizeModel::NegBinomial { r } => {
            // Gamma(shape r, scale n/r) mixed through a Poisson kernel is
            // negative binomial with success probability r / (r + n).
            let gamma = Gamma::new(*r, n as f64 / r).expect("validated shape and scale");
            poisson_count(gamma.sample(stream), stream).max(1)
        }
    }
}

/// Whether the centering vector enters the normalization with a minus or
/// a plus sign; both appear in the literature and only differ when the
/// centering vector is nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    #[default]
    PaperMinus,
    MixturePlus,
}

impl SignConvention {
    fn apply(self, value: f64, centering: f64) -> f64 {
        match self {
            SignConvention::PaperMinus => value - centering,
            SignConvention::MixturePlus => value + centering,
        }
    }
}

/// Normalization of the statistic: the scale `sigma`, the bias direction
/// `drift_n`, the centering vector `location_n`, the target `theta`, and
/// the sign with which the centering enters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NormalizationSchemeRaw", into = "NormalizationSchemeRaw")]
pub struct NormalizationScheme {
    sigma: f64,
    drift_n: Vec<f64>,
    location_n: Vec<f64>,
    theta: Vec<f64>,
    sign_convention: SignConvention,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NormalizationSchemeRaw {
    sigma: f64,
    drift_n: Vec<f64>,
    location_n: Vec<f64>,
    theta: Vec<f64>,
    #[serde(default)]
    sign_convention: SignConvention,
}

impl TryFrom<NormalizationSchemeRaw> for NormalizationScheme {
    type Error = Error;
    fn try_from(raw: NormalizationSchemeRaw) -> Result<Self> {
        NormalizationScheme::new(
            raw.sigma,
            raw.drift_n,
            raw.location_n,
            raw.theta,
            raw.sign_convention,
        )
    }
}

impl From<NormalizationScheme> for NormalizationSchemeRaw {
    fn from(s: NormalizationScheme) -> Self {
        NormalizationSchemeRaw {
            sigma: s.sigma,
            drift_n: s.drift_n,
            location_n: s.location_n,
            theta: s.theta,
            sign_convention: s.sign_convention,
        }
    }
}

impl NormalizationScheme {
    pub fn new(
        sigma: f64,
        drift_n: Vec<f64>,
        location_n: Vec<f64>,
        theta: Vec<f64>,
        sign_convention: SignConvention,
    ) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "normalization scale sigma must be positive (got {sigma})"
            )));
        }
        let m = theta.len();
        check_dim(m)?;
        check_vector("theta", &theta)?;
        check_vector("drift_n", &drift_n)?;
        check_vector("location_n", &location_n)?;
        if drift_n.len() != m || location_n.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "theta has dimension {m} but drift_n has {} and location_n {}",
                drift_n.len(),
                location_n.len()
            )));
        }
        Ok(NormalizationScheme { sigma, drift_n, location_n, theta, sign_convention })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn drift_n(&self) -> &[f64] {
        &self.drift_n
    }

    pub fn location_n(&self) -> &[f64] {
        &self.location_n
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn sign_convention(&self) -> SignConvention {
        self.sign_convention
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }
}

/// The law of a single observation vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DataModelRaw", into = "DataModelRaw")]
pub enum DataModel {
    /// Independent multivariate Gaussian observations.
    IidGaussian(MvnParams),
    /// Independent uniform draws on an axis-aligned cube.
    IidUniformCube { center: Vec<f64>, half_width: f64 },
    /// Independent coordinates, each exponential with its own rate.
    IidExponentialProduct { rates: Vec<f64> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum DataModelRaw {
    IidGaussian { params: MvnParams },
    IidUniformCube { center: Vec<f64>, half_width: f64 },
    IidExponentialProduct { rates: Vec<f64> },
}

impl TryFrom<DataModelRaw> for DataModel {
    type Error = Error;
    fn try_from(raw: DataModelRaw) -> Result<Self> {
        match raw {
            DataModelRaw::IidGaussian { params } => Ok(DataModel::IidGaussian(params)),
            DataModelRaw::IidUniformCube { center, half_width } => {
                DataModel::iid_uniform_cube(center, half_width)
            }
            DataModelRaw::IidExponentialProduct { rates } => {
                DataModel::iid_exponential_product(rates)
            }
        }
    }
}

impl From<DataModel> for DataModelRaw {
    fn from(model: DataModel) -> Self {
        match model {
            DataModel::IidGaussian(params) => DataModelRaw::IidGaussian { params },
            DataModel::IidUniformCube { center, half_width } => {
                DataModelRaw::IidUniformCube { center, half_width }
            }
            DataModel::IidExponentialProduct { rates } => {
                DataModelRaw::IidExponentialProduct { rates }
            }
        }
    }
}

impl DataModel {
    pub fn iid_uniform_cube(center: Vec<f64>, half_width: f64) -> Result<Self> {
        check_dim(center.len())?;
        check_vector("center", &center)?;
        if !half_width.is_finite() || half_width <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "cube half width must be positive (got {half_width})"
            )));
        }
        Ok(DataModel::IidUniformCube { center, half_width })
    }

    pub fn iid_exponential_product(rates: Vec<f64>) -> Result<Self> {
        check_dim(rates.len())?;
        if rates.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(Error::InvalidParams(
                "exponential rates must be positive and finite".into(),
            ));
        }
        Ok(DataModel::IidExponentialProduct { rates })
    }

    pub fn dim(&self) -> usize {
        match self {
            DataModel::IidGaussian(p) => p.dim(),
            DataModel::IidUniformCube { center, .. } => center.len(),
            DataModel::IidExponentialProduct { rates } => rates.len(),
        }
    }

    /// Per-observation mean vector.
    pub fn mean(&self) -> Vec<f64> {
        match self {
            DataModel::IidGaussian(p) => p.mean().to_vec(),
            DataModel::IidUniformCube { center, .. } => center.clone(),
            DataModel::IidExponentialProduct { rates } => {
                rates.iter().map(|r| 1.0 / r).collect()
            }
        }
    }

    /// Per-observation covariance matrix.
    pub fn covariance(&self) -> Matrix {
        match self {
            DataModel::IidGaussian(p) => p.sigma().clone(),
            DataModel::IidUniformCube { center, half_width } => {
                let v = half_width * half_width / 3.0;
                Matrix::diagonal(&vec![v; center.len()]).expect("positive variance")
            }
            DataModel::IidExponentialProduct { rates } => Matrix::diagonal(
                &rates.iter().map(|r| 1.0 / (r * r)).collect::<Vec<_>>(),
            )
            .expect("positive variance"),
        }
    }

    /// One observation.
    pub fn draw(&self, stream: &mut RandomStream) -> Vec<f64> {
        match self {
            DataModel::IidGaussian(p) => crate::mixtures::mvn_sample(p, stream),
            DataModel::IidUniformCube { center, half_width } => center
                .iter()
                .map(|c| c + half_width * (2.0 * stream.random::<f64>() - 1.0))
                .collect(),
            DataModel::IidExponentialProduct { rates } => rates
                .iter()
                .map(|&r| Exp::new(r).expect("validated rate").sample(stream))
                .collect(),
        }
    }

    /// Mean of `count` observations.
    ///
    /// For Gaussian data with `exact` set, the mean is drawn from its
    /// exact law (`mean + L g / sqrt(count)`) with a single Gaussian
    /// vector instead of `count` of them — a distributional identity,
    /// not an approximation.  Everything else sums literal draws.
    pub fn sample_mean(&self, count: u64, exact: bool, stream: &mut RandomStream) -> Vec<f64> {
        assert!(count >= 1, "sample mean needs at least one observation");
        if exact {
            if let DataModel::IidGaussian(p) = self {
                let g = standard_normal_vector(p.dim(), stream);
                let noise = p.factor().apply(&g).expect("factor dimension matches");
                let root = (count as f64).sqrt();
                return p
                    .mean()
                    .iter()
                    .zip(&noise)
                    .map(|(m, e)| m + e / root)
                    .collect();
            }
        }
        let mut acc = vec![0.0; self.dim()];
        for _ in 0..count {
            let x = self.draw(stream);
            for (a, xi) in acc.iter_mut().zip(&x) {
                *a += xi;
            }
        }
        for a in &mut acc {
            *a /= count as f64;
        }
        acc
    }
}

/// Limiting covariance of the scaled sample mean: with observations of
/// covariance `C`, the statistic `sigma sqrt(k) (mean - theta)` tends to
/// a centered Gaussian with covariance `sigma^2 C`.
pub fn asymptotic_sigma(data_model: &DataModel, scheme: &NormalizationScheme) -> Matrix {
    data_model.covariance().scaled(scheme.sigma * scheme.sigma)
}

/// The statistic of one sample: the sample mean plus the prescribed bias
/// `sqrt(n) / (sigma k) * sigma_lim * drift_n`, where `sigma_lim` is the
/// limiting covariance from [`asymptotic_sigma`].  The bias is calibrated
/// so the limit law's drift vector is exactly `drift_n` in the mixture
/// parameterization.
pub fn compute_statistic(
    data: &[Vec<f64>],
    n: u64,
    scheme: &NormalizationScheme,
    sigma_lim: &Matrix,
) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::EmptyInput("statistic sample".into()));
    }
    let m = scheme.dim();
    let mut mean = vec![0.0; m];
    for x in data {
        if x.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "observation of dimension {} against scheme dimension {m}",
                x.len()
            )));
        }
        for (a, xi) in mean.iter_mut().zip(x) {
            *a += xi;
        }
    }
    for a in &mut mean {
        *a /= data.len() as f64;
    }
    statistic_from_mean(&mean, data.len() as u64, n, scheme, sigma_lim)
}

/// Statistic from an already-computed sample mean of `k` observations.
fn statistic_from_mean(
    mean: &[f64],
    k: u64,
    n: u64,
    scheme: &NormalizationScheme,
    sigma_lim: &Matrix,
) -> Result<Vec<f64>> {
    let bias = sigma_lim.matvec(&scheme.drift_n)?;
    let factor = (n as f64).sqrt() / (scheme.sigma * k as f64);
    Ok(mean.iter().zip(&bias).map(|(m, b)| m + factor * b).collect())
}

/// Everything a single replication needs.
#[derive(Debug, Clone, Copy)]
pub struct ReplicationInputs<'a> {
    pub data_model: &'a DataModel,
    pub size_model: &'a SizeModel,
    pub scheme: &'a NormalizationScheme,
    pub n: u64,
    /// Use the exact-law shortcut for Gaussian sample means.
    pub gaussian_exact: bool,
}

/// The outputs of one replication: the realized size, the normalized
/// statistic `Z_n`, and the compound diagnostics `U_n`, `V_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub n: u64,
    pub size: u64,
    /// `Z_n = sigma sqrt(n) (T - theta) -+ location_n`.
    pub z: Vec<f64>,
    /// `U_n = sqrt(n / size)`.
    pub u: f64,
    /// `V_n = (n / size) * drift_n -+ location_n`, built from the
    /// unsquared ratio so the identity holds to the last bit.
    pub v: Vec<f64>,
}

/// Runs one replication: size draw, data draw, statistic, normalization.
/// Deterministic given the stream.
pub fn run_replication(
    inputs: &ReplicationInputs<'_>,
    stream: &mut RandomStream,
) -> Result<Replication> {
    let m = inputs.scheme.dim();
    if inputs.data_model.dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "data model dimension {} against scheme dimension {m}",
            inputs.data_model.dim()
        )));
    }
    if inputs.n < 1 {
        return Err(Error::InvalidParams("outer index n must be at least 1".into()));
    }
    let sigma_lim = asymptotic_sigma(inputs.data_model, inputs.scheme);
    let size = draw_size(inputs.size_model, inputs.n, stream);
    let mean = inputs.data_model.sample_mean(size, inputs.gaussian_exact, stream);
    let t = statistic_from_mean(&mean, size, inputs.n, inputs.scheme, &sigma_lim)?;
    let scale = inputs.scheme.sigma * (inputs.n as f64).sqrt();
    let convention = inputs.scheme.sign_convention;
    let z = t
        .iter()
        .zip(inputs.scheme.theta.iter().zip(&inputs.scheme.location_n))
        .map(|(ti, (th, b))| convention.apply(scale * (ti - th), *b))
        .collect();
    let ratio = inputs.n as f64 / size as f64;
    let v = inputs
        .scheme
        .drift_n
        .iter()
        .zip(&inputs.scheme.location_n)
        .map(|(a, b)| convention.apply(ratio * a, *b))
        .collect();
    Ok(Replication { n: inputs.n, size, z, u: ratio.sqrt(), v })
}
