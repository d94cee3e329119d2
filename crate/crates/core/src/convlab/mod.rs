//! Monte Carlo verification of the convergence of randomly indexed
//! statistics to normal variance-mean mixtures.
//!
//! The laboratory measures four things for each outer index `n`:
//!
//! * projection Kolmogorov-Smirnov distances between the normalized
//!   statistic and the identified limit law ([`ks`]);
//! * the Kolmogorov-Smirnov distance between the size ratio `n / N_n` and
//!   its limit mixing law;
//! * the grid supremum of the gap between the statistic's empirical
//!   characteristic function and the accompanying characteristic function
//!   ([`cf`]);
//! * the stratified coherency estimate ([`coherency`]).
//!
//! [`run_experiment`] drives all four over a grid of `n` values and emits a
//! deterministic [`ConvergenceReport`] ([`report`]): identical
//! configuration and master seed produce byte-identical canonical JSON,
//! independent of worker count.

pub mod cf;
pub mod coherency;
mod experiment;
pub mod ks;
pub mod report;

pub use cf::{empirical_cf, AccompanyingCf, SizePmf};
pub use coherency::{coherency_estimator, CoherencyEstimate};
pub use experiment::run_experiment;
pub use ks::{ks_one_sample, ks_upper_bound, projection_distance};
pub use report::{ConvergenceReport, ExperimentOutcome, ReportRow, PROJECTION_NOTE};

use crate::mixtures::{project_gh, project_mixture, ProjectedLaw};
use crate::randindex::{
    asymptotic_sigma, DataModel, NormalizationScheme, SignConvention, SizeModel,
};
use crate::rng::RandomStream;
use crate::{Error, GhParams, MixingLaw, MixtureSpec, Result};
use serde::{Deserialize, Serialize};

/// Characteristic-function grid specification: a symmetric tensor lattice
/// of `points_per_axis` values per coordinate, trimmed to the ball of the
/// given radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfGridSpec {
    pub radius: f64,
    pub points_per_axis: usize,
}

impl Default for CfGridSpec {
    fn default() -> Self {
        CfGridSpec { radius: 5.0, points_per_axis: 9 }
    }
}

impl CfGridSpec {
    fn validate(&self, dim: usize) -> Result<()> {
        if !self.radius.is_finite() || self.radius <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "grid radius must be positive (got {})",
                self.radius
            )));
        }
        if self.points_per_axis % 2 == 0 {
            return Err(Error::InvalidParams(
                "points_per_axis must be odd so the grid contains the origin \
                 and is closed under negation"
                    .into(),
            ));
        }
        let total = (self.points_per_axis as f64).powi(dim as i32);
        if total > 1e6 {
            return Err(Error::InvalidParams(format!(
                "tensor grid of {}^{dim} points is too large",
                self.points_per_axis
            )));
        }
        Ok(())
    }
}

/// Concrete grid of characteristic-function arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct CfGrid {
    radius: f64,
    points: Vec<Vec<f64>>,
}

impl CfGrid {
    /// Builds the tensor lattice in `dim` coordinates and keeps the points
    /// inside the ball.  The origin always survives, and the grid is
    /// closed under negation because the per-axis values are symmetric.
    pub fn build(dim: usize, spec: &CfGridSpec) -> Result<CfGrid> {
        crate::mixtures::mvn::check_dim(dim)?;
        spec.validate(dim)?;
        let half = (spec.points_per_axis / 2) as i64;
        let axis: Vec<f64> = (-half..=half)
            .map(|j| {
                if half == 0 {
                    0.0
                } else {
                    spec.radius * j as f64 / half as f64
                }
            })
            .collect();
        let mut points = Vec::new();
        let mut cursor = vec![0usize; dim];
        loop {
            let point: Vec<f64> = cursor.iter().map(|&i| axis[i]).collect();
            let norm_sq: f64 = point.iter().map(|x| x * x).sum();
            if norm_sq <= spec.radius * spec.radius * (1.0 + 1e-12) {
                points.push(point);
            }
            // Odometer increment over the tensor lattice.
            let mut axis_idx = 0;
            loop {
                if axis_idx == dim {
                    break;
                }
                cursor[axis_idx] += 1;
                if cursor[axis_idx] < axis.len() {
                    break;
                }
                cursor[axis_idx] = 0;
                axis_idx += 1;
            }
            if axis_idx == dim {
                break;
            }
        }
        Ok(CfGrid { radius: spec.radius, points })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Stratification sizes for the coherency estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherencySpec {
    pub strata: usize,
    pub sizes_per_stratum: usize,
}

impl Default for CoherencySpec {
    fn default() -> Self {
        CoherencySpec { strata: 16, sizes_per_stratum: 200 }
    }
}

/// The limit law a convergence experiment tests against: the closed-form
/// family when an explicit scale parameter exists, otherwise the general
/// mixture evaluated by quadrature (both project to the same
/// distribution functions).
#[derive(Debug, Clone, PartialEq)]
pub enum LimitLaw {
    Gh(GhParams),
    Mixture(MixtureSpec),
}

impl LimitLaw {
    pub fn dim(&self) -> usize {
        match self {
            LimitLaw::Gh(p) => p.dim(),
            LimitLaw::Mixture(s) => s.dim(),
        }
    }

    /// Distribution of `<u, X>` for a unit direction `u`.
    pub fn project(&self, direction: &[f64], abs_tol: f64) -> Result<ProjectedLaw> {
        match self {
            LimitLaw::Gh(p) => project_gh(p, direction, abs_tol),
            LimitLaw::Mixture(s) => project_mixture(s, direction, abs_tol),
        }
    }
}

/// Complete description of a convergence experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExperimentConfigRaw", into = "ExperimentConfigRaw")]
pub struct ExperimentConfig {
    data_model: DataModel,
    size_model: SizeModel,
    scheme: NormalizationScheme,
    n_grid: Vec<u64>,
    replications: usize,
    cf_grid: CfGridSpec,
    coherency: CoherencySpec,
    directions: usize,
    gaussian_exact: bool,
    cf_tail_mass: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentConfigRaw {
    data_model: DataModel,
    size_model: SizeModel,
    scheme: NormalizationScheme,
    n_grid: Vec<u64>,
    replications: usize,
    #[serde(default)]
    cf_grid: CfGridSpec,
    #[serde(default)]
    coherency: CoherencySpec,
    #[serde(default = "default_directions")]
    directions: usize,
    #[serde(default = "default_gaussian_exact")]
    gaussian_exact: bool,
    #[serde(default = "default_cf_tail_mass")]
    cf_tail_mass: f64,
}

fn default_directions() -> usize {
    8
}

fn default_gaussian_exact() -> bool {
    true
}

fn default_cf_tail_mass() -> f64 {
    1e-6
}

impl TryFrom<ExperimentConfigRaw> for ExperimentConfig {
    type Error = Error;
    fn try_from(raw: ExperimentConfigRaw) -> Result<Self> {
        let config = ExperimentConfig {
            data_model: raw.data_model,
            size_model: raw.size_model,
            scheme: raw.scheme,
            n_grid: raw.n_grid,
            replications: raw.replications,
            cf_grid: raw.cf_grid,
            coherency: raw.coherency,
            directions: raw.directions,
            gaussian_exact: raw.gaussian_exact,
            cf_tail_mass: raw.cf_tail_mass,
        };
        config.validate()?;
        Ok(config)
    }
}

impl From<ExperimentConfig> for ExperimentConfigRaw {
    fn from(c: ExperimentConfig) -> Self {
        ExperimentConfigRaw {
            data_model: c.data_model,
            size_model: c.size_model,
            scheme: c.scheme,
            n_grid: c.n_grid,
            replications: c.replications,
            cf_grid: c.cf_grid,
            coherency: c.coherency,
            directions: c.directions,
            gaussian_exact: c.gaussian_exact,
            cf_tail_mass: c.cf_tail_mass,
        }
    }
}

impl ExperimentConfig {
    /// Builds a configuration with the default grid, coherency,
    /// direction-count, exact-Gaussian, and truncation settings.
    pub fn new(
        data_model: DataModel,
        size_model: SizeModel,
        scheme: NormalizationScheme,
        n_grid: Vec<u64>,
        replications: usize,
    ) -> Result<Self> {
        let config = ExperimentConfig {
            data_model,
            size_model,
            scheme,
            n_grid,
            replications,
            cf_grid: CfGridSpec::default(),
            coherency: CoherencySpec::default(),
            directions: default_directions(),
            gaussian_exact: default_gaussian_exact(),
            cf_tail_mass: default_cf_tail_mass(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_cf_grid(mut self, spec: CfGridSpec) -> Result<Self> {
        self.cf_grid = spec;
        self.validate()?;
        Ok(self)
    }

    pub fn with_coherency(mut self, spec: CoherencySpec) -> Result<Self> {
        self.coherency = spec;
        self.validate()?;
        Ok(self)
    }

    pub fn with_directions(mut self, count: usize) -> Result<Self> {
        self.directions = count;
        self.validate()?;
        Ok(self)
    }

    pub fn with_gaussian_exact(mut self, exact: bool) -> Self {
        self.gaussian_exact = exact;
        self
    }

    pub fn with_cf_tail_mass(mut self, mass: f64) -> Result<Self> {
        self.cf_tail_mass = mass;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let m = self.scheme.dim();
        if self.data_model.dim() != m {
            return Err(Error::DimensionMismatch(format!(
                "data model dimension {} against scheme dimension {m}",
                self.data_model.dim()
            )));
        }
        if self.n_grid.is_empty() {
            return Err(Error::EmptyInput("experiment n grid".into()));
        }
        if self.n_grid[0] < 1 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams(
                "n grid must be strictly ascending and positive".into(),
            ));
        }
        if self.replications < 10 {
            return Err(Error::InvalidParams(format!(
                "at least 10 replications are needed (got {})",
                self.replications
            )));
        }
        self.cf_grid.validate(m)?;
        if self.coherency.strata < 10 {
            return Err(Error::InvalidParams(format!(
                "coherency needs at least 10 strata (got {})",
                self.coherency.strata
            )));
        }
        if self.coherency.sizes_per_stratum < 2 {
            return Err(Error::InvalidParams(
                "coherency needs at least 2 draws per stratum".into(),
            ));
        }
        if self.directions < m || self.directions > 64 {
            return Err(Error::InvalidParams(format!(
                "direction count must lie in [{m}, 64] (got {})",
                self.directions
            )));
        }
        if !self.cf_tail_mass.is_finite()
            || self.cf_tail_mass <= 0.0
            || self.cf_tail_mass >= 0.5
        {
            return Err(Error::InvalidParams(format!(
                "characteristic-function truncation mass must lie in (0, 0.5) (got {})",
                self.cf_tail_mass
            )));
        }
        Ok(())
    }

    pub fn data_model(&self) -> &DataModel {
        &self.data_model
    }

    pub fn size_model(&self) -> &SizeModel {
        &self.size_model
    }

    pub fn scheme(&self) -> &NormalizationScheme {
        &self.scheme
    }

    pub fn n_grid(&self) -> &[u64] {
        &self.n_grid
    }

    pub fn replications(&self) -> usize {
        self.replications
    }

    pub fn cf_grid(&self) -> &CfGridSpec {
        &self.cf_grid
    }

    pub fn coherency(&self) -> &CoherencySpec {
        &self.coherency
    }

    pub fn directions(&self) -> usize {
        self.directions
    }

    pub fn gaussian_exact(&self) -> bool {
        self.gaussian_exact
    }

    pub fn cf_tail_mass(&self) -> f64 {
        self.cf_tail_mass
    }

    /// Stable 64-bit FNV-1a hash of the canonical JSON serialization;
    /// identifies the configuration in reports and seeds the
    /// fingerprint-derived projection directions.
    pub fn fingerprint(&self) -> u64 {
        let json = serde_json::to_string(self)
            .expect("in-memory serialization of plain data cannot fail");
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut hash = OFFSET;
        for byte in json.as_bytes() {
            hash ^= u64::from(*byte);
            hash = hash.wrapping_mul(PRIME);
        }
        hash
    }

    /// The projection directions: the coordinate axes first, then unit
    /// vectors drawn from a stream seeded by the configuration
    /// fingerprint, so the direction set is a pure function of the
    /// configuration.
    pub fn projection_directions(&self) -> Vec<Vec<f64>> {
        let m = self.scheme.dim();
        let mut out = Vec::with_capacity(self.directions);
        for i in 0..m.min(self.directions) {
            let mut axis = vec![0.0; m];
            axis[i] = 1.0;
            out.push(axis);
        }
        let mut stream = RandomStream::from_master(self.fingerprint(), &[0xD19]);
        while out.len() < self.directions {
            let g = crate::mixtures::standard_normal_vector(m, &mut stream);
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-6 {
                continue;
            }
            out.push(g.iter().map(|x| x / norm).collect());
        }
        out
    }

    /// The limit law of the normalized statistic under this configuration:
    /// the mixture of `N(s b + z Sigma a, z Sigma)` over the limit mixing
    /// law `G` of `n / N_n`, with `s` the sign convention.  When `G`
    /// carries a scale parameter compatible with the closed-form family,
    /// the law is expressed there; otherwise (zero scale with zero drift,
    /// or a discrete mixing law) it stays a quadrature-backed mixture.
    pub fn limit_law(&self) -> Result<LimitLaw> {
        let mixing = self.size_model.limit_mixing();
        let sigma_lim = asymptotic_sigma(&self.data_model, &self.scheme);
        let sign = match self.scheme.sign_convention() {
            SignConvention::PaperMinus => -1.0,
            SignConvention::MixturePlus => 1.0,
        };
        let location: Vec<f64> =
            self.scheme.location_n().iter().map(|b| sign * b).collect();
        let drift = self.scheme.drift_n().to_vec();
        if let MixingLaw::Gig(g) = &mixing {
            let alpha_sq = g.lambda() + sigma_lim.quadratic_form(&drift)?;
            if alpha_sq > 0.0 {
                if let Ok(gh) = GhParams::new(
                    g.nu(),
                    g.mu(),
                    alpha_sq.sqrt(),
                    drift.clone(),
                    location.clone(),
                    sigma_lim.clone(),
                ) {
                    // The internal mixing rate is alpha^2 - a' Sigma a,
                    // which recovers the reciprocal's scale up to rounding.
                    debug_assert!(
                        (gh.mixing().lambda() - g.lambda()).abs()
                            <= 1e-12 * (1.0 + g.lambda().abs())
                    );
                    return Ok(LimitLaw::Gh(gh));
                }
            }
        }
        let effective = sigma_lim.matvec(&drift)?;
        Ok(LimitLaw::Mixture(MixtureSpec::new(
            effective, location, sigma_lim, mixing,
        )?))
    }

    /// Limit distribution function of the size ratio `n / N_n`.
    pub fn mixing_cdf(&self) -> impl Fn(f64) -> f64 + '_ {
        let mixing = self.size_model.limit_mixing();
        move |x: f64| match &mixing {
            MixingLaw::Gig(g) => crate::gig::gig_cdf(x, g).unwrap_or(f64::NAN),
            MixingLaw::PointMass(v) => {
                if x >= *v {
                    1.0
                } else {
                    0.0
                }
            }
            MixingLaw::Empirical(sample) => {
                let below = sample.iter().filter(|&&z| z <= x).count();
                below as f64 / sample.len() as f64
            }
        }
    }
}

impl std::fmt::Display for LimitLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LimitLaw::Gh(_) => write!(f, "closed-form mixture family"),
            LimitLaw::Mixture(_) => write!(f, "quadrature-backed mixture"),
        }
    }
}
