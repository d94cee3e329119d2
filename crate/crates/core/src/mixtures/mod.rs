//! Normal variance-mean mixtures.
//!
//! A normal variance-mean mixture on `R^m` is the law of
//!
//! ```text
//! X = location + Z * drift + sqrt(Z) * L * G,      L L' = sigma,
//! ```
//!
//! where `G` is a standard Gaussian vector and `Z > 0` is an independent
//! mixing variable.  Conditional on `Z = z` the law is Gaussian with mean
//! `location + z * drift` and covariance `z * sigma`; the unconditional
//! density is the mixing expectation of that Gaussian family.
//!
//! The module provides the Gaussian building block ([`mvn`]), mixing laws
//! and their quadrature discretizations ([`mixing`]), the generalized
//! hyperbolic subfamily where the mixing law is generalized inverse
//! Gaussian and the density has a Bessel closed form ([`gh`]), generic
//! mixtures evaluated by adaptive quadrature (this module), and
//! one-dimensional projections with computable CDFs ([`projection`]).

pub mod gh;
pub mod mixing;
pub mod mvn;
pub mod projection;

pub use gh::{gh_log_pdf, gh_pdf, gh_sample, GhParams};
pub use mixing::{MixingLaw, MixingNodes};
pub use mvn::{mvn_log_pdf, mvn_pdf, mvn_sample, standard_normal_vector, MvnParams, MAX_DIM};
pub use projection::{project_gh, project_mixture, ProjectedLaw};

use crate::gig::gig_log_pdf;
use crate::linalg::{dot, Cholesky, Matrix};
use crate::mixtures::mvn::{check_dim, check_vector, sub, LN_TWO_PI};
use crate::quad;
use crate::rng::RandomStream;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A normal variance-mean mixture in explicit mixture form.
///
/// Unlike [`GhParams`], which parameterizes the drift through the scale
/// matrix (the mixture drift vector is `sigma * drift`), this type stores
/// the vector that multiplies the mixing variable directly, and accepts
/// any [`MixingLaw`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MixtureSpecRaw", into = "MixtureSpecRaw")]
pub struct MixtureSpec {
    drift: Vec<f64>,
    location: Vec<f64>,
    sigma: Matrix,
    factor: Cholesky,
    mixing: MixingLaw,
}

impl PartialEq for MixtureSpec {
    fn eq(&self, other: &Self) -> bool {
        self.drift == other.drift
            && self.location == other.location
            && self.sigma == other.sigma
            && self.mixing == other.mixing
    }
}

/// Serialization shadow of [`MixtureSpec`]; deserializing re-validates.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureSpecRaw {
    drift: Vec<f64>,
    location: Vec<f64>,
    sigma: Matrix,
    mixing: MixingLaw,
}

impl TryFrom<MixtureSpecRaw> for MixtureSpec {
    type Error = Error;
    fn try_from(raw: MixtureSpecRaw) -> Result<Self> {
        MixtureSpec::new(raw.drift, raw.location, raw.sigma, raw.mixing)
    }
}

impl From<MixtureSpec> for MixtureSpecRaw {
    fn from(spec: MixtureSpec) -> Self {
        MixtureSpecRaw {
            drift: spec.drift,
            location: spec.location,
            sigma: spec.sigma,
            mixing: spec.mixing,
        }
    }
}

impl MixtureSpec {
    pub fn new(
        drift: Vec<f64>,
        location: Vec<f64>,
        sigma: Matrix,
        mixing: MixingLaw,
    ) -> Result<Self> {
        let m = location.len();
        check_dim(m)?;
        check_vector("location", &location)?;
        check_vector("drift", &drift)?;
        if drift.len() != m || sigma.dim() != m {
            return Err(Error::DimensionMismatch(format!(
                "location has dimension {m} but drift has {} and sigma {}",
                drift.len(),
                sigma.dim()
            )));
        }
        let factor = sigma.cholesky()?;
        Ok(MixtureSpec { drift, location, sigma, factor, mixing })
    }

    pub fn dim(&self) -> usize {
        self.location.len()
    }

    /// The vector multiplying the mixing variable.
    pub fn drift(&self) -> &[f64] {
        &self.drift
    }

    pub fn location(&self) -> &[f64] {
        &self.location
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    pub fn mixing(&self) -> &MixingLaw {
        &self.mixing
    }
}

impl GhParams {
    /// The same law written in explicit mixture form, with the vector
    /// multiplying the mixing variable (`sigma * drift`) spelled out.
    pub fn to_mixture_spec(&self) -> MixtureSpec {
        MixtureSpec::new(
            self.effective_drift(),
            self.location().to_vec(),
            self.sigma().clone(),
            MixingLaw::Gig(*self.mixing()),
        )
        .expect("validated parameters stay valid in mixture form")
    }
}

/// Natural log of the mixture density at `x`.
///
/// Point-mass mixing is a single Gaussian evaluation, empirical mixing a
/// log-sum-exp over components.  Continuous mixing integrates the
/// conditional Gaussian density against the mixing density adaptively in
/// log coordinates, factoring out the integrand maximum so that far tails
/// (where the density underflows) still produce finite log values.  Like
/// the generalized hyperbolic density, the result is `+inf` at the
/// integrable pole (`mu = 0`, `x = location`, mixing order at most `m/2`).
pub fn nvmm_log_pdf(x: &[f64], spec: &MixtureSpec) -> Result<f64> {
    let m = spec.dim();
    if x.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "point of dimension {} against a law of dimension {m}",
            x.len()
        )));
    }
    let diff = sub(x, &spec.location);
    // (diff - z d)' sigma^{-1} (diff - z d) = q0 - 2 z c1 + z^2 qa,
    // computed through the Cholesky factor once.
    let y0 = spec.factor.solve_lower(&diff)?;
    let yd = spec.factor.solve_lower(&spec.drift)?;
    let q0 = dot(&y0, &y0);
    let c1 = dot(&y0, &yd);
    let qa = dot(&yd, &yd);
    let half_m = m as f64 / 2.0;
    let base = -half_m * LN_TWO_PI - 0.5 * spec.factor.ln_det();
    let log_gauss =
        move |z: f64| base - half_m * z.ln() - 0.5 * (q0 / z - 2.0 * c1 + qa * z);
    match &spec.mixing {
        MixingLaw::PointMass(z) => Ok(log_gauss(*z)),
        MixingLaw::Empirical(sample) => {
            let logs: Vec<f64> = sample.iter().map(|&z| log_gauss(z)).collect();
            let peak = logs.iter().fold(f64::NEG_INFINITY, |acc, &l| acc.max(l));
            let sum: f64 = logs.iter().map(|&l| (l - peak).exp()).sum();
            Ok(peak + sum.ln() - (sample.len() as f64).ln())
        }
        MixingLaw::Gig(p) => {
            let gp = *p;
            let order = gp.nu() - half_m;
            if q0 + gp.mu() <= 0.0 && order <= 0.0 {
                return Ok(f64::INFINITY);
            }
            // Log integrand in t = ln z, Jacobian included.
            let ell = move |t: f64| {
                let z = t.exp();
                if !(z > 0.0 && z.is_finite()) {
                    return f64::NEG_INFINITY;
                }
                log_gauss(z) + gig_log_pdf(z, &gp) + t
            };
            // Coarse argmax scan around the mixing integrand's own mode;
            // the Gaussian factor can shift the maximum, but never beyond
            // a few dozen log units for representable inputs.
            let anchor = gp.log_integrand_mode();
            let mut best_t = anchor;
            let mut best = ell(anchor);
            for k in -40..=40 {
                let t = anchor + f64::from(k);
                let v = ell(t);
                if v > best {
                    best = v;
                    best_t = t;
                }
            }
            let outcome = quad::integrate_expanding(
                |t| (ell(t) - best).exp(),
                best_t - 3.0,
                best_t + 3.0,
                1e-12,
                1e-8,
            )?;
            Ok(best + outcome.value.ln())
        }
    }
}

/// Mixture density at `x`.
pub fn nvmm_pdf(x: &[f64], spec: &MixtureSpec) -> Result<f64> {
    Ok(nvmm_log_pdf(x, spec)?.exp())
}

/// Draws `count` vectors from the mixture: a batch of mixing draws, then
/// one Gaussian vector per output point.
pub fn nvmm_sample(spec: &MixtureSpec, count: usize, stream: &mut RandomStream) -> Vec<Vec<f64>> {
    let m = spec.dim();
    let zs = spec.mixing.sample(count, stream);
    zs.into_iter()
        .map(|z| {
            let g = standard_normal_vector(m, stream);
            let noise = spec.factor.apply(&g).expect("factor dimension was validated");
            let root = z.sqrt();
            (0..m)
                .map(|i| spec.location[i] + z * spec.drift[i] + root * noise[i])
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gig::GigParams;

    #[test]
    fn point_mass_mixture_is_a_shifted_scaled_gaussian() {
        let spec = MixtureSpec::new(
            vec![1.0, -1.0],
            vec![0.5, 0.25],
            Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap(),
            MixingLaw::point_mass(2.0).unwrap(),
        )
        .unwrap();
        let gauss = MvnParams::new(
            vec![0.5 + 2.0, 0.25 - 2.0],
            Matrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 2.0]]).unwrap(),
        )
        .unwrap();
        for x in [[0.0, 0.0], [2.5, -1.75], [-3.0, 4.0]] {
            let a = nvmm_log_pdf(&x, &spec).unwrap();
            let b = mvn_log_pdf(&x, &gauss).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b} at {x:?}");
        }
    }

    #[test]
    fn empirical_mixture_is_a_finite_gaussian_mixture() {
        let spec = MixtureSpec::new(
            vec![1.0],
            vec![0.0],
            Matrix::identity(1),
            MixingLaw::empirical(vec![1.0, 4.0]).unwrap(),
        )
        .unwrap();
        let by_hand = |x: f64| {
            let c1 = (-0.5 * (x - 1.0) * (x - 1.0)).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let c2 = (-0.5 * (x - 4.0) * (x - 4.0) / 4.0).exp()
                / (2.0 * (2.0 * std::f64::consts::PI).sqrt());
            0.5 * (c1 + c2)
        };
        for x in [-1.0, 0.5, 2.0, 5.0] {
            let got = nvmm_pdf(&[x], &spec).unwrap();
            assert!((got - by_hand(x)).abs() < 1e-15, "{got} vs {} at {x}", by_hand(x));
        }
    }

    #[test]
    fn continuous_mixture_matches_the_bessel_closed_form() {
        let cases = [
            GhParams::new(
                1.0,
                0.0,
                std::f64::consts::SQRT_2,
                vec![0.0, 0.0],
                vec![0.0, 0.0],
                Matrix::identity(2),
            )
            .unwrap(),
            GhParams::new(
                -0.5,
                1.0,
                f64::sqrt(1.25),
                vec![0.5, 0.0],
                vec![0.0, 0.0],
                Matrix::identity(2),
            )
            .unwrap(),
        ];
        for p in &cases {
            let spec = p.to_mixture_spec();
            for x in [[1.0, 0.0], [0.3, -0.6], [-2.0, 1.5], [4.0, 4.0]] {
                let direct = gh_log_pdf(&x, p).unwrap();
                let quad = nvmm_log_pdf(&x, &spec).unwrap();
                assert!(
                    (direct - quad).abs() < 1e-7,
                    "log density mismatch at {x:?}: {direct} vs {quad}"
                );
            }
        }
    }

    #[test]
    fn far_tail_log_density_stays_finite_and_correct() {
        let p = GhParams::new(
            1.0,
            0.0,
            std::f64::consts::SQRT_2,
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            Matrix::identity(2),
        )
        .unwrap();
        let spec = p.to_mixture_spec();
        let x = [300.0, 0.0];
        let direct = gh_log_pdf(&x, &p).unwrap();
        let quad = nvmm_log_pdf(&x, &spec).unwrap();
        assert!(direct.is_finite() && quad.is_finite());
        assert!((direct - quad).abs() < 1e-6, "{direct} vs {quad}");
    }

    #[test]
    fn pole_behavior_matches_the_closed_form() {
        // Order nu - m/2 = 0 at the pole: infinite density.
        let laplace = GhParams::new(
            1.0,
            0.0,
            std::f64::consts::SQRT_2,
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            Matrix::identity(2),
        )
        .unwrap();
        assert_eq!(
            nvmm_log_pdf(&[0.0, 0.0], &laplace.to_mixture_spec()).unwrap(),
            f64::INFINITY
        );
        // Positive order at the pole: finite density via the Gamma integral.
        let vg = GhParams::new(
            2.0,
            0.0,
            1.5,
            vec![0.25, 0.0],
            vec![0.0, 0.0],
            Matrix::identity(2),
        )
        .unwrap();
        let direct = gh_log_pdf(&[0.0, 0.0], &vg).unwrap();
        let quad = nvmm_log_pdf(&[0.0, 0.0], &vg.to_mixture_spec()).unwrap();
        assert!(direct.is_finite());
        assert!((direct - quad).abs() < 1e-7, "{direct} vs {quad}");
    }

    #[test]
    fn sampling_matches_the_bessel_family_sampler_stream_for_stream() {
        let p = GhParams::new(
            -0.5,
            1.0,
            f64::sqrt(1.25),
            vec![0.5, 0.0],
            vec![0.0, 0.0],
            Matrix::identity(2),
        )
        .unwrap();
        let direct = gh_sample(&p, 64, &mut RandomStream::from_master(11, &[3]));
        let generic = nvmm_sample(&p.to_mixture_spec(), 64, &mut RandomStream::from_master(11, &[3]));
        assert_eq!(direct, generic);
    }

    #[test]
    fn serde_round_trip_and_validation() {
        let spec = MixtureSpec::new(
            vec![0.5, 0.0],
            vec![0.0, 0.0],
            Matrix::identity(2),
            MixingLaw::Gig(GigParams::new(-2.0, 4.0, 0.0).unwrap()),
        )
        .unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        let back: MixtureSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);

        let unknown = r#"{"drift": [0.0], "location": [0.0], "sigma": [[1.0]],
                          "mixing": {"kind": "point_mass", "value": 1.0}, "extra": 1}"#;
        assert!(serde_json::from_str::<MixtureSpec>(unknown).is_err());

        assert!(MixtureSpec::new(
            vec![0.0; 3],
            vec![0.0; 2],
            Matrix::identity(2),
            MixingLaw::point_mass(1.0).unwrap(),
        )
        .is_err());
        let bad = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(MixtureSpec::new(
            vec![0.0; 2],
            vec![0.0; 2],
            bad,
            MixingLaw::point_mass(1.0).unwrap(),
        )
        .is_err());
    }
}
