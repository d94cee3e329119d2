//! One-dimensional projections of normal variance-mean mixtures.
//!
//! Projecting a mixture onto a unit direction `u` gives a univariate
//! mixture: conditional on the mixing variable `Z = z`, the projection is
//! Gaussian with mean `<u, location> + z <u, d>` and variance `z u' Sigma u`
//! (`d` is the vector multiplying `z` in the mixture representation).  Its
//! CDF is therefore a mixing-law expectation of Gaussian CDFs, which is
//! evaluated against the fixed node rule of the mixing law.  This is the
//! reference CDF that empirical samples are tested against.

use crate::linalg::dot;
use crate::mixtures::gh::GhParams;
use crate::mixtures::mixing::MixingNodes;
use crate::mixtures::mvn::unit_check;
use crate::mixtures::MixtureSpec;
use crate::specfun::norm_cdf;
use crate::{Error, Result};

/// Exact CDF of a one-dimensional projection of a mixture law,
/// discretized through the mixing law's quadrature nodes.
#[derive(Debug, Clone)]
pub struct ProjectedLaw {
    shift: f64,
    drift: f64,
    variance: f64,
    nodes: MixingNodes,
}

impl ProjectedLaw {
    /// Assembles a projected law from its scalar components: the
    /// projection is `shift + Z * drift + sqrt(Z * variance) * G`.
    pub fn new(shift: f64, drift: f64, variance: f64, nodes: MixingNodes) -> Result<Self> {
        if !(shift.is_finite() && drift.is_finite()) {
            return Err(Error::InvalidParams(
                "projected shift and drift must be finite".into(),
            ));
        }
        if !variance.is_finite() || variance <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "projected variance must be positive (got {variance})"
            )));
        }
        if nodes.is_empty() {
            return Err(Error::EmptyInput("mixing node rule".into()));
        }
        Ok(ProjectedLaw { shift, drift, variance, nodes })
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// CDF at `y`: the mixing expectation of conditional Gaussian CDFs,
    /// clamped to `[0, 1]` against node-rule rounding.
    pub fn cdf(&self, y: f64) -> f64 {
        let value = self.nodes.expectation(|z| {
            norm_cdf((y - self.shift - z * self.drift) / (z * self.variance).sqrt())
        });
        value.clamp(0.0, 1.0)
    }
}

/// Projects a mixture law onto the unit direction `u`.
///
/// `abs_tol` controls the discretization of the mixing law; continuous
/// mixing laws are reduced to a node rule of roughly that accuracy.
pub fn project_mixture(spec: &MixtureSpec, u: &[f64], abs_tol: f64) -> Result<ProjectedLaw> {
    if u.len() != spec.dim() {
        return Err(Error::DimensionMismatch(format!(
            "direction of dimension {} against a law of dimension {}",
            u.len(),
            spec.dim()
        )));
    }
    unit_check(u)?;
    ProjectedLaw::new(
        dot(u, spec.location()),
        dot(u, spec.drift()),
        spec.sigma().quadratic_form(u)?,
        spec.mixing().quadrature_nodes(abs_tol)?,
    )
}

/// Projects a generalized hyperbolic law onto the unit direction `u`.
///
/// The vector multiplying the mixing variable is `sigma * drift`, so the
/// projected drift is `<u, sigma drift>`.
pub fn project_gh(p: &GhParams, u: &[f64], abs_tol: f64) -> Result<ProjectedLaw> {
    if u.len() != p.dim() {
        return Err(Error::DimensionMismatch(format!(
            "direction of dimension {} against a law of dimension {}",
            u.len(),
            p.dim()
        )));
    }
    unit_check(u)?;
    ProjectedLaw::new(
        dot(u, p.location()),
        dot(u, &p.effective_drift()),
        p.sigma().quadratic_form(u)?,
        crate::mixtures::MixingLaw::Gig(*p.mixing()).quadrature_nodes(abs_tol)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gig::GigParams;
    use crate::linalg::Matrix;
    use crate::mixtures::MixingLaw;
    use std::f64::consts::SQRT_2;

    const NODE_TOL: f64 = 1e-10;

    fn plain_spec(mixing: MixingLaw) -> MixtureSpec {
        MixtureSpec::new(vec![0.0, 0.0], vec![0.0, 0.0], Matrix::identity(2), mixing).unwrap()
    }

    #[test]
    fn point_mass_mixing_reduces_to_the_normal_cdf() {
        let spec = plain_spec(MixingLaw::point_mass(1.0).unwrap());
        let law = project_mixture(&spec, &[1.0, 0.0], NODE_TOL).unwrap();
        for y in [-3.0, -1.0, 0.0, 0.5, 2.5] {
            assert!((law.cdf(y) - norm_cdf(y)).abs() < 1e-15);
        }
        // Scaled point mass: Z = 4 doubles the standard deviation.
        let spec = plain_spec(MixingLaw::point_mass(4.0).unwrap());
        let law = project_mixture(&spec, &[1.0, 0.0], NODE_TOL).unwrap();
        assert!((law.cdf(2.0) - norm_cdf(1.0)).abs() < 1e-15);
    }

    #[test]
    fn exponential_mixing_gives_the_laplace_cdf() {
        // Z ~ Exp(1) with zero drift projects to a Laplace law with
        // density sqrt(2)/2 exp(-sqrt(2) |y|).
        let spec = plain_spec(MixingLaw::Gig(GigParams::new(1.0, 0.0, 2.0).unwrap()));
        let law = project_mixture(&spec, &[0.6, 0.8], NODE_TOL).unwrap();
        for y in [0.25, 1.0, 2.0, 4.0] {
            let exact = 1.0 - 0.5 * (-SQRT_2 * y).exp();
            assert!(
                (law.cdf(y) - exact).abs() < 1e-7,
                "cdf({y}) = {} vs laplace {exact}",
                law.cdf(y)
            );
            let exact_neg = 0.5 * (-SQRT_2 * y).exp();
            assert!((law.cdf(-y) - exact_neg).abs() < 1e-7);
        }
        assert!((law.cdf(0.0) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn gh_projection_matches_the_mixture_projection() {
        let p = GhParams::new(
            -0.5,
            1.0,
            f64::sqrt(1.25),
            vec![0.5, 0.0],
            vec![0.1, -0.2],
            Matrix::from_rows(&[vec![1.5, 0.25], vec![0.25, 0.75]]).unwrap(),
        )
        .unwrap();
        let spec = p.to_mixture_spec();
        let u = [3.0 / 5.0, -4.0 / 5.0];
        let from_gh = project_gh(&p, &u, NODE_TOL).unwrap();
        let from_spec = project_mixture(&spec, &u, NODE_TOL).unwrap();
        assert_eq!(from_gh.shift(), from_spec.shift());
        assert_eq!(from_gh.drift(), from_spec.drift());
        assert_eq!(from_gh.variance(), from_spec.variance());
        for y in [-2.0, 0.0, 0.7, 3.0] {
            assert!((from_gh.cdf(y) - from_spec.cdf(y)).abs() < 1e-12);
        }
    }

    #[test]
    fn cdf_is_monotone_with_proper_limits() {
        let spec = plain_spec(MixingLaw::Gig(GigParams::new(-2.0, 3.0, 1.0).unwrap()));
        let law = project_mixture(&spec, &[1.0, 0.0], NODE_TOL).unwrap();
        let mut last = 0.0;
        for k in 0..=80 {
            let y = -20.0 + k as f64 * 0.5;
            let c = law.cdf(y);
            assert!(c >= last - 1e-12, "non-monotone at {y}");
            last = c;
        }
        assert!(law.cdf(-40.0) < 1e-9);
        assert!(law.cdf(40.0) > 1.0 - 1e-9);
    }

    #[test]
    fn empirical_mixing_averages_gaussian_cdfs() {
        let spec = MixtureSpec::new(
            vec![1.0, 0.0],
            vec![0.5, 0.0],
            Matrix::identity(2),
            MixingLaw::empirical(vec![1.0, 4.0]).unwrap(),
        )
        .unwrap();
        let law = project_mixture(&spec, &[1.0, 0.0], NODE_TOL).unwrap();
        for y in [-1.0, 0.5, 2.0, 6.0] {
            let exact = 0.5 * (norm_cdf(y - 0.5 - 1.0) + norm_cdf((y - 0.5 - 4.0) / 2.0));
            assert!((law.cdf(y) - exact).abs() < 1e-15);
        }
    }

    #[test]
    fn direction_validation() {
        let spec = plain_spec(MixingLaw::point_mass(1.0).unwrap());
        assert!(project_mixture(&spec, &[1.0, 1.0], NODE_TOL).is_err());
        assert!(project_mixture(&spec, &[1.0], NODE_TOL).is_err());
        assert!(project_mixture(&spec, &[0.0, 0.0], NODE_TOL).is_err());
    }
}
