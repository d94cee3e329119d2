//! Stratified estimator of the coherency condition: the expected sup
//! distance, over a compact grid of characteristic-function arguments,
//! between the conditional characteristic function of the centered
//! statistic at the random sample size and its Gaussian limit.

use crate::convlab::cf::empirical_cf;
use crate::convlab::CfGrid;
use crate::randindex::{asymptotic_sigma, draw_size, ReplicationInputs};
use crate::rng::RandomStream;
use crate::{Error, Result};

/// The estimate together with the scale of its own Monte Carlo noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherencyEstimate {
    /// Average over strata of the grid-sup distance; upward-biased by the
    /// estimator noise, so read it against `noise_bound`.
    pub estimate: f64,
    /// Sub-Gaussian scale of the grid supremum of the empirical
    /// characteristic-function noise at the configured per-stratum sample
    /// size: `sqrt(2 ln(2 g) / s)` for `g` grid points and `s` draws.
    pub noise_bound: f64,
}

/// Estimates the coherency quantity by stratifying on realized sample
/// sizes: each stratum draws one size `k` from the size model, then
/// estimates the conditional characteristic function of
/// `sigma sqrt(k) (mean_k - theta)` from `sizes_per_stratum` fresh
/// samples and takes the grid supremum of its distance to
/// `exp(-t' Sigma t / 2)`.  The returned value averages the strata.
pub fn coherency_estimator(
    inputs: &ReplicationInputs<'_>,
    grid: &CfGrid,
    sizes_per_stratum: usize,
    strata: usize,
    stream: &mut RandomStream,
) -> Result<CoherencyEstimate> {
    if strata < 10 {
        return Err(Error::InvalidParams(format!(
            "coherency estimation needs at least 10 strata (got {strata})"
        )));
    }
    if sizes_per_stratum < 2 {
        return Err(Error::InvalidParams(format!(
            "coherency estimation needs at least 2 draws per stratum (got {sizes_per_stratum})"
        )));
    }
    let m = inputs.scheme.dim();
    if inputs.data_model.dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "data model dimension {} against scheme dimension {m}",
            inputs.data_model.dim()
        )));
    }
    let sigma_lim = asymptotic_sigma(inputs.data_model, inputs.scheme);
    let limit_cf: Vec<f64> = grid
        .points()
        .iter()
        .map(|t| Ok((-0.5 * sigma_lim.quadratic_form(t)?).exp()))
        .collect::<Result<_>>()?;
    let theta = inputs.scheme.theta();
    let sigma = inputs.scheme.sigma();
    let mut total = 0.0f64;
    for _ in 0..strata {
        let k = draw_size(inputs.size_model, inputs.n, stream);
        let root = sigma * (k as f64).sqrt();
        let ys: Vec<Vec<f64>> = (0..sizes_per_stratum)
            .map(|_| {
                let mean = inputs
                    .data_model
                    .sample_mean(k, inputs.gaussian_exact, stream);
                mean.iter().zip(theta).map(|(a, b)| root * (a - b)).collect()
            })
            .collect();
        let mut sup = 0.0f64;
        for (t, &target) in grid.points().iter().zip(&limit_cf) {
            let h = empirical_cf(&ys, t)?;
            sup = sup.max((h - target).norm());
        }
        total += sup;
    }
    let g = grid.points().len() as f64;
    let noise_bound = (2.0 * (2.0 * g).ln() / sizes_per_stratum as f64).sqrt();
    Ok(CoherencyEstimate { estimate: total / strata as f64, noise_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convlab::CfGridSpec;
    use crate::linalg::Matrix;
    use crate::randindex::{DataModel, NormalizationScheme, SignConvention, SizeModel};
    use crate::{MixingLaw, MvnParams};

    fn setup() -> (DataModel, SizeModel, NormalizationScheme) {
        let data = DataModel::IidGaussian(
            MvnParams::new(
                vec![1.0, -1.0],
                Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap(),
            )
            .unwrap(),
        );
        let size = SizeModel::ScaledRound(MixingLaw::point_mass(1.0).unwrap());
        let scheme = NormalizationScheme::new(
            1.0,
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![1.0, -1.0],
            SignConvention::PaperMinus,
        )
        .unwrap();
        (data, size, scheme)
    }

    #[test]
    fn origin_only_grid_gives_exact_zero() {
        let (data, size, scheme) = setup();
        let inputs = ReplicationInputs {
            data_model: &data,
            size_model: &size,
            scheme: &scheme,
            n: 100,
            gaussian_exact: true,
        };
        let grid =
            CfGrid::build(2, &CfGridSpec { radius: 5.0, points_per_axis: 1 }).unwrap();
        let mut stream = RandomStream::from_master(8, &[1]);
        let est = coherency_estimator(&inputs, &grid, 50, 12, &mut stream).unwrap();
        assert_eq!(est.estimate, 0.0);
    }

    #[test]
    fn gaussian_data_is_pure_estimator_noise() {
        // The conditional law is exactly Gaussian at every size, so the
        // estimate measures only its own noise.
        let (data, size, scheme) = setup();
        let inputs = ReplicationInputs {
            data_model: &data,
            size_model: &size,
            scheme: &scheme,
            n: 250,
            gaussian_exact: true,
        };
        let grid = CfGrid::build(2, &CfGridSpec::default()).unwrap();
        let mut stream = RandomStream::from_master(8, &[2]);
        let est = coherency_estimator(&inputs, &grid, 200, 16, &mut stream).unwrap();
        assert!(est.estimate > 0.0);
        assert!(
            est.estimate <= 3.0 * est.noise_bound,
            "estimate {} vs noise scale {}",
            est.estimate,
            est.noise_bound
        );
    }

    #[test]
    fn stratum_count_is_enforced() {
        let (data, size, scheme) = setup();
        let inputs = ReplicationInputs {
            data_model: &data,
            size_model: &size,
            scheme: &scheme,
            n: 100,
            gaussian_exact: true,
        };
        let grid = CfGrid::build(2, &CfGridSpec::default()).unwrap();
        let mut stream = RandomStream::from_master(8, &[3]);
        assert!(matches!(
            coherency_estimator(&inputs, &grid, 50, 9, &mut stream),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn estimates_are_deterministic() {
        let (data, size, scheme) = setup();
        let inputs = ReplicationInputs {
            data_model: &data,
            size_model: &size,
            scheme: &scheme,
            n: 100,
            gaussian_exact: true,
        };
        let grid = CfGrid::build(2, &CfGridSpec::default()).unwrap();
        let a = coherency_estimator(
            &inputs,
            &grid,
            40,
            10,
            &mut RandomStream::from_master(8, &[4]),
        )
        .unwrap();
        let b = coherency_estimator(
            &inputs,
            &grid,
            40,
            10,
            &mut RandomStream::from_master(8, &[4]),
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
