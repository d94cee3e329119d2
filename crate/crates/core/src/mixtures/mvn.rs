//! Multivariate normal distributions in low dimension.

use crate::linalg::{dot, Cholesky, Matrix};
use crate::rng::RandomStream;
use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Highest dimension the mixture machinery supports; tensor-product
/// quadrature oracles become infeasible beyond this.
pub const MAX_DIM: usize = 10;

/// Mean vector and positive-definite covariance with its cached Cholesky
/// factor.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MvnParamsRaw", into = "MvnParamsRaw")]
pub struct MvnParams {
    mean: Vec<f64>,
    sigma: Matrix,
    factor: Cholesky,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MvnParamsRaw {
    mean: Vec<f64>,
    sigma: Matrix,
}

impl TryFrom<MvnParamsRaw> for MvnParams {
    type Error = Error;
    fn try_from(raw: MvnParamsRaw) -> Result<Self> {
        MvnParams::new(raw.mean, raw.sigma)
    }
}

impl From<MvnParams> for MvnParamsRaw {
    fn from(p: MvnParams) -> Self {
        MvnParamsRaw { mean: p.mean, sigma: p.sigma }
    }
}

impl PartialEq for MvnParams {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean && self.sigma == other.sigma
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidParams(format!(
            "dimension must be between 1 and {MAX_DIM} (got {dim})"
        )));
    }
    Ok(())
}

pub(crate) fn check_vector(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParams(format!("{name} entries must be finite")));
    }
    Ok(())
}

impl MvnParams {
    pub fn new(mean: Vec<f64>, sigma: Matrix) -> Result<Self> {
        check_dim(sigma.dim())?;
        check_vector("mean", &mean)?;
        if mean.len() != sigma.dim() {
            return Err(Error::DimensionMismatch(format!(
                "mean has length {}, covariance dimension {}",
                mean.len(),
                sigma.dim()
            )));
        }
        let factor = sigma.cholesky()?;
        Ok(MvnParams { mean, sigma, factor })
    }

    /// Standard normal law in `dim` dimensions.
    pub fn standard(dim: usize) -> Result<Self> {
        MvnParams::new(vec![0.0; dim], Matrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    pub fn factor(&self) -> &Cholesky {
        &self.factor
    }
}

/// Log density of the multivariate normal law.
pub fn mvn_log_pdf(x: &[f64], p: &MvnParams) -> Result<f64> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch(format!(
            "point has length {}, distribution dimension {}",
            x.len(),
            p.dim()
        )));
    }
    let diff: Vec<f64> = x.iter().zip(p.mean.iter()).map(|(a, b)| a - b).collect();
    let q = p.factor.inv_quadratic_form(&diff)?;
    let m = p.dim() as f64;
    Ok(-0.5 * (m * LN_TWO_PI + p.factor.ln_det() + q))
}

/// Multivariate normal density.
pub fn mvn_pdf(x: &[f64], p: &MvnParams) -> Result<f64> {
    Ok(mvn_log_pdf(x, p)?.exp())
}

/// One draw: `mean + L g` with `g` standard normal.
pub fn mvn_sample(p: &MvnParams, stream: &mut RandomStream) -> Vec<f64> {
    let g = standard_normal_vector(p.dim(), stream);
    let colored = p
        .factor
        .apply(&g)
        .expect("factor dimension equals the requested length");
    colored
        .iter()
        .zip(p.mean.iter())
        .map(|(c, m)| c + m)
        .collect()
}

/// A vector of independent standard normal draws.
pub fn standard_normal_vector(dim: usize, stream: &mut RandomStream) -> Vec<f64> {
    (0..dim).map(|_| stream.sample(StandardNormal)).collect()
}

pub(crate) const LN_TWO_PI: f64 = 1.837_877_066_409_345_48;

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn unit_check(direction: &[f64]) -> Result<()> {
    let norm = dot(direction, direction).sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParams(format!(
            "direction must be a unit vector (norm {norm})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_pin_at_origin() {
        let p = MvnParams::standard(2).unwrap();
        let expected = 0.159_154_943_091_895_336; // 1 / (2 pi)
        assert!((mvn_pdf(&[0.0, 0.0], &p).unwrap() - expected).abs() < 1e-16);
    }

    #[test]
    fn symmetry_about_mean() {
        let sigma = Matrix::from_rows(&[vec![2.0, 0.7], vec![0.7, 1.0]]).unwrap();
        let p = MvnParams::new(vec![1.0, -2.0], sigma).unwrap();
        // Dyadic offsets keep the reflection arithmetic exact in binary.
        for x in [[1.5, -1.0], [0.25, 0.375], [3.0, -2.5]] {
            let reflected = [2.0 * 1.0 - x[0], 2.0 * -2.0 - x[1]];
            let a = mvn_pdf(&x, &p).unwrap();
            let b = mvn_pdf(&reflected, &p).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn diagonal_matches_product_of_univariates() {
        let sigma = Matrix::diagonal(&[4.0, 1.0]).unwrap();
        let p = MvnParams::new(vec![0.0, 0.0], sigma).unwrap();
        let x = [1.0, 0.0];
        let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
        let expected = (1.0 / (2.0 * sqrt_2pi)) * (-1.0f64 / 8.0).exp() * (1.0 / sqrt_2pi);
        assert!((mvn_pdf(&x, &p).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(MvnParams::new(vec![0.0], Matrix::identity(2)).is_err());
        assert!(MvnParams::new(vec![0.0; 11], Matrix::identity(11)).is_err());
        let p = MvnParams::standard(2).unwrap();
        assert!(matches!(
            mvn_pdf(&[0.0], &p),
            Err(Error::DimensionMismatch(_))
        ));
        let bad = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(MvnParams::new(vec![0.0, 0.0], bad).is_err());
    }

    #[test]
    fn sample_moments() {
        let sigma = Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let p = MvnParams::new(vec![3.0, -1.0], sigma).unwrap();
        let mut stream = RandomStream::from_master(15, &[0]);
        let n = 50_000;
        let mut mean = [0.0f64; 2];
        let mut cov01 = 0.0f64;
        let draws: Vec<Vec<f64>> = (0..n).map(|_| mvn_sample(&p, &mut stream)).collect();
        for d in &draws {
            mean[0] += d[0];
            mean[1] += d[1];
        }
        mean[0] /= n as f64;
        mean[1] /= n as f64;
        for d in &draws {
            cov01 += (d[0] - mean[0]) * (d[1] - mean[1]);
        }
        cov01 /= n as f64;
        assert!((mean[0] - 3.0).abs() < 4.0 * (2.0f64 / n as f64).sqrt());
        assert!((mean[1] + 1.0).abs() < 4.0 * (1.0f64 / n as f64).sqrt());
        assert!((cov01 - 0.5).abs() < 0.05);
    }

    #[test]
    fn serde_round_trip_revalidates() {
        let sigma = Matrix::from_rows(&[vec![2.0, 0.7], vec![0.7, 1.0]]).unwrap();
        let p = MvnParams::new(vec![1.0, 2.0], sigma).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        let back: MvnParams = serde_json::from_str(&json).unwrap();
        assert_eq!(p, back);
        let x = [0.3, 0.9];
        assert_eq!(mvn_pdf(&x, &p).unwrap(), mvn_pdf(&x, &back).unwrap());
    }
}
