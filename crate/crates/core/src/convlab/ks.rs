//! One-sample Kolmogorov-Smirnov distances and their projection to
//! directions of a multivariate sample.

use crate::convlab::LimitLaw;
use crate::{Error, Result};

/// Accuracy target for projected distribution functions.
const PROJECTION_TOL: f64 = 1e-9;

/// One-sample Kolmogorov-Smirnov statistic against a continuous
/// distribution function:
/// `sup_i max(|i/R - F(x_i)|, |(i-1)/R - F(x_i)|)` over the ascending
/// sample `x_1 <= ... <= x_R`.
pub fn ks_one_sample<F: FnMut(f64) -> f64>(sorted: &[f64], mut cdf: F) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptyInput("Kolmogorov-Smirnov sample".into()));
    }
    debug_assert!(
        sorted.windows(2).all(|w| w[0] <= w[1]),
        "sample must be sorted ascending"
    );
    let r = sorted.len() as f64;
    let mut worst = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let upper = ((i + 1) as f64 / r - f).abs();
        let lower = (i as f64 / r - f).abs();
        worst = worst.max(upper).max(lower);
    }
    Ok(worst)
}

/// Upper bound on the Kolmogorov-Smirnov statistic that evaluates the
/// reference distribution function only every `step` order statistics.
///
/// Both curves are monotone, so between two evaluated order statistics the
/// empirical curve moves by at most `step / R`; adding that slack to the
/// decimated supremum dominates the exact statistic.  Use it when each
/// distribution-function evaluation is expensive (quadrature-backed
/// targets); the bound exceeds the exact statistic by at most `step / R`.
pub fn ks_upper_bound<F: FnMut(f64) -> f64>(
    sorted: &[f64],
    step: usize,
    mut cdf: F,
) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptyInput("Kolmogorov-Smirnov sample".into()));
    }
    if step < 1 {
        return Err(Error::InvalidParams(
            "decimation step must be at least 1".into(),
        ));
    }
    debug_assert!(
        sorted.windows(2).all(|w| w[0] <= w[1]),
        "sample must be sorted ascending"
    );
    let n = sorted.len();
    let r = n as f64;
    let mut worst = 0.0f64;
    let mut i = 0usize;
    loop {
        let f = cdf(sorted[i]);
        let upper = ((i + 1) as f64 / r - f).abs();
        let lower = (i as f64 / r - f).abs();
        worst = worst.max(upper).max(lower);
        if i == n - 1 {
            break;
        }
        i = (i + step).min(n - 1);
    }
    Ok(worst + step as f64 / r)
}

/// Kolmogorov-Smirnov distance of each one-dimensional projection of the
/// sample against the correspondingly projected target law.
pub fn projection_distance(
    samples: &[Vec<f64>],
    target: &LimitLaw,
    directions: &[Vec<f64>],
) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("projection sample".into()));
    }
    let m = target.dim();
    let mut out = Vec::with_capacity(directions.len());
    for u in directions {
        if u.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "direction of dimension {} against law of dimension {m}",
                u.len()
            )));
        }
        let projected = target.project(u, PROJECTION_TOL)?;
        let mut dots = Vec::with_capacity(samples.len());
        for x in samples {
            if x.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "sample of dimension {} against law of dimension {m}",
                    x.len()
                )));
            }
            dots.push(u.iter().zip(x).map(|(a, b)| a * b).sum());
        }
        dots.sort_by(|a: &f64, b: &f64| a.total_cmp(b));
        out.push(ks_one_sample(&dots, |y| projected.cdf(y))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;
    use rand::Rng;

    #[test]
    fn one_point_sample_with_median_value() {
        let d = ks_one_sample(&[0.0], |_| 0.5).unwrap();
        assert_eq!(d, 0.5);
    }

    #[test]
    fn empty_sample_is_an_error() {
        assert!(matches!(
            ks_one_sample(&[], |_| 0.0),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            ks_upper_bound(&[], 10, |_| 0.0),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn matching_law_passes_the_kolmogorov_bound() {
        // Uniform draws against the identity distribution function: the
        // statistic should sit under 1.95 / sqrt(R) (far beyond the 0.999
        // quantile of the Kolmogorov law; the seed is fixed).
        let mut stream = RandomStream::from_master(31, &[5]);
        let reps = 100_000;
        let mut draws: Vec<f64> = (0..reps).map(|_| stream.random::<f64>()).collect();
        draws.sort_by(|a, b| a.total_cmp(b));
        let d = ks_one_sample(&draws, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d <= 1.95 / (reps as f64).sqrt(), "d = {d}");
    }

    #[test]
    fn shifted_law_is_detected() {
        let mut stream = RandomStream::from_master(31, &[6]);
        let mut draws: Vec<f64> =
            (0..20_000).map(|_| stream.random::<f64>() + 0.1).collect();
        draws.sort_by(|a, b| a.total_cmp(b));
        let d = ks_one_sample(&draws, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d >= 0.09, "d = {d}");
    }

    #[test]
    fn decimated_bound_dominates_within_its_slack() {
        let mut stream = RandomStream::from_master(31, &[7]);
        let mut draws: Vec<f64> = (0..5_000).map(|_| stream.random::<f64>()).collect();
        draws.sort_by(|a, b| a.total_cmp(b));
        let cdf = |x: f64| (x * x).clamp(0.0, 1.0); // deliberately wrong law
        let exact = ks_one_sample(&draws, cdf).unwrap();
        for step in [1, 7, 50, 333] {
            let bound = ks_upper_bound(&draws, step, cdf).unwrap();
            assert!(bound >= exact, "step {step}: {bound} < {exact}");
            assert!(
                bound <= exact + 2.0 * step as f64 / 5_000.0 + 1e-12,
                "step {step}: bound {bound} too loose vs {exact}"
            );
        }
        // Step one reproduces the exact statistic plus exactly its slack.
        let one = ks_upper_bound(&draws, 1, cdf).unwrap();
        assert!((one - exact - 1.0 / 5_000.0).abs() < 1e-15);
    }
}
