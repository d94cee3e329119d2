//! Characteristic functions: the empirical estimator, exact-to-truncation
//! sample-size mass functions, and the accompanying characteristic function
//! of the normalized statistic.
//!
//! The accompanying characteristic function replaces the conditional law of
//! the centered statistic at sample size `k` by its Gaussian limit:
//!
//! ```text
//! g_n(t) = exp(i s <t, b>) * sum_k P(N_n = k)
//!              * exp(i (n/k) <t, Sigma a>) * exp(-(n/k)/2 t' Sigma t)
//! ```
//!
//! with `s = -+1` the sign convention for the centering vector `b`,
//! `a` the drift vector, and `Sigma` the limiting covariance of the scaled
//! sample mean.  The transfer argument says the true characteristic
//! function of the normalized statistic approaches `g_n`, which is what the
//! experiment driver measures on a grid.

use crate::linalg::Matrix;
use crate::randindex::{asymptotic_sigma, DataModel, NormalizationScheme, SignConvention, SizeModel};
use crate::specfun::ln_gamma;
use crate::{Error, MixingLaw, Result};
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Empirical characteristic function `(1/R) sum_r exp(i <t, x_r>)`.
///
/// The modulus never exceeds one up to rounding.
pub fn empirical_cf(samples: &[Vec<f64>], t: &[f64]) -> Result<Complex64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput(
            "empirical characteristic function sample".into(),
        ));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for x in samples {
        if x.len() != t.len() {
            return Err(Error::DimensionMismatch(format!(
                "sample of dimension {} against argument of dimension {}",
                x.len(),
                t.len()
            )));
        }
        let phase: f64 = t.iter().zip(x).map(|(ti, xi)| ti * xi).sum();
        acc += Complex64::cis(phase);
    }
    Ok(acc / samples.len() as f64)
}

/// Largest size-support span the dense mass-function builders accept.
const MAX_SUPPORT_SPAN: u64 = 16_000_000;

/// Accuracy target for the mixing-law node rule used by the mass builders.
const NODE_TOL: f64 = 1e-9;

/// Probability mass function of a random sample size `N_n`, truncated to a
/// finite support with an explicit bound on the discarded mass.
///
/// The negative binomial model is evaluated exactly (log-gamma anchored
/// recurrences); the mixed Poisson model integrates the Poisson kernel
/// against the mixing density through the mixing law's quadrature nodes;
/// the scaled-rounding model discretizes the mixing law onto the integer
/// lattice.  In every case the mass at zero is folded into one, matching
/// the floor in [`crate::randindex::draw_size`].
#[derive(Debug, Clone)]
pub struct SizePmf {
    entries: Vec<(u64, f64)>,
    tail_bound: f64,
}

impl SizePmf {
    pub fn new(model: &SizeModel, n: u64, tail_eps: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParams(
                "sample-size mass function needs n >= 1".into(),
            ));
        }
        if !tail_eps.is_finite() || tail_eps <= 0.0 || tail_eps >= 0.5 {
            return Err(Error::InvalidParams(format!(
                "truncation mass must lie in (0, 0.5) (got {tail_eps})"
            )));
        }
        match model {
            SizeModel::NegBinomial { r } => neg_binomial_pmf(*r, n, tail_eps),
            SizeModel::MixedPoisson(mixing) => mixed_poisson_pmf(mixing, n, tail_eps),
            SizeModel::ScaledRound(mixing) => scaled_round_pmf(mixing, n),
        }
    }

    /// Mass lost to truncation; the accompanying characteristic function is
    /// accurate to this bound because every discarded summand has modulus
    /// at most one.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Total retained mass.
    pub fn mass(&self) -> f64 {
        self.entries.iter().map(|&(_, p)| p).sum()
    }

    /// Mean of the retained part.
    pub fn mean(&self) -> f64 {
        self.entries.iter().map(|&(k, p)| k as f64 * p).sum()
    }

    /// Support points with their probabilities, ascending in `k`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Packs a dense `[k_lo, k_hi]` table into sparse entries, folding the mass
/// at zero into one and trimming negligible leading/trailing weight.
fn finish_dense(k_lo: u64, mut probs: Vec<f64>, trim_eps: f64) -> SizePmf {
    debug_assert!(!probs.is_empty());
    if k_lo == 0 {
        // N_n = max(1, raw draw): zero-size mass belongs to one.
        let p0 = probs[0];
        probs[0] = 0.0;
        if probs.len() > 1 {
            probs[1] += p0;
        } else {
            probs.push(p0);
        }
    }
    let mut trimmed = 0.0f64;
    let mut lo_idx = 0usize;
    let mut cum = 0.0f64;
    for (i, &p) in probs.iter().enumerate() {
        if cum + p > trim_eps / 2.0 {
            lo_idx = i;
            break;
        }
        cum += p;
        trimmed = cum;
        lo_idx = i + 1;
    }
    let mut hi_idx = probs.len();
    let mut cum = 0.0f64;
    for i in (lo_idx..probs.len()).rev() {
        if cum + probs[i] > trim_eps / 2.0 {
            hi_idx = i + 1;
            break;
        }
        cum += probs[i];
        trimmed += probs[i];
        hi_idx = i;
    }
    if lo_idx >= hi_idx {
        // Nothing survived the trim (possible only for a degenerate
        // budget); keep the full table rather than an empty law.
        lo_idx = 0;
        hi_idx = probs.len();
        trimmed = 0.0;
    }
    let entries: Vec<(u64, f64)> = (lo_idx..hi_idx)
        .filter(|&i| probs[i] > 0.0)
        .map(|i| (k_lo + i as u64, probs[i]))
        .collect();
    let mass: f64 = entries.iter().map(|&(_, p)| p).sum();
    let tail_bound = (1.0 - mass).max(trimmed).max(0.0);
    SizePmf { entries, tail_bound }
}

/// Negative binomial mass function (successes `r`, success probability
/// `r / (r + n)`), exact up to the requested tail mass.
fn neg_binomial_pmf(r: f64, n: u64, tail_eps: f64) -> Result<SizePmf> {
    if n >= MAX_SUPPORT_SPAN {
        return Err(Error::Overflow(format!(
            "negative binomial support span exceeds {MAX_SUPPORT_SPAN} entries"
        )));
    }
    let nf = n as f64;
    let p = r / (r + nf);
    let q = nf / (r + nf);
    // Anchor at the mean n where the mass is near its largest, then
    // recur outward; the anchored log value keeps everything in scale.
    let anchor = n;
    let ln_anchor =
        ln_gamma(anchor as f64 + r) - ln_gamma(r) - ln_gamma(anchor as f64 + 1.0)
            + r * p.ln()
            + anchor as f64 * q.ln();
    let p_anchor = ln_anchor.exp();
    if !p_anchor.is_finite() {
        return Err(Error::Overflow(format!(
            "negative binomial mass underflows at its anchor (r = {r}, n = {n})"
        )));
    }
    // Downward to zero.
    let mut down = Vec::with_capacity(anchor as usize + 1);
    let mut value = p_anchor;
    down.push(value);
    let mut k = anchor as f64;
    while k >= 1.0 {
        // pmf(k-1) = pmf(k) * k / ((k - 1 + r) q)
        value *= k / ((k - 1.0 + r) * q);
        down.push(value);
        k -= 1.0;
    }
    down.reverse(); // indices 0..=anchor
    // Upward until a geometric bound on the remaining tail drops under a
    // quarter of the budget, leaving the other half of the budget to the
    // packing trim.  Successive-term ratios are q (k + r) / (k + 1);
    // beyond the current k they never exceed max(current ratio, q), which
    // covers both the r > 1 (decreasing) and r < 1 (increasing) shapes.
    let mut probs = down;
    let mut value = p_anchor;
    let mut k = anchor as f64;
    loop {
        let ratio = q * (k + r) / (k + 1.0);
        let rho = ratio.max(q).min(1.0 - 1e-12);
        if value * rho / (1.0 - rho) < tail_eps / 4.0 {
            break;
        }
        value *= ratio;
        probs.push(value);
        k += 1.0;
        if probs.len() as u64 > MAX_SUPPORT_SPAN {
            return Err(Error::Overflow(format!(
                "negative binomial support span exceeds {MAX_SUPPORT_SPAN} entries"
            )));
        }
    }
    Ok(finish_dense(0, probs, tail_eps / 2.0))
}

/// Half-width of the Poisson window explored per mixing node, in standard
/// deviations plus a constant floor; the clipped mass is far below any
/// truncation budget in use.
fn poisson_window(lambda: f64) -> u64 {
    (12.0 * lambda.sqrt()).ceil() as u64 + 20
}

/// Mixed Poisson mass function through the mixing law's quadrature nodes:
/// `P(N = k) ~= sum_j w_j Poisson(n z_j)(k)`.
fn mixed_poisson_pmf(mixing: &MixingLaw, n: u64, tail_eps: f64) -> Result<SizePmf> {
    // Density-adapted nodes alias once the Poisson kernels grow narrower
    // than the node spacing, so ask for a rule refined to the kernel scale.
    let all_nodes = mixing.poisson_resolved_nodes(NODE_TOL, n)?;
    // The node rule certifies the mixing tails with nodes of vanishing
    // weight; dropping extreme nodes up to an eighth of the budget per
    // side keeps the dense table proportional to the effective support.
    // The dropped mass shows up honestly in the retained-mass deficit.
    let mut sorted: Vec<(f64, f64)> = all_nodes.pairs().to_vec();
    sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let drop_budget = tail_eps / 8.0;
    let mut hi_end = sorted.len();
    let mut dropped = 0.0f64;
    while hi_end > 1 && dropped + sorted[hi_end - 1].1 <= drop_budget {
        dropped += sorted[hi_end - 1].1;
        hi_end -= 1;
    }
    let mut lo_start = 0usize;
    let mut dropped = 0.0f64;
    while lo_start + 1 < hi_end && dropped + sorted[lo_start].1 <= drop_budget {
        dropped += sorted[lo_start].1;
        lo_start += 1;
    }
    let nodes = &sorted[lo_start..hi_end];
    let nf = n as f64;
    let mut k_min = u64::MAX;
    let mut k_max = 0u64;
    for &(z, _) in nodes {
        let lambda = nf * z;
        let center = lambda.round().min(9.0e18) as u64;
        let w = poisson_window(lambda);
        k_min = k_min.min(center.saturating_sub(w));
        k_max = k_max.max(center.saturating_add(w));
    }
    let span = k_max - k_min + 1;
    if span > MAX_SUPPORT_SPAN {
        return Err(Error::Overflow(format!(
            "mixed Poisson support span {span} exceeds {MAX_SUPPORT_SPAN} entries"
        )));
    }
    let mut probs = vec![0.0f64; span as usize];
    for &(z, weight) in nodes {
        let lambda = nf * z;
        let center = lambda.round().min(9.0e18) as u64;
        let w = poisson_window(lambda);
        let lo = center.saturating_sub(w);
        let hi = center.saturating_add(w);
        let ln_center = -lambda + center as f64 * lambda.ln() - ln_gamma(center as f64 + 1.0);
        let p_center = ln_center.exp();
        // Upward from the center: p(k+1) = p(k) * lambda / (k + 1).
        let mut value = p_center;
        for k in center..=hi {
            probs[(k - k_min) as usize] += weight * value;
            value *= lambda / (k as f64 + 1.0);
        }
        // Downward: p(k-1) = p(k) * k / lambda.
        let mut value = p_center;
        let mut k = center;
        while k > lo {
            value *= k as f64 / lambda;
            k -= 1;
            probs[(k - k_min) as usize] += weight * value;
        }
    }
    Ok(finish_dense(k_min, probs, tail_eps / 2.0))
}

/// Scaled-rounding mass function: the mixing law discretized onto the
/// integer lattice, `P(N = k) ~= sum of node weights rounding to k`.
fn scaled_round_pmf(mixing: &MixingLaw, n: u64) -> Result<SizePmf> {
    let nodes = mixing.quadrature_nodes(NODE_TOL)?;
    let nf = n as f64;
    let mut atoms: BTreeMap<u64, f64> = BTreeMap::new();
    for &(z, weight) in nodes.pairs() {
        let k = ((nf * z).round().min(9.0e18) as u64).max(1);
        *atoms.entry(k).or_insert(0.0) += weight;
    }
    let entries: Vec<(u64, f64)> = atoms.into_iter().collect();
    let mass: f64 = entries.iter().map(|&(_, p)| p).sum();
    Ok(SizePmf { entries, tail_bound: (1.0 - mass).max(0.0) })
}

/// The accompanying characteristic function of the normalized statistic:
/// the sample-size mass function summed against the Gaussian limit
/// characteristic function with the size-dependent scale and drift.
#[derive(Debug, Clone)]
pub struct AccompanyingCf {
    pmf: SizePmf,
    n: f64,
    shift: Vec<f64>,
    location: Vec<f64>,
    sign: f64,
    sigma_lim: Matrix,
}

impl AccompanyingCf {
    /// Freezes every `t`-independent ingredient: the size mass function at
    /// truncation mass `tail_eps`, the dispersed drift `Sigma a`, and the
    /// limiting covariance.
    pub fn new(
        data_model: &DataModel,
        size_model: &SizeModel,
        scheme: &NormalizationScheme,
        n: u64,
        tail_eps: f64,
    ) -> Result<Self> {
        if data_model.dim() != scheme.dim() {
            return Err(Error::DimensionMismatch(format!(
                "data model dimension {} against scheme dimension {}",
                data_model.dim(),
                scheme.dim()
            )));
        }
        let sigma_lim = asymptotic_sigma(data_model, scheme);
        let shift = sigma_lim.matvec(scheme.drift_n())?;
        let pmf = SizePmf::new(size_model, n, tail_eps)?;
        let sign = match scheme.sign_convention() {
            SignConvention::PaperMinus => -1.0,
            SignConvention::MixturePlus => 1.0,
        };
        Ok(AccompanyingCf {
            pmf,
            n: n as f64,
            shift,
            location: scheme.location_n().to_vec(),
            sign,
            sigma_lim,
        })
    }

    /// `g_n(t)`; accurate to [`Self::truncation_bound`] in modulus.
    pub fn evaluate(&self, t: &[f64]) -> Result<Complex64> {
        if t.len() != self.shift.len() {
            return Err(Error::DimensionMismatch(format!(
                "argument of dimension {} against scheme dimension {}",
                t.len(),
                self.shift.len()
            )));
        }
        let drift_phase: f64 = t.iter().zip(&self.shift).map(|(a, b)| a * b).sum();
        let quad = self.sigma_lim.quadratic_form(t)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, p) in self.pmf.iter() {
            let ratio = self.n / k as f64;
            acc += p * Complex64::from_polar((-0.5 * ratio * quad).exp(), ratio * drift_phase);
        }
        let location_phase: f64 =
            t.iter().zip(&self.location).map(|(a, b)| a * b).sum();
        Ok(acc * Complex64::cis(self.sign * location_phase))
    }

    /// Mass discarded when the size support was truncated; bounds both the
    /// normalization defect at `t = 0` and the modulus error at any `t`.
    pub fn truncation_bound(&self) -> f64 {
        self.pmf.tail_bound()
    }

    pub fn pmf(&self) -> &SizePmf {
        &self.pmf
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gig::GigParams;
    use crate::rng::RandomStream;

    #[test]
    fn empirical_cf_origin_and_single_sample() {
        let samples = vec![vec![0.3, -1.2], vec![2.0, 0.5], vec![-0.7, 0.1]];
        let at_origin = empirical_cf(&samples, &[0.0, 0.0]).unwrap();
        assert_eq!(at_origin, Complex64::new(1.0, 0.0));

        let one = vec![vec![0.4, 1.5]];
        let t = [1.2, -0.3];
        let got = empirical_cf(&one, &t).unwrap();
        let phase = 1.2 * 0.4 + (-0.3) * 1.5;
        assert!((got - Complex64::cis(phase)).norm() < 1e-15);
        assert!((got.norm() - 1.0).abs() < 1e-15);

        assert!(matches!(
            empirical_cf(&[], &[0.0]),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            empirical_cf(&one, &[1.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn empirical_cf_conjugate_symmetry_and_modulus() {
        let mut stream = RandomStream::from_master(77, &[1]);
        let samples: Vec<Vec<f64>> = (0..500)
            .map(|_| crate::mixtures::standard_normal_vector(2, &mut stream))
            .collect();
        for t in [[0.7, -1.1], [3.0, 2.0], [0.0, 4.5]] {
            let plus = empirical_cf(&samples, &t).unwrap();
            let minus = empirical_cf(&samples, &[-t[0], -t[1]]).unwrap();
            assert!((minus - plus.conj()).norm() < 1e-13);
            assert!(plus.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn neg_binomial_pmf_mass_and_mean() {
        let model = SizeModel::neg_binomial(2.0).unwrap();
        let n = 100u64;
        // The truncated mean is off by roughly the discarded mass times the
        // support scale, so a tight budget is needed to resolve the
        // floor-at-one correction of order 4e-4 to six digits.
        let pmf = SizePmf::new(&model, n, 1e-12).unwrap();
        assert!(pmf.tail_bound() <= 1e-12);
        assert!((pmf.mass() - 1.0).abs() <= 2e-12);
        // E max(1, K) = n + P(K = 0); the floor at one adds the zero mass.
        let p = 2.0 / (2.0 + n as f64);
        let expected = n as f64 + p * p;
        assert!(
            (pmf.mean() - expected).abs() < 1e-6,
            "mean {} vs {}",
            pmf.mean(),
            expected
        );
        // Spot value against the direct log-gamma formula at k = 120.
        let q = 1.0 - p;
        let direct = (ln_gamma(122.0) - ln_gamma(2.0) - ln_gamma(121.0)
            + 2.0 * p.ln()
            + 120.0 * q.ln())
        .exp();
        let found = pmf.iter().find(|&(k, _)| k == 120).unwrap().1;
        assert!((found - direct).abs() / direct < 1e-10);
    }

    #[test]
    fn mixed_poisson_point_mass_is_plain_poisson() {
        let model = SizeModel::MixedPoisson(MixingLaw::point_mass(0.35).unwrap());
        let n = 200u64;
        let pmf = SizePmf::new(&model, n, 1e-10).unwrap();
        let lambda = 70.0f64;
        assert!((pmf.mass() - 1.0).abs() < 1e-9);
        // Direct Poisson value at k = 70.
        let direct = (-lambda + 70.0 * lambda.ln() - ln_gamma(71.0)).exp();
        let found = pmf.iter().find(|&(k, _)| k == 70).unwrap().1;
        assert!((found - direct).abs() / direct < 1e-9);
        // Mean of max(1, Poisson(70)) is lambda to floating accuracy.
        assert!((pmf.mean() - lambda).abs() < 1e-6);
    }

    #[test]
    fn mixed_poisson_gig_mixing_matches_moments() {
        let w = GigParams::new(-0.5, 1.0, 1.0).unwrap();
        let law = MixingLaw::Gig(w);
        let model = SizeModel::MixedPoisson(law.clone());
        let n = 500u64;
        let pmf = SizePmf::new(&model, n, 1e-7).unwrap();
        assert!((pmf.mass() - 1.0).abs() < 1e-6);
        // E N = n E W up to the floor-at-one correction (negligible here).
        let mean_w = law.moment(1.0).unwrap();
        assert!(
            (pmf.mean() - n as f64 * mean_w).abs() / (n as f64 * mean_w) < 1e-4,
            "mean {} vs {}",
            pmf.mean(),
            n as f64 * mean_w
        );
    }

    #[test]
    fn scaled_round_point_mass_is_one_atom() {
        let model = SizeModel::ScaledRound(MixingLaw::point_mass(1.0).unwrap());
        let pmf = SizePmf::new(&model, 137, 1e-9).unwrap();
        assert_eq!(pmf.len(), 1);
        let (k, p) = pmf.iter().next().unwrap();
        assert_eq!(k, 137);
        assert_eq!(p, 1.0);
        assert_eq!(pmf.tail_bound(), 0.0);
    }

    fn gaussian_scheme_parts() -> (DataModel, NormalizationScheme) {
        let sigma = Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let data = DataModel::IidGaussian(
            crate::MvnParams::new(vec![0.0, 0.0], sigma).unwrap(),
        );
        let scheme = NormalizationScheme::new(
            1.0,
            vec![0.5, -0.25],
            vec![0.3, 0.1],
            vec![0.0, 0.0],
            SignConvention::PaperMinus,
        )
        .unwrap();
        (data, scheme)
    }

    #[test]
    fn degenerate_size_reduces_to_the_gaussian_cf() {
        // One atom at k = n makes the ratio one: g_n(t) must equal the
        // normal characteristic function with the drift and location phase.
        let (data, _) = gaussian_scheme_parts();
        let plain = NormalizationScheme::new(
            1.0,
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            SignConvention::PaperMinus,
        )
        .unwrap();
        let size = SizeModel::ScaledRound(MixingLaw::point_mass(1.0).unwrap());
        let acf = AccompanyingCf::new(&data, &size, &plain, 64, 1e-9).unwrap();
        let sigma = Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        for t in [[0.0, 0.0], [1.0, 0.0], [0.3, -0.8], [2.0, 1.5]] {
            let got = acf.evaluate(&t).unwrap();
            let expect = (-0.5 * sigma.quadratic_form(&t).unwrap()).exp();
            assert!((got - Complex64::new(expect, 0.0)).norm() < 1e-14, "{t:?}");
        }
        assert_eq!(acf.evaluate(&[0.0, 0.0]).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn matches_a_directly_summed_reference() {
        // Negative binomial sizes with drift, location, and both sign
        // conventions, against an independent direct summation of the
        // mass function and phase factors.
        let n = 50u64;
        let r = 2.0;
        let p = r / (r + n as f64);
        let q = 1.0 - p;
        let sigma = Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        for convention in [SignConvention::PaperMinus, SignConvention::MixturePlus] {
            let (data, _) = gaussian_scheme_parts();
            let scheme = NormalizationScheme::new(
                1.0,
                vec![0.5, -0.25],
                vec![0.3, 0.1],
                vec![0.0, 0.0],
                convention,
            )
            .unwrap();
            let model = SizeModel::neg_binomial(r).unwrap();
            let acf = AccompanyingCf::new(&data, &model, &scheme, n, 1e-9).unwrap();
            let sign = match convention {
                SignConvention::PaperMinus => -1.0,
                SignConvention::MixturePlus => 1.0,
            };
            let shift = sigma.matvec(&[0.5, -0.25]).unwrap();
            for t in [[0.6, -0.4], [1.5, 2.0], [-3.0, 0.2]] {
                let mut reference = Complex64::new(0.0, 0.0);
                let quad = sigma.quadratic_form(&t).unwrap();
                let ts: f64 = t.iter().zip(&shift).map(|(a, b)| a * b).sum();
                for k in 0..4000u64 {
                    let ln_pmf = ln_gamma(k as f64 + r) - ln_gamma(r)
                        - ln_gamma(k as f64 + 1.0)
                        + r * p.ln()
                        + k as f64 * q.ln();
                    let mass = ln_pmf.exp();
                    let keff = k.max(1);
                    let ratio = n as f64 / keff as f64;
                    reference += mass
                        * Complex64::from_polar(
                            (-0.5 * ratio * quad).exp(),
                            ratio * ts,
                        );
                }
                let lb: f64 = t.iter().zip([0.3, 0.1]).map(|(a, b)| a * b).sum();
                reference *= Complex64::cis(sign * lb);
                let got = acf.evaluate(&t).unwrap();
                assert!(
                    (got - reference).norm() < 1e-8 + acf.truncation_bound(),
                    "{convention:?} {t:?}: got {got}, reference {reference}"
                );
            }
        }
    }

    #[test]
    fn tenfold_truncation_change_stays_within_the_stated_bound() {
        let (data, scheme) = gaussian_scheme_parts();
        let w = GigParams::new(-0.5, 1.0, 1.0).unwrap();
        let model = SizeModel::MixedPoisson(MixingLaw::Gig(w));
        let tight = AccompanyingCf::new(&data, &model, &scheme, 300, 1e-6).unwrap();
        let loose = AccompanyingCf::new(&data, &model, &scheme, 300, 1e-5).unwrap();
        let budget = tight.truncation_bound() + loose.truncation_bound();
        for t in [[0.0, 0.0], [1.0, -1.0], [0.2, 0.4], [4.0, 2.0]] {
            let a = tight.evaluate(&t).unwrap();
            let b = loose.evaluate(&t).unwrap();
            assert!(
                (a - b).norm() <= budget + 1e-12,
                "{t:?}: gap {} vs budget {budget}",
                (a - b).norm()
            );
        }
        // t = 0 recovers the retained mass, 1 within the truncation bound.
        let at_zero = loose.evaluate(&[0.0, 0.0]).unwrap();
        assert!((at_zero.re - 1.0).abs() <= loose.truncation_bound() + 1e-12);
        assert!(at_zero.im.abs() < 1e-15);
    }
}
