//! The generalized inverse Gaussian (GIG) family.
//!
//! `GigParams { nu, mu, lambda }` names the law with density proportional
//! to `x^{nu-1} exp(-(mu/x + lambda x)/2)` on the positive half-line.  The
//! admissible parameter region splits into three branches:
//!
//! * `general` (`mu > 0`, `lambda > 0`): normalizing constant through the
//!   modified Bessel function `K_nu`;
//! * `gamma_limit` (`mu = 0`, requires `nu > 0`): the gamma law with shape
//!   `nu` and rate `lambda / 2`, reached as the analytic limit `mu -> 0`;
//! * `inv_gamma_limit` (`lambda = 0`, requires `nu < 0`): the inverse gamma
//!   law with shape `-nu` and scale `mu / 2`.
//!
//! The family is closed under reciprocals: if `X` follows
//! `GIG(nu, mu, lambda)` then `1/X` follows `GIG(-nu, lambda, mu)`
//! ([`gig_reciprocal`]).  Moments of every real order exist in the general
//! branch and are Bessel-function ratios; the boundary branches lose
//! moments in one direction, and [`gig_moment`] reports divergence
//! explicitly.
//!
//! Sampling uses the mode-shifted ratio-of-uniforms method for the general
//! branch, whose acceptance probability stays bounded away from zero over
//! the whole parameter domain, and standard gamma-based samplers on the
//! boundary branches.

use crate::quad;
use crate::rng::RandomStream;
use crate::specfun::{bessel_k_log, ln_gamma};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

/// Validated parameters `(nu, mu, lambda)` of a generalized inverse
/// Gaussian law.
///
/// Construction enforces the domain table: `mu > 0, lambda >= 0` when
/// `nu < 0`; `mu > 0, lambda > 0` when `nu = 0`; `mu >= 0, lambda > 0`
/// when `nu > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GigParamsRaw", into = "GigParamsRaw")]
pub struct GigParams {
    nu: f64,
    mu: f64,
    lambda: f64,
}

/// Serialization shadow of [`GigParams`]; deserializing re-validates.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GigParamsRaw {
    nu: f64,
    mu: f64,
    lambda: f64,
}

impl TryFrom<GigParamsRaw> for GigParams {
    type Error = Error;
    fn try_from(raw: GigParamsRaw) -> Result<Self> {
        GigParams::new(raw.nu, raw.mu, raw.lambda)
    }
}

impl From<GigParams> for GigParamsRaw {
    fn from(p: GigParams) -> Self {
        GigParamsRaw { nu: p.nu, mu: p.mu, lambda: p.lambda }
    }
}

/// The analytic branch a [`GigParams`] value falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GigBranch {
    General,
    GammaLimit,
    InvGammaLimit,
}

/// Largest Bessel order the density kernels accept.
const MAX_ABS_NU: f64 = 500.0;

impl GigParams {
    pub fn new(nu: f64, mu: f64, lambda: f64) -> Result<Self> {
        if !nu.is_finite() || !mu.is_finite() || !lambda.is_finite() {
            return Err(Error::InvalidParams(
                "GIG parameters must be finite".into(),
            ));
        }
        if nu.abs() > MAX_ABS_NU {
            return Err(Error::InvalidParams(format!(
                "GIG order |nu| must not exceed {MAX_ABS_NU} (got {nu})"
            )));
        }
        if mu < 0.0 || lambda < 0.0 {
            return Err(Error::InvalidParams(format!(
                "GIG requires mu >= 0 and lambda >= 0 (got mu={mu}, lambda={lambda})"
            )));
        }
        let ok = if nu < 0.0 {
            mu > 0.0
        } else if nu == 0.0 {
            mu > 0.0 && lambda > 0.0
        } else {
            lambda > 0.0
        };
        if !ok {
            return Err(Error::InvalidParams(format!(
                "GIG domain violated: nu={nu} requires {}",
                if nu < 0.0 {
                    "mu > 0 (lambda >= 0)"
                } else if nu == 0.0 {
                    "mu > 0 and lambda > 0"
                } else {
                    "lambda > 0 (mu >= 0)"
                }
            )));
        }
        if !(mu * lambda).is_finite() {
            return Err(Error::InvalidParams(
                "GIG requires mu * lambda to be finite".into(),
            ));
        }
        Ok(GigParams { nu, mu, lambda })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Which analytic branch the parameters select.
    pub fn branch(&self) -> GigBranch {
        if self.mu == 0.0 {
            GigBranch::GammaLimit
        } else if self.lambda == 0.0 {
            GigBranch::InvGammaLimit
        } else {
            GigBranch::General
        }
    }

    /// `sqrt(mu * lambda)`, the concentration parameter of the general
    /// branch.
    fn omega(&self) -> f64 {
        (self.mu * self.lambda).sqrt()
    }

    /// Log normalizing constant: the density is
    /// `exp(log_norm) * x^{nu-1} * exp(-(mu/x + lambda x)/2)`.
    pub(crate) fn log_norm(&self) -> f64 {
        match self.branch() {
            GigBranch::General => {
                let omega = self.omega();
                let ln_k = bessel_k_log(self.nu, omega)
                    .expect("order and argument are validated at construction")
                    .log_magnitude;
                0.5 * self.nu * (self.lambda.ln() - self.mu.ln())
                    - std::f64::consts::LN_2
                    - ln_k
            }
            GigBranch::GammaLimit => {
                self.nu * (self.lambda / 2.0).ln() - ln_gamma(self.nu)
            }
            GigBranch::InvGammaLimit => {
                -self.nu * (self.mu / 2.0).ln() - ln_gamma(-self.nu)
            }
        }
    }

    /// Mode of the integrand `x * pdf(x)` in log coordinates `t = ln x`
    /// (used to anchor CDF and mixing quadrature).
    pub(crate) fn log_integrand_mode(&self) -> f64 {
        let y = match self.branch() {
            GigBranch::General => {
                (self.nu + (self.nu * self.nu + self.mu * self.lambda).sqrt()) / self.lambda
            }
            GigBranch::GammaLimit => 2.0 * self.nu / self.lambda,
            GigBranch::InvGammaLimit => -self.mu / (2.0 * self.nu),
        };
        y.ln()
    }
}

/// Natural log of the GIG density; `-inf` for `x` outside the support.
pub fn gig_log_pdf(x: f64, p: &GigParams) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return f64::NEG_INFINITY;
    }
    p.log_norm() + (p.nu - 1.0) * x.ln() - 0.5 * (p.mu / x + p.lambda * x)
}

/// GIG density at `x`; zero for `x <= 0`.
pub fn gig_pdf(x: f64, p: &GigParams) -> f64 {
    gig_log_pdf(x, p).exp()
}

/// GIG distribution function by adaptive quadrature of the density in log
/// coordinates; absolute error at most `1e-8`.
pub fn gig_cdf(x: f64, p: &GigParams) -> Result<f64> {
    if !(x > 0.0) {
        return Ok(0.0);
    }
    // Integrate pdf(e^t) e^t for t in (-inf, ln x]; anchor the tail sweep
    // left of the integrand's mode so the bulk is never skipped.
    let anchor = p.log_integrand_mode() - 2.0;
    let params = *p;
    let outcome = quad::integrate_left_tail(
        move |t| (gig_log_pdf(t.exp(), &params) + t).exp(),
        x.ln(),
        anchor,
        1e-10,
    )?;
    Ok(outcome.value.clamp(0.0, 1.0))
}

/// Draws `count` independent GIG samples from `stream`.
///
/// `count = 0` returns an empty vector.  The draw sequence is a pure
/// function of the stream state.
pub fn gig_sample(p: &GigParams, count: usize, stream: &mut RandomStream) -> Vec<f64> {
    match p.branch() {
        GigBranch::General => {
            let sampler = RatioOfUniforms::new(p);
            (0..count).map(|_| sampler.draw(stream)).collect()
        }
        GigBranch::GammaLimit => {
            let gamma = Gamma::new(p.nu, 2.0 / p.lambda)
                .expect("shape and scale are validated at construction");
            (0..count)
                .map(|_| loop {
                    let v = gamma.sample(stream);
                    if v > 0.0 && v.is_finite() {
                        break v;
                    }
                })
                .collect()
        }
        GigBranch::InvGammaLimit => {
            let gamma = Gamma::new(-p.nu, 1.0)
                .expect("shape is validated at construction");
            let scale = p.mu / 2.0;
            (0..count)
                .map(|_| loop {
                    let g = gamma.sample(stream);
                    let v = scale / g;
                    if v > 0.0 && v.is_finite() {
                        break v;
                    }
                })
                .collect()
        }
    }
}

/// Moment `E X^order`, in closed form.
///
/// General branch: `(mu/lambda)^{order/2} K_{nu+order}(omega) / K_nu(omega)`.
/// Boundary branches use the gamma / inverse-gamma moment formulas and
/// report divergence when the moment does not exist.
pub fn gig_moment(order: f64, p: &GigParams) -> Result<f64> {
    if !order.is_finite() {
        return Err(Error::Domain(format!("moment order must be finite (got {order})")));
    }
    if order == 0.0 {
        return Ok(1.0);
    }
    let log_moment = match p.branch() {
        GigBranch::General => {
            let omega = p.omega();
            let shifted = bessel_k_log(p.nu + order, omega)?;
            let base = bessel_k_log(p.nu, omega)?;
            0.5 * order * (p.mu.ln() - p.lambda.ln()) + shifted.log_magnitude
                - base.log_magnitude
        }
        GigBranch::GammaLimit => {
            // Gamma(shape nu, rate lambda/2): E X^p = Gamma(nu+p) /
            // (Gamma(nu) (lambda/2)^p), finite iff nu + p > 0.
            if p.nu + order <= 0.0 {
                return Err(Error::MomentDiverges {
                    order,
                    family: format!("GIG gamma branch (nu={}, lambda={})", p.nu, p.lambda),
                });
            }
            ln_gamma(p.nu + order) - ln_gamma(p.nu) - order * (p.lambda / 2.0).ln()
        }
        GigBranch::InvGammaLimit => {
            // Inverse gamma(shape -nu, scale mu/2): E X^p = (mu/2)^p
            // Gamma(-nu-p) / Gamma(-nu), finite iff -nu - p > 0.
            if -p.nu - order <= 0.0 {
                return Err(Error::MomentDiverges {
                    order,
                    family: format!("GIG inverse-gamma branch (nu={}, mu={})", p.nu, p.mu),
                });
            }
            order * (p.mu / 2.0).ln() + ln_gamma(-p.nu - order) - ln_gamma(-p.nu)
        }
    };
    let value = log_moment.exp();
    if !value.is_finite() {
        return Err(Error::Overflow(format!(
            "moment of order {order} exceeds f64 range (log value {log_moment:.3})"
        )));
    }
    Ok(value)
}

/// The reciprocal law: if `X ~ GIG(nu, mu, lambda)` then `1/X` has the
/// returned parameters `(-nu, lambda, mu)`.
pub fn gig_reciprocal(p: &GigParams) -> GigParams {
    GigParams::new(-p.nu, p.lambda, p.mu)
        .expect("the GIG domain table is symmetric under (nu, mu, lambda) -> (-nu, lambda, mu)")
}

/// Mode-shifted ratio-of-uniforms sampler for the standardized general
/// branch: `Y` with density proportional to
/// `y^{nu-1} exp(-(omega/2)(y + 1/y))`, returned as `X = sqrt(mu/lambda) Y`.
struct RatioOfUniforms {
    nu: f64,
    omega: f64,
    scale: f64,
    mode: f64,
    log_q_mode: f64,
    u_lo: f64,
    u_hi: f64,
}

impl RatioOfUniforms {
    fn new(p: &GigParams) -> Self {
        let nu = p.nu;
        let omega = p.omega();
        let scale = (p.mu / p.lambda).sqrt();
        let nu_m1 = nu - 1.0;
        let mode = (nu_m1 + (nu_m1 * nu_m1 + omega * omega).sqrt()) / omega;
        let log_q = |y: f64| nu_m1 * y.ln() - 0.5 * omega * (y + 1.0 / y);
        let log_q_mode = log_q(mode);
        // The u-extent of the acceptance region {(u, v): 0 < v <=
        // exp(r(mode + u/v)/2)} is attained where
        // d/dy [(y - mode) exp(r(y)/2)] = 0, i.e. at roots of
        // h(y) = 1 + (y - mode) r'(y) / 2 on either side of the mode.
        let h = |y: f64| {
            let r_prime = nu_m1 / y + 0.5 * omega * (1.0 / (y * y) - 1.0);
            1.0 + (y - mode) * r_prime / 2.0
        };
        let left = {
            let mut lo = mode / 2.0;
            while h(lo) > 0.0 && lo > f64::MIN_POSITIVE {
                lo /= 2.0;
            }
            bisect_sign_change(&h, lo, mode)
        };
        let right = {
            let mut hi = mode * 2.0;
            while h(hi) > 0.0 && hi < f64::MAX / 4.0 {
                hi *= 2.0;
            }
            bisect_sign_change(&h, mode, hi)
        };
        let envelope = |y: f64| (y - mode) * (0.5 * (log_q(y) - log_q_mode)).exp();
        // Inflate the exact extrema slightly: any box containing the
        // acceptance region is valid, and the margin absorbs root-finding
        // slack without affecting correctness.
        let u_lo = envelope(left) * 1.0001;
        let u_hi = envelope(right) * 1.0001;
        RatioOfUniforms { nu, omega, scale, mode, log_q_mode, u_lo, u_hi }
    }

    fn draw(&self, stream: &mut RandomStream) -> f64 {
        let nu_m1 = self.nu - 1.0;
        loop {
            // v in (0, 1]: the acceptance region's v-extent is
            // exp(r(mode)/2) = 1.
            let v = 1.0 - stream.random::<f64>();
            let u = self.u_lo + (self.u_hi - self.u_lo) * stream.random::<f64>();
            let y = self.mode + u / v;
            if y <= 0.0 {
                continue;
            }
            let r = nu_m1 * y.ln() - 0.5 * self.omega * (y + 1.0 / y) - self.log_q_mode;
            if 2.0 * v.ln() <= r {
                return self.scale * y;
            }
        }
    }
}

/// Bisection for a sign change of `h` on `[lo, hi]` with `h(lo) <= 0 <= h(hi)`
/// or the reverse; 200 iterations pin the root to full f64 resolution.
fn bisect_sign_change<F: Fn(f64) -> f64>(h: &F, mut lo: f64, mut hi: f64) -> f64 {
    let sign_lo = h(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (h(mid) > 0.0) == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
