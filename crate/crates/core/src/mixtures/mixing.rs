//! Mixing laws on the positive half-line and their quadrature rules.
//!
//! A normal variance-mean mixture is an expectation over a mixing law `G`;
//! everything the mixture machinery needs from `G` is the ability to
//! sample it and to take expectations `E[phi(Z)]` of smooth functionals.
//! For the continuous (GIG) case the expectation is discretized once into
//! a fixed node/weight rule harvested from adaptive quadrature of the
//! density, so that downstream code can evaluate many functionals (CDF
//! values at every sample point, say) at fixed cost per node.

use crate::gig::{gig_log_pdf, gig_moment, gig_sample, GigParams};
use crate::quad;
use crate::rng::RandomStream;
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A probability law on `(0, inf)` used as the mixing distribution of a
/// normal variance-mean mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixingLawRaw", into = "MixingLawRaw")]
pub enum MixingLaw {
    /// Generalized inverse Gaussian mixing.
    Gig(GigParams),
    /// Degenerate mixing at a single positive value.
    PointMass(f64),
    /// Equal-weight empirical law on a positive sample (kept sorted).
    Empirical(Vec<f64>),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum MixingLawRaw {
    Gig { params: GigParams },
    PointMass { value: f64 },
    Empirical { sample: Vec<f64> },
}

impl TryFrom<MixingLawRaw> for MixingLaw {
    type Error = Error;
    fn try_from(raw: MixingLawRaw) -> Result<Self> {
        match raw {
            MixingLawRaw::Gig { params } => Ok(MixingLaw::Gig(params)),
            MixingLawRaw::PointMass { value } => MixingLaw::point_mass(value),
            MixingLawRaw::Empirical { sample } => MixingLaw::empirical(sample),
        }
    }
}

impl From<MixingLaw> for MixingLawRaw {
    fn from(law: MixingLaw) -> Self {
        match law {
            MixingLaw::Gig(params) => MixingLawRaw::Gig { params },
            MixingLaw::PointMass(value) => MixingLawRaw::PointMass { value },
            MixingLaw::Empirical(sample) => MixingLawRaw::Empirical { sample },
        }
    }
}

impl MixingLaw {
    pub fn point_mass(value: f64) -> Result<Self> {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "point-mass mixing requires a finite positive value (got {value})"
            )));
        }
        Ok(MixingLaw::PointMass(value))
    }

    pub fn empirical(mut sample: Vec<f64>) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptyInput("empirical mixing sample".into()));
        }
        if sample.iter().any(|z| !z.is_finite() || *z <= 0.0) {
            return Err(Error::InvalidParams(
                "empirical mixing sample must be positive and finite".into(),
            ));
        }
        sample.sort_by(f64::total_cmp);
        Ok(MixingLaw::Empirical(sample))
    }

    /// The law of `1/Z`.
    ///
    /// Generalized inverse Gaussian laws are closed under reciprocals
    /// (order negated, parameters swapped); the other kinds map their
    /// support pointwise.
    pub fn reciprocal(&self) -> MixingLaw {
        match self {
            MixingLaw::Gig(p) => MixingLaw::Gig(crate::gig::gig_reciprocal(p)),
            MixingLaw::PointMass(v) => MixingLaw::PointMass(1.0 / v),
            MixingLaw::Empirical(sample) => {
                let mut flipped: Vec<f64> = sample.iter().map(|z| 1.0 / z).collect();
                flipped.sort_by(f64::total_cmp);
                MixingLaw::Empirical(flipped)
            }
        }
    }

    /// Moment `E Z^order`.
    pub fn moment(&self, order: f64) -> Result<f64> {
        match self {
            MixingLaw::Gig(p) => gig_moment(order, p),
            MixingLaw::PointMass(v) => Ok(v.powf(order)),
            MixingLaw::Empirical(sample) => {
                Ok(sample.iter().map(|z| z.powf(order)).sum::<f64>() / sample.len() as f64)
            }
        }
    }

    /// One draw from the mixing law.
    pub fn draw(&self, stream: &mut RandomStream) -> f64 {
        match self {
            MixingLaw::Gig(p) => gig_sample(p, 1, stream)[0],
            MixingLaw::PointMass(v) => *v,
            MixingLaw::Empirical(sample) => sample[stream.random_range(0..sample.len())],
        }
    }

    /// `count` independent draws.
    pub fn sample(&self, count: usize, stream: &mut RandomStream) -> Vec<f64> {
        match self {
            MixingLaw::Gig(p) => gig_sample(p, count, stream),
            _ => (0..count).map(|_| self.draw(stream)).collect(),
        }
    }

    /// Discretizes the law into nodes and weights so that
    /// `sum w_j phi(z_j)` approximates `E[phi(Z)]` to about `abs_tol`
    /// (times the smoothness of `phi`) per evaluation.
    ///
    /// Point-mass and empirical laws are exact; the GIG law is discretized
    /// by harvesting the panels of an adaptive integration of its density
    /// in log coordinates, then normalizing the weights to total mass one.
    pub fn quadrature_nodes(&self, abs_tol: f64) -> Result<MixingNodes> {
        match self {
            MixingLaw::PointMass(v) => Ok(MixingNodes { nodes: vec![(*v, 1.0)] }),
            MixingLaw::Empirical(sample) => {
                let w = 1.0 / sample.len() as f64;
                Ok(MixingNodes { nodes: sample.iter().map(|&z| (z, w)).collect() })
            }
            MixingLaw::Gig(p) => gig_quadrature_nodes(p, abs_tol, |_| f64::INFINITY),
        }
    }

    /// Like [`MixingLaw::quadrature_nodes`], but dense enough that count
    /// kernels of a Poisson family with mean `n z` are resolved by several
    /// nodes each.
    ///
    /// Near `z` such a kernel has width `max(sqrt(n z), 1) / n`, i.e.
    /// `max(1 / sqrt(n z), 1 / (n z))` in log coordinates.  The plain
    /// density-adapted rule is blind to that scale: once `n` makes the
    /// kernels narrower than its node spacing, mixing them produces an
    /// aliased comb instead of a smooth family.  Here panels are capped at
    /// three quarters of the local kernel width, so every kernel overlaps
    /// multiple panels.  Point-mass and empirical laws are exact atoms and
    /// need no refinement.
    pub fn poisson_resolved_nodes(&self, abs_tol: f64, n: u64) -> Result<MixingNodes> {
        match self {
            MixingLaw::Gig(p) => {
                let nf = n as f64;
                gig_quadrature_nodes(p, abs_tol, move |t| {
                    let lambda = nf * t.exp();
                    0.75 * lambda.sqrt().max(1.0) / lambda
                })
            }
            _ => self.quadrature_nodes(abs_tol),
        }
    }
}

/// Upper bound on panels when discretizing a GIG law; generous compared to
/// the ~10^4 panels the narrowest admissible kernels require.
const MAX_NODE_PANELS: usize = 200_000;

/// Discretizes a GIG law into quadrature nodes in log coordinates.
///
/// The integration range is certified by expanding windows from the
/// integrand mode until two consecutive windows carry less than the tail
/// budget; the range is then covered by panels no wider than
/// `max_panel(t)` at right edge `t`, each contributing its Gauss–Kronrod
/// nodes.  Walking right to left makes the cap sound for kernel scales
/// that shrink as `t` grows: the admissible width of a panel is set by
/// its narrow end, which is then the known edge.  Weight = panel weight
/// times the density in t-space, normalized so the discrete law has
/// total mass exactly one.
fn gig_quadrature_nodes(
    p: &GigParams,
    abs_tol: f64,
    max_panel: impl Fn(f64) -> f64,
) -> Result<MixingNodes> {
    let params = *p;
    let g = move |t: f64| (gig_log_pdf(t.exp(), &params) + t).exp();
    let anchor = p.log_integrand_mode();
    let budget = (abs_tol / 64.0).max(1e-300);
    let mut lo = anchor - 2.0;
    let mut hi = anchor + 2.0;
    for (edge, dir) in [(&mut lo, -1.0), (&mut hi, 1.0)] {
        let mut quiet = 0;
        for _ in 0..256 {
            let (wa, wb) = if dir < 0.0 {
                (*edge - 4.0, *edge)
            } else {
                (*edge, *edge + 4.0)
            };
            let w = quad::integrate(g, wa, wb, budget, 0.0)?;
            *edge = if dir < 0.0 { wa } else { wb };
            if w.value.abs() + w.abs_error < budget {
                quiet += 1;
                if quiet >= 2 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        if quiet < 2 {
            return Err(Error::QuadratureNonConvergence {
                achieved: f64::INFINITY,
                requested: budget,
            });
        }
    }
    // The expansion terminates on two consecutive quiet windows per side,
    // so the outer 8.0 of each side carries less mass than the budget.
    // Kernel resolution is pointless where there is no mass: refine only
    // the core and cover each quiet tail with a single coarse panel.
    let core_lo = lo + 8.0;
    let core_hi = hi - 8.0;
    let span = hi - lo;
    let mut raw: Vec<(f64, f64)> = Vec::new();
    for (a, b) in [(lo, core_lo), (core_hi, hi)] {
        let (mut part, _) = quad::kronrod_nodes(g, a, b, abs_tol * (b - a) / span)?;
        raw.append(&mut part);
    }
    let mut b = core_hi;
    let mut panels = 0usize;
    while b > core_lo {
        panels += 1;
        if panels > MAX_NODE_PANELS {
            return Err(Error::Overflow(format!(
                "mixing-law discretization needs more than {MAX_NODE_PANELS} panels"
            )));
        }
        let h = max_panel(b).max(1e-9);
        // Absorb a trailing sliver into the final panel rather than
        // emitting a degenerate one.
        let a = if b - 1.5 * h <= core_lo { core_lo } else { b - h };
        let (mut part, _) = quad::kronrod_nodes(g, a, b, abs_tol * (b - a) / span)?;
        raw.append(&mut part);
        b = a;
    }
    let mut nodes: Vec<(f64, f64)> = raw.iter().map(|&(t, w)| (t.exp(), w * g(t))).collect();
    let total: f64 = nodes.iter().map(|&(_, w)| w).sum();
    if !(total.is_finite() && total > 0.0) || (total - 1.0).abs() > 1e-6 {
        return Err(Error::QuadratureNonConvergence {
            achieved: (total - 1.0).abs(),
            requested: abs_tol,
        });
    }
    for node in &mut nodes {
        node.1 /= total;
    }
    Ok(MixingNodes { nodes })
}

/// Discrete node/weight representation of a mixing law.
#[derive(Debug, Clone)]
pub struct MixingNodes {
    nodes: Vec<(f64, f64)>,
}

impl MixingNodes {
    /// `E[phi(Z)]` under the discretized law.
    pub fn expectation<F: FnMut(f64) -> f64>(&self, mut phi: F) -> f64 {
        self.nodes.iter().map(|&(z, w)| w * phi(z)).sum()
    }

    /// The `(node, weight)` pairs; weights sum to one.
    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_validate() {
        assert!(MixingLaw::point_mass(0.0).is_err());
        assert!(MixingLaw::point_mass(-1.0).is_err());
        assert!(MixingLaw::empirical(vec![]).is_err());
        assert!(MixingLaw::empirical(vec![1.0, -2.0]).is_err());
        let law = MixingLaw::empirical(vec![3.0, 1.0, 2.0]).unwrap();
        if let MixingLaw::Empirical(s) = &law {
            assert_eq!(s, &vec![1.0, 2.0, 3.0]);
        } else {
            panic!("wrong variant");
        }
    }

    #[test]
    fn serde_tagged_form() {
        let law = MixingLaw::Gig(GigParams::new(-0.5, 1.0, 1.0).unwrap());
        let json = serde_json::to_string(&law).unwrap();
        assert!(json.contains("\"kind\":\"gig\""), "{json}");
        let back: MixingLaw = serde_json::from_str(&json).unwrap();
        assert_eq!(law, back);
        let bad: std::result::Result<MixingLaw, _> =
            serde_json::from_str(r#"{"kind":"point_mass","value":-1.0}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn moments_agree_across_kinds() {
        let gig = MixingLaw::Gig(GigParams::new(1.0, 0.0, 2.0).unwrap());
        assert!((gig.moment(1.0).unwrap() - 1.0).abs() < 1e-12);
        let pm = MixingLaw::point_mass(2.5).unwrap();
        assert!((pm.moment(2.0).unwrap() - 6.25).abs() < 1e-15);
        let emp = MixingLaw::empirical(vec![1.0, 3.0]).unwrap();
        assert!((emp.moment(1.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gig_nodes_reproduce_moments_and_transforms() {
        let sets = [
            GigParams::new(-0.5, 1.0, 1.0).unwrap(),
            GigParams::new(2.0, 3.0, 1.0).unwrap(),
            GigParams::new(1.0, 0.0, 2.0).unwrap(),
            GigParams::new(-2.5, 1.0, 0.0).unwrap(),
        ];
        for (i, p) in sets.iter().enumerate() {
            let law = MixingLaw::Gig(*p);
            let nodes = law.quadrature_nodes(1e-10).unwrap();
            // Total mass is normalized to one.
            assert!((nodes.expectation(|_| 1.0) - 1.0).abs() < 1e-13);
            // Bounded functionals are what the rule is for; the Laplace
            // transform E exp(-s Z) has the independent closed form
            // norm(nu, mu, lambda) / norm(nu, mu, lambda + 2 s).
            for s in [0.5, 2.0] {
                let shifted = GigParams::new(p.nu(), p.mu(), p.lambda() + 2.0 * s).unwrap();
                let exact = (p.log_norm() - shifted.log_norm()).exp();
                let discrete = nodes.expectation(|z| (-s * z).exp());
                assert!(
                    (discrete - exact).abs() < 5e-9,
                    "transform at {s} for {p:?}: {discrete} vs {exact}"
                );
            }
            // Power moments grow along the tails, so restrict them to
            // parameter sets whose weighted integrands stay light: the
            // last set has a power-law right tail of index 2.5 where the
            // density-built rule cannot certify E[Z^2] (it barely exists).
            let orders: &[f64] = if i == 3 { &[-1.0] } else { &[1.0, 2.0, -1.0] };
            for &order in orders {
                let closed = match gig_moment(order, p) {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                let discrete = nodes.expectation(|z| z.powf(order));
                assert!(
                    ((discrete - closed) / closed).abs() < 1e-8,
                    "order {order} for {p:?}: {discrete} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn point_and_empirical_nodes_are_exact() {
        let pm = MixingLaw::point_mass(3.0).unwrap();
        let nodes = pm.quadrature_nodes(1e-10).unwrap();
        assert_eq!(nodes.len(), 1);
        assert_eq!(nodes.expectation(|z| z * z), 9.0);
        let emp = MixingLaw::empirical(vec![1.0, 2.0, 4.0]).unwrap();
        let nodes = emp.quadrature_nodes(1e-10).unwrap();
        assert_eq!(nodes.len(), 3);
        assert!((nodes.expectation(|z| z) - 7.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn reciprocal_laws() {
        let gig = MixingLaw::Gig(GigParams::new(1.5, 2.0, 3.0).unwrap());
        if let MixingLaw::Gig(q) = gig.reciprocal() {
            assert_eq!((q.nu(), q.mu(), q.lambda()), (-1.5, 3.0, 2.0));
        } else {
            panic!("wrong variant");
        }
        assert_eq!(
            MixingLaw::point_mass(4.0).unwrap().reciprocal(),
            MixingLaw::PointMass(0.25)
        );
        let emp = MixingLaw::empirical(vec![0.5, 2.0]).unwrap().reciprocal();
        assert_eq!(emp, MixingLaw::Empirical(vec![0.5, 2.0]));
        // Involution on every kind (dyadic values keep reciprocals exact).
        for law in [
            MixingLaw::Gig(GigParams::new(-0.5, 1.0, 1.0).unwrap()),
            MixingLaw::point_mass(4.0).unwrap(),
            MixingLaw::empirical(vec![1.0, 2.0, 8.0]).unwrap(),
        ] {
            assert_eq!(law.reciprocal().reciprocal(), law);
        }
    }

    #[test]
    fn draws_are_deterministic_and_positive() {
        let law = MixingLaw::Gig(GigParams::new(0.5, 1.0, 2.0).unwrap());
        let a = law.sample(16, &mut RandomStream::from_master(3, &[9]));
        let b = law.sample(16, &mut RandomStream::from_master(3, &[9]));
        assert_eq!(a, b);
        assert!(a.iter().all(|z| *z > 0.0));
        let emp = MixingLaw::empirical(vec![1.0, 2.0]).unwrap();
        let draws = emp.sample(100, &mut RandomStream::from_master(3, &[10]));
        assert!(draws.iter().all(|z| *z == 1.0 || *z == 2.0));
    }
}
