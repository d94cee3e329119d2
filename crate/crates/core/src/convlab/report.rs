//! Convergence reports: per-`n` distance rows plus the provenance needed
//! to reproduce them, with a canonical byte-stable JSON form.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io;

/// One row of a convergence report: every distance measured at one value
/// of the outer index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportRow {
    /// Outer index of the double array.
    pub n: u64,
    /// Monte Carlo replications behind the row.
    pub replications: usize,
    /// Kolmogorov-Smirnov distance of each configured projection of the
    /// normalized statistic against the projected limit law.
    pub ks_projection: Vec<f64>,
    /// Largest entry of `ks_projection`.
    pub ks_projection_max: f64,
    /// Kolmogorov-Smirnov distance of the size ratio `n / N_n` against
    /// its limit law (an upper bound when the reference distribution
    /// function is decimated; see `convlab::ks`).
    pub ks_mixing: f64,
    /// Grid supremum of the modulus gap between the empirical
    /// characteristic function of the statistic and the accompanying
    /// characteristic function.
    pub cf_gap: f64,
    /// Size-mass truncation bound baked into the accompanying
    /// characteristic function for this row.
    pub cf_truncation_bound: f64,
    /// Stratified coherency estimate.
    pub coherency: f64,
    /// Noise scale of the coherency estimate.
    pub coherency_noise_bound: f64,
}

/// The full outcome of a convergence experiment, minus wall-clock timings
/// (those vary run to run and live next to the report, not inside it, so
/// that identical configurations serialize to identical bytes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceReport {
    /// Hash of the canonical configuration serialization.
    pub config_fingerprint: String,
    /// Master seed every stream in the run was derived from.
    pub master_seed: u64,
    /// Projection directions, axes first, then fingerprint-seeded unit
    /// vectors.
    pub directions: Vec<Vec<f64>>,
    /// Standing caveat on what projection distances can certify.
    pub projection_note: String,
    /// Per-`n` rows, ascending in `n`.
    pub rows: Vec<ReportRow>,
}

/// The caveat recorded in every report.
pub const PROJECTION_NOTE: &str = "Projection distances are computed along \
finitely many fixed directions; they witness convergence along those \
directions and cannot by themselves certify weak convergence of the full \
multivariate law.";

impl ConvergenceReport {
    /// Checks the structural invariants: rows ascending in `n`, every
    /// distance finite and inside `[0, 2]`, companions nonnegative.
    pub fn validate(&self) -> Result<()> {
        if self
            .rows
            .windows(2)
            .any(|w| w[0].n >= w[1].n)
        {
            return Err(Error::InvalidParams(
                "report rows must be strictly ascending in n".into(),
            ));
        }
        let in_range = |value: f64| value.is_finite() && (0.0..=2.0).contains(&value);
        for row in &self.rows {
            let mut distances = vec![row.ks_projection_max, row.ks_mixing, row.cf_gap];
            distances.extend_from_slice(&row.ks_projection);
            if !distances.iter().copied().all(in_range) {
                return Err(Error::InvalidParams(format!(
                    "row n = {}: a distance fell outside [0, 2]",
                    row.n
                )));
            }
            let max = row
                .ks_projection
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            if row.ks_projection.is_empty() || row.ks_projection_max != max {
                return Err(Error::InvalidParams(format!(
                    "row n = {}: ks_projection_max does not match its entries",
                    row.n
                )));
            }
            if !(row.coherency.is_finite() && row.coherency >= 0.0)
                || !(row.coherency_noise_bound.is_finite()
                    && row.coherency_noise_bound >= 0.0)
                || !(row.cf_truncation_bound.is_finite()
                    && row.cf_truncation_bound >= 0.0)
            {
                return Err(Error::InvalidParams(format!(
                    "row n = {}: a companion quantity is negative or non-finite",
                    row.n
                )));
            }
        }
        Ok(())
    }

    /// Canonical JSON: fixed field order (declaration order), no maps, and
    /// every float printed as `{:.16e}` (17 significant digits), which
    /// round-trips `f64` exactly.  Byte-identical for identical reports.
    pub fn to_canonical_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
        self.serialize(&mut ser)
            .expect("in-memory serialization of plain data cannot fail");
        String::from_utf8(out).expect("serializer emits UTF-8")
    }
}

/// A convergence report next to the wall-clock time each row took.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub report: ConvergenceReport,
    /// Milliseconds spent producing each row, aligned with `report.rows`.
    pub row_wall_ms: Vec<u64>,
}

/// JSON formatter that prints every float with 17 significant digits.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}
