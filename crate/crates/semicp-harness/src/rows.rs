//! Output row types. CSV headers and JSON keys use exactly these field
//! names; optional statistics serialize as empty CSV cells / JSON nulls.

use serde::{Deserialize, Serialize};

/// One `(lambda, n)` cell of an extinction-time sweep. Tau statistics are
/// over non-censored replicas only and absent when every replica survived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u64,
    pub lambda: f64,
    pub replicas: u64,
    pub extinct_count: u64,
    pub survived_count: u64,
    pub tau_median: Option<f64>,
    pub tau_mean: Option<f64>,
    pub tau_p95: Option<f64>,
    pub horizon: f64,
}

/// One `(lambda, n)` cell of the mean-field deviation experiment:
/// `exceed_count` replicas had sup-deviation above `epsilon` on `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldRow {
    pub n: u64,
    pub lambda: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub replicas: u64,
    pub epsilon: f64,
    pub exceed_count: u64,
    pub sup_dev_median: f64,
}

/// One `(variant, lambda, n)` cell of the coupling audit, with the earliest
/// observed order violation flattened into optional columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub variant: String,
    pub n: u64,
    pub lambda: f64,
    pub replicas: u64,
    pub violation_replicas: u64,
    pub first_violation_time: Option<f64>,
    pub first_violation_b1: Option<u64>,
    pub first_violation_g1: Option<u64>,
    pub first_violation_b2: Option<u64>,
    pub first_violation_g2: Option<u64>,
}

/// Total-variation distance between the lumped laws of the reduced and the
/// per-vertex simulators at time `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LumpingRow {
    pub n: u64,
    pub lambda: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub replicas: u64,
    pub init_b: u64,
    pub init_g: u64,
    pub tv_distance: f64,
}

/// One auxiliary-chain check: an observed frequency (or error) against its
/// threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxRow {
    pub check: String,
    pub lambda: f64,
    pub n: u64,
    pub theta: Option<f64>,
    pub replicas: u64,
    pub observed: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// One point of an integrated mean-field path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeRow {
    pub lambda: f64,
    pub t: f64,
    pub b: f64,
    pub g: f64,
}
