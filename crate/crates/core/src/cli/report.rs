//! The machine-readable analysis report.

use serde::{Deserialize, Serialize};

use crate::curve::{HyperbolicCheck, InnerClass};
use crate::germ::ChangeKind;
use crate::jets::{Cx, UniJet};
use crate::orbit::{CaptureEntry, OrbitStatus};
use crate::reduce::{DirectionReport, PredicateReport};
use crate::stable::{RegionDescriptor, StableSetKind};

use super::parse::{CurveInput, ProbeSpec};

pub const SCHEMA_ID: &str = "germdyn.report.v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: String,
    pub stage: String,
    pub input: InputEcho,
    pub germ: GermSummary,
    pub curve: Option<CurveSummary>,
    pub restriction: Option<RestrictionSummary>,
    pub classification: Option<InnerClass>,
    pub wrap: Option<WrapInfo>,
    pub reduced: Option<ReducedSummary>,
    pub directions: Vec<DirectionReport>,
    pub stable_sets: Vec<StableSetSummary>,
    pub hyperbolic: Option<HyperbolicSummary>,
    pub probes: Option<ProbeTable>,
    pub warnings: Vec<Warning>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub f1: String,
    pub f2: String,
    pub order: usize,
    pub curve: CurveInput,
    pub iterate: u32,
    pub probes: ProbeSpec,
    pub seed: u64,
    pub contact_m: Option<usize>,
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GermSummary {
    pub linear_part: [[Cx; 2]; 2],
    pub eigenvalues: [Cx; 2],
    pub diagonalizable: bool,
    /// Order of the jet actually analysed (after any iteration).
    pub order: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub g1: Vec<Cx>,
    pub g2: Vec<Cx>,
    pub nu: usize,
    pub tangent: [Cx; 2],
    pub irreducible: bool,
    /// Orders where the invariant-jet equation was resonant; the free coefficient was set to 0.
    pub non_unique: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictionSummary {
    pub theta: Vec<Cx>,
    pub inner_eigenvalue: Cx,
    pub tangent_eigenvalue: Cx,
    pub nu: usize,
    pub restriction_order: Option<usize>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WrapInfo {
    /// The analysed map is `F^n`.
    pub n: u32,
    pub reason: String,
    pub note: String,
    /// For each stable set: a sample point and its images under `F, F^2, …, F^{n-1}`.
    pub images: Vec<Vec<[Cx; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub kind: ChangeKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedSummary {
    pub k: usize,
    pub p: usize,
    pub mu: Cx,
    pub log_mu: Cx,
    pub a: Vec<Cx>,
    pub big_a: Vec<Cx>,
    pub contact: Option<usize>,
    pub technical_condition: bool,
    /// Jet order needed for `2(k+p)+2` plus the blow-ups performed.
    pub required_order: usize,
    pub blow_ups: usize,
    pub predicates: PredicateReport,
    pub log: Vec<LogEntry>,
    /// Solver exponent used for the stable sets.
    pub m: usize,
    pub refined_contact: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableSetSummary {
    pub kind: StableSetKind,
    pub index: usize,
    pub xi: Cx,
    pub dimension: usize,
    pub region: RegionDescriptor,
    pub q: Option<usize>,
    pub invariance_samples: usize,
    pub solver: Option<SolverSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub m: usize,
    pub iterations: usize,
    pub norm: f64,
    pub residual: f64,
    pub delta_history: Vec<f64>,
    pub weight_bound: f64,
    pub tail_bound: f64,
    pub derivative_ok: bool,
    pub mesh_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicSummary {
    pub check: HyperbolicCheck,
    /// Orbits tested against `γ2` (only when `Γ` is a graph over `x`).
    pub probes: Vec<AsymptoticProbe>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticProbe {
    pub start: [Cx; 2],
    pub status: OrbitStatus,
    /// Largest `N` such that all orders `1..=N` pass.
    pub passed_through: usize,
    pub tested: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeTable {
    pub seed: u64,
    pub count: usize,
    pub radius: f64,
    pub max_iter: usize,
    pub conv_radius: f64,
    pub rows: Vec<ProbeRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub id: usize,
    /// `set:<i>` for seeds drawn inside stable set `i`, `circle` for generic seeds.
    pub source: String,
    pub start: [Cx; 2],
    pub status: OrbitStatus,
    pub iterations: usize,
    pub last: [Cx; 2],
    pub capture: CaptureEntry,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub stage: String,
    pub message: String,
}

pub fn coeffs(j: &UniJet) -> Vec<Cx> {
    (0..=j.order()).map(|i| j.coeff(i)).collect()
}
