use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use rpca_core::eb::{solve_eb, SolverConfig};
use rpca_core::map::solve_map;
use rpca_core::metrics::{mean_subspace_angle, normalized_mse};
use rpca_core::pcp::{solve_pcp, PcpConfig};
use rpca_core::simgen::{gen_rpca, ExperimentSpec};
use rpca_core::{Decomposition, Error};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, clap::ValueEnum)]
pub enum Method {
    Eb,
    Map,
    Pcp,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Eb => "eb",
            Method::Map => "map",
            Method::Pcp => "pcp",
        }
    }

    pub fn solve(self, y: &rpca_core::DenseMatrix, configs: &MethodConfigs) -> rpca_core::Result<Decomposition> {
        match self {
            Method::Eb => solve_eb(y, &configs.solver),
            Method::Map => solve_map(y, &configs.solver),
            Method::Pcp => solve_pcp(y, &configs.pcp),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eb" => Ok(Method::Eb),
            "map" => Ok(Method::Map),
            "pcp" => Ok(Method::Pcp),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

/// Settings for every method; each trial picks the one it needs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MethodConfigs {
    pub solver: SolverConfig,
    pub pcp: PcpConfig,
}

/// One row of the report CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub method: String,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "rank")]
    pub r: usize,
    pub rho: f64,
    pub seed: u64,
    #[serde(rename = "iterations")]
    pub iterations_used: usize,
    pub mse_norm: f64,
    pub angle_deg: f64,
    pub runtime_ms: u64,
    pub converged: bool,
}

impl TrialRecord {
    /// Equality ignoring `runtime_ms`.
    pub fn same_outcome(&self, other: &Self) -> bool {
        Self { runtime_ms: 0, ..self.clone() } == Self { runtime_ms: 0, ..other.clone() }
    }
}

/// Generates the planted instance for `spec`, runs `method` on it and scores
/// the estimate.
///
/// Solver errors do not abort: the record comes back with
/// `converged = false` and NaN metrics. An estimate whose rank is below the
/// planted rank is scored at 90°.
pub fn run_trial(spec: &ExperimentSpec, method: Method, configs: &MethodConfigs) -> TrialRecord {
    let inst = gen_rpca(spec);
    let start = Instant::now();
    let outcome = method.solve(&inst.y, configs);
    let runtime_ms = start.elapsed().as_millis() as u64;
    let mut record = TrialRecord {
        method: method.to_string(),
        m: spec.m,
        n: spec.n,
        r: spec.r,
        rho: spec.rho,
        seed: spec.seed,
        iterations_used: 0,
        mse_norm: f64::NAN,
        angle_deg: f64::NAN,
        runtime_ms,
        converged: false,
    };
    if let Ok(d) = outcome {
        record.iterations_used = d.iterations_used;
        record.converged = d.converged;
        record.mse_norm = normalized_mse(&inst.x_true, &d.x_hat).unwrap_or(f64::NAN);
        record.angle_deg = match mean_subspace_angle(&inst.x_true, &d.x_hat, spec.r) {
            Ok(a) => a,
            Err(Error::RankDeficient { .. }) => 90.0,
            Err(_) => f64::NAN,
        };
    }
    record
}
