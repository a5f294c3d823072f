//! Robust PCA: split an observed matrix `Y` into a low-rank part `X` and a
//! sparse part `S`.
//!
//! Three solvers share one observation model, `Y = X + S + E` with
//! `E ~ N(0, λ)` entrywise:
//!
//! * [`eb::solve_eb`]: empirical-Bayes hyperparameter learning. Each column
//!   of `Y` is modelled with covariance `Ψ + diag(γ_j) + λI`; the posterior
//!   means give `X̂` and `Ŝ`.
//! * [`map::solve_map`]: the MAP majorization-minimization baseline, which is
//!   the same iteration with the posterior covariance terms dropped.
//! * [`pcp::solve_pcp`]: convex principal component pursuit via an inexact
//!   augmented Lagrangian method.
//!
//! [`simgen`] produces seeded planted instances and [`metrics`] scores
//! recoveries against them.
//!
//! ```
//! use rpca_core::{eb, metrics, simgen};
//!
//! let spec = simgen::ExperimentSpec::new(10, 40, 1, 0.1, 7).unwrap();
//! let inst = simgen::gen_rpca(&spec);
//! let out = eb::solve_eb(&inst.y, &eb::SolverConfig::default()).unwrap();
//! let angle = metrics::mean_subspace_angle(&inst.x_true, &out.x_hat, 1).unwrap();
//! assert!(angle < 1.0);
//! ```

pub mod eb;
pub mod error;
pub mod map;
pub mod matrix;
pub mod metrics;
pub mod objective;
pub mod pcp;
pub mod rng;
pub mod simgen;

mod linalg;

pub use eb::{Decomposition, EbState, SolverConfig};
pub use error::{Error, Result};
pub use matrix::DenseMatrix;
pub use objective::ObjectiveParams;
pub use pcp::PcpConfig;
