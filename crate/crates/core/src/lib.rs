//! Switching subgradient methods for nonsmooth constrained problems whose
//! objective and constraint are weakly convex.
//!
//! A [`ProblemInstance`] bundles value/subgradient oracles for f and g, a
//! projection onto X and the analytic constants the schedules need. The
//! [`schedules`] module turns those constants into a [`StepsizePolicy`],
//! [`solver::ssg_run`] and [`solver::sssg_run`] execute it, and
//! [`stationarity::near_stationarity`] measures the result.

pub mod checks;
pub mod data;
pub mod error;
pub mod ipp;
pub mod linalg;
pub mod oracle;
pub mod problem;
pub mod problems;
pub mod projection;
pub mod rng;
pub mod schedules;
pub mod solver;
pub mod stationarity;

pub use error::{Result, SsgError};
pub use linalg::{DenseVector, SparseVector};
pub use oracle::{Oracle, StochasticOracle, SubgradientResult};
pub use problem::{Constants, OracleSource, ProblemInstance};
pub use projection::{Ball, BoxSet, Projection, Whole};
pub use rng::RngStream;
pub use schedules::{OutputMode, StepsizePolicy};
pub use solver::{CheckpointPlan, SolverTrace};
pub use stationarity::NearStationarityReport;
