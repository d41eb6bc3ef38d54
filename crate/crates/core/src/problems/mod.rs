//! Concrete oracles and problem instances.

pub mod classifier;
pub mod compose;
pub mod elementary;
pub mod fairness;
pub mod instances;
pub mod scad;
pub mod synthetic;

pub use classifier::{erm_pretrain, hinge_erm_oracle, theta_grid, theta_grid_from_scores, HingeLoss, LinearClassifierData, ThetaGrid};
pub use compose::{equality_reduction, max_constraint, MaxOracle, Shifted, WeightedSum};
pub use fairness::{dp_oracle, lipschitz_constants, roc_fairness_oracle, FairnessGap};
pub use instances::{dp_problem, roc_problem};
pub use scad::{scad, Scad};
pub use synthetic::{l1_over_unit_disk, noisy_l1_over_unit_disk, synthetic_two_ball, TwoBall};
