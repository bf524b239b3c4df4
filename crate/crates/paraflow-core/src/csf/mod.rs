//! Intrinsic curve shortening flow on the bump-perturbed plane.
//!
//! A closed curve in the flat part of the graph surface is an
//! isoparametric initial datum whose mean curvature flow starts as a
//! parallel flow; once the evolving curve's neighborhood reaches the bump
//! support, the parallels stop having constant geodesic curvature and the
//! flow leaves the parallel regime. The experiment in [`experiment`]
//! measures this through the spread of geodesic distances back to the
//! initial circle.

pub mod curve;
pub mod experiment;
pub mod metric;
pub mod shooting;

pub use curve::{csf_step, geodesic_curvature, CsfError, DiscreteCurve, Scheme};
pub use experiment::{
    run_bump_experiment, run_with_control, BumpOutcome, ExperimentParams, ExperimentReport,
    ExperimentRow,
};
pub use metric::BumpParams;
pub use shooting::{distance_to_circle, parallel_deviation, ShootingOptions};
