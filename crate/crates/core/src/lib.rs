//! Spacelike radial graphs in static spacetimes `P x_h R`.
//!
//! The crate covers the curvature of static products over radially
//! symmetric bases, radial graphs of prescribed mean curvature, barrier
//! constructions, volume/angle estimates and a finite-volume discretisation
//! of the mean curvature operator.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod barrier;
pub mod elliptic;
pub mod error;
pub mod estimates;
pub mod geometry;
pub mod graph;
pub mod numerics;
pub mod report;
pub mod svg;
pub mod tensor;

pub use error::{Error, Result};
pub use geometry::{RadialBase, RadialProfile, StaticModel, Warp};
pub use graph::{Anchor, MeanCurvSpec, RadialGraph};
pub use numerics::{Grid, SampledFunction};
pub use report::{EstimateReport, ReportBundle, Verdict};
