//! Boundary regularity of Schur functions on the bidisk.
//!
//! The crate evaluates analytic maps from the bidisk to the closed disk,
//! estimates Julia quotients and directional derivatives at points of the
//! torus, classifies those points as B, B+ or C points, and builds the
//! homogeneous Pick functions of degree one that describe the derivatives.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod design;
pub mod geometry;
pub mod measure;
pub mod pick;
pub mod poly;
pub mod quadrature;
pub mod richardson;
pub mod classifier;
pub mod report;

pub use catalog::{AnalyticFunction, Builtin, CatalogError, EvalError, FunctionDescriptor};
pub use geometry::{BoundaryPoint, Direction, GeometryError, NontangentialCone, Point2, Schedule, C64};
pub use measure::{MeasureError, MeasureSpec};
pub use pick::{HomogeneousPick, PickError, SlopeFunction};
pub use classifier::{classify, ClassificationReport, ClassifierConfig, ClassifyError, Verdict};
