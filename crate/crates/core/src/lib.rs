//! Bend-sequence planning for planar polygonal chains.
//!
//! A chain (wire) is bent one joint at a time, each bend running completely
//! between the joint's angle and straight. The crate decides whether a
//! single bend is collision-free, verifies whole bend orders, and searches
//! for orders of several shapes.
//!
//! All routines are generic over the coordinate type ([`Scalar`], implemented
//! for `f32` and `f64`); the aliases at the crate root fix it to `f64`.

pub mod chain;
pub mod document;
pub mod feasibility;
pub mod generate;
pub mod geometry;
pub mod planner;
pub mod render;
mod scalar;

pub use scalar::Scalar;

pub type Point = geometry::Point<f64>;
pub type Segment = geometry::Segment<f64>;
pub type Arc = geometry::Arc<f64>;
pub type Tolerance = geometry::Tolerance<f64>;
pub type Chain = chain::Chain<f64>;
pub type Pose = chain::Pose<f64>;
pub type FoldState<'a> = chain::FoldState<'a, f64>;
pub type FoldVerdict = feasibility::FoldVerdict<f64>;
pub type SweptRegion = feasibility::SweptRegion<f64>;
pub type PlanResult = planner::PlanResult<f64>;
pub type Planner<'a> = planner::Planner<'a, f64>;

pub type PointF32 = geometry::Point<f32>;
pub type ChainF32 = chain::Chain<f32>;

pub use chain::{ChainError, Direction, FoldPlan, JointSet};
pub use document::{ChainDocument, DocumentError};
pub use feasibility::{FeasibilityError, Route};
pub use generate::GenerationFailed;
pub use planner::PlanError;
pub use render::{Frame, RenderError, RenderSpec};
