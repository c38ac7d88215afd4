//! Optimal control of crowd motion modelled as a controlled sweeping process.
//!
//! Closed-form solvers cover a single agent passing one circular obstacle and
//! two or three agents sharing a corridor. A catching-up integrator serves as
//! an independent numerical oracle for all of them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod corridor_three;
pub mod corridor_two;
pub mod error;
pub mod geometry;
pub mod optimizer;
pub mod scenario;
pub mod single_agent;
pub mod sweeping;
pub mod trajectory;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{Orientation, Vec2};
pub use scenario::{CorridorScenario, SingleScenario, SolveReport};
pub use trajectory::PiecewiseTrajectory;

pub type Vec2f = Vec2<f32>;
pub type Vec2d = Vec2<f64>;
pub type Quadratic1Df = optimizer::Quadratic1D<f32>;
pub type Quadratic1Dd = optimizer::Quadratic1D<f64>;
