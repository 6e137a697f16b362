//! Disturbance-aware trajectory planning for an air-land bimodal vehicle.
//!
//! The vehicle combines a quadrotor flight system with a differential-drive
//! wheel base and switches between the two at runtime. Planning robustness
//! under wind and ground-resistance disturbances comes from a single
//! mechanism: a disturbance observer estimates the lumped disturbance
//! acceleration acting on the translational dynamics, and that estimate
//! shifts the per-axis feasible acceleration intervals given to the planner.
//!
//! Pipeline, start to finish:
//!
//! - [`observer`]: uncertainty-and-disturbance estimator (UDE), a first-order
//!   low-pass reconstruction of the lumped disturbance for the active mode.
//! - [`bounds`]: converts the estimate into per-axis acceleration intervals
//!   for flight and ground locomotion.
//! - [`search`]: kinodynamic A* over constant-acceleration motion primitives,
//!   with altitude and boundary-proximity penalties steering the search
//!   toward ground routes and directions with acceleration margin.
//! - [`spline`] / [`optimize`]: uniform B-spline refinement of the searched
//!   path under smoothness, collision, velocity, and soft acceleration-bound
//!   costs.
//! - [`switch`]: threshold-triggered mode transitions (detour first, then
//!   vertical replanning, then a locomotion-mode change).
//! - [`sim`]: deterministic closed-loop simulation with PID tracking for both
//!   modes, and time/energy/RMSE metrics.
//! - [`scenario`] / [`bench`]: config loading, scenario fixtures, and the
//!   adaptive-vs-fixed-bounds benchmark harness behind the `airland` CLI.

pub mod bench;
pub mod bounds;
pub mod dynamics;
pub mod esdf;
pub mod grid;
pub mod observer;
pub mod optimize;
pub mod planner;
pub mod plots;
pub mod scenario;
pub mod search;
pub mod sim;
pub mod spline;
pub mod switch;
pub mod types;

pub use bounds::AccelBounds;
pub use esdf::Esdf;
pub use grid::OccupancyGrid;
pub use observer::{DisturbanceEstimate, UdeEstimator};
pub use spline::UniformBSpline;
pub use types::{Mode, Vec3, VehicleParams, VehicleState};
