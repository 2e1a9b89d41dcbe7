//! Task-parameterized learning-from-demonstration control for grasping
//! oscillating targets.
//!
//! Demonstrations are encoded in a start frame and an end frame, a Gaussian
//! mixture is fitted over `[time; pose]` in both, and Gaussian mixture
//! regression produces per-tick references for three LQR-based controllers.
//! A kinematic simulator and a sweep harness evaluate them against moving
//! goal frames.

pub mod controllers;
pub mod demos;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod lqr;
pub mod metrics;
pub mod mixture;
pub mod regression;
pub mod sim;

pub use controllers::{fuse_controls, prepare, Method, PreparedController, StepContext, StepDiagnostics};
pub use demos::{DemoSet, Demonstration};
pub use error::{Error, Result};
pub use geometry::{frame_from_pose, path_length, FrameTransform, Pose6, UnitQuat};
pub use lqr::{CostSpec, FiniteSchedule, SystemModel};
pub use mixture::{CombinedGmm, FrameGmm, GaussianComponent, Gmm, JointGmm};
pub use regression::{gmr, gmr_track, ConditionalEstimate, ReferenceTrack};
