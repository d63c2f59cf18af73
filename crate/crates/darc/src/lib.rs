//! Two-stage motor learning on a planar two-link arm.
//!
//! Stage 1 fits a linear readout on a fixed random recurrent network (a
//! context-driven echo state network) from feedback-controller
//! demonstrations, giving a library of reaching primitives conditioned on a
//! 2-D context. Stage 2 trains a small PPO policy that emits that context a
//! few times per episode, steering the frozen network to targets outside the
//! demonstrated range, around an obstacle, or along a moving circular path.
//!
//! Start with the runnable examples (`cargo run --example ...`) or the `darc`
//! binary, which chains data collection, both training stages, and
//! evaluation.

pub mod arm;
pub mod demos;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod ppo;
pub mod reservoir;
pub mod rewards;
pub mod rng;

pub use error::{Error, Result};
pub use nalgebra::{DMatrix, DVector, Vector2};
