//! Tracking a mean-reverting volatility index with its futures.
//!
//! The index follows `dS = mu (theta - S) dt + g(S) dW` under the historical
//! measure and reverts to `theta_tilde` at speed `mu_tilde` under the pricing
//! measure. Modules cover the pricing model, path simulation, the closed-form
//! two-contract dynamic tracker, static least-squares trackers, calibration,
//! regression analytics and panel I/O.

pub mod analytics;
pub mod calibration;
pub mod data;
pub mod dynamic;
pub mod error;
pub mod exec;
pub mod model;
pub mod rng;
pub mod scenario;
pub mod simulation;
pub mod static_opt;

pub use error::{Error, Result};
pub use exec::Exec;
