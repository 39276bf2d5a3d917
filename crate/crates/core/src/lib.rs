//! Robust attitude control for a quadrotor, with the pieces needed to
//! check its stability argument at runtime and offline.
//!
//! The crate is organized bottom-up:
//!
//! - [`dynamics`]: Euler-angle rigid-body model J(η)η̈ + C(η, η̇)η̇ + d = τ
//!   plus rotor mixing.
//! - [`controller`]: dynamic-inversion control law with a robust term γ
//!   that dominates bounded model uncertainty.
//! - [`lyapunov`]: the quadratic certificate V = EᵀQE for the error
//!   dynamics, solved from AᵀQ + QA = -P.
//! - [`sim`]: fixed-step RK4 closed-loop simulator with deterministic
//!   CSV trajectory logs.
//! - [`monitor`]: runtime verdict machine that checks the controller's
//!   standing assumptions and the Lyapunov decrease sample by sample.
//! - [`fof`]: emission and parsing of first-order stability conjectures
//!   in TPTP syntax, and a harness for running an external prover on
//!   them.

pub mod controller;
pub mod dynamics;
pub mod error;
pub mod fof;
pub mod lyapunov;
pub mod monitor;
pub mod sim;

pub use error::Error;

/// 3-vectors everywhere: angles, rates, torques.
pub type Vec3 = nalgebra::Vector3<f64>;
/// Rotor speed quadruples.
pub type Vec4 = nalgebra::Vector4<f64>;
/// Stacked error state E = (e, ė).
pub type Vec6 = nalgebra::Vector6<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
pub type Mat6 = nalgebra::Matrix6<f64>;
pub type Mat6x3 = nalgebra::Matrix6x3<f64>;
