//! Certificates and simulations for Cucker–Smale flocking with distributed
//! reaction delays.
//!
//! * [`delay_dist`]: delay measures, their moments and quadrature.
//! * [`comm_kernel`]: the communication rate `ψ(r) = (1 + r²)^{-β}`.
//! * [`flocking_conditions`]: moment conditions, κ search, critical
//!   initial fluctuations and figure curves.
//! * [`dde_sim`]: fixed-step integration of the delay system with
//!   Lyapunov-type diagnostics and estimate verifiers.

pub mod comm_kernel;
pub mod dde_sim;
pub mod delay_dist;
pub mod error;
pub mod flocking_conditions;
pub mod numerics;

pub use comm_kernel::{AssumptionReport, CommunicationRate};
pub use delay_dist::{DelayDistribution, Quadrature};
pub use error::{ConditionError, DistError, RateError, SimError};
pub use flocking_conditions::{ConditionInput, ConditionReport, Threshold};
