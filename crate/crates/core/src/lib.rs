//! Second-order spatial interference of chaotic light.
//!
//! Closed-form `⟨Δn_C Δn_T⟩` correlations behind two pinhole masks, the
//! polarization-resolved controlled-U_φ gate built on them (pinhole and
//! Mach-Zehnder variants), symbolic composition of the propagation network,
//! and a stochastic-field Monte-Carlo oracle that checks all of it.

pub mod analytic;
pub mod error;
pub mod exec;
pub mod gate;
pub mod mc;
pub mod network;
pub mod pattern;
pub mod phys;
pub mod setup;

pub use error::{Error, Result};
pub use exec::Execution;
pub use gate::{GateAngles, TruthTable};
pub use mc::{EnsembleEstimate, EstimateOptions, SourceModel};
pub use pattern::{Axis, CorrelationPattern, GridPoint, Mode, PatternMode, Scan};
pub use phys::Complex64;
pub use setup::{Arm, Geometry, SetupBasic, SetupFree, SetupGate, SetupMZ};
