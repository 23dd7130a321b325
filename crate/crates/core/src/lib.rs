//! Capacity bounds for the non-coherent (no-CSI) Rayleigh-fading MIMO
//! channel: the Lagrange-optimised capacity supremum, its β>0 variant,
//! high-SNR asymptotics, a discrete-input lower bound, and reference
//! capacities (coherent Monte Carlo, large-n_r formula).
//!
//! All capacities are in nats. The SNR convention is P linear with
//! SNR_dB = 10·log10(P).

pub mod asymptotics;
pub mod channel;
pub mod cli;
pub mod discrete;
pub mod error;
pub mod numerics;
pub mod reference;
pub mod specfun;
pub mod supremum;

pub use channel::{AntennaConfig, DiscreteInput, PowerBudget};
pub use error::{Error, Result};
pub use specfun::AccuracySpec;
pub use supremum::{CapacityResult, Method};
