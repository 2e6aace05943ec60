//! Multi-mode entanglement-based CV-QKD with noiseless attenuation at the
//! transmitter and noiseless linear amplification at the receiver, over
//! fixed-loss and turbulent satellite-to-ground channels.
//!
//! The pipeline for each supermode pair is
//! `epr_cm → attenuation → thermal-loss channel → amplification → key rate`,
//! all carried out on block-form covariance matrices ([`TwoModeCM`]).
//! [`experiment`] layers optimisation over `{g, T, G}`, Monte Carlo
//! averaging over atmospheric transmissivity samples, and feasibility
//! searches on top.

pub mod atmosphere;
pub mod channel;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod gaussian;
pub mod keyrate;
pub mod noiseless;
pub mod special;

pub use error::{Error, Result};
pub use exec::Execution;
pub use experiment::{
    MonteCarloConfig, MonteCarloResult, OptimizationConfig, Optimum, SatelliteExperiment, Strategy, Variant,
};
pub use gaussian::{Mode, Scenario, SupermodeSpectrum, SymplecticSpectrum, TwoModeCM};
pub use keyrate::{Aggregation, KeyRateBreakdown, Protocol, SubchannelRate};
pub use noiseless::{GainLimit, NoiselessOp, OpKind};
