//! Spiking relational networks with ternary spikes, trained by an
//! error-spike version of backpropagation.
//!
//! Populations of integrate-and-fire neurons ([`snn`]) are wired into a
//! three-variable relational topology ([`relnet`]). Stimuli are rate coded
//! ([`codec`]); [`trainer`] runs the forward/backward windows and the
//! evaluation loops; [`oracle`] is a plain rectifier network used to check
//! that spike counts track real-valued activations.

pub mod checkpoint;
pub mod cli;
pub mod codec;
pub mod config;
pub mod dataio;
pub mod error;
pub mod matrix;
pub mod oracle;
pub mod relnet;
pub mod snn;
pub mod trainer;

pub use config::{SimulationConfig, UpdateMode};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use relnet::{mask_for, DirectionMask, Edge, Io, Population, RelationalTopology};
pub use snn::{HyperParams, PopulationState, Spike, TernarySpikeVector};
