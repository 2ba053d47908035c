//! Efficiency analysis for quantum heat engines running between arbitrary
//! stationary reservoirs.
//!
//! A reservoir is given by its energy levels and a density matrix that
//! commutes with its Hamiltonian. The pipeline is:
//!
//! 1. [`model`]: validate and diagonalize reservoirs.
//! 2. [`decomposition`]: split each reservoir into two-level channels, each
//!    with its own effective temperature.
//! 3. [`engine`]: evaluate second-order heat flows for a coupling operator.
//! 4. [`bounds`]: compute the Carnot-type bound from the extremal channels,
//!    build the engine that saturates it and sweep random engines against it.
//!
//! [`oracle`] re-derives the heat flows by integrating the interaction-picture
//! dynamics in time, and [`coherence`] holds builders for the coherent
//! three-level gas and the degenerate coherent pair.

pub mod bounds;
pub mod cli;
pub mod coherence;
pub mod decomposition;
pub mod engine;
pub mod error;
pub mod io;
pub mod model;
pub mod oracle;
pub mod report;
pub mod sum;

pub use bounds::{engine_sweep_verify, generalized_bound, saturating_engine, BoundReport, Regime};
pub use decomposition::{
    classify_reservoir, effective_temperature, enumerate_channels, extremal_channels, ChannelKind,
    ReservoirRole, TransitionChannel,
};
pub use engine::{channel_sign_analysis, heat_flows, single_channel_efficiency, CouplingOperator, HeatReport, Tuple};
pub use error::{Error, Result};
pub use model::{
    diagonalize_reservoir, thermal_reservoir, validate_stationarity, DiagonalReservoir, ReservoirSpec,
    Tolerances,
};
