//! Time-domain simulation of a tidal current conversion system and of the
//! underwater noise it radiates, with hearing-impact assessment for marine
//! species.
//!
//! Module map:
//! - [`flowdata`]: inflow records, semi-diurnal synthesis, windowing
//! - [`turbine`]: rotor power capture, one-mass drivetrain, MPPT control
//! - [`acoustics`]: source levels, spreading, incoherent summation
//! - [`bioimpact`]: TTS/PTS thresholds and impact ranges
//! - [`scenario`]: runs, sweeps, comparisons, correlation, onset search

pub mod acoustics;
pub mod bioimpact;
pub mod error;
pub mod flowdata;
pub mod scenario;
pub mod turbine;

pub use acoustics::{AcousticsConfig, ReceivedSpl, SourceLevels, TurbulenceNoiseParams};
pub use bioimpact::{ExposureCriteria, ImpactResult, SpeciesGroup, SpeciesProfile};
pub use error::{Error, Result};
pub use flowdata::{FlowSample, FlowSeries};
pub use scenario::{
    RunResult, ScenarioConfig, ScenarioInputs, SweepParameter, SweepRow, SweepSpec, SweepValue,
};
pub use turbine::{
    ControlConfig, DrivetrainConfig, DrivetrainKind, OperatingState, Plant, RotorConfig,
};
