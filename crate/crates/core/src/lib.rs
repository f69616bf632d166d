//! Quantum-state-selective deflection of diatomic molecules by a
//! far-off-resonant standing-wave laser.
//!
//! The modules follow the physics pipeline: molecular constants and level
//! energies ([`molecule`]), Morse vibrational overlaps ([`vibration`]),
//! rotational matrix elements ([`rotation`]), laser coupling and the
//! closed-form deflection angle ([`interaction`]), and Monte Carlo beam
//! transits ([`beam`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod beam;
pub mod error;
pub mod interaction;
pub mod molecule;
pub mod rotation;
pub mod units;
pub mod vibration;

pub use beam::{
    simulate_beam, BeamEnsemble, BeamParameters, BeamRun, DetectorHistogram, EmissionWidth,
    HistogramSpec, StateSelection, TrajectoryResult,
};
pub use error::{Error, Result};
pub use interaction::{
    DressedState, FrequencyScan, LaserField, ScanPoint, ScanSettings, Spectrum, TransitionLine,
};
pub use molecule::{
    enumerate_levels, thermal_weights, ElectronicState, Level, MolecularConstants, MoleculePair,
    RovibronicLevel, ThermalEnsemble,
};
pub use units::Wavenumber;
pub use vibration::{MorseWell, OverlapMatrix};
