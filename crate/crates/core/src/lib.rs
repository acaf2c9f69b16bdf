//! Simulation and analysis of nonideal qubit measurements read out through a
//! harmonic-oscillator pointer.
//!
//! The measured qubit displaces a cavity conditionally on its energy
//! eigenstate; the cavity is then fully dephased in the number basis, read
//! out (possibly coarse-grained), and reset. This crate builds the resulting
//! measurement channel, evaluates its strength / efficiency / information
//! figures of merit, and computes the second-law lower bounds on the work
//! needed to run one full measurement cycle. Sequences of weak measurements
//! concatenated by a Bayesian argmax rule are evaluated exactly through the
//! total-excitation sufficient statistic.
//!
//! Module map:
//!
//! - [`numerics`]: entropies, log-factorials, Laguerre polynomials, Poisson
//!   weights and Fock truncation.
//! - [`fock`]: truncated Fock-space matrices, displacement operators, joint
//!   qubit-pointer states, dephasing and the pair rotation.
//! - [`measurement`]: outcome probabilities, Kraus operators, conditional
//!   states, coarse-graining and the first-order weak expansion.
//! - [`metrics`]: strength, efficiency, normalized mutual information and the
//!   information hierarchy.
//! - [`thermo`]: energy ledger and work bounds; SBS overlap diagnostics.
//! - [`sequence`]: repeated weak measurements, Monte Carlo validation and
//!   scaling of the total work.
//! - [`analysis`]: one-call pipelines gluing the above for a single shot.

pub mod analysis;
pub mod error;
pub mod fock;
pub mod measurement;
pub mod metrics;
pub mod numerics;
pub mod qubit;
pub mod sequence;
pub mod thermo;

pub use error::{MeterError, Result};
pub use fock::{AncillaInit, FockMatrix, JointState};
pub use measurement::{CoarseGraining, MeasurementParams, Outcome, OutcomeChannel};
pub use metrics::{MetricsReport, ObservableBasis};
pub use numerics::{Base, Entropy, ProbVector};
pub use qubit::{Mat2, QubitState};
pub use sequence::{SequenceSpec, StatTable};
pub use thermo::ThermoLedger;

pub use num_complex::Complex64;
