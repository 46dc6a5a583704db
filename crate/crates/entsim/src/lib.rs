//! Simulation of entanglement-assisted one-bit classical channels.
//!
//! A sender and receiver who share an entangled state and a perfect one-bit
//! classical channel can realize correlations that one classical bit alone
//! cannot. This crate implements the constructive argument that two classical
//! bits plus shared randomness always suffice: every channel obtained by
//! measuring a shared pure state, sending one bit, and measuring again can be
//! written as a mixture of classical channels that use at most four distinct
//! outputs each.
//!
//! The pieces:
//!
//! * [`qmat`]: dense complex matrices, a Jacobi Hermitian eigensolver,
//!   Kronecker products and partial traces.
//! * [`quantum`]: density operators, POVMs, positive decompositions of a
//!   marginal state, and the correspondence between decompositions indexed
//!   by an output alphabet and measurements on a purifying system.
//! * [`channels`]: classical channels (column-stochastic matrices),
//!   non-signaling boxes, reward games, and the channel induced by an
//!   entanglement-assisted protocol.
//! * [`simulate`]: the decomposition engine itself, building the atom
//!   distribution from measurement operators and solving a transportation
//!   problem per atom.
//! * [`membership`]: exact membership tests for "mixture of channels with at
//!   most n nonzero rows", by linear programming over deterministic atoms.
//! * [`treasure`]: a concrete 6-input game where one assisted bit beats every
//!   unassisted two-bit strategy, wired into all of the machinery above.
//! * [`sampling`]: seeded random instances (POVMs, states, decompositions)
//!   for the property suites in [`suites`].

pub mod channels;
pub mod error;
pub mod exec;
pub mod membership;
pub mod qmat;
pub mod quantum;
pub mod sampling;
pub mod simplex;
pub mod simulate;
pub mod suites;
pub mod treasure;

pub use error::{Error, Result};
pub use qmat::{Complex, ComplexMatrix, Side};
