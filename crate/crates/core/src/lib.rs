//! Electrical networks, network random walks, and the trace networks those
//! walks leave behind.
//!
//! The crate is organised bottom-up:
//!
//! * [`network`] holds finite weighted networks, lazily generated infinite
//!   families (lattices, trees, wedges, birth-and-death chains), ball
//!   exhaustions with boundary collapse, and the edge-list file format.
//! * [`harmonic`] solves Dirichlet problems and derives voltages, effective
//!   conductances, Green functions, energies, current flows and level cuts.
//! * [`walk`] simulates seeded random walks, counts edge crossings and builds
//!   trace networks and resistance profiles.
//! * [`transforms`] implements level-set subdivision, the straddling-edge
//!   reweighting, the Doob transform and vertex deletion.
//! * [`experiments`] wires everything into reproducible CSV reports.

pub mod exec;
pub mod experiments;
pub mod harmonic;
pub mod network;
pub mod random;
pub mod transforms;
pub mod walk;

pub use exec::Execution;
pub use harmonic::{CurrentFlow, HarmonicError, LevelCut, VoltageField};
pub use network::{Edge, Family, Network, NetworkError, Site, VertexId};
pub use walk::{CrossingCounts, RngSeed, TraceMode, WalkPath};
