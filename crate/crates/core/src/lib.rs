//! Gate-diagram graph compilation and fixed-sector spectra.
//!
//! This crate builds graphs out of gate diagrams (copies of a fixed building
//! block wired together by node edges and node self-loops), studies the
//! antiferromagnetic XY model at fixed magnetization and the Bose-Hubbard
//! model at fixed particle number on arbitrary symmetric 0-1 graphs, and
//! certifies spectral gaps with variational upper bounds and nullspace
//! projection lower bounds.
//!
//! The main pipeline:
//! - [`diagram`] compiles a diagram into a graph on `R * |element|` vertices;
//! - [`transforms`] doubles a compiled graph so every vertex carries a
//!   self-loop, then strips all loops to reach a simple graph with the same
//!   shifted sector spectra;
//! - [`sector`] builds the XY and Bose-Hubbard sector operators and their
//!   ground energies, with hard-core restriction as the bridge between them;
//! - [`spectral`] provides the gap-bound toolbox and certificate chains;
//! - [`reductions`] packages the promise problems and instance-to-instance
//!   maps, which the CLI exposes for batch runs.

pub mod combinatorics;
pub mod diagram;
pub mod element;
pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod reductions;
pub mod sector;
pub mod spectral;
pub mod transforms;

pub use error::{Error, Result};
pub use graph::{Graph, Labels, SpectralSummary};
