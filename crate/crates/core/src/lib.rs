//! Thermodynamics of the spin-1/2 XXZ chain through its quantum transfer
//! matrix.
//!
//! The crate builds the staggered six-vertex transfer matrix t_q(ξ) at
//! finite Trotter number, diagonalises it exactly at desk scale, extracts
//! the Bethe roots of every eigenstate, and solves the nonlinear integral
//! equations that encode the eigenvalues at finite and infinite Trotter
//! number. On top of that sit the higher-level Bethe equations for the
//! particle roots, the C^ε_{α,ϱ} eigenstate classification, and the
//! free-energy / correlation-length formulas.
//!
//! Modules mirror the pipeline:
//!
//! * [`model`] — parameters, root multisets, special functions
//! * [`qtm`] — R-matrix, monodromy matrix, t_q, rank-1 split, XXZ Hamiltonian
//! * [`spectrum`] — dense eigendecomposition and eigenvalue bookkeeping
//! * [`bethe`] — TQ-relation root extraction, auxiliary function, hole/particle sets
//! * [`nlie`] — contour grids, nonlinear-integral-equation solvers, free energy
//! * [`hlbae`] — higher-level Bethe equations and large-T correlation lengths
//! * [`classify`] — the five-case eigenstate taxonomy
//! * [`tables`] — bundled reference values with tolerances

pub mod bethe;
pub mod classify;
pub mod hlbae;
pub mod model;
pub mod nlie;
pub mod qtm;
pub mod spectrum;
pub mod tables;
