//! Bound states of one-dimensional potential wells.
//!
//! A well `V(x)` is cut at a point `x0` into a left and a right half-line
//! scattering problem. Each half is sliced, every slice is solved with a
//! local power series, and the slice scattering matrices are composed with
//! the star product into a unit-modulus phase factor. Bound-state energies
//! are the energies where the product of the two phase factors equals one.
//!
//! The crate is organised bottom-up:
//!
//! * [`taylor`] truncated power-series arithmetic for user potentials,
//! * [`potential`] Taylor expansions of `2m[E - V(x)]/hbar^2`,
//! * [`slice`] local series solutions and per-slice scattering matrices,
//! * [`smatrix`] star products, half-line closures and sweeps,
//! * [`spectrum`] energy scan and root refinement,
//! * [`wavefunction`] piecewise eigenfunctions, norms and moments.
//!
//! All quantities use units with `hbar = m = 1`.

// `!(a > b)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod potential;
pub mod scalar;
pub mod slice;
pub mod smatrix;
pub mod spectrum;
pub mod taylor;
pub mod wavefunction;

pub use error::{Result, SmxError};
pub use potential::{
    expand, make_builtin, make_custom, Boundary, BuiltinKind, BuiltinParams, PotentialModel,
    TaylorSeries,
};
pub use scalar::Scalar;
pub use slice::{local_solutions, slice_smatrix, Branch, SeriesSolutionPair, SliceSMatrix};
pub use smatrix::{
    barrier_phase, close_right, star, step_phase, sweep_halfline, CumulativeTrace, Direction,
    PhaseFactor, SegmentS, Slicing, SolverSettings,
};
pub use spectrum::{
    eval_condition, refine, scan, solve_spectrum, Bracket, EnergyRoot, Parity, ScanConfig,
    SpectrumReport,
};
pub use taylor::Jet;
pub use wavefunction::{reconstruct, PieceRecord, PiecewiseWavefunction, ReconstructOptions};

pub use num_complex::Complex;
