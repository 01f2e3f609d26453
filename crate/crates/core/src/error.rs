use thiserror::Error;

pub type Result<T> = std::result::Result<T, SmxError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmxError {
    #[error("position {position} lies outside the potential domain [{lo}, {hi}]")]
    Domain { position: f64, lo: f64, hi: f64 },

    #[error("potential expansion is not finite at x = {position}")]
    Singularity { position: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("singular matching system for slice centred at x = {center} (zero width or k = 0?)")]
    DegenerateSlice { center: f64 },

    #[error("resonance singularity in S-matrix composition: |denominator| = {denominator:e}")]
    Resonance { denominator: f64 },

    #[error("invalid closure: {0}")]
    InvalidClosure(String),

    #[error("half-line sweep did not reach |s12| < {eps_trunc:e} within {slices} slices")]
    SweepNotConverged { slices: usize, eps_trunc: f64 },

    #[error("root refinement stopped after {iterations} iterations at E = {best} (|Im F| = {residual:e})")]
    NonConvergence {
        best: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("wavefunction reconstruction failed: {0}")]
    Reconstruction(String),

    #[error("range error: {0}")]
    Range(String),
}
