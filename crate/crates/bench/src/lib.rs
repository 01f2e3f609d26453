//! Fixtures shared by the solver benchmarks.

use smx_core::{make_builtin, BuiltinParams, PotentialModel, ScanConfig, Slicing, SolverSettings};

/// Lennard-Jones well with the reference resolution (M = 50, Λ = 52, A = 500).
pub fn lennard_jones() -> (PotentialModel, ScanConfig) {
    let model = make_builtin(BuiltinParams::lennard_jones(0)).expect("valid parameters");
    let eps = BuiltinParams::lj_reference_epsilon();
    let solver = SolverSettings::new(-1.1 * eps, Slicing::Geometric { ratio: 500.0 }, 50, 52);
    let x0 = 2f64.powf(1.0 / 6.0);
    let config = ScanConfig::new(solver, x0, -0.95 * eps, -0.01 * eps, 400);
    (model, config)
}

/// Harmonic oscillator with uniform slices of half-width 0.1.
pub fn harmonic() -> (PotentialModel, ScanConfig) {
    let model = make_builtin(BuiltinParams::harmonic(1.0)).expect("valid parameters");
    let solver = SolverSettings::new(-1.0, Slicing::Uniform { half_width: 0.1 }, 2, 20);
    let config = ScanConfig::new(solver, 0.0, 0.0, 10.0, 200).with_symmetric(true);
    (model, config)
}
