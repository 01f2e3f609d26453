//! Fast invariant suite behind `smx selfcheck`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smx_core::smatrix::slice_chain;
use smx_core::{
    barrier_phase, close_right, local_solutions, make_builtin, reconstruct, slice_smatrix, solve_spectrum, star,
    BuiltinParams, Complex, Direction, Parity, ReconstructOptions, ScanConfig, SegmentS, Slicing, SolverSettings,
    TaylorSeries,
};

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

fn entry_gap(a: &SegmentS, b: &SegmentS) -> f64 {
    [(a.s11, b.s11), (a.s12, b.s12), (a.s21, b.s21), (a.s22, b.s22)]
        .iter()
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn random_slice(rng: &mut ChaCha8Rng, k: f64) -> SegmentS {
    let h = rng.gen_range(0.01..0.5);
    let mut factorial = 1.0;
    let coeffs = (0..=rng.gen_range(0..=6usize))
        .map(|mu| {
            if mu > 0 {
                factorial *= mu as f64;
            }
            let u = if mu == 0 { rng.gen_range(-4.0..4.0) } else { rng.gen_range(-0.5..0.5) / factorial };
            u / (h * h)
        })
        .collect();
    let series = TaylorSeries { center: rng.gen_range(-5.0..5.0), scale: h, coeffs };
    slice_smatrix(&local_solutions(&series, 40).expect("finite series"), k).expect("non-degenerate slice")
}

fn unitarity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut unit, mut recip) = (0.0_f64, 0.0_f64);
    for _ in 0..2000 {
        let k = rng.gen_range(0.2..5.0);
        let s = random_slice(&mut rng, k);
        unit = unit.max(s.unitarity_defect());
        recip = recip.max((s.s12 - s.s21).norm());
    }
    check(
        "slice unitarity and reciprocity",
        unit <= 1e-12 && recip <= 1e-12,
        format!("2000 slices, unitarity {unit:.1e}, reciprocity {recip:.1e}"),
    )
}

fn associativity() -> Check {
    let model = make_builtin(BuiltinParams::harmonic(1.0)).expect("valid model");
    let settings = SolverSettings::new(-1.0, Slicing::Uniform { half_width: 0.1 }, 2, 10);
    let mut worst = 0.0_f64;
    for (energy, direction) in [(0.37, Direction::Right), (2.9, Direction::Left), (6.1, Direction::Right)] {
        let slices = match slice_chain(&model, energy, 0.2, direction, &settings, 80) {
            Ok(s) => s,
            Err(e) => return check("star associativity", false, e.to_string()),
        };
        for w in slices.windows(3) {
            let left = star(&star(&w[0], &w[1]).expect("finite"), &w[2]).expect("finite");
            let right = star(&w[0], &star(&w[1], &w[2]).expect("finite")).expect("finite");
            worst = worst.max(entry_gap(&left, &right));
        }
    }
    let identity = {
        let s = SegmentS::free(0.0, 0.7, 1.3);
        entry_gap(&star(&SegmentS::identity(0.0, 1.3), &s).expect("finite"), &s)
    };
    let closed = close_right(&SegmentS::free(0.0, 0.5, 2.0), &barrier_phase(0.5, 2.0)).expect("matching anchor");
    let closure = (closed.value + Complex::new(0.0, 2.0_f64).exp()).norm();
    check(
        "star associativity",
        worst <= 1e-13 && identity <= 1e-15 && closure <= 1e-14,
        format!("associativity {worst:.1e}, identity {identity:.1e}, barrier closure {closure:.1e}"),
    )
}

fn constant_slice() -> Check {
    let series = TaylorSeries { center: 1.0, scale: 0.3, coeffs: vec![2.5] };
    let pair = local_solutions(&series, 30).expect("finite series");
    let exact = pair.phi_plus[1..].iter().chain(&pair.phi_minus[1..]).all(|c| *c == Complex::new(0.0, 0.0));
    check("constant-slice triviality", exact, format!("phi_n = 0 for n >= 1: {exact}"))
}

fn harmonic_ground_state() -> Check {
    let model = make_builtin(BuiltinParams::harmonic(1.0)).expect("valid model");
    let solver = SolverSettings::new(-1.0, Slicing::Uniform { half_width: 0.1 }, 2, 10);
    let config = ScanConfig::new(solver, 0.0, 0.0, 1.0, 20).with_symmetric(true);
    let name = "harmonic ground state";
    let report = match solve_spectrum(&model, &config) {
        Ok(r) => r,
        Err(e) => return check(name, false, e.to_string()),
    };
    let [root] = report.roots.as_slice() else {
        return check(name, false, format!("expected one root below hbar omega, found {}", report.roots.len()));
    };
    let energy_err = (root.energy - 0.5).abs() / 0.5;
    let (norm, second) = match reconstruct(&model, &config, root, &ReconstructOptions::default()) {
        Ok(wf) => (wf.raw_norm(), wf.expectation(2).unwrap_or(f64::NAN)),
        Err(e) => return check(name, false, e.to_string()),
    };
    let pass = energy_err <= 1e-12
        && root.parity == Parity::Even
        && (norm - 1.0).abs() <= 1e-10
        && (second - 0.5).abs() <= 1e-10;
    check(
        name,
        pass,
        format!("E rel err {energy_err:.1e}, parity {}, norm {norm:.12}, <x^2> {second:.12}", root.parity.as_str()),
    )
}

pub fn run_all() -> Vec<Check> {
    vec![unitarity(), associativity(), constant_slice(), harmonic_ground_state()]
}
