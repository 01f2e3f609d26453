//! Reference data and independent oracles shared by the integration tests.
#![allow(dead_code)]

use smx_core::{
    make_builtin, BuiltinParams, PotentialModel, ScanConfig, Slicing, SolverSettings,
};

/// Lennard-Jones reference energies in units of the well depth, n = 0..=18.
pub const LJ_ENERGIES: [f64; 19] = [
    -0.941046032004322,
    -0.830002082985871,
    -0.727645697519941,
    -0.633692951881524,
    -0.547852043328306,
    -0.469822910169227,
    -0.399296840303147,
    -0.335956071146719,
    -0.279473385016170,
    -0.229511705458584,
    -0.185723701795511,
    -0.147751411297187,
    -0.115225890997835,
    -0.087766914228358,
    -0.064982730496227,
    -0.046469911357580,
    -0.031813309315001,
    -0.020586161355897,
    -0.012350373215634,
];

/// Reference `<r>/sigma`.
pub const LJ_MEAN_R: [f64; 19] = [
    1.13250763, 1.15362644, 1.17638781, 1.20099976, 1.22770757, 1.25680268, 1.2886344,
    1.32362541, 1.36229270, 1.40527636, 1.45337996, 1.50762849, 1.56935372, 1.64032393,
    1.72294802, 1.82061078, 1.93825223, 2.08343401, 2.26846612,
];

/// Reference `sigma_r/sigma`.
pub const LJ_SIGMA_R: [f64; 19] = [
    0.03332738, 0.05845972, 0.07714456, 0.09349374, 0.10872536, 0.12341928, 0.13792451,
    0.15248893, 0.16731436, 0.18258579, 0.19849100, 0.21523776, 0.23307297, 0.25230831,
    0.27335898, 0.29680714, 0.32351356, 0.35482959, 0.39303815,
];

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn harmonic_setup(n_grid: usize) -> (PotentialModel, ScanConfig) {
    let model = make_builtin(BuiltinParams::harmonic(1.0)).unwrap();
    let solver = SolverSettings::new(-1.0, Slicing::Uniform { half_width: 0.1 }, 2, 10);
    let config = ScanConfig::new(solver, 0.0, 0.0, 10.0, n_grid).with_symmetric(true);
    (model, config)
}

/// `E_1 = -1/2` in raw units; the window holds n = 2..=10 for l = 1.
pub fn hydrogen_setup(n_grid: usize) -> (PotentialModel, ScanConfig) {
    let model = make_builtin(BuiltinParams::hydrogen(1)).unwrap();
    let solver = SolverSettings::new(1.2 * -0.5, Slicing::Geometric { ratio: 100.0 }, 50, 52);
    let config = ScanConfig::new(solver, 2.0, -0.13, -0.0046, n_grid);
    (model, config)
}

pub fn lennard_jones_setup(n_grid: usize) -> (PotentialModel, ScanConfig) {
    let model = make_builtin(BuiltinParams::lennard_jones(0)).unwrap();
    let eps = model.energy_unit;
    let solver = SolverSettings::new(-1.1 * eps, Slicing::Geometric { ratio: 500.0 }, 50, 52);
    let x0 = 2f64.powf(1.0 / 6.0);
    let config = ScanConfig::new(solver, x0, -0.95 * eps, -0.01 * eps, n_grid);
    (model, config)
}

/// Normalised oscillator eigenfunctions (omega = 1) by the Hermite recurrence.
pub fn hermite_function(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
    for j in 0..n {
        let next = (2.0 / (j as f64 + 1.0)).sqrt() * x * cur - (j as f64 / (j as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Normalised hydrogen radial function `u_{4,1}(r) = r R_{41}(r)`, atomic units.
pub fn hydrogen_u41(r: f64) -> f64 {
    let norm = 5f64.sqrt() / (16.0 * 3f64.sqrt());
    norm * r * r * (1.0 - r / 4.0 + r * r / 80.0) * (-r / 4.0).exp()
}

/// Numerov shooting for `u'' = 2 (V - E) u` on a uniform grid.
pub struct Numerov<F: Fn(f64) -> f64> {
    pub potential: F,
    pub r_start: f64,
    pub r_limit: f64,
    pub step: f64,
    pub v_inf: f64,
}

impl<F: Fn(f64) -> f64> Numerov<F> {
    /// Outer classical turning point for `E < v_inf`.
    fn outer_turning_point(&self, energy: f64) -> f64 {
        let mut lo = self.r_start;
        while (self.potential)(lo) > energy {
            lo += self.step * 100.0;
        }
        let mut hi = lo;
        while hi < self.r_limit && (self.potential)(hi) < energy {
            hi *= 1.1;
        }
        let hi = hi.min(self.r_limit);
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (self.potential)(m) < energy {
                a = m;
            } else {
                b = m;
            }
        }
        b
    }

    /// Sign changes of the outward solution up to well past the turning
    /// point. Equals the number of eigenvalues below `energy`.
    pub fn node_count(&self, energy: f64) -> usize {
        let kappa = (2.0 * (self.v_inf - energy)).sqrt();
        let r_end = (self.outer_turning_point(energy) + 30.0 / kappa).min(self.r_limit);
        let h2 = self.step * self.step;
        let w = |r: f64| 1.0 + h2 * 2.0 * (energy - (self.potential)(r)) / 12.0;
        let mut r = self.r_start;
        let (mut w_prev, mut w_cur) = (w(r), w(r + self.step));
        let (mut u_prev, mut u_cur) = (0.0_f64, 1e-30_f64);
        let mut nodes = 0;
        r += self.step;
        while r < r_end {
            let w_next = w(r + self.step);
            let u_next = ((12.0 - 10.0 * w_cur) * u_cur - w_prev * u_prev) / w_next;
            if u_next == 0.0 || (u_next < 0.0) != (u_cur < 0.0) {
                nodes += 1;
            }
            u_prev = u_cur;
            u_cur = if u_next == 0.0 { -u_cur * 1e-300 } else { u_next };
            w_prev = w_cur;
            w_cur = w_next;
            r += self.step;
            if u_cur.abs() > 1e100 {
                u_prev *= 1e-100;
                u_cur *= 1e-100;
            }
        }
        nodes
    }

    /// Energy of the `n`-th state by bisection on the node count.
    pub fn eigenvalue(&self, n: usize, lo: f64, hi: f64) -> f64 {
        let (mut lo, mut hi) = (lo, hi);
        while hi - lo > 1e-13 * hi.abs().max(lo.abs()) {
            let mid = 0.5 * (lo + hi);
            if self.node_count(mid) > n {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}
