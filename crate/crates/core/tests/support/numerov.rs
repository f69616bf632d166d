//! Bound states of a Morse well by Numerov shooting with node-count
//! bisection. Shares nothing with the analytic eigenfunctions in the library.

use rovodef_core::units::constants::{HBAR, PLANCK, SPEED_OF_LIGHT};
use rovodef_core::MolecularConstants;

pub struct Grid {
    pub r: Vec<f64>,
    pub h: f64,
}

impl Grid {
    pub fn new(r_min: f64, r_max: f64, n: usize) -> Self {
        let h = (r_max - r_min) / (n - 1) as f64;
        Grid {
            r: (0..n).map(|i| r_min + i as f64 * h).collect(),
            h,
        }
    }

    pub fn simpson(&self, f: &[f64]) -> f64 {
        let n = f.len();
        assert!(n % 2 == 1);
        let mut s = f[0] + f[n - 1];
        for (i, v) in f.iter().enumerate().take(n - 1).skip(1) {
            s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        s * self.h / 3.0
    }
}

/// Potential in cm⁻¹ and ħ²/2μ in cm⁻¹·m².
pub struct Well {
    depth: f64,
    a: f64,
    r_e: f64,
    kinetic: f64,
}

impl Well {
    pub fn new(c: &MolecularConstants) -> Self {
        let we = c.omega_e.cm1();
        let wexe = c.omega_e_x_e.cm1();
        let depth = we * we / (4.0 * wexe);
        let kinetic = HBAR * HBAR / (2.0 * c.reduced_mass) / (PLANCK * SPEED_OF_LIGHT * 100.0);
        // ω_e x_e = ħ²a²/2μ
        let a = (wexe / kinetic).sqrt();
        Well {
            depth,
            a,
            r_e: c.r_e,
            kinetic,
        }
    }

    pub fn potential(&self, r: f64) -> f64 {
        let e = 1.0 - (-self.a * (r - self.r_e)).exp();
        self.depth * e * e
    }
}

fn outward(q: &[f64], h: f64, until: usize) -> Vec<f64> {
    let mut u = vec![0.0; until + 1];
    u[1] = 1e-30;
    let c = h * h / 12.0;
    for i in 1..until {
        let num = 2.0 * (1.0 - 5.0 * c * q[i]) * u[i] - (1.0 + c * q[i - 1]) * u[i - 1];
        u[i + 1] = num / (1.0 + c * q[i + 1]);
        if u[i + 1].abs() > 1e200 {
            let s = 1e-200;
            for v in u.iter_mut().take(i + 2) {
                *v *= s;
            }
        }
    }
    u
}

fn nodes(u: &[f64]) -> usize {
    u.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
}

/// Normalized eigenfunction ν on `grid` (sign: positive near the outer
/// turning point is not enforced; compare magnitudes).
pub fn eigenstate(well: &Well, grid: &Grid, nu: usize) -> (f64, Vec<f64>) {
    let n = grid.r.len();
    let q_of = |e: f64| -> Vec<f64> {
        grid.r
            .iter()
            .map(|&r| (e - well.potential(r)) / well.kinetic)
            .collect()
    };
    // bracket by node count of the outward solution over the full grid
    let (mut lo, mut hi) = (0.0, well.depth);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let u = outward(&q_of(mid), grid.h, n - 1);
        if nodes(&u) > nu {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-12 * well.depth {
            break;
        }
    }
    let e = 0.5 * (lo + hi);
    let q = q_of(e);
    // match at the outer classical turning point
    let turn = (0..n)
        .rev()
        .find(|&i| q[i] > 0.0)
        .expect("classically allowed region");
    let m = turn.min(n - 3);
    let u_out = outward(&q, grid.h, m + 1);
    let mut u_in = vec![0.0; n];
    u_in[n - 1] = 0.0;
    u_in[n - 2] = 1e-30;
    let c = grid.h * grid.h / 12.0;
    for i in (m..n - 1).rev() {
        let num = 2.0 * (1.0 - 5.0 * c * q[i]) * u_in[i] - (1.0 + c * q[i + 1]) * u_in[i + 1];
        u_in[i - 1] = num / (1.0 + c * q[i - 1]);
        if u_in[i - 1].abs() > 1e200 {
            for v in u_in.iter_mut().skip(i - 1) {
                *v *= 1e-200;
            }
        }
    }
    let scale = u_out[m] / u_in[m];
    let mut u: Vec<f64> = (0..n)
        .map(|i| if i <= m { u_out[i] } else { u_in[i] * scale })
        .collect();
    let norm = grid
        .simpson(&u.iter().map(|v| v * v).collect::<Vec<_>>())
        .sqrt();
    for v in &mut u {
        *v /= norm;
    }
    (e, u)
}

pub fn overlap(grid: &Grid, a: &[f64], b: &[f64]) -> f64 {
    grid.simpson(&a.iter().zip(b).map(|(x, y)| x * y).collect::<Vec<_>>())
}
