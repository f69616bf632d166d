//! Morse-oscillator vibrational wavefunctions and Franck–Condon overlaps.
//!
//! Wavefunctions use the reduced radial convention `u(r) = r·R(r)`,
//! normalized as `∫ u(r)² dr = 1` and carrying units of m^(-1/2). The
//! vibrational overlap `∫ R_e R_f r² dr` is then simply `∫ u_e u_f dr`;
//! nothing else in the crate touches the `r²` weight.

use std::io::Write;
use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::molecule::MolecularConstants;
use crate::units::constants::HBAR;
use crate::units::Wavenumber;

/// Points of the base overlap grid; refinement halves the step.
pub const BASE_GRID_POINTS: usize = 4001;
/// Largest change allowed when the overlap grid is halved.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;

/// Morse potential `D_e (1 − e^{−a(r−r_e)})²` reconstructed from ω_e and
/// ω_e x_e.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MorseWell {
    /// Well depth ω_e²/(4 ω_e x_e).
    pub depth: Wavenumber,
    /// Range parameter, m⁻¹.
    pub a: f64,
    pub r_e: f64,
    /// ω_e/(2 ω_e x_e); the number of bound levels is ⌊λ − ½⌋ + 1.
    pub lambda: f64,
    pub nu_max: u32,
    pub reduced_mass: f64,
}

impl MorseWell {
    pub fn from_constants(c: &MolecularConstants) -> Result<Self> {
        c.validate()?;
        let wexe = c.omega_e_x_e.cm1();
        if !(wexe > 0.0) {
            return Err(Error::invalid(
                "omega_e_x_e",
                format!("{}: a Morse well needs positive anharmonicity", c.label),
            ));
        }
        let lambda = c.omega_e.cm1() / (2.0 * wexe);
        if !(lambda > 0.5) {
            return Err(Error::invalid(
                "omega_e_x_e",
                "well supports no bound level",
            ));
        }
        // ω_e x_e = ħ²a²/(2μ)
        let a = (2.0 * c.reduced_mass * c.omega_e_x_e.to_joules()).sqrt() / HBAR;
        Ok(MorseWell {
            depth: Wavenumber::new(c.omega_e.cm1().powi(2) / (4.0 * wexe)),
            a,
            r_e: c.r_e,
            lambda,
            nu_max: (lambda - 0.5).floor() as u32,
            reduced_mass: c.reduced_mass,
        })
    }

    fn check_bound(&self, nu: u32) -> Result<()> {
        if nu > self.nu_max {
            return Err(Error::UnboundLevel {
                nu,
                nu_max: self.nu_max,
            });
        }
        Ok(())
    }

    /// Vibrational energy above the well bottom.
    pub fn vibrational_energy(&self, nu: u32) -> Wavenumber {
        let v = nu as f64 + 0.5;
        let wexe = self.depth.cm1() / (self.lambda * self.lambda);
        Wavenumber::new(2.0 * self.lambda * wexe * v - wexe * v * v)
    }

    /// Potential energy at separation `r`, relative to the well bottom.
    pub fn potential(&self, r: f64) -> Wavenumber {
        let x = 1.0 - (-self.a * (r - self.r_e)).exp();
        self.depth * (x * x)
    }

    /// Position of the maximum of the ν = 0 wavefunction.
    pub fn ground_state_peak(&self) -> f64 {
        self.r_e + (2.0 * self.lambda / (2.0 * self.lambda - 1.0)).ln() / self.a
    }

    /// Largest local de Broglie wavenumber of level ν (at the well bottom).
    fn max_wavenumber(&self, nu: u32) -> f64 {
        (2.0 * self.reduced_mass * self.vibrational_energy(nu).to_joules()).sqrt() / HBAR
    }

    fn inner_extent(&self) -> f64 {
        self.r_e - 5.0 / self.a
    }

    /// Separation beyond which |u_ν|² has decayed far below 1e-12.
    fn outer_extent(&self, nu: u32) -> f64 {
        let power = (self.lambda - nu as f64 - 0.5).max(1e-3);
        let reach = (2.0 * self.lambda).ln() + 15.0 / power;
        self.r_e + reach.max(12.0) / self.a
    }

    /// Normalized bound eigenfunction `u_ν(r)`.
    pub fn wavefunction(&self, nu: u32, r: f64) -> Result<f64> {
        self.check_bound(nu)?;
        if !(r > 0.0) {
            return Err(Error::invalid("r", format!("must be positive, got {r}")));
        }
        Ok(MorseEigenfunction::new(self, nu).eval(r))
    }

    /// Evaluates `u_ν` at every point of `grid`.
    pub fn sample(&self, nu: u32, grid: &RadialGrid) -> Result<Vec<f64>> {
        self.check_bound(nu)?;
        let f = MorseEigenfunction::new(self, nu);
        Ok(grid.positions().map(|r| f.eval(r)).collect())
    }
}

pub fn morse_wavefunction(well: &MorseWell, nu: u32, r: f64) -> Result<f64> {
    well.wavefunction(nu, r)
}

/// Precomputed pieces of `N y^{λ−ν−½} e^{−y/2} L_ν^{(2λ−2ν−1)}(y)`,
/// `y = 2λ e^{−a(r−r_e)}`.
struct MorseEigenfunction {
    nu: u32,
    a: f64,
    r_e: f64,
    two_lambda: f64,
    power: f64,
    alpha: f64,
    ln_norm: f64,
}

impl MorseEigenfunction {
    fn new(w: &MorseWell, nu: u32) -> Self {
        let n = nu as f64;
        let alpha = 2.0 * w.lambda - 2.0 * n - 1.0;
        let ln_norm = 0.5
            * (w.a.ln() + alpha.ln() + libm::lgamma(n + 1.0) - libm::lgamma(2.0 * w.lambda - n));
        MorseEigenfunction {
            nu,
            a: w.a,
            r_e: w.r_e,
            two_lambda: 2.0 * w.lambda,
            power: w.lambda - n - 0.5,
            alpha,
            ln_norm,
        }
    }

    fn eval(&self, r: f64) -> f64 {
        let y = self.two_lambda * (-self.a * (r - self.r_e)).exp();
        if y == 0.0 || !y.is_finite() {
            return 0.0;
        }
        let (mantissa, ln_scale) = laguerre_scaled(self.nu, self.alpha, y);
        if mantissa == 0.0 {
            return 0.0;
        }
        let ln_mag = self.ln_norm + self.power * y.ln() - 0.5 * y + ln_scale + mantissa.abs().ln();
        if ln_mag < -745.0 {
            return 0.0;
        }
        mantissa.signum() * ln_mag.exp()
    }
}

const LAGUERRE_RESCALE: f64 = 1e150;

/// Generalized Laguerre polynomial `L_n^{(α)}(x)` by upward recurrence,
/// returned as `(m, s)` with value `m·e^s` so large degrees cannot overflow.
pub fn laguerre_scaled(n: u32, alpha: f64, x: f64) -> (f64, f64) {
    let mut prev = 1.0f64;
    if n == 0 {
        return (prev, 0.0);
    }
    let mut cur = 1.0 + alpha - x;
    let mut ln_scale = 0.0;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > LAGUERRE_RESCALE {
            cur /= LAGUERRE_RESCALE;
            prev /= LAGUERRE_RESCALE;
            ln_scale += LAGUERRE_RESCALE.ln();
        }
    }
    (cur, ln_scale)
}

/// Uniform grid over `[r_min, r_max]` with an odd point count, for
/// composite Simpson quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, points: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min) {
            return Err(Error::invalid(
                "grid",
                format!("bad range [{r_min}, {r_max}]"),
            ));
        }
        if points < 3 || points.is_multiple_of(2) {
            return Err(Error::invalid(
                "grid",
                "point count must be odd and at least 3",
            ));
        }
        Ok(RadialGrid {
            r_min,
            r_max,
            points,
        })
    }

    /// Grid wide and fine enough for `u_ν`, ν ≤ `max_nu`, of a single well.
    pub fn for_well(well: &MorseWell, max_nu: u32) -> Result<Self> {
        well.check_bound(max_nu)?;
        let lo = well.inner_extent().max(0.05 * well.r_e);
        let hi = well.outer_extent(max_nu);
        let step = 2.0 * std::f64::consts::PI / (16.0 * well.max_wavenumber(max_nu));
        Self::sized(lo, hi, step)
    }

    /// Grid for overlaps between levels ν ≤ `lower_max` of `lower` and
    /// ν' ≤ `upper_max` of `upper`. The integrand of a pair lives where both
    /// functions do, so the outer edge is the nearer of the two extents.
    /// The construction is symmetric under exchanging the wells.
    pub fn for_pair(
        lower: &MorseWell,
        lower_max: u32,
        upper: &MorseWell,
        upper_max: u32,
    ) -> Result<Self> {
        lower.check_bound(lower_max)?;
        upper.check_bound(upper_max)?;
        let lo = lower
            .inner_extent()
            .min(upper.inner_extent())
            .max(0.05 * lower.r_e.min(upper.r_e));
        let base_hi = lower.r_e.max(upper.r_e) + 12.0 / lower.a.min(upper.a);
        let hi = lower
            .outer_extent(lower_max)
            .min(upper.outer_extent(upper_max))
            .max(base_hi);
        let k = lower
            .max_wavenumber(lower_max)
            .max(upper.max_wavenumber(upper_max));
        Self::sized(lo, hi, 2.0 * std::f64::consts::PI / (16.0 * k))
    }

    fn sized(lo: f64, hi: f64, max_step: f64) -> Result<Self> {
        let needed = ((hi - lo) / max_step).ceil() as usize + 1;
        let mut points = needed.max(BASE_GRID_POINTS);
        if points.is_multiple_of(2) {
            points += 1;
        }
        Self::new(lo, hi, points)
    }

    pub fn step(&self) -> f64 {
        (self.r_max - self.r_min) / (self.points - 1) as f64
    }

    /// Same range, half the step.
    pub fn refined(&self) -> Self {
        RadialGrid {
            points: 2 * self.points - 1,
            ..*self
        }
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (0..self.points).map(move |i| self.r_min + i as f64 * h)
    }

    pub fn simpson_weights(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points)
            .map(|i| {
                let c = if i == 0 || i == self.points - 1 {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                c * h / 3.0
            })
            .collect()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.points);
        self.simpson_weights()
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum()
    }
}

/// Overlaps `R_ν^ν'` for a block of lower and upper vibrational levels.
#[derive(Clone, Debug)]
pub struct OverlapMatrix {
    pub lower: RangeInclusive<u32>,
    pub upper: RangeInclusive<u32>,
    /// Row-major, rows indexed by lower ν.
    values: Vec<f64>,
    /// Grid the reported values were computed on.
    pub grid: RadialGrid,
}

impl OverlapMatrix {
    /// Computes every overlap on the refined grid and checks it against the
    /// base grid (every other point).
    pub fn compute(
        lower: &MorseWell,
        upper: &MorseWell,
        lower_levels: RangeInclusive<u32>,
        upper_levels: RangeInclusive<u32>,
    ) -> Result<Self> {
        if lower_levels.is_empty() || upper_levels.is_empty() {
            return Err(Error::invalid("levels", "empty vibrational range"));
        }
        let base = RadialGrid::for_pair(lower, *lower_levels.end(), upper, *upper_levels.end())?;
        let fine = base.refined();
        let fine_w = fine.simpson_weights();
        let base_w = base.simpson_weights();

        let sample_all =
            |well: &MorseWell, levels: &RangeInclusive<u32>| -> Result<Vec<Vec<f64>>> {
                levels
                    .clone()
                    .into_par_iter()
                    .map(|nu| well.sample(nu, &fine))
                    .collect()
            };
        let lower_fns = sample_all(lower, &lower_levels)?;
        let upper_fns = sample_all(upper, &upper_levels)?;

        let n_upper = upper_fns.len();
        let rows: Vec<Result<Vec<f64>>> = lower_fns
            .par_iter()
            .enumerate()
            .map(|(i, u_lo)| {
                let weighted_fine: Vec<f64> =
                    u_lo.iter().zip(&fine_w).map(|(u, w)| u * w).collect();
                let weighted_base: Vec<f64> = u_lo
                    .iter()
                    .step_by(2)
                    .zip(&base_w)
                    .map(|(u, w)| u * w)
                    .collect();
                let mut row = Vec::with_capacity(n_upper);
                for (j, u_up) in upper_fns.iter().enumerate() {
                    let r_fine: f64 = weighted_fine.iter().zip(u_up).map(|(a, b)| a * b).sum();
                    let r_base: f64 = weighted_base
                        .iter()
                        .zip(u_up.iter().step_by(2))
                        .map(|(a, b)| a * b)
                        .sum();
                    let change = (r_fine - r_base).abs();
                    if change > CONVERGENCE_TOLERANCE {
                        return Err(Error::QuadratureNotConverged {
                            nu: lower_levels.start() + i as u32,
                            nu_prime: upper_levels.start() + j as u32,
                            change,
                        });
                    }
                    row.push(r_fine);
                }
                Ok(row)
            })
            .collect();
        let mut values = Vec::with_capacity(lower_fns.len() * n_upper);
        for row in rows {
            values.extend(row?);
        }
        Ok(OverlapMatrix {
            lower: lower_levels,
            upper: upper_levels,
            values,
            grid: fine,
        })
    }

    fn n_upper(&self) -> usize {
        (self.upper.end() - self.upper.start() + 1) as usize
    }

    /// `R_ν^ν'`, or `None` outside the computed block.
    pub fn get(&self, nu: u32, nu_prime: u32) -> Option<f64> {
        if !self.lower.contains(&nu) || !self.upper.contains(&nu_prime) {
            return None;
        }
        let i = (nu - self.lower.start()) as usize;
        let j = (nu_prime - self.upper.start()) as usize;
        Some(self.values[i * self.n_upper() + j])
    }

    /// Franck–Condon factor |R_ν^ν'|².
    pub fn factor(&self, nu: u32, nu_prime: u32) -> Option<f64> {
        self.get(nu, nu_prime).map(|r| r * r)
    }

    pub fn row(&self, nu: u32) -> Option<&[f64]> {
        if !self.lower.contains(&nu) {
            return None;
        }
        let n = self.n_upper();
        let i = (nu - self.lower.start()) as usize;
        Some(&self.values[i * n..(i + 1) * n])
    }

    /// Columns `nu, nu_prime, R, R_squared`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "nu,nu_prime,R,R_squared")?;
        for nu in self.lower.clone() {
            for nup in self.upper.clone() {
                let r = self.get(nu, nup).unwrap_or(0.0);
                writeln!(out, "{nu},{nup},{r},{}", r * r)?;
            }
        }
        Ok(())
    }
}

/// Single overlap `R_ν^ν' = ∫ u_ν^{lower} u_ν'^{upper} dr`.
pub fn franck_condon_overlap(
    lower: &MorseWell,
    upper: &MorseWell,
    nu: u32,
    nu_prime: u32,
) -> Result<f64> {
    let m = OverlapMatrix::compute(lower, upper, nu..=nu, nu_prime..=nu_prime)?;
    Ok(m.values[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::constants::{ANGSTROM, ATOMIC_MASS_UNIT};
    use approx::assert_relative_eq;

    pub(crate) fn na2_like(omega_e: f64, omega_e_x_e: f64, r_e: f64) -> MolecularConstants {
        MolecularConstants {
            label: "test".into(),
            e_el: Wavenumber::ZERO,
            omega_e: Wavenumber::new(omega_e),
            omega_e_x_e: Wavenumber::new(omega_e_x_e),
            b_e: Wavenumber::new(0.15),
            alpha_e: Wavenumber::ZERO,
            d: Wavenumber::ZERO,
            omega: 0,
            r_e: r_e * ANGSTROM,
            reduced_mass: 11.49488464 * ATOMIC_MASS_UNIT,
            mass: 4.0 * 11.49488464 * ATOMIC_MASS_UNIT,
            dipole_au: None,
        }
    }

    #[test]
    fn well_parameters() {
        let w = MorseWell::from_constants(&na2_like(159.125, 0.7254, 3.0789)).unwrap();
        assert_relative_eq!(w.lambda, 159.125 / (2.0 * 0.7254), max_relative = 1e-12);
        assert_eq!(w.nu_max, 109);
        assert_relative_eq!(
            w.depth.cm1(),
            159.125f64.powi(2) / (4.0 * 0.7254),
            max_relative = 1e-12
        );
        // Morse level energies reproduce the term-value expansion.
        assert_relative_eq!(
            w.vibrational_energy(3).cm1(),
            159.125 * 3.5 - 0.7254 * 3.5 * 3.5,
            max_relative = 1e-10
        );
        // a in Å⁻¹: sqrt(ω_e x_e / (ħ²/2μ)) with ħ²/2μ = 16.857629/μ[amu] cm⁻¹Å²
        assert_relative_eq!(
            w.a * ANGSTROM,
            (0.7254f64 / (16.857_629 / 11.49488464)).sqrt(),
            max_relative = 1e-6
        );
    }

    #[test]
    fn laguerre_small_degrees() {
        let x = 0.7;
        let a = 2.5;
        let (l2, s) = laguerre_scaled(2, a, x);
        assert_eq!(s, 0.0);
        let exact = x * x / 2.0 - (a + 2.0) * x + (a + 2.0) * (a + 1.0) / 2.0;
        assert_relative_eq!(l2, exact, max_relative = 1e-14);
        let (l200, s) = laguerre_scaled(200, 0.5, 3000.0);
        assert!(l200.is_finite() && s > 0.0);
    }

    #[test]
    fn normalized_and_orthogonal() {
        let w = MorseWell::from_constants(&na2_like(159.125, 0.7254, 3.0789)).unwrap();
        for nu in [0u32, 1, 5, 20, 60, 100, w.nu_max] {
            let grid = RadialGrid::for_well(&w, nu).unwrap();
            let u = w.sample(nu, &grid).unwrap();
            let norm = grid.integrate(&u.iter().map(|x| x * x).collect::<Vec<_>>());
            assert!((norm - 1.0).abs() < 1e-8, "nu={nu}: norm={norm}");
        }
        let grid = RadialGrid::for_well(&w, 1).unwrap();
        let u0 = w.sample(0, &grid).unwrap();
        let u1 = w.sample(1, &grid).unwrap();
        let ov = grid.integrate(&u0.iter().zip(&u1).map(|(a, b)| a * b).collect::<Vec<_>>());
        assert!(ov.abs() < 1e-8, "{ov}");
    }

    #[test]
    fn ground_state_peak_location() {
        let w = MorseWell::from_constants(&na2_like(159.125, 0.7254, 3.0789)).unwrap();
        let grid = RadialGrid::for_well(&w, 0).unwrap();
        let u = w.sample(0, &grid).unwrap();
        let (imax, _) = u
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap();
        let r_peak = grid.r_min + imax as f64 * grid.step();
        assert!((r_peak - w.ground_state_peak()).abs() <= grid.step());
    }

    #[test]
    fn rejects_unbound_level_and_bad_r() {
        let w = MorseWell::from_constants(&na2_like(159.125, 0.7254, 3.0789)).unwrap();
        assert!(matches!(
            w.wavefunction(110, 3e-10),
            Err(Error::UnboundLevel { .. })
        ));
        assert!(w.wavefunction(0, 0.0).is_err());
        assert!(MorseWell::from_constants(&na2_like(100.0, 0.0, 3.0)).is_err());
    }

    #[test]
    fn identical_wells_give_identity() {
        let w = MorseWell::from_constants(&na2_like(159.125, 0.7254, 3.0789)).unwrap();
        let m = OverlapMatrix::compute(&w, &w, 0..=12, 0..=12).unwrap();
        for i in 0..=12 {
            for j in 0..=12 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((m.get(i, j).unwrap() - expect).abs() < 1e-6, "({i},{j})");
            }
        }
    }

    #[test]
    fn exchange_symmetry_and_bounds() {
        let x = MorseWell::from_constants(&na2_like(159.125, 0.7254, 3.0789)).unwrap();
        let a = MorseWell::from_constants(&na2_like(117.0, 0.3576, 3.6384)).unwrap();
        let xa = OverlapMatrix::compute(&x, &a, 0..=5, 0..=15).unwrap();
        let ax = OverlapMatrix::compute(&a, &x, 0..=15, 0..=5).unwrap();
        for nu in 0..=5 {
            for nup in 0..=15 {
                let r = xa.get(nu, nup).unwrap();
                assert!(r.abs() <= 1.0 + 1e-6);
                assert!((r - ax.get(nup, nu).unwrap()).abs() < 1e-8);
            }
            let row_sum: f64 = xa.row(nu).unwrap().iter().map(|r| r * r).sum();
            assert!(row_sum <= 1.0 + 1e-3);
        }
        assert_eq!(xa.get(6, 0), None);
    }

    #[test]
    fn single_overlap_matches_matrix() {
        let x = MorseWell::from_constants(&na2_like(159.125, 0.7254, 3.0789)).unwrap();
        let a = MorseWell::from_constants(&na2_like(117.0, 0.3576, 3.6384)).unwrap();
        let single = franck_condon_overlap(&x, &a, 0, 6).unwrap();
        let m = OverlapMatrix::compute(&x, &a, 0..=0, 0..=6).unwrap();
        assert!((single - m.get(0, 6).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn csv_dump_header() {
        let w = MorseWell::from_constants(&na2_like(159.125, 0.7254, 3.0789)).unwrap();
        let m = OverlapMatrix::compute(&w, &w, 0..=1, 0..=1).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("nu,nu_prime,R,R_squared\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
