//! Rotational line-strength factors.
//!
//! `L_{JMΩ}^{J'M'Ω'} = ∫ u*_{J'M'Ω'} u_{JMΩ} w(θ) sinθ dθ dφ` with
//! `w = cosθ` for ΔΩ = 0 and `w = sinθ` for ΔΩ = ±1. The symmetric-top
//! functions are `u_{JMΩ} = √((2J+1)/4π) e^{iMφ} d^J_{MΩ}(θ)`, which reduce
//! to spherical harmonics for Ω = 0.
//!
//! Σ–Σ factors (Ω = Ω' = 0) use the closed-form cosθ matrix elements; every
//! other case goes through 2-D quadrature. Only |L| is meaningful downstream.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre order used for the θ integral (in cosθ).
pub const THETA_NODES: usize = 64;
/// Trapezoid points used for the φ integral.
pub const PHI_POINTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationalFactor {
    pub j: u32,
    pub m: i32,
    pub omega: i32,
    pub j_prime: u32,
    pub m_prime: i32,
    pub omega_prime: i32,
    pub l: f64,
}

impl RotationalFactor {
    pub fn compute(
        j: u32,
        m: i32,
        omega: i32,
        j_prime: u32,
        m_prime: i32,
        omega_prime: i32,
    ) -> Result<Self> {
        let l = l_factor(j, m, omega, j_prime, m_prime, omega_prime)?;
        Ok(RotationalFactor {
            j,
            m,
            omega,
            j_prime,
            m_prime,
            omega_prime,
            l,
        })
    }
}

fn check_numbers(j: u32, m: i32, omega: i32) -> Result<()> {
    if m.unsigned_abs() > j || omega.unsigned_abs() > j {
        return Err(Error::InvalidQuantumNumbers(format!(
            "J={j}, M={m}, Omega={omega} (need |M| <= J and |Omega| <= J)"
        )));
    }
    Ok(())
}

/// Rotational factor of the dipole matrix element for linear polarization.
pub fn l_factor(
    j: u32,
    m: i32,
    omega: i32,
    j_prime: u32,
    m_prime: i32,
    omega_prime: i32,
) -> Result<f64> {
    check_numbers(j, m, omega)?;
    check_numbers(j_prime, m_prime, omega_prime)?;
    if m_prime != m || (omega_prime - omega).abs() > 1 {
        return Ok(0.0);
    }
    if omega == 0 && omega_prime == 0 {
        return Ok(sigma_cos_element(j, m, j_prime));
    }
    Ok(angular_integral(j, m, omega, j_prime, m_prime, omega_prime))
}

/// `⟨J' M|cosθ|J M⟩` for Ω = 0.
fn sigma_cos_element(j: u32, m: i32, j_prime: u32) -> f64 {
    let jf = j as f64;
    let m2 = (m as f64).powi(2);
    if j_prime == j + 1 {
        (((jf + 1.0).powi(2) - m2) / ((2.0 * jf + 1.0) * (2.0 * jf + 3.0))).sqrt()
    } else if j_prime + 1 == j {
        ((jf * jf - m2) / ((2.0 * jf - 1.0) * (2.0 * jf + 1.0))).sqrt()
    } else {
        0.0
    }
}

/// Hönl–London factor of a Σ–Σ line: `J+1` on the R branch, `J` on the P
/// branch. The Q branch is absent.
pub fn honl_london(j: u32, j_prime: u32) -> Result<f64> {
    if j_prime == j {
        return Err(Error::ForbiddenBranch(j));
    }
    if j_prime == j + 1 {
        Ok(j as f64 + 1.0)
    } else if j_prime + 1 == j {
        Ok(j as f64)
    } else {
        Err(Error::InvalidQuantumNumbers(format!(
            "|J'-J| must be 1, got J={j}, J'={j_prime}"
        )))
    }
}

/// `(1/(2J+1)) Σ_M Σ_{J'} |L|²`, the M-averaged ⟨cos²θ⟩ of level `(J, Ω)`.
pub fn sum_rule_check(j: u32, omega: i32) -> Result<f64> {
    check_numbers(j, 0, omega)?;
    let mut total = 0.0;
    for m in -(j as i32)..=(j as i32) {
        for j_prime in j.saturating_sub(1)..=j + 1 {
            if omega.unsigned_abs() > j_prime || m.unsigned_abs() > j_prime {
                continue;
            }
            total += l_factor(j, m, omega, j_prime, m, omega)?.powi(2);
        }
    }
    Ok(total / (2 * j + 1) as f64)
}

/// Angular integral by quadrature: Gauss–Legendre in cosθ, trapezoid in φ.
/// Valid for any quantum numbers; used for ΔΩ ≠ 0 or Ω ≠ 0.
pub fn angular_integral(
    j: u32,
    m: i32,
    omega: i32,
    j_prime: u32,
    m_prime: i32,
    omega_prime: i32,
) -> f64 {
    let parallel = omega == omega_prime;
    if !parallel && (omega - omega_prime).abs() != 1 {
        return 0.0;
    }
    let (nodes, weights) = gauss_legendre(THETA_NODES);
    let norm = ((2 * j + 1) as f64 * (2 * j_prime + 1) as f64).sqrt() / (4.0 * PI);
    let theta_part: f64 = nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| {
            let weight = if parallel { x } else { (1.0 - x * x).sqrt() };
            w * wigner_small_d_cos(j_prime, m_prime, omega_prime, x)
                * wigner_small_d_cos(j, m, omega, x)
                * weight
        })
        .sum();
    let dphi = 2.0 * PI / PHI_POINTS as f64;
    let phi_part: f64 = (0..PHI_POINTS)
        .map(|k| ((m - m_prime) as f64 * k as f64 * dphi).cos() * dphi)
        .sum();
    norm * theta_part * phi_part
}

/// Wigner small-d `d^j_{m'm}(β)` evaluated at `x = cos β`, through the
/// Jacobi-polynomial representation (stable for large j).
pub fn wigner_small_d_cos(j: u32, m_prime: i32, m: i32, x: f64) -> f64 {
    let j = j as i64;
    let (mp, m) = (m_prime as i64, m as i64);
    if mp.abs() > j || m.abs() > j {
        return 0.0;
    }
    let k = (j + m).min(j - m).min(j + mp).min(j - mp);
    let (a, lambda) = if k == j + m {
        (mp - m, mp - m)
    } else if k == j - m || k == j + mp {
        (m - mp, 0)
    } else {
        (mp - m, mp - m)
    };
    let b = 2 * j - 2 * k - a;
    let sign = if lambda.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let ln_coeff = 0.5 * (ln_binomial(2 * j - k, k + a) - ln_binomial(k + b, b));
    let half_sin = ((1.0 - x) / 2.0).max(0.0).sqrt();
    let half_cos = ((1.0 + x) / 2.0).max(0.0).sqrt();
    sign * ln_coeff.exp()
        * half_sin.powi(a as i32)
        * half_cos.powi(b as i32)
        * jacobi(k as u32, a as f64, b as f64, x)
}

fn ln_binomial(n: i64, k: i64) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// Jacobi polynomial `P_n^{(a,b)}(x)` by three-term recurrence.
fn jacobi(n: u32, a: f64, b: f64, x: f64) -> f64 {
    let mut p0 = 1.0;
    if n == 0 {
        return p0;
    }
    let mut p1 = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for n in 2..=n {
        let n = n as f64;
        let s = 2.0 * n + a + b;
        let c1 = 2.0 * n * (n + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * s;
        let p2 = (c2 * p1 - c3 * p0) / c1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Nodes and weights of n-point Gauss–Legendre quadrature on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
