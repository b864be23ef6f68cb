//! Archimedean zeta and Rankin–Selberg integrals against their Γ-products.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::{bessel_k, exp_sinh, gamma, gamma_r};

const QUAD_TOL: f64 = 1e-13;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// (4∫₀^∞ e^{−πr²} r^{2s−1} dr, 2π^{−s}Γ(s)).
pub fn arch_tate(s: Complex64) -> Result<(Complex64, Complex64)> {
    if s.re <= 0.0 {
        return Err(Error::Domain("Re s must be positive".into()));
    }
    let q = exp_sinh(|r| (-PI * r * r).exp() * c(r).powc(2.0 * s - 1.0), QUAD_TOL)
        .ok_or_else(|| Error::Domain("quadrature did not converge".into()))?;
    Ok((4.0 * q, 2.0 * c(PI).powc(-s) * gamma(s)))
}

/// (8∫₀^∞ K_{ν₁}(2πy)K_{ν₂}(2πy) y^{s−1} dy, Γ_ℝ(2s)⁻¹ Π_{±,±} Γ_ℝ(s ± ν₁ ± ν₂)).
///
/// The factor 8 is the integral over ℝ^× = two half-lines of the
/// 4K K |y|^{s−1} integrand.
pub fn arch_rs_integral(nu1: Complex64, nu2: Complex64, s: Complex64) -> Result<(Complex64, Complex64)> {
    if s.re <= nu1.re.abs() + nu2.re.abs() {
        return Err(Error::Domain("need Re s > |Re nu1| + |Re nu2|".into()));
    }
    let q = exp_sinh(
        |y| bessel_k(nu1, 2.0 * PI * y) * bessel_k(nu2, 2.0 * PI * y) * c(y).powc(s - 1.0),
        QUAD_TOL,
    )
    .ok_or_else(|| Error::Domain("quadrature did not converge".into()))?;
    let mut rhs = gamma_r(2.0 * s).inv();
    for a in [1.0, -1.0] {
        for b in [1.0, -1.0] {
            rhs *= gamma_r(s + a * nu1 + b * nu2);
        }
    }
    Ok((8.0 * q, rhs))
}

/// ‖W‖² = Γ_ℝ(2)∫_{ℝ^×}|2√|y| K_ν(2πy)|² d^×y against L(1, Ad) =
/// Γ_ℝ(1+2ν)Γ_ℝ(1−2ν), for ν ∈ iℝ ∪ (−1/2, 1/2).
pub fn whittaker_norm(nu: Complex64) -> Result<(Complex64, Complex64)> {
    let unitary = nu.re == 0.0 || (nu.im == 0.0 && nu.re.abs() < 0.5);
    if !unitary {
        return Err(Error::Domain("nu must be on the unitary axis or in (-1/2, 1/2)".into()));
    }
    let q = exp_sinh(|y| c(bessel_k(nu, 2.0 * PI * y).norm_sqr()), QUAD_TOL)
        .ok_or_else(|| Error::Domain("quadrature did not converge".into()))?;
    let lhs = gamma_r(c(2.0)) * 8.0 * q;
    Ok((lhs, gamma_r(1.0 + 2.0 * nu) * gamma_r(1.0 - 2.0 * nu)))
}
