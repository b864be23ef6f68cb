//! Local Tate integrals over E_p = ℚ_p², ℚ_{p²} or a ramified quadratic
//! extension, for unramified ω, as closed forms against shell sums.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::padic::{a_squared, ratio_f64};
use crate::arith::{jacobi, kronecker};
use crate::error::{Error, Result};

pub const MIN_SHELLS: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitType {
    Split,
    Inert,
    Ramified,
}

/// Norm form of a ℤ_p-basis of 𝒪_{E_p}, and ζ_{E_p}(1), D_p.
struct LocalAlgebra {
    norm: Box<dyn Fn(i64, i64) -> i64>,
    zeta1: f64,
    d_p: f64,
    /// p-adic absolute value of a uniformizer (of each factor, if split).
    uniformizer_abs: f64,
}

fn algebra(p: u64, t: SplitType, u: i64) -> Result<LocalAlgebra> {
    let pf = p as f64;
    let pi = p as i64;
    Ok(match t {
        SplitType::Split => LocalAlgebra {
            // ℤ_p × ℤ_p through (x, y) ↦ (x, x + y)
            norm: Box::new(|x, y| x * (x + y)),
            zeta1: 1.0 / (1.0 - 1.0 / pf).powi(2),
            d_p: 1.0,
            uniformizer_abs: 1.0 / pf,
        },
        SplitType::Inert => {
            let norm: Box<dyn Fn(i64, i64) -> i64> = if p == 2 {
                Box::new(|x, y| x * x + x * y + y * y)
            } else {
                let n = (2..pi).find(|&n| jacobi(n, p) == -1).expect("nonresidue exists");
                Box::new(move |x, y| x * x - n * y * y)
            };
            LocalAlgebra { norm, zeta1: 1.0 / (1.0 - 1.0 / (pf * pf)), d_p: 1.0, uniformizer_abs: 1.0 / (pf * pf) }
        }
        SplitType::Ramified => {
            if p == 2 {
                return Err(Error::Domain("ramified model implemented for odd p".into()));
            }
            if u.rem_euclid(pi) == 0 {
                return Err(Error::Domain("u must be a p-adic unit".into()));
            }
            LocalAlgebra {
                norm: Box::new(move |x, y| x * x - pi * u * y * y),
                zeta1: 1.0 / (1.0 - 1.0 / pf),
                d_p: pf,
                uniformizer_abs: 1.0 / pf,
            }
        }
    })
}

/// vol(𝒪^×) for d^×t = ζ_E(1)·dt/|t|_E with vol(𝒪) = D_p^{−1/2}, by
/// counting unit residues mod p in the basis model.
fn unit_volume(p: u64, alg: &LocalAlgebra) -> f64 {
    let pi = p as i64;
    let mut units = 0u64;
    for x in 0..pi {
        for y in 0..pi {
            if (alg.norm)(x, y).rem_euclid(pi) != 0 {
                units += 1;
            }
        }
    }
    alg.zeta1 * alg.d_p.powf(-0.5) * units as f64 / (p * p) as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct TateResult {
    pub closed: Complex64,
    pub truncated: Complex64,
    pub tail_bound: f64,
    pub unit_volume: f64,
}

/// Z(1_{𝒪}, ω|·|^s) = D_p^{−1/2} L_{E_p}(s, ω) against Σ over valuation
/// shells. `omega` holds ω at the uniformizer(s): two values when split, one
/// otherwise (ω(p) if inert, ω(δ) if ramified).
pub fn tate_unramified(p: u64, t: SplitType, s: Complex64, omega: &[Complex64], shells: u32) -> Result<TateResult> {
    if s.re <= 0.0 {
        return Err(Error::Domain("Re s must be positive".into()));
    }
    if shells < MIN_SHELLS {
        return Err(Error::Domain(format!("need at least {MIN_SHELLS} shells")));
    }
    let want = if t == SplitType::Split { 2 } else { 1 };
    if omega.len() != want || omega.iter().any(|w| w.norm() > 1.0 + 1e-12) {
        return Err(Error::Domain("omega must give unitary values at the uniformizers".into()));
    }
    let alg = algebra(p, t, 1)?;
    let vol = unit_volume(p, &alg);
    let q = Complex64::new(alg.uniformizer_abs, 0.0);
    // ratio per shell: ω(ϖ)|ϖ|^s
    let ratios: Vec<Complex64> = omega.iter().map(|w| w * q.powc(s)).collect();
    let geo = |r: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for _ in 0..shells {
            acc += term;
            term *= r;
        }
        acc
    };
    let truncated = vol * ratios.iter().map(|&r| geo(r)).product::<Complex64>();
    let l: Complex64 = ratios.iter().map(|&r| (Complex64::new(1.0, 0.0) - r).inv()).product();
    let closed = alg.d_p.powf(-0.5) * l;
    let m = shells as i32;
    let denom: f64 = ratios.iter().map(|r| (Complex64::new(1.0, 0.0) - r).norm()).product();
    let tail = match ratios.as_slice() {
        [r1, r2] => r1.norm().powi(m) + r2.norm().powi(m) + (r1.norm() * r2.norm()).powi(m),
        [r] => r.norm().powi(m),
        _ => unreachable!(),
    };
    Ok(TateResult { closed, truncated, tail_bound: vol * tail / denom, unit_volume: vol })
}

#[derive(Clone, Debug, Serialize)]
pub struct RamifiedZeta {
    pub j: u32,
    pub cell_sum: Complex64,
    pub closed: Complex64,
    pub bound: f64,
}

/// Zeta integrals of the two K₀(p)-level vectors over E_p = ℚ_p(√(pu)),
/// p odd, by summing over cells (x, y) mod p² of x + yδ, against the closed
/// forms A₀D_p^{−1/2} and A₁ω(δ)p^{−s}D_p^{−1/2}; `bound` is
/// ζ_p(1)p^{1/2−Re s}D_p^{−1/2}.
pub fn ramified_level_integrals(p: u64, u: i64, omega_delta: Complex64, s: Complex64) -> Result<[RamifiedZeta; 2]> {
    let alg = algebra(p, SplitType::Ramified, u)?;
    let pi = p as i64;
    let p2 = pi * pi;
    let pf = p as f64;
    let a = [ratio_f64(&a_squared(p, 0, 1)).sqrt(), ratio_f64(&a_squared(p, 1, 1)).sqrt()];
    let cell = alg.d_p.powf(-0.5) / (p2 * p2) as f64;
    let mut sums = [Complex64::new(0.0, 0.0); 2];
    for x in 0..p2 {
        for y in 0..p2 {
            // Ψ⁰ on ℤ_p^× + δℤ_p, Ψ¹ on pℤ_p + δℤ_p^×
            let support = match (x % pi != 0, y % pi != 0) {
                (true, _) => 0,
                (false, true) => 1,
                _ => continue,
            };
            let n = (alg.norm)(x, y).rem_euclid(p2);
            let v = if n % pi != 0 { 0 } else if n % p2 != 0 { 1 } else { unreachable!("norm of a support cell") };
            // ω(t)|t|_E^s · ζ_E(1)/|t|_E over the cell
            let abs_t = pf.powi(-v);
            let term = omega_delta.powi(v) * Complex64::new(abs_t, 0.0).powc(s) * (alg.zeta1 / abs_t) * cell;
            sums[support] += a[support] * term;
        }
    }
    let dm = alg.d_p.powf(-0.5);
    let closed = [
        Complex64::new(a[0] * dm, 0.0),
        a[1] * omega_delta * Complex64::new(pf, 0.0).powc(-s) * dm,
    ];
    let bound = pf / (pf - 1.0) * pf.powf(0.5 - s.re) * dm;
    Ok([0, 1].map(|j| RamifiedZeta { j: j as u32, cell_sum: sums[j], closed: closed[j], bound }))
}

/// Splitting type of p in ℚ(√D).
pub fn splitting(disc: i64, p: u64) -> SplitType {
    match kronecker(disc, p) {
        1 => SplitType::Split,
        -1 => SplitType::Inert,
        _ => SplitType::Ramified,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn split_trivial_at_three() {
        let r = tate_unramified(3, SplitType::Split, c(1.0, 0.0), &[c(1.0, 0.0), c(1.0, 0.0)], 60).unwrap();
        assert!((r.closed - c(2.25, 0.0)).norm() < 1e-15);
        assert!((r.truncated - r.closed).norm() < 1e-12);
        assert!((r.unit_volume - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inert_and_ramified_closed_forms() {
        for p in [2u64, 3, 5, 7] {
            let s = c(0.7, 2.0);
            let r = tate_unramified(p, SplitType::Inert, s, &[c(1.0, 0.0)], 80).unwrap();
            let pf = p as f64;
            let want = (c(1.0, 0.0) - c(pf, 0.0).powc(-2.0 * s)).inv();
            assert!((r.closed - want).norm() < 1e-14);
            assert!((r.truncated - r.closed).norm() <= r.tail_bound + 1e-15);
            if p > 2 {
                let w = c(0.0, 1.0);
                let r = tate_unramified(p, SplitType::Ramified, s, &[w], 80).unwrap();
                let want = pf.powf(-0.5) * (c(1.0, 0.0) - w * c(pf, 0.0).powc(-s)).inv();
                assert!((r.closed - want).norm() < 1e-14);
                assert!((r.unit_volume - pf.powf(-0.5)).abs() < 1e-15);
                assert!((r.truncated - r.closed).norm() < 1e-12);
            }
        }
        assert!(tate_unramified(2, SplitType::Ramified, c(1.0, 0.0), &[c(1.0, 0.0)], 60).is_err());
        assert!(tate_unramified(3, SplitType::Split, c(0.0, 1.0), &[c(1.0, 0.0), c(1.0, 0.0)], 60).is_err());
        assert!(tate_unramified(3, SplitType::Inert, c(1.0, 0.0), &[c(1.0, 0.0)], 10).is_err());
    }

    #[test]
    fn ramified_level_integrals_match_and_bound_at_half() {
        for p in [3u64, 5, 7, 11] {
            for u in [1i64, 2, 3] {
                if u % p as i64 == 0 {
                    continue;
                }
                for w in [c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0)] {
                    for t in [0.0, 3.0] {
                        let s = c(0.5, t);
                        for z in ramified_level_integrals(p, u, w, s).unwrap() {
                            assert!((z.cell_sum - z.closed).norm() < 1e-13);
                            assert!(z.cell_sum.norm() <= z.bound);
                        }
                    }
                }
            }
        }
        // at larger Re s the s-independent Ψ⁰ integral exceeds the stated bound
        let z = ramified_level_integrals(3, 1, c(1.0, 0.0), c(3.0, 0.0)).unwrap();
        assert!(z[0].cell_sum.norm() > z[0].bound);
    }
}
