//! Exact local computations: p-adic level vectors and their images in the
//! induced representation, unramified Tate integrals, and the archimedean
//! Γ-identities. Every check is reported as {name, params, lhs, rhs,
//! residual, pass}.

pub mod arch;
pub mod cyclo;
pub mod padic;
pub mod tate;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

pub use arch::{arch_rs_integral, arch_tate, whittaker_norm};
pub use cyclo::{Cyclo, LaurentValue};
pub use padic::{
    basis_orthonormality, closed_form_value, induced_value, invariant_dimension, Mat2, PadicCharacter,
    PadicSchwartz,
};
pub use tate::{ramified_level_integrals, tate_unramified, SplitType};

use crate::error::Result;

pub const TATE_TOL: f64 = 1e-12;
pub const ARCH_TATE_TOL: f64 = 1e-10;
pub const ARCH_RS_TOL: f64 = 1e-6;
pub const DEFAULT_SHELLS: u32 = 120;
/// Floating-point allowance on top of the geometric tail bound.
const ROUNDOFF: f64 = 1e-13;

#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub params: Value,
    pub lhs: Value,
    pub rhs: Value,
    pub residual: f64,
    pub pass: bool,
}

fn cjson(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// Random element of GL₂(ℤ/p^depth) whose lower-left valuation is uniform
/// on 0..=depth, so every support shell is hit.
pub fn sample_group_element(p: u64, depth: u32, rng: &mut impl Rng) -> Mat2 {
    let m = p.pow(depth);
    let unit = |rng: &mut dyn rand::RngCore| loop {
        let u = rng.gen_range(1..m);
        if u % p != 0 {
            return u;
        }
    };
    let v = rng.gen_range(0..=depth);
    let c = if v == depth { 0 } else { p.pow(v) * unit(rng) % m };
    let d = if v == 0 { rng.gen_range(0..m) } else { unit(rng) };
    loop {
        let g = Mat2::new(rng.gen_range(0..m), rng.gen_range(0..m), c, d, p, depth);
        if g.is_invertible() {
            return g;
        }
    }
}

/// Induced value against the closed form on `samples` group elements.
pub fn closed_form_check(psi: &PadicSchwartz, depth: u32, samples: usize, rng: &mut impl Rng) -> Result<CheckEntry> {
    let mut mismatches = 0usize;
    let mut s_dependent = 0usize;
    let mut nonzero = 0usize;
    for _ in 0..samples {
        let g = sample_group_element(psi.p, depth, rng);
        let v = induced_value(psi, &g)?;
        let w = closed_form_value(psi, &g)?;
        if !v.exact_eq(&w) {
            mismatches += 1;
        }
        if psi.k >= 1 && v.value.support().iter().any(|&m| m != 0) {
            s_dependent += 1;
        }
        if !v.value.is_zero() {
            nonzero += 1;
        }
    }
    let bad = mismatches + s_dependent;
    Ok(CheckEntry {
        name: "induced_closed_form".into(),
        params: json!({"p": psi.p, "k": psi.k, "f": psi.f, "j": psi.j, "chi_exp": psi.chi.gen_exp,
            "chi_at_p": psi.chi.at_p, "depth": depth, "samples": samples, "nonzero_samples": nonzero}),
        lhs: json!(mismatches),
        rhs: json!(0),
        residual: bad as f64,
        pass: bad == 0,
    })
}

/// f(diag(a₁,a₂)·n·g·k₀) = χ(a₁/a₂)·f(g) for unit a_i, unipotent n and
/// k₀ ∈ K₀(p^k), on sampled elements.
pub fn equivariance_check(psi: &PadicSchwartz, depth: u32, samples: usize, rng: &mut impl Rng) -> Result<CheckEntry> {
    let p = psi.p;
    let m = p.pow(depth);
    let pk = p.pow(psi.k);
    let chi = &psi.chi;
    let mut bad = 0usize;
    for _ in 0..samples {
        let g = sample_group_element(p, depth, rng);
        let unit = |rng: &mut ChaCha8Rng| loop {
            let u = rng.gen_range(1..m);
            if u % p != 0 {
                return u;
            }
        };
        let mut local = ChaCha8Rng::seed_from_u64(rng.gen());
        let (a1, a2) = (unit(&mut local), unit(&mut local));
        let left = Mat2::new(a1, local.gen_range(0..m), 0, a2, p, depth);
        let k0 = loop {
            let cand = Mat2::new(local.gen_range(0..m), local.gen_range(0..m), pk * local.gen_range(0..m) % m,
                local.gen_range(0..m), p, depth);
            if cand.is_invertible() {
                break cand;
            }
        };
        let lhs = induced_value(psi, &left.mul(&g).mul(&k0))?;
        let base = induced_value(psi, &g)?;
        let e = (chi.exp_of(0, a1) + chi.neg(chi.exp_of(0, a2))) % chi.order;
        let rhs = base.value.scale(&Cyclo::root(chi.order, e));
        if !(lhs.value.exact_eq(&rhs)) {
            bad += 1;
        }
    }
    Ok(CheckEntry {
        name: "induced_equivariance".into(),
        params: json!({"p": p, "k": psi.k, "f": psi.f, "j": psi.j, "chi_exp": chi.gen_exp, "depth": depth, "samples": samples}),
        lhs: json!(bad),
        rhs: json!(0),
        residual: bad as f64,
        pass: bad == 0,
    })
}

/// The full grid of exact and numerical checks.
pub fn default_checks(seed: u64, samples: usize) -> Result<Vec<CheckEntry>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    // closed form of the images, p ∈ {2,3,5}, k ≤ 4, f ≤ 1
    for p in [2u64, 3, 5] {
        for f in 0..=1u32 {
            let mut chars = PadicCharacter::primitive(p, f)?;
            if f == 0 {
                // an unramified χ with χ(p) = i, for the spherical vector
                chars.push(PadicCharacter::unramified(p, 4, 1));
            }
            for k in 0..=4u32 {
                for chi in &chars {
                    if k >= 1 && chi.at_p != 0 {
                        continue;
                    }
                    for psi in PadicSchwartz::basis(chi, k)? {
                        let depth = k + 2;
                        out.push(closed_form_check(&psi, depth, samples, &mut rng)?);
                        out.push(equivariance_check(&psi, depth, samples / 10, &mut rng)?);
                    }
                }
            }
        }
    }

    // dimension formula against exhibited orthonormal vectors
    for p in [2u64, 3, 5] {
        for k in 0..=5u32 {
            for f in 0..=2u32 {
                let dim = invariant_dimension(k, f);
                let labels = padic::basis_labels(k, f);
                let chars = match PadicCharacter::primitive(p, f) {
                    Ok(c) => c,
                    Err(_) => Vec::new(),
                };
                let mut residual = (dim as f64 - labels.len() as f64).abs();
                let mut exhibited = Vec::new();
                if let Some(chi) = chars.first() {
                    if !labels.is_empty() {
                        let r = basis_orthonormality(chi, k, k + 1)?;
                        residual = residual.max(r.max_residual);
                        if !r.off_diagonal_exact_zero {
                            residual = residual.max(1.0);
                        }
                        exhibited = r.labels;
                    }
                }
                out.push(CheckEntry {
                    name: "invariant_dimension".into(),
                    params: json!({"p": p, "k": k, "f": f, "characters": chars.len()}),
                    lhs: json!(dim),
                    rhs: json!({"labels": labels.len(), "orthonormal": exhibited.len()}),
                    residual,
                    pass: residual == 0.0,
                });
            }
        }
    }

    // unramified Tate integrals
    let one = Complex64::new(1.0, 0.0);
    let omegas = [one, Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0)];
    for p in [2u64, 3, 5, 7] {
        for t in [SplitType::Split, SplitType::Inert, SplitType::Ramified] {
            if t == SplitType::Ramified && p == 2 {
                continue;
            }
            for s in [Complex64::new(0.5, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.5, 7.0), Complex64::new(2.0, -3.0)] {
                for (wi, &w) in omegas.iter().enumerate() {
                    let om: Vec<Complex64> = if t == SplitType::Split { vec![w, omegas[(wi + 1) % 3]] } else { vec![w] };
                    let r = tate_unramified(p, t, s, &om, DEFAULT_SHELLS)?;
                    let res = (r.truncated - r.closed).norm();
                    out.push(CheckEntry {
                        name: "tate_unramified".into(),
                        params: json!({"p": p, "type": t, "s": cjson(s), "omega": om.iter().map(|&z| cjson(z)).collect::<Vec<_>>(), "shells": DEFAULT_SHELLS}),
                        lhs: cjson(r.truncated),
                        rhs: cjson(r.closed),
                        residual: res,
                        pass: res < TATE_TOL && res <= r.tail_bound + ROUNDOFF,
                    });
                }
            }
        }
    }

    // ramified level vectors: exact cell sums and the bound at Re s = 1/2
    for p in [3u64, 5, 7] {
        for u in [1i64, 2] {
            for &w in &omegas {
                for t in [0.0, 2.0, 10.0] {
                    let s = Complex64::new(0.5, t);
                    for z in ramified_level_integrals(p, u, w, s)? {
                        let res = (z.cell_sum - z.closed).norm();
                        out.push(CheckEntry {
                            name: "tate_ramified_level".into(),
                            params: json!({"p": p, "u": u, "omega_delta": cjson(w), "s": cjson(s), "j": z.j}),
                            lhs: json!({"cell_sum": cjson(z.cell_sum), "abs": z.cell_sum.norm()}),
                            rhs: json!({"closed": cjson(z.closed), "bound": z.bound}),
                            residual: res,
                            pass: res < TATE_TOL && z.cell_sum.norm() <= z.bound,
                        });
                    }
                }
            }
        }
    }

    // archimedean Tate integral on a 20-point grid
    for re in [0.25, 0.5, 1.0, 1.5, 3.0] {
        for im in [0.0, 1.0, 2.5, 5.0] {
            let s = Complex64::new(re, im);
            let (q, g) = arch_tate(s)?;
            let res = rel_err(q, g);
            out.push(CheckEntry {
                name: "arch_tate".into(),
                params: json!({"s": cjson(s)}),
                lhs: cjson(q),
                rhs: cjson(g),
                residual: res,
                pass: res < ARCH_TATE_TOL,
            });
        }
    }

    // archimedean Rankin–Selberg integral on a 10-point grid
    let cz = |re: f64, im: f64| Complex64::new(re, im);
    let grid = [
        (cz(0.0, 0.0), cz(0.0, 0.0), cz(1.0, 0.0)),
        (cz(0.0, 0.0), cz(0.0, 0.0), cz(2.0, 0.0)),
        (cz(0.0, 1.0), cz(0.0, 0.0), cz(1.0, 0.0)),
        (cz(0.0, 1.0), cz(0.0, 2.0), cz(1.5, 0.0)),
        (cz(0.2, 0.0), cz(0.1, 0.0), cz(1.0, 0.0)),
        (cz(0.0, 0.5), cz(0.0, 0.5), cz(0.5, 1.0)),
        (cz(0.3, 0.0), cz(0.0, 3.0), cz(1.0, -2.0)),
        (cz(0.0, 4.0), cz(0.0, 4.5), cz(2.0, 0.0)),
        (cz(0.1, 0.0), cz(0.1, 0.0), cz(0.5, 0.0)),
        (cz(0.0, 2.0), cz(0.25, 0.0), cz(0.75, 1.0)),
    ];
    for (nu1, nu2, s) in grid {
        let (q, g) = arch_rs_integral(nu1, nu2, s)?;
        let res = rel_err(q, g);
        out.push(CheckEntry {
            name: "arch_rs_integral".into(),
            params: json!({"nu1": cjson(nu1), "nu2": cjson(nu2), "s": cjson(s)}),
            lhs: cjson(q),
            rhs: cjson(g),
            residual: res,
            pass: res < ARCH_RS_TOL,
        });
    }
    for nu in [cz(0.0, 0.0), cz(0.0, 1.5), cz(0.25, 0.0)] {
        let (q, g) = whittaker_norm(nu)?;
        let res = rel_err(q, g);
        out.push(CheckEntry {
            name: "whittaker_norm".into(),
            params: json!({"nu": cjson(nu)}),
            lhs: cjson(q),
            rhs: cjson(g),
            residual: res,
            pass: res < ARCH_RS_TOL,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_elements_are_invertible_and_cover_shells() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut vals = std::collections::BTreeSet::new();
        for _ in 0..400 {
            let g = sample_group_element(3, 4, &mut rng);
            assert!(g.is_invertible());
            vals.insert(padic::val_unit(g.c, 3, 4).0);
        }
        assert_eq!(vals.len(), 5);
    }

    #[test]
    fn default_checks_small_sample_pass() {
        let checks = default_checks(7, 40).unwrap();
        let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
        assert!(failed.is_empty(), "{:#?}", &failed[..failed.len().min(5)]);
        assert!(checks.iter().filter(|c| c.name == "arch_tate").count() == 20);
        assert!(checks.iter().filter(|c| c.name == "arch_rs_integral").count() == 10);
    }
}
