//! Level-p^k vectors in the p-adic principal series, evaluated exactly by
//! finite shell sums at a fixed p-adic depth.

use num_traits::{One, Zero};
use serde::Serialize;

use super::cyclo::{Cyclo, LaurentValue, Q};
use crate::arith::euler_phi;
use crate::error::{Error, Result};

fn pow(p: u64, e: u32) -> u64 {
    p.checked_pow(e).expect("p-adic modulus overflows u64")
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// (valuation, unit part) of x mod p^depth; x ≡ 0 gives (depth, 0).
pub fn val_unit(x: u64, p: u64, depth: u32) -> (u32, u64) {
    let modulus = pow(p, depth);
    let mut x = x % modulus;
    if x == 0 {
        return (depth, 0);
    }
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    (v, x)
}

/// A character of ℚ_p^× of conductor p^f with values in μ_n, given by the
/// exponent of its value at a fixed generator of (ℤ/p^f)^× and at p.
#[derive(Clone, Debug)]
pub struct PadicCharacter {
    pub p: u64,
    pub f: u32,
    pub order: u64,
    pub gen_exp: u64,
    pub at_p: u64,
    modulus: u64,
    dlog: Vec<u64>,
}

impl PadicCharacter {
    /// Unramified: trivial on ℤ_p^×, χ(p) = ζ_order^at_p.
    pub fn unramified(p: u64, order: u64, at_p: u64) -> Self {
        PadicCharacter { p, f: 0, order: order.max(1), gen_exp: 0, at_p: at_p % order.max(1), modulus: 1, dlog: vec![0] }
    }

    pub fn trivial(p: u64) -> Self {
        Self::unramified(p, 1, 0)
    }

    /// All characters of conductor exactly p^f (f ≥ 1) with χ(p) = 1.
    pub fn primitive(p: u64, f: u32) -> Result<Vec<Self>> {
        if f == 0 {
            return Ok(vec![Self::trivial(p)]);
        }
        if p == 2 && f >= 3 {
            return Err(Error::Domain(format!("(Z/2^{f})^x is not cyclic")));
        }
        let modulus = pow(p, f);
        let order = euler_phi(modulus);
        let gen = (2..modulus.max(2))
            .find(|&g| g % p != 0 && mult_order(g, modulus) == order)
            .unwrap_or(1);
        let mut dlog = vec![u64::MAX; modulus as usize];
        let mut x = 1u64;
        for i in 0..order {
            dlog[x as usize] = i;
            x = mulmod(x, gen, modulus);
        }
        let mut out = Vec::new();
        for e in 1..order {
            let chi = PadicCharacter { p, f, order, gen_exp: e, at_p: 0, modulus, dlog: dlog.clone() };
            // primitive: nontrivial on 1 + p^{f−1}ℤ_p
            let step = pow(p, f - 1);
            let prim = (0..p)
                .map(|i| 1 + i * step)
                .filter(|&u| u % p != 0 || f > 1)
                .any(|u| chi.unit_exp(u % modulus) != 0);
            if prim {
                out.push(chi);
            }
        }
        Ok(out)
    }

    /// Exponent of χ(u) for a unit u (only u mod p^f matters).
    pub fn unit_exp(&self, u: u64) -> u64 {
        if self.f == 0 {
            return 0;
        }
        let l = self.dlog[(u % self.modulus) as usize];
        debug_assert!(l != u64::MAX, "not a unit");
        (self.gen_exp * l) % self.order
    }

    /// Exponent of χ(p^v·u).
    pub fn exp_of(&self, v: u32, u: u64) -> u64 {
        (self.at_p * v as u64 + self.unit_exp(u)) % self.order
    }

    pub fn neg(&self, e: u64) -> u64 {
        (self.order - e % self.order) % self.order
    }
}

fn mult_order(g: u64, m: u64) -> u64 {
    let mut x = g % m;
    let mut k = 1;
    while x != 1 {
        x = mulmod(x, g, m);
        k += 1;
        if k > m {
            return 0;
        }
    }
    k
}

/// 2×2 matrix with entries in ℤ/p^depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Mat2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub p: u64,
    pub depth: u32,
}

impl Mat2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64, p: u64, depth: u32) -> Self {
        let m = pow(p, depth);
        Mat2 { a: a % m, b: b % m, c: c % m, d: d % m, p, depth }
    }

    pub fn modulus(&self) -> u64 {
        pow(self.p, self.depth)
    }

    pub fn det(&self) -> u64 {
        let m = self.modulus();
        (mulmod(self.a, self.d, m) + m - mulmod(self.b, self.c, m)) % m
    }

    pub fn is_invertible(&self) -> bool {
        self.det() % self.p != 0
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let m = self.modulus();
        let f = |x: u64, y: u64, z: u64, w: u64| (mulmod(x, y, m) + mulmod(z, w, m)) % m;
        Mat2::new(
            f(self.a, o.a, self.b, o.c),
            f(self.a, o.b, self.b, o.d),
            f(self.c, o.a, self.d, o.c),
            f(self.c, o.b, self.d, o.d),
            self.p,
            self.depth,
        )
    }

    /// A determinant-one matrix with bottom row (c, d), which must be
    /// primitive.
    pub fn with_bottom_row(c: u64, d: u64, p: u64, depth: u32) -> Mat2 {
        let m = pow(p, depth);
        if d % p != 0 {
            // (a, b) = (d⁻¹, 0)
            Mat2::new(inv_mod(d, m), 0, c, d, p, depth)
        } else {
            // (a, b) = (0, −c⁻¹)
            Mat2::new(0, m - inv_mod(c, m), c, d, p, depth)
        }
    }
}

pub fn inv_mod(x: u64, m: u64) -> u64 {
    let (mut a, mut b) = (x as i128 % m as i128, m as i128);
    let (mut u, mut v) = (1i128, 0i128);
    while b != 0 {
        let q = a / b;
        (a, b) = (b, a - q * b);
        (u, v) = (v, u - q * v);
    }
    debug_assert_eq!(a, 1, "{x} not invertible mod {m}");
    u.rem_euclid(m as i128) as u64
}

/// Basis vector Ψ^{(j,f,k)} (or the spherical 1_{ℤ_p²} when k = 0).
#[derive(Clone, Debug)]
pub struct PadicSchwartz {
    pub p: u64,
    pub j: u32,
    pub f: u32,
    pub k: u32,
    pub chi: PadicCharacter,
    /// A_j².
    pub a_sq: Q,
}

pub fn phi_plus(p: u64, j: u32) -> Q {
    if j == 0 {
        Q::one()
    } else {
        Q::from_integer(pow(p, j - 1) as i128 * (p as i128 + 1))
    }
}

/// ζ_p(1) = (1 − 1/p)⁻¹.
pub fn zeta_p1(p: u64) -> Q {
    Q::new(p as i128, p as i128 - 1)
}

/// A_j² = vol⁻¹ of the bottom rows in Λ. For j = 0 the support is
/// ℤ_p^× × ℤ_p (the complement of K₀(p)), of volume p/(p+1): the set
/// ℤ_p^× × ℤ_p^× is not stable under K₀(p^k), since (1,1)·(1 −1; 0 1) = (1,0).
pub fn a_squared(p: u64, j: u32, k: u32) -> Q {
    if j == 0 && k >= 1 {
        Q::new(p as i128 + 1, p as i128)
    } else if j == k {
        phi_plus(p, k)
    } else {
        zeta_p1(p) * phi_plus(p, j)
    }
}

pub fn invariant_dimension(k: u32, f: u32) -> u32 {
    (k + 1).saturating_sub(2 * f)
}

/// Labels j of the exhibited basis.
pub fn basis_labels(k: u32, f: u32) -> Vec<u32> {
    if k == 0 {
        return if f == 0 { vec![0] } else { vec![] };
    }
    if k < 2 * f {
        return vec![];
    }
    (f..=k - f).collect()
}

impl PadicSchwartz {
    pub fn new(chi: &PadicCharacter, j: u32, k: u32) -> Result<Self> {
        let f = chi.f;
        if !basis_labels(k, f).contains(&j) {
            return Err(Error::Domain(format!("no basis vector j={j} for k={k}, f={f}")));
        }
        if k >= 1 && chi.at_p != 0 {
            return Err(Error::Domain("level vectors use χ(p) = 1".into()));
        }
        if k == 0 && f != 0 {
            return Err(Error::Domain("spherical vector needs unramified χ".into()));
        }
        let a_sq = if k == 0 { Q::one() } else { a_squared(chi.p, j, k) };
        Ok(PadicSchwartz { p: chi.p, j, f, k, chi: chi.clone(), a_sq })
    }

    pub fn basis(chi: &PadicCharacter, k: u32) -> Result<Vec<Self>> {
        basis_labels(k, chi.f).into_iter().map(|j| Self::new(chi, j, k)).collect()
    }

    /// Exponent e with Ψ(x, y) = A_j·ζ^e, or None off the support. x, y are
    /// residues mod p^depth.
    pub fn eval(&self, x: u64, y: u64, depth: u32) -> Option<u64> {
        let p = self.p;
        if self.k == 0 {
            return Some(0);
        }
        let (vx, ux) = val_unit(x, p, depth);
        let (vy, uy) = val_unit(y, p, depth);
        if self.j == 0 && self.f == 0 {
            // ℤ_p^× × ℤ_p, χ trivial
            return (vx == 0).then_some(0);
        }
        if vy != 0 {
            return None;
        }
        if self.j == self.k && self.f == 0 {
            // (p^k ℤ_p − {0}) × ℤ_p^×; χ trivial on units and at p
            return (vx >= self.k).then_some(0);
        }
        if vx != self.j {
            return None;
        }
        let e = self.chi.exp_of(vx, ux) + self.chi.exp_of(0, uy);
        Some(self.chi.neg(e))
    }
}

/// f_Ψ(g; s) = √(A_j²)·value.
#[derive(Clone, Debug)]
pub struct InducedValue {
    pub a_sq: Q,
    pub value: LaurentValue,
}

impl InducedValue {
    pub fn exact_eq(&self, o: &InducedValue) -> bool {
        (self.value.is_zero() && o.value.is_zero()) || (self.a_sq == o.a_sq && self.value.exact_eq(&o.value))
    }
}

pub fn required_depth(k: u32) -> u32 {
    k + 1
}

/// χ|·|^s(det g)·∫_{ℚ_p^×} Ψ((0,t)g) χ²|·|^{2s}(t) d^×t with vol(ℤ_p^×) = 1.
///
/// Ψ is supported in ℤ_p² and g has a primitive bottom row, so only shells
/// t ∈ p^m ℤ_p^× with m ≥ 0 contribute; shells with m ≥ depth are dropped
/// (they vanish when k ≥ 1). On each shell the integrand depends on the unit
/// only modulo p^max(f,1), so the unit average runs over that group.
pub fn induced_value(psi: &PadicSchwartz, g: &Mat2) -> Result<InducedValue> {
    induced_value_at_unit_depth(psi, g, psi.f.max(1))
}

pub fn induced_value_at_unit_depth(psi: &PadicSchwartz, g: &Mat2, unit_depth: u32) -> Result<InducedValue> {
    let needed = required_depth(psi.k);
    if g.depth < needed {
        return Err(Error::InsufficientDepth { given: g.depth, needed });
    }
    if g.p != psi.p || !g.is_invertible() {
        return Err(Error::Domain("g must lie in GL2(Z_p) for the same p".into()));
    }
    if unit_depth < psi.f.max(1) || unit_depth > g.depth {
        return Err(Error::Domain("unit averaging depth out of range".into()));
    }
    let (p, depth) = (psi.p, g.depth);
    let m_mod = g.modulus();
    let chi = &psi.chi;
    let n = chi.order;
    let det_e = chi.exp_of(0, g.det());
    let um = pow(p, unit_depth);
    let units: Vec<u64> = (1..um).filter(|u| u % p != 0).collect();
    let mut value = LaurentValue::zero(p, n);
    let mut pm = 1u64;
    for m in 0..depth {
        let mut hist = vec![0i128; n as usize];
        let mut any = false;
        for &u in &units {
            let t = mulmod(pm, u, m_mod);
            let (x, y) = (mulmod(t, g.c, m_mod), mulmod(t, g.d, m_mod));
            if let Some(e) = psi.eval(x, y, depth) {
                // χ²(t) = χ(u)²χ(p)^{2m}
                let tw = 2 * chi.exp_of(m, u);
                hist[((e + tw + det_e) % n) as usize] += 1;
                any = true;
            }
        }
        if any {
            let c = Cyclo::from_histogram(&hist, units.len() as i128);
            value = value.add(&LaurentValue::monomial(p, 2 * m as i64, c));
        }
        pm = pm.saturating_mul(p);
    }
    Ok(InducedValue { a_sq: psi.a_sq.clone(), value })
}

/// The closed form of the image: the truncated L_p(2s, χ²) for k = 0, and
/// χ((ad−bc)/cd)·A_j·1_Λ(c, d) for k ≥ 1.
pub fn closed_form_value(psi: &PadicSchwartz, g: &Mat2) -> Result<InducedValue> {
    let (p, depth) = (psi.p, g.depth);
    let chi = &psi.chi;
    let n = chi.order;
    if psi.k == 0 {
        let mut v = LaurentValue::zero(p, n);
        for m in 0..depth {
            let e = 2 * m as u64 * chi.at_p;
            v = v.add(&LaurentValue::monomial(p, 2 * m as i64, Cyclo::root(n, e)));
        }
        return Ok(InducedValue { a_sq: Q::one(), value: v });
    }
    let (vc, uc) = val_unit(g.c, p, depth);
    let (vd, ud) = val_unit(g.d, p, depth);
    let in_lambda = if psi.j == 0 && psi.f == 0 {
        vc == 0
    } else if psi.j == psi.k && psi.f == 0 {
        vc >= psi.k && vd == 0
    } else {
        vc == psi.j && vd == 0
    };
    if !in_lambda {
        return Ok(InducedValue { a_sq: psi.a_sq.clone(), value: LaurentValue::zero(p, n) });
    }
    // χ(det/(cd)); for (j,f) = (k,0) the character is trivial on the pieces
    let e = if psi.f == 0 {
        0
    } else {
        let det = chi.exp_of(0, g.det());
        let cd = chi.exp_of(vc, uc) + chi.exp_of(0, ud);
        (det + chi.neg(cd)) % n
    };
    Ok(InducedValue {
        a_sq: psi.a_sq.clone(),
        value: LaurentValue::monomial(p, 0, Cyclo::root(n, e)),
    })
}

/// Representatives (c, d) of P¹(ℤ/p^depth): (1, d) and (c, 1) with p | c.
pub fn projective_line(p: u64, depth: u32) -> Vec<(u64, u64)> {
    let m = pow(p, depth);
    let mut out: Vec<(u64, u64)> = (0..m).map(|d| (1, d)).collect();
    out.extend((0..m).step_by(p as usize).map(|c| (c, 1)));
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct OrthoReport {
    pub p: u64,
    pub k: u32,
    pub f: u32,
    pub depth: u32,
    pub labels: Vec<u32>,
    /// Exact diagonal Gram entries, as "num/den".
    pub diagonal: Vec<String>,
    pub off_diagonal_exact_zero: bool,
    pub max_residual: f64,
}

/// Gram matrix of the basis images under ∫_{GL₂(ℤ_p)} f_i·conj(f_j) dk.
///
/// For k ≥ 1 the images are 𝗌-independent and the integrand depends only
/// on the line of the bottom row (|χ| = 1 absorbs the scaling), so the
/// average over GL₂(ℤ/p^depth) is the average over P¹(ℤ/p^depth). For
/// k = 0 the norm is the Schwartz-side integral ∫_{ℤ_p−{0}} dt, evaluated
/// as the shell sum Σ_{m<depth}(1−1/p)p^{−m} plus its exact tail p^{−depth}.
pub fn basis_orthonormality(chi: &PadicCharacter, k: u32, depth: u32) -> Result<OrthoReport> {
    let p = chi.p;
    let needed = required_depth(k);
    if depth < needed {
        return Err(Error::InsufficientDepth { given: depth, needed });
    }
    let basis = PadicSchwartz::basis(chi, k)?;
    let labels: Vec<u32> = basis.iter().map(|b| b.j).collect();
    if k == 0 {
        let mut norm = Q::zero();
        for m in 0..depth {
            norm += Q::new(p as i128 - 1, p as i128) * Q::new(1, pow(p, m) as i128);
        }
        norm += Q::new(1, pow(p, depth) as i128);
        let res = (norm.clone() - Q::one()).numer().abs() as f64 / *norm.denom() as f64;
        return Ok(OrthoReport {
            p,
            k,
            f: chi.f,
            depth,
            labels,
            diagonal: vec![norm.to_string()],
            off_diagonal_exact_zero: true,
            max_residual: res,
        });
    }
    let rows = projective_line(p, depth);
    let nb = basis.len();
    let n = chi.order;
    let mut gram = vec![vec![Cyclo::zero(n); nb]; nb];
    for &(c, d) in &rows {
        let g = Mat2::with_bottom_row(c, d, p, depth);
        let vals: Vec<Cyclo> = basis
            .iter()
            .map(|b| {
                let v = induced_value(b, &g)?;
                if v.value.support().iter().any(|&m| m != 0) {
                    return Err(Error::Invariant("level vector depends on s".into()));
                }
                Ok(v.value.coeffs.get(&0).cloned().unwrap_or_else(|| Cyclo::zero(n)))
            })
            .collect::<Result<_>>()?;
        for i in 0..nb {
            for j in 0..nb {
                gram[i][j] = gram[i][j].add(&vals[i].mul(&vals[j].conj()));
            }
        }
    }
    let count = Q::from_integer(rows.len() as i128);
    let mut max_res: f64 = 0.0;
    let mut diagonal = Vec::new();
    let mut off_zero = true;
    for i in 0..nb {
        for j in 0..nb {
            let s = gram[i][j].scale(&(Q::one() / count.clone()));
            if i == j {
                let r = s
                    .as_rational()
                    .ok_or_else(|| Error::Invariant("diagonal Gram entry not rational".into()))?
                    * basis[i].a_sq.clone();
                let dev = r.clone() - Q::one();
                max_res = max_res.max((*dev.numer() as f64 / *dev.denom() as f64).abs());
                diagonal.push(r.to_string());
            } else if !s.is_zero() {
                off_zero = false;
                let scale = (ratio_f64(&basis[i].a_sq) * ratio_f64(&basis[j].a_sq)).sqrt();
                max_res = max_res.max(scale * s.to_complex().norm());
            }
        }
    }
    Ok(OrthoReport { p, k, f: chi.f, depth, labels, diagonal, off_diagonal_exact_zero: off_zero, max_residual: max_res })
}

pub fn ratio_f64(q: &Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Dimension of the K₀(p^k)-fixed vectors in the induced representation,
/// computed from scratch as the number of double cosets B\GL₂/K₀(p^k) on
/// which the inducing character is trivial on the stabilizer. Works modulo
/// p^max(k,f,1); meant for small p^k.
pub fn invariant_dimension_bruteforce(chi: &PadicCharacter, k: u32) -> u32 {
    let p = chi.p;
    let depth = k.max(chi.f).max(1);
    let m = pow(p, depth);
    let pk = pow(p, k);
    // K₀(p^k) mod p^depth
    let mut k0 = Vec::new();
    for a in 0..m {
        for b in 0..m {
            for c in (0..m).step_by(pk.min(m) as usize) {
                for d in 0..m {
                    let g = Mat2::new(a, b, c, d, p, depth);
                    if g.is_invertible() {
                        k0.push(g);
                    }
                }
            }
        }
    }
    let line = |c: u64, d: u64| -> (u64, u64) {
        // normalize to the representatives of `projective_line`
        if c % p != 0 {
            (1, mulmod(d, inv_mod(c, m), m))
        } else {
            (mulmod(c, inv_mod(d, m), m), 1)
        }
    };
    let mut seen = std::collections::BTreeSet::new();
    let mut dim = 0;
    for (c, d) in projective_line(p, depth) {
        if seen.contains(&(c, d)) {
            continue;
        }
        let g0 = Mat2::with_bottom_row(c, d, p, depth);
        let mut trivial = true;
        for h in &k0 {
            let gh = g0.mul(h);
            let l = line(gh.c, gh.d);
            seen.insert(l);
            if l == (c, d) {
                // bottom row scaled by λ, so g0 h g0⁻¹ = b with b22 = λ and
                // b11 = det h / λ; the character is χ(b11/b22) = χ(det h)χ(λ)⁻²
                let lambda = if c % p != 0 { gh.c * inv_mod(c, m) % m } else { gh.d * inv_mod(d, m) % m };
                let e = chi.exp_of(0, h.det()) + chi.neg(2 * chi.exp_of(0, lambda) % chi.order);
                if e % chi.order != 0 {
                    trivial = false;
                }
            }
        }
        if trivial {
            dim += 1;
        }
    }
    dim
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn characters_mod_prime_powers() {
        assert_eq!(PadicCharacter::primitive(3, 1).unwrap().len(), 1);
        assert_eq!(PadicCharacter::primitive(5, 1).unwrap().len(), 3);
        assert_eq!(PadicCharacter::primitive(5, 2).unwrap().len(), 20 - 4);
        assert_eq!(PadicCharacter::primitive(2, 1).unwrap().len(), 0);
        assert_eq!(PadicCharacter::primitive(2, 2).unwrap().len(), 1);
        assert!(PadicCharacter::primitive(2, 3).is_err());
        for chi in PadicCharacter::primitive(7, 1).unwrap() {
            for a in 1..7 {
                for b in 1..7 {
                    let lhs = chi.unit_exp(a * b % 7);
                    assert_eq!(lhs, (chi.unit_exp(a) + chi.unit_exp(b)) % chi.order);
                }
            }
        }
    }

    #[test]
    fn invariant_dimension_examples() {
        assert_eq!(invariant_dimension(0, 0), 1);
        assert_eq!(invariant_dimension(3, 1), 2);
        assert_eq!(invariant_dimension(1, 1), 0);
        for k in 0..=6 {
            for f in 0..=3 {
                assert_eq!(invariant_dimension(k, f) as usize, basis_labels(k, f).len(), "k={k} f={f}");
            }
        }
    }

    #[test]
    fn dimension_matches_double_coset_count() {
        let cases: &[(u64, u32, u32)] = &[(2, 0, 0), (2, 1, 0), (2, 2, 0), (2, 3, 0), (2, 2, 2), (2, 3, 2),
            (2, 4, 2), (3, 0, 0), (3, 1, 0), (3, 2, 0), (3, 1, 1), (3, 2, 1), (3, 3, 1), (5, 1, 0), (5, 1, 1), (5, 2, 1)];
        for &(p, k, f) in cases {
            for chi in PadicCharacter::primitive(p, f).unwrap() {
                assert_eq!(invariant_dimension_bruteforce(&chi, k), invariant_dimension(k, f), "p={p} k={k} f={f}");
            }
        }
    }

    #[test]
    fn spherical_value_is_truncated_l_factor() {
        let chi = PadicCharacter::unramified(3, 4, 1);
        let psi = PadicSchwartz::new(&chi, 0, 0).unwrap();
        let g = Mat2::new(1, 0, 0, 1, 3, 5);
        let v = induced_value(&psi, &g).unwrap();
        assert!(v.exact_eq(&closed_form_value(&psi, &g).unwrap()));
        assert_eq!(v.value.support(), vec![0, 2, 4, 6, 8]);
        // χ(p)² = −1: L_p(2s, χ²) = 1/(1 + p^{−2s}); at s = 1 the truncation is 1 − 1/9 + …
        let s = num_complex::Complex64::new(1.0, 0.0);
        let want = (1.0 - (-1.0f64 / 9.0).powi(5)) / (1.0 + 1.0 / 9.0);
        assert!((v.value.eval(s).re - want).abs() < 1e-14);
    }

    #[test]
    fn level_values_match_closed_form_at_full_unit_depth() {
        for (p, f) in [(3u64, 1u32), (5, 1), (2, 0), (3, 0)] {
            for chi in PadicCharacter::primitive(p, f).unwrap() {
                for k in (2 * f).max(1)..=3 {
                    for psi in PadicSchwartz::basis(&chi, k).unwrap() {
                        let depth = k + 1;
                        for (c, d) in projective_line(p, depth).into_iter().step_by(3) {
                            let g = Mat2::with_bottom_row(c, d, p, depth);
                            let full = induced_value_at_unit_depth(&psi, &g, depth).unwrap();
                            let fast = induced_value(&psi, &g).unwrap();
                            assert!(full.exact_eq(&fast));
                            assert!(fast.exact_eq(&closed_form_value(&psi, &g).unwrap()));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn outside_k0p_vanishes() {
        let chi = PadicCharacter::primitive(5, 1).unwrap().remove(0);
        let psi = PadicSchwartz::new(&chi, 1, 2).unwrap();
        // c a unit: g ∉ K₀(p)
        let g = Mat2::new(0, 4, 1, 3, 5, 3);
        assert!(induced_value(&psi, &g).unwrap().value.is_zero());
    }

    #[test]
    fn orthonormality_examples() {
        let r = basis_orthonormality(&PadicCharacter::trivial(3), 1, 2).unwrap();
        assert_eq!(r.max_residual, 0.0);
        assert!(r.off_diagonal_exact_zero);
        assert_eq!(r.diagonal, vec!["1", "1"]);
        let r = basis_orthonormality(&PadicCharacter::trivial(2), 2, 3).unwrap();
        assert_eq!(r.max_residual, 0.0);
        assert_eq!(r.labels, vec![0, 1, 2]);
        let r = basis_orthonormality(&PadicCharacter::trivial(5), 0, 4).unwrap();
        assert_eq!(r.max_residual, 0.0);
        for chi in PadicCharacter::primitive(3, 1).unwrap() {
            let r = basis_orthonormality(&chi, 3, 4).unwrap();
            assert_eq!(r.max_residual, 0.0);
            assert_eq!(r.labels, vec![1, 2]);
        }
        assert!(matches!(
            basis_orthonormality(&PadicCharacter::trivial(3), 2, 2),
            Err(Error::InsufficientDepth { .. })
        ));
    }

    #[test]
    fn literal_a0_is_not_unit_norm() {
        // A₀ = ζ_p(1)⁻² taken literally gives norm A₀²·p/(p+1) ≠ 1
        for p in [2u64, 3, 5] {
            let lit = Q::new(p as i128 - 1, p as i128).pow(4);
            let vol = Q::new(p as i128, p as i128 + 1);
            assert_ne!(lit * vol.clone(), Q::one());
            assert_eq!(a_squared(p, 0, 1) * vol, Q::one());
        }
    }

    #[test]
    fn units_by_units_support_is_not_level_invariant() {
        // bottom row (1, 1) times (1 −1; 0 1) ∈ K₀(p) is (1, 0)
        let g = Mat2::with_bottom_row(1, 1, 3, 2);
        let k0 = Mat2::new(1, 8, 0, 1, 3, 2);
        let h = g.mul(&k0);
        assert_eq!((h.c, h.d), (1, 0));
        let psi = PadicSchwartz::new(&PadicCharacter::trivial(3), 0, 1).unwrap();
        assert!(induced_value(&psi, &g).unwrap().exact_eq(&induced_value(&psi, &h).unwrap()));
    }

    #[test]
    fn depth_is_checked() {
        let psi = PadicSchwartz::new(&PadicCharacter::trivial(3), 1, 3).unwrap();
        let g = Mat2::new(1, 0, 0, 1, 3, 3);
        assert!(matches!(induced_value(&psi, &g), Err(Error::InsufficientDepth { given: 3, needed: 4 })));
    }
}
