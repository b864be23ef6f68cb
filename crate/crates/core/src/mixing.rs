//! Real spherical harmonics, (twisted) Weyl sums over packets, joint periods
//! along class shifts and the finite Parseval expansion relating them.
//!
//! Packet members are rotation-class representatives, so test functions on
//! them must be invariant under SO₃(ℤ)⁺; harmonics are therefore averaged over
//! the twelve rotations before being evaluated on a packet.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::class_action::{act_class, LabeledPacket};
use crate::error::{Error, Result};
use crate::quadforms::{minimal_represented, CharacterId, IdealClassId};
use crate::special::gauss_legendre;
use crate::sphere::{rotation_group, LatticePoint, OrbitRep};

pub const MAX_ELL: u32 = 16;
pub const ORTHONORMALITY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Harmonic {
    pub ell: u32,
    pub m: i32,
}

impl Harmonic {
    pub fn new(ell: u32, m: i32) -> Self {
        assert!(m.unsigned_abs() <= ell && ell <= MAX_ELL, "harmonic ({ell}, {m}) out of range");
        Harmonic { ell, m }
    }

    /// Position in the flat (ℓ, m) ordering ℓ² + ℓ + m.
    pub fn index(&self) -> usize {
        ((self.ell * self.ell + self.ell) as i64 + self.m as i64) as usize
    }

    pub fn all(lmax: u32) -> Vec<Harmonic> {
        (0..=lmax)
            .flat_map(|l| (-(l as i32)..=l as i32).map(move |m| Harmonic { ell: l, m }))
            .collect()
    }
}

/// All real harmonics Y_{ℓm}(u) with ℓ ≤ lmax at the unit vector u, in the
/// flat ordering. Condon–Shortley phase; m > 0 ↦ cos(mφ), m < 0 ↦ sin(|m|φ).
pub fn eval_all_unit(lmax: u32, u: [f64; 3]) -> Vec<f64> {
    let lmax = lmax as usize;
    let [x, y, z] = u;
    let mut out = vec![0.0; (lmax + 1) * (lmax + 1)];
    let idx = |l: usize, m: isize| (l * l + l) as isize + m;
    // (x + iy)^m carries the sin^m θ · e^{imφ} factor
    let mut pow = Complex64::new(1.0, 0.0);
    let mut qmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            qmm *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
            pow *= Complex64::new(x, y);
        }
        let put = |out: &mut Vec<f64>, l: usize, q: f64| {
            if m == 0 {
                out[idx(l, 0) as usize] = q;
            } else {
                out[idx(l, m as isize) as usize] = 2f64.sqrt() * q * pow.re;
                out[idx(l, -(m as isize)) as usize] = 2f64.sqrt() * q * pow.im;
            }
        };
        put(&mut out, m, qmm);
        if m == lmax {
            break;
        }
        let mut q_prev = qmm;
        let mut q_cur = (2.0 * m as f64 + 3.0).sqrt() * z * qmm;
        put(&mut out, m + 1, q_cur);
        for l in m + 2..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            let q_next = a * (z * q_cur - b * q_prev);
            q_prev = q_cur;
            q_cur = q_next;
            put(&mut out, l, q_cur);
        }
    }
    out
}

fn unit(p: &LatticePoint, d: u64) -> [f64; 3] {
    let r = (d as f64).sqrt();
    [p.x as f64 / r, p.y as f64 / r, p.z as f64 / r]
}

/// Y_{ℓm}(p/√d).
pub fn eval_harmonic(h: Harmonic, p: &LatticePoint, d: u64) -> f64 {
    ensure_orthonormal(h.ell);
    eval_all_unit(h.ell, unit(p, d))[h.index()]
}

/// Average of all harmonics up to lmax over the twelve rotation images of p.
pub fn eval_symmetrized_all(lmax: u32, p: &LatticePoint, d: u64) -> Vec<f64> {
    ensure_orthonormal(lmax);
    let mut acc = vec![0.0; ((lmax + 1) * (lmax + 1)) as usize];
    for g in rotation_group() {
        for (a, v) in acc.iter_mut().zip(eval_all_unit(lmax, unit(&p.apply(&g), d))) {
            *a += v;
        }
    }
    acc.iter_mut().for_each(|a| *a /= 12.0);
    acc
}

/// Max deviation of the Gram matrix of harmonics ℓ ≤ lmax from the identity,
/// by Gauss–Legendre in cos θ times the uniform rule in φ (exact here).
pub fn orthonormality_residual(lmax: u32) -> f64 {
    let n_theta = lmax as usize + 2;
    let n_phi = 2 * lmax as usize + 2;
    let nodes = gauss_legendre(n_theta);
    let size = ((lmax + 1) * (lmax + 1)) as usize;
    let mut gram = vec![0.0; size * size];
    for &(z, w) in &nodes {
        let s = (1.0 - z * z).sqrt();
        for k in 0..n_phi {
            let phi = 2.0 * PI * k as f64 / n_phi as f64;
            let v = eval_all_unit(lmax, [s * phi.cos(), s * phi.sin(), z]);
            let wt = w * 2.0 * PI / n_phi as f64;
            for i in 0..size {
                for j in 0..size {
                    gram[i * size + j] += wt * v[i] * v[j];
                }
            }
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..size {
        for j in 0..size {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[i * size + j] - want).abs());
        }
    }
    worst
}

/// The family is checked once per process before the first evaluation.
fn ensure_orthonormal(_lmax: u32) {
    static RESIDUAL: OnceLock<f64> = OnceLock::new();
    let r = *RESIDUAL.get_or_init(|| orthonormality_residual(MAX_ELL));
    assert!(r < ORTHONORMALITY_TOL, "harmonic family not orthonormal: {r}");
}

/// Harmonics whose rotation average is not identically zero.
pub fn invariant_harmonics(lmax: u32) -> Vec<Harmonic> {
    // generic points on several spheres detect vanishing reliably
    let probes = [LatticePoint::new(7, 3, 1), LatticePoint::new(5, -2, 9), LatticePoint::new(11, 4, -6)];
    let vals: Vec<Vec<f64>> = probes
        .iter()
        .map(|p| eval_symmetrized_all(lmax, p, p.norm() as u64))
        .collect();
    Harmonic::all(lmax)
        .into_iter()
        .filter(|h| vals.iter().any(|v| v[h.index()].abs() > 1e-10))
        .collect()
}

/// Precomputed harmonic values on a packet, indexed by group label, together
/// with character tables and twisted sums.
pub struct PacketSpectrum<'a> {
    pub pkt: &'a LabeledPacket,
    pub lmax: u32,
    /// values[harmonic index][label]
    values: Vec<Vec<f64>>,
    /// chars[character][label]
    chars: Vec<Vec<Complex64>>,
    /// twisted[harmonic index][character]
    twisted: Vec<Vec<Complex64>>,
}

impl<'a> PacketSpectrum<'a> {
    pub fn new(pkt: &'a LabeledPacket, lmax: u32) -> Result<Self> {
        if lmax > MAX_ELL {
            return Err(Error::Domain(format!("lmax {lmax} > {MAX_ELL}")));
        }
        let g = &pkt.group;
        let h = g.class_number();
        let size = ((lmax + 1) * (lmax + 1)) as usize;
        let mut values = vec![vec![0.0; h]; size];
        for (m, l) in pkt.members.iter().zip(&pkt.labels) {
            let v = eval_symmetrized_all(lmax, &m.point, pkt.d);
            for i in 0..size {
                values[i][l.0] = v[i];
            }
        }
        let chars: Vec<Vec<Complex64>> = g
            .characters()
            .map(|c| (0..h).map(|x| g.character_value(c, IdealClassId(x))).collect())
            .collect();
        let twisted = values
            .iter()
            .map(|f| {
                chars
                    .iter()
                    .map(|chi| f.iter().zip(chi).map(|(a, c)| c * *a).sum::<Complex64>() / h as f64)
                    .collect()
            })
            .collect();
        Ok(PacketSpectrum { pkt, lmax, values, chars, twisted })
    }

    fn check(&self, hm: Harmonic) -> Result<usize> {
        if hm.ell > self.lmax {
            return Err(Error::Domain(format!("harmonic {hm:?} above lmax {}", self.lmax)));
        }
        Ok(hm.index())
    }

    pub fn weyl_sum(&self, hm: Harmonic) -> Result<f64> {
        let f = &self.values[self.check(hm)?];
        Ok(f.iter().sum::<f64>() / f.len() as f64)
    }

    pub fn twisted_weyl(&self, hm: Harmonic, chi: CharacterId) -> Result<Complex64> {
        let row = &self.twisted[self.check(hm)?];
        row.get(chi.0).copied().ok_or(Error::CharacterMismatch)
    }

    /// (1/|H|) Σ_x Y₁(x) Y₂(s.x), computed directly from the packet action.
    pub fn joint_period(&self, s: IdealClassId, h1: Harmonic, h2: Harmonic) -> Result<f64> {
        let (i, j) = (self.check(h1)?, self.check(h2)?);
        let g = &self.pkt.group;
        let mut acc = 0.0;
        for m in &self.pkt.members {
            let sx = act_class(self.pkt, s, m)?;
            let (lx, lsx) = (self.pkt.label(m)?, self.pkt.label(&sx)?);
            acc += self.values[i][lx.0] * self.values[j][lsx.0];
        }
        Ok(acc / g.class_number() as f64)
    }

    /// Σ_χ χ(s) 𝒲(Y₁, χ) conj(𝒲(Y₂, χ)).
    pub fn parseval_expansion(&self, s: IdealClassId, h1: Harmonic, h2: Harmonic) -> Result<Complex64> {
        let (i, j) = (self.check(h1)?, self.check(h2)?);
        Ok(self
            .chars
            .iter()
            .enumerate()
            .map(|(c, chi)| chi[s.0] * self.twisted[i][c] * self.twisted[j][c].conj())
            .sum())
    }

    /// Max over ℓ ∈ [1, lmax], |m| ≤ ℓ of |weyl_sum|.
    pub fn discrepancy(&self, lmax: u32) -> Result<f64> {
        if lmax > self.lmax {
            return Err(Error::Domain(format!("lmax {lmax} above {}", self.lmax)));
        }
        let mut worst: f64 = 0.0;
        for hm in Harmonic::all(lmax).into_iter().filter(|h| h.ell >= 1) {
            worst = worst.max(self.weyl_sum(hm)?.abs());
        }
        Ok(worst)
    }

    /// All joint periods over all shifts for the given harmonics, compared
    /// with their Parseval expansions. Uses label arithmetic directly:
    /// s.x carries label(x)·s.
    pub fn parseval_residual(&self, harmonics: &[Harmonic]) -> Result<f64> {
        let g = &self.pkt.group;
        let h = g.class_number();
        let idx: Vec<usize> = harmonics.iter().map(|&hm| self.check(hm)).collect::<Result<_>>()?;
        let mut worst: f64 = 0.0;
        for s in 0..h {
            let shifted: Vec<usize> = (0..h).map(|x| g.table[x][s]).collect();
            for &i in &idx {
                for &j in &idx {
                    let direct: f64 = (0..h)
                        .map(|x| self.values[i][x] * self.values[j][shifted[x]])
                        .sum::<f64>()
                        / h as f64;
                    let expansion: Complex64 = self
                        .chars
                        .iter()
                        .enumerate()
                        .map(|(c, chi)| chi[s] * self.twisted[i][c] * self.twisted[j][c].conj())
                        .sum();
                    worst = worst.max((expansion - direct).norm());
                }
            }
        }
        Ok(worst)
    }

    /// Σ_χ |𝒲(Y, χ)|² against the mean of Y² over the packet.
    pub fn plancherel_residual(&self, hm: Harmonic) -> Result<f64> {
        let i = self.check(hm)?;
        let h = self.values[i].len() as f64;
        let lhs: f64 = self.twisted[i].iter().map(|w| w.norm_sqr()).sum();
        let rhs = self.values[i].iter().map(|v| v * v).sum::<f64>() / h;
        Ok((lhs - rhs).abs())
    }
}

/// Per-shift summary: the class, its minimal norm q and the joint periods of
/// each listed harmonic with itself.
#[derive(Clone, Debug, Serialize)]
pub struct ShiftReport {
    pub shift_index: usize,
    pub class_form: [i64; 3],
    pub q: i64,
    pub periods: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeylReport {
    pub d: u64,
    pub disc_matched: i64,
    pub class_number: usize,
    pub harmonics: Vec<Harmonic>,
    pub plain: Vec<f64>,
    /// twisted[harmonic][character]
    pub twisted: Vec<Vec<Complex64>>,
    pub shifts: Vec<ShiftReport>,
    pub parseval_residual: f64,
    pub discrepancy: f64,
}

pub fn weyl_report(pkt: &LabeledPacket, lmax: u32) -> Result<WeylReport> {
    let spec = PacketSpectrum::new(pkt, lmax)?;
    let harmonics = invariant_harmonics(lmax);
    let g = &pkt.group;
    let plain = harmonics.iter().map(|&hm| spec.weyl_sum(hm)).collect::<Result<_>>()?;
    let twisted = harmonics
        .iter()
        .map(|&hm| g.characters().map(|c| spec.twisted_weyl(hm, c)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let mut shifts = Vec::new();
    for s in 0..g.class_number() {
        let sid = IdealClassId(s);
        let f = g.form(sid);
        let periods = harmonics
            .iter()
            .map(|&hm| spec.joint_period(sid, hm, hm))
            .collect::<Result<_>>()?;
        shifts.push(ShiftReport {
            shift_index: s,
            class_form: [f.a, f.b, f.c],
            q: minimal_represented(f)?,
            periods,
        });
    }
    Ok(WeylReport {
        d: pkt.d,
        disc_matched: pkt.disc_matched,
        class_number: g.class_number(),
        parseval_residual: spec.parseval_residual(&harmonics)?,
        discrepancy: spec.discrepancy(lmax)?,
        harmonics,
        plain,
        twisted,
        shifts,
    })
}

/// Convenience wrappers on a packet (they rebuild the spectrum each call).
pub fn weyl_sum(pkt: &LabeledPacket, hm: Harmonic) -> Result<f64> {
    PacketSpectrum::new(pkt, hm.ell)?.weyl_sum(hm)
}

pub fn twisted_weyl(pkt: &LabeledPacket, hm: Harmonic, chi: CharacterId) -> Result<Complex64> {
    PacketSpectrum::new(pkt, hm.ell)?.twisted_weyl(hm, chi)
}

pub fn joint_period(pkt: &LabeledPacket, s: IdealClassId, h1: Harmonic, h2: Harmonic) -> Result<f64> {
    PacketSpectrum::new(pkt, h1.ell.max(h2.ell))?.joint_period(s, h1, h2)
}

pub fn discrepancy(pkt: &LabeledPacket, lmax: u32) -> Result<f64> {
    PacketSpectrum::new(pkt, lmax)?.discrepancy(lmax)
}

/// Sum of Y over an explicit list of points (used for full-sphere checks).
pub fn point_sum(points: &[LatticePoint], d: u64, hm: Harmonic, symmetrize: bool) -> f64 {
    points
        .iter()
        .map(|p| {
            if symmetrize {
                eval_symmetrized_all(hm.ell, p, d)[hm.index()]
            } else {
                eval_harmonic(hm, p, d)
            }
        })
        .sum()
}

pub fn rep_value(rep: &OrbitRep, d: u64, hm: Harmonic) -> f64 {
    eval_symmetrized_all(hm.ell, &rep.point, d)[hm.index()]
}
