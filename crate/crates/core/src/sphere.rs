//! Primitive lattice points on x² + y² + z² = d and their classes modulo the
//! rotation group SO₃(ℤ)⁺ ≅ A₄ (even signed coordinate permutations).

use std::collections::BTreeSet;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::isqrt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

impl LatticePoint {
    pub fn new(x: i64, y: i64, z: i64) -> Self {
        LatticePoint { x, y, z }
    }

    pub fn norm(&self) -> i64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn is_primitive(&self) -> bool {
        self.x.gcd(&self.y).gcd(&self.z) == 1
    }

    pub fn neg(&self) -> Self {
        LatticePoint::new(-self.x, -self.y, -self.z)
    }

    pub fn as_array(&self) -> [i64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn apply(&self, m: &[[i64; 3]; 3]) -> Self {
        let v = self.as_array();
        let r = |i: usize| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
        LatticePoint::new(r(0), r(1), r(2))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrbitRep {
    pub point: LatticePoint,
    pub orbit_size: usize,
}

pub fn admissible(d: u64) -> bool {
    !matches!(d % 8, 0 | 4 | 7)
}

/// The twelve matrices of SO₃(ℤ)⁺: two-sign flips composed with cyclic
/// coordinate permutations.
pub fn rotation_group() -> Vec<[[i64; 3]; 3]> {
    let flips = [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]];
    let perms = [[0, 1, 2], [1, 2, 0], [2, 0, 1]];
    let mut out = Vec::with_capacity(12);
    for perm in perms {
        for s in flips {
            let mut m = [[0i64; 3]; 3];
            for i in 0..3 {
                m[i][perm[i]] = s[i];
            }
            out.push(m);
        }
    }
    out
}

fn orbit(p: LatticePoint) -> BTreeSet<LatticePoint> {
    let LatticePoint { x, y, z } = p;
    let mut out = BTreeSet::new();
    for (a, b, c) in [(x, y, z), (y, z, x), (z, x, y)] {
        out.insert(LatticePoint::new(a, b, c));
        out.insert(LatticePoint::new(a, -b, -c));
        out.insert(LatticePoint::new(-a, b, -c));
        out.insert(LatticePoint::new(-a, -b, c));
    }
    out
}

/// Lexicographically greatest image under SO₃(ℤ)⁺, with the orbit size.
pub fn canonicalize(p: LatticePoint) -> OrbitRep {
    let o = orbit(p);
    OrbitRep {
        point: *o.iter().next_back().expect("orbit is nonempty"),
        orbit_size: o.len(),
    }
}

/// All primitive solutions, x from ⌊√d⌋ downwards, then y, then z.
pub fn enumerate_points(d: u64) -> Vec<LatticePoint> {
    let r = isqrt(d) as i64;
    let d = d as i64;
    let mut out = Vec::new();
    for x in (-r..=r).rev() {
        let rx = d - x * x;
        let ry = isqrt(rx as u64) as i64;
        for y in (-ry..=ry).rev() {
            let rz = rx - y * y;
            let z = isqrt(rz as u64) as i64;
            if z * z != rz {
                continue;
            }
            let zs: &[i64] = if z == 0 { &[0] } else { &[z, -z] };
            for &z in zs {
                let p = LatticePoint::new(x, y, z);
                if p.is_primitive() {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Canonical representatives of the orbits on the primitive points of norm d,
/// in decreasing lexicographic order.
pub fn quotient(d: u64) -> Vec<OrbitRep> {
    let reps: BTreeSet<OrbitRep> = enumerate_points(d).into_iter().map(canonicalize).collect();
    reps.into_iter().rev().collect()
}
