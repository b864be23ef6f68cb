//! The class group action on sphere points via conjugation by norm-p Hurwitz
//! quaternions, and labeled packets (orbits carrying group-element labels).

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::arith::{is_prime, is_squarefree, kronecker, sqrt_mod};
use crate::error::{Error, Result};
use crate::quadforms::{ClassGroup, IdealClassId, QuadForm};
use crate::sphere::{admissible, canonicalize, quotient, LatticePoint, OrbitRep};

/// Hurwitz quaternion stored with doubled coordinates (all of equal parity).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quaternion {
    c: [i64; 4],
}

impl Quaternion {
    pub fn from_doubled(c: [i64; 4]) -> Result<Self> {
        let par = c[0].rem_euclid(2);
        if c.iter().any(|x| x.rem_euclid(2) != par) {
            return Err(Error::Parity(c));
        }
        Ok(Quaternion { c })
    }

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Quaternion { c: [2 * a, 2 * b, 2 * c, 2 * d] }
    }

    pub fn doubled(&self) -> [i64; 4] {
        self.c
    }

    /// Lipschitz (integral) rather than half-integral coordinates.
    pub fn is_lipschitz(&self) -> bool {
        self.c[0] % 2 == 0
    }

    pub fn conj(&self) -> Self {
        let [a, b, c, d] = self.c;
        Quaternion { c: [a, -b, -c, -d] }
    }

    pub fn norm(&self) -> i64 {
        self.c.iter().map(|x| x * x).sum::<i64>() / 4
    }

    pub fn mul(&self, o: &Quaternion) -> Quaternion {
        let [a1, b1, c1, d1] = self.c;
        let [a2, b2, c2, d2] = o.c;
        let prod = [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ];
        // (A/2)(B/2) = AB/4, whose doubled coordinates are AB/2
        debug_assert!(prod.iter().all(|x| x % 2 == 0), "Hurwitz order is closed");
        Quaternion { c: prod.map(|x| x / 2) }
    }

    pub fn add(&self, o: &Quaternion) -> Quaternion {
        Quaternion { c: std::array::from_fn(|i| self.c[i] + o.c[i]) }
    }

    pub fn neg(&self) -> Quaternion {
        Quaternion { c: self.c.map(|x| -x) }
    }

    pub fn scalar(n: i64) -> Quaternion {
        Quaternion { c: [2 * n, 0, 0, 0] }
    }

    /// Pure quaternion x·i + y·j + z·k.
    pub fn embed(p: LatticePoint) -> Quaternion {
        Quaternion { c: [0, 2 * p.x, 2 * p.y, 2 * p.z] }
    }

    /// True when q ∈ mR for odd m (every doubled coordinate divisible by m).
    pub fn divisible_by(&self, m: i64) -> bool {
        self.c.iter().all(|x| x % m == 0)
    }

    fn div_exact(&self, m: i64) -> Quaternion {
        Quaternion { c: self.c.map(|x| x / m) }
    }

    /// The pure integral vector, if this is a pure Lipschitz quaternion.
    pub fn to_point(&self) -> Option<LatticePoint> {
        let [a, b, c, d] = self.c;
        (a == 0 && b % 2 == 0 && c % 2 == 0 && d % 2 == 0)
            .then(|| LatticePoint::new(b / 2, c / 2, d / 2))
    }
}

/// The 24 units of the Hurwitz order.
pub fn hurwitz_units() -> Vec<Quaternion> {
    let mut out = Vec::with_capacity(24);
    for i in 0..4 {
        for s in [2, -2] {
            let mut c = [0; 4];
            c[i] = s;
            out.push(Quaternion { c });
        }
    }
    for mask in 0..16 {
        let c = std::array::from_fn(|i| if mask >> i & 1 == 1 { -1 } else { 1 });
        out.push(Quaternion { c });
    }
    out
}

fn norm_p_elements(p: u64) -> Vec<Quaternion> {
    let target = 4 * p as i64;
    let r = crate::arith::isqrt(target as u64) as i64;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            let ab = a * a + b * b;
            if ab > target {
                continue;
            }
            for c in -r..=r {
                let rest = target - ab - c * c;
                if rest < 0 {
                    continue;
                }
                let d = crate::arith::isqrt(rest as u64) as i64;
                if d * d != rest {
                    continue;
                }
                for d in if d == 0 { vec![0] } else { vec![d, -d] } {
                    if let Ok(q) = Quaternion::from_doubled([a, b, c, d]) {
                        out.push(q);
                    }
                }
            }
        }
    }
    out
}

/// Representatives of the norm-p Hurwitz quaternions modulo left
/// multiplication by units (the smallest element of each class).
pub fn norm_p_classes(p: u64) -> Vec<Quaternion> {
    classes_by(p, |u, q| u.mul(q))
}

/// Representatives modulo right multiplication by units.
pub fn norm_p_right_classes(p: u64) -> Vec<Quaternion> {
    classes_by(p, |u, q| q.mul(u))
}

fn classes_by(p: u64, act: impl Fn(&Quaternion, &Quaternion) -> Quaternion) -> Vec<Quaternion> {
    let units = hurwitz_units();
    let reps: BTreeSet<Quaternion> = norm_p_elements(p)
        .iter()
        .map(|q| units.iter().map(|u| act(u, q)).min().expect("24 units"))
        .collect();
    reps.into_iter().collect()
}

/// A split prime together with a square root of −d selecting one of the two
/// prime ideals above it; −rho selects the conjugate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PrimeOrientation {
    pub p: u64,
    pub rho: i64,
}

impl PrimeOrientation {
    /// Orientation with rho in (0, p/2), if p ∤ 2d and (−d | p) = +1.
    pub fn new(d: u64, p: u64) -> Result<Self> {
        let bad = Error::BadOrientation { p, rho: 0, d };
        if p == 2 || !is_prime(p) || d % p == 0 || kronecker(-(d as i64), p) != 1 {
            return Err(bad);
        }
        let r = sqrt_mod(-(d as i64), p).ok_or(bad)? as i64;
        let rho = r.min(p as i64 - r);
        Ok(PrimeOrientation { p, rho })
    }

    pub fn conj(&self) -> Self {
        PrimeOrientation { p: self.p, rho: -self.rho }
    }

    fn validate(&self, d: u64) -> Result<()> {
        let p = self.p as i64;
        if self.p == 2 || !is_prime(self.p) || (d as i64) % p == 0 || (self.rho * self.rho + d as i64) % p != 0 {
            return Err(Error::BadOrientation { p: self.p, rho: self.rho, d });
        }
        Ok(())
    }

    /// The reduced form of the prime ideal class in discriminant `disc`
    /// (−4d or −d).
    pub fn class_form(&self, d: u64, disc: i64) -> Result<QuadForm> {
        let p = self.p as i64;
        let d = d as i64;
        let f = if disc == -4 * d {
            QuadForm { a: p, b: 2 * self.rho, c: (self.rho * self.rho + d) / p }
        } else if disc == -d {
            let r = self.rho.rem_euclid(p);
            let b = if r % 2 != 0 { r } else { r - p };
            QuadForm { a: p, b, c: (b * b + d) / (4 * p) }
        } else {
            return Err(Error::DiscriminantMismatch(disc, -4 * d));
        };
        if f.disc() != disc {
            return Err(Error::Invariant(format!("prime form {f:?} for disc {disc}")));
        }
        crate::quadforms::reduce(f)
    }
}

/// Caches the norm-p quaternions needed by repeated actions.
#[derive(Default)]
pub struct ActionContext {
    right_classes: HashMap<u64, Arc<Vec<Quaternion>>>,
}

impl ActionContext {
    pub fn new() -> Self {
        Self::default()
    }

    fn classes(&mut self, p: u64) -> Arc<Vec<Quaternion>> {
        self.right_classes
            .entry(p)
            .or_insert_with(|| Arc::new(norm_p_right_classes(p)))
            .clone()
    }

    /// All α of norm p with (q_x − ρ)α ∈ pR. They form one right-unit class.
    pub fn valid_alphas(&mut self, x: LatticePoint, o: PrimeOrientation) -> Vec<Quaternion> {
        let q = Quaternion::embed(x).add(&Quaternion::scalar(-o.rho));
        let p = o.p as i64;
        let units = hurwitz_units();
        self.classes(o.p)
            .iter()
            .filter(|a| q.mul(a).divisible_by(p))
            .flat_map(|a| units.iter().map(move |u| a.mul(u)))
            .collect()
    }

    /// (conj(α)·q_x·α)/p as a lattice point, checking norm, purity and
    /// primitivity.
    pub fn conjugate(&self, x: LatticePoint, alpha: &Quaternion, p: u64) -> Result<LatticePoint> {
        let q = Quaternion::embed(x);
        let t = alpha.conj().mul(&q).mul(alpha);
        if !t.divisible_by(p as i64) {
            return Err(Error::Invariant(format!("conjugate of {x:?} not divisible by {p}")));
        }
        let y = t
            .div_exact(p as i64)
            .to_point()
            .ok_or_else(|| Error::Invariant(format!("conjugate of {x:?} is not pure integral")))?;
        if y.norm() != x.norm() || !y.is_primitive() {
            return Err(Error::Invariant(format!("{x:?} mapped to {y:?}")));
        }
        Ok(y)
    }

    pub fn act_prime(&mut self, x: &OrbitRep, o: PrimeOrientation) -> Result<OrbitRep> {
        let d = x.point.norm() as u64;
        o.validate(d)?;
        let p = o.p as i64;
        let q = Quaternion::embed(x.point).add(&Quaternion::scalar(-o.rho));
        let alpha = self
            .classes(o.p)
            .iter()
            .find(|a| q.mul(a).divisible_by(p))
            .copied()
            .ok_or(Error::NoValidAlpha { p: o.p, rho: o.rho })?;
        Ok(canonicalize(self.conjugate(x.point, &alpha, o.p)?))
    }
}

/// An orbit of sphere classes carrying labels in the matched class group.
#[derive(Clone, Debug)]
pub struct LabeledPacket {
    pub d: u64,
    pub disc_matched: i64,
    pub base: OrbitRep,
    pub members: Vec<OrbitRep>,
    pub labels: Vec<IdealClassId>,
    pub generators: Vec<PrimeOrientation>,
    pub group: Arc<ClassGroup>,
    by_point: HashMap<LatticePoint, usize>,
    by_label: Vec<usize>,
}

#[derive(Serialize)]
struct PacketJson {
    d: u64,
    disc_matched: i64,
    base: [i64; 3],
    members: Vec<MemberJson>,
    generators: Vec<PrimeOrientation>,
}

#[derive(Serialize)]
struct MemberJson {
    point: [i64; 3],
    label: [i64; 3],
}

impl LabeledPacket {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn label(&self, x: &OrbitRep) -> Result<IdealClassId> {
        self.by_point
            .get(&x.point)
            .map(|&i| self.labels[i])
            .ok_or(Error::NotInPacket)
    }

    pub fn member_with_label(&self, s: IdealClassId) -> &OrbitRep {
        &self.members[self.by_label[s.0]]
    }

    pub fn contains(&self, x: &LatticePoint) -> bool {
        self.by_point.contains_key(x)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let j = PacketJson {
            d: self.d,
            disc_matched: self.disc_matched,
            base: self.base.point.as_array(),
            members: self
                .members
                .iter()
                .zip(&self.labels)
                .map(|(m, l)| {
                    let f = self.group.form(*l);
                    MemberJson { point: m.point.as_array(), label: [f.a, f.b, f.c] }
                })
                .collect(),
            generators: self.generators.clone(),
        };
        serde_json::to_value(j).expect("packet serializes")
    }
}

/// BFS closure of `base` under the generators, labeling each member by the
/// class of the word reaching it. Any relation that acts nontrivially, or two
/// members sharing a label, aborts with a labeling error.
pub fn build_packet(
    ctx: &mut ActionContext,
    d: u64,
    base: OrbitRep,
    gens: &[PrimeOrientation],
    group: Arc<ClassGroup>,
) -> Result<LabeledPacket> {
    if base.point.norm() as u64 != d {
        return Err(Error::Domain(format!("base {:?} does not have norm {d}", base.point)));
    }
    let gen_classes: Vec<IdealClassId> = gens
        .iter()
        .map(|g| {
            let f = g.class_form(d, group.disc)?;
            group
                .index(&f)
                .ok_or_else(|| Error::Invariant(format!("class of {f:?} missing")))
        })
        .collect::<Result<_>>()?;
    let mut members = vec![base];
    let mut labels = vec![group.identity];
    let mut by_point = HashMap::from([(base.point, 0usize)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for (g, &cls) in gens.iter().zip(&gen_classes) {
            let y = ctx.act_prime(&members[i], *g)?;
            let want = group.mul(labels[i], cls);
            match by_point.get(&y.point) {
                Some(&j) => {
                    if labels[j] != want {
                        return Err(Error::Labeling(format!(
                            "d={d}: p={} maps {:?} to {:?} with conflicting labels",
                            g.p, members[i].point, y.point
                        )));
                    }
                }
                None => {
                    by_point.insert(y.point, members.len());
                    members.push(y);
                    labels.push(want);
                    queue.push_back(members.len() - 1);
                }
            }
        }
    }
    let mut by_label = vec![usize::MAX; group.class_number()];
    for (i, l) in labels.iter().enumerate() {
        if by_label[l.0] != usize::MAX {
            return Err(Error::Labeling(format!("d={d}: label {l:?} used twice (action not free)")));
        }
        by_label[l.0] = i;
    }
    if members.len() != group.class_number() {
        return Err(Error::Labeling(format!(
            "d={d}: packet size {} differs from class number {}",
            members.len(),
            group.class_number()
        )));
    }
    Ok(LabeledPacket {
        d,
        disc_matched: group.disc,
        base,
        members,
        labels,
        generators: gens.to_vec(),
        group,
        by_point,
        by_label,
    })
}

/// The member labeled label(x)·s.
pub fn act_class(pkt: &LabeledPacket, s: IdealClassId, x: &OrbitRep) -> Result<OrbitRep> {
    let l = pkt.label(x)?;
    Ok(*pkt.member_with_label(pkt.group.mul(l, s)))
}

/// Limits for the generator search.
#[derive(Clone, Copy, Debug)]
pub struct GeneratorPolicy {
    pub max_generators: usize,
    pub prime_bound: u64,
}

impl Default for GeneratorPolicy {
    fn default() -> Self {
        GeneratorPolicy { max_generators: 20, prime_bound: 2000 }
    }
}

/// Everything measured for one d: all packets covering the sphere classes.
#[derive(Clone, Debug)]
pub struct SpherePackets {
    pub d: u64,
    pub disc_matched: i64,
    pub class_number: usize,
    pub point_count: usize,
    pub class_count: usize,
    pub packets: Vec<LabeledPacket>,
}

fn orbit_under(ctx: &mut ActionContext, base: OrbitRep, gens: &[PrimeOrientation]) -> Result<BTreeSet<LatticePoint>> {
    let mut seen = BTreeSet::from([base.point]);
    let mut queue = VecDeque::from([base]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = ctx.act_prime(&x, *g)?;
            if seen.insert(y.point) {
                queue.push_back(y);
            }
        }
    }
    Ok(seen)
}

/// Split primes in increasing order, keeping those that enlarge the orbit of
/// `base`, until the orbit reaches `target` elements.
pub fn select_generators(
    ctx: &mut ActionContext,
    d: u64,
    base: OrbitRep,
    target: usize,
    policy: GeneratorPolicy,
) -> Result<Vec<PrimeOrientation>> {
    let mut gens = Vec::new();
    let mut orbit = BTreeSet::from([base.point]);
    let mut p = 3;
    while orbit.len() < target && p <= policy.prime_bound && gens.len() < policy.max_generators {
        if let Ok(o) = PrimeOrientation::new(d, p) {
            let y = ctx.act_prime(&base, o)?;
            if !orbit.contains(&y.point) {
                gens.push(o);
                orbit = orbit_under(ctx, base, &gens)?;
            }
        }
        p += 2;
    }
    Ok(gens)
}

/// Builds all packets for a squarefree admissible d > 3. The matched
/// discriminant is chosen empirically: −d is tried first when it is a
/// discriminant, then −4d; a candidate whose class number exceeds the number
/// of sphere classes is rejected outright.
pub fn sphere_packets(ctx: &mut ActionContext, d: u64, policy: GeneratorPolicy) -> Result<SpherePackets> {
    if d <= 3 || !admissible(d) || !is_squarefree(d) {
        return Err(Error::Domain(format!("d={d} is not a squarefree admissible d > 3")));
    }
    let reps = quotient(d);
    let point_count = reps.iter().map(|r| r.orbit_size).sum();
    let mut candidates = Vec::new();
    if d % 4 == 3 {
        candidates.push(-(d as i64));
    }
    candidates.push(-4 * d as i64);
    let mut last_err = Error::Labeling(format!("d={d}: no candidate discriminant matched"));
    for disc in candidates {
        let group = Arc::new(ClassGroup::build(disc)?);
        let h = group.class_number();
        if h > reps.len() {
            continue;
        }
        let gens = select_generators(ctx, d, reps[0], h, policy)?;
        let mut packets = Vec::new();
        let mut covered: BTreeSet<LatticePoint> = BTreeSet::new();
        let mut ok = true;
        for r in &reps {
            if covered.contains(&r.point) {
                continue;
            }
            match build_packet(ctx, d, *r, &gens, group.clone()) {
                Ok(pkt) => {
                    covered.extend(pkt.members.iter().map(|m| m.point));
                    packets.push(pkt);
                }
                Err(e) => {
                    last_err = e;
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(SpherePackets {
                d,
                disc_matched: disc,
                class_number: h,
                point_count,
                class_count: reps.len(),
                packets,
            });
        }
    }
    Err(last_err)
}

/// Action-law violations on one packet: p then p̄ returning every member,
/// commuting generator pairs, independence of the chosen α, and freeness of
/// the labeled class action.
pub fn action_law_violations(ctx: &mut ActionContext, pkt: &LabeledPacket) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    let d = pkt.d;
    for x in &pkt.members {
        let images: Vec<OrbitRep> = pkt.generators.iter().map(|g| ctx.act_prime(x, *g)).collect::<Result<_>>()?;
        for (i, (g, y)) in pkt.generators.iter().zip(&images).enumerate() {
            if ctx.act_prime(y, g.conj())? != *x {
                bad.push(format!("d={d}: p={} then its conjugate moves {:?}", g.p, x.point));
            }
            for (h, z) in pkt.generators.iter().zip(&images).skip(i + 1) {
                if ctx.act_prime(y, *h)? != ctx.act_prime(z, *g)? {
                    bad.push(format!("d={d}: p={} and p={} do not commute at {:?}", g.p, h.p, x.point));
                }
            }
            let mut outs = BTreeSet::new();
            for a in ctx.valid_alphas(x.point, *g) {
                outs.insert(canonicalize(ctx.conjugate(x.point, &a, g.p)?));
            }
            if outs.len() != 1 || !outs.contains(y) {
                bad.push(format!("d={d}: p={} image at {:?} depends on alpha", g.p, x.point));
            }
        }
        for s in 0..pkt.group.class_number() {
            let s = IdealClassId(s);
            if s != pkt.group.identity && act_class(pkt, s, x)? == *x {
                bad.push(format!("d={d}: class {s:?} fixes {:?}", x.point));
            }
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadforms::class_number;

    fn q(a: i64, b: i64, c: i64, d: i64) -> Quaternion {
        Quaternion::new(a, b, c, d)
    }

    #[test]
    fn quaternion_basics() {
        let one_ijk = q(1, 1, 1, 1);
        assert_eq!(one_ijk.norm(), 4);
        let half = Quaternion::from_doubled([1, 1, 1, 1]).unwrap();
        assert_eq!(half.norm(), 1);
        assert!(Quaternion::from_doubled([1, 0, 1, 1]).is_err());
        let (i, j, k) = (q(0, 1, 0, 0), q(0, 0, 1, 0), q(0, 0, 0, 1));
        assert_eq!(i.mul(&j), k);
        assert_eq!(j.mul(&i), k.neg());
        let x = q(3, -1, 4, 2);
        assert_eq!(x.conj().mul(&x), Quaternion::scalar(x.norm()));
        let y = Quaternion::embed(LatticePoint::new(3, 1, 1));
        assert_eq!(y.norm(), 11);
    }

    #[test]
    fn units_form_a_group_of_order_24() {
        let u = hurwitz_units();
        assert_eq!(u.len(), 24);
        let set: BTreeSet<_> = u.iter().copied().collect();
        assert_eq!(set.len(), 24);
        for a in &u {
            assert_eq!(a.norm(), 1);
            for b in &u {
                assert!(set.contains(&a.mul(b)));
            }
        }
    }

    #[test]
    fn norm_p_class_counts() {
        assert_eq!(norm_p_classes(3).len(), 4);
        assert_eq!(norm_p_classes(5).len(), 6);
        for p in crate::arith::primes_up_to(97).into_iter().skip(1) {
            assert_eq!(norm_p_classes(p).len() as u64, p + 1, "p={p}");
            assert_eq!(norm_p_right_classes(p).len() as u64, p + 1, "p={p}");
            assert_eq!(norm_p_elements(p).len() as u64, 24 * (p + 1));
        }
    }

    #[test]
    fn orientation_choice() {
        let o = PrimeOrientation::new(59, 3).unwrap();
        assert_eq!(o, PrimeOrientation { p: 3, rho: 1 });
        assert!(PrimeOrientation::new(59, 13).is_err()); // −59 is not a square mod 13
        assert!(PrimeOrientation::new(59, 2).is_err());
        for d in [59u64, 83, 101, 1001] {
            for p in [3u64, 5, 7, 11, 13, 17, 19, 23] {
                if let Ok(o) = PrimeOrientation::new(d, p) {
                    assert!(o.rho > 0 && 2 * o.rho < p as i64);
                    assert_eq!((o.rho * o.rho + d as i64) % p as i64, 0);
                }
            }
        }
    }

    #[test]
    fn prime_then_conjugate_returns() {
        let mut ctx = ActionContext::new();
        for d in [59u64, 83, 101, 131, 194, 377] {
            for r in quotient(d) {
                for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29] {
                    if let Ok(o) = PrimeOrientation::new(d, p) {
                        let y = ctx.act_prime(&r, o).unwrap();
                        assert_eq!(ctx.act_prime(&y, o.conj()).unwrap(), r, "d={d} p={p}");
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_choice_is_irrelevant() {
        let mut ctx = ActionContext::new();
        for d in [59u64, 101, 377] {
            for r in quotient(d) {
                for p in [3u64, 7, 11, 13, 17, 19] {
                    let Ok(o) = PrimeOrientation::new(d, p) else { continue };
                    let alphas = ctx.valid_alphas(r.point, o);
                    assert_eq!(alphas.len(), 24);
                    let outs: BTreeSet<_> = alphas
                        .iter()
                        .map(|a| canonicalize(ctx.conjugate(r.point, a, p).unwrap()))
                        .collect();
                    assert_eq!(outs.len(), 1);
                }
            }
        }
    }

    #[test]
    fn action_is_defined_on_rotation_classes() {
        let mut ctx = ActionContext::new();
        let d = 101;
        let o = PrimeOrientation::new(d, 5).unwrap();
        for x in crate::sphere::enumerate_points(d) {
            let via_rep = ctx.act_prime(&canonicalize(x), o).unwrap();
            let alpha = ctx.valid_alphas(x, o)[0];
            let direct = canonicalize(ctx.conjugate(x, &alpha, 5).unwrap());
            assert_eq!(via_rep, direct);
        }
    }

    #[test]
    fn packet_examples() {
        let mut ctx = ActionContext::new();
        let sp = sphere_packets(&mut ctx, 11, GeneratorPolicy::default()).unwrap();
        assert_eq!(sp.disc_matched, -11);
        assert!(sp.packets.iter().all(|p| p.len() == 1));
        for pkt in &sp.packets {
            for p in [3u64, 5, 23, 31] {
                if let Ok(o) = PrimeOrientation::new(11, p) {
                    assert_eq!(ctx.act_prime(&pkt.base, o).unwrap(), pkt.base);
                }
            }
        }
        let sp = sphere_packets(&mut ctx, 59, GeneratorPolicy::default()).unwrap();
        assert_eq!(sp.disc_matched, -59);
        assert_eq!(sp.packets[0].len(), 3);
        assert_eq!(sp.packets.len(), 2);
    }

    #[test]
    fn orbit_of_one_prime_has_order_of_its_class() {
        let mut ctx = ActionContext::new();
        for d in [59u64, 83, 131, 251] {
            let group = ClassGroup::build(-(d as i64)).unwrap();
            let base = quotient(d)[0];
            for p in [3u64, 5, 7, 11, 13, 17, 19, 23] {
                let Ok(o) = PrimeOrientation::new(d, p) else { continue };
                let orbit = orbit_under(&mut ctx, base, &[o]).unwrap();
                let cls = group.index(&o.class_form(d, -(d as i64)).unwrap()).unwrap();
                assert_eq!(orbit.len() as u64, group.order(cls), "d={d} p={p}");
            }
        }
    }

    #[test]
    fn labels_follow_generators_and_class_action() {
        let mut ctx = ActionContext::new();
        for d in [194u64, 377, 1003, 1001] {
            let sp = sphere_packets(&mut ctx, d, GeneratorPolicy::default()).unwrap();
            let g = &sp.packets[0].group;
            assert_eq!(sp.class_number, class_number(sp.disc_matched).unwrap());
            for pkt in &sp.packets {
                for m in &pkt.members {
                    for gen in &pkt.generators {
                        let y = ctx.act_prime(m, *gen).unwrap();
                        let cls = g.index(&gen.class_form(d, pkt.disc_matched).unwrap()).unwrap();
                        assert_eq!(pkt.label(&y).unwrap(), g.mul(pkt.label(m).unwrap(), cls));
                    }
                    assert_eq!(act_class(pkt, g.identity, m).unwrap(), *m);
                    for s in 0..g.class_number() {
                        let s = IdealClassId(s);
                        let y = act_class(pkt, s, m).unwrap();
                        assert_eq!(act_class(pkt, g.inv(s), &y).unwrap(), *m);
                        if s != g.identity {
                            assert_ne!(y, *m);
                        }
                        for t in 0..g.class_number() {
                            let t = IdealClassId(t);
                            assert_eq!(
                                act_class(pkt, t, &y).unwrap(),
                                act_class(pkt, g.mul(s, t), m).unwrap()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn action_laws_hold_on_small_packets() {
        let mut ctx = ActionContext::new();
        for d in [46u64, 61, 107, 173] {
            let sp = sphere_packets(&mut ctx, d, GeneratorPolicy::default()).unwrap();
            for pkt in &sp.packets {
                assert!(action_law_violations(&mut ctx, pkt).unwrap().is_empty(), "d={d}");
            }
        }
    }

    #[test]
    fn rejects_inadmissible_or_small() {
        let mut ctx = ActionContext::new();
        assert!(sphere_packets(&mut ctx, 7, GeneratorPolicy::default()).is_err());
        assert!(sphere_packets(&mut ctx, 18, GeneratorPolicy::default()).is_err());
        assert!(sphere_packets(&mut ctx, 3, GeneratorPolicy::default()).is_err());
        let r = quotient(59)[0];
        assert!(matches!(
            ctx.act_prime(&r, PrimeOrientation { p: 13, rho: 1 }),
            Err(Error::BadOrientation { .. })
        ));
    }
}
