//! Positive definite binary quadratic forms, the form class group and the
//! form-side invariants used elsewhere (minimal value, local densities,
//! representation numbers).

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, isqrt, kronecker};
use crate::error::{Error, Result};

/// The form ax² + bxy + cy².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    /// Checked constructor: positive definite and primitive.
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        let f = QuadForm { a, b, c };
        if f.disc() >= 0 || a <= 0 {
            return Err(Error::NotPositiveDefinite(a, b, c));
        }
        if a.gcd(&b).gcd(&c) != 1 {
            return Err(Error::Imprimitive(a, b, c));
        }
        Ok(f)
    }

    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    pub fn is_reduced(&self) -> bool {
        let QuadForm { a, b, c } = *self;
        b.abs() <= a && a <= c && !((b.abs() == a || a == c) && b < 0)
    }

    /// Principal form of the discriminant: (1, 0, −D/4) or (1, 1, (1−D)/4).
    pub fn principal(disc: i64) -> Result<Self> {
        check_disc(disc)?;
        let b = disc.rem_euclid(2);
        Ok(QuadForm { a: 1, b, c: (b - disc) / 4 })
    }

    /// The inverse class (a, −b, c), reduced.
    pub fn inverse(&self) -> QuadForm {
        normalize_unchecked(QuadForm { a: self.a, b: -self.b, c: self.c })
    }

    /// Substitution (x, y) ↦ (αx + βy, γx + δy).
    pub fn transform(&self, m: [[i64; 2]; 2]) -> QuadForm {
        let [[al, be], [ga, de]] = m;
        let QuadForm { a, b, c } = *self;
        QuadForm {
            a: a * al * al + b * al * ga + c * ga * ga,
            b: 2 * a * al * be + b * (al * de + be * ga) + 2 * c * ga * de,
            c: a * be * be + b * be * de + c * de * de,
        }
    }
}

fn check_disc(disc: i64) -> Result<()> {
    if disc >= 0 || disc.rem_euclid(4) > 1 {
        return Err(Error::InvalidDiscriminant(disc));
    }
    Ok(())
}

fn normalize_unchecked(f: QuadForm) -> QuadForm {
    let (mut a, mut b, mut c) = (f.a as i128, f.b as i128, f.c as i128);
    loop {
        if b <= -a || b > a {
            // x -> x + t y moves b by 2at
            let two_a = 2 * a;
            let mut r = b.rem_euclid(two_a);
            if r > a {
                r -= two_a;
            }
            let t = (r - b) / two_a;
            c += b * t + a * t * t;
            b = r;
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
            b = -b;
            continue;
        }
        break;
    }
    if a == c && b < 0 {
        b = -b;
    }
    QuadForm { a: a as i64, b: b as i64, c: c as i64 }
}

/// Unique reduced form in the SL₂(ℤ)-class of `form`.
pub fn reduce(form: QuadForm) -> Result<QuadForm> {
    let f = QuadForm::new(form.a, form.b, form.c)?;
    Ok(normalize_unchecked(f))
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let e = a.extended_gcd(&b);
    (e.x, e.y, e.gcd)
}

/// Gauss composition (Cohen's algorithm 5.4.7) followed by reduction.
pub fn compose(f: QuadForm, g: QuadForm) -> Result<QuadForm> {
    let f = QuadForm::new(f.a, f.b, f.c)?;
    let g = QuadForm::new(g.a, g.b, g.c)?;
    if f.disc() != g.disc() {
        return Err(Error::DiscriminantMismatch(f.disc(), g.disc()));
    }
    let (f1, f2) = if f.a > g.a { (g, f) } else { (f, g) };
    let (a1, b1) = (f1.a as i128, f1.b as i128);
    let (a2, b2, c2) = (f2.a as i128, f2.b as i128, f2.c as i128);
    let s = (b1 + b2) / 2;
    let n = b2 - s;
    let (y1, d) = if a2 % a1 == 0 {
        (0, a1)
    } else {
        let (u, _v, d) = ext_gcd(a2, a1);
        (u, d)
    };
    let (x2, y2, d1) = if s % d == 0 {
        (0, -1, d)
    } else {
        let (u, v, d1) = ext_gcd(s, d);
        (u, -v, d1)
    };
    let v1 = a1 / d1;
    let v2 = a2 / d1;
    let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
    let b3 = b2 + 2 * v2 * r;
    let a3 = v1 * v2;
    let c3 = (c2 * d1 + r * (b2 + v2 * r)) / v1;
    let h = QuadForm { a: a3 as i64, b: b3 as i64, c: c3 as i64 };
    if h.disc() != f.disc() {
        return Err(Error::Invariant(format!("composition produced {h:?}")));
    }
    reduce(h)
}

/// All reduced primitive forms of discriminant `disc`, ordered by (a, b).
pub fn reduced_forms(disc: i64) -> Result<Vec<QuadForm>> {
    check_disc(disc)?;
    let d_abs = disc.unsigned_abs();
    let a_max = isqrt(d_abs / 3) as i64;
    let mut out = Vec::new();
    for a in 1..=a_max {
        for b in -a..=a {
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            let f = QuadForm { a, b, c };
            if c >= a && f.is_reduced() && a.gcd(&b).gcd(&c) == 1 {
                out.push(f);
            }
        }
    }
    Ok(out)
}

pub fn class_number(disc: i64) -> Result<usize> {
    Ok(reduced_forms(disc)?.len())
}

/// Index of an element of a [`ClassGroup`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IdealClassId(pub usize);

/// Characters are indexed by their coordinate vector in the dual basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CharacterId(pub usize);

#[derive(Clone, Debug)]
pub struct ClassGroup {
    pub disc: i64,
    pub elements: Vec<QuadForm>,
    pub identity: IdealClassId,
    /// `table[i][j]` is the index of elements[i]·elements[j].
    pub table: Vec<Vec<usize>>,
    /// Invariant factors n₁ | n₂ | … (empty for the trivial group).
    pub structure: Vec<u64>,
    /// Prime-power cyclic decomposition: generator index and order.
    pub basis: Vec<(usize, u64)>,
    /// Exponent vector of each element in `basis`.
    coords: Vec<Vec<u64>>,
    index_of: HashMap<QuadForm, usize>,
    /// lcm of the cyclic orders; character values are exact N-th roots of unity.
    exponent: u64,
}

#[derive(Serialize, Deserialize)]
struct ClassGroupJson {
    disc: i64,
    forms: Vec<[i64; 3]>,
    table: Vec<Vec<usize>>,
    structure: Vec<u64>,
}

impl ClassGroup {
    pub fn build(disc: i64) -> Result<Self> {
        let elements = reduced_forms(disc)?;
        let h = elements.len();
        let index_of: HashMap<QuadForm, usize> =
            elements.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        let mut table = vec![vec![0usize; h]; h];
        for i in 0..h {
            for j in i..h {
                let k = index_of[&compose(elements[i], elements[j])?];
                table[i][j] = k;
                table[j][i] = k;
            }
        }
        Self::from_parts(disc, elements, table, index_of)
    }

    fn from_parts(
        disc: i64,
        elements: Vec<QuadForm>,
        table: Vec<Vec<usize>>,
        index_of: HashMap<QuadForm, usize>,
    ) -> Result<Self> {
        let principal = QuadForm::principal(disc)?;
        let identity = *index_of
            .get(&principal)
            .ok_or_else(|| Error::Invariant("principal form missing".into()))?;
        let basis = cyclic_basis(&table, identity)?;
        let h = elements.len();
        // enumerate Π g_i^{e_i} in mixed radix to get coordinates
        let mut coords = vec![Vec::new(); h];
        let mut seen = vec![false; h];
        let mut exps = vec![0u64; basis.len()];
        let mut cur = identity;
        loop {
            if seen[cur] {
                return Err(Error::Invariant("cyclic basis is not independent".into()));
            }
            seen[cur] = true;
            coords[cur] = exps.clone();
            let mut i = 0;
            loop {
                if i == basis.len() {
                    break;
                }
                let (g, n) = basis[i];
                exps[i] += 1;
                cur = table[cur][g];
                if exps[i] < n {
                    break;
                }
                // g^n = e, so cur is already back where this digit started
                exps[i] = 0;
                i += 1;
            }
            if i == basis.len() {
                break;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Invariant("cyclic basis does not generate".into()));
        }
        let exponent = basis.iter().fold(1u64, |acc, &(_, n)| acc.lcm(&n));
        let structure = invariant_factors(basis.iter().map(|&(_, n)| n).collect());
        Ok(ClassGroup {
            disc,
            elements,
            identity: IdealClassId(identity),
            table,
            structure,
            basis,
            coords,
            index_of,
            exponent,
        })
    }

    pub fn class_number(&self) -> usize {
        self.elements.len()
    }

    pub fn index(&self, f: &QuadForm) -> Option<IdealClassId> {
        let r = reduce(*f).ok()?;
        self.index_of.get(&r).map(|&i| IdealClassId(i))
    }

    pub fn form(&self, id: IdealClassId) -> QuadForm {
        self.elements[id.0]
    }

    pub fn mul(&self, x: IdealClassId, y: IdealClassId) -> IdealClassId {
        IdealClassId(self.table[x.0][y.0])
    }

    pub fn inv(&self, x: IdealClassId) -> IdealClassId {
        IdealClassId(self.index_of[&self.elements[x.0].inverse()])
    }

    pub fn pow(&self, x: IdealClassId, mut e: u64) -> IdealClassId {
        let mut acc = self.identity;
        let mut b = x;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    pub fn order(&self, x: IdealClassId) -> u64 {
        let mut cur = x;
        let mut n = 1;
        while cur != self.identity {
            cur = self.mul(cur, x);
            n += 1;
        }
        n
    }

    pub fn coordinates(&self, x: IdealClassId) -> &[u64] {
        &self.coords[x.0]
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn characters(&self) -> impl Iterator<Item = CharacterId> {
        (0..self.class_number()).map(CharacterId)
    }

    /// Coordinates of a character in the dual of `basis` (mixed radix).
    fn char_coords(&self, chi: CharacterId) -> Vec<u64> {
        let mut rest = chi.0;
        self.basis
            .iter()
            .map(|&(_, n)| {
                let k = (rest as u64) % n;
                rest /= n as usize;
                k
            })
            .collect()
    }

    /// χ(x) = exp(2πi · num / exponent); returns num in [0, exponent).
    pub fn character_angle(&self, chi: CharacterId, x: IdealClassId) -> u64 {
        let k = self.char_coords(chi);
        let e = &self.coords[x.0];
        let mut num = 0u64;
        for (i, &(_, n)) in self.basis.iter().enumerate() {
            num = (num + k[i] * e[i] % n * (self.exponent / n)) % self.exponent;
        }
        num
    }

    pub fn character_value(&self, chi: CharacterId, x: IdealClassId) -> Complex64 {
        let num = self.character_angle(chi, x);
        root_of_unity(num, self.exponent)
    }

    pub fn conj_character(&self, chi: CharacterId) -> CharacterId {
        let k = self.char_coords(chi);
        let mut idx = 0usize;
        let mut radix = 1usize;
        for (i, &(_, n)) in self.basis.iter().enumerate() {
            idx += ((n - k[i]) % n) as usize * radix;
            radix *= n as usize;
        }
        CharacterId(idx)
    }

    pub fn to_json(&self) -> String {
        let j = ClassGroupJson {
            disc: self.disc,
            forms: self.elements.iter().map(|f| [f.a, f.b, f.c]).collect(),
            table: self.table.clone(),
            structure: self.structure.clone(),
        };
        serde_json::to_string(&j).expect("class group serializes")
    }

    /// Parses a cached group and re-validates it completely; any mismatch is
    /// reported as corruption rather than silently repaired.
    pub fn from_json(s: &str) -> Result<Self> {
        let j: ClassGroupJson =
            serde_json::from_str(s).map_err(|e| Error::CorruptCache(e.to_string()))?;
        let expect = reduced_forms(j.disc).map_err(|e| Error::CorruptCache(e.to_string()))?;
        let forms: Vec<QuadForm> = j
            .forms
            .iter()
            .map(|&[a, b, c]| QuadForm { a, b, c })
            .collect();
        if forms != expect {
            return Err(Error::CorruptCache(format!("form list for disc {}", j.disc)));
        }
        let h = forms.len();
        if j.table.len() != h || j.table.iter().any(|r| r.len() != h || r.iter().any(|&k| k >= h)) {
            return Err(Error::CorruptCache("table shape".into()));
        }
        for i in 0..h {
            for k in i..h {
                let want = compose(forms[i], forms[k]).map_err(|e| Error::CorruptCache(e.to_string()))?;
                if forms[j.table[i][k]] != want || j.table[i][k] != j.table[k][i] {
                    return Err(Error::CorruptCache(format!("table entry ({i},{k})")));
                }
            }
        }
        let index_of = forms.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        let g = Self::from_parts(j.disc, forms, j.table, index_of)
            .map_err(|e| Error::CorruptCache(e.to_string()))?;
        if g.structure != j.structure {
            return Err(Error::CorruptCache("structure".into()));
        }
        Ok(g)
    }
}

pub fn root_of_unity(num: u64, den: u64) -> Complex64 {
    let num = num % den;
    // exact values at the quarter turns keep real characters exactly real
    if 4 * num % den == 0 {
        return match 4 * num / den {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, 2.0 * PI * num as f64 / den as f64)
}

fn table_order(table: &[Vec<usize>], e: usize, x: usize) -> u64 {
    let mut cur = x;
    let mut n = 1;
    while cur != e {
        cur = table[cur][x];
        n += 1;
    }
    n
}

/// Prime-power cyclic decomposition of a finite abelian group given by its
/// table. Each Sylow subgroup is peeled greedily: take a coset of maximal
/// order in P/H and lift it to an element of the same order.
fn cyclic_basis(table: &[Vec<usize>], e: usize) -> Result<Vec<(usize, u64)>> {
    let h = table.len();
    let orders: Vec<u64> = (0..h).map(|x| table_order(table, e, x)).collect();
    let mut basis = Vec::new();
    for (p, _) in factorize(h as u64) {
        let sylow: Vec<usize> = (0..h)
            .filter(|&x| factorize(orders[x]).iter().all(|&(q, _)| q == p))
            .collect();
        let mut in_h = vec![false; h];
        in_h[e] = true;
        let mut h_elems = vec![e];
        while h_elems.len() < sylow.len() {
            let quotient_order = |x: usize| {
                let mut cur = x;
                let mut n = 1u64;
                while !in_h[cur] {
                    cur = table[cur][x];
                    n += 1;
                }
                n
            };
            let (g, n) = sylow
                .iter()
                .map(|&x| (x, quotient_order(x)))
                .max_by_key(|&(x, n)| (n, std::cmp::Reverse(x)))
                .expect("nonempty sylow subgroup");
            let lift = h_elems
                .iter()
                .map(|&y| table[g][y])
                .filter(|&z| orders[z] == n)
                .min()
                .ok_or_else(|| Error::Invariant("no lift of maximal order".into()))?;
            basis.push((lift, n));
            // H <- H × <lift>
            let mut next = Vec::with_capacity(h_elems.len() * n as usize);
            let mut pw = e;
            for _ in 0..n {
                for &y in &h_elems {
                    next.push(table[pw][y]);
                }
                pw = table[pw][lift];
            }
            for &z in &next {
                in_h[z] = true;
            }
            h_elems = next;
        }
    }
    Ok(basis)
}

/// Merge prime-power orders into invariant factors n₁ | n₂ | ….
fn invariant_factors(orders: Vec<u64>) -> Vec<u64> {
    let mut by_prime: HashMap<u64, Vec<u64>> = HashMap::new();
    for n in orders {
        let p = factorize(n)[0].0;
        by_prime.entry(p).or_default().push(n);
    }
    let len = by_prime.values().map(|v| v.len()).max().unwrap_or(0);
    let mut out = vec![1u64; len];
    for v in by_prime.values_mut() {
        v.sort_unstable_by(|a, b| b.cmp(a));
        for (i, &q) in v.iter().enumerate() {
            out[i] *= q;
        }
    }
    out.reverse();
    out
}

/// Least positive integer represented; for a reduced form this is `a`.
pub fn minimal_represented(form: QuadForm) -> Result<i64> {
    if !form.is_reduced() {
        return Err(Error::NotReduced(form.a, form.b, form.c));
    }
    QuadForm::new(form.a, form.b, form.c)?;
    Ok(form.a)
}

/// ρ_Q(n) = #{(x, y) mod n : Q(x, y) ≡ 0 mod n}, via multiplicativity.
pub fn density(form: QuadForm, n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .map(|(p, k)| density_prime_power(form, p, k))
        .product()
}

/// ρ_Q(p^k). Closed form at odd p ∤ disc, homogeneous direct count otherwise.
pub fn density_prime_power(form: QuadForm, p: u64, k: u32) -> u64 {
    if k == 0 {
        return 1;
    }
    let disc = form.disc();
    if p != 2 && disc.rem_euclid(p as i64) != 0 {
        let chi = kronecker(disc, p);
        return density_unramified(p, k, chi);
    }
    density_direct(form, p, k)
}

fn density_unramified(p: u64, k: u32, chi: i32) -> u64 {
    if k == 0 {
        return 1;
    }
    if k == 1 {
        // p(1 + χ) − χ
        return if chi == 1 { 2 * p - 1 } else { 1 };
    }
    let prim = if chi == 1 { 2 * (p - 1) * p.pow(k - 1) } else { 0 };
    prim + p * p * density_unramified(p, k - 2, chi)
}

fn density_direct(form: QuadForm, p: u64, k: u32) -> u64 {
    let m = p.pow(k) as i128;
    let q = |x: i128, y: i128| {
        (form.a as i128 * x * x + form.b as i128 * x * y + form.c as i128 * y * y).rem_euclid(m)
    };
    let phi = (m - m / p as i128) as u64;
    // primitive pairs: (x, y) = y·(t, 1) with y a unit, or x·(1, s) with p | s
    let roots_t = (0..m).filter(|&t| q(t, 1) == 0).count() as u64;
    let roots_s = (0..m).step_by(p as usize).filter(|&s| q(1, s) == 0).count() as u64;
    let primitive = phi * (roots_t + roots_s);
    let imprimitive = if k == 1 {
        1
    } else {
        p * p * density_prime_power(form, p, k - 2)
    };
    primitive + imprimitive
}

/// #{(x, y) ∈ ℤ² : Q(x, y) = n}; exact, using 4aQ = (2ax + by)² + |D|y².
pub fn representation_count(form: QuadForm, n: u64) -> u64 {
    let (a, b) = (form.a as i128, form.b as i128);
    let d_abs = (-(form.disc() as i128)) as u128;
    let n = n as i128;
    if n == 0 {
        return 1;
    }
    let y_max = isqrt((4 * a * n) as u64 / d_abs as u64) as i128 + 1;
    let mut count = 0;
    for y in -y_max..=y_max {
        let rad = 4 * a * n - d_abs as i128 * y * y;
        if rad < 0 {
            continue;
        }
        let s = isqrt(rad as u64) as i128;
        if s * s != rad {
            continue;
        }
        let roots = if s == 0 { vec![-b * y] } else { vec![-b * y + s, -b * y - s] };
        for num in roots {
            if num % (2 * a) == 0 {
                count += 1;
            }
        }
    }
    count
}

/// Number of roots of unity in the order of discriminant `disc`.
pub fn units_count(disc: i64) -> u64 {
    match disc {
        -3 => 6,
        -4 => 4,
        _ => 2,
    }
}
