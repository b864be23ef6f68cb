//! Exact arithmetic in ℚ(ζ_n) and Laurent polynomials in p^{−s} over it.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Q = Ratio<i128>;

fn q_f64(x: &Q) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

/// Integer coefficients of the n-th cyclotomic polynomial, constant term
/// first.
pub fn cyclotomic_poly(n: u64) -> Vec<i128> {
    static CACHE: OnceLock<Mutex<BTreeMap<u64, Vec<i128>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&n) {
        return v.clone();
    }
    // x^n − 1 divided by Φ_d for every proper divisor d
    let mut num = vec![0i128; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            num = div_exact(&num, &cyclotomic_poly(d));
        }
    }
    cache.lock().unwrap().insert(n, num.clone());
    num
}

fn div_exact(num: &[i128], den: &[i128]) -> Vec<i128> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    let mut q = vec![0i128; r.len() - dd];
    for i in (0..q.len()).rev() {
        let c = r[i + dd] / den[dd];
        q[i] = c;
        for (j, &dj) in den.iter().enumerate() {
            r[i + j] -= c * dj;
        }
    }
    debug_assert!(r.iter().all(|&x| x == 0));
    q
}

/// Element Σ c_e ζ_n^e of ℚ(ζ_n), kept unreduced (one slot per exponent mod
/// n); equality and zero tests reduce modulo Φ_n.
#[derive(Clone, Debug)]
pub struct Cyclo {
    pub n: u64,
    pub coeffs: Vec<Q>,
}

impl Cyclo {
    pub fn zero(n: u64) -> Self {
        Cyclo { n, coeffs: vec![Q::zero(); n as usize] }
    }

    pub fn root(n: u64, e: u64) -> Self {
        let mut z = Self::zero(n);
        z.coeffs[(e % n) as usize] = Q::from_integer(1);
        z
    }

    pub fn rational(n: u64, q: Q) -> Self {
        let mut z = Self::zero(n);
        z.coeffs[0] = q;
        z
    }

    /// (1/den)·Σ_e hist[e] ζ^e.
    pub fn from_histogram(hist: &[i128], den: i128) -> Self {
        Cyclo {
            n: hist.len() as u64,
            coeffs: hist.iter().map(|&h| Q::new(h, den)).collect(),
        }
    }

    pub fn add(&self, o: &Cyclo) -> Cyclo {
        assert_eq!(self.n, o.n);
        Cyclo {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Cyclo) -> Cyclo {
        self.add(&o.scale(&Q::from_integer(-1)))
    }

    pub fn scale(&self, q: &Q) -> Cyclo {
        Cyclo { n: self.n, coeffs: self.coeffs.iter().map(|c| c * q).collect() }
    }

    pub fn mul(&self, o: &Cyclo) -> Cyclo {
        assert_eq!(self.n, o.n);
        let n = self.n as usize;
        let mut out = Cyclo::zero(self.n);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out.coeffs[(i + j) % n] += a * b;
                }
            }
        }
        out
    }

    /// Complex conjugate: ζ^e ↦ ζ^{−e}.
    pub fn conj(&self) -> Cyclo {
        let n = self.n as usize;
        let mut out = Cyclo::zero(self.n);
        for (i, c) in self.coeffs.iter().enumerate() {
            out.coeffs[(n - i) % n] = c.clone();
        }
        out
    }

    /// Canonical coordinates in the power basis 1, ζ, …, ζ^{φ(n)−1}.
    pub fn reduced(&self) -> Vec<Q> {
        let phi = cyclotomic_poly(self.n);
        let deg = phi.len() - 1;
        let mut r = self.coeffs.clone();
        for i in (deg..r.len()).rev() {
            let c = r[i].clone();
            if c.is_zero() {
                continue;
            }
            // Φ_n is monic
            for (j, &pj) in phi.iter().enumerate() {
                r[i - deg + j] -= &c * Q::from_integer(pj);
            }
        }
        r.truncate(deg);
        r
    }

    pub fn is_zero(&self) -> bool {
        self.reduced().iter().all(|c| c.is_zero())
    }

    pub fn exact_eq(&self, o: &Cyclo) -> bool {
        self.sub(o).is_zero()
    }

    /// The rational value, if the element lies in ℚ.
    pub fn as_rational(&self) -> Option<Q> {
        let r = self.reduced();
        if r.iter().skip(1).all(|c| c.is_zero()) {
            Some(r.first().cloned().unwrap_or_else(Q::zero))
        } else {
            None
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        let n = self.n as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| Complex64::from_polar(q_f64(c), 2.0 * PI * e as f64 / n))
            .sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.reduced().iter().map(|c| q_f64(&c.abs())).fold(0.0, f64::max)
    }
}

/// Σ_m c_m·p^{−m s}, finitely many m, coefficients in ℚ(ζ_n).
#[derive(Clone, Debug)]
pub struct LaurentValue {
    pub p: u64,
    pub n: u64,
    pub coeffs: BTreeMap<i64, Cyclo>,
}

impl LaurentValue {
    pub fn zero(p: u64, n: u64) -> Self {
        LaurentValue { p, n, coeffs: BTreeMap::new() }
    }

    pub fn monomial(p: u64, m: i64, c: Cyclo) -> Self {
        let mut v = Self::zero(p, c.n);
        v.coeffs.insert(m, c);
        v
    }

    pub fn add(&self, o: &LaurentValue) -> LaurentValue {
        assert_eq!((self.p, self.n), (o.p, o.n));
        let mut out = self.clone();
        for (m, c) in &o.coeffs {
            let e = out.coeffs.entry(*m).or_insert_with(|| Cyclo::zero(self.n));
            *e = e.add(c);
        }
        out
    }

    pub fn mul(&self, o: &LaurentValue) -> LaurentValue {
        assert_eq!((self.p, self.n), (o.p, o.n));
        let mut out = LaurentValue::zero(self.p, self.n);
        for (m1, c1) in &self.coeffs {
            for (m2, c2) in &o.coeffs {
                let e = out.coeffs.entry(m1 + m2).or_insert_with(|| Cyclo::zero(self.n));
                *e = e.add(&c1.mul(c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &Cyclo) -> LaurentValue {
        LaurentValue {
            p: self.p,
            n: self.n,
            coeffs: self.coeffs.iter().map(|(m, x)| (*m, x.mul(c))).collect(),
        }
    }

    /// Exponents with a nonzero coefficient.
    pub fn support(&self) -> Vec<i64> {
        self.coeffs.iter().filter(|(_, c)| !c.is_zero()).map(|(m, _)| *m).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.support().is_empty()
    }

    pub fn exact_eq(&self, o: &LaurentValue) -> bool {
        let neg = o.scale(&Cyclo::rational(self.n, Q::from_integer(-1)));
        self.add(&neg).is_zero()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        let lp = (self.p as f64).ln();
        self.coeffs
            .iter()
            .map(|(m, c)| c.to_complex() * (-(*m as f64) * s * lp).exp())
            .sum()
    }

    /// Coefficients rendered as text, for reports.
    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| {
                let terms: Vec<String> = c
                    .reduced()
                    .iter()
                    .enumerate()
                    .filter(|(_, q)| !q.is_zero())
                    .map(|(e, q)| if e == 0 { q.to_string() } else { format!("{q}·z^{e}") })
                    .collect();
                format!("[{}]·p^(-{m}s)", terms.join(" + "))
            })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic_poly(20).len() - 1, 8);
    }

    #[test]
    fn root_sums_vanish() {
        for n in [2u64, 3, 4, 6, 10, 20] {
            let mut s = Cyclo::zero(n);
            for e in 0..n {
                s = s.add(&Cyclo::root(n, e));
            }
            assert!(s.is_zero(), "n={n}");
            assert!(!Cyclo::root(n, 1).is_zero());
            let z = Cyclo::root(n, 1);
            assert_eq!(z.mul(&z.conj()).as_rational(), Some(Q::from_integer(1)));
        }
        // ζ₄² = −1
        let i = Cyclo::root(4, 1);
        assert_eq!(i.mul(&i).as_rational(), Some(Q::from_integer(-1)));
        assert!((Cyclo::root(6, 1).to_complex() - Complex64::from_polar(1.0, PI / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn laurent_geometric_identity() {
        // (1 − X)(1 + X + … + X^9) = 1 − X^10
        let one = Cyclo::rational(1, Q::from_integer(1));
        let mut geo = LaurentValue::zero(3, 1);
        for m in 0..10 {
            geo = geo.add(&LaurentValue::monomial(3, m, one.clone()));
        }
        let lhs = LaurentValue::monomial(3, 0, one.clone())
            .add(&LaurentValue::monomial(3, 1, one.scale(&Q::from_integer(-1))))
            .mul(&geo);
        let rhs = LaurentValue::monomial(3, 0, one.clone())
            .add(&LaurentValue::monomial(3, 10, one.scale(&Q::from_integer(-1))));
        assert!(lhs.exact_eq(&rhs));
        assert_eq!(lhs.support(), vec![0, 10]);
        let s = Complex64::new(1.0, 0.0);
        assert!((geo.eval(s).re - (1.0 - 3f64.powi(-10)) / (1.0 - 1.0 / 3.0)).abs() < 1e-14);
    }
}
