//! Ramanujan τ, normalized Hecke eigenvalues λ(n) = τ(n)·n^{−11/2}, and the
//! sums over quadratic-form values, sieve products and prime sums built on
//! them.

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{kronecker, primes_up_to};
use crate::error::{Error, Result};
use crate::quadforms::{density, QuadForm};

pub const MAX_CUTOFF: usize = 10_000_000;
/// Slack for the pointwise Hecke inequality, which is tight (a double root)
/// at |λ(p)| = 1.
pub const HECKE_INEQUALITY_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct TauTable {
    pub cutoff: usize,
    /// tau[n] for 1 ≤ n ≤ cutoff; tau[0] = 0.
    pub tau: Vec<i128>,
    pub lambda: Vec<f64>,
}

/// Coefficients of Π(1 − qⁿ)³ = Σ_k (−1)^k (2k+1) q^{k(k+1)/2} (Jacobi).
fn eta_cubed_terms(len: usize) -> Vec<(usize, i128)> {
    let mut out = Vec::new();
    let mut k = 0usize;
    while k * (k + 1) / 2 < len {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        out.push((k * (k + 1) / 2, sign * (2 * k as i128 + 1)));
        k += 1;
    }
    out
}

/// τ(1..=cutoff) as the coefficients of q·(η³)⁸, computed by eight exact
/// dense-by-sparse multiplications in checked 128-bit arithmetic.
pub fn build_tau(cutoff: usize) -> Result<TauTable> {
    if cutoff > MAX_CUTOFF {
        return Err(Error::CutoffTooLarge(cutoff, MAX_CUTOFF));
    }
    let len = cutoff; // degree < cutoff in the η-power
    let sparse = eta_cubed_terms(len);
    let mut dense = vec![0i128; len];
    if len > 0 {
        dense[0] = 1;
    }
    let overflow = || Error::Invariant("τ coefficient overflowed 128 bits".into());
    for _ in 0..8 {
        let mut next = vec![0i128; len];
        for (n, slot) in next.iter_mut().enumerate() {
            let mut acc = 0i128;
            for &(e, c) in &sparse {
                if e > n {
                    break;
                }
                let term = dense[n - e].checked_mul(c).ok_or_else(overflow)?;
                acc = acc.checked_add(term).ok_or_else(overflow)?;
            }
            *slot = acc;
        }
        dense = next;
    }
    let mut tau = vec![0i128; cutoff + 1];
    tau[1..].copy_from_slice(&dense);
    let lambda = tau
        .iter()
        .enumerate()
        .map(|(n, &t)| if n == 0 { 0.0 } else { t as f64 * (-5.5 * (n as f64).ln()).exp() })
        .collect();
    Ok(TauTable { cutoff, tau, lambda })
}

impl TauTable {
    pub fn to_cache_string(&self) -> String {
        let mut s = format!("{}\n", self.cutoff);
        for t in &self.tau[1..] {
            s.push_str(&t.to_string());
            s.push('\n');
        }
        s
    }

    /// Parses a cache and re-checks it (length, τ(1), Hecke relations on
    /// small primes); anything off is reported as corruption.
    pub fn from_cache_str(s: &str) -> Result<Self> {
        let corrupt = |m: &str| Error::CorruptCache(format!("tau cache: {m}"));
        let mut lines = s.lines();
        let cutoff: usize = lines
            .next()
            .and_then(|l| l.trim().parse().ok())
            .ok_or_else(|| corrupt("missing cutoff"))?;
        let mut tau = vec![0i128];
        for l in lines {
            tau.push(l.trim().parse().map_err(|_| corrupt("bad integer"))?);
        }
        if tau.len() != cutoff + 1 || cutoff > MAX_CUTOFF {
            return Err(corrupt("length does not match cutoff"));
        }
        let lambda = tau
            .iter()
            .enumerate()
            .map(|(n, &t)| if n == 0 { 0.0 } else { t as f64 * (-5.5 * (n as f64).ln()).exp() })
            .collect();
        let tab = TauTable { cutoff, tau, lambda };
        if cutoff >= 1 && tab.tau[1] != 1 {
            return Err(corrupt("tau(1) != 1"));
        }
        if !tab.hecke_violations(cutoff.min(5000)).is_empty() {
            return Err(corrupt("Hecke relations fail"));
        }
        Ok(tab)
    }

    /// n ≤ limit where multiplicativity or the prime-power recursion fails.
    pub fn hecke_violations(&self, limit: usize) -> Vec<usize> {
        let limit = limit.min(self.cutoff);
        let mut spf = vec![0usize; limit + 1];
        for i in 2..=limit {
            if spf[i] == 0 {
                let mut j = i;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = i;
                    }
                    j += i;
                }
            }
        }
        let mut bad = Vec::new();
        for n in 2..=limit {
            let p = spf[n];
            let mut pk = 1;
            let mut m = n;
            while m % p == 0 {
                m /= p;
                pk *= p;
            }
            let ok = if m > 1 {
                self.tau[n] == self.tau[pk] * self.tau[m]
            } else if pk == p {
                true
            } else {
                // τ(p^{k+1}) = τ(p)τ(p^k) − p¹¹τ(p^{k−1})
                let p11 = (p as i128).pow(11);
                self.tau[n] == self.tau[p] * self.tau[n / p] - p11 * self.tau[n / (p * p)]
            };
            if !ok {
                bad.push(n);
            }
        }
        bad
    }

    /// Primes p ≤ limit with |λ(p)| > 2.
    pub fn deligne_violations(&self, limit: usize) -> Vec<u64> {
        primes_up_to(limit.min(self.cutoff))
            .into_iter()
            .filter(|&p| self.lambda[p as usize].abs() > 2.0)
            .collect()
    }
}

fn check_reduced(form: &QuadForm) -> Result<()> {
    if !form.is_reduced() {
        return Err(Error::NotReduced(form.a, form.b, form.c));
    }
    QuadForm::new(form.a, form.b, form.c).map(|_| ())
}

/// Visits Q(x, y) for all (x, y) ≠ 0 with 0 < Q(x, y) ≤ y_max.
fn for_each_value(form: &QuadForm, y_max: u64, mut f: impl FnMut(u64)) {
    let (a, b) = (form.a as i128, form.b as i128);
    let d_abs = -(form.disc() as i128);
    let big_y = y_max as i128;
    // 4aQ = (2ax + by)² + |D|y²
    let ymax = crate::arith::isqrt((4 * a * big_y / d_abs) as u64) as i128 + 1;
    for y in -ymax..=ymax {
        let rad = 4 * a * big_y - d_abs * y * y;
        if rad < 0 {
            continue;
        }
        let s = crate::arith::isqrt(rad as u64) as i128;
        // 2ax + by ∈ [−s, s]
        let lo = (-s - b * y).div_euclid(2 * a) - 1;
        let hi = (s - b * y).div_euclid(2 * a) + 1;
        for x in lo..=hi {
            if x == 0 && y == 0 {
                continue;
            }
            let v = a * x * x + b * x * y + form.c as i128 * y * y;
            if v >= 1 && v <= big_y {
                f(v as u64);
            }
        }
    }
}

/// S(Y, Q) = Σ_{0 < Q(x,y) ≤ Y} |λ(Q(x, y))|.
pub fn sparse_sum(tab: &TauTable, y_max: u64, form: QuadForm) -> Result<f64> {
    check_reduced(&form)?;
    if y_max as usize > tab.cutoff {
        return Err(Error::CutoffTooLarge(y_max as usize, tab.cutoff));
    }
    let mut counts = vec![0u64; y_max as usize + 1];
    for_each_value(&form, y_max, |v| counts[v as usize] += 1);
    // summing in n order keeps the result independent of the lattice walk
    Ok(counts
        .iter()
        .enumerate()
        .map(|(n, &c)| c as f64 * tab.lambda[n].abs())
        .sum())
}

#[derive(Clone, Debug, Serialize)]
pub struct SparseReport {
    pub y: u64,
    pub form: [i64; 3],
    pub sum: f64,
    /// S / (Y/√D)
    pub ratio_main: f64,
    /// S / (Y/√D + √(Y/q))
    pub ratio_shape: f64,
}

pub fn sparse_sum_report(tab: &TauTable, y_max: u64, form: QuadForm) -> Result<SparseReport> {
    let s = sparse_sum(tab, y_max, form)?;
    let dd = (-form.disc()) as f64;
    let y = y_max as f64;
    let main = y / dd.sqrt();
    Ok(SparseReport {
        y: y_max,
        form: [form.a, form.b, form.c],
        sum: s,
        ratio_main: s / main,
        ratio_shape: s / (main + (y / form.a as f64).sqrt()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SieveReport {
    pub x: u64,
    pub product: f64,
    /// Truncated Euler product for L(1, χ_E).
    pub l1_estimate: f64,
    /// product · L(1, χ_E) · log X
    pub normalized: f64,
}

/// Π_{3 ≤ p ≤ X} (1 − ρ_Q(p)/p²) with its L(1, χ_E) companion.
pub fn sieve_product(form: QuadForm, x: u64) -> SieveReport {
    let disc = form.disc();
    let mut product = 1.0;
    let mut l1 = 1.0;
    for p in primes_up_to(x as usize) {
        let chi = kronecker(disc, p) as f64;
        l1 /= 1.0 - chi / p as f64;
        if p >= 3 {
            product *= 1.0 - density(form, p) as f64 / (p * p) as f64;
        }
    }
    let logx = if x >= 2 { (x as f64).ln() } else { 0.0 };
    SieveReport { x, product, l1_estimate: l1, normalized: product * l1 * logx }
}

/// Σ_{a ≤ X, a squarefree} |λ(a)| ρ_Q(a) / a².
pub fn squarefree_sum(tab: &TauTable, form: QuadForm, x: u64) -> Result<f64> {
    if x as usize > tab.cutoff {
        return Err(Error::CutoffTooLarge(x as usize, tab.cutoff));
    }
    let x = x as usize;
    // multiplicative ρ over squarefree a from the prime values
    let mut rho = vec![1u64; x + 1];
    let mut sqfree = vec![true; x + 1];
    for p in primes_up_to(x) {
        let p = p as usize;
        let rp = density(form, p as u64);
        let mut j = p;
        while j <= x {
            rho[j] = rho[j].saturating_mul(rp);
            j += p;
        }
        if p * p <= x {
            let mut j = p * p;
            while j <= x {
                sqfree[j] = false;
                j += p * p;
            }
        }
    }
    Ok((1..=x)
        .filter(|&a| sqfree[a])
        .map(|a| tab.lambda[a].abs() * rho[a] as f64 / (a as f64 * a as f64))
        .sum())
}

/// Primes p ≤ P violating |λ(p)| ≤ 1 + ½λ(p²) − λ(p²)²/18 with
/// λ(p²) = λ(p)² − 1. Where p² is inside the table the relation λ(p²) =
/// λ(p)² − 1 is itself checked.
pub fn hecke_inequality_check(tab: &TauTable, p_max: u64) -> Result<Vec<u64>> {
    if p_max as usize > tab.cutoff {
        return Err(Error::CutoffTooLarge(p_max as usize, tab.cutoff));
    }
    let mut bad = Vec::new();
    for p in primes_up_to(p_max as usize) {
        let l = tab.lambda[p as usize];
        let l2 = l * l - 1.0;
        if (p * p) as usize <= tab.cutoff && (tab.lambda[(p * p) as usize] - l2).abs() > 1e-9 {
            bad.push(p);
            continue;
        }
        let rhs = 1.0 + 0.5 * l2 - l2 * l2 / 18.0;
        if l.abs() > rhs + HECKE_INEQUALITY_SLACK {
            bad.push(p);
        }
    }
    Ok(bad)
}

/// Dirichlet coefficients at primes together with the local roots of the
/// Euler factor, so both sides of Σ a(p)/p ≈ log L(1) can be evaluated.
pub trait EulerFamily {
    fn coefficient(&self, p: u64) -> f64;
    fn local_roots(&self, p: u64) -> Vec<Complex64>;
}

pub struct Zeta;

impl EulerFamily for Zeta {
    fn coefficient(&self, _p: u64) -> f64 {
        1.0
    }
    fn local_roots(&self, _p: u64) -> Vec<Complex64> {
        vec![Complex64::new(1.0, 0.0)]
    }
}

/// All-zero coefficients (empty Euler factors).
pub struct Trivial;

impl EulerFamily for Trivial {
    fn coefficient(&self, _p: u64) -> f64 {
        0.0
    }
    fn local_roots(&self, _p: u64) -> Vec<Complex64> {
        Vec::new()
    }
}

/// sym²Δ together with its twist by χ_E: coefficient λ(p²)(1 + χ_E(p)).
pub struct Sym2WithTwist<'a> {
    pub tab: &'a TauTable,
    pub disc: i64,
}

impl EulerFamily for Sym2WithTwist<'_> {
    fn coefficient(&self, p: u64) -> f64 {
        let l = self.tab.lambda[p as usize];
        (l * l - 1.0) * (1.0 + kronecker(self.disc, p) as f64)
    }
    fn local_roots(&self, p: u64) -> Vec<Complex64> {
        let l = self.tab.lambda[p as usize];
        // Satake parameter α with α + 1/α = λ(p), |α| = 1
        let disc = Complex64::new(l * l - 4.0, 0.0).sqrt();
        let alpha = (Complex64::new(l, 0.0) + disc) / 2.0;
        let sym2 = [alpha * alpha, Complex64::new(1.0, 0.0), (alpha * alpha).inv()];
        let chi = kronecker(self.disc, p) as f64;
        let mut roots = sym2.to_vec();
        if chi != 0.0 {
            roots.extend(sym2.iter().map(|r| r * chi));
        }
        roots
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimeLogReport {
    pub x: u64,
    pub prime_sum: f64,
    pub log_l1: f64,
    pub difference: f64,
}

/// Σ_{p ≤ x} a(p)/p against the truncated log L(1) = −Σ_p Σ_i log(1 − α_i/p).
pub fn prime_log_sum(family: &dyn EulerFamily, x: u64) -> PrimeLogReport {
    let mut s = 0.0;
    let mut log_l = 0.0;
    for p in primes_up_to(x as usize) {
        let pf = p as f64;
        s += family.coefficient(p) / pf;
        for r in family.local_roots(p) {
            log_l -= (Complex64::new(1.0, 0.0) - r / pf).ln().re;
        }
    }
    PrimeLogReport { x, prime_sum: s, log_l1: log_l, difference: s - log_l }
}
