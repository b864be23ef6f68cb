//! Special functions and quadrature rules: complex Γ, K-Bessel, Gauss–Legendre
//! nodes and double-exponential integration on (0, ∞).

use std::f64::consts::PI;

use num_complex::Complex64;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(z) for complex z (Lanczos, with reflection for Re z < 1/2).
pub fn gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (Complex64::new(PI, 0.0) * z).sin();
        return Complex64::new(PI, 0.0) / (s * gamma(Complex64::new(1.0, 0.0) - z));
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

/// Γ_ℝ(z) = π^{−z/2} Γ(z/2).
pub fn gamma_r(z: Complex64) -> Complex64 {
    Complex64::new(PI, 0.0).powc(-z / 2.0) * gamma(z / 2.0)
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// ∫₀^∞ f(r) dr by the exp-sinh substitution r = exp(π/2·sinh t), halving the
/// step until two successive trapezoid sums agree to `tol` (relative).
pub fn exp_sinh<F: Fn(f64) -> Complex64>(f: F, tol: f64) -> Option<Complex64> {
    let t_max = 6.5;
    let term = |t: f64| {
        let r = (PI / 2.0 * t.sinh()).exp();
        if r == 0.0 || !r.is_finite() {
            return Complex64::new(0.0, 0.0);
        }
        let w = r * PI / 2.0 * t.cosh();
        let v = f(r) * w;
        if v.re.is_finite() && v.im.is_finite() {
            v
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let mut h = 0.125;
    let n = (t_max / h) as i64;
    let mut sum: Complex64 = (-n..=n).map(|k| term(k as f64 * h)).sum();
    let mut prev = sum * h;
    for _ in 0..8 {
        // add the midpoints of the previous grid
        let n = (t_max / h) as i64;
        let mid: Complex64 = (-n..n).map(|k| term((k as f64 + 0.5) * h)).sum();
        sum += mid;
        h /= 2.0;
        let cur = sum * h;
        if (cur - prev).norm() <= tol * cur.norm().max(1e-300) {
            return Some(cur);
        }
        prev = cur;
    }
    None
}

/// K_ν(x) = ∫₀^∞ e^{−x cosh t} cosh(νt) dt for x > 0, by the trapezoid rule
/// (spectrally accurate for this entire, doubly-decaying integrand).
pub fn bessel_k(nu: Complex64, x: f64) -> Complex64 {
    assert!(x > 0.0, "bessel_k needs x > 0");
    let t_max = (2.0 * 60.0 / x).ln().max(1.0) + 2.0 + nu.re.abs();
    let h = 0.04;
    let n = (t_max / h).ceil() as usize;
    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..=n {
        let t = k as f64 * h;
        let e = (-x * t.cosh()).exp();
        if e == 0.0 {
            break;
        }
        let w = if k == 0 { 0.5 } else { 1.0 };
        s += w * e * (nu * t).cosh();
    }
    s * h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gamma_known_values() {
        assert!((gamma(c(0.5, 0.0)) - c(PI.sqrt(), 0.0)).norm() < 1e-14);
        let mut fact = 1.0;
        for n in 1..15 {
            assert!((gamma(c(n as f64, 0.0)).re - fact).abs() < 1e-13 * fact);
            fact *= n as f64;
        }
        let g = gamma(c(1.0, 1.0));
        assert!((g - c(0.498_015_668_118_356, -0.154_949_828_301_810_7)).norm() < 1e-14);
        // |Γ(1/2 + it)|² = π / cosh(πt), |Γ(it)|² = π / (t sinh πt)
        for t in [0.3, 1.0, 5.0, 12.0] {
            let a = gamma(c(0.5, t)).norm_sqr();
            assert!((a / (PI / (PI * t).cosh()) - 1.0).abs() < 1e-12);
            let b = gamma(c(0.0, t)).norm_sqr();
            assert!((b / (PI / (t * (PI * t).sinh())) - 1.0).abs() < 1e-12);
        }
        // functional equation Γ(z+1) = zΓ(z) across the reflection seam
        for z in [c(0.3, 2.0), c(-1.7, 0.4), c(2.5, -3.0)] {
            let lhs = gamma(z + 1.0);
            let rhs = z * gamma(z);
            assert!((lhs - rhs).norm() < 1e-13 * rhs.norm());
        }
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let nodes = gauss_legendre(20);
        for k in 0..40 {
            let q: f64 = nodes.iter().map(|&(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn exp_sinh_integrates_gaussian_moments() {
        let v = exp_sinh(|r| c((-r * r).exp(), 0.0), 1e-14).unwrap();
        assert!((v.re - PI.sqrt() / 2.0).abs() < 1e-14);
        let v = exp_sinh(|r| c(r.powf(-0.5) * (-r).exp(), 0.0), 1e-14).unwrap();
        assert!((v.re - PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bessel_k_closed_forms() {
        // K_{1/2}(x) = sqrt(π/(2x)) e^{−x}
        for x in [0.01, 0.3, 1.0, 4.0, 20.0] {
            let k = bessel_k(c(0.5, 0.0), x);
            let want = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!((k.re / want - 1.0).abs() < 1e-12, "x={x}");
            assert!(k.im.abs() < 1e-15);
        }
        // tabulated K₀(1), K₁(1)
        assert!((bessel_k(c(0.0, 0.0), 1.0).re - 0.421_024_438_240_708_3).abs() < 1e-14);
        assert!((bessel_k(c(1.0, 0.0), 1.0).re - 0.601_907_230_197_234_6).abs() < 1e-14);
        // K_ν = K_{−ν}
        let a = bessel_k(c(0.2, 3.0), 0.7);
        let b = bessel_k(c(-0.2, -3.0), 0.7);
        assert!((a - b).norm() < 1e-15);
    }
}
