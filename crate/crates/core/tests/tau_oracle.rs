use mixlab::arith::primes_up_to;
use mixlab::eigenvalues::{build_tau, hecke_inequality_check, TauTable};
use num_bigint::BigInt;

/// q·Π_{n<N}(1 − qⁿ)^24 expanded term by term in big integers.
fn naive_tau(n_max: usize) -> Vec<BigInt> {
    let mut poly = vec![BigInt::from(0); n_max];
    poly[0] = BigInt::from(1);
    for n in 1..n_max {
        for _ in 0..24 {
            for i in (n..n_max).rev() {
                let t = poly[i - n].clone();
                poly[i] -= t;
            }
        }
    }
    let mut tau = vec![BigInt::from(0)];
    tau.extend(poly);
    tau
}

#[test]
fn matches_naive_expansion_to_200() {
    let oracle = naive_tau(200);
    let tab = build_tau(200).unwrap();
    for n in 1..=200 {
        assert_eq!(BigInt::from(tab.tau[n]), oracle[n], "n={n}");
    }
    assert_eq!(tab.tau[2], -24);
    assert_eq!(tab.tau[12], -370944);
}

#[test]
fn hecke_deligne_and_inequality_to_1e5() {
    let tab = build_tau(100_000).unwrap();
    assert!(tab.hecke_violations(100_000).is_empty());
    assert!(tab.deligne_violations(100_000).is_empty());
    assert!(hecke_inequality_check(&tab, 10_000).unwrap().is_empty());
    // λ(p) is far from trivially small on average
    let ps = primes_up_to(10_000);
    let mean_sq: f64 = ps.iter().map(|&p| tab.lambda[p as usize].powi(2)).sum::<f64>() / ps.len() as f64;
    assert!((mean_sq - 1.0).abs() < 0.1, "{mean_sq}");
}

#[test]
fn cache_roundtrip_and_corruption() {
    let tab = build_tau(3000).unwrap();
    let s = tab.to_cache_string();
    let back = TauTable::from_cache_str(&s).unwrap();
    assert_eq!(back.tau, tab.tau);
    let broken = s.replacen("-24\n", "-25\n", 1);
    assert!(TauTable::from_cache_str(&broken).is_err());
    let truncated: String = s.lines().take(100).map(|l| format!("{l}\n")).collect();
    assert!(TauTable::from_cache_str(&truncated).is_err());
}
