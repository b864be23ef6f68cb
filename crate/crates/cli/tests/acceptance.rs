//! Acceptance suite: one PASS/FAIL line per criterion. Run with
//! `cargo test -p mixlab-cli --test acceptance`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mixlab::arith::{is_fundamental, is_squarefree, primes_up_to};
use mixlab::class_action::{action_law_violations, sphere_packets, ActionContext, GeneratorPolicy, SpherePackets};
use mixlab::eigenvalues::{build_tau, hecke_inequality_check};
use mixlab::local_factors::default_checks;
use mixlab::mixing::{invariant_harmonics, PacketSpectrum};
use mixlab::quadforms::{class_number, density_prime_power, reduced_forms, IdealClassId, QuadForm};
use mixlab::sphere::{admissible, enumerate_points};

const PARSEVAL_TOL: f64 = 1e-9;
const PARSEVAL_D_COUNT: usize = 200;
const PARSEVAL_D_MAX: u64 = 5000;
const L_MAX: u32 = 8;
const MINKOWSKI_D_MAX: u64 = 100_000;
const DENSITY_P_MAX: u64 = 100;
const DENSITY_K_MAX: u32 = 3;
const DENSITY_DISCS: usize = 10;
const DENSITY_SEED: u64 = 7;
const TAU_ORACLE_N: usize = 200;
const TAU_CUTOFF: usize = 100_000;
const HECKE_INEQUALITY_P_MAX: u64 = 10_000;
const LOCAL_SEED: u64 = 20240917;
const LOCAL_SAMPLES: usize = 1000;
const TREND_FACTOR: f64 = 1.5;
const TREND_SMALL: (u64, u64) = (40, 140);
const TREND_LARGE: (u64, u64) = (4000, 5000);
const MIXING_MIN_H: usize = 8;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn packet_ds(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&d| d > 3 && admissible(d) && is_squarefree(d)).collect()
}

/// 200 d spread evenly over the admissible squarefree d ≤ 5000.
fn sweep_ds() -> Vec<u64> {
    let all = packet_ds(4, PARSEVAL_D_MAX);
    (0..PARSEVAL_D_COUNT).map(|i| all[i * all.len() / PARSEVAL_D_COUNT]).collect()
}

fn build_sweep(ds: &[u64]) -> Result<Vec<SpherePackets>, String> {
    let mut ctx = ActionContext::new();
    ds.iter()
        .map(|&d| sphere_packets(&mut ctx, d, GeneratorPolicy::default()).map_err(|e| format!("d={d}: {e}")))
        .collect()
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

fn parseval(sweep: &[SpherePackets]) -> Verdict {
    // Harmonics outside this list vanish identically after symmetrization,
    // so their pairs hold with both sides exactly zero.
    let harmonics = invariant_harmonics(L_MAX);
    let mut worst: f64 = 0.0;
    let mut packets = 0;
    for sp in sweep {
        for pkt in &sp.packets {
            let r = PacketSpectrum::new(pkt, L_MAX).and_then(|s| s.parseval_residual(&harmonics));
            match r {
                Ok(r) => worst = worst.max(r),
                Err(e) => return verdict(false, format!("d={}: {e}", sp.d)),
            }
            packets += 1;
        }
    }
    verdict(
        worst < PARSEVAL_TOL,
        format!("{} d, {packets} packets, {} harmonics: max residual {worst:.2e} (tol {PARSEVAL_TOL:e})", sweep.len(), harmonics.len()),
    )
}

fn action_laws(sweep: &[SpherePackets]) -> Verdict {
    let mut ctx = ActionContext::new();
    let mut bad = Vec::new();
    for sp in sweep {
        for pkt in &sp.packets {
            match action_law_violations(&mut ctx, pkt) {
                Ok(v) => bad.extend(v),
                Err(e) => bad.push(e.to_string()),
            }
        }
    }
    let first = bad.first().cloned().unwrap_or_default();
    verdict(bad.is_empty(), format!("{} violations over {} d {first}", bad.len(), sweep.len()))
}

fn class_numbers(sweep: &[SpherePackets]) -> Verdict {
    let mut which: BTreeMap<&str, usize> = BTreeMap::new();
    let mut bad = Vec::new();
    for sp in sweep {
        let d = sp.d as i64;
        let kind = if sp.disc_matched == -d { "-d" } else if sp.disc_matched == -4 * d { "-4d" } else { "other" };
        *which.entry(kind).or_default() += 1;
        let h = class_number(sp.disc_matched).unwrap_or(0);
        if kind == "other" || sp.packets.iter().any(|p| p.len() != h) {
            bad.push(sp.d);
        }
    }
    let mut checked = 0;
    for d in (4..=PARSEVAL_D_MAX).filter(|&d| d % 8 == 3 && is_squarefree(d)) {
        checked += 1;
        if enumerate_points(d).len() != 24 * class_number(-(d as i64)).unwrap_or(0) {
            bad.push(d);
        }
    }
    verdict(
        bad.is_empty(),
        format!("packet sizes matched h(-d) for {} d and h(-4d) for {} d; |R_d| = 24h(-d) on {checked} d; bad {bad:?}",
            which.get("-d").unwrap_or(&0), which.get("-4d").unwrap_or(&0)),
    )
}

fn minkowski() -> Verdict {
    let mut classes = 0usize;
    let mut discs = 0usize;
    let mut bad = Vec::new();
    for d_abs in (3..=MINKOWSKI_D_MAX).filter(|&d| is_fundamental(d)) {
        discs += 1;
        let bound = 2.0 / PI * (d_abs as f64).sqrt() + 1.0;
        match reduced_forms(-(d_abs as i64)) {
            Ok(forms) => {
                classes += forms.len();
                bad.extend(forms.into_iter().filter(|f| f.a as f64 > bound).map(|f| (d_abs, f)));
            }
            Err(_) => bad.push((d_abs, QuadForm { a: 0, b: 0, c: 0 })),
        }
    }
    verdict(bad.is_empty(), format!("{discs} fundamental D, {classes} classes, {} violations", bad.len()))
}

/// #{(x, y) mod p^k : Q ≡ 0}. Direct double loop when p^{2k} is small;
/// otherwise each y = p^v·u is reduced to y = p^v by the substitution
/// x ↦ ux (homogeneity), and the x-loop stays exhaustive.
fn brute_density(f: QuadForm, p: u64, k: u32) -> u64 {
    let m = p.pow(k) as i128;
    let (a, b, c) = (f.a as i128, f.b as i128, f.c as i128);
    let q = |x: i128, y: i128| (a * x * x + b * x * y + c * y * y).rem_euclid(m);
    let roots = |y: i128| (0..m).filter(|&x| q(x, y) == 0).count() as u64;
    if m * m <= 4_000_000 {
        return (0..m).map(roots).sum();
    }
    let mut total = roots(0);
    for v in 0..k {
        let with_val = p.pow(k - v) - p.pow(k - v - 1);
        total += with_val * roots(p.pow(v) as i128);
    }
    total
}

fn density_check() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(DENSITY_SEED);
    let mut forms = Vec::new();
    while forms.len() < DENSITY_DISCS {
        let n: i64 = rng.gen_range(3..20_000);
        if !matches!(n % 4, 0 | 3) {
            continue;
        }
        let Ok(all) = reduced_forms(-n) else { continue };
        forms.push(all[rng.gen_range(0..all.len())]);
    }
    let primes: Vec<u64> = primes_up_to(DENSITY_P_MAX as usize).into_iter().filter(|&p| p > 2).collect();
    let mut cases = 0;
    let mut bad = Vec::new();
    for f in &forms {
        for &p in &primes {
            for k in 1..=DENSITY_K_MAX {
                cases += 1;
                if density_prime_power(*f, p, k) != brute_density(*f, p, k) {
                    bad.push((*f, p, k));
                }
            }
        }
    }
    let discs: Vec<i64> = forms.iter().map(|f| f.disc()).collect();
    verdict(bad.is_empty(), format!("{cases} cases over discriminants {discs:?}; mismatches {bad:?}"))
}

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

fn tau_table() -> Verdict {
    let tab = match build_tau(TAU_CUTOFF) {
        Ok(t) => t,
        Err(e) => return verdict(false, e.to_string()),
    };
    let oracle = naive_tau(TAU_ORACLE_N);
    let oracle_bad = (1..=TAU_ORACLE_N).filter(|&n| BigInt::from(tab.tau[n]) != oracle[n]).count();
    let hecke = tab.hecke_violations(TAU_CUTOFF).len();
    let deligne = tab.deligne_violations(TAU_CUTOFF).len();
    let ineq = hecke_inequality_check(&tab, HECKE_INEQUALITY_P_MAX).map(|v| v.len()).unwrap_or(usize::MAX);
    verdict(
        oracle_bad + hecke + deligne + ineq == 0,
        format!("oracle mismatches {oracle_bad} (n ≤ {TAU_ORACLE_N}), Hecke {hecke} (n ≤ {TAU_CUTOFF}), \
                 |λ(p)|>2 {deligne}, inequality {ineq} (p ≤ {HECKE_INEQUALITY_P_MAX})"),
    )
}

fn local_checks() -> Verdict {
    match default_checks(LOCAL_SEED, LOCAL_SAMPLES) {
        Ok(checks) => {
            let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| format!("{} {}", c.name, c.params)).collect();
            let mut by_name: BTreeMap<&str, usize> = BTreeMap::new();
            for c in &checks {
                *by_name.entry(&c.name).or_default() += 1;
            }
            verdict(failed.is_empty(), format!("{} checks {by_name:?}, {LOCAL_SAMPLES} samples per sampled case; failed {failed:?}", checks.len()))
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn trends() -> Verdict {
    let inv: Vec<_> = invariant_harmonics(L_MAX).into_iter().filter(|h| h.ell >= 1).collect();
    let mut ctx = ActionContext::new();
    let mut disc_median = Vec::new();
    let (mut small_q, mut large_q) = (Vec::new(), Vec::new());
    for (i, &(lo, hi)) in [TREND_SMALL, TREND_LARGE].iter().enumerate() {
        let mut disc = Vec::new();
        for d in packet_ds(lo, hi) {
            let sp = match sphere_packets(&mut ctx, d, GeneratorPolicy::default()) {
                Ok(sp) => sp,
                Err(e) => return verdict(false, format!("d={d}: {e}")),
            };
            for pkt in &sp.packets {
                let Ok(spec) = PacketSpectrum::new(pkt, L_MAX) else { return verdict(false, format!("d={d}")) };
                disc.push(spec.discrepancy(L_MAX).unwrap_or(f64::NAN));
                let g = &pkt.group;
                if i == 0 || g.class_number() < MIXING_MIN_H {
                    continue;
                }
                let quarter = ((-pkt.disc_matched) as f64).powf(0.25);
                for s in (0..g.class_number()).map(IdealClassId).filter(|&s| s != g.identity) {
                    let q = g.form(s).a as f64;
                    let stat = inv
                        .iter()
                        .map(|&h| spec.joint_period(s, h, h).map(f64::abs).unwrap_or(f64::NAN))
                        .fold(0.0, f64::max);
                    if q <= 3.0 {
                        small_q.push(stat);
                    }
                    if q > quarter {
                        large_q.push(stat);
                    }
                }
            }
        }
        disc_median.push(median(&disc));
    }
    let disc_ratio = disc_median[0] / disc_median[1];
    let (ms, ml) = (median(&small_q), median(&large_q));
    let mix_ratio = ms / ml;
    verdict(
        disc_ratio >= TREND_FACTOR && mix_ratio >= TREND_FACTOR,
        format!(
            "discrepancy median {:.4} on {TREND_SMALL:?} vs {:.4} on {TREND_LARGE:?} (ratio {disc_ratio:.2}); \
             |P| median {ms:.4} (q ≤ 3, n={}) vs {ml:.4} (q > D^1/4, n={}) (ratio {mix_ratio:.2}); need ≥ {TREND_FACTOR}",
            disc_median[0], disc_median[1], small_q.len(), large_q.len()
        ),
    )
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in fs::read_dir(dir).into_iter().flatten().flatten() {
        out.insert(e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap_or_default());
    }
    out
}

fn determinism() -> Verdict {
    let root = std::env::temp_dir().join(format!("mixlab-acceptance-{}", std::process::id()));
    let _ = fs::remove_dir_all(&root);
    let mut trees = Vec::new();
    for run in ["a", "b"] {
        let dir = root.join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_mixlab"))
            .args(["all", "--out-dir"])
            .arg(&dir)
            .env("MIXLAB_CACHE_DIR", root.join("cache"))
            .output();
        match status {
            Ok(o) if o.status.success() => trees.push(read_tree(&dir)),
            Ok(o) => return verdict(false, format!("run {run} exited {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr))),
            Err(e) => return verdict(false, e.to_string()),
        }
    }
    let differing: Vec<&String> = trees[0].iter().filter(|(k, v)| trees[1].get(*k) != Some(v)).map(|(k, _)| k).collect();
    let same_names = trees[0].keys().eq(trees[1].keys());
    let bytes: usize = trees[0].values().map(Vec::len).sum();
    let _ = fs::remove_dir_all(&root);
    verdict(
        same_names && differing.is_empty() && !trees[0].is_empty(),
        format!("{} files, {bytes} bytes; differing {differing:?}", trees[0].len()),
    )
}

fn main() -> ExitCode {
    let t0 = Instant::now();
    let ds = sweep_ds();
    let sweep = build_sweep(&ds);
    let sweep_result = |f: fn(&[SpherePackets]) -> Verdict| match &sweep {
        Ok(s) => f(s),
        Err(e) => verdict(false, e.clone()),
    };
    let criteria: [(&str, Box<dyn Fn() -> Verdict>); 9] = [
        ("parseval", Box::new(|| sweep_result(parseval))),
        ("action laws", Box::new(|| sweep_result(action_laws))),
        ("class numbers", Box::new(|| sweep_result(class_numbers))),
        ("minkowski bound", Box::new(minkowski)),
        ("density formula", Box::new(density_check)),
        ("tau table", Box::new(tau_table)),
        ("local identities", Box::new(local_checks)),
        ("equidistribution trends", Box::new(trends)),
        ("determinism", Box::new(determinism)),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = run();
        all &= v.pass;
        println!(
            "{} {} {name}: {} [{:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("total {:.1}s", t0.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
