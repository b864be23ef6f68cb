//! The experiment runners. Each one computes its sweep (in parallel over d
//! where there is one), merges the per-d results in d order, and writes
//! CSV/JSON/.dat files. Hard invariant failures are collected, not thrown;
//! I/O and cache problems are errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use mixlab::arith::{is_squarefree, omega, primes_up_to};
use mixlab::class_action::{action_law_violations, sphere_packets, ActionContext, GeneratorPolicy, SpherePackets};
use mixlab::eigenvalues::{
    build_tau, hecke_inequality_check, prime_log_sum, sieve_product, sparse_sum_report, squarefree_sum,
    EulerFamily, Sym2WithTwist, TauTable, Trivial, Zeta,
};
use mixlab::local_factors::default_checks;
use mixlab::mixing::{invariant_harmonics, PacketSpectrum};
use mixlab::quadforms::{class_number, minimal_represented, reduced_forms, ClassGroup, IdealClassId};
use mixlab::sphere::{admissible, canonicalize, enumerate_points, quotient};
use mixlab::Error;

use crate::config::{ExperimentConfig, ShiftPolicy};

pub const PARSEVAL_TOL: f64 = 1e-9;
pub const MIX_HEADER: &str = "d,packet_id,h_class,ell,m,chi_index,shift_index,q,value_re,value_im,parseval_residual";
/// Edges of the q/√D bins in the mixing summary.
pub const Q_BINS: [f64; 6] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.6];

#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

impl Outcome {
    fn absorb(&mut self, o: Outcome) {
        self.files.extend(o.files);
        self.failures.extend(o.failures);
    }
}

struct Out<'a> {
    dir: &'a Path,
    outcome: Outcome,
}

impl<'a> Out<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
        Ok(Out { dir: &cfg.out_dir, outcome: Outcome::default() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.outcome.files.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, v: &impl Serialize) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.write(name, &s)
    }

    fn fail(&mut self, msg: String) {
        eprintln!("invariant failed: {msg}");
        self.outcome.failures.push(msg);
    }
}

/// Maps `f` over `ds` on a bounded pool; results come back in input order.
fn sweep<T: Send>(cfg: &ExperimentConfig, ds: &[u64], f: impl Fn(u64) -> T + Sync + Send) -> Result<Vec<T>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build()?;
    Ok(pool.install(|| ds.par_iter().map(|&d| f(d)).collect()))
}

pub fn d_values(cfg: &ExperimentConfig) -> Vec<u64> {
    (cfg.d_min.max(1)..=cfg.d_max)
        .filter(|&d| !cfg.squarefree_only || is_squarefree(d))
        .collect()
}

/// The d for which packets exist: admissible, squarefree, d > 3.
pub fn packet_d_values(cfg: &ExperimentConfig) -> Vec<u64> {
    d_values(cfg)
        .into_iter()
        .filter(|&d| d > 3 && admissible(d) && is_squarefree(d))
        .collect()
}

fn policy(cfg: &ExperimentConfig) -> GeneratorPolicy {
    GeneratorPolicy { prime_bound: cfg.prime_cap, ..GeneratorPolicy::default() }
}

pub fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len();
    Some(if n % 2 == 1 { s[n / 2] } else { (s[n / 2 - 1] + s[n / 2]) / 2.0 })
}

pub fn run_forms(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Out::new(cfg)?;
    let per_d = sweep(cfg, &d_values(cfg), |d| -> mixlab::Result<_> {
        let mut discs = vec![-4 * d as i64];
        if d % 4 == 3 {
            discs.insert(0, -(d as i64));
        }
        let mut rows = String::new();
        let mut groups = Vec::new();
        let mut bad = Vec::new();
        for disc in discs {
            let g = ClassGroup::build(disc)?;
            let bound = 2.0 / std::f64::consts::PI * ((-disc) as f64).sqrt() + 1.0;
            for (i, f) in g.elements.iter().enumerate() {
                let q = minimal_represented(*f)?;
                if q as f64 > bound {
                    bad.push(format!("disc={disc}: class {f:?} has q={q} above {bound}"));
                }
                let order = g.order(IdealClassId(i));
                writeln!(rows, "{d},{disc},{i},{},{},{},{order},{q}", f.a, f.b, f.c).unwrap();
            }
            groups.push(json!({"d": d, "disc": disc, "h": g.class_number(), "structure": g.structure}));
        }
        Ok((d, rows, groups, bad))
    })?;
    let mut csv = String::from("d,disc,class_index,a,b,c,order,q\n");
    let mut dat = String::from("# d h(-4d)\n");
    let mut summary = Vec::new();
    for r in per_d {
        let (d, rows, groups, bad) = r?;
        csv.push_str(&rows);
        let h4 = groups.last().and_then(|g| g["h"].as_u64()).unwrap_or(0);
        writeln!(dat, "{d} {h4}").unwrap();
        summary.extend(groups);
        for b in bad {
            out.fail(b);
        }
    }
    out.write("forms.csv", &csv)?;
    out.write("class_numbers.dat", &dat)?;
    out.json("forms_summary.json", &summary)?;
    Ok(out.outcome)
}

pub fn run_sphere(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Out::new(cfg)?;
    let ds: Vec<u64> = d_values(cfg).into_iter().filter(|&d| admissible(d)).collect();
    let per_d = sweep(cfg, &ds, |d| -> mixlab::Result<_> {
        let pts = enumerate_points(d);
        let reps = quotient(d);
        let mut rows = String::new();
        for p in &pts {
            let c = canonicalize(*p);
            writeln!(rows, "{d},{},{},{},{},{}", p.x, p.y, p.z, (c.point == *p) as u8, c.orbit_size).unwrap();
        }
        let mut bad = Vec::new();
        let covered: usize = reps.iter().map(|r| r.orbit_size).sum();
        if covered != pts.len() {
            bad.push(format!("d={d}: orbits cover {covered} of {} points", pts.len()));
        }
        let mut h_minus_d = None;
        if d > 3 && d % 8 == 3 && is_squarefree(d) {
            let h = class_number(-(d as i64))?;
            h_minus_d = Some(h);
            if pts.len() != 24 * h {
                bad.push(format!("d={d}: {} points but 24·h(-d) = {}", pts.len(), 24 * h));
            }
        }
        let s = json!({"d": d, "points": pts.len(), "classes": reps.len(), "h_minus_d": h_minus_d});
        Ok((d, pts.len(), rows, s, bad))
    })?;
    let mut csv = String::from("d,x,y,z,canonical,orbit_size\n");
    let mut dat = String::from("# d points\n");
    let mut summary = Vec::new();
    for r in per_d {
        let (d, n, rows, s, bad) = r?;
        csv.push_str(&rows);
        writeln!(dat, "{d} {n}").unwrap();
        summary.push(s);
        for b in bad {
            out.fail(b);
        }
    }
    out.write("points.csv", &csv)?;
    out.write("point_counts.dat", &dat)?;
    out.json("sphere_summary.json", &summary)?;
    Ok(out.outcome)
}

/// Packets for d, or the error that aborted d.
fn packets_for(cfg: &ExperimentConfig, ctx: &mut ActionContext, d: u64) -> std::result::Result<SpherePackets, String> {
    sphere_packets(ctx, d, policy(cfg)).map_err(|e| {
        eprintln!("d={d}: aborted: {e}");
        e.to_string()
    })
}

pub fn run_orbit(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Out::new(cfg)?;
    let per_d = sweep(cfg, &packet_d_values(cfg), |d| {
        let mut ctx = ActionContext::new();
        let sp = packets_for(cfg, &mut ctx, d)?;
        let mut bad = Vec::new();
        let mut rows = String::new();
        let mut jsons = Vec::new();
        for (i, pkt) in sp.packets.iter().enumerate() {
            if pkt.len() != sp.class_number {
                bad.push(format!("d={d}: packet {i} has {} members, h = {}", pkt.len(), sp.class_number));
            }
            match action_law_violations(&mut ctx, pkt) {
                Ok(v) => bad.extend(v),
                Err(e) => bad.push(format!("d={d}: {e}")),
            }
            let gens: Vec<String> = pkt.generators.iter().map(|g| format!("{}:{}", g.p, g.rho)).collect();
            writeln!(
                rows,
                "{d},{},{i},{},{},{},{},{}",
                sp.disc_matched,
                pkt.len(),
                sp.class_number,
                gens.join(" "),
                sp.packets.len(),
                1u64 << omega(d)
            )
            .unwrap();
            let mut j = pkt.to_json();
            j["packet_id"] = json!(i);
            jsons.push(j);
        }
        Ok::<_, String>((d, sp.packets.len(), rows, jsons, bad))
    })?;
    let mut csv = String::from("d,disc_matched,packet_id,size,h_class,generators,packets_for_d,two_pow_omega\n");
    let mut dat = String::from("# d packets\n");
    let mut all = Vec::new();
    for (d, r) in packet_d_values(cfg).into_iter().zip(per_d) {
        match r {
            Ok((d, n, rows, jsons, bad)) => {
                csv.push_str(&rows);
                writeln!(dat, "{d} {n}").unwrap();
                all.extend(jsons);
                for b in bad {
                    out.fail(b);
                }
            }
            Err(e) => out.fail(format!("d={d}: {e}")),
        }
    }
    out.write("packets.csv", &csv)?;
    out.write("packet_counts.dat", &dat)?;
    out.json("packets.json", &all)?;
    Ok(out.outcome)
}

fn shifts(policy: &ShiftPolicy, g: &ClassGroup) -> Vec<usize> {
    let h = g.class_number();
    match policy {
        ShiftPolicy::All => (0..h).collect(),
        ShiftPolicy::MinimalQ => (0..h)
            .filter(|&s| s != g.identity.0)
            .min_by_key(|&s| (g.elements[s].a, s))
            .into_iter()
            .collect(),
        ShiftPolicy::Explicit(v) => v.iter().copied().filter(|&s| s < h).collect(),
    }
}

struct MixD {
    d: u64,
    disc_matched: i64,
    class_number: usize,
    packets: usize,
    rows: String,
    /// (q/√D, max_ℓ≥1 |𝒫|) for every non-identity shift.
    periods: Vec<(f64, f64)>,
    discrepancy: f64,
    residual: f64,
}

fn mix_one(cfg: &ExperimentConfig, d: u64) -> std::result::Result<MixD, String> {
    let mut ctx = ActionContext::new();
    let sp = packets_for(cfg, &mut ctx, d)?;
    let harmonics = invariant_harmonics(cfg.l_max);
    let e = |e: Error| format!("d={d}: {e}");
    let mut res = MixD {
        d,
        disc_matched: sp.disc_matched,
        class_number: sp.class_number,
        packets: sp.packets.len(),
        rows: String::new(),
        periods: Vec::new(),
        discrepancy: 0.0,
        residual: 0.0,
    };
    let root_d = ((-sp.disc_matched) as f64).sqrt();
    let mut rows = String::new();
    for (pid, pkt) in sp.packets.iter().enumerate() {
        let spec = PacketSpectrum::new(pkt, cfg.l_max).map_err(e)?;
        let g = &pkt.group;
        let h = g.class_number();
        let pr = spec.parseval_residual(&harmonics).map_err(e)?;
        res.residual = res.residual.max(pr);
        res.discrepancy = res.discrepancy.max(spec.discrepancy(cfg.l_max).map_err(e)?);
        let mut row = |ell: u32, m: i32, chi: String, shift: String, q: String, re: f64, im: f64| {
            writeln!(rows, "{d},{pid},{h},{ell},{m},{chi},{shift},{q},{re},{im},{pr:e}").unwrap();
        };
        for &hm in &harmonics {
            row(hm.ell, hm.m, String::new(), String::new(), String::new(), spec.weyl_sum(hm).map_err(e)?, 0.0);
        }
        for &hm in &harmonics {
            for c in g.characters() {
                let w = spec.twisted_weyl(hm, c).map_err(e)?;
                row(hm.ell, hm.m, c.0.to_string(), String::new(), String::new(), w.re, w.im);
            }
        }
        for s in shifts(&cfg.shift_policy, g) {
            let sid = IdealClassId(s);
            let q = minimal_represented(g.form(sid)).map_err(e)?;
            let mut worst: f64 = 0.0;
            for &hm in &harmonics {
                let v = spec.joint_period(sid, hm, hm).map_err(e)?;
                if hm.ell >= 1 {
                    worst = worst.max(v.abs());
                }
                row(hm.ell, hm.m, String::new(), s.to_string(), q.to_string(), v, 0.0);
            }
            if s != g.identity.0 {
                res.periods.push((q as f64 / root_d, worst));
            }
        }
    }
    res.rows = rows;
    Ok(res)
}

pub fn run_mix(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Out::new(cfg)?;
    let ds = packet_d_values(cfg);
    let per_d = sweep(cfg, &ds, |d| mix_one(cfg, d))?;
    let mut csv = format!("{MIX_HEADER}\n");
    let mut disc_dat = String::from("# d discrepancy\n");
    let mut period_dat = String::from("# q/sqrt(D) max|P|\n");
    let mut per_d_summary = Vec::new();
    let mut aborted = Vec::new();
    let mut worst: f64 = 0.0;
    let mut packet_count = 0;
    let mut binned: Vec<Vec<f64>> = vec![Vec::new(); Q_BINS.len() - 1];
    for (d, r) in ds.iter().zip(per_d) {
        let m = match r {
            Ok(m) => m,
            Err(msg) => {
                aborted.push(json!({"d": d, "error": msg}));
                out.fail(format!("d={d}: {msg}"));
                continue;
            }
        };
        csv.push_str(&m.rows);
        writeln!(disc_dat, "{} {}", m.d, m.discrepancy).unwrap();
        for &(x, p) in &m.periods {
            writeln!(period_dat, "{x} {p}").unwrap();
            if let Some(b) = Q_BINS.windows(2).position(|w| w[0] <= x && x < w[1]) {
                binned[b].push(p);
            }
        }
        if m.residual >= PARSEVAL_TOL {
            out.fail(format!("d={}: Parseval residual {}", m.d, m.residual));
        }
        worst = worst.max(m.residual);
        packet_count += m.packets;
        per_d_summary.push(json!({"d": m.d, "disc_matched": m.disc_matched, "class_number": m.class_number,
            "packets": m.packets, "discrepancy": m.discrepancy, "parseval_residual": m.residual}));
    }
    let bins: Vec<_> = Q_BINS
        .windows(2)
        .zip(&binned)
        .map(|(w, v)| json!({"lo": w[0], "hi": w[1], "count": v.len(), "median_abs_period": median(v)}))
        .collect();
    let summary = json!({
        "l_max": cfg.l_max,
        "shift_policy": cfg.shift_policy.to_string(),
        "d_count": per_d_summary.len(),
        "packet_count": packet_count,
        "max_parseval_residual": worst,
        "parseval_ok": worst < PARSEVAL_TOL,
        "aborted": aborted,
        "period_bins_by_q_over_sqrt_disc": bins,
        "per_d": per_d_summary,
    });
    out.write("mixing.csv", &csv)?;
    out.write("discrepancy.dat", &disc_dat)?;
    out.write("period_vs_q.dat", &period_dat)?;
    out.json("mix_summary.json", &summary)?;
    Ok(out.outcome)
}

pub fn tau_cache_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.cache_dir.join(format!("tau_{}.txt", cfg.tau_cutoff))
}

/// Reads the τ cache, or builds and persists it when absent. A cache that
/// fails its checks is refused rather than rebuilt.
pub fn load_or_build_tau(cfg: &ExperimentConfig) -> Result<(TauTable, bool)> {
    let path = tau_cache_path(cfg);
    if path.exists() {
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        return match TauTable::from_cache_str(&text) {
            Ok(t) if t.cutoff == cfg.tau_cutoff => Ok((t, true)),
            Ok(t) => bail!("refusing cache {}: cutoff {} != {}", path.display(), t.cutoff, cfg.tau_cutoff),
            Err(e) => bail!("refusing cache {}: {e}; delete it to rebuild", path.display()),
        };
    }
    let tab = build_tau(cfg.tau_cutoff)?;
    fs::create_dir_all(&cfg.cache_dir).with_context(|| format!("creating {}", cfg.cache_dir.display()))?;
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, tab.to_cache_string()).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, &path)?;
    Ok((tab, false))
}

/// Decades up to the cutoff, plus the cutoff itself.
fn sum_lengths(cutoff: usize) -> Vec<u64> {
    let mut v: Vec<u64> = (3..8).map(|e| 10u64.pow(e)).filter(|&y| y < cutoff as u64).collect();
    if cutoff >= 1 {
        v.push(cutoff as u64);
    }
    v
}

pub fn run_sums(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Out::new(cfg)?;
    let (tab, hit) = load_or_build_tau(cfg)?;
    eprintln!("tau table to {} ({})", tab.cutoff, if hit { "cache" } else { "built" });
    let forms: Vec<_> = [-23i64, -20].iter().map(|&d| reduced_forms(d)).collect::<mixlab::Result<Vec<_>>>()?;
    let forms: Vec<_> = forms.into_iter().flatten().collect();
    let lengths = sum_lengths(tab.cutoff);

    let mut sparse = String::from("y,disc,a,b,c,sum,ratio_main,ratio_shape\n");
    let mut sieve = String::from("x,disc,a,b,c,product,l1_estimate,normalized,squarefree_sum\n");
    let mut ratio_dat = String::from("# Y S(Y)/(Y/log Y) for (1,1,6)\n");
    for f in &forms {
        for &y in &lengths {
            let r = sparse_sum_report(&tab, y, *f)?;
            writeln!(sparse, "{y},{},{},{},{},{},{},{}", f.disc(), f.a, f.b, f.c, r.sum, r.ratio_main, r.ratio_shape)
                .unwrap();
            if (f.a, f.b, f.c) == (1, 1, 6) {
                writeln!(ratio_dat, "{y} {}", r.ratio_main).unwrap();
            }
            let s = sieve_product(*f, y);
            let q = squarefree_sum(&tab, *f, y)?;
            writeln!(sieve, "{y},{},{},{},{},{},{},{},{q}", f.disc(), f.a, f.b, f.c, s.product, s.l1_estimate, s.normalized)
                .unwrap();
        }
    }
    let sym2 = Sym2WithTwist { tab: &tab, disc: -23 };
    let families: [(&str, &dyn EulerFamily); 3] = [("zeta", &Zeta), ("trivial", &Trivial), ("sym2_twist_-23", &sym2)];
    let mut primelog = String::from("family,x,prime_sum,log_l1,difference\n");
    for (name, fam) in families {
        for &x in &lengths {
            let r = prime_log_sum(fam, x);
            writeln!(primelog, "{name},{x},{},{},{}", r.prime_sum, r.log_l1, r.difference).unwrap();
        }
    }
    let mut lambda_dat = String::from("# p lambda(p)\n");
    for p in primes_up_to(tab.cutoff.min(10_000)) {
        writeln!(lambda_dat, "{p} {}", tab.lambda[p as usize]).unwrap();
    }

    let hecke = tab.hecke_violations(tab.cutoff);
    let deligne = tab.deligne_violations(tab.cutoff);
    let inequality = hecke_inequality_check(&tab, tab.cutoff as u64)?;
    if !hecke.is_empty() {
        out.fail(format!("Hecke relations fail at {} values of n, first {}", hecke.len(), hecke[0]));
    }
    if !deligne.is_empty() {
        out.fail(format!("|lambda(p)| > 2 at p = {deligne:?}"));
    }
    if !inequality.is_empty() {
        out.fail(format!("Hecke inequality fails at p = {inequality:?}"));
    }
    let summary = json!({
        "tau_cutoff": tab.cutoff,
        "hecke_violations": hecke,
        "deligne_violations": deligne,
        "hecke_inequality_violations": inequality,
    });
    out.write("sums_sparse.csv", &sparse)?;
    out.write("sums_sieve.csv", &sieve)?;
    out.write("sums_primelog.csv", &primelog)?;
    out.write("sparse_ratio.dat", &ratio_dat)?;
    out.write("lambda_p.dat", &lambda_dat)?;
    out.json("sums_summary.json", &summary)?;
    Ok(out.outcome)
}

pub fn run_local(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Out::new(cfg)?;
    let checks = default_checks(cfg.seed, cfg.local_samples)?;
    let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
    for c in &failed {
        out.fail(format!("local check {} failed at {}", c.name, c.params));
    }
    let mut dat = String::from("# check_index residual\n");
    for (i, c) in checks.iter().enumerate() {
        writeln!(dat, "{i} {}", c.residual).unwrap();
    }
    let summary = json!({
        "seed": cfg.seed,
        "samples": cfg.local_samples,
        "total": checks.len(),
        "passed": checks.len() - failed.len(),
        "failed": failed.iter().map(|c| json!({"name": c.name, "params": c.params})).collect::<Vec<_>>(),
    });
    out.json("local_checks.json", &checks)?;
    out.write("local_residuals.dat", &dat)?;
    out.json("local_summary.json", &summary)?;
    Ok(out.outcome)
}

pub fn run_all(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut total = Outcome::default();
    for run in [run_forms, run_sphere, run_orbit, run_mix, run_sums, run_local] {
        total.absorb(run(cfg)?);
    }
    let mut out = Out::new(cfg)?;
    out.write("config.txt", &cfg.to_kv_string())?;
    total.absorb(out.outcome);
    Ok(total)
}
