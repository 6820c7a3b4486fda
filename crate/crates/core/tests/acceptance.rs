//! Acceptance criteria, one line per criterion.
//!
//! Runs without the libtest harness so that every criterion is executed and
//! reported even when an earlier one fails; the process exits nonzero if any
//! criterion fails.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use gonal_core::abelianization::{abelian_invariants, smith_normal_form, IntegerMatrix};
use gonal_core::experiments::{run_trial, sweep, Analyses, GridSpec, ScaledPoint, Status, SweepConfig, TrialOptions};
use gonal_core::fa::{
    check_l_exact, check_sl_exact, l_set_size, sl_upper_bound, verify_l_witness,
    verify_sl_witness, LMode, Verdict,
};
use gonal_core::freeness::{certify_free, replay_certificate};
use gonal_core::hypergraph::verify_edge_lower_bound;
use gonal_core::model::{sample, sample_uniform_word, stream_rng, ModelParams};
use gonal_core::words::{count_cyclically_reduced, enumerate_cyclically_reduced, Word};
use gonal_core::{ModelKind, Presentation};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    ensure(
        start.elapsed() < limit,
        format!("took {:.1?}, limit {limit:?}", start.elapsed()),
    )
}

// Brute force: all sequences over the 2m signed letters, filtered by the
// definition of cyclic reduction.
fn brute_force_count(m: i32, len: u32) -> u64 {
    let letters: Vec<i32> = (1..=m).flat_map(|g| [g, -g]).collect();
    let mut count = 0;
    let total = (letters.len() as u64).pow(len);
    for mut code in 0..total {
        let mut w = Vec::with_capacity(len as usize);
        for _ in 0..len {
            w.push(letters[(code % letters.len() as u64) as usize]);
            code /= letters.len() as u64;
        }
        let reduced = w.windows(2).all(|p| p[0] != -p[1]);
        if reduced && (len == 1 || w[0] != -w[len as usize - 1]) {
            count += 1;
        }
    }
    count
}

fn c1_word_count() -> Outcome {
    let start = Instant::now();
    for m in 1..=3u32 {
        for len in 1..=6u32 {
            let oracle = brute_force_count(m as i32, len);
            let formula = count_cyclically_reduced(m, len).to_u64().unwrap();
            let words: Vec<Word> = enumerate_cyclically_reduced(m, len)
                .map_err(|e| e.to_string())?
                .collect();
            let distinct: HashSet<&Word> = words.iter().collect();
            ensure(
                formula == oracle && words.len() as u64 == oracle && distinct.len() == words.len(),
                format!("m={m} len={len}: formula {formula}, enumeration {}, oracle {oracle}", words.len()),
            )?;
            ensure(
                words.iter().all(|w| w.is_cyclically_reduced() == Ok(true)),
                format!("m={m} len={len}: enumerated a word that is not cyclically reduced"),
            )?;
        }
    }
    ensure(count_cyclically_reduced(2, 3) == 28u32.into(), "(2,3) != 28")?;
    within(start, Duration::from_secs(5))?;
    Ok(format!("18 (m, len) pairs match brute force in {:.2?}", start.elapsed()))
}

fn c2_sampler_uniformity() -> Outcome {
    let start = Instant::now();
    let universe: Vec<Word> = enumerate_cyclically_reduced(2, 3).unwrap().collect();
    let index: HashMap<&Word, usize> = universe.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut counts = vec![0u64; universe.len()];
    let mut rng = stream_rng(2024, 0);
    let draws = 1_000_000u64;
    for _ in 0..draws {
        let w = sample_uniform_word(2, 3, &mut rng);
        let i = *index
            .get(&w)
            .ok_or_else(|| format!("sampled {w} is not cyclically reduced"))?;
        counts[i] += 1;
    }
    let expected = draws as f64 / universe.len() as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dist = ChiSquared::new((universe.len() - 1) as f64).unwrap();
    let pval = 1.0 - dist.cdf(chi2);
    ensure(pval > 1e-3, format!("chi2 = {chi2:.2}, p-value {pval:.2e}"))?;
    within(start, Duration::from_secs(10))?;
    Ok(format!("chi2 = {chi2:.2} on 27 dof, p-value {pval:.3}"))
}

fn relator_counts(kind: ModelKind, m: u32, len: u32, p: f64, trials: u64, seed: u64) -> Vec<Presentation> {
    (0..trials)
        .map(|t| sample(kind, &ModelParams::probability(m, len, p, seed + t)).unwrap())
        .collect()
}

fn c3_many_relators() -> Outcome {
    let m = 200u32;
    let p = 4.0 / f64::from(m * m);
    let samples = relator_counts(ModelKind::Binomial, m, 3, p, 100, 300);
    let hits = samples.iter().filter(|s| s.num_relators() >= 3 * m as usize).count();
    let frac = hits as f64 / 100.0;
    ensure(frac >= 0.95, format!("fraction |R| >= 3m is {frac}"))?;
    let min = samples.iter().map(|s| s.num_relators()).min().unwrap();
    Ok(format!("fraction |R| >= 600 is {frac} (min |R| = {min})"))
}

fn c4_unused_generators() -> Outcome {
    let m = 400u32;
    let len = 3u32;
    let mf = f64::from(m);
    let p = (1.0 / f64::from(len)) * 2f64.powi(-(len as i32) - 2) * mf.ln() * mf.powf(1.0 - f64::from(len));
    let samples = relator_counts(ModelKind::Binomial, m, len, p, 100, 400);
    let hits = samples
        .iter()
        .filter(|s| 4 * s.unused_generators().len().pow(2) >= m as usize)
        .count();
    let frac = hits as f64 / 100.0;
    ensure(frac >= 0.9, format!("fraction unused >= 10 is {frac}"))?;
    let min = samples.iter().map(|s| s.unused_generators().len()).min().unwrap();
    Ok(format!("fraction with >= 10 unused generators is {frac} (min {min})"))
}

fn c5_regime_separation() -> Outcome {
    let start = Instant::now();
    let cfg = SweepConfig {
        m: vec![100],
        ell: 3,
        model: ModelKind::Binomial,
        grid: GridSpec {
            scaled: Some(vec![ScaledPoint { c: 0.05, a: 0.0 }, ScaledPoint { c: 20.0, a: 1.0 }]),
            ..GridSpec::default()
        },
        trials: 100,
        seed: 5,
        epsilon: 0.01,
        analyses: Analyses { diagnostics: false, fa: false, ..Analyses::default() },
        budgets: Default::default(),
        threads: None,
    };
    let res = sweep(&cfg).map_err(|e| e.to_string())?;
    let f1 = res.points[0].frac_free().unwrap();
    let f2 = res.points[1].frac_free().unwrap();
    let s2 = res.points[1].frac_surj().unwrap();
    ensure(f1 - f2 >= 0.5, format!("frac_free {f1} vs {f2}"))?;
    ensure(s2 <= 0.1, format!("frac_surjZ at p2 is {s2}"))?;
    within(start, Duration::from_secs(120))?;
    Ok(format!("frac_free {f1} -> {f2}, frac_surjZ(p2) = {s2}, {:.1?}", start.elapsed()))
}

fn c6_certificate_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut successes = 0;
    for i in 0..1000u64 {
        let m = rng.random_range(3..=12u32);
        let len = rng.random_range(3..=4u32);
        let kind = if i % 2 == 0 { ModelKind::Binomial } else { ModelKind::Positive };
        let c = [0.05, 0.3, 1.0, 3.0, 10.0][rng.random_range(0..5)];
        let mf = f64::from(m);
        let p = (c * mf.ln() * mf.powf(1.0 - f64::from(len))).min(1.0);
        let pres = sample(kind, &ModelParams::probability(m, len, p, 6000 + i)).unwrap();
        if let Some(cert) = certify_free(&pres).certificate() {
            successes += 1;
            ensure(replay_certificate(&pres, cert), format!("replay failed for sample {i}"))?;
            let inv = abelian_invariants(&pres);
            ensure(
                inv.betti as i64 == cert.final_rank && inv.torsion.is_empty(),
                format!("sample {i}: rank {} but abelianization {inv}", cert.final_rank),
            )?;
        }
    }
    ensure(successes > 100, format!("only {successes} certified samples"))?;
    Ok(format!("{successes}/1000 certified, all replayed and abelian-consistent"))
}

fn det(a: &[Vec<BigInt>]) -> BigInt {
    let n = a.len();
    if n == 1 {
        return a[0][0].clone();
    }
    let mut total = BigInt::zero();
    for j in 0..n {
        let minor: Vec<Vec<BigInt>> = a[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = &a[0][j] * det(&minor);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

// d_k = D_k / D_{k-1}, with D_k the gcd of all k x k minors.
fn gcd_of_minors_invariants(a: &[Vec<i64>]) -> Vec<BigInt> {
    let (r, c) = (a.len(), a[0].len());
    let mut out = Vec::new();
    let mut prev = BigInt::from(1);
    for k in 1..=r.min(c) {
        let mut g = BigInt::zero();
        for rows in subsets(r, k) {
            for cols in subsets(c, k) {
                let sub: Vec<Vec<BigInt>> = rows
                    .iter()
                    .map(|&i| cols.iter().map(|&j| BigInt::from(a[i][j])).collect())
                    .collect();
                g = g.gcd(&det(&sub));
            }
        }
        if g.is_zero() {
            break;
        }
        out.push(&g / &prev);
        prev = g;
    }
    out
}

fn random_unimodular(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for _ in 0..3 * n {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i != j {
            let f = rng.random_range(-2..=2i64);
            for col in 0..n {
                u[i][col] += f * u[j][col];
            }
        } else if rng.random_bool(0.5) {
            u[i].iter_mut().for_each(|x| *x = -*x);
        }
    }
    u
}

fn mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    a.iter()
        .map(|row| (0..b[0].len()).map(|j| row.iter().zip(b).map(|(x, r)| x * r[j]).sum()).collect())
        .collect()
}

fn c7_snf_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for t in 0..200 {
        let r = rng.random_range(1..=5usize);
        let c = rng.random_range(1..=5usize);
        let a: Vec<Vec<i64>> = (0..r).map(|_| (0..c).map(|_| rng.random_range(-3..=3)).collect()).collect();
        let snf = smith_normal_form(&IntegerMatrix::from_rows(a.clone(), c));
        let oracle = gcd_of_minors_invariants(&a);
        ensure(snf == oracle, format!("matrix {t} {a:?}: {snf:?} vs oracle {oracle:?}"))?;
        let b = mul(&mul(&random_unimodular(r, &mut rng), &a), &random_unimodular(c, &mut rng));
        let snf_b = smith_normal_form(&IntegerMatrix::from_rows(b.clone(), c));
        ensure(snf_b == snf, format!("matrix {t}: invariants changed under unimodular product"))?;
        ensure(snf.iter().all(|d| d.is_positive()), "nonpositive invariant")?;
    }
    Ok("200 matrices agree with the gcd-of-minors oracle and are unimodular-invariant".into())
}

// Naive (L): every tuple of size-s subsets, checked against every relator.
fn naive_l(pres: &Presentation, s: usize) -> bool {
    let m = pres.m as usize;
    let sets = subsets(m, s);
    let len = pres.len as usize;
    let mut idx = vec![0usize; len];
    loop {
        let hit = pres.relators().iter().any(|r| {
            r.letters()
                .iter()
                .enumerate()
                .all(|(i, l)| sets[idx[i]].contains(&(l.generator() as usize - 1)))
        });
        if !hit {
            return false;
        }
        let mut i = 0;
        loop {
            if i == len {
                return true;
            }
            idx[i] += 1;
            if idx[i] < sets.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

// Naive (SL): every nonempty U up to the size bound.
fn naive_sl(pres: &Presentation, k: usize) -> bool {
    let m = pres.m;
    (1u32..1 << m).filter(|u| u.count_ones() as usize <= k).all(|u| {
        let in_u = |g: u32| u >> (g - 1) & 1 == 1;
        pres.relators().iter().any(|r| {
            let ls = r.letters();
            in_u(ls[0].generator()) && ls[1..].iter().all(|l| !in_u(l.generator()))
        })
    })
}

fn c8_fa_checker_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut l_holds, mut sl_holds) = (0, 0);
    for t in 0..100u64 {
        let m = rng.random_range(2..=6u32);
        let p = [0.2, 0.5, 0.8, 0.95, 1.0][rng.random_range(0..5)];
        let eps = [0.01, 0.2, 0.34, 0.5][rng.random_range(0..4)];
        let pres = sample(ModelKind::Positive, &ModelParams::probability(m, 3, p, 8000 + t)).unwrap();
        let l = check_l_exact(&pres, eps, LMode::PositiveLetters).map_err(|e| e.to_string())?;
        let sl = check_sl_exact(&pres, eps).map_err(|e| e.to_string())?;
        let nl = naive_l(&pres, l_set_size(eps, m));
        let nsl = naive_sl(&pres, sl_upper_bound(eps, m));
        ensure(l.holds() == nl, format!("sample {t}: L checker {} vs naive {nl}", l.holds()))?;
        ensure(sl.holds() == nsl, format!("sample {t}: SL checker {} vs naive {nsl}", sl.holds()))?;
        if let Some(w) = l.witness() {
            ensure(verify_l_witness(&pres, eps, w), format!("sample {t}: bad L witness"))?;
        }
        if let Some(w) = sl.witness() {
            ensure(verify_sl_witness(&pres, eps, w), format!("sample {t}: bad SL witness"))?;
        }
        l_holds += usize::from(nl);
        sl_holds += usize::from(nsl);
    }
    Ok(format!("100 presentations agree ((L) held {l_holds}x, (SL) held {sl_holds}x)"))
}

fn c9_exclusivity() -> Outcome {
    let mut records = Vec::new();
    for (model, ms, seed) in [
        (ModelKind::Positive, vec![2, 3, 4, 5, 6, 8], 90),
        (ModelKind::Binomial, vec![2, 3, 4, 6, 8], 91),
    ] {
        let cfg = SweepConfig {
            m: ms,
            ell: 3,
            model,
            grid: GridSpec {
                p: Some(vec![0.001, 0.01, 0.05, 0.2, 0.5, 0.8, 0.95, 1.0]),
                ..GridSpec::default()
            },
            trials: 20,
            seed,
            epsilon: 0.01,
            analyses: Analyses::default(),
            budgets: Default::default(),
            threads: None,
        };
        records.extend(sweep(&cfg).map_err(|e| e.to_string())?.records);
    }
    let mut fa = 0;
    for r in &records {
        let free_positive = r.free == Some(true) && r.final_rank.is_some_and(|k| k >= 1);
        let fa_flags = r.l == Status::Holds && r.sl == Status::Holds && r.unused_generators == 0;
        ensure(!(free_positive && fa_flags), format!("free and FA at {r:?}"))?;
        if r.verdict == Verdict::FaCertified {
            fa += 1;
            ensure(r.surjects_z == Some(false), format!("FA but surjects onto Z at {r:?}"))?;
        }
    }
    ensure(fa > 0, "no FACertified trial in the sweep")?;
    Ok(format!("{} trials, {fa} FACertified, no violations", records.len()))
}

fn c10_edge_bound() -> Outcome {
    let start = Instant::now();
    let mut checked = 0u64;
    for len in 3..=20u64 {
        for k in len + 1..=10_000 {
            ensure(
                verify_edge_lower_bound(len, k) == Ok(true),
                format!("fails at len={len}, k={k}"),
            )?;
            checked += 1;
        }
    }
    within(start, Duration::from_secs(5))?;
    Ok(format!("{checked} pairs verified in {:.2?}", start.elapsed()))
}

fn peak_rss_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

fn c11_performance() -> Outcome {
    let m = 10_000u32;
    let mf = f64::from(m);
    let p = mf.ln() * mf.powi(-3);
    let params = ModelParams::probability(m, 4, p, 11);
    let opts = TrialOptions::default();
    let mut runs = Vec::new();
    for _ in 0..2 {
        let start = Instant::now();
        let rec = run_trial(ModelKind::Binomial, &params, 0, &opts).map_err(|e| e.to_string())?;
        within(start, Duration::from_secs(60))?;
        runs.push((rec, start.elapsed()));
    }
    ensure(runs[0].0 == runs[1].0, "repeated trial differs")?;
    let rss = peak_rss_kb();
    if let Some(kb) = rss {
        ensure(kb < 4 * 1024 * 1024, format!("peak RSS {kb} kB"))?;
    }
    let r = &runs[0].0;
    Ok(format!(
        "|R| = {}, free = {:?}, surjects = {:?}, {:.1?} and {:.1?}, peak RSS {} MB",
        r.num_relators,
        r.free,
        r.surjects_z,
        runs[0].1,
        runs[1].1,
        rss.map_or("?".into(), |kb| (kb / 1024).to_string())
    ))
}

fn c12_sweep_determinism() -> Outcome {
    let base = SweepConfig {
        m: vec![8, 20],
        ell: 3,
        model: ModelKind::Binomial,
        grid: GridSpec {
            scaled: Some(vec![
                ScaledPoint { c: 0.1, a: 0.0 },
                ScaledPoint { c: 1.0, a: 1.0 },
                ScaledPoint { c: 10.0, a: 1.0 },
            ]),
            ..GridSpec::default()
        },
        trials: 16,
        seed: 12,
        epsilon: 0.01,
        analyses: Analyses::default(),
        budgets: Default::default(),
        threads: Some(1),
    };
    let one = sweep(&base).map_err(|e| e.to_string())?.csv_string().unwrap();
    let eight = sweep(&SweepConfig { threads: Some(8), ..base })
        .map_err(|e| e.to_string())?
        .csv_string()
        .unwrap();
    ensure(one == eight, "CSV differs between 1 and 8 workers")?;
    Ok(format!("{} CSV bytes identical for 1 and 8 workers", one.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("word-count oracle", c1_word_count),
        ("sampler uniformity", c2_sampler_uniformity),
        ("|R| >= 3m at p = 4 m^(1-l)", c3_many_relators),
        ("unused generators at the explicit bound", c4_unused_generators),
        ("regime separation", c5_regime_separation),
        ("certificate soundness", c6_certificate_soundness),
        ("Smith form oracle", c7_snf_oracle),
        ("(L)/(SL) checker oracle", c8_fa_checker_oracle),
        ("certificate exclusivity", c9_exclusivity),
        ("edge lower bound", c10_edge_bound),
        ("performance and reproducibility", c11_performance),
        ("sweep determinism", c12_sweep_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("criterion {:>2}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.ends_with(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("{label} PASS  {name}: {detail} [{:.1?}]", start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("{label} FAIL  {name}: {why} [{:.1?}]", start.elapsed());
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
