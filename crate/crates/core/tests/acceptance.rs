//! One check per acceptance criterion, run in sequence so timings are not
//! skewed by each other. Each prints a single PASS/FAIL line.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ershov_core::corpus::{self, Loaded};
use ershov_core::ershov::{check_lowering_trace, check_weakly_descending_trace, limit_lemma_witness, WitnessPair};
use ershov_core::herbrand::{boolean_decomposition, build_pair};
use ershov_core::limr::{nested_limit, LexChain};
use ershov_core::omega_deriv::{
    audit_local_correctness, check_forall_block_changes, check_sigma_bound, extract_trace, settled_trace,
    DerivationPair, Mode,
};
use ershov_core::ordinal::{property_suite, sample, Ordinal, SampleShape};
use ershov_core::spec_lang::{parse_predicate, Matrix};

const ORDINAL_CASES: usize = 10_000;
const ORDINAL_DEPTH: usize = 4;
const ORDINAL_SECONDS: u64 = 10;

const HERBRAND_C_MAX: u64 = 50;
const HERBRAND_WINDOW: u64 = 200;
const HERBRAND_SECONDS: u64 = 30;
const MIN_INSTANCES: usize = 6;

const DERIVE_C_MAX: u64 = 10;
const SIGMA_WINDOW: u64 = 200;
/// Survivors are judged on `y <= AUDIT_WINDOW`. For dce at c = 7 the false candidate <0,14>
/// is first refuted at y = <14,27> = 888, so the window has to reach past that.
const AUDIT_WINDOW: u64 = 1000;
const X_CAP: u64 = 5_000;
const MAX_STEPS: u64 = 500_000;
const DERIVE_SECONDS: u64 = 60;
const MIN_DERIVATION_SPECS: usize = 4;

const LIMR_SECONDS: u64 = 30;
const LIMR_BOX: u64 = 12;

const BASELINE_WINDOW: u64 = 100;

struct Outcome {
    passed: bool,
    line: String,
}

fn report(n: u32, passed: bool, elapsed: Duration, detail: String) -> Outcome {
    let tag = if passed { "PASS" } else { "FAIL" };
    Outcome { passed, line: format!("criterion {n} {tag} ({:.2}s) {detail}", elapsed.as_secs_f64()) }
}

fn within(start: Instant, seconds: u64) -> (Duration, bool) {
    let e = start.elapsed();
    (e, e <= Duration::from_secs(seconds))
}

fn ordinal_kernel() -> Outcome {
    let start = Instant::now();
    let shape = SampleShape { max_depth: ORDINAL_DEPTH, ..SampleShape::default() };
    let r = property_suite(0x5eed, ORDINAL_CASES, &shape);
    // Separate pass over sorted pairs for 3a+i < 3b.
    let mut rng = ChaCha8Rng::seed_from_u64(0x3a);
    let mut scale_pairs = 0;
    let mut scale_bad = 0;
    while scale_pairs < ORDINAL_CASES {
        let a = sample(&mut rng, &shape);
        let b = sample(&mut rng, &shape);
        if a == b {
            continue;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        scale_pairs += 1;
        let hi3 = hi.scale_finite(3).unwrap();
        if (0..3).any(|i| lo.scale_finite(3).unwrap().add_natural(i) >= hi3) {
            scale_bad += 1;
        }
    }
    let (elapsed, fast) = within(start, ORDINAL_SECONDS);
    let passed = r.passed() && scale_bad == 0 && fast;
    report(
        1,
        passed,
        elapsed,
        format!(
            "{} random triples at depth <= {ORDINAL_DEPTH}, {scale_pairs} scaling pairs, failures: {:?} / {scale_bad}",
            r.cases, r,
        ),
    )
}

fn herbrand_reduction(corpus: &[Loaded]) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let rs: std::collections::BTreeSet<usize> = corpus.iter().map(|i| i.certificate.r).collect();
    if corpus.len() < MIN_INSTANCES || rs != [0, 1, 2].into() {
        failures.push(format!("corpus has {} instances with r in {rs:?}", corpus.len()));
    }
    let mut r1_max = 0;
    for inst in corpus {
        let pair = build_pair(&inst.certificate, &inst.spec);
        let k = 2 * inst.certificate.r as u64 + 3;
        let limit = 1 + 2 * inst.certificate.r as u64;
        let results: Vec<Result<usize, String>> = (0..=HERBRAND_C_MAX)
            .into_par_iter()
            .map(|c| {
                if pair.bound(c) != Some(Ordinal::from(k)) {
                    return Err(format!("{} c={c}: bound is not {k}", inst.name));
                }
                let t = pair.trace(c, HERBRAND_WINDOW);
                let wd = check_weakly_descending_trace(&t, Some(&Ordinal::from(k)));
                let low = check_lowering_trace(&t);
                if !wd.passed || !low.passed {
                    return Err(format!("{} c={c}: {wd:?} {low:?}", inst.name));
                }
                if t.changes() as u64 > limit {
                    return Err(format!("{} c={c}: {} changes", inst.name, t.changes()));
                }
                if let Some(member) = inst.spec.brute_truth(c, HERBRAND_WINDOW).decided() {
                    if member != (t.f.last() == Some(&0)) {
                        return Err(format!("{} c={c}: limit disagrees with brute force", inst.name));
                    }
                }
                Ok(t.changes())
            })
            .collect();
        for res in results {
            match res {
                Ok(n) if inst.certificate.r == 1 => r1_max = r1_max.max(n),
                Ok(_) => {}
                Err(e) => failures.push(e),
            }
        }
    }
    if r1_max != 3 {
        failures.push(format!("largest change count at r = 1 is {r1_max}, not 3"));
    }
    let (elapsed, fast) = within(start, HERBRAND_SECONDS);
    let passed = failures.is_empty() && fast;
    report(
        2,
        passed,
        elapsed,
        format!(
            "{} instances, c in 0..={HERBRAND_C_MAX}, W = {HERBRAND_WINDOW}, r=1 max changes {r1_max} {failures:?}",
            corpus.len()
        ),
    )
}

fn decomposition(corpus: &[Loaded]) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    for inst in corpus {
        let pair = build_pair(&inst.certificate, &inst.spec);
        for c in 0..=HERBRAND_C_MAX {
            let t = pair.trace(c, HERBRAND_WINDOW);
            let rep = boolean_decomposition(&t, inst.certificate.r);
            checked += 1;
            if rep.combination != (t.f.last() == Some(&0)) {
                failures.push(format!("{} c={c}: combination {}", inst.name, rep.combination));
            }
            if rep.n.len() != 2 * inst.certificate.r + 3 || rep.n.last() != Some(&false) {
                failures.push(format!("{} c={c}: top N is not false", inst.name));
            }
        }
    }
    report(
        3,
        failures.is_empty(),
        start.elapsed(),
        format!("{checked} parameters, window {HERBRAND_WINDOW} {failures:?}"),
    )
}

fn derivations(corpus: &[Loaded]) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut specs = 0;
    let mut sigma2_checked = 0;
    for inst in corpus {
        let pair = DerivationPair::new(&inst.spec, Mode::Delta2, AUDIT_WINDOW, X_CAP);
        let sigma = DerivationPair::new(&inst.spec, Mode::Sigma2, AUDIT_WINDOW, X_CAP);
        let results: Vec<Result<bool, String>> = (0..=DERIVE_C_MAX)
            .into_par_iter()
            .map(|c| {
                let tag = format!("{} c={c}", inst.name);
                let d = pair.derivation(c).map_err(|e| format!("{tag}: {e}"))?;
                let audit = audit_local_correctness(&d, 3 * d.x_bound() as usize + 4, 12, 20_000);
                if !audit.passed {
                    return Err(format!("{tag}: audit {:?}", audit.violation));
                }
                let early = extract_trace(&d, SIGMA_WINDOW).map_err(|e| format!("{tag}: {e}"))?;
                if !check_sigma_bound(&early).passed {
                    return Err(format!("{tag}: sigma exceeds w"));
                }
                let t = settled_trace(&d, AUDIT_WINDOW, MAX_STEPS).map_err(|e| format!("{tag}: {e}"))?;
                if t.entered_final_block.is_none() {
                    return Err(format!("{tag}: walk never reached the surviving block"));
                }
                let blocks = check_forall_block_changes(&t);
                if !blocks.passed {
                    return Err(format!("{tag}: {:?}", blocks.violation));
                }
                let tr = t.to_trace();
                let three_k = pair.bound(c).ok_or(format!("{tag}: no bound"))?;
                let wd = check_weakly_descending_trace(&tr, Some(&three_k));
                let low = check_lowering_trace(&tr);
                if !wd.passed || !low.passed {
                    return Err(format!("{tag}: {wd:?} {low:?}"));
                }
                let truth = inst.spec.brute_truth(c, SIGMA_WINDOW).decided();
                if truth.is_some_and(|m| m != (tr.f.last() == Some(&0))) {
                    return Err(format!("{tag}: limit disagrees with brute force"));
                }
                if truth != Some(true) {
                    return Ok(false);
                }
                let sd = sigma.derivation(c).map_err(|e| format!("{tag} sigma2: {e}"))?;
                let st = settled_trace(&sd, AUDIT_WINDOW, MAX_STEPS).map_err(|e| format!("{tag} sigma2: {e}"))?;
                let z = st.rows.last().map(|r| r.f).unwrap_or(0);
                if !(0..=SIGMA_WINDOW).all(|u| inst.spec.b_holds(z, u, c)) {
                    return Err(format!("{tag}: settled z = {z} is refuted"));
                }
                Ok(true)
            })
            .collect();
        let mut ok = true;
        for res in results {
            match res {
                Ok(sig) => sigma2_checked += usize::from(sig),
                Err(e) => {
                    ok = false;
                    failures.push(e);
                }
            }
        }
        specs += usize::from(ok);
    }
    if specs < MIN_DERIVATION_SPECS {
        failures.push(format!("only {specs} specs passed"));
    }
    let (elapsed, fast) = within(start, DERIVE_SECONDS);
    let passed = failures.is_empty() && fast;
    report(
        4,
        passed,
        elapsed,
        format!("{specs} specs, c in 0..={DERIVE_C_MAX}, {sigma2_checked} settled z checked {failures:?}"),
    )
}

/// Scans `[0,b]^k` in lexicographic order for the least prefix with a witness `u <= b`.
fn box_lex_min(phi: &Matrix, k: usize, b: u64) -> Option<Vec<u64>> {
    let mut xs = vec![0u64; k];
    loop {
        let mut args = xs.clone();
        args.push(0);
        if (0..=b).any(|u| {
            args[k] = u;
            phi.holds(&args)
        }) {
            return Some(xs);
        }
        let mut i = k;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if xs[i] < b {
                xs[i] += 1;
                xs[i + 1..].iter_mut().for_each(|x| *x = 0);
                break;
            }
        }
    }
}

const LIMR_CASES: [(usize, u64, &str); 15] = [
    (1, 400, "P(a, b) := a * a = b + 3;"),
    (1, 400, "P(a, b) := 4 <= a && b = b;"),
    (1, 400, "P(a, b) := a + b = 7 && 3 <= a;"),
    (1, 400, "P(a, b) := b * b = a && 2 <= b;"),
    (1, 600, "P(a, b) := (a = 6 && b = 9) || (a = 8 && b = 0);"),
    (2, 600, "P(a, b, c) := a = 0 && b = 0 && c = 0;"),
    (2, 1000, "P(a, b, c) := (a = 2 && b = 9) || (a = 2 && b = 3) || (a = 5 && b = 0);"),
    (2, 600, "P(a, b, c) := a + b = c && 2 <= a;"),
    (2, 3000, "P(a, b, c) := a * b = 6 && c = a;"),
    (2, 600, "P(a, b, c) := 1 <= a && b < a && c = a + b;"),
    (3, 4000, "P(a, b, c, d) := 1 <= a && a + b = 2 && c = b && d <= 1;"),
    (3, 4000, "P(a, b, c, d) := a + b + c = d + 1;"),
    (3, 4000, "P(a, b, c, d) := a = 1 && b = 0 && c = 1 && d = 0;"),
    (3, 4000, "P(a, b, c, d) := 2 <= a + b + c && d = 0 && a <= 1;"),
    (3, 4000, "P(a, b, c, d) := b = a + 1 && c = b + 1 && d <= c;"),
];

fn lex_min_machinery() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (k, window, src) in LIMR_CASES {
        let phi = parse_predicate(src).unwrap();
        let r = match nested_limit(&phi, k, window) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("{src}: {e}"));
                continue;
            }
        };
        if Some(&r.tuple) != box_lex_min(&phi, k, LIMR_BOX).as_ref() {
            failures.push(format!("{src}: limit {:?} is not the least tuple", r.tuple));
        }
        if r.unstable || r.descending_from > window / 2 {
            failures.push(format!("{src}: h' still moving at {} of {window}", r.stabilization_w));
        }
        let mut chain = LexChain::new(&phi, k).unwrap();
        let mut top = 0;
        for s in chain.run_to(window) {
            top = top.max(s.g);
            if s.h > top {
                failures.push(format!("{src}: h({}) = {} exceeds max g = {top}", s.n, s.h));
                break;
            }
        }
    }
    let (elapsed, fast) = within(start, LIMR_SECONDS);
    report(5, failures.is_empty() && fast, elapsed, format!("{} formulas, k in 1..=3 {failures:?}", LIMR_CASES.len()))
}

fn baseline(corpus: &[Loaded]) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut decided = 0;
    for inst in corpus {
        let pair = limit_lemma_witness(&inst.spec);
        for c in 0..=HERBRAND_C_MAX {
            let t = pair.trace(c, 2 * BASELINE_WINDOW);
            let tail = &t.f[BASELINE_WINDOW as usize..];
            if tail.iter().any(|&v| v != tail[0]) {
                failures.push(format!("{} c={c}: not constant on [W, 2W]", inst.name));
            }
            if let Some(member) = inst.spec.brute_truth(c, BASELINE_WINDOW).decided() {
                decided += 1;
                if member != (tail[0] == 0) {
                    failures.push(format!("{} c={c}: limit disagrees with brute force", inst.name));
                }
            }
        }
    }
    report(
        6,
        failures.is_empty(),
        start.elapsed(),
        format!("{decided} decided parameters, W = {BASELINE_WINDOW} {failures:?}"),
    )
}

fn ershov(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ershov")).args(args).output().expect("binary runs")
}

fn replay(dir: &Path, export: &[&str], name: &str) -> Result<(), String> {
    let first = dir.join(format!("{name}-a"));
    let again = dir.join(format!("{name}-b"));
    let replayed = dir.join(format!("{name}-verify"));
    for out in [&first, &again] {
        let mut args = export.to_vec();
        args.extend(["--out", out.to_str().unwrap()]);
        let o = ershov(&args);
        if !o.status.success() {
            return Err(format!("{name}: {}", String::from_utf8_lossy(&o.stderr)));
        }
    }
    for file in ["traces.csv", "verdicts.json", "summary.json"] {
        if std::fs::read(first.join(file)).ok() != std::fs::read(again.join(file)).ok() {
            return Err(format!("{name}: {file} differs between identical runs"));
        }
    }
    let original = std::fs::read(first.join("verdicts.json")).unwrap();
    let header: serde_json::Value = serde_json::from_slice(&original).unwrap();
    let traces = first.join("traces.csv");
    let mut args = vec!["verify", "--pair", traces.to_str().unwrap(), "--out", replayed.to_str().unwrap()];
    let bound = header["bound"].as_str().map(str::to_string);
    if let Some(k) = &bound {
        args.extend(["--K", k.as_str()]);
    }
    if header["lowering_checked"] == false {
        args.push("--skip-lowering");
    }
    let o = ershov(&args);
    if !o.status.success() {
        return Err(format!("{name} verify: {}", String::from_utf8_lossy(&o.stderr)));
    }
    if std::fs::read(replayed.join("verdicts.json")).unwrap() != original {
        return Err(format!("{name}: replayed verdicts differ"));
    }
    Ok(())
}

fn cli_replay() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let runs: [(&str, Vec<&str>); 3] = [
        ("herbrand", vec!["approximate", "--spec", "corpus:two_stage", "--c-range", "0..20", "--window", "100"]),
        ("baseline", vec!["approximate", "--spec", "corpus:dce", "--method", "baseline", "--c-range", "0..20"]),
        ("trace", vec!["trace", "--spec", "corpus:late_refutation", "--c-range", "0..8", "--window", "300"]),
    ];
    let failures: Vec<String> = runs.iter().filter_map(|(name, args)| replay(dir.path(), args, name).err()).collect();
    report(
        7,
        failures.is_empty(),
        start.elapsed(),
        format!("{} exports replayed through verify {failures:?}", runs.len()),
    )
}

#[test]
fn acceptance() {
    let corpus = corpus::load_all();
    let outcomes = [
        ordinal_kernel(),
        herbrand_reduction(&corpus),
        decomposition(&corpus),
        derivations(&corpus),
        lex_min_machinery(),
        baseline(&corpus),
        cli_replay(),
    ];
    for o in &outcomes {
        println!("{}", o.line);
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.line.as_str()).collect();
    assert!(failed.is_empty(), "{failed:#?}");
}
