use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::output::{csv_err, json_bytes, out_dir, print_rows, write_atomic, write_json};
use super::{
    ApproximateArgs, Cli, CliError, Command, DecomposeArgs, DeriveArgs, Format, Global, LimrArgs, Method, ModeArg,
    OrdinalOp, TraceArgs, VerifyArgs,
};
use crate::corpus;
use crate::ershov::{
    limit_lemma_witness, read_traces_csv, verdicts_for_trace, write_traces_csv, PairVerdicts, Trace, WitnessPair,
};
use crate::herbrand::{boolean_decomposition, build_pair, check_certificate, HerbrandCertificate};
use crate::limr::{nested_limit, LimrError};
use crate::omega_deriv::{
    audit_local_correctness, canonical_derivation, check_forall_block_changes, check_sigma_bound, dump_jsonl,
    least_witness_bound, settled_trace, sigma2_derivation, Derivation, DeriveError, Mode,
};
use crate::ordinal::{omega_tower, property_suite, Ordinal, SampleShape};
use crate::spec_lang::{parse_document, Delta2Spec, Document, Truth};

pub(super) fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Ordinal { op } => ordinal(op, g, stdout),
        Command::Approximate(a) => approximate(a, g, stdout),
        Command::Derive(a) => derive(a, g, stdout),
        Command::Trace(a) => trace(a, g, stdout),
        Command::Decompose(a) => decompose(a, g, stdout),
        Command::Limr(a) => limr(a, g, stdout),
        Command::Verify(a) => verify(a, g, stdout),
    }
}

fn load_document(src: &str) -> Result<Document, CliError> {
    let text = match src.strip_prefix("corpus:") {
        Some(name) => corpus::find(name)
            .ok_or_else(|| CliError::Usage(format!("no corpus instance named `{name}`")))?
            .source
            .to_string(),
        None => std::fs::read_to_string(src).map_err(|e| CliError::Io(format!("{src}: {e}")))?,
    };
    parse_document(&text).map_err(|e| CliError::Parse(format!("{src}: {e}")))
}

fn load_spec(src: &str) -> Result<(Document, Delta2Spec), CliError> {
    let doc = load_document(src)?;
    let spec = Delta2Spec::from_document(&doc).map_err(|e| CliError::Parse(format!("{src}: {e}")))?;
    Ok((doc, spec))
}

fn certificate(doc: &Document, path: Option<&str>) -> Result<HerbrandCertificate, CliError> {
    let found = match path {
        Some(p) => load_document(p)?.herbrand,
        None => doc.herbrand.clone(),
    };
    found.ok_or_else(|| {
        CliError::Usage("--method herbrand needs a certificate: a herbrand block in the --spec file or --certificate".into())
    })
}

fn parse_ordinal(text: &str, g: &Global) -> Result<Ordinal, CliError> {
    Ordinal::parse_with(text, &g.limits()).map_err(|e| CliError::Parse(format!("`{text}`: {e}")))
}

fn ordinal(op: &OrdinalOp, g: &Global, out: &mut dyn Write) -> Result<(), CliError> {
    let text = match op {
        OrdinalOp::Cmp { a, b } => match parse_ordinal(a, g)?.cmp(&parse_ordinal(b, g)?) {
            std::cmp::Ordering::Less => "LT".to_string(),
            std::cmp::Ordering::Equal => "EQ".to_string(),
            std::cmp::Ordering::Greater => "GT".to_string(),
        },
        OrdinalOp::Add { a, b } => parse_ordinal(a, g)?.add(&parse_ordinal(b, g)?).render(),
        OrdinalOp::Scale { n, a } => {
            parse_ordinal(a, g)?.scale_finite(*n).map_err(|e| CliError::Usage(e.to_string()))?.render()
        }
        OrdinalOp::Tower { n } => omega_tower(*n, &g.limits()).map_err(|e| CliError::Usage(e.to_string()))?.render(),
        OrdinalOp::Props { cases, max_depth } => {
            let shape = SampleShape { max_depth: *max_depth, ..SampleShape::default() };
            let report = property_suite(g.seed, *cases, &shape);
            out.write_all(&json_bytes(&report))?;
            if !report.passed() {
                return Err(CliError::Check("ordinal property suite failed".into()));
            }
            return Ok(());
        }
    };
    writeln!(out, "{text}")?;
    Ok(())
}

/// Contents of `verdicts.json`, reproducible from the exported traces alone.
#[derive(Debug, Serialize)]
struct VerdictsFile {
    bound: Option<String>,
    lowering_checked: bool,
    verdicts: Vec<PairVerdicts>,
}

impl VerdictsFile {
    fn new(traces: &[Trace], bound: Option<&Ordinal>, lowering: bool) -> Self {
        VerdictsFile {
            bound: bound.map(Ordinal::render),
            lowering_checked: lowering,
            verdicts: traces.par_iter().map(|t| verdicts_for_trace(t, bound, lowering)).collect(),
        }
    }

    fn failures(&self) -> usize {
        self.verdicts.iter().filter(|v| !(v.weakly_descending.passed && v.lowering.passed)).count()
    }
}

fn write_trace_table(dir: &Path, traces: &[Trace]) -> Result<(), CliError> {
    write_atomic(&dir.join("traces.csv"), |w| write_traces_csv(w, traces).map_err(csv_err))
}

fn agrees(truth: Truth, limit_is_member: bool) -> Option<bool> {
    truth.decided().map(|t| t == limit_is_member)
}

#[derive(Debug, Serialize)]
struct ApproxRow {
    c: u64,
    observed_limit: u64,
    changes: usize,
    last_change_w: u64,
    weakly_descending: bool,
    lowering: bool,
    certified: bool,
    truth: Truth,
    agrees: Option<bool>,
}

#[derive(Debug, Serialize)]
struct ApproxSummary<'a> {
    spec: &'a str,
    method: &'static str,
    window: u64,
    bound: Option<String>,
    max_changes: Option<u64>,
    rows: &'a [ApproxRow],
}

fn approximate(args: &ApproximateArgs, g: &Global, out: &mut dyn Write) -> Result<(), CliError> {
    let (doc, spec) = load_spec(&args.source.spec)?;
    let herbrand;
    let baseline;
    let (pair, method, max_changes): (&dyn WitnessPair, _, _) = match args.method {
        Method::Herbrand => {
            let cert = certificate(&doc, args.certificate.as_deref())?;
            let v = check_certificate(&cert, &spec, g.c_range.iter(), args.cert_window, args.node_budget);
            if v.budget_exhausted {
                return Err(CliError::Budget(format!("certificate check used {} nodes without finishing", v.nodes)));
            }
            if let Some(cx) = v.counterexample {
                return Err(CliError::Check(format!(
                    "certificate fails at c = {}, a = {:?}, b = {:?}",
                    cx.c, cx.a, cx.b
                )));
            }
            herbrand = build_pair(&cert, &spec);
            (&herbrand, "herbrand", Some(cert.max_changes()))
        }
        Method::Baseline => {
            baseline = limit_lemma_witness(&spec);
            (&baseline, "baseline", None)
        }
    };
    let lowering = args.method != Method::Baseline;
    let bound = pair.bound(g.c_range.start);
    let cs: Vec<u64> = g.c_range.iter().collect();
    let traces: Vec<Trace> = cs.par_iter().map(|&c| pair.trace(c, g.window)).collect();
    let verdicts = VerdictsFile::new(&traces, bound.as_ref(), lowering);
    let rows: Vec<ApproxRow> = traces
        .par_iter()
        .zip(&verdicts.verdicts)
        .map(|(t, v)| {
            let truth = spec.brute_truth(t.c, g.window);
            ApproxRow {
                c: t.c,
                observed_limit: v.limit.observed_limit,
                changes: v.limit.changes,
                last_change_w: v.limit.last_change_w,
                weakly_descending: v.weakly_descending.passed,
                lowering: v.lowering.passed,
                certified: v.limit.certified,
                truth,
                agrees: agrees(truth, v.limit.observed_limit == 0),
            }
        })
        .collect();
    let summary = ApproxSummary {
        spec: &args.source.spec,
        method,
        window: g.window,
        bound: bound.as_ref().map(Ordinal::render),
        max_changes,
        rows: &rows,
    };
    if let Some(dir) = out_dir(&g.out)? {
        traces.par_iter().try_for_each(|t| {
            write_atomic(&dir.join(format!("trace_c{}.csv", t.c)), |w| {
                write_traces_csv(w, std::slice::from_ref(t)).map_err(csv_err)
            })
        })?;
        write_trace_table(dir, &traces)?;
        write_json(&dir.join("verdicts.json"), &verdicts)?;
        write_json(&dir.join("summary.json"), &summary)?;
    }
    match g.format {
        Format::Json => out.write_all(&json_bytes(&summary))?,
        Format::Csv => print_rows(out, g.format, &rows)?,
    }
    let bad = rows
        .iter()
        .filter(|r| {
            !r.weakly_descending
                || !r.lowering
                || r.agrees == Some(false)
                || max_changes.is_some_and(|m| r.changes as u64 > m)
        })
        .count();
    if bad > 0 {
        return Err(CliError::Check(format!("{bad} of {} parameters failed a check", rows.len())));
    }
    Ok(())
}

fn mode_of(m: ModeArg) -> Mode {
    match m {
        ModeArg::Delta2 => Mode::Delta2,
        ModeArg::Sigma2 => Mode::Sigma2,
    }
}

fn build(spec: &Delta2Spec, mode: Mode, c: u64, x: u64, window: u64) -> Result<Derivation, CliError> {
    let built = match mode {
        Mode::Delta2 => canonical_derivation(spec, c, x, window),
        Mode::Sigma2 => sigma2_derivation(spec, c, x, window),
    };
    built.map_err(|e: DeriveError| CliError::Check(e.to_string()))
}

fn auto_bound(spec: &Delta2Spec, mode: Mode, c: u64, window: u64, cap: u64) -> Result<u64, CliError> {
    least_witness_bound(spec, mode, c, window, cap)
        .ok_or_else(|| CliError::Budget(format!("no candidate <= {cap} survives y <= {window} for c = {c}")))
}

/// Per-parameter results in `c` order; the first error wins.
fn per_c<T: Send>(cs: Vec<u64>, f: impl Fn(u64) -> Result<T, CliError> + Sync + Send) -> Result<Vec<T>, CliError> {
    cs.into_par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

#[derive(Debug, Serialize)]
struct DeriveRow {
    c: u64,
    x_bound: u64,
    settles_at: u64,
    root_ord: String,
    bound: String,
    passed: bool,
    nodes_checked: u64,
    truncated: bool,
    violation: Option<String>,
}

fn derive(args: &DeriveArgs, g: &Global, out: &mut dyn Write) -> Result<(), CliError> {
    let (_, spec) = load_spec(&args.source.spec)?;
    let mode = mode_of(args.mode);
    let fixed = match args.witness_bound.as_str() {
        "auto" => None,
        s => Some(s.parse::<u64>().map_err(|e| CliError::Usage(format!("--witness-bound {s}: {e}")))?),
    };
    let cs: Vec<u64> = match args.c {
        Some(c) => vec![c],
        None => g.c_range.iter().collect(),
    };
    let dir = out_dir(&g.out)?;
    let rows = per_c(cs, |c| {
        let x = match fixed {
            Some(x) => x,
            None => auto_bound(&spec, mode, c, g.window, args.cap)?,
        };
        let d = build(&spec, mode, c, x, g.window)?;
        let v = audit_local_correctness(&d, args.depth, args.width, args.nodes);
        if let Some(dir) = dir {
            write_atomic(&dir.join(format!("derivation_c{c}.jsonl")), |w| {
                Ok(dump_jsonl(&d, args.dump_depth, args.dump_width, w)?)
            })?;
        }
        Ok(DeriveRow {
            c,
            x_bound: d.x_bound(),
            settles_at: d.settles_at(),
            root_ord: d.root().ord.render(),
            bound: d.bound().render(),
            passed: v.passed,
            nodes_checked: v.nodes_checked,
            truncated: v.truncated,
            violation: v.violation.map(|b| format!("{} {:?}: {}", b.address, b.clause, b.detail)),
        })
    })?;
    if let Some(dir) = dir {
        write_json(&dir.join("audit.json"), &rows)?;
    }
    print_rows(out, g.format, &rows)?;
    let bad = rows.iter().filter(|r| !r.passed).count();
    if bad > 0 {
        return Err(CliError::Check(format!("{bad} of {} derivations failed the audit", rows.len())));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct TraceRowSummary {
    c: u64,
    x_bound: u64,
    steps: u64,
    observed_limit: u64,
    sigma_bound: bool,
    forall_blocks: bool,
    max_block_changes: usize,
    weakly_descending: bool,
    lowering: bool,
    truth: Truth,
    agrees: Option<bool>,
}

fn trace(args: &TraceArgs, g: &Global, out: &mut dyn Write) -> Result<(), CliError> {
    let (_, spec) = load_spec(&args.source.spec)?;
    let mode = mode_of(args.mode);
    let margin = args.margin.unwrap_or(g.window);
    let dir = out_dir(&g.out)?;
    let walked = per_c(g.c_range.iter().collect(), |c| {
        let x = auto_bound(&spec, mode, c, g.window, args.cap)?;
        let d = build(&spec, mode, c, x, g.window)?;
        let t = settled_trace(&d, margin, args.max_steps).map_err(|e| CliError::Check(e.to_string()))?;
        if t.entered_final_block.is_none() {
            return Err(CliError::Budget(format!(
                "c = {c}: the walk did not reach candidate {} within {} steps",
                d.settles_at(),
                args.max_steps
            )));
        }
        if let Some(dir) = dir {
            write_atomic(&dir.join(format!("sigma_c{c}.csv")), |w| {
                crate::omega_deriv::write_trace_csv(w, &t).map_err(csv_err)
            })?;
        }
        Ok((d.x_bound(), t))
    })?;
    // One bound for the whole range, so the export can be replayed with a single `--K`.
    let bound = walked.iter().map(|(_, t)| t.bound.clone()).max().unwrap_or_default();
    let traces: Vec<Trace> = walked.iter().map(|(_, t)| t.to_trace()).collect();
    let verdicts = VerdictsFile::new(&traces, Some(&bound), true);
    let rows: Vec<TraceRowSummary> = walked
        .par_iter()
        .zip(&verdicts.verdicts)
        .map(|((x, t), v)| {
            let limit = v.limit.observed_limit;
            let truth = spec.brute_truth(t.c, g.window);
            let blocks = check_forall_block_changes(t);
            let (forall_blocks, agrees) = match mode {
                Mode::Delta2 => (blocks.passed, agrees(truth, limit == 0)),
                // The settled candidate must pass the bounded universal check.
                Mode::Sigma2 => (true, Some((0..=g.window).all(|u| spec.b_holds(limit, u, t.c)))),
            };
            TraceRowSummary {
                c: t.c,
                x_bound: *x,
                steps: t.rows.len() as u64 - 1,
                observed_limit: limit,
                sigma_bound: check_sigma_bound(t).passed,
                forall_blocks,
                max_block_changes: blocks.max_changes,
                weakly_descending: v.weakly_descending.passed,
                lowering: v.lowering.passed,
                truth,
                agrees,
            }
        })
        .collect();
    if let Some(dir) = dir {
        write_trace_table(dir, &traces)?;
        write_json(&dir.join("verdicts.json"), &verdicts)?;
        write_json(&dir.join("summary.json"), &rows)?;
    }
    print_rows(out, g.format, &rows)?;
    let bad = rows
        .iter()
        .filter(|r| !(r.sigma_bound && r.forall_blocks && r.weakly_descending && r.lowering) || r.agrees == Some(false))
        .count();
    if bad > 0 {
        return Err(CliError::Check(format!("{bad} of {} traces failed a check", rows.len())));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct DecomposeRow {
    c: u64,
    y: String,
    n: String,
    combination: bool,
    limit_is_zero: bool,
    agrees: bool,
    top_n_false: bool,
}

fn bits(v: &[bool]) -> String {
    v.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn decompose(args: &DecomposeArgs, g: &Global, out: &mut dyn Write) -> Result<(), CliError> {
    let (doc, spec) = load_spec(&args.source.spec)?;
    let cert = certificate(&doc, args.certificate.as_deref())?;
    let pair = build_pair(&cert, &spec);
    let cs: Vec<u64> = g.c_range.iter().collect();
    let rows: Vec<DecomposeRow> = cs
        .par_iter()
        .map(|&c| {
            let t = pair.trace(c, g.window);
            let rep = boolean_decomposition(&t, cert.r);
            let limit_is_zero = t.f.last() == Some(&0);
            DecomposeRow {
                c,
                y: bits(&rep.y),
                n: bits(&rep.n),
                combination: rep.combination,
                limit_is_zero,
                agrees: rep.combination == limit_is_zero,
                top_n_false: rep.n.last() == Some(&false),
            }
        })
        .collect();
    if let Some(dir) = out_dir(&g.out)? {
        write_json(&dir.join("decomposition.json"), &rows)?;
    }
    print_rows(out, g.format, &rows)?;
    let bad = rows.iter().filter(|r| !(r.agrees && r.top_n_false)).count();
    if bad > 0 {
        return Err(CliError::Check(format!("{bad} of {} parameters disagree", rows.len())));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct LimrRow {
    name: String,
    k: usize,
    window: u64,
    tuple: String,
    brute_min: String,
    agree: bool,
    stabilization_w: u64,
    descending_from: u64,
    unstable: bool,
}

fn limr(args: &LimrArgs, g: &Global, out: &mut dyn Write) -> Result<(), CliError> {
    let doc = load_document(&args.phi)?;
    let phi = match &args.name {
        Some(n) => doc.declaration(n),
        None => doc.declarations.last(),
    }
    .ok_or_else(|| CliError::Usage(format!("{}: no such declaration", args.phi)))?;
    let r = nested_limit(phi, args.k, g.window).map_err(|e| match e {
        LimrError::Empty { .. } => CliError::Budget(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;
    let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
    let row = LimrRow {
        name: phi.name.clone(),
        k: r.k,
        window: r.window,
        tuple: join(&r.tuple),
        brute_min: join(&r.brute_min),
        agree: r.agree,
        stabilization_w: r.stabilization_w,
        descending_from: r.descending_from,
        unstable: r.unstable,
    };
    if let Some(dir) = out_dir(&g.out)? {
        write_json(&dir.join("limr.json"), &r)?;
    }
    match g.format {
        Format::Json => out.write_all(&json_bytes(&r))?,
        Format::Csv => print_rows(out, g.format, std::slice::from_ref(&row))?,
    }
    if !r.agree {
        return Err(CliError::Check(format!("limit {} differs from the least tuple {}", row.tuple, row.brute_min)));
    }
    Ok(())
}

fn verify(args: &VerifyArgs, g: &Global, out: &mut dyn Write) -> Result<(), CliError> {
    let file = std::fs::File::open(&args.pair).map_err(|e| CliError::Io(format!("{}: {e}", args.pair.display())))?;
    let traces = read_traces_csv(file).map_err(|e| CliError::Parse(format!("{}: {e}", args.pair.display())))?;
    let bound = args.k.as_deref().map(|k| parse_ordinal(k, g)).transpose()?;
    let verdicts = VerdictsFile::new(&traces, bound.as_ref(), !args.skip_lowering);
    match out_dir(&g.out)? {
        Some(dir) => write_json(&dir.join("verdicts.json"), &verdicts)?,
        None => out.write_all(&json_bytes(&verdicts))?,
    }
    let bad = verdicts.failures();
    if bad > 0 {
        return Err(CliError::Check(format!("{bad} of {} traces fail", verdicts.verdicts.len())));
    }
    Ok(())
}
