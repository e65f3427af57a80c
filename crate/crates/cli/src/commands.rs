use std::collections::BTreeMap;
use std::path::Path;

use herbrand_core::arith::{self, Rational};
use herbrand_core::catalog::{self, CatalogEntry, Family, Provenance, VerificationReport};
use herbrand_core::depth::{Depth, DepthReport, DepthTransform};
use herbrand_core::extspec::{self, ExtensionSpecDocument};
use herbrand_core::filtration::{Classification, RamificationFiltration, ValidationMode};
use herbrand_core::herbrand;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::render::{self, jn, jq, Numbers};
use crate::{CatalogAction, Failure, GlobalOpts, OutputFormat};

struct Loaded {
    doc: ExtensionSpecDocument,
    filtration: RamificationFiltration,
}

fn load(opts: &GlobalOpts, path: &Path) -> Result<Loaded, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let mode = if opts.lenient { ValidationMode::OrdersOnly } else { ValidationMode::Strict };
    let doc = extspec::parse_bytes_with_mode(&bytes, mode)
        .map_err(|e| Failure::Input(format!("{}:{e}", path.display())))?;
    let filtration = doc
        .resolve_with_mode(mode)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(Loaded { doc, filtration })
}

fn rational_arg(flag: &str, s: &str) -> Result<Rational, Failure> {
    arith::parse_rational(s).ok_or_else(|| Failure::Usage(format!("--{flag}: `{s}` is not a rational number")))
}

fn depth_arg(flag: &str, s: &str) -> Result<Depth, Failure> {
    Depth::new(rational_arg(flag, s)?).map_err(|e| Failure::Usage(format!("--{flag}: {e}")))
}

fn scalar_format(opts: &GlobalOpts) -> Result<OutputFormat, Failure> {
    match opts.format.unwrap_or(OutputFormat::Table) {
        OutputFormat::Csv => Err(Failure::Usage("csv output is only available for `sweep`".into())),
        f => Ok(f),
    }
}

fn numbers(opts: &GlobalOpts) -> Numbers {
    Numbers { decimal: opts.decimal }
}

pub fn info(opts: &GlobalOpts, path: &Path) -> Result<(), Failure> {
    let format = scalar_format(opts)?;
    let Loaded { filtration: f, .. } = load(opts, path)?;
    let n = numbers(opts);
    let transform = DepthTransform::new(&f);
    let (unram, tame, wild) = f.tower_degrees();
    let largest = f.largest_break().ok();
    let breaks = f.break_sequence().unwrap_or_default();
    let upper = herbrand::upper_breaks(&f).unwrap_or_default();
    match format {
        OutputFormat::Json => render::print_json(&json!({
            "residue_char": f.residue_char(),
            "group_order": jn(f.group_order()),
            "e": jn(&f.ramification_index()),
            "wild_order": jn(&f.wild_order()),
            "classification": f.classify().as_str(),
            "largest_break": largest.map(render::ji),
            "breaks": breaks.iter().map(|d| json!({"index": render::ji(d.index), "order_after": jn(&d.order_after)})).collect::<Vec<_>>(),
            "upper_breaks": upper.iter().map(jq).collect::<Vec<_>>(),
            "tower_degrees": {"unramified": jn(&unram), "tame": jn(&tame), "wild": jn(&wild)},
            "phi_b": largest.filter(|b| *b >= 0).map(|b| jq(&transform.phi().evaluate(&Rational::from_integer(b.into())).expect("b >= 0"))),
            "a": jq(transform.invariant_a()),
            "depth_preserving": transform.is_depth_preserving(),
        })),
        _ => {
            let rows = vec![
                ("p".to_string(), f.residue_char().to_string()),
                ("|G|".into(), n.int(f.group_order())),
                ("e".into(), n.int(&f.ramification_index())),
                ("|G_1|".into(), n.int(&f.wild_order())),
                ("class".into(), f.classify().to_string()),
                ("b".into(), largest.map_or("none (trivial extension)".into(), |b| b.to_string())),
                (
                    "breaks".into(),
                    breaks.iter().map(|d| format!("{}->{}", d.index, d.order_after)).collect::<Vec<_>>().join(" "),
                ),
                ("upper breaks".into(), upper.iter().map(|q| n.q(q)).collect::<Vec<_>>().join(" ")),
                ("tower".into(), format!("{} * {} * {}", unram, tame, wild)),
                ("a".into(), n.q(transform.invariant_a())),
                ("depth preserving".into(), transform.is_depth_preserving().to_string()),
            ];
            print!("{}", render::table(&rows));
        }
    }
    Ok(())
}

pub fn phi(opts: &GlobalOpts, path: &Path, at: &[String], inverse: bool) -> Result<(), Failure> {
    let format = scalar_format(opts)?;
    let Loaded { filtration, .. } = load(opts, path)?;
    let phi = herbrand::phi_from_filtration(&filtration);
    let function = if inverse { phi.inverse().expect("φ is strictly increasing") } else { phi };
    let name = if inverse { "psi" } else { "phi" };
    let points = at
        .iter()
        .map(|s| {
            let u = rational_arg("at", s)?;
            let v = function.evaluate(&u).map_err(|e| Failure::Usage(format!("--at: {e}")))?;
            Ok((u, v))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let n = numbers(opts);
    match format {
        OutputFormat::Json => render::print_json(&json!({
            "function": name,
            "values": points.iter().map(|(u, v)| json!({"at": jq(u), "value": jq(v)})).collect::<Vec<_>>(),
        })),
        _ => {
            let rows: Vec<(String, String)> =
                points.iter().map(|(u, v)| (format!("{name}({})", n.q(u)), n.q(v))).collect();
            print!("{}", render::table(&rows));
        }
    }
    Ok(())
}

fn report_json(r: &DepthReport) -> Value {
    json!({
        "chi_depth": jq(r.chi_depth.value()),
        "lambda_depth": jq(r.lambda_depth.value()),
        "ratio": r.ratio.as_ref().map(jq),
        "gap": jq(&r.gap),
        "a": jq(&r.invariant_a),
        "classification": r.classification.as_str(),
    })
}

pub fn depth(opts: &GlobalOpts, path: &Path, chi: &str) -> Result<(), Failure> {
    let format = scalar_format(opts)?;
    let chi = depth_arg("chi", chi)?;
    let Loaded { filtration, .. } = load(opts, path)?;
    let transform = DepthTransform::new(&filtration);
    let r = transform.report(&chi);
    let n = numbers(opts);
    match format {
        OutputFormat::Json => render::print_json(&report_json(&r)),
        _ => {
            let rows = vec![
                ("chi depth".to_string(), n.q(r.chi_depth.value())),
                ("lambda depth".into(), n.q(r.lambda_depth.value())),
                ("ratio".into(), r.ratio.as_ref().map_or("undefined (depth 0)".into(), |q| n.q(q))),
                ("gap".into(), n.q(&r.gap)),
                ("a".into(), n.q(&r.invariant_a)),
                ("class".into(), r.classification.to_string()),
                ("threshold".into(), transform.moy_prasad_threshold(&chi).to_string()),
            ];
            print!("{}", render::table(&rows));
        }
    }
    Ok(())
}

/// `from, from + step, …` up to and including `to`.
pub fn progression(from: &Rational, to: &Rational, step: &Rational) -> Vec<Rational> {
    let mut out = Vec::new();
    let mut r = from.clone();
    while r <= *to {
        out.push(r.clone());
        r += step;
    }
    out
}

pub fn sweep(opts: &GlobalOpts, path: &Path, from: &str, to: &str, step: &str) -> Result<(), Failure> {
    let from = depth_arg("from", from)?;
    let to = rational_arg("to", to)?;
    let step = rational_arg("step", step)?;
    if !step.is_positive() {
        return Err(Failure::Usage("--step must be positive".into()));
    }
    let Loaded { filtration, .. } = load(opts, path)?;
    let transform = DepthTransform::new(&filtration);
    let reports: Vec<DepthReport> = progression(from.value(), &to, &step)
        .into_par_iter()
        .map(|r| transform.report(&Depth::new(r).expect("from >= 0 and step > 0")))
        .collect();
    let n = numbers(opts);
    match opts.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut out = String::from("chi_depth,lambda_depth,ratio,gap\n");
            for r in &reports {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    n.q(r.chi_depth.value()),
                    n.q(r.lambda_depth.value()),
                    n.opt(r.ratio.as_ref()),
                    n.q(&r.gap)
                ));
            }
            print!("{out}");
        }
        OutputFormat::Json => {
            render::print_json(&Value::Array(reports.iter().map(report_json).collect()))
        }
        OutputFormat::Table => {
            let rows: Vec<(String, String)> = reports
                .iter()
                .map(|r| {
                    (
                        n.q(r.chi_depth.value()),
                        format!("{}  {}  {}", n.q(r.lambda_depth.value()), n.opt(r.ratio.as_ref()), n.q(&r.gap)),
                    )
                })
                .collect();
            print!("{}", render::table(&rows));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Pass,
    Fail,
    Skip,
}

struct CheckLine {
    name: String,
    outcome: Outcome,
    detail: String,
}

fn line(name: &str, ok: bool, detail: String) -> CheckLine {
    CheckLine { name: name.into(), outcome: if ok { Outcome::Pass } else { Outcome::Fail }, detail }
}

fn skip(name: &str, why: &str) -> CheckLine {
    CheckLine { name: name.into(), outcome: Outcome::Skip, detail: why.into() }
}

fn depth_checks(f: &RamificationFiltration) -> Vec<CheckLine> {
    let t = DepthTransform::new(f);
    let class = t.classification();
    let a = t.invariant_a().clone();
    let wild = class == Classification::WildlyRamified;
    let mut samples: Vec<Rational> =
        [(1, 10), (1, 3), (1, 2), (1, 1), (2, 1), (7, 3), (10, 1), (100, 1)].iter().map(|&(p, q)| arith::rat(p, q)).collect();
    let half_tail = t.tail_threshold() / arith::int(2);
    if half_tail.is_positive() {
        samples.push(half_tail);
    }
    let depth = |r: &Rational| Depth::new(r.clone()).expect("positive sample");
    let mut out = Vec::new();

    out.push(line(
        "tame iff a = 0",
        (class != Classification::WildlyRamified) == a.is_zero(),
        format!("class {class}, a = {a}"),
    ));

    if wild {
        out.push(skip("depth preserved at sampled r", "wildly ramified"));
        let bad: Vec<String> =
            samples.iter().filter(|r| !t.depth_gap(&depth(r)).is_positive()).map(ToString::to_string).collect();
        out.push(line("wild: dep(lambda) > dep(chi) at sampled r", bad.is_empty(), format!("failing r: {bad:?}")));
    } else {
        let bad: Vec<String> = samples
            .iter()
            .filter(|r| t.parameter_depth(&depth(r)).value() != *r)
            .map(ToString::to_string)
            .collect();
        out.push(line("depth preserved at sampled r", bad.is_empty(), format!("failing r: {bad:?}")));
        out.push(skip("wild: dep(lambda) > dep(chi) at sampled r", "not wildly ramified"));
    }

    let tail: Vec<Rational> = (1..=5).map(|k| t.tail_threshold() + arith::int(k)).collect();
    let bad: Vec<String> = tail
        .iter()
        .filter(|r| {
            let d = depth(r);
            t.parameter_depth(&d).value() != &(*r + &a)
                || t.depth_ratio(&d).expect("r > 0") != Rational::one() + &a / *r
        })
        .map(ToString::to_string)
        .collect();
    out.push(line("tail identity at r = b/e + k, k = 1..5", bad.is_empty(), format!("failing r: {bad:?}")));

    if wild {
        let mut bad = Vec::new();
        for eps in [arith::int(1), arith::rat(1, 10), arith::rat(1, 100)] {
            let r = t.min_depth_for_ratio(&eps).expect("eps > 0");
            let probe = if r.is_zero() { arith::rat(1, 1000) } else { r.value().clone() };
            let excess = t.depth_ratio(&depth(&probe)).expect("probe > 0") - Rational::one();
            if excess > eps {
                bad.push(format!("eps {eps}: r* = {r}"));
            }
        }
        out.push(line("ratio within eps of 1 from r* on", bad.is_empty(), format!("failing: {bad:?}")));
    } else {
        out.push(skip("ratio within eps of 1 from r* on", "not wildly ramified"));
    }
    out
}

pub fn check(opts: &GlobalOpts, path: &Path) -> Result<(), Failure> {
    let format = scalar_format(opts)?;
    let loaded = load(opts, path)?;
    let mut lines = depth_checks(&loaded.filtration);
    let mut report = None;
    if let Some(entry) = loaded.doc.catalog_entry() {
        let entry = entry.map_err(|e| Failure::Input(e.to_string()))?;
        let r = catalog::verify_entry(&entry);
        for c in &r.checks {
            lines.push(line(
                &format!("catalog {} = expected", c.quantity.key()),
                c.verdict == catalog::Verdict::ExactMatch,
                format!("expected {}, computed {}", c.expected, c.computed),
            ));
        }
        report = Some(r);
    }
    let all_pass = lines.iter().all(|l| l.outcome != Outcome::Fail);
    match format {
        OutputFormat::Json => render::print_json(&json!({
            "checks": lines.iter().map(|l| json!({
                "name": l.name,
                "outcome": match l.outcome { Outcome::Pass => "pass", Outcome::Fail => "fail", Outcome::Skip => "skipped" },
                "detail": l.detail,
            })).collect::<Vec<_>>(),
            "verification": report.as_ref().map(report_to_json),
            "all_pass": all_pass,
        })),
        _ => {
            for l in &lines {
                let tag = match l.outcome {
                    Outcome::Pass => "PASS",
                    Outcome::Fail => "FAIL",
                    Outcome::Skip => "SKIP",
                };
                match l.outcome {
                    Outcome::Pass => println!("{tag}  {}", l.name),
                    _ => println!("{tag}  {}  ({})", l.name, l.detail),
                }
            }
        }
    }
    if all_pass {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn parse_params(family: Family, raw: &[String]) -> Result<BTreeMap<String, u64>, Failure> {
    let mut params = if raw.is_empty() { family.default_params() } else { BTreeMap::new() };
    for kv in raw {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--params: expected key=value, got `{kv}`")))?;
        let v: u64 = v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("--params: `{v}` is not a nonnegative integer")))?;
        params.insert(k.trim().to_string(), v);
    }
    Ok(params)
}

fn build_entry(name: &str, raw: &[String]) -> Result<CatalogEntry, Failure> {
    let family = Family::from_name(name).map_err(|e| Failure::Usage(e.to_string()))?;
    let params = parse_params(family, raw)?;
    family.build(&params).map_err(|e| Failure::Input(e.to_string()))
}

pub fn report_to_json(r: &VerificationReport) -> Value {
    json!({
        "entry": r.entry,
        "overall": r.overall.as_str(),
        "quantities": r.checks.iter().map(|c| json!({
            "quantity": c.quantity.key(),
            "expected": jq(&c.expected),
            "computed": jq(&c.computed),
            "provenance": c.provenance.tag(),
            "verdict": c.verdict.as_str(),
        })).collect::<Vec<_>>(),
        "notices": r.notices,
    })
}

fn provenance_text(p: &Provenance) -> String {
    match p {
        Provenance::DerivedDisagreesWithPublished { published } => {
            format!("{} (published value {published})", p.tag())
        }
        _ => p.tag().to_string(),
    }
}

pub fn catalog(opts: &GlobalOpts, action: CatalogAction) -> Result<(), Failure> {
    let format = scalar_format(opts)?;
    let n = numbers(opts);
    match action {
        CatalogAction::List => match format {
            OutputFormat::Json => render::print_json(&json!(Family::ALL
                .iter()
                .map(|f| json!({"name": f.name(), "params": f.param_names(), "description": f.description()}))
                .collect::<Vec<_>>())),
            _ => {
                let rows: Vec<(String, String)> = Family::ALL
                    .iter()
                    .map(|f| (f.name().to_string(), format!("[{}] {}", f.param_names().join(", "), f.description())))
                    .collect();
                print!("{}", render::table(&rows));
            }
        },
        CatalogAction::Show { name, params } => {
            let entry = build_entry(&name, &params)?;
            let f = &entry.filtration;
            let orders = (f.last_index() <= 64).then(|| f.orders());
            match format {
                OutputFormat::Json => render::print_json(&json!({
                    "entry": entry.label(),
                    "family": entry.family.name(),
                    "params": entry.params,
                    "residue_char": f.residue_char(),
                    "orders": orders.as_ref().map(|o| o.iter().map(jn).collect::<Vec<_>>()),
                    "document": ExtensionSpecDocument::Breaks {
                        residue_char: f.residue_char(),
                        group_order: f.group_order().clone(),
                        breaks: f.drops().iter().map(|d| (d.index, d.order_after.clone())).collect(),
                    }.to_json(),
                    "expected": entry.expected.iter().map(|(q, v)| (q.key().to_string(), json!({
                        "value": jq(&v.value),
                        "provenance": v.provenance.tag(),
                    }))).collect::<serde_json::Map<_, _>>(),
                    "notes": entry.notes,
                })),
                _ => {
                    let mut rows = vec![
                        ("entry".to_string(), entry.label()),
                        ("p".into(), f.residue_char().to_string()),
                        (
                            "orders".into(),
                            orders.map_or_else(
                                || format!("|G| = {}, drops {}", f.group_order(), f.drops().iter().map(|d| format!("{}->{}", d.index, d.order_after)).collect::<Vec<_>>().join(" ")),
                                |o| o.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "),
                            ),
                        ),
                    ];
                    for (q, v) in &entry.expected {
                        rows.push((format!("expected {}", q.key()), format!("{}  [{}]", n.q(&v.value), provenance_text(&v.provenance))));
                    }
                    for note in &entry.notes {
                        rows.push(("note".into(), note.clone()));
                    }
                    print!("{}", render::table(&rows));
                }
            }
        }
        CatalogAction::Verify { all, name, params } => {
            let entries = if all {
                catalog::default_entries().map_err(|e| Failure::Input(e.to_string()))?
            } else {
                vec![build_entry(name.as_deref().expect("clap requires a name"), &params)?]
            };
            let reports: Vec<VerificationReport> = entries.par_iter().map(catalog::verify_entry).collect();
            let all_match = reports.iter().all(VerificationReport::is_match);
            let notices: Vec<&String> = reports.iter().flat_map(|r| &r.notices).collect();
            match format {
                OutputFormat::Json => render::print_json(&json!({
                    "entries": reports.iter().map(report_to_json).collect::<Vec<_>>(),
                    "all_match": all_match,
                    "notices": notices,
                })),
                _ => {
                    for r in &reports {
                        println!("{:<12} {}", r.overall.as_str(), r.entry);
                        for c in r.checks.iter().filter(|c| c.verdict != catalog::Verdict::ExactMatch) {
                            println!(
                                "    {}: expected {}, computed {}",
                                c.quantity.key(),
                                n.q(&c.expected),
                                n.q(&c.computed)
                            );
                        }
                    }
                    for notice in &notices {
                        println!("notice: {notice}");
                    }
                    let matched = reports.iter().filter(|r| r.is_match()).count();
                    println!("{matched}/{} entries match", reports.len());
                }
            }
            if !all_match {
                return Err(Failure::Check);
            }
        }
    }
    Ok(())
}
