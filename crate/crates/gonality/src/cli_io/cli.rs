//! Command-line driver.
//!
//! Reports are a single JSON document on stdout; diagnostics go to stderr.
//! Exit codes: 0 success/true, 1 checked-false, 2 parse/usage error,
//! 3 unknown / outside the characterized class.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::cli_io::corpus::{corpus_entry, corpus_names};
use crate::cli_io::dot::{export_dot_certificate, export_dot_model};
use crate::cli_io::formats::{
    format_point, parse_divisor, parse_divisor_expr, parse_graph, parse_morphism, parse_point,
    serialize_divisor, serialize_graph, serialize_morphism,
};
use crate::divisor_theory::{
    equivalent, hyperelliptic_witness, rank_at_least, reduce, search_w31, Divisor, W31Verdict,
};
use crate::graph_core::{
    canonical_loopless_model, contract_bridges, cut_structure, necklace_decomposition,
    MetricGraphModel,
};
use crate::morphism;
use crate::synthesis::{synthesize, Synthesis};

#[derive(Parser)]
#[command(
    name = "gonality",
    about = "Exact divisor theory and trigonal morphism synthesis on metric graphs",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print genus and basic counts of a graph
    Genus { graph: String },
    /// q-reduced representative of a divisor class
    Reduce {
        graph: String,
        divisor: String,
        /// Base point, `v:<id>` or `e:<id>:<p/q>`
        #[arg(long)]
        base: String,
    },
    /// Baker-Norine rank (or a rank lower-bound check with --at-least)
    Rank {
        graph: String,
        divisor: String,
        #[arg(long = "at-least")]
        at_least: Option<i64>,
    },
    /// Linear equivalence of two divisors
    Equiv {
        graph: String,
        d1: String,
        d2: String,
    },
    /// Structural classification: genus, cuts, hyperelliptic, necklace
    Classify { graph: String },
    /// Search for a degree-3 rank-1 divisor class
    #[command(name = "search-w31")]
    SearchW31 { graph: String },
    /// Synthesize and verify a trigonal morphism from a witness divisor
    Synthesize {
        graph: String,
        #[arg(long)]
        divisor: Option<String>,
        /// Positional alternative to --divisor
        divisor_pos: Option<String>,
        /// Write domain/target/morphism files and the certificate here
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Independently verify a morphism file
    Verify {
        domain: String,
        codomain: String,
        morphism: String,
    },
    /// Bundled examples
    Corpus {
        #[command(subcommand)]
        which: CorpusCmd,
    },
    /// DOT text for a graph (or a corpus entry with its divisor)
    ExportDot {
        graph: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CorpusCmd {
    List,
    Get { name: String },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: msg.into(),
    }
}

type CmdResult = Result<(Value, i32), Failure>;

/// Runs the CLI; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok((report, code)) => {
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            code
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Cmd) -> CmdResult {
    match cmd {
        Cmd::Genus { graph } => cmd_genus(&graph),
        Cmd::Reduce {
            graph,
            divisor,
            base,
        } => cmd_reduce(&graph, &divisor, &base),
        Cmd::Rank {
            graph,
            divisor,
            at_least,
        } => cmd_rank(&graph, &divisor, at_least),
        Cmd::Equiv { graph, d1, d2 } => cmd_equiv(&graph, &d1, &d2),
        Cmd::Classify { graph } => cmd_classify(&graph),
        Cmd::SearchW31 { graph } => cmd_search(&graph),
        Cmd::Synthesize {
            graph,
            divisor,
            divisor_pos,
            out,
        } => {
            let dspec = divisor.or(divisor_pos).ok_or_else(|| {
                usage("synthesize needs a divisor (positional or --divisor)")
            })?;
            cmd_synthesize(&graph, &dspec, out.as_deref())
        }
        Cmd::Verify {
            domain,
            codomain,
            morphism,
        } => cmd_verify(&domain, &codomain, &morphism),
        Cmd::Corpus { which } => cmd_corpus(which),
        Cmd::ExportDot { graph, out } => cmd_export_dot(&graph, out.as_deref()),
    }
}

/// Splits a `corpus:` reference into entry name and optional field selector.
fn corpus_ref(arg: &str) -> Option<(&str, Option<&str>)> {
    let rest = arg.strip_prefix("corpus:")?;
    match rest.split_once(':') {
        Some((name, field)) => Some((name, Some(field))),
        None => Some((rest, None)),
    }
}

fn load_graph(arg: &str) -> Result<MetricGraphModel, Failure> {
    let text = if let Some((name, field)) = corpus_ref(arg) {
        let e = corpus_entry(name).ok_or_else(|| usage(format!("unknown corpus entry {name}")))?;
        match field {
            None => e.graph.to_string(),
            Some("target") => e
                .codomain
                .ok_or_else(|| usage(format!("corpus entry {name} has no target graph")))?
                .to_string(),
            Some(f) => return Err(usage(format!("unknown corpus field {f}"))),
        }
    } else {
        std::fs::read_to_string(arg).map_err(|e| usage(format!("cannot read {arg}: {e}")))?
    };
    parse_graph(&text).map_err(|e| usage(format!("{arg}: {e}")))
}

/// Divisor argument: a corpus reference, a file, or an inline expression.
fn load_divisor(arg: &str, model: &MetricGraphModel) -> Result<Divisor, Failure> {
    if let Some((name, field)) = corpus_ref(arg) {
        let e = corpus_entry(name).ok_or_else(|| usage(format!("unknown corpus entry {name}")))?;
        if field.is_some() && field != Some("divisor") {
            return Err(usage(format!("unknown corpus field {}", field.unwrap())));
        }
        let text = e
            .divisor
            .ok_or_else(|| usage(format!("corpus entry {name} has no divisor")))?;
        return parse_divisor(text, model)
            .map(|(_, d)| d)
            .map_err(|e| usage(format!("{arg}: {e}")));
    }
    if Path::new(arg).exists() {
        let text =
            std::fs::read_to_string(arg).map_err(|e| usage(format!("cannot read {arg}: {e}")))?;
        return parse_divisor(&text, model)
            .map(|(_, d)| d)
            .map_err(|e| usage(format!("{arg}: {e}")));
    }
    parse_divisor_expr(arg, model).map_err(|e| usage(format!("divisor `{arg}`: {e}")))
}

fn load_morphism(
    arg: &str,
    domain: &MetricGraphModel,
    codomain: &MetricGraphModel,
) -> Result<morphism::IndexedMorphism, Failure> {
    let text = if let Some((name, field)) = corpus_ref(arg) {
        let e = corpus_entry(name).ok_or_else(|| usage(format!("unknown corpus entry {name}")))?;
        if field.is_some() && field != Some("morphism") {
            return Err(usage(format!("unknown corpus field {}", field.unwrap())));
        }
        e.morphism
            .ok_or_else(|| usage(format!("corpus entry {name} has no morphism")))?
            .to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| usage(format!("cannot read {arg}: {e}")))?
    };
    parse_morphism(&text, domain, codomain).map_err(|e| usage(format!("{arg}: {e}")))
}

fn lib_err(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 2,
        message: e.to_string(),
    }
}

fn divisor_json(d: &Divisor) -> Value {
    Value::Array(
        d.chips
            .iter()
            .map(|(p, n)| json!({ "point": format_point(p), "coeff": n }))
            .collect(),
    )
}

fn cmd_genus(graph: &str) -> CmdResult {
    let m = load_graph(graph)?;
    Ok((
        json!({
            "graph": m.name,
            "genus": m.genus(),
            "vertices": m.vertices.len(),
            "edges": m.edges.len(),
        }),
        0,
    ))
}

fn cmd_reduce(graph: &str, divisor: &str, base: &str) -> CmdResult {
    let m = load_graph(graph)?;
    let d = load_divisor(divisor, &m)?;
    let q = parse_point(base, &m).map_err(|e| usage(format!("--base {base}: {e}")))?;
    let (r, script) = reduce(&m, &d, &q).map_err(lib_err)?;
    Ok((
        json!({
            "graph": m.name,
            "base": format_point(&q),
            "input": divisor_json(&d),
            "reduced": divisor_json(&r),
            "moves": script.moves.len(),
        }),
        0,
    ))
}

/// Exact Baker-Norine rank by bounded search; -1 when the class is not
/// effective.
fn exact_rank(m: &MetricGraphModel, d: &Divisor) -> Result<i64, Failure> {
    if !rank_at_least(m, d, 0).map_err(lib_err)? {
        return Ok(-1);
    }
    let mut r: u32 = 0;
    while i64::from(r) < d.degree() && rank_at_least(m, d, r + 1).map_err(lib_err)? {
        r += 1;
    }
    Ok(i64::from(r))
}

fn cmd_rank(graph: &str, divisor: &str, at_least: Option<i64>) -> CmdResult {
    let m = load_graph(graph)?;
    let d = load_divisor(divisor, &m)?;
    match at_least {
        Some(r) => {
            let holds = r < 0 || rank_at_least(&m, &d, r as u32).map_err(lib_err)?;
            Ok((
                json!({
                    "graph": m.name,
                    "divisor": divisor_json(&d),
                    "at_least": r,
                    "holds": holds,
                }),
                if holds { 0 } else { 1 },
            ))
        }
        None => {
            let r = exact_rank(&m, &d)?;
            Ok((
                json!({
                    "graph": m.name,
                    "divisor": divisor_json(&d),
                    "degree": d.degree(),
                    "rank": r,
                }),
                0,
            ))
        }
    }
}

fn cmd_equiv(graph: &str, d1: &str, d2: &str) -> CmdResult {
    let m = load_graph(graph)?;
    let a = load_divisor(d1, &m)?;
    let b = load_divisor(d2, &m)?;
    let (eq, script) = equivalent(&m, &a, &b).map_err(lib_err)?;
    Ok((
        json!({
            "graph": m.name,
            "d1": divisor_json(&a),
            "d2": divisor_json(&b),
            "equivalent": eq,
            "moves": script.map(|s| s.moves.len()),
        }),
        if eq { 0 } else { 1 },
    ))
}

fn cmd_classify(graph: &str) -> CmdResult {
    let m = load_graph(graph)?;
    let cut = cut_structure(&m);
    let hyperelliptic = if m.genus() >= 2 {
        hyperelliptic_witness(&m).map_err(lib_err)?.is_some()
    } else {
        false
    };
    let (contracted, _) = contract_bridges(&m);
    let necklace = necklace_decomposition(&contracted).is_some();
    let (canon, _) = canonical_loopless_model(&contracted).map_err(lib_err)?;
    Ok((
        json!({
            "graph": m.name,
            "genus": m.genus(),
            "vertices": m.vertices.len(),
            "edges": m.edges.len(),
            "hyperelliptic": hyperelliptic,
            "necklace": necklace,
            "bridges": cut.bridges,
            "two_edge_connected": cut.bridges.is_empty(),
            "two_edge_cuts": cut.two_edge_cuts.len(),
            "separating_vertices": cut.separating_vertices,
            "edge_connectivity": cut.edge_connectivity,
            "canonical_model_vertices": canon.vertices.len(),
        }),
        0,
    ))
}

fn cmd_search(graph: &str) -> CmdResult {
    let m = load_graph(graph)?;
    match search_w31(&m).map_err(lib_err)? {
        W31Verdict::Witness(d) => Ok((
            json!({
                "graph": m.name,
                "verdict": "witness",
                "divisor": divisor_json(&d),
            }),
            0,
        )),
        W31Verdict::NoneFound => Ok((
            json!({ "graph": m.name, "verdict": "none" }),
            1,
        )),
        W31Verdict::Unknown => Ok((
            json!({ "graph": m.name, "verdict": "unknown" }),
            3,
        )),
    }
}

fn cmd_synthesize(graph: &str, divisor: &str, out: Option<&Path>) -> CmdResult {
    let m = load_graph(graph)?;
    let d = load_divisor(divisor, &m)?;
    match synthesize(&m, &d).map_err(lib_err)? {
        Synthesis::Certificate(cert) => {
            let report = json!({
                "outcome": "certificate",
                "graph": m.name,
                "provenance": cert.provenance,
                "divisor": divisor_json(&cert.divisor),
                "report": serde_json::to_value(&cert.report).unwrap(),
                "domain_vertices": cert.morphism.domain.vertices.len(),
                "target_vertices": cert.morphism.codomain.vertices.len(),
            });
            if let Some(dir) = out {
                write_certificate(dir, &cert, &report)?;
            }
            Ok((report, 0))
        }
        Synthesis::ExceptionSmallCanonicalModel { vertices } => Ok((
            json!({
                "outcome": "small_canonical_model",
                "graph": m.name,
                "canonical_model_vertices": vertices,
                "note": "divisorially trigonal; no morphism is demanded for canonical models on at most 3 vertices",
            }),
            0,
        )),
        Synthesis::OutsideCharacterizedClass { reason } => Ok((
            json!({
                "outcome": "outside_characterized_class",
                "graph": m.name,
                "reason": reason,
            }),
            3,
        )),
    }
}

fn write_certificate(
    dir: &Path,
    cert: &crate::synthesis::Certificate,
    report: &Value,
) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(lib_err)?;
    let w = |name: &str, text: String| -> Result<(), Failure> {
        std::fs::write(dir.join(name), text).map_err(lib_err)
    };
    w("domain.graph", serialize_graph(&cert.morphism.domain))?;
    w("target.graph", serialize_graph(&cert.morphism.codomain))?;
    w("cert.morphism", serialize_morphism("cert", &cert.morphism))?;
    let dd = cert.divisor_on_modified().map_err(lib_err)?;
    w(
        "witness.divisor",
        serialize_divisor("witness", &cert.morphism.domain, &dd),
    )?;
    w(
        "certificate.json",
        serde_json::to_string_pretty(report).unwrap() + "\n",
    )?;
    w("certificate.dot", export_dot_certificate(cert))?;
    Ok(())
}

fn cmd_verify(domain: &str, codomain: &str, morphism_arg: &str) -> CmdResult {
    let dom = load_graph(domain)?;
    let cod = load_graph(codomain)?;
    let phi = load_morphism(morphism_arg, &dom, &cod)?;
    let rep = morphism::report(&phi);
    let pass = rep.valid && rep.harmonic && rep.nondegenerate;
    Ok((
        json!({
            "domain": dom.name,
            "codomain": cod.name,
            "pass": pass,
            "report": serde_json::to_value(&rep).unwrap(),
        }),
        if pass { 0 } else { 1 },
    ))
}

fn cmd_corpus(which: CorpusCmd) -> CmdResult {
    match which {
        CorpusCmd::List => Ok((json!({ "entries": corpus_names() }), 0)),
        CorpusCmd::Get { name } => {
            let e =
                corpus_entry(&name).ok_or_else(|| usage(format!("unknown corpus entry {name}")))?;
            Ok((
                json!({
                    "name": e.name,
                    "notes": e.notes,
                    "graph": e.graph,
                    "divisor": e.divisor,
                    "codomain": e.codomain,
                    "morphism": e.morphism,
                }),
                0,
            ))
        }
    }
}

fn cmd_export_dot(graph: &str, out: Option<&Path>) -> CmdResult {
    let m = load_graph(graph)?;
    let d = corpus_ref(graph)
        .and_then(|(name, field)| if field.is_none() { corpus_entry(name) } else { None })
        .and_then(|e| e.divisor)
        .map(|t| parse_divisor(t, &m).map(|(_, d)| d))
        .transpose()
        .map_err(|e| usage(e.to_string()))?;
    let dot = export_dot_model(&m, d.as_ref());
    if let Some(path) = out {
        std::fs::write(path, &dot).map_err(lib_err)?;
        Ok((json!({ "written": path.display().to_string() }), 0))
    } else {
        // DOT itself is the report here.
        print!("{dot}");
        Ok((json!({ "written": null }), 0))
    }
}
