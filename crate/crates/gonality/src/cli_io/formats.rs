//! Line-oriented text formats for graphs, divisors and morphisms, plus the
//! small point and divisor-expression syntaxes used on the command line.
//!
//! Grammar (one statement per line, `#` starts a comment):
//!   graph file:    `graph <name>` · `vertex <id>` · `edge <id> <u> <v> <rational>`
//!   divisor file:  `divisor <name> on <graph>` · `chip V <vertex> <int>`
//!                  · `chip E <edge> <rational offset> <int>`
//!   morphism file: `morphism <name> from <g1> to <g2>` · `vmap <v1> <v2>`
//!                  · `emap <e1> E <e2> <positive int index>` · `emap <e1> V <v2>`
//!
//! Rationals are `p/q` or integer literals; decimals are rejected. Offsets
//! are measured from the first endpoint as declared in the edge line.

use std::fmt;

use num_traits::Zero;

use crate::divisor_theory::Divisor;
use crate::graph_core::rational::{format_rational, parse_rational};
use crate::graph_core::{GraphPoint, MetricGraphModel};
use crate::morphism::{EdgeImage, IndexedMorphism};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based line number; 0 means the error is about the document as a whole.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// Strips comments and tokenizes; yields (line number, tokens) for
/// non-empty lines.
fn statements(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line.split_whitespace().collect()))
        }
    })
}

pub fn parse_graph(text: &str) -> Result<MetricGraphModel, ParseError> {
    let mut model: Option<MetricGraphModel> = None;
    for (ln, toks) in statements(text) {
        match toks[0] {
            "graph" => {
                if toks.len() != 2 {
                    return Err(err(ln, "expected `graph <name>`"));
                }
                if model.is_some() {
                    return Err(err(ln, "duplicate `graph` header"));
                }
                model = Some(MetricGraphModel::new(toks[1]));
            }
            "vertex" => {
                let m = model
                    .as_mut()
                    .ok_or_else(|| err(ln, "`vertex` before `graph` header"))?;
                if toks.len() != 2 {
                    return Err(err(ln, "expected `vertex <id>`"));
                }
                if m.vertices.contains(toks[1]) {
                    return Err(err(ln, format!("duplicate vertex id {}", toks[1])));
                }
                m.add_vertex(toks[1]);
            }
            "edge" => {
                let m = model
                    .as_mut()
                    .ok_or_else(|| err(ln, "`edge` before `graph` header"))?;
                if toks.len() != 5 {
                    return Err(err(ln, "expected `edge <id> <u> <v> <rational>`"));
                }
                if m.edges.contains_key(toks[1]) {
                    return Err(err(ln, format!("duplicate edge id {}", toks[1])));
                }
                for v in [toks[2], toks[3]] {
                    if !m.vertices.contains(v) {
                        return Err(err(ln, format!("unknown vertex {v}")));
                    }
                }
                let len = parse_rational(toks[4]).map_err(|e| err(ln, e))?;
                if len <= crate::graph_core::Rational::zero() {
                    return Err(err(ln, format!("non-positive length {}", toks[4])));
                }
                m.add_edge(toks[1], toks[2], toks[3], len);
            }
            other => return Err(err(ln, format!("unknown statement `{other}`"))),
        }
    }
    let m = model.ok_or_else(|| err(0, "missing `graph` header"))?;
    m.validate().map_err(|e| err(0, e.to_string()))?;
    Ok(m)
}

pub fn serialize_graph(model: &MetricGraphModel) -> String {
    let mut out = format!("graph {}\n", model.name);
    for v in &model.vertices {
        out.push_str(&format!("vertex {v}\n"));
    }
    for (eid, e) in &model.edges {
        out.push_str(&format!(
            "edge {eid} {} {} {}\n",
            e.u,
            e.v,
            format_rational(&e.length)
        ));
    }
    out
}

/// Parses a divisor file against `model`; the header's graph name must match.
/// Returns the divisor's declared name alongside the divisor.
pub fn parse_divisor(
    text: &str,
    model: &MetricGraphModel,
) -> Result<(String, Divisor), ParseError> {
    let mut name: Option<String> = None;
    let mut d = Divisor::zero();
    for (ln, toks) in statements(text) {
        match toks[0] {
            "divisor" => {
                if toks.len() != 4 || toks[2] != "on" {
                    return Err(err(ln, "expected `divisor <name> on <graph>`"));
                }
                if name.is_some() {
                    return Err(err(ln, "duplicate `divisor` header"));
                }
                if toks[3] != model.name {
                    return Err(err(
                        ln,
                        format!("divisor is on graph {}, expected {}", toks[3], model.name),
                    ));
                }
                name = Some(toks[1].to_string());
            }
            "chip" => {
                if name.is_none() {
                    return Err(err(ln, "`chip` before `divisor` header"));
                }
                match toks.get(1) {
                    Some(&"V") => {
                        if toks.len() != 4 {
                            return Err(err(ln, "expected `chip V <vertex> <int>`"));
                        }
                        if !model.vertices.contains(toks[2]) {
                            return Err(err(ln, format!("unknown vertex {}", toks[2])));
                        }
                        let n: i64 = toks[3]
                            .parse()
                            .map_err(|_| err(ln, format!("bad integer {}", toks[3])))?;
                        d.add(GraphPoint::vertex(toks[2]), n);
                    }
                    Some(&"E") => {
                        if toks.len() != 5 {
                            return Err(err(
                                ln,
                                "expected `chip E <edge> <rational offset> <int>`",
                            ));
                        }
                        let e = model
                            .edges
                            .get(toks[2])
                            .ok_or_else(|| err(ln, format!("unknown edge {}", toks[2])))?;
                        let off = parse_rational(toks[3]).map_err(|e| err(ln, e))?;
                        if off <= crate::graph_core::Rational::zero() || off >= e.length {
                            return Err(err(
                                ln,
                                format!(
                                    "offset {} out of range (0, {}) on edge {}",
                                    toks[3],
                                    format_rational(&e.length),
                                    toks[2]
                                ),
                            ));
                        }
                        let n: i64 = toks[4]
                            .parse()
                            .map_err(|_| err(ln, format!("bad integer {}", toks[4])))?;
                        d.add(GraphPoint::interior(toks[2], off), n);
                    }
                    _ => return Err(err(ln, "expected `chip V ...` or `chip E ...`")),
                }
            }
            other => return Err(err(ln, format!("unknown statement `{other}`"))),
        }
    }
    let name = name.ok_or_else(|| err(0, "missing `divisor` header"))?;
    let d = d.canonicalize(model).map_err(|e| err(0, e.to_string()))?;
    Ok((name, d))
}

pub fn serialize_divisor(name: &str, model: &MetricGraphModel, d: &Divisor) -> String {
    let mut out = format!("divisor {name} on {}\n", model.name);
    for (p, n) in &d.chips {
        match p {
            GraphPoint::Vertex(v) => out.push_str(&format!("chip V {v} {n}\n")),
            GraphPoint::Interior { edge, offset } => out.push_str(&format!(
                "chip E {edge} {} {n}\n",
                format_rational(offset)
            )),
        }
    }
    out
}

/// Parses a morphism file; header names must match the supplied models.
pub fn parse_morphism(
    text: &str,
    domain: &MetricGraphModel,
    codomain: &MetricGraphModel,
) -> Result<IndexedMorphism, ParseError> {
    let mut seen_header = false;
    let mut phi = IndexedMorphism {
        domain: domain.clone(),
        codomain: codomain.clone(),
        vertex_map: Default::default(),
        edge_map: Default::default(),
        index: Default::default(),
    };
    for (ln, toks) in statements(text) {
        match toks[0] {
            "morphism" => {
                if toks.len() != 6 || toks[2] != "from" || toks[4] != "to" {
                    return Err(err(ln, "expected `morphism <name> from <g1> to <g2>`"));
                }
                if seen_header {
                    return Err(err(ln, "duplicate `morphism` header"));
                }
                if toks[3] != domain.name || toks[5] != codomain.name {
                    return Err(err(
                        ln,
                        format!(
                            "morphism maps {} to {}, expected {} to {}",
                            toks[3], toks[5], domain.name, codomain.name
                        ),
                    ));
                }
                seen_header = true;
            }
            "vmap" => {
                if !seen_header {
                    return Err(err(ln, "`vmap` before `morphism` header"));
                }
                if toks.len() != 3 {
                    return Err(err(ln, "expected `vmap <v1> <v2>`"));
                }
                if !domain.vertices.contains(toks[1]) {
                    return Err(err(ln, format!("unknown domain vertex {}", toks[1])));
                }
                if !codomain.vertices.contains(toks[2]) {
                    return Err(err(ln, format!("unknown codomain vertex {}", toks[2])));
                }
                phi.vertex_map
                    .insert(toks[1].to_string(), toks[2].to_string());
            }
            "emap" => {
                if !seen_header {
                    return Err(err(ln, "`emap` before `morphism` header"));
                }
                if !domain.edges.contains_key(toks.get(1).copied().unwrap_or("")) {
                    return Err(err(
                        ln,
                        format!("unknown domain edge {}", toks.get(1).copied().unwrap_or("")),
                    ));
                }
                match toks.get(2) {
                    Some(&"E") => {
                        if toks.len() != 5 {
                            return Err(err(ln, "expected `emap <e1> E <e2> <index>`"));
                        }
                        if !codomain.edges.contains_key(toks[3]) {
                            return Err(err(ln, format!("unknown codomain edge {}", toks[3])));
                        }
                        let idx: i64 = toks[4]
                            .parse()
                            .map_err(|_| err(ln, format!("bad index {}", toks[4])))?;
                        if idx < 1 {
                            return Err(err(ln, format!("index must be positive, got {idx}")));
                        }
                        phi.edge_map
                            .insert(toks[1].to_string(), EdgeImage::Edge(toks[3].to_string()));
                        phi.index.insert(toks[1].to_string(), idx);
                    }
                    Some(&"V") => {
                        if toks.len() != 4 {
                            return Err(err(ln, "expected `emap <e1> V <v2>`"));
                        }
                        if !codomain.vertices.contains(toks[3]) {
                            return Err(err(ln, format!("unknown codomain vertex {}", toks[3])));
                        }
                        phi.edge_map
                            .insert(toks[1].to_string(), EdgeImage::Vertex(toks[3].to_string()));
                        phi.index.insert(toks[1].to_string(), 0);
                    }
                    _ => return Err(err(ln, "expected `emap <e1> E ...` or `emap <e1> V ...`")),
                }
            }
            other => return Err(err(ln, format!("unknown statement `{other}`"))),
        }
    }
    if !seen_header {
        return Err(err(0, "missing `morphism` header"));
    }
    Ok(phi)
}

pub fn serialize_morphism(name: &str, phi: &IndexedMorphism) -> String {
    let mut out = format!(
        "morphism {name} from {} to {}\n",
        phi.domain.name, phi.codomain.name
    );
    for (v, w) in &phi.vertex_map {
        out.push_str(&format!("vmap {v} {w}\n"));
    }
    for (e, img) in &phi.edge_map {
        match img {
            EdgeImage::Edge(f) => {
                let idx = phi.index.get(e).copied().unwrap_or(1);
                out.push_str(&format!("emap {e} E {f} {idx}\n"));
            }
            EdgeImage::Vertex(w) => out.push_str(&format!("emap {e} V {w}\n")),
        }
    }
    out
}

/// Command-line point syntax: `v:<id>` or `e:<id>:<p/q>`.
pub fn parse_point(s: &str, model: &MetricGraphModel) -> Result<GraphPoint, String> {
    if let Some(v) = s.strip_prefix("v:") {
        if !model.vertices.contains(v) {
            return Err(format!("unknown vertex {v}"));
        }
        return Ok(GraphPoint::vertex(v));
    }
    if let Some(rest) = s.strip_prefix("e:") {
        let (eid, off) = rest
            .rsplit_once(':')
            .ok_or_else(|| format!("expected e:<id>:<offset>, got {s}"))?;
        if !model.edges.contains_key(eid) {
            return Err(format!("unknown edge {eid}"));
        }
        let off = parse_rational(off)?;
        return model
            .canonical_point(&GraphPoint::interior(eid, off))
            .map_err(|e| e.to_string());
    }
    Err(format!("expected v:<id> or e:<id>:<offset>, got {s}"))
}

pub fn format_point(p: &GraphPoint) -> String {
    match p {
        GraphPoint::Vertex(v) => format!("v:{v}"),
        GraphPoint::Interior { edge, offset } => {
            format!("e:{edge}:{}", format_rational(offset))
        }
    }
}

/// Inline divisor expressions: `+`-separated terms, each an optional positive
/// integer coefficient followed by a point (bare vertex id, `v:<id>`, or
/// `e:<id>:<p/q>`). Examples: `3p1`, `2v0 + v2`, `v:a + e:c1:1/2`.
pub fn parse_divisor_expr(s: &str, model: &MetricGraphModel) -> Result<Divisor, String> {
    fn term_point(t: &str, model: &MetricGraphModel) -> Result<GraphPoint, String> {
        if model.vertices.contains(t) {
            Ok(GraphPoint::vertex(t))
        } else {
            parse_point(t, model)
        }
    }
    let mut d = Divisor::zero();
    for term in s.split('+') {
        let t = term.trim();
        if t.is_empty() {
            return Err("empty term in divisor expression".into());
        }
        if let Ok(p) = term_point(t, model) {
            d.add(p, 1);
            continue;
        }
        let digits: String = t.chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            return Err(format!("cannot parse divisor term `{t}`"));
        }
        let coeff: i64 = digits
            .parse()
            .map_err(|_| format!("bad coefficient in `{t}`"))?;
        let rest = t[digits.len()..].trim_start_matches('*').trim();
        let p = term_point(rest, model).map_err(|e| format!("in term `{t}`: {e}"))?;
        d.add(p, coeff);
    }
    d.canonicalize(model).map_err(|e| e.to_string())
}
