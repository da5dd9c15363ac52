//! Deterministic DOT output for models and certificates.

use std::fmt::Write as _;

use crate::divisor_theory::Divisor;
use crate::graph_core::rational::format_rational;
use crate::graph_core::{GraphPoint, MetricGraphModel};
use crate::morphism::EdgeImage;
use crate::synthesis::Certificate;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn write_body(out: &mut String, model: &MetricGraphModel, d: Option<&Divisor>, indent: &str) {
    for v in &model.vertices {
        let mut label = v.clone();
        if let Some(d) = d {
            let n = d.coeff(&GraphPoint::Vertex(v.clone()));
            if n != 0 {
                let _ = write!(label, " [{n}]");
            }
        }
        let _ = writeln!(out, "{indent}{} [label={}];", quote(v), quote(&label));
    }
    for (eid, e) in &model.edges {
        let mut label = format!("{eid}: {}", format_rational(&e.length));
        if let Some(d) = d {
            for (p, n) in &d.chips {
                if let GraphPoint::Interior { edge, offset } = p {
                    if edge == eid {
                        let _ = write!(label, " @{}:{n}", format_rational(offset));
                    }
                }
            }
        }
        let _ = writeln!(
            out,
            "{indent}{} -- {} [label={}];",
            quote(&e.u),
            quote(&e.v),
            quote(&label)
        );
    }
}

/// DOT for a single model; divisor chips, when given, are folded into the
/// node and edge labels.
pub fn export_dot_model(model: &MetricGraphModel, d: Option<&Divisor>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "graph {} {{", quote(&model.name));
    write_body(&mut out, model, d, "  ");
    out.push_str("}\n");
    out
}

/// DOT for a certificate: the modified domain and the target as two
/// clusters, with fiber edges annotated by index.
pub fn export_dot_certificate(cert: &Certificate) -> String {
    let phi = &cert.morphism;
    let dd = cert.divisor_on_modified().ok();
    let mut out = String::new();
    let _ = writeln!(out, "graph {} {{", quote(&format!("{}.cert", cert.base.name)));
    let _ = writeln!(out, "  subgraph cluster_domain {{");
    let _ = writeln!(out, "    label={};", quote(&phi.domain.name));
    for v in &phi.domain.vertices {
        let mut label = v.clone();
        if let Some(d) = &dd {
            let n = d.coeff(&GraphPoint::Vertex(v.clone()));
            if n != 0 {
                let _ = write!(label, " [{n}]");
            }
        }
        let _ = writeln!(out, "    {} [label={}];", quote(v), quote(&label));
    }
    for (eid, e) in &phi.domain.edges {
        let idx = phi.index.get(eid).copied().unwrap_or(1);
        let img = match phi.edge_map.get(eid) {
            Some(EdgeImage::Edge(f)) => format!(" -> {f} x{idx}"),
            Some(EdgeImage::Vertex(w)) => format!(" -> {w} x0"),
            None => String::new(),
        };
        let _ = writeln!(
            out,
            "    {} -- {} [label={}];",
            quote(&e.u),
            quote(&e.v),
            quote(&format!("{eid}: {}{img}", format_rational(&e.length)))
        );
    }
    let _ = writeln!(out, "  }}");
    let _ = writeln!(out, "  subgraph cluster_target {{");
    let _ = writeln!(out, "    label={};", quote(&phi.codomain.name));
    write_body(&mut out, &phi.codomain, None, "    ");
    let _ = writeln!(out, "  }}");
    out.push_str("}\n");
    out
}
