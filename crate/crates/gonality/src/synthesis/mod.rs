//! Constructive synthesis of degree-3 harmonic morphisms.

pub mod certificate;
pub mod closure;
mod core;
pub mod cycle;
pub mod fold;
pub mod halves;
pub mod hyp;
pub mod maximal;
pub mod necklace;
mod trees;

pub use certificate::{certify, Certificate, Synthesis, SynthesisError};
pub use closure::close_by_leaf_gluing;
pub use core::build_morphism_nonhyp;
pub use cycle::cycle_morphism;
pub use fold::{degree2_from_involution, fold_by_h, partner_point, Fold};
pub use halves::{
    check_h1_h2, find_hyperelliptic_halves, glue_hyperelliptic, Halves, HyperellipticHalf,
};
pub use hyp::hyperelliptic_trigonal;
pub use maximal::{maximal_admissible, MaximalAdmissible};
pub use necklace::necklace_synthesize;

use crate::divisor_theory::{hyperelliptic_witness, rank_at_least, reduce, Divisor};
use crate::graph_core::{
    canonical_loopless_model, contract_bridges, necklace_decomposition, GraphPoint,
    MetricGraphModel,
};

/// The dispatcher: given a model and a degree-3 rank-1 class, builds and
/// independently verifies a non-degenerate harmonic degree-3 morphism, or
/// returns an honest verdict. Deterministic in its inputs.
pub fn synthesize(model: &MetricGraphModel, d: &Divisor) -> Result<Synthesis, SynthesisError> {
    model.validate().map_err(SynthesisError::Graph)?;
    let d = d.canonicalize(model)?;
    if d.degree() != 3 {
        return Err(SynthesisError::Precondition(format!(
            "synthesis needs a degree-3 divisor, got degree {}",
            d.degree()
        )));
    }
    if !rank_at_least(model, &d, 1)? {
        return Err(SynthesisError::Precondition(
            "divisor does not have rank at least 1".into(),
        ));
    }

    // Hanging trees carry no genus; chips on them slide to the attachment
    // vertices, and the constructions below assume there are none. Build on
    // the pruned core and cover the trees afterwards.
    let (core, hanging) = trees::prune_hanging_trees(model);
    if !hanging.is_empty() && !core.edges.is_empty() {
        let q = GraphPoint::Vertex(core.vertices.iter().next().unwrap().clone());
        let (dr, _) = reduce(model, &d, &q)?;
        let mut dcore = Divisor::zero();
        for (p, n) in &dr.chips {
            if core.canonical_point(p).is_err() {
                return Err(SynthesisError::InternalContradiction(format!(
                    "reduced witness keeps a chip at {p} on a hanging tree"
                )));
            }
            dcore.add(p.clone(), *n);
        }
        return match synthesize(&core, &dcore)? {
            Synthesis::Certificate(c) => {
                let cert = trees::extend_over_hanging_trees(&core, &hanging, *c)?;
                Ok(Synthesis::Certificate(Box::new(cert)))
            }
            other => Ok(other),
        };
    }

    if model.genus() >= 2 {
        if let Some((h, _)) = hyperelliptic_witness(model)? {
            let q = GraphPoint::Vertex(model.vertices.iter().next().cloned().ok_or_else(
                || SynthesisError::Precondition("model has no vertices".into()),
            )?);
            let (r, _) = reduce(model, &d.minus(&h), &q)?;
            if !r.is_effective() || r.degree() != 1 {
                return Err(SynthesisError::InternalContradiction(
                    "D - H has no effective degree-1 representative".into(),
                ));
            }
            let p = r.support()[0].clone();
            let cert = hyperelliptic_trigonal(model, &h, &p)?;
            return Ok(Synthesis::Certificate(Box::new(cert)));
        }
    }

    let (contracted, _) = contract_bridges(model);
    let (canon, _) = canonical_loopless_model(&contracted)?;
    if canon.vertices.len() <= 3 {
        return Ok(Synthesis::ExceptionSmallCanonicalModel {
            vertices: canon.vertices.len(),
        });
    }

    // Necklaces route to their own branch: hyperelliptic subgraphs of a
    // necklace sit inside halves, and the generic gluing does not cover them.
    if necklace_decomposition(&contracted).is_some() {
        return necklace_synthesize(model, &d);
    }

    let (m0, map0) = canonical_loopless_model(model)?;
    let d0 = certificate::divisor_forward(&map0, model, &m0, &d)?;
    let halves = find_hyperelliptic_halves(&m0, &d0)?;
    if !halves.halves.is_empty() {
        let cert0 = glue_hyperelliptic(&m0, &d0, &halves)?;
        let embedding = map0.compose(model, &cert0.embedding)?;
        let cert = certify(model, &d, embedding, cert0.morphism, &cert0.provenance)?;
        return Ok(Synthesis::Certificate(Box::new(cert)));
    }
    let (phi, mapr) = build_morphism_nonhyp(&m0, &d0)?;
    let embedding = map0.compose(model, &mapr)?;
    let cert = certify(model, &d, embedding, phi, "core fiber construction")?;
    Ok(Synthesis::Certificate(Box::new(cert)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::rational::rat_int;
    use crate::morphism::TargetShape;

    #[test]
    fn dispatcher_folds_the_theta() {
        let mut m = MetricGraphModel::new("theta");
        m.add_edge("e1", "u", "w", rat_int(1));
        m.add_edge("e2", "u", "w", rat_int(1));
        m.add_edge("e3", "u", "w", rat_int(1));
        let d = Divisor::of(&[
            (GraphPoint::vertex("u"), 2),
            (GraphPoint::vertex("w"), 1),
        ]);
        let s = synthesize(&m, &d).unwrap();
        let Synthesis::Certificate(cert) = s else {
            panic!("expected certificate, got {s:?}")
        };
        assert_eq!(cert.provenance, "hyperelliptic fold plus section");
        assert!(cert.check_round_trip().unwrap());
    }

    #[test]
    fn dispatcher_routes_k4_to_the_core_construction() {
        let mut m = MetricGraphModel::new("k4");
        let vs = ["a", "b", "c", "d"];
        let mut k = 0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                m.add_edge(&format!("e{k}"), vs[i], vs[j], rat_int(1));
                k += 1;
            }
        }
        let d = Divisor::single(GraphPoint::vertex("a"), 3);
        let s = synthesize(&m, &d).unwrap();
        let Synthesis::Certificate(cert) = s else {
            panic!("expected certificate, got {s:?}")
        };
        assert_eq!(cert.provenance, "core fiber construction");
        assert_eq!(cert.report.target_shape, TargetShape::Tree);
        assert!(cert.check_round_trip().unwrap());
    }

    #[test]
    fn dispatcher_routes_luo_to_the_necklace_branch() {
        let mut m = MetricGraphModel::new("luo");
        m.add_edge("c1", "p1", "p2", rat_int(1));
        m.add_edge("c2", "p2", "p3", rat_int(1));
        m.add_edge("c3", "p3", "p1", rat_int(1));
        for i in 1..=3 {
            for j in 1..=3 {
                m.add_edge(
                    &format!("t{i}{j}"),
                    &format!("p{i}"),
                    &format!("q{i}"),
                    rat_int(1),
                );
            }
        }
        let d = Divisor::of(&[
            (GraphPoint::vertex("p1"), 1),
            (GraphPoint::vertex("p2"), 1),
            (GraphPoint::vertex("p3"), 1),
        ]);
        let s = synthesize(&m, &d).unwrap();
        let Synthesis::Certificate(cert) = s else {
            panic!("expected certificate, got {s:?}")
        };
        assert_eq!(cert.provenance, "necklace triple-point assembly");
        assert_eq!(cert.report.target_shape, TargetShape::TreeOfTriangles);
    }

    #[test]
    fn small_canonical_model_is_an_exception() {
        // A single circle: genus 1, canonical loopless model has 2 vertices.
        let mut m = MetricGraphModel::new("circle");
        m.add_edge("a", "v", "w", rat_int(2));
        m.add_edge("b", "v", "w", rat_int(2));
        let d = Divisor::single(GraphPoint::vertex("v"), 3);
        let s = synthesize(&m, &d).unwrap();
        assert!(
            matches!(s, Synthesis::ExceptionSmallCanonicalModel { .. }),
            "{s:?}"
        );
    }
}
