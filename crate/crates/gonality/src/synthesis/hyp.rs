//! Trigonal structure on a hyperelliptic graph: fold by the degree-2 class
//! and complete the fibers with a copy of the quotient tree attached at the
//! residual point.

use std::collections::BTreeMap;

use crate::divisor_theory::Divisor;
use crate::graph_core::{GraphPoint, MetricGraphModel};
use crate::morphism::{EdgeImage, IndexedMorphism};

use super::certificate::{certify, import_with_prefix, Certificate, SynthesisError};
use super::fold::fold_by_h;

/// Builds a verified degree-3 morphism for D = h + p on a hyperelliptic
/// model, where h is an effective representative of the hyperelliptic class.
pub fn hyperelliptic_trigonal(
    model: &MetricGraphModel,
    h: &Divisor,
    p: &GraphPoint,
) -> Result<Certificate, SynthesisError> {
    let p = model.canonical_point(p)?;
    let d = h.plus(&Divisor::single(p.clone(), 1));
    let fold = fold_by_h(model, h, &[p.clone()])?;
    let p4 = fold
        .domain
        .canonical_point(&fold.map.forward(model, &fold.domain, &p)?)?;
    let GraphPoint::Vertex(pv) = p4 else {
        return Err(SynthesisError::InternalContradiction(format!(
            "marked point {p} did not become a vertex of the fold"
        )));
    };
    let psi = &fold.morphism;
    let tp = psi.vertex_map[&pv].clone();

    // Copy the whole quotient tree, rooted at the image of p and glued
    // there; each copied edge maps identically with index 1.
    let mut dom = fold.domain.clone();
    let identify = BTreeMap::from([(tp.clone(), pv.clone())]);
    let (avm, aem) = import_with_prefix(&mut dom, &psi.codomain, "sec.", &identify);

    let mut vertex_map = psi.vertex_map.clone();
    for (tv, v) in &avm {
        if *v != pv {
            vertex_map.insert(v.clone(), tv.clone());
        }
    }
    let mut edge_map: BTreeMap<_, _> = psi.edge_map.clone();
    let mut index = psi.index.clone();
    for (te, e) in &aem {
        edge_map.insert(e.clone(), EdgeImage::Edge(te.clone()));
        index.insert(e.clone(), 1);
    }
    let phi = IndexedMorphism {
        domain: dom,
        codomain: psi.codomain.clone(),
        vertex_map,
        edge_map,
        index,
    };
    certify(model, &d, fold.map, phi, "hyperelliptic fold plus section")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::rational::rat;
    use crate::graph_core::rational::rat_int;
    use crate::morphism::TargetShape;

    #[test]
    fn theta_with_vertex_section() {
        let mut m = MetricGraphModel::new("theta");
        m.add_edge("e1", "u", "w", rat_int(1));
        m.add_edge("e2", "u", "w", rat_int(1));
        m.add_edge("e3", "u", "w", rat_int(1));
        let h = Divisor::of(&[
            (GraphPoint::vertex("u"), 1),
            (GraphPoint::vertex("w"), 1),
        ]);
        let cert = hyperelliptic_trigonal(&m, &h, &GraphPoint::vertex("u")).unwrap();
        assert_eq!(cert.report.degree, Some(3));
        assert_eq!(cert.report.target_shape, TargetShape::Tree);
        assert!(cert.check_round_trip().unwrap());
    }

    #[test]
    fn theta_with_interior_section() {
        let mut m = MetricGraphModel::new("theta");
        m.add_edge("e1", "u", "w", rat_int(1));
        m.add_edge("e2", "u", "w", rat_int(1));
        m.add_edge("e3", "u", "w", rat_int(1));
        let h = Divisor::of(&[
            (GraphPoint::vertex("u"), 1),
            (GraphPoint::vertex("w"), 1),
        ]);
        let p = GraphPoint::interior("e2", rat(1, 3));
        let cert = hyperelliptic_trigonal(&m, &h, &p).unwrap();
        assert_eq!(cert.report.degree, Some(3));
        assert!(cert.report.harmonic && cert.report.nondegenerate);
        assert!(cert.check_round_trip().unwrap());
    }
}
