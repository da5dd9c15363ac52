//! Search for a degree-3 rank-1 divisor class.
//!
//! The search is sound by construction: every returned witness passes the
//! rank verifier. Candidates follow the support geometry of admissible
//! representatives: triple points at vertices, 2-edge-cut offsets obeying
//! the doubled-length law, and 3-edge-cut offsets at equal distances from
//! the cut. NoneFound is only claimed for non-necklace inputs, where that
//! geometry is exhaustive; necklace-like leftovers report Unknown.

use std::collections::BTreeSet;

use num_traits::Zero;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::graph_core::{
    canonical_loopless_model, contract_bridges, cut_structure, necklace_decomposition,
    rational::rat, EId, GraphError, GraphPoint, MetricGraphModel, Rational,
};

use super::divisor::Divisor;
use super::hyperelliptic::{hyperelliptic_witness, HyperellipticError};
use super::rank::{rank_at_least, RankError};

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Hyperelliptic(#[from] HyperellipticError),
    #[error("witness search needs genus at least 3, got {0}")]
    GenusTooSmall(i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum W31Verdict {
    Witness(Divisor),
    NoneFound,
    Unknown,
}

/// Base points used for vertex-supported candidates: model vertices plus the
/// canonical loopless model's vertices (loop midpoints, circle antipodes)
/// in input coordinates.
fn candidate_points(model: &MetricGraphModel) -> Result<Vec<GraphPoint>, GraphError> {
    let mut pts: BTreeSet<GraphPoint> = model
        .vertices
        .iter()
        .map(|v| GraphPoint::Vertex(v.clone()))
        .collect();
    let (_, map) = canonical_loopless_model(model)?;
    for img in map.vertex_images.values() {
        pts.insert(model.canonical_point(img)?);
    }
    Ok(pts.into_iter().collect())
}

fn interior_if_valid(model: &MetricGraphModel, e: &str, o: Rational) -> Option<GraphPoint> {
    let len = &model.edges[e].length;
    if o > Rational::zero() && o < *len {
        Some(GraphPoint::interior(e, o))
    } else if o.is_zero() || o == *len {
        Some(
            model
                .canonical_point(&GraphPoint::interior(e, o))
                .expect("offset in range"),
        )
    } else {
        None
    }
}

/// Edge triples that disconnect the model, excluding triples containing a
/// bridge or a 2-edge cut.
fn three_edge_cuts(model: &MetricGraphModel) -> Vec<[EId; 3]> {
    let cs = cut_structure(model);
    if cs.edge_connectivity != 3 {
        return Vec::new();
    }
    let ids: Vec<&EId> = model.edges.keys().collect();
    let mut out = Vec::new();
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            for k in j + 1..ids.len() {
                let skip: BTreeSet<EId> =
                    [ids[i], ids[j], ids[k]].iter().map(|e| (*e).clone()).collect();
                let start = model.vertices.iter().next().unwrap();
                if model.reachable_from(start, &skip, None).len() < model.vertices.len() {
                    out.push([ids[i].clone(), ids[j].clone(), ids[k].clone()]);
                }
            }
        }
    }
    out
}

/// The full candidate list, deduplicated and in lexicographic order.
fn candidates(model: &MetricGraphModel) -> Result<Vec<Divisor>, GraphError> {
    let pts = candidate_points(model)?;
    let mut out: BTreeSet<Divisor> = BTreeSet::new();

    // Vertex-supported multisets of size three.
    for (i, x) in pts.iter().enumerate() {
        for (j, y) in pts.iter().enumerate().skip(i) {
            for z in pts.iter().skip(j) {
                let d = Divisor::of(&[(x.clone(), 1), (y.clone(), 1), (z.clone(), 1)]);
                out.insert(d);
            }
        }
    }

    let cs = cut_structure(model);

    // 2-edge cuts: a doubled chip at a cut-edge endpoint with the third chip
    // on the other cut edge at an offset obeying 2 l(e1) = distance law.
    for (e1, e2) in &cs.two_edge_cuts {
        for (short, long) in [(e1, e2), (e2, e1)] {
            let ls = model.edges[short].length.clone();
            let ll = model.edges[long].length.clone();
            let mut ys: Vec<GraphPoint> = Vec::new();
            for o in [
                rat(2, 1) * ls.clone(),
                ll.clone() - rat(2, 1) * ls.clone(),
            ] {
                if let Some(p) = interior_if_valid(model, long, o) {
                    ys.push(p);
                }
            }
            let ends: BTreeSet<GraphPoint> = [short, long]
                .iter()
                .flat_map(|e| {
                    let edge = &model.edges[*e];
                    [
                        GraphPoint::Vertex(edge.u.clone()),
                        GraphPoint::Vertex(edge.v.clone()),
                    ]
                })
                .collect();
            for x in &ends {
                for y in &ys {
                    out.insert(Divisor::of(&[(x.clone(), 2), (y.clone(), 1)]));
                    for z in &pts {
                        out.insert(Divisor::of(&[
                            (x.clone(), 1),
                            (y.clone(), 1),
                            (z.clone(), 1),
                        ]));
                    }
                }
            }
        }
    }

    // 3-edge cuts: one chip at an endpoint vertex of one cut edge, the other
    // two on the remaining cut edges at equal distances from the far side.
    for cut in three_edge_cuts(model) {
        for base in 0..3 {
            let e0 = &cut[base];
            let others: Vec<&EId> = (0..3).filter(|i| *i != base).map(|i| &cut[i]).collect();
            let l0 = model.edges[e0].length.clone();
            let edge0 = &model.edges[e0];
            for x in [&edge0.u, &edge0.v] {
                let mut supports = vec![vec![GraphPoint::Vertex(x.clone())]];
                for e in &others {
                    let le = model.edges[*e].length.clone();
                    let mut opts = Vec::new();
                    for o in [le.clone() - l0.clone(), l0.clone()] {
                        if let Some(p) = interior_if_valid(model, e, o) {
                            opts.push(p);
                        }
                    }
                    supports.push(opts);
                }
                for p1 in &supports[1] {
                    for p2 in &supports[2] {
                        out.insert(Divisor::of(&[
                            (supports[0][0].clone(), 1),
                            (p1.clone(), 1),
                            (p2.clone(), 1),
                        ]));
                    }
                }
            }
        }
    }

    Ok(out.into_iter().collect())
}

fn rank_one_holds(model: &MetricGraphModel, d: &Divisor) -> bool {
    rank_at_least(model, d, 1).unwrap_or(false)
}

/// Searches W^1_3: hyperelliptic graphs get H + v immediately; otherwise
/// the candidate list is scanned (in parallel when enabled) and the
/// lexicographically first rank-verified divisor is the witness.
pub fn search_w31(model: &MetricGraphModel) -> Result<W31Verdict, WitnessError> {
    search_w31_impl(model, cfg!(feature = "parallel"))
}

/// The sequential fallback, always available; the bench suite compares it
/// against the parallel scan. Both return the lexicographically first
/// witness, so the verdicts agree.
pub fn search_w31_sequential(model: &MetricGraphModel) -> Result<W31Verdict, WitnessError> {
    search_w31_impl(model, false)
}

fn search_w31_impl(
    model: &MetricGraphModel,
    parallel: bool,
) -> Result<W31Verdict, WitnessError> {
    model.validate()?;
    if model.genus() < 3 {
        return Err(WitnessError::GenusTooSmall(model.genus()));
    }
    if let Some((h, _)) = hyperelliptic_witness(model)? {
        let v = GraphPoint::Vertex(model.vertices.iter().next().unwrap().clone());
        let d = h.plus(&Divisor::single(v, 1));
        debug_assert!(rank_one_holds(model, &d));
        return Ok(W31Verdict::Witness(d));
    }
    let cands = candidates(model)?;

    #[cfg(feature = "parallel")]
    let found = if parallel {
        cands
            .par_iter()
            .find_first(|d| rank_one_holds(model, d))
            .cloned()
    } else {
        cands.iter().find(|d| rank_one_holds(model, d)).cloned()
    };
    #[cfg(not(feature = "parallel"))]
    let found = {
        let _ = parallel;
        cands.iter().find(|d| rank_one_holds(model, d)).cloned()
    };

    if let Some(d) = found {
        debug_assert!(!rank_at_least(model, &d, 2)?);
        return Ok(W31Verdict::Witness(d));
    }
    let (contracted, _) = contract_bridges(model);
    if necklace_decomposition(&contracted).is_none() {
        Ok(W31Verdict::NoneFound)
    } else {
        Ok(W31Verdict::Unknown)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::rational::rat_int;

    fn luo_like() -> MetricGraphModel {
        let mut m = MetricGraphModel::new("luo");
        m.add_edge("c1", "p1", "p2", rat_int(1));
        m.add_edge("c2", "p2", "p3", rat_int(1));
        m.add_edge("c3", "p3", "p1", rat_int(1));
        for i in 1..=3 {
            for j in 1..=3 {
                m.add_edge(&format!("t{i}{j}"), &format!("p{i}"), &format!("q{i}"), rat_int(1));
            }
        }
        m
    }

    #[test]
    fn necklace_witness_is_triple_cycle_vertex() {
        let m = luo_like();
        let v = search_w31(&m).unwrap();
        let W31Verdict::Witness(d) = v else {
            panic!("expected a witness, got {v:?}")
        };
        assert_eq!(d.degree(), 3);
        assert!(rank_at_least(&m, &d, 1).unwrap());
        assert!(!rank_at_least(&m, &d, 2).unwrap());
        // p1 + p2 + p3 ~ 3 p1 is the class; the lex-first verified candidate
        // is the attach-vertex triple.
        assert_eq!(
            d,
            Divisor::of(&[
                (GraphPoint::vertex("p1"), 1),
                (GraphPoint::vertex("p2"), 1),
                (GraphPoint::vertex("p3"), 1),
            ])
        );
    }

    #[test]
    fn hyperelliptic_genus_three_gets_h_plus_v() {
        // Chain of three parallel-edge pairs: u = w with three 2-bundles?
        // Simpler: theta with one edge doubled in series keeps genus 2, so
        // use two vertices joined by four parallel edges (genus 3).
        let mut m = MetricGraphModel::new("banana4");
        for i in 1..=4 {
            m.add_edge(&format!("e{i}"), "u", "w", rat_int(1));
        }
        let v = search_w31(&m).unwrap();
        let W31Verdict::Witness(d) = v else {
            panic!("expected witness")
        };
        assert_eq!(d.degree(), 3);
        assert!(rank_at_least(&m, &d, 1).unwrap());
    }

    #[test]
    fn k4_search_is_decisive_and_sound() {
        let mut m = MetricGraphModel::new("k4");
        let pairs = [("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")];
        for (i, (x, y)) in pairs.iter().enumerate() {
            m.add_edge(&format!("e{i}"), x, y, rat_int(1));
        }
        match search_w31(&m).unwrap() {
            W31Verdict::Witness(d) => {
                assert_eq!(d.degree(), 3);
                assert!(rank_at_least(&m, &d, 1).unwrap());
            }
            W31Verdict::NoneFound => {}
            W31Verdict::Unknown => panic!("K4 is not a necklace"),
        }
    }

    #[test]
    fn genus_two_is_rejected() {
        let mut m = MetricGraphModel::new("theta");
        m.add_edge("e1", "u", "w", rat_int(1));
        m.add_edge("e2", "u", "w", rat_int(1));
        m.add_edge("e3", "u", "w", rat_int(1));
        assert!(matches!(
            search_w31(&m),
            Err(WitnessError::GenusTooSmall(2))
        ));
    }
}
