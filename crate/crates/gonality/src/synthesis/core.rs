//! The fiber construction for non-hyperelliptic synthesis: refine until the
//! maximal admissible divisors at the (core) vertices have vertex supports,
//! read fibers off their supports, and derive edge indices and target
//! lengths from the moving coefficients.

use std::collections::{BTreeMap, BTreeSet};

use crate::divisor_theory::Divisor;
use crate::graph_core::{
    refine, suppress_vertices, EId, GraphPoint, MetricGraphModel, ModelMap, Rational, VId,
};
use crate::morphism::{EdgeImage, IndexedMorphism};

use super::certificate::{divisor_backward, divisor_forward, SynthesisError};
use super::maximal::maximal_admissible;

/// Everything the bucket construction produces over a chosen core edge set.
#[derive(Clone, Debug)]
pub(crate) struct CoreData {
    pub refined: MetricGraphModel,
    /// `refined` over the input model.
    pub map: ModelMap,
    /// Distinct maximal admissible divisors, input coordinates, lex order.
    /// Kept for Debug output; fibers are consumed through `fiber_of`.
    #[allow(dead_code)]
    pub divisors: Vec<Divisor>,
    /// Refined core vertex -> index of its own maximal divisor.
    pub fiber_of: BTreeMap<VId, usize>,
    /// Refined core edge -> image and index.
    pub edge_images: BTreeMap<EId, (EdgeImage, i64)>,
    /// The core piece of the target.
    pub target: MetricGraphModel,
    /// Target vertex per divisor index.
    pub target_vertex: Vec<VId>,
}

fn core_edges_of(
    cur: &MetricGraphModel,
    map: &ModelMap,
    core0: &BTreeSet<EId>,
) -> BTreeSet<EId> {
    cur.edges
        .keys()
        .filter(|eid| {
            map.edge_charts[*eid]
                .iter()
                .all(|c| core0.contains(&c.base_edge))
        })
        .cloned()
        .collect()
}

/// Runs the construction on the edges of `core` (all edges when None).
/// `extras` are points forced to become core vertices with their own fibers.
pub(crate) fn core_data(
    model: &MetricGraphModel,
    d: &Divisor,
    core: Option<&BTreeSet<EId>>,
    extras: &[GraphPoint],
    prefix: &str,
) -> Result<CoreData, SynthesisError> {
    let core0: BTreeSet<EId> = match core {
        Some(s) => s.clone(),
        None => model.edges.keys().cloned().collect(),
    };
    if core0.is_empty() {
        return Err(SynthesisError::Precondition("empty core edge set".into()));
    }

    let mut pts: BTreeSet<GraphPoint> = BTreeSet::new();
    let mut keep: BTreeSet<VId> = BTreeSet::new();
    for p in extras {
        let p = model.canonical_point(p)?;
        match &p {
            GraphPoint::Interior { edge, .. } => {
                if !core0.contains(edge) {
                    return Err(SynthesisError::InternalContradiction(format!(
                        "extra core point {p} lies outside the core"
                    )));
                }
                pts.insert(p);
            }
            GraphPoint::Vertex(v) => {
                keep.insert(v.clone());
            }
        }
    }

    // Stray subdivision vertices of the input (chip-free, valence 2, interior
    // to a core path) are not fiber bases: their reduced divisors need not be
    // fibers, so basing the cascade at them breaks the support-disjointness
    // the construction relies on. Suppress them first; the cascade re-refines
    // wherever the fiber structure actually demands a vertex.
    for v in &model.vertices {
        if keep.contains(v) {
            continue;
        }
        let ends = model.ends_at(v);
        let junk = ends.len() == 2
            && ends[0].0 != ends[1].0
            && ends.iter().all(|(e, _)| core0.contains(e))
            && d.coeff(&GraphPoint::Vertex(v.clone())) == 0;
        if !junk {
            keep.insert(v.clone());
        }
    }
    let (sup, smap) = suppress_vertices(model, &keep)?;

    let mut rounds = 0;
    loop {
        rounds += 1;
        if rounds > 16 {
            return Err(SynthesisError::InternalContradiction(
                "core refinement did not stabilize".into(),
            ));
        }
        let mut ptv: Vec<GraphPoint> = Vec::new();
        for p in &pts {
            ptv.push(smap.forward(model, &sup, p)?);
        }
        let (cur, rmap) = refine(&sup, &ptv)?;
        let map = smap.compose(model, &rmap)?;
        let core_edges = core_edges_of(&cur, &map, &core0);
        let core_vertices: BTreeSet<VId> = core_edges
            .iter()
            .flat_map(|e| {
                let edge = &cur.edges[e];
                [edge.u.clone(), edge.v.clone()]
            })
            .collect();
        let d_cur = divisor_forward(&map, model, &cur, d)?;

        let mut maxdivs: BTreeMap<VId, Divisor> = BTreeMap::new();
        let mut grew = false;
        for v in &core_vertices {
            let m = maximal_admissible(&cur, &d_cur, &GraphPoint::Vertex(v.clone()))?;
            for p in m.divisor.support() {
                if let GraphPoint::Interior { edge, .. } = &p {
                    if core_edges.contains(edge) && pts.insert(map.backward(model, &p)?) {
                        grew = true;
                    }
                }
            }
            maxdivs.insert(v.clone(), m.divisor);
        }
        if grew {
            continue;
        }

        return finalize(model, d, cur, map, core_edges, core_vertices, maxdivs, prefix);
    }
}

#[allow(clippy::too_many_arguments)]
fn finalize(
    model: &MetricGraphModel,
    _d: &Divisor,
    cur: MetricGraphModel,
    map: ModelMap,
    core_edges: BTreeSet<EId>,
    core_vertices: BTreeSet<VId>,
    maxdivs: BTreeMap<VId, Divisor>,
    prefix: &str,
) -> Result<CoreData, SynthesisError> {
    // Outside the core a fiber may only carry the static residual chips
    // shared by every fiber. A maximal divisor with extra outside support
    // (parking a glued-off half's sweeping pair there frees chips to pile
    // up on the core) is not a fiber and is discarded. Deduplicate in
    // input coordinates.
    let outside = |dv: &Divisor| -> Divisor {
        let mut o = Divisor::zero();
        for (p, n) in &dv.chips {
            let inside = match p {
                GraphPoint::Vertex(w) => core_vertices.contains(w),
                GraphPoint::Interior { edge, .. } => core_edges.contains(edge),
            };
            if !inside {
                o.add(p.clone(), *n);
            }
        }
        o
    };
    let mut common: Option<Divisor> = None;
    for dv in maxdivs.values() {
        let o = outside(dv);
        common = Some(match common {
            None => o,
            Some(c) => {
                let mut m = Divisor::zero();
                for (p, n) in &c.chips {
                    let k = (*n).min(o.coeff(p));
                    if k > 0 {
                        m.add(p.clone(), k);
                    }
                }
                m
            }
        });
    }
    let common = common.unwrap_or_else(Divisor::zero);
    let mut distinct: BTreeSet<Divisor> = BTreeSet::new();
    for dv in maxdivs.values() {
        if outside(dv) == common {
            distinct.insert(divisor_backward(&map, model, dv)?);
        }
    }
    let divisors: Vec<Divisor> = distinct.into_iter().collect();

    // Each core vertex belongs to exactly one fiber.
    let mut fiber_of: BTreeMap<VId, usize> = BTreeMap::new();
    for v in &core_vertices {
        let bp = map
            .vertex_images
            .get(v)
            .cloned()
            .unwrap_or_else(|| GraphPoint::Vertex(v.clone()));
        let bp = model.canonical_point(&bp)?;
        let hits: Vec<usize> = divisors
            .iter()
            .enumerate()
            .filter(|(_, d)| d.coeff(&bp) > 0)
            .map(|(k, _)| k)
            .collect();
        match hits.as_slice() {
            [k] => {
                fiber_of.insert(v.clone(), *k);
            }
            [] => {
                return Err(SynthesisError::InternalContradiction(format!(
                    "no core fiber contains the vertex {v}"
                )))
            }
            _ => {
                return Err(SynthesisError::InternalContradiction(format!(
                    "maximal supports overlap at {v}: divisors {} and {}",
                    divisors[hits[0]], divisors[hits[1]]
                )));
            }
        }
    }

    // Target vertices, one per fiber.
    let mut target = MetricGraphModel::new(&format!("{}.target", model.name));
    let mut target_vertex = Vec::new();
    for k in 0..divisors.len() {
        let t = format!("{prefix}t{k}");
        target.add_vertex(&t);
        target_vertex.push(t);
    }

    // Group core edges into buckets between fiber pairs; same-fiber edges
    // are contracted.
    let mut edge_images: BTreeMap<EId, (EdgeImage, i64)> = BTreeMap::new();
    let mut buckets: BTreeMap<(usize, usize), Vec<EId>> = BTreeMap::new();
    for e in &core_edges {
        let edge = &cur.edges[e];
        let (fu, fv) = (fiber_of[&edge.u], fiber_of[&edge.v]);
        if fu == fv {
            edge_images.insert(
                e.clone(),
                (EdgeImage::Vertex(target_vertex[fu].clone()), 0),
            );
        } else {
            buckets
                .entry((fu.min(fv), fu.max(fv)))
                .or_default()
                .push(e.clone());
        }
    }

    for ((i, j), edges) in &buckets {
        // All bucket edges cover one target edge, so index times length is a
        // common constant L, and at each endpoint the indices meeting it sum
        // to the fiber's chip count there: c_x = L * sum over edges at x of
        // 1/l_e. Solve for L from every endpoint and check agreement.
        use num_traits::{One, Zero};
        let mut inv_sum: BTreeMap<VId, Rational> = BTreeMap::new();
        for e in edges {
            let edge = &cur.edges[e];
            for x in [&edge.u, &edge.v] {
                *inv_sum.entry(x.clone()).or_insert_with(Rational::zero) +=
                    Rational::one() / edge.length.clone();
            }
        }
        let mut tlen: Option<Rational> = None;
        for (x, s) in &inv_sum {
            let bp = map
                .vertex_images
                .get(x)
                .cloned()
                .unwrap_or_else(|| GraphPoint::Vertex(x.clone()));
            let c = divisors[fiber_of[x]].coeff(&model.canonical_point(&bp)?);
            if c <= 0 {
                return Err(SynthesisError::InternalContradiction(format!(
                    "bucket ({i},{j}) endpoint {x} carries no chip of its fiber divisor"
                )));
            }
            let l = crate::graph_core::rational::rat_int(c) / s.clone();
            match &tlen {
                None => tlen = Some(l),
                Some(t) if *t == l => {}
                Some(t) => {
                    return Err(SynthesisError::InternalContradiction(format!(
                        "cut length law fails in bucket ({i},{j}): {t} vs {l} at {x}"
                    )));
                }
            }
        }
        let tlen = tlen.expect("nonempty bucket");
        let mut mu: BTreeMap<EId, i64> = BTreeMap::new();
        for e in edges {
            use num_traits::ToPrimitive;
            let q = tlen.clone() / cur.edges[e].length.clone();
            let m = if q.is_integer() { q.to_integer().to_i64() } else { None };
            let Some(m) = m.filter(|m| (1..=3).contains(m)) else {
                return Err(SynthesisError::InternalContradiction(format!(
                    "edge {e} in bucket ({i},{j}) would need index {q}, outside 1..=3"
                )));
            };
            mu.insert(e.clone(), m);
        }
        let tid = format!("{prefix}f{i}-{j}");
        target.add_edge(&tid, &target_vertex[*i], &target_vertex[*j], tlen);
        for e in edges {
            edge_images.insert(e.clone(), (EdgeImage::Edge(tid.clone()), mu[e]));
        }
    }

    Ok(CoreData {
        refined: cur,
        map,
        divisors,
        fiber_of,
        edge_images,
        target,
        target_vertex,
    })
}

/// Whole-graph construction: every vertex sits in a fiber and the bucket
/// data is a complete harmonic morphism onto the core target.
pub fn build_morphism_nonhyp(
    model: &MetricGraphModel,
    d: &Divisor,
) -> Result<(IndexedMorphism, ModelMap), SynthesisError> {
    let cd = core_data(model, d, None, &[], "")?;
    let vertex_map: BTreeMap<VId, VId> = cd
        .fiber_of
        .iter()
        .map(|(v, k)| (v.clone(), cd.target_vertex[*k].clone()))
        .collect();
    let mut edge_map = BTreeMap::new();
    let mut index = BTreeMap::new();
    for (e, (img, m)) in &cd.edge_images {
        edge_map.insert(e.clone(), img.clone());
        index.insert(e.clone(), *m);
    }
    let phi = IndexedMorphism {
        domain: cd.refined,
        codomain: cd.target,
        vertex_map,
        edge_map,
        index,
    };
    Ok((phi, cd.map))
}
