//! Synthesis on necklaces: a cycle with positive-genus components hanging
//! at three or more attach points. Two constructions cover the class: the
//! triple-point assembly (D ~ 3x at every attach point, tree-of-triangles
//! target) and the loop-chain assembly (D ~ 2x + p, loops contracted,
//! tree target).

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::divisor_theory::{reduce, Divisor};
use crate::graph_core::{
    canonical_loopless_model, contract_bridges, necklace_decomposition,
    rational::rat,
    refine, EId, GraphPoint, MetricGraphModel, Rational, VId,
};
use crate::morphism::{self, EdgeImage, IndexedMorphism};

use super::certificate::{
    certify, divisor_forward, edge_subgraph, import_with_prefix, Synthesis, SynthesisError,
};
use super::core::build_morphism_nonhyp;
use super::fold::fold_by_h;

/// Positions along the necklace cycle, measured from an arbitrary origin.
struct CycleWalk {
    /// edge -> (start position, reversed).
    place: BTreeMap<EId, (Rational, bool)>,
    vpos: BTreeMap<VId, Rational>,
    total: Rational,
}

impl CycleWalk {
    fn new(model: &MetricGraphModel, cycle: &[EId]) -> Result<CycleWalk, SynthesisError> {
        if cycle.len() < 2 {
            return Err(SynthesisError::InternalContradiction(
                "necklace cycle has fewer than two edges".into(),
            ));
        }
        let e0 = &model.edges[&cycle[0]];
        let e1 = &model.edges[&cycle[1]];
        // The walk enters cycle[1] at the vertex shared with cycle[0].
        let shared = if e0.v == e1.u || e0.v == e1.v {
            e0.v.clone()
        } else {
            e0.u.clone()
        };
        let mut at = model.edges[&cycle[0]].other(&shared).clone();
        let mut pos = Rational::zero();
        let mut place = BTreeMap::new();
        let mut vpos = BTreeMap::new();
        for eid in cycle {
            let e = &model.edges[eid];
            vpos.entry(at.clone()).or_insert_with(|| pos.clone());
            place.insert(eid.clone(), (pos.clone(), e.u != at));
            pos += e.length.clone();
            at = e.other(&at).clone();
        }
        Ok(CycleWalk { place, vpos, total: pos })
    }

    fn pmod(&self, x: Rational) -> Rational {
        let mut x = x;
        while x < Rational::zero() {
            x += self.total.clone();
        }
        while x >= self.total {
            x -= self.total.clone();
        }
        x
    }

    fn pos_of(&self, model: &MetricGraphModel, p: &GraphPoint) -> Option<Rational> {
        match p {
            GraphPoint::Vertex(v) => self.vpos.get(v).cloned(),
            GraphPoint::Interior { edge, offset } => {
                let (start, rev) = self.place.get(edge)?;
                let len = model.edges[edge].length.clone();
                let o = if *rev { len - offset.clone() } else { offset.clone() };
                Some(self.pmod(start.clone() + o))
            }
        }
    }

    fn point_at(&self, model: &MetricGraphModel, pos: &Rational) -> GraphPoint {
        let pos = self.pmod(pos.clone());
        for (eid, (start, rev)) in &self.place {
            let len = model.edges[eid].length.clone();
            if pos >= *start && pos < start.clone() + len.clone() {
                let o = pos.clone() - start.clone();
                let o = if *rev { len - o } else { o };
                return model
                    .canonical_point(&GraphPoint::interior(eid, o))
                    .expect("offset in range");
            }
        }
        unreachable!("position within cycle length")
    }
}

/// Entry point for necklace inputs; contracts bridges first, so the
/// certificate's base model is the bridge-contracted input.
pub fn necklace_synthesize(
    model: &MetricGraphModel,
    d: &Divisor,
) -> Result<Synthesis, SynthesisError> {
    let (contracted, cmap) = contract_bridges(model);
    let mut dc = Divisor::zero();
    for (p, n) in &d.canonicalize(model)?.chips {
        dc.add(cmap.forward(p)?, *n);
    }
    let dc = dc.canonicalize(&contracted)?;
    if let Some(s) = triple_point_assembly(&contracted, &dc)? {
        return Ok(s);
    }
    if let Some(s) = loop_chain_assembly(&contracted, &dc)? {
        return Ok(s);
    }
    Ok(Synthesis::OutsideCharacterizedClass {
        reason: "necklace divisor is neither a triple point at every attach point \
                 nor of the form 2x + p with contractible loop components"
            .into(),
    })
}

/// D ~ 3x at each of three attach points: components map over their own
/// targets with a triple-point fiber at the attach vertex, and the cycle
/// stretches threefold over a triangle.
fn triple_point_assembly(
    contracted: &MetricGraphModel,
    dc: &Divisor,
) -> Result<Option<Synthesis>, SynthesisError> {
    let (m0, map0) = canonical_loopless_model(contracted)?;
    let d0 = divisor_forward(&map0, contracted, &m0, dc)?;
    let Some(nd) = necklace_decomposition(&m0) else {
        return Ok(None);
    };
    let xs = nd.attach_points.clone();
    if xs.len() != 3 || nd.cycle.len() != 3 {
        return Ok(None);
    }
    for x in &xs {
        let (r, _) = reduce(&m0, &d0, &GraphPoint::Vertex(x.clone()))?;
        if r != Divisor::single(GraphPoint::Vertex(x.clone()), 3) {
            return Ok(None);
        }
    }
    let mut comps: Vec<&MetricGraphModel> = Vec::new();
    for x in &xs {
        let Some(c) = nd.components.iter().find(|c| c.vertices.contains(x)) else {
            return Ok(None);
        };
        comps.push(c);
    }

    let is_circle =
        |c: &MetricGraphModel| c.genus() == 1 && c.vertices.iter().all(|v| c.valence(v) == 2);

    // First pass learns the refinement each component construction needs.
    let mut pts: BTreeSet<GraphPoint> = BTreeSet::new();
    for (i, comp) in comps.iter().enumerate() {
        if is_circle(comp) {
            continue;
        }
        let tri = Divisor::single(GraphPoint::Vertex(xs[i].clone()), 3);
        let (_, mapr) = build_morphism_nonhyp(comp, &tri)?;
        for img in mapr.vertex_images.values() {
            if matches!(img, GraphPoint::Interior { .. }) {
                pts.insert(img.clone());
            }
        }
    }
    let pts: Vec<GraphPoint> = pts.into_iter().collect();
    let (mm, mapm) = refine(&m0, &pts)?;

    let mut tgt = MetricGraphModel::new(&format!("{}.target", contracted.name));
    let mut dom = mm.clone();
    let mut vmap: BTreeMap<VId, VId> = BTreeMap::new();
    let mut emap: BTreeMap<EId, EdgeImage> = BTreeMap::new();
    let mut index: BTreeMap<EId, i64> = BTreeMap::new();
    let mut t_of_x: Vec<VId> = Vec::new();

    for (i, comp) in comps.iter().enumerate() {
        let x = &xs[i];
        let comp_edges: BTreeSet<EId> = comp.edges.keys().cloned().collect();
        let ce: BTreeSet<EId> = mm
            .edges
            .keys()
            .filter(|e| {
                mapm.edge_charts[*e]
                    .iter()
                    .all(|c| comp_edges.contains(&c.base_edge))
            })
            .cloned()
            .collect();
        let sub = edge_subgraph(&mm, &format!("comp{i}"), &ce);
        if is_circle(comp) {
            // Two equal arcs from the attach point to its antipode map onto
            // one target edge; a leg at the attach point completes the fiber.
            let mut it = sub.edges.values();
            let (a, b) = (it.next().unwrap(), it.next().unwrap());
            if sub.edges.len() != 2 || a.length != b.length {
                return Ok(None);
            }
            let far = sub
                .vertices
                .iter()
                .find(|v| *v != x)
                .cloned()
                .expect("circle has an antipode vertex");
            let t = format!("c{i}.t");
            let tf = format!("c{i}.far");
            let te = format!("c{i}.E");
            tgt.add_edge(&te, &t, &tf, a.length.clone());
            vmap.insert(x.clone(), t.clone());
            vmap.insert(far, tf.clone());
            for e in sub.edges.keys() {
                emap.insert(e.clone(), EdgeImage::Edge(te.clone()));
                index.insert(e.clone(), 1);
            }
            let leg_v = format!("leg{i}");
            let leg_e = format!("lege{i}");
            dom.add_vertex(&leg_v);
            dom.add_edge(&leg_e, x, &leg_v, a.length.clone());
            vmap.insert(leg_v, tf);
            emap.insert(leg_e.clone(), EdgeImage::Edge(te));
            index.insert(leg_e, 1);
            t_of_x.push(t);
        } else {
            let tri = Divisor::single(GraphPoint::Vertex(x.clone()), 3);
            let (phi, _) = build_morphism_nonhyp(&sub, &tri)?;
            if phi.domain.edges.keys().ne(sub.edges.keys()) {
                return Err(SynthesisError::InternalContradiction(format!(
                    "component {i} construction subdivided after the global refinement"
                )));
            }
            let tx = phi.vertex_map[x].clone();
            let fiber = morphism::pullback(&phi, &GraphPoint::Vertex(tx.clone()))?;
            if fiber != tri {
                return Ok(None);
            }
            let (tvm, tem) =
                import_with_prefix(&mut tgt, &phi.codomain, &format!("c{i}."), &BTreeMap::new());
            for (v, tv) in &phi.vertex_map {
                vmap.insert(v.clone(), tvm[tv].clone());
            }
            for (e, img) in &phi.edge_map {
                let img = match img {
                    EdgeImage::Edge(te) => EdgeImage::Edge(tem[te].clone()),
                    EdgeImage::Vertex(tv) => EdgeImage::Vertex(tvm[tv].clone()),
                };
                emap.insert(e.clone(), img);
                index.insert(e.clone(), phi.index[e]);
            }
            t_of_x.push(tvm[&tx].clone());
        }
    }

    // Cycle edges stretch threefold over the triangle sides.
    for (k, eid) in nd.cycle.iter().enumerate() {
        let e = &m0.edges[eid];
        let iu = xs.iter().position(|x| *x == e.u).expect("attach endpoint");
        let iv = xs.iter().position(|x| *x == e.v).expect("attach endpoint");
        let te = format!("cyc{k}");
        tgt.add_edge(&te, &t_of_x[iu], &t_of_x[iv], rat(3, 1) * e.length.clone());
        emap.insert(eid.clone(), EdgeImage::Edge(te));
        index.insert(eid.clone(), 3);
    }

    let phi = IndexedMorphism {
        domain: dom,
        codomain: tgt,
        vertex_map: vmap,
        edge_map: emap,
        index,
    };
    let emb = map0.compose(contracted, &mapm)?;
    let cert = certify(contracted, dc, emb, phi, "necklace triple-point assembly")?;
    Ok(Some(Synthesis::Certificate(Box::new(cert))))
}

/// D ~ 2x + p with p on the cycle: the component at x (if any) folds by 2x,
/// every other component must be a single contractible loop, and the two
/// cycle arcs from x to p fold onto leaf paths with an index-2 third.
fn loop_chain_assembly(
    contracted: &MetricGraphModel,
    dc: &Divisor,
) -> Result<Option<Synthesis>, SynthesisError> {
    let Some(nd) = necklace_decomposition(contracted) else {
        return Ok(None);
    };
    let walk = CycleWalk::new(contracted, &nd.cycle)?;
    // Candidate base points: attach points first, then other cycle vertices.
    let mut candidates: Vec<VId> = nd.attach_points.clone();
    for v in walk.vpos.keys() {
        if !candidates.contains(v) {
            candidates.push(v.clone());
        }
    }
    for x in &candidates {
        let (r, _) = reduce(contracted, dc, &GraphPoint::Vertex(x.clone()))?;
        if r.coeff(&GraphPoint::Vertex(x.clone())) != 2 || r.degree() != 3 {
            continue;
        }
        let p = r
            .chips
            .keys()
            .find(|q| **q != GraphPoint::Vertex(x.clone()))
            .cloned()
            .expect("third chip exists");
        let Some(pos_p) = walk.pos_of(contracted, &p) else {
            continue;
        };
        let pos_x = walk.vpos[x].clone();
        if pos_p == pos_x {
            continue;
        }
        // Every component away from x must be a single loop edge.
        let special = nd.components.iter().find(|c| c.vertices.contains(x));
        let mut ok = true;
        let mut loops: Vec<EId> = Vec::new();
        for c in &nd.components {
            if c.vertices.contains(x) {
                continue;
            }
            if c.edges.len() == 1 {
                let (eid, e) = c.edges.iter().next().unwrap();
                if e.is_loop() {
                    loops.push(eid.clone());
                    continue;
                }
            }
            ok = false;
            break;
        }
        if !ok {
            continue;
        }
        return build_loop_chain(contracted, dc, &walk, x, &p, special, &loops)
            .map(Some);
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn build_loop_chain(
    contracted: &MetricGraphModel,
    dc: &Divisor,
    walk: &CycleWalk,
    x: &VId,
    p: &GraphPoint,
    special: Option<&MetricGraphModel>,
    loops: &[EId],
) -> Result<Synthesis, SynthesisError> {
    let pos_x = walk.vpos[x].clone();
    let pos_p = walk.pos_of(contracted, p).expect("p on cycle");
    let d0 = walk.pmod(pos_p.clone() - pos_x.clone());
    let arms = [d0.clone(), walk.total.clone() - d0.clone()];
    let two_x = Divisor::single(GraphPoint::Vertex(x.clone()), 2);

    // r is the distance from x along arc k; points fold onto [0, 2 d_k / 3].
    let y_of = |k: usize, r: &Rational| -> Rational {
        let third = arms[k].clone() / rat(3, 1);
        if *r <= third {
            rat(2, 1) * r.clone()
        } else {
            arms[k].clone() - r.clone()
        }
    };
    let arc_of = |t: &Rational| -> (usize, Rational) {
        if *t <= d0 {
            (0, t.clone())
        } else {
            (1, walk.total.clone() - t.clone())
        }
    };

    // Breakpoints per arc and the positions that must become vertices.
    let mut ys: [BTreeSet<Rational>; 2] = [BTreeSet::new(), BTreeSet::new()];
    let mut rel: [BTreeSet<Rational>; 2] = [BTreeSet::new(), BTreeSet::new()];
    for k in 0..2 {
        rel[k].insert(Rational::zero());
        rel[k].insert(arms[k].clone() / rat(3, 1));
        rel[k].insert(arms[k].clone());
    }
    for vp in walk.vpos.values() {
        let (k, r) = arc_of(&walk.pmod(vp.clone() - pos_x.clone()));
        rel[k].insert(r);
    }
    {
        let (k, r) = arc_of(&walk.pmod(pos_p.clone() - pos_x.clone()));
        rel[k].insert(r);
    }
    for k in 0..2 {
        for r in rel[k].clone() {
            ys[k].insert(y_of(k, &r));
        }
        for y in ys[k].clone() {
            rel[k].insert(y.clone() / rat(2, 1));
            rel[k].insert(arms[k].clone() - y.clone());
        }
        for r in rel[k].clone() {
            ys[k].insert(y_of(k, &r));
        }
    }

    let mut pts: BTreeSet<GraphPoint> = BTreeSet::new();
    for k in 0..2 {
        for r in &rel[k] {
            let pos = if k == 0 {
                walk.pmod(pos_x.clone() + r.clone())
            } else {
                walk.pmod(pos_x.clone() - r.clone())
            };
            pts.insert(walk.point_at(contracted, &pos));
        }
    }

    // First fold pass on the special component, to learn its refinement.
    let special_edges: Option<BTreeSet<EId>> =
        special.map(|c| c.edges.keys().cloned().collect());
    if let Some(comp) = special {
        let fold = fold_by_h(comp, &two_x, &[])?;
        for img in fold.map.vertex_images.values() {
            if matches!(img, GraphPoint::Interior { .. }) {
                pts.insert(img.clone());
            }
        }
    }

    let pts: Vec<GraphPoint> = pts.into_iter().collect();
    let (mm, mapm) = refine(contracted, &pts)?;

    let mut tgt = MetricGraphModel::new(&format!("{}.target", contracted.name));
    let mut dom = mm.clone();
    let mut vmap: BTreeMap<VId, VId> = BTreeMap::new();
    let mut emap: BTreeMap<EId, EdgeImage> = BTreeMap::new();
    let mut index: BTreeMap<EId, i64> = BTreeMap::new();

    // The special component folds over its own tree, rooted at t*.
    let mut t0_edges: BTreeSet<EId> = BTreeSet::new();
    let tstar = if let Some(se) = &special_edges {
        let ce: BTreeSet<EId> = mm
            .edges
            .keys()
            .filter(|e| {
                mapm.edge_charts[*e]
                    .iter()
                    .all(|c| se.contains(&c.base_edge))
            })
            .cloned()
            .collect();
        let sub = edge_subgraph(&mm, "special", &ce);
        let fold = fold_by_h(&sub, &two_x, &[])?;
        if fold.domain.edges.keys().ne(sub.edges.keys()) {
            return Err(SynthesisError::InternalContradiction(
                "special component fold subdivided after the global refinement".into(),
            ));
        }
        let psi = &fold.morphism;
        let (tvm, tem) = import_with_prefix(&mut tgt, &psi.codomain, "c.", &BTreeMap::new());
        for (v, tv) in &psi.vertex_map {
            vmap.insert(v.clone(), tvm[tv].clone());
        }
        for (e, img) in &psi.edge_map {
            let img = match img {
                EdgeImage::Edge(te) => EdgeImage::Edge(tem[te].clone()),
                EdgeImage::Vertex(tv) => EdgeImage::Vertex(tvm[tv].clone()),
            };
            emap.insert(e.clone(), img);
            index.insert(e.clone(), psi.index[e]);
        }
        t0_edges = tem.values().cloned().collect();
        tvm[&psi.vertex_map[x]].clone()
    } else {
        tgt.add_vertex("c.t");
        "c.t".to_string()
    };

    // Leaf paths F_0, F_1 over the two arcs.
    let tname = |k: usize, y: &Rational| -> String {
        if y.is_zero() {
            tstar.clone()
        } else {
            format!("f{k}@{}", crate::graph_core::rational::format_rational(y))
        }
    };
    let mut tedge: [BTreeMap<Rational, EId>; 2] = [BTreeMap::new(), BTreeMap::new()];
    for k in 0..2 {
        let yv: Vec<Rational> = ys[k].iter().cloned().collect();
        for w in yv.windows(2) {
            let id = format!(
                "f{k}e@{}",
                crate::graph_core::rational::format_rational(&w[0])
            );
            tgt.add_edge(
                &id,
                &tname(k, &w[0]),
                &tname(k, &w[1]),
                w[1].clone() - w[0].clone(),
            );
            tedge[k].insert(w[0].clone(), id);
        }
    }

    // Cycle vertices and edges.
    let base_point = |v: &VId| -> GraphPoint {
        mapm.vertex_images
            .get(v)
            .cloned()
            .unwrap_or_else(|| GraphPoint::Vertex(v.clone()))
    };
    let cycle_set: BTreeSet<EId> = walk.place.keys().cloned().collect();
    for v in &mm.vertices {
        if vmap.contains_key(v) {
            continue;
        }
        if let Some(pos) = walk.pos_of(contracted, &base_point(v)) {
            let (k, r) = arc_of(&walk.pmod(pos - pos_x.clone()));
            vmap.insert(v.clone(), tname(k, &y_of(k, &r)));
        }
    }
    for (eid, e) in &mm.edges {
        if emap.contains_key(eid) {
            continue;
        }
        let charts = &mapm.edge_charts[eid];
        if charts.iter().all(|c| cycle_set.contains(&c.base_edge)) {
            let mid = mapm.backward(
                contracted,
                &GraphPoint::interior(eid, e.length.clone() / rat(2, 1)),
            )?;
            let pos = walk
                .pos_of(contracted, &mid)
                .expect("cycle edge midpoint is on the cycle");
            let (k, rmid) = arc_of(&walk.pmod(pos - pos_x.clone()));
            let third = arms[k].clone() / rat(3, 1);
            let ru = walk
                .pos_of(contracted, &base_point(&e.u))
                .map(|t| arc_of(&walk.pmod(t - pos_x.clone())).1)
                .expect("cycle endpoint");
            let rv = walk
                .pos_of(contracted, &base_point(&e.v))
                .map(|t| arc_of(&walk.pmod(t - pos_x.clone())).1)
                .expect("cycle endpoint");
            // Endpoint distances can both read as boundary values; anchor on
            // the midpoint's arc.
            let (ya, yb) = (y_of(k, &ru), y_of(k, &rv));
            let ylo = if ya < yb { ya } else { yb };
            emap.insert(eid.clone(), EdgeImage::Edge(tedge[k][&ylo].clone()));
            index.insert(eid.clone(), if rmid <= third { 2 } else { 1 });
        } else if loops.contains(eid) {
            emap.insert(eid.clone(), EdgeImage::Vertex(vmap[&e.u].clone()));
            index.insert(eid.clone(), 0);
        } else {
            return Err(SynthesisError::InternalContradiction(format!(
                "edge {eid} is neither cycle, special component, nor loop"
            )));
        }
    }

    // A copy of the special component's target hangs at p.
    if special.is_some() && !t0_edges.is_empty() {
        let GraphPoint::Vertex(pv) = mapm.forward(contracted, &mm, p)? else {
            return Err(SynthesisError::InternalContradiction(
                "residual point p is not a vertex after refinement".into(),
            ));
        };
        let t0 = edge_subgraph(&tgt, "t0", &t0_edges);
        let identify = BTreeMap::from([(tstar.clone(), pv.clone())]);
        let (avm, aem) = import_with_prefix(&mut dom, &t0, "sec.", &identify);
        for (tv, v) in &avm {
            if *v != pv {
                vmap.insert(v.clone(), tv.clone());
            }
        }
        for (te, e) in &aem {
            emap.insert(e.clone(), EdgeImage::Edge(te.clone()));
            index.insert(e.clone(), 1);
        }
    }

    let phi = IndexedMorphism {
        domain: dom,
        codomain: tgt,
        vertex_map: vmap,
        edge_map: emap,
        index,
    };
    let cert = certify(contracted, dc, mapm, phi, "necklace loop-chain assembly")?;
    Ok(Synthesis::Certificate(Box::new(cert)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::rational::rat_int;
    use crate::morphism::TargetShape;

    fn luo() -> (MetricGraphModel, Divisor) {
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
        (m, d)
    }

    #[test]
    fn luo_routes_to_triple_point_assembly() {
        let (m, d) = luo();
        let s = necklace_synthesize(&m, &d).unwrap();
        let Synthesis::Certificate(cert) = s else {
            panic!("expected a certificate, got {s:?}")
        };
        assert_eq!(cert.report.degree, Some(3));
        assert_eq!(cert.report.target_shape, TargetShape::TreeOfTriangles);
        assert!(cert.check_round_trip().unwrap());
    }

    #[test]
    fn triangle_of_loops_gets_legs() {
        let mut m = MetricGraphModel::new("triloop");
        m.add_edge("c1", "p1", "p2", rat_int(1));
        m.add_edge("c2", "p2", "p3", rat_int(1));
        m.add_edge("c3", "p3", "p1", rat_int(1));
        for i in 1..=3 {
            m.add_edge(&format!("l{i}"), &format!("p{i}"), &format!("p{i}"), rat_int(1));
        }
        let d = Divisor::of(&[
            (GraphPoint::vertex("p1"), 1),
            (GraphPoint::vertex("p2"), 1),
            (GraphPoint::vertex("p3"), 1),
        ]);
        let s = necklace_synthesize(&m, &d).unwrap();
        let Synthesis::Certificate(cert) = s else {
            panic!("expected a certificate, got {s:?}")
        };
        assert_eq!(cert.report.degree, Some(3));
        assert_eq!(cert.report.target_shape, TargetShape::TreeOfTriangles);
        assert!(cert.check_round_trip().unwrap());
    }

    #[test]
    fn circle_of_loops_contracts_the_loops() {
        // Circle of circumference 4 with a unit loop at each vertex;
        // D = 2 v0 + v2 folds the circle onto two leaf paths.
        let mut m = MetricGraphModel::new("circleloops");
        for i in 0..4 {
            m.add_edge(
                &format!("c{i}"),
                &format!("v{i}"),
                &format!("v{}", (i + 1) % 4),
                rat_int(1),
            );
            m.add_edge(&format!("l{i}"), &format!("v{i}"), &format!("v{i}"), rat_int(1));
        }
        let d = Divisor::of(&[(GraphPoint::vertex("v0"), 2), (GraphPoint::vertex("v2"), 1)]);
        let s = necklace_synthesize(&m, &d).unwrap();
        let Synthesis::Certificate(cert) = s else {
            panic!("expected a certificate, got {s:?}")
        };
        assert_eq!(cert.report.degree, Some(3));
        assert_eq!(cert.report.target_shape, TargetShape::Tree);
        let contracted: Vec<_> = cert
            .morphism
            .index
            .iter()
            .filter(|(_, i)| **i == 0)
            .map(|(e, _)| e.clone())
            .collect();
        assert_eq!(contracted.len(), 3, "{contracted:?}");
        assert!(cert.check_round_trip().unwrap());
    }

    #[test]
    fn unrecognized_necklace_is_reported_outside() {
        // Unequal arc lengths break the triple-point pattern, and theta
        // components cannot be contracted for the loop-chain one.
        let mut m = MetricGraphModel::new("odd");
        m.add_edge("c1", "p1", "p2", rat_int(1));
        m.add_edge("c2", "p2", "p3", rat_int(1));
        m.add_edge("c3", "p3", "p1", rat_int(2));
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
        let s = necklace_synthesize(&m, &d).unwrap();
        assert!(matches!(s, Synthesis::OutsideCharacterizedClass { .. }), "{s:?}");
    }
}
