//! Degree-3 morphisms from a circle with marked points that must carry
//! local degree 2. Two shapes exist: three marks fold onto a 3-star with
//! legs at the fold points, and marks bunched inside a third of the
//! circumference ride an index-2 arc over a segment.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::graph_core::{
    rational::{format_rational, rat},
    refine, EId, GraphPoint, MetricGraphModel, ModelMap, Rational, VId,
};
use crate::morphism::{EdgeImage, IndexedMorphism};

use super::certificate::SynthesisError;

/// Oriented traversal of a circle model starting at the lex-first vertex.
struct Traversal {
    /// edge -> (start position, reversed).
    place: BTreeMap<EId, (Rational, bool)>,
    total: Rational,
}

impl Traversal {
    fn of(model: &MetricGraphModel) -> Result<Traversal, SynthesisError> {
        model.validate()?;
        if model.genus() != 1 || model.vertices.iter().any(|v| model.valence(v) != 2) {
            return Err(SynthesisError::Precondition(
                "cycle_morphism needs a circle model".into(),
            ));
        }
        let v0 = model.vertices.iter().next().unwrap().clone();
        let mut place = BTreeMap::new();
        let mut pos = Rational::zero();
        let mut at = v0.clone();
        let mut last: Option<EId> = None;
        loop {
            let (eid, _) = model
                .ends_at(&at)
                .into_iter()
                .find(|(e, _)| Some(e) != last.as_ref())
                .expect("valence 2");
            let e = &model.edges[&eid];
            place.insert(eid.clone(), (pos.clone(), e.u != at));
            pos += e.length.clone();
            at = e.other(&at).clone();
            last = Some(eid);
            if at == v0 {
                break;
            }
        }
        Ok(Traversal { place, total: pos })
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

    fn pos_of(
        &self,
        model: &MetricGraphModel,
        p: &GraphPoint,
    ) -> Result<Rational, SynthesisError> {
        match model.canonical_point(p)? {
            GraphPoint::Vertex(v) => {
                for (eid, (start, rev)) in &self.place {
                    let e = &model.edges[eid];
                    let head = if *rev { &e.v } else { &e.u };
                    if *head == v {
                        return Ok(start.clone());
                    }
                }
                unreachable!("vertex on circle")
            }
            GraphPoint::Interior { edge, offset } => {
                let (start, rev) = &self.place[&edge];
                let len = model.edges[&edge].length.clone();
                let o = if *rev { len - offset } else { offset };
                Ok(self.pmod(start.clone() + o))
            }
        }
    }

    fn point_at(&self, model: &MetricGraphModel, pos: &Rational) -> GraphPoint {
        let pos = self.pmod(pos.clone());
        for (eid, (start, rev)) in &self.place {
            let len = model.edges[eid].length.clone();
            if pos >= *start && pos < start.clone() + len.clone() {
                let o = pos - start.clone();
                let o = if *rev { len - o } else { o };
                return model
                    .canonical_point(&GraphPoint::interior(eid, o))
                    .expect("offset in range");
            }
        }
        unreachable!("position within total length")
    }
}

/// Distance between two circle positions along the circle, in the forward
/// direction from `a` to `b`.
fn fwd(tr: &Traversal, a: &Rational, b: &Rational) -> Rational {
    tr.pmod(b.clone() - a.clone())
}

pub fn cycle_morphism(
    model: &MetricGraphModel,
    marks: &[(GraphPoint, i64)],
) -> Result<Option<(IndexedMorphism, ModelMap)>, SynthesisError> {
    // Loops first become two arcs so a traversal exists.
    let loop_mids: Vec<GraphPoint> = model
        .edges
        .iter()
        .filter(|(_, e)| e.is_loop())
        .map(|(eid, e)| GraphPoint::interior(eid, e.length.clone() / rat(2, 1)))
        .collect();
    if !loop_mids.is_empty() {
        let (m2, map0) = refine(model, &loop_mids)?;
        let mut marks2 = Vec::new();
        for (p, n) in marks {
            marks2.push((map0.forward(model, &m2, p)?, *n));
        }
        let Some((phi, map1)) = cycle_morphism(&m2, &marks2)? else {
            return Ok(None);
        };
        return Ok(Some((phi, map0.compose(model, &map1)?)));
    }

    let tr = Traversal::of(model)?;
    let total = tr.total.clone();

    let mut mark_pos: BTreeMap<Rational, i64> = BTreeMap::new();
    for (p, n) in marks {
        let pos = tr.pos_of(model, p)?;
        if let Some(prev) = mark_pos.insert(pos.clone(), *n) {
            if prev != *n {
                return Ok(None);
            }
        }
    }
    if mark_pos.values().any(|&n| n != 2) {
        return Ok(None);
    }

    if mark_pos.len() == 3 {
        let xs: Vec<Rational> = mark_pos.keys().cloned().collect();
        let l12 = fwd(&tr, &xs[0], &xs[1]);
        let l23 = fwd(&tr, &xs[1], &xs[2]);
        let l31 = fwd(&tr, &xs[2], &xs[0]);
        let a1 = (l12.clone() + l31.clone() - l23.clone()) / rat(2, 1);
        let a2 = (l12.clone() + l23.clone() - l31.clone()) / rat(2, 1);
        let a3 = (l23 + l31 - l12) / rat(2, 1);
        if a1 > Rational::zero() && a2 > Rational::zero() && a3 > Rational::zero() {
            return star(model, &tr, &xs, &[a1, a2, a3]).map(Some);
        }
    }

    // Window case: a covering arc strictly shorter than a third of the
    // circle, centered so every mark is interior to the index-2 arc.
    let third = total.clone() / rat(3, 1);
    let (span, first) = if mark_pos.is_empty() {
        (Rational::zero(), Rational::zero())
    } else {
        let xs: Vec<Rational> = mark_pos.keys().cloned().collect();
        // Minimal covering arc: complement of the largest gap.
        let mut best: Option<(Rational, Rational)> = None;
        for i in 0..xs.len() {
            let next = &xs[(i + 1) % xs.len()];
            let gap = fwd(&tr, &xs[i], next);
            let gap = if xs.len() == 1 { total.clone() } else { gap };
            if best.as_ref().map(|(g, _)| gap > *g).unwrap_or(true) {
                best = Some((gap.clone(), next.clone()));
            }
        }
        let (gap, start) = best.unwrap();
        (total.clone() - gap, start)
    };
    if span >= third {
        return Ok(None);
    }
    let s = tr.pmod(first - (third.clone() - span) / rat(2, 1));
    window(model, &tr, &s).map(Some)
}

/// The index-2-arc morphism: [s, s + L/3] maps with index 2 onto a segment
/// of length 2L/3, the complementary arc with index 1.
fn window(
    model: &MetricGraphModel,
    tr: &Traversal,
    s: &Rational,
) -> Result<(IndexedMorphism, ModelMap), SynthesisError> {
    let total = tr.total.clone();
    let third = total.clone() / rat(3, 1);
    let y_of = |r: &Rational| -> Rational {
        if *r <= third {
            rat(2, 1) * r.clone()
        } else {
            total.clone() - r.clone()
        }
    };

    // Relative positions that must be vertices: circle vertices, the arc
    // endpoints, and the preimages of every image point.
    let mut rels: BTreeSet<Rational> = BTreeSet::new();
    rels.insert(Rational::zero());
    rels.insert(third.clone());
    for v in &model.vertices {
        rels.insert(fwd(tr, s, &tr.pos_of(model, &GraphPoint::Vertex(v.clone()))?));
    }
    let ys: BTreeSet<Rational> = rels.iter().map(&y_of).collect();
    for y in &ys {
        rels.insert(y.clone() / rat(2, 1));
        rels.insert(total.clone() - y.clone());
    }

    let pts: Vec<GraphPoint> = rels
        .iter()
        .map(|r| tr.point_at(model, &tr.pmod(s.clone() + r.clone())))
        .collect();
    let (mr, map) = refine(model, &pts)?;

    // Target: a path subdivided at every image value.
    let ys: BTreeSet<Rational> = rels.iter().map(&y_of).collect();
    let ys: Vec<Rational> = ys.into_iter().collect();
    let mut tgt = MetricGraphModel::new(&format!("{}.target", model.name));
    let tname = |y: &Rational| format!("t@{}", format_rational(y));
    let mut tedge_at: BTreeMap<Rational, EId> = BTreeMap::new();
    for w in ys.windows(2) {
        let id = format!("f@{}", format_rational(&w[0]));
        tgt.add_edge(
            &id,
            &tname(&w[0]),
            &tname(&w[1]),
            w[1].clone() - w[0].clone(),
        );
        tedge_at.insert(w[0].clone(), id);
    }

    let rel_of_vertex = |v: &VId| -> Result<Rational, SynthesisError> {
        let img = map
            .vertex_images
            .get(v)
            .cloned()
            .unwrap_or_else(|| GraphPoint::Vertex(v.clone()));
        Ok(fwd(tr, s, &tr.pos_of(model, &img)?))
    };

    let mut vertex_map: BTreeMap<VId, VId> = BTreeMap::new();
    for v in &mr.vertices {
        vertex_map.insert(v.clone(), tname(&y_of(&rel_of_vertex(v)?)));
    }
    let mut edge_map: BTreeMap<EId, EdgeImage> = BTreeMap::new();
    let mut index: BTreeMap<EId, i64> = BTreeMap::new();
    for (eid, e) in &mr.edges {
        let (ru, rv) = (rel_of_vertex(&e.u)?, rel_of_vertex(&e.v)?);
        let (lo, hi) = if ru < rv { (ru, rv) } else { (rv, ru) };
        // The vertex at the arc origin reads as 0; edges reaching it from
        // below span up to the full circumference instead.
        let (lo, hi) = if hi.clone() - lo.clone() == e.length {
            (lo, hi)
        } else if lo.is_zero() && total.clone() - hi.clone() == e.length {
            (hi, total.clone())
        } else {
            return Err(SynthesisError::InternalContradiction(format!(
                "edge {eid} wraps the arc origin after refinement"
            )));
        };
        let in_a = hi <= third;
        let (ya, yb) = (y_of(&lo), y_of(&hi));
        let ymin = if ya < yb { ya } else { yb };
        index.insert(eid.clone(), if in_a { 2 } else { 1 });
        edge_map.insert(eid.clone(), EdgeImage::Edge(tedge_at[&ymin].clone()));
    }
    let phi = IndexedMorphism {
        domain: mr,
        codomain: tgt,
        vertex_map,
        edge_map,
        index,
    };
    Ok((phi, map))
}

/// The 3-star morphism: each mark is a simple ramification point over a
/// leaf, the circle folds at three points over the center, and a leg at
/// each fold point covers the opposite star edge.
fn star(
    model: &MetricGraphModel,
    tr: &Traversal,
    xs: &[Rational],
    arms: &[Rational],
) -> Result<(IndexedMorphism, ModelMap), SynthesisError> {
    let folds: Vec<Rational> = (0..3)
        .map(|i| tr.pmod(xs[i].clone() + arms[i].clone()))
        .collect();

    // Segment k runs from fold (k+2)%3 through mark k to fold k; its points
    // map to branch k at their distance from the mark.
    let seg_of = |r: &Rational| -> (usize, Rational) {
        for k in 0..3 {
            let lo = &folds[(k + 2) % 3];
            let within = fwd(tr, lo, r);
            if within <= arms[k].clone() + arms[k].clone() {
                // delta = distance from mark k.
                let to_mark = fwd(tr, lo, &xs[k]);
                let delta = if within <= to_mark {
                    to_mark - within
                } else {
                    within - to_mark
                };
                return (k, delta);
            }
        }
        unreachable!("circle covered by the three segments")
    };

    // Positions forced to be vertices: marks, folds, circle vertices, and
    // the mirror of every such position across its mark.
    let mut posset: BTreeSet<Rational> = BTreeSet::new();
    posset.extend(xs.iter().cloned());
    posset.extend(folds.iter().cloned());
    for v in &model.vertices {
        posset.insert(tr.pos_of(model, &GraphPoint::Vertex(v.clone()))?);
    }
    let mut deltas: Vec<BTreeSet<Rational>> = vec![BTreeSet::new(); 3];
    for p in &posset.clone() {
        let (k, delta) = seg_of(p);
        deltas[k].insert(delta.clone());
        posset.insert(tr.pmod(xs[k].clone() - (p.clone() - xs[k].clone())));
    }
    for k in 0..3 {
        deltas[k].insert(Rational::zero());
        deltas[k].insert(arms[k].clone());
    }

    let pts: Vec<GraphPoint> = posset.iter().map(|p| tr.point_at(model, p)).collect();
    let (mr, map) = refine(model, &pts)?;

    // Target star, each branch subdivided at its delta set.
    let mut tgt = MetricGraphModel::new(&format!("{}.target", model.name));
    tgt.add_vertex("c");
    let bname = |k: usize, d: &Rational| -> String {
        if *d == arms[k] {
            "c".into()
        } else {
            format!("b{k}@{}", format_rational(d))
        }
    };
    let mut tedge: Vec<BTreeMap<Rational, EId>> = vec![BTreeMap::new(); 3];
    for k in 0..3 {
        let ds: Vec<Rational> = deltas[k].iter().cloned().collect();
        for w in ds.windows(2) {
            let id = format!("s{k}@{}", format_rational(&w[0]));
            tgt.add_edge(
                &id,
                &bname(k, &w[0]),
                &bname(k, &w[1]),
                w[1].clone() - w[0].clone(),
            );
            tedge[k].insert(w[0].clone(), id);
        }
    }

    let pos_of_vertex = |v: &VId| -> Result<Rational, SynthesisError> {
        let img = map
            .vertex_images
            .get(v)
            .cloned()
            .unwrap_or_else(|| GraphPoint::Vertex(v.clone()));
        tr.pos_of(model, &img)
    };

    let mut dom = mr.clone();
    let mut vertex_map: BTreeMap<VId, VId> = BTreeMap::new();
    let mut edge_map: BTreeMap<EId, EdgeImage> = BTreeMap::new();
    let mut index: BTreeMap<EId, i64> = BTreeMap::new();
    for v in &mr.vertices {
        let (k, d) = seg_of(&pos_of_vertex(v)?);
        vertex_map.insert(v.clone(), bname(k, &d));
    }
    for (eid, e) in &mr.edges {
        // Fold points belong to two segments, so the segment of an edge is
        // read off its midpoint, which is strictly interior.
        let mid = map.backward(
            model,
            &GraphPoint::interior(eid, e.length.clone() / rat(2, 1)),
        )?;
        let (k, _) = seg_of(&tr.pos_of(model, &mid)?);
        let du = seg_delta(tr, xs, k, &pos_of_vertex(&e.u)?);
        let dv = seg_delta(tr, xs, k, &pos_of_vertex(&e.v)?);
        let lo = if du < dv { du } else { dv };
        edge_map.insert(eid.clone(), EdgeImage::Edge(tedge[k][&lo].clone()));
        index.insert(eid.clone(), 1);
    }

    // Legs: at fold point j (between marks j and j+1), a fresh path copy of
    // branch j+2 hangs from the fold vertex over the whole branch.
    for j in 0..3 {
        let k = (j + 2) % 3;
        let fold_pt = tr.point_at(model, &folds[j]);
        let GraphPoint::Vertex(fold_v) = map.forward(model, &mr, &fold_pt)? else {
            return Err(SynthesisError::InternalContradiction(format!(
                "fold position {fold_pt} is not a vertex after refinement"
            )));
        };
        let ds: Vec<Rational> = deltas[k].iter().cloned().collect();
        let mut prev = fold_v.clone();
        for w in ds.windows(2).rev() {
            // Walk from the c-end (delta = arm) down to the leaf (delta 0).
            let lower = &w[0];
            let name = format!("leg{j}.{}", format_rational(lower));
            dom.add_vertex(&name);
            let eid = format!("lege{j}.{}", format_rational(lower));
            dom.add_edge(&eid, &prev, &name, w[1].clone() - w[0].clone());
            vertex_map.insert(name.clone(), bname(k, lower));
            edge_map.insert(eid.clone(), EdgeImage::Edge(tedge[k][lower].clone()));
            index.insert(eid, 1);
            prev = name;
        }
    }

    let phi = IndexedMorphism {
        domain: dom,
        codomain: tgt,
        vertex_map,
        edge_map,
        index,
    };
    Ok((phi, map))
}

/// Distance from mark k, for positions within segment k.
fn seg_delta(tr: &Traversal, xs: &[Rational], k: usize, pos: &Rational) -> Rational {
    let d1 = fwd(tr, &xs[k], pos);
    let d2 = fwd(tr, pos, &xs[k]);
    if d1 < d2 {
        d1
    } else {
        d2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::rational::rat_int;
    use crate::morphism::{self, TargetShape};

    fn circle(n: usize, len: i64) -> MetricGraphModel {
        let mut m = MetricGraphModel::new("circle");
        for i in 0..n {
            m.add_edge(
                &format!("e{i}"),
                &format!("v{i}"),
                &format!("v{}", (i + 1) % n),
                rat_int(len),
            );
        }
        m
    }

    #[test]
    fn three_marks_fold_onto_a_star() {
        let m = circle(3, 1);
        let marks = vec![
            (GraphPoint::vertex("v0"), 2),
            (GraphPoint::vertex("v1"), 2),
            (GraphPoint::vertex("v2"), 2),
        ];
        let (phi, _) = cycle_morphism(&m, &marks).unwrap().unwrap();
        let rep = morphism::report(&phi);
        assert!(rep.valid && rep.harmonic && rep.nondegenerate, "{:?}", rep.errors);
        assert_eq!(rep.degree, Some(3));
        assert_eq!(rep.target_shape, TargetShape::Tree);
        assert_eq!(rep.local_degrees[&"v0".to_string()], 2);
    }

    #[test]
    fn one_mark_rides_the_double_arc() {
        let m = circle(4, 1);
        let marks = vec![(GraphPoint::vertex("v1"), 2)];
        let (phi, _) = cycle_morphism(&m, &marks).unwrap().unwrap();
        let rep = morphism::report(&phi);
        assert!(rep.valid && rep.harmonic && rep.nondegenerate, "{:?}", rep.errors);
        assert_eq!(rep.degree, Some(3));
        assert_eq!(rep.target_shape, TargetShape::Tree);
        assert_eq!(rep.local_degrees[&"v1".to_string()], 2);
    }

    #[test]
    fn spread_marks_are_refused() {
        let m = circle(4, 1);
        let marks = vec![
            (GraphPoint::vertex("v0"), 2),
            (GraphPoint::vertex("v2"), 2),
        ];
        assert!(cycle_morphism(&m, &marks).unwrap().is_none());
        let triple = vec![(GraphPoint::vertex("v0"), 3)];
        assert!(cycle_morphism(&m, &triple).unwrap().is_none());
    }

    #[test]
    fn degenerate_triangle_is_refused() {
        // Marks at 0, 1, 2 on a circle of length 4: one arm collapses and
        // the window does not cover either.
        let m = circle(4, 1);
        let marks = vec![
            (GraphPoint::vertex("v0"), 2),
            (GraphPoint::vertex("v1"), 2),
            (GraphPoint::vertex("v2"), 2),
        ];
        assert!(cycle_morphism(&m, &marks).unwrap().is_none());
    }

    #[test]
    fn loop_circle_works() {
        let mut m = MetricGraphModel::new("loop");
        m.add_edge("l", "v", "v", rat_int(6));
        let (phi, _) = cycle_morphism(&m, &[(GraphPoint::vertex("v"), 2)])
            .unwrap()
            .unwrap();
        let rep = morphism::report(&phi);
        assert!(rep.valid && rep.harmonic && rep.nondegenerate, "{:?}", rep.errors);
        assert_eq!(rep.degree, Some(3));
    }
}
