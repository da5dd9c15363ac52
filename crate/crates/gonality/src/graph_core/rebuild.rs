//! Model rewriting: refinement, canonical loopless models, tropical
//! modification by tree attachment, and bridge contraction.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use super::maps::{reverse_charts, slice_charts, Chart, ContractionMap, EdgeFate, ModelMap};
use super::model::{EId, GraphError, GraphPoint, MetricGraphModel, VId};
use super::rational::{format_rational, rat, Rational};

fn fresh_vertex(model: &MetricGraphModel, base: &str) -> VId {
    let mut s = base.to_string();
    while model.vertices.contains(&s) {
        s.push('\'');
    }
    s
}

fn fresh_edge(model: &MetricGraphModel, base: &str) -> EId {
    let mut s = base.to_string();
    while model.edges.contains_key(&s) {
        s.push('\'');
    }
    s
}

/// The base-model point at parameter `t` along a chart traversal.
fn point_at(
    base: &MetricGraphModel,
    charts: &[Chart],
    t: &Rational,
) -> Result<GraphPoint, GraphError> {
    let mut acc = Rational::zero();
    for c in charts {
        let next = acc.clone() + c.len();
        if *t <= next {
            let local = t.clone() - acc;
            return base.canonical_point(&GraphPoint::Interior {
                edge: c.base_edge.clone(),
                offset: c.at(&local),
            });
        }
        acc = next;
    }
    Err(GraphError::Unsupported("parameter beyond traversal".into()))
}

/// Splits edges at the given interior points; the metric space is unchanged.
/// Returns the refined model and its map over the input model.
pub fn refine(
    model: &MetricGraphModel,
    points: &[GraphPoint],
) -> Result<(MetricGraphModel, ModelMap), GraphError> {
    let mut by_edge: BTreeMap<EId, BTreeSet<Rational>> = BTreeMap::new();
    for p in points {
        if let GraphPoint::Interior { edge, offset } = model.canonical_point(p)? {
            by_edge.entry(edge).or_default().insert(offset);
        }
    }
    let mut out = MetricGraphModel::new(&model.name);
    let mut map = ModelMap::default();
    for v in &model.vertices {
        out.add_vertex(v);
        map.vertex_images
            .insert(v.clone(), GraphPoint::Vertex(v.clone()));
    }
    for (eid, e) in &model.edges {
        let cuts = by_edge.get(eid);
        if cuts.map(|c| c.is_empty()).unwrap_or(true) {
            out.edges.insert(eid.clone(), e.clone());
            map.edge_charts.insert(
                eid.clone(),
                vec![Chart {
                    base_edge: eid.clone(),
                    start: Rational::zero(),
                    end: e.length.clone(),
                }],
            );
            continue;
        }
        let cuts = cuts.unwrap();
        let mut prev = Rational::zero();
        let mut prev_v = e.u.clone();
        for (i, o) in cuts.iter().enumerate() {
            let vname = fresh_vertex(&out, &format!("{eid}@{}", format_rational(o)));
            out.add_vertex(&vname);
            map.vertex_images.insert(
                vname.clone(),
                GraphPoint::Interior {
                    edge: eid.clone(),
                    offset: o.clone(),
                },
            );
            let ename = fresh_edge(&out, &format!("{eid}#{i}"));
            out.add_edge(&ename, &prev_v, &vname, o.clone() - prev.clone());
            map.edge_charts.insert(
                ename,
                vec![Chart {
                    base_edge: eid.clone(),
                    start: prev.clone(),
                    end: o.clone(),
                }],
            );
            prev = o.clone();
            prev_v = vname;
        }
        let ename = fresh_edge(&out, &format!("{eid}#{}", cuts.len()));
        out.add_edge(&ename, &prev_v, &e.v, e.length.clone() - prev.clone());
        map.edge_charts.insert(
            ename,
            vec![Chart {
                base_edge: eid.clone(),
                start: prev,
                end: e.length.clone(),
            }],
        );
    }
    Ok((out, map))
}

/// Suppresses every valence-2 vertex, then inserts a midpoint vertex on
/// every loop. A genus-1 circle keeps two vertices: the lexicographically
/// first original vertex and its antipode.
pub fn canonical_loopless_model(
    model: &MetricGraphModel,
) -> Result<(MetricGraphModel, ModelMap), GraphError> {
    model.validate()?;
    if model.genus() < 1 {
        return Err(GraphError::Unsupported(
            "genus-0 model has no canonical loopless model".into(),
        ));
    }
    if model.vertices.iter().all(|v| model.valence(v) == 2) {
        // Genus 1 with all valences 2: the model is a circle.
        return circle_two_vertex_model(model);
    }

    let mut cur = model.clone();
    let mut map = ModelMap::identity(model);
    loop {
        let target = cur
            .vertices
            .iter()
            .find(|v| {
                let ends = cur.ends_at(v);
                ends.len() == 2 && ends[0].0 != ends[1].0
            })
            .cloned();
        let Some(v) = target else { break };
        let ends = cur.ends_at(&v);
        let (mut f1, mut f2) = (ends[0].0.clone(), ends[1].0.clone());
        if f1 > f2 {
            std::mem::swap(&mut f1, &mut f2);
        }
        let e1 = cur.edges[&f1].clone();
        let e2 = cur.edges[&f2].clone();
        // Traverse f1 ending at v, then f2 starting at v.
        let c1 = map.edge_charts[&f1].clone();
        let c1 = if e1.v == v { c1 } else { reverse_charts(&c1) };
        let a = if e1.v == v { e1.u.clone() } else { e1.v.clone() };
        let c2 = map.edge_charts[&f2].clone();
        let c2 = if e2.u == v { c2 } else { reverse_charts(&c2) };
        let b = if e2.u == v { e2.v.clone() } else { e2.u.clone() };
        cur.edges.remove(&f1);
        cur.edges.remove(&f2);
        cur.vertices.remove(&v);
        map.edge_charts.remove(&f1);
        map.edge_charts.remove(&f2);
        map.vertex_images.remove(&v);
        let merged: Vec<Chart> = c1.into_iter().chain(c2).collect();
        cur.add_edge(&f1, &a, &b, e1.length + e2.length);
        map.edge_charts.insert(f1, merged);
    }

    // Loop midpoints.
    let loops: Vec<EId> = cur
        .edges
        .iter()
        .filter(|(_, e)| e.is_loop())
        .map(|(id, _)| id.clone())
        .collect();
    for l in loops {
        let e = cur.edges[&l].clone();
        let charts = map.edge_charts[&l].clone();
        let half = e.length.clone() / rat(2, 1);
        let mid_img = point_at(model, &charts, &half)?;
        let mid = fresh_vertex(&cur, &format!("mid@{l}"));
        cur.edges.remove(&l);
        map.edge_charts.remove(&l);
        cur.add_vertex(&mid);
        map.vertex_images.insert(mid.clone(), mid_img);
        let ea = fresh_edge(&cur, &format!("{l}#a"));
        cur.add_edge(&ea, &e.u, &mid, half.clone());
        map.edge_charts
            .insert(ea, slice_charts(&charts, &Rational::zero(), &half));
        let eb = fresh_edge(&cur, &format!("{l}#b"));
        cur.add_edge(&eb, &mid, &e.v, half.clone());
        map.edge_charts
            .insert(eb, slice_charts(&charts, &half, &e.length));
    }
    Ok((cur, map))
}

/// Suppresses valence-2 vertices outside `keep`, merging their edge pairs.
/// The metric space is unchanged; the map sends the result over the input.
pub fn suppress_vertices(
    model: &MetricGraphModel,
    keep: &BTreeSet<VId>,
) -> Result<(MetricGraphModel, ModelMap), GraphError> {
    let mut cur = model.clone();
    let mut map = ModelMap::identity(model);
    loop {
        let target = cur
            .vertices
            .iter()
            .find(|v| {
                if keep.contains(*v) {
                    return false;
                }
                let ends = cur.ends_at(v);
                ends.len() == 2 && ends[0].0 != ends[1].0
            })
            .cloned();
        let Some(v) = target else { break };
        let ends = cur.ends_at(&v);
        let (mut f1, mut f2) = (ends[0].0.clone(), ends[1].0.clone());
        if f1 > f2 {
            std::mem::swap(&mut f1, &mut f2);
        }
        let e1 = cur.edges[&f1].clone();
        let e2 = cur.edges[&f2].clone();
        let c1 = map.edge_charts[&f1].clone();
        let c1 = if e1.v == v { c1 } else { reverse_charts(&c1) };
        let a = if e1.v == v { e1.u.clone() } else { e1.v.clone() };
        let c2 = map.edge_charts[&f2].clone();
        let c2 = if e2.u == v { c2 } else { reverse_charts(&c2) };
        let b = if e2.u == v { e2.v.clone() } else { e2.u.clone() };
        cur.edges.remove(&f1);
        cur.edges.remove(&f2);
        cur.vertices.remove(&v);
        map.edge_charts.remove(&f1);
        map.edge_charts.remove(&f2);
        map.vertex_images.remove(&v);
        let merged: Vec<Chart> = c1.into_iter().chain(c2).collect();
        cur.add_edge(&f1, &a, &b, e1.length + e2.length);
        map.edge_charts.insert(f1, merged);
    }
    Ok((cur, map))
}

fn circle_two_vertex_model(
    model: &MetricGraphModel,
) -> Result<(MetricGraphModel, ModelMap), GraphError> {
    let base = model.vertices.iter().next().unwrap().clone();
    // Walk the circle starting along the lexicographically first end at base.
    let mut charts: Vec<Chart> = Vec::new();
    let mut at = base.clone();
    let mut used: BTreeSet<EId> = BTreeSet::new();
    loop {
        let ends = model.ends_at(&at);
        let next = ends
            .iter()
            .filter(|(eid, _)| !used.contains(eid))
            .min_by_key(|(eid, end)| (eid.clone(), *end));
        let Some((eid, end)) = next.cloned() else { break };
        used.insert(eid.clone());
        let e = &model.edges[&eid];
        if end == 0 {
            charts.push(Chart {
                base_edge: eid.clone(),
                start: Rational::zero(),
                end: e.length.clone(),
            });
            at = e.v.clone();
        } else {
            charts.push(Chart {
                base_edge: eid.clone(),
                start: e.length.clone(),
                end: Rational::zero(),
            });
            at = e.u.clone();
        }
        if at == base {
            break;
        }
    }
    let total: Rational = charts.iter().map(|c| c.len()).fold(Rational::zero(), |a, b| a + b);
    debug_assert_eq!(total, model.total_length());
    let half = total.clone() / rat(2, 1);
    let anti_img = point_at(model, &charts, &half)?;

    let mut out = MetricGraphModel::new(&model.name);
    out.add_vertex(&base);
    let ap = fresh_vertex(&out, "ap");
    out.add_vertex(&ap);
    let mut map = ModelMap::default();
    map.vertex_images
        .insert(base.clone(), GraphPoint::Vertex(base.clone()));
    map.vertex_images.insert(ap.clone(), anti_img);
    let a0 = fresh_edge(&out, "arc0");
    out.add_edge(&a0, &base, &ap, half.clone());
    map.edge_charts
        .insert(a0, slice_charts(&charts, &Rational::zero(), &half));
    let a1 = fresh_edge(&out, "arc1");
    out.add_edge(&a1, &ap, &base, half.clone());
    map.edge_charts.insert(a1, slice_charts(&charts, &half, &total));
    Ok((out, map))
}

/// A tropical modification: a metric tree glued onto the model at one point.
#[derive(Clone, Debug)]
pub struct Attachment {
    pub model: MetricGraphModel,
    /// Map of the (possibly refined) original sublocus over the input model.
    pub base_map: ModelMap,
    pub glue_vertex: VId,
    /// Tree vertex id -> id in the combined model (root maps to the glue vertex).
    pub tree_vertices: BTreeMap<VId, VId>,
    pub tree_edges: BTreeMap<EId, EId>,
    /// Edges of the combined model that belong to the attached tree.
    pub attached_edges: BTreeSet<EId>,
}

pub fn attach_tree(
    model: &MetricGraphModel,
    point: &GraphPoint,
    tree: &MetricGraphModel,
    root: &str,
) -> Result<Attachment, GraphError> {
    tree.validate()?;
    if tree.genus() != 0 {
        return Err(GraphError::Unsupported(
            "attached graph must be a tree (genus 0)".into(),
        ));
    }
    if !tree.vertices.contains(root) {
        return Err(GraphError::UnknownVertex(root.to_string()));
    }
    let point = model.canonical_point(point)?;
    let (mut out, base_map) = refine(model, std::slice::from_ref(&point))?;
    let glue = match base_map.forward(model, &out, &point)? {
        GraphPoint::Vertex(v) => v,
        _ => unreachable!("refinement turns the attach point into a vertex"),
    };
    let mut tree_vertices = BTreeMap::new();
    tree_vertices.insert(root.to_string(), glue.clone());
    for tv in &tree.vertices {
        if tv == root {
            continue;
        }
        let name = fresh_vertex(&out, tv);
        out.add_vertex(&name);
        tree_vertices.insert(tv.clone(), name);
    }
    let mut tree_edges = BTreeMap::new();
    let mut attached_edges = BTreeSet::new();
    for (tid, te) in &tree.edges {
        let name = fresh_edge(&out, tid);
        out.add_edge(
            &name,
            &tree_vertices[&te.u],
            &tree_vertices[&te.v],
            te.length.clone(),
        );
        attached_edges.insert(name.clone());
        tree_edges.insert(tid.clone(), name);
    }
    Ok(Attachment {
        model: out,
        base_map,
        glue_vertex: glue,
        tree_vertices,
        tree_edges,
        attached_edges,
    })
}

/// Contracts every bridge to a point. Divisors push forward along the map.
pub fn contract_bridges(model: &MetricGraphModel) -> (MetricGraphModel, ContractionMap) {
    let bridges = super::cuts::bridges(model);
    // Union-find over vertices, merging bridge endpoints.
    let mut rep: BTreeMap<VId, VId> = model
        .vertices
        .iter()
        .map(|v| (v.clone(), v.clone()))
        .collect();
    fn find(rep: &mut BTreeMap<VId, VId>, v: &str) -> VId {
        let p = rep[v].clone();
        if p == v {
            return p;
        }
        let r = find(rep, &p);
        rep.insert(v.to_string(), r.clone());
        r
    }
    for b in &bridges {
        let e = &model.edges[b];
        let (ru, rv) = (find(&mut rep, &e.u), find(&mut rep, &e.v));
        if ru != rv {
            // Lexicographically smaller representative wins.
            let (keep, drop) = if ru < rv { (ru, rv) } else { (rv, ru) };
            rep.insert(drop, keep);
        }
    }
    let classes: Vec<VId> = model.vertices.iter().cloned().collect();
    let mut out = MetricGraphModel::new(&model.name);
    let mut cmap = ContractionMap::default();
    for v in classes {
        let r = find(&mut rep, &v);
        out.add_vertex(&r);
        cmap.vertex_map.insert(v, r);
    }
    for (eid, e) in &model.edges {
        if bridges.contains(eid) {
            let r = find(&mut rep, &e.u);
            cmap.edge_fates.insert(eid.clone(), EdgeFate::Collapsed(r));
        } else {
            let (ru, rv) = (find(&mut rep, &e.u), find(&mut rep, &e.v));
            out.add_edge(eid, &ru, &rv, e.length.clone());
            cmap.edge_fates.insert(eid.clone(), EdgeFate::Kept);
        }
    }
    (out, cmap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::rational::rat_int;

    fn unit_edge() -> MetricGraphModel {
        let mut m = MetricGraphModel::new("seg");
        m.add_edge("e", "a", "b", rat_int(1));
        m
    }

    #[test]
    fn refine_at_vertex_is_identity() {
        let m = unit_edge();
        let (r, _) = refine(&m, &[GraphPoint::vertex("a")]).unwrap();
        assert_eq!(r, m);
    }

    #[test]
    fn refine_unit_edge_at_third() {
        let m = unit_edge();
        let (r, map) = refine(&m, &[GraphPoint::interior("e", rat(1, 3))]).unwrap();
        assert_eq!(r.edges.len(), 2);
        let mut lens: Vec<Rational> = r.edges.values().map(|e| e.length.clone()).collect();
        lens.sort();
        assert_eq!(lens, vec![rat(1, 3), rat(2, 3)]);
        // Round trip through the map.
        let p = GraphPoint::interior("e", rat(1, 2));
        let fp = map.forward(&m, &r, &p).unwrap();
        assert_eq!(map.backward(&m, &fp).unwrap(), p);
    }

    #[test]
    fn refine_two_points_preserves_total_length() {
        let m = unit_edge();
        let (r, _) = refine(
            &m,
            &[
                GraphPoint::interior("e", rat(1, 4)),
                GraphPoint::interior("e", rat(1, 2)),
            ],
        )
        .unwrap();
        assert_eq!(r.edges.len(), 3);
        assert_eq!(r.total_length(), rat_int(1));
    }

    fn theta() -> MetricGraphModel {
        let mut m = MetricGraphModel::new("theta");
        m.add_edge("e1", "u", "w", rat_int(1));
        m.add_edge("e2", "u", "w", rat_int(1));
        m.add_edge("e3", "u", "w", rat_int(1));
        m
    }

    #[test]
    fn canonical_model_of_theta_is_theta() {
        let (c, _) = canonical_loopless_model(&theta()).unwrap();
        assert_eq!(c, theta());
    }

    #[test]
    fn canonical_model_of_single_loop_has_two_half_edges() {
        let mut m = MetricGraphModel::new("loop");
        m.add_edge("l", "v", "v", rat_int(2));
        let (c, map) = canonical_loopless_model(&m).unwrap();
        assert_eq!(c.vertices.len(), 2);
        assert_eq!(c.edges.len(), 2);
        for e in c.edges.values() {
            assert_eq!(e.length, rat_int(1));
            assert!(!e.is_loop());
        }
        // The two new vertices sit over v and the loop midpoint.
        let imgs: Vec<GraphPoint> = map.vertex_images.values().cloned().collect();
        assert!(imgs.contains(&GraphPoint::vertex("v")));
        assert!(imgs.contains(&GraphPoint::interior("l", rat_int(1))));
    }

    #[test]
    fn canonical_model_of_subdivided_k4_is_k4_with_summed_lengths() {
        // K4 on {a,b,c,d} with every edge split once into 1 + 2.
        let mut m = MetricGraphModel::new("k4s");
        let pairs = [("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")];
        for (i, (x, y)) in pairs.iter().enumerate() {
            let mid = format!("m{i}");
            m.add_edge(&format!("f{i}"), x, &mid, rat_int(1));
            m.add_edge(&format!("g{i}"), &mid, y, rat_int(2));
        }
        let (c, _) = canonical_loopless_model(&m).unwrap();
        assert_eq!(c.vertices.len(), 4);
        assert_eq!(c.edges.len(), 6);
        assert!(c.edges.values().all(|e| e.length == rat_int(3)));
    }

    #[test]
    fn canonical_model_of_circle_keeps_two_antipodal_vertices() {
        let mut m = MetricGraphModel::new("c4");
        m.add_edge("e1", "v1", "v2", rat_int(1));
        m.add_edge("e2", "v2", "v3", rat_int(1));
        m.add_edge("e3", "v3", "v4", rat_int(1));
        m.add_edge("e4", "v4", "v1", rat_int(1));
        let (c, map) = canonical_loopless_model(&m).unwrap();
        assert_eq!(c.vertices.len(), 2);
        assert_eq!(c.edges.len(), 2);
        assert!(c.edges.values().all(|e| e.length == rat_int(2)));
        assert!(c.vertices.contains("v1"));
        // Antipode of v1 on the 4-circle is v3.
        let ap = c.vertices.iter().find(|v| *v != "v1").unwrap();
        assert_eq!(map.vertex_images[ap], GraphPoint::vertex("v3"));
    }

    #[test]
    fn genus_zero_has_no_canonical_model() {
        let m = unit_edge();
        assert!(canonical_loopless_model(&m).is_err());
    }

    #[test]
    fn attach_leaf_raises_valence_and_keeps_genus() {
        let mut tree = MetricGraphModel::new("leaf");
        tree.add_edge("t", "r", "tip", rat_int(1));
        let m = theta();
        let g = m.genus();
        let at = attach_tree(&m, &GraphPoint::vertex("u"), &tree, "r").unwrap();
        assert_eq!(at.model.genus(), g);
        assert_eq!(at.model.valence("u"), 4);
        assert_eq!(at.glue_vertex, "u");

        // Attaching at an interior point creates a valence-3 vertex.
        let at = attach_tree(&m, &GraphPoint::interior("e1", rat(1, 2)), &tree, "r").unwrap();
        assert_eq!(at.model.genus(), g);
        assert_eq!(at.model.valence(&at.glue_vertex), 3);
    }

    #[test]
    fn attach_rejects_positive_genus() {
        let m = theta();
        let bad = theta();
        assert!(attach_tree(&m, &GraphPoint::vertex("u"), &bad, "u").is_err());
    }

    #[test]
    fn contract_tree_to_single_vertex() {
        let mut m = MetricGraphModel::new("t");
        m.add_edge("a", "r", "x", rat_int(1));
        m.add_edge("b", "x", "y", rat_int(1));
        let (c, cmap) = contract_bridges(&m);
        assert_eq!(c.vertices.len(), 1);
        assert!(c.edges.is_empty());
        assert_eq!(
            cmap.forward(&GraphPoint::interior("b", rat(1, 2))).unwrap(),
            GraphPoint::vertex("r")
        );
    }

    #[test]
    fn contract_dumbbell_to_shared_vertex() {
        let mut m = MetricGraphModel::new("dumbbell");
        m.add_edge("l1", "a", "a", rat_int(1));
        m.add_edge("br", "a", "b", rat_int(1));
        m.add_edge("l2", "b", "b", rat_int(1));
        let (c, _) = contract_bridges(&m);
        assert_eq!(c.vertices.len(), 1);
        assert_eq!(c.edges.len(), 2);
        assert!(c.edges.values().all(|e| e.is_loop()));
    }

    #[test]
    fn contract_bridgeless_is_identity() {
        let m = theta();
        let (c, _) = contract_bridges(&m);
        assert_eq!(c, m);
    }
}
