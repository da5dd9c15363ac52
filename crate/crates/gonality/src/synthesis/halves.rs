//! Hyperelliptic halves: maximal subgraphs swept by a degree-2 subclass of
//! D, and the gluing that assembles a degree-3 morphism from the halves,
//! a core construction on the leftover edges, and attached trees.

use std::collections::{BTreeMap, BTreeSet};

use crate::divisor_theory::{rank_at_least, reduce, Divisor};
use crate::graph_core::{
    rational::rat, refine, EId, GraphPoint, MetricGraphModel, ModelMap, VId,
};
use crate::morphism::{EdgeImage, IndexedMorphism};

use super::certificate::{
    certify, divisor_forward, edge_subgraph, import_with_prefix, Certificate, SynthesisError,
};
use super::core::core_data;
use super::fold::{fold_in_ambient, partner_point, Fold};

#[derive(Clone, Debug)]
pub struct HyperellipticHalf {
    /// Edge set in the refined model.
    pub edges: BTreeSet<EId>,
    /// Effective representative of the sweeping class, supported in the half.
    pub h: Divisor,
    /// The residual point: D ~ h + p.
    pub p: GraphPoint,
    /// Vertices of the half met by outside edges.
    pub boundary: BTreeSet<VId>,
}

#[derive(Clone, Debug)]
pub struct Halves {
    /// Common refinement on which all halves are edge-induced subgraphs.
    pub model: MetricGraphModel,
    /// `model` over the input model.
    pub map: ModelMap,
    pub halves: Vec<HyperellipticHalf>,
}

/// Candidate residual points: vertices, supports of reduced representatives
/// at every vertex, and one more round of reductions based at those supports.
fn residual_candidates(
    model: &MetricGraphModel,
    d: &Divisor,
) -> Result<BTreeSet<GraphPoint>, SynthesisError> {
    let mut out: BTreeSet<GraphPoint> = model
        .vertices
        .iter()
        .map(|v| GraphPoint::Vertex(v.clone()))
        .collect();
    out.extend(d.support());
    let mut second: BTreeSet<GraphPoint> = BTreeSet::new();
    for v in &out.clone() {
        let (r, _) = reduce(model, d, v)?;
        second.extend(r.support());
    }
    for s in &second {
        let (r, _) = reduce(model, d, s)?;
        out.extend(r.support());
    }
    out.extend(second);
    Ok(out)
}

/// An edge belongs to the sweep of `h` when the partner map restricted to it
/// is an injective isometry: both sample points have partners and the
/// partners differ. (A constant partner means a lone chip walked here across
/// a bridge while the residual sat still; that is not a sweep.)
fn edge_in_sweep(
    model: &MetricGraphModel,
    h: &Divisor,
    eid: &EId,
) -> Result<bool, SynthesisError> {
    let len = model.edges[eid].length.clone();
    let q1 = GraphPoint::interior(eid, len.clone() / rat(4, 1));
    let q2 = GraphPoint::interior(eid, len / rat(2, 1));
    let (Some(s1), Some(s2)) = (
        partner_point(model, h, &q1)?,
        partner_point(model, h, &q2)?,
    ) else {
        return Ok(false);
    };
    Ok(s1 != s2)
}

/// Finds the hyperelliptic halves of (model, d): maximal edge-induced
/// subgraphs of positive genus swept by a degree-2 subclass D - p, on a
/// common refinement of the input model.
pub fn find_hyperelliptic_halves(
    model: &MetricGraphModel,
    d: &Divisor,
) -> Result<Halves, SynthesisError> {
    model.validate()?;
    let d = d.canonicalize(model)?;
    let cands = residual_candidates(model, &d)?;

    // Refine at every candidate, loop midpoint, and partner of a seed under
    // every candidate class, so that sweeps become edgewise-constant.
    let mut pts: BTreeSet<GraphPoint> = cands.clone();
    let mut seeds: Vec<GraphPoint> = model
        .vertices
        .iter()
        .map(|v| GraphPoint::Vertex(v.clone()))
        .collect();
    for (eid, e) in &model.edges {
        if e.is_loop() {
            let mid = GraphPoint::interior(eid, e.length.clone() / rat(2, 1));
            seeds.push(mid.clone());
            pts.insert(mid);
        }
    }
    seeds.extend(cands.iter().cloned());
    for p in &cands {
        let h = d.minus(&Divisor::single(p.clone(), 1));
        for s in &seeds {
            if let Some(q) = partner_point(model, &h, s)? {
                pts.insert(q);
            }
        }
    }
    let pts: Vec<GraphPoint> = pts.into_iter().collect();
    let (ms, map) = refine(model, &pts)?;
    let ds = divisor_forward(&map, model, &ms, &d)?;

    let mut by_edges: BTreeMap<BTreeSet<EId>, HyperellipticHalf> = BTreeMap::new();
    let mut ps: BTreeSet<GraphPoint> = BTreeSet::new();
    for p in &cands {
        ps.insert(map.forward(model, &ms, p)?);
    }
    for p in &ps {
        let h = ds.minus(&Divisor::single(p.clone(), 1));
        let mut edges: BTreeSet<EId> = BTreeSet::new();
        for eid in ms.edges.keys() {
            if edge_in_sweep(&ms, &h, eid)? {
                edges.insert(eid.clone());
            }
        }
        if edges.len() < 2 || edges.len() == ms.edges.len() {
            continue;
        }
        let sub = edge_subgraph(&ms, "half", &edges);
        if !sub.is_connected() || sub.genus() < 1 {
            continue;
        }
        // p must sit in the closure of the complement.
        match p {
            GraphPoint::Interior { edge, .. } if edges.contains(edge) => continue,
            GraphPoint::Vertex(v)
                if sub.vertices.contains(v)
                    && ms.ends_at(v).iter().all(|(e, _)| edges.contains(e)) =>
            {
                continue
            }
            _ => {}
        }
        // An effective representative of the class, supported in the half.
        let base = GraphPoint::Vertex(sub.vertices.iter().next().unwrap().clone());
        let (hr, _) = reduce(&ms, &h, &base)?;
        if !hr.is_effective() || hr.degree() != 2 {
            continue;
        }
        let inside = hr.chips.keys().all(|q| match q {
            GraphPoint::Vertex(v) => sub.vertices.contains(v),
            GraphPoint::Interior { edge, .. } => edges.contains(edge),
        });
        if !inside || !rank_at_least(&sub, &hr, 1)? {
            continue;
        }
        let boundary: BTreeSet<VId> = sub
            .vertices
            .iter()
            .filter(|v| ms.ends_at(v).iter().any(|(e, _)| !edges.contains(e)))
            .cloned()
            .collect();
        let half = HyperellipticHalf {
            edges: edges.clone(),
            h: hr,
            p: p.clone(),
            boundary,
        };
        // Same edge set from two residuals: keep the lex-first p.
        by_edges.entry(edges).or_insert(half);
    }

    // Keep maximal halves only.
    let keys: Vec<BTreeSet<EId>> = by_edges.keys().cloned().collect();
    let halves: Vec<HyperellipticHalf> = keys
        .iter()
        .filter(|k| !keys.iter().any(|o| *o != **k && k.is_subset(o)))
        .map(|k| by_edges[k].clone())
        .collect();
    Ok(Halves { model: ms, map, halves })
}

/// The compatibility conditions for gluing. Returns a diagnostic for the
/// first violation: a half whose boundary is not a single point or a
/// partner pair, or two halves sharing an edge or more than one vertex.
pub(crate) fn h1_h2_diagnostic(halves: &Halves) -> Result<Option<String>, SynthesisError> {
    for (i, h) in halves.halves.iter().enumerate() {
        if h.boundary.is_empty() {
            return Ok(Some(format!("half {i} has no boundary vertex")));
        }
        if h.boundary.len() > 2 {
            return Ok(Some(format!(
                "half {i} has {} boundary vertices",
                h.boundary.len()
            )));
        }
        if h.boundary.len() == 2 {
            let mut it = h.boundary.iter();
            let (b1, b2) = (it.next().unwrap(), it.next().unwrap());
            // Partners in the ambient model: inside the half alone a pendant
            // bridge lets single chips slide, blurring the partner map.
            let partner =
                partner_point(&halves.model, &h.h, &GraphPoint::Vertex(b1.clone()))?;
            if partner != Some(GraphPoint::Vertex(b2.clone())) {
                return Ok(Some(format!(
                    "boundary vertices {b1}, {b2} of half {i} are not partners"
                )));
            }
        }
    }
    for i in 0..halves.halves.len() {
        for j in i + 1..halves.halves.len() {
            let (a, b) = (&halves.halves[i], &halves.halves[j]);
            if a.edges.intersection(&b.edges).next().is_some() {
                return Ok(Some(format!("halves {i} and {j} share an edge")));
            }
            let va = half_vertices(&halves.model, &a.edges);
            let vb = half_vertices(&halves.model, &b.edges);
            if va.intersection(&vb).count() > 1 {
                return Ok(Some(format!(
                    "halves {i} and {j} meet in more than one point"
                )));
            }
        }
    }
    Ok(None)
}

pub fn check_h1_h2(halves: &Halves) -> Result<bool, SynthesisError> {
    Ok(h1_h2_diagnostic(halves)?.is_none())
}

fn half_vertices(model: &MetricGraphModel, edges: &BTreeSet<EId>) -> BTreeSet<VId> {
    edges
        .iter()
        .flat_map(|e| {
            let edge = &model.edges[e];
            [edge.u.clone(), edge.v.clone()]
        })
        .collect()
}

/// Edges of `derived` that descend from `base_edges` under `map`.
fn descendant_edges(
    derived: &MetricGraphModel,
    map: &ModelMap,
    base_edges: &BTreeSet<EId>,
) -> BTreeSet<EId> {
    derived
        .edges
        .keys()
        .filter(|e| map.edge_charts[*e].iter().all(|c| base_edges.contains(&c.base_edge)))
        .cloned()
        .collect()
}

fn tree_path(
    model: &MetricGraphModel,
    from: &VId,
    to: &VId,
) -> Result<Vec<EId>, SynthesisError> {
    let mut parent: BTreeMap<VId, (VId, EId)> = BTreeMap::new();
    let mut queue = std::collections::VecDeque::from([from.clone()]);
    let mut seen: BTreeSet<VId> = BTreeSet::from([from.clone()]);
    while let Some(v) = queue.pop_front() {
        if v == *to {
            let mut path = Vec::new();
            let mut at = v;
            while at != *from {
                let (prev, e) = parent[&at].clone();
                path.push(e);
                at = prev;
            }
            return Ok(path);
        }
        for (e, _) in model.ends_at(&v) {
            let w = model.edges[&e].other(&v).clone();
            if seen.insert(w.clone()) {
                parent.insert(w.clone(), (v.clone(), e));
                queue.push_back(w);
            }
        }
    }
    Err(SynthesisError::InternalContradiction(format!(
        "no path from {from} to {to} in the assembled target"
    )))
}

/// Assembles a degree-3 morphism from compatible halves: each half folds by
/// its degree-2 class, the leftover core edges get the fiber construction,
/// the targets are glued at boundary images, and a copy of the subtree from
/// the residual's image to each half's gluing vertex is attached at the
/// residual to complete the fibers.
pub fn glue_hyperelliptic(
    model: &MetricGraphModel,
    d: &Divisor,
    halves: &Halves,
) -> Result<Certificate, SynthesisError> {
    if halves.halves.is_empty() {
        return Err(SynthesisError::Precondition("no halves to glue".into()));
    }
    if let Some(msg) = h1_h2_diagnostic(halves)? {
        return Err(SynthesisError::NecklaceObstruction(msg));
    }
    let ms = &halves.model;
    let ds = divisor_forward(&halves.map, model, ms, &d.canonicalize(model)?)?;

    let mut e_half: BTreeSet<EId> = BTreeSet::new();
    for h in &halves.halves {
        e_half.extend(h.edges.iter().cloned());
    }
    let e_core: BTreeSet<EId> = ms
        .edges
        .keys()
        .filter(|e| !e_half.contains(*e))
        .cloned()
        .collect();

    // Residual points interior to core edges must become core fiber
    // vertices; residuals interior to a half become marks of its fold.
    let mut extras: Vec<GraphPoint> = Vec::new();
    let mut marks: BTreeMap<usize, Vec<GraphPoint>> = BTreeMap::new();
    for h in &halves.halves {
        if let GraphPoint::Interior { edge, .. } = &h.p {
            if e_core.contains(edge) {
                extras.push(h.p.clone());
            } else {
                let owner = halves
                    .halves
                    .iter()
                    .position(|o| o.edges.contains(edge))
                    .expect("edge belongs to some half");
                marks.entry(owner).or_default().push(h.p.clone());
            }
        }
    }

    // Core construction on the leftover edges.
    let core = if e_core.is_empty() {
        None
    } else {
        Some(core_data(ms, &ds, Some(&e_core), &extras, "c.")?)
    };
    let (m3, map_s3) = match &core {
        Some(cd) => (cd.refined.clone(), cd.map.clone()),
        None => (ms.clone(), ModelMap::identity(ms)),
    };

    // First fold pass learns each half's refinement points; one global
    // refinement makes them vertices so the second pass is subdivision-free
    // and its domains match the glued model exactly.
    let mut fold_pts: BTreeSet<GraphPoint> = BTreeSet::new();
    for (i, h) in halves.halves.iter().enumerate() {
        let sub = edge_subgraph(&m3, &format!("half{i}"), &h.edges);
        let h3 = divisor_forward(&map_s3, ms, &m3, &h.h)?;
        let mut mk: Vec<GraphPoint> = Vec::new();
        for p in marks.get(&i).into_iter().flatten() {
            mk.push(map_s3.forward(ms, &m3, p)?);
        }
        let fold = fold_in_ambient(&sub, &h3, &mk, Some((&m3, &h3)))?;
        for img in fold.map.vertex_images.values() {
            if matches!(img, GraphPoint::Interior { .. }) {
                fold_pts.insert(img.clone());
            }
        }
    }
    let fold_pts: Vec<GraphPoint> = fold_pts.into_iter().collect();
    let (m4, map34) = refine(&m3, &fold_pts)?;

    let mut folds: Vec<(Fold, BTreeSet<EId>)> = Vec::new();
    for (i, h) in halves.halves.iter().enumerate() {
        let e4 = descendant_edges(&m4, &map34, &h.edges);
        let sub = edge_subgraph(&m4, &format!("half{i}"), &e4);
        let h3 = divisor_forward(&map_s3, ms, &m3, &h.h)?;
        let h4 = divisor_forward(&map34, &m3, &m4, &h3)?;
        let mut mk: Vec<GraphPoint> = Vec::new();
        for p in marks.get(&i).into_iter().flatten() {
            let p3 = map_s3.forward(ms, &m3, p)?;
            mk.push(map34.forward(&m3, &m4, &p3)?);
        }
        let fold = fold_in_ambient(&sub, &h4, &mk, Some((&m4, &h4)))?;
        if fold.domain.edges.keys().ne(sub.edges.keys()) {
            return Err(SynthesisError::InternalContradiction(format!(
                "fold of half {i} subdivided its domain after the global refinement"
            )));
        }
        folds.push((fold, e4));
    }

    // Glue the targets. Global vertex images accumulate as pieces land;
    // each new half is pinned wherever its domain already has an image.
    let mut tgt = MetricGraphModel::new(&format!("{}.target", model.name));
    let mut vmap: BTreeMap<VId, VId> = BTreeMap::new();
    let mut emap: BTreeMap<EId, EdgeImage> = BTreeMap::new();
    let mut index: BTreeMap<EId, i64> = BTreeMap::new();
    if let Some(cd) = &core {
        for v in &cd.target.vertices {
            tgt.add_vertex(v);
        }
        for (eid, e) in &cd.target.edges {
            tgt.add_edge(eid, &e.u, &e.v, e.length.clone());
        }
        for (v, k) in &cd.fiber_of {
            vmap.insert(v.clone(), cd.target_vertex[*k].clone());
        }
        for (e, (img, m)) in &cd.edge_images {
            emap.insert(e.clone(), img.clone());
            index.insert(e.clone(), *m);
        }
    }

    // Order halves so every piece after the first touches what is placed.
    let mut order: Vec<usize> = Vec::new();
    let mut remaining: BTreeSet<usize> = (0..folds.len()).collect();
    while !remaining.is_empty() {
        let next = remaining
            .iter()
            .find(|i| {
                folds[**i].0.domain.vertices.iter().any(|v| vmap.contains_key(v))
            })
            .or_else(|| remaining.iter().next())
            .cloned()
            .unwrap();
        remaining.remove(&next);
        order.push(next);
    }

    let mut placed: Vec<Option<(BTreeMap<VId, VId>, BTreeMap<EId, EId>)>> =
        vec![None; folds.len()];
    for i in order {
        let (fold, _) = &folds[i];
        let psi = &fold.morphism;
        let mut identify: BTreeMap<VId, VId> = BTreeMap::new();
        for v in &fold.domain.vertices {
            if let Some(gv) = vmap.get(v) {
                let tv = psi.vertex_map[v].clone();
                if let Some(prev) = identify.insert(tv.clone(), gv.clone()) {
                    if prev != *gv {
                        return Err(SynthesisError::InternalContradiction(format!(
                            "half {i}: fold image {tv} must equal both {prev} and {gv}"
                        )));
                    }
                }
            }
        }
        let (tvm, tem) = import_with_prefix(&mut tgt, &psi.codomain, &format!("h{i}."), &identify);
        for (v, tv) in &psi.vertex_map {
            let gv = tvm[tv].clone();
            if let Some(prev) = vmap.insert(v.clone(), gv.clone()) {
                if prev != gv {
                    return Err(SynthesisError::InternalContradiction(format!(
                        "vertex {v} maps to both {prev} and {gv}"
                    )));
                }
            }
        }
        for (e, img) in &psi.edge_map {
            let img = match img {
                EdgeImage::Edge(te) => EdgeImage::Edge(tem[te].clone()),
                EdgeImage::Vertex(tv) => EdgeImage::Vertex(tvm[tv].clone()),
            };
            emap.insert(e.clone(), img);
            index.insert(e.clone(), psi.index[e]);
        }
        placed[i] = Some((tvm, tem));
    }

    // Attached trees: at each residual p_i, a copy of the target subtree
    // spanning T_i and the geodesic from the image of p_i to half i's
    // gluing vertex, mapped by the identity with index 1.
    let mut dom = m4.clone();
    for (i, h) in halves.halves.iter().enumerate() {
        let p3 = map_s3.forward(ms, &m3, &h.p)?;
        let p4 = m4.canonical_point(&map34.forward(&m3, &m4, &p3)?)?;
        let GraphPoint::Vertex(pv) = &p4 else {
            return Err(SynthesisError::InternalContradiction(format!(
                "residual point {p4} of half {i} is not a vertex after refinement"
            )));
        };
        let phi_p = vmap
            .get(pv)
            .cloned()
            .ok_or_else(|| {
                SynthesisError::InternalContradiction(format!(
                    "residual vertex {pv} has no image in the glued target"
                ))
            })?;
        let mut glue_imgs: BTreeSet<VId> = BTreeSet::new();
        for b in &h.boundary {
            glue_imgs.insert(vmap[b].clone());
        }
        if glue_imgs.len() != 1 {
            return Err(SynthesisError::InternalContradiction(format!(
                "boundary of half {i} maps to {} target points",
                glue_imgs.len()
            )));
        }
        let glue = glue_imgs.into_iter().next().unwrap();
        let (_, tem) = placed[i].as_ref().expect("every half is placed");
        let mut tree_edges: BTreeSet<EId> = tem.values().cloned().collect();
        tree_edges.extend(tree_path(&tgt, &phi_p, &glue)?);
        let tree = edge_subgraph(&tgt, &format!("a{i}"), &tree_edges);
        let identify = BTreeMap::from([(phi_p.clone(), pv.clone())]);
        let (avm, aem) = import_with_prefix(&mut dom, &tree, &format!("a{i}."), &identify);
        for (tv, v) in &avm {
            if v != pv {
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
    let emb = halves
        .map
        .compose(model, &map_s3)?
        .compose(model, &map34)?;
    certify(model, d, emb, phi, "hyperelliptic-halves gluing")
}
