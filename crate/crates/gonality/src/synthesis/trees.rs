//! Hanging trees carry no genus and every chip on them slides freely to the
//! attachment vertex, so the maximal-divisor machinery (which assumes a
//! 2-edge-connected core) breaks on them. Synthesis therefore prunes hanging
//! trees, builds the morphism on the core, and afterwards covers each tree
//! with copies over a fresh target branch: the tree itself maps with index 1,
//! and every other preimage of the attachment image receives one copy scaled
//! by its local degree, so each new target edge again has fiber total 3.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph_core::maps::slice_charts;
use crate::graph_core::rational::{rat_int, Rational};
use crate::graph_core::{contract_bridges, EId, GraphPoint, MetricGraphModel, ModelMap, VId};
use crate::morphism::{self, EdgeImage, IndexedMorphism};

use super::certificate::{
    certify, fresh_edge, fresh_vertex, import_with_prefix, Certificate, SynthesisError,
};

pub(crate) struct HangingTree {
    pub root: VId,
    /// The tree as a model; contains the root vertex.
    pub model: MetricGraphModel,
}

/// Splits off all hanging trees. The returned core keeps the original vertex
/// and edge ids; each tree is rooted at the core vertex it hangs from.
pub(crate) fn prune_hanging_trees(
    model: &MetricGraphModel,
) -> (MetricGraphModel, Vec<HangingTree>) {
    let mut verts: BTreeSet<VId> = model.vertices.clone();
    let mut alive: BTreeSet<EId> = model.edges.keys().cloned().collect();
    let mut removed: BTreeSet<EId> = BTreeSet::new();
    loop {
        let leaf = verts
            .iter()
            .find(|v| {
                let ends: usize = alive
                    .iter()
                    .map(|e| {
                        let ed = &model.edges[e];
                        (ed.u == **v) as usize + (ed.v == **v) as usize
                    })
                    .sum();
                ends == 1
            })
            .cloned();
        let Some(v) = leaf else { break };
        let e = alive
            .iter()
            .find(|e| model.edges[*e].u == v || model.edges[*e].v == v)
            .cloned()
            .unwrap();
        alive.remove(&e);
        removed.insert(e);
        verts.remove(&v);
    }

    let mut core = MetricGraphModel::new(&model.name);
    for v in &verts {
        core.add_vertex(v);
    }
    for e in &alive {
        let ed = &model.edges[e];
        core.add_edge(e, &ed.u, &ed.v, ed.length.clone());
    }

    // Each removed component touches the core in exactly one vertex: a path
    // between two core vertices would never have been pruned.
    let mut used: BTreeSet<EId> = BTreeSet::new();
    let mut trees = Vec::new();
    for w in &core.vertices {
        let mut tree = MetricGraphModel::new(&format!("{}.tree@{}", model.name, w));
        tree.add_vertex(w);
        let mut frontier = vec![w.clone()];
        while let Some(x) = frontier.pop() {
            for e in &removed {
                if used.contains(e) {
                    continue;
                }
                let ed = &model.edges[e];
                let other = if ed.u == x {
                    &ed.v
                } else if ed.v == x {
                    &ed.u
                } else {
                    continue;
                };
                used.insert(e.clone());
                tree.add_edge(e, &ed.u, &ed.v, ed.length.clone());
                frontier.push(other.clone());
            }
        }
        if !tree.edges.is_empty() {
            trees.push(HangingTree {
                root: w.clone(),
                model: tree,
            });
        }
    }
    debug_assert_eq!(used.len(), removed.len());
    (core, trees)
}

/// Extends a certificate built on the pruned core back over the hanging
/// trees. The certificate keeps the core as its base: the extended domain
/// contains the original trees verbatim, so it is a tropical modification of
/// the full input graph as well.
pub(crate) fn extend_over_hanging_trees(
    core: &MetricGraphModel,
    trees: &[HangingTree],
    cert: Certificate,
) -> Result<Certificate, SynthesisError> {
    let mut phi = cert.morphism.clone();
    let mut embedding = cert.embedding.clone();
    // The necklace branch may have contracted bridges under the base; map
    // roots through the same contraction when they are missing from it.
    let cmap = contract_bridges(core).1;
    for tree in trees {
        let w_base = if cert.base.vertices.contains(&tree.root) {
            tree.root.clone()
        } else {
            cmap.vertex_map
                .get(&tree.root)
                .cloned()
                .ok_or_else(|| {
                    SynthesisError::InternalContradiction(format!(
                        "attachment vertex {} is missing from the certificate base",
                        tree.root
                    ))
                })?
        };
        let wp = embedding
            .forward(&cert.base, &phi.domain, &GraphPoint::Vertex(w_base.clone()))
            .map_err(SynthesisError::Graph)?;
        let w_m = match wp {
            GraphPoint::Vertex(v) => v,
            // The core's canonical model may have smoothed the attachment
            // vertex away; refine the whole fiber through that point first.
            GraphPoint::Interior { edge, offset } => {
                split_fiber(&mut phi, &mut embedding, &cert.base, &edge, &offset)?
            }
        };
        let t = phi.vertex_map[&w_m].clone();

        // Local degrees over t, read off before the morphism changes.
        let fiber: Vec<(VId, i64)> = phi
            .domain
            .vertices
            .iter()
            .filter(|u| phi.vertex_map[*u] == t)
            .map(|u| (u.clone(), morphism::vertex_degree(&phi, u)))
            .collect();

        let identify = BTreeMap::from([(tree.root.clone(), t.clone())]);
        let (tv, te) = import_with_prefix(&mut phi.codomain, &tree.model, "ht.", &identify);

        for (u, m) in fiber {
            if m < 1 {
                return Err(SynthesisError::InternalContradiction(format!(
                    "preimage {u} of {t} has local degree {m}"
                )));
            }
            if u == w_m {
                attach_copy(&mut phi, tree, &u, &tv, &te, "", 1);
                if m > 1 {
                    attach_copy(&mut phi, tree, &u, &tv, &te, "htx.", m - 1);
                }
            } else {
                attach_copy(&mut phi, tree, &u, &tv, &te, "htx.", m);
            }
        }
    }
    let provenance = format!("{} plus hanging trees", cert.provenance);
    certify(&cert.base, &cert.divisor, embedding, phi, &provenance)
}

/// Refines the morphism through an interior point p of the modified model:
/// the image of p becomes a target vertex, the target edge over it splits,
/// and every domain edge over that target edge splits at the matching
/// offset. Returns the new domain vertex at p.
fn split_fiber(
    phi: &mut IndexedMorphism,
    embedding: &mut ModelMap,
    base: &MetricGraphModel,
    e0: &EId,
    o0: &Rational,
) -> Result<VId, SynthesisError> {
    let f = match &phi.edge_map[e0] {
        EdgeImage::Edge(f) => f.clone(),
        EdgeImage::Vertex(_) => {
            // The point sits inside a contracted region; a vertex there
            // cannot be covered positively without de-contracting first.
            return Err(SynthesisError::InternalContradiction(format!(
                "attachment point inside contracted edge {e0}"
            )));
        }
    };
    let fe = phi.codomain.edges[&f].clone();

    // Image offset from f's own u endpoint.
    let k0 = phi.index[e0];
    let e0u_image = phi.vertex_map[&phi.domain.edges[e0].u].clone();
    let delta_u = if e0u_image == fe.u {
        o0.clone() * rat_int(k0)
    } else {
        fe.length.clone() - o0.clone() * rat_int(k0)
    };

    // Split the target edge f at delta_u.
    let tm = fresh_vertex(&phi.codomain, &format!("{f}@cut"));
    let f1 = fresh_edge(&phi.codomain, &format!("{f}.s0"));
    let f2 = fresh_edge(&phi.codomain, &format!("{f}.s1"));
    phi.codomain.add_vertex(&tm);
    phi.codomain
        .add_edge(&f1, &fe.u, &tm, delta_u.clone());
    phi.codomain
        .add_edge(&f2, &tm, &fe.v, fe.length.clone() - delta_u.clone());
    phi.codomain.edges.remove(&f);

    // Split every domain edge over f at its own preimage of the cut.
    let over: Vec<EId> = phi
        .edge_map
        .iter()
        .filter(|(_, img)| matches!(img, EdgeImage::Edge(x) if *x == f))
        .map(|(e, _)| e.clone())
        .collect();
    let mut at_p: Option<VId> = None;
    for e in over {
        let ed = phi.domain.edges[&e].clone();
        let k = phi.index[&e];
        let u_image = phi.vertex_map[&ed.u].clone();
        let o = if u_image == fe.u {
            delta_u.clone() / rat_int(k)
        } else {
            (fe.length.clone() - delta_u.clone()) / rat_int(k)
        };
        let nv = fresh_vertex(&phi.domain, &format!("{e}@cut"));
        let s0 = fresh_edge(&phi.domain, &format!("{e}.s0"));
        let s1 = fresh_edge(&phi.domain, &format!("{e}.s1"));
        phi.domain.add_vertex(&nv);
        phi.domain.add_edge(&s0, &ed.u, &nv, o.clone());
        phi.domain
            .add_edge(&s1, &nv, &ed.v, ed.length.clone() - o.clone());
        phi.domain.edges.remove(&e);
        phi.vertex_map.insert(nv.clone(), tm.clone());
        let (img0, img1) = if u_image == fe.u {
            (f1.clone(), f2.clone())
        } else {
            (f2.clone(), f1.clone())
        };
        phi.edge_map.insert(s0.clone(), EdgeImage::Edge(img0));
        phi.edge_map.insert(s1.clone(), EdgeImage::Edge(img1));
        phi.edge_map.remove(&e);
        phi.index.insert(s0.clone(), k);
        phi.index.insert(s1.clone(), k);
        phi.index.remove(&e);

        // Attached-tree edges carry no charts; everything else splits.
        if let Some(charts) = embedding.edge_charts.remove(&e) {
            let under = ModelMap {
                edge_charts: BTreeMap::from([(e.clone(), charts.clone())]),
                vertex_images: BTreeMap::new(),
            };
            let bp = under
                .backward(
                    base,
                    &GraphPoint::Interior {
                        edge: e.clone(),
                        offset: o.clone(),
                    },
                )
                .map_err(SynthesisError::Graph)?;
            embedding.vertex_images.insert(nv.clone(), bp);
            embedding
                .edge_charts
                .insert(s0, slice_charts(&charts, &rat_int(0), &o));
            embedding
                .edge_charts
                .insert(s1, slice_charts(&charts, &o, &ed.length));
        }
        if e == *e0 {
            at_p = Some(nv);
        }
    }
    at_p.ok_or_else(|| {
        SynthesisError::InternalContradiction("fiber split missed the attachment edge".into())
    })
}

/// One copy of the tree glued at `u`, every edge shrunk by 1/k and mapped
/// with index k onto the target copy.
fn attach_copy(
    phi: &mut IndexedMorphism,
    tree: &HangingTree,
    u: &VId,
    tv: &BTreeMap<VId, VId>,
    te: &BTreeMap<EId, EId>,
    prefix: &str,
    k: i64,
) {
    let mut vmap: BTreeMap<VId, VId> = BTreeMap::from([(tree.root.clone(), u.clone())]);
    for v in &tree.model.vertices {
        if *v == tree.root {
            continue;
        }
        let name = fresh_vertex(&phi.domain, &format!("{prefix}{v}"));
        phi.domain.add_vertex(&name);
        phi.vertex_map.insert(name.clone(), tv[v].clone());
        vmap.insert(v.clone(), name);
    }
    for (eid, e) in &tree.model.edges {
        let name = fresh_edge(&phi.domain, &format!("{prefix}{eid}"));
        phi.domain
            .add_edge(&name, &vmap[&e.u], &vmap[&e.v], e.length.clone() / rat_int(k));
        phi.edge_map
            .insert(name.clone(), EdgeImage::Edge(te[eid].clone()));
        phi.index.insert(name, k);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::rational::rat_int as ri;

    #[test]
    fn pruning_splits_trees_and_keeps_the_core() {
        // Theta with a path of two edges at u and a single leaf at w.
        let mut m = MetricGraphModel::new("t");
        m.add_edge("e1", "u", "w", ri(1));
        m.add_edge("e2", "u", "w", ri(1));
        m.add_edge("e3", "u", "w", ri(1));
        m.add_edge("p1", "u", "a", ri(2));
        m.add_edge("p2", "a", "b", ri(1));
        m.add_edge("q1", "w", "c", ri(3));
        let (core, trees) = prune_hanging_trees(&m);
        assert_eq!(core.edges.len(), 3);
        assert_eq!(core.genus(), m.genus());
        assert_eq!(trees.len(), 2);
        assert_eq!(trees[0].root, "u");
        assert_eq!(trees[0].model.edges.len(), 2);
        assert_eq!(trees[1].root, "w");
        assert_eq!(trees[1].model.edges.len(), 1);
    }

    #[test]
    fn pruning_is_a_no_op_without_leaves() {
        let mut m = MetricGraphModel::new("t");
        m.add_edge("e1", "u", "w", ri(1));
        m.add_edge("e2", "u", "w", ri(1));
        let (core, trees) = prune_hanging_trees(&m);
        assert_eq!(core.edges.len(), 2);
        assert!(trees.is_empty());
    }
}
