//! Edge-cut and vertex-cut structure: bridges, 2-edge cuts, separating
//! vertices, edge connectivity. Enumeration is brute force with
//! connectivity re-checks; models are desk-scale by design.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::model::{EId, MetricGraphModel, VId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutStructure {
    pub bridges: BTreeSet<EId>,
    /// Unordered pairs, stored with the lexicographically smaller id first.
    /// Pairs containing a bridge are excluded (they disconnect trivially).
    pub two_edge_cuts: BTreeSet<(EId, EId)>,
    /// Vertices whose removal disconnects the metric space. A vertex
    /// carrying a loop separates the loop's interior, so it counts when the
    /// graph has anything else.
    pub separating_vertices: BTreeSet<VId>,
    pub edge_connectivity: usize,
}

fn connected_without(model: &MetricGraphModel, skip: &BTreeSet<EId>) -> bool {
    let start = model.vertices.iter().next().unwrap();
    model.reachable_from(start, skip, None).len() == model.vertices.len()
}

pub fn bridges(model: &MetricGraphModel) -> BTreeSet<EId> {
    let mut out = BTreeSet::new();
    for eid in model.edges.keys() {
        let skip = BTreeSet::from([eid.clone()]);
        if !connected_without(model, &skip) {
            out.insert(eid.clone());
        }
    }
    out
}

pub fn two_edge_cuts(model: &MetricGraphModel, bridges: &BTreeSet<EId>) -> BTreeSet<(EId, EId)> {
    let ids: Vec<&EId> = model.edges.keys().filter(|e| !bridges.contains(*e)).collect();
    let mut out = BTreeSet::new();
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            let skip = BTreeSet::from([ids[i].clone(), ids[j].clone()]);
            if !connected_without(model, &skip) {
                out.insert((ids[i].clone(), ids[j].clone()));
            }
        }
    }
    out
}

/// Number of connected components of the metric space with `v` removed.
fn components_without_vertex(model: &MetricGraphModel, v: &str) -> usize {
    let loops_at_v = model
        .edges
        .values()
        .filter(|e| e.is_loop() && e.u == v)
        .count();
    let rest: BTreeSet<&VId> = model.vertices.iter().filter(|w| w.as_str() != v).collect();
    let incident: BTreeSet<EId> = model
        .edges
        .iter()
        .filter(|(_, e)| e.u == v || e.v == v)
        .map(|(id, _)| id.clone())
        .collect();
    let mut seen: BTreeSet<VId> = BTreeSet::new();
    let mut comps = 0;
    for w in rest {
        if seen.contains(w) {
            continue;
        }
        comps += 1;
        let reached = model.reachable_from(w, &incident, Some(v));
        seen.extend(reached);
    }
    // Each non-loop edge hanging at v joins its far component; each loop at v
    // contributes one extra open-circle component.
    comps + loops_at_v
}

pub fn separating_vertices(model: &MetricGraphModel) -> BTreeSet<VId> {
    model
        .vertices
        .iter()
        .filter(|v| components_without_vertex(model, v) >= 2)
        .cloned()
        .collect()
}

/// Exact global minimum edge cut of the multigraph (loops ignored).
/// For a single-vertex model there is no edge cut; returns the edge count.
pub fn edge_connectivity(model: &MetricGraphModel) -> usize {
    if model.vertices.len() < 2 {
        return model.edges.len();
    }
    let verts: Vec<&VId> = model.vertices.iter().collect();
    let index: BTreeMap<&VId, usize> = verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut cap0: BTreeMap<(usize, usize), i64> = BTreeMap::new();
    for e in model.edges.values() {
        if e.is_loop() {
            continue;
        }
        let (a, b) = (index[&e.u], index[&e.v]);
        *cap0.entry((a, b)).or_insert(0) += 1;
        *cap0.entry((b, a)).or_insert(0) += 1;
    }
    let n = verts.len();
    let mut best = usize::MAX;
    for t in 1..n {
        let mut cap = cap0.clone();
        let mut flow = 0usize;
        loop {
            // BFS augmenting path from 0 to t.
            let mut prev: Vec<Option<usize>> = vec![None; n];
            prev[0] = Some(0);
            let mut q = VecDeque::from([0usize]);
            while let Some(u) = q.pop_front() {
                for w in 0..n {
                    if prev[w].is_none() && cap.get(&(u, w)).copied().unwrap_or(0) > 0 {
                        prev[w] = Some(u);
                        q.push_back(w);
                    }
                }
            }
            if prev[t].is_none() {
                break;
            }
            // Augment by one unit (unit capacities per parallel edge).
            let mut w = t;
            while w != 0 {
                let u = prev[w].unwrap();
                *cap.get_mut(&(u, w)).unwrap() -= 1;
                *cap.entry((w, u)).or_insert(0) += 1;
                w = u;
            }
            flow += 1;
        }
        best = best.min(flow);
    }
    best
}

/// Exhaustive cut structure of a connected model.
pub fn cut_structure(model: &MetricGraphModel) -> CutStructure {
    let bridges = bridges(model);
    let two_edge_cuts = two_edge_cuts(model, &bridges);
    let separating_vertices = separating_vertices(model);
    let edge_connectivity = if !bridges.is_empty() {
        1
    } else if !two_edge_cuts.is_empty() {
        2
    } else {
        edge_connectivity(model)
    };
    CutStructure {
        bridges,
        two_edge_cuts,
        separating_vertices,
        edge_connectivity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::rational::rat_int;

    fn k4() -> MetricGraphModel {
        let mut m = MetricGraphModel::new("k4");
        let pairs = [("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")];
        for (i, (x, y)) in pairs.iter().enumerate() {
            m.add_edge(&format!("e{i}"), x, y, rat_int(1));
        }
        m
    }

    #[test]
    fn k4_is_three_edge_connected() {
        let cs = cut_structure(&k4());
        assert!(cs.bridges.is_empty());
        assert!(cs.two_edge_cuts.is_empty());
        assert!(cs.separating_vertices.is_empty());
        assert_eq!(cs.edge_connectivity, 3);
    }

    #[test]
    fn two_triangles_joined_at_a_vertex() {
        let mut m = MetricGraphModel::new("bowtie");
        m.add_edge("a1", "x", "p", rat_int(1));
        m.add_edge("a2", "p", "y", rat_int(1));
        m.add_edge("a3", "y", "x", rat_int(1));
        m.add_edge("b1", "p", "s", rat_int(1));
        m.add_edge("b2", "s", "t", rat_int(1));
        m.add_edge("b3", "t", "p", rat_int(1));
        let cs = cut_structure(&m);
        assert_eq!(cs.separating_vertices, BTreeSet::from(["p".to_string()]));
        assert!(cs.bridges.is_empty());
        assert_eq!(cs.edge_connectivity, 2);
    }

    #[test]
    fn every_edge_pair_of_a_cycle_is_a_two_cut() {
        let mut m = MetricGraphModel::new("c4");
        m.add_edge("e1", "v1", "v2", rat_int(1));
        m.add_edge("e2", "v2", "v3", rat_int(1));
        m.add_edge("e3", "v3", "v4", rat_int(1));
        m.add_edge("e4", "v4", "v1", rat_int(1));
        let cs = cut_structure(&m);
        assert_eq!(cs.two_edge_cuts.len(), 6);
        assert_eq!(cs.edge_connectivity, 2);
    }

    #[test]
    fn removing_a_reported_pair_disconnects_into_two_parts() {
        let m = MetricGraphModel {
            name: "theta".into(),
            vertices: ["u".to_string(), "w".to_string()].into_iter().collect(),
            edges: [
                ("e1", ("u", "w")),
                ("e2", ("u", "w")),
                ("e3", ("u", "w")),
            ]
            .into_iter()
            .map(|(id, (u, v))| {
                (
                    id.to_string(),
                    crate::graph_core::model::Edge {
                        u: u.to_string(),
                        v: v.to_string(),
                        length: rat_int(1),
                    },
                )
            })
            .collect(),
        };
        // A theta has no 2-edge cut among its three parallel edges? Removing
        // two of the three leaves the third connecting u and w.
        let cs = cut_structure(&m);
        assert!(cs.two_edge_cuts.is_empty());
        assert_eq!(cs.edge_connectivity, 3);
    }

    #[test]
    fn loop_base_vertex_is_separating() {
        let mut m = MetricGraphModel::new("tadpole");
        m.add_edge("l", "v", "v", rat_int(1));
        m.add_edge("tail", "v", "w", rat_int(1));
        let cs = cut_structure(&m);
        assert!(cs.separating_vertices.contains("v"));
        assert!(!cs.separating_vertices.contains("w"));
        assert_eq!(cs.bridges, BTreeSet::from(["tail".to_string()]));
    }

    #[test]
    fn single_loop_vertex_is_not_separating() {
        let mut m = MetricGraphModel::new("loop");
        m.add_edge("l", "v", "v", rat_int(1));
        assert!(separating_vertices(&m).is_empty());
    }
}
