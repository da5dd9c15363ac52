//! Combinatorial models of metric graphs and points on them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rational::{format_rational, Rational};

/// Vertex identifier. Plain strings keep file formats and tie-breaking
/// (lexicographic everywhere) trivially aligned.
pub type VId = String;
/// Edge identifier.
pub type EId = String;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub u: VId,
    pub v: VId,
    pub length: Rational,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }

    /// The endpoint other than `at`; for loops this is `at` again.
    pub fn other(&self, at: &str) -> &VId {
        if self.u == at {
            &self.v
        } else {
            &self.u
        }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("model {0} has no vertices")]
    Empty(String),
    #[error("edge {edge}: unknown endpoint {vertex}")]
    UnknownEndpoint { edge: EId, vertex: VId },
    #[error("edge {0} has non-positive length")]
    NonPositiveLength(EId),
    #[error("model {0} is not connected")]
    Disconnected(String),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(VId),
    #[error("unknown edge {0}")]
    UnknownEdge(EId),
    #[error("point offset out of range on edge {0}")]
    OffsetOutOfRange(EId),
    #[error("operation unsupported: {0}")]
    Unsupported(String),
}

/// A connected graph with positive rational edge lengths: the finite
/// presentation of a metric graph. Loops and parallel edges are permitted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricGraphModel {
    pub name: String,
    pub vertices: BTreeSet<VId>,
    pub edges: BTreeMap<EId, Edge>,
}

impl MetricGraphModel {
    pub fn new(name: &str) -> Self {
        MetricGraphModel {
            name: name.to_string(),
            vertices: BTreeSet::new(),
            edges: BTreeMap::new(),
        }
    }

    pub fn add_vertex(&mut self, id: &str) {
        self.vertices.insert(id.to_string());
    }

    pub fn add_edge(&mut self, id: &str, u: &str, v: &str, length: Rational) {
        self.vertices.insert(u.to_string());
        self.vertices.insert(v.to_string());
        self.edges.insert(
            id.to_string(),
            Edge {
                u: u.to_string(),
                v: v.to_string(),
                length,
            },
        );
    }

    pub fn edge(&self, id: &str) -> Result<&Edge, GraphError> {
        self.edges
            .get(id)
            .ok_or_else(|| GraphError::UnknownEdge(id.to_string()))
    }

    /// Structural validation: endpoints exist, lengths positive, connected.
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.vertices.is_empty() {
            return Err(GraphError::Empty(self.name.clone()));
        }
        for (id, e) in &self.edges {
            for end in [&e.u, &e.v] {
                if !self.vertices.contains(end) {
                    return Err(GraphError::UnknownEndpoint {
                        edge: id.clone(),
                        vertex: end.clone(),
                    });
                }
            }
            if e.length <= Rational::zero() {
                return Err(GraphError::NonPositiveLength(id.clone()));
            }
        }
        if !self.is_connected() {
            return Err(GraphError::Disconnected(self.name.clone()));
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let start = self.vertices.iter().next().unwrap();
        let reached = self.reachable_from(start, &BTreeSet::new(), None);
        reached.len() == self.vertices.len()
    }

    /// Vertices reachable from `start` avoiding `skip_edges` and, if given,
    /// never stepping through `skip_vertex`.
    pub fn reachable_from(
        &self,
        start: &str,
        skip_edges: &BTreeSet<EId>,
        skip_vertex: Option<&str>,
    ) -> BTreeSet<VId> {
        let mut seen = BTreeSet::new();
        if Some(start) == skip_vertex {
            return seen;
        }
        seen.insert(start.to_string());
        let mut queue = VecDeque::from([start.to_string()]);
        while let Some(v) = queue.pop_front() {
            for (eid, e) in &self.edges {
                if skip_edges.contains(eid) {
                    continue;
                }
                let next = if e.u == v {
                    &e.v
                } else if e.v == v {
                    &e.u
                } else {
                    continue;
                };
                if Some(next.as_str()) == skip_vertex || seen.contains(next) {
                    continue;
                }
                seen.insert(next.clone());
                queue.push_back(next.clone());
            }
        }
        seen
    }

    /// First Betti number |E| - |V| + 1.
    pub fn genus(&self) -> i64 {
        self.edges.len() as i64 - self.vertices.len() as i64 + 1
    }

    /// Edge-ends at `v` as (edge id, end index). A loop contributes both ends.
    pub fn ends_at(&self, v: &str) -> Vec<(EId, u8)> {
        let mut out = Vec::new();
        for (id, e) in &self.edges {
            if e.u == v {
                out.push((id.clone(), 0));
            }
            if e.v == v {
                out.push((id.clone(), 1));
            }
        }
        out
    }

    pub fn valence(&self, v: &str) -> usize {
        self.ends_at(v).len()
    }

    pub fn total_length(&self) -> Rational {
        self.edges
            .values()
            .map(|e| e.length.clone())
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// Canonicalizes a point: interior offsets at 0 or full length become the
    /// corresponding vertex. Validates ids and offset range.
    pub fn canonical_point(&self, p: &GraphPoint) -> Result<GraphPoint, GraphError> {
        match p {
            GraphPoint::Vertex(v) => {
                if self.vertices.contains(v) {
                    Ok(p.clone())
                } else {
                    Err(GraphError::UnknownVertex(v.clone()))
                }
            }
            GraphPoint::Interior { edge, offset } => {
                let e = self.edge(edge)?;
                if *offset < Rational::zero() || *offset > e.length {
                    return Err(GraphError::OffsetOutOfRange(edge.clone()));
                }
                if offset.is_zero() {
                    Ok(GraphPoint::Vertex(e.u.clone()))
                } else if *offset == e.length {
                    Ok(GraphPoint::Vertex(e.v.clone()))
                } else {
                    Ok(p.clone())
                }
            }
        }
    }

    /// Exact shortest-path distances from a vertex to every vertex.
    pub fn vertex_distances(&self, from: &str) -> BTreeMap<VId, Rational> {
        // Dijkstra by linear scan; models are desk-scale.
        let mut dist: BTreeMap<VId, Rational> = BTreeMap::new();
        let mut done: BTreeSet<VId> = BTreeSet::new();
        dist.insert(from.to_string(), Rational::zero());
        loop {
            let next = dist
                .iter()
                .filter(|(v, _)| !done.contains(*v))
                .min_by(|a, b| a.1.cmp(b.1).then_with(|| a.0.cmp(b.0)))
                .map(|(v, d)| (v.clone(), d.clone()));
            let Some((v, d)) = next else { break };
            done.insert(v.clone());
            for (_, e) in self.edges.iter().filter(|(_, e)| e.u == v || e.v == v) {
                if e.is_loop() {
                    continue;
                }
                let w = e.other(&v).clone();
                let nd = d.clone() + e.length.clone();
                let better = dist.get(&w).map(|cur| nd < *cur).unwrap_or(true);
                if better {
                    dist.insert(w, nd);
                }
            }
        }
        dist
    }

    /// Exact distance between two points of the model.
    pub fn distance(&self, p: &GraphPoint, q: &GraphPoint) -> Result<Rational, GraphError> {
        let p = self.canonical_point(p)?;
        let q = self.canonical_point(q)?;
        if p == q {
            return Ok(Rational::zero());
        }
        match (&p, &q) {
            (GraphPoint::Vertex(a), GraphPoint::Vertex(b)) => {
                let d = self.vertex_distances(a);
                d.get(b).cloned().ok_or_else(|| {
                    GraphError::Disconnected(self.name.clone())
                })
            }
            _ => {
                let (refined, map) = super::rebuild::refine(self, &[p.clone(), q.clone()])?;
                let rp = map.forward(self, &refined, &p)?;
                let rq = map.forward(self, &refined, &q)?;
                refined.distance(&rp, &rq)
            }
        }
    }

    /// The edges of the induced closed subgraph on `keep` plus those vertices.
    pub fn induced_subgraph(&self, name: &str, keep: &BTreeSet<VId>) -> MetricGraphModel {
        let mut m = MetricGraphModel::new(name);
        for v in keep {
            m.add_vertex(v);
        }
        for (id, e) in &self.edges {
            if keep.contains(&e.u) && keep.contains(&e.v) {
                m.edges.insert(id.clone(), e.clone());
            }
        }
        m
    }
}

/// A point of the metric graph: a vertex, or an interior point of an edge at
/// a positive offset measured from the first-declared endpoint `u`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GraphPoint {
    Vertex(VId),
    Interior { edge: EId, offset: Rational },
}

impl GraphPoint {
    pub fn vertex(id: &str) -> Self {
        GraphPoint::Vertex(id.to_string())
    }

    pub fn interior(edge: &str, offset: Rational) -> Self {
        GraphPoint::Interior {
            edge: edge.to_string(),
            offset,
        }
    }
}

impl fmt::Display for GraphPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphPoint::Vertex(v) => write!(f, "v:{v}"),
            GraphPoint::Interior { edge, offset } => {
                write!(f, "e:{edge}:{}", format_rational(offset))
            }
        }
    }
}

// Lexicographic order: vertices (by id) before interior points (by edge id,
// then offset). This is the tie-breaking order used across the crate.
impl Ord for GraphPoint {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use GraphPoint::*;
        match (self, other) {
            (Vertex(a), Vertex(b)) => a.cmp(b),
            (Vertex(_), Interior { .. }) => std::cmp::Ordering::Less,
            (Interior { .. }, Vertex(_)) => std::cmp::Ordering::Greater,
            (Interior { edge: e1, offset: o1 }, Interior { edge: e2, offset: o2 }) => {
                e1.cmp(e2).then_with(|| o1.cmp(o2))
            }
        }
    }
}

impl PartialOrd for GraphPoint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::rational::{rat, rat_int};

    pub fn triangle() -> MetricGraphModel {
        let mut m = MetricGraphModel::new("c3");
        m.add_edge("e1", "v1", "v2", rat_int(1));
        m.add_edge("e2", "v2", "v3", rat_int(1));
        m.add_edge("e3", "v3", "v1", rat_int(1));
        m
    }

    #[test]
    fn genus_of_triangle_is_one() {
        let m = triangle();
        m.validate().unwrap();
        assert_eq!(m.genus(), 1);
    }

    #[test]
    fn genus_of_tree_is_zero() {
        let mut m = MetricGraphModel::new("t4");
        m.add_edge("a", "r", "x", rat_int(1));
        m.add_edge("b", "r", "y", rat_int(2));
        m.add_edge("c", "y", "z", rat(1, 2));
        m.validate().unwrap();
        assert_eq!(m.genus(), 0);
    }

    #[test]
    fn disconnected_model_rejected() {
        let mut m = MetricGraphModel::new("bad");
        m.add_edge("a", "x", "y", rat_int(1));
        m.add_vertex("lonely");
        assert!(matches!(m.validate(), Err(GraphError::Disconnected(_))));
    }

    #[test]
    fn point_canonicalization() {
        let m = triangle();
        let p = GraphPoint::interior("e1", rat_int(0));
        assert_eq!(m.canonical_point(&p).unwrap(), GraphPoint::vertex("v1"));
        let p = GraphPoint::interior("e1", rat_int(1));
        assert_eq!(m.canonical_point(&p).unwrap(), GraphPoint::vertex("v2"));
        let p = GraphPoint::interior("e1", rat(1, 2));
        assert_eq!(m.canonical_point(&p).unwrap(), p);
        assert!(m.canonical_point(&GraphPoint::interior("e1", rat(3, 2))).is_err());
    }

    #[test]
    fn distances_are_exact() {
        let m = triangle();
        assert_eq!(
            m.distance(&GraphPoint::vertex("v1"), &GraphPoint::vertex("v3"))
                .unwrap(),
            rat_int(1)
        );
        // Interior point 1/3 along e1 from v1: distance to v3 through v1.
        let p = GraphPoint::interior("e1", rat(1, 3));
        assert_eq!(
            m.distance(&p, &GraphPoint::vertex("v3")).unwrap(),
            rat(4, 3)
        );
    }

    #[test]
    fn loop_valence_counts_twice() {
        let mut m = MetricGraphModel::new("loop");
        m.add_edge("l", "v", "v", rat_int(2));
        assert_eq!(m.valence("v"), 2);
        assert_eq!(m.genus(), 1);
    }
}
