//! Point translation maps between models of the same metric graph.
//!
//! A `ModelMap` records, for every edge of a derived model, the ordered
//! segments of the base model its traversal covers, plus the base-model point
//! under every derived vertex. That data is enough to translate points both
//! ways exactly, and to compose maps arithmetically. Refinement and
//! suppression both produce maps of this shape; the spec's round-trip
//! invariant (refine then suppress is the identity on the metric space) is
//! checked through them.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::model::{EId, GraphError, GraphPoint, MetricGraphModel, VId};
use super::rational::Rational;

/// One traversed segment of a base-model edge, from offset `start` to `end`
/// (start > end means the traversal runs against the edge's own orientation).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chart {
    pub base_edge: EId,
    pub start: Rational,
    pub end: Rational,
}

impl Chart {
    pub fn len(&self) -> Rational {
        if self.start <= self.end {
            self.end.clone() - self.start.clone()
        } else {
            self.start.clone() - self.end.clone()
        }
    }

    pub fn reversed(&self) -> Chart {
        Chart {
            base_edge: self.base_edge.clone(),
            start: self.end.clone(),
            end: self.start.clone(),
        }
    }

    /// Base-edge offset at distance `t` into the traversal (0 <= t <= len).
    pub fn at(&self, t: &Rational) -> Rational {
        if self.start <= self.end {
            self.start.clone() + t.clone()
        } else {
            self.start.clone() - t.clone()
        }
    }
}

/// Bijective isometry between a derived model and its base model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ModelMap {
    /// Derived edge id -> ordered base segments covered by its traversal
    /// from the edge's `u` endpoint to its `v` endpoint.
    pub edge_charts: BTreeMap<EId, Vec<Chart>>,
    /// Derived vertex id -> base-model point.
    pub vertex_images: BTreeMap<VId, GraphPoint>,
}

impl ModelMap {
    pub fn identity(model: &MetricGraphModel) -> ModelMap {
        let mut m = ModelMap::default();
        for v in &model.vertices {
            m.vertex_images
                .insert(v.clone(), GraphPoint::Vertex(v.clone()));
        }
        for (id, e) in &model.edges {
            m.edge_charts.insert(
                id.clone(),
                vec![Chart {
                    base_edge: id.clone(),
                    start: Rational::zero(),
                    end: e.length.clone(),
                }],
            );
        }
        m
    }

    /// Derived-model point -> base-model point.
    pub fn backward(
        &self,
        base: &MetricGraphModel,
        p: &GraphPoint,
    ) -> Result<GraphPoint, GraphError> {
        match p {
            GraphPoint::Vertex(v) => self
                .vertex_images
                .get(v)
                .cloned()
                .ok_or_else(|| GraphError::UnknownVertex(v.clone())),
            GraphPoint::Interior { edge, offset } => {
                let charts = self
                    .edge_charts
                    .get(edge)
                    .ok_or_else(|| GraphError::UnknownEdge(edge.clone()))?;
                let mut acc = Rational::zero();
                for c in charts {
                    let next = acc.clone() + c.len();
                    if *offset <= next {
                        let local = offset.clone() - acc;
                        let raw = GraphPoint::Interior {
                            edge: c.base_edge.clone(),
                            offset: c.at(&local),
                        };
                        return base.canonical_point(&raw);
                    }
                    acc = next;
                }
                Err(GraphError::OffsetOutOfRange(edge.clone()))
            }
        }
    }

    /// Base-model point -> derived-model point.
    pub fn forward(
        &self,
        base: &MetricGraphModel,
        derived: &MetricGraphModel,
        p: &GraphPoint,
    ) -> Result<GraphPoint, GraphError> {
        let p = base.canonical_point(p)?;
        // A base point sitting under a derived vertex maps to that vertex.
        for (v, img) in &self.vertex_images {
            if *img == p {
                return Ok(GraphPoint::Vertex(v.clone()));
            }
        }
        match &p {
            GraphPoint::Vertex(bv) => {
                // The base vertex is interior to some derived edge: it shows
                // up as the junction between two consecutive charts.
                for (eid, charts) in &self.edge_charts {
                    let mut acc = Rational::zero();
                    for (i, c) in charts.iter().enumerate() {
                        acc += c.len();
                        if i + 1 == charts.len() {
                            break;
                        }
                        let be = base.edge(&c.base_edge)?;
                        let junction = if c.end.is_zero() {
                            be.u.clone()
                        } else if c.end == be.length {
                            be.v.clone()
                        } else {
                            continue;
                        };
                        if junction == *bv {
                            return derived.canonical_point(&GraphPoint::Interior {
                                edge: eid.clone(),
                                offset: acc.clone(),
                            });
                        }
                    }
                }
                Err(GraphError::UnknownVertex(bv.clone()))
            }
            GraphPoint::Interior { edge, offset } => {
                for (eid, charts) in &self.edge_charts {
                    let mut acc = Rational::zero();
                    for c in charts {
                        if c.base_edge == *edge {
                            let (lo, hi) = if c.start <= c.end {
                                (c.start.clone(), c.end.clone())
                            } else {
                                (c.end.clone(), c.start.clone())
                            };
                            if lo < *offset && *offset < hi {
                                let local = if c.start <= c.end {
                                    offset.clone() - c.start.clone()
                                } else {
                                    c.start.clone() - offset.clone()
                                };
                                return derived.canonical_point(&GraphPoint::Interior {
                                    edge: eid.clone(),
                                    offset: acc + local,
                                });
                            }
                        }
                        acc += c.len();
                    }
                }
                Err(GraphError::OffsetOutOfRange(edge.clone()))
            }
        }
    }

    /// Composition: `self` maps model B over base A, `outer` maps model C
    /// over base B; the result maps C over base A.
    pub fn compose(
        &self,
        base_a: &MetricGraphModel,
        outer: &ModelMap,
    ) -> Result<ModelMap, GraphError> {
        let mut out = ModelMap::default();
        for (v, img) in &outer.vertex_images {
            out.vertex_images
                .insert(v.clone(), self.backward(base_a, img)?);
        }
        for (eid, charts) in &outer.edge_charts {
            let mut acc: Vec<Chart> = Vec::new();
            for c in charts {
                let inner = self
                    .edge_charts
                    .get(&c.base_edge)
                    .ok_or_else(|| GraphError::UnknownEdge(c.base_edge.clone()))?;
                acc.extend(slice_charts(inner, &c.start, &c.end));
            }
            out.edge_charts.insert(eid.clone(), merge_adjacent(acc));
        }
        Ok(out)
    }
}

/// Extracts the sub-traversal of a chart list between parameters `from` and
/// `to` (measured along the accumulated traversal; from > to reverses).
pub fn slice_charts(charts: &[Chart], from: &Rational, to: &Rational) -> Vec<Chart> {
    if from > to {
        let mut out = slice_charts(charts, to, from);
        out.reverse();
        return out.into_iter().map(|c| c.reversed()).collect();
    }
    let mut out = Vec::new();
    let mut acc = Rational::zero();
    for c in charts {
        let next = acc.clone() + c.len();
        let lo = if *from > acc { from.clone() } else { acc.clone() };
        let hi = if *to < next { to.clone() } else { next.clone() };
        if lo < hi {
            let a = lo - acc.clone();
            let b = hi - acc.clone();
            out.push(Chart {
                base_edge: c.base_edge.clone(),
                start: c.at(&a),
                end: c.at(&b),
            });
        }
        acc = next;
    }
    out
}

fn merge_adjacent(charts: Vec<Chart>) -> Vec<Chart> {
    let mut out: Vec<Chart> = Vec::new();
    for c in charts {
        if let Some(last) = out.last_mut() {
            if last.base_edge == c.base_edge && last.end == c.start {
                let same_dir = (last.start <= last.end) == (c.start <= c.end);
                if same_dir && last.start != last.end {
                    last.end = c.end;
                    continue;
                }
            }
        }
        out.push(c);
    }
    out
}

pub fn reverse_charts(charts: &[Chart]) -> Vec<Chart> {
    charts.iter().rev().map(|c| c.reversed()).collect()
}

/// What happened to each edge under bridge contraction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeFate {
    Kept,
    Collapsed(VId),
}

/// Non-injective projection produced by contracting bridges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ContractionMap {
    /// Old vertex -> new vertex (class representative).
    pub vertex_map: BTreeMap<VId, VId>,
    pub edge_fates: BTreeMap<EId, EdgeFate>,
}

impl ContractionMap {
    pub fn forward(&self, p: &GraphPoint) -> Result<GraphPoint, GraphError> {
        match p {
            GraphPoint::Vertex(v) => self
                .vertex_map
                .get(v)
                .cloned()
                .map(GraphPoint::Vertex)
                .ok_or_else(|| GraphError::UnknownVertex(v.clone())),
            GraphPoint::Interior { edge, offset } => match self.edge_fates.get(edge) {
                Some(EdgeFate::Kept) => Ok(GraphPoint::Interior {
                    edge: edge.clone(),
                    offset: offset.clone(),
                }),
                Some(EdgeFate::Collapsed(v)) => Ok(GraphPoint::Vertex(v.clone())),
                None => Err(GraphError::UnknownEdge(edge.clone())),
            },
        }
    }

    /// Lexicographically smallest old vertex in the class of `new_vertex`.
    pub fn section(&self, new_vertex: &str) -> Option<VId> {
        self.vertex_map
            .iter()
            .filter(|(_, n)| n.as_str() == new_vertex)
            .map(|(o, _)| o.clone())
            .next()
    }
}
