//! Chip-firing certificates: ordered lists of set-firing moves.
//!
//! A move fires a closed subgraph `A` for a rational time `t`: every
//! boundary-crossing direction transports one chip from the boundary point a
//! distance `t` outward along that direction. Negative `t` is the inverse
//! transport (a chip at distance |t| outside the boundary moves back to the
//! boundary point). Replaying a script recomputes every transport from
//! (A, t) alone, so scripts are independently checkable certificates of
//! linear equivalence.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph_core::{refine, EId, GraphError, GraphPoint, MetricGraphModel, Rational};

use super::divisor::Divisor;

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("move fires past the far end of edge {0}")]
    TransportTooFar(EId),
    #[error("malformed segment on edge {0}")]
    BadSegment(EId),
}

/// A closed subgraph: a finite set of points together with closed edge
/// segments, in the coordinates of a fixed model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ClosedSubgraph {
    pub points: BTreeSet<GraphPoint>,
    /// (edge id, start offset, end offset) with start < end.
    pub segments: Vec<(EId, Rational, Rational)>,
}

impl ClosedSubgraph {
    pub fn from_points(points: impl IntoIterator<Item = GraphPoint>) -> Self {
        ClosedSubgraph {
            points: points.into_iter().collect(),
            segments: Vec::new(),
        }
    }

    /// All boundary-relevant cut points (isolated points and segment ends).
    pub fn cut_points(&self) -> Vec<GraphPoint> {
        let mut out: Vec<GraphPoint> = self.points.iter().cloned().collect();
        for (e, a, b) in &self.segments {
            out.push(GraphPoint::Interior {
                edge: e.clone(),
                offset: a.clone(),
            });
            out.push(GraphPoint::Interior {
                edge: e.clone(),
                offset: b.clone(),
            });
        }
        out
    }

    /// Whether the closed interval [a, b] of edge `e` lies inside the subgraph.
    fn covers(&self, e: &str, a: &Rational, b: &Rational) -> bool {
        self.segments
            .iter()
            .any(|(f, s, t)| f == e && s <= a && b <= t)
    }

    /// Sorts segments and coalesces abutting ones on the same edge.
    pub fn normalize(&mut self) {
        self.segments
            .sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        let mut merged: Vec<(EId, Rational, Rational)> = Vec::new();
        for (e, a, b) in self.segments.drain(..) {
            if let Some(last) = merged.last_mut() {
                if last.0 == e && last.2 >= a {
                    if b > last.2 {
                        last.2 = b;
                    }
                    continue;
                }
            }
            merged.push((e, a, b));
        }
        self.segments = merged;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChipMove {
    pub subgraph: ClosedSubgraph,
    pub time: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ChipScript {
    pub moves: Vec<ChipMove>,
}

impl ChipScript {
    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn push(&mut self, subgraph: ClosedSubgraph, time: Rational) {
        if !time.is_zero() {
            self.moves.push(ChipMove { subgraph, time });
        }
    }

    pub fn extend(&mut self, other: ChipScript) {
        self.moves.extend(other.moves);
    }

    /// The inverse script: moves reversed, times negated.
    pub fn inverted(&self) -> ChipScript {
        ChipScript {
            moves: self
                .moves
                .iter()
                .rev()
                .map(|m| ChipMove {
                    subgraph: m.subgraph.clone(),
                    time: -m.time.clone(),
                })
                .collect(),
        }
    }

    /// Replays the script on `start`, recomputing each transport from the
    /// fired subgraph and time. Effectivity is not enforced here; reduction
    /// guarantees it where the algorithm requires it.
    pub fn replay(
        &self,
        model: &MetricGraphModel,
        start: &Divisor,
    ) -> Result<Divisor, ScriptError> {
        let mut d = start.canonicalize(model)?;
        for mv in &self.moves {
            d = apply_move(model, &d, mv)?;
        }
        Ok(d)
    }
}

fn apply_move(
    model: &MetricGraphModel,
    d: &Divisor,
    mv: &ChipMove,
) -> Result<Divisor, ScriptError> {
    let mut cuts = mv.subgraph.cut_points();
    cuts.extend(d.support());
    let (rm, map) = refine(model, &cuts)?;
    // Membership of refined vertices and edges in the fired subgraph.
    let in_sub_vertex = |v: &str| -> Result<bool, ScriptError> {
        let img = map.backward(model, &GraphPoint::Vertex(v.to_string()))?;
        if mv.subgraph.points.contains(&img) {
            return Ok(true);
        }
        Ok(match img {
            GraphPoint::Vertex(ref ov) => mv.subgraph.segments.iter().any(|(e, a, b)| {
                let edge = &model.edges[e];
                (edge.u == *ov && a.is_zero())
                    || (edge.v == *ov && *b == edge.length)
            }),
            GraphPoint::Interior { ref edge, ref offset } => mv
                .subgraph
                .segments
                .iter()
                .any(|(e, a, b)| e == edge && a <= offset && offset <= b),
        })
    };
    let in_sub_edge = |eid: &str| -> bool {
        let charts = &map.edge_charts[eid];
        charts.iter().all(|c| {
            let (lo, hi) = if c.start <= c.end {
                (c.start.clone(), c.end.clone())
            } else {
                (c.end.clone(), c.start.clone())
            };
            mv.subgraph.covers(&c.base_edge, &lo, &hi)
        })
    };

    let t = mv.time.abs();
    let inverse = mv.time.is_negative();
    let mut out = d.canonicalize(model)?;
    for v in &rm.vertices {
        if !in_sub_vertex(v)? {
            continue;
        }
        for (eid, end) in rm.ends_at(v) {
            let e = &rm.edges[&eid];
            if e.is_loop() || in_sub_edge(&eid) {
                continue;
            }
            // Skip directions whose far side is also inside the subgraph
            // through this edge's far endpoint only if the edge itself is in;
            // an out-of-subgraph edge between two boundary points carries a
            // crossing direction at each end.
            if t > e.length {
                return Err(ScriptError::TransportTooFar(eid.clone()));
            }
            let boundary = map.backward(model, &GraphPoint::Vertex(v.clone()))?;
            let dest_offset = if end == 0 { t.clone() } else { e.length.clone() - t.clone() };
            let dest = map.backward(
                model,
                &rm.canonical_point(&GraphPoint::Interior {
                    edge: eid.clone(),
                    offset: dest_offset,
                })?,
            )?;
            if inverse {
                out.add(dest, -1);
                out.add(boundary, 1);
            } else {
                out.add(boundary, -1);
                out.add(dest, 1);
            }
        }
    }
    Ok(out)
}
