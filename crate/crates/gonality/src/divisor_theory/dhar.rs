//! Metric Dhar burning.
//!
//! Fire starts at the base point and spreads through the graph; a point with
//! chips stops the fire until more burnt directions arrive than it has chips.
//! The unburnt locus is a closed subgraph, and the divisor is base-point
//! reduced exactly when everything burns.

use std::collections::BTreeSet;

use num_traits::Signed;
use thiserror::Error;

use crate::graph_core::{refine, EId, GraphError, GraphPoint, MetricGraphModel, Rational};

use super::chipscript::ClosedSubgraph;
use super::divisor::Divisor;

#[derive(Debug, Error)]
pub enum DharError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("divisor has a negative coefficient away from the base point")]
    NotEffective,
}

/// One direction leaving the unburnt set, in input-model coordinates: a chip
/// at offset `start` of `edge` can travel up to `avail` toward larger
/// (`dir_positive`) or smaller offsets through burnt territory.
#[derive(Clone, Debug)]
pub struct Crossing {
    pub edge: EId,
    pub start: Rational,
    pub dir_positive: bool,
    pub avail: Rational,
}

#[derive(Clone, Debug)]
pub struct BurnReport {
    /// Unburnt closed subgraph, in input-model coordinates. Empty when
    /// everything burns.
    pub unburnt: ClosedSubgraph,
    /// Boundary points of the unburnt set with at least one burnt direction,
    /// with the number of burnt directions arriving there.
    pub frontier: Vec<(GraphPoint, usize)>,
    /// Directions out of the unburnt set, one entry per chip that a firing
    /// move would transport.
    pub crossings: Vec<Crossing>,
    pub everything_burnt: bool,
}

/// Runs the burning process for `divisor` from base point `q`.
///
/// The divisor must be effective away from `q`. Burning is computed on the
/// model refined at supp(divisor) and q: fire spreads from q, edge interiors
/// without chips burn through, and a vertex burns once its burnt directions
/// exceed its chip count.
pub fn dhar_burn(
    model: &MetricGraphModel,
    divisor: &Divisor,
    q: &GraphPoint,
) -> Result<BurnReport, DharError> {
    let d = divisor.canonicalize(model)?;
    let q = model.canonical_point(q)?;
    if !d.is_effective_away_from(&q) {
        return Err(DharError::NotEffective);
    }

    let mut cuts = d.support();
    cuts.push(q.clone());
    let (rm, map) = refine(model, &cuts)?;
    let chips_at = |v: &str| -> i64 {
        map.backward(model, &GraphPoint::Vertex(v.to_string()))
            .map(|p| d.coeff(&p))
            .unwrap_or(0)
    };
    let q_vertex = match map.forward(model, &rm, &q)? {
        GraphPoint::Vertex(v) => v,
        GraphPoint::Interior { .. } => unreachable!("base point was a cut point"),
    };

    let mut burnt: BTreeSet<String> = BTreeSet::from([q_vertex]);
    loop {
        let mut changed = false;
        for v in &rm.vertices {
            if burnt.contains(v) {
                continue;
            }
            let burnt_dirs = rm
                .ends_at(v)
                .into_iter()
                .filter(|(eid, end)| {
                    let e = &rm.edges[eid];
                    let other = if *end == 0 { &e.v } else { &e.u };
                    burnt.contains(other)
                })
                .count();
            if burnt_dirs as i64 > chips_at(v) {
                burnt.insert(v.clone());
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let everything_burnt = burnt.len() == rm.vertices.len();
    let mut unburnt = ClosedSubgraph::default();
    let mut frontier = Vec::new();
    let mut crossings = Vec::new();
    if !everything_burnt {
        for v in &rm.vertices {
            if burnt.contains(v) {
                continue;
            }
            unburnt
                .points
                .insert(map.backward(model, &GraphPoint::Vertex(v.clone()))?);
            let mut arriving = 0usize;
            for (eid, end) in rm.ends_at(v) {
                let e = &rm.edges[&eid];
                let other = if end == 0 { &e.v } else { &e.u };
                if !burnt.contains(other) {
                    continue;
                }
                arriving += 1;
                let chart = &map.edge_charts[&eid][0];
                let (start, far) = if end == 0 {
                    (chart.start.clone(), chart.end.clone())
                } else {
                    (chart.end.clone(), chart.start.clone())
                };
                crossings.push(Crossing {
                    edge: chart.base_edge.clone(),
                    dir_positive: far > start,
                    avail: (far - start.clone()).abs(),
                    start,
                });
            }
            if arriving > 0 {
                frontier.push((map.backward(model, &GraphPoint::Vertex(v.clone()))?, arriving));
            }
        }
        for (eid, e) in &rm.edges {
            if !burnt.contains(&e.u) && !burnt.contains(&e.v) {
                let chart = &map.edge_charts[eid][0];
                let (lo, hi) = if chart.start <= chart.end {
                    (chart.start.clone(), chart.end.clone())
                } else {
                    (chart.end.clone(), chart.start.clone())
                };
                unburnt.segments.push((chart.base_edge.clone(), lo, hi));
            }
        }
        unburnt.normalize();
    }
    Ok(BurnReport {
        unburnt,
        frontier,
        crossings,
        everything_burnt,
    })
}
