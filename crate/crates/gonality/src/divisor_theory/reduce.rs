//! q-reduced divisors by iterated burning and firing, with certificates.
//!
//! Reduction runs in two stages. If the divisor has negative coefficients
//! away from the base point, a discrete pass on a common-denominator lattice
//! first transports chips outward from the base point, farthest level first,
//! until the divisor is effective away from q. The main loop then alternates
//! burning with firing the unburnt set until the next chip event, and stops
//! when everything burns. Every firing is recorded as a `ChipMove`, so the
//! returned script replays the whole reduction.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::graph_core::rational::common_denominator;
use crate::graph_core::{refine, GraphError, GraphPoint, MetricGraphModel, Rational};

use super::chipscript::{ChipScript, ClosedSubgraph, ScriptError};
use super::dhar::{dhar_burn, DharError};
use super::divisor::Divisor;

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Dhar(#[from] DharError),
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error("reduction did not terminate within the step limit")]
    IterationLimit,
}

const MAX_STEPS: usize = 100_000;

/// Computes the q-reduced representative of the divisor class together with a
/// replayable script of the moves taken.
pub fn reduce(
    model: &MetricGraphModel,
    divisor: &Divisor,
    q: &GraphPoint,
) -> Result<(Divisor, ChipScript), ReduceError> {
    model.validate()?;
    let q = model.canonical_point(q)?;
    let mut d = divisor.canonicalize(model)?;
    let mut script = ChipScript::default();
    if !d.is_effective_away_from(&q) {
        let (nd, s) = make_effective(model, &d, &q)?;
        d = nd;
        script.extend(s);
    }
    for _ in 0..MAX_STEPS {
        let report = dhar_burn(model, &d, &q)?;
        if report.everything_burnt {
            return Ok((d, script));
        }
        let tau = report
            .crossings
            .iter()
            .map(|c| c.avail.clone())
            .min()
            .expect("unburnt set has a boundary");
        for c in &report.crossings {
            let from = model.canonical_point(&GraphPoint::Interior {
                edge: c.edge.clone(),
                offset: c.start.clone(),
            })?;
            let dest_off = if c.dir_positive {
                c.start.clone() + tau.clone()
            } else {
                c.start.clone() - tau.clone()
            };
            let dest = model.canonical_point(&GraphPoint::Interior {
                edge: c.edge.clone(),
                offset: dest_off,
            })?;
            d.add(from, -1);
            d.add(dest, 1);
        }
        script.push(report.unburnt, tau);
    }
    Err(ReduceError::IterationLimit)
}

/// Whether the two divisors are linearly equivalent; on success also returns
/// a script carrying the first divisor to the second.
pub fn equivalent(
    model: &MetricGraphModel,
    d1: &Divisor,
    d2: &Divisor,
) -> Result<(bool, Option<ChipScript>), ReduceError> {
    if d1.degree() != d2.degree() {
        return Ok((false, None));
    }
    let q = GraphPoint::Vertex(
        model
            .vertices
            .iter()
            .next()
            .ok_or_else(|| GraphError::Empty(model.name.clone()))?
            .clone(),
    );
    let (r1, s1) = reduce(model, d1, &q)?;
    let (r2, s2) = reduce(model, d2, &q)?;
    if r1 == r2 {
        let mut s = s1;
        s.extend(s2.inverted());
        Ok((true, Some(s)))
    } else {
        Ok((false, None))
    }
}

/// Discrete stage: subdivides every edge at a common-denominator lattice and
/// clears negative coefficients level by level, farthest from q first. Each
/// set firing moves one chip per crossing lattice edge a distance of one
/// lattice step, which is exactly a metric firing of the induced closed
/// subgraph for that time.
fn make_effective(
    model: &MetricGraphModel,
    d: &Divisor,
    q: &GraphPoint,
) -> Result<(Divisor, ChipScript), ReduceError> {
    let mut rats: Vec<Rational> = model.edges.values().map(|e| e.length.clone()).collect();
    for p in d.support() {
        if let GraphPoint::Interior { offset, .. } = p {
            rats.push(offset);
        }
    }
    if let GraphPoint::Interior { offset, .. } = q {
        rats.push(offset.clone());
    }
    let n = common_denominator(rats.iter());
    let step = Rational::new(BigInt::one(), n);

    let mut pts = Vec::new();
    for (eid, e) in &model.edges {
        let count = (e.length.clone() / step.clone())
            .to_integer()
            .to_usize()
            .expect("lattice size fits in usize");
        for k in 1..count {
            pts.push(GraphPoint::Interior {
                edge: eid.clone(),
                offset: step.clone() * Rational::from_integer(BigInt::from(k)),
            });
        }
    }
    let (lm, map) = refine(model, &pts)?;

    let mut chips: BTreeMap<String, i64> = BTreeMap::new();
    for (p, c) in &d.chips {
        match map.forward(model, &lm, p)? {
            GraphPoint::Vertex(v) => *chips.entry(v).or_insert(0) += c,
            GraphPoint::Interior { .. } => unreachable!("divisor support lies on the lattice"),
        }
    }
    let ql = match map.forward(model, &lm, q)? {
        GraphPoint::Vertex(v) => v,
        GraphPoint::Interior { .. } => unreachable!("base point lies on the lattice"),
    };

    // Hop levels from q; every lattice edge has length `step`, so hops are
    // distances in units of the lattice spacing.
    let mut level: BTreeMap<String, usize> = BTreeMap::from([(ql.clone(), 0)]);
    let mut frontier = vec![ql];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for v in frontier {
            let l = level[&v];
            for (eid, end) in lm.ends_at(&v) {
                let e = &lm.edges[&eid];
                let other = if end == 0 { e.v.clone() } else { e.u.clone() };
                if !level.contains_key(&other) {
                    level.insert(other.clone(), l + 1);
                    next.push(other);
                }
            }
        }
        frontier = next;
    }

    let max_level = level.values().copied().max().unwrap_or(0);
    let mut script = ChipScript::default();
    for k in (1..=max_level).rev() {
        let deficit = lm
            .vertices
            .iter()
            .filter(|v| level[*v] == k)
            .map(|v| -chips.get(v).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
        if deficit <= 0 {
            continue;
        }
        let inside: BTreeSet<&String> = lm.vertices.iter().filter(|v| level[*v] < k).collect();
        let crossing: Vec<(String, String)> = lm
            .edges
            .values()
            .filter_map(|e| match (inside.contains(&e.u), inside.contains(&e.v)) {
                (true, false) => Some((e.u.clone(), e.v.clone())),
                (false, true) => Some((e.v.clone(), e.u.clone())),
                _ => None,
            })
            .collect();

        let mut sub = ClosedSubgraph::default();
        for v in &inside {
            sub.points
                .insert(map.backward(model, &GraphPoint::Vertex((**v).clone()))?);
        }
        for (eid, e) in &lm.edges {
            if inside.contains(&e.u) && inside.contains(&e.v) {
                let chart = &map.edge_charts[eid][0];
                let (lo, hi) = if chart.start <= chart.end {
                    (chart.start.clone(), chart.end.clone())
                } else {
                    (chart.end.clone(), chart.start.clone())
                };
                sub.segments.push((chart.base_edge.clone(), lo, hi));
            }
        }
        sub.normalize();

        for _ in 0..deficit {
            for (u, v) in &crossing {
                *chips.entry(u.clone()).or_insert(0) -= 1;
                *chips.entry(v.clone()).or_insert(0) += 1;
            }
            script.push(sub.clone(), step.clone());
        }
    }

    let mut out = Divisor::zero();
    for (v, c) in chips {
        if c != 0 {
            out.add(map.backward(model, &GraphPoint::Vertex(v))?, c);
        }
    }
    Ok((out, script))
}
