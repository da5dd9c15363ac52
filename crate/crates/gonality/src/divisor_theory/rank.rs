//! Rank lower bounds for divisors of degree at most four.
//!
//! The vertex set of any model is rank-determining: a divisor has positive
//! rank exactly when its base-point reduction at every point of such a set
//! keeps a chip at the base point. We use the vertices of the canonical
//! loopless model (translated back to input coordinates) together with the
//! support of the divisor, and recurse on D - x for rank two.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph_core::{canonical_loopless_model, GraphError, GraphPoint, MetricGraphModel};

use super::divisor::Divisor;
use super::reduce::{reduce, ReduceError};

#[derive(Debug, Error)]
pub enum RankError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error("rank queries support r in 0..=2 and degree at most 4, got r={r}, degree={degree}")]
    OutOfScope { r: u32, degree: i64 },
}

/// A finite rank-determining set for divisors supported as given: the
/// canonical loopless model's vertices in input coordinates, plus the support.
pub fn rank_determining_points(
    model: &MetricGraphModel,
    divisor: &Divisor,
) -> Result<Vec<GraphPoint>, GraphError> {
    let mut pts: BTreeSet<GraphPoint> = BTreeSet::new();
    let (_, map) = canonical_loopless_model(model)?;
    for p in map.vertex_images.values() {
        pts.insert(model.canonical_point(p)?);
    }
    for p in divisor.support() {
        pts.insert(model.canonical_point(&p)?);
    }
    Ok(pts.into_iter().collect())
}

/// Whether the divisor class has rank at least `r`.
pub fn rank_at_least(
    model: &MetricGraphModel,
    divisor: &Divisor,
    r: u32,
) -> Result<bool, RankError> {
    model.validate()?;
    let d = divisor.canonicalize(model)?;
    let degree = d.degree();
    if r > 2 || degree > 4 {
        return Err(RankError::OutOfScope { r, degree });
    }
    if degree < r as i64 {
        return Ok(false);
    }
    if model.genus() == 0 {
        // On a tree every degree-zero divisor is principal, so the rank of
        // any class is its degree.
        return Ok(degree >= r as i64);
    }
    match r {
        0 => {
            let q = GraphPoint::Vertex(
                model
                    .vertices
                    .iter()
                    .next()
                    .ok_or_else(|| GraphError::Empty(model.name.clone()))?
                    .clone(),
            );
            let (red, _) = reduce(model, &d, &q)?;
            Ok(red.coeff(&q) >= 0)
        }
        1 => {
            for x in rank_determining_points(model, &d)? {
                let (red, _) = reduce(model, &d, &x)?;
                if red.coeff(&x) < 1 {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => {
            for x in rank_determining_points(model, &d)? {
                let dx = d.minus(&Divisor::single(x, 1));
                if !rank_at_least(model, &dx, 1)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}
