//! Maximal admissible representatives: the unique divisor equivalent to D
//! with maximal coefficient at a base point and no two support points
//! interior to one edge.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::divisor_theory::{reduce, Divisor};
use crate::graph_core::{EId, GraphPoint, MetricGraphModel, Rational};

use super::certificate::SynthesisError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaximalAdmissible {
    pub base: GraphPoint,
    pub divisor: Divisor,
}

/// Computes the maximal admissible representative of D at `x`. The reduced
/// divisor at x already maximizes the coefficient there; what remains is to
/// repair a same-edge interior pair by the symmetric outward slide (firing
/// the enclosed segment until an endpoint hits a vertex).
pub fn maximal_admissible(
    model: &MetricGraphModel,
    d: &Divisor,
    x: &GraphPoint,
) -> Result<MaximalAdmissible, SynthesisError> {
    let x = model.canonical_point(x)?;
    let (r, _) = reduce(model, d, &x)?;
    if !r.is_effective() {
        return Err(SynthesisError::Precondition(
            "divisor class has no effective representative".into(),
        ));
    }
    let c = r.coeff(&x);
    if c < 1 {
        return Err(SynthesisError::Precondition(format!(
            "reduced divisor has no chip at the base {x}; rank precondition fails"
        )));
    }

    // Interior chips away from the base, grouped by edge.
    let mut by_edge: BTreeMap<EId, Vec<(Rational, i64)>> = BTreeMap::new();
    for (p, n) in &r.chips {
        if *p == x {
            continue;
        }
        if let GraphPoint::Interior { edge, offset } = p {
            by_edge
                .entry(edge.clone())
                .or_default()
                .push((offset.clone(), *n));
        }
    }
    let mut out = r.clone();
    for (eid, mut chips) in by_edge {
        let total: i64 = chips.iter().map(|(_, n)| n).sum();
        if total < 2 {
            continue;
        }
        chips.sort();
        // Degree 3 leaves at most two chips here: a pair s <= t.
        let (s, t) = if chips.len() == 1 {
            (chips[0].0.clone(), chips[0].0.clone())
        } else {
            (chips[0].0.clone(), chips[1].0.clone())
        };
        let len = model.edges[&eid].length.clone();
        let tau_l = s.clone();
        let tau_r = len.clone() - t.clone();
        let tau = if tau_l < tau_r { tau_l } else { tau_r };
        if tau.is_zero() {
            return Err(SynthesisError::InternalContradiction(format!(
                "same-edge pair on {eid} already touches a vertex yet was reported interior"
            )));
        }
        let a = model.canonical_point(&GraphPoint::interior(&eid, s.clone() - tau.clone()))?;
        let b = model.canonical_point(&GraphPoint::interior(&eid, t.clone() + tau.clone()))?;
        out.add(GraphPoint::interior(&eid, s), -1);
        out.add(GraphPoint::interior(&eid, t), -1);
        out.add(a, 1);
        out.add(b, 1);
    }
    let out = out.canonicalize(model)?;
    if out.coeff(&x) > c {
        return Err(SynthesisError::InternalContradiction(format!(
            "repair increased the base coefficient at {x}: reduction was not maximal"
        )));
    }
    Ok(MaximalAdmissible { base: x, divisor: out })
}
