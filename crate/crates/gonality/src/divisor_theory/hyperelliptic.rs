//! Hyperellipticity testing by involution search.
//!
//! After contracting bridges, we enumerate isometric involutions of the
//! canonical loopless model (vertex pairing plus a compatible edge pairing)
//! and keep one whose topological quotient is a tree. The fiber over any
//! point is then a degree-2 divisor of rank 1, which we translate back to
//! the input model and cross-check with the rank machinery.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph_core::{
    canonical_loopless_model, contract_bridges, EId, GraphError, GraphPoint, MetricGraphModel,
    Rational, VId,
};

use super::divisor::Divisor;
use super::rank::{rank_at_least, RankError};

#[derive(Debug, Error)]
pub enum HyperellipticError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error("hyperellipticity is defined for genus at least 2, got {0}")]
    GenusTooSmall(i64),
}

/// An isometric involution of a model, recorded on the canonical loopless
/// model of the bridge-contracted input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Involution {
    pub model: MetricGraphModel,
    pub vertex_pairing: BTreeMap<VId, VId>,
    pub edge_pairing: BTreeMap<EId, EId>,
}

impl Involution {
    /// An edge fixed by the pairing is either pointwise fixed (endpoints
    /// fixed) or reversed onto itself (endpoints swapped); the latter folds
    /// at its midpoint in the quotient.
    pub fn is_folded(&self, eid: &str) -> bool {
        let e = &self.model.edges[eid];
        self.edge_pairing[eid] == *eid && self.vertex_pairing[&e.u] == e.v
    }

    /// Genus of the topological quotient. Folded edges contribute a leaf
    /// vertex and edge (net zero); everything else contributes one quotient
    /// edge per orbit over the vertex-orbit graph.
    pub fn quotient_genus(&self) -> i64 {
        let vertex_orbits: BTreeSet<VId> = self
            .model
            .vertices
            .iter()
            .map(|v| std::cmp::min(v.clone(), self.vertex_pairing[v].clone()))
            .collect();
        let mut edges = 0i64;
        for eid in self.model.edges.keys() {
            let img = &self.edge_pairing[eid];
            if img == eid {
                if !self.is_folded(eid) {
                    edges += 1;
                }
            } else if eid < img {
                edges += 1;
            }
        }
        edges - vertex_orbits.len() as i64 + 1
    }

    /// Fiber of the quotient point under the lexicographically first vertex:
    /// the vertex and its partner, or twice the vertex when fixed.
    pub fn base_fiber(&self) -> Divisor {
        let v = self.model.vertices.iter().next().expect("nonempty model");
        let w = &self.vertex_pairing[v];
        if v == w {
            Divisor::single(GraphPoint::Vertex(v.clone()), 2)
        } else {
            Divisor::of(&[
                (GraphPoint::Vertex(v.clone()), 1),
                (GraphPoint::Vertex(w.clone()), 1),
            ])
        }
    }
}

/// Sorted multiset of incident edge lengths, the cheap invariant used to
/// prune the vertex-pairing search.
fn length_profile(m: &MetricGraphModel, v: &str) -> Vec<Rational> {
    let mut out: Vec<Rational> = m
        .ends_at(v)
        .into_iter()
        .map(|(eid, _)| m.edges[&eid].length.clone())
        .collect();
    out.sort();
    out
}

/// All involutions (including the identity) of a set, as pairing maps.
fn set_involutions(items: &[EId]) -> Vec<BTreeMap<EId, EId>> {
    if items.is_empty() {
        return vec![BTreeMap::new()];
    }
    let first = &items[0];
    let rest = &items[1..];
    let mut out = Vec::new();
    for mut sub in set_involutions(rest) {
        sub.insert(first.clone(), first.clone());
        out.push(sub);
    }
    for (i, partner) in rest.iter().enumerate() {
        let mut remaining: Vec<EId> = rest.to_vec();
        remaining.remove(i);
        for mut sub in set_involutions(&remaining) {
            sub.insert(first.clone(), partner.clone());
            sub.insert(partner.clone(), first.clone());
            out.push(sub);
        }
    }
    out
}

/// Edge bundles keyed by unordered endpoint pair.
fn bundles(m: &MetricGraphModel) -> BTreeMap<(VId, VId), Vec<EId>> {
    let mut out: BTreeMap<(VId, VId), Vec<EId>> = BTreeMap::new();
    for (eid, e) in &m.edges {
        let key = if e.u <= e.v {
            (e.u.clone(), e.v.clone())
        } else {
            (e.v.clone(), e.u.clone())
        };
        out.entry(key).or_default().push(eid.clone());
    }
    out
}

/// Extends a vertex pairing to every compatible edge pairing. Cross bundles
/// are matched lexicographically within length classes (any choice yields an
/// isometric quotient); self-paired bundles are enumerated in full because
/// fixing versus swapping edges changes the quotient topology.
fn edge_pairings(
    m: &MetricGraphModel,
    sigma: &BTreeMap<VId, VId>,
) -> Vec<BTreeMap<EId, EId>> {
    let bund = bundles(m);
    let mut base: BTreeMap<EId, EId> = BTreeMap::new();
    let mut self_bundles: Vec<Vec<EId>> = Vec::new();
    for (key, edges) in &bund {
        let img_key = {
            let (a, b) = (sigma[&key.0].clone(), sigma[&key.1].clone());
            if a <= b { (a, b) } else { (b, a) }
        };
        if img_key == *key {
            // Split by length; each class is paired within itself.
            let mut by_len: BTreeMap<Rational, Vec<EId>> = BTreeMap::new();
            for eid in edges {
                by_len
                    .entry(m.edges[eid].length.clone())
                    .or_default()
                    .push(eid.clone());
            }
            self_bundles.extend(by_len.into_values());
            continue;
        }
        if img_key < *key {
            continue; // handled from the smaller side
        }
        let targets = match bund.get(&img_key) {
            Some(t) => t,
            None => return Vec::new(),
        };
        let sort_key = |eid: &EId| (m.edges[eid].length.clone(), eid.clone());
        let mut a: Vec<EId> = edges.clone();
        let mut b: Vec<EId> = targets.clone();
        if a.len() != b.len() {
            return Vec::new();
        }
        a.sort_by_key(sort_key);
        b.sort_by_key(sort_key);
        for (x, y) in a.iter().zip(b.iter()) {
            if m.edges[x].length != m.edges[y].length {
                return Vec::new();
            }
            base.insert(x.clone(), y.clone());
            base.insert(y.clone(), x.clone());
        }
    }
    // Cartesian product over self-bundle involutions.
    let mut out = vec![base];
    for class in self_bundles {
        let choices = set_involutions(&class);
        let mut next = Vec::new();
        for cur in &out {
            for choice in &choices {
                let mut merged = cur.clone();
                merged.extend(choice.clone());
                next.push(merged);
            }
        }
        out = next;
    }
    out
}

/// Backtracking enumeration of length-preserving vertex involutions, each
/// completed by every compatible edge pairing. Candidates are produced in
/// lexicographic order of the pairing decisions.
fn involutions(m: &MetricGraphModel) -> Vec<Involution> {
    let verts: Vec<VId> = m.vertices.iter().cloned().collect();
    let profiles: BTreeMap<&VId, Vec<Rational>> =
        verts.iter().map(|v| (v, length_profile(m, v))).collect();
    let mut out = Vec::new();
    let mut sigma: BTreeMap<VId, VId> = BTreeMap::new();

    fn go(
        m: &MetricGraphModel,
        verts: &[VId],
        profiles: &BTreeMap<&VId, Vec<Rational>>,
        sigma: &mut BTreeMap<VId, VId>,
        out: &mut Vec<Involution>,
    ) {
        let next = verts.iter().find(|v| !sigma.contains_key(*v));
        let Some(v) = next else {
            for ep in edge_pairings(m, sigma) {
                out.push(Involution {
                    model: m.clone(),
                    vertex_pairing: sigma.clone(),
                    edge_pairing: ep,
                });
            }
            return;
        };
        let v = v.clone();
        let mut cands: Vec<VId> = vec![v.clone()];
        cands.extend(
            verts
                .iter()
                .filter(|w| **w > v && !sigma.contains_key(*w))
                .cloned(),
        );
        for w in cands {
            if profiles[&v] != profiles[&w] {
                continue;
            }
            sigma.insert(v.clone(), w.clone());
            sigma.insert(w.clone(), v.clone());
            go(m, verts, profiles, sigma, out);
            sigma.remove(&v);
            if w != v {
                sigma.remove(&w);
            }
        }
    }

    go(m, &verts, &profiles, &mut sigma, &mut out);
    out
}

/// Searches for a hyperellipticity witness: a degree-2 rank-1 divisor, with
/// the tree-quotient involution that produced it. Returns None when no
/// length-preserving involution of the canonical loopless model (bridges
/// contracted) has a tree quotient.
pub fn hyperelliptic_witness(
    model: &MetricGraphModel,
) -> Result<Option<(Divisor, Involution)>, HyperellipticError> {
    model.validate()?;
    if model.genus() < 2 {
        return Err(HyperellipticError::GenusTooSmall(model.genus()));
    }
    let (contracted, _) = contract_bridges(model);
    let (cm, cm_map) = canonical_loopless_model(&contracted)?;
    for inv in involutions(&cm) {
        if inv.quotient_genus() != 0 {
            continue;
        }
        // Translate the fiber to input coordinates. Canonical-model points
        // live on the contracted model, whose vertices and kept edges are
        // also points of the input model.
        let mut h = Divisor::zero();
        for (p, n) in &inv.base_fiber().chips {
            h.add(cm_map.backward(&contracted, p)?, *n);
        }
        let h = h.canonicalize(model)?;
        if rank_at_least(model, &h, 1)? {
            return Ok(Some((h, inv)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::rational::rat_int;

    fn theta() -> MetricGraphModel {
        let mut m = MetricGraphModel::new("theta");
        m.add_edge("e1", "u", "w", rat_int(1));
        m.add_edge("e2", "u", "w", rat_int(1));
        m.add_edge("e3", "u", "w", rat_int(1));
        m
    }

    #[test]
    fn theta_is_hyperelliptic_with_witness_u_plus_w() {
        let (h, inv) = hyperelliptic_witness(&theta()).unwrap().unwrap();
        assert_eq!(
            h,
            Divisor::of(&[(GraphPoint::vertex("u"), 1), (GraphPoint::vertex("w"), 1)])
        );
        // The tree quotient comes from the endpoint swap folding every edge.
        assert_eq!(inv.vertex_pairing[&"u".to_string()], "w");
        assert_eq!(inv.quotient_genus(), 0);
        assert!(inv.is_folded("e1") && inv.is_folded("e2") && inv.is_folded("e3"));
    }

    #[test]
    fn k4_is_not_hyperelliptic() {
        let mut m = MetricGraphModel::new("k4");
        let pairs = [("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")];
        for (i, (x, y)) in pairs.iter().enumerate() {
            m.add_edge(&format!("e{i}"), x, y, rat_int(1));
        }
        assert!(hyperelliptic_witness(&m).unwrap().is_none());
    }

    #[test]
    fn two_edge_connected_necklace_is_not_hyperelliptic() {
        // Triangle with a theta hanging at each corner.
        let mut m = MetricGraphModel::new("neck");
        m.add_edge("c1", "p1", "p2", rat_int(1));
        m.add_edge("c2", "p2", "p3", rat_int(1));
        m.add_edge("c3", "p3", "p1", rat_int(1));
        for i in 1..=3 {
            for j in 1..=3 {
                m.add_edge(&format!("t{i}{j}"), &format!("p{i}"), &format!("q{i}"), rat_int(1));
            }
        }
        assert!(hyperelliptic_witness(&m).unwrap().is_none());
    }

    #[test]
    fn dumbbell_contracts_to_a_hyperelliptic_pair_of_loops() {
        let mut m = MetricGraphModel::new("dumbbell");
        m.add_edge("l1", "a", "a", rat_int(2));
        m.add_edge("br", "a", "b", rat_int(1));
        m.add_edge("l2", "b", "b", rat_int(2));
        let (h, _) = hyperelliptic_witness(&m).unwrap().unwrap();
        assert_eq!(h.degree(), 2);
        assert!(rank_at_least(&m, &h, 1).unwrap());
    }

    #[test]
    fn genus_one_is_rejected() {
        let mut m = MetricGraphModel::new("c3");
        m.add_edge("e1", "v1", "v2", rat_int(1));
        m.add_edge("e2", "v2", "v3", rat_int(1));
        m.add_edge("e3", "v3", "v1", rat_int(1));
        assert!(matches!(
            hyperelliptic_witness(&m),
            Err(HyperellipticError::GenusTooSmall(1))
        ));
    }
}
