//! Degree-2 quotients: folding a model by a rank-1 degree-2 class, and the
//! quotient of an explicit involution.
//!
//! The fold does not need the involution up front: for a degree-2 class H
//! with an effective representative through every point, the partner of a
//! point q is the unique effective representative of H - q. Refining at the
//! partners of all vertices (and requested marks) makes the partner map
//! simplicial, and each edge is then pointwise fixed (index 2, doubled image
//! length), folded onto itself (split at the midpoint into an index-1 pair),
//! or swapped with a partner edge (index 1).

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::divisor_theory::{reduce, Divisor, Involution};
use crate::graph_core::rational::rat;
use crate::graph_core::{
    refine, EId, GraphPoint, MetricGraphModel, ModelMap, Rational, VId,
};
use crate::morphism::{self, EdgeImage, IndexedMorphism};

use super::certificate::SynthesisError;

/// A degree-2 fold: the refined domain, its map over the input model, and
/// the verified quotient morphism.
#[derive(Clone, Debug)]
pub struct Fold {
    pub domain: MetricGraphModel,
    pub map: ModelMap,
    pub morphism: IndexedMorphism,
}

/// The unique effective representative of H - q, when one exists.
pub fn partner_point(
    model: &MetricGraphModel,
    h: &Divisor,
    q: &GraphPoint,
) -> Result<Option<GraphPoint>, SynthesisError> {
    let q = model.canonical_point(q)?;
    let d = h.minus(&Divisor::single(q.clone(), 1));
    let (r, _) = reduce(model, &d, &q)?;
    if !r.is_effective() || r.degree() != 1 {
        return Ok(None);
    }
    Ok(Some(r.support().remove(0)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum EdgeClass {
    Fixed,
    FoldedSelf,
    Paired(EId),
}

/// Folds `model` by the degree-2 class of `h` (which must pass through every
/// point of the model). `marks` are extra points forced to become vertices.
pub fn fold_by_h(
    model: &MetricGraphModel,
    h: &Divisor,
    marks: &[GraphPoint],
) -> Result<Fold, SynthesisError> {
    fold_in_ambient(model, h, marks, None)
}

/// Fold of a subgraph that shares vertex and edge ids with an ambient model.
/// Partners are computed in the ambient: on a half with pendant bridges the
/// local class h - q has many effective representatives (single chips slide
/// across bridges), while the ambient sweep moves the pair in lockstep and
/// pins the partner down.
pub(crate) fn fold_in_ambient(
    model: &MetricGraphModel,
    h: &Divisor,
    marks: &[GraphPoint],
    ambient: Option<(&MetricGraphModel, &Divisor)>,
) -> Result<Fold, SynthesisError> {
    model.validate()?;
    if model.genus() < 1 {
        return Err(SynthesisError::Precondition(
            "fold_by_h needs genus at least 1 (partners are not unique on trees)".into(),
        ));
    }
    let h = h.canonicalize(model)?;
    if h.degree() != 2 || !h.is_effective() {
        return Err(SynthesisError::Precondition(
            "fold_by_h needs an effective degree-2 divisor".into(),
        ));
    }

    let partner0 = |q: &GraphPoint| -> Result<Option<GraphPoint>, SynthesisError> {
        match ambient {
            Some((am, ah)) => {
                let Some(p) = partner_point(am, ah, q)? else {
                    return Ok(None);
                };
                match model.canonical_point(&p) {
                    Ok(ps) => Ok(Some(ps)),
                    Err(_) => Err(SynthesisError::InternalContradiction(format!(
                        "ambient partner {p} of {q} leaves the folded subgraph"
                    ))),
                }
            }
            None => partner_point(model, &h, q),
        }
    };

    // Refinement points: partners of all vertices, the marks and their
    // partners, and loop midpoints with theirs.
    let mut pts: BTreeSet<GraphPoint> = BTreeSet::new();
    let mut seeds: Vec<GraphPoint> = model
        .vertices
        .iter()
        .map(|v| GraphPoint::Vertex(v.clone()))
        .collect();
    for m in marks {
        seeds.push(model.canonical_point(m)?);
    }
    for (eid, e) in &model.edges {
        if e.is_loop() {
            seeds.push(GraphPoint::interior(eid, e.length.clone() / rat(2, 1)));
        }
    }
    for s in &seeds {
        pts.insert(s.clone());
        let Some(p) = partner0(s)? else {
            return Err(SynthesisError::InvalidInvolution(format!(
                "no effective representative of H - {s}: H does not sweep the model"
            )));
        };
        pts.insert(p);
    }
    let pts: Vec<GraphPoint> = pts.into_iter().collect();
    let (m1, map1) = refine(model, &pts)?;

    let sigma_at = |q: &GraphPoint| -> Result<GraphPoint, SynthesisError> {
        let qs = map1.backward(model, q)?;
        let p = partner0(&qs)?.ok_or_else(|| {
            SynthesisError::InternalContradiction(format!(
                "point {q} lost its partner after refinement"
            ))
        })?;
        Ok(map1.forward(model, &m1, &p)?)
    };

    let mut sigma_v: BTreeMap<VId, VId> = BTreeMap::new();
    for v in &m1.vertices {
        match sigma_at(&GraphPoint::Vertex(v.clone()))? {
            GraphPoint::Vertex(w) => {
                sigma_v.insert(v.clone(), w);
            }
            p => {
                return Err(SynthesisError::InternalContradiction(format!(
                    "partner of vertex {v} is the interior point {p} after refinement"
                )))
            }
        }
    }

    let mut classes: BTreeMap<EId, EdgeClass> = BTreeMap::new();
    for (eid, e) in &m1.edges {
        let quarter = e.length.clone() / rat(4, 1);
        let q = GraphPoint::interior(eid, quarter.clone());
        let s = sigma_at(&q)?;
        let class = match &s {
            p if *p == q => EdgeClass::Fixed,
            GraphPoint::Interior { edge, offset } if edge == eid => {
                if *offset == e.length.clone() - quarter {
                    EdgeClass::FoldedSelf
                } else {
                    return Err(SynthesisError::InternalContradiction(format!(
                        "partner map is not an isometry on edge {eid}"
                    )));
                }
            }
            GraphPoint::Interior { edge, .. } => EdgeClass::Paired(edge.clone()),
            GraphPoint::Vertex(w) => {
                return Err(SynthesisError::InternalContradiction(format!(
                    "partner of an interior point of {eid} is the vertex {w}"
                )))
            }
        };
        classes.insert(eid.clone(), class);
    }

    let (morphism, map2) = quotient(&m1, &sigma_v, &classes)?;
    let map = map1.compose(model, &map2)?;
    Ok(Fold {
        domain: morphism.domain.clone(),
        map,
        morphism,
    })
}

/// Spec operation: the quotient of a length-preserving involution with tree
/// quotient, as a verified degree-2 morphism. Self-paired edges whose
/// endpoints are both fixed are taken pointwise fixed; self-paired edges with
/// swapped endpoints are folded at their midpoint.
pub fn degree2_from_involution(inv: &Involution) -> Result<IndexedMorphism, SynthesisError> {
    let model = &inv.model;
    model.validate()?;
    for (v, w) in &inv.vertex_pairing {
        if inv.vertex_pairing.get(w) != Some(v) {
            return Err(SynthesisError::InvalidInvolution(format!(
                "vertex pairing is not an involution at {v}"
            )));
        }
    }
    let mut classes: BTreeMap<EId, EdgeClass> = BTreeMap::new();
    for (eid, fid) in &inv.edge_pairing {
        let e = model.edge(eid)?;
        if eid == fid {
            let su = inv.vertex_pairing.get(&e.u);
            let sv = inv.vertex_pairing.get(&e.v);
            if su == Some(&e.u) && sv == Some(&e.v) && !e.is_loop() {
                classes.insert(eid.clone(), EdgeClass::Fixed);
            } else if su == Some(&e.v) && sv == Some(&e.u) {
                classes.insert(eid.clone(), EdgeClass::FoldedSelf);
            } else {
                return Err(SynthesisError::InvalidInvolution(format!(
                    "self-paired edge {eid} has incompatible endpoint images"
                )));
            }
        } else {
            if inv.edge_pairing.get(fid) != Some(eid) {
                return Err(SynthesisError::InvalidInvolution(format!(
                    "edge pairing is not an involution at {eid}"
                )));
            }
            let f = model.edge(fid)?;
            if e.length != f.length {
                return Err(SynthesisError::InvalidInvolution(format!(
                    "paired edges {eid}, {fid} have different lengths"
                )));
            }
            classes.insert(eid.clone(), EdgeClass::Paired(fid.clone()));
        }
    }
    if classes.len() != model.edges.len() {
        return Err(SynthesisError::InvalidInvolution(
            "edge pairing does not cover every edge".into(),
        ));
    }
    let (phi, _) = quotient(model, &inv.vertex_pairing, &classes)?;
    Ok(phi)
}

/// Shared quotient builder. Refines folded-self edges at their midpoints,
/// then emits the quotient model and morphism. Fails unless the quotient is
/// a tree and the verifier confirms a harmonic non-degenerate degree-2 map.
fn quotient(
    model: &MetricGraphModel,
    sigma_v: &BTreeMap<VId, VId>,
    classes: &BTreeMap<EId, EdgeClass>,
) -> Result<(IndexedMorphism, ModelMap), SynthesisError> {
    // Midpoint refinement of folded edges.
    let mids: Vec<GraphPoint> = classes
        .iter()
        .filter(|(_, c)| **c == EdgeClass::FoldedSelf)
        .map(|(eid, _)| {
            GraphPoint::interior(eid, model.edges[eid].length.clone() / rat(2, 1))
        })
        .collect();
    let (m2, map2) = refine(model, &mids)?;

    let mut sigma: BTreeMap<VId, VId> = BTreeMap::new();
    for v in &m2.vertices {
        if let Some(w) = sigma_v.get(v) {
            sigma.insert(v.clone(), w.clone());
        } else {
            // A folded-edge midpoint: fixed by the involution.
            sigma.insert(v.clone(), v.clone());
        }
    }

    // Edge classes of the refined model: folded halves pair with each other.
    let mut cls: BTreeMap<EId, EdgeClass> = BTreeMap::new();
    for (eid, c) in classes {
        match c {
            EdgeClass::FoldedSelf => {
                let (a, b) = (format!("{eid}#0"), format!("{eid}#1"));
                if !(m2.edges.contains_key(&a) && m2.edges.contains_key(&b)) {
                    return Err(SynthesisError::InternalContradiction(format!(
                        "midpoint refinement of {eid} produced unexpected edge names"
                    )));
                }
                cls.insert(a.clone(), EdgeClass::Paired(b.clone()));
                cls.insert(b, EdgeClass::Paired(a));
            }
            other => {
                cls.insert(eid.clone(), other.clone());
            }
        }
    }

    let rep = |v: &VId| -> VId {
        let w = &sigma[v];
        if w < v {
            w.clone()
        } else {
            v.clone()
        }
    };

    let mut target = MetricGraphModel::new(&format!("{}.q", model.name));
    let mut vertex_map: BTreeMap<VId, VId> = BTreeMap::new();
    for v in &m2.vertices {
        let r = rep(v);
        target.add_vertex(&r);
        vertex_map.insert(v.clone(), r);
    }
    let mut edge_map: BTreeMap<EId, EdgeImage> = BTreeMap::new();
    let mut index: BTreeMap<EId, i64> = BTreeMap::new();
    for (eid, c) in &cls {
        let e = &m2.edges[eid];
        match c {
            EdgeClass::Fixed => {
                if sigma[&e.u] != e.u || sigma[&e.v] != e.v {
                    return Err(SynthesisError::InvalidInvolution(format!(
                        "pointwise-fixed edge {eid} has a moved endpoint"
                    )));
                }
                target.add_edge(eid, &rep(&e.u), &rep(&e.v), rat(2, 1) * e.length.clone());
                edge_map.insert(eid.clone(), EdgeImage::Edge(eid.clone()));
                index.insert(eid.clone(), 2);
            }
            EdgeClass::Paired(fid) => {
                if cls.get(fid) != Some(&EdgeClass::Paired(eid.clone())) {
                    return Err(SynthesisError::InvalidInvolution(format!(
                        "edges {eid}, {fid} are not mutually paired"
                    )));
                }
                let f = &m2.edges[fid];
                if e.length != f.length {
                    return Err(SynthesisError::InvalidInvolution(format!(
                        "paired edges {eid}, {fid} have different lengths"
                    )));
                }
                let id = if eid < fid { eid } else { fid };
                if eid == id {
                    let (mut a, mut b) = (rep(&e.u), rep(&e.v));
                    if a > b {
                        std::mem::swap(&mut a, &mut b);
                    }
                    target.add_edge(id, &a, &b, e.length.clone());
                }
                let orbit: BTreeSet<VId> = [rep(&e.u), rep(&e.v)].into();
                let other: BTreeSet<VId> = [rep(&f.u), rep(&f.v)].into();
                if orbit != other {
                    return Err(SynthesisError::InvalidInvolution(format!(
                        "paired edges {eid}, {fid} do not share endpoint orbits"
                    )));
                }
                edge_map.insert(eid.clone(), EdgeImage::Edge(id.clone()));
                index.insert(eid.clone(), 1);
            }
            EdgeClass::FoldedSelf => unreachable!("replaced above"),
        }
    }

    if target.genus() != 0 {
        return Err(SynthesisError::InvalidInvolution(format!(
            "quotient of {} has genus {}, not a tree",
            model.name,
            target.genus()
        )));
    }
    let phi = IndexedMorphism {
        domain: m2,
        codomain: target,
        vertex_map,
        edge_map,
        index,
    };
    let rep2 = morphism::report(&phi);
    if !(rep2.valid && rep2.harmonic && rep2.nondegenerate) || rep2.degree != Some(2) {
        return Err(SynthesisError::InvalidInvolution(format!(
            "quotient is not a harmonic non-degenerate degree-2 morphism: {}",
            rep2.errors.join("; ")
        )));
    }
    Ok((phi, map2))
}

#[allow(unused)]
fn quarter(len: &Rational) -> Rational {
    debug_assert!(*len > Rational::zero());
    len.clone() / rat(4, 1)
}
