//! Certificates: the synthesizer's verifiable output, plus shared plumbing
//! for building modified models and translating divisors between them.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::divisor_theory::reduce::ReduceError;
use crate::divisor_theory::{equivalent, rank_at_least, Divisor, HyperellipticError, RankError};
use crate::graph_core::{EId, GraphError, GraphPoint, MetricGraphModel, ModelMap, VId};
use crate::morphism::{self, IndexedMorphism, MorphismError, MorphismReport, TargetShape};

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Hyperelliptic(#[from] HyperellipticError),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid involution: {0}")]
    InvalidInvolution(String),
    #[error("necklace obstruction: {0}")]
    NecklaceObstruction(String),
    #[error("internal contradiction (a construction invariant failed): {0}")]
    InternalContradiction(String),
}

/// A verified degree-3 morphism certificate. `modified` is a tropical
/// modification of `base` (refinement plus attached trees); `embedding`
/// translates points of `base` into `modified`. Edges of `modified` that are
/// absent from the embedding's charts belong to attached trees.
#[derive(Clone, Debug)]
pub struct Certificate {
    /// Model the construction ran on (the input model, except that necklace
    /// synthesis may first contract bridges).
    pub base: MetricGraphModel,
    /// The witness divisor, in `base` coordinates.
    pub divisor: Divisor,
    pub modified: MetricGraphModel,
    /// `modified`'s non-attached part over `base`.
    pub embedding: ModelMap,
    pub morphism: IndexedMorphism,
    pub report: MorphismReport,
    pub provenance: String,
}

/// Outcome of the dispatcher: a certificate, the small-canonical-model
/// exception (divisorially trigonal with no morphism demanded), or an honest
/// out-of-scope verdict.
#[derive(Clone, Debug)]
pub enum Synthesis {
    Certificate(Box<Certificate>),
    ExceptionSmallCanonicalModel { vertices: usize },
    OutsideCharacterizedClass { reason: String },
}

impl Certificate {
    /// The divisor in `modified` coordinates.
    pub fn divisor_on_modified(&self) -> Result<Divisor, SynthesisError> {
        divisor_forward(&self.embedding, &self.base, &self.modified, &self.divisor)
    }

    /// Round trip: every target vertex pulls back to a degree-3 rank-1
    /// divisor equivalent to the witness on the modified model.
    pub fn check_round_trip(&self) -> Result<bool, SynthesisError> {
        let d = self.divisor_on_modified()?;
        for t in &self.morphism.codomain.vertices {
            let f = morphism::pullback(&self.morphism, &GraphPoint::Vertex(t.clone()))?;
            if f.degree() != 3
                || !equivalent(&self.modified, &f, &d)?.0
                || !rank_at_least(&self.modified, &f, 1)?
            {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Runs the independent verifier and packages a certificate; a failed
/// verification is a construction bug and is surfaced loudly.
pub fn certify(
    base: &MetricGraphModel,
    divisor: &Divisor,
    embedding: ModelMap,
    morphism: IndexedMorphism,
    provenance: &str,
) -> Result<Certificate, SynthesisError> {
    let report = morphism::report(&morphism);
    let shape_ok = matches!(
        report.target_shape,
        TargetShape::Tree | TargetShape::TreeOfTriangles
    );
    if !(report.valid && report.harmonic && report.nondegenerate)
        || report.degree != Some(3)
        || !shape_ok
    {
        return Err(SynthesisError::InternalContradiction(format!(
            "{provenance}: verifier rejected the synthesized morphism \
             (valid={}, harmonic={}, nondegenerate={}, degree={:?}, shape={:?}; {})",
            report.valid,
            report.harmonic,
            report.nondegenerate,
            report.degree,
            report.target_shape,
            report.errors.join("; "),
        )));
    }
    Ok(Certificate {
        base: base.clone(),
        divisor: divisor.canonicalize(base)?,
        modified: morphism.domain.clone(),
        embedding,
        morphism,
        report,
        provenance: provenance.to_string(),
    })
}

/// Pushes a divisor through a model map, point by point.
pub fn divisor_forward(
    map: &ModelMap,
    base: &MetricGraphModel,
    derived: &MetricGraphModel,
    d: &Divisor,
) -> Result<Divisor, SynthesisError> {
    let mut out = Divisor::zero();
    for (p, n) in &d.chips {
        out.add(map.forward(base, derived, p)?, *n);
    }
    Ok(out)
}

/// Pulls a divisor back through a model map (derived -> base coordinates).
pub fn divisor_backward(
    map: &ModelMap,
    base: &MetricGraphModel,
    d: &Divisor,
) -> Result<Divisor, SynthesisError> {
    let mut out = Divisor::zero();
    for (p, n) in &d.chips {
        out.add(map.backward(base, p)?, *n);
    }
    Ok(out)
}

pub(crate) fn fresh_vertex(model: &MetricGraphModel, base: &str) -> VId {
    let mut s = base.to_string();
    while model.vertices.contains(&s) {
        s.push('\'');
    }
    s
}

pub(crate) fn fresh_edge(model: &MetricGraphModel, base: &str) -> EId {
    let mut s = base.to_string();
    while model.edges.contains_key(&s) {
        s.push('\'');
    }
    s
}

/// Copies `src` into `dst` with a name prefix, except for vertices listed in
/// `identify` (mapped onto existing `dst` vertices). Returns the vertex and
/// edge renamings.
pub(crate) fn import_with_prefix(
    dst: &mut MetricGraphModel,
    src: &MetricGraphModel,
    prefix: &str,
    identify: &BTreeMap<VId, VId>,
) -> (BTreeMap<VId, VId>, BTreeMap<EId, EId>) {
    let mut vmap = BTreeMap::new();
    for v in &src.vertices {
        if let Some(tgt) = identify.get(v) {
            vmap.insert(v.clone(), tgt.clone());
            continue;
        }
        let name = fresh_vertex(dst, &format!("{prefix}{v}"));
        dst.add_vertex(&name);
        vmap.insert(v.clone(), name);
    }
    let mut emap = BTreeMap::new();
    for (eid, e) in &src.edges {
        let name = fresh_edge(dst, &format!("{prefix}{eid}"));
        dst.add_edge(&name, &vmap[&e.u], &vmap[&e.v], e.length.clone());
        emap.insert(eid.clone(), name);
    }
    (vmap, emap)
}

/// Edge-induced closed subgraph as a standalone model.
pub(crate) fn edge_subgraph(
    model: &MetricGraphModel,
    name: &str,
    edges: &BTreeSet<EId>,
) -> MetricGraphModel {
    let mut out = MetricGraphModel::new(name);
    for eid in edges {
        let e = &model.edges[eid];
        out.add_edge(eid, &e.u, &e.v, e.length.clone());
    }
    out
}
