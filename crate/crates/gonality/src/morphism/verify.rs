//! Independent verification of indexed morphisms: structural validity,
//! harmonicity and degree, non-degeneracy, point pullbacks, local
//! Riemann-Hurwitz defects, and target-shape recognition.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph_core::necklace::blocks;
use crate::graph_core::{EId, GraphError, GraphPoint, MetricGraphModel, Rational, VId};

use crate::divisor_theory::Divisor;

use super::types::{EdgeImage, IndexedMorphism, MorphismReport, TargetShape};

#[derive(Debug, Error)]
pub enum MorphismError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("morphism is not structurally valid: {0}")]
    Invalid(String),
    #[error("morphism is not harmonic")]
    NotHarmonic,
    #[error("edge {0} is not incident to the image vertex")]
    NotIncident(EId),
    #[error("codomain loops are out of scope for {0}")]
    CodomainLoop(String),
}

/// Structural checks: total maps with known ids, endpoint commutation, index
/// zero exactly on contracted edges, and the exact length law
/// l'(image) = index * l(edge). Returns the list of violations.
pub fn validate(phi: &IndexedMorphism) -> Vec<String> {
    let mut errors = Vec::new();
    if let Err(e) = phi.domain.validate() {
        errors.push(format!("domain: {e}"));
    }
    if let Err(e) = phi.codomain.validate() {
        errors.push(format!("codomain: {e}"));
    }
    if !errors.is_empty() {
        return errors;
    }
    for v in &phi.domain.vertices {
        match phi.vertex_map.get(v) {
            None => errors.push(format!("vertex {v} has no image")),
            Some(w) if !phi.codomain.vertices.contains(w) => {
                errors.push(format!("vertex {v} maps to unknown vertex {w}"))
            }
            _ => {}
        }
    }
    for v in phi.vertex_map.keys() {
        if !phi.domain.vertices.contains(v) {
            errors.push(format!("vertex map mentions unknown vertex {v}"));
        }
    }
    for (eid, e) in &phi.domain.edges {
        let (Some(img), Some(&mu)) = (phi.edge_map.get(eid), phi.index.get(eid)) else {
            errors.push(format!("edge {eid} has no image or no index"));
            continue;
        };
        let (Some(fu), Some(fv)) = (phi.vertex_map.get(&e.u), phi.vertex_map.get(&e.v)) else {
            continue;
        };
        match img {
            EdgeImage::Vertex(w) => {
                if !phi.codomain.vertices.contains(w) {
                    errors.push(format!("edge {eid} contracts to unknown vertex {w}"));
                    continue;
                }
                if mu != 0 {
                    errors.push(format!("contracted edge {eid} has nonzero index {mu}"));
                }
                if fu != w || fv != w {
                    errors.push(format!(
                        "edge {eid} contracts to {w} but its endpoints map to {fu}, {fv}"
                    ));
                }
            }
            EdgeImage::Edge(f) => {
                let Ok(fe) = phi.codomain.edge(f) else {
                    errors.push(format!("edge {eid} maps to unknown edge {f}"));
                    continue;
                };
                if mu <= 0 {
                    errors.push(format!("non-contracted edge {eid} has index {mu}"));
                    continue;
                }
                let mut got = [fu.clone(), fv.clone()];
                let mut want = [fe.u.clone(), fe.v.clone()];
                got.sort();
                want.sort();
                if got != want {
                    errors.push(format!(
                        "edge {eid} maps to {f} but endpoint images {got:?} differ from {want:?}"
                    ));
                }
                let scaled = Rational::from_integer(mu.into()) * e.length.clone();
                if fe.length != scaled {
                    errors.push(format!(
                        "edge {eid}: image length is not index {mu} times its length"
                    ));
                }
            }
        }
    }
    for eid in phi.edge_map.keys() {
        if !phi.domain.edges.contains_key(eid) {
            errors.push(format!("edge map mentions unknown edge {eid}"));
        }
    }
    errors
}

fn require_valid(phi: &IndexedMorphism) -> Result<(), MorphismError> {
    let errors = validate(phi);
    if errors.is_empty() {
        Ok(())
    } else {
        Err(MorphismError::Invalid(errors.join("; ")))
    }
}

/// Sum of indices over the directions at `x` mapping to the codomain edge
/// `target`. Loops are counted once per end, matching the direction-based
/// definition of harmonicity.
pub fn local_degree(
    phi: &IndexedMorphism,
    x: &str,
    target: &str,
) -> Result<i64, MorphismError> {
    require_valid(phi)?;
    let fx = &phi.vertex_map[x];
    let te = phi.codomain.edge(target)?;
    if te.u != *fx && te.v != *fx {
        return Err(MorphismError::NotIncident(target.to_string()));
    }
    Ok(directional_degrees(phi, x)
        .get(target)
        .copied()
        .unwrap_or(0))
}

/// Index totals at `x` per codomain edge, counting each edge-end at `x` once.
fn directional_degrees(phi: &IndexedMorphism, x: &str) -> BTreeMap<EId, i64> {
    let mut out = BTreeMap::new();
    for (eid, _) in phi.domain.ends_at(x) {
        if let EdgeImage::Edge(f) = &phi.edge_map[&eid] {
            *out.entry(f.clone()).or_insert(0) += phi.index[&eid];
        }
    }
    out
}

/// Harmonicity: at every domain vertex the directional index totals agree
/// across all codomain edges at the image vertex, and every codomain edge
/// carries the same fiber total, which is the degree.
pub fn check_harmonic(phi: &IndexedMorphism) -> Result<(bool, Option<i64>), MorphismError> {
    require_valid(phi)?;
    for x in &phi.domain.vertices {
        let fx = &phi.vertex_map[x];
        let dirs = directional_degrees(phi, x);
        let mut totals: BTreeSet<i64> = BTreeSet::new();
        let mut incident: BTreeSet<EId> = BTreeSet::new();
        for (f, _) in phi.codomain.ends_at(fx) {
            incident.insert(f);
        }
        for f in &incident {
            totals.insert(dirs.get(f).copied().unwrap_or(0));
        }
        if totals.len() > 1 {
            return Ok((false, None));
        }
    }
    if phi.codomain.edges.is_empty() {
        return Ok((true, None));
    }
    let mut fiber: BTreeMap<&EId, i64> = phi.codomain.edges.keys().map(|f| (f, 0)).collect();
    for (eid, img) in &phi.edge_map {
        if let EdgeImage::Edge(f) = img {
            *fiber.get_mut(f).unwrap() += phi.index[eid];
        }
    }
    let totals: BTreeSet<i64> = fiber.values().copied().collect();
    if totals.len() == 1 {
        let d = *totals.iter().next().unwrap();
        Ok((d > 0, (d > 0).then_some(d)))
    } else {
        Ok((false, None))
    }
}

/// The common directional index total at `x`, defined for harmonic morphisms.
pub fn vertex_degree(phi: &IndexedMorphism, x: &str) -> i64 {
    let fx = &phi.vertex_map[x];
    let dirs = directional_degrees(phi, x);
    phi.codomain
        .ends_at(fx)
        .first()
        .map(|(f, _)| dirs.get(f).copied().unwrap_or(0))
        .unwrap_or(0)
}

/// Every domain vertex must have an incident edge of positive index.
pub fn check_nondegenerate(phi: &IndexedMorphism) -> Result<bool, MorphismError> {
    require_valid(phi)?;
    Ok(phi.domain.vertices.iter().all(|v| {
        phi.domain
            .ends_at(v)
            .iter()
            .any(|(eid, _)| phi.index[eid] > 0)
    }))
}

/// Pullback of a codomain point: for an interior point, index-many chips at
/// the unique preimage point on each edge above it; for a vertex, the vertex
/// local degree at each preimage vertex.
pub fn pullback(phi: &IndexedMorphism, t: &GraphPoint) -> Result<Divisor, MorphismError> {
    require_valid(phi)?;
    let (harmonic, _) = check_harmonic(phi)?;
    if !harmonic {
        return Err(MorphismError::NotHarmonic);
    }
    let t = phi.codomain.canonical_point(t)?;
    let mut out = Divisor::zero();
    match &t {
        GraphPoint::Vertex(w) => {
            for x in &phi.domain.vertices {
                if phi.vertex_map[x] == *w {
                    out.add(GraphPoint::Vertex(x.clone()), vertex_degree(phi, x));
                }
            }
        }
        GraphPoint::Interior { edge, offset } => {
            let fe = phi.codomain.edge(edge)?;
            if fe.is_loop() {
                return Err(MorphismError::CodomainLoop("pullback".into()));
            }
            for (eid, e) in &phi.domain.edges {
                if phi.edge_map[eid] != EdgeImage::Edge(edge.clone()) {
                    continue;
                }
                let mu = phi.index[eid];
                let muq = Rational::from_integer(mu.into());
                let s = if phi.vertex_map[&e.u] == fe.u {
                    offset.clone() / muq
                } else {
                    (fe.length.clone() - offset.clone()) / muq
                };
                out.add(
                    phi.domain.canonical_point(&GraphPoint::Interior {
                        edge: eid.clone(),
                        offset: s,
                    })?,
                    mu,
                );
            }
        }
    }
    Ok(out)
}

/// Local Riemann-Hurwitz defect 2 m(v) - sum over non-contracted directions
/// of (index - 1) - 2. Zero at every vertex of an admissible cover.
pub fn rh_defect(phi: &IndexedMorphism, v: &str) -> i64 {
    let m = vertex_degree(phi, v);
    let ram: i64 = phi
        .domain
        .ends_at(v)
        .iter()
        .filter(|(eid, _)| phi.index[eid] > 0)
        .map(|(eid, _)| phi.index[eid] - 1)
        .sum();
    2 * m - ram - 2
}

pub fn is_admissible_cover(phi: &IndexedMorphism) -> Result<bool, MorphismError> {
    let (harmonic, _) = check_harmonic(phi)?;
    Ok(harmonic
        && phi.codomain.genus() == 0
        && phi.domain.vertices.iter().all(|v| rh_defect(phi, v) == 0))
}

pub fn satisfies_rh_inequality(phi: &IndexedMorphism) -> Result<bool, MorphismError> {
    let (harmonic, _) = check_harmonic(phi)?;
    Ok(harmonic && phi.domain.vertices.iter().all(|v| rh_defect(phi, v) >= 0))
}

/// Shape of a codomain model: a tree, a tree of triangles (every block is a
/// bridge or an equal-length 3-cycle), or anything else.
pub fn target_shape(model: &MetricGraphModel) -> TargetShape {
    if model.genus() == 0 {
        return TargetShape::Tree;
    }
    for block in blocks(model) {
        if block.len() == 1 {
            let eid = block.iter().next().unwrap();
            if model.edges[eid].is_loop() {
                return TargetShape::Other;
            }
            continue;
        }
        let verts: BTreeSet<&VId> = block
            .iter()
            .flat_map(|eid| {
                let e = &model.edges[eid];
                [&e.u, &e.v]
            })
            .collect();
        if block.len() != 3 || verts.len() != 3 {
            return TargetShape::Other;
        }
        let lengths: BTreeSet<&Rational> =
            block.iter().map(|eid| &model.edges[eid].length).collect();
        if lengths.len() != 1 {
            return TargetShape::Other;
        }
    }
    TargetShape::TreeOfTriangles
}

/// Full verification bundle.
pub fn report(phi: &IndexedMorphism) -> MorphismReport {
    let errors = validate(phi);
    let valid = errors.is_empty();
    let mut rep = MorphismReport {
        valid,
        errors,
        harmonic: false,
        nondegenerate: false,
        degree: None,
        local_degrees: BTreeMap::new(),
        rh_defects: BTreeMap::new(),
        admissible_cover: false,
        satisfies_rh_inequality: false,
        target_shape: target_shape(&phi.codomain),
    };
    if !valid {
        return rep;
    }
    let (harmonic, degree) = check_harmonic(phi).expect("validated");
    rep.harmonic = harmonic;
    rep.degree = degree;
    rep.nondegenerate = check_nondegenerate(phi).expect("validated");
    if harmonic {
        for v in &phi.domain.vertices {
            rep.local_degrees.insert(v.clone(), vertex_degree(phi, v));
            rep.rh_defects.insert(v.clone(), rh_defect(phi, v));
        }
        rep.admissible_cover = phi.codomain.genus() == 0
            && rep.rh_defects.values().all(|d| *d == 0);
        rep.satisfies_rh_inequality = rep.rh_defects.values().all(|d| *d >= 0);
    }
    rep
}

/// The identity morphism of a model, index 1 everywhere.
pub fn identity(model: &MetricGraphModel) -> IndexedMorphism {
    IndexedMorphism {
        domain: model.clone(),
        codomain: model.clone(),
        vertex_map: model.vertices.iter().map(|v| (v.clone(), v.clone())).collect(),
        edge_map: model
            .edges
            .keys()
            .map(|e| (e.clone(), EdgeImage::Edge(e.clone())))
            .collect(),
        index: model.edges.keys().map(|e| (e.clone(), 1)).collect(),
    }
}
