//! Closing a harmonic morphism to an admissible cover by gluing leaf-edges
//! at vertices where the Riemann-Hurwitz inequality is strict.
//!
//! An admissible cover in the unbounded picture has infinite ends; here every
//! edge has finite length, so each glued leg is truncated at target length 1
//! and its tip is reported back to the caller. Tips of index >= 2 carry the
//! unavoidable residual defect of the truncation; every other vertex ends up
//! with defect exactly 0.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph_core::rational::{rat, rat_int};
use crate::morphism::{self, EdgeImage, IndexedMorphism};

use super::certificate::{fresh_edge, fresh_vertex, SynthesisError};

/// Glues leaf-edges until every vertex other than a glued leg tip satisfies
/// the local Riemann-Hurwitz equation. Fails if the inequality is violated
/// anywhere, or if the codomain is not a tree.
pub fn close_by_leaf_gluing(
    phi: &IndexedMorphism,
) -> Result<(IndexedMorphism, BTreeSet<String>), SynthesisError> {
    let rep = morphism::report(phi);
    if !rep.valid || !rep.harmonic {
        return Err(SynthesisError::Precondition(
            "leaf gluing needs a valid harmonic morphism".into(),
        ));
    }
    if phi.codomain.genus() != 0 {
        return Err(SynthesisError::Precondition(
            "admissible covers target trees".into(),
        ));
    }
    if !rep.satisfies_rh_inequality {
        return Err(SynthesisError::Precondition(
            "Riemann-Hurwitz inequality fails; no leaf gluing can close it".into(),
        ));
    }

    let mut phi = phi.clone();
    let mut tips: BTreeSet<String> = BTreeSet::new();
    for _ in 0..8 {
        let open: Vec<String> = phi
            .domain
            .vertices
            .iter()
            .filter(|v| !tips.contains(*v) && morphism::rh_defect(&phi, v) > 0)
            .cloned()
            .collect();
        let Some(v) = open.first() else {
            let closed = (&phi, tips);
            return Ok((closed.0.clone(), closed.1));
        };
        let t = phi.vertex_map[v].clone();
        glue_round(&mut phi, &t, &mut tips)?;
    }
    Err(SynthesisError::InternalContradiction(
        "leaf gluing did not converge".into(),
    ))
}

/// One target leaf at t; every fiber vertex receives legs summing to its
/// local degree, splitting off index-1 legs to burn its defect.
fn glue_round(
    phi: &mut IndexedMorphism,
    t: &str,
    tips: &mut BTreeSet<String>,
) -> Result<(), SynthesisError> {
    let leaf_v = fresh_vertex(&phi.codomain, &format!("{t}.inf"));
    let leaf_e = fresh_edge(&phi.codomain, &format!("{t}.end"));
    phi.codomain.add_vertex(&leaf_v);
    phi.codomain.add_edge(&leaf_e, t, &leaf_v, rat_int(1));

    let fiber: Vec<String> = phi
        .domain
        .vertices
        .iter()
        .filter(|u| phi.vertex_map[*u] == t)
        .cloned()
        .collect();
    for u in fiber {
        let m = morphism::vertex_degree(phi, &u);
        let delta = morphism::rh_defect(phi, &u);
        if m < 1 || delta < 0 {
            return Err(SynthesisError::InternalContradiction(format!(
                "fiber vertex {u} has local degree {m}, defect {delta}"
            )));
        }
        let r = (m - delta).max(1);
        let mut parts = vec![1i64; (r - 1) as usize];
        parts.push(m - r + 1);
        for (j, mu) in parts.into_iter().enumerate() {
            let lv = fresh_vertex(&phi.domain, &format!("{u}.tip{j}"));
            let le = fresh_edge(&phi.domain, &format!("{u}.leg{j}"));
            phi.domain.add_vertex(&lv);
            phi.domain.add_edge(&le, &u, &lv, rat(1, mu));
            phi.vertex_map.insert(lv.clone(), leaf_v.clone());
            phi.edge_map.insert(le.clone(), EdgeImage::Edge(leaf_e.clone()));
            phi.index.insert(le, mu);
            if mu > 1 {
                tips.insert(lv);
            }
        }
    }
    Ok(())
}
