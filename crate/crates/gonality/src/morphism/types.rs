//! Data types for indexed morphisms.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graph_core::{EId, MetricGraphModel, VId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeImage {
    Edge(EId),
    Vertex(VId),
}

/// A morphism of models: vertex and edge maps plus per-edge indices.
/// Contracted edges carry index 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedMorphism {
    pub domain: MetricGraphModel,
    pub codomain: MetricGraphModel,
    pub vertex_map: BTreeMap<VId, VId>,
    pub edge_map: BTreeMap<EId, EdgeImage>,
    pub index: BTreeMap<EId, i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetShape {
    Tree,
    TreeOfTriangles,
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismReport {
    pub valid: bool,
    pub errors: Vec<String>,
    pub harmonic: bool,
    pub nondegenerate: bool,
    pub degree: Option<i64>,
    pub local_degrees: BTreeMap<VId, i64>,
    pub rh_defects: BTreeMap<VId, i64>,
    pub admissible_cover: bool,
    pub satisfies_rh_inequality: bool,
    pub target_shape: TargetShape,
}
