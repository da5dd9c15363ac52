//! Exact representation of metric graphs: models, points, refinement,
//! canonical loopless models, cut structure, necklaces, and tropical
//! modification.

pub mod cuts;
pub mod maps;
pub mod model;
pub mod necklace;
pub mod rational;
pub mod rebuild;

pub use cuts::{cut_structure, CutStructure};
pub use maps::{Chart, ContractionMap, ModelMap};
pub use model::{EId, Edge, GraphError, GraphPoint, MetricGraphModel, VId};
pub use necklace::{necklace_decomposition, NecklaceDecomposition};
pub use rational::Rational;
pub use rebuild::{
    attach_tree, canonical_loopless_model, contract_bridges, refine, suppress_vertices, Attachment,
};
