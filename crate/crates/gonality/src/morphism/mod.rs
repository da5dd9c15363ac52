//! Indexed morphisms of metric graphs and their independent verification.

pub mod types;
pub mod verify;

pub use types::{EdgeImage, IndexedMorphism, MorphismReport, TargetShape};
pub use verify::{
    check_harmonic, check_nondegenerate, identity, is_admissible_cover, local_degree, pullback,
    report, rh_defect, satisfies_rh_inequality, target_shape, validate, vertex_degree,
    MorphismError,
};
