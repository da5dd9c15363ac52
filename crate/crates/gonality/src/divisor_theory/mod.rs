//! Divisors, chip-firing certificates, reduced forms, rank bounds, and
//! trigonality witnesses.

pub mod chipscript;
pub mod dhar;
pub mod divisor;
pub mod hyperelliptic;
pub mod rank;
pub mod reduce;
pub mod witness;

pub use chipscript::{ChipMove, ChipScript, ClosedSubgraph, ScriptError};
pub use dhar::{dhar_burn, BurnReport, Crossing, DharError};
pub use divisor::Divisor;
pub use hyperelliptic::{hyperelliptic_witness, HyperellipticError, Involution};
pub use rank::{rank_at_least, rank_determining_points, RankError};
pub use reduce::{equivalent, reduce, ReduceError};
pub use witness::{search_w31, search_w31_sequential, W31Verdict, WitnessError};
