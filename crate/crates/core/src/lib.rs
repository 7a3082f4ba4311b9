pub mod breaking;
pub mod checks;
pub mod combs;
pub mod embeddings;
pub mod error;
pub mod gaps;
pub mod node;
pub mod nodeset;
pub mod types;

pub use error::{Error, Result};
pub use node::{record_history, Node, RecordHistory};
pub use nodeset::{first_move_equivalent, record_equivalent, ClosureKind, Equivalence, NodeSet, Signature};
pub use combs::{classify_comb, comb_witness, enumerate_realizable_maps, CombKind, EFamily, InducedCombMap};
pub use types::{classify_type, enumerate_types, j_function, type_witness, TypeDescriptor};
pub use embeddings::{comb_action, type_action, Embedding, Substitution, TypeAction};
pub use gaps::{order_le, GapSpec, Layer, OrderResult, Verdict};
pub use breaking::{break_check, BreakQuery, BreakReport, BreakVerdict};
