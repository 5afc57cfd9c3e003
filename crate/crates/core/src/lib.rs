//! Power graphs of groups.
//!
//! Finite groups are handled exactly. The integers, subgroups of the
//! rationals and the discrete Heisenberg group are materialised on finite
//! windows, while adjacency itself is always decided symbolically.

pub mod arith;
pub mod checks;
pub mod direction;
pub mod error;
pub mod graphs;
pub mod groups;
pub mod powergraph;
pub mod report;
pub mod suite;
pub mod transforms;
pub mod window;

pub use error::{DirectionError, GraphError, GroupError, TransformError, WindowError};
pub use graphs::{Digraph, SimpleGraph, TwinPartition};
pub use groups::{Element, Group, HeightFunction};
pub use powergraph::{PowerGraphBundle, VariantBundles, VariantTag};
pub use window::WindowSpec;
