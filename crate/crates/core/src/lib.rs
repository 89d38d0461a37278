//! Pliable index codes from conflict-free hypergraph colorings.
//!
//! A PICOD instance is a hypergraph whose vertices are messages and whose
//! edges are receivers' request-sets. Conflict-free colorings, collections of
//! colorings and their local variants are turned into linear encoders over
//! prime fields, and every encoder can be checked receiver by receiver.

pub mod collection;
pub mod coloring;
pub mod encoder;
pub mod error;
pub mod instance;
pub mod localcf;
pub mod oracle;

pub use collection::ColoringCollection;
pub use coloring::KFoldColoring;
pub use encoder::FieldMatrix;
pub use error::{Error, Result};
pub use instance::PicodInstance;
