//! Popular critical matchings in many-to-many bipartite instances with
//! lower and upper quotas on both sides.

pub mod assignment;
pub mod certificate;
pub mod error;
pub mod fixtures;
pub mod generate;
pub mod instance;
pub mod matching;
pub mod oracle;
pub mod popularity;
pub mod solver;

pub use error::{GenError, MatchingError, ParseError};
pub use instance::{Edge, Instance, Quotas, Side, Vertex, VertexId};
pub use matching::Matching;
