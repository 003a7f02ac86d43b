//! Geo-social group search: find the connected c-truss that covers every
//! query keyword at least `rho` times and whose farthest member is as close
//! as possible to a query location.
//!
//! The search prunes the graph to its keyword-satisfying c-truss components,
//! expands a radius around the query location until a qualifying truss
//! appears, then peels the farthest members off that truss while a
//! keyword-aware dynamic spanning forest tracks which components still
//! qualify.

pub mod baselines;
pub mod bench;
pub mod dsu;
pub mod error;
pub mod expand;
pub mod forest;
pub mod graph;
pub mod io;
pub mod reduce;
pub mod search;
pub mod spatial;
pub mod truss;
pub mod verify;

pub use error::*;
pub use graph::{
    distance, edge, group_distance, validate_group, Edge, GeoSocialGraph, GroupResult, KeywordDict,
    KeywordId, Point, Query, SearchStats, VertexAttr, VertexId,
};

pub use search::{search, SearchConfig, SearchOutcome};
