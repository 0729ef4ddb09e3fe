//! Ranks the members of an egocentric social network by how closely their
//! content matches the ego's within (category, sentiment) buckets, then
//! selects the top influenceable targets.

pub mod classify;
pub mod corpus;
pub mod lexproc;
pub mod recommend;
pub mod resources;
pub mod simdex;
pub mod targets;
pub mod textprep;
