pub mod bracket;
pub mod catalog;
pub mod cli;
pub mod curvature;
pub mod doc;
pub mod error;
pub mod flow;
pub mod graphs;
pub mod linalg;
pub mod rational;
pub mod report;
pub mod soliton;
pub mod stratify;

#[cfg(test)]
pub(crate) mod testutil;
