//! Free constructions of geometries of Coxeter type.
//!
//! The crate builds finite stages of three constructions and verifies them
//! exactly:
//!
//! * [`free`]: the construction for Coxeter diagrams without `A3`
//!   subdiagrams, driven by three extension procedures and checked against
//!   the stage invariants in [`properties`];
//! * [`cn`]: the construction for linear `C_n`/`H_n` shaped diagrams over
//!   the lazy projective substrate in [`substrate`];
//! * [`fraisse`]: generated substructures, free amalgams and the sampling
//!   harness for the amalgamation class.
//!
//! [`geometry`] holds the incidence-geometry kernel every module shares.

pub mod cn;
pub mod diagram;
pub mod error;
pub mod fixtures;
pub mod fraisse;
pub mod free;
pub mod geometry;
pub mod graph;
pub mod io;
pub mod properties;
pub mod substrate;
pub mod verdict;

pub use diagram::{Bond, CnShape, CoxeterDiagram};
pub use error::{Error, Result};
pub use geometry::{Flag, Geometry, Rank2View, Residue, VertexId};
pub use graph::{Graph, Length};
pub use verdict::{Status, Verdict, Witness};
