//! Exact structural analysis of integer cones of knapsack polytopes:
//! integer-hull vertices, parallelepiped group structure, level-based
//! weight shifting, Sylvester lower-bound instances, and exact bin
//! packing with IRUP/MIRUP verdicts. Everything runs in arbitrary
//! precision rational arithmetic; nothing is ever approximated silently.

pub mod arith;
pub mod error;
pub mod group;
mod linalg;
pub mod lowerbound;
pub mod polytope;
pub mod shift;

pub use arith::{Rational, Residue};
pub use error::{Error, Result};
pub use group::{DiagonalBasis, GroupElement};
pub use polytope::{
    barycentric, containing_simplex, enumerate_configs, hull_vertices, hull_vertices_direct,
    hull_vertices_incremental, is_config, Configuration, Instance, SimplexCoords, VertexSet,
};
