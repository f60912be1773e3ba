//! Graphs of constant curvature functions in hyperbolic space over planar
//! and radial domains: curvature functions, graph geometry, barriers, and
//! finite-difference continuation solvers.

pub mod barrier;
pub mod curvfunc;
pub mod eigen;
pub mod error;
pub mod linop;
pub mod radial;
pub mod rng;
pub mod scalars;
pub mod shape;
pub mod solver;
pub mod suite;

pub use error::{Error, Result};
