//! Numerical workbench for the van Hove model: a free scalar field linearly
//! coupled to a fixed source, treated both classically and quantum
//! mechanically.
//!
//! Everything is radial: test functions, sources and field configurations are
//! sampled on a [`grid::MomentumGrid`] and d-dimensional integrals reduce to a
//! one-dimensional composite Gauss-Legendre rule.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod fock;
pub mod grid;
pub mod linalg;
pub mod scattering;
pub mod semiclassics;
pub mod sources;
pub mod special;
pub mod states;
pub mod weyl;

pub use num_complex::Complex64;

pub use dynamics::{KmsWindow, VanHoveSystem};
pub use error::{Error, Result};
pub use fock::{DenseOperator, FockMode};
pub use grid::{GridConfig, MomentumGrid, RadialFunction, WeightExponent};
pub use semiclassics::{Regime, SweepReport};
pub use sources::{InfraredClass, RealizedSource, SourceFamily, SourceSpec};
pub use states::{CharState, CharacteristicFunction, GramReport, StateKind};
pub use weyl::{FunctionHandle, TrigPolynomial, WeylTerm};
