//! Exact-arithmetic workbench for the quaternionic Dolbeault complex on the
//! flat model ℍⁿ and for the lattice-level vanishing classification on H².
//!
//! Everything is computed over ℚ(i): identity checks are per-basis-element
//! exact equalities, kernels are exact ranks, and cone membership is exact
//! sign arithmetic. No floating point anywhere.

pub mod bbf;
pub mod calculus;
pub mod exterior;
pub mod flat;
pub mod matrix;
pub mod koszul;
pub mod poly;
pub mod qd;
pub mod scalar;
pub mod su2;
pub mod suite;

pub use exterior::{ExteriorForm, PolyForm};
pub use flat::{FlatModel, Structure};
pub use matrix::{gram_adjoint, SparseMat, SpanBasis};
pub use poly::Poly;
pub use scalar::{GaussRat, Rat};
pub use bbf::{classify, ConeSpec, H2Lattice, TrichotomyCase, VanishingReport};
pub use calculus::{Operators, WeightedBundle};
pub use su2::{clebsch_gordan, Sl2Action, WeightDecomposition};
