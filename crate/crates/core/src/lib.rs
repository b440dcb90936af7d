//! Exact-arithmetic tensor rank and border-rank certificates.
//!
//! The library constructs, transforms, and machine-verifies certificates
//! of tensor rank statements: explicit decompositions (rank upper
//! bounds), restrictions and degenerations between tensors, flattening
//! and substitution lower bounds, and the canonical form of matrix
//! pencils with its exact rank formula. All arithmetic is exact, over
//! the rationals, prime fields, or quadratic extensions Q(sqrt(D)).

pub mod bounds;
pub mod error;
pub mod field;
pub mod json;
pub mod matrix;
pub mod pencil;
pub mod poly;
pub mod tensor;
pub mod transform;

pub use error::{Error, Result};
pub use field::{Cardinality, FieldSpec, Scalar};
pub use poly::{EpsPoly, Poly, Valuation};
pub use tensor::{Decomposition, Shape, SimpleTensor, Tensor};
