//! GF(4) and binary symplectic linear algebra underlying code construction
//! and commutation checks.

mod binmat;
mod checkmat;
mod gf4;

pub use binmat::{gf2_nullspace, gf2_rank, symplectic_valid, BinMatrix};
pub use checkmat::{component_gates, normalizer_basis, CheckMatrix, NormalizerMatrix};
pub use gf4::{trace_inner, vector_trace_inner, Gf4, Gf4Vector};
