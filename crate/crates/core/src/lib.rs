//! Exact arithmetic and tensor algebra for operators on `(C²)^{⊗n}`.

pub mod dual;
pub mod matrix;
pub mod nullspace;
pub mod ratfunc;
pub mod scalar;
pub mod sparse;
pub mod tensor;

pub use dual::{derivative_at, value_and_derivative_at, Dual};
pub use matrix::Mat;
pub use nullspace::exact_nullspace;
pub use ratfunc::{Poly, RatFunc};
pub use scalar::{abs, from_f64, int, parse_rational, rat, rel_close, rel_close_f64, to_f64, Field, Rational};
pub use sparse::SparseMat;
pub use tensor::{
    embed_local, embed_pair, embed_sites, occupation, partial_trace_first, partial_trace_first_sparse,
    partial_transpose, permutation_op, swap_legs, Leg,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoreError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("site {site} out of range for a chain of {len} sites")]
    SiteOutOfRange { site: usize, len: usize },
    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    IndexOutOfRange { row: usize, col: usize, rows: usize, cols: usize },
    #[error("invalid rational '{0}' (expected p or p/q with q != 0)")]
    Parse(String),
}
