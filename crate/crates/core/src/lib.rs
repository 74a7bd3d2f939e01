//! Free noncommutative function theory on matrix tuples.
//!
//! Evaluation of nc polynomials and rational expressions, difference-differential
//! calculus by block-matrix evaluation, Taylor-Taylor expansions about matrix
//! centers, and convergence estimators for nc power series.

pub mod blockops;
pub mod convergence;
pub mod diffcalc;
pub mod error;
pub mod matrix;
pub mod ncalg;
pub mod ncexpr;
pub mod sample;
pub mod scalar;
pub mod ttseries;
pub mod words;

pub use blockops::{MatTuple, RectTuple};
pub use error::{NcError, ParseError, Result, Span};
pub use matrix::Matrix;
pub use ncalg::{Degree, NcPoly};
pub use ncexpr::{NcExpr, NcFunction};
pub use scalar::{Complex, Field, Rational, Scalar};
pub use ttseries::{CoeffTensor, TTSeries};
pub use words::Word;
