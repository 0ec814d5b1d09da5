//! Automatic differentiation for a small first-order language with
//! conditionals and non-smooth primitives.
//!
//! Derivatives follow the intensional semantics: every primitive carries a
//! table of analytic pieces, and its derivative is the derivative of the
//! piece that contains the argument. At a kink such as `relu(0)` this picks a
//! definite value instead of failing or producing NaN, and the result agrees
//! with the classical derivative wherever the latter exists, except on a set
//! of measure zero.
//!
//! ```
//! use papdiff_core::{parse, symbolic_jacobian, InputVector};
//!
//! let e = parse("relu(x1)", 1).unwrap();
//! let v = InputVector::new(vec![0.0]).unwrap();
//! assert_eq!(symbolic_jacobian(&e, &v).unwrap().entries(), &[0.0]);
//! ```

pub mod analytic;
pub mod autodiff;
pub mod error;
pub mod expr;
pub mod gallery;
pub mod numeric;
pub mod primitives;
pub mod repr;
pub mod scalar;
pub mod verify;

pub use analytic::{AnalyticExpr, AnalyticSet, Guard, Sense};
pub use autodiff::{jvp, nth_derivative, symbolic_jacobian, value_and_jacobian, value_and_jvp, vjp, JacobianRow, Tape};
pub use error::{EvalError, GalleryError, ParseError, ReprError};
pub use expr::{eval, eval_at, parse, parse_inferred, Expr, InputVector};
pub use gallery::{bump_g, cantor_fn, cantor_inverse_f, CantorApprox, Gallery, ProbeRecord};
pub use primitives::{lookup, registry, PrimOp, Primitive};
pub use repr::{expr_to_repr, repr_piece_count, PapPiece, PapRepr};
pub use scalar::{Dual, Jet, Scalar};
pub use verify::{gradcheck, GradCheckReport, Sampler};
