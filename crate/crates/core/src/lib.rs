//! Exact computations with quadratic forms over towers of fields built from
//! finite fields, p-adic fields, Laurent series and rational functions.

pub mod brauer;
pub mod cert;
pub mod error;
pub mod fields;
pub mod forms;
pub mod lgp;
pub mod minv;
pub mod neighbors;
pub mod parse;
pub mod witt;

pub use error::{Error, Result};
pub use fields::{Count, Elem, Field, FieldKind, Profile, Repr};
pub use forms::QForm;
