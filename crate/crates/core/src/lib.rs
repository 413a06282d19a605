//! Spin geometry toolkit: explicit Clifford representations, algebraic Dirac
//! forms, pointwise conformal tractor calculus, twistor spinors on the
//! conformally flat model `S^p x S^q`, and the split-signature pure-spinor
//! normal-form metric.
//!
//! Algebraic modules work over exact scalars ([`scalar::Q`], Gaussian
//! rationals, `Q(i, sqrt 2)`); only [`model_space`] and [`normal_form`] use
//! floating point.

#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod error;
pub mod io;
pub mod kform;
pub mod linalg;
pub mod numeric;
pub mod random;
pub mod scalar;

pub mod clifford;
pub mod spinor_forms;
pub mod tractor;
pub mod model_space;
pub mod normal_form;

pub use clifford::{CliffordRep, Signature};
pub use error::{Error, Result};
pub use kform::KForm;
pub use linalg::Mat;
pub use scalar::{Cq, Field, Qi2, Q, R2};
