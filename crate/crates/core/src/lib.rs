//! Free, boolean and monotone convolutions of probability measures on the
//! real line, the half-line and the unit circle.
//!
//! Convolutions are represented by their analytic transforms. Free
//! convolutions and convolution powers are evaluated pointwise by solving
//! Denjoy-Wolff fixed-point problems; densities and atoms are recovered from
//! boundary limits.

pub mod cli;
pub mod error;
pub mod dwolff;
pub mod extrapolate;
pub mod freeconv;
pub mod measure;
pub mod otherconv;
pub mod poly;
pub mod recovery;
pub mod semigroup;
pub mod transforms;

pub use error::{Error, Result};
pub use measure::{make_atomic, make_named, pushforward_affine, Atom, Domain, Measure, NamedFamily};
pub use num_complex::Complex64;
