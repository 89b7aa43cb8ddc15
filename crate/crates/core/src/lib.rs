//! Exact linear-algebra models of unipotent perverse sheaves on `C^n` with
//! the diagonal stratification.
//!
//! The crate works entirely with finite combinatorial data over an exact
//! field: hyperbolic sheaves on the faces of the real braid arrangement,
//! Beilinson gluing data, iterated nearby/vanishing stalks, tree-indexed
//! fiber functors and their wall-crossing transport.
//!
//! All math is generic over a [`Field`]; the aliases at the crate root fix
//! the scalar to [`Rational`], which is what the file formats and CLI use.

pub mod arrangement;
pub mod cycles;
pub mod error;
pub mod fiber;
pub mod gluing;
pub mod groupoid;
pub mod hypsheaf;
pub mod io;
pub mod quiver;
pub mod ratmat;
pub mod verify;

pub use arrangement::{enumerate_faces, Face, FacePoset, Permutation, Side};
pub use error::{Error, Result};
pub use quiver::{Quiver, Rep};
pub use ratmat::{Field, Matrix};

/// Arbitrary-precision rational scalar.
pub type Rational = num_rational::BigRational;
/// Dense matrix of exact rationals.
pub type RatMatrix = Matrix<Rational>;
