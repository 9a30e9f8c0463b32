//! Numerical toolkit for degenerate p-Laplacians on H-type groups: the
//! algebra and group law, the horizontal vector fields and the (weighted)
//! p-Laplacian, closed-form constants, seeded Monte Carlo quadrature, and
//! verification suites that compare the two.

pub mod algebra;
pub mod closedform;
pub mod error;
pub mod fields;
pub mod quadrature;
pub mod verify;

pub use algebra::{GroupPoint, HTypeAlgebra, OperatorParams};
pub use error::{Error, Result};
