//! Complex-polynomial arithmetic, root finding, circle quadrature, winding
//! numbers and a seeded derivative-free minimizer.

pub mod optimize;
pub mod poly;
pub mod quadrature;
pub mod roots;
pub mod winding;

pub use optimize::{minimize, minimize_with_starts, Minimum, OptimizerConfig};
pub use poly::ComplexPoly;
pub use quadrature::{circle_mean, unit_circle};
pub use roots::{poly_roots, Root, RootSet};
pub use winding::{winding_count, Contour};

pub use num_complex::Complex64 as C64;
