//! Numerical engine for the (k,a)-generalized Fourier transform F_{k,a}.
//!
//! Functions on ℝ^N are expanded in the basis H^m ⊗ f_{k,a,m;l}, where
//! f_{k,a,m;l} are Laguerre-type radial functions orthonormal for
//! r^{2<k>+a+N-3} dr. On those coefficients F_{k,a} and the sl(2) generators
//! act diagonally or tridiagonally, which is what every module builds on.

pub mod conformal;
pub mod error;
pub mod estimates;
pub mod exprparse;
pub mod jet;
pub mod poly;
pub mod quadrature;
pub mod radial;
pub mod schwartz;
pub mod specfun;
pub mod spherical;
pub mod transform;
pub mod verify;

pub use error::{KafError, Result};
pub use num_complex::Complex64;
pub use quadrature::{QuadRule, SphereRule};
pub use radial::{Params, RadialCoeffs};
