//! Numerical laboratory for irreversible quantum dynamics on finite lattices
//! and for a leaking one-mode cavity pumped by a random beam of two-level
//! atoms.
//!
//! The crate has two halves that share one operator toolbox:
//!
//! * [`lindblad`], [`lieb_robinson`] and [`thermo_limit`] build time-dependent
//!   Lindblad generators on finite spin lattices, construct the Heisenberg
//!   cocycle by Euler products and by ODE integration, certify complete
//!   positivity / unitality / complete dissipativity, evaluate the irreversible
//!   Lieb-Robinson bound against measured signal propagation, and run the
//!   finite-volume Cauchy diagnostic for the thermodynamic limit.
//! * [`micromaser`] implements the repeated-interaction cavity channel
//!   (perfect and leaking), its closed-form photon statistics, the limiting
//!   state's characteristic function, a quasi-freeness test, energy flux and
//!   entropy production — each closed form cross-checked against brute-force
//!   superoperator oracles.
//!
//! Conventions used throughout (fixed once, everywhere):
//!
//! * tensor ordering: the **last site is the fastest index**, i.e. a product
//!   operator on sites `0..m` is `A_0 ⊗ A_1 ⊗ … ⊗ A_{m-1}` in `kron` order;
//! * vectorization is **column-stacking**, so `vec(X A Y) = (Yᵀ ⊗ X) vec(A)`
//!   and the Schrödinger matrix of a map is the conjugate transpose of its
//!   Heisenberg matrix.

extern crate blas_src as _;

pub mod defaults;
pub mod error;
pub mod linalg;
pub mod operators;

pub mod lindblad;

pub mod lieb_robinson;
pub mod thermo_limit;

pub mod micromaser;

pub use error::{Error, Result};
pub use linalg::CMat;
