//! Variational structure, integrability and continuum limits of additive
//! fourth-order difference equations.
//!
//! The [`expr`] module is an exact rational-function kernel. On top of it,
//! [`lagrangian`] decides whether an equation is variational and rebuilds its
//! Lagrangian, [`family`] and [`canonical`] construct the integrable family
//! and its five normal forms, [`poisson`] and [`dynamics`] check Liouville
//! integrability and the volume law, and [`contlim`] verifies continuum
//! limits.

pub mod canonical;
pub mod contlim;
pub mod dynamics;
pub mod expr;
pub mod family;
pub mod lagrangian;
pub mod poisson;
pub mod sample;
