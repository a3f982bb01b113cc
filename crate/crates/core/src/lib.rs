//! Numerical laboratory for biharmonic wave scattering from microlocally
//! isotropic Gaussian random sources.
//!
//! The library simulates the equation `(Lap^2 - k^4 + V) u = f` on a periodic
//! computational box with `f` drawn from a Gaussian ensemble whose covariance
//! has principal symbol `h(x) |xi|^{-m}`, computes multi-frequency far-field
//! correlation data, and reconstructs the micro-correlation strength `h` from
//! that data. Companion modules probe resolvent decay rates and the
//! analytic-continuation stability bounds that control the reconstruction.

pub mod error;
pub mod grid;
pub mod io;
pub mod profiles;
pub mod kernels;
pub mod gmig;
pub mod solver;
pub mod inverse;
pub mod stability;
pub mod experiment;

pub use error::{Error, Result};
