//! Numerical classification of measures into L^p-Kato and L^p-Dynkin classes
//! for symmetric Markov processes with two-sided heat kernel estimates.
//!
//! The crate is `no_std` with `alloc` when the default `std` feature is off.
//! All transcendental functions go through `libm`, so results are
//! bit-identical between the two builds. With `std`, sweeps over centers and
//! Monte Carlo paths run on rayon; reductions always happen in index order.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod classification;
pub mod error;
pub mod estimate;
pub mod functionals;
pub mod halton;
pub mod kernel;
pub mod math;
pub mod measures;
pub mod montecarlo;
mod parallel;
pub mod profile;
pub mod quadrature;
pub mod rearrangement;

pub use error::{Error, Result};
pub use estimate::{Estimate, Quantity};
pub use kernel::{HeatKernelModel, KernelFamily, Regime, SpaceModel};
pub use measures::Measure;
pub use profile::Profile;
