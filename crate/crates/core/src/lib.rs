//! Bandwidth and power allocation for pairs of full-duplex users exchanging
//! video, maximizing weighted PSNR under statistical delay constraints.
//!
//! The modules follow the data flow: [`ec`] turns powers and bandwidth into
//! an effective capacity, [`quality`] turns a rate into PSNR, [`solver`]
//! runs polyblock outer approximation on any [`solver::MonotoneProblem`],
//! [`fd`] casts the allocation as one, [`baselines`] holds the reference
//! allocators and [`harness`] runs parameter sweeps to CSV.

pub mod baselines;
pub mod config;
pub mod ec;
pub mod error;
pub mod fd;
pub mod harness;
pub mod polyblock;
pub mod quadrature;
pub mod quality;
pub mod roots;
pub mod solver;

pub use error::{Error, Infeasibility, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod chapter0 {}
    #[doc = include_str!("../../../book/src/effective-capacity.md")]
    pub mod chapter1 {}
    #[doc = include_str!("../../../book/src/quality.md")]
    pub mod chapter2 {}
    #[doc = include_str!("../../../book/src/polyblock.md")]
    pub mod chapter3 {}
    #[doc = include_str!("../../../book/src/allocation.md")]
    pub mod chapter4 {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    pub mod chapter5 {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    pub mod chapter6 {}
}
