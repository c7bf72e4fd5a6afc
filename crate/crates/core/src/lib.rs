//! Fourier-profile numerics for the modified KdV equation
//!
//! `u_t + u_xxx + ε(u³)_x = 0`, written in terms of the profile
//! `ũ(t,p) = e^{-itp³} û(t,p)`, which is constant under the linear flow.
//!
//! The crate evaluates the cubic nonlinearity of the profile equation in
//! three independent ways, integrates the profile flow (with an optional
//! frequency cutoff), computes self-similar profiles and extracts the
//! modified-scattering data of small solutions.
//!
//! The guide under `book/` walks through each piece; its code listings are
//! compiled and run as doc-tests of this crate.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod error;
pub mod evolve;
pub mod fit;
pub mod grid;
pub mod io;
pub mod nonlin;
pub mod profile;
pub mod quad;
pub mod scatter;
pub mod selfsim;
pub mod specfun;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{FrequencyGrid, GridSpec};
pub use profile::{NormReport, Profile, TailModel};
pub use specfun::{airy_fock, airy_fock_deriv, ComplexValue};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/airy.md")]
    mod airy {}
    #[doc = include_str!("../../../book/src/profiles.md")]
    mod profiles {}
    #[doc = include_str!("../../../book/src/nonlinearity.md")]
    mod nonlinearity {}
    #[doc = include_str!("../../../book/src/evolution.md")]
    mod evolution {}
    #[doc = include_str!("../../../book/src/self_similar.md")]
    mod self_similar {}
    #[doc = include_str!("../../../book/src/scattering.md")]
    mod scattering {}
    #[doc = include_str!("../../../book/src/fitting.md")]
    mod fitting {}
}
