//! Sprays, induced second-order ODEs, point and projective symmetries,
//! projective flatness, Riemannian metrizability and Randers metrics built
//! from magnetic flows, all in two dimensions.
//!
//! Every residual is evaluated with exact forward-mode jets ([`jets`]), so the
//! catalog entries in [`catalog`], [`symmetry::LieAlgebraCase`],
//! [`classify::OdeEntry`] and [`randers`] can be certified to near machine
//! precision. [`suites`] bundles the checks into line-oriented reports.
// `!(x > 0.0)` style guards are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod catalog;
pub mod classify;
pub mod domain;
pub mod error;
pub mod finsler;
pub mod jets;
pub mod linalg;
pub mod randers;
pub mod suites;
pub mod symmetry;
pub mod trace;

pub use domain::Domain;
pub use error::{Error, Result};
pub use jets::{lift, lift_all, Field, Jet2, Real};

/// A ± choice in a catalog family (sphere/hyperbolic, c⁺/c⁻, C2±).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn f(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}
