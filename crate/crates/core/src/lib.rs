//! Deterministic two-player game schemes for singular parabolic equations
//! on Carnot groups.
//!
//! The crate computes the game value `u^ε` of a zero-sum game in which
//! Player I picks a horizontal gradient/Hessian pair and Player II answers
//! with a horizontal move of size at most `ε^{-1/4}` in the Carnot gauge.
//! As `ε → 0` the value approximates viscosity solutions of
//!
//! ```text
//! u_t + μ u + F(t, p, ∇_0 u, ∇_0^{2,*} u) = 0,    u(0, ·) = ψ
//! ```
//!
//! for singular operators such as the horizontal mean curvature flow and the
//! normalized parabolic infinity Laplacian.
//!
//! The crate is `no_std` + `alloc` when built without the default `std`
//! feature. The `std` feature only adds data-parallel layer updates through
//! rayon; results are bitwise identical either way.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod adversary;
pub mod algebra;
pub mod data;
pub mod error;
pub mod game;
pub mod grid;
pub mod linalg;
pub mod operators;
pub mod oracles;
pub mod sampling;
pub mod suites;

pub(crate) mod math;

pub use adversary::{adversary_response, AdversaryBranch, AdversaryParams};
pub use algebra::{Group, GroupKind, Point, MAX_DIM};
pub use data::InitialData;
pub use error::{Error, Result};
pub use game::{
    Control, Diagnostics, GameConfig, Move, MoveLattice, Strategy, XDictionary,
};
pub use grid::{GridBox, HorizontalJet, ValueLayer};
pub use linalg::{HorizontalVector, SymMatrix, MAX_HORIZONTAL};
pub use operators::{AssumptionConstants, Envelope, OperatorDescriptor, OperatorKind};
