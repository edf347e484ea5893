//! Numerical toolkit for graphical self-shrinkers of mean curvature flow in
//! arbitrary codimension.
//!
//! A graph `u: R^n -> R^m` is a self-shrinker exactly when
//! `g^{ij} u^a_ij = -u^a + x . Du^a` with the induced metric
//! `g_ij = d_ij +/- sum_a u^a_i u^a_j` (plus in Euclidean ambient space,
//! minus for spacelike graphs in pseudo-Euclidean space of index m). The
//! crate evaluates this system and the tensor identities, growth bounds,
//! frame inequalities and potential reductions that surround it, each one
//! checked against an independent route (closed forms, finite differences,
//! or pure multilinear algebra).

pub mod corpus;
pub mod error;
pub mod fd;
pub mod fields;
pub mod geometry;
pub mod identity;
pub mod jets;
pub mod lagrangian;
pub mod linalg;
pub mod pseudo;
pub mod report;
pub mod rescale;
pub mod rotsym;

pub use error::{Error, Result};
