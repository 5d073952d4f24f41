//! Totally geodesic submanifolds of the Sasaki tangent bundle of a surface.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod error;
pub mod expedition;
pub mod geometry;
pub mod immersion;
pub mod interp;
pub mod jet;
pub mod sasaki;

pub use error::{GeometryError, Result};
