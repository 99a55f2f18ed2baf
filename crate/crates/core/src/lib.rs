//! Mesh deformation for structured quad meshes around a moving interface.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::type_complexity
)]

pub mod elastic;
pub mod error;
pub mod fe;
pub mod harness;
pub mod io;
pub mod mesh;
pub mod problem;
pub mod quality;
pub mod sensitivity;
pub mod sparse;
pub mod spring;
pub mod stiffening;
pub mod yeoh;

pub use error::{Error, Result};
pub use mesh::{Point, QuadMesh, Vec2};
