//! Bounds on the effective bulk and shear moduli of planar polycrystals built from
//! a single crystal, and hierarchical-laminate constructions attaining the four
//! corners of the bound rectangle.

pub mod attain;
pub mod bounds;
pub mod config;
pub mod corners_ad;
pub mod corners_bc;
pub mod error;
pub mod laminate;
pub mod rho_core;
mod roots;
pub mod sample;

pub use attain::{attain, attain_with, Construction};
pub use bounds::{rectangle, BoundsRectangle, Corner};
pub use config::{SearchOptions, Tolerances};
pub use corners_bc::MixParams;
pub use error::{Error, Result};
pub use laminate::{evaluate_tree, AttainmentReport, LaminateNode};
pub use rho_core::{
    invert_on_symmetric, mirror_tensor, rotate_tensor, rotate_vector, translation_t,
    translation_t0, voigt_to_rho, JumpKind, RhoTensor, RhoVector, VoigtTensor, C64,
};
