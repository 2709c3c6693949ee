//! Reflection operator of a lamellar metallic grating by eigenmode
//! expansion in the grating layer and boundary matching at its two
//! interfaces.

pub mod geometry;
pub mod modes;
pub mod reflection;
pub mod electrostatic;

pub use geometry::{order_wavevectors, BlochPoint, GratingGeometry};
pub use modes::{grating_modes, LayerModes, ModeSet};
pub use reflection::{
    grating_reflection, plate_reflection, translation_operator, GratingSolver, ReflectionOperator,
};
