//! Quasi-static tactile skin simulation.
//!
//! Skin patches carry sphere-spring-damper taxels on rigid substrates; rigid
//! sphere-union objects contact them along scripted motion trajectories. The
//! solver keeps every taxel in static equilibrium at every step, emitting a
//! per-timestep displacement trace that post-processing converts to contact
//! forces with optional sensor noise and protective-layer smoothing.
//!
//! Module map:
//! - [`core`] — scene domain types and invariant validation
//! - [`kinematics`] — pose evaluation for objects, robot links, and taxels
//! - [`collision`] — spatial-hash broadphase and the closed-form narrowphase
//! - [`solver`] — the quasi-static stepping loop and gravity settling
//! - [`signals`] — force conversion, sensor noise, spatial smoothing
//! - [`io`] — scene files, trace persistence, heat-map export

pub mod collision;
pub mod core;
pub mod io;
pub mod kinematics;
pub mod signals;
pub mod solver;

pub use crate::core::{
    Attachment, Joint, JointKind, NoiseMeta, ObjectMode, Pose, Quantity, Quat, Robot, SignalFrame,
    SkinPatch, Sphere, SphereUnionObject, Taxel, Trace, TraceCatalog, Trajectory, Vec3, Violation,
    World,
};
