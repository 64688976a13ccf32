//! Scene domain types: skin patches of sphere-spring-damper taxels, rigid
//! sphere-union objects, articulated robots, and the world that holds them.
//!
//! Types here are plain data with public fields; [`validate_world`] checks
//! every model invariant and reports violations as values rather than errors,
//! so a scene loaded from a file can be diagnosed field by field.

mod math;
mod trace;
mod validate;

pub use math::{Pose, Quat, UNIT_TOL, Vec3};
pub use trace::{NoiseMeta, Quantity, SignalFrame, Trace, TraceCatalog};
pub use validate::{Violation, validate_world};

use std::collections::BTreeMap;

/// A single tactile sensing element: a sphere held to the substrate by a
/// spring and damper, free to move only along its substrate normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Taxel {
    /// Undeflected sphere center in the patch frame (m).
    pub rest_center: Vec3,
    /// Unit deflection axis in the patch frame; the taxel retracts along -normal.
    pub normal: Vec3,
    /// Sphere radius (m).
    pub radius: f64,
    /// Spring constant (N/m).
    pub stiffness: f64,
    /// Damper constant (N·s/m).
    pub damping: f64,
    /// Travel limit before the taxel bottoms out (m).
    pub max_deflection: f64,
    /// (row, col) position for grid-layout patches.
    pub grid_index: Option<(usize, usize)>,
}

/// How a skin patch is mounted.
#[derive(Debug, Clone, PartialEq)]
pub enum Attachment {
    /// Rigidly fixed in the world frame.
    WorldFixed(Pose),
    /// Rigidly attached to a robot link, at `pose` relative to the link frame.
    LinkAttached {
        robot: String,
        link: String,
        pose: Pose,
    },
}

/// A rigid substrate carrying an ordered set of taxels.
///
/// The taxel ordering is the canonical signal ordering: row-major over
/// `grid_index` when `grid_dims` is present, declaration order otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SkinPatch {
    pub id: String,
    pub attachment: Attachment,
    pub taxels: Vec<Taxel>,
    /// (rows, cols) when the taxels form a grid; enables heat-map export.
    pub grid_dims: Option<(usize, usize)>,
}

/// One sphere of a sphere-union object, in the object frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

/// A keyframed rigid-body trajectory; poses are interpolated between
/// waypoints and clamped outside the keyed range.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// (time (s), pose) waypoints with strictly increasing times.
    pub waypoints: Vec<(f64, Pose)>,
}

/// Motion mode of a rigid object.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectMode {
    /// Immovable, at the given pose.
    Fixed(Pose),
    /// Follows a keyframed pose trajectory.
    Scripted(Trajectory),
    /// Starts at `initial` and translates along the gravity direction until
    /// the skin's spring support balances its weight (`mass` in kg).
    Settle { initial: Pose, mass: f64 },
}

/// A rigid object modeled as a union of spheres.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereUnionObject {
    pub id: String,
    pub spheres: Vec<Sphere>,
    pub mode: ObjectMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointKind {
    Revolute,
    Prismatic,
}

/// A 1-DOF joint connecting two links of a robot.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub id: String,
    pub kind: JointKind,
    pub parent_link: String,
    pub child_link: String,
    /// Child frame relative to the parent frame at q = 0.
    pub origin: Pose,
    /// Unit joint axis in the joint frame.
    pub axis: Vec3,
}

/// A rigid multi-link body whose joints follow scripted displacement
/// trajectories; q is radians for revolute joints, meters for prismatic.
#[derive(Debug, Clone, PartialEq)]
pub struct Robot {
    pub id: String,
    pub base_pose: Pose,
    pub links: Vec<String>,
    pub joints: Vec<Joint>,
    /// Joint id → (time (s), q) waypoints with strictly increasing times.
    pub joint_trajectories: BTreeMap<String, Vec<(f64, f64)>>,
}

/// Root scene container.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    /// Gravity vector (m/s²).
    pub gravity: Vec3,
    /// Simulation time step (s).
    pub dt: f64,
    /// Simulation length (s); the trace covers t = 0..=duration in dt steps.
    pub duration: f64,
    pub patches: Vec<SkinPatch>,
    pub objects: Vec<SphereUnionObject>,
    pub robots: Vec<Robot>,
}

impl World {
    /// Check every model invariant; see [`validate_world`].
    pub fn validate(&self) -> Vec<Violation> {
        validate_world(self)
    }

    pub fn patch(&self, id: &str) -> Option<&SkinPatch> {
        self.patches.iter().find(|p| p.id == id)
    }

    pub fn object(&self, id: &str) -> Option<&SphereUnionObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn robot(&self, id: &str) -> Option<&Robot> {
        self.robots.iter().find(|r| r.id == id)
    }

    /// Total taxel count across all patches.
    pub fn taxel_count(&self) -> usize {
        self.patches.iter().map(|p| p.taxels.len()).sum()
    }
}
