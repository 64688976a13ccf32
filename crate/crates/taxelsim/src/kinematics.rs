//! Pose evaluation at any simulation time: trajectory interpolation, forward
//! kinematics of robots, world-frame taxel frames, and object sphere
//! positions. Everything here is a pure function of its arguments.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::core::{
    Attachment, Joint, JointKind, ObjectMode, Pose, Robot, SphereUnionObject, Trajectory, Vec3,
    World,
};

/// A taxel's geometry resolved into the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaxelWorldFrame {
    /// Undeflected sphere center (m).
    pub rest_center_world: Vec3,
    /// Unit deflection axis; the taxel retracts along the negative direction.
    pub normal_world: Vec3,
}

/// One object sphere resolved into the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldSphere {
    pub center: Vec3,
    pub radius: f64,
    /// Index of the owning object in `world.objects`.
    pub object_index: usize,
}

/// Settle-mode object exists but the world's gravity vector is zero, so there
/// is no direction to settle along.
#[derive(Debug, Clone, thiserror::Error)]
#[error("object `{object}` is in settle mode but gravity is the zero vector")]
pub struct ZeroGravityError {
    pub object: String,
}

/// Evaluate a pose trajectory at time `t`.
///
/// Clamps to the first/last waypoint outside the keyed range; between
/// waypoints, translation interpolates linearly and rotation by shortest-arc
/// slerp. Exact at waypoint times.
pub fn interpolate_pose(traj: &Trajectory, t: f64) -> Pose {
    let wps = &traj.waypoints;
    assert!(
        !wps.is_empty(),
        "trajectory must have at least one waypoint"
    );
    if t <= wps[0].0 {
        return wps[0].1;
    }
    let last = wps.len() - 1;
    if t >= wps[last].0 {
        return wps[last].1;
    }
    // First waypoint with time > t; the segment is [hi-1, hi].
    let hi = wps.partition_point(|(wt, _)| *wt <= t);
    let (t0, p0) = &wps[hi - 1];
    let (t1, p1) = &wps[hi];
    if t == *t0 {
        return *p0;
    }
    let u = (t - t0) / (t1 - t0);
    Pose {
        rotation: p0.rotation.slerp(p1.rotation, u),
        translation: p0.translation + (p1.translation - p0.translation) * u,
    }
}

/// Clamped piecewise-linear interpolation of scalar waypoints.
pub fn interpolate_scalar(waypoints: &[(f64, f64)], t: f64) -> f64 {
    assert!(
        !waypoints.is_empty(),
        "scalar trajectory must have at least one waypoint"
    );
    if t <= waypoints[0].0 {
        return waypoints[0].1;
    }
    let last = waypoints.len() - 1;
    if t >= waypoints[last].0 {
        return waypoints[last].1;
    }
    let hi = waypoints.partition_point(|(wt, _)| *wt <= t);
    let (t0, q0) = waypoints[hi - 1];
    let (t1, q1) = waypoints[hi];
    if t == t0 {
        return q0;
    }
    q0 + (q1 - q0) * ((t - t0) / (t1 - t0))
}

/// Child-frame pose of a joint at displacement `q`: the joint origin composed
/// with a rotation of `q` radians about the axis (revolute) or a translation
/// of `q` meters along it (prismatic).
pub fn joint_transform(joint: &Joint, q: f64) -> Pose {
    let motion = match joint.kind {
        JointKind::Revolute => Pose {
            rotation: crate::core::Quat::from_axis_angle(joint.axis, q),
            translation: Vec3::ZERO,
        },
        JointKind::Prismatic => Pose::from_translation(joint.axis * q),
    };
    joint.origin.compose(&motion)
}

/// World-frame pose of every link of a robot at time `t`.
///
/// The base link takes `base_pose`; each child link composes its parent's pose
/// with the joint transform at the interpolated joint displacement. Assumes
/// the robot passed core validation (tree-structured joint graph).
pub fn forward_kinematics(robot: &Robot, t: f64) -> BTreeMap<String, Pose> {
    let mut child_of: BTreeMap<&str, &Joint> = BTreeMap::new();
    for joint in &robot.joints {
        child_of.insert(joint.child_link.as_str(), joint);
    }
    let root = robot
        .links
        .iter()
        .find(|l| !child_of.contains_key(l.as_str()))
        .expect("validated robot has a base link");

    let mut poses: BTreeMap<String, Pose> = BTreeMap::new();
    poses.insert(root.clone(), robot.base_pose);
    // Tree order: sweep until all links are resolved. Each pass resolves every
    // link whose parent already has a pose.
    let mut remaining: Vec<&Joint> = robot.joints.iter().collect();
    while !remaining.is_empty() {
        let before = remaining.len();
        remaining.retain(|joint| {
            let Some(parent_pose) = poses.get(&joint.parent_link).copied() else {
                return true;
            };
            let trajectory = robot
                .joint_trajectories
                .get(&joint.id)
                .expect("validated robot has a trajectory per joint");
            let q = interpolate_scalar(trajectory, t);
            poses.insert(
                joint.child_link.clone(),
                parent_pose.compose(&joint_transform(joint, q)),
            );
            false
        });
        assert!(
            remaining.len() < before,
            "joint graph is not a tree rooted at the base link"
        );
    }
    poses
}

/// World pose of a patch's substrate at time `t`.
fn patch_pose(world: &World, attachment: &Attachment, t: f64) -> Pose {
    match attachment {
        Attachment::WorldFixed(pose) => *pose,
        Attachment::LinkAttached { robot, link, pose } => {
            let r = world
                .robot(robot)
                .expect("validated patch references an existing robot");
            let links = forward_kinematics(r, t);
            let link_pose = links
                .get(link)
                .expect("validated patch references an existing link");
            link_pose.compose(pose)
        }
    }
}

/// World-frame rest centers and normals for every taxel, in trace catalog
/// order (patches in declaration order, taxels in patch order).
///
/// Normals are rotated only, never translated, and renormalized.
pub fn world_taxel_frames(world: &World, t: f64) -> Vec<TaxelWorldFrame> {
    let mut frames = Vec::with_capacity(world.taxel_count());
    for patch in &world.patches {
        let pose = patch_pose(world, &patch.attachment, t);
        frames.par_extend(patch.taxels.par_iter().with_min_len(512).map(|taxel| {
            let normal = pose.rotate_dir(taxel.normal);
            TaxelWorldFrame {
                rest_center_world: pose.transform_point(taxel.rest_center),
                // Unit rotations preserve length; renormalize to shed rounding.
                normal_world: normal.normalized().unwrap_or(normal),
            }
        }));
    }
    frames
}

/// World-frame sphere positions for one settle-mode object at the given
/// offset along the unit gravity direction.
pub fn settle_sphere_positions(
    object: &SphereUnionObject,
    object_index: usize,
    offset: f64,
    gravity_dir: Vec3,
) -> Vec<WorldSphere> {
    let ObjectMode::Settle { initial, .. } = &object.mode else {
        panic!("settle_sphere_positions requires a settle-mode object");
    };
    let pose = Pose {
        rotation: initial.rotation,
        translation: initial.translation + gravity_dir * offset,
    };
    object
        .spheres
        .iter()
        .map(|s| WorldSphere {
            center: pose.transform_point(s.center),
            radius: s.radius,
            object_index,
        })
        .collect()
}

/// World-frame positions of every object sphere at time `t`.
///
/// Fixed objects stay at their pose, scripted objects follow their trajectory,
/// and settle objects sit at their initial pose translated by
/// `settle_offsets[id]` along the unit gravity direction (missing entries are
/// treated as offset 0).
pub fn object_sphere_positions(
    world: &World,
    t: f64,
    settle_offsets: &BTreeMap<String, f64>,
) -> Result<Vec<WorldSphere>, ZeroGravityError> {
    let mut spheres = Vec::new();
    for (oi, object) in world.objects.iter().enumerate() {
        let pose = match &object.mode {
            ObjectMode::Fixed(pose) => *pose,
            ObjectMode::Scripted(traj) => interpolate_pose(traj, t),
            ObjectMode::Settle { initial, .. } => {
                let Some(gravity_dir) = world.gravity.normalized() else {
                    return Err(ZeroGravityError {
                        object: object.id.clone(),
                    });
                };
                let offset = settle_offsets.get(&object.id).copied().unwrap_or(0.0);
                Pose {
                    rotation: initial.rotation,
                    translation: initial.translation + gravity_dir * offset,
                }
            }
        };
        spheres.extend(object.spheres.iter().map(|s| WorldSphere {
            center: pose.transform_point(s.center),
            radius: s.radius,
            object_index: oi,
        }));
    }
    Ok(spheres)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{Quat, SkinPatch, Sphere, Taxel};
    use std::f64::consts::FRAC_PI_2;

    fn assert_close(a: Vec3, b: Vec3, tol: f64) {
        assert!((a - b).norm() < tol, "{a:?} vs {b:?}");
    }

    #[test]
    fn single_waypoint_clamps_everywhere() {
        let pose = Pose::from_translation(Vec3::new(1.0, 2.0, 3.0));
        let traj = Trajectory {
            waypoints: vec![(0.0, pose)],
        };
        assert_eq!(interpolate_pose(&traj, 5.0), pose);
        assert_eq!(interpolate_pose(&traj, -1.0), pose);
    }

    #[test]
    fn translation_interpolates_linearly() {
        let traj = Trajectory {
            waypoints: vec![
                (0.0, Pose::identity()),
                (2.0, Pose::from_translation(Vec3::new(0.0, 0.0, -2.0))),
            ],
        };
        let mid = interpolate_pose(&traj, 1.0);
        assert_close(mid.translation, Vec3::new(0.0, 0.0, -1.0), 1e-12);
    }

    #[test]
    fn rotation_interpolates_by_shortest_arc() {
        // Identity at t=0, 90° about z at t=2; t=1 must be the 45° turn,
        // sending (1,0,0) to (√2/2, √2/2, 0).
        let q90 = Quat::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), FRAC_PI_2);
        let traj = Trajectory {
            waypoints: vec![
                (0.0, Pose::identity()),
                (2.0, Pose::from_rotation(q90).unwrap()),
            ],
        };
        let mid = interpolate_pose(&traj, 1.0);
        let half = std::f64::consts::FRAC_1_SQRT_2;
        assert_close(
            mid.rotate_dir(Vec3::new(1.0, 0.0, 0.0)),
            Vec3::new(half, half, 0.0),
            1e-12,
        );
    }

    #[test]
    fn pose_interpolation_exact_at_waypoints() {
        let q = Quat::from_axis_angle(Vec3::new(0.0, 1.0, 0.0), 0.8);
        let w1 = Pose::new(q, Vec3::new(0.5, 0.0, 0.0)).unwrap();
        let traj = Trajectory {
            waypoints: vec![(0.0, Pose::identity()), (1.0, w1), (2.5, Pose::identity())],
        };
        assert_eq!(interpolate_pose(&traj, 1.0), w1);
        assert_eq!(interpolate_pose(&traj, 0.0), Pose::identity());
        assert_eq!(interpolate_pose(&traj, 2.5), Pose::identity());
    }

    #[test]
    fn scalar_interpolation_midpoint_and_clamp() {
        assert_eq!(interpolate_scalar(&[(0.0, 0.0), (1.0, 2.0)], 0.5), 1.0);
        assert_eq!(interpolate_scalar(&[(0.0, 3.0)], 10.0), 3.0);
        // Hand interpolation on the second segment of (0,0),(1,1),(3,5).
        assert_eq!(
            interpolate_scalar(&[(0.0, 0.0), (1.0, 1.0), (3.0, 5.0)], 2.0),
            3.0
        );
    }

    fn revolute_z() -> Joint {
        Joint {
            id: "j".into(),
            kind: JointKind::Revolute,
            parent_link: "a".into(),
            child_link: "b".into(),
            origin: Pose::identity(),
            axis: Vec3::new(0.0, 0.0, 1.0),
        }
    }

    #[test]
    fn revolute_transform_rotates_about_axis() {
        let pose = joint_transform(&revolute_z(), FRAC_PI_2);
        assert_close(
            pose.transform_point(Vec3::new(1.0, 0.0, 0.0)),
            Vec3::new(0.0, 1.0, 0.0),
            1e-12,
        );
    }

    #[test]
    fn prismatic_transform_translates_along_axis() {
        let mut joint = revolute_z();
        joint.kind = JointKind::Prismatic;
        joint.axis = Vec3::new(1.0, 0.0, 0.0);
        let pose = joint_transform(&joint, 0.3);
        assert_close(
            pose.transform_point(Vec3::ZERO),
            Vec3::new(0.3, 0.0, 0.0),
            1e-12,
        );
    }

    #[test]
    fn zero_displacement_gives_origin_pose() {
        let mut joint = revolute_z();
        joint.origin = Pose::from_translation(Vec3::new(0.0, 0.5, 0.0));
        assert_eq!(joint_transform(&joint, 0.0), joint.origin);
        joint.kind = JointKind::Prismatic;
        assert_eq!(joint_transform(&joint, 0.0), joint.origin);
    }

    fn two_link_robot() -> Robot {
        let j1 = Joint {
            id: "j1".into(),
            kind: JointKind::Revolute,
            parent_link: "base".into(),
            child_link: "mid".into(),
            origin: Pose::identity(),
            axis: Vec3::new(0.0, 0.0, 1.0),
        };
        let j2 = Joint {
            id: "j2".into(),
            kind: JointKind::Prismatic,
            parent_link: "mid".into(),
            child_link: "end".into(),
            origin: Pose::identity(),
            axis: Vec3::new(1.0, 0.0, 0.0),
        };
        let mut joint_trajectories = BTreeMap::new();
        joint_trajectories.insert("j1".to_string(), vec![(0.0, FRAC_PI_2)]);
        joint_trajectories.insert("j2".to_string(), vec![(0.0, 1.0)]);
        Robot {
            id: "arm".into(),
            base_pose: Pose::identity(),
            links: vec!["base".into(), "mid".into(), "end".into()],
            joints: vec![j1, j2],
            joint_trajectories,
        }
    }

    #[test]
    fn zero_joint_robot_reports_base_pose() {
        let robot = Robot {
            id: "slab".into(),
            base_pose: Pose::from_translation(Vec3::new(0.0, 0.0, 2.0)),
            links: vec!["base".into()],
            joints: vec![],
            joint_trajectories: BTreeMap::new(),
        };
        let poses = forward_kinematics(&robot, 0.0);
        assert_eq!(poses.len(), 1);
        assert_eq!(poses["base"], robot.base_pose);
    }

    #[test]
    fn prismatic_joint_follows_trajectory() {
        let mut robot = two_link_robot();
        robot.joints.truncate(1);
        robot.joints[0].kind = JointKind::Prismatic;
        robot.joint_trajectories.remove("j2");
        robot
            .joint_trajectories
            .insert("j1".to_string(), vec![(0.0, 0.0), (1.0, -1.0)]);
        robot.links = vec!["base".into(), "mid".into()];
        let poses = forward_kinematics(&robot, 0.5);
        assert_close(poses["mid"].translation, Vec3::new(0.0, 0.0, -0.5), 1e-12);
    }

    #[test]
    fn two_link_chain_composes_by_hand() {
        // Rotate 90° about z at the base, then translate 1 m along local x:
        // the end link lands at (0, 1, 0).
        let poses = forward_kinematics(&two_link_robot(), 0.0);
        assert_close(poses["end"].translation, Vec3::new(0.0, 1.0, 0.0), 1e-12);
    }

    #[test]
    fn constant_trajectories_are_time_invariant() {
        let robot = two_link_robot();
        let a = forward_kinematics(&robot, 0.0);
        let b = forward_kinematics(&robot, 123.4);
        assert_eq!(a, b);
    }

    fn patch_with_taxels(attachment: Attachment) -> World {
        let taxel = |x: f64| Taxel {
            rest_center: Vec3::new(x, 0.0, 0.0),
            normal: Vec3::new(0.0, 0.0, 1.0),
            radius: 0.002,
            stiffness: 100.0,
            damping: 0.0,
            max_deflection: 0.005,
            grid_index: None,
        };
        World {
            gravity: Vec3::new(0.0, 0.0, -9.81),
            dt: 0.01,
            duration: 0.0,
            patches: vec![SkinPatch {
                id: "p".into(),
                attachment,
                taxels: vec![taxel(0.0), taxel(0.01)],
                grid_dims: None,
            }],
            objects: vec![],
            robots: vec![],
        }
    }

    #[test]
    fn world_fixed_identity_patch_passes_through() {
        let world = patch_with_taxels(Attachment::WorldFixed(Pose::identity()));
        let frames = world_taxel_frames(&world, 0.0);
        assert_eq!(frames[0].rest_center_world, Vec3::ZERO);
        assert_eq!(frames[1].rest_center_world, Vec3::new(0.01, 0.0, 0.0));
        assert_eq!(frames[0].normal_world, Vec3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn translated_patch_shifts_centers_not_normals() {
        let world = patch_with_taxels(Attachment::WorldFixed(Pose::from_translation(Vec3::new(
            0.0, 0.0, 1.0,
        ))));
        let frames = world_taxel_frames(&world, 0.0);
        assert_close(frames[0].rest_center_world, Vec3::new(0.0, 0.0, 1.0), 1e-12);
        assert_close(frames[0].normal_world, Vec3::new(0.0, 0.0, 1.0), 1e-12);
    }

    #[test]
    fn rotated_patch_flips_normals() {
        let flip = Quat::from_axis_angle(Vec3::new(1.0, 0.0, 0.0), std::f64::consts::PI);
        let world = patch_with_taxels(Attachment::WorldFixed(Pose::from_rotation(flip).unwrap()));
        let frames = world_taxel_frames(&world, 0.0);
        assert_close(frames[0].normal_world, Vec3::new(0.0, 0.0, -1.0), 1e-12);
    }

    fn ball(mode: ObjectMode) -> SphereUnionObject {
        SphereUnionObject {
            id: "ball".into(),
            spheres: vec![
                Sphere {
                    center: Vec3::ZERO,
                    radius: 0.01,
                },
                Sphere {
                    center: Vec3::new(0.02, 0.0, 0.0),
                    radius: 0.015,
                },
            ],
            mode,
        }
    }

    #[test]
    fn fixed_object_positions_are_time_invariant() {
        let mut world = patch_with_taxels(Attachment::WorldFixed(Pose::identity()));
        world
            .objects
            .push(ball(ObjectMode::Fixed(Pose::from_translation(Vec3::new(
                0.0, 0.0, 0.05,
            )))));
        let offsets = BTreeMap::new();
        let a = object_sphere_positions(&world, 0.0, &offsets).unwrap();
        let b = object_sphere_positions(&world, 9.0, &offsets).unwrap();
        assert_eq!(a, b);
        assert_close(a[0].center, Vec3::new(0.0, 0.0, 0.05), 1e-12);
    }

    #[test]
    fn settle_offset_translates_along_gravity_direction() {
        let mut world = patch_with_taxels(Attachment::WorldFixed(Pose::identity()));
        world.objects.push(ball(ObjectMode::Settle {
            initial: Pose::identity(),
            mass: 1.0,
        }));
        let mut offsets = BTreeMap::new();
        offsets.insert("ball".to_string(), 0.01);
        let spheres = object_sphere_positions(&world, 0.0, &offsets).unwrap();
        assert_close(spheres[0].center, Vec3::new(0.0, 0.0, -0.01), 1e-12);
        assert_close(spheres[1].center, Vec3::new(0.02, 0.0, -0.01), 1e-12);
    }

    #[test]
    fn missing_settle_offset_defaults_to_zero() {
        let mut world = patch_with_taxels(Attachment::WorldFixed(Pose::identity()));
        world.objects.push(ball(ObjectMode::Settle {
            initial: Pose::from_translation(Vec3::new(0.0, 0.0, 0.05)),
            mass: 1.0,
        }));
        let spheres = object_sphere_positions(&world, 0.0, &BTreeMap::new()).unwrap();
        assert_close(spheres[0].center, Vec3::new(0.0, 0.0, 0.05), 1e-12);
    }

    #[test]
    fn zero_gravity_with_settle_object_fails() {
        let mut world = patch_with_taxels(Attachment::WorldFixed(Pose::identity()));
        world.gravity = Vec3::ZERO;
        world.objects.push(ball(ObjectMode::Settle {
            initial: Pose::identity(),
            mass: 1.0,
        }));
        let offsets = BTreeMap::new();
        assert!(object_sphere_positions(&world, 0.0, &offsets).is_err());
    }

    #[test]
    fn scripted_object_follows_interpolated_pose() {
        // Midpoint of a trajectory that translates by (0.1, 0, 0) and rotates
        // 90° about z: spheres map through the half-pose computed by hand.
        let q90 = Quat::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), FRAC_PI_2);
        let mut world = patch_with_taxels(Attachment::WorldFixed(Pose::identity()));
        world.objects.push(ball(ObjectMode::Scripted(Trajectory {
            waypoints: vec![
                (0.0, Pose::identity()),
                (2.0, Pose::new(q90, Vec3::new(0.1, 0.0, 0.0)).unwrap()),
            ],
        })));
        let offsets = BTreeMap::new();
        let spheres = object_sphere_positions(&world, 1.0, &offsets).unwrap();
        // Half pose: rotation 45° about z, translation (0.05, 0, 0).
        let q45 = Quat::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), FRAC_PI_2 / 2.0);
        let expect = q45.rotate(Vec3::new(0.02, 0.0, 0.0)) + Vec3::new(0.05, 0.0, 0.0);
        assert_close(spheres[1].center, expect, 1e-12);
    }

    #[test]
    fn rigid_maps_preserve_pairwise_distances() {
        let q = Quat::from_axis_angle(Vec3::new(0.3, -0.5, 0.81).normalized().unwrap(), 1.234);
        let mut world = patch_with_taxels(Attachment::WorldFixed(Pose::identity()));
        world.objects.push(ball(ObjectMode::Fixed(
            Pose::new(q, Vec3::new(0.4, -0.2, 0.9)).unwrap(),
        )));
        let offsets = BTreeMap::new();
        let spheres = object_sphere_positions(&world, 0.0, &offsets).unwrap();
        let body_dist = 0.02;
        let world_dist = (spheres[0].center - spheres[1].center).norm();
        assert!((world_dist - body_dist).abs() < 1e-9);
    }

    proptest::proptest! {
        #[test]
        fn prop_scripted_motion_preserves_distances_at_all_times(
            axis in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0),
            angle0 in -3.0f64..3.0,
            angle1 in -3.0f64..3.0,
            tx in -0.5f64..0.5,
            ty in -0.5f64..0.5,
            tz in -0.5f64..0.5,
            t in -1.0f64..4.0,
        ) {
            let Some(axis) = Vec3::new(axis.0, axis.1, axis.2).normalized() else {
                return Ok(());
            };
            let w0 = Pose::from_rotation(Quat::from_axis_angle(axis, angle0)).unwrap();
            let w1 = Pose::new(
                Quat::from_axis_angle(axis, angle1),
                Vec3::new(tx, ty, tz),
            ).unwrap();
            let mut world = patch_with_taxels(Attachment::WorldFixed(Pose::identity()));
            world.objects.push(ball(ObjectMode::Scripted(Trajectory {
                waypoints: vec![(0.0, w0), (2.0, w1)],
            })));
            let spheres = object_sphere_positions(&world, t, &BTreeMap::new()).unwrap();
            let world_dist = (spheres[0].center - spheres[1].center).norm();
            proptest::prop_assert!((world_dist - 0.02).abs() < 1e-9);
        }
    }
}
