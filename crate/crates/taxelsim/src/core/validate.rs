//! World invariant checking. Violations are values, not errors: a caller can
//! collect and report every problem in one pass.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::core::{
    Attachment, ObjectMode, Pose, Robot, SkinPatch, SphereUnionObject, Taxel, UNIT_TOL, Vec3, World,
};

/// A single invariant violation, identified by the dotted path of the
/// offending field (e.g. `objects[2].spheres[0].radius`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Check every model invariant of a world.
///
/// Returns an empty list iff the world is valid. The list is deterministic:
/// violations appear in field traversal order.
pub fn validate_world(world: &World) -> Vec<Violation> {
    let mut v = Vec::new();

    if !(world.dt.is_finite() && world.dt > 0.0) {
        v.push(Violation::new(
            "world.dt",
            format!("must be finite and > 0, got {}", world.dt),
        ));
    }
    if !(world.duration.is_finite() && world.duration >= 0.0) {
        v.push(Violation::new(
            "world.duration",
            format!("must be finite and >= 0, got {}", world.duration),
        ));
    }
    if !world.gravity.is_finite() {
        v.push(Violation::new("world.gravity", "components must be finite"));
    }

    check_unique_ids(
        &mut v,
        world.patches.iter().map(|p| p.id.as_str()),
        "patches",
    );
    check_unique_ids(
        &mut v,
        world.objects.iter().map(|o| o.id.as_str()),
        "objects",
    );
    check_unique_ids(&mut v, world.robots.iter().map(|r| r.id.as_str()), "robots");

    for (i, patch) in world.patches.iter().enumerate() {
        check_patch(&mut v, world, patch, &format!("patches[{i}]"));
    }
    for (i, object) in world.objects.iter().enumerate() {
        check_object(&mut v, object, &format!("objects[{i}]"));
    }
    for (i, robot) in world.robots.iter().enumerate() {
        check_robot(&mut v, robot, &format!("robots[{i}]"));
    }

    v
}

fn check_unique_ids<'a>(
    v: &mut Vec<Violation>,
    ids: impl Iterator<Item = &'a str>,
    category: &str,
) {
    let mut seen = BTreeSet::new();
    for (i, id) in ids.enumerate() {
        if id.is_empty() {
            v.push(Violation::new(
                format!("{category}[{i}].id"),
                "id must be nonempty",
            ));
        } else if !seen.insert(id) {
            v.push(Violation::new(
                format!("{category}[{i}].id"),
                format!("duplicate id `{id}`"),
            ));
        }
    }
}

fn check_pose(v: &mut Vec<Violation>, pose: &Pose, path: &str) {
    if !pose.translation.is_finite() {
        v.push(Violation::new(
            format!("{path}.translation"),
            "components must be finite",
        ));
    }
    if !pose.rotation.is_finite() || (pose.rotation.norm() - 1.0).abs() > UNIT_TOL {
        v.push(Violation::new(
            format!("{path}.rotation"),
            format!("must be a unit quaternion (norm {})", pose.rotation.norm()),
        ));
    }
}

fn check_unit_vector(v: &mut Vec<Violation>, dir: Vec3, path: &str) {
    if !dir.is_finite() || (dir.norm() - 1.0).abs() > UNIT_TOL {
        v.push(Violation::new(
            path,
            format!("must be a unit vector (norm {})", dir.norm()),
        ));
    }
}

fn check_positive(v: &mut Vec<Violation>, value: f64, path: &str) {
    if !(value.is_finite() && value > 0.0) {
        v.push(Violation::new(
            path,
            format!("must be finite and > 0, got {value}"),
        ));
    }
}

fn check_taxel(v: &mut Vec<Violation>, taxel: &Taxel, path: &str) {
    if !taxel.rest_center.is_finite() {
        v.push(Violation::new(
            format!("{path}.rest_center"),
            "components must be finite",
        ));
    }
    check_unit_vector(v, taxel.normal, &format!("{path}.normal"));
    check_positive(v, taxel.radius, &format!("{path}.radius"));
    check_positive(v, taxel.stiffness, &format!("{path}.stiffness"));
    check_positive(v, taxel.max_deflection, &format!("{path}.max_deflection"));
    if !(taxel.damping.is_finite() && taxel.damping >= 0.0) {
        v.push(Violation::new(
            format!("{path}.damping"),
            format!("must be finite and >= 0, got {}", taxel.damping),
        ));
    }
}

fn check_patch(v: &mut Vec<Violation>, world: &World, patch: &SkinPatch, path: &str) {
    match &patch.attachment {
        Attachment::WorldFixed(pose) => check_pose(v, pose, &format!("{path}.attachment.pose")),
        Attachment::LinkAttached { robot, link, pose } => {
            match world.robot(robot) {
                None => v.push(Violation::new(
                    format!("{path}.attachment.robot"),
                    format!("references unknown robot `{robot}`"),
                )),
                Some(r) if !r.links.iter().any(|l| l == link) => v.push(Violation::new(
                    format!("{path}.attachment.link"),
                    format!("robot `{robot}` has no link `{link}`"),
                )),
                Some(_) => {}
            }
            check_pose(v, pose, &format!("{path}.attachment.pose"));
        }
    }

    for (j, taxel) in patch.taxels.iter().enumerate() {
        check_taxel(v, taxel, &format!("{path}.taxels[{j}]"));
    }

    if let Some((rows, cols)) = patch.grid_dims {
        if rows == 0 || cols == 0 {
            v.push(Violation::new(
                format!("{path}.grid_dims"),
                "rows and cols must be > 0",
            ));
            return;
        }
        let mut seen = BTreeSet::new();
        let mut prev: Option<(usize, usize)> = None;
        for (j, taxel) in patch.taxels.iter().enumerate() {
            let tpath = format!("{path}.taxels[{j}].grid_index");
            let Some((r, c)) = taxel.grid_index else {
                v.push(Violation::new(
                    tpath,
                    "required when the patch declares grid_dims",
                ));
                continue;
            };
            if r >= rows || c >= cols {
                v.push(Violation::new(
                    tpath,
                    format!("({r}, {c}) outside grid_dims ({rows}, {cols})"),
                ));
                continue;
            }
            if !seen.insert((r, c)) {
                v.push(Violation::new(
                    tpath,
                    format!("duplicate grid index ({r}, {c})"),
                ));
                continue;
            }
            // Canonical signal ordering: row-major over grid indices.
            if let Some(p) = prev
                && (r, c) <= p
            {
                v.push(Violation::new(
                    tpath,
                    format!("taxels must be declared in row-major order; ({r}, {c}) follows {p:?}"),
                ));
            }
            prev = Some((r, c));
        }
    }
}

fn check_object(v: &mut Vec<Violation>, object: &SphereUnionObject, path: &str) {
    if object.spheres.is_empty() {
        v.push(Violation::new(
            format!("{path}.spheres"),
            "at least one sphere required",
        ));
    }
    for (j, sphere) in object.spheres.iter().enumerate() {
        if !sphere.center.is_finite() {
            v.push(Violation::new(
                format!("{path}.spheres[{j}].center"),
                "components must be finite",
            ));
        }
        check_positive(v, sphere.radius, &format!("{path}.spheres[{j}].radius"));
    }
    match &object.mode {
        ObjectMode::Fixed(pose) => check_pose(v, pose, &format!("{path}.pose")),
        ObjectMode::Scripted(traj) => {
            if traj.waypoints.is_empty() {
                v.push(Violation::new(
                    format!("{path}.waypoints"),
                    "at least one waypoint required",
                ));
            }
            let mut prev = f64::NEG_INFINITY;
            for (k, (t, pose)) in traj.waypoints.iter().enumerate() {
                if !(t.is_finite() && *t >= 0.0) {
                    v.push(Violation::new(
                        format!("{path}.waypoints[{k}].time"),
                        format!("must be finite and >= 0, got {t}"),
                    ));
                } else if *t <= prev {
                    v.push(Violation::new(
                        format!("{path}.waypoints[{k}].time"),
                        "waypoint times must be strictly increasing",
                    ));
                }
                prev = *t;
                check_pose(v, pose, &format!("{path}.waypoints[{k}].pose"));
            }
        }
        ObjectMode::Settle { initial, mass } => {
            check_pose(v, initial, &format!("{path}.pose"));
            check_positive(v, *mass, &format!("{path}.mass"));
        }
    }
}

fn check_robot(v: &mut Vec<Violation>, robot: &Robot, path: &str) {
    check_pose(v, &robot.base_pose, &format!("{path}.base_pose"));

    if robot.links.is_empty() {
        v.push(Violation::new(
            format!("{path}.links"),
            "at least one link required",
        ));
        return;
    }
    let mut link_set = BTreeSet::new();
    for (j, link) in robot.links.iter().enumerate() {
        if link.is_empty() {
            v.push(Violation::new(
                format!("{path}.links[{j}]"),
                "link id must be nonempty",
            ));
        } else if !link_set.insert(link.as_str()) {
            v.push(Violation::new(
                format!("{path}.links[{j}]"),
                format!("duplicate link id `{link}`"),
            ));
        }
    }

    let mut joint_ids = BTreeSet::new();
    let mut structure_ok = true;
    for (j, joint) in robot.joints.iter().enumerate() {
        let jpath = format!("{path}.joints[{j}]");
        if joint.id.is_empty() {
            v.push(Violation::new(
                format!("{jpath}.id"),
                "joint id must be nonempty",
            ));
        } else if !joint_ids.insert(joint.id.as_str()) {
            v.push(Violation::new(
                format!("{jpath}.id"),
                format!("duplicate joint id `{}`", joint.id),
            ));
        }
        if joint.parent_link == joint.child_link {
            v.push(Violation::new(
                jpath.clone(),
                "parent and child link must differ",
            ));
            structure_ok = false;
        }
        for (field, link) in [
            ("parent_link", &joint.parent_link),
            ("child_link", &joint.child_link),
        ] {
            if !link_set.contains(link.as_str()) {
                v.push(Violation::new(
                    format!("{jpath}.{field}"),
                    format!("references unknown link `{link}`"),
                ));
                structure_ok = false;
            }
        }
        check_unit_vector(v, joint.axis, &format!("{jpath}.axis"));
        check_pose(v, &joint.origin, &format!("{jpath}.origin"));
    }

    if structure_ok {
        check_tree_structure(v, robot, path);
    }

    for joint in &robot.joints {
        let jid = &joint.id;
        match robot.joint_trajectories.get(jid) {
            None => v.push(Violation::new(
                format!("{path}.joint_trajectories.{jid}"),
                "every joint needs a trajectory (a single constant waypoint suffices)",
            )),
            Some(wps) => {
                let tpath = format!("{path}.joint_trajectories.{jid}");
                if wps.is_empty() {
                    v.push(Violation::new(tpath, "at least one waypoint required"));
                    continue;
                }
                let mut prev = f64::NEG_INFINITY;
                for (k, (t, q)) in wps.iter().enumerate() {
                    if !t.is_finite() || *t <= prev {
                        v.push(Violation::new(
                            format!("{tpath}[{k}].time"),
                            "waypoint times must be strictly increasing",
                        ));
                    }
                    prev = *t;
                    if !q.is_finite() {
                        v.push(Violation::new(format!("{tpath}[{k}].q"), "must be finite"));
                    }
                }
            }
        }
    }
    for jid in robot.joint_trajectories.keys() {
        if !robot.joints.iter().any(|j| &j.id == jid) {
            v.push(Violation::new(
                format!("{path}.joint_trajectories.{jid}"),
                "trajectory references unknown joint",
            ));
        }
    }
}

/// The joint graph must form a tree rooted at a single base link: every link
/// is the child of at most one joint, exactly one link has no parent, and all
/// links are reachable from it.
fn check_tree_structure(v: &mut Vec<Violation>, robot: &Robot, path: &str) {
    let mut parent_of: BTreeMap<&str, &str> = BTreeMap::new();
    for joint in &robot.joints {
        if parent_of
            .insert(joint.child_link.as_str(), joint.parent_link.as_str())
            .is_some()
        {
            v.push(Violation::new(
                format!("{path}.joints"),
                format!(
                    "link `{}` is the child of more than one joint",
                    joint.child_link
                ),
            ));
            return;
        }
    }
    let roots: Vec<&str> = robot
        .links
        .iter()
        .map(|l| l.as_str())
        .filter(|l| !parent_of.contains_key(l))
        .collect();
    if roots.len() != 1 {
        v.push(Violation::new(
            format!("{path}.joints"),
            format!(
                "joint graph must have exactly one base link, found {}",
                roots.len()
            ),
        ));
        return;
    }
    // Reachability from the root; with each link a child at most once, full
    // reachability implies the graph is a tree.
    let mut reached: BTreeSet<&str> = BTreeSet::new();
    reached.insert(roots[0]);
    let mut frontier = vec![roots[0]];
    while let Some(link) = frontier.pop() {
        for joint in &robot.joints {
            if joint.parent_link == link && reached.insert(joint.child_link.as_str()) {
                frontier.push(joint.child_link.as_str());
            }
        }
    }
    for link in &robot.links {
        if !reached.contains(link.as_str()) {
            v.push(Violation::new(
                format!("{path}.joints"),
                format!("link `{link}` is not reachable from the base link"),
            ));
        }
    }
}
