//! Scene files: a JSON schema describing the world, parsed with full field
//! paths in every error, and serialized back losslessly.
//!
//! Top-level keys: `world{gravity, dt, duration}`, `patches[]`, `objects[]`,
//! `robots[]`. Grid patches may be declared compactly (`grid{rows, cols,
//! spacing, taxel{...}}`) and are expanded to explicit taxels in row-major
//! order with rest centers `(col·spacing, row·spacing, 0)` and normals
//! `(0,0,1)` in the patch frame. All units are SI.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::{Map, Number, Value};

use crate::core::{
    Attachment, Joint, JointKind, ObjectMode, Pose, Quat, Robot, SkinPatch, Sphere,
    SphereUnionObject, Taxel, Trajectory, Vec3, Violation, World, validate_world,
};

/// Scene loading failure.
#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("cannot read scene file: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("scene violates {} model invariant(s)", .0.len())]
    Invalid(Vec<Violation>),
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> SceneError {
    SceneError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

/// Read and parse a scene file.
pub fn load_scene(path: &Path) -> Result<World, SceneError> {
    parse_scene(&fs::read_to_string(path)?)
}

/// Parse a scene document into a validated [`World`].
pub fn parse_scene(text: &str) -> Result<World, SceneError> {
    let root: Value = serde_json::from_str(text).map_err(|e| SceneError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let world = world_from_json(&root)?;
    let violations = validate_world(&world);
    if !violations.is_empty() {
        return Err(SceneError::Invalid(violations));
    }
    Ok(world)
}

// ---------------------------------------------------------------- reading

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, SceneError> {
    v.as_object()
        .ok_or_else(|| schema(path, "expected an object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, SceneError> {
    v.as_array()
        .ok_or_else(|| schema(path, "expected an array"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64, SceneError> {
    v.as_f64().ok_or_else(|| schema(path, "expected a number"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize, SceneError> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| schema(path, "expected a nonnegative integer"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str, SceneError> {
    v.as_str().ok_or_else(|| schema(path, "expected a string"))
}

fn require<'a>(
    obj: &'a Map<String, Value>,
    path: &str,
    key: &str,
) -> Result<&'a Value, SceneError> {
    obj.get(key)
        .ok_or_else(|| schema(format!("{path}.{key}"), "missing required field"))
}

fn reject_unknown_keys(
    obj: &Map<String, Value>,
    path: &str,
    allowed: &[&str],
) -> Result<(), SceneError> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(schema(format!("{path}.{key}"), "unknown field"));
        }
    }
    Ok(())
}

fn vec3_from(v: &Value, path: &str) -> Result<Vec3, SceneError> {
    let arr = as_array(v, path)?;
    if arr.len() != 3 {
        return Err(schema(
            path,
            format!("expected 3 numbers, got {}", arr.len()),
        ));
    }
    Ok(Vec3::new(
        as_f64(&arr[0], &format!("{path}[0]"))?,
        as_f64(&arr[1], &format!("{path}[1]"))?,
        as_f64(&arr[2], &format!("{path}[2]"))?,
    ))
}

/// Pose object: `{"translation": [x,y,z], "rotation": [w,x,y,z]}`, both
/// optional (zero translation, identity rotation).
fn pose_from(v: &Value, path: &str) -> Result<Pose, SceneError> {
    let obj = as_object(v, path)?;
    reject_unknown_keys(obj, path, &["translation", "rotation"])?;
    let translation = match obj.get("translation") {
        Some(t) => vec3_from(t, &format!("{path}.translation"))?,
        None => Vec3::ZERO,
    };
    let rotation = match obj.get("rotation") {
        Some(r) => {
            let rpath = format!("{path}.rotation");
            let arr = as_array(r, &rpath)?;
            if arr.len() != 4 {
                return Err(schema(
                    &rpath,
                    format!("expected 4 numbers (w, x, y, z), got {}", arr.len()),
                ));
            }
            Quat::new(
                as_f64(&arr[0], &format!("{rpath}[0]"))?,
                as_f64(&arr[1], &format!("{rpath}[1]"))?,
                as_f64(&arr[2], &format!("{rpath}[2]"))?,
                as_f64(&arr[3], &format!("{rpath}[3]"))?,
            )
        }
        None => Quat::IDENTITY,
    };
    Pose::new(rotation, translation)
        .ok_or_else(|| schema(path, "rotation must be a nonzero finite quaternion"))
}

fn opt_pose(obj: &Map<String, Value>, path: &str, key: &str) -> Result<Pose, SceneError> {
    match obj.get(key) {
        Some(v) => pose_from(v, &format!("{path}.{key}")),
        None => Ok(Pose::identity()),
    }
}

fn world_from_json(root: &Value) -> Result<World, SceneError> {
    let obj = as_object(root, "scene")?;
    reject_unknown_keys(obj, "scene", &["world", "patches", "objects", "robots"])?;

    let w = as_object(require(obj, "scene", "world")?, "world")?;
    reject_unknown_keys(w, "world", &["gravity", "dt", "duration"])?;
    let gravity = vec3_from(require(w, "world", "gravity")?, "world.gravity")?;
    let dt = as_f64(require(w, "world", "dt")?, "world.dt")?;
    let duration = as_f64(require(w, "world", "duration")?, "world.duration")?;

    let mut patches = Vec::new();
    if let Some(v) = obj.get("patches") {
        for (i, p) in as_array(v, "patches")?.iter().enumerate() {
            patches.push(patch_from(p, &format!("patches[{i}]"))?);
        }
    }
    let mut objects = Vec::new();
    if let Some(v) = obj.get("objects") {
        for (i, o) in as_array(v, "objects")?.iter().enumerate() {
            objects.push(object_from(o, &format!("objects[{i}]"))?);
        }
    }
    let mut robots = Vec::new();
    if let Some(v) = obj.get("robots") {
        for (i, r) in as_array(v, "robots")?.iter().enumerate() {
            robots.push(robot_from(r, &format!("robots[{i}]"))?);
        }
    }

    Ok(World {
        gravity,
        dt,
        duration,
        patches,
        objects,
        robots,
    })
}

fn attachment_from(v: &Value, path: &str) -> Result<Attachment, SceneError> {
    let obj = as_object(v, path)?;
    let kind = as_str(require(obj, path, "type")?, &format!("{path}.type"))?;
    match kind {
        "world" => {
            reject_unknown_keys(obj, path, &["type", "pose"])?;
            Ok(Attachment::WorldFixed(opt_pose(obj, path, "pose")?))
        }
        "link" => {
            reject_unknown_keys(obj, path, &["type", "robot", "link", "pose"])?;
            Ok(Attachment::LinkAttached {
                robot: as_str(require(obj, path, "robot")?, &format!("{path}.robot"))?.to_string(),
                link: as_str(require(obj, path, "link")?, &format!("{path}.link"))?.to_string(),
                pose: opt_pose(obj, path, "pose")?,
            })
        }
        other => Err(schema(
            format!("{path}.type"),
            format!("expected \"world\" or \"link\", got \"{other}\""),
        )),
    }
}

fn taxel_from(v: &Value, path: &str) -> Result<Taxel, SceneError> {
    let obj = as_object(v, path)?;
    reject_unknown_keys(
        obj,
        path,
        &[
            "rest_center",
            "normal",
            "radius",
            "stiffness",
            "damping",
            "max_deflection",
            "grid_index",
        ],
    )?;
    let grid_index = match obj.get("grid_index") {
        None => None,
        Some(g) => {
            let gpath = format!("{path}.grid_index");
            let arr = as_array(g, &gpath)?;
            if arr.len() != 2 {
                return Err(schema(&gpath, "expected [row, col]"));
            }
            Some((
                as_usize(&arr[0], &format!("{gpath}[0]"))?,
                as_usize(&arr[1], &format!("{gpath}[1]"))?,
            ))
        }
    };
    Ok(Taxel {
        rest_center: vec3_from(
            require(obj, path, "rest_center")?,
            &format!("{path}.rest_center"),
        )?,
        normal: vec3_from(require(obj, path, "normal")?, &format!("{path}.normal"))?,
        radius: as_f64(require(obj, path, "radius")?, &format!("{path}.radius"))?,
        stiffness: as_f64(
            require(obj, path, "stiffness")?,
            &format!("{path}.stiffness"),
        )?,
        damping: match obj.get("damping") {
            Some(d) => as_f64(d, &format!("{path}.damping"))?,
            None => 0.0,
        },
        max_deflection: as_f64(
            require(obj, path, "max_deflection")?,
            &format!("{path}.max_deflection"),
        )?,
        grid_index,
    })
}

fn patch_from(v: &Value, path: &str) -> Result<SkinPatch, SceneError> {
    let obj = as_object(v, path)?;
    reject_unknown_keys(
        obj,
        path,
        &["id", "attachment", "grid", "taxels", "grid_dims"],
    )?;
    let id = as_str(require(obj, path, "id")?, &format!("{path}.id"))?.to_string();
    let attachment = match obj.get("attachment") {
        Some(a) => attachment_from(a, &format!("{path}.attachment"))?,
        None => Attachment::WorldFixed(Pose::identity()),
    };

    match (obj.get("grid"), obj.get("taxels")) {
        (Some(_), Some(_)) => Err(schema(path, "declare either `grid` or `taxels`, not both")),
        (None, None) => Err(schema(path, "a patch needs a `grid` or explicit `taxels`")),
        (Some(g), None) => {
            if obj.contains_key("grid_dims") {
                return Err(schema(
                    format!("{path}.grid_dims"),
                    "implied by `grid`; only valid with explicit `taxels`",
                ));
            }
            let gpath = format!("{path}.grid");
            let grid = as_object(g, &gpath)?;
            reject_unknown_keys(grid, &gpath, &["rows", "cols", "spacing", "taxel"])?;
            let rows = as_usize(require(grid, &gpath, "rows")?, &format!("{gpath}.rows"))?;
            let cols = as_usize(require(grid, &gpath, "cols")?, &format!("{gpath}.cols"))?;
            let spacing = as_f64(
                require(grid, &gpath, "spacing")?,
                &format!("{gpath}.spacing"),
            )?;
            let tpath = format!("{gpath}.taxel");
            let t = as_object(require(grid, &gpath, "taxel")?, &tpath)?;
            reject_unknown_keys(
                t,
                &tpath,
                &["radius", "stiffness", "damping", "max_deflection"],
            )?;
            let radius = as_f64(require(t, &tpath, "radius")?, &format!("{tpath}.radius"))?;
            let stiffness = as_f64(
                require(t, &tpath, "stiffness")?,
                &format!("{tpath}.stiffness"),
            )?;
            let damping = match t.get("damping") {
                Some(d) => as_f64(d, &format!("{tpath}.damping"))?,
                None => 0.0,
            };
            let max_deflection = as_f64(
                require(t, &tpath, "max_deflection")?,
                &format!("{tpath}.max_deflection"),
            )?;
            if rows == 0 || cols == 0 {
                return Err(schema(&gpath, "rows and cols must be > 0"));
            }
            let mut taxels = Vec::with_capacity(rows * cols);
            for row in 0..rows {
                for col in 0..cols {
                    taxels.push(Taxel {
                        rest_center: Vec3::new(col as f64 * spacing, row as f64 * spacing, 0.0),
                        normal: Vec3::new(0.0, 0.0, 1.0),
                        radius,
                        stiffness,
                        damping,
                        max_deflection,
                        grid_index: Some((row, col)),
                    });
                }
            }
            Ok(SkinPatch {
                id,
                attachment,
                taxels,
                grid_dims: Some((rows, cols)),
            })
        }
        (None, Some(ts)) => {
            let mut taxels = Vec::new();
            for (j, t) in as_array(ts, &format!("{path}.taxels"))?.iter().enumerate() {
                taxels.push(taxel_from(t, &format!("{path}.taxels[{j}]"))?);
            }
            let grid_dims = match obj.get("grid_dims") {
                None => None,
                Some(g) => {
                    let gpath = format!("{path}.grid_dims");
                    let arr = as_array(g, &gpath)?;
                    if arr.len() != 2 {
                        return Err(schema(&gpath, "expected [rows, cols]"));
                    }
                    Some((
                        as_usize(&arr[0], &format!("{gpath}[0]"))?,
                        as_usize(&arr[1], &format!("{gpath}[1]"))?,
                    ))
                }
            };
            Ok(SkinPatch {
                id,
                attachment,
                taxels,
                grid_dims,
            })
        }
    }
}

fn object_from(v: &Value, path: &str) -> Result<SphereUnionObject, SceneError> {
    let obj = as_object(v, path)?;
    reject_unknown_keys(
        obj,
        path,
        &["id", "spheres", "mode", "pose", "waypoints", "mass"],
    )?;
    let id = as_str(require(obj, path, "id")?, &format!("{path}.id"))?.to_string();

    let mut spheres = Vec::new();
    for (j, s) in as_array(require(obj, path, "spheres")?, &format!("{path}.spheres"))?
        .iter()
        .enumerate()
    {
        let spath = format!("{path}.spheres[{j}]");
        let sobj = as_object(s, &spath)?;
        reject_unknown_keys(sobj, &spath, &["center", "radius"])?;
        spheres.push(Sphere {
            center: vec3_from(require(sobj, &spath, "center")?, &format!("{spath}.center"))?,
            radius: as_f64(require(sobj, &spath, "radius")?, &format!("{spath}.radius"))?,
        });
    }

    let mode_str = as_str(require(obj, path, "mode")?, &format!("{path}.mode"))?;
    let mode = match mode_str {
        "fixed" => {
            if obj.contains_key("waypoints") || obj.contains_key("mass") {
                return Err(schema(path, "fixed mode takes only `pose`"));
            }
            ObjectMode::Fixed(opt_pose(obj, path, "pose")?)
        }
        "trajectory" => {
            if obj.contains_key("pose") || obj.contains_key("mass") {
                return Err(schema(path, "trajectory mode takes only `waypoints`"));
            }
            let mut waypoints = Vec::new();
            for (k, wp) in as_array(
                require(obj, path, "waypoints")?,
                &format!("{path}.waypoints"),
            )?
            .iter()
            .enumerate()
            {
                let wpath = format!("{path}.waypoints[{k}]");
                let wobj = as_object(wp, &wpath)?;
                reject_unknown_keys(wobj, &wpath, &["time", "pose"])?;
                waypoints.push((
                    as_f64(require(wobj, &wpath, "time")?, &format!("{wpath}.time"))?,
                    pose_from(require(wobj, &wpath, "pose")?, &format!("{wpath}.pose"))?,
                ));
            }
            ObjectMode::Scripted(Trajectory { waypoints })
        }
        "settle" => {
            if obj.contains_key("waypoints") {
                return Err(schema(path, "settle mode takes `pose` and `mass`"));
            }
            ObjectMode::Settle {
                initial: opt_pose(obj, path, "pose")?,
                mass: as_f64(require(obj, path, "mass")?, &format!("{path}.mass"))?,
            }
        }
        other => {
            return Err(schema(
                format!("{path}.mode"),
                format!("expected \"fixed\", \"trajectory\" or \"settle\", got \"{other}\""),
            ));
        }
    };

    Ok(SphereUnionObject { id, spheres, mode })
}

fn robot_from(v: &Value, path: &str) -> Result<Robot, SceneError> {
    let obj = as_object(v, path)?;
    reject_unknown_keys(
        obj,
        path,
        &["id", "base_pose", "links", "joints", "joint_trajectories"],
    )?;
    let id = as_str(require(obj, path, "id")?, &format!("{path}.id"))?.to_string();
    let base_pose = opt_pose(obj, path, "base_pose")?;

    let mut links = Vec::new();
    for (j, l) in as_array(require(obj, path, "links")?, &format!("{path}.links"))?
        .iter()
        .enumerate()
    {
        links.push(as_str(l, &format!("{path}.links[{j}]"))?.to_string());
    }

    let mut joints = Vec::new();
    if let Some(js) = obj.get("joints") {
        for (j, jv) in as_array(js, &format!("{path}.joints"))?.iter().enumerate() {
            let jpath = format!("{path}.joints[{j}]");
            let jobj = as_object(jv, &jpath)?;
            reject_unknown_keys(
                jobj,
                &jpath,
                &["id", "kind", "parent_link", "child_link", "origin", "axis"],
            )?;
            let kind = match as_str(require(jobj, &jpath, "kind")?, &format!("{jpath}.kind"))? {
                "revolute" => JointKind::Revolute,
                "prismatic" => JointKind::Prismatic,
                other => {
                    return Err(schema(
                        format!("{jpath}.kind"),
                        format!("expected \"revolute\" or \"prismatic\", got \"{other}\""),
                    ));
                }
            };
            joints.push(Joint {
                id: as_str(require(jobj, &jpath, "id")?, &format!("{jpath}.id"))?.to_string(),
                kind,
                parent_link: as_str(
                    require(jobj, &jpath, "parent_link")?,
                    &format!("{jpath}.parent_link"),
                )?
                .to_string(),
                child_link: as_str(
                    require(jobj, &jpath, "child_link")?,
                    &format!("{jpath}.child_link"),
                )?
                .to_string(),
                origin: opt_pose(jobj, &jpath, "origin")?,
                axis: vec3_from(require(jobj, &jpath, "axis")?, &format!("{jpath}.axis"))?,
            });
        }
    }

    let mut joint_trajectories = BTreeMap::new();
    if let Some(ts) = obj.get("joint_trajectories") {
        let tpath = format!("{path}.joint_trajectories");
        for (jid, wps) in as_object(ts, &tpath)? {
            let jtpath = format!("{tpath}.{jid}");
            let mut waypoints = Vec::new();
            for (k, wp) in as_array(wps, &jtpath)?.iter().enumerate() {
                let wpath = format!("{jtpath}[{k}]");
                let wobj = as_object(wp, &wpath)?;
                reject_unknown_keys(wobj, &wpath, &["time", "q"])?;
                waypoints.push((
                    as_f64(require(wobj, &wpath, "time")?, &format!("{wpath}.time"))?,
                    as_f64(require(wobj, &wpath, "q")?, &format!("{wpath}.q"))?,
                ));
            }
            joint_trajectories.insert(jid.clone(), waypoints);
        }
    }

    Ok(Robot {
        id,
        base_pose,
        links,
        joints,
        joint_trajectories,
    })
}

// ------------------------------------------------------------- writing

fn num(value: f64, path: &str) -> Result<Value, SceneError> {
    Number::from_f64(value).map(Value::Number).ok_or_else(|| {
        schema(
            path,
            format!("non-finite number {value} cannot be serialized"),
        )
    })
}

fn vec3_json(v: Vec3, path: &str) -> Result<Value, SceneError> {
    Ok(Value::Array(vec![
        num(v.x, path)?,
        num(v.y, path)?,
        num(v.z, path)?,
    ]))
}

fn pose_json(p: &Pose, path: &str) -> Result<Value, SceneError> {
    let mut obj = Map::new();
    obj.insert("translation".into(), vec3_json(p.translation, path)?);
    obj.insert(
        "rotation".into(),
        Value::Array(vec![
            num(p.rotation.w, path)?,
            num(p.rotation.x, path)?,
            num(p.rotation.y, path)?,
            num(p.rotation.z, path)?,
        ]),
    );
    Ok(Value::Object(obj))
}

/// Serialize a world back to scene JSON. Grid patches are written with
/// explicit taxels; `parse_scene(serialize_scene(w))` reproduces `w`
/// field-for-field.
pub fn serialize_scene(world: &World) -> Result<String, SceneError> {
    let mut root = Map::new();

    let mut w = Map::new();
    w.insert("gravity".into(), vec3_json(world.gravity, "world.gravity")?);
    w.insert("dt".into(), num(world.dt, "world.dt")?);
    w.insert("duration".into(), num(world.duration, "world.duration")?);
    root.insert("world".into(), Value::Object(w));

    let mut patches = Vec::new();
    for (i, patch) in world.patches.iter().enumerate() {
        let path = format!("patches[{i}]");
        let mut p = Map::new();
        p.insert("id".into(), Value::String(patch.id.clone()));
        let mut a = Map::new();
        match &patch.attachment {
            Attachment::WorldFixed(pose) => {
                a.insert("type".into(), Value::String("world".into()));
                a.insert(
                    "pose".into(),
                    pose_json(pose, &format!("{path}.attachment.pose"))?,
                );
            }
            Attachment::LinkAttached { robot, link, pose } => {
                a.insert("type".into(), Value::String("link".into()));
                a.insert("robot".into(), Value::String(robot.clone()));
                a.insert("link".into(), Value::String(link.clone()));
                a.insert(
                    "pose".into(),
                    pose_json(pose, &format!("{path}.attachment.pose"))?,
                );
            }
        }
        p.insert("attachment".into(), Value::Object(a));
        let mut taxels = Vec::new();
        for (j, taxel) in patch.taxels.iter().enumerate() {
            let tpath = format!("{path}.taxels[{j}]");
            let mut t = Map::new();
            t.insert("rest_center".into(), vec3_json(taxel.rest_center, &tpath)?);
            t.insert("normal".into(), vec3_json(taxel.normal, &tpath)?);
            t.insert("radius".into(), num(taxel.radius, &tpath)?);
            t.insert("stiffness".into(), num(taxel.stiffness, &tpath)?);
            t.insert("damping".into(), num(taxel.damping, &tpath)?);
            t.insert("max_deflection".into(), num(taxel.max_deflection, &tpath)?);
            if let Some((r, c)) = taxel.grid_index {
                t.insert(
                    "grid_index".into(),
                    Value::Array(vec![Value::from(r as u64), Value::from(c as u64)]),
                );
            }
            taxels.push(Value::Object(t));
        }
        p.insert("taxels".into(), Value::Array(taxels));
        if let Some((rows, cols)) = patch.grid_dims {
            p.insert(
                "grid_dims".into(),
                Value::Array(vec![Value::from(rows as u64), Value::from(cols as u64)]),
            );
        }
        patches.push(Value::Object(p));
    }
    root.insert("patches".into(), Value::Array(patches));

    let mut objects = Vec::new();
    for (i, object) in world.objects.iter().enumerate() {
        let path = format!("objects[{i}]");
        let mut o = Map::new();
        o.insert("id".into(), Value::String(object.id.clone()));
        let mut spheres = Vec::new();
        for (j, sphere) in object.spheres.iter().enumerate() {
            let spath = format!("{path}.spheres[{j}]");
            let mut s = Map::new();
            s.insert("center".into(), vec3_json(sphere.center, &spath)?);
            s.insert("radius".into(), num(sphere.radius, &spath)?);
            spheres.push(Value::Object(s));
        }
        o.insert("spheres".into(), Value::Array(spheres));
        match &object.mode {
            ObjectMode::Fixed(pose) => {
                o.insert("mode".into(), Value::String("fixed".into()));
                o.insert("pose".into(), pose_json(pose, &format!("{path}.pose"))?);
            }
            ObjectMode::Scripted(traj) => {
                o.insert("mode".into(), Value::String("trajectory".into()));
                let mut wps = Vec::new();
                for (k, (t, pose)) in traj.waypoints.iter().enumerate() {
                    let wpath = format!("{path}.waypoints[{k}]");
                    let mut wp = Map::new();
                    wp.insert("time".into(), num(*t, &format!("{wpath}.time"))?);
                    wp.insert("pose".into(), pose_json(pose, &format!("{wpath}.pose"))?);
                    wps.push(Value::Object(wp));
                }
                o.insert("waypoints".into(), Value::Array(wps));
            }
            ObjectMode::Settle { initial, mass } => {
                o.insert("mode".into(), Value::String("settle".into()));
                o.insert("pose".into(), pose_json(initial, &format!("{path}.pose"))?);
                o.insert("mass".into(), num(*mass, &format!("{path}.mass"))?);
            }
        }
        objects.push(Value::Object(o));
    }
    root.insert("objects".into(), Value::Array(objects));

    let mut robots = Vec::new();
    for (i, robot) in world.robots.iter().enumerate() {
        let path = format!("robots[{i}]");
        let mut r = Map::new();
        r.insert("id".into(), Value::String(robot.id.clone()));
        r.insert(
            "base_pose".into(),
            pose_json(&robot.base_pose, &format!("{path}.base_pose"))?,
        );
        r.insert(
            "links".into(),
            Value::Array(
                robot
                    .links
                    .iter()
                    .map(|l| Value::String(l.clone()))
                    .collect(),
            ),
        );
        let mut joints = Vec::new();
        for (j, joint) in robot.joints.iter().enumerate() {
            let jpath = format!("{path}.joints[{j}]");
            let mut jo = Map::new();
            jo.insert("id".into(), Value::String(joint.id.clone()));
            jo.insert(
                "kind".into(),
                Value::String(
                    match joint.kind {
                        JointKind::Revolute => "revolute",
                        JointKind::Prismatic => "prismatic",
                    }
                    .into(),
                ),
            );
            jo.insert(
                "parent_link".into(),
                Value::String(joint.parent_link.clone()),
            );
            jo.insert("child_link".into(), Value::String(joint.child_link.clone()));
            jo.insert(
                "origin".into(),
                pose_json(&joint.origin, &format!("{jpath}.origin"))?,
            );
            jo.insert(
                "axis".into(),
                vec3_json(joint.axis, &format!("{jpath}.axis"))?,
            );
            joints.push(Value::Object(jo));
        }
        r.insert("joints".into(), Value::Array(joints));
        let mut trajectories = Map::new();
        for (jid, wps) in &robot.joint_trajectories {
            let tpath = format!("{path}.joint_trajectories.{jid}");
            let mut arr = Vec::new();
            for (k, (t, q)) in wps.iter().enumerate() {
                let mut wp = Map::new();
                wp.insert("time".into(), num(*t, &format!("{tpath}[{k}].time"))?);
                wp.insert("q".into(), num(*q, &format!("{tpath}[{k}].q"))?);
                arr.push(Value::Object(wp));
            }
            trajectories.insert(jid.clone(), Value::Array(arr));
        }
        r.insert("joint_trajectories".into(), Value::Object(trajectories));
        robots.push(Value::Object(r));
    }
    root.insert("robots".into(), Value::Array(robots));

    Ok(serde_json::to_string_pretty(&Value::Object(root)).expect("valid JSON value"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "world": { "gravity": [0, 0, -9.81], "dt": 0.001, "duration": 0.5 },
        "patches": [
            {
                "id": "palm",
                "grid": {
                    "rows": 2, "cols": 2, "spacing": 0.003,
                    "taxel": { "radius": 0.0015, "stiffness": 300.0, "damping": 2.0, "max_deflection": 0.002 }
                }
            }
        ]
    }"#;

    #[test]
    fn minimal_grid_world_expands_row_major() {
        let world = parse_scene(MINIMAL).unwrap();
        assert_eq!(world.patches.len(), 1);
        let patch = &world.patches[0];
        assert_eq!(patch.taxels.len(), 4);
        assert_eq!(patch.grid_dims, Some((2, 2)));
        assert_eq!(patch.taxels[0].grid_index, Some((0, 0)));
        assert_eq!(patch.taxels[1].grid_index, Some((0, 1)));
        assert_eq!(patch.taxels[2].grid_index, Some((1, 0)));
        assert_eq!(patch.taxels[1].rest_center, Vec3::new(0.003, 0.0, 0.0));
        assert_eq!(patch.taxels[2].rest_center, Vec3::new(0.0, 0.003, 0.0));
        assert_eq!(patch.taxels[0].normal, Vec3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn missing_dt_names_the_field() {
        let text = r#"{ "world": { "gravity": [0,0,-9.81], "duration": 1.0 } }"#;
        match parse_scene(text) {
            Err(SceneError::Schema { path, .. }) => assert_eq!(path, "world.dt"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn large_grid_expands_fully() {
        let text = r#"{
            "world": { "gravity": [0, 0, -9.81], "dt": 0.001, "duration": 0.0 },
            "patches": [{
                "id": "array",
                "grid": { "rows": 64, "cols": 64, "spacing": 0.003,
                          "taxel": { "radius": 0.0015, "stiffness": 300.0, "max_deflection": 0.002 } }
            }]
        }"#;
        let world = parse_scene(text).unwrap();
        assert_eq!(world.patches[0].taxels.len(), 4096);
    }

    #[test]
    fn syntax_error_reports_position() {
        match parse_scene("{ \"world\": ") {
            Err(SceneError::Syntax { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_world_forwards_violations() {
        let text = r#"{
            "world": { "gravity": [0, 0, -9.81], "dt": 0.0, "duration": 1.0 },
            "patches": [{
                "id": "p",
                "grid": { "rows": 1, "cols": 1, "spacing": 0.01,
                          "taxel": { "radius": 0.001, "stiffness": 100.0, "max_deflection": 0.001 } }
            }]
        }"#;
        match parse_scene(text) {
            Err(SceneError::Invalid(violations)) => {
                assert_eq!(violations[0].path, "world.dt");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_field_rejected_with_path() {
        let text =
            r#"{ "world": { "gravity": [0,0,0], "dt": 0.001, "duration": 0.0, "bogus": 1 } }"#;
        match parse_scene(text) {
            Err(SceneError::Schema { path, .. }) => assert_eq!(path, "world.bogus"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn full_scene_round_trips() {
        let text = r#"{
            "world": { "gravity": [0, 0, -9.81], "dt": 0.002, "duration": 0.25 },
            "patches": [
                { "id": "grid", "grid": { "rows": 3, "cols": 2, "spacing": 0.004,
                    "taxel": { "radius": 0.0015, "stiffness": 250.0, "damping": 0.5, "max_deflection": 0.0025 } } },
                { "id": "arm_skin",
                  "attachment": { "type": "link", "robot": "arm", "link": "forearm",
                                  "pose": { "translation": [0, 0, 0.05] } },
                  "taxels": [
                    { "rest_center": [0, 0, 0], "normal": [0, 0, 1],
                      "radius": 0.002, "stiffness": 400.0, "max_deflection": 0.003 }
                  ] }
            ],
            "objects": [
                { "id": "ball", "spheres": [ { "center": [0, 0, 0], "radius": 0.02 } ],
                  "mode": "fixed", "pose": { "translation": [0.0, 0.0, 0.05] } },
                { "id": "probe", "spheres": [ { "center": [0, 0, 0], "radius": 0.01 } ],
                  "mode": "trajectory", "waypoints": [
                    { "time": 0.0, "pose": { "translation": [0, 0, 0.1] } },
                    { "time": 0.25, "pose": { "translation": [0, 0, 0.02],
                        "rotation": [0.9238795325112867, 0, 0, 0.3826834323650898] } }
                  ] },
                { "id": "weight", "spheres": [ { "center": [0, 0, 0], "radius": 0.015 } ],
                  "mode": "settle", "pose": { "translation": [0.004, 0.004, 0.03] }, "mass": 0.2 }
            ],
            "robots": [
                { "id": "arm",
                  "base_pose": { "translation": [0.5, 0, 0] },
                  "links": ["base", "forearm"],
                  "joints": [
                    { "id": "elbow", "kind": "revolute", "parent_link": "base",
                      "child_link": "forearm", "axis": [0, 0, 1] }
                  ],
                  "joint_trajectories": { "elbow": [ { "time": 0.0, "q": 0.0 }, { "time": 0.25, "q": 1.0 } ] } }
            ]
        }"#;
        let world = parse_scene(text).unwrap();
        let serialized = serialize_scene(&world).unwrap();
        let reparsed = parse_scene(&serialized).unwrap();
        assert_eq!(world, reparsed);
    }
}
