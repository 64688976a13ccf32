//! Collision detection: a spatial-hash broadphase over object spheres and the
//! closed-form narrowphase that computes the deflection a taxel needs to
//! escape a sphere.
//!
//! The grid is rebuilt from scratch every timestep (objects move, taxels only
//! query) and is read-only afterwards, so concurrent candidate queries are
//! safe.

use rustc_hash::FxHashMap;

use crate::core::Vec3;
use crate::kinematics::{TaxelWorldFrame, WorldSphere};

/// Grid cell size must be positive.
#[derive(Debug, Clone, thiserror::Error)]
#[error("cell_size must be finite and > 0, got {0}")]
pub struct BadCellSize(pub f64);

/// Default broadphase cell size: twice the largest combined contact radius,
/// floored at 1 mm so degenerate scenes still hash.
pub fn default_cell_size(max_object_sphere_radius: f64, max_taxel_radius: f64) -> f64 {
    (2.0 * (max_object_sphere_radius + max_taxel_radius)).max(1e-3)
}

/// Sparse uniform grid over world-frame object spheres.
///
/// Each sphere index is stored in every cell its center AABB, inflated by its
/// radius, overlaps. Insertion order is preserved within cells.
#[derive(Debug, Clone)]
pub struct SpatialHashGrid {
    cell_size: f64,
    inv_cell: f64,
    max_sphere_radius: f64,
    /// Min/max occupied cell coordinates, for cheap whole-grid rejection.
    cell_bounds: Option<([i64; 3], [i64; 3])>,
    cells: FxHashMap<(i64, i64, i64), Vec<u32>>,
    spheres: Vec<WorldSphere>,
}

/// Build a grid over the given spheres.
pub fn build_grid(
    spheres: Vec<WorldSphere>,
    cell_size: f64,
) -> Result<SpatialHashGrid, BadCellSize> {
    if !(cell_size.is_finite() && cell_size > 0.0) {
        return Err(BadCellSize(cell_size));
    }
    let inv_cell = 1.0 / cell_size;
    let mut grid = SpatialHashGrid {
        cell_size,
        inv_cell,
        max_sphere_radius: 0.0,
        cell_bounds: None,
        cells: FxHashMap::default(),
        spheres,
    };
    for (index, sphere) in grid.spheres.iter().enumerate() {
        grid.max_sphere_radius = grid.max_sphere_radius.max(sphere.radius);
        let r = Vec3::new(sphere.radius, sphere.radius, sphere.radius);
        let lo = cell_of(sphere.center - r, inv_cell);
        let hi = cell_of(sphere.center + r, inv_cell);
        grid.cell_bounds = Some(match grid.cell_bounds {
            None => (lo, hi),
            Some((bmin, bmax)) => (
                [bmin[0].min(lo[0]), bmin[1].min(lo[1]), bmin[2].min(lo[2])],
                [bmax[0].max(hi[0]), bmax[1].max(hi[1]), bmax[2].max(hi[2])],
            ),
        });
        for ix in lo[0]..=hi[0] {
            for iy in lo[1]..=hi[1] {
                for iz in lo[2]..=hi[2] {
                    grid.cells
                        .entry((ix, iy, iz))
                        .or_default()
                        .push(index as u32);
                }
            }
        }
    }
    Ok(grid)
}

fn cell_of(p: Vec3, inv_cell: f64) -> [i64; 3] {
    [
        (p.x * inv_cell).floor() as i64,
        (p.y * inv_cell).floor() as i64,
        (p.z * inv_cell).floor() as i64,
    ]
}

impl SpatialHashGrid {
    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn max_sphere_radius(&self) -> f64 {
        self.max_sphere_radius
    }

    pub fn spheres(&self) -> &[WorldSphere] {
        &self.spheres
    }

    /// Number of occupied cells.
    pub fn occupied_cells(&self) -> usize {
        self.cells.len()
    }

    /// Sphere indices that might demand a positive deflection of this taxel.
    ///
    /// Queries every cell overlapped by the AABB of the deflection segment
    /// `[rest_center, rest_center - max_deflection·normal]` inflated by
    /// `taxel_radius + max sphere radius`. Guaranteed a superset of the
    /// spheres with positive required deflection. Deduplicated, ascending.
    pub fn candidate_spheres(
        &self,
        frame: &TaxelWorldFrame,
        taxel_radius: f64,
        max_deflection: f64,
    ) -> Vec<u32> {
        let mut out = Vec::new();
        self.candidates_into(frame, taxel_radius, max_deflection, &mut out);
        out
    }

    /// As [`candidate_spheres`](Self::candidate_spheres), reusing a scratch
    /// buffer; `out` is cleared first.
    pub fn candidates_into(
        &self,
        frame: &TaxelWorldFrame,
        taxel_radius: f64,
        max_deflection: f64,
        out: &mut Vec<u32>,
    ) {
        out.clear();
        let Some((bmin, bmax)) = self.cell_bounds else {
            return;
        };
        let p0 = frame.rest_center_world;
        let p1 = p0 - frame.normal_world * max_deflection;
        let inflate = taxel_radius + self.max_sphere_radius;
        let r = Vec3::new(inflate, inflate, inflate);
        let lo = cell_of(p0.min(p1) - r, self.inv_cell);
        let hi = cell_of(p0.max(p1) + r, self.inv_cell);
        if lo[0] > bmax[0]
            || hi[0] < bmin[0]
            || lo[1] > bmax[1]
            || hi[1] < bmin[1]
            || lo[2] > bmax[2]
            || hi[2] < bmin[2]
        {
            return;
        }
        for ix in lo[0]..=hi[0] {
            for iy in lo[1]..=hi[1] {
                for iz in lo[2]..=hi[2] {
                    if let Some(indices) = self.cells.get(&(ix, iy, iz)) {
                        out.extend_from_slice(indices);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
    }
}

/// Smallest deflection d ≥ 0 that moves the taxel sphere out of overlap with
/// an object sphere, with the taxel center constrained to
/// `rest_center - d·normal`.
///
/// With w = rest_center - sphere_center and S the sum of radii: no overlap
/// (|w| ≥ S) needs no deflection; otherwise the separation condition
/// |w - d·n| = S is a quadratic in d whose roots have opposite signs, so the
/// unique positive root `w·n + sqrt((w·n)² - |w|² + S²)` is the answer.
#[inline]
pub fn required_deflection(
    rest_center: Vec3,
    normal: Vec3,
    taxel_radius: f64,
    sphere_center: Vec3,
    sphere_radius: f64,
) -> f64 {
    let w = rest_center - sphere_center;
    let s = taxel_radius + sphere_radius;
    let w2 = w.norm_squared();
    if w2 >= s * s {
        return 0.0;
    }
    let wn = w.dot(normal);
    wn + (wn * wn - w2 + s * s).sqrt()
}
