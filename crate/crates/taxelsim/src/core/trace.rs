//! Trace and signal-frame containers: the simulator's time-indexed output
//! and the single-instant slices post-processing works on.

use crate::core::World;

/// Which physical quantity a trace or frame stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Taxel deflections (m).
    Displacement,
    /// Contact forces (N).
    Force,
}

/// Provenance of additive sensor noise applied to a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMeta {
    /// Name of the pseudorandom algorithm that produced the draws.
    pub algorithm: String,
    pub seed: u64,
    pub sigma: f64,
}

/// Ordered mapping from trace columns to (patch, taxel) pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceCatalog {
    /// Patch id table, in world declaration order.
    pub patch_ids: Vec<String>,
    /// One (patch table index, taxel index within patch) per column.
    pub entries: Vec<(u32, u32)>,
}

impl TraceCatalog {
    /// Catalog covering every taxel of every patch, in canonical order:
    /// patches in declaration order, taxels in patch order.
    pub fn from_world(world: &World) -> TraceCatalog {
        let mut patch_ids = Vec::with_capacity(world.patches.len());
        let mut entries = Vec::with_capacity(world.taxel_count());
        for (pi, patch) in world.patches.iter().enumerate() {
            patch_ids.push(patch.id.clone());
            for ti in 0..patch.taxels.len() {
                entries.push((pi as u32, ti as u32));
            }
        }
        TraceCatalog { patch_ids, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Column label used in CSV headers: `<patch id>:<taxel index>`.
    pub fn label(&self, column: usize) -> String {
        let (pi, ti) = self.entries[column];
        format!("{}:{}", self.patch_ids[pi as usize], ti)
    }

    pub fn patch_index(&self, patch_id: &str) -> Option<usize> {
        self.patch_ids.iter().position(|id| id == patch_id)
    }

    /// Column indices belonging to one patch, in catalog order.
    pub fn columns_for_patch(&self, patch_id: &str) -> Vec<usize> {
        match self.patch_index(patch_id) {
            None => Vec::new(),
            Some(pi) => self
                .entries
                .iter()
                .enumerate()
                .filter(|(_, (p, _))| *p as usize == pi)
                .map(|(col, _)| col)
                .collect(),
        }
    }
}

/// Time-indexed matrix of per-taxel values, row per step, column per taxel.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub catalog: TraceCatalog,
    pub quantity: Quantity,
    /// Step size the rows are spaced by (s).
    pub dt: f64,
    /// Row times (s), uniformly spaced by `dt`.
    pub times: Vec<f64>,
    /// Row-major values, `times.len() × catalog.len()`.
    pub values: Vec<f64>,
    /// (time index, taxel index) pairs where max-deflection clamping occurred,
    /// sorted ascending.
    pub saturation: Vec<(u32, u32)>,
    /// Set when additive noise was applied.
    pub noise: Option<NoiseMeta>,
}

impl Trace {
    pub fn n_steps(&self) -> usize {
        self.times.len()
    }

    pub fn n_taxels(&self) -> usize {
        self.catalog.len()
    }

    pub fn row(&self, step: usize) -> &[f64] {
        let n = self.n_taxels();
        &self.values[step * n..(step + 1) * n]
    }

    pub fn row_mut(&mut self, step: usize) -> &mut [f64] {
        let n = self.n_taxels();
        &mut self.values[step * n..(step + 1) * n]
    }

    pub fn value(&self, step: usize, column: usize) -> f64 {
        self.values[step * self.n_taxels() + column]
    }
}

/// One per-taxel scalar field over a single patch at a single instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalFrame {
    pub patch_id: String,
    /// Values aligned with the patch's canonical taxel ordering.
    pub values: Vec<f64>,
    pub quantity: Quantity,
}
