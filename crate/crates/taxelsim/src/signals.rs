//! Post-processing of displacement traces: conversion to contact forces,
//! additive Gaussian sensor noise, spatial smoothing over taxel positions,
//! and single-instant frame extraction.

use rayon::prelude::*;

use crate::core::{NoiseMeta, Quantity, SignalFrame, SkinPatch, Trace, World};

/// Name of the noise stream: splitmix64 draws mapped through the Box-Muller
/// transform. Recorded in trace metadata so noisy traces are reproducible
/// across platforms and implementations.
pub const NOISE_ALGORITHM: &str = "splitmix64-boxmuller";

/// Post-processing failure.
#[derive(Debug, Clone, thiserror::Error)]
pub enum SignalError {
    #[error("trace catalog does not match the world: {0}")]
    CatalogMismatch(String),
    #[error("expected a displacement trace, got a force trace")]
    NotADisplacementTrace,
    #[error("smoothing sigma must be finite and > 0, got {0}")]
    NonpositiveSigma(f64),
    #[error("frame is not aligned with patch `{patch}`: {detail}")]
    FrameMismatch { patch: String, detail: String },
    #[error("time {t} s outside the trace range [0, {max}] s")]
    TimeOutOfRange { t: f64, max: f64 },
    #[error("trace has no patch `{0}`")]
    UnknownPatch(String),
}

/// Whether force conversion clamps at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForceMode {
    /// Unilateral contact: the skin cannot pull, so forces clamp at 0.
    Clamped,
    /// Raw spring + damper sum, allowed to go negative.
    Unclamped,
}

/// Convert a displacement trace to a contact-force trace of the same shape:
/// f[t][i] = kᵢ·d[t][i] + bᵢ·(d[t][i] - d[t-1][i])/dt, with the rate at t = 0
/// defined as 0 (simulation starts at rest). Saturation flags carry through
/// unchanged.
pub fn displacements_to_forces(
    trace: &Trace,
    world: &World,
    mode: ForceMode,
) -> Result<Trace, SignalError> {
    if trace.quantity != Quantity::Displacement {
        return Err(SignalError::NotADisplacementTrace);
    }
    let constants = spring_constants(trace, world)?;
    let n = trace.n_taxels();
    let inv_dt = 1.0 / trace.dt;

    let mut out = trace.clone();
    out.quantity = Quantity::Force;
    for k in 0..trace.n_steps() {
        for (i, &(stiffness, damping)) in constants.iter().enumerate() {
            let d = trace.value(k, i);
            let rate = if k == 0 {
                0.0
            } else {
                (d - trace.value(k - 1, i)) * inv_dt
            };
            let f = stiffness * d + damping * rate;
            out.values[k * n + i] = match mode {
                ForceMode::Clamped => f.max(0.0),
                ForceMode::Unclamped => f,
            };
        }
    }
    Ok(out)
}

/// Resolve (stiffness, damping) for every trace column against the world.
fn spring_constants(trace: &Trace, world: &World) -> Result<Vec<(f64, f64)>, SignalError> {
    let mut out = Vec::with_capacity(trace.n_taxels());
    for &(pi, ti) in &trace.catalog.entries {
        let patch_id = trace
            .catalog
            .patch_ids
            .get(pi as usize)
            .ok_or_else(|| SignalError::CatalogMismatch(format!("bad patch index {pi}")))?;
        let patch = world.patch(patch_id).ok_or_else(|| {
            SignalError::CatalogMismatch(format!("world has no patch `{patch_id}`"))
        })?;
        let taxel = patch.taxels.get(ti as usize).ok_or_else(|| {
            SignalError::CatalogMismatch(format!(
                "patch `{patch_id}` has no taxel {ti} (it has {})",
                patch.taxels.len()
            ))
        })?;
        out.push((taxel.stiffness, taxel.damping));
    }
    Ok(out)
}

/// Additive zero-mean Gaussian noise parameters; sigma is in the trace's
/// units (N for force signals, m for displacements).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

/// Add independent Normal(0, sigma²) draws to every value.
///
/// Row t draws from a splitmix64 stream seeded with `seed ^ t`, in catalog
/// order; that per-row derivation is part of the contract, so parallel and
/// sequential runs produce bit-identical output. `sigma == 0` returns the
/// input unchanged and records no noise metadata.
pub fn add_noise(trace: &Trace, spec: &NoiseSpec) -> Trace {
    let mut out = trace.clone();
    if spec.sigma == 0.0 || trace.n_taxels() == 0 {
        return out;
    }
    let n = trace.n_taxels();
    out.values
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(row, chunk)| {
            let mut rng = SplitMix64::new(spec.seed ^ row as u64);
            for v in chunk {
                *v += spec.sigma * rng.next_standard_normal();
            }
        });
    out.noise = Some(NoiseMeta {
        algorithm: NOISE_ALGORITHM.to_string(),
        seed: spec.seed,
        sigma: spec.sigma,
    });
    out
}

/// Add noise to a single frame; uses the row-0 stream (`seed` itself).
pub fn add_noise_frame(frame: &SignalFrame, spec: &NoiseSpec) -> SignalFrame {
    let mut out = frame.clone();
    if spec.sigma == 0.0 {
        return out;
    }
    let mut rng = SplitMix64::new(spec.seed);
    for v in &mut out.values {
        *v += spec.sigma * rng.next_standard_normal();
    }
    out
}

/// Normalized Gaussian weights over taxel rest positions, truncated where a
/// weight would fall below 1e-12. Build once per (patch, sigma), then apply
/// to any number of frames.
#[derive(Debug, Clone)]
pub struct SmoothingKernel {
    /// CSR layout: row i's neighbors are cols[offsets[i]..offsets[i+1]].
    offsets: Vec<usize>,
    cols: Vec<u32>,
    weights: Vec<f64>,
    weight_sums: Vec<f64>,
}

impl SmoothingKernel {
    pub fn new(patch: &SkinPatch, sigma_s: f64) -> Result<Self, SignalError> {
        if !(sigma_s.is_finite() && sigma_s > 0.0) {
            return Err(SignalError::NonpositiveSigma(sigma_s));
        }
        let centers: Vec<_> = patch.taxels.iter().map(|t| t.rest_center).collect();
        let inv_two_sigma_sq = 1.0 / (2.0 * sigma_s * sigma_s);
        // exp(-r²/2σ²) < 1e-12 beyond this radius.
        let cutoff_sq = 2.0 * sigma_s * sigma_s * (1e12f64).ln();

        let n = centers.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        let mut weight_sums = Vec::with_capacity(n);
        offsets.push(0);
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                let r_sq = (centers[i] - centers[j]).norm_squared();
                if i != j && r_sq > cutoff_sq {
                    continue;
                }
                let w = (-r_sq * inv_two_sigma_sq).exp();
                cols.push(j as u32);
                weights.push(w);
                sum += w;
            }
            weight_sums.push(sum);
            offsets.push(cols.len());
        }
        Ok(SmoothingKernel {
            offsets,
            cols,
            weights,
            weight_sums,
        })
    }

    /// Number of taxels the kernel was built for.
    pub fn len(&self) -> usize {
        self.weight_sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight_sums.is_empty()
    }

    /// out_i = Σⱼ w_ij·v_j / Σⱼ w_ij over the kept neighbors.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(
            values.len(),
            self.len(),
            "value count must match the kernel"
        );
        (0..self.len())
            .map(|i| {
                let range = self.offsets[i]..self.offsets[i + 1];
                let mut acc = 0.0;
                for (col, w) in self.cols[range.clone()].iter().zip(&self.weights[range]) {
                    acc += w * values[*col as usize];
                }
                acc / self.weight_sums[i]
            })
            .collect()
    }
}

/// Gaussian smoothing of one frame over its patch's taxel rest positions,
/// emulating a protective layer spreading contact across neighbors.
pub fn gaussian_smooth(
    frame: &SignalFrame,
    patch: &SkinPatch,
    sigma_s: f64,
) -> Result<SignalFrame, SignalError> {
    if frame.patch_id != patch.id {
        return Err(SignalError::FrameMismatch {
            patch: patch.id.clone(),
            detail: format!("frame belongs to `{}`", frame.patch_id),
        });
    }
    if frame.values.len() != patch.taxels.len() {
        return Err(SignalError::FrameMismatch {
            patch: patch.id.clone(),
            detail: format!(
                "frame has {} values, patch has {} taxels",
                frame.values.len(),
                patch.taxels.len()
            ),
        });
    }
    let kernel = SmoothingKernel::new(patch, sigma_s)?;
    Ok(SignalFrame {
        patch_id: frame.patch_id.clone(),
        values: kernel.apply(&frame.values),
        quantity: frame.quantity,
    })
}

/// Smooth every row of a trace, patch by patch.
pub fn smooth_trace(trace: &Trace, world: &World, sigma_s: f64) -> Result<Trace, SignalError> {
    // One kernel and column list per patch present in the catalog.
    let mut per_patch = Vec::new();
    for patch_id in &trace.catalog.patch_ids {
        let patch = world.patch(patch_id).ok_or_else(|| {
            SignalError::CatalogMismatch(format!("world has no patch `{patch_id}`"))
        })?;
        let columns = trace.catalog.columns_for_patch(patch_id);
        if columns.len() != patch.taxels.len() {
            return Err(SignalError::CatalogMismatch(format!(
                "trace has {} columns for patch `{patch_id}`, patch has {} taxels",
                columns.len(),
                patch.taxels.len()
            )));
        }
        per_patch.push((SmoothingKernel::new(patch, sigma_s)?, columns));
    }

    let n = trace.n_taxels();
    let mut out = trace.clone();
    if n == 0 {
        return Ok(out);
    }
    out.values.par_chunks_mut(n).for_each(|chunk| {
        for (kernel, columns) in &per_patch {
            let gathered: Vec<f64> = columns.iter().map(|&c| chunk[c]).collect();
            for (&c, v) in columns.iter().zip(kernel.apply(&gathered)) {
                chunk[c] = v;
            }
        }
    });
    Ok(out)
}

/// Extract one patch's values at the time nearest `t` (ties toward the
/// earlier step). `t` may range up to one step past the last row, covering a
/// duration that is not an exact multiple of dt.
pub fn extract_frame(trace: &Trace, patch_id: &str, t: f64) -> Result<SignalFrame, SignalError> {
    let Some(&last) = trace.times.last() else {
        return Err(SignalError::TimeOutOfRange { t, max: 0.0 });
    };
    let max = last + trace.dt;
    if !t.is_finite() || t < 0.0 || t > max {
        return Err(SignalError::TimeOutOfRange { t, max });
    }
    if trace.catalog.patch_index(patch_id).is_none() {
        return Err(SignalError::UnknownPatch(patch_id.to_string()));
    }
    let x = (t - trace.times[0]) / trace.dt;
    let base = x.floor();
    let step = (base as usize + usize::from(x - base > 0.5)).min(trace.n_steps() - 1);

    let row = trace.row(step);
    let values = trace
        .catalog
        .columns_for_patch(patch_id)
        .iter()
        .map(|&c| row[c])
        .collect();
    Ok(SignalFrame {
        patch_id: patch_id.to_string(),
        values,
        quantity: trace.quantity,
    })
}

/// splitmix64 (Steele, Lea & Flood): a 64-bit mixing generator driven by a
/// Weyl sequence. Trivially seekable, identical on every platform.
struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in (0, 1]; never zero, so its log is finite.
    fn next_unit_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform draw in [0, 1).
    fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Standard normal via the Box-Muller transform. Each draw consumes
    /// exactly two u64s; the sine branch is discarded to keep the stream
    /// layout trivial to reproduce.
    fn next_standard_normal(&mut self) -> f64 {
        let u1 = self.next_unit_open();
        let u2 = self.next_unit();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
