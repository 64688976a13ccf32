//! Trace persistence.
//!
//! Binary format: magic `TXTR`, format version u32, everything little-endian;
//! a header with quantity, optional noise provenance, dt, the patch table and
//! catalog; the time axis; the value matrix as 64-bit floats; saturation
//! flags as a sparse index list. Round-trips bit-exactly and identically
//! across platforms.
//!
//! CSV format: header row `time,<patchid:idx>,...`, one row per step, values
//! printed with full round-trip precision. CSV carries no quantity,
//! saturation, or noise metadata.

use std::fs;
use std::path::Path;

use crate::core::{NoiseMeta, Quantity, Trace, TraceCatalog};

pub const TRACE_MAGIC: [u8; 4] = *b"TXTR";
pub const TRACE_VERSION: u32 = 1;

/// On-disk trace encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Binary,
    Csv,
}

/// Trace persistence failure.
#[derive(Debug, thiserror::Error)]
pub enum TraceFileError {
    #[error("cannot access trace file: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a trace file (bad magic)")]
    BadMagic,
    #[error("unsupported trace format version {0} (this build reads version {TRACE_VERSION})")]
    UnsupportedVersion(u32),
    #[error("truncated trace payload: needed {needed} more byte(s)")]
    Truncated { needed: usize },
    #[error("malformed trace payload: {0}")]
    Malformed(String),
    #[error("CSV line {line}: {message}")]
    Csv { line: usize, message: String },
}

/// Write a trace in the chosen format.
pub fn write_trace(trace: &Trace, path: &Path, format: TraceFormat) -> Result<(), TraceFileError> {
    let bytes = match format {
        TraceFormat::Binary => encode_trace(trace),
        TraceFormat::Csv => trace_to_csv(trace)?.into_bytes(),
    };
    fs::write(path, bytes)?;
    Ok(())
}

/// Read a trace, detecting the format from the leading bytes.
pub fn read_trace(path: &Path) -> Result<Trace, TraceFileError> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(&TRACE_MAGIC) {
        decode_trace(&bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| TraceFileError::Malformed("neither binary trace nor UTF-8 CSV".into()))?;
        trace_from_csv(&text)
    }
}

// ------------------------------------------------------------- binary

/// Encode a trace into the binary format.
pub fn encode_trace(trace: &Trace) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&TRACE_MAGIC);
    out.extend_from_slice(&TRACE_VERSION.to_le_bytes());
    out.push(match trace.quantity {
        Quantity::Displacement => 0,
        Quantity::Force => 1,
    });
    match &trace.noise {
        None => out.push(0),
        Some(meta) => {
            out.push(1);
            write_string(&mut out, &meta.algorithm);
            out.extend_from_slice(&meta.seed.to_le_bytes());
            out.extend_from_slice(&meta.sigma.to_le_bytes());
        }
    }
    out.extend_from_slice(&trace.dt.to_le_bytes());

    out.extend_from_slice(&(trace.catalog.patch_ids.len() as u64).to_le_bytes());
    for id in &trace.catalog.patch_ids {
        write_string(&mut out, id);
    }
    out.extend_from_slice(&(trace.catalog.entries.len() as u64).to_le_bytes());
    for (pi, ti) in &trace.catalog.entries {
        out.extend_from_slice(&pi.to_le_bytes());
        out.extend_from_slice(&ti.to_le_bytes());
    }

    out.extend_from_slice(&(trace.times.len() as u64).to_le_bytes());
    for t in &trace.times {
        out.extend_from_slice(&t.to_le_bytes());
    }
    for v in &trace.values {
        out.extend_from_slice(&v.to_le_bytes());
    }

    out.extend_from_slice(&(trace.saturation.len() as u64).to_le_bytes());
    for (t, i) in &trace.saturation {
        out.extend_from_slice(&t.to_le_bytes());
        out.extend_from_slice(&i.to_le_bytes());
    }
    out
}

fn write_string(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], TraceFileError> {
        if self.pos + n > self.buf.len() {
            return Err(TraceFileError::Truncated {
                needed: self.pos + n - self.buf.len(),
            });
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, TraceFileError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, TraceFileError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, TraceFileError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, TraceFileError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String, TraceFileError> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| TraceFileError::Malformed("string is not valid UTF-8".into()))
    }
}

/// Decode a binary trace payload.
pub fn decode_trace(bytes: &[u8]) -> Result<Trace, TraceFileError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != TRACE_MAGIC {
        return Err(TraceFileError::BadMagic);
    }
    let version = r.u32()?;
    if version != TRACE_VERSION {
        return Err(TraceFileError::UnsupportedVersion(version));
    }
    let quantity = match r.u8()? {
        0 => Quantity::Displacement,
        1 => Quantity::Force,
        other => {
            return Err(TraceFileError::Malformed(format!(
                "unknown quantity tag {other}"
            )));
        }
    };
    let noise = match r.u8()? {
        0 => None,
        1 => Some(NoiseMeta {
            algorithm: r.string()?,
            seed: r.u64()?,
            sigma: r.f64()?,
        }),
        other => {
            return Err(TraceFileError::Malformed(format!(
                "unknown noise flag {other}"
            )));
        }
    };
    let dt = r.f64()?;

    let n_patches = r.u64()? as usize;
    let mut patch_ids = Vec::with_capacity(n_patches.min(1 << 20));
    for _ in 0..n_patches {
        patch_ids.push(r.string()?);
    }
    let n_entries = r.u64()? as usize;
    let mut entries = Vec::with_capacity(n_entries.min(1 << 24));
    for _ in 0..n_entries {
        let pi = r.u32()?;
        let ti = r.u32()?;
        if pi as usize >= patch_ids.len() {
            return Err(TraceFileError::Malformed(format!(
                "catalog entry references patch {pi}, but only {} patches declared",
                patch_ids.len()
            )));
        }
        entries.push((pi, ti));
    }

    let n_times = r.u64()? as usize;
    let mut times = Vec::with_capacity(n_times.min(1 << 24));
    for _ in 0..n_times {
        times.push(r.f64()?);
    }
    let mut values = Vec::with_capacity((n_times * n_entries).min(1 << 28));
    for _ in 0..n_times * n_entries {
        values.push(r.f64()?);
    }

    let n_sat = r.u64()? as usize;
    let mut saturation = Vec::with_capacity(n_sat.min(1 << 24));
    for _ in 0..n_sat {
        saturation.push((r.u32()?, r.u32()?));
    }

    if r.pos != bytes.len() {
        return Err(TraceFileError::Malformed(format!(
            "{} trailing byte(s) after the payload",
            bytes.len() - r.pos
        )));
    }

    Ok(Trace {
        catalog: TraceCatalog { patch_ids, entries },
        quantity,
        dt,
        times,
        values,
        saturation,
        noise,
    })
}

// ---------------------------------------------------------------- CSV

/// Render a trace as CSV. Patch ids containing `,`, `:`, or newlines cannot
/// be represented in the header and are rejected.
pub fn trace_to_csv(trace: &Trace) -> Result<String, TraceFileError> {
    for id in &trace.catalog.patch_ids {
        if id.contains([',', ':', '\n', '\r']) {
            return Err(TraceFileError::Malformed(format!(
                "patch id `{id}` cannot appear in a CSV header"
            )));
        }
    }
    let mut out = String::from("time");
    for col in 0..trace.n_taxels() {
        out.push(',');
        out.push_str(&trace.catalog.label(col));
    }
    out.push('\n');
    for (k, t) in trace.times.iter().enumerate() {
        out.push_str(&format!("{t}"));
        for v in trace.row(k) {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parse a CSV trace. The step size is inferred from the first two rows
/// (defaulting to 1.0 for single-row traces); quantity defaults to
/// displacement.
pub fn trace_from_csv(text: &str) -> Result<Trace, TraceFileError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| TraceFileError::Csv {
        line: 1,
        message: "empty file".into(),
    })?;
    let mut cols = header.split(',');
    if cols.next() != Some("time") {
        return Err(TraceFileError::Csv {
            line: 1,
            message: "header must start with `time`".into(),
        });
    }
    let mut patch_ids: Vec<String> = Vec::new();
    let mut entries = Vec::new();
    for label in cols {
        let (patch, idx) = label.rsplit_once(':').ok_or_else(|| TraceFileError::Csv {
            line: 1,
            message: format!("column `{label}` is not of the form patch:index"),
        })?;
        let ti: u32 = idx.parse().map_err(|_| TraceFileError::Csv {
            line: 1,
            message: format!("column `{label}` has a non-integer taxel index"),
        })?;
        let pi = match patch_ids.iter().position(|p| p == patch) {
            Some(pi) => pi,
            None => {
                patch_ids.push(patch.to_string());
                patch_ids.len() - 1
            }
        };
        entries.push((pi as u32, ti));
    }

    let n = entries.len();
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let t_field = fields.next().unwrap();
        let t: f64 = t_field.parse().map_err(|_| TraceFileError::Csv {
            line: lineno + 1,
            message: format!("bad time value `{t_field}`"),
        })?;
        times.push(t);
        let mut count = 0;
        for field in fields {
            let v: f64 = field.parse().map_err(|_| TraceFileError::Csv {
                line: lineno + 1,
                message: format!("bad value `{field}`"),
            })?;
            values.push(v);
            count += 1;
        }
        if count != n {
            return Err(TraceFileError::Csv {
                line: lineno + 1,
                message: format!("expected {n} value column(s), got {count}"),
            });
        }
    }

    let dt = if times.len() >= 2 {
        times[1] - times[0]
    } else {
        1.0
    };
    Ok(Trace {
        catalog: TraceCatalog { patch_ids, entries },
        quantity: Quantity::Displacement,
        dt,
        times,
        values,
        saturation: Vec::new(),
        noise: None,
    })
}
