//! Reference solutions: computed once per key, shared between sweep cells and
//! optionally persisted as plain-text files.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use sha2::{Digest, Sha256};
use ua_wkb::{
    evolve, Complex64, ComplexField, PeriodicGrid, RealField, SchemeKind, SchemeSpec, TimeMarch,
    WaveState, WkbState,
};

use crate::config::InitialData;
use crate::error::{CacheError, HarnessError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceKey {
    /// `lie`/`strang` produce WKB fields, `tssp4` a wave function.
    pub scheme: SchemeKind,
    pub eps: f64,
    pub nx: usize,
    pub nt: usize,
    pub t_final: f64,
    pub data_hash: String,
}

impl ReferenceKey {
    pub fn id(&self) -> String {
        let text = format!(
            "{}|{:016x}|{}|{}|{:016x}|{}",
            self.scheme.name(),
            self.eps.to_bits(),
            self.nx,
            self.nt,
            self.t_final.to_bits(),
            self.data_hash
        );
        Sha256::digest(text.as_bytes())[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn file_name(&self) -> String {
        format!("{}-{}.txt", self.scheme.name(), self.id())
    }
}

#[derive(Clone, Debug)]
pub enum ReferenceField {
    Wkb(WkbState),
    Wave(WaveState),
}

impl ReferenceField {
    pub fn as_wkb(&self) -> Option<&WkbState> {
        match self {
            Self::Wkb(u) => Some(u),
            Self::Wave(_) => None,
        }
    }

    pub fn as_wave(&self) -> Option<&WaveState> {
        match self {
            Self::Wave(w) => Some(w),
            Self::Wkb(_) => None,
        }
    }
}

/// Integrates the reference described by `key` from `data`.
pub fn compute_reference(key: &ReferenceKey, data: &InitialData) -> ua_wkb::Result<ReferenceField> {
    let grid = PeriodicGrid::new(key.nx)?;
    let potential = data.potential(&grid)?;
    let march = TimeMarch::new(key.t_final, key.nt)?;
    let spec = SchemeSpec::new(key.scheme, key.eps, potential)?;
    if key.scheme.is_wkb() {
        Ok(ReferenceField::Wkb(evolve(&data.state(&grid)?, &spec, &march)?))
    } else {
        Ok(ReferenceField::Wave(evolve(&data.wave(&grid, key.eps)?, &spec, &march)?))
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes a field: one row per node, `x re(A) im(A) S` or `x re im`.
pub fn encode_field(key: &ReferenceKey, field: &ReferenceField) -> String {
    let mut out = format!(
        "# {} eps={} nx={} nt={} t_final={} data={}\n",
        key.scheme.name(),
        num(key.eps),
        key.nx,
        key.nt,
        num(key.t_final),
        key.data_hash
    );
    match field {
        ReferenceField::Wkb(u) => {
            let grid = u.grid();
            for (j, (a, s)) in u.amplitude().values().iter().zip(u.phase().values()).enumerate() {
                let _ = writeln!(out, "{} {} {} {}", num(grid.node(j)), num(a.re), num(a.im), num(*s));
            }
        }
        ReferenceField::Wave(w) => {
            let grid = w.psi().grid();
            for (j, p) in w.psi().values().iter().enumerate() {
                let _ = writeln!(out, "{} {} {}", num(grid.node(j)), num(p.re), num(p.im));
            }
        }
    }
    out
}

/// Parses [`encode_field`] output, checking row count, arity and node positions.
pub fn decode_field(key: &ReferenceKey, text: &str, path: &Path) -> Result<ReferenceField, CacheError> {
    let corrupt = |line: usize, message: String| CacheError::Corrupt {
        path: path.to_path_buf(),
        line,
        message,
    };
    let grid = PeriodicGrid::new(key.nx).map_err(|e| corrupt(0, e.to_string()))?;
    let width = if key.scheme.is_wkb() { 4 } else { 3 };
    let mut rows = Vec::with_capacity(key.nx);
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| corrupt(line_no, format!("unparsable number: {e}")))?;
        if cols.len() != width {
            return Err(corrupt(line_no, format!("expected {width} columns, got {}", cols.len())));
        }
        let j = rows.len();
        if j >= key.nx {
            return Err(corrupt(line_no, format!("more than {} rows", key.nx)));
        }
        if (cols[0] - grid.node(j)).abs() > 1e-12 || cols.iter().any(|c| !c.is_finite()) {
            return Err(corrupt(line_no, format!("row {j} does not match node {}", grid.node(j))));
        }
        rows.push(cols);
    }
    if rows.len() != key.nx {
        return Err(corrupt(0, format!("expected {} rows, got {}", key.nx, rows.len())));
    }
    let bad = |e: ua_wkb::Error| corrupt(0, e.to_string());
    if key.scheme.is_wkb() {
        let a = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
        let s = rows.iter().map(|r| r[3]).collect();
        let u = WkbState::new(
            RealField::new(grid.clone(), s).map_err(bad)?,
            ComplexField::new(grid, a).map_err(bad)?,
        )
        .map_err(bad)?;
        Ok(ReferenceField::Wkb(u))
    } else {
        let psi = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
        let w = WaveState::new(ComplexField::new(grid, psi).map_err(bad)?, key.eps).map_err(bad)?;
        Ok(ReferenceField::Wave(w))
    }
}

type Slot = Arc<OnceLock<Result<Arc<ReferenceField>, String>>>;

/// Memoizing reference provider. Concurrent requests for one key block on
/// the first computation instead of repeating it.
#[derive(Default)]
pub struct ReferenceStore {
    cache_dir: Option<PathBuf>,
    slots: Mutex<HashMap<String, Slot>>,
}

impl ReferenceStore {
    pub fn new(cache_dir: Option<PathBuf>) -> Self {
        Self {
            cache_dir,
            slots: Mutex::default(),
        }
    }

    pub fn cache_dir(&self) -> Option<&Path> {
        self.cache_dir.as_deref()
    }

    fn slot(&self, id: &str) -> Slot {
        let mut slots = self.slots.lock().unwrap_or_else(|e| e.into_inner());
        slots.entry(id.to_string()).or_default().clone()
    }

    /// Returns the reference for `key`, loading it from the cache directory or
    /// computing (and then persisting) it.
    pub fn get(&self, key: &ReferenceKey, data: &InitialData) -> Result<Arc<ReferenceField>> {
        let id = key.id();
        let slot = self.slot(&id);
        let mut outcome: Option<HarnessError> = None;
        let stored = slot.get_or_init(|| match self.load_or_compute(key, data) {
            Ok(field) => Ok(Arc::new(field)),
            Err(e) => {
                let msg = e.to_string();
                outcome = Some(e);
                Err(msg)
            }
        });
        if let Some(e) = outcome {
            return Err(e);
        }
        stored.clone().map_err(|msg| {
            HarnessError::Reference(ua_wkb::Error::InvalidInput(format!("reference {id}: {msg}")))
        })
    }

    fn load_or_compute(&self, key: &ReferenceKey, data: &InitialData) -> Result<ReferenceField> {
        let Some(dir) = &self.cache_dir else {
            return compute_reference(key, data).map_err(HarnessError::Reference);
        };
        let path = dir.join(key.file_name());
        let io = |source| CacheError::Io {
            path: path.clone(),
            source,
        };
        match std::fs::read_to_string(&path) {
            Ok(text) => return Ok(decode_field(key, &text, &path)?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(io(e).into()),
        }
        let field = compute_reference(key, data).map_err(HarnessError::Reference)?;
        std::fs::create_dir_all(dir).map_err(io)?;
        // write-then-rename so a concurrent reader never sees a partial file
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, encode_field(key, &field)).map_err(io)?;
        std::fs::rename(&tmp, &path).map_err(io)?;
        Ok(field)
    }
}
