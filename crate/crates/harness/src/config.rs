//! Sweep configuration: plain-text `key = value` lines, `#` comments and
//! comma-separated lists.
//!
//! ```text
//! # post-caustic strang study
//! schemes = strang
//! eps = 0.25, 0.00390625
//! nx = 256
//! nt = 32, 64, 128
//! t_final = 1.0
//! ```
//!
//! Omitted keys keep their defaults: the pre-caustic study at `t_final = 0.2`
//! with the built-in data `S0 = sin(x)/2`, `A0 = sin(x)` and potential
//! `sin(x)/(1 + cos²x)`, over `ε = 4⁰, 4⁻¹, …, 4⁻⁵`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use sha2::{Digest, Sha256};
use ua_wkb::{Complex64, ComplexField, PeriodicGrid, Potential, RealField, SchemeKind, WkbState};

use crate::error::{ConfigError, HarnessError};

/// Which field generates the WKB reference of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceMode {
    /// Strang at `(nx_ref, nt_ref)` for every cell.
    Fixed,
    /// The cell's own scheme and `nt` at `nx_ref`: the time error cancels and
    /// only the spatial error is measured.
    SameNt,
}

impl FromStr for ReferenceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed" => Ok(Self::Fixed),
            "same_nt" => Ok(Self::SameNt),
            other => Err(format!("unknown reference mode '{other}' (fixed | same_nt)")),
        }
    }
}

impl fmt::Display for ReferenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Fixed => "fixed",
            Self::SameNt => "same_nt",
        })
    }
}

/// Initial phase, amplitude and potential.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    /// `S0 = sin(x)/2`, `A0 = sin(x)`, `V = sin(x)/(1 + cos²x)`.
    Builtin,
    /// Expressions in `x`; the amplitude is `a0 + i·a0_im`.
    Expr {
        s0: String,
        a0: String,
        a0_im: String,
        v: String,
    },
}

type Scalar = Box<dyn Fn(f64) -> f64>;

fn bind(src: &str) -> Result<Scalar, String> {
    let expr: meval::Expr = src.parse().map_err(|e| format!("cannot parse '{src}': {e}"))?;
    let f = expr.bind("x").map_err(|e| format!("cannot bind '{src}': {e}"))?;
    Ok(Box::new(f))
}

impl InitialData {
    pub const BUILTIN_NAME: &'static str = "builtin";

    pub fn expr(s0: &str, a0: &str, a0_im: &str, v: &str) -> Result<Self, String> {
        for src in [s0, a0, a0_im, v] {
            let f = bind(src)?;
            if !f(0.3).is_finite() {
                return Err(format!("'{src}' is not finite at x = 0.3"));
            }
        }
        Ok(Self::Expr {
            s0: s0.into(),
            a0: a0.into(),
            a0_im: a0_im.into(),
            v: v.into(),
        })
    }

    fn fns(&self) -> (Scalar, Scalar, Scalar, Option<Scalar>) {
        match self {
            Self::Builtin => (
                Box::new(|x: f64| 0.5 * x.sin()),
                Box::new(f64::sin),
                Box::new(|_| 0.0),
                None,
            ),
            // validated at construction
            Self::Expr { s0, a0, a0_im, v } => (
                bind(s0).unwrap(),
                bind(a0).unwrap(),
                bind(a0_im).unwrap(),
                Some(bind(v).unwrap()),
            ),
        }
    }

    pub fn state(&self, grid: &Arc<PeriodicGrid>) -> ua_wkb::Result<WkbState> {
        let (s0, re, im, _) = self.fns();
        WkbState::from_fns(grid, s0, |x| Complex64::new(re(x), im(x)))
    }

    /// `Ψ0 = A0 e^{iS0/ε}` sampled directly on `grid`.
    pub fn wave(&self, grid: &Arc<PeriodicGrid>, eps: f64) -> ua_wkb::Result<ua_wkb::WaveState> {
        let (s0, re, im, _) = self.fns();
        let psi = ComplexField::from_fn(grid, |x| {
            Complex64::new(re(x), im(x)) * Complex64::from_polar(1.0, s0(x) / eps)
        });
        ua_wkb::WaveState::new(psi, eps)
    }

    pub fn potential(&self, grid: &Arc<PeriodicGrid>) -> ua_wkb::Result<Potential> {
        match self.fns().3 {
            None => Ok(Potential::trig_ratio(grid)),
            Some(v) => Potential::from_samples(RealField::from_fn(grid, v)),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Builtin => Self::BUILTIN_NAME.into(),
            Self::Expr { s0, a0, a0_im, v } => format!("s0={s0};a0={a0};a0_im={a0_im};v={v}"),
        }
    }

    /// Short content hash used in cache keys and reference ids.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.describe().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub schemes: Vec<SchemeKind>,
    pub eps: Vec<f64>,
    pub nx: Vec<usize>,
    pub nt: Vec<usize>,
    pub t_final: f64,
    pub initial_data: InitialData,
    pub nx_ref: usize,
    pub nt_ref: usize,
    pub nx_ref_wave: usize,
    pub nt_ref_wave: usize,
    /// Raise the wave reference resolution to at least `32/ε` points.
    pub refine_reference: bool,
    pub reference: ReferenceMode,
    /// Sobolev index for diagnostics.
    pub s: f64,
    pub output: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            schemes: vec![SchemeKind::Lie1234],
            eps: (0..6).map(|j| 4f64.powi(-j)).collect(),
            nx: vec![128],
            nt: (5..=11).map(|p| 1usize << p).collect(),
            t_final: 0.2,
            initial_data: InitialData::Builtin,
            nx_ref: 256,
            nt_ref: 8192,
            nx_ref_wave: 4096,
            nt_ref_wave: 8192,
            refine_reference: false,
            reference: ReferenceMode::Fixed,
            s: 2.0,
            output: None,
            cache_dir: None,
        }
    }
}

fn is_pow2(n: usize) -> bool {
    n >= 4 && n.is_power_of_two()
}

impl SweepConfig {
    /// Checks the cross-field invariants. Errors carry line 0.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError::at(0, m));
        if self.schemes.is_empty() || self.eps.is_empty() || self.nx.is_empty() || self.nt.is_empty() {
            return fail("schemes, eps, nx and nt must be nonempty".into());
        }
        if let Some(k) = self.schemes.iter().find(|k| !k.is_wkb()) {
            return fail(format!("scheme {k} does not evolve WKB states"));
        }
        if let Some(e) = self.eps.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
            return fail(format!("eps = {e} outside (0, 1]"));
        }
        for &n in self.nx.iter().chain([&self.nx_ref, &self.nx_ref_wave]) {
            if !is_pow2(n) {
                return fail(format!("grid size {n} is not a power of two >= 4"));
            }
        }
        for &n in self.nt.iter().chain([&self.nt_ref, &self.nt_ref_wave]) {
            if !n.is_power_of_two() {
                return fail(format!("step count {n} is not a power of two"));
            }
        }
        if let Some(n) = self.nx.iter().find(|&&n| n > self.nx_ref || n > self.nx_ref_wave) {
            return fail(format!("nx = {n} is finer than the reference grids"));
        }
        if self.reference == ReferenceMode::Fixed {
            if let Some(n) = self.nt.iter().find(|&&n| self.nt_ref % n != 0) {
                return fail(format!("nt = {n} does not divide nt_ref = {}", self.nt_ref));
            }
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return fail(format!("t_final must be positive, got {}", self.t_final));
        }
        if !(self.s > 1.5) {
            return fail(format!("s must exceed 3/2, got {}", self.s));
        }
        Ok(())
    }

    /// Wave-reference resolution used at `eps`.
    pub fn wave_ref_nx(&self, eps: f64) -> usize {
        if self.refine_reference {
            self.nx_ref_wave.max(((32.0 / eps).ceil() as usize).next_power_of_two())
        } else {
            self.nx_ref_wave
        }
    }
}

fn parse_list<T: FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    let items: Vec<&str> = value.split(',').map(str::trim).collect();
    if items.iter().all(|s| s.is_empty()) {
        return Err(ConfigError::at(line, format!("{key}: empty list")));
    }
    items
        .into_iter()
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| ConfigError::at(line, format!("{key}: bad value '{s}': {e}")))
        })
        .collect()
}

fn parse_one<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| ConfigError::at(line, format!("{key}: bad value '{value}': {e}")))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ConfigError::at(line, format!("{key}: expected a boolean, got '{value}'"))),
    }
}

/// Parses configuration text. Unknown keys, malformed values and empty lists
/// are rejected with the offending line number.
pub fn parse_config(text: &str) -> Result<SweepConfig, ConfigError> {
    let mut cfg = SweepConfig::default();
    let mut data_kind: Option<(usize, String)> = None;
    let mut exprs: [Option<String>; 4] = Default::default();
    let mut line_of = [0usize; 5];

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, format!("expected 'key = value', got '{body}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(ConfigError::at(line, format!("{key}: missing value")));
        }
        match key {
            "schemes" => cfg.schemes = parse_list(line, key, value)?,
            "eps" => cfg.eps = parse_list(line, key, value)?,
            "nx" => cfg.nx = parse_list(line, key, value)?,
            "nt" => cfg.nt = parse_list(line, key, value)?,
            "t_final" => cfg.t_final = parse_one(line, key, value)?,
            "nx_ref" => cfg.nx_ref = parse_one(line, key, value)?,
            "nt_ref" => cfg.nt_ref = parse_one(line, key, value)?,
            "nx_ref_wave" => cfg.nx_ref_wave = parse_one(line, key, value)?,
            "nt_ref_wave" => cfg.nt_ref_wave = parse_one(line, key, value)?,
            "refine_reference" => cfg.refine_reference = parse_bool(line, key, value)?,
            "reference" => cfg.reference = parse_one(line, key, value)?,
            "s" => cfg.s = parse_one(line, key, value)?,
            "output" => cfg.output = Some(PathBuf::from(value)),
            "cache_dir" => cfg.cache_dir = Some(PathBuf::from(value)),
            "initial_data" => data_kind = Some((line, value.to_string())),
            "s0" | "a0" | "a0_im" | "v" => {
                let slot = ["s0", "a0", "a0_im", "v"].iter().position(|k| *k == key).unwrap();
                let _ = bind(value).map_err(|e| ConfigError::at(line, format!("{key}: {e}")))?;
                exprs[slot] = Some(value.to_string());
                line_of[slot] = line;
            }
            other => return Err(ConfigError::at(line, format!("unknown key '{other}'"))),
        }
        // Per-key range checks that can be attributed to this line.
        let bad = match key {
            "nx" if cfg.nx.iter().any(|&n| !is_pow2(n)) => Some("nx values must be powers of two >= 4"),
            "nx_ref" if !is_pow2(cfg.nx_ref) => Some("nx_ref must be a power of two >= 4"),
            "nx_ref_wave" if !is_pow2(cfg.nx_ref_wave) => Some("nx_ref_wave must be a power of two >= 4"),
            "nt" if cfg.nt.iter().any(|n| !n.is_power_of_two()) => Some("nt values must be powers of two"),
            "nt_ref" if !cfg.nt_ref.is_power_of_two() => Some("nt_ref must be a power of two"),
            "nt_ref_wave" if !cfg.nt_ref_wave.is_power_of_two() => Some("nt_ref_wave must be a power of two"),
            "eps" if cfg.eps.iter().any(|&e| !(e > 0.0 && e <= 1.0)) => Some("eps values must lie in (0, 1]"),
            "t_final" if !(cfg.t_final > 0.0 && cfg.t_final.is_finite()) => Some("t_final must be positive"),
            "s" if !(cfg.s > 1.5) => Some("s must exceed 3/2"),
            "schemes" if cfg.schemes.iter().any(|k| !k.is_wkb()) => Some("sweep schemes must be lie or strang"),
            _ => None,
        };
        if let Some(msg) = bad {
            return Err(ConfigError::at(line, msg));
        }
    }

    match data_kind {
        None => {
            if let Some(slot) = exprs.iter().position(Option::is_some) {
                return Err(ConfigError::at(
                    line_of[slot],
                    "expressions given without 'initial_data = expr'",
                ));
            }
        }
        Some((_, kind)) if kind == InitialData::BUILTIN_NAME => {}
        Some((line, kind)) if kind == "expr" => {
            let get = |slot: usize, default: Option<&str>| {
                exprs[slot]
                    .clone()
                    .or(default.map(String::from))
                    .ok_or_else(|| ConfigError::at(line, format!("initial_data = expr needs '{}'", ["s0", "a0", "a0_im", "v"][slot])))
            };
            let (s0, a0, a0_im, v) = (get(0, None)?, get(1, None)?, get(2, Some("0"))?, get(3, Some("0"))?);
            cfg.initial_data = InitialData::expr(&s0, &a0, &a0_im, &v).map_err(|e| ConfigError::at(line, e))?;
        }
        Some((line, kind)) => {
            return Err(ConfigError::at(line, format!("unknown initial data '{kind}' (builtin | expr)")));
        }
    }

    cfg.validate()?;
    Ok(cfg)
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<SweepConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_config(&text)?)
}
