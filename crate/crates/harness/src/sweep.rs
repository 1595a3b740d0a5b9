use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use ua_wkb::{error_metrics, evolve, Error, PeriodicGrid, SchemeKind, SchemeSpec, TimeMarch, WaveState};

use crate::config::{ReferenceMode, SweepConfig};
use crate::error::Result;
use crate::records::{ErrorRecord, Status};
use crate::reference::{ReferenceKey, ReferenceStore};

/// Key of the WKB reference used by a cell.
pub fn wkb_reference_key(cfg: &SweepConfig, scheme: SchemeKind, eps: f64, nt: usize) -> ReferenceKey {
    let (scheme, nt) = match cfg.reference {
        ReferenceMode::Fixed => (SchemeKind::StrangPalindromic, cfg.nt_ref),
        ReferenceMode::SameNt => (scheme, nt),
    };
    ReferenceKey {
        scheme,
        eps,
        nx: cfg.nx_ref,
        nt,
        t_final: cfg.t_final,
        data_hash: cfg.initial_data.hash(),
    }
}

pub fn wave_reference_key(cfg: &SweepConfig, eps: f64) -> ReferenceKey {
    ReferenceKey {
        scheme: SchemeKind::TsspYoshida4,
        eps,
        nx: cfg.wave_ref_nx(eps),
        nt: cfg.nt_ref_wave,
        t_final: cfg.t_final,
        data_hash: cfg.initial_data.hash(),
    }
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    scheme: SchemeKind,
    eps: f64,
    nx: usize,
    nt: usize,
}

fn cells(cfg: &SweepConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &scheme in &cfg.schemes {
        for &eps in &cfg.eps {
            for &nx in &cfg.nx {
                for &nt in &cfg.nt {
                    out.push(Cell { scheme, eps, nx, nt });
                }
            }
        }
    }
    out
}

fn run_cell(cfg: &SweepConfig, store: &ReferenceStore, cell: Cell) -> Result<ErrorRecord> {
    let data = &cfg.initial_data;
    let wkb_key = wkb_reference_key(cfg, cell.scheme, cell.eps, cell.nt);
    let wave_key = wave_reference_key(cfg, cell.eps);
    let mut record = ErrorRecord {
        scheme: cell.scheme,
        eps: cell.eps,
        nx: cell.nx,
        nt: cell.nt,
        h: cfg.t_final / cell.nt as f64,
        dx: 2.0 * PI / cell.nx as f64,
        t_final: cfg.t_final,
        err_rho: f64::NAN,
        err_psi: f64::NAN,
        err_sa: f64::NAN,
        mass_drift_rel: f64::NAN,
        wallclock_seconds: 0.0,
        status: Status::Ok,
        reference_id: format!("{}+{}", wkb_key.id(), wave_key.id()),
    };

    let grid = PeriodicGrid::new(cell.nx)?;
    let u0 = data.state(&grid)?;
    let spec = SchemeSpec::new(cell.scheme, cell.eps, data.potential(&grid)?)?;
    let march = TimeMarch::new(cfg.t_final, cell.nt)?;
    let clock = Instant::now();
    let outcome = evolve(&u0, &spec, &march);
    record.wallclock_seconds = clock.elapsed().as_secs_f64();
    let u = match outcome {
        Ok(u) => u,
        Err(e) if matches!(e.root(), Error::CharacteristicsDiverged(_)) => {
            record.status = Status::Diverged;
            return Ok(record);
        }
        Err(e) => return Err(e.into()),
    };

    let wkb_ref = store.get(&wkb_key, data)?;
    let wave_ref = store.get(&wave_key, data)?;
    let sa_ref = wkb_ref
        .as_wkb()
        .expect("WKB reference key")
        .restrict_to(&grid)?;
    let wave = wave_ref.as_wave().expect("wave reference key");
    let psi_ref = WaveState::new(wave.psi().sample_at_nodes(&grid), cell.eps)?;
    let err = error_metrics(&psi_ref, &sa_ref, &u, cell.eps)?;
    let m0 = u0.amplitude_mass();
    record.err_rho = err.err_rho;
    record.err_psi = err.err_psi;
    record.err_sa = err.err_sa;
    record.mass_drift_rel = ((u.amplitude_mass() - m0) / m0).abs();
    Ok(record)
}

/// Runs every `(scheme, ε, nx, nt)` cell of the sweep against shared
/// references and returns the records sorted by that tuple.
///
/// References are generated first (each once), then the cells run on the
/// rayon pool; the result does not depend on scheduling.
pub fn run_convergence_sweep_with(cfg: &SweepConfig, store: &ReferenceStore) -> Result<Vec<ErrorRecord>> {
    cfg.validate()?;
    let grid_cells = cells(cfg);

    let mut keys: Vec<ReferenceKey> = Vec::new();
    for c in &grid_cells {
        for key in [wkb_reference_key(cfg, c.scheme, c.eps, c.nt), wave_reference_key(cfg, c.eps)] {
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
    }
    keys.par_iter()
        .map(|k| store.get(k, &cfg.initial_data).map(|_| ()))
        .collect::<Result<Vec<()>>>()?;

    let mut records = grid_cells
        .into_par_iter()
        .map(|c| run_cell(cfg, store, c))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| {
        a.scheme
            .name()
            .cmp(b.scheme.name())
            .then(a.eps.total_cmp(&b.eps))
            .then_with(|| (a.nx, a.nt).cmp(&(b.nx, b.nt)))
    });
    Ok(records)
}

/// [`run_convergence_sweep_with`] using the configured cache directory.
pub fn run_convergence_sweep(cfg: &SweepConfig) -> Result<Vec<ErrorRecord>> {
    run_convergence_sweep_with(cfg, &ReferenceStore::new(cfg.cache_dir.clone()))
}
