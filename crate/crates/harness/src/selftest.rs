//! Quick invariant checks run by `ua-wkb selftest`.

use std::sync::Arc;

use ua_wkb::diagnostics::bracket_24_closed_form;
use ua_wkb::{
    commutator_bracket, dft, evolve, reconstruct_wave, sigma_s_norm, tssp_step, Complex64, ComplexField,
    Direction, PeriodicGrid, Potential, SchemeKind, SchemeSpec, TimeMarch, TsspOrder, WaveState, WkbState,
};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, value: f64, limit: f64) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: value <= limit,
        detail: format!("{value:.3e} (limit {limit:.0e})"),
    }
}

fn state(g: &Arc<PeriodicGrid>) -> WkbState {
    WkbState::from_fns(g, |x| 0.5 * x.sin(), |x| Complex64::new(x.sin(), 0.0)).expect("finite data")
}

fn dft_round_trip() -> ua_wkb::Result<f64> {
    let g = PeriodicGrid::new(64)?;
    let f = ComplexField::from_fn(&g, |x| Complex64::new((3.0 * x).cos(), x.sin().exp()));
    let back = dft(&g, &dft(&g, f.values(), Direction::Forward)?, Direction::Inverse)?;
    Ok(f.values()
        .iter()
        .zip(&back)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

fn l2_drift(kind: SchemeKind, eps: f64) -> ua_wkb::Result<f64> {
    let g = PeriodicGrid::new(64)?;
    let u0 = state(&g);
    let spec = SchemeSpec::new(kind, eps, Potential::trig_ratio(&g))?;
    let u = evolve(&u0, &spec, &TimeMarch::new(0.2, 64)?)?;
    Ok(((u.amplitude_mass() - u0.amplitude_mass()) / u0.amplitude_mass()).abs())
}

fn tssp_mass_drift() -> ua_wkb::Result<f64> {
    let g = PeriodicGrid::new(256)?;
    let v = Potential::trig_ratio(&g);
    let mut w: WaveState = reconstruct_wave(&state(&g), 0.125)?;
    let m0 = w.mass();
    for _ in 0..64 {
        w = tssp_step(&w, 0.2 / 64.0, &v, TsspOrder::Four)?;
    }
    Ok(((w.mass() - m0) / m0).abs())
}

fn brackets() -> ua_wkb::Result<(f64, f64)> {
    let g = PeriodicGrid::new(32)?;
    let v = Potential::trig_ratio(&g);
    let u = state(&g);
    let zero = sigma_s_norm(&commutator_bracket(2, 3, &u, 0.3, &v)?, 2.0)?;
    let composed = commutator_bracket(2, 4, &u, 0.3, &v)?;
    let closed = bracket_24_closed_form(&u, 0.3)?;
    let diff = WkbState::new(
        composed.phase().zip_map(closed.phase(), |a, b| a - b)?,
        composed.amplitude().zip_map(closed.amplitude(), |a, b| a - b)?,
    )?;
    Ok((zero, sigma_s_norm(&diff, 2.0)? / sigma_s_norm(&closed, 2.0)?))
}

/// Runs the quick suite; every check reports instead of panicking.
pub fn run_selftest() -> Vec<CheckOutcome> {
    let failed = |name: &'static str, e: ua_wkb::Error| CheckOutcome {
        name,
        passed: false,
        detail: e.to_string(),
    };
    let mut out = Vec::new();
    out.push(dft_round_trip().map_or_else(|e| failed("dft round trip", e), |v| check("dft round trip", v, 1e-13)));
    for (name, kind, eps) in [
        ("lie L2 preservation, eps = 0", SchemeKind::Lie1234, 0.0),
        ("lie L2 preservation, eps = 1/16", SchemeKind::Lie1234, 0.0625),
        ("strang L2 preservation, eps = 0", SchemeKind::StrangPalindromic, 0.0),
        ("strang L2 preservation, eps = 1/16", SchemeKind::StrangPalindromic, 0.0625),
    ] {
        out.push(l2_drift(kind, eps).map_or_else(|e| failed(name, e), |v| check(name, v, 1e-12)));
    }
    out.push(tssp_mass_drift().map_or_else(|e| failed("tssp4 mass", e), |v| check("tssp4 mass", v, 1e-12)));
    match brackets() {
        Ok((zero, rel)) => {
            out.push(check("[N2,N3] vanishes", zero, 1e-12));
            out.push(check("[N2,N4] closed form", rel, 1e-10));
        }
        Err(e) => out.push(failed("brackets", e)),
    }
    out
}
