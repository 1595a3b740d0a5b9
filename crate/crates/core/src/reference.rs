//! Ground-truth generators: time-splitting spectral integration of the wave
//! equation `iε∂ₜΨ = -(ε²/2)∂ₓₓΨ + VΨ`, reconstruction `Ψ = A e^{iS/ε}`, and a
//! Cole–Hopf solver for the viscous eikonal equation.

use num_complex::Complex;

use crate::composition::{yoshida4_compose, OneStep};
use crate::error::{Error, Result};
use crate::flows::{Potential, WkbState};
use crate::scalar::Real;
use crate::spectral::{ensure_same_grid, ComplexField, RealField};

/// Wave function together with the semiclassical parameter it belongs to.
#[derive(Clone, Debug)]
pub struct WaveState<T: Real> {
    psi: ComplexField<T>,
    eps: T,
}

impl<T: Real> WaveState<T> {
    pub fn new(psi: ComplexField<T>, eps: T) -> Result<Self> {
        if !(eps > T::zero() && eps.is_finite()) {
            return Err(Error::invalid(format!("wave states need eps > 0, got {eps}")));
        }
        if !psi.is_finite() {
            return Err(Error::invalid("wave function contains non-finite samples"));
        }
        Ok(Self { psi, eps })
    }

    pub fn psi(&self) -> &ComplexField<T> {
        &self.psi
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn mass(&self) -> T {
        self.psi.mass()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TsspOrder {
    Two,
    Four,
}

fn kick<T: Real>(psi: &ComplexField<T>, tau: T, eps: T, potential: &Potential<T>) -> Result<ComplexField<T>> {
    psi.zip_real(potential.samples(), |p, v| {
        p * Complex::from_polar(T::one(), -tau * v / eps)
    })
}

fn tssp2<T: Real>(w: &WaveState<T>, h: T, potential: &Potential<T>) -> Result<WaveState<T>> {
    let eps = w.eps;
    let half = T::lit(0.5) * h;
    let psi = kick(&w.psi, half, eps, potential)?;
    let rate = T::lit(0.5) * eps * h;
    let psi = psi.apply_symbol(|k| Complex::from_polar(T::one(), -rate * T::of_i64(k * k)));
    let psi = kick(&psi, half, eps, potential)?;
    Ok(WaveState { psi, eps })
}

/// One time-splitting spectral step of order 2 (potential/kinetic/potential)
/// or order 4 (triple jump of the order-2 map).
pub fn tssp_step<T: Real>(
    w: &WaveState<T>,
    h: T,
    potential: &Potential<T>,
    order: TsspOrder,
) -> Result<WaveState<T>> {
    ensure_same_grid(w.psi.grid(), potential.grid())?;
    if !h.is_finite() {
        return Err(Error::invalid("step must be finite"));
    }
    match order {
        TsspOrder::Two => tssp2(w, h, potential),
        TsspOrder::Four => {
            let base = |s: &WaveState<T>, tau: T| tssp2(s, tau, potential);
            yoshida4_compose(base).step(w, h)
        }
    }
}

/// `Ψ_j = A_j e^{i S_j / ε}`.
pub fn reconstruct_wave<T: Real>(u: &WkbState<T>, eps: T) -> Result<WaveState<T>> {
    if !(eps > T::zero() && eps.is_finite()) {
        return Err(Error::invalid(format!("reconstruction needs eps > 0, got {eps}")));
    }
    let psi = u
        .amplitude()
        .zip_real(u.phase(), |a, s| a * Complex::from_polar(T::one(), s / eps))?;
    WaveState::new(psi, eps)
}

/// Largest admissible `max|S0| / (2ε²)` for the Cole–Hopf oracle.
pub const COLE_HOPF_EXPONENT_LIMIT: f64 = 500.0;

/// Solves `∂ₜS + |∂ₓS|²/2 + V = ε²∂ₓₓS` over `[0, h]` through the
/// substitution `w = e^{-S/(2ε²)} - 1`, which turns it into the linear
/// problem `∂ₜw = ε²∂ₓₓw + (V/2ε²)(w + 1)`.
///
/// The linear problem is Strang-split into a heat multiplier and the exact
/// reaction `w ← (w + 1) e^{Vτ/(2ε²)} - 1` with `substeps` steps.
pub fn cole_hopf_eikonal_oracle<T: Real>(
    s0: &RealField<T>,
    potential: &Potential<T>,
    h: T,
    eps: T,
    substeps: usize,
) -> Result<RealField<T>> {
    ensure_same_grid(s0.grid(), potential.grid())?;
    if !(eps > T::zero()) {
        return Err(Error::invalid("Cole-Hopf oracle needs eps > 0"));
    }
    if substeps == 0 {
        return Err(Error::invalid("Cole-Hopf oracle needs at least one substep"));
    }
    if !(h >= T::zero() && h.is_finite()) {
        return Err(Error::invalid("step must be finite and >= 0"));
    }
    let two_eps2 = T::lit(2.0) * eps * eps;
    let ratio = s0.max_abs() / two_eps2;
    let limit = T::lit(COLE_HOPF_EXPONENT_LIMIT);
    if !(ratio <= limit) {
        return Err(Error::OverflowRisk {
            ratio: ratio.to_f64().unwrap_or(f64::INFINITY),
            limit: COLE_HOPF_EXPONENT_LIMIT,
        });
    }

    let tau = h / T::of_usize(substeps);
    let half = T::lit(0.5) * tau;
    let react = |w: &RealField<T>, dt: T| {
        w.zip_map(potential.samples(), |w, v| (w + T::one()) * (v * dt / two_eps2).exp() - T::one())
    };
    let diffusion = eps * eps * tau;
    let mut w = s0.map(|s| (-s / two_eps2).exp_m1());
    for _ in 0..substeps {
        w = react(&w, half)?;
        w = w.apply_even_multiplier(|k| (-diffusion * T::of_i64(k * k)).exp());
        w = react(&w, half)?;
    }
    let mut out = Vec::with_capacity(w.values().len());
    for (node, &wj) in w.values().iter().enumerate() {
        let shifted = wj + T::one();
        if !(shifted > T::zero()) {
            return Err(Error::LogDomainError {
                node,
                value: shifted.to_f64().unwrap_or(f64::NAN),
            });
        }
        out.push(-two_eps2 * wj.ln_1p());
    }
    RealField::new(s0.grid().clone(), out)
}
