//! Conserved quantities, discrete error metrics, the composite Sobolev norm
//! `‖u‖_s = (‖S‖²_{H^{s+2}} + ‖A‖²_{H^s})^{1/2}` and the generator algebra of
//! the four sub-flows.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::flows::{Potential, WkbState};
use crate::reference::{reconstruct_wave, WaveState};
use crate::scalar::Real;
use crate::spectral::{ensure_same_grid, ComplexField, RealField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    Wave,
    Wkb,
}

/// Mass, energy and momentum of a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConservedReport<T: Real> {
    pub mass: T,
    /// Literal `∫ ε²|∂ₓΨ|² + V|Ψ|²`; not invariant in time.
    pub energy: T,
    /// `∫ ε²|∂ₓΨ|²/2 + V|Ψ|²`, the invariant energy of the flow.
    pub hamiltonian: T,
    pub momentum: T,
    pub formulation: Formulation,
}

fn integrate<T: Real>(dx: T, values: impl Iterator<Item = T>) -> T {
    dx * values.sum::<T>()
}

/// `mass = ∫|Ψ|²`, `energy = ∫ ε²|∂ₓΨ|² + V|Ψ|²`, `momentum = ε Im ∫ Ψ̄ ∂ₓΨ`.
pub fn wave_conserved_quantities<T: Real>(
    w: &WaveState<T>,
    potential: &Potential<T>,
) -> Result<ConservedReport<T>> {
    let psi = w.psi();
    ensure_same_grid(psi.grid(), potential.grid())?;
    let eps = w.eps();
    let dpsi = psi.derivative(1)?;
    let dx = psi.grid().dx();
    let v = potential.samples().values();
    let p = psi.values();
    let d = dpsi.values();
    let half = T::lit(0.5);
    Ok(ConservedReport {
        mass: psi.mass(),
        energy: integrate(
            dx,
            (0..p.len()).map(|j| eps * eps * d[j].norm_sqr() + v[j] * p[j].norm_sqr()),
        ),
        hamiltonian: integrate(
            dx,
            (0..p.len()).map(|j| half * eps * eps * d[j].norm_sqr() + v[j] * p[j].norm_sqr()),
        ),
        momentum: eps * integrate(dx, (0..p.len()).map(|j| (p[j].conj() * d[j]).im)),
        formulation: Formulation::Wave,
    })
}

/// WKB counterparts with `G = ε∂ₓA + iA∂ₓS`: `∫|A|²`, `∫ |G|² + V|A|²`, `Im ∫ Ā G`
/// (and `∫ |G|²/2 + V|A|²`).
pub fn wkb_conserved_quantities<T: Real>(
    u: &WkbState<T>,
    eps: T,
    potential: &Potential<T>,
) -> Result<ConservedReport<T>> {
    ensure_same_grid(u.grid(), potential.grid())?;
    let a = u.amplitude().values();
    let da = u.amplitude().derivative(1)?;
    let ds = u.phase().derivative(1)?;
    let g: Vec<Complex<T>> = (0..a.len())
        .map(|j| da.values()[j] * eps + a[j] * Complex::new(T::zero(), ds.values()[j]))
        .collect();
    let v = potential.samples().values();
    let dx = u.grid().dx();
    Ok(ConservedReport {
        mass: u.amplitude_mass(),
        energy: integrate(dx, (0..a.len()).map(|j| g[j].norm_sqr() + v[j] * a[j].norm_sqr())),
        hamiltonian: integrate(
            dx,
            (0..a.len()).map(|j| T::lit(0.5) * g[j].norm_sqr() + v[j] * a[j].norm_sqr()),
        ),
        momentum: integrate(dx, (0..a.len()).map(|j| (a[j].conj() * g[j]).im)),
        formulation: Formulation::Wkb,
    })
}

/// Relative errors of a WKB solution against the wave and WKB references.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorTriple<T: Real> {
    /// `‖ρ_ref - |A|²‖_{L¹} / ‖ρ_ref‖_{L¹}` with `ρ_ref = |Ψ_ref|²`.
    pub err_rho: T,
    /// `‖Ψ_ref - A e^{iS/ε}‖_{L²} / ‖Ψ_ref‖_{L²}`.
    pub err_psi: T,
    /// Joint relative L² deviation of `(S, A)`.
    pub err_sa: T,
}

fn relative<T: Real>(num: T, den: T, what: &str) -> Result<T> {
    if den > T::zero() {
        Ok(num / den)
    } else {
        Err(Error::DegenerateReference(format!("{what} of the reference vanishes")))
    }
}

/// Discrete error metrics; all fields must share one grid.
pub fn error_metrics<T: Real>(
    psi_ref: &WaveState<T>,
    sa_ref: &WkbState<T>,
    test: &WkbState<T>,
    eps: T,
) -> Result<ErrorTriple<T>> {
    let grid = test.grid();
    ensure_same_grid(psi_ref.psi().grid(), grid)?;
    ensure_same_grid(sa_ref.grid(), grid)?;
    let dx = grid.dx();

    let rho_ref: Vec<T> = psi_ref.psi().values().iter().map(|p| p.norm_sqr()).collect();
    let rho_diff = integrate(
        dx,
        rho_ref
            .iter()
            .zip(test.amplitude().values())
            .map(|(r, a)| (*r - a.norm_sqr()).abs()),
    );
    let rho_norm = integrate(dx, rho_ref.iter().copied());
    let err_rho = relative(rho_diff, rho_norm, "L1 norm of the density")?;

    let psi_test = reconstruct_wave(test, eps)?;
    let psi_diff = psi_ref.psi().zip_map(psi_test.psi(), |a, b| a - b)?.l2_norm();
    let err_psi = relative(psi_diff, psi_ref.psi().l2_norm(), "L2 norm of the wave function")?;

    let ds = sa_ref.phase().zip_map(test.phase(), |a, b| a - b)?.l2_norm();
    let da = sa_ref.amplitude().zip_map(test.amplitude(), |a, b| a - b)?.l2_norm();
    let num = ds * ds + da * da;
    let s_norm = sa_ref.phase().l2_norm();
    let a_norm = sa_ref.amplitude().l2_norm();
    let den = s_norm * s_norm + a_norm * a_norm;
    let err_sa = relative(num, den, "joint L2 norm of (S, A)")?.sqrt();

    Ok(ErrorTriple {
        err_rho,
        err_psi,
        err_sa,
    })
}

/// Composite norm `(‖S‖²_{H^{s+2}} + ‖A‖²_{H^s})^{1/2}`.
pub fn sigma_s_norm<T: Real>(u: &WkbState<T>, s: T) -> Result<T> {
    let hs = u.phase().sobolev_norm(s + T::lit(2.0))?;
    let ha = u.amplitude().sobolev_norm(s)?;
    Ok((hs * hs + ha * ha).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsConfig<T: Real> {
    /// Sobolev index; must exceed `d/2 + 1 = 1.5`.
    pub s: T,
}

impl<T: Real> Default for DiagnosticsConfig<T> {
    fn default() -> Self {
        Self { s: T::lit(2.0) }
    }
}

impl<T: Real> DiagnosticsConfig<T> {
    pub fn new(s: T) -> Result<Self> {
        let cfg = Self { s };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s > T::lit(1.5) && self.s.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(format!("Sobolev index must exceed 1.5, got {}", self.s)))
        }
    }

    pub fn sigma_norm(&self, u: &WkbState<T>) -> Result<T> {
        sigma_s_norm(u, self.s)
    }
}

/// Spectral derivatives of one state, computed once and shared by the
/// generator formulas.
struct Jet<'a, T: Real> {
    s: &'a RealField<T>,
    a: &'a ComplexField<T>,
    s1: RealField<T>,
    s2: RealField<T>,
    a1: ComplexField<T>,
    a2: ComplexField<T>,
}

impl<'a, T: Real> Jet<'a, T> {
    fn new(u: &'a WkbState<T>) -> Result<Self> {
        Ok(Self {
            s: u.phase(),
            a: u.amplitude(),
            s1: u.phase().derivative(1)?,
            s2: u.phase().derivative(2)?,
            a1: u.amplitude().derivative(1)?,
            a2: u.amplitude().derivative(2)?,
        })
    }

    fn len(&self) -> usize {
        self.s.values().len()
    }
}

fn tangent<T: Real>(s: Vec<T>, a: Vec<Complex<T>>, like: &WkbState<T>) -> Result<WkbState<T>> {
    let grid = like.grid().clone();
    WkbState::new(RealField::new(grid.clone(), s)?, ComplexField::new(grid, a)?)
}

fn generator_index(i: usize) -> Result<()> {
    if (1..=4).contains(&i) {
        Ok(())
    } else {
        Err(Error::invalid(format!("generator index must be 1..4, got {i}")))
    }
}

/// `N_i(u)`, the right-hand side of sub-flow `i`, as a tangent `(S, A)` pair.
pub fn generator_apply<T: Real>(
    i: usize,
    u: &WkbState<T>,
    eps: T,
    potential: &Potential<T>,
) -> Result<WkbState<T>> {
    generator_index(i)?;
    ensure_same_grid(u.grid(), potential.grid())?;
    let j = Jet::new(u)?;
    let n = j.len();
    let half = T::lit(0.5);
    let iu = Complex::new(T::zero(), T::one());
    let (s, a): (Vec<T>, Vec<Complex<T>>) = match i {
        1 => (0..n)
            .map(|x| {
                let sx = j.s1.values()[x];
                let sxx = j.s2.values()[x];
                let ds = -half * sx * sx;
                let da = -j.a1.values()[x] * sx - j.a.values()[x] * (half * sxx)
                    + iu * j.a2.values()[x] * half;
                (ds, da)
            })
            .unzip(),
        2 => {
            let c = iu * ((eps - T::one()) * half);
            (vec![T::zero(); n], j.a2.values().iter().map(|&a2| c * a2).collect())
        }
        3 => (
            potential.samples().values().iter().map(|&v| -v).collect(),
            vec![Complex::default(); n],
        ),
        _ => (0..n)
            .map(|x| {
                let sxx = j.s2.values()[x];
                (eps * eps * sxx, -iu * j.a.values()[x] * (eps * sxx))
            })
            .unzip(),
    };
    tangent(s, a, u)
}

/// Fréchet derivative `DN_i(u)·u0`.
pub fn generator_derivative<T: Real>(
    i: usize,
    u: &WkbState<T>,
    u0: &WkbState<T>,
    eps: T,
) -> Result<WkbState<T>> {
    generator_index(i)?;
    ensure_same_grid(u.grid(), u0.grid())?;
    let n = u.grid().n();
    if i == 3 {
        return Ok(WkbState::zeros(u.grid()));
    }
    let base = Jet::new(u)?;
    let dir = Jet::new(u0)?;
    let half = T::lit(0.5);
    let iu = Complex::new(T::zero(), T::one());
    let (s, a): (Vec<T>, Vec<Complex<T>>) = match i {
        1 => (0..n)
            .map(|x| {
                let (sx, sxx) = (base.s1.values()[x], base.s2.values()[x]);
                let (s0x, s0xx) = (dir.s1.values()[x], dir.s2.values()[x]);
                let (a, ax) = (base.a.values()[x], base.a1.values()[x]);
                let (a0, a0x, a0xx) = (dir.a.values()[x], dir.a1.values()[x], dir.a2.values()[x]);
                let ds = -sx * s0x;
                let da = -a0x * sx - a0 * (half * sxx) - ax * s0x - a * (half * s0xx)
                    + iu * a0xx * half;
                (ds, da)
            })
            .unzip(),
        2 => {
            let c = iu * ((eps - T::one()) * half);
            (vec![T::zero(); n], dir.a2.values().iter().map(|&a2| c * a2).collect())
        }
        _ => (0..n)
            .map(|x| {
                let sxx = base.s2.values()[x];
                let s0xx = dir.s2.values()[x];
                let a = base.a.values()[x];
                let a0 = dir.a.values()[x];
                (eps * eps * s0xx, -iu * (a0 * sxx + a * s0xx) * eps)
            })
            .unzip(),
    };
    tangent(s, a, u)
}

fn difference<T: Real>(a: &WkbState<T>, b: &WkbState<T>) -> Result<WkbState<T>> {
    WkbState::new(
        a.phase().zip_map(b.phase(), |x, y| x - y)?,
        a.amplitude().zip_map(b.amplitude(), |x, y| x - y)?,
    )
}

/// `[N_i, N_j](u) = DN_i(u)·N_j(u) - DN_j(u)·N_i(u)`, from the explicit
/// derivative formulas.
pub fn commutator_bracket<T: Real>(
    i: usize,
    j: usize,
    u: &WkbState<T>,
    eps: T,
    potential: &Potential<T>,
) -> Result<WkbState<T>> {
    let nj = generator_apply(j, u, eps, potential)?;
    let ni = generator_apply(i, u, eps, potential)?;
    let lhs = generator_derivative(i, u, &nj, eps)?;
    let rhs = generator_derivative(j, u, &ni, eps)?;
    difference(&lhs, &rhs)
}

/// Closed form `[N₂, N₄](u) = (ε(ε-1)/2) (0; A∂⁴S + 2∂A ∂³S)`.
pub fn bracket_24_closed_form<T: Real>(u: &WkbState<T>, eps: T) -> Result<WkbState<T>> {
    let s3 = u.phase().derivative(3)?;
    let s4 = u.phase().derivative(4)?;
    let a1 = u.amplitude().derivative(1)?;
    let c = eps * (eps - T::one()) * T::lit(0.5);
    let two = T::lit(2.0);
    let a: Vec<Complex<T>> = (0..u.grid().n())
        .map(|x| (u.amplitude().values()[x] * s4.values()[x] + a1.values()[x] * (two * s3.values()[x])) * c)
        .collect();
    tangent(vec![T::zero(); a.len()], a, u)
}

/// Closed form `[N₁, N₄](u) = (ε²(∂²S)²; (ε-ε²)(∂³S ∂A + A∂⁴S/2) - iεA(∂²S)²)`.
pub fn bracket_14_closed_form<T: Real>(u: &WkbState<T>, eps: T) -> Result<WkbState<T>> {
    let s2 = u.phase().derivative(2)?;
    let s3 = u.phase().derivative(3)?;
    let s4 = u.phase().derivative(4)?;
    let a1 = u.amplitude().derivative(1)?;
    let half = T::lit(0.5);
    let iu = Complex::new(T::zero(), T::one());
    let (s, a): (Vec<T>, Vec<Complex<T>>) = (0..u.grid().n())
        .map(|x| {
            let (sxx, sxxx, sxxxx) = (s2.values()[x], s3.values()[x], s4.values()[x]);
            let amp = u.amplitude().values()[x];
            let da = (a1.values()[x] * sxxx + amp * (half * sxxxx)) * (eps - eps * eps)
                - iu * amp * (eps * sxx * sxx);
            (eps * eps * sxx * sxx, da)
        })
        .unzip();
    tangent(s, a, u)
}

/// How the last sum in the printed `[N₁, N₂]` closed form is grouped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bracket12Reading {
    /// `… + 2 Σ_k ∇∂ₖS·∇∂ₖA + ∂ₖA Δ∂ₖS/2`: the factor 2 binds to the first term only.
    Literal,
    /// `… + 2 Σ_k (∇∂ₖS·∇∂ₖA + ∂ₖA Δ∂ₖS/2)`.
    Grouped,
}

/// The printed `[N₁, N₂]` closed form in one dimension, under either reading.
pub fn bracket_12_closed_form<T: Real>(
    u: &WkbState<T>,
    eps: T,
    reading: Bracket12Reading,
) -> Result<WkbState<T>> {
    let s2 = u.phase().derivative(2)?;
    let s3 = u.phase().derivative(3)?;
    let s4 = u.phase().derivative(4)?;
    let a1 = u.amplitude().derivative(1)?;
    let a2 = u.amplitude().derivative(2)?;
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let tail_weight = match reading {
        Bracket12Reading::Literal => half,
        Bracket12Reading::Grouped => T::one(),
    };
    let c = Complex::new(T::zero(), (eps - T::one()) * half);
    let a: Vec<Complex<T>> = (0..u.grid().n())
        .map(|x| {
            let amp = u.amplitude().values()[x];
            let (ax, axx) = (a1.values()[x], a2.values()[x]);
            let (sxx, sxxx, sxxxx) = (s2.values()[x], s3.values()[x], s4.values()[x]);
            let body = ax * sxxx + amp * (half * sxxxx) + axx * (two * sxx) + ax * (tail_weight * sxxx);
            c * body
        })
        .collect();
    tangent(vec![T::zero(); a.len()], a, u)
}
