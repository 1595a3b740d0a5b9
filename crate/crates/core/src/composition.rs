//! Lie and Strang compositions of the sub-flows, the Yoshida triple jump and
//! the time-march driver.
//!
//! Compositions are written right-to-left: `φ¹∘φ²∘φ³∘φ⁴` runs `φ⁴` first.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::flows::{EikonalSettings, Potential, SubFlow, WkbState};
use crate::reference::{tssp_step, TsspOrder, WaveState};
use crate::scalar::Real;

/// Available one-step schemes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    /// First-order `φ¹_h∘φ²_h∘φ³_h∘φ⁴_h` on the WKB system.
    Lie1234,
    /// Second-order palindromic composition on the WKB system.
    StrangPalindromic,
    /// Second-order kinetic/potential splitting of the wave equation.
    TsspStrang,
    /// Triple-jump composition of [`SchemeKind::TsspStrang`], order four.
    TsspYoshida4,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::Lie1234,
        SchemeKind::StrangPalindromic,
        SchemeKind::TsspStrang,
        SchemeKind::TsspYoshida4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Lie1234 => "lie_1234",
            SchemeKind::StrangPalindromic => "strang_palindromic",
            SchemeKind::TsspStrang => "tssp_strang",
            SchemeKind::TsspYoshida4 => "tssp_yoshida4",
        }
    }

    /// Whether the scheme advances a [`WkbState`] (as opposed to a wave function).
    pub fn is_wkb(self) -> bool {
        matches!(self, SchemeKind::Lie1234 | SchemeKind::StrangPalindromic)
    }

    pub fn order(self) -> u32 {
        match self {
            SchemeKind::Lie1234 => 1,
            SchemeKind::StrangPalindromic | SchemeKind::TsspStrang => 2,
            SchemeKind::TsspYoshida4 => 4,
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "lie_1234" | "lie" => Ok(SchemeKind::Lie1234),
            "strang_palindromic" | "strang" => Ok(SchemeKind::StrangPalindromic),
            "tssp_strang" | "tssp2" => Ok(SchemeKind::TsspStrang),
            "tssp_yoshida4" | "tssp4" => Ok(SchemeKind::TsspYoshida4),
            other => Err(Error::invalid(format!("unknown scheme '{other}'"))),
        }
    }
}

/// One sub-flow application with step `fraction · h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Substep {
    pub flow: SubFlow,
    pub fraction: f64,
}

const fn sub(flow: SubFlow, fraction: f64) -> Substep {
    Substep { flow, fraction }
}

/// Execution order of `φ¹_h∘φ²_h∘φ³_h∘φ⁴_h`.
pub const LIE_SEQUENCE: [Substep; 4] = [
    sub(SubFlow::Viscosity, 1.0),
    sub(SubFlow::Potential, 1.0),
    sub(SubFlow::Dispersion, 1.0),
    sub(SubFlow::Transport, 1.0),
];

/// Execution order of the palindromic second-order composition.
pub const STRANG_SEQUENCE: [Substep; 7] = [
    sub(SubFlow::Transport, 0.5),
    sub(SubFlow::Dispersion, 0.5),
    sub(SubFlow::Potential, 0.5),
    sub(SubFlow::Viscosity, 1.0),
    sub(SubFlow::Potential, 0.5),
    sub(SubFlow::Dispersion, 0.5),
    sub(SubFlow::Transport, 0.5),
];

/// Full description of a scheme instance.
#[derive(Clone, Debug)]
pub struct SchemeSpec<T: Real> {
    pub kind: SchemeKind,
    pub eps: T,
    pub potential: Potential<T>,
    pub eikonal: EikonalSettings<T>,
    pub eps_max: T,
    /// Apply 2/3-rule truncation after every step (post-caustic runs).
    pub dealias: bool,
}

impl<T: Real> SchemeSpec<T> {
    pub fn new(kind: SchemeKind, eps: T, potential: Potential<T>) -> Result<Self> {
        let spec = Self {
            kind,
            eps,
            potential,
            eikonal: EikonalSettings::default(),
            eps_max: T::one(),
            dealias: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_eikonal(mut self, eikonal: EikonalSettings<T>) -> Result<Self> {
        self.eikonal = eikonal;
        self.validate()?;
        Ok(self)
    }

    pub fn with_eps_max(mut self, eps_max: T) -> Result<Self> {
        self.eps_max = eps_max;
        self.validate()?;
        Ok(self)
    }

    pub fn with_dealias(mut self, dealias: bool) -> Self {
        self.dealias = dealias;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.eikonal.validate()?;
        if !(self.eps >= T::zero() && self.eps <= self.eps_max) {
            return Err(Error::invalid(format!(
                "eps = {} outside [0, {}]",
                self.eps, self.eps_max
            )));
        }
        if !self.kind.is_wkb() && self.eps == T::zero() {
            return Err(Error::invalid("wave-function schemes need eps > 0"));
        }
        Ok(())
    }

    fn run_sequence(&self, sequence: &[Substep], u: &WkbState<T>, h: T) -> Result<WkbState<T>> {
        let mut state = u.clone();
        for s in sequence {
            state = s
                .flow
                .apply(&state, T::lit(s.fraction) * h, self.eps, &self.potential, &self.eikonal)?;
        }
        Ok(if self.dealias {
            state.dealias_two_thirds()
        } else {
            state
        })
    }
}

fn require_kind<T: Real>(spec: &SchemeSpec<T>, kind: SchemeKind) -> Result<()> {
    if spec.kind == kind {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "scheme spec is {}, expected {}",
            spec.kind, kind
        )))
    }
}

/// One step of the first-order scheme.
pub fn lie_step<T: Real>(u: &WkbState<T>, h: T, spec: &SchemeSpec<T>) -> Result<WkbState<T>> {
    require_kind(spec, SchemeKind::Lie1234)?;
    spec.run_sequence(&LIE_SEQUENCE, u, h)
}

/// One step of the second-order palindromic scheme.
pub fn strang_step<T: Real>(u: &WkbState<T>, h: T, spec: &SchemeSpec<T>) -> Result<WkbState<T>> {
    require_kind(spec, SchemeKind::StrangPalindromic)?;
    spec.run_sequence(&STRANG_SEQUENCE, u, h)
}

/// A one-step map `state ↦ state(h)`.
pub trait OneStep<T: Real, S> {
    fn step(&self, state: &S, h: T) -> Result<S>;
}

impl<T: Real, S, F> OneStep<T, S> for F
where
    F: Fn(&S, T) -> Result<S>,
{
    fn step(&self, state: &S, h: T) -> Result<S> {
        self(state, h)
    }
}

impl<T: Real> OneStep<T, WkbState<T>> for SchemeSpec<T> {
    fn step(&self, state: &WkbState<T>, h: T) -> Result<WkbState<T>> {
        match self.kind {
            SchemeKind::Lie1234 => lie_step(state, h, self),
            SchemeKind::StrangPalindromic => strang_step(state, h, self),
            other => Err(Error::invalid(format!("{other} does not advance WKB states"))),
        }
    }
}

impl<T: Real> OneStep<T, WaveState<T>> for SchemeSpec<T> {
    fn step(&self, state: &WaveState<T>, h: T) -> Result<WaveState<T>> {
        let order = match self.kind {
            SchemeKind::TsspStrang => TsspOrder::Two,
            SchemeKind::TsspYoshida4 => TsspOrder::Four,
            other => return Err(Error::invalid(format!("{other} does not advance wave states"))),
        };
        if (state.eps() - self.eps).abs() > T::zero() {
            return Err(Error::invalid("wave state and scheme use different eps"));
        }
        tssp_step(state, h, &self.potential, order)
    }
}

/// Triple-jump coefficients `(γ₁, γ₂)` solving `2γ₁ + γ₂ = 1`, `2γ₁³ + γ₂³ = 0`.
pub fn yoshida_coefficients<T: Real>() -> (T, T) {
    let two = T::lit(2.0);
    let gamma1 = T::one() / (two - two.cbrt());
    (gamma1, T::one() - two * gamma1)
}

/// Fourth-order composition `base(γ₁h)∘base(γ₂h)∘base(γ₁h)` of a symmetric map.
#[derive(Clone, Debug)]
pub struct Yoshida4<M> {
    base: M,
}

pub fn yoshida4_compose<M>(base: M) -> Yoshida4<M> {
    Yoshida4 { base }
}

impl<T: Real, S, M: OneStep<T, S>> OneStep<T, S> for Yoshida4<M> {
    fn step(&self, state: &S, h: T) -> Result<S> {
        let (g1, g2) = yoshida_coefficients::<T>();
        let a = self.base.step(state, g1 * h)?;
        let b = self.base.step(&a, g2 * h)?;
        self.base.step(&b, g1 * h)
    }
}

/// Uniform time grid with `n_steps` steps of size `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeMarch<T: Real> {
    pub h: T,
    pub n_steps: usize,
}

impl<T: Real> TimeMarch<T> {
    pub fn new(t_final: T, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::invalid("time march needs at least one step"));
        }
        if !(t_final > T::zero() && t_final.is_finite()) {
            return Err(Error::invalid(format!("final time must be positive, got {t_final}")));
        }
        Ok(Self {
            h: t_final / T::of_usize(n_steps),
            n_steps,
        })
    }

    pub fn t_final(&self) -> T {
        self.h * T::of_usize(self.n_steps)
    }

    pub fn time_at(&self, step: usize) -> T {
        self.h * T::of_usize(step)
    }
}

fn annotate<T: Real>(err: Error, step: usize, time: T) -> Error {
    Error::AtStep {
        step,
        time: time.to_f64().unwrap_or(f64::NAN),
        source: Box::new(err),
    }
}

/// Applies `stepper` `march.n_steps` times.
pub fn evolve<T: Real, S: Clone, M: OneStep<T, S>>(
    u0: &S,
    stepper: &M,
    march: &TimeMarch<T>,
) -> Result<S> {
    evolve_observed(u0, stepper, march, |_, _, _| None::<()>).map(|(s, _)| s)
}

/// Like [`evolve`], calling `observer(step, time, state)` after every step and
/// collecting the `Some` outputs.
pub fn evolve_observed<T: Real, S: Clone, M: OneStep<T, S>, O>(
    u0: &S,
    stepper: &M,
    march: &TimeMarch<T>,
    mut observer: impl FnMut(usize, T, &S) -> Option<O>,
) -> Result<(S, Vec<O>)> {
    let mut state = u0.clone();
    let mut log = Vec::new();
    for i in 0..march.n_steps {
        state = stepper
            .step(&state, march.h)
            .map_err(|e| annotate(e, i + 1, march.time_at(i)))?;
        if let Some(o) = observer(i + 1, march.time_at(i + 1), &state) {
            log.push(o);
        }
    }
    Ok((state, log))
}
