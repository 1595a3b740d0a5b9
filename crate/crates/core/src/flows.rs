//! The four exactly solvable pieces of the viscous WKB system.
//!
//! For the phase `S` (real) and amplitude `A` (complex):
//!
//! | flow | phase                     | amplitude                          |
//! |------|---------------------------|------------------------------------|
//! | 1    | `∂ₜS + |∂ₓS|²/2 = 0`      | `∂ₜA + ∂ₓS ∂ₓA + A ∂ₓₓS/2 = i∂ₓₓA/2` |
//! | 2    | `∂ₜS = 0`                 | `∂ₜA = i(ε-1)∂ₓₓA/2`               |
//! | 3    | `∂ₜS = -V`                | `∂ₜA = 0`                          |
//! | 4    | `∂ₜS = ε²∂ₓₓS`            | `∂ₜA = -iεA ∂ₓₓS`                  |
//!
//! Every flow preserves the discrete L² norm of `A`.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{ensure_same_grid, ComplexField, PeriodicGrid, RealField};

/// Phase/amplitude pair `(S, A)` on one grid.
#[derive(Clone, Debug)]
pub struct WkbState<T: Real> {
    s: RealField<T>,
    a: ComplexField<T>,
}

impl<T: Real> WkbState<T> {
    pub fn new(s: RealField<T>, a: ComplexField<T>) -> Result<Self> {
        ensure_same_grid(s.grid(), a.grid())?;
        if !s.is_finite() || !a.is_finite() {
            return Err(Error::invalid("WKB state contains non-finite samples"));
        }
        Ok(Self { s, a })
    }

    /// Samples `S0` and `A0` at the grid nodes.
    pub fn from_fns(
        grid: &Arc<PeriodicGrid<T>>,
        s0: impl Fn(T) -> T,
        a0: impl Fn(T) -> Complex<T>,
    ) -> Result<Self> {
        Self::new(RealField::from_fn(grid, s0), ComplexField::from_fn(grid, a0))
    }

    pub fn zeros(grid: &Arc<PeriodicGrid<T>>) -> Self {
        Self {
            s: RealField::zeros(grid),
            a: ComplexField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid<T>> {
        self.s.grid()
    }

    pub fn phase(&self) -> &RealField<T> {
        &self.s
    }

    pub fn amplitude(&self) -> &ComplexField<T> {
        &self.a
    }

    pub fn into_parts(self) -> (RealField<T>, ComplexField<T>) {
        (self.s, self.a)
    }

    /// Discrete `dx Σ |A_j|²`.
    pub fn amplitude_mass(&self) -> T {
        self.a.mass()
    }

    /// Spectral restriction of both components onto a coarser grid.
    pub fn restrict_to(&self, target: &Arc<PeriodicGrid<T>>) -> Result<Self> {
        Ok(Self {
            s: self.s.restrict_to(target)?,
            a: self.a.restrict_to(target)?,
        })
    }

    pub fn dealias_two_thirds(&self) -> Self {
        Self {
            s: self.s.dealias_two_thirds(),
            a: self.a.dealias_two_thirds(),
        }
    }

    pub(crate) fn from_parts_unchecked(s: RealField<T>, a: ComplexField<T>) -> Self {
        Self { s, a }
    }
}

/// Where a potential's samples came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PotentialSource {
    /// Sampled from a named closed-form expression.
    Analytic(String),
    /// Supplied as raw samples.
    Samples,
}

/// Time-independent potential sampled on a grid.
#[derive(Clone, Debug)]
pub struct Potential<T: Real> {
    samples: RealField<T>,
    source: PotentialSource,
}

impl<T: Real> Potential<T> {
    pub fn from_fn(
        grid: &Arc<PeriodicGrid<T>>,
        name: impl Into<String>,
        f: impl Fn(T) -> T,
    ) -> Result<Self> {
        let samples = RealField::from_fn(grid, f);
        if !samples.is_finite() {
            return Err(Error::invalid("potential formula produced non-finite samples"));
        }
        Ok(Self {
            samples,
            source: PotentialSource::Analytic(name.into()),
        })
    }

    pub fn from_samples(samples: RealField<T>) -> Result<Self> {
        if !samples.is_finite() {
            return Err(Error::invalid("potential contains non-finite samples"));
        }
        Ok(Self {
            samples,
            source: PotentialSource::Samples,
        })
    }

    pub fn zero(grid: &Arc<PeriodicGrid<T>>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: &Arc<PeriodicGrid<T>>, c: T) -> Self {
        Self {
            samples: RealField::constant(grid, c),
            source: PotentialSource::Analytic(format!("{c}")),
        }
    }

    /// `V(x) = sin(x) / (1 + cos(x)²)`, smooth and odd about `x = π`.
    pub fn trig_ratio(grid: &Arc<PeriodicGrid<T>>) -> Self {
        Self {
            samples: RealField::from_fn(grid, trig_ratio_potential),
            source: PotentialSource::Analytic("sin(x)/(1+cos(x)^2)".into()),
        }
    }

    pub fn samples(&self) -> &RealField<T> {
        &self.samples
    }

    pub fn source(&self) -> &PotentialSource {
        &self.source
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid<T>> {
        self.samples.grid()
    }
}

/// `sin(x) / (1 + cos(x)²)`.
pub fn trig_ratio_potential<T: Real>(x: T) -> T {
    let c = x.cos();
    x.sin() / (T::one() + c * c)
}

/// Controls for the backward-characteristics foot-point solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EikonalSettings<T: Real> {
    /// Upper bound on `h · max|∂ₓₓS|`, the Lipschitz constant of the iteration.
    pub contraction_cap: T,
    pub fp_tol: T,
    pub fp_max_iter: usize,
}

impl<T: Real> Default for EikonalSettings<T> {
    fn default() -> Self {
        Self {
            contraction_cap: T::lit(0.9),
            fp_tol: T::lit(1e-12),
            fp_max_iter: 50,
        }
    }
}

impl<T: Real> EikonalSettings<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.contraction_cap > T::zero() && self.contraction_cap < T::one()) {
            return Err(Error::invalid("contraction cap must lie in (0, 1)"));
        }
        if !(self.fp_tol > T::zero()) {
            return Err(Error::invalid("fixed-point tolerance must be positive"));
        }
        if self.fp_max_iter == 0 {
            return Err(Error::invalid("fixed-point iteration cap must be >= 1"));
        }
        Ok(())
    }
}

fn check_step<T: Real>(h: T) -> Result<()> {
    if h >= T::zero() && h.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("step must be finite and >= 0, got {h}")))
    }
}

fn check_eps<T: Real>(eps: T) -> Result<()> {
    if eps >= T::zero() && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("eps must be finite and >= 0, got {eps}")))
    }
}

/// Solves `∂ₜS + |∂ₓS|²/2 = 0` over a step `h` by backward characteristics.
///
/// For every node `x_j` the foot point `y` of `y + h v0(y) = x_j`, with
/// `v0 = ∂ₓS0` evaluated by Fourier summation, is found by fixed-point
/// iteration; the velocity is frozen along the characteristic and the phase
/// gains `v0²/2` per unit time.
pub fn solve_eikonal_characteristics<T: Real>(
    s0: &RealField<T>,
    h: T,
    settings: &EikonalSettings<T>,
) -> Result<RealField<T>> {
    settings.validate()?;
    check_step(h)?;
    if h == T::zero() {
        return Ok(s0.clone());
    }
    let grid = s0.grid();
    let lipschitz = h * s0.derivative(2)?.max_abs();
    if !(lipschitz <= settings.contraction_cap) {
        return Err(Error::CharacteristicsDiverged(format!(
            "h * max|S''| = {lipschitz:.6e} exceeds contraction cap {}",
            settings.contraction_cap
        )));
    }

    let phase = s0.spectrum();
    let mut velocity = phase.clone();
    let n = grid.n();
    velocity.scale_by(|k| {
        if k == -((n / 2) as i64) {
            Complex::default()
        } else {
            Complex::new(T::zero(), T::of_i64(k))
        }
    });
    let v_at = |y: T| velocity.evaluate_real(y);

    let nodal = s0.derivative(1)?;

    let half = T::lit(0.5);
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let x = grid.node(j);
        let mut y = x - h * nodal.values()[j];
        let mut converged = false;
        for _ in 0..settings.fp_max_iter {
            let next = x - h * v_at(y);
            let step = (next - y).abs();
            y = next;
            if step < settings.fp_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::CharacteristicsDiverged(format!(
                "foot point of node {j} did not converge in {} iterations",
                settings.fp_max_iter
            )));
        }
        let v = v_at(y);
        out.push(phase.evaluate_real(y) + half * h * v * v);
    }
    RealField::new(grid.clone(), out)
}

/// Transport flow: eikonal phase plus the amplitude equation solved through
/// `w = A e^{iS}`, which obeys the free Schrödinger equation `i∂ₜw = -∂ₓₓw/2`.
pub fn flow1<T: Real>(u: &WkbState<T>, h: T, settings: &EikonalSettings<T>) -> Result<WkbState<T>> {
    check_step(h)?;
    if h == T::zero() {
        return Ok(u.clone());
    }
    let s_out = solve_eikonal_characteristics(&u.s, h, settings)?;
    let w0 = u.a.zip_real(&u.s, |a, s| a * Complex::from_polar(T::one(), s))?;
    let half_h = T::lit(0.5) * h;
    let w = w0.apply_symbol(|k| Complex::from_polar(T::one(), -half_h * T::of_i64(k * k)));
    let a_out = w.zip_real(&s_out, |w, s| w * Complex::from_polar(T::one(), -s))?;
    Ok(WkbState::from_parts_unchecked(s_out, a_out))
}

/// Residual dispersion `∂ₜA = i(ε-1)∂ₓₓA/2`.
pub fn flow2<T: Real>(u: &WkbState<T>, h: T, eps: T) -> Result<WkbState<T>> {
    check_step(h)?;
    check_eps(eps)?;
    if h == T::zero() {
        return Ok(u.clone());
    }
    let rate = (eps - T::one()) * h * T::lit(0.5);
    let a = u
        .a
        .apply_symbol(|k| Complex::from_polar(T::one(), -rate * T::of_i64(k * k)));
    Ok(WkbState::from_parts_unchecked(u.s.clone(), a))
}

/// Potential kick `S ← S - hV`.
pub fn flow3<T: Real>(u: &WkbState<T>, h: T, potential: &Potential<T>) -> Result<WkbState<T>> {
    check_step(h)?;
    let s = u.s.zip_map(potential.samples(), |s, v| s - h * v)?;
    Ok(WkbState::from_parts_unchecked(s, u.a.clone()))
}

/// Viscous regularization: heat flow on `S` and the matching phase rotation
/// `A ← e^{-i (S(h) - S(0))/ε} A`.
///
/// The increment `(S(h) - S(0))/ε` is formed on the Fourier side as
/// `expm1(-ε² h k²)/ε · Ŝ`, which is well defined (and zero) at `ε = 0`.
pub fn flow4<T: Real>(u: &WkbState<T>, h: T, eps: T) -> Result<WkbState<T>> {
    check_step(h)?;
    check_eps(eps)?;
    if h == T::zero() || eps == T::zero() {
        return Ok(u.clone());
    }
    let rate = eps * eps * h;
    let spec = u.s.spectrum();
    let mut heated = spec.clone();
    heated.scale_by(|k| Complex::new((-rate * T::of_i64(k * k)).exp(), T::zero()));
    let mut increment = spec;
    increment.scale_by(|k| Complex::new((-rate * T::of_i64(k * k)).exp_m1() / eps, T::zero()));
    let phi = increment.inverse_real();
    let a = u.a.zip_real(&phi, |a, p| a * Complex::from_polar(T::one(), -p))?;
    Ok(WkbState::from_parts_unchecked(heated.inverse_real(), a))
}

/// One of the four sub-flows, for building compositions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SubFlow {
    Transport,
    Dispersion,
    Potential,
    Viscosity,
}

impl SubFlow {
    /// 1-based index of the flow in the splitting.
    pub fn index(self) -> usize {
        match self {
            SubFlow::Transport => 1,
            SubFlow::Dispersion => 2,
            SubFlow::Potential => 3,
            SubFlow::Viscosity => 4,
        }
    }

    pub fn apply<T: Real>(
        self,
        u: &WkbState<T>,
        h: T,
        eps: T,
        potential: &Potential<T>,
        settings: &EikonalSettings<T>,
    ) -> Result<WkbState<T>> {
        match self {
            SubFlow::Transport => flow1(u, h, settings),
            SubFlow::Dispersion => flow2(u, h, eps),
            SubFlow::Potential => flow3(u, h, potential),
            SubFlow::Viscosity => flow4(u, h, eps),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn grid(n: usize) -> Arc<PeriodicGrid<f64>> {
        PeriodicGrid::new(n).unwrap()
    }

    fn settings() -> EikonalSettings<f64> {
        EikonalSettings::default()
    }

    fn rel_l2(a: &ComplexField<f64>, b: &ComplexField<f64>) -> f64 {
        a.zip_map(b, |x, y| x - y).unwrap().l2_norm() / b.l2_norm().max(1e-300)
    }

    #[test]
    fn settings_validation() {
        assert!(settings().validate().is_ok());
        let bad = EikonalSettings { contraction_cap: 1.0, ..settings() };
        assert!(bad.validate().is_err());
        let bad = EikonalSettings { fp_tol: 0.0, ..settings() };
        assert!(bad.validate().is_err());
        let bad = EikonalSettings { fp_max_iter: 0, ..settings() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn eikonal_constant_phase() {
        let g = grid(32);
        let s0 = RealField::constant(&g, 0.7);
        let s = solve_eikonal_characteristics(&s0, 0.5, &settings()).unwrap();
        assert!(s.values().iter().all(|&v| (v - 0.7).abs() < 1e-15));
    }

    #[test]
    fn eikonal_precondition_boundary() {
        let g = grid(32);
        let s0 = RealField::from_fn(&g, f64::sin);
        let err = solve_eikonal_characteristics(&s0, 1.0, &settings()).unwrap_err();
        assert!(matches!(err, Error::CharacteristicsDiverged(_)));
        assert!(solve_eikonal_characteristics(&s0, -0.1, &settings()).is_err());
    }

    #[test]
    fn eikonal_iteration_cap_reports_divergence() {
        let g = grid(32);
        let s0 = RealField::from_fn(&g, f64::sin);
        let tight = EikonalSettings { fp_max_iter: 2, ..settings() };
        let err = solve_eikonal_characteristics(&s0, 0.5, &tight).unwrap_err();
        assert!(matches!(err, Error::CharacteristicsDiverged(_)));
    }

    /// Forward characteristics: launch from a fine set of points, carry S
    /// exactly, then recover the grid values by locating the launch point
    /// that lands on each node (bisection on the monotone forward map).
    fn forward_characteristics_oracle(
        amp: f64,
        h: f64,
        nodes: &[f64],
    ) -> Vec<f64> {
        let v0 = |x: f64| amp * x.cos();
        let s0 = |x: f64| amp * x.sin();
        let landing = |x0: f64| x0 + h * v0(x0);
        let fine = 16 * nodes.len();
        let starts: Vec<f64> = (0..=fine)
            .map(|i| -1.0 + (2.0 * std::f64::consts::PI + 2.0) * i as f64 / fine as f64)
            .collect();
        nodes
            .iter()
            .map(|&x| {
                let i = starts.windows(2).position(|w| landing(w[0]) <= x && x < landing(w[1])).unwrap();
                let (mut lo, mut hi) = (starts[i], starts[i + 1]);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if landing(mid) <= x {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let x0 = 0.5 * (lo + hi);
                s0(x0) + 0.5 * h * v0(x0) * v0(x0)
            })
            .collect()
    }

    #[test]
    fn eikonal_matches_forward_characteristics() {
        let g = grid(64);
        let s0 = RealField::from_fn(&g, |x| 0.1 * x.sin());
        let s = solve_eikonal_characteristics(&s0, 0.01, &settings()).unwrap();
        let oracle = forward_characteristics_oracle(0.1, 0.01, &g.nodes());
        let err = s
            .values()
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "max error {err}");
    }

    #[test]
    fn flow1_constant_phase_is_free_flight() {
        let g = grid(32);
        let u = WkbState::from_fns(&g, |_| 0.3, |x| C::from_polar(1.0, x)).unwrap();
        let out = flow1(&u, 0.2, &settings()).unwrap();
        assert!(out.phase().values().iter().all(|&v| (v - 0.3).abs() < 1e-14));
        for (j, a) in out.amplitude().values().iter().enumerate() {
            let expect = C::from_polar(1.0, -0.1) * C::from_polar(1.0, g.node(j));
            assert!((a - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn flow1_zero_amplitude() {
        let g = grid(32);
        let u = WkbState::from_fns(&g, |x| 0.1 * x.sin(), |_| C::default()).unwrap();
        let out = flow1(&u, 0.01, &settings()).unwrap();
        assert_eq!(out.amplitude().max_abs(), 0.0);
        let s = solve_eikonal_characteristics(u.phase(), 0.01, &settings()).unwrap();
        assert_eq!(out.phase().values(), s.values());
    }

    /// Fine Strang sub-splitting of the transport flow: upwind-free spectral
    /// RK4 for the S/A advection pieces and exact multipliers for `i∂ₓₓA/2`.
    fn transport_substep_oracle(u: &WkbState<f64>, h: f64, substeps: usize) -> WkbState<f64> {
        let tau = h / substeps as f64;
        let rhs = |s: &RealField<f64>, a: &ComplexField<f64>| {
            let sx = s.derivative(1).unwrap();
            let sxx = s.derivative(2).unwrap();
            let ax = a.derivative(1).unwrap();
            let ds = sx.map(|v| -0.5 * v * v);
            let mut da = Vec::with_capacity(a.values().len());
            for j in 0..a.values().len() {
                da.push(-sx.values()[j] * ax.values()[j] - 0.5 * a.values()[j] * sxx.values()[j]);
            }
            (ds, da)
        };
        let axpy = |s: &RealField<f64>, a: &ComplexField<f64>, ds: &RealField<f64>, da: &[C], c: f64| {
            let s2 = s.zip_map(ds, |x, d| x + c * d).unwrap();
            let vals: Vec<C> = a.values().iter().zip(da).map(|(x, d)| x + d * c).collect();
            (s2, ComplexField::new(a.grid().clone(), vals).unwrap())
        };
        let disperse = |a: &ComplexField<f64>, t: f64| {
            a.apply_multiplier(|k| C::from_polar(1.0, -0.5 * t * (k * k) as f64)).unwrap()
        };
        let (mut s, mut a) = (u.phase().clone(), u.amplitude().clone());
        for _ in 0..substeps {
            a = disperse(&a, tau / 2.0);
            let (k1s, k1a) = rhs(&s, &a);
            let (s2, a2) = axpy(&s, &a, &k1s, &k1a, tau / 2.0);
            let (k2s, k2a) = rhs(&s2, &a2);
            let (s3, a3) = axpy(&s, &a, &k2s, &k2a, tau / 2.0);
            let (k3s, k3a) = rhs(&s3, &a3);
            let (s4, a4) = axpy(&s, &a, &k3s, &k3a, tau);
            let (k4s, k4a) = rhs(&s4, &a4);
            let ds = RealField::new(
                s.grid().clone(),
                (0..s.values().len())
                    .map(|j| (k1s.values()[j] + 2.0 * k2s.values()[j] + 2.0 * k3s.values()[j] + k4s.values()[j]) / 6.0)
                    .collect(),
            )
            .unwrap();
            let da: Vec<C> = (0..k1a.len())
                .map(|j| (k1a[j] + k2a[j] * 2.0 + k3a[j] * 2.0 + k4a[j]) / 6.0)
                .collect();
            let next = axpy(&s, &a, &ds, &da, tau);
            s = next.0;
            a = disperse(&next.1, tau / 2.0);
        }
        WkbState::new(s, a).unwrap()
    }

    #[test]
    fn flow1_matches_fine_substep_oracle() {
        let g = grid(128);
        let u = WkbState::from_fns(&g, |x| 0.05 * x.sin(), |x| C::new(x.cos(), 0.0)).unwrap();
        let out = flow1(&u, 0.02, &settings()).unwrap();
        let oracle = transport_substep_oracle(&u, 0.02, 256);
        let ds = out.phase().zip_map(oracle.phase(), |a, b| a - b).unwrap().l2_norm();
        let da = rel_l2(out.amplitude(), oracle.amplitude());
        assert!(ds < 1e-6, "phase error {ds}");
        assert!(da < 1e-6, "amplitude error {da}");
    }

    #[test]
    fn flow2_cases() {
        let g = grid(64);
        let u = WkbState::from_fns(&g, |x| x.cos(), |x| C::new(x.sin(), 0.2 * (3.0 * x).cos())).unwrap();
        let same = flow2(&u, 0.7, 1.0).unwrap();
        assert!(rel_l2(same.amplitude(), u.amplitude()) < 1e-15);

        let sine = WkbState::from_fns(&g, |_| 0.0, |x| C::new(x.sin(), 0.0)).unwrap();
        let out = flow2(&sine, 0.3, 0.0).unwrap();
        for (j, a) in out.amplitude().values().iter().enumerate() {
            let expect = C::from_polar(1.0, 0.15) * g.node(j).sin();
            assert!((a - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn flow2_matches_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = grid(64);
        let vals: Vec<C> = (0..64)
            .map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let u = WkbState::new(RealField::zeros(&g), ComplexField::new(g.clone(), vals.clone()).unwrap()).unwrap();
        let (eps, h) = (0.25, 0.1);
        let out = flow2(&u, h, eps).unwrap();
        let n = 64;
        for j in 0..n {
            let xj = g.node(j);
            let mut acc = C::default();
            for k in -32i64..32 {
                let kf = k as f64;
                let coeff: C = (0..n)
                    .map(|l| vals[l] * C::from_polar(1.0, -kf * g.node(l)))
                    .sum::<C>()
                    / n as f64;
                let m = C::from_polar(1.0, -(eps - 1.0) * h * kf * kf / 2.0);
                acc += m * coeff * C::from_polar(1.0, kf * xj);
            }
            assert!((out.amplitude().values()[j] - acc).norm() < 1e-12);
        }
    }

    #[test]
    fn flow3_cases() {
        let g = grid(32);
        let v = Potential::trig_ratio(&g);
        let u = WkbState::from_fns(&g, |_| 0.0, |x| C::from_polar(1.0, x)).unwrap();
        let out = flow3(&u, 0.5, &v).unwrap();
        for (j, s) in out.phase().values().iter().enumerate() {
            assert_eq!(*s, -0.5 * trig_ratio_potential(g.node(j)));
        }
        assert_eq!(out.amplitude().values(), u.amplitude().values());
        let id = flow3(&u, 0.0, &v).unwrap();
        assert_eq!(id.phase().values(), u.phase().values());

        let other = Potential::zero(&grid(16));
        assert!(matches!(flow3(&u, 0.1, &other), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn flow4_cases() {
        let g = grid(32);
        let u = WkbState::from_fns(&g, |x| x.sin(), |x| C::new(x.cos(), 0.5)).unwrap();
        let out = flow4(&u, 0.4, 0.0).unwrap();
        assert_eq!(out.phase().values(), u.phase().values());
        assert_eq!(out.amplitude().values(), u.amplitude().values());

        let flat = WkbState::from_fns(&g, |_| 1.3, |x| C::new(x.cos(), 0.5)).unwrap();
        let out = flow4(&flat, 0.4, 0.5).unwrap();
        assert!(out.phase().values().iter().all(|&s| (s - 1.3).abs() < 1e-14));
        assert!(rel_l2(out.amplitude(), flat.amplitude()) < 1e-14);

        let u = WkbState::from_fns(&g, f64::sin, |_| C::new(1.0, 0.0)).unwrap();
        let out = flow4(&u, 0.1, 0.5).unwrap();
        let decay = (-0.025f64).exp();
        assert!((decay - 0.9753099120283326).abs() < 1e-15);
        for j in 0..32 {
            let x = g.node(j);
            assert!((out.phase().values()[j] - decay * x.sin()).abs() < 1e-12);
            let phi = (decay - 1.0) / 0.5 * x.sin();
            assert!((out.amplitude().values()[j] - C::from_polar(1.0, -phi)).norm() < 1e-12);
        }
    }

    #[test]
    fn flow4_preserves_modulus_pointwise() {
        let g = grid(64);
        let u = WkbState::from_fns(&g, |x| (2.0 * x).cos() + 0.3 * x.sin(), |x| C::new(x.sin(), x.cos() * 0.2)).unwrap();
        let out = flow4(&u, 0.3, 0.7).unwrap();
        for (a, b) in out.amplitude().values().iter().zip(u.amplitude().values()) {
            assert!((a.norm() - b.norm()).abs() <= 2.0 * f64::EPSILON * b.norm());
        }
    }

    #[test]
    fn flows_continuous_at_zero_eps() {
        let g = grid(64);
        let u = WkbState::from_fns(&g, |x| 0.5 * x.sin(), |x| C::new(x.sin(), 0.1)).unwrap();
        for flow in [flow2::<f64>, flow4::<f64>] {
            let a = flow(&u, 0.1, 0.0).unwrap();
            let b = flow(&u, 0.1, 1e-8).unwrap();
            let ds = a.phase().zip_map(b.phase(), |x, y| x - y).unwrap().max_abs();
            let da = a.amplitude().zip_map(b.amplitude(), |x, y| x - y).unwrap().max_abs();
            assert!(ds <= 1e-7 && da <= 1e-7);
        }
    }

    #[test]
    fn zero_step_is_identity() {
        let g = grid(32);
        let u = WkbState::from_fns(&g, |x| 0.5 * x.sin(), |x| C::new(x.sin(), 0.1)).unwrap();
        let v = Potential::trig_ratio(&g);
        for f in [SubFlow::Transport, SubFlow::Dispersion, SubFlow::Potential, SubFlow::Viscosity] {
            let out = f.apply(&u, 0.0, 0.25, &v, &settings()).unwrap();
            assert_eq!(out.phase().values(), u.phase().values());
            assert_eq!(out.amplitude().values(), u.amplitude().values());
        }
    }

    #[test]
    fn flows_reject_negative_inputs() {
        let g = grid(16);
        let u = WkbState::zeros(&g);
        assert!(flow2(&u, -0.1, 0.5).is_err());
        assert!(flow4(&u, 0.1, -0.5).is_err());
        assert!(flow1(&u, -0.1, &settings()).is_err());
    }
}
