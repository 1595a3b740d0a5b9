//! Fourier pseudospectral machinery on the periodic grid `[0, 2π)`.
//!
//! Conventions:
//!
//! * forward transform `û_k = (1/n) Σ_j u_j e^{-i k x_j}`, inverse `u_j = Σ_k û_k e^{i k x_j}`,
//!   so the coefficients are Fourier-series coefficients and multipliers act on
//!   continuum symbols directly;
//! * coefficients are stored in FFT-natural order `0, 1, …, n/2-1, -n/2, …, -1`;
//! * the unpaired mode `k = -n/2` is treated as a real cosine `cos(n y / 2)`
//!   off the grid and is dropped from odd-order derivatives.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Transform direction for [`dft`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Uniform discretization of the torus `R / 2πZ` with `n` nodes.
///
/// FFT plans are built once per grid and shared by every field living on it.
pub struct PeriodicGrid<T: Real> {
    n: usize,
    dx: T,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for PeriodicGrid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("n", &self.n)
            .field("dx", &self.dx)
            .finish()
    }
}

impl<T: Real> PeriodicGrid<T> {
    /// Builds a grid with `n` nodes; `n` must be even and at least 4.
    pub fn new(n: usize) -> Result<Arc<Self>> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::invalid(format!(
                "grid size must be even and >= 4, got {n}"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            n,
            dx: T::TAU() / T::of_usize(n),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    /// Node `x_j = j · dx`.
    pub fn node(&self, j: usize) -> T {
        T::of_usize(j) * self.dx
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Signed wavenumber stored in FFT slot `slot`.
    pub fn wavenumber(&self, slot: usize) -> i64 {
        let half = self.n / 2;
        if slot < half {
            slot as i64
        } else {
            slot as i64 - self.n as i64
        }
    }

    pub fn wavenumbers(&self) -> Vec<i64> {
        (0..self.n).map(|s| self.wavenumber(s)).collect()
    }

    /// FFT slot holding wavenumber `k`, if `k ∈ [-n/2, n/2)`.
    pub fn slot(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k >= 0 && k < half {
            Some(k as usize)
        } else if k < 0 && k >= -half {
            Some((k + self.n as i64) as usize)
        } else {
            None
        }
    }

    /// Two grids are interchangeable when they have the same node count.
    pub fn same_as(&self, other: &Self) -> bool {
        self.n == other.n
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::invalid(format!(
                "field length {len} does not match grid size {}",
                self.n
            )));
        }
        Ok(())
    }

    fn forward_in_place(&self, buf: &mut [Complex<T>]) {
        self.forward.process(buf);
        let scale = T::one() / T::of_usize(self.n);
        for c in buf.iter_mut() {
            *c = *c * scale;
        }
    }

    fn inverse_in_place(&self, buf: &mut [Complex<T>]) {
        self.inverse.process(buf);
    }
}

/// Raw transform of samples (forward) or coefficients (inverse) on `grid`.
pub fn dft<T: Real>(
    grid: &PeriodicGrid<T>,
    values: &[Complex<T>],
    direction: Direction,
) -> Result<Vec<Complex<T>>> {
    grid.check_len(values.len())?;
    let mut buf = values.to_vec();
    match direction {
        Direction::Forward => grid.forward_in_place(&mut buf),
        Direction::Inverse => grid.inverse_in_place(&mut buf),
    }
    Ok(buf)
}

fn check_finite<T: Real>(values: impl IntoIterator<Item = T>) -> Result<()> {
    if values.into_iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid("field contains non-finite samples"))
    }
}

fn check_same_grid<T: Real>(a: &PeriodicGrid<T>, b: &PeriodicGrid<T>) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "grid mismatch: {} vs {} nodes",
            a.n(),
            b.n()
        )))
    }
}

/// Fourier coefficients of a field, in FFT-natural order.
#[derive(Clone, Debug)]
pub struct SpectralCoefficients<T: Real> {
    grid: Arc<PeriodicGrid<T>>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> SpectralCoefficients<T> {
    pub fn new(grid: Arc<PeriodicGrid<T>>, coeffs: Vec<Complex<T>>) -> Result<Self> {
        grid.check_len(coeffs.len())?;
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid<T>> {
        &self.grid
    }

    /// Raw coefficients in FFT-natural order.
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// Coefficient of wavenumber `k`; zero outside the resolved band.
    pub fn get(&self, k: i64) -> Complex<T> {
        self.grid
            .slot(k)
            .map_or_else(Complex::default, |s| self.coeffs[s])
    }

    /// `(k, û_k)` pairs in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(s, c)| (self.grid.wavenumber(s), *c))
    }

    /// Multiplies every coefficient by `m(k)`.
    pub fn scale_by(&mut self, m: impl Fn(i64) -> Complex<T>) {
        for (s, c) in self.coeffs.iter_mut().enumerate() {
            *c = *c * m(self.grid.wavenumber(s));
        }
    }

    pub fn inverse(&self) -> ComplexField<T> {
        let mut buf = self.coeffs.clone();
        self.grid.inverse_in_place(&mut buf);
        ComplexField {
            grid: self.grid.clone(),
            values: buf,
        }
    }

    /// Inverse transform keeping only the real part of the samples.
    pub fn inverse_real(&self) -> RealField<T> {
        self.inverse().re()
    }

    /// Evaluates the Fourier series at an arbitrary point (reduced mod 2π).
    pub fn evaluate(&self, y: T) -> Complex<T> {
        eval_series(&self.coeffs, y)
    }

    /// Real part of [`SpectralCoefficients::evaluate`] for coefficients of a
    /// real field (uses the Hermitian symmetry, half the work).
    pub fn evaluate_real(&self, y: T) -> T {
        eval_series_real(&self.coeffs, y)
    }

    /// `sqrt(2π Σ_k (1 + k²)^s |û_k|²)`.
    pub fn sobolev_norm(&self, s: T) -> Result<T> {
        if !(s >= T::zero()) {
            return Err(Error::invalid(format!("Sobolev index must be >= 0, got {s}")));
        }
        let sum: T = self
            .iter()
            .map(|(k, c)| {
                let kk = T::of_i64(k);
                (T::one() + kk * kk).powf(s) * c.norm_sqr()
            })
            .sum();
        Ok((T::TAU() * sum).sqrt())
    }

    /// Fourier truncation onto a grid with `m <= n` nodes.
    ///
    /// Modes `|k| < m/2` are copied; both `±m/2` fold into the coarse
    /// unpaired slot, which is what they alias to on the coarse nodes.
    pub fn truncate_to(&self, target: &Arc<PeriodicGrid<T>>) -> Result<Self> {
        let m = target.n();
        if m > self.grid.n() {
            return Err(Error::invalid(format!(
                "cannot truncate {} modes onto a finer grid of {m}",
                self.grid.n()
            )));
        }
        let half = (m / 2) as i64;
        let mut coeffs = vec![Complex::default(); m];
        for (slot, c) in coeffs.iter_mut().enumerate() {
            let k = target.wavenumber(slot);
            *c = if k == -half {
                self.get(-half) + self.get(half)
            } else {
                self.get(k)
            };
        }
        Ok(Self {
            grid: target.clone(),
            coeffs,
        })
    }
}

/// Reduces `y` into `[0, 2π)`.
fn wrap<T: Real>(y: T) -> T {
    let tau = T::TAU();
    let r = y % tau;
    if r < T::zero() {
        r + tau
    } else {
        r
    }
}

/// Σ_k c_k e^{i k y}, with the unpaired slot evaluated as a cosine.
fn eval_series<T: Real>(coeffs: &[Complex<T>], y: T) -> Complex<T> {
    let n = coeffs.len();
    let half = n / 2;
    let y = wrap(y);
    let (s, c) = y.sin_cos();
    let z = Complex::new(c, s);
    let mut zk = Complex::new(T::one(), T::zero());
    let mut sum = coeffs[0];
    for k in 1..half {
        zk = zk * z;
        sum = sum + coeffs[k] * zk + coeffs[n - k] * zk.conj();
    }
    sum + coeffs[half] * (T::of_usize(half) * y).cos()
}

/// Real part of [`eval_series`] for Hermitian coefficient sets.
fn eval_series_real<T: Real>(coeffs: &[Complex<T>], y: T) -> T {
    let n = coeffs.len();
    let half = n / 2;
    let y = wrap(y);
    let (s, c) = y.sin_cos();
    let z = Complex::new(c, s);
    let mut zk = Complex::new(T::one(), T::zero());
    let mut acc = T::zero();
    for k in 1..half {
        zk = zk * z;
        acc = acc + (coeffs[k] * zk).re + (coeffs[n - k] * zk.conj()).re;
    }
    coeffs[0].re + acc + coeffs[half].re * (T::of_usize(half) * y).cos()
}

fn derivative_symbol<T: Real>(k: i64, order: u32, n: usize) -> Complex<T> {
    if order % 2 == 1 && k == -((n / 2) as i64) {
        return Complex::default();
    }
    Complex::new(T::zero(), T::of_i64(k)).powu(order)
}

/// Checks `m(-k) = conj(m(k))` on the grid's paired modes and a real `m(-n/2)`.
fn is_hermitian<T: Real>(grid: &PeriodicGrid<T>, m: &[Complex<T>]) -> bool {
    let tol = T::lit(1e-12);
    let n = grid.n();
    let close = |a: Complex<T>, b: Complex<T>| {
        (a - b).norm() <= tol * (T::one() + a.norm().max(b.norm()))
    };
    let paired = (1..n / 2).all(|k| close(m[n - k], m[k].conj()));
    let nyq = m[n / 2];
    paired && close(m[0], m[0].conj()) && nyq.im.abs() <= tol * (T::one() + nyq.norm())
}

fn tabulate<T: Real>(
    grid: &PeriodicGrid<T>,
    m: impl Fn(i64) -> Option<Complex<T>>,
) -> Result<Vec<Complex<T>>> {
    (0..grid.n())
        .map(|slot| {
            let k = grid.wavenumber(slot);
            match m(k) {
                Some(v) if v.re.is_finite() && v.im.is_finite() => Ok(v),
                _ => Err(Error::invalid(format!("multiplier undefined at k = {k}"))),
            }
        })
        .collect()
}

/// Real samples on a periodic grid.
#[derive(Clone, Debug)]
pub struct RealField<T: Real> {
    grid: Arc<PeriodicGrid<T>>,
    values: Vec<T>,
}

impl<T: Real> RealField<T> {
    pub fn new(grid: Arc<PeriodicGrid<T>>, values: Vec<T>) -> Result<Self> {
        grid.check_len(values.len())?;
        check_finite(values.iter().copied())?;
        Ok(Self { grid, values })
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: &Arc<PeriodicGrid<T>>, f: impl Fn(T) -> T) -> Self {
        let values = (0..grid.n()).map(|j| f(grid.node(j))).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn zeros(grid: &Arc<PeriodicGrid<T>>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: &Arc<PeriodicGrid<T>>, c: T) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.n()],
        }
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn spectrum(&self) -> SpectralCoefficients<T> {
        let mut buf: Vec<Complex<T>> = self
            .values
            .iter()
            .map(|&v| Complex::new(v, T::zero()))
            .collect();
        self.grid.forward_in_place(&mut buf);
        SpectralCoefficients {
            grid: self.grid.clone(),
            coeffs: buf,
        }
    }

    pub fn to_complex(&self) -> ComplexField<T> {
        ComplexField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .map(|&v| Complex::new(v, T::zero()))
                .collect(),
        }
    }

    /// Applies a Hermitian multiplier and returns a real field.
    ///
    /// Non-Hermitian multipliers are rejected; go through
    /// [`RealField::to_complex`] for those.
    pub fn apply_multiplier(&self, m: impl Fn(i64) -> Complex<T>) -> Result<Self> {
        self.try_apply_multiplier(|k| Some(m(k)))
    }

    /// Like [`RealField::apply_multiplier`] for partially defined multipliers.
    pub fn try_apply_multiplier(
        &self,
        m: impl Fn(i64) -> Option<Complex<T>>,
    ) -> Result<Self> {
        let table = tabulate(&self.grid, m)?;
        if !is_hermitian(&self.grid, &table) {
            return Err(Error::invalid(
                "multiplier is not Hermitian; a real field cannot stay real",
            ));
        }
        let mut spec = self.spectrum();
        for (c, mk) in spec.coeffs.iter_mut().zip(&table) {
            *c = *c * *mk;
        }
        Ok(spec.inverse_real())
    }

    /// Applies a real, even multiplier (heat kernels, even-order symbols).
    pub fn apply_even_multiplier(&self, m: impl Fn(i64) -> T) -> Self {
        let mut spec = self.spectrum();
        spec.scale_by(|k| Complex::new(m(k), T::zero()));
        spec.inverse_real()
    }

    /// Spectral derivative of the given order.
    pub fn derivative(&self, order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("derivative order must be >= 1"));
        }
        let n = self.grid.n();
        let mut spec = self.spectrum();
        spec.scale_by(|k| derivative_symbol(k, order, n));
        Ok(spec.inverse_real())
    }

    pub fn evaluate_off_grid(&self, points: &[T]) -> Vec<T> {
        let spec = self.spectrum();
        points
            .iter()
            .map(|&y| eval_series_real(&spec.coeffs, y))
            .collect()
    }

    pub fn sobolev_norm(&self, s: T) -> Result<T> {
        self.spectrum().sobolev_norm(s)
    }

    /// Zeroes every mode with `|k| > n/3`.
    pub fn dealias_two_thirds(&self) -> Self {
        let cut = (self.grid.n() / 3) as i64;
        let mut spec = self.spectrum();
        spec.scale_by(|k| {
            if k.abs() > cut {
                Complex::default()
            } else {
                Complex::new(T::one(), T::zero())
            }
        });
        spec.inverse_real()
    }

    /// Spectral restriction onto a coarser grid.
    pub fn restrict_to(&self, target: &Arc<PeriodicGrid<T>>) -> Result<Self> {
        Ok(self.spectrum().truncate_to(target)?.inverse_real())
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Discrete `sqrt(dx Σ |u_j|²)`.
    pub fn l2_norm(&self) -> T {
        (self.grid.dx() * self.values.iter().map(|&v| v * v).sum::<T>()).sqrt()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

/// Complex samples on a periodic grid.
#[derive(Clone, Debug)]
pub struct ComplexField<T: Real> {
    grid: Arc<PeriodicGrid<T>>,
    values: Vec<Complex<T>>,
}

impl<T: Real> ComplexField<T> {
    pub fn new(grid: Arc<PeriodicGrid<T>>, values: Vec<Complex<T>>) -> Result<Self> {
        grid.check_len(values.len())?;
        check_finite(values.iter().flat_map(|c| [c.re, c.im]))?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &Arc<PeriodicGrid<T>>, f: impl Fn(T) -> Complex<T>) -> Self {
        let values = (0..grid.n()).map(|j| f(grid.node(j))).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn zeros(grid: &Arc<PeriodicGrid<T>>) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![Complex::default(); grid.n()],
        }
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn spectrum(&self) -> SpectralCoefficients<T> {
        let mut buf = self.values.clone();
        self.grid.forward_in_place(&mut buf);
        SpectralCoefficients {
            grid: self.grid.clone(),
            coeffs: buf,
        }
    }

    pub fn apply_multiplier(&self, m: impl Fn(i64) -> Complex<T>) -> Result<Self> {
        self.try_apply_multiplier(|k| Some(m(k)))
    }

    pub fn try_apply_multiplier(
        &self,
        m: impl Fn(i64) -> Option<Complex<T>>,
    ) -> Result<Self> {
        let table = tabulate(&self.grid, m)?;
        let mut spec = self.spectrum();
        for (c, mk) in spec.coeffs.iter_mut().zip(&table) {
            *c = *c * *mk;
        }
        Ok(spec.inverse())
    }

    /// Multiplier application for symbols known to be total and finite.
    pub(crate) fn apply_symbol(&self, m: impl Fn(i64) -> Complex<T>) -> Self {
        let mut spec = self.spectrum();
        spec.scale_by(m);
        spec.inverse()
    }

    pub fn derivative(&self, order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("derivative order must be >= 1"));
        }
        let n = self.grid.n();
        Ok(self.apply_symbol(|k| derivative_symbol(k, order, n)))
    }

    pub fn evaluate_off_grid(&self, points: &[T]) -> Vec<Complex<T>> {
        let spec = self.spectrum();
        points.iter().map(|&y| eval_series(&spec.coeffs, y)).collect()
    }

    pub fn sobolev_norm(&self, s: T) -> Result<T> {
        self.spectrum().sobolev_norm(s)
    }

    pub fn dealias_two_thirds(&self) -> Self {
        let cut = (self.grid.n() / 3) as i64;
        self.apply_symbol(|k| {
            if k.abs() > cut {
                Complex::default()
            } else {
                Complex::new(T::one(), T::zero())
            }
        })
    }

    pub fn restrict_to(&self, target: &Arc<PeriodicGrid<T>>) -> Result<Self> {
        Ok(self.spectrum().truncate_to(target)?.inverse())
    }

    /// Values of the trigonometric interpolant at the nodes of `target`.
    ///
    /// When the target nodes are a subset of this grid's nodes the samples
    /// are copied exactly.
    pub fn sample_at_nodes(&self, target: &Arc<PeriodicGrid<T>>) -> Self {
        let (n, m) = (self.grid.n(), target.n());
        let values = if n % m == 0 {
            let stride = n / m;
            (0..m).map(|j| self.values[j * stride]).collect()
        } else {
            self.evaluate_off_grid(&target.nodes())
        };
        Self {
            grid: target.clone(),
            values,
        }
    }

    pub fn re(&self) -> RealField<T> {
        RealField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|c| c.re).collect(),
        }
    }

    /// Pointwise `|u_j|`.
    pub fn modulus(&self) -> RealField<T> {
        RealField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|c| c.norm()).collect(),
        }
    }

    /// Discrete `dx Σ |u_j|²`.
    pub fn mass(&self) -> T {
        self.grid.dx() * self.values.iter().map(|c| c.norm_sqr()).sum::<T>()
    }

    pub fn l2_norm(&self) -> T {
        self.mass().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, c| acc.max(c.norm()))
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(
        &self,
        other: &Self,
        f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>,
    ) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Pointwise combination with a real field on the same grid.
    pub fn zip_real(
        &self,
        other: &RealField<T>,
        f: impl Fn(Complex<T>, T) -> Complex<T>,
    ) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

pub(crate) fn ensure_same_grid<T: Real>(
    a: &PeriodicGrid<T>,
    b: &PeriodicGrid<T>,
) -> Result<()> {
    check_same_grid(a, b)
}
