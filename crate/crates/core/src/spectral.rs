//! Grid and transform layer.
//!
//! Functions of `x` on the truncated line `[-X, X)` are carried as samples on a
//! uniform grid together with their Fourier coefficients under the convention
//! `f̂(ω) = ∫ f(x) e^{-iωx} dx`. With this convention the prefactor of the
//! fixed-point profile is `A = -i f̂'(0) = -∫ x f(x) dx` with no extra signs.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Result, RgError};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        let fft = if inverse {
            planner.plan_fft_inverse(buf.len())
        } else {
            planner.plan_fft_forward(buf.len())
        };
        fft.process(buf);
    });
}

/// Uniform grid on `[-X, X)` with `N` points and the matching frequency set
/// `{k Δω : k = -N/2 .. N/2-1}`, stored in FFT order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    half_width: f64,
    num_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            half_width: 40.0,
            num_points: 2048,
        }
    }
}

impl GridSpec {
    pub fn new(half_width: f64, num_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(RgError::InvalidInput(format!(
                "grid half width must be positive and finite, got {half_width}"
            )));
        }
        if num_points < 64 || !num_points.is_power_of_two() {
            return Err(RgError::InvalidInput(format!(
                "grid size must be a power of two >= 64, got {num_points}"
            )));
        }
        Ok(GridSpec {
            half_width,
            num_points,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.num_points as f64
    }

    pub fn d_omega(&self) -> f64 {
        PI / self.half_width
    }

    /// Grid point `x_j = (j - N/2) Δx`; written this way so that `x_{N-j} = -x_j`
    /// holds exactly in floating point.
    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - (self.num_points / 2) as f64) * self.dx()
    }

    /// Signed integer wavenumber of FFT slot `k`.
    pub fn wavenumber(&self, k: usize) -> i64 {
        let n = self.num_points;
        if k < n / 2 {
            k as i64
        } else {
            k as i64 - n as i64
        }
    }

    pub fn omega(&self, k: usize) -> f64 {
        self.wavenumber(k) as f64 * self.d_omega()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.num_points).map(|j| self.x(j)).collect()
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.num_points).map(|k| self.omega(k)).collect()
    }

    /// Index of the grid point at `-x_j`; `x_0 = -X` has no mirror on the grid.
    pub fn mirror(&self, j: usize) -> Option<usize> {
        (j > 0 && j < self.num_points).then(|| self.num_points - j)
    }

    /// Slot of the Nyquist frequency `-N/2 Δω`.
    pub fn nyquist(&self) -> usize {
        self.num_points / 2
    }

    /// Same domain, `factor` times as many points.
    pub fn refined(&self, factor: usize) -> Result<GridSpec> {
        GridSpec::new(self.half_width, self.num_points * factor)
    }
}

/// Samples on the grid -> continuous-transform approximation `Δx Σ f_j e^{-iω x_j}`.
pub(crate) fn samples_to_coeffs(grid: &GridSpec, samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform_complex_samples(grid, &mut buf);
    buf
}

/// In-place forward transform of complex samples.
pub(crate) fn transform_complex_samples(grid: &GridSpec, buf: &mut [Complex64]) {
    fft_in_place(buf, false);
    let dx = grid.dx();
    // e^{-iω_k x_0} = e^{iω_k X} = (-1)^k
    for (k, c) in buf.iter_mut().enumerate() {
        let s = if k % 2 == 0 { dx } else { -dx };
        *c *= s;
    }
}

/// Inverse of [`samples_to_coeffs`], returning complex samples.
pub(crate) fn coeffs_to_complex_samples(grid: &GridSpec, coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = grid.num_points();
    let scale = 1.0 / (n as f64 * grid.dx());
    let mut buf: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| if k % 2 == 0 { c * scale } else { -c * scale })
        .collect();
    fft_in_place(&mut buf, true);
    buf
}

pub(crate) fn coeffs_to_samples(grid: &GridSpec, coeffs: &[Complex64]) -> Vec<f64> {
    coeffs_to_complex_samples(grid, coeffs)
        .into_iter()
        .map(|c| c.re)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parity {
    #[default]
    None,
    Odd,
    Even,
}

/// A real function on the truncated line, held as samples and Fourier
/// coefficients (FFT order) that are kept mutually consistent.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
    samples: Vec<f64>,
    time: f64,
    parity: Parity,
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(RgError::InvalidInput(format!(
            "time stamp must be positive and finite, got {t}"
        )))
    }
}

impl SpectralField {
    pub fn from_samples(grid: GridSpec, samples: Vec<f64>, time: f64) -> Result<Self> {
        check_time(time)?;
        if samples.len() != grid.num_points() {
            return Err(RgError::InvalidInput(format!(
                "expected {} samples, got {}",
                grid.num_points(),
                samples.len()
            )));
        }
        if let Some(j) = samples.iter().position(|v| !v.is_finite()) {
            return Err(RgError::InvalidInput(format!(
                "non-finite sample {} at x = {}",
                samples[j],
                grid.x(j)
            )));
        }
        let coeffs = samples_to_coeffs(&grid, &samples);
        Ok(SpectralField {
            grid,
            coeffs,
            samples,
            time,
            parity: Parity::None,
        })
    }

    /// Build from coefficients. The result is projected onto real fields, so
    /// coefficients that are not conjugate symmetric lose their anti-symmetric
    /// part.
    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>, time: f64) -> Result<Self> {
        if coeffs.len() != grid.num_points() {
            return Err(RgError::InvalidInput(format!(
                "expected {} coefficients, got {}",
                grid.num_points(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(RgError::InvalidInput(
                "non-finite Fourier coefficient".into(),
            ));
        }
        let samples = coeffs_to_samples(&grid, &coeffs);
        Self::from_samples(grid, samples, time)
    }

    pub fn zeros(grid: GridSpec, time: f64) -> Result<Self> {
        Self::from_samples(grid, vec![0.0; grid.num_points()], time)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    pub fn with_time(mut self, time: f64) -> Result<Self> {
        check_time(time)?;
        self.time = time;
        Ok(self)
    }

    /// Apply `g(ω, f̂(ω))` to every coefficient.
    pub fn map_coeffs<F>(&self, mut g: F) -> Result<SpectralField>
    where
        F: FnMut(f64, Complex64) -> Complex64,
    {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| g(self.grid.omega(k), c))
            .collect();
        Ok(SpectralField::from_coeffs(self.grid, coeffs, self.time)?.with_parity(self.parity))
    }

    pub fn scaled(&self, alpha: f64) -> SpectralField {
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
            samples: self.samples.iter().map(|v| v * alpha).collect(),
            time: self.time,
            parity: self.parity,
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &SpectralField, b: f64) -> Result<SpectralField> {
        if self.grid != other.grid {
            return Err(RgError::InvalidInput(
                "cannot combine fields on different grids".into(),
            ));
        }
        let parity = if self.parity == other.parity {
            self.parity
        } else {
            Parity::None
        };
        Ok(SpectralField {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x * a + y * b)
                .collect(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            time: self.time,
            parity,
        })
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.combine(1.0, other, -1.0)
    }

    /// Transforms of `-ix f(x)` and `-x² f(x)`, i.e. `f̂'` and `f̂''`.
    pub fn omega_derivatives(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let xs = self.grid.xs();
        let mut first: Vec<Complex64> = xs
            .iter()
            .zip(&self.samples)
            .map(|(&x, &f)| Complex64::new(0.0, -x * f))
            .collect();
        let mut second: Vec<Complex64> = xs
            .iter()
            .zip(&self.samples)
            .map(|(&x, &f)| Complex64::new(-x * x * f, 0.0))
            .collect();
        transform_complex_samples(&self.grid, &mut first);
        transform_complex_samples(&self.grid, &mut second);
        (first, second)
    }

    /// Replace the samples by their odd (or even) part about `x = 0`. The point
    /// `x = -X` has no mirror; it is zeroed for odd parts.
    pub fn project_parity(&self, parity: Parity) -> Result<SpectralField> {
        let n = self.grid.num_points();
        let s = &self.samples;
        let mut out = s.clone();
        match parity {
            Parity::None => return Ok(self.clone()),
            Parity::Odd => {
                out[0] = 0.0;
                out[n / 2] = 0.0;
                for j in 1..n / 2 {
                    let v = 0.5 * (s[n / 2 + j] - s[n / 2 - j]);
                    out[n / 2 + j] = v;
                    out[n / 2 - j] = -v;
                }
            }
            Parity::Even => {
                for j in 1..n / 2 {
                    let v = 0.5 * (s[n / 2 + j] + s[n / 2 - j]);
                    out[n / 2 + j] = v;
                    out[n / 2 - j] = v;
                }
            }
        }
        Ok(SpectralField::from_samples(self.grid, out, self.time)?.with_parity(parity))
    }

    /// Spectral `∂_x`, with the Nyquist mode dropped.
    pub fn x_derivative(&self) -> Result<SpectralField> {
        let nyq = self.grid.nyquist();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                if k == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, self.grid.omega(k)) * c
                }
            })
            .collect();
        let parity = match self.parity {
            Parity::Odd => Parity::Even,
            Parity::Even => Parity::Odd,
            Parity::None => Parity::None,
        };
        Ok(SpectralField::from_coeffs(self.grid, coeffs, self.time)?.with_parity(parity))
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `max_j |f(x_j) + f(-x_j)|` relative to `max |f|` (zero for the zero field).
    pub fn parity_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let n = self.grid.num_points();
        let worst = (1..n)
            .map(|j| (self.samples[j] + self.samples[n - j]).abs())
            .fold(0.0_f64, f64::max);
        worst / scale
    }

    /// Value and first two derivatives of the trigonometric interpolant at `x`.
    pub fn evaluate(&self, x: f64) -> (f64, f64, f64) {
        let n = self.grid.num_points();
        let norm = 1.0 / (2.0 * self.grid.half_width());
        let mut f = self.coeffs[0].re;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for k in 1..n / 2 {
            let w = self.grid.omega(k);
            let (s, c) = (w * x).sin_cos();
            let e = Complex64::new(c, s) * self.coeffs[k];
            f += 2.0 * e.re;
            d1 += -2.0 * w * e.im;
            d2 += -2.0 * w * w * e.re;
        }
        let nyq = self.grid.nyquist();
        f += self.coeffs[nyq].re * (self.grid.omega(nyq) * x).cos();
        (f * norm, d1 * norm, d2 * norm)
    }

    /// Location and value of the maximum of `|f|`, refined by a local parabola
    /// and then Newton steps on the interpolant's derivative.
    pub fn peak(&self) -> Option<Peak> {
        let n = self.grid.num_points();
        let (j, vmax) = self
            .samples
            .iter()
            .enumerate()
            .map(|(j, v)| (j, v.abs()))
            .fold((0, 0.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if vmax == 0.0 {
            return None;
        }
        let dx = self.grid.dx();
        let mut x = self.grid.x(j);
        if j > 0 && j + 1 < n {
            let (a, b, c) = (
                self.samples[j - 1].abs(),
                self.samples[j].abs(),
                self.samples[j + 1].abs(),
            );
            let denom = a - 2.0 * b + c;
            if denom < 0.0 {
                x += 0.5 * dx * (a - c) / denom;
            }
        }
        let x_grid = self.grid.x(j);
        for _ in 0..8 {
            let (_, d1, d2) = self.evaluate(x);
            if d2 == 0.0 {
                break;
            }
            let step = d1 / d2;
            let next = x - step;
            if (next - x_grid).abs() > 2.0 * dx {
                break;
            }
            x = next;
            if step.abs() < 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        let value = self.evaluate(x).0;
        Some(Peak { position: x, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub position: f64,
    pub value: f64,
}

/// Forward transform of grid samples taken at time `t`.
pub fn forward_transform(samples: &[f64], grid: GridSpec, t: f64) -> Result<SpectralField> {
    SpectralField::from_samples(grid, samples.to_vec(), t)
}

/// Grid samples of a field.
pub fn inverse_transform(field: &SpectralField) -> Vec<f64> {
    coeffs_to_samples(field.grid(), field.coeffs())
}

/// Parameters of the weighted sup norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BqParams {
    pub q: f64,
    /// Largest admissible ratio between the norm summand at the outermost
    /// frequencies and its maximum.
    pub tail_tolerance: f64,
}

impl Default for BqParams {
    fn default() -> Self {
        BqParams {
            q: 2.0,
            tail_tolerance: 1e-6,
        }
    }
}

impl BqParams {
    pub fn new(q: f64, tail_tolerance: f64) -> Result<Self> {
        if !(q.is_finite() && q > 1.0) {
            return Err(RgError::InvalidInput(format!("q must exceed 1, got {q}")));
        }
        if !(tail_tolerance.is_finite() && tail_tolerance > 0.0) {
            return Err(RgError::InvalidInput(format!(
                "tail tolerance must be positive, got {tail_tolerance}"
            )));
        }
        Ok(BqParams { q, tail_tolerance })
    }

    pub fn weight(&self, omega: f64) -> f64 {
        1.0 + omega.abs().powf(self.q)
    }
}

/// Per-frequency summand `(1+|ω|^q)(|f̂|+|f̂'|+|f̂''|)`, FFT order.
pub fn bq_summands(f: &SpectralField, q: f64) -> Vec<f64> {
    let (d1, d2) = f.omega_derivatives();
    let grid = f.grid();
    (0..grid.num_points())
        .map(|k| {
            let w = 1.0 + grid.omega(k).abs().powf(q);
            w * (f.coeffs()[k].norm() + d1[k].norm() + d2[k].norm())
        })
        .collect()
}

/// `sup_ω (1+|ω|^q)(|f̂(ω)| + |f̂'(ω)| + |f̂''(ω)|)` over the grid frequencies.
pub fn bq_norm(f: &SpectralField, params: &BqParams) -> Result<f64> {
    bq_norm_with_reference(f, params, 0.0)
}

/// As [`bq_norm`], but the truncation check compares the tail against
/// `max(norm, reference)`. Used for small differences of larger fields, whose
/// roundoff floor is set by the larger fields.
pub fn bq_norm_with_reference(f: &SpectralField, params: &BqParams, reference: f64) -> Result<f64> {
    let summands = bq_summands(f, params.q);
    let norm = summands.iter().cloned().fold(0.0_f64, f64::max);
    let grid = f.grid();
    let n = grid.num_points();
    let nyq = grid.nyquist();
    let tail = [nyq - 1, nyq, nyq + 1]
        .iter()
        .filter(|&&k| k < n)
        .map(|&k| summands[k])
        .fold(0.0_f64, f64::max);
    let scale = norm.max(reference);
    if tail > params.tail_tolerance * scale {
        return Err(RgError::Truncation(format!(
            "B_q summand at |ω| = {:.3} is {:.3e}, above {:.1e} x {:.3e}; refine the grid",
            grid.omega(nyq).abs(),
            tail,
            params.tail_tolerance,
            scale
        )));
    }
    Ok(norm)
}

/// Grid maximum of the summand, with no truncation check.
pub fn bq_norm_unchecked(f: &SpectralField, q: f64) -> f64 {
    bq_summands(f, q).into_iter().fold(0.0_f64, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    /// `∫ f dx = f̂(0)`.
    pub mass: f64,
    /// `∫ x f dx`; the fixed-point prefactor is `A = -first_moment`.
    pub first_moment: f64,
}

pub fn moments(f: &SpectralField) -> Moments {
    let grid = f.grid();
    let dx = grid.dx();
    let first_moment = f
        .samples()
        .iter()
        .enumerate()
        .map(|(j, v)| grid.x(j) * v)
        .sum::<f64>()
        * dx;
    Moments {
        mass: f.coeffs()[0].re,
        first_moment,
    }
}

/// Relative size of the samples allowed in the outer 5% of the domain before
/// a rescaling is refused.
const RESCALE_DECAY_TOLERANCE: f64 = 1e-10;

/// Check that `f` has decayed near the edges of the domain.
pub fn check_boundary_decay(f: &SpectralField, tolerance: f64) -> Result<()> {
    let scale = f.max_abs();
    if scale == 0.0 {
        return Ok(());
    }
    let grid = f.grid();
    let cutoff = 0.95 * grid.half_width();
    let edge = f
        .samples()
        .iter()
        .enumerate()
        .filter(|(j, _)| grid.x(*j).abs() >= cutoff)
        .map(|(_, v)| v.abs())
        .fold(0.0_f64, f64::max);
    if edge > tolerance * scale {
        return Err(RgError::Truncation(format!(
            "field has not decayed at the domain edge: |f| = {edge:.3e} vs max {scale:.3e}"
        )));
    }
    Ok(())
}

/// Spatial part of the renormalization map, `g(x) = L² f(Lx)`.
///
/// Evaluated on the Fourier side as `ĝ(ω) = L f̂_BL(ω/L)`, where `f̂_BL` is the
/// transform of the band-limited interpolant of the samples (a direct sum,
/// `O(N²)`). The mass is multiplied by `L`, the first moment is unchanged and
/// the time stamp becomes `t/L²`.
pub fn resample_rescale(f: &SpectralField, l: f64) -> Result<SpectralField> {
    if !(l.is_finite() && l > 1.0) {
        return Err(RgError::InvalidInput(format!(
            "rescaling factor must exceed 1, got {l}"
        )));
    }
    check_boundary_decay(f, RESCALE_DECAY_TOLERANCE)?;
    let grid = *f.grid();
    let n = grid.num_points();
    let dx = grid.dx();
    let samples = f.samples();
    let x0 = grid.x(0);
    const BLOCK: usize = 64;

    // Non-negative wavenumbers 0..=N/2, the rest by conjugate symmetry.
    let half: Vec<Complex64> = (0..=n / 2)
        .map(|kk| {
            let w = kk as f64 * grid.d_omega() / l;
            let (s, c) = (w * dx).sin_cos();
            let step = Complex64::new(c, -s);
            let mut acc = Complex64::new(0.0, 0.0);
            for start in (0..n).step_by(BLOCK) {
                let (s0, c0) = (w * (x0 + start as f64 * dx)).sin_cos();
                let mut phase = Complex64::new(c0, -s0);
                for &v in &samples[start..(start + BLOCK).min(n)] {
                    acc += phase * v;
                    phase *= step;
                }
            }
            acc * (l * dx)
        })
        .collect();

    let coeffs = (0..n)
        .map(|k| {
            let kk = grid.wavenumber(k);
            if kk >= 0 {
                half[kk as usize]
            } else {
                half[(-kk) as usize].conj()
            }
        })
        .collect();
    Ok(SpectralField::from_coeffs(grid, coeffs, f.time() / (l * l))?.with_parity(f.parity()))
}

/// Write `x, f(x)` rows.
pub fn write_field_csv(f: &SpectralField, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "f"])?;
    for (j, v) in f.samples().iter().enumerate() {
        w.write_record([format!("{}", f.grid().x(j)), format!("{v}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Write `omega, re_fhat, im_fhat` rows in increasing frequency.
pub fn write_spectrum_csv(f: &SpectralField, path: &Path) -> Result<()> {
    let grid = f.grid();
    let n = grid.num_points();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["omega", "re_fhat", "im_fhat"])?;
    for i in 0..n {
        // FFT slot of the i-th frequency in increasing order
        let k = (i + n / 2) % n;
        let c = f.coeffs()[k];
        w.write_record([
            format!("{}", grid.omega(k)),
            format!("{}", c.re),
            format!("{}", c.im),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &GridSpec) -> SpectralField {
        let samples = grid
            .xs()
            .iter()
            .map(|x| (-x * x / 4.0).exp() / (4.0 * PI).sqrt())
            .collect();
        SpectralField::from_samples(*grid, samples, 1.0).unwrap()
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(GridSpec::new(40.0, 1000).is_err());
        assert!(GridSpec::new(40.0, 32).is_err());
        assert!(GridSpec::new(-1.0, 256).is_err());
        let g = GridSpec::new(40.0, 2048).unwrap();
        assert_eq!(g.dx() * 2048.0, 80.0);
        assert_eq!(g.wavenumber(1024), -1024);
        assert_eq!(g.mirror(0), None);
        assert_eq!(g.mirror(1), Some(2047));
    }

    #[test]
    fn zero_samples_give_zero_coefficients() {
        let g = GridSpec::default();
        let f = SpectralField::zeros(g, 1.0).unwrap();
        assert!(f.coeffs().iter().all(|c| c.norm() == 0.0));
        assert_eq!(bq_norm(&f, &BqParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_samples_rejected() {
        let g = GridSpec::new(10.0, 64).unwrap();
        let mut s = vec![0.0; 64];
        s[3] = f64::NAN;
        assert!(matches!(
            SpectralField::from_samples(g, s, 1.0),
            Err(RgError::InvalidInput(_))
        ));
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let g = GridSpec::default();
        let f = gaussian(&g);
        let err = (0..g.num_points())
            .map(|k| (f.coeffs()[k] - Complex64::new((-g.omega(k).powi(2)).exp(), 0.0)).norm())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10, "max error {err:e}");
    }

    #[test]
    fn derivative_of_gaussian_transforms_to_i_omega_gaussian() {
        let g = GridSpec::default();
        let samples = g
            .xs()
            .iter()
            .map(|x| -(x / 2.0) * (-x * x / 4.0).exp() / (4.0 * PI).sqrt())
            .collect();
        let f = SpectralField::from_samples(g, samples, 1.0).unwrap();
        let err = (0..g.num_points())
            .map(|k| {
                let w = g.omega(k);
                (f.coeffs()[k] - Complex64::new(0.0, w * (-w * w).exp())).norm()
            })
            .fold(0.0, f64::max);
        assert!(err <= 1e-10, "max error {err:e}");
    }

    #[test]
    fn round_trip_is_identity() {
        let g = GridSpec::default();
        let f = gaussian(&g);
        let back = coeffs_to_samples(&g, f.coeffs());
        let scale = f.max_abs();
        let err = back
            .iter()
            .zip(f.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12 * scale);
    }

    #[test]
    fn gaussian_moments() {
        let f = gaussian(&GridSpec::default());
        let m = moments(&f);
        assert!((m.mass - 1.0).abs() < 1e-12);
        assert!(m.first_moment.abs() < 1e-12);
    }

    #[test]
    fn gaussian_norm_matches_dense_analytic_maximum() {
        // f̂ = e^{-ω²}, f̂' = -2ω e^{-ω²}, f̂'' = (4ω² - 2) e^{-ω²}
        let q = 2.0;
        let g = GridSpec::default();
        let f = gaussian(&g);
        let computed = bq_norm(&f, &BqParams::new(q, 1e-6).unwrap()).unwrap();
        let summand = |w: f64| {
            let e = (-w * w).exp();
            (1.0 + w.abs().powf(q)) * (e + 2.0 * w.abs() * e + (4.0 * w * w - 2.0).abs() * e)
        };
        // grid maximum and a 10x finer analytic scan
        let grid_max = g.omegas().into_iter().map(summand).fold(0.0, f64::max);
        let fine = g.d_omega() / 10.0;
        let fine_max = (0..20_000).map(|i| summand(i as f64 * fine)).fold(0.0, f64::max);
        assert!((computed - grid_max).abs() <= 1e-9 * grid_max);
        assert!((computed - fine_max).abs() <= 1e-6 * fine_max, "{computed} vs {fine_max}");
    }

    #[test]
    fn truncation_is_flagged() {
        // a discontinuous box has a spectrum decaying like 1/ω
        let g = GridSpec::new(10.0, 256).unwrap();
        let s = g.xs().iter().map(|x| if x.abs() < 1.0 { 1.0 } else { 0.0 }).collect();
        let f = SpectralField::from_samples(g, s, 1.0).unwrap();
        assert!(matches!(
            bq_norm(&f, &BqParams::default()),
            Err(RgError::Truncation(_))
        ));
    }

    #[test]
    fn rescale_scales_mass_and_keeps_first_moment() {
        let g = GridSpec::default();
        let phi = gaussian(&g);
        let shifted: Vec<f64> = g
            .xs()
            .iter()
            .map(|x| (-(x - 1.0) * (x - 1.0) / 4.0).exp() / (4.0 * PI).sqrt())
            .collect();
        let f = SpectralField::from_samples(g, shifted, 4.0).unwrap();
        for l in [1.5, 2.0, 3.0] {
            let r = resample_rescale(&phi, l).unwrap();
            assert!((moments(&r).mass - l).abs() < 1e-12 * l);
            let rf = resample_rescale(&f, l).unwrap();
            let m0 = moments(&f).first_moment;
            let m1 = moments(&rf).first_moment;
            assert!((m1 - m0).abs() <= 1e-12 * m0.abs(), "{m0} -> {m1}");
            assert!((rf.time() - 4.0 / (l * l)).abs() < 1e-15);
        }
    }

    #[test]
    fn rescale_of_gaussian_matches_closed_form() {
        // L² φ(Lx) has transform L e^{-ω²/L²}
        let g = GridSpec::default();
        let l = 2.0;
        let r = resample_rescale(&gaussian(&g), l).unwrap();
        let err = (0..g.num_points())
            .map(|k| {
                let w = g.omega(k);
                (r.coeffs()[k] - Complex64::new(l * (-w * w / (l * l)).exp(), 0.0)).norm()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-11, "{err:e}");
    }

    #[test]
    fn rescale_refuses_undecayed_fields() {
        let g = GridSpec::new(10.0, 256).unwrap();
        let s = g.xs().iter().map(|x| (-x * x / 400.0).exp()).collect();
        let f = SpectralField::from_samples(g, s, 1.0).unwrap();
        assert!(matches!(resample_rescale(&f, 2.0), Err(RgError::Truncation(_))));
    }

    #[test]
    fn evaluate_reproduces_samples_and_derivatives() {
        let g = GridSpec::new(20.0, 512).unwrap();
        let f = gaussian(&g);
        for j in [100, 256, 300] {
            let (v, _, _) = f.evaluate(g.x(j));
            assert!((v - f.samples()[j]).abs() < 1e-13);
        }
        let x = 0.731;
        let (v, d1, d2) = f.evaluate(x);
        let exact = (-x * x / 4.0_f64).exp() / (4.0 * PI).sqrt();
        assert!((v - exact).abs() < 1e-13);
        assert!((d1 + x / 2.0 * exact).abs() < 1e-12);
        assert!((d2 - (x * x / 4.0 - 0.5) * exact).abs() < 1e-12);
    }

    #[test]
    fn peak_of_shifted_gaussian() {
        let g = GridSpec::new(20.0, 512).unwrap();
        let s = g
            .xs()
            .iter()
            .map(|x| -3.0 * (-(x - 0.123) * (x - 0.123)).exp())
            .collect();
        let f = SpectralField::from_samples(g, s, 1.0).unwrap();
        let p = f.peak().unwrap();
        assert!((p.position - 0.123).abs() < 1e-12);
        assert!((p.value + 3.0).abs() < 1e-12);
    }

    #[test]
    fn parity_defect_of_odd_and_even_samples() {
        let g = GridSpec::new(20.0, 256).unwrap();
        let odd = SpectralField::from_samples(g, g.xs().iter().map(|x| x * (-x * x).exp()).collect(), 1.0)
            .unwrap();
        assert!(odd.parity_defect() < 1e-15);
        let even = SpectralField::from_samples(g, g.xs().iter().map(|x| (-x * x).exp()).collect(), 1.0)
            .unwrap();
        assert!((even.parity_defect() - 2.0).abs() < 1e-12);
    }
}
