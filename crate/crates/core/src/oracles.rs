//! Reference solvers that share no time-stepping code with `dynamics`: the
//! Cole–Hopf formula for Burgers, the exact heat flow, and an explicit
//! finite-difference integrator on a refined grid.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dynamics::{linear_propagate, NonlinearityForm, NonlinearitySpec};
use crate::error::{Result, RgError};
use crate::spectral::{Parity, SpectralField};

/// Explicit RK4 is stable for `u_t = u_xx` when `dt ≤ 2.785 Δx²/4`.
const RK4_DIFFUSION_LIMIT: f64 = 0.696;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    ColeHopf,
    LinearHeat,
    FdBrute,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub kind: OracleKind,
    /// Grid refinement of the finite-difference run relative to the input grid.
    pub fine_factor: usize,
    /// Fraction of the explicit stability limit used as time step.
    pub fd_dt_safety: f64,
}

impl OracleConfig {
    pub fn new(kind: OracleKind) -> Self {
        OracleConfig {
            kind,
            fine_factor: 4,
            fd_dt_safety: 0.9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == OracleKind::FdBrute && self.fine_factor < 4 {
            return Err(RgError::Config(format!(
                "fd_brute needs fine_factor >= 4, got {}",
                self.fine_factor
            )));
        }
        if self.fine_factor == 0 {
            return Err(RgError::Config("fine_factor must be positive".into()));
        }
        if !(self.fd_dt_safety > 0.0 && self.fd_dt_safety <= 1.0) {
            return Err(RgError::Config(format!(
                "fd_dt_safety must lie in (0, 1], got {}",
                self.fd_dt_safety
            )));
        }
        Ok(())
    }
}

/// Exact heat flow from `f.time()` to `t`.
pub fn linear_heat_solve(f: &SpectralField, t: f64) -> Result<SpectralField> {
    linear_propagate(f, f.time(), t)
}

/// `P(x) = ∫_0^x f` at the grid points. The mass is carried by
/// `(m/2) erf(x/2)`, the primitive of the unit heat kernel at `t = 1`; the
/// zero-mass remainder is integrated spectrally.
fn primitive(f: &SpectralField) -> Vec<f64> {
    let grid = f.grid();
    let mass = f.coeffs()[0].re;
    let coeffs: Vec<Complex64> = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let w = grid.omega(k);
            if k == 0 || k == grid.nyquist() {
                return Complex64::new(0.0, 0.0);
            }
            (c - mass * (-w * w).exp()) / Complex64::new(0.0, w)
        })
        .collect();
    let rest = SpectralField::from_coeffs(*grid, coeffs, 1.0)
        .expect("finite coefficients")
        .samples()
        .to_vec();
    let origin = rest[grid.num_points() / 2];
    grid.xs()
        .iter()
        .zip(&rest)
        .map(|(&x, &r)| r - origin + 0.5 * mass * libm::erf(x / 2.0))
        .collect()
}

/// Cole–Hopf solution of `u_t = u_xx + λ u u_x` at time `t` from `f` at
/// `f.time()`. With `Φ = exp((λ/2)∫_0^x f)` solving the heat equation,
/// `u = (2/λ) Φ_x/Φ`. The heat flow of `Φ` is done by direct quadrature
/// against the Gaussian kernel, after removing an erf-shaped reference whose
/// flow is known in closed form.
pub fn cole_hopf_solve(f: &SpectralField, lambda: f64, t: f64) -> Result<SpectralField> {
    if lambda == 0.0 {
        return Err(RgError::InvalidInput(
            "Cole-Hopf needs lambda != 0; use linear_heat_solve".into(),
        ));
    }
    let s = t - f.time();
    if !(s >= 0.0) {
        return Err(RgError::InvalidInput(format!(
            "cannot solve backwards from t = {} to t = {t}",
            f.time()
        )));
    }
    let grid = *f.grid();
    let n = grid.num_points();
    let xs = grid.xs();
    let dx = grid.dx();
    let prim = primitive(f);
    let phi: Vec<f64> = prim.iter().map(|p| (0.5 * lambda * p).exp()).collect();
    // P(±∞) differ by the mass; for zero mass they coincide but need not vanish
    let mass = f.coeffs()[0].re;
    let phi_minus = (0.5 * lambda * prim[0]).exp();
    let phi_plus = (0.5 * lambda * (prim[0] + mass)).exp();
    let jump = phi_plus - phi_minus;
    // reference r(x) = Φ₋ + (Φ₊ - Φ₋)(1 + erf(x/2))/2 and its flow
    let reference = |x: f64, tau: f64| {
        let w = 2.0 * (1.0 + tau).sqrt();
        (
            phi_minus + 0.5 * jump * (1.0 + libm::erf(x / w)),
            jump * (-(x / w).powi(2)).exp() / (PI.sqrt() * w),
        )
    };
    let rest: Vec<f64> = xs
        .iter()
        .zip(&phi)
        .map(|(&x, &p)| p - reference(x, 0.0).0)
        .collect();

    let (mut value, mut slope) = (vec![0.0; n], vec![0.0; n]);
    if s == 0.0 {
        value.copy_from_slice(&rest);
        let fx = f.samples();
        for j in 0..n {
            slope[j] = 0.5 * lambda * fx[j] * phi[j] - reference(xs[j], 0.0).1;
        }
    } else {
        // Toeplitz kernels G_s(z) and ∂_z G_s(z) at z = kΔx
        let norm = 1.0 / (4.0 * PI * s).sqrt();
        let kernel: Vec<f64> = (0..n)
            .map(|k| {
                let z = k as f64 * dx;
                norm * (-z * z / (4.0 * s)).exp()
            })
            .collect();
        for i in 0..n {
            let (mut v, mut d) = (0.0, 0.0);
            for (j, &r) in rest.iter().enumerate() {
                let k = i.abs_diff(j);
                let z = (i as f64 - j as f64) * dx;
                v += kernel[k] * r;
                d += -z / (2.0 * s) * kernel[k] * r;
            }
            value[i] = v * dx;
            slope[i] = d * dx;
        }
    }
    let mut u = vec![0.0; n];
    for j in 0..n {
        let (r, rx) = reference(xs[j], s);
        let p = value[j] + r;
        if !(p > 0.0) {
            return Err(RgError::Solver(format!(
                "Cole-Hopf potential lost positivity at x = {}: {p:e}",
                xs[j]
            )));
        }
        u[j] = 2.0 / lambda * (slope[j] + rx) / p;
    }
    Ok(SpectralField::from_samples(grid, u, t)?.with_parity(f.parity()))
}

fn pointwise(spec: &NonlinearitySpec, u: f64, ux: f64) -> f64 {
    let lambda = spec.lambda();
    spec.terms()
        .iter()
        .map(|t| match spec.form() {
            NonlinearityForm::Burgers | NonlinearityForm::H1Derivative => {
                lambda * t.c * u.powi(t.n as i32) * ux
            }
            NonlinearityForm::H2Odd => lambda * t.c * u.powi(2 * t.m as i32 + 1) * ux.powi(t.n as i32),
        })
        .sum()
}

/// Right-hand side `u_xx + F(u, u_x)` by second-order central differences
/// with `u = 0` beyond both ends.
fn fd_rhs(spec: &NonlinearitySpec, u: &[f64], dx: f64, guard: (f64, f64), out: &mut [f64]) -> Result<()> {
    let n = u.len();
    let at = |j: isize| if j < 0 || j >= n as isize { 0.0 } else { u[j as usize] };
    for j in 0..n {
        let (l, c, r) = (at(j as isize - 1), u[j], at(j as isize + 1));
        let ux = (r - l) / (2.0 * dx);
        if c.abs() >= guard.0 || ux.abs() >= guard.1 {
            return Err(RgError::Analyticity(format!(
                "finite-difference state left the analyticity guard: |u| = {:.3e}, |u_x| = {:.3e}",
                c.abs(),
                ux.abs()
            )));
        }
        out[j] = (r - 2.0 * c + l) / (dx * dx) + pointwise(spec, c, ux);
    }
    Ok(())
}

/// Explicit RK4 with central differences on a grid `fine_factor` times finer,
/// from `f.time()` to `t`, sampled back on the input grid.
pub fn fd_brute_solve(
    f: &SpectralField,
    spec: &NonlinearitySpec,
    t: f64,
    cfg: &OracleConfig,
) -> Result<SpectralField> {
    cfg.validate()?;
    let span = t - f.time();
    if !(span >= 0.0) {
        return Err(RgError::InvalidInput(format!(
            "cannot solve backwards from t = {} to t = {t}",
            f.time()
        )));
    }
    let grid = *f.grid();
    let factor = cfg.fine_factor;
    let fine = grid.refined(factor)?;
    let nf = fine.num_points();
    // band-limited interpolation onto the fine grid
    let mut coeffs = vec![Complex64::new(0.0, 0.0); nf];
    for (k, &c) in f.coeffs().iter().enumerate() {
        if k == grid.nyquist() {
            continue;
        }
        let kk = grid.wavenumber(k);
        coeffs[kk.rem_euclid(nf as i64) as usize] = c;
    }
    let mut u = SpectralField::from_coeffs(fine, coeffs, f.time())?.samples().to_vec();

    let dx = fine.dx();
    let limit = RK4_DIFFUSION_LIMIT * dx * dx;
    let steps = (span / (cfg.fd_dt_safety * limit)).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    if dt > limit {
        return Err(RgError::Solver(format!(
            "time step {dt:e} exceeds the explicit stability limit {limit:e}"
        )));
    }
    let (r_u, r_v) = spec.radii();
    let guard = (0.9 * r_u, 0.9 * r_v);
    let mut k1 = vec![0.0; nf];
    let mut k2 = vec![0.0; nf];
    let mut k3 = vec![0.0; nf];
    let mut k4 = vec![0.0; nf];
    let mut tmp = vec![0.0; nf];
    if span > 0.0 {
        for _ in 0..steps {
            fd_rhs(spec, &u, dx, guard, &mut k1)?;
            for j in 0..nf {
                tmp[j] = u[j] + 0.5 * dt * k1[j];
            }
            fd_rhs(spec, &tmp, dx, guard, &mut k2)?;
            for j in 0..nf {
                tmp[j] = u[j] + 0.5 * dt * k2[j];
            }
            fd_rhs(spec, &tmp, dx, guard, &mut k3)?;
            for j in 0..nf {
                tmp[j] = u[j] + dt * k3[j];
            }
            fd_rhs(spec, &tmp, dx, guard, &mut k4)?;
            for j in 0..nf {
                u[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
    }
    let coarse: Vec<f64> = (0..grid.num_points()).map(|j| u[j * factor]).collect();
    let parity = if f.parity() == Parity::Odd && spec.preserved_parity() == Parity::Odd {
        Parity::Odd
    } else {
        Parity::None
    };
    Ok(SpectralField::from_samples(grid, coarse, t)?.with_parity(parity))
}

/// Run the oracle selected by `cfg.kind`.
pub fn solve_with(
    f: &SpectralField,
    spec: &NonlinearitySpec,
    t: f64,
    cfg: &OracleConfig,
) -> Result<SpectralField> {
    match cfg.kind {
        OracleKind::ColeHopf => {
            if spec.form() != NonlinearityForm::Burgers {
                return Err(RgError::InvalidInput(
                    "Cole-Hopf applies to the Burgers nonlinearity only".into(),
                ));
            }
            cole_hopf_solve(f, spec.lambda() * spec.terms()[0].c, t)
        }
        OracleKind::LinearHeat => linear_heat_solve(f, t),
        OracleKind::FdBrute => fd_brute_solve(f, spec, t, cfg),
    }
}

/// `max_j |a_j - b_j|` over the grid.
pub fn sup_difference(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    Ok(a.sub(b)?.max_abs())
}
