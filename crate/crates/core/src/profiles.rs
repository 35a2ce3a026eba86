//! Closed-form profiles, the `A f_1* + g` decomposition and odd extension.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Hypothesis, Result, RgError};
use crate::spectral::{bq_norm_with_reference, moments, BqParams, GridSpec, Parity, SpectralField};

/// Relative mass tolerance (against `‖f‖_q`) for the zero-mass hypothesis.
pub const ZERO_MASS_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// `f̂(ω) = iω e^{-w²ω²}`; at `w = 1` this is `-(x/2) e^{-x²/4}/√(4π)`.
    FixedPoint,
    /// `f̂(ω) = e^{-w²ω²}`; at `w = 1` the heat kernel at `t = 1`.
    Gaussian,
    /// `(H_k(y)/2^k) e^{-y²}` with `y = x/w` and odd `k`. For `k ≥ 3` both the
    /// mass and the first moment vanish.
    HermiteOdd(u32),
    /// `h_w(x - s) - μ h_{2w}(x + s)` for the compact bump
    /// `h_w(x) = exp(-1/(1 - (x/w)²))`, with `μ` fixing the discrete mass at zero.
    BumpDipole { shift: f64 },
    /// Samples supplied by the caller, one per grid point.
    Samples(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileId {
    pub kind: ProfileKind,
    pub amplitude: f64,
    pub width: f64,
}

impl ProfileId {
    pub fn new(kind: ProfileKind, amplitude: f64, width: f64) -> Self {
        ProfileId {
            kind,
            amplitude,
            width,
        }
    }

    pub fn fixed_point() -> Self {
        Self::new(ProfileKind::FixedPoint, 1.0, 1.0)
    }

    pub fn gaussian() -> Self {
        Self::new(ProfileKind::Gaussian, 1.0, 1.0)
    }
}

fn from_spectrum<F>(grid: GridSpec, parity: Parity, g: F) -> Result<SpectralField>
where
    F: Fn(f64) -> Complex64,
{
    let coeffs = grid.omegas().into_iter().map(g).collect();
    SpectralField::from_coeffs(grid, coeffs, 1.0)?.project_parity(parity)
}

fn bump(x: f64, w: f64) -> f64 {
    let y = x / w;
    if y.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - y * y)).exp()
    }
}

/// `H_k(y)`, physicists' Hermite polynomial, by the three-term recurrence.
pub fn hermite(k: u32, y: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * y);
    if k == 0 {
        return h0;
    }
    for n in 1..k {
        let h2 = 2.0 * y * h1 - 2.0 * n as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Sample a profile on the grid at `t = 1`.
pub fn make_profile(id: &ProfileId, grid: GridSpec) -> Result<SpectralField> {
    let (amp, w) = (id.amplitude, id.width);
    if !amp.is_finite() {
        return Err(RgError::InvalidInput(format!("amplitude must be finite, got {amp}")));
    }
    if !(w.is_finite() && w > 0.0) {
        return Err(RgError::InvalidInput(format!("width must be positive, got {w}")));
    }
    match &id.kind {
        ProfileKind::FixedPoint => from_spectrum(grid, Parity::Odd, |om| {
            Complex64::new(0.0, amp * om * (-w * w * om * om).exp())
        }),
        ProfileKind::Gaussian => from_spectrum(grid, Parity::Even, |om| {
            Complex64::new(amp * (-w * w * om * om).exp(), 0.0)
        }),
        ProfileKind::HermiteOdd(k) => {
            if k % 2 == 0 {
                return Err(RgError::InvalidInput(format!(
                    "hermite_odd needs an odd degree, got {k}"
                )));
            }
            let scale = 0.5_f64.powi(*k as i32);
            let samples = grid
                .xs()
                .into_iter()
                .map(|x| {
                    let y = x / w;
                    amp * scale * hermite(*k, y) * (-y * y).exp()
                })
                .collect();
            SpectralField::from_samples(grid, samples, 1.0)?.project_parity(Parity::Odd)
        }
        ProfileKind::BumpDipole { shift } => {
            let s = *shift;
            if !s.is_finite() || s.abs() + 2.0 * w >= 0.95 * grid.half_width() {
                return Err(RgError::InvalidInput(format!(
                    "bump dipole with shift {s} and width {w} does not fit the domain"
                )));
            }
            let xs = grid.xs();
            let left: Vec<f64> = xs.iter().map(|&x| bump(x - s, w)).collect();
            let right: Vec<f64> = xs.iter().map(|&x| bump(x + s, 2.0 * w)).collect();
            let mu = left.iter().sum::<f64>() / right.iter().sum::<f64>();
            let samples = left
                .iter()
                .zip(&right)
                .map(|(a, b)| amp * (a - mu * b))
                .collect();
            SpectralField::from_samples(grid, samples, 1.0)
        }
        ProfileKind::Samples(values) => {
            let samples = values.iter().map(|v| amp * v).collect();
            SpectralField::from_samples(grid, samples, 1.0)
        }
    }
}

/// `f_1*` with unit amplitude and width on `grid`.
pub fn f1_star(grid: GridSpec) -> Result<SpectralField> {
    make_profile(&ProfileId::fixed_point(), grid)
}

/// `f_1*(x) = -(x/2) e^{-x²/4}/√(4π)` evaluated directly.
pub fn f1_star_value(x: f64) -> f64 {
    -(x / 2.0) * (-x * x / 4.0).exp() / (4.0 * PI).sqrt()
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub a: f64,
    pub g: SpectralField,
}

fn hypothesis_for(f: &SpectralField) -> Hypothesis {
    if f.parity() == Parity::Odd {
        Hypothesis::Odd
    } else {
        Hypothesis::ZeroMass
    }
}

/// Fail unless `|mass(f)| ≤ ZERO_MASS_TOLERANCE · ‖f‖_q`.
pub fn check_zero_mass(f: &SpectralField, params: &BqParams) -> Result<()> {
    let mass = moments(f).mass;
    let norm = bq_norm_with_reference(f, params, 0.0)?;
    if mass.abs() > ZERO_MASS_TOLERANCE * norm {
        return Err(RgError::Hypothesis {
            hypothesis: hypothesis_for(f),
            detail: format!("mass {mass:.3e} is not zero (‖f‖_q = {norm:.3e})"),
        });
    }
    Ok(())
}

/// Split `f = A f_1* + g` with `A = -∫x f dx`, so that `ĝ(0) = ĝ'(0) = 0`.
pub fn decompose(f: &SpectralField, params: &BqParams) -> Result<Decomposition> {
    check_zero_mass(f, params)?;
    let a = -moments(f).first_moment;
    let star = f1_star(*f.grid())?.with_time(f.time())?;
    let g = f.combine(1.0, &star, -a)?;
    Ok(Decomposition { a, g })
}

/// Odd extension of half-line samples given at `x = kΔx`, `k = 0..N/2-1`.
pub fn odd_extension(samples_half: &[f64], grid: GridSpec) -> Result<SpectralField> {
    let n = grid.num_points();
    if samples_half.len() != n / 2 {
        return Err(RgError::InvalidInput(format!(
            "expected {} half-line samples, got {}",
            n / 2,
            samples_half.len()
        )));
    }
    if let Some(v) = samples_half.iter().find(|v| !v.is_finite()) {
        return Err(RgError::InvalidInput(format!("non-finite half-line sample {v}")));
    }
    let scale = samples_half.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if samples_half[0].abs() > 1e-14 * scale {
        return Err(RgError::Hypothesis {
            hypothesis: Hypothesis::Odd,
            detail: format!(
                "Dirichlet condition f(0) = 0 violated: f(0) = {:e}",
                samples_half[0]
            ),
        });
    }
    let mut full = vec![0.0; n];
    for (k, &v) in samples_half.iter().enumerate().skip(1) {
        full[n / 2 + k] = v;
        full[n / 2 - k] = -v;
    }
    let f = SpectralField::from_samples(grid, full, 1.0)?.with_parity(Parity::Odd);
    crate::spectral::check_boundary_decay(&f, 1e-8)?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::bq_norm;

    fn grid() -> GridSpec {
        GridSpec::default()
    }

    #[test]
    fn fixed_point_matches_closed_form_samples() {
        let f = f1_star(grid()).unwrap();
        let err = grid()
            .xs()
            .iter()
            .zip(f.samples())
            .map(|(&x, v)| (v - f1_star_value(x)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-14, "{err:e}");
        assert_eq!(f.parity_defect(), 0.0);
    }

    #[test]
    fn hermite_recurrence() {
        let y = 0.7;
        assert!((hermite(3, y) - (8.0 * y * y * y - 12.0 * y)).abs() < 1e-14);
        assert!((hermite(5, y) - (32.0 * y.powi(5) - 160.0 * y.powi(3) + 120.0 * y)).abs() < 1e-12);
    }

    #[test]
    fn hermite_three_is_x_cubed_minus_three_halves_x() {
        let f = make_profile(&ProfileId::new(ProfileKind::HermiteOdd(3), 1.0, 1.0), grid()).unwrap();
        for j in [900, 1000, 1100] {
            let x = grid().x(j);
            let expected = (x * x * x - 1.5 * x) * (-x * x).exp();
            assert!((f.samples()[j] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn even_hermite_degree_rejected() {
        let id = ProfileId::new(ProfileKind::HermiteOdd(2), 1.0, 1.0);
        assert!(make_profile(&id, grid()).is_err());
    }

    #[test]
    fn bad_width_rejected() {
        let id = ProfileId::new(ProfileKind::Gaussian, 1.0, 0.0);
        assert!(matches!(make_profile(&id, grid()), Err(RgError::InvalidInput(_))));
        let id = ProfileId::new(ProfileKind::Gaussian, f64::INFINITY, 1.0);
        assert!(make_profile(&id, grid()).is_err());
    }

    #[test]
    fn bump_dipole_has_zero_mass_and_is_not_odd() {
        // compact bumps have slowly decaying spectra; width 6 keeps the tail resolved
        let id = ProfileId::new(ProfileKind::BumpDipole { shift: 8.0 }, 1.0, 6.0);
        let f = make_profile(&id, grid()).unwrap();
        assert!(moments(&f).mass.abs() < 1e-13);
        assert!(f.parity_defect() > 0.1);
        assert!(bq_norm(&f, &BqParams::default()).is_ok());
    }

    #[test]
    fn decompose_rejects_mass() {
        let f = make_profile(&ProfileId::gaussian(), grid()).unwrap();
        let err = decompose(&f, &BqParams::default()).unwrap_err();
        assert!(matches!(
            err,
            RgError::Hypothesis {
                hypothesis: Hypothesis::ZeroMass,
                ..
            }
        ));
    }

    #[test]
    fn odd_extension_rejects_nonzero_origin() {
        let g = GridSpec::new(20.0, 256).unwrap();
        let half: Vec<f64> = (0..128).map(|k| (-(k as f64 * g.dx()).powi(2)).exp()).collect();
        assert!(matches!(
            odd_extension(&half, g),
            Err(RgError::Hypothesis {
                hypothesis: Hypothesis::Odd,
                ..
            })
        ));
    }

    #[test]
    fn odd_extension_of_zero_is_zero() {
        let g = GridSpec::new(20.0, 256).unwrap();
        let f = odd_extension(&[0.0; 128], g).unwrap();
        assert_eq!(f.max_abs(), 0.0);
    }
}
