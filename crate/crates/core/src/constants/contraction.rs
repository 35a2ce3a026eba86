//! Empirical stand-ins for the contraction constants `C` and `L_0`, measured
//! with the linear RG map on probes that have zero mass and zero first moment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, RgError};
use crate::profiles::{make_profile, ProfileId, ProfileKind};
use crate::rg::linear_rg_step;
use crate::spectral::{bq_norm, bq_norm_with_reference, moments, BqParams, GridSpec, SpectralField};

/// Relative size of `ĝ(0)` and `ĝ'(0)` tolerated in a probe.
const MOMENT_TOLERANCE: f64 = 1e-8;

/// Slack allowed for held-out probes against `C_emp / L`.
pub const HELD_OUT_SLACK: f64 = 0.10;

/// Randomized probes alternating between odd Hermite functions of degree 3
/// and 5 (widths in `[0.8, 1.9]`) and differences of two normalized Gaussians
/// (widths in `[0.4, 0.95]`). All have zero mass and zero first moment.
pub fn contraction_probes(grid: GridSpec, seed: u64, count: usize) -> Result<Vec<SpectralField>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let f = match i % 3 {
            0 | 1 => {
                let degree = if i % 3 == 0 { 3 } else { 5 };
                let w = rng.gen_range(0.8..1.9);
                make_profile(&ProfileId::new(ProfileKind::HermiteOdd(degree), 1.0, w), grid)?
            }
            _ => {
                let w1 = rng.gen_range(0.4..0.65);
                let w2 = rng.gen_range(0.7..0.95);
                let a = make_profile(&ProfileId::new(ProfileKind::Gaussian, 1.0, w1), grid)?;
                let b = make_profile(&ProfileId::new(ProfileKind::Gaussian, 1.0, w2), grid)?;
                a.sub(&b)?
            }
        };
        out.push(f);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRatio {
    pub probe: usize,
    pub l: f64,
    /// `‖R_L g‖_q / ‖g‖_q`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionEstimate {
    /// `max (‖R_L g‖_q/‖g‖_q) · L` over training probes and tested `L`.
    pub c_emp: f64,
    /// Smallest tested `L` whose worst training ratio is below 1.
    pub l0_emp: Option<f64>,
    pub train: Vec<ProbeRatio>,
    pub held_out: Vec<ProbeRatio>,
    /// Largest `ratio / (C_emp/L)` among held-out probes.
    pub held_out_worst: f64,
}

impl ContractionEstimate {
    pub fn held_out_within_slack(&self) -> bool {
        self.held_out_worst <= 1.0 + HELD_OUT_SLACK
    }

    /// Worst training ratio at `l`.
    pub fn max_ratio_at(&self, l: f64) -> Option<f64> {
        self.train
            .iter()
            .filter(|r| r.l == l)
            .map(|r| r.ratio)
            .reduce(f64::max)
    }
}

fn check_probe(g: &SpectralField, params: &BqParams) -> Result<f64> {
    let norm = bq_norm(g, params)?;
    let m = moments(g);
    if m.mass.abs() > MOMENT_TOLERANCE * norm || m.first_moment.abs() > MOMENT_TOLERANCE * norm {
        return Err(RgError::InvalidInput(format!(
            "contraction probe needs zero mass and first moment, got ({:.3e}, {:.3e})",
            m.mass, m.first_moment
        )));
    }
    Ok(norm)
}

fn ratios(probes: &[SpectralField], l_values: &[f64], params: &BqParams) -> Result<Vec<ProbeRatio>> {
    let mut out = Vec::new();
    for (i, g) in probes.iter().enumerate() {
        let norm = check_probe(g, params)?;
        for &l in l_values {
            let r = linear_rg_step(g, l)?;
            let rn = bq_norm_with_reference(&r, params, norm)?;
            out.push(ProbeRatio {
                probe: i,
                l,
                ratio: rn / norm,
            });
        }
    }
    Ok(out)
}

/// Measure the contraction of the linear RG map on `train` and `held_out`
/// probes for each `L` in `l_values`.
pub fn estimate_contraction_constant(
    l_values: &[f64],
    params: &BqParams,
    train: &[SpectralField],
    held_out: &[SpectralField],
) -> Result<ContractionEstimate> {
    if train.is_empty() || l_values.is_empty() {
        return Err(RgError::InvalidInput(
            "need at least one probe and one L".into(),
        ));
    }
    let train_r = ratios(train, l_values, params)?;
    let held_r = ratios(held_out, l_values, params)?;
    let c_emp = train_r
        .iter()
        .map(|r| r.ratio * r.l)
        .fold(0.0_f64, f64::max);
    let mut sorted = l_values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let l0_emp = sorted.into_iter().find(|&l| {
        train_r
            .iter()
            .filter(|r| r.l == l)
            .all(|r| r.ratio < 1.0)
    });
    let held_out_worst = held_r
        .iter()
        .map(|r| r.ratio / (c_emp / r.l))
        .fold(0.0_f64, f64::max);
    Ok(ContractionEstimate {
        c_emp,
        l0_emp,
        train: train_r,
        held_out: held_r,
        held_out_worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::f1_star;

    #[test]
    fn fixed_point_is_not_a_valid_probe() {
        let g = GridSpec::default();
        let f = f1_star(g).unwrap();
        let err = estimate_contraction_constant(&[2.0], &BqParams::default(), &[f], &[]);
        assert!(matches!(err, Err(RgError::InvalidInput(_))));
    }

    #[test]
    fn probes_are_reproducible_from_the_seed() {
        let g = GridSpec::new(40.0, 512).unwrap();
        let a = contraction_probes(g, 7, 4).unwrap();
        let b = contraction_probes(g, 7, 4).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.samples(), y.samples());
        }
    }
}
