//! Picard iteration of the mild formulation `u = u_f + N(u)`,
//! `N(u)^(t) = ∫_1^t e^{-ω²(t-s)} F̂(u)(s) ds`.
//!
//! The time integral uses the product trapezoid rule: `F̂` is interpolated
//! linearly between nodes and integrated exactly against the heat factor, so
//! the `s → t` end of the kernel needs no special treatment.

use num_complex::Complex64;

use super::{assemble, free_flow, keep_snapshot, node_time, BlockSolution, Evaluator, SolveConfig};
use crate::error::{Result, RgError};
use crate::spectral::{bq_norm_unchecked, SpectralField};

/// Norm exponent used for the iteration's stopping test.
const STOP_Q: f64 = 2.0;

/// Weights `(w0, w1)` with `∫_0^h e^{-a(h-τ)} [F0 (1-τ/h) + F1 τ/h] dτ = w0 F0 + w1 F1`.
fn product_weights(a: f64, h: f64) -> (f64, f64) {
    let z = a * h;
    let (phi1, phi2) = if z < 0.1 {
        // φ1 = (1-e^{-z})/z, φ2 = (z-1+e^{-z})/z², by their Taylor series
        let mut p1 = 0.0;
        let mut p2 = 0.0;
        let mut term = 1.0;
        for j in 0..12 {
            p1 += term / (j + 1) as f64;
            p2 += term / ((j + 1) * (j + 2)) as f64;
            term *= -z / (j + 1) as f64;
        }
        (p1, p2)
    } else {
        let em1 = (-z).exp_m1();
        (-em1 / z, (z + em1) / (z * z))
    };
    (h * (phi1 - phi2), h * phi2)
}

pub(super) fn iterate(f: &SpectralField, ev: &Evaluator, cfg: &SolveConfig) -> Result<BlockSolution> {
    let grid = *f.grid();
    let n = grid.num_points();
    let steps = cfg.num_steps;
    let h = cfg.step();
    let zero = Complex64::new(0.0, 0.0);
    let free: Vec<Vec<Complex64>> = (0..=steps).map(|i| free_flow(f, node_time(cfg, i))).collect();
    let decay: Vec<f64> = (0..n).map(|k| (-grid.omega(k).powi(2) * h).exp()).collect();
    let weights: Vec<(f64, f64)> = (0..n).map(|k| product_weights(grid.omega(k).powi(2), h)).collect();

    let mut nu = vec![vec![zero; n]; steps + 1];
    let mut max_u = 0.0_f64;
    let mut max_ux = 0.0_f64;
    let mut last_diff = f64::INFINITY;
    for iteration in 1..=cfg.picard_max_iters {
        let mut forcing = Vec::with_capacity(steps + 1);
        for i in 0..=steps {
            let u: Vec<Complex64> = free[i].iter().zip(&nu[i]).map(|(a, b)| a + b).collect();
            let e = ev.eval(&u)?;
            max_u = max_u.max(e.max_u);
            max_ux = max_ux.max(e.max_ux);
            forcing.push(e.fhat);
        }
        let mut next = vec![vec![zero; n]; steps + 1];
        for i in 0..steps {
            for k in 0..n {
                let (w0, w1) = weights[k];
                next[i + 1][k] =
                    next[i][k] * decay[k] + forcing[i][k] * w0 + forcing[i + 1][k] * w1;
            }
        }
        let mut diff = 0.0_f64;
        for i in 1..=steps {
            let d: Vec<Complex64> = next[i].iter().zip(&nu[i]).map(|(a, b)| a - b).collect();
            let d = SpectralField::from_coeffs(grid, d, node_time(cfg, i))?;
            diff = diff.max(bq_norm_unchecked(&d, STOP_Q));
        }
        nu = next;
        if diff < cfg.picard_tol {
            let mut snapshots = Vec::new();
            for i in (0..=steps).filter(|&i| i == 0 || keep_snapshot(cfg, i)) {
                snapshots.push(assemble(f, &nu[i], node_time(cfg, i))?);
            }
            let nu_final = SpectralField::from_coeffs(grid, nu.pop().expect("nodes"), cfg.l * cfg.l)?
                .with_parity(f.parity());
            return Ok(BlockSolution {
                snapshots,
                nu_final,
                max_u,
                max_ux,
                mass_drift: 0.0,
                parity_defect: 0.0,
                picard_iterations: Some(iteration),
            });
        }
        if iteration > 3 && diff > last_diff {
            return Err(RgError::Solver(format!(
                "Picard iteration diverging at iteration {iteration}: difference {diff:.3e} grew from {last_diff:.3e}; the data is too large for the block"
            )));
        }
        last_diff = diff;
    }
    Err(RgError::Solver(format!(
        "Picard iteration did not reach {:.1e} within {} iterations (last difference {last_diff:.3e})",
        cfg.picard_tol, cfg.picard_max_iters
    )))
}
