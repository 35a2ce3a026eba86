//! Pointwise inequality suites for the Fourier-side bounds.

use crate::dynamics::BlockSolution;
use crate::error::Result;
use crate::spectral::bq_norm_unchecked;

/// `h_k(x) = ∫_0^1 s^k e^{-xs} ds` for `k ≤ 2`, `x ≥ 0`.
fn h(k: u32, x: f64) -> f64 {
    if x < 1.0 {
        // Σ_j (-x)^j / (j! (k + j + 1))
        let mut sum = 0.0;
        let mut term = 1.0;
        for j in 0..40 {
            sum += term / (k + j + 1) as f64;
            term *= -x / (j + 1) as f64;
        }
        return sum;
    }
    let e = (-x).exp();
    match k {
        0 => (1.0 - e) / x,
        1 => (1.0 - e * (1.0 + x)) / (x * x),
        _ => (2.0 - e * (x * x + 2.0 * x + 2.0)) / (x * x * x),
    }
}

/// Left and right sides of the four time-integral bounds at `(ω, t)`, in the
/// order: plain, `s`-weighted (`i = 0`), `|ω| s`-weighted (`i = 1`),
/// `ω² s²`-weighted.
pub fn time_integral_bound_sides(omega: f64, t: f64, q: f64) -> [(f64, f64); 4] {
    let a = omega * omega;
    let w = omega.abs();
    let tt = t - 1.0;
    let x = a * tt;
    let pre = 1.0 / (1.0 + w.powf(q - 1.0));
    let den = 1.0 + w.powf(q);
    let i0 = tt * h(0, x);
    let i1 = tt * tt * h(1, x);
    let i2 = a * tt * tt * tt * h(2, x);
    [
        (pre * i0, (2.0 * t - 1.0) / den),
        (pre * i1, (t * t - 2.0 * t + 4.0) / den),
        (pre * w * i1, (t * t - 2.0 * t + 4.0) / den),
        (pre * i2, (2.0 * tt.powi(3) / 3.0 + 2.0) / den),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeIntegralReport {
    pub points: usize,
    pub violations: usize,
    /// Largest left/right ratio for each of the four bounds.
    pub worst_ratio: [f64; 4],
}

impl TimeIntegralReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Check the strict inequalities at every `(ω, t)` of the grids.
pub fn check_time_integral_bounds(q: f64, t_grid: &[f64], omega_grid: &[f64]) -> TimeIntegralReport {
    let mut report = TimeIntegralReport {
        points: 0,
        violations: 0,
        worst_ratio: [0.0; 4],
    };
    for &t in t_grid {
        for &w in omega_grid {
            report.points += 1;
            let mut bad = false;
            for (i, (lhs, rhs)) in time_integral_bound_sides(w, t, q).into_iter().enumerate() {
                report.worst_ratio[i] = report.worst_ratio[i].max(lhs / rhs);
                bad |= !(lhs < rhs);
            }
            if bad {
                report.violations += 1;
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeDecayReport {
    /// Sup over snapshots of `‖u(t)‖_q`.
    pub block_norm: f64,
    pub points: usize,
    pub violations: usize,
    /// Largest ratio of `|∂_ω^i û|`, `i = 0, 1, 2`, and `|û_x|` to `2‖u‖/(1+|ω|^{q-1})`.
    pub worst_ratio: f64,
}

impl DerivativeDecayReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Check `|∂_ω^i û(ω,t)|, |û_x(ω,t)| ≤ 2‖u‖/(1+|ω|^{q-1})` on every snapshot.
pub fn check_derivative_decay_bound(u: &BlockSolution, q: f64) -> Result<DerivativeDecayReport> {
    let block_norm = u
        .snapshots
        .iter()
        .map(|s| bq_norm_unchecked(s, q))
        .fold(0.0_f64, f64::max);
    let mut report = DerivativeDecayReport {
        block_norm,
        points: 0,
        violations: 0,
        worst_ratio: 0.0,
    };
    for s in &u.snapshots {
        let (d1, d2) = s.omega_derivatives();
        let grid = s.grid();
        for k in 0..grid.num_points() {
            let w = grid.omega(k);
            let bound = 2.0 * block_norm / (1.0 + w.abs().powf(q - 1.0));
            let c = s.coeffs()[k];
            let worst = c.norm().max(d1[k].norm()).max(d2[k].norm()).max(w.abs() * c.norm());
            report.points += 1;
            if worst > bound {
                report.violations += 1;
            }
            if bound > 0.0 {
                report.worst_ratio = report.worst_ratio.max(worst / bound);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(f: impl Fn(f64) -> f64, b: f64) -> f64 {
        quadrature::double_exponential::integrate(f, 0.0, b, 1e-14).integral
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for &(w, t) in &[(0.3, 2.0), (1.5, 4.0), (4.0, 9.0), (0.01, 16.0)] {
            let a: f64 = w * w;
            let tt = t - 1.0;
            let i0 = quad(|s| (-a * s).exp(), tt);
            let i1 = quad(|s| s * (-a * s).exp(), tt);
            let i2 = quad(|s| a * s * s * (-a * s).exp(), tt);
            let x = a * tt;
            assert!((tt * h(0, x) - i0).abs() < 1e-12 * i0.max(1.0));
            assert!((tt * tt * h(1, x) - i1).abs() < 1e-12 * i1.max(1.0));
            assert!((a * tt.powi(3) * h(2, x) - i2).abs() < 1e-12 * i2.max(1.0));
        }
    }

    #[test]
    fn series_and_closed_form_agree_at_the_switch() {
        for k in 0..3 {
            let below = h(k, 1.0 - 1e-12);
            let e = (-1.0_f64).exp();
            let above = match k {
                0 => 1.0 - e,
                1 => 1.0 - 2.0 * e,
                _ => 2.0 - 5.0 * e,
            };
            assert!((below - above).abs() < 1e-11);
        }
    }

    #[test]
    fn endpoint_cases() {
        // ω = 0: plain bound is (t-1) < 2t-1 and the ω²-weighted side vanishes
        let s = time_integral_bound_sides(0.0, 3.0, 2.5);
        assert_eq!(s[0].0, 2.0);
        assert_eq!(s[0].1, 5.0);
        assert_eq!(s[3].0, 0.0);
    }
}
