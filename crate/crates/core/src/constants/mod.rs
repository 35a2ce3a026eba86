//! Explicit constants of the convergence theory, evaluated for given
//! `(L, q, δ)` and nonlinearity.

mod contraction;
mod inequalities;

pub use contraction::{
    contraction_probes, estimate_contraction_constant, ContractionEstimate, ProbeRatio,
};
pub use inequalities::{check_derivative_decay_bound, check_time_integral_bounds, DerivativeDecayReport, TimeIntegralReport};

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::{NonlinearityForm, NonlinearitySpec};
use crate::error::{Result, RgError};

/// Number of `D_k` terms reported.
pub const D_SEQUENCE_LEN: usize = 16;

/// `∫_ℝ dx / (1 + |x|^p)` for `p > 1`. Folding `[1, ∞)` onto `(0, 1]` with
/// `x = 1/u` and then `u = v^m`, `m = 1/(p-1)`, leaves two smooth integrals
/// over `[0, 1]` for double-exponential quadrature.
pub fn integral_inverse_power(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(RgError::InvalidInput(format!(
            "∫ dx/(1+|x|^p) diverges for p = {p}"
        )));
    }
    let m = 1.0 / (p - 1.0);
    let integrand = |v: f64| 1.0 / (1.0 + v.powf(p)) + m / (1.0 + v.powf(m * p));
    let out = quadrature::double_exponential::integrate(integrand, 0.0, 1.0, 1e-14);
    Ok(2.0 * out.integral)
}

/// The summand bounding `‖f_1*‖_q`: `(1+|ω|^q)(1+7|ω|+2ω²+4|ω|³)e^{-ω²}`.
pub fn fixed_point_bound_summand(omega: f64, q: f64) -> f64 {
    let w = omega.abs();
    (1.0 + w.powf(q)) * (1.0 + 7.0 * w + 2.0 * w * w + 4.0 * w * w * w) * (-w * w).exp()
}

/// `k_q = sup_ω (1+|ω|^q)(1+7|ω|+2ω²+4|ω|³)e^{-ω²}`: dense scan of `[0, 40]`
/// followed by golden-section refinement of the best bracket.
pub fn k_q(q: f64) -> Result<f64> {
    if !(q.is_finite() && q > 1.0) {
        return Err(RgError::InvalidInput(format!("q must exceed 1, got {q}")));
    }
    let h = 1e-3;
    let steps = 40_000;
    let (best, _) = (0..=steps)
        .map(|i| (i, fixed_point_bound_summand(i as f64 * h, q)))
        .fold((0, f64::MIN), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    let mut lo = (best as f64 - 1.0).max(0.0) * h;
    let mut hi = (best as f64 + 1.0) * h;
    let ratio = (5.0_f64.sqrt() - 1.0) / 2.0;
    let f = |w: f64| fixed_point_bound_summand(w, q);
    for _ in 0..100 {
        let a = hi - ratio * (hi - lo);
        let b = lo + ratio * (hi - lo);
        if f(a) < f(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    let refined = f(0.5 * (lo + hi));
    Ok(refined.max(f(best as f64 * h)))
}

/// `G_q = (2^{q+1} + 3) ∫ dx/(1+|x|^q)`.
pub fn g_q(q: f64) -> Result<f64> {
    Ok((2.0_f64.powf(q + 1.0) + 3.0) * integral_inverse_power(q)?)
}

/// `K = max{(1/2π)∫dω/(1+|ω|^q), (1/π)∫dω/(1+|ω|^{q-1})}`; infinite (`None`)
/// for `q ≤ 2`, where the second integral diverges.
pub fn sup_constant(q: f64) -> Result<Option<f64>> {
    if !(q.is_finite() && q > 1.0) {
        return Err(RgError::InvalidInput(format!("q must exceed 1, got {q}")));
    }
    if q <= 2.0 {
        return Ok(None);
    }
    let a = integral_inverse_power(q)? / (2.0 * PI);
    let b = integral_inverse_power(q - 1.0)? / PI;
    Ok(Some(a.max(b)))
}

/// `C̄_L = 6L² + 4√(L²-1) - 4`.
pub fn c_bar(l: f64) -> f64 {
    6.0 * l * l + 4.0 * (l * l - 1.0).sqrt() - 4.0
}

/// `C_L = 16L⁶ - 8L⁴ - 10L² + 182`.
pub fn c_l(l: f64) -> f64 {
    let l2 = l * l;
    16.0 * l2 * l2 * l2 - 8.0 * l2 * l2 - 10.0 * l2 + 182.0
}

/// `G_{L,q} = C̄_L²(2^{q+1}+3)/(12π) · (4L⁶+6L⁴-6L²+137) ∫dx/(1+|x|^q)`.
pub fn g_lq(l: f64, q: f64) -> Result<f64> {
    let l2 = l * l;
    let poly = 4.0 * l2 * l2 * l2 + 6.0 * l2 * l2 - 6.0 * l2 + 137.0;
    Ok(c_bar(l).powi(2) * g_q(q)? / (12.0 * PI) * poly)
}

/// `D = 1 + k_q Σ_{j≥0} L^{-j(1-δ)} = 1 + k_q/(1 - L^{-(1-δ)})`.
pub fn d_closed_form(l: f64, delta: f64, kq: f64) -> f64 {
    1.0 + kq / (1.0 - l.powf(-(1.0 - delta)))
}

/// `D_1, …, D_len` from the recursion
/// `D_{k+1} = L^{-(k+1)(1-δ)} + k_q(1 + γ‖f_0‖ + γ‖f_0‖ Σ_{j≤k} D_j² L^{-je})`.
/// `γ` is `G_{L,q}` with `e = 1` for Burgers and `K_{L,q}C̄_L²` with
/// `e = 4a+3b-2` for the odd class.
pub fn d_sequence(l: f64, delta: f64, kq: f64, gamma: f64, e: f64, f0_norm: f64, len: usize) -> Vec<f64> {
    let gf = gamma * f0_norm;
    let mut out: Vec<f64> = Vec::with_capacity(len);
    let mut acc = 0.0;
    for k in 0..len {
        let lead = l.powf(-((k + 1) as f64) * (1.0 - delta));
        let d = lead + kq * (1.0 + gf + gf * acc);
        out.push(d);
        acc += d * d * l.powf(-((k + 1) as f64) * e);
    }
    out
}

/// Every named constant for one parameter set. Entries that do not exist for
/// the parameters (for instance `K` at `q ≤ 2`) are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsReport {
    pub l: f64,
    pub q: f64,
    pub delta: f64,
    pub f0_norm: f64,
    pub form: NonlinearityForm,
    /// Per-step decay exponent of the coupling: 1 for Burgers, `4a+3b-2` otherwise.
    pub coupling_exponent: f64,
    pub k_q: f64,
    pub g_q: f64,
    pub k_sup: Option<f64>,
    pub c_bar_l: f64,
    pub g_lq: f64,
    pub e_lq: f64,
    pub c_l: f64,
    pub r_0: Option<f64>,
    pub k_lq: Option<f64>,
    pub k_bar_lq: Option<f64>,
    pub e_bar_lq: Option<f64>,
    pub d: f64,
    pub d_k: Vec<f64>,
    pub epsilon: Option<f64>,
    pub epsilon_bar: Option<f64>,
    pub working_threshold: f64,
    pub c_emp: Option<f64>,
    pub l0_emp: Option<f64>,
    pub l_delta: Option<f64>,
    pub c_lqd: f64,
}

/// Degree data of one term `c uᵖ u_xˢ`: `(|c|, p + s)`.
fn term_degrees(spec: &NonlinearitySpec) -> Vec<(f64, u32)> {
    spec.terms()
        .iter()
        .map(|t| match spec.form() {
            NonlinearityForm::Burgers | NonlinearityForm::H1Derivative => (t.c.abs(), t.n + 1),
            NonlinearityForm::H2Odd => (t.c.abs(), 2 * t.m + 1 + t.n),
        })
        .collect()
}

impl ConstantsReport {
    /// Constant in `|A_{n+1} - A_n| ≤ |λ_n| · γ · ‖f_n‖²`.
    pub fn a_step_constant(&self) -> Option<f64> {
        if self.form == NonlinearityForm::Burgers {
            Some(self.g_lq)
        } else {
            self.k_lq.map(|k| k * self.c_bar_l * self.c_bar_l)
        }
    }

    /// Constant in `‖g_{n+1}‖ ≤ (C/L)‖g_n‖ + |λ_n| · E · ‖f_n‖²`.
    pub fn g_step_constant(&self) -> Option<f64> {
        if self.form == NonlinearityForm::Burgers {
            Some(self.e_lq)
        } else {
            self.e_bar_lq
        }
    }

    /// Bound on `|A_n - A_∞|`.
    pub fn a_limit_bound(&self, n: usize) -> f64 {
        let e = self.coupling_exponent;
        self.l.powf(-(n as f64) * e) * self.f0_norm
            / (2.0 * self.l.powf(1.0 - self.delta) * (1.0 - self.l.powf(-e)))
    }

    /// Bound on `‖f_n - A f_1*‖_q`: `C_{L,q,δ} L^{-n(1-δ)} ‖f_0‖_q`.
    pub fn rate_bound(&self, n: usize) -> f64 {
        self.c_lqd * self.l.powf(-(n as f64) * (1.0 - self.delta)) * self.f0_norm
    }

    /// `(key, value, note)` rows in a fixed order.
    pub fn rows(&self) -> Vec<(String, Option<f64>, &'static str)> {
        let mut rows: Vec<(String, Option<f64>, &'static str)> = vec![
            ("L".into(), Some(self.l), "input"),
            ("q".into(), Some(self.q), "input"),
            ("delta".into(), Some(self.delta), "input"),
            ("f0_norm".into(), Some(self.f0_norm), "input"),
            ("coupling_exponent".into(), Some(self.coupling_exponent), "per-step decay of the coupling"),
            ("k_q".into(), Some(self.k_q), "bound on the B_q norm of f_1*"),
            ("G_q".into(), Some(self.g_q), ""),
            ("K".into(), self.k_sup, "sup bound; infinite for q <= 2"),
            ("C_bar_L".into(), Some(self.c_bar_l), ""),
            ("G_Lq".into(), Some(self.g_lq), ""),
            ("E_Lq".into(), Some(self.e_lq), ""),
            ("C_L".into(), Some(self.c_l), ""),
            ("r_0".into(), self.r_0, ""),
            ("K_Lq".into(), self.k_lq, ""),
            ("K_bar_Lq".into(), self.k_bar_lq, ""),
            ("E_bar_Lq".into(), self.e_bar_lq, ""),
            ("D".into(), Some(self.d), "closed form 1 + k_q/(1 - L^-(1-delta))"),
        ];
        for (k, d) in self.d_k.iter().enumerate() {
            rows.push((format!("D_{}", k + 1), Some(*d), ""));
        }
        rows.extend([
            ("epsilon".into(), self.epsilon, "local existence radius"),
            ("epsilon_bar".into(), self.epsilon_bar, "rigorous smallness threshold"),
            ("working_threshold".into(), Some(self.working_threshold), "threshold enforced at run time"),
            ("C_emp".into(), self.c_emp, "empirical, no closed form for the contraction constants"),
            ("L0_emp".into(), self.l0_emp, "empirical, no closed form for the contraction constants"),
            ("L_delta".into(), self.l_delta, "computed from C_emp and L0_emp"),
            ("C_Lqdelta".into(), Some(self.c_lqd), "rate-bound prefactor"),
        ]);
        rows
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        for (k, v, note) in self.rows() {
            let v = v.map_or_else(|| "inf/undefined".to_string(), |v| format!("{v:.10e}"));
            if note.is_empty() {
                let _ = writeln!(s, "{k:<18} {v}");
            } else {
                let _ = writeln!(s, "{k:<18} {v:<20} # {note}");
            }
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["key", "value", "note"])?;
        for (k, v, note) in self.rows() {
            let v = v.map_or_else(|| "inf".to_string(), |v| format!("{v}"));
            w.write_record([k.as_str(), v.as_str(), note])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Inputs of [`eval_constants`] beyond `(L, q, δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalContraction {
    pub c_emp: f64,
    pub l0_emp: Option<f64>,
}

/// Evaluate every constant. `contraction` carries the empirical stand-ins for
/// the contraction constants; without them `L_δ` is not reported.
pub fn eval_constants(
    l: f64,
    q: f64,
    delta: f64,
    spec: &NonlinearitySpec,
    f0_norm: f64,
    working_threshold: f64,
    contraction: Option<EmpiricalContraction>,
) -> Result<ConstantsReport> {
    if !(l.is_finite() && l > 1.0) {
        return Err(RgError::InvalidInput(format!("L must exceed 1, got {l}")));
    }
    if !(q.is_finite() && q > 1.0) {
        return Err(RgError::InvalidInput(format!("q must exceed 1, got {q}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(RgError::InvalidInput(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(f0_norm.is_finite() && f0_norm >= 0.0) {
        return Err(RgError::InvalidInput(format!("invalid data norm {f0_norm}")));
    }
    let kq = k_q(q)?;
    let gq = g_q(q)?;
    let k_sup = sup_constant(q)?;
    let cbar = c_bar(l);
    let glq = g_lq(l, q)?;
    let elq = glq * (l.powf(q + 1.0) + kq);
    let cl = c_l(l);
    let burgers = spec.form() == NonlinearityForm::Burgers;
    let e = spec.floor_exponent() as f64;

    let r = spec.radius();
    let r_0 = if r.is_infinite() {
        Some(f64::INFINITY)
    } else {
        k_sup.map(|k| (r / k).min(PI * r / gq))
    };
    if let Some(r0) = r_0 {
        if r.is_finite() && r0 >= r {
            return Err(RgError::InvalidInput(format!(
                "series radius r_0 = {r0} must be below r = {r}"
            )));
        }
    }
    // Σ |c| (G_q/π)^{d-1} r_0^{d-2} (with weight d for the Lipschitz constant)
    let series = |weighted: bool| -> Option<f64> {
        let r0 = r_0?;
        let mut s = 0.0;
        for (c, d) in term_degrees(spec) {
            let p = d as i32 - 2;
            let rpow = if p == 0 { 1.0 } else { r0.powi(p) };
            let w = if weighted { d as f64 } else { 1.0 };
            s += w * c * (gq / PI).powi(d as i32 - 1) * rpow;
        }
        s.is_finite().then_some(s)
    };
    let k_lq = series(false).map(|s| cl * s);
    let k_bar_lq = series(true).map(|s| cl * cbar * s);
    let e_bar_lq = if burgers {
        None
    } else {
        k_lq.map(|k| (kq + l.powf(q + 1.0)) * k * cbar * cbar)
    };

    let d = d_closed_form(l, delta, kq);
    let gamma = if burgers { Some(glq) } else { k_lq.map(|k| k * cbar * cbar) };
    let d_k = gamma
        .map(|g| d_sequence(l, delta, kq, g, e, f0_norm, D_SEQUENCE_LEN))
        .unwrap_or_default();

    let epsilon = match (k_lq, k_bar_lq, r_0) {
        (Some(k), Some(kb), Some(r0)) => {
            let e1 = (1.0 / (k * cbar * cbar)).min(r0 / cbar);
            let e2 = (1.0 / (2.0 * kb)).min(r0 / cbar);
            Some(e1.min(e2))
        }
        _ => None,
    };
    let big_e = if burgers { Some(elq) } else { e_bar_lq };
    let epsilon_bar = match (epsilon, big_e) {
        (Some(eps), Some(be)) => {
            Some((1.0 / (2.0 * l.powf(1.0 - delta) * be * d * d)).min(eps / d))
        }
        _ => None,
    };
    let l_delta = contraction.and_then(|c| {
        c.l0_emp
            .map(|l0| l0.max((2.0 * c.c_emp * (1.0 + kq)).powf(1.0 / delta)))
    });
    let c_lqd = 1.0 + kq / (2.0 * l.powf(1.0 - delta) * (1.0 - l.powf(-e)));

    Ok(ConstantsReport {
        l,
        q,
        delta,
        f0_norm,
        form: spec.form(),
        coupling_exponent: e,
        k_q: kq,
        g_q: gq,
        k_sup,
        c_bar_l: cbar,
        g_lq: glq,
        e_lq: elq,
        c_l: cl,
        r_0,
        k_lq,
        k_bar_lq,
        e_bar_lq,
        d,
        d_k,
        epsilon,
        epsilon_bar,
        working_threshold,
        c_emp: contraction.map(|c| c.c_emp),
        l0_emp: contraction.and_then(|c| c.l0_emp),
        l_delta,
        c_lqd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Term;

    fn closed_form_integral(p: f64) -> f64 {
        2.0 * (PI / p) / (PI / p).sin()
    }

    #[test]
    fn integral_matches_reflection_formula() {
        for p in [1.3, 1.6, 2.0, 2.5, 3.0, 4.0] {
            let got = integral_inverse_power(p).unwrap();
            let want = closed_form_integral(p);
            assert!((got - want).abs() <= 1e-10 * want, "p = {p}: {got} vs {want}");
        }
        assert!(integral_inverse_power(1.0).is_err());
    }

    #[test]
    fn c_bar_at_two() {
        assert!((c_bar(2.0) - (20.0 + 4.0 * 3.0_f64.sqrt())).abs() < 1e-13);
    }

    #[test]
    fn d_at_four() {
        let kq = k_q(2.0).unwrap();
        assert!((d_closed_form(4.0, 0.5, kq) - (1.0 + 2.0 * kq)).abs() < 1e-12);
    }

    #[test]
    fn k_q_against_coarse_to_fine_scan() {
        for q in [1.6, 2.0, 2.5, 3.0] {
            // independent: repeated grid zoom around the running maximum
            let (mut lo, mut hi) = (0.0_f64, 20.0_f64);
            let mut best = 0.0;
            for _ in 0..12 {
                let n = 400;
                let h = (hi - lo) / n as f64;
                let (i, v) = (0..=n)
                    .map(|i| (i, fixed_point_bound_summand(lo + i as f64 * h, q)))
                    .fold((0, f64::MIN), |a, c| if c.1 > a.1 { c } else { a });
                best = v;
                let c = lo + i as f64 * h;
                lo = (c - 2.0 * h).max(0.0);
                hi = c + 2.0 * h;
            }
            let got = k_q(q).unwrap();
            assert!((got - best).abs() <= 1e-8 * best, "q = {q}: {got} vs {best}");
            assert!(got >= 1.0);
        }
    }

    #[test]
    fn sup_constant_undefined_at_or_below_two() {
        assert_eq!(sup_constant(2.0).unwrap(), None);
        let k = sup_constant(2.5).unwrap().unwrap();
        let want = (closed_form_integral(2.5) / (2.0 * PI)).max(closed_form_integral(1.5) / PI);
        assert!((k - want).abs() < 1e-10 * want);
    }

    #[test]
    fn burgers_report_is_positive_and_finite() {
        let spec = NonlinearitySpec::burgers(0.5).unwrap();
        let r = eval_constants(2.0, 2.0, 0.5, &spec, 0.02, 0.05, None).unwrap();
        for (k, v, _) in r.rows() {
            if let Some(v) = v {
                // Burgers has no analyticity radius
                if k == "r_0" {
                    assert!(v.is_infinite());
                    continue;
                }
                // ‖f_0‖ = 0.02 is far above ε̄, so the D_k recursion may diverge
                if k.starts_with("D_") {
                    continue;
                }
                assert!(v.is_finite() && v > 0.0, "{k} = {v}");
            }
        }
        assert!(r.epsilon_bar.unwrap() < r.working_threshold);
        assert_eq!(r.a_step_constant(), Some(r.g_lq));
    }

    #[test]
    fn h2_report_uses_series_constants() {
        let spec = NonlinearitySpec::new(
            NonlinearityForm::H2Odd,
            vec![Term::new(1, 1, 1.0)],
            (1, 1),
            1.0,
            1.0,
            1.0,
        )
        .unwrap();
        let r = eval_constants(2.0, 2.5, 0.5, &spec, 0.02, 0.05, None).unwrap();
        assert_eq!(r.coupling_exponent, 5.0);
        let k = r.k_lq.unwrap();
        let r0 = r.r_0.unwrap();
        let want = c_l(2.0) * (r.g_q / PI).powi(2) * r0;
        assert!((k - want).abs() < 1e-12 * want);
        assert!(r.e_bar_lq.unwrap() > 0.0);
        assert!(r.epsilon_bar.unwrap() > 0.0);
    }
}
