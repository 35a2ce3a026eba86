//! The renormalization-group iteration: solve one block, rescale, split off
//! the `f_1*` component, shrink the couplings, repeat.

use crate::constants::ConstantsReport;
use crate::dynamics::{linear_propagate, solve_block, NonlinearityForm, NonlinearitySpec, SolveConfig};
use crate::error::{Hypothesis, Result, RgError};
use crate::profiles::{check_zero_mass, decompose, f1_star};
use crate::spectral::{
    bq_norm, bq_norm_with_reference, moments, resample_rescale, BqParams, Parity, SpectralField,
};

/// Default bound on `‖f_n‖_q` enforced before every step.
pub const WORKING_THRESHOLD: f64 = 0.05;

/// Relative parity defect tolerated on odd-class runs.
pub const PARITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct RgConfig {
    pub l: f64,
    pub bq: BqParams,
    pub delta: f64,
    pub max_iters: usize,
    pub nonlinearity: NonlinearitySpec,
    pub solver: SolveConfig,
    /// Stop once `‖g_n‖_q` drops below this; `None` means `1e-10 ‖f_0‖_q`.
    pub stop_g_tol: Option<f64>,
    pub working_threshold: f64,
}

impl RgConfig {
    pub fn new(l: f64, nonlinearity: NonlinearitySpec) -> Result<Self> {
        let cfg = RgConfig {
            l,
            bq: BqParams::default(),
            delta: 0.5,
            max_iters: 12,
            nonlinearity,
            solver: SolveConfig::new(l)?,
            stop_g_tol: None,
            working_threshold: WORKING_THRESHOLD,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l.is_finite() && self.l > 1.0) {
            return Err(RgError::InvalidInput(format!("L must exceed 1, got {}", self.l)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(RgError::InvalidInput(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if self.solver.l != self.l {
            return Err(RgError::InvalidInput(format!(
                "solver block length L = {} differs from the RG scale L = {}",
                self.solver.l, self.l
            )));
        }
        if !(self.working_threshold > 0.0) {
            return Err(RgError::InvalidInput("working threshold must be positive".into()));
        }
        self.solver.validate()
    }

    fn hypothesis(&self) -> Hypothesis {
        match self.nonlinearity.form() {
            NonlinearityForm::H2Odd => Hypothesis::Odd,
            _ => Hypothesis::ZeroMass,
        }
    }
}

/// One row of the run record stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub n: usize,
    /// Physical time `L^{2n}` represented by `f_n`.
    pub t: f64,
    pub a_n: f64,
    pub g_norm: f64,
    pub f_norm: f64,
    /// Coupling `λ_n` used for block `n`.
    pub lambda_n: f64,
    pub mass: f64,
    pub parity_defect: f64,
    /// `‖f_n - A_∞ f_1*‖_q`, filled in once the run is complete.
    pub e_n: f64,
}

/// Per-step diagnostics beyond the record stream.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub n: usize,
    pub lambda_n: f64,
    /// Effective coefficient `λ_n · scale_n · c` of each term.
    pub effective_coefficients: Vec<f64>,
    pub f_norm: f64,
    pub g_norm: f64,
    pub g_norm_next: f64,
    /// `A_{n+1} - A_n = -∫ x ν_n(x, L²) dx`, from the nonlinear part alone.
    pub delta_a: f64,
    /// `|A_{n+1} + ∫ x f_{n+1} dx|`: the increment identity checked against
    /// the first moment of the rescaled field.
    pub moment_defect: f64,
    pub max_u: f64,
    pub max_ux: f64,
    pub mass_drift: f64,
    pub picard_iterations: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RgState {
    pub n: usize,
    pub f: SpectralField,
    pub lambda: f64,
    /// Extra per-term factors beyond `λ_n` (all 1 for Burgers).
    pub term_scales: Vec<f64>,
    pub a: f64,
    pub g_norm: f64,
    pub f_norm: f64,
    pub history: Vec<RunRecord>,
}

fn check_hypothesis(f: &SpectralField, cfg: &RgConfig) -> Result<()> {
    match cfg.hypothesis() {
        Hypothesis::Odd => {
            let defect = f.parity_defect();
            if defect > PARITY_TOLERANCE {
                return Err(RgError::Hypothesis {
                    hypothesis: Hypothesis::Odd,
                    detail: format!("data is not odd: parity defect {defect:.3e}"),
                });
            }
            Ok(())
        }
        Hypothesis::ZeroMass => check_zero_mass(f, &cfg.bq),
    }
}

fn check_smallness(f_norm: f64, cfg: &RgConfig, n: usize) -> Result<()> {
    // the heat flow needs no smallness
    if cfg.nonlinearity.is_linear() {
        return Ok(());
    }
    if f_norm > cfg.working_threshold {
        return Err(RgError::Smallness(format!(
            "‖f_{n}‖_q = {f_norm:.4e} exceeds the working threshold {:.3e}",
            cfg.working_threshold
        )));
    }
    Ok(())
}

fn record(state_n: usize, cfg: &RgConfig, f: &SpectralField, a: f64, g_norm: f64, f_norm: f64, lambda: f64) -> RunRecord {
    RunRecord {
        n: state_n,
        t: cfg.l.powi(2 * state_n as i32),
        a_n: a,
        g_norm,
        f_norm,
        lambda_n: lambda,
        mass: moments(f).mass,
        parity_defect: f.parity_defect(),
        e_n: f64::NAN,
    }
}

impl RgState {
    pub fn initial(f0: &SpectralField, cfg: &RgConfig) -> Result<Self> {
        cfg.validate()?;
        let mut f = f0.clone().with_time(1.0)?;
        if cfg.hypothesis() == Hypothesis::Odd && f.parity() == Parity::None {
            f = f.with_parity(Parity::Odd);
        }
        check_hypothesis(&f, cfg)?;
        let f_norm = bq_norm(&f, &cfg.bq)?;
        check_smallness(f_norm, cfg, 0)?;
        let dec = decompose(&f, &cfg.bq)?;
        let g_norm = bq_norm_with_reference(&dec.g, &cfg.bq, f_norm)?;
        let lambda = cfg.nonlinearity.lambda();
        let history = vec![record(0, cfg, &f, dec.a, g_norm, f_norm, lambda)];
        Ok(RgState {
            n: 0,
            f,
            lambda,
            term_scales: vec![1.0; cfg.nonlinearity.terms().len()],
            a: dec.a,
            g_norm,
            f_norm,
            history,
        })
    }
}

/// Linear RG map `f ↦ L² u(L·, L²)` for the heat flow started at `t = 1`.
/// Rescaling is applied first and the heat factor `e^{-ω²(1 - 1/L²)}` second;
/// the two orders agree exactly, and this one never lets the field spread
/// towards the domain edge.
pub fn linear_rg_step(f: &SpectralField, l: f64) -> Result<SpectralField> {
    let r = resample_rescale(f, l)?;
    linear_propagate(&r, r.time(), 1.0)
}

/// Effective coefficient multipliers `λ_n · scale_n` for each term.
pub fn effective_multipliers(state: &RgState) -> Vec<f64> {
    state.term_scales.iter().map(|s| state.lambda * s).collect()
}

/// One RG step.
pub fn rg_step(state: &RgState, cfg: &RgConfig) -> Result<(RgState, StepReport)> {
    let n = state.n;
    check_smallness(state.f_norm, cfg, n)?;
    check_hypothesis(&state.f, cfg)?;
    let spec = cfg.nonlinearity.renormalized(state.lambda, &state.term_scales)?;
    let (next, delta_a_nu, max_u, max_ux, mass_drift, picard) = if spec.is_linear() {
        let next = linear_rg_step(&state.f, cfg.l)?;
        (next, 0.0, state.f.max_abs(), state.f.x_derivative()?.max_abs(), 0.0, None)
    } else {
        let block = solve_block(&state.f, &spec, &cfg.solver)?;
        let next = resample_rescale(block.final_field(), cfg.l)?.with_time(1.0)?;
        let dnu = -moments(&block.nu_final).first_moment;
        (
            next,
            dnu,
            block.max_u,
            block.max_ux,
            block.mass_drift,
            block.picard_iterations,
        )
    };
    let next = next.with_parity(state.f.parity());
    check_hypothesis(&next, cfg)?;
    let f_norm = bq_norm(&next, &cfg.bq)?;
    // A_{n+1} = A_n - iν̂_n'(0); the rescaled heat part leaves A unchanged
    let a = state.a + delta_a_nu;
    let star = f1_star(*next.grid())?;
    let g = next.combine(1.0, &star, -a)?;
    let g_norm = bq_norm_with_reference(&g, &cfg.bq, f_norm)?;
    let moment_defect = (-moments(&next).first_moment - a).abs();

    let floor = cfg.nonlinearity.floor_exponent();
    let lambda = state.lambda * cfg.l.powi(-floor);
    let term_scales = cfg
        .nonlinearity
        .terms()
        .iter()
        .zip(&state.term_scales)
        .map(|(t, s)| {
            let e = cfg.nonlinearity.scaling_exponent(t) - floor;
            if cfg.nonlinearity.form() == NonlinearityForm::Burgers {
                1.0
            } else {
                s * cfg.l.powi(-e)
            }
        })
        .collect();

    let mut history = state.history.clone();
    history.push(record(n + 1, cfg, &next, a, g_norm, f_norm, lambda));
    let report = StepReport {
        n,
        lambda_n: state.lambda,
        effective_coefficients: spec.terms().iter().map(|t| spec.lambda() * t.c).collect(),
        f_norm: state.f_norm,
        g_norm: state.g_norm,
        g_norm_next: g_norm,
        delta_a: delta_a_nu,
        moment_defect,
        max_u,
        max_ux,
        mass_drift,
        picard_iterations: picard,
    };
    Ok((
        RgState {
            n: n + 1,
            f: next,
            lambda,
            term_scales,
            a,
            g_norm,
            f_norm,
            history,
        },
        report,
    ))
}

/// Output of [`run_rg`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub history: Vec<RunRecord>,
    pub steps: Vec<StepReport>,
    /// `f_0, f_1, …`; `f_n` is `L^{2n} u(L^n x, L^{2n})`.
    pub fields: Vec<SpectralField>,
    pub a_limit: f64,
    pub final_residual: f64,
}

impl RunOutput {
    /// `‖g_{n+1}‖_q / ‖g_n‖_q`.
    pub fn g_ratios(&self) -> Vec<f64> {
        self.history
            .windows(2)
            .map(|w| w[1].g_norm / w[0].g_norm)
            .collect()
    }

    /// `|A_{n+1} - A_n|`.
    pub fn a_increments(&self) -> Vec<f64> {
        self.history
            .windows(2)
            .map(|w| (w[1].a_n - w[0].a_n).abs())
            .collect()
    }

    /// Snapshots `u(·, L^{2n})` with their scales, for exponent fitting.
    pub fn scaled_snapshots(&self, l: f64) -> Vec<ScaledSnapshot<'_>> {
        self.fields
            .iter()
            .enumerate()
            .map(|(n, f)| ScaledSnapshot {
                time: l.powi(2 * n as i32),
                x_scale: l.powi(n as i32),
                u_scale: l.powi(-2 * n as i32),
                field: f,
            })
            .collect()
    }
}

/// Iterate [`rg_step`] until `max_iters` steps or `‖g_n‖_q < stop_g_tol`.
pub fn run_rg(f0: &SpectralField, cfg: &RgConfig) -> Result<RunOutput> {
    let mut state = RgState::initial(f0, cfg)?;
    let stop = cfg.stop_g_tol.unwrap_or(1e-10 * state.f_norm);
    let mut fields = vec![state.f.clone()];
    let mut steps = Vec::new();
    while state.n < cfg.max_iters && state.g_norm >= stop {
        let (next, report) = rg_step(&state, cfg)?;
        state = next;
        fields.push(state.f.clone());
        steps.push(report);
    }
    let a_limit = state.a;
    let star = f1_star(*f0.grid())?;
    let mut history = state.history;
    for (rec, f) in history.iter_mut().zip(&fields) {
        let diff = f.combine(1.0, &star, -a_limit)?;
        rec.e_n = bq_norm_with_reference(&diff, &cfg.bq, rec.f_norm)?;
    }
    let final_residual = history.last().map_or(f64::NAN, |r| r.e_n);
    Ok(RunOutput {
        history,
        steps,
        fields,
        a_limit,
        final_residual,
    })
}

/// A field `f` standing for `u(x, t) = u_scale · f(x / x_scale)`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledSnapshot<'a> {
    pub time: f64,
    pub x_scale: f64,
    pub u_scale: f64,
    pub field: &'a SpectralField,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    pub alpha: f64,
    pub beta: f64,
}

/// Least-squares fit of `max|u| ∝ t^{-α}` and `|argmax| ∝ t^{β}` over
/// consecutive snapshot pairs.
pub fn estimate_exponents(snapshots: &[ScaledSnapshot<'_>]) -> Result<Exponents> {
    if snapshots.len() < 4 {
        return Err(RgError::InvalidInput(format!(
            "exponent fit needs at least 4 snapshots, got {}",
            snapshots.len()
        )));
    }
    let mut peaks = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        let p = s.field.peak().ok_or_else(|| {
            RgError::InvalidInput(format!("snapshot at t = {} is identically zero", s.time))
        })?;
        if p.position == 0.0 {
            return Err(RgError::InvalidInput(format!(
                "snapshot at t = {} peaks at the origin; spread exponent undefined",
                s.time
            )));
        }
        peaks.push((
            s.time,
            (p.value * s.u_scale).abs(),
            (p.position * s.x_scale).abs(),
        ));
    }
    let (mut sa, mut sb, mut ss) = (0.0, 0.0, 0.0);
    for w in peaks.windows(2) {
        let lt = (w[1].0 / w[0].0).ln();
        sa += (w[1].1 / w[0].1).ln() * lt;
        sb += (w[1].2 / w[0].2).ln() * lt;
        ss += lt * lt;
    }
    Ok(Exponents {
        alpha: -sa / ss,
        beta: sb / ss,
    })
}

/// Least-squares slope of `ln v_n` against `n` for `n ≥ first`, skipping
/// zeros; NaN with fewer than two usable points.
pub fn log_slope(values: &[f64], first: usize) -> f64 {
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .skip(first)
        .filter(|(_, v)| **v > 0.0)
        .map(|(n, v)| (n as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Check of `e_n ≤ C_{L,q,δ} L^{-n(1-δ)} ‖f_0‖_q` along a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub e_n: Vec<f64>,
    pub bounds: Vec<f64>,
    pub violations: usize,
    /// Least-squares slope of `ln e_n` against `n`.
    pub slope: f64,
    /// `-(1-δ) ln L`.
    pub target_slope: f64,
}

/// Compare the run's `e_n` with the rate bound. Points with `e_n = 0` are
/// left out of the slope fit; `first` selects where the fit starts.
pub fn verify_rate_bound(output: &RunOutput, constants: &ConstantsReport, first: usize) -> RateReport {
    let e_n: Vec<f64> = output.history.iter().map(|r| r.e_n).collect();
    let bounds: Vec<f64> = (0..e_n.len()).map(|n| constants.rate_bound(n)).collect();
    let violations = e_n.iter().zip(&bounds).filter(|(e, b)| e > b).count();
    let slope = log_slope(&e_n, first);
    RateReport {
        e_n,
        bounds,
        violations,
        slope,
        target_slope: -(1.0 - constants.delta) * constants.l.ln(),
    }
}
