//! One time block `t ∈ [1, L²]` of `u_t = u_xx + F(u, u_x)`.
//!
//! The solution is split as `u = u_f + ν`, where `u_f` is the heat flow of the
//! block's initial data (exact in Fourier space) and `ν` the nonlinear
//! correction. Keeping `ν` separate lets the prefactor update `-∫x ν dx` be
//! computed at the precision of `ν` itself.

mod etd;
mod picard;

use num_complex::Complex64;

use crate::error::{Result, RgError};
use crate::spectral::{
    bq_norm_unchecked, coeffs_to_samples, moments, samples_to_coeffs, GridSpec, Parity,
    SpectralField,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlinearityForm {
    /// `λ u u_x`.
    Burgers,
    /// `λ Σ c_n uⁿ u_x`, zero-mass class; the `m` entry of each term is unused.
    H1Derivative,
    /// `λ Σ c_{m,n} u^{2m+1} u_xⁿ`, odd class.
    H2Odd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub m: u32,
    pub n: u32,
    pub c: f64,
}

impl Term {
    pub fn new(m: u32, n: u32, c: f64) -> Self {
        Term { m, n, c }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySpec {
    form: NonlinearityForm,
    terms: Vec<Term>,
    floor: (u32, u32),
    lambda: f64,
    r_u: f64,
    r_v: f64,
}

impl NonlinearitySpec {
    /// `λ u u_x` with unbounded radii.
    pub fn burgers(lambda: f64) -> Result<Self> {
        Self::new(
            NonlinearityForm::Burgers,
            vec![Term::new(0, 1, 1.0)],
            (0, 1),
            lambda,
            f64::INFINITY,
            f64::INFINITY,
        )
    }

    /// The linear heat equation.
    pub fn linear() -> Self {
        NonlinearitySpec {
            form: NonlinearityForm::Burgers,
            terms: vec![Term::new(0, 1, 1.0)],
            floor: (0, 1),
            lambda: 0.0,
            r_u: f64::INFINITY,
            r_v: f64::INFINITY,
        }
    }

    pub fn new(
        form: NonlinearityForm,
        terms: Vec<Term>,
        floor: (u32, u32),
        lambda: f64,
        r_u: f64,
        r_v: f64,
    ) -> Result<Self> {
        let spec = NonlinearitySpec {
            form,
            terms,
            floor,
            lambda,
            r_u,
            r_v,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(RgError::InvalidInput(msg));
        if !(self.lambda.is_finite() && self.lambda.abs() <= 1.0) {
            return bad(format!("coupling must satisfy |λ| ≤ 1, got {}", self.lambda));
        }
        if !(self.r_u > 0.0 && self.r_v > 0.0) || self.r_u.is_nan() || self.r_v.is_nan() {
            return bad(format!(
                "radii must be positive, got r_u = {}, r_v = {}",
                self.r_u, self.r_v
            ));
        }
        if self.terms.iter().any(|t| !t.c.is_finite()) {
            return bad("term coefficients must be finite".into());
        }
        match self.form {
            NonlinearityForm::Burgers => {
                if self.terms != [Term::new(0, 1, 1.0)] {
                    return bad("the Burgers form has exactly the single term u u_x".into());
                }
            }
            NonlinearityForm::H1Derivative => {
                if self.terms.is_empty() {
                    return bad("h1_derivative needs at least one term".into());
                }
                if let Some(t) = self.terms.iter().find(|t| t.n == 0 || t.m != 0) {
                    return bad(format!(
                        "h1_derivative terms are c uⁿ u_x with n ≥ 1 and m = 0, got (m, n) = ({}, {})",
                        t.m, t.n
                    ));
                }
            }
            NonlinearityForm::H2Odd => {
                let (a, b) = self.floor;
                if 4 * a + 3 * b <= 2 {
                    return bad(format!("floor (a, b) = ({a}, {b}) needs 4a + 3b - 2 > 0"));
                }
                if self.terms.is_empty() {
                    return bad("h2_odd needs at least one term".into());
                }
                if let Some(t) = self.terms.iter().find(|t| t.m < a || t.n < b) {
                    return bad(format!(
                        "h2_odd term (m, n) = ({}, {}) lies below the floor ({a}, {b})",
                        t.m, t.n
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn form(&self) -> NonlinearityForm {
        self.form
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn floor(&self) -> (u32, u32) {
        self.floor
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn radii(&self) -> (f64, f64) {
        (self.r_u, self.r_v)
    }

    pub fn radius(&self) -> f64 {
        self.r_u.min(self.r_v)
    }

    pub fn is_linear(&self) -> bool {
        self.lambda == 0.0 || self.terms.iter().all(|t| t.c == 0.0)
    }

    /// Parity class the form preserves.
    pub fn preserved_parity(&self) -> Parity {
        match self.form {
            NonlinearityForm::H2Odd => Parity::Odd,
            _ => Parity::None,
        }
    }

    /// `k` such that the coefficient of `term` picks up `L^{-k}` per RG step:
    /// `u^p u_x^q` scales by `L^{4 - 2p - 3q}` under `u ↦ L² u(L·, L²·)`.
    pub fn scaling_exponent(&self, term: &Term) -> i32 {
        match self.form {
            NonlinearityForm::Burgers | NonlinearityForm::H1Derivative => 2 * term.n as i32 - 1,
            NonlinearityForm::H2Odd => 4 * term.m as i32 + 3 * term.n as i32 - 2,
        }
    }

    /// Decay exponent carried by the coupling `λ_n` itself.
    pub fn floor_exponent(&self) -> i32 {
        match self.form {
            NonlinearityForm::Burgers => 1,
            NonlinearityForm::H1Derivative => self
                .terms
                .iter()
                .map(|t| self.scaling_exponent(t))
                .min()
                .unwrap_or(1),
            NonlinearityForm::H2Odd => 4 * self.floor.0 as i32 + 3 * self.floor.1 as i32 - 2,
        }
    }

    /// The same nonlinearity with coupling `lambda` and per-term factors
    /// `term_scales` folded into the coefficients.
    pub fn renormalized(&self, lambda: f64, term_scales: &[f64]) -> Result<Self> {
        if term_scales.len() != self.terms.len() {
            return Err(RgError::InvalidInput("one scale per term expected".into()));
        }
        let mut out = self.clone();
        out.lambda = lambda;
        if self.form != NonlinearityForm::Burgers {
            for (t, s) in out.terms.iter_mut().zip(term_scales) {
                t.c *= s;
            }
        }
        out.validate()?;
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dealias {
    #[default]
    TwoThirds,
    ZeroPad2x,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMode {
    #[default]
    EtdMarch,
    PicardDuhamel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub l: f64,
    pub num_steps: usize,
    pub dealias: Dealias,
    pub mode: SolveMode,
    pub picard_max_iters: usize,
    pub picard_tol: f64,
}

impl SolveConfig {
    /// Defaults for block length `L²`: `64·⌈L² - 1⌉` steps, 2/3 dealiasing, ETD.
    pub fn new(l: f64) -> Result<Self> {
        let cfg = SolveConfig {
            l,
            num_steps: Self::default_steps(l),
            dealias: Dealias::TwoThirds,
            mode: SolveMode::EtdMarch,
            picard_max_iters: 50,
            picard_tol: 1e-13,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn default_steps(l: f64) -> usize {
        if l.is_finite() && l > 1.0 {
            64 * (l * l - 1.0).ceil() as usize
        } else {
            0
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l.is_finite() && self.l > 1.0) {
            return Err(RgError::InvalidInput(format!("L must exceed 1, got {}", self.l)));
        }
        if self.num_steps < 16 {
            return Err(RgError::InvalidInput(format!(
                "num_steps must be at least 16, got {}",
                self.num_steps
            )));
        }
        if self.picard_max_iters == 0 || !(self.picard_tol > 0.0) {
            return Err(RgError::InvalidInput(
                "picard_max_iters and picard_tol must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.l * self.l - 1.0) / self.num_steps as f64
    }

    /// Step indices at which snapshots are kept: about 16 of them, always the
    /// first and the last.
    pub fn snapshot_stride(&self) -> usize {
        (self.num_steps / 16).max(1)
    }
}

/// Pseudo-spectral evaluator of `F̂` for fixed effective coefficients.
#[derive(Debug, Clone)]
pub(crate) struct Evaluator {
    grid: GridSpec,
    work: GridSpec,
    form: NonlinearityForm,
    terms: Vec<(u32, u32, f64)>,
    guard: (f64, f64),
    dealias: Dealias,
}

pub(crate) struct Evaluation {
    pub fhat: Vec<Complex64>,
    pub max_u: f64,
    pub max_ux: f64,
}

impl Evaluator {
    pub fn new(grid: GridSpec, spec: &NonlinearitySpec, dealias: Dealias) -> Result<Self> {
        let work = match dealias {
            Dealias::TwoThirds => grid,
            Dealias::ZeroPad2x => grid.refined(2)?,
        };
        let terms = spec
            .terms
            .iter()
            .map(|t| (t.m, t.n, spec.lambda * t.c))
            .filter(|t| t.2 != 0.0)
            .collect();
        Ok(Evaluator {
            grid,
            work,
            form: spec.form,
            terms,
            guard: (0.9 * spec.r_u, 0.9 * spec.r_v),
            dealias,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn keep(&self, kk: i64) -> bool {
        let n = self.grid.num_points() as i64;
        match self.dealias {
            Dealias::TwoThirds => 3 * kk.abs() <= n,
            Dealias::ZeroPad2x => kk.abs() < n / 2,
        }
    }

    pub fn eval(&self, uhat: &[Complex64]) -> Result<Evaluation> {
        let n = self.grid.num_points();
        let nw = self.work.num_points();
        let mut padded = vec![Complex64::new(0.0, 0.0); nw];
        for (k, &c) in uhat.iter().enumerate() {
            let kk = self.grid.wavenumber(k);
            if self.keep(kk) {
                padded[kk.rem_euclid(nw as i64) as usize] = c;
            }
        }
        let dpadded: Vec<Complex64> = padded
            .iter()
            .enumerate()
            .map(|(k, &c)| Complex64::new(0.0, self.work.omega(k)) * c)
            .collect();
        let u = coeffs_to_samples(&self.work, &padded);
        let ux = coeffs_to_samples(&self.work, &dpadded);
        let max_u = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let max_ux = ux.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        if self.terms.is_empty() {
            return Ok(Evaluation {
                fhat: out,
                max_u,
                max_ux,
            });
        }
        if max_u >= self.guard.0 || max_ux >= self.guard.1 {
            return Err(RgError::Analyticity(format!(
                "max|u| = {max_u:.3e}, max|u_x| = {max_ux:.3e} against 0.9 x radii ({:.3e}, {:.3e})",
                self.guard.0, self.guard.1
            )));
        }
        let conservative = self.form != NonlinearityForm::H2Odd;
        let values: Vec<f64> = u
            .iter()
            .zip(&ux)
            .map(|(&u, &ux)| {
                self.terms
                    .iter()
                    .map(|&(m, p, c)| {
                        if conservative {
                            // c uᵖ u_x = ∂_x [c u^{p+1}/(p+1)]
                            c * u.powi(p as i32 + 1) / (p as f64 + 1.0)
                        } else {
                            c * u.powi(2 * m as i32 + 1) * ux.powi(p as i32)
                        }
                    })
                    .sum()
            })
            .collect();
        let vhat = samples_to_coeffs(&self.work, &values);
        for (k, slot) in out.iter_mut().enumerate() {
            let kk = self.grid.wavenumber(k);
            if k == self.grid.nyquist() || !self.keep(kk) {
                continue;
            }
            let c = vhat[kk.rem_euclid(nw as i64) as usize];
            *slot = if conservative {
                Complex64::new(0.0, self.grid.omega(k)) * c
            } else {
                c
            };
        }
        Ok(Evaluation {
            fhat: out,
            max_u,
            max_ux,
        })
    }
}

/// `F(u, u_x)` for the coefficients in `spec` (coupling included).
pub fn eval_nonlinearity(u: &SpectralField, spec: &NonlinearitySpec) -> Result<SpectralField> {
    eval_nonlinearity_with(u, spec, Dealias::TwoThirds)
}

pub fn eval_nonlinearity_with(
    u: &SpectralField,
    spec: &NonlinearitySpec,
    dealias: Dealias,
) -> Result<SpectralField> {
    let ev = Evaluator::new(*u.grid(), spec, dealias)?;
    let e = ev.eval(u.coeffs())?;
    let parity = match (spec.form, u.parity()) {
        (NonlinearityForm::H2Odd, Parity::Odd) => Parity::Odd,
        _ => Parity::None,
    };
    Ok(SpectralField::from_coeffs(*u.grid(), e.fhat, u.time())?.with_parity(parity))
}

/// Heat flow from `t0` to `t1`: `f̂ ↦ e^{-ω²(t1 - t0)} f̂`.
pub fn linear_propagate(f: &SpectralField, t0: f64, t1: f64) -> Result<SpectralField> {
    if !(t1 >= t0) {
        return Err(RgError::InvalidInput(format!(
            "cannot propagate backwards from t = {t0} to t = {t1}"
        )));
    }
    let dt = t1 - t0;
    f.map_coeffs(|w, c| c * (-w * w * dt).exp())?.with_time(t1)
}

/// Output of one block solve.
#[derive(Debug, Clone)]
pub struct BlockSolution {
    /// `u(·, t)` at the kept times, starting at `t = 1` and ending at `t = L²`.
    pub snapshots: Vec<SpectralField>,
    /// Nonlinear correction `ν = u - u_f` at `t = L²`.
    pub nu_final: SpectralField,
    pub max_u: f64,
    pub max_ux: f64,
    /// `|mass(u(L²)) - mass(f)|` relative to `‖f‖_2` (absolute if `f = 0`).
    pub mass_drift: f64,
    /// Parity defect of `u(L²)` (meaningful for odd data).
    pub parity_defect: f64,
    pub picard_iterations: Option<usize>,
}

impl BlockSolution {
    pub fn final_field(&self) -> &SpectralField {
        self.snapshots.last().expect("a block always has snapshots")
    }
}

/// Solve the block `[1, L²]` starting from `f` at `t = 1`.
pub fn solve_block(
    f: &SpectralField,
    spec: &NonlinearitySpec,
    cfg: &SolveConfig,
) -> Result<BlockSolution> {
    cfg.validate()?;
    let f = f.clone().with_time(1.0)?;
    let ev = Evaluator::new(*f.grid(), spec, cfg.dealias)?;
    let out = match cfg.mode {
        SolveMode::EtdMarch => etd::march(&f, &ev, cfg)?,
        SolveMode::PicardDuhamel => picard::iterate(&f, &ev, cfg)?,
    };
    let last = out.snapshots.last().expect("snapshots");
    let scale = bq_norm_unchecked(&f, 2.0);
    let drift = (moments(last).mass - moments(&f).mass).abs();
    Ok(BlockSolution {
        mass_drift: if scale > 0.0 { drift / scale } else { drift },
        parity_defect: last.parity_defect(),
        ..out
    })
}

/// Observed sup of `|u|` and `|u_x|` over the kept snapshots, and `K ‖u‖`
/// with `‖u‖` the sup over snapshots of `‖u(t)‖_q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupBounds {
    pub max_u: f64,
    pub max_ux: f64,
    /// `None` when `K` is infinite (`q ≤ 2`).
    pub k_bound: Option<f64>,
}

pub fn sup_bounds(u: &BlockSolution, q: f64) -> Result<SupBounds> {
    let mut max_u = 0.0_f64;
    let mut max_ux = 0.0_f64;
    let mut norm = 0.0_f64;
    for s in &u.snapshots {
        max_u = max_u.max(s.max_abs());
        max_ux = max_ux.max(s.x_derivative()?.max_abs());
        norm = norm.max(bq_norm_unchecked(s, q));
    }
    let k = crate::constants::sup_constant(q)?;
    Ok(SupBounds {
        max_u,
        max_ux,
        k_bound: k.map(|k| k * norm),
    })
}

/// Time nodes `t_i = 1 + i h`.
pub(crate) fn node_time(cfg: &SolveConfig, i: usize) -> f64 {
    if i == cfg.num_steps {
        cfg.l * cfg.l
    } else {
        1.0 + i as f64 * cfg.step()
    }
}

pub(crate) fn keep_snapshot(cfg: &SolveConfig, i: usize) -> bool {
    i % cfg.snapshot_stride() == 0 || i == cfg.num_steps
}

/// `u_f(t) = e^{-ω²(t-1)} f̂` as a coefficient vector.
pub(crate) fn free_flow(f: &SpectralField, t: f64) -> Vec<Complex64> {
    let grid = f.grid();
    f.coeffs()
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let w = grid.omega(k);
            c * (-w * w * (t - 1.0)).exp()
        })
        .collect()
}

pub(crate) fn assemble(
    f: &SpectralField,
    nu: &[Complex64],
    t: f64,
) -> Result<SpectralField> {
    let uf = free_flow(f, t);
    let coeffs = uf.iter().zip(nu).map(|(a, b)| a + b).collect();
    SpectralField::from_coeffs(*f.grid(), coeffs, t).map(|s| s.with_parity(f.parity()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{f1_star, make_profile, ProfileId, ProfileKind};

    fn grid() -> GridSpec {
        GridSpec::new(30.0, 512).unwrap()
    }

    #[test]
    fn burgers_spec_shape() {
        let s = NonlinearitySpec::burgers(0.5).unwrap();
        assert_eq!(s.floor_exponent(), 1);
        assert_eq!(s.scaling_exponent(&s.terms()[0]), 1);
        assert!(NonlinearitySpec::burgers(1.5).is_err());
    }

    #[test]
    fn h2_floor_validation() {
        let t = vec![Term::new(1, 1, 1.0)];
        let ok = NonlinearitySpec::new(NonlinearityForm::H2Odd, t.clone(), (1, 1), 1.0, 1.0, 1.0)
            .unwrap();
        assert_eq!(ok.scaling_exponent(&ok.terms()[0]), 5);
        assert!(NonlinearitySpec::new(NonlinearityForm::H2Odd, t.clone(), (0, 0), 1.0, 1.0, 1.0)
            .is_err());
        assert!(NonlinearitySpec::new(
            NonlinearityForm::H2Odd,
            vec![Term::new(0, 1, 1.0)],
            (1, 1),
            1.0,
            1.0,
            1.0
        )
        .is_err());
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let u = SpectralField::zeros(grid(), 1.0).unwrap();
        let f = eval_nonlinearity(&u, &NonlinearitySpec::burgers(1.0).unwrap()).unwrap();
        assert_eq!(f.max_abs(), 0.0);
    }

    #[test]
    fn burgers_matches_pointwise_product_with_exact_zero_mode() {
        let g = grid();
        let u = make_profile(&ProfileId::gaussian(), g).unwrap();
        let lam = 0.7;
        let f = eval_nonlinearity(&u, &NonlinearitySpec::burgers(lam).unwrap()).unwrap();
        // conservative form: the zero mode is zero up to the real projection
        assert!(f.coeffs()[0].norm() < 1e-16, "{:e}", f.coeffs()[0].norm());
        let ux = u.x_derivative().unwrap();
        let err = u
            .samples()
            .iter()
            .zip(ux.samples())
            .zip(f.samples())
            .map(|((a, b), c)| (lam * a * b - c).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err:e}");
    }

    #[test]
    fn h2_output_is_odd_for_odd_input() {
        let spec = NonlinearitySpec::new(
            NonlinearityForm::H2Odd,
            vec![Term::new(1, 1, 1.0)],
            (1, 1),
            1.0,
            1.0,
            1.0,
        )
        .unwrap();
        let u = make_profile(&ProfileId::new(ProfileKind::HermiteOdd(3), 0.3, 1.0), grid()).unwrap();
        let f = eval_nonlinearity(&u, &spec).unwrap();
        assert_eq!(f.parity(), Parity::Odd);
        assert!(f.parity_defect() < 1e-12);
        assert!(f.max_abs() > 0.0);
    }

    #[test]
    fn guard_trips_outside_radius() {
        let spec = NonlinearitySpec::new(
            NonlinearityForm::H2Odd,
            vec![Term::new(1, 1, 1.0)],
            (1, 1),
            1.0,
            0.1,
            0.1,
        )
        .unwrap();
        let u = f1_star(grid()).unwrap().scaled(2.0);
        assert!(matches!(eval_nonlinearity(&u, &spec), Err(RgError::Analyticity(_))));
    }

    #[test]
    fn backwards_propagation_rejected() {
        let u = f1_star(grid()).unwrap();
        assert!(linear_propagate(&u, 2.0, 1.0).is_err());
        let same = linear_propagate(&u, 1.0, 1.0).unwrap();
        let err = same.sub(&u).unwrap().max_abs();
        assert!(err < 1e-16, "{err:e}");
    }

    #[test]
    fn renormalized_folds_scales_into_terms() {
        let spec = NonlinearitySpec::new(
            NonlinearityForm::H2Odd,
            vec![Term::new(1, 1, 2.0), Term::new(2, 1, 1.0)],
            (1, 1),
            0.5,
            1.0,
            1.0,
        )
        .unwrap();
        let r = spec.renormalized(0.25, &[1.0, 0.5]).unwrap();
        assert_eq!(r.lambda(), 0.25);
        assert_eq!(r.terms()[0].c, 2.0);
        assert_eq!(r.terms()[1].c, 0.5);
    }
}
