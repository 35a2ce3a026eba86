//! Property tests for the norm, the transforms, the rescaling map, the
//! fixed-point split and the constants.
//!
//! Reproduce a failure with `PROPTEST_SEED=<seed> cargo test -p burgers-rg --test properties`.

use burgers_rg::constants::{eval_constants, g_q, k_q};
use burgers_rg::dynamics::NonlinearitySpec;
use burgers_rg::profiles::{decompose, make_profile, ProfileId, ProfileKind};
use burgers_rg::spectral::{
    bq_norm_unchecked, moments, resample_rescale, BqParams, GridSpec, SpectralField,
};
use proptest::prelude::*;

fn grid() -> GridSpec {
    GridSpec::new(40.0, 512).unwrap()
}

fn gaussian(amp: f64, width: f64, shift: f64) -> SpectralField {
    let g = grid();
    let samples = g
        .xs()
        .into_iter()
        .map(|x| amp * (-(x - shift).powi(2) / (2.0 * width * width)).exp())
        .collect();
    SpectralField::from_samples(g, samples, 1.0).unwrap()
}

/// A zero-mass test field: fixed point plus a Gaussian difference plus an odd
/// Hermite function.
fn zero_mass(a: f64, b: f64, c: f64, w1: f64, w2: f64) -> SpectralField {
    let g = grid();
    let star = make_profile(&ProfileId::fixed_point(), g).unwrap();
    let d = make_profile(&ProfileId::new(ProfileKind::Gaussian, 1.0, w1), g)
        .unwrap()
        .sub(&make_profile(&ProfileId::new(ProfileKind::Gaussian, 1.0, w2), g).unwrap())
        .unwrap();
    let h = make_profile(&ProfileId::new(ProfileKind::HermiteOdd(3), 1.0, 1.2), g).unwrap();
    star.combine(a, &d, b).unwrap().combine(1.0, &h, c).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_subadditive(
        a1 in -2.0..2.0f64, w1 in 0.6..3.0f64, s1 in -3.0..3.0f64,
        a2 in -2.0..2.0f64, w2 in 0.6..3.0f64, s2 in -3.0..3.0f64,
        q in 1.5..3.0f64,
    ) {
        let f = gaussian(a1, w1, s1);
        let g = gaussian(a2, w2, s2);
        let lhs = bq_norm_unchecked(&f.add(&g).unwrap(), q);
        let rhs = bq_norm_unchecked(&f, q) + bq_norm_unchecked(&g, q);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn norm_is_absolutely_homogeneous(
        a in -2.0..2.0f64, w in 0.6..3.0f64, s in -3.0..3.0f64,
        c in -5.0..5.0f64, q in 1.5..3.0f64,
    ) {
        let f = gaussian(a, w, s);
        let lhs = bq_norm_unchecked(&f.scaled(c), q);
        let rhs = c.abs() * bq_norm_unchecked(&f, q);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
    }

    #[test]
    fn transform_of_real_data_is_conjugate_symmetric(
        a in -2.0..2.0f64, w in 0.6..3.0f64, s in -3.0..3.0f64,
    ) {
        let f = gaussian(a, w, s);
        let g = *f.grid();
        let c = f.coeffs();
        let scale = c.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        for k in 1..g.num_points() {
            let kk = g.wavenumber(k);
            if kk.unsigned_abs() as usize == g.num_points() / 2 {
                continue;
            }
            let mirror = (0..g.num_points()).find(|&j| g.wavenumber(j) == -kk).unwrap();
            prop_assert!((c[k] - c[mirror].conj()).norm() <= 1e-14 * scale);
        }
    }

    #[test]
    fn rescalings_compose(
        w in 1.0..2.5f64, s in -1.0..1.0f64,
        l in 1.2..2.0f64, m in 1.2..2.0f64,
    ) {
        let f = gaussian(1.0, w, s);
        let two_step = resample_rescale(&resample_rescale(&f, l).unwrap(), m).unwrap();
        let one_step = resample_rescale(&f, l * m).unwrap();
        let diff = two_step.sub(&one_step.clone().with_time(two_step.time()).unwrap()).unwrap().max_abs();
        prop_assert!(diff <= 1e-9 * one_step.max_abs(), "diff {diff:e}");
        prop_assert!((two_step.time() - f.time() / (l * l * m * m)).abs() < 1e-15);
    }

    #[test]
    fn decomposition_reconstructs_and_is_idempotent(
        a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64,
        w1 in 0.4..0.65f64, w2 in 0.7..0.95f64,
    ) {
        let params = BqParams::default();
        let f = zero_mass(a, b, c, w1, w2);
        let d = decompose(&f, &params).unwrap();
        let star = make_profile(&ProfileId::fixed_point(), grid()).unwrap();
        let rebuilt = d.g.combine(1.0, &star, d.a).unwrap();
        let scale = f.max_abs().max(1e-300);
        prop_assert!(rebuilt.sub(&f).unwrap().max_abs() <= 1e-13 * scale);
        prop_assert!((d.a - a).abs() <= 1e-10);

        let again = decompose(&d.g, &params).unwrap();
        prop_assert!(again.a.abs() <= 1e-12 * scale);
        prop_assert!(again.g.sub(&d.g).unwrap().max_abs() <= 1e-12 * scale);
        let m = moments(&d.g);
        prop_assert!(m.mass.abs() <= 1e-12 * scale && m.first_moment.abs() <= 1e-10 * scale);
    }

    #[test]
    fn d_sequence_stays_below_d_when_data_are_small(
        l in 1.5..4.0f64, q in 1.5..3.0f64, delta in 0.1..0.9f64, shrink in 0.0..1.0f64,
    ) {
        let spec = NonlinearitySpec::burgers(0.5).unwrap();
        let eps_bar = eval_constants(l, q, delta, &spec, 0.0, 0.05, None)
            .unwrap()
            .epsilon_bar
            .unwrap();
        let report = eval_constants(l, q, delta, &spec, shrink * eps_bar, 0.05, None).unwrap();
        prop_assert!(!report.d_k.is_empty());
        for (k, dk) in report.d_k.iter().enumerate() {
            prop_assert!(*dk < report.d, "D_{} = {} vs D = {}", k + 1, dk, report.d);
        }
    }

    #[test]
    fn rigorous_threshold_is_below_working_threshold(
        l in 1.5..4.0f64, q in 1.5..3.0f64, delta in 0.1..0.9f64,
    ) {
        let report = eval_constants(l, q, delta, &NonlinearitySpec::burgers(0.5).unwrap(), 0.01, 0.05, None).unwrap();
        let eps_bar = report.epsilon_bar.unwrap();
        prop_assert!(eps_bar > 0.0 && eps_bar < report.working_threshold);
    }

    #[test]
    fn k_q_increases_with_q(q in 1.2..4.0f64, dq in 0.01..1.0f64) {
        prop_assert!(k_q(q + dq).unwrap() >= k_q(q).unwrap());
    }
}

// G_q = (2^{q+1}+3)∫dx/(1+|x|^q): the integral blows up as q → 1, so G_q is
// not monotone; it has a minimum near q = 2.
#[test]
fn g_q_has_a_minimum_near_two() {
    let v: Vec<f64> = [1.6, 2.0, 2.5, 3.0].iter().map(|&q| g_q(q).unwrap()).collect();
    assert!(v[0] > v[1], "{v:?}");
    assert!(v[1] < v[2] && v[2] < v[3], "{v:?}");
    for (q, got) in [1.6, 2.0, 2.5, 3.0].iter().zip(&v) {
        let integral = 2.0 * (std::f64::consts::PI / q) / (std::f64::consts::PI / q).sin();
        let want = (2.0_f64.powf(q + 1.0) + 3.0) * integral;
        assert!((got - want).abs() <= 1e-10 * want);
    }
}

#[test]
fn k_q_on_the_reporting_grid() {
    let v: Vec<f64> = [1.6, 2.0, 2.5, 3.0].iter().map(|&q| k_q(q).unwrap()).collect();
    assert!(v.windows(2).all(|w| w[0] <= w[1]), "{v:?}");
}
