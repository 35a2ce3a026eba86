//! Short RG runs on a reduced grid.

use burgers_rg::dynamics::NonlinearitySpec;
use burgers_rg::profiles::{f1_star, make_profile, ProfileId, ProfileKind};
use burgers_rg::rg::{run_rg, RgConfig};
use burgers_rg::spectral::{bq_norm, BqParams, GridSpec, SpectralField};
use burgers_rg::{Hypothesis, RgError};

fn grid() -> GridSpec {
    GridSpec::new(40.0, 512).unwrap()
}

fn data(norm: f64) -> SpectralField {
    let g = grid();
    let a = make_profile(&ProfileId::new(ProfileKind::Gaussian, 1.0, 0.6), g).unwrap();
    let b = make_profile(&ProfileId::new(ProfileKind::Gaussian, 1.0, 0.9), g).unwrap();
    let f = f1_star(g).unwrap().combine(1.0, &a.sub(&b).unwrap(), 0.2).unwrap();
    let n = bq_norm(&f, &BqParams::default()).unwrap();
    f.scaled(norm / n)
}

#[test]
fn duhamel_prefactor_matches_recomputed_first_moment() {
    let mut cfg = RgConfig::new(2.0, NonlinearitySpec::burgers(0.5).unwrap()).unwrap();
    cfg.max_iters = 5;
    let out = run_rg(&data(0.02), &cfg).unwrap();
    assert_eq!(out.steps.len(), 5);
    for s in &out.steps {
        assert!(s.moment_defect <= 1e-12 * out.a_limit.abs(), "step {}: {:e}", s.n, s.moment_defect);
        assert!(s.delta_a != 0.0);
    }
}

#[test]
fn linear_run_keeps_the_prefactor() {
    let cfg = {
        let mut c = RgConfig::new(2.0, NonlinearitySpec::linear()).unwrap();
        c.max_iters = 4;
        c.stop_g_tol = Some(0.0);
        c
    };
    let f = data(0.3);
    let out = run_rg(&f, &cfg).unwrap();
    let a0 = out.history[0].a_n;
    for r in &out.history {
        assert_eq!(r.a_n, a0);
    }
    // g contracts by roughly 1/L per step under the linear map
    for r in out.g_ratios() {
        assert!(r < 0.55, "ratio {r}");
    }
}

#[test]
fn coupling_decays_by_one_power_of_l_for_burgers() {
    let mut cfg = RgConfig::new(2.0, NonlinearitySpec::burgers(-0.5).unwrap()).unwrap();
    cfg.max_iters = 3;
    let out = run_rg(&data(0.02), &cfg).unwrap();
    let lambdas: Vec<f64> = out.history.iter().map(|r| r.lambda_n).collect();
    assert_eq!(lambdas, vec![-0.5, -0.25, -0.125, -0.0625]);
}

#[test]
fn data_with_mass_rejected() {
    let g = grid();
    let f = make_profile(&ProfileId::new(ProfileKind::Gaussian, 0.01, 1.0), g).unwrap();
    let cfg = RgConfig::new(2.0, NonlinearitySpec::burgers(0.5).unwrap()).unwrap();
    let err = run_rg(&f, &cfg).unwrap_err();
    assert!(matches!(
        err,
        RgError::Hypothesis {
            hypothesis: Hypothesis::ZeroMass,
            ..
        }
    ));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn early_stop_once_residual_is_negligible() {
    let mut cfg = RgConfig::new(2.0, NonlinearitySpec::linear()).unwrap();
    cfg.max_iters = 10;
    let star = f1_star(grid()).unwrap().scaled(0.02);
    let out = run_rg(&star, &cfg).unwrap();
    assert!(out.steps.is_empty());
    assert!((out.a_limit - 0.02).abs() < 1e-15);
}
