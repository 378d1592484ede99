use kerrdpt::langevin::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::gamma::gamma;

fn short(drift: Drift, g: f64, kerr: f64, seed: u64) -> LangevinConfig {
    let mut c = LangevinConfig::with_defaults(drift, g, kerr, 1.0, seed).unwrap();
    c.n_trajectories = 8;
    c.n_steps = c.burn_in + (c.n_steps - c.burn_in) / 20;
    c
}

#[test]
fn linear_regime_moments_and_rate() {
    let cfg = LangevinConfig::with_defaults(Drift::Linear, 0.9, 0.0, 1.0, 2024).unwrap();
    assert_eq!(cfg.n_trajectories, 64);
    let stats = simulate(&cfg, 1.0).unwrap();
    assert!(stats.n_batches >= MIN_BATCHES);
    assert!(stats.mean_x2.within(10.0, 3.0), "{:?}", stats.mean_x2);
    assert!(stats.mean_p2.within(1.0 / 1.9, 3.0), "{:?}", stats.mean_p2);
    let rate = stats.decay.as_ref().expect("decay fit").rate;
    assert!((rate - 0.05).abs() / 0.05 < 0.1, "rate {rate}");
    // squeezing ratio (gamma - g)/(gamma + g) to first order in the errors
    let ratio = stats.mean_p2.value / stats.mean_x2.value;
    let rel = (stats.mean_p2.stderr / stats.mean_p2.value).hypot(stats.mean_x2.stderr / stats.mean_x2.value);
    assert!((ratio - 0.1 / 1.9).abs() <= 3.0 * rel * ratio);
}

#[test]
fn seed_fixes_the_result() {
    let cfg = short(Drift::Quintic, 1.0, 0.3, 5);
    let a = simulate(&cfg, 1.0).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| simulate(&cfg, 1.0).unwrap());
    assert_eq!(a.mean_x2, b.mean_x2);
    assert_eq!(a.autocorr, b.autocorr);
    let other = simulate(&LangevinConfig { seed: 6, ..cfg }, 1.0).unwrap();
    assert_ne!(a.mean_x2, other.mean_x2);
}

#[test]
fn quintic_matches_quadrature() {
    for (g, u) in [(0.95, 0.2), (1.0, 0.5)] {
        let cfg = LangevinConfig::with_defaults(Drift::Quintic, g, u, 1.0, 77).unwrap();
        let stats = simulate(&cfg, 1.0).unwrap();
        let want = stationary_moment(&FreeEnergy::for_x(g, u, 1.0), 2).unwrap();
        assert!(stats.mean_x2.within(want, 3.0), "g={g} U={u}: {:?} vs {want}", stats.mean_x2);
    }
}

#[test]
fn full_coupling_reduces_to_quintic_at_small_kerr() {
    let q = simulate(&LangevinConfig::with_defaults(Drift::Quintic, 1.0, 0.01, 1.0, 9).unwrap(), 1.0).unwrap();
    let f = simulate(&LangevinConfig::with_defaults(Drift::FullCoupled, 1.0, 0.01, 1.0, 9).unwrap(), 1.0).unwrap();
    let se = q.mean_x2.stderr.hypot(f.mean_x2.stderr);
    assert!((q.mean_x2.value - f.mean_x2.value).abs() <= 3.0 * se, "{:?} vs {:?}", q.mean_x2, f.mean_x2);
}

#[test]
fn halving_dt_moves_less_than_one_standard_error() {
    let mut cfg = LangevinConfig::with_defaults(Drift::Linear, 0.9, 0.0, 1.0, 3).unwrap();
    cfg.n_trajectories = 16;
    let r = dt_refinement(&cfg, 1.0).unwrap();
    assert!(r.shift.value.abs() < r.coarse.stderr, "{r:?}");
}

#[test]
fn stationary_moments() {
    let quad = FreeEnergy::for_x(0.9, 0.0, 1.0);
    assert!((stationary_moment(&quad, 2).unwrap() - 10.0).abs() < 1e-9);
    assert_eq!(stationary_moment(&quad, 0).unwrap(), 1.0);
    let u: f64 = 0.01;
    let sextic = FreeEnergy::for_x(1.0, u, 1.0);
    // int x^n exp(-a x^6) = Gamma((n+1)/6) / (6 a^{(n+1)/6}), a = U^2/(48 gamma^2)
    let a = u * u / 48.0;
    let want = gamma(0.5) / gamma(1.0 / 6.0) / a.powf(1.0 / 3.0);
    assert!((want - 24.932).abs() < 1e-3);
    let got = stationary_moment(&sextic, 2).unwrap();
    assert!((got - want).abs() < 1e-10 * want);
    let x4 = stationary_moment(&sextic, 4).unwrap();
    let want4 = gamma(5.0 / 6.0) / gamma(1.0 / 6.0) / a.powf(2.0 / 3.0);
    assert!((x4 - want4).abs() < 1e-10 * want4);
    assert!(matches!(
        stationary_moment(&FreeEnergy::for_x(1.5, 0.0, 1.0), 2),
        Err(kerrdpt::Error::NonConfining)
    ));
    assert!(stationary_moment(&quad, 3).is_err());
}

#[test]
fn occupation_cross_check() {
    let n = occupation_from_moments(10.0, 1.0 / 1.9).unwrap();
    assert!((n - 2.131_58).abs() < 1e-5);
    assert!((n - 0.81 / (2.0 * 0.19)).abs() < 1e-12);
    assert_eq!(occupation_from_moments(1.0, 1.0).unwrap(), 0.0);
    assert!(occupation_from_moments(0.0, 1.0).is_err());
}

#[test]
fn kappa_predictions() {
    let u: f64 = 0.05;
    let scale = u.powf(2.0 / 3.0);
    let x2 = x2_prefactor_quadrature() / scale;
    let k = predicted_kappa(u, 1.0, x2).unwrap();
    assert!((k / scale - kappa_prefactor_quadrature()).abs() < 1e-12);
    let kp = predicted_kappa(u, 1.0, x2_prefactor_printed() / scale).unwrap();
    assert!((kp / scale - kappa_prefactor_printed()).abs() < 1e-12);
    // the U exponent is 2/3 whichever prefactor is used
    let k2 = predicted_kappa(2.0 * u, 1.0, x2_prefactor_quadrature() / (2.0 * u).powf(2.0 / 3.0)).unwrap();
    assert!(((k2 / k).ln() / 2f64.ln() - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn white_noise_has_no_decay_fit() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let series: Vec<Vec<f64>> = (0..16)
        .map(|_| (0..4000).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let stats = TrajectoryStats::from_samples(&series, 0.1, 200).unwrap();
    assert!(stats.decay.is_none());
    assert!(matches!(
        autocorrelation_rate(&stats, None),
        Err(kerrdpt::Error::NoExponentialFit(_))
    ));
}

#[test]
fn unstable_step_is_rejected() {
    let mut cfg = short(Drift::Quintic, 1.0, 0.5, 1);
    cfg.dt = 1.0;
    assert!(simulate(&cfg, 1.0).is_err());
    let mut lin = short(Drift::Linear, 0.9, 0.0, 1);
    lin.burn_in = 1;
    assert!(simulate(&lin, 1.0).is_err());
}

#[test]
fn predicted_exponents_satisfy_relation() {
    let e = predicted_exponents();
    assert_eq!((e.nu_n, e.nu_t), (1.0, 1.0));
    assert!((e.eta_n - 2.0 / 3.0).abs() < 1e-15);
    let rel = kerrdpt::scaling::exponent_relation(e.nu_n, e.nu_t, e.eta_n, e.eta_t, 1e-12);
    assert!(rel.holds && rel.residual == 0.0);
}
