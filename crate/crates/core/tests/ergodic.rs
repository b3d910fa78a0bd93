use rand::Rng;
use rand_distr::StandardNormal;
use ruinlab::ergodic::{
    ar_path, cesaro_average, critical_certain_ruin_demo, ladder_epochs, ladder_tail_profile, sample_x_infinity,
    CertainRuinConfig, TestFunction,
};
use ruinlab::rng::path_stream;
use ruinlab::stats::{batch_means_std_error, ks_two_sample, MeanVar};
use ruinlab::{ArSpec, ClaimDistribution, ModelParams};

#[test]
fn stationary_limit_matches_long_run_values() {
    let spec = ArSpec::gaussian_noise(0.5, 1.0).unwrap();
    let limit: Vec<f64> = (0..20_000).map(|i| sample_x_infinity(&spec, 100_000, 1e-12, &mut path_stream(1, 0, i))).collect();
    let long_run: Vec<f64> = (0..20_000).map(|i| *ar_path(&spec, 1000, &mut path_stream(2, 0, i)).last().unwrap()).collect();
    let ks = ks_two_sample(&limit, &long_run);
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn cesaro_averages_converge() {
    let spec = ArSpec::gaussian_noise(0.5, 1.0).unwrap();
    let path = ar_path(&spec, 100_000, &mut path_stream(3, 0, 0));
    let limit: Vec<f64> = (0..100_000).map(|i| sample_x_infinity(&spec, 100_000, 1e-12, &mut path_stream(4, 0, i))).collect();
    for f in TestFunction::ALL {
        let series: Vec<f64> = path.iter().map(|&x| f.eval(x)).collect();
        let avg = cesaro_average(|x| f.eval(x), &path).unwrap();
        let mv: MeanVar = limit.iter().map(|&x| f.eval(x)).collect();
        let se = batch_means_std_error(&series, 100).hypot(mv.std_error());
        assert!((avg - mv.mean()).abs() < 3.0 * se, "{f:?}: {avg} vs {} (se {se})", mv.mean());
        if f == TestFunction::ClampedSine {
            assert!((avg - mv.mean()).abs() < 0.01);
        }
    }
}

#[test]
fn ladder_increments_are_identically_distributed() {
    let (mut first, mut second) = (Vec::new(), Vec::new());
    for i in 0..20_000 {
        let mut rng = path_stream(5, 0, i);
        let nu: Vec<f64> = (0..4000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let l = ladder_epochs(&nu, 2);
        if !l.exhausted {
            let inc = l.increments();
            first.push(inc[0] as f64);
            second.push(inc[1] as f64);
        }
    }
    // Ties in integer data make the KS test conservative.
    let ks = ks_two_sample(&first, &second);
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn ladder_tail_is_square_root() {
    let profile = ladder_tail_profile(&[10, 100, 1000], 20_000, 6);
    let values: Vec<f64> = profile.iter().map(|p| p.1).collect();
    let (lo, hi) = values.iter().fold((f64::MAX, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    assert!(lo > 0.0 && hi / lo < 2.0, "{profile:?}");
}

#[test]
fn critical_chain_ruin_accumulates() {
    let params = ModelParams::from_variance(0.05, 0.1, 1.0).unwrap();
    let mut cfg = CertainRuinConfig::new(params, ClaimDistribution::exponential(1.0).unwrap(), 1.0);
    cfg.n_paths = 2000;
    cfg.bridge_points = 16;
    let mut prev = 0.0;
    for budget in [50, 200, 800] {
        let r = critical_certain_ruin_demo(5.0, &cfg, budget).unwrap();
        assert!(r.ruined_fraction + 0.02 >= prev, "{r:?}");
        assert!(r.ruined_any_claim_fraction >= r.ruined_fraction);
        prev = r.ruined_fraction;
    }
    let at_zero = critical_certain_ruin_demo(0.0, &cfg, 800).unwrap();
    assert!(at_zero.ruined_fraction > 0.8, "{at_zero:?}");
    assert!(at_zero.ruined_fraction >= prev);
}
