use approx::assert_relative_eq;
use dynkin_core::localtime::{
    conditional_bins, fixed_time_moments, resolvent_check, resolvent_moments, stable_increment, unit_median_abs,
    unit_stable, ConditionalQuery, Path, PathSampler, MIN_BIN_HITS,
};
use dynkin_core::rng::{self, domain};
use dynkin_core::stats::Moments;
use dynkin_core::{Error, PathConfig};

fn aux(i: u64) -> rng::Stream {
    rng::stream(99, domain::AUX, i)
}

#[test]
fn median_oracles() {
    // β = 2: N(0, 2), median |X| = √2·Φ⁻¹(3/4); β = 1: standard Cauchy, median 1
    assert_relative_eq!(unit_median_abs(2.0).unwrap(), 2f64.sqrt() * 0.674_489_750_196_081_7, max_relative = 1e-9);
    assert_relative_eq!(unit_median_abs(1.0).unwrap(), 1.0, max_relative = 1e-9);
    assert!(unit_median_abs(2.5).is_err());
}

#[test]
fn gaussian_increments_have_variance_four_c_dt() {
    let mut r = aux(0);
    let m: Moments = (0..100_000).map(|_| stable_increment(2.0, 0.7, 0.01, &mut r).powi(2)).collect();
    assert!((m.mean() - 4.0 * 0.7 * 0.01).abs() < 4.0 * m.std_error());
}

#[test]
fn cauchy_quartiles() {
    let (c, dt) = (0.5, 0.3);
    let scale = 2.0 * c * dt;
    let mut r = aux(1);
    let mut xs: Vec<f64> = (0..1_000_000).map(|_| stable_increment(1.0, c, dt, &mut r)).collect();
    xs.sort_by(f64::total_cmp);
    let q = |p: f64| xs[(p * xs.len() as f64) as usize];
    assert!(q(0.5).abs() < 0.01 * scale);
    assert_relative_eq!(q(0.75) - q(0.25), 2.0 * scale, max_relative = 0.01);
}

#[test]
fn characteristic_function_of_stable_draws() {
    let mut r = aux(2);
    let xs: Vec<f64> = (0..200_000).map(|_| unit_stable(1.5, &mut r)).collect();
    for xi in [0.5, 1.0, 2.0] {
        let m: Moments = xs.iter().map(|x| (xi * x).cos()).collect();
        let exact = (-f64::powf(xi, 1.5)).exp();
        assert!((m.mean() - exact).abs() < 4.0 * m.std_error(), "xi={xi}");
    }
    let signs: Moments = xs.iter().map(|x| x.signum()).collect();
    assert!(signs.mean().abs() < 3.0 * signs.std_error());
}

#[test]
fn constant_path_counts_every_step() {
    let path = Path::from_positions(0.01, 2.0, vec![0.3; 201], 0.05).unwrap();
    let lt = path.local_time(0.3, 0.04).unwrap();
    assert_relative_eq!(lt.value, 2.0 / 0.08, max_relative = 1e-12);
    assert_eq!(path.local_time(5.0, 0.04).unwrap().value, 0.0);
}

#[test]
fn bandwidth_rules() {
    let path = Path::from_positions(0.01, 1.0, vec![0.0; 101], 0.1).unwrap();
    assert!(matches!(path.local_time(0.0, 0.2), Err(Error::Bandwidth { .. })));
    assert!(matches!(path.local_time(0.0, 0.01), Err(Error::Bandwidth { .. })));
    assert!(path.local_time(0.0, 0.1).is_ok());
    let cfg = PathConfig::new(1.5, 0.5, 1e-3).unwrap();
    assert!(PathSampler::new(cfg).is_ok());
    assert!(PathSampler::new(cfg.with_eps(1.0)).is_err());
    assert!(PathConfig::new(1.0, 0.5, 1e-3).is_err());
}

#[test]
fn local_time_is_additive() {
    let s = PathSampler::new(PathConfig::new(1.5, 0.5, 1e-3).unwrap()).unwrap();
    let path = s.path(0.0, 2.0, &mut aux(3));
    let eps = s.config().eps;
    let (head, tail) = path.split(1000).unwrap();
    for y in [0.0, 0.05, -0.2] {
        let whole = path.local_time(y, eps).unwrap().value;
        let parts = head.local_time(y, eps).unwrap().value + tail.local_time(y, eps).unwrap().value;
        assert_relative_eq!(whole, parts, max_relative = 1e-14);
    }
}

#[test]
fn local_time_nondecreasing_in_time() {
    let s = PathSampler::new(PathConfig::new(2.0, 0.5, 1e-3).unwrap()).unwrap();
    let path = s.path(0.0, 1.0, &mut aux(4));
    let eps = s.config().eps;
    let mut prev = 0.0;
    for k in 0..=200 {
        let v = path.local_time_until(0.0, eps, k as f64 * 0.005).unwrap();
        assert!(v >= prev);
        prev = v;
    }
}

#[test]
fn resolvent_normalization_stable() {
    let cfg = PathConfig::new(1.5, 0.5, 1e-3).unwrap().with_seed(17);
    let chk = resolvent_check(cfg, 1.0, 0.0, 0.0, 20_000).unwrap();
    assert!(chk.within(chk.exact, 0.05), "{chk:?}");
}

#[test]
fn resolvent_decreases_with_rate_and_distance() {
    let s = PathSampler::new(PathConfig::new(2.0, 1.0, 1e-3).unwrap().with_seed(3)).unwrap();
    let a1 = resolvent_moments(&s, 1.0, 0.0, 0.0, 0..4000).unwrap();
    let a4 = resolvent_moments(&s, 4.0, 0.0, 0.0, 0..4000).unwrap();
    assert!(a1.mean() > a4.mean());
    let far = resolvent_moments(&s, 2.0, 0.0, 6.0, 0..4000).unwrap();
    // ū_2(6) = e^{-6}/4
    assert!(far.mean() < 0.25 * (-6f64).exp() + 3.0 * far.std_error() + 1e-3);
}

#[test]
fn start_level_dominates() {
    let s = PathSampler::new(PathConfig::new(1.5, 0.5, 1e-3).unwrap().with_seed(5)).unwrap();
    let at = fixed_time_moments(&s, 0.0, 0.0, 1.0, 0..3000).unwrap();
    let off = fixed_time_moments(&s, 0.5, 0.0, 1.0, 0..3000).unwrap();
    assert!(off.mean() <= at.mean() + 3.0 * (at.std_error().powi(2) + off.std_error().powi(2)).sqrt());
    for t in [1.0, 2.0, 4.0] {
        let m = fixed_time_moments(&s, 0.5, 0.0, t, 0..1000).unwrap();
        assert!(m.mean() <= 2.0 * t * at.mean() + 3.0 * m.std_error());
    }
}

#[test]
fn identical_levels_give_zero() {
    let s = PathSampler::new(PathConfig::new(1.5, 0.5, 1e-3).unwrap()).unwrap();
    let q = ConditionalQuery { alpha: 1.0, a: 0.0, b: 0.0, t: std::f64::consts::LN_2, window: None };
    let out = conditional_bins(&s, &q, 0..1200).unwrap().outcome(MIN_BIN_HITS).unwrap();
    assert_eq!((out.lhs, out.rhs), (0.0, 0.0));
    assert!(out.pass);
}

#[test]
fn occupancy_is_enforced() {
    let s = PathSampler::new(PathConfig::new(1.5, 0.5, 1e-3).unwrap()).unwrap();
    let q = ConditionalQuery { alpha: 1.0, a: 0.0, b: 1.0, t: 5.0, window: None };
    match conditional_bins(&s, &q, 0..1000).unwrap().outcome(MIN_BIN_HITS) {
        Err(Error::Occupancy { above, required, .. }) => assert!(above < required),
        other => panic!("{other:?}"),
    }
}

#[test]
fn bins_merge() {
    let s = PathSampler::new(PathConfig::new(2.0, 0.5, 1e-2).unwrap()).unwrap();
    let q = ConditionalQuery { alpha: 2.0, a: 0.0, b: 0.5, t: 0.5, window: None };
    let all = conditional_bins(&s, &q, 0..300).unwrap();
    let mut part = conditional_bins(&s, &q, 0..100).unwrap();
    part.merge(&conditional_bins(&s, &q, 100..300).unwrap());
    assert_eq!(part.below.count() + part.above.count(), 300);
    assert_relative_eq!(part.above.mean(), all.above.mean(), max_relative = 1e-12);
}
