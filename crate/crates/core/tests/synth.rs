use approx::assert_relative_eq;
use dynkin_core::kernel::{self, KernelKind};
use dynkin_core::quad::{self, Cutoffs, Tolerance};
use dynkin_core::stats::Moments;
use dynkin_core::synth::{
    discrete_structure, spectral_density, FieldSampler, JointSampler, LagBand, StructureAccumulator,
};
use dynkin_core::{Error, FieldKind, LevyModel, SpatialGrid, SpectralGrid};
use proptest::prelude::*;

fn brownian() -> LevyModel {
    LevyModel::brownian(1.0).unwrap()
}

fn stable15() -> LevyModel {
    LevyModel::stable(1.5, 1.0).unwrap()
}

proptest! {
    #[test]
    fn cable_and_tail_densities_add_to_stationary(
        alpha in 1e-3f64..20.0,
        t in 1e-3f64..20.0,
        xi in 0.0f64..1e4,
        beta in 0.3f64..2.0,
    ) {
        let model = LevyModel::stable(beta, 0.7).unwrap();
        let v = spectral_density(&FieldKind::V { alpha, t }, &model, xi).unwrap();
        let s = spectral_density(&FieldKind::S { alpha, t }, &model, xi).unwrap();
        let eta = spectral_density(&FieldKind::Eta { alpha }, &model, xi).unwrap();
        prop_assert!(((v + s) - eta).abs() <= 1e-12 * eta);
    }
}

#[test]
fn stationary_density_integrates_to_potential_at_zero() {
    let model = brownian();
    let mut f = quad::scalar(|xi| 2.0 * spectral_density(&FieldKind::Eta { alpha: 2.0 }, &model, xi).unwrap());
    let r = quad::half_line(&mut f, 1, Tolerance::relative(1e-10), Cutoffs::default()).unwrap();
    assert_relative_eq!(r.value[0], 0.25, epsilon = 1e-8);
}

#[test]
fn stable_density_tail() {
    let model = stable15();
    for xi in [1e6, 1e8] {
        let f = spectral_density(&FieldKind::Eta { alpha: 1.0 }, &model, xi).unwrap();
        assert_relative_eq!(f * 4.0 * std::f64::consts::PI * xi.powf(1.5), 1.0, max_relative = 1e-5);
    }
}

#[test]
fn heat_density_limit_at_zero_frequency() {
    let f = spectral_density(&FieldKind::U { t: 3.0 }, &brownian(), 0.0).unwrap();
    assert_relative_eq!(f, 3.0 / (2.0 * std::f64::consts::PI), max_relative = 1e-15);
}

#[test]
fn invalid_parameters_rejected() {
    let m = brownian();
    assert!(spectral_density(&FieldKind::V { alpha: 0.0, t: 1.0 }, &m, 1.0).is_err());
    assert!(spectral_density(&FieldKind::S { alpha: 1.0, t: -1.0 }, &m, 1.0).is_err());
    assert!(SpectralGrid::new(10.0, 1).is_err());
    assert!(SpatialGrid::new(0.0, 10).is_err());
}

#[test]
fn sampling_is_deterministic() {
    let grid = SpectralGrid::new(50.0, 512).unwrap();
    let space = SpatialGrid::new(0.05, 64).unwrap();
    let s = JointSampler::new(&stable15(), 1.0, 2.0, grid, Some(2)).unwrap();
    let a = s.sample(11, 5, &space);
    let b = s.sample(11, 5, &space);
    let c = s.sample(11, 6, &space);
    assert_eq!(a, b);
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.eta.values), bits(&b.eta.values));
    assert_ne!(a.v.values, c.v.values);
    assert!(a.eta.values.iter().all(|x| x.is_finite()));
}

#[test]
fn stationary_field_is_sum_of_cable_and_tail() {
    let grid = SpectralGrid::new(40.0, 256).unwrap();
    let space = SpatialGrid::new(0.1, 100).unwrap();
    let s = JointSampler::new(&brownian(), 2.0, 0.7, grid, None).unwrap();
    let j = s.sample(3, 0, &space);
    for k in 0..space.points() {
        assert_eq!(j.eta.values[k].to_bits(), (j.v.values[k] + j.s.values[k]).to_bits());
    }
    assert!(j.s_derivative.is_none());
}

#[test]
fn derivative_field_is_spectral_derivative_of_tail() {
    let grid = SpectralGrid::new(30.0, 300).unwrap();
    let h = 1e-4;
    let space = SpatialGrid::new(h, 3).unwrap();
    let s = JointSampler::new(&stable15(), 1.0, 1.0, grid, Some(1)).unwrap();
    let j = s.sample(9, 2, &space);
    let fd = (j.s.values[2] - j.s.values[0]) / (2.0 * h);
    let d = j.s_derivative.unwrap().values[1];
    assert!((fd - d).abs() < 1e-6 * d.abs().max(1.0));
}

#[test]
fn discrete_variance_converges_to_profile() {
    // Riemann sum of the amplitudes approaches the quadrature variance as K grows.
    let model = stable15();
    let kind = FieldKind::V { alpha: 1.0, t: 1.0 };
    let mut prev = f64::INFINITY;
    for k in [1 << 10, 1 << 12, 1 << 14] {
        let s = FieldSampler::new(&model, kind, SpectralGrid::new(2000.0, k).unwrap()).unwrap();
        let d = s.diagnostics();
        let gap = d.bias().abs();
        assert!(gap <= prev);
        prev = gap;
    }
    // what remains is the truncation tail (1/π)∫_Ξ^∞ dξ/(α+2ξ^1.5) ≈ 1/(π√Ξ)
    let tail = 1.0 / (std::f64::consts::PI * 2000f64.sqrt());
    assert!((prev - tail).abs() < 0.05 * tail, "{prev} vs {tail}");
}

#[test]
fn heat_field_requires_dalang() {
    let model = LevyModel::stable(1.0, 1.0).unwrap();
    let err = FieldSampler::new(&model, FieldKind::U { t: 1.0 }, SpectralGrid::new(100.0, 64).unwrap()).unwrap_err();
    assert!(err.is_non_convergence(), "{err}");
}

#[test]
fn heat_field_vanishes_at_small_time() {
    let model = brownian();
    let grid = SpectralGrid::new(2e4, 1 << 14).unwrap();
    let s = FieldSampler::new(&model, FieldKind::U { t: 1e-6 }, grid).unwrap();
    let exact = kernel::covariance(&model, 0.0, KernelKind::VarU { t: 1e-6 }, 0.0, Tolerance::relative(1e-8)).unwrap();
    assert!(exact.value < 1e-3);
    let space = SpatialGrid::new(0.01, 1).unwrap();
    let m: Moments = (0..200).map(|i| s.sample(1, i, &space).values[0].powi(2)).collect();
    assert!(m.mean() < 1e-3);
}

#[test]
fn heat_variance_matches_closed_form() {
    // brownian κ=1: Var U(1, x) = 1/√(2π)
    let oracle = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let model = brownian();
    let cutoff = 400.0;
    let s = FieldSampler::new(&model, FieldKind::U { t: 1.0 }, SpectralGrid::new(cutoff, 8000).unwrap()).unwrap();
    assert_relative_eq!(s.diagnostics().exact, oracle, max_relative = 1e-7);
    let tail = 1.0 / (2.0 * std::f64::consts::PI * cutoff);
    assert!((s.diagnostics().discrete + tail - oracle).abs() < 1e-6);
    let space = SpatialGrid::new(0.5, 1).unwrap();
    let m: Moments = (0..4000).map(|i| s.sample(4, i, &space).values[0].powi(2)).collect();
    assert!((m.mean() - s.diagnostics().discrete).abs() < 4.0 * m.std_error());
}

#[test]
fn empirical_covariance_matches_synthesized_covariance() {
    let model = brownian();
    let grid = SpectralGrid::new(40.0, 400).unwrap();
    let s = FieldSampler::new(&model, FieldKind::Eta { alpha: 2.0 }, grid).unwrap();
    let space = SpatialGrid::new(0.5, 3).unwrap();
    let mut acc = [Moments::new(), Moments::new(), Moments::new()];
    for i in 0..3000 {
        let v = s.sample(21, i, &space).values;
        for (j, a) in acc.iter_mut().enumerate() {
            a.push(v[0] * v[j]);
        }
    }
    for (j, a) in acc.iter().enumerate() {
        let r = 0.5 * j as f64;
        let exact = s.discrete_covariance(r);
        assert!((a.mean() - exact).abs() < 4.0 * a.std_error(), "r={r}");
        assert!((exact - kernel::brownian_u_alpha(1.0, 2.0, r)).abs() < 0.01);
    }
}

#[test]
fn structure_function_identity() {
    let s =
        FieldSampler::new(&stable15(), FieldKind::Eta { alpha: 0.5 }, SpectralGrid::new(100.0, 1000).unwrap()).unwrap();
    for r in [0.01, 0.3, 2.0] {
        let d = discrete_structure(s.grid(), s.amplitudes(), r);
        assert_relative_eq!(d, 2.0 * (s.discrete_covariance(0.0) - s.discrete_covariance(r)), max_relative = 1e-9);
    }
}

#[test]
fn lag_band_enforced() {
    let model = stable15();
    let grid = SpectralGrid::new(1000.0, 1 << 14).unwrap();
    let space = SpatialGrid::new(0.1, 1024).unwrap();
    let kind = FieldKind::Eta { alpha: 1e-3 };
    let band = LagBand::for_field(&model, &kind, &grid, &space).unwrap();
    assert!(band.lower >= 0.1 && band.upper > band.lower);
    let good = [1usize, 2, 3, 4, 6, 8, 11, 16, 23, 32];
    assert!(band.check(&good, &space).is_ok());
    match band.check(&[1, 2, 3, 4, 5, 6, 7, 8], &space) {
        Err(Error::LagBand { lower, upper, .. }) => assert_eq!((lower, upper), (band.lower, band.upper)),
        other => panic!("{other:?}"),
    }
    assert!(band.check(&[1, 2, 4, 8, 16, 32, 64, 2000], &space).is_err());
}

#[test]
fn structure_accumulator_merges_like_single_pass() {
    let lags = vec![1usize, 2, 4];
    let space = SpatialGrid::new(0.1, 50).unwrap();
    let fields: Vec<Vec<f64>> = (0..40).map(|i| (0..50).map(|j| ((i * 7 + j * j) % 17) as f64).collect()).collect();
    let mut all = StructureAccumulator::new(lags.clone());
    let mut left = StructureAccumulator::new(lags.clone());
    let mut right = StructureAccumulator::new(lags);
    for (i, f) in fields.iter().enumerate() {
        all.push(i as u64, f);
        if i % 3 == 0 {
            left.push(i as u64, f)
        } else {
            right.push(i as u64, f)
        }
    }
    left.merge(&right);
    let a = all.fit(&space).unwrap();
    let b = left.fit(&space).unwrap();
    assert_relative_eq!(a.slope, b.slope, max_relative = 1e-12);
    assert_relative_eq!(a.stderr, b.stderr, max_relative = 1e-9);
}
