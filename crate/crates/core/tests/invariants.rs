use proptest::prelude::*;
use stokeslab_core::norms::{lp_integral, PointwiseField};
use stokeslab_core::{
    gagliardo_seminorm, gauss_riesz, heat_kernel, tensor_b, LatticeResolution, QuadratureSpec,
    RegionSpec, SeminormRequest, SpaceTimePoint, SpatialProfile, TemporalProfile,
};

fn point(x1: f64, x2: f64, xn: f64, t: f64) -> SpaceTimePoint {
    SpaceTimePoint::new(vec![x1, x2], xn, t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn heat_kernel_parabolic_scaling(
        x1 in -3.0..3.0f64,
        x2 in -3.0..3.0f64,
        xn in 0.0..3.0f64,
        t in 0.05..4.0f64,
        l in prop::sample::select(vec![0.5, 2.0, 10.0]),
    ) {
        let g = heat_kernel(&point(x1, x2, xn, t));
        let scaled = heat_kernel(&point(l * x1, l * x2, l * xn, l * l * t));
        let expect = g / (l * l * l);
        prop_assume!(expect > 1e-250);
        prop_assert!(((scaled - expect) / expect).abs() < 1e-14);
    }

    #[test]
    fn char_sum_blocks_are_disjoint_and_shrink(a in 0.05..0.95f64, k_max in 1usize..200) {
        let blocks = TemporalProfile::char_sum(a, k_max).unwrap().blocks();
        prop_assert_eq!(blocks.len(), k_max);
        let mut upper_prev = 1.0;
        for (k, &(lo, hi)) in blocks.iter().enumerate() {
            let k = (k + 1) as f64;
            prop_assert!(lo < hi && hi < upper_prev);
            // Mean value theorem on (2k, 2k+1).
            let floor = a * 3f64.powf(-1.0 - a) * k.powf(-1.0 - a);
            prop_assert!(hi - lo >= floor * (1.0 - 1e-12));
            upper_prev = lo;
        }
    }

    #[test]
    fn seminorm_grows_as_cutoff_shrinks(
        a in 0.2..0.8f64,
        k_max in 1usize..12,
        p in 1.5..4.0f64,
        shrink in 0.05..0.95f64,
    ) {
        let g = TemporalProfile::char_sum(a, k_max).unwrap();
        let s = 0.5 - 0.5 / p;
        let q = QuadratureSpec::default();
        let wide = SeminormRequest::new(s, p, 0.0, 1.0, 0.05).unwrap();
        let narrow = SeminormRequest::new(s, p, 0.0, 1.0, 0.05 * shrink).unwrap();
        let (w, n) = (gagliardo_seminorm(&g, &wide, &q).unwrap(), gagliardo_seminorm(&g, &narrow, &q).unwrap());
        prop_assert!(n >= w * (1.0 - 1e-12), "delta shrink lowered {} to {}", w, n);
    }

    #[test]
    fn spatial_bump_is_nonnegative_and_supported(r in 0.0..8.0f64, theta in 0.0..std::f64::consts::TAU) {
        let y = [r * theta.cos(), r * theta.sin()];
        for profile in [
            SpatialProfile::box_annulus(3).unwrap(),
            SpatialProfile::radial_annulus(3, 1.5, 2.0).unwrap(),
            SpatialProfile::radial_annulus(3, 1.5, 2.0).unwrap().with_sector(std::f64::consts::FRAC_PI_2).unwrap(),
        ] {
            let v = profile.eval(&y);
            prop_assert!(v >= 0.0);
            if r <= profile.inner_radius || r >= profile.outer_radius {
                prop_assert_eq!(v, 0.0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tensor_b_is_odd_in_x1(
        x1 in 0.05..1.5f64,
        x2 in -1.5..1.5f64,
        xn in 0.05..1.5f64,
        t in 0.05..1.0f64,
    ) {
        let q = QuadratureSpec::default();
        let b = tensor_b(1, &point(x1, x2, xn, t), &q).unwrap();
        let mirror = tensor_b(1, &point(-x1, x2, xn, t), &q).unwrap();
        prop_assert!((b + mirror).abs() < 1e-8, "B = {}, mirrored B = {}", b, mirror);
    }

    #[test]
    fn riesz_integral_is_odd_and_splits_exactly(
        x1 in 0.1..5.0f64,
        x2 in -5.0..5.0f64,
        log_t in -4.0..0.0f64,
    ) {
        let q = QuadratureSpec::default();
        let t = 10f64.powf(log_t);
        let a = gauss_riesz(&[x1, x2], t, &q).unwrap();
        let b = gauss_riesz(&[-x1, x2], t, &q).unwrap();
        prop_assert_eq!(a.total, a.leading + a.remainder);
        prop_assert!((a.total + b.total).abs() <= 1e-10 * a.total.abs().max(1.0));
    }

    #[test]
    fn lp_norm_is_monotone_in_region(r1 in 0.2..0.9f64, gap in 0.05..0.5f64, p in 1.0..6.0f64) {
        let r2 = (r1 + gap).min(1.0);
        prop_assume!(r2 - r1 >= 0.05);
        let field = PointwiseField::new(3, |x: &SpaceTimePoint| {
            Ok((1.0 + x.x_normal) * (x.tangential_norm_sq() - x.t).cos().abs() + 0.1)
        });
        let res = LatticeResolution { normal: 2, tangential: 1, time: 3, order: 4 };
        let region = |r| RegionSpec::new(r, 0.0, 3).unwrap().with_resolution(res);
        let small = lp_integral(&field, p, &region(r1)).unwrap();
        let large = lp_integral(&field, p, &region(r2)).unwrap();
        prop_assert!(small.norm <= large.norm, "r {} -> {}, r {} -> {}", r1, small.norm, r2, large.norm);
    }
}
